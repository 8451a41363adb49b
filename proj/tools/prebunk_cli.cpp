// Command-line front end: ingest | select | simulate | experiment.
// Exit codes: 0 success, 2 usage/config error, 3 data error, 4 resource budget.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "prebunk/prebunk.hpp"

namespace {

using namespace prebunk;

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& given) {
    if (given) return *given;
    std::random_device rd;
    std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    std::cerr << "seed: " << seed << "\n";
    return seed;
}

std::vector<NodeId> parse_node_list(const Graph& g, const std::string& csv) {
    std::vector<NodeId> out;
    for (const auto& label : detail::split_list(csv)) out.push_back(g.require(label));
    return out;
}

struct IngestArgs {
    std::string edges, trees;
    double default_p = -1.0;
    std::string out_graph = "graph.tsv";
    std::string out_stats = "stats.tsv";
};

int run_ingest(const IngestArgs& a) {
    if (a.edges.empty() == a.trees.empty())
        throw ConfigError("ingest needs exactly one of --edges or --trees");
    if (!a.edges.empty()) {
        std::optional<double> def;
        if (a.default_p >= 0.0) def = a.default_p;
        Graph g = load_edge_list(a.edges, def);
        save_edge_list(g, a.out_graph);
        std::cout << "wrote " << a.out_graph << " (" << g.node_count() << " nodes, "
                  << g.edge_count() << " edges)\n";
        return 0;
    }
    // Manifest: one `path<TAB>label` row per tree, label in {fake, real, true}.
    std::ifstream in(a.trees);
    if (!in) throw IoError("cannot open manifest: " + a.trees);
    std::vector<std::string> files;
    std::vector<bool> labels;
    std::string line;
    std::size_t line_no = 0;
    const auto base = std::filesystem::path(a.trees).parent_path();
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = detail::strip_cr(line);
        if (detail::is_comment_or_blank(sv)) continue;
        auto fields = detail::split_fields(sv);
        if (fields.size() != 2)
            throw ParseError(a.trees + ":" + std::to_string(line_no) + ": expected path<TAB>label");
        std::filesystem::path p(std::string(fields[0]));
        files.push_back(p.is_absolute() ? p.string() : (base / p).string());
        if (fields[1] == "fake")
            labels.push_back(true);
        else if (fields[1] == "real" || fields[1] == "true")
            labels.push_back(false);
        else
            throw ParseError(a.trees + ":" + std::to_string(line_no) + ": label must be fake|real|true");
    }
    auto [g, stats] = merge_diffusion_trees(files, labels);
    save_edge_list(g, a.out_graph);
    save_node_stats(g, stats, a.out_stats);
    std::cout << "wrote " << a.out_graph << " (" << g.node_count() << " nodes, " << g.edge_count()
              << " edges)\nwrote " << a.out_stats << " (D = " << stats.total_news << ")\n";
    return 0;
}

struct SelectArgs {
    std::string graph, params, algorithm, seed_nodes, out;
    std::size_t k = 0;
    double theta = 0.001;
    std::size_t rho = 100;
    std::optional<std::uint64_t> seed;
    unsigned workers = 1;
};

int run_select(const SelectArgs& a) {
    Graph g = load_edge_list(a.graph);
    if (a.seed_nodes.empty()) throw ConfigError("--seed-nodes is required");
    std::vector<NodeId> seeds = parse_node_list(g, a.seed_nodes);
    NodeParams params;
    if (!a.params.empty()) {
        params = load_node_params(g, a.params);
    } else {
        if (a.algorithm == "mia-npp" || a.algorithm == "gullible")
            throw ConfigError(a.algorithm + " requires --params");
        params.q.assign(g.node_count(), 1.0);
        params.eps.assign(g.node_count(), 1.0);
    }
    ExperimentConfig cfg;
    cfg.theta = a.theta;
    cfg.rho = a.rho;
    cfg.workers = a.workers;
    const std::uint64_t seed = resolve_seed(a.seed);
    InterventionSet x = select_targets(a.algorithm, g, params, seeds, a.k, cfg, seed);
    std::ostringstream body;
    for (NodeId v : x.targets) body << g.label(v) << "\n";
    std::cout << body.str();
    if (!a.out.empty()) {
        std::ofstream out(a.out);
        if (!out) throw IoError("cannot write: " + a.out);
        out << body.str();
    }
    return 0;
}

struct SimulateArgs {
    std::string graph, params, seed_nodes, targets, corrective, blocked, model = "icn";
    std::size_t runs = 1000;
    std::int32_t delay = 0;
    std::optional<std::uint64_t> seed;
    unsigned workers = 1;
};

int run_simulate(const SimulateArgs& a) {
    Graph g = load_edge_list(a.graph);
    if (a.seed_nodes.empty()) throw ConfigError("--seed-nodes is required");
    std::vector<NodeId> seeds = parse_node_list(g, a.seed_nodes);
    const std::uint64_t seed = resolve_seed(a.seed);
    SpreadEstimate est;
    if (a.model == "icn") {
        if (a.params.empty()) throw ConfigError("icn model requires --params");
        NodeParams params = load_node_params(g, a.params);
        InterventionSet x;
        if (!a.targets.empty()) x = InterventionSet::of(parse_node_list(g, a.targets));
        est = estimate_spread(g, params, seeds, x, a.runs, seed, a.workers);
    } else if (a.model == "ic") {
        std::vector<NodeId> blocked;
        if (!a.blocked.empty()) blocked = parse_node_list(g, a.blocked);
        est = detail::estimate_over_runs(a.runs, seed, a.workers, [&]() {
            return [&](std::uint64_t s) {
                auto out = simulate_ic(g, seeds, blocked, s);
                return std::pair<std::size_t, std::size_t>(out.positive_count, out.negative_count);
            };
        });
    } else if (a.model == "coicm") {
        std::vector<NodeId> corrective;
        if (!a.corrective.empty()) corrective = parse_node_list(g, a.corrective);
        est = detail::estimate_over_runs(a.runs, seed, a.workers, [&]() {
            return [&](std::uint64_t s) {
                auto out = simulate_coicm(g, seeds, corrective, a.delay, s);
                return std::pair<std::size_t, std::size_t>(out.positive_count, out.negative_count);
            };
        });
    } else {
        throw ConfigError("unknown model: " + a.model);
    }
    char buf[64];
    auto emit = [&](const char* key, double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        std::cout << key << "\t" << buf << "\n";
    };
    emit("mean_positive", est.mean_positive);
    emit("stderr_positive", est.stderr_positive);
    emit("mean_negative", est.mean_negative);
    emit("stderr_negative", est.stderr_negative);
    std::cout << "runs\t" << est.runs << "\n";
    return 0;
}

struct ExperimentArgs {
    std::string config, mode = "suppression", out_dir = ".";
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
};

int run_experiment(const ExperimentArgs& a) {
    ExperimentConfig cfg = parse_config_file(a.config);
    for (const auto& kv : a.overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got: " + kv);
        apply_config_entry(cfg, detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)));
    }
    if (a.seed) cfg.master_seed = *a.seed;
    if (a.workers) cfg.workers = *a.workers;
    cfg.validate();

    ExperimentResult result;
    if (a.mode == "suppression")
        result = run_suppression_experiment(cfg);
    else if (a.mode == "theta")
        result = run_theta_sensitivity(cfg);
    else if (a.mode == "noise")
        result = run_noise_experiment(cfg);
    else if (a.mode == "pbc")
        result = run_pbc_comparison(cfg);
    else
        throw ConfigError("unknown experiment mode: " + a.mode);

    std::filesystem::create_directories(a.out_dir);
    const std::string csv = a.out_dir + "/" + a.mode + ".csv";
    const std::string json = a.out_dir + "/" + a.mode + ".json";
    export_results(result, cfg, csv, ExportFormat::Csv);
    export_results(result, cfg, json, ExportFormat::Json);
    std::cout << "wrote " << csv << "\nwrote " << json << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"prebunking target selection and diffusion experiments"};
    app.require_subcommand(1);

    IngestArgs ingest;
    auto* cmd_ingest = app.add_subcommand("ingest", "validate datasets and write canonical graph/stats files");
    cmd_ingest->add_option("--edges", ingest.edges, "edge-list TSV (src<TAB>dst[<TAB>p])");
    cmd_ingest->add_option("--trees", ingest.trees, "manifest of diffusion trees (path<TAB>fake|real)");
    cmd_ingest->add_option("--default-p", ingest.default_p, "probability for rows without one");
    cmd_ingest->add_option("--out-graph", ingest.out_graph, "canonical graph output");
    cmd_ingest->add_option("--out-stats", ingest.out_stats, "node stats output (trees mode)");

    SelectArgs select;
    auto* cmd_select = app.add_subcommand("select", "pick intervention targets");
    cmd_select->add_option("--graph", select.graph, "canonical graph TSV")->required();
    cmd_select->add_option("--params", select.params, "node params TSV (node<TAB>q<TAB>eps)");
    cmd_select->add_option("--algorithm", select.algorithm, "mia-npp|random|gullible|degree|distance|advanced-greedy|cmia-o")->required();
    cmd_select->add_option("--k", select.k, "budget")->required();
    cmd_select->add_option("--theta", select.theta, "influence threshold");
    cmd_select->add_option("--rho", select.rho, "sampled worlds for advanced-greedy");
    cmd_select->add_option("--seed-nodes", select.seed_nodes, "comma-separated seed labels")->required();
    cmd_select->add_option("--seed", select.seed, "RNG seed (generated and printed when omitted)");
    cmd_select->add_option("--workers", select.workers, "worker threads");
    cmd_select->add_option("--out", select.out, "also write targets to this file");

    SimulateArgs simulate;
    auto* cmd_simulate = app.add_subcommand("simulate", "Monte Carlo spread estimate");
    cmd_simulate->add_option("--graph", simulate.graph)->required();
    cmd_simulate->add_option("--params", simulate.params, "node params TSV (icn model)");
    cmd_simulate->add_option("--seed-nodes", simulate.seed_nodes, "comma-separated seed labels")->required();
    cmd_simulate->add_option("--targets", simulate.targets, "prebunking targets (icn)");
    cmd_simulate->add_option("--blocked", simulate.blocked, "blocked nodes (ic)");
    cmd_simulate->add_option("--corrective", simulate.corrective, "corrective seeds (coicm)");
    cmd_simulate->add_option("--model", simulate.model, "icn|ic|coicm");
    cmd_simulate->add_option("--delay", simulate.delay, "corrective campaign delay (coicm)");
    cmd_simulate->add_option("--runs", simulate.runs, "simulation count");
    cmd_simulate->add_option("--seed", simulate.seed, "RNG seed (generated and printed when omitted)");
    cmd_simulate->add_option("--workers", simulate.workers, "worker threads");

    ExperimentArgs experiment;
    auto* cmd_experiment = app.add_subcommand("experiment", "run a configured experiment");
    cmd_experiment->add_option("--config", experiment.config, "key = value config file")->required();
    cmd_experiment->add_option("--mode", experiment.mode, "suppression|theta|noise|pbc");
    cmd_experiment->add_option("--out-dir", experiment.out_dir, "output directory");
    cmd_experiment->add_option("--set", experiment.overrides, "config overrides key=value");
    cmd_experiment->add_option("--seed", experiment.seed, "override master_seed");
    cmd_experiment->add_option("--workers", experiment.workers, "worker threads");

    try {
        app.parse(argc, argv);
        if (*cmd_ingest) return run_ingest(ingest);
        if (*cmd_select) return run_select(select);
        if (*cmd_simulate) return run_simulate(simulate);
        if (*cmd_experiment) return run_experiment(experiment);
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const prebunk::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const prebunk::ResourceError& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return 4;
    } catch (const prebunk::ParseError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const prebunk::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const prebunk::IndexError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
