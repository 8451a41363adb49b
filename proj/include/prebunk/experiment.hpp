#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prebunk/baselines.hpp"
#include "prebunk/config.hpp"
#include "prebunk/diffusion.hpp"
#include "prebunk/errors.hpp"
#include "prebunk/graph.hpp"
#include "prebunk/rng.hpp"
#include "prebunk/solver.hpp"

namespace prebunk {

// --- parameter synthesis ------------------------------------------------------

struct SynthesizedInstance {
    Graph graph;  // same structure as the input, probabilities replaced
    NodeParams params;
};

// UPFD-style synthesis: p_uv = c * n_share(v) / D clamped to [0,1],
// q_v = (n_fake+1)/(n_share+2), eps ~ N_[0,1](mu_eps, var_eps); the collapsed
// root (the seed) gets q = 1.
inline SynthesizedInstance synthesize_params_upfd(const Graph& graph, const NodeStats& stats,
                                                  double c, double mu_eps, double var_eps,
                                                  std::uint64_t rng_seed) {
    if (stats.total_news == 0) throw ConfigError("upfd synthesis: D = 0");
    stats.validate();
    if (stats.n_share.size() != graph.node_count())
        throw ConfigError("upfd synthesis: stats do not match the graph");
    const double d = static_cast<double>(stats.total_news);

    std::vector<double> p(graph.edge_count());
    for (std::size_t e = 0; e < graph.edge_count(); ++e) {
        const NodeId v = graph.edge(e).dst;
        p[e] = std::min(1.0, c * static_cast<double>(stats.n_share[v]) / d);
    }

    SynthesizedInstance out{with_probabilities(graph, p), {}};
    out.params.q.resize(graph.node_count());
    out.params.eps.resize(graph.node_count());
    Rng rng(rng_seed);
    for (NodeId v = 0; v < graph.node_count(); ++v)
        out.params.q[v] = (stats.n_fake[v] + 1.0) / (stats.n_share[v] + 2.0);
    for (NodeId v = 0; v < graph.node_count(); ++v)
        out.params.eps[v] = rng.next_truncated_normal(mu_eps, var_eps, 0.0, 1.0);
    if (auto root = graph.find(kMergedRootLabel)) out.params.q[*root] = 1.0;
    return out;
}

// Weighted-cascade synthesis: p_uv = 1 / d_in(v), q ~ N_[0,1](mu_q, var_q),
// eps ~ N_[0,1](mu_eps, var_eps).
inline SynthesizedInstance synthesize_params_wc(const Graph& graph, double mu_q, double var_q,
                                                double mu_eps, double var_eps,
                                                std::uint64_t rng_seed) {
    std::vector<double> p(graph.edge_count());
    for (std::size_t e = 0; e < graph.edge_count(); ++e) {
        const NodeId v = graph.edge(e).dst;
        const std::size_t din = graph.in_degree(v);
        if (din == 0) throw InvariantError("edge into a node with in-degree 0");
        p[e] = 1.0 / static_cast<double>(din);
    }
    SynthesizedInstance out{with_probabilities(graph, p), {}};
    out.params.q.resize(graph.node_count());
    out.params.eps.resize(graph.node_count());
    Rng rng(rng_seed);
    for (NodeId v = 0; v < graph.node_count(); ++v)
        out.params.q[v] = rng.next_truncated_normal(mu_q, var_q, 0.0, 1.0);
    for (NodeId v = 0; v < graph.node_count(); ++v)
        out.params.eps[v] = rng.next_truncated_normal(mu_eps, var_eps, 0.0, 1.0);
    return out;
}

// `count` seeds drawn uniformly from the `pool` nodes with the highest out-degree
// (ties by node index).
inline std::vector<NodeId> pick_top_outdegree_seeds(const Graph& graph, std::size_t count,
                                                    std::size_t pool, std::uint64_t rng_seed) {
    if (count == 0) throw ConfigError("seed count must be positive");
    std::vector<NodeId> nodes(graph.node_count());
    for (NodeId v = 0; v < graph.node_count(); ++v) nodes[v] = v;
    std::sort(nodes.begin(), nodes.end(), [&](NodeId a, NodeId b) {
        const auto da = graph.out_degree(a), db = graph.out_degree(b);
        if (da != db) return da > db;
        return a < b;
    });
    if (pool > nodes.size()) pool = nodes.size();
    nodes.resize(pool);
    if (count > nodes.size()) throw ConfigError("seed count exceeds the candidate pool");
    Rng rng(rng_seed);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(nodes.size() - i));
        std::swap(nodes[i], nodes[j]);
    }
    nodes.resize(count);
    std::sort(nodes.begin(), nodes.end());
    return nodes;
}

// Observed parameters under measurement noise: q_obs = clamp(q + delta, 0, 1)
// with delta ~ N(0, sigma_delta_sq), and only the average intervention effect
// available (eps_obs = mean_eps for every node). The caller keeps the true
// params for simulation; selection sees only the observed copy.
inline NodeParams apply_observation_noise(const NodeParams& true_params, double sigma_delta_sq,
                                          double mean_eps, std::uint64_t rng_seed) {
    if (sigma_delta_sq < 0.0) throw ConfigError("negative observation-noise variance");
    NodeParams obs;
    obs.q = true_params.q;
    obs.eps.assign(true_params.eps.size(), mean_eps);
    if (sigma_delta_sq > 0.0) {
        Rng rng(rng_seed);
        const double sd = std::sqrt(sigma_delta_sq);
        for (double& q : obs.q) q = std::clamp(q + rng.next_normal(0.0, sd), 0.0, 1.0);
    }
    return obs;
}

// --- experiment cells ----------------------------------------------------------

struct CurvePoint {
    std::string algorithm;
    std::size_t k = 0;
    double mean_spread = 0.0;
    double stderr_spread = 0.0;
    double relative_spread = 1.0;
};

struct ExperimentResult {
    std::vector<CurvePoint> points;
    std::map<std::string, double> selection_ms;  // selection wall-clock per curve label
};

struct ExperimentInputs {
    Graph graph;
    NodeParams params;
    std::vector<NodeId> seeds;
};

// Materializes graph, parameters and seed set per the config's mode.
inline ExperimentInputs load_experiment_inputs(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.dataset.empty()) throw ConfigError("config is missing `dataset`");
    Graph raw = cfg.undirected ? load_undirected_edge_list(cfg.dataset)
                               : load_edge_list(cfg.dataset, 1.0);
    ExperimentInputs inputs;
    if (cfg.mode == "upfd") {
        if (cfg.stats_file.empty()) throw ConfigError("upfd mode requires `stats`");
        NodeStats stats = load_node_stats(raw, cfg.stats_file);
        auto synth = synthesize_params_upfd(raw, stats, cfg.c, cfg.mu_eps, cfg.var_eps,
                                            derive_seed(cfg.master_seed, 0x5eed0001));
        inputs.graph = std::move(synth.graph);
        inputs.params = std::move(synth.params);
    } else if (cfg.mode == "wc") {
        auto synth = synthesize_params_wc(raw, cfg.mu_q, cfg.var_q, cfg.mu_eps, cfg.var_eps,
                                          derive_seed(cfg.master_seed, 0x5eed0001));
        inputs.graph = std::move(synth.graph);
        inputs.params = std::move(synth.params);
    } else {
        if (cfg.params_file.empty()) throw ConfigError("explicit mode requires `params`");
        inputs.params = load_node_params(raw, cfg.params_file);
        inputs.graph = std::move(raw);
    }

    if (!cfg.seed_labels.empty()) {
        for (const auto& label : cfg.seed_labels) inputs.seeds.push_back(inputs.graph.require(label));
    } else if (cfg.mode == "upfd") {
        inputs.seeds.push_back(inputs.graph.require(kMergedRootLabel));
    } else {
        inputs.seeds = pick_top_outdegree_seeds(inputs.graph, cfg.seed_count, cfg.seed_pool,
                                                derive_seed(cfg.master_seed, 0x5eed0002));
    }
    return inputs;
}

namespace detail {

inline std::uint64_t label_hash(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

struct EstimateOnly {
    double mean = 0.0;
    double se = 0.0;
};

// Positive-spread Monte Carlo under plain IC with blocked nodes.
inline EstimateOnly estimate_ic(const Graph& g, std::span<const NodeId> seeds,
                                std::span<const NodeId> blocked, std::size_t runs,
                                std::uint64_t master, unsigned workers) {
    auto est = estimate_over_runs(runs, master, workers, [&]() {
        return [&g, seeds, blocked](std::uint64_t seed) {
            auto out = simulate_ic(g, seeds, blocked, seed);
            return std::pair<std::size_t, std::size_t>(out.positive_count, out.negative_count);
        };
    });
    return {est.mean_positive, est.stderr_positive};
}

// Positive-spread Monte Carlo under COICM with a corrective campaign.
inline EstimateOnly estimate_coicm(const Graph& g, std::span<const NodeId> seeds_m,
                                   std::span<const NodeId> seeds_t, std::int32_t delay,
                                   std::size_t runs, std::uint64_t master, unsigned workers) {
    auto est = estimate_over_runs(runs, master, workers, [&]() {
        return [&g, seeds_m, seeds_t, delay](std::uint64_t seed) {
            auto out = simulate_coicm(g, seeds_m, seeds_t, delay, seed);
            return std::pair<std::size_t, std::size_t>(out.positive_count, out.negative_count);
        };
    });
    return {est.mean_positive, est.stderr_positive};
}

inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace detail

// Non-seed candidate pool every heuristic baseline selects from.
inline std::vector<NodeId> non_seed_candidates(const Graph& graph, std::span<const NodeId> seeds) {
    auto mask = target_mask(graph.node_count(), seeds);
    std::vector<NodeId> out;
    out.reserve(graph.node_count() - seeds.size());
    for (NodeId v = 0; v < graph.node_count(); ++v)
        if (!mask[v]) out.push_back(v);
    return out;
}

// Dispatches one selection algorithm at budget k on *observed* parameters.
inline InterventionSet select_targets(const std::string& algorithm, const Graph& graph,
                                      const NodeParams& observed, std::span<const NodeId> seeds,
                                      std::size_t k, const ExperimentConfig& cfg,
                                      std::uint64_t selection_seed) {
    if (algorithm == "mia-npp") return mia_npp(graph, observed, seeds, k, cfg.theta, cfg.workers);
    if (algorithm == "cmia-o") return cmia_o_targets(graph, seeds, k, cfg.theta, {}, cfg.workers);
    if (algorithm == "advanced-greedy")
        return advanced_greedy_targets(graph, seeds, k, cfg.rho, selection_seed);
    auto candidates = non_seed_candidates(graph, seeds);
    if (algorithm == "random") return random_targets(candidates, std::min(k, candidates.size()), selection_seed);
    if (algorithm == "gullible") return gullible_targets(observed, candidates, k);
    if (algorithm == "degree") return degree_targets(graph, candidates, k);
    if (algorithm == "distance") return distance_targets(graph, seeds, candidates, k);
    throw ConfigError("unknown algorithm: " + algorithm);
}

namespace detail {

// Shared evaluation scaffolding: one k=0 estimate reused by every curve, then one
// estimate per (curve, k>0) on the true parameters. Curves whose selection is
// incremental reuse prefixes of one budget-k_max selection.
class CurveBuilder {
public:
    CurveBuilder(const ExperimentConfig& cfg, const Graph& graph, const NodeParams& true_params,
                 std::span<const NodeId> seeds)
        : cfg_(cfg), graph_(graph), params_(true_params), seeds_(seeds.begin(), seeds.end()) {
        base_ = estimate_spread(graph_, params_, seeds_, InterventionSet::empty(), cfg_.runs,
                                derive_seed(cfg_.master_seed, 0xba5e), cfg_.workers);
    }

    double baseline_mean() const { return base_.mean_positive; }

    // Appends rows for every k in the grid, reusing the shared k=0 estimate.
    void curve_for(ExperimentResult& result, const std::string& label, const InterventionSet& full) {
        for (std::size_t k : cfg_.k_grid) {
            CurvePoint pt;
            pt.algorithm = label;
            pt.k = k;
            if (k == 0) {
                pt.mean_spread = base_.mean_positive;
                pt.stderr_spread = base_.stderr_positive;
                pt.relative_spread = 1.0;
            } else {
                const std::uint64_t eval_seed =
                    cfg_.paired ? derive_seed(cfg_.master_seed, 0xe7a1000 + k)
                                : derive_seed(cfg_.master_seed ^ label_hash(label), 0xe7a1000 + k);
                auto est = estimate_spread(graph_, params_, seeds_, full.prefix(k), cfg_.runs,
                                           eval_seed, cfg_.workers);
                pt.mean_spread = est.mean_positive;
                pt.stderr_spread = est.stderr_positive;
                pt.relative_spread = est.mean_positive / base_.mean_positive;
            }
            result.points.push_back(std::move(pt));
        }
    }

private:
    const ExperimentConfig& cfg_;
    const Graph& graph_;
    const NodeParams& params_;
    std::vector<NodeId> seeds_;
    SpreadEstimate base_;
};

}  // namespace detail

// Suppression curves for each configured algorithm: selection once per algorithm
// at the largest budget on observed parameters, evaluation by Monte Carlo on the
// true parameters.
inline ExperimentResult run_suppression_experiment(const ExperimentConfig& cfg,
                                                   const ExperimentInputs& inputs,
                                                   const NodeParams* observed = nullptr) {
    cfg.validate();
    const NodeParams& obs = observed ? *observed : inputs.params;
    detail::CurveBuilder builder(cfg, inputs.graph, inputs.params, inputs.seeds);
    ExperimentResult result;
    const std::size_t k_max = cfg.k_grid.back();
    for (const auto& algorithm : cfg.algorithms) {
        const auto start = std::chrono::steady_clock::now();
        InterventionSet full = select_targets(algorithm, inputs.graph, obs, inputs.seeds, k_max, cfg,
                                              derive_seed(cfg.master_seed, detail::label_hash(algorithm)));
        result.selection_ms[algorithm] = detail::elapsed_ms(start);
        builder.curve_for(result, algorithm, full);
    }
    return result;
}

inline ExperimentResult run_suppression_experiment(const ExperimentConfig& cfg) {
    auto inputs = load_experiment_inputs(cfg);
    return run_suppression_experiment(cfg, inputs);
}

// Appendix-A style sweep: MIA-NPP selection repeated per theta; wall-clock covers
// selection only. Curve labels carry the theta value.
inline ExperimentResult run_theta_sensitivity(const ExperimentConfig& cfg,
                                              const ExperimentInputs& inputs,
                                              std::span<const double> thetas) {
    cfg.validate();
    if (thetas.empty()) throw ConfigError("theta list is empty");
    // Paired evaluation worlds across thetas keep the curves comparable.
    ExperimentConfig paired_cfg = cfg;
    paired_cfg.paired = true;
    detail::CurveBuilder builder(paired_cfg, inputs.graph, inputs.params, inputs.seeds);
    ExperimentResult result;
    const std::size_t k_max = cfg.k_grid.back();
    for (double theta : thetas) {
        char label[64];
        std::snprintf(label, sizeof label, "mia-npp[theta=%g]", theta);
        const auto start = std::chrono::steady_clock::now();
        InterventionSet full = mia_npp(inputs.graph, inputs.params, inputs.seeds, k_max, theta, cfg.workers);
        result.selection_ms[label] = detail::elapsed_ms(start);
        builder.curve_for(result, label, full);
    }
    return result;
}

inline ExperimentResult run_theta_sensitivity(const ExperimentConfig& cfg) {
    auto inputs = load_experiment_inputs(cfg);
    return run_theta_sensitivity(cfg, inputs, cfg.thetas);
}

// Noise-robustness experiment: MIA-NPP selection on observed parameters per noise
// variance (plus the full-observation reference curve), evaluation on true ones.
inline ExperimentResult run_noise_experiment(const ExperimentConfig& cfg,
                                             const ExperimentInputs& inputs) {
    cfg.validate();
    // Paired worlds across noise levels: curve differences then reflect target
    // differences, not fresh Monte Carlo noise.
    ExperimentConfig paired_cfg = cfg;
    paired_cfg.paired = true;
    detail::CurveBuilder builder(paired_cfg, inputs.graph, inputs.params, inputs.seeds);
    ExperimentResult result;
    const std::size_t k_max = cfg.k_grid.back();
    {
        const auto start = std::chrono::steady_clock::now();
        InterventionSet full = mia_npp(inputs.graph, inputs.params, inputs.seeds, k_max, cfg.theta, cfg.workers);
        result.selection_ms["mia-npp"] = detail::elapsed_ms(start);
        builder.curve_for(result, "mia-npp", full);
    }
    for (std::size_t i = 0; i < cfg.noise_vars.size(); ++i) {
        const double var = cfg.noise_vars[i];
        NodeParams observed = apply_observation_noise(inputs.params, var, cfg.mu_eps,
                                                      derive_seed(cfg.master_seed, 0x0b5e000 + i));
        char label[64];
        std::snprintf(label, sizeof label, "mia-npp[noise=%g]", var);
        const auto start = std::chrono::steady_clock::now();
        InterventionSet full = mia_npp(inputs.graph, observed, inputs.seeds, k_max, cfg.theta, cfg.workers);
        result.selection_ms[label] = detail::elapsed_ms(start);
        builder.curve_for(result, label, full);
    }
    return result;
}

inline ExperimentResult run_noise_experiment(const ExperimentConfig& cfg) {
    auto inputs = load_experiment_inputs(cfg);
    return run_noise_experiment(cfg, inputs);
}

// Nodes reachable from the seeds within tau hops (tau = 0 gives the seeds).
inline std::vector<NodeId> reachable_within(const Graph& graph, std::span<const NodeId> seeds,
                                            std::size_t tau) {
    std::vector<std::uint8_t> seen = target_mask(graph.node_count(), seeds);
    std::vector<NodeId> frontier(seeds.begin(), seeds.end()), out(seeds.begin(), seeds.end()), next;
    for (std::size_t hop = 0; hop < tau && !frontier.empty(); ++hop) {
        next.clear();
        for (NodeId u : frontier)
            for (std::uint32_t e : graph.out_edges(u)) {
                const NodeId v = graph.edge(e).dst;
                if (seen[v]) continue;
                seen[v] = 1;
                next.push_back(v);
                out.push_back(v);
            }
        frontier.swap(next);
    }
    return out;
}

// Blocking / clarification / prebunking comparison. Each family runs under its
// own diffusion model and is normalized by its own no-intervention spread.
inline ExperimentResult run_pbc_comparison(const ExperimentConfig& cfg,
                                           const ExperimentInputs& inputs) {
    cfg.validate();
    ExperimentResult result;
    const std::size_t k_max = cfg.k_grid.back();
    const Graph& g = inputs.graph;
    std::span<const NodeId> seeds = inputs.seeds;

    auto add_curve = [&](const std::string& label, double base_mean,
                         auto&& eval_at_k) {
        for (std::size_t k : cfg.k_grid) {
            CurvePoint pt;
            pt.algorithm = label;
            pt.k = k;
            if (k == 0) {
                pt.mean_spread = base_mean;
                pt.relative_spread = 1.0;
            } else {
                auto [mean, se] = eval_at_k(k);
                pt.mean_spread = mean;
                pt.stderr_spread = se;
                pt.relative_spread = mean / base_mean;
            }
            result.points.push_back(std::move(pt));
        }
    };

    // Blocking: advanced-greedy blockers removed from the IC cascade.
    {
        const auto start = std::chrono::steady_clock::now();
        InterventionSet blockers = advanced_greedy_targets(g, seeds, k_max, cfg.rho,
                                                           derive_seed(cfg.master_seed, 0xb10c));
        result.selection_ms["blocking"] = detail::elapsed_ms(start);
        auto base = detail::estimate_ic(g, seeds, {}, cfg.runs, derive_seed(cfg.master_seed, 0xba5e), cfg.workers);
        add_curve("blocking", base.mean, [&](std::size_t k) {
            auto est = detail::estimate_ic(g, seeds, blockers.prefix(k).targets, cfg.runs,
                                           derive_seed(cfg.master_seed, 0xe7a2000 + k), cfg.workers);
            return std::pair<double, double>(est.mean, est.se);
        });
    }

    // Clarification: corrective seeds launched after tau steps, no seed within tau
    // hops of the misinformation seeds.
    for (std::size_t tau : cfg.taus) {
        auto excluded = reachable_within(g, seeds, tau);
        const auto start = std::chrono::steady_clock::now();
        InterventionSet corrective = cmia_o_targets(g, seeds, k_max, cfg.theta, excluded, cfg.workers);
        char label[64];
        std::snprintf(label, sizeof label, "clarification[tau=%zu]", tau);
        result.selection_ms[label] = detail::elapsed_ms(start);
        auto base = detail::estimate_coicm(g, seeds, {}, static_cast<std::int32_t>(tau), cfg.runs,
                                           derive_seed(cfg.master_seed, 0xba5e), cfg.workers);
        add_curve(label, base.mean, [&](std::size_t k) {
            auto est = detail::estimate_coicm(g, seeds, corrective.prefix(k).targets,
                                              static_cast<std::int32_t>(tau), cfg.runs,
                                              derive_seed(cfg.master_seed, 0xe7a3000 + k), cfg.workers);
            return std::pair<double, double>(est.mean, est.se);
        });
    }

    // Prebunking: MIA-NPP under IC-N, intervention strength varied through the
    // mean of the eps distribution.
    for (std::size_t i = 0; i < cfg.mu_eps_grid.size(); ++i) {
        const double mu = cfg.mu_eps_grid[i];
        NodeParams params = inputs.params;
        Rng rng(derive_seed(cfg.master_seed, 0xe95000 + i));
        for (double& e : params.eps) e = rng.next_truncated_normal(mu, cfg.var_eps, 0.0, 1.0);
        char label[64];
        std::snprintf(label, sizeof label, "prebunking[mu_eps=%g]", mu);
        const auto start = std::chrono::steady_clock::now();
        InterventionSet x = mia_npp(g, params, seeds, k_max, cfg.theta, cfg.workers);
        result.selection_ms[label] = detail::elapsed_ms(start);
        auto base = estimate_spread(g, params, seeds, InterventionSet::empty(), cfg.runs,
                                    derive_seed(cfg.master_seed, 0xba5e), cfg.workers);
        add_curve(label, base.mean_positive, [&](std::size_t k) {
            auto est = estimate_spread(g, params, seeds, x.prefix(k), cfg.runs,
                                       derive_seed(cfg.master_seed, 0xe7a4000 + k), cfg.workers);
            return std::pair<double, double>(est.mean_positive, est.stderr_positive);
        });
    }
    return result;
}

inline ExperimentResult run_pbc_comparison(const ExperimentConfig& cfg) {
    auto inputs = load_experiment_inputs(cfg);
    return run_pbc_comparison(cfg, inputs);
}

}  // namespace prebunk
