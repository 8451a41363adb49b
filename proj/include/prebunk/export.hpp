#pragma once

#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "prebunk/config.hpp"
#include "prebunk/experiment.hpp"

namespace prebunk {

enum class ExportFormat : std::uint8_t { Csv, Json };

namespace detail {

inline std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["dataset"] = cfg.dataset;
    j["stats"] = cfg.stats_file;
    j["params"] = cfg.params_file;
    j["mode"] = cfg.mode;
    j["undirected"] = cfg.undirected;
    j["c"] = cfg.c;
    j["mu_eps"] = cfg.mu_eps;
    j["var_eps"] = cfg.var_eps;
    j["mu_q"] = cfg.mu_q;
    j["var_q"] = cfg.var_q;
    j["noise_vars"] = cfg.noise_vars;
    j["k_grid"] = cfg.k_grid;
    j["runs"] = cfg.runs;
    j["master_seed"] = cfg.master_seed;
    j["theta"] = cfg.theta;
    j["thetas"] = cfg.thetas;
    j["algorithms"] = cfg.algorithms;
    j["seeds"] = cfg.seed_labels;
    j["seed_count"] = cfg.seed_count;
    j["seed_pool"] = cfg.seed_pool;
    j["rho"] = cfg.rho;
    j["mu_eps_grid"] = cfg.mu_eps_grid;
    j["taus"] = cfg.taus;
    j["paired"] = cfg.paired;
    j["workers"] = cfg.workers;
    return j;
}

}  // namespace detail

// CSV schema: algorithm,k,mean_spread,stderr,relative_spread. Byte-stable for
// identical inputs. JSON additionally echoes the config, the master seed,
// selection wall-clocks and the code version.
inline void export_results(const ExperimentResult& result, const ExperimentConfig& cfg,
                           const std::string& path, ExportFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write results file: " + path);
    if (format == ExportFormat::Csv) {
        out << "algorithm,k,mean_spread,stderr,relative_spread\n";
        for (const auto& pt : result.points) {
            out << pt.algorithm << ',' << pt.k << ',' << detail::format_double(pt.mean_spread) << ','
                << detail::format_double(pt.stderr_spread) << ','
                << detail::format_double(pt.relative_spread) << '\n';
        }
    } else {
        nlohmann::json j;
        j["version"] = kVersion;
        j["config"] = detail::config_to_json(cfg);
        j["master_seed"] = cfg.master_seed;
        nlohmann::json curves = nlohmann::json::array();
        for (const auto& pt : result.points) {
            nlohmann::json row;
            row["algorithm"] = pt.algorithm;
            row["k"] = pt.k;
            row["mean_spread"] = pt.mean_spread;
            row["stderr"] = pt.stderr_spread;
            row["relative_spread"] = pt.relative_spread;
            curves.push_back(row);
        }
        j["curves"] = curves;
        nlohmann::json clocks;
        for (const auto& [label, ms] : result.selection_ms) clocks[label] = ms;
        j["selection_wall_clock_ms"] = clocks;
        out << j.dump(2) << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace prebunk
