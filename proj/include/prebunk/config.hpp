#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "prebunk/errors.hpp"

namespace prebunk {

inline constexpr const char* kVersion = "0.1.0";

inline const std::vector<std::string> kAllAlgorithms = {
    "mia-npp", "random", "gullible", "degree", "distance", "advanced-greedy", "cmia-o"};

// Flat `key = value` experiment description; lists are comma-separated.
struct ExperimentConfig {
    std::string dataset;      // edge-list TSV
    std::string stats_file;   // node stats TSV (upfd mode)
    std::string params_file;  // node params TSV (explicit mode)
    std::string mode = "wc";  // upfd | wc | explicit
    bool undirected = false;  // expand each input edge into both directions

    double c = 30.0;  // UPFD propagation proportionality constant
    double mu_eps = 0.5, var_eps = 0.1;
    double mu_q = 0.7, var_q = 0.3;

    std::vector<double> noise_vars = {0.0, 0.1, 0.5, 1.0};
    std::vector<std::size_t> k_grid = {0, 20, 40, 60, 80, 100, 120, 140, 160, 180, 200};
    std::size_t runs = 1000;
    std::uint64_t master_seed = 1;
    double theta = 0.001;
    std::vector<double> thetas = {0.1, 0.01, 0.001, 0.0001};
    std::vector<std::string> algorithms = kAllAlgorithms;

    std::vector<std::string> seed_labels;  // explicit seed nodes; empty = degree-based pick
    std::size_t seed_count = 5;            // picked uniformly from the top `seed_pool` out-degrees
    std::size_t seed_pool = 50;

    std::size_t rho = 100;  // sampled worlds for advanced-greedy
    std::vector<double> mu_eps_grid = {0.2, 0.5, 1.0};
    std::vector<std::size_t> taus = {0, 1};
    bool paired = false;  // share evaluation worlds across algorithms
    unsigned workers = 1;

    void validate() const {
        if (runs < 1) throw ConfigError("runs must be >= 1");
        if (k_grid.empty() || k_grid.front() != 0)
            throw ConfigError("k grid must start at 0");
        if (!std::is_sorted(k_grid.begin(), k_grid.end()) ||
            std::adjacent_find(k_grid.begin(), k_grid.end()) != k_grid.end())
            throw ConfigError("k grid must be strictly ascending");
        if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("theta must lie in (0,1]");
        for (double t : thetas)
            if (!(t > 0.0 && t <= 1.0)) throw ConfigError("theta values must lie in (0,1]");
        if (mode != "upfd" && mode != "wc" && mode != "explicit")
            throw ConfigError("mode must be upfd, wc or explicit");
        for (const auto& a : algorithms)
            if (std::find(kAllAlgorithms.begin(), kAllAlgorithms.end(), a) == kAllAlgorithms.end())
                throw ConfigError("unknown algorithm: " + a);
        if (var_eps < 0 || var_q < 0) throw ConfigError("negative variance");
        for (double v : noise_vars)
            if (v < 0) throw ConfigError("negative noise variance");
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    std::size_t e = s.find_last_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

template <typename T>
std::vector<T> parse_number_list(const std::string& s, const std::string& key) {
    std::vector<T> out;
    for (const auto& item : split_list(s)) {
        try {
            if constexpr (std::is_floating_point_v<T>)
                out.push_back(static_cast<T>(std::stod(item)));
            else
                out.push_back(static_cast<T>(std::stoull(item)));
        } catch (const std::exception&) {
            throw ConfigError("malformed value for " + key + ": '" + item + "'");
        }
    }
    return out;
}

inline bool parse_bool(const std::string& s, const std::string& key) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("malformed boolean for " + key + ": '" + s + "'");
}

}  // namespace detail

// Applies one `key = value` assignment (also used for CLI --set overrides).
inline void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    using detail::parse_bool;
    using detail::parse_number_list;
    try {
        if (key == "dataset") cfg.dataset = value;
        else if (key == "stats") cfg.stats_file = value;
        else if (key == "params") cfg.params_file = value;
        else if (key == "mode") cfg.mode = value;
        else if (key == "undirected") cfg.undirected = parse_bool(value, key);
        else if (key == "c") cfg.c = std::stod(value);
        else if (key == "mu_eps") cfg.mu_eps = std::stod(value);
        else if (key == "var_eps") cfg.var_eps = std::stod(value);
        else if (key == "mu_q") cfg.mu_q = std::stod(value);
        else if (key == "var_q") cfg.var_q = std::stod(value);
        else if (key == "noise_vars") cfg.noise_vars = parse_number_list<double>(value, key);
        else if (key == "k_grid") cfg.k_grid = parse_number_list<std::size_t>(value, key);
        else if (key == "runs") cfg.runs = std::stoull(value);
        else if (key == "master_seed") cfg.master_seed = std::stoull(value);
        else if (key == "theta") cfg.theta = std::stod(value);
        else if (key == "thetas") cfg.thetas = parse_number_list<double>(value, key);
        else if (key == "algorithms") cfg.algorithms = detail::split_list(value);
        else if (key == "seeds") cfg.seed_labels = detail::split_list(value);
        else if (key == "seed_count") cfg.seed_count = std::stoull(value);
        else if (key == "seed_pool") cfg.seed_pool = std::stoull(value);
        else if (key == "rho") cfg.rho = std::stoull(value);
        else if (key == "mu_eps_grid") cfg.mu_eps_grid = parse_number_list<double>(value, key);
        else if (key == "taus") cfg.taus = parse_number_list<std::size_t>(value, key);
        else if (key == "paired") cfg.paired = parse_bool(value, key);
        else if (key == "workers") cfg.workers = static_cast<unsigned>(std::stoul(value));
        else throw ConfigError("unknown config key: " + key);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("malformed value for " + key + ": '" + value + "'");
    }
}

inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    ExperimentConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
        apply_config_entry(cfg, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
    }
    return cfg;
}

}  // namespace prebunk
