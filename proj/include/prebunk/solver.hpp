#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <thread>
#include <vector>

#include "prebunk/activation.hpp"
#include "prebunk/diffusion.hpp"
#include "prebunk/errors.hpp"
#include "prebunk/graph.hpp"
#include "prebunk/intervention.hpp"
#include "prebunk/mia.hpp"

namespace prebunk {

// Greedy target selection over MIIA structures with localized delta maintenance.
//
// Candidates U are the members of the seeds' MIOAs minus the seeds. Each root
// r in U carries a cached activation DP over MIIA_theta(r); the ledger tracks
// Delta(w) = sum over roots r with w in MIIA(r) of
//     Delta(w, r, X) = ap+(r; X) - ap+(r; X + {w}).
// Committing a target subtracts the affected roots' stale pair deltas, drops the
// committed node's own root from the sums, recomputes the affected DPs under the
// new X, and re-adds fresh pair deltas. The affected-root set is derived from an
// inverted member index built at initialization, which keeps the incremental
// ledger exactly consistent with a from-scratch recomputation over the cached
// trees. Delta values sit in a max-heap with version-stamped lazy entries.
//
// Mode::Prebunk implements MIA-NPP; Mode::CorrectiveSeed implements the
// corrective-seeding greedy used by the CMIA-O baseline.
class MiaGreedy {
public:
    MiaGreedy(const Graph& graph, const NodeParams& params, std::span<const NodeId> seeds,
              double theta, TreeDp::Mode mode = TreeDp::Mode::Prebunk,
              std::span<const NodeId> excluded = {}, unsigned workers = 1)
        : graph_(graph), mode_(mode) {
        if (seeds.empty()) throw ConfigError("seed set is empty");
        if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("theta must lie in (0,1]");
        params.validate(graph.node_count());
        for (NodeId s : seeds) graph.check_node(s);
        seeds_.assign(seeds.begin(), seeds.end());

        const std::size_t n = graph.node_count();
        seed_mask_ = target_mask(n, seeds_);
        auto excluded_mask = target_mask(n, excluded);

        // Candidate set U: union of the seeds' MIOA members, minus seeds.
        std::vector<std::uint8_t> in_u(n, 0);
        for (NodeId s : seeds_) {
            Arborescence mioa = build_mioa(graph, s, theta);
            for (const auto& m : mioa.members())
                if (!seed_mask_[m.node] && !excluded_mask[m.node]) in_u[m.node] = 1;
        }
        for (NodeId v = 0; v < n; ++v)
            if (in_u[v]) candidates_.push_back(v);

        root_index_.assign(n, kNoRoot);
        for (std::size_t i = 0; i < candidates_.size(); ++i) root_index_[candidates_[i]] = static_cast<std::uint32_t>(i);

        roots_.resize(candidates_.size());
        const auto init_root = [&](std::size_t i) {
            RootData& rd = roots_[i];
            Arborescence miia = build_miia(graph, candidates_[i], theta);
            rd.candidate_members.clear();
            for (const auto& m : miia.members())
                if (in_u[m.node]) rd.candidate_members.push_back(m.node);
            rd.dp.emplace(miia, params, seeds_, mode_);
            rd.base = rd.dp->run_root({});
            rd.pair_deltas.clear();
            rd.pair_deltas.reserve(rd.candidate_members.size());
            for (NodeId w : rd.candidate_members) {
                const double with_w = rd.dp->run_root({}, w);
                rd.pair_deltas.emplace_back(w, rd.base - with_w);
            }
        };
        if (workers > 1 && roots_.size() >= 2 * workers) {
            std::vector<std::thread> pool;
            const std::size_t chunk = (roots_.size() + workers - 1) / workers;
            for (unsigned w = 0; w < workers; ++w) {
                const std::size_t b = std::min(static_cast<std::size_t>(w) * chunk, roots_.size());
                const std::size_t e = std::min(b + chunk, roots_.size());
                if (b < e)
                    pool.emplace_back([&, b, e] {
                        for (std::size_t i = b; i < e; ++i) init_root(i);
                    });
            }
            for (auto& th : pool) th.join();
        } else {
            for (std::size_t i = 0; i < roots_.size(); ++i) init_root(i);
        }

        // Deterministic merge in candidate index order.
        delta_.assign(n, 0.0);
        version_.assign(n, 0);
        inverted_.resize(n);
        for (std::size_t i = 0; i < roots_.size(); ++i) {
            for (const auto& [w, d] : roots_[i].pair_deltas) {
                delta_[w] += d;
                if (d < min_pair_delta_) min_pair_delta_ = d;
                inverted_[w].push_back(static_cast<std::uint32_t>(i));
            }
        }
        x_mask_.assign(n, 0);
        selected_mask_.assign(n, 0);
        for (NodeId w : candidates_) heap_.push(Entry{delta_[w], version_[w], w});
    }

    std::span<const NodeId> candidates() const { return candidates_; }

    // Runs up to k selection rounds; returns targets in selection order
    // (all of U when k exceeds the candidate count).
    InterventionSet select(std::size_t k) {
        InterventionSet result;
        result.budget = k;
        while (result.targets.size() < k) {
            NodeId chosen = pop_argmax();
            if (chosen == kNoNode) break;
            commit(chosen);
            result.targets.push_back(chosen);
        }
        return result;
    }

    // From-scratch ledger recomputation over the cached trees (audit hook).
    std::vector<double> recompute_deltas() {
        std::vector<double> fresh(graph_.node_count(), 0.0);
        for (std::size_t i = 0; i < roots_.size(); ++i) {
            if (selected_mask_[candidates_[i]]) continue;
            RootData& rd = roots_[i];
            const double base = rd.dp->run_root(x_mask_);
            for (NodeId w : rd.candidate_members) {
                if (selected_mask_[w]) continue;
                fresh[w] += base - rd.dp->run_root(x_mask_, w);
            }
        }
        return fresh;
    }

    std::span<const double> ledger_deltas() const { return delta_; }
    std::span<const std::uint8_t> selected_mask() const { return selected_mask_; }

    // Most negative pair delta observed (should stay >= -1e-12: prebunking and
    // corrective seeding only lower ap+ inside the DP).
    double min_pair_delta() const { return min_pair_delta_; }

private:
    struct Entry {
        double delta;
        std::uint32_t version;
        NodeId node;
        bool operator<(const Entry& other) const {
            if (delta != other.delta) return delta < other.delta;
            return node > other.node;  // max-heap: smaller index wins ties
        }
    };

    struct RootData {
        std::optional<TreeDp> dp;
        double base = 0.0;
        std::vector<NodeId> candidate_members;
        std::vector<std::pair<NodeId, double>> pair_deltas;
    };

    static constexpr std::uint32_t kNoRoot = static_cast<std::uint32_t>(-1);

    NodeId pop_argmax() {
        while (!heap_.empty()) {
            Entry top = heap_.top();
            heap_.pop();
            if (selected_mask_[top.node] || top.version != version_[top.node]) continue;
            return top.node;
        }
        return kNoNode;
    }

    void commit(NodeId chosen) {
        dirty_.clear();
        // Subtract stale contributions of every root whose tree contains `chosen`
        // (the chosen root included).
        for (std::uint32_t ri : inverted_[chosen]) {
            if (selected_mask_[candidates_[ri]]) continue;
            RootData& rd = roots_[ri];
            for (const auto& [w, d] : rd.pair_deltas) {
                if (selected_mask_[w]) continue;
                delta_[w] -= d;
                mark_dirty(w);
            }
        }
        selected_mask_[chosen] = 1;
        x_mask_[chosen] = 1;
        // Recompute the affected roots under the enlarged X; the committed node's
        // own root leaves the ledger for good.
        for (std::uint32_t ri : inverted_[chosen]) {
            if (selected_mask_[candidates_[ri]]) continue;
            RootData& rd = roots_[ri];
            rd.base = rd.dp->run_root(x_mask_);
            rd.pair_deltas.clear();
            for (NodeId w : rd.candidate_members) {
                if (selected_mask_[w]) continue;
                const double d = rd.base - rd.dp->run_root(x_mask_, w);
                if (d < min_pair_delta_) min_pair_delta_ = d;
                rd.pair_deltas.emplace_back(w, d);
                delta_[w] += d;
                mark_dirty(w);
            }
        }
        roots_[root_index_[chosen]].pair_deltas.clear();
        roots_[root_index_[chosen]].pair_deltas.shrink_to_fit();
        for (NodeId w : dirty_) {
            if (selected_mask_[w]) continue;
            ++version_[w];
            heap_.push(Entry{delta_[w], version_[w], w});
        }
    }

    void mark_dirty(NodeId w) {
        if (dirty_mark_.size() != graph_.node_count()) dirty_mark_.assign(graph_.node_count(), 0);
        if (!dirty_mark_[w]) {
            dirty_mark_[w] = 1;
            dirty_.push_back(w);
        }
    }

    const Graph& graph_;
    TreeDp::Mode mode_;
    std::vector<NodeId> seeds_;
    std::vector<std::uint8_t> seed_mask_;
    std::vector<NodeId> candidates_;
    std::vector<std::uint32_t> root_index_;
    std::vector<RootData> roots_;
    std::vector<std::vector<std::uint32_t>> inverted_;
    std::vector<double> delta_;
    std::vector<std::uint32_t> version_;
    std::priority_queue<Entry> heap_;
    std::vector<std::uint8_t> x_mask_, selected_mask_;
    std::vector<NodeId> dirty_;
    std::vector<std::uint8_t> dirty_mark_;
    double min_pair_delta_ = 0.0;
};

// MIA-NPP: greedy prebunking-target selection (Algorithm-2 structure).
inline InterventionSet mia_npp(const Graph& graph, const NodeParams& params,
                               std::span<const NodeId> seeds, std::size_t k, double theta,
                               unsigned workers = 1) {
    MiaGreedy greedy(graph, params, seeds, theta, TreeDp::Mode::Prebunk, {}, workers);
    auto x = greedy.select(k);
    x.budget = k;
    return x;
}

enum class ObjectiveMode : std::uint8_t { Exact, MonteCarlo };

struct Objective {
    double sigma_plus = 0.0;
    double sigma_minus = 0.0;
};

// Measures the objective independently of the MIA approximation: exact world
// enumeration on small instances, Monte Carlo otherwise.
inline Objective evaluate_objective(const Graph& graph, const NodeParams& params,
                                    std::span<const NodeId> seeds, const InterventionSet& x,
                                    ObjectiveMode mode, std::size_t runs = 0,
                                    std::uint64_t master_seed = 0, unsigned workers = 1) {
    if (mode == ObjectiveMode::Exact) {
        ExactSpread e = exact_spread(graph, params, seeds, x);
        return {e.sigma_plus, e.sigma_minus};
    }
    SpreadEstimate est = estimate_spread(graph, params, seeds, x, runs, master_seed, workers);
    return {est.mean_positive, est.mean_negative};
}

}  // namespace prebunk
