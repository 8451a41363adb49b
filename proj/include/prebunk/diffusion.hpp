#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include "prebunk/errors.hpp"
#include "prebunk/graph.hpp"
#include "prebunk/intervention.hpp"
#include "prebunk/rng.hpp"

namespace prebunk {

enum class NodeState : std::uint8_t { Inactive = 0, Positive = 1, Negative = 2 };

inline constexpr std::int32_t kNeverActivated = -1;

struct DiffusionOutcome {
    std::vector<NodeState> state;
    std::vector<std::int32_t> first_hit_time;  // step of first activation, -1 if none
    std::size_t positive_count = 0;
    std::size_t negative_count = 0;
};

struct SpreadEstimate {
    double mean_positive = 0.0;
    double mean_negative = 0.0;
    double stderr_positive = 0.0;
    double stderr_negative = 0.0;
    std::size_t runs = 0;
};

struct ExactSpread {
    double sigma_plus = 0.0;
    double sigma_minus = 0.0;
    std::vector<double> ap_plus;   // per-node probability of ending positive
    std::vector<double> ap_minus;  // per-node probability of ending negative
};

namespace detail {

inline void check_seeds(const Graph& g, std::span<const NodeId> seeds) {
    if (seeds.empty()) throw ConfigError("seed set is empty");
    for (NodeId s : seeds) g.check_node(s);
}

inline void set_state(DiffusionOutcome& out, NodeId v, NodeState s, std::int32_t t) {
#ifndef NDEBUG
    if (out.state[v] != NodeState::Inactive) throw InvariantError("node state changed after activation");
#endif
    out.state[v] = s;
    out.first_hit_time[v] = t;
    if (s == NodeState::Positive)
        ++out.positive_count;
    else
        ++out.negative_count;
}

// Arrival marks per round: 0 none, 1 positive only, 2 at least one negative.
struct RoundScratch {
    std::vector<std::uint8_t> arrival;
    std::vector<NodeId> touched;
    std::vector<NodeId> frontier;
    std::vector<NodeId> next_frontier;

    void reset(std::size_t n) {
        arrival.assign(n, 0);
        touched.clear();
        frontier.clear();
        next_frontier.clear();
    }
};

}  // namespace detail

// One IC-N cascade. Post-intervention susceptibilities are precomputed so the
// estimator can reuse them across runs; the run's world is a pure function of
// rng_seed (counter-based coins per edge and per node).
class IcnSimulator {
public:
    IcnSimulator(const Graph& graph, std::vector<double> q_effective, std::vector<NodeId> seeds)
        : graph_(graph), q_eff_(std::move(q_effective)), seeds_(std::move(seeds)) {
        detail::check_seeds(graph_, seeds_);
        if (q_eff_.size() != graph_.node_count()) throw ConfigError("susceptibility array has wrong length");
    }

    DiffusionOutcome run(std::uint64_t rng_seed) const {
        const std::size_t n = graph_.node_count();
        DiffusionOutcome out;
        out.state.assign(n, NodeState::Inactive);
        out.first_hit_time.assign(n, kNeverActivated);
        scratch_.reset(n);

        for (NodeId s : seeds_) detail::set_state(out, s, NodeState::Positive, 0);
        scratch_.frontier = seeds_;

        std::int32_t t = 0;
        while (!scratch_.frontier.empty()) {
            for (NodeId u : scratch_.frontier) {
                const bool positive = out.state[u] == NodeState::Positive;
                for (std::uint32_t e : graph_.out_edges(u)) {
                    const Edge& ed = graph_.edge(e);
                    if (out.state[ed.dst] != NodeState::Inactive) continue;
                    const double p = positive ? ed.p_plus : ed.p_minus;
                    if (coin_u01(rng_seed, coin_tag::edge, e) >= p) continue;
                    std::uint8_t& mark = scratch_.arrival[ed.dst];
                    if (mark == 0) scratch_.touched.push_back(ed.dst);
                    if (!positive)
                        mark = 2;
                    else if (mark == 0)
                        mark = 1;
                }
            }
            scratch_.next_frontier.clear();
            for (NodeId v : scratch_.touched) {
                const bool negative_arrival = scratch_.arrival[v] == 2;
                scratch_.arrival[v] = 0;
                NodeState s;
                if (negative_arrival)
                    s = NodeState::Negative;
                else
                    s = coin_u01(rng_seed, coin_tag::node, v) < q_eff_[v] ? NodeState::Positive
                                                                          : NodeState::Negative;
                detail::set_state(out, v, s, t + 1);
                scratch_.next_frontier.push_back(v);
            }
            scratch_.touched.clear();
            scratch_.frontier.swap(scratch_.next_frontier);
            ++t;
        }
        return out;
    }

private:
    const Graph& graph_;
    std::vector<double> q_eff_;
    std::vector<NodeId> seeds_;
    mutable detail::RoundScratch scratch_;
};

inline DiffusionOutcome simulate_icn(const Graph& graph, const NodeParams& params,
                                     std::span<const NodeId> seeds, const InterventionSet& x,
                                     std::uint64_t rng_seed) {
    params.validate(graph.node_count());
    x.validate(graph.node_count(), seeds);
    IcnSimulator sim(graph, post_intervention_q(params, x.targets),
                     std::vector<NodeId>(seeds.begin(), seeds.end()));
    return sim.run(rng_seed);
}

// Classic IC with a removed node set; active nodes are reported as Positive.
inline DiffusionOutcome simulate_ic(const Graph& graph, std::span<const NodeId> seeds,
                                    std::span<const NodeId> blocked, std::uint64_t rng_seed) {
    detail::check_seeds(graph, seeds);
    auto blocked_mask = target_mask(graph.node_count(), blocked);
    for (NodeId s : seeds)
        if (blocked_mask[s]) throw ConfigError("seed node is blocked");

    const std::size_t n = graph.node_count();
    DiffusionOutcome out;
    out.state.assign(n, NodeState::Inactive);
    out.first_hit_time.assign(n, kNeverActivated);
    std::vector<NodeId> frontier(seeds.begin(), seeds.end());
    for (NodeId s : seeds) detail::set_state(out, s, NodeState::Positive, 0);

    std::int32_t t = 0;
    std::vector<NodeId> next;
    while (!frontier.empty()) {
        next.clear();
        for (NodeId u : frontier) {
            for (std::uint32_t e : graph.out_edges(u)) {
                const Edge& ed = graph.edge(e);
                if (out.state[ed.dst] != NodeState::Inactive || blocked_mask[ed.dst]) continue;
                if (coin_u01(rng_seed, coin_tag::edge, e) < ed.p_plus) {
                    detail::set_state(out, ed.dst, NodeState::Positive, t + 1);
                    next.push_back(ed.dst);
                }
            }
        }
        frontier.swap(next);
        ++t;
    }
    return out;
}

// Campaign-oblivious competitive cascade: misinformation (Positive) from seeds_m at
// step 0, corrective (Negative) from seeds_t at step `delay`. One coin per edge
// serves both campaigns; corrective wins simultaneous arrivals and corrective
// nodes never adopt misinformation.
inline DiffusionOutcome simulate_coicm(const Graph& graph, std::span<const NodeId> seeds_m,
                                       std::span<const NodeId> seeds_t, std::int32_t delay,
                                       std::uint64_t rng_seed) {
    detail::check_seeds(graph, seeds_m);
    if (delay < 0) throw ConfigError("negative campaign delay");
    {
        auto m_mask = target_mask(graph.node_count(), seeds_m);
        for (NodeId v : seeds_t) {
            graph.check_node(v);
            if (m_mask[v]) throw ConfigError("corrective seed overlaps misinformation seed");
        }
    }

    const std::size_t n = graph.node_count();
    DiffusionOutcome out;
    out.state.assign(n, NodeState::Inactive);
    out.first_hit_time.assign(n, kNeverActivated);
    detail::RoundScratch scratch;
    scratch.reset(n);

    for (NodeId s : seeds_m) detail::set_state(out, s, NodeState::Positive, 0);
    scratch.frontier.assign(seeds_m.begin(), seeds_m.end());
    if (delay == 0) {
        for (NodeId s : seeds_t) {
            detail::set_state(out, s, NodeState::Negative, 0);
            scratch.frontier.push_back(s);
        }
    }

    std::int32_t t = 0;
    while (!scratch.frontier.empty() || t < delay) {
        for (NodeId u : scratch.frontier) {
            const bool positive = out.state[u] == NodeState::Positive;
            for (std::uint32_t e : graph.out_edges(u)) {
                const Edge& ed = graph.edge(e);
                if (out.state[ed.dst] != NodeState::Inactive) continue;
                const double p = positive ? ed.p_plus : ed.p_minus;
                if (coin_u01(rng_seed, coin_tag::edge, e) >= p) continue;
                std::uint8_t& mark = scratch.arrival[ed.dst];
                if (mark == 0) scratch.touched.push_back(ed.dst);
                if (!positive)
                    mark = 2;
                else if (mark == 0)
                    mark = 1;
            }
        }
        scratch.next_frontier.clear();
        // Corrective seeding at step t+1 preempts same-step misinformation arrivals.
        if (t + 1 == delay) {
            for (NodeId s : seeds_t) {
                if (out.state[s] != NodeState::Inactive) continue;
                if (scratch.arrival[s] == 0) scratch.touched.push_back(s);
                scratch.arrival[s] = 2;
            }
        }
        for (NodeId v : scratch.touched) {
            const bool corrective = scratch.arrival[v] == 2;
            scratch.arrival[v] = 0;
            detail::set_state(out, v, corrective ? NodeState::Negative : NodeState::Positive, t + 1);
            scratch.next_frontier.push_back(v);
        }
        scratch.touched.clear();
        scratch.frontier.swap(scratch.next_frontier);
        ++t;
    }
    return out;
}

namespace detail {

// RunnerFactory yields a fresh callable (seed -> (pos, neg)) per worker thread.
template <typename RunnerFactory>
SpreadEstimate estimate_over_runs(std::size_t runs, std::uint64_t master_seed, unsigned workers,
                                  RunnerFactory&& make_runner) {
    if (runs < 1) throw ConfigError("runs must be >= 1");
    // Integer tallies per run index; summation is exact, so fan-out order is moot.
    std::vector<std::uint32_t> pos(runs), neg(runs);
    auto work = [&](std::size_t begin, std::size_t end) {
        auto run_one = make_runner();
        for (std::size_t i = begin; i < end; ++i) {
            auto [p, m] = run_one(derive_seed(master_seed, i));
            pos[i] = static_cast<std::uint32_t>(p);
            neg[i] = static_cast<std::uint32_t>(m);
        }
    };
    if (workers <= 1 || runs < 2 * workers) {
        work(0, runs);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (runs + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t b = std::min<std::size_t>(w * chunk, runs);
            const std::size_t e = std::min<std::size_t>(b + chunk, runs);
            if (b < e) pool.emplace_back(work, b, e);
        }
        for (auto& th : pool) th.join();
    }

    auto finalize = [&](const std::vector<std::uint32_t>& xs, double& mean, double& se) {
        long double sum = 0, sumsq = 0;
        for (auto x : xs) {
            sum += x;
            sumsq += static_cast<long double>(x) * x;
        }
        mean = static_cast<double>(sum / runs);
        if (runs > 1) {
            long double var = (sumsq - sum * sum / runs) / (runs - 1);
            if (var < 0) var = 0;
            se = static_cast<double>(std::sqrt(static_cast<double>(var)) / std::sqrt(static_cast<double>(runs)));
        }
    };
    SpreadEstimate est;
    est.runs = runs;
    finalize(pos, est.mean_positive, est.stderr_positive);
    finalize(neg, est.mean_negative, est.stderr_negative);
    return est;
}

}  // namespace detail

// Monte Carlo estimate over `runs` independent IC-N cascades; run i's world is
// derived from (master_seed, i), so serial and parallel execution agree.
inline SpreadEstimate estimate_spread(const Graph& graph, const NodeParams& params,
                                      std::span<const NodeId> seeds, const InterventionSet& x,
                                      std::size_t runs, std::uint64_t master_seed,
                                      unsigned workers = 1) {
    params.validate(graph.node_count());
    x.validate(graph.node_count(), seeds);
    auto q_eff = post_intervention_q(params, x.targets);
    std::vector<NodeId> seed_vec(seeds.begin(), seeds.end());
    return detail::estimate_over_runs(runs, master_seed, workers, [&]() {
        return [sim = IcnSimulator(graph, q_eff, seed_vec)](std::uint64_t seed) {
            auto out = sim.run(seed);
            return std::pair<std::size_t, std::size_t>(out.positive_count, out.negative_count);
        };
    });
}

// --- exact oracle ------------------------------------------------------------

// World enumeration for IC-N: one liveness coin per edge (consulted under the
// pusher's channel) and one deception coin per non-seed node, each consulted at
// most once. The walk branches lazily on coins the cascade actually reaches, so
// irrelevant coins are marginalized away instead of enumerated.
class ExactIcnEnumerator {
public:
    ExactIcnEnumerator(const Graph& graph, std::vector<double> q_effective, std::span<const NodeId> seeds)
        : graph_(graph), q_eff_(std::move(q_effective)), seeds_(seeds.begin(), seeds.end()) {
        detail::check_seeds(graph_, seeds_);
        std::size_t non_seed = graph_.node_count() - seeds_.size();
        if (graph_.edge_count() + non_seed > 24)
            throw ResourceError("exact_spread enumeration budget exceeded: |E| + |V \\ S| = " +
                                std::to_string(graph_.edge_count() + non_seed) + " > 24");
    }

    ExactSpread run() {
        const std::size_t n = graph_.node_count();
        result_.ap_plus.assign(n, 0.0);
        result_.ap_minus.assign(n, 0.0);
        state_.assign(n, NodeState::Inactive);
        arrival_.assign(n, 0);
        std::vector<NodeId> frontier;
        for (NodeId s : seeds_) {
            state_[s] = NodeState::Positive;
            frontier.push_back(s);
        }
        expand_round(frontier, 1.0);
        for (std::size_t v = 0; v < n; ++v) {
            result_.sigma_plus += result_.ap_plus[v];
            result_.sigma_minus += result_.ap_minus[v];
        }
        return std::move(result_);
    }

private:
    struct Push {
        NodeId dst;
        double p;
        bool positive;
    };

    void expand_round(const std::vector<NodeId>& frontier, double weight) {
        if (frontier.empty()) {
            accumulate(weight);
            return;
        }
        std::vector<Push> pushes;
        for (NodeId u : frontier) {
            const bool positive = state_[u] == NodeState::Positive;
            for (std::uint32_t e : graph_.out_edges(u)) {
                const Edge& ed = graph_.edge(e);
                if (state_[ed.dst] != NodeState::Inactive) continue;
                pushes.push_back(Push{ed.dst, positive ? ed.p_plus : ed.p_minus, positive});
            }
        }
        std::vector<NodeId> touched;
        branch_push(pushes, 0, touched, weight);
    }

    void branch_push(std::vector<Push>& pushes, std::size_t i, std::vector<NodeId>& touched, double weight) {
        if (weight == 0.0) return;
        if (i == pushes.size()) {
            std::vector<NodeId> activated;
            branch_arrival(touched, 0, activated, weight);
            return;
        }
        const Push& push = pushes[i];
        std::uint8_t& mark = arrival_[push.dst];
        // Arrivals that cannot change the node's fate are marginalized out.
        if (mark == 2 || (mark == 1 && push.positive)) {
            branch_push(pushes, i + 1, touched, weight);
            return;
        }
        const std::uint8_t saved = mark;
        const bool newly_touched = saved == 0;
        // live branch
        if (push.p > 0.0) {
            mark = push.positive ? 1 : 2;
            if (newly_touched) touched.push_back(push.dst);
            branch_push(pushes, i + 1, touched, weight * push.p);
            if (newly_touched) touched.pop_back();
            mark = saved;
        }
        // dead branch
        if (push.p < 1.0) branch_push(pushes, i + 1, touched, weight * (1.0 - push.p));
    }

    void branch_arrival(std::vector<NodeId>& touched, std::size_t i, std::vector<NodeId>& activated,
                        double weight) {
        if (weight == 0.0) return;
        if (i == touched.size()) {
            std::vector<std::uint8_t> saved_marks;
            saved_marks.reserve(touched.size());
            for (NodeId v : touched) {
                saved_marks.push_back(arrival_[v]);
                arrival_[v] = 0;
            }
            expand_round(activated, weight);
            for (std::size_t j = 0; j < touched.size(); ++j) arrival_[touched[j]] = saved_marks[j];
            return;
        }
        const NodeId v = touched[i];
        activated.push_back(v);
        if (arrival_[v] == 2) {
            state_[v] = NodeState::Negative;
            branch_arrival(touched, i + 1, activated, weight);
        } else {
            const double q = q_eff_[v];
            if (q > 0.0) {
                state_[v] = NodeState::Positive;
                branch_arrival(touched, i + 1, activated, weight * q);
            }
            if (q < 1.0) {
                state_[v] = NodeState::Negative;
                branch_arrival(touched, i + 1, activated, weight * (1.0 - q));
            }
        }
        state_[v] = NodeState::Inactive;
        activated.pop_back();
    }

    void accumulate(double weight) {
        for (std::size_t v = 0; v < state_.size(); ++v) {
            if (state_[v] == NodeState::Positive)
                result_.ap_plus[v] += weight;
            else if (state_[v] == NodeState::Negative)
                result_.ap_minus[v] += weight;
        }
    }

    const Graph& graph_;
    std::vector<double> q_eff_;
    std::vector<NodeId> seeds_;
    std::vector<NodeState> state_;
    std::vector<std::uint8_t> arrival_;
    ExactSpread result_;
};

inline ExactSpread exact_spread(const Graph& graph, const NodeParams& params,
                                std::span<const NodeId> seeds, const InterventionSet& x) {
    params.validate(graph.node_count());
    x.validate(graph.node_count(), seeds);
    ExactIcnEnumerator e(graph, post_intervention_q(params, x.targets), seeds);
    return e.run();
}

}  // namespace prebunk
