#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <span>
#include <vector>

#include "prebunk/errors.hpp"
#include "prebunk/graph.hpp"
#include "prebunk/intervention.hpp"
#include "prebunk/rng.hpp"
#include "prebunk/solver.hpp"

namespace prebunk {

// k nodes uniformly at random, without replacement, deterministic per seed.
inline InterventionSet random_targets(std::span<const NodeId> candidates, std::size_t k,
                                      std::uint64_t rng_seed) {
    if (k > candidates.size()) throw ConfigError("random_targets: k exceeds candidate count");
    std::vector<NodeId> pool(candidates.begin(), candidates.end());
    std::sort(pool.begin(), pool.end());
    Rng rng(rng_seed);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    InterventionSet x = InterventionSet::of(std::move(pool));
    x.budget = k;
    return x;
}

namespace detail {

// Top-k candidates by descending score, ties by ascending node index.
inline InterventionSet top_k_by_score(std::span<const NodeId> candidates,
                                      std::span<const double> score, std::size_t k) {
    std::vector<NodeId> pool(candidates.begin(), candidates.end());
    std::sort(pool.begin(), pool.end(), [&](NodeId a, NodeId b) {
        if (score[a] != score[b]) return score[a] > score[b];
        return a < b;
    });
    if (pool.size() > k) pool.resize(k);
    InterventionSet x = InterventionSet::of(std::move(pool));
    x.budget = k;
    return x;
}

}  // namespace detail

// Highest susceptibility q_v first.
inline InterventionSet gullible_targets(const NodeParams& params, std::span<const NodeId> candidates,
                                        std::size_t k) {
    return detail::top_k_by_score(candidates, params.q, k);
}

// Highest out-degree first.
inline InterventionSet degree_targets(const Graph& graph, std::span<const NodeId> candidates,
                                      std::size_t k) {
    std::vector<double> score(graph.node_count());
    for (NodeId v = 0; v < graph.node_count(); ++v) score[v] = static_cast<double>(graph.out_degree(v));
    return detail::top_k_by_score(candidates, score, k);
}

// Closest to the seed set under edge weights -log p. Reachable candidates are
// ranked by (distance, index); if they run out, the remainder is filled by index.
inline InterventionSet distance_targets(const Graph& graph, std::span<const NodeId> seeds,
                                        std::span<const NodeId> candidates, std::size_t k) {
    const std::size_t n = graph.node_count();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, inf);
    using Item = std::pair<double, NodeId>;
    auto cmp = [](const Item& a, const Item& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second > b.second;
    };
    std::priority_queue<Item, std::vector<Item>, decltype(cmp)> heap(cmp);
    for (NodeId s : seeds) {
        graph.check_node(s);
        dist[s] = 0.0;
        heap.emplace(0.0, s);
    }
    std::vector<std::uint8_t> settled(n, 0);
    while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (settled[u]) continue;
        settled[u] = 1;
        for (std::uint32_t e : graph.out_edges(u)) {
            const Edge& ed = graph.edge(e);
            if (ed.p_plus <= 0.0) continue;
            const double nd = d - std::log(ed.p_plus);
            if (nd < dist[ed.dst]) {
                dist[ed.dst] = nd;
                heap.emplace(nd, ed.dst);
            }
        }
    }
    std::vector<NodeId> reachable, unreachable;
    for (NodeId v : candidates)
        (dist[v] < inf ? reachable : unreachable).push_back(v);
    std::sort(reachable.begin(), reachable.end(), [&](NodeId a, NodeId b) {
        if (dist[a] != dist[b]) return dist[a] < dist[b];
        return a < b;
    });
    std::sort(unreachable.begin(), unreachable.end());
    std::vector<NodeId> pool = std::move(reachable);
    pool.insert(pool.end(), unreachable.begin(), unreachable.end());
    if (pool.size() > k) pool.resize(k);
    InterventionSet x = InterventionSet::of(std::move(pool));
    x.budget = k;
    return x;
}

// Sampled-graph blocking greedy: draw rho live-edge worlds under IC, then pick
// k blockers, each round taking the node whose removal most reduces the total
// number of nodes reachable from the seeds across samples.
inline InterventionSet advanced_greedy_targets(const Graph& graph, std::span<const NodeId> seeds,
                                               std::size_t k, std::size_t rho,
                                               std::uint64_t rng_seed) {
    if (rho < 1) throw ConfigError("advanced_greedy_targets: rho must be >= 1");
    detail::check_seeds(graph, seeds);
    const std::size_t n = graph.node_count();
    auto seed_mask = target_mask(n, seeds);

    // Live out-adjacency per sampled world.
    std::vector<std::vector<std::vector<NodeId>>> samples(rho);
    for (std::size_t i = 0; i < rho; ++i) {
        const std::uint64_t world = derive_seed(rng_seed, i);
        auto& adj = samples[i];
        adj.assign(n, {});
        for (std::uint32_t e = 0; e < graph.edge_count(); ++e) {
            const Edge& ed = graph.edge(e);
            if (coin_u01(world, coin_tag::edge, e) < ed.p_plus) adj[ed.src].push_back(ed.dst);
        }
    }

    std::vector<std::uint8_t> blocked(n, 0);
    std::vector<std::uint32_t> visit_mark(n, 0);
    std::uint32_t epoch = 0;
    std::vector<NodeId> stack, reach;

    auto bfs_count = [&](const std::vector<std::vector<NodeId>>& adj, NodeId skip,
                         std::vector<NodeId>* out_reach) -> std::size_t {
        ++epoch;
        std::size_t count = 0;
        stack.clear();
        for (NodeId s : seeds) {
            if (s == skip || blocked[s]) continue;
            if (visit_mark[s] == epoch) continue;
            visit_mark[s] = epoch;
            stack.push_back(s);
        }
        while (!stack.empty()) {
            NodeId u = stack.back();
            stack.pop_back();
            ++count;
            if (out_reach) out_reach->push_back(u);
            for (NodeId v : adj[u]) {
                if (v == skip || blocked[v] || visit_mark[v] == epoch) continue;
                visit_mark[v] = epoch;
                stack.push_back(v);
            }
        }
        return count;
    };

    std::vector<NodeId> targets;
    std::vector<double> gain(n, 0.0);
    for (std::size_t round = 0; round < k && targets.size() < n - seeds.size(); ++round) {
        std::fill(gain.begin(), gain.end(), 0.0);
        for (std::size_t i = 0; i < rho; ++i) {
            reach.clear();
            const std::size_t base = bfs_count(samples[i], kNoNode, &reach);
            // Only removals of currently reached nodes can change this sample.
            for (NodeId x : reach) {
                if (seed_mask[x]) continue;
                gain[x] += static_cast<double>(base - bfs_count(samples[i], x, nullptr));
            }
        }
        NodeId best = kNoNode;
        for (NodeId v = 0; v < n; ++v) {
            if (blocked[v] || seed_mask[v]) continue;
            if (best == kNoNode || gain[v] > gain[best]) best = v;
        }
        if (best == kNoNode) break;
        blocked[best] = 1;
        targets.push_back(best);
    }
    InterventionSet x = InterventionSet::of(std::move(targets));
    x.budget = k;
    return x;
}

// Competitive-cascade corrective seeding over MIIA structures (CMIA-O style):
// greedy on the decrease in estimated misinformation activation when the chosen
// node starts negatively active at step 0. `excluded` supports the delayed
// clarification setting (no corrective seed within tau hops of the seeds).
inline InterventionSet cmia_o_targets(const Graph& graph, std::span<const NodeId> seeds_m,
                                      std::size_t k, double theta,
                                      std::span<const NodeId> excluded = {}, unsigned workers = 1) {
    NodeParams unit;
    unit.q.assign(graph.node_count(), 1.0);
    unit.eps.assign(graph.node_count(), 1.0);
    MiaGreedy greedy(graph, unit, seeds_m, theta, TreeDp::Mode::CorrectiveSeed, excluded, workers);
    auto x = greedy.select(k);
    x.budget = k;
    return x;
}

}  // namespace prebunk
