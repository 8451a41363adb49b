#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <span>
#include <unordered_map>
#include <vector>

#include "prebunk/errors.hpp"
#include "prebunk/graph.hpp"

namespace prebunk {

enum class ArborescenceDirection : std::uint8_t { In, Out };

// Local influence tree of maximum-influence paths around a root, thresholded at
// path probability theta. For direction In, link(w) is w's unique child on its
// path toward the root (the original edge is w -> link(w)); for Out, link(w) is
// w's unique parent (edge link(w) -> w).
class Arborescence {
public:
    struct Member {
        NodeId node;
        NodeId link;         // one step toward the root; kNoNode for the root
        double path_prob;    // product of p along the MIP to/from the root
        double link_p_plus;  // probabilities of the tree edge shared with `link`
        double link_p_minus;
        std::uint32_t depth;  // hops to the root
    };

    Arborescence(NodeId root, ArborescenceDirection direction) : root_(root), direction_(direction) {}

    NodeId root() const { return root_; }
    ArborescenceDirection direction() const { return direction_; }
    std::span<const Member> members() const { return members_; }
    std::size_t size() const { return members_.size(); }

    bool contains(NodeId v) const { return index_.count(v) != 0; }

    const Member& member(NodeId v) const {
        auto it = index_.find(v);
        if (it == index_.end()) throw IndexError("node not in arborescence");
        return members_[it->second];
    }

    std::size_t member_slot(NodeId v) const {
        auto it = index_.find(v);
        if (it == index_.end()) throw IndexError("node not in arborescence");
        return it->second;
    }

    void add_member(Member m) {
        index_.emplace(m.node, members_.size());
        members_.push_back(m);
    }

private:
    NodeId root_;
    ArborescenceDirection direction_;
    std::vector<Member> members_;  // in settle order: root first, distances non-decreasing
    std::unordered_map<NodeId, std::size_t> index_;
};

namespace detail {

// Dijkstra over -log p with deterministic (distance, node index) tie-breaking.
// direction In explores reversed edges from the root, Out explores forward edges.
// Nodes beyond max_dist (= -log theta) are not settled.
struct MipSearch {
    std::vector<double> dist;
    std::vector<NodeId> parent;        // previous node toward the root
    std::vector<std::uint32_t> via_edge;  // edge shared with parent
    std::vector<NodeId> order;         // settle order
    std::vector<std::uint32_t> depth;

    MipSearch(const Graph& g, NodeId root, ArborescenceDirection direction, double max_dist) {
        const std::size_t n = g.node_count();
        const double inf = std::numeric_limits<double>::infinity();
        dist.assign(n, inf);
        parent.assign(n, kNoNode);
        via_edge.assign(n, static_cast<std::uint32_t>(-1));
        depth.assign(n, 0);

        using Item = std::pair<double, NodeId>;
        auto cmp = [](const Item& a, const Item& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second > b.second;  // smaller index settles first on ties
        };
        std::priority_queue<Item, std::vector<Item>, decltype(cmp)> heap(cmp);
        std::vector<std::uint8_t> settled(n, 0);
        dist[root] = 0.0;
        heap.emplace(0.0, root);

        while (!heap.empty()) {
            auto [d, u] = heap.top();
            heap.pop();
            if (settled[u] || d > dist[u]) continue;
            settled[u] = 1;
            order.push_back(u);
            auto edges = direction == ArborescenceDirection::In ? g.in_edges(u) : g.out_edges(u);
            for (std::uint32_t e : edges) {
                const Edge& ed = g.edge(e);
                const NodeId w = direction == ArborescenceDirection::In ? ed.src : ed.dst;
                if (settled[w]) continue;
                if (ed.p_plus <= 0.0) continue;
                const double nd = d - std::log(ed.p_plus);
                if (nd > max_dist) continue;
                // Strictly better distance wins; on exact ties prefer the smaller parent index.
                if (nd < dist[w] || (nd == dist[w] && parent[w] != kNoNode && u < parent[w])) {
                    dist[w] = nd;
                    parent[w] = u;
                    via_edge[w] = e;
                    depth[w] = depth[u] + 1;
                    heap.emplace(nd, w);
                }
            }
        }
    }
};

}  // namespace detail

// Maximum influence path from u to v: the path maximizing the product of edge
// probabilities, computed as a shortest path under weights -log p. Empty when v
// is unreachable. Returned as the node sequence u..v.
inline std::vector<NodeId> max_influence_path(const Graph& g, NodeId u, NodeId v) {
    g.check_node(u);
    g.check_node(v);
    if (u == v) throw ConfigError("max_influence_path requires distinct endpoints");
    detail::MipSearch search(g, u, ArborescenceDirection::Out, std::numeric_limits<double>::infinity());
    if (std::isinf(search.dist[v])) return {};
    std::vector<NodeId> path;
    for (NodeId w = v; w != kNoNode; w = search.parent[w]) path.push_back(w);
    std::reverse(path.begin(), path.end());
    return path;
}

// Probability of the maximum influence path u -> v (0 when unreachable).
inline double max_influence_path_prob(const Graph& g, NodeId u, NodeId v) {
    detail::MipSearch search(g, u, ArborescenceDirection::Out, std::numeric_limits<double>::infinity());
    return std::isinf(search.dist[v]) ? 0.0 : std::exp(-search.dist[v]);
}

namespace detail {

inline Arborescence build_arborescence(const Graph& g, NodeId root, double theta,
                                       ArborescenceDirection direction) {
    g.check_node(root);
    if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("theta must lie in (0,1]");
    // pp >= theta compared in log space: dist <= -log theta.
    const double max_dist = -std::log(theta);
    MipSearch search(g, root, direction, max_dist);
    Arborescence arb(root, direction);
    for (NodeId v : search.order) {
        Arborescence::Member m;
        m.node = v;
        m.link = search.parent[v];
        m.path_prob = std::exp(-search.dist[v]);
        m.depth = search.depth[v];
        if (v == root) {
            m.link_p_plus = m.link_p_minus = 0.0;
        } else {
            const Edge& ed = g.edge(search.via_edge[v]);
            m.link_p_plus = ed.p_plus;
            m.link_p_minus = ed.p_minus;
        }
        arb.add_member(m);
    }
    return arb;
}

}  // namespace detail

// MIIA_theta(v): in-arborescence of maximum influence paths ending at v whose
// path probability is at least theta.
inline Arborescence build_miia(const Graph& g, NodeId v, double theta) {
    return detail::build_arborescence(g, v, theta, ArborescenceDirection::In);
}

// MIOA_theta(v): out-arborescence of maximum influence paths starting at v.
inline Arborescence build_mioa(const Graph& g, NodeId v, double theta) {
    return detail::build_arborescence(g, v, theta, ArborescenceDirection::Out);
}

}  // namespace prebunk
