#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "prebunk/errors.hpp"

namespace prebunk {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

// Label given to the collapsed news-article node produced by merge_diffusion_trees.
inline constexpr const char* kMergedRootLabel = "__root__";

struct Edge {
    NodeId src = 0;
    NodeId dst = 0;
    double p_plus = 0.0;   // positive-channel propagation probability
    double p_minus = 0.0;  // negative channel; equal to p_plus unless a variant sets otherwise
};

// Immutable directed graph: dense node indices 0..n-1 in first-appearance order of
// external labels, CSR adjacency over the edge list in both directions.
class Graph {
public:
    Graph() = default;

    std::size_t node_count() const { return labels_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    const std::string& label(NodeId v) const {
        check_node(v);
        return labels_[v];
    }

    std::optional<NodeId> find(std::string_view label) const {
        auto it = index_.find(std::string(label));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    NodeId require(std::string_view label) const {
        auto id = find(label);
        if (!id) throw IndexError("unknown node label: " + std::string(label));
        return *id;
    }

    std::span<const Edge> edges() const { return edges_; }

    const Edge& edge(std::size_t e) const { return edges_[e]; }

    // Edge indices leaving / entering v.
    std::span<const std::uint32_t> out_edges(NodeId v) const {
        check_node(v);
        return {out_adj_.data() + out_off_[v], out_off_[v + 1] - out_off_[v]};
    }
    std::span<const std::uint32_t> in_edges(NodeId v) const {
        check_node(v);
        return {in_adj_.data() + in_off_[v], in_off_[v + 1] - in_off_[v]};
    }

    std::size_t out_degree(NodeId v) const { return out_edges(v).size(); }
    std::size_t in_degree(NodeId v) const { return in_edges(v).size(); }

    void check_node(NodeId v) const {
        if (v >= labels_.size()) throw IndexError("node index out of range: " + std::to_string(v));
    }

private:
    friend class GraphBuilder;

    std::vector<std::string> labels_;
    std::unordered_map<std::string, NodeId> index_;
    std::vector<Edge> edges_;
    std::vector<std::size_t> out_off_, in_off_;
    std::vector<std::uint32_t> out_adj_, in_adj_;
};

// Accumulates labeled nodes and edges, validates, and freezes into a Graph.
// Zero-probability edges (p+ = p- = 0) are dropped; self-loops and duplicate
// (src,dst) pairs are rejected.
class GraphBuilder {
public:
    NodeId add_node(std::string_view label) {
        auto it = index_.find(std::string(label));
        if (it != index_.end()) return it->second;
        NodeId id = static_cast<NodeId>(labels_.size());
        labels_.emplace_back(label);
        index_.emplace(labels_.back(), id);
        return id;
    }

    std::optional<NodeId> find(std::string_view label) const {
        auto it = index_.find(std::string(label));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    void add_edge(NodeId src, NodeId dst, double p) { add_edge(src, dst, p, p); }

    void add_edge(NodeId src, NodeId dst, double p_plus, double p_minus) {
        if (src >= labels_.size() || dst >= labels_.size())
            throw IndexError("edge endpoint out of range");
        if (src == dst)
            throw ParseError("self-loop on node '" + labels_[src] + "'");
        if (p_plus < 0.0 || p_plus > 1.0 || p_minus < 0.0 || p_minus > 1.0)
            throw ParseError("edge probability outside [0,1]");
        if (p_plus == 0.0 && p_minus == 0.0) return;
        auto key = (static_cast<std::uint64_t>(src) << 32) | dst;
        if (!seen_.insert(key).second)
            throw ParseError("duplicate edge " + labels_[src] + " -> " + labels_[dst]);
        edges_.push_back(Edge{src, dst, p_plus, p_minus});
    }

    // Deduplicating variant used by diffusion-tree merging: repeats are collapsed.
    void add_edge_dedup(NodeId src, NodeId dst, double p_plus, double p_minus) {
        if (src == dst) throw ParseError("self-loop on node '" + labels_[src] + "'");
        auto key = (static_cast<std::uint64_t>(src) << 32) | dst;
        if (!seen_.insert(key).second) return;
        if (p_plus == 0.0 && p_minus == 0.0) return;
        edges_.push_back(Edge{src, dst, p_plus, p_minus});
    }

    bool has_edge(NodeId src, NodeId dst) const {
        return seen_.count((static_cast<std::uint64_t>(src) << 32) | dst) != 0;
    }

    std::size_t node_count() const { return labels_.size(); }

    Graph build() && {
        Graph g;
        g.labels_ = std::move(labels_);
        g.index_ = std::move(index_);
        g.edges_ = std::move(edges_);
        const std::size_t n = g.labels_.size();
        const std::size_t m = g.edges_.size();
        g.out_off_.assign(n + 1, 0);
        g.in_off_.assign(n + 1, 0);
        for (const Edge& e : g.edges_) {
            ++g.out_off_[e.src + 1];
            ++g.in_off_[e.dst + 1];
        }
        for (std::size_t v = 0; v < n; ++v) {
            g.out_off_[v + 1] += g.out_off_[v];
            g.in_off_[v + 1] += g.in_off_[v];
        }
        g.out_adj_.resize(m);
        g.in_adj_.resize(m);
        auto out_pos = g.out_off_;
        auto in_pos = g.in_off_;
        for (std::uint32_t e = 0; e < m; ++e) {
            g.out_adj_[out_pos[g.edges_[e].src]++] = e;
            g.in_adj_[in_pos[g.edges_[e].dst]++] = e;
        }
        return g;
    }

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, NodeId> index_;
    std::vector<Edge> edges_;
    std::unordered_set<std::uint64_t> seen_;
};

// Per-node susceptibility q and intervention effect eps, aligned with dense indices.
struct NodeParams {
    std::vector<double> q;
    std::vector<double> eps;

    void validate(std::size_t n) const {
        if (q.size() != n || eps.size() != n)
            throw ConfigError("node parameter arrays must have length n");
        for (double x : q)
            if (x < 0.0 || x > 1.0) throw ConfigError("q outside [0,1]");
        for (double x : eps)
            if (x < 0.0 || x > 1.0) throw ConfigError("eps outside [0,1]");
    }
};

// Share/fake counts per node plus the total news count D.
struct NodeStats {
    std::vector<std::uint32_t> n_share;
    std::vector<std::uint32_t> n_fake;
    std::uint32_t total_news = 0;  // D

    void validate() const {
        if (n_share.size() != n_fake.size()) throw ConfigError("node stats arrays disagree in length");
        for (std::size_t v = 0; v < n_share.size(); ++v) {
            if (n_fake[v] > n_share[v]) throw ConfigError("n_fake exceeds n_share");
            if (n_share[v] > total_news) throw ConfigError("n_share exceeds total news count D");
        }
    }
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (start <= line.size()) {
        std::size_t tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return fields;
}

inline bool is_comment_or_blank(std::string_view line) {
    for (char c : line) {
        if (c == '#') return true;
        if (c != ' ' && c != '\t' && c != '\r') return false;
    }
    return true;
}

inline std::string_view strip_cr(std::string_view s) {
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return s;
}

inline double parse_probability(std::string_view field, const std::string& path, std::size_t line_no) {
    double p;
    try {
        p = std::stod(std::string(field));
    } catch (const std::exception&) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": malformed probability '" + std::string(field) + "'");
    }
    if (!(p >= 0.0 && p <= 1.0))
        throw ParseError(path + ":" + std::to_string(line_no) + ": probability outside [0,1]");
    return p;
}

}  // namespace detail

// Reads `src<TAB>dst[<TAB>p]` rows. Rows without p use default_p; `#` lines and
// blanks are skipped. Labels get dense indices in first-appearance order.
inline Graph load_edge_list(const std::string& path, std::optional<double> default_p = std::nullopt) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open edge list: " + path);
    GraphBuilder b;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = detail::strip_cr(line);
        if (detail::is_comment_or_blank(sv)) continue;
        auto fields = detail::split_fields(sv);
        if (fields.size() != 2 && fields.size() != 3)
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected 2 or 3 tab-separated fields, got " +
                             std::to_string(fields.size()));
        double p;
        if (fields.size() == 3) {
            p = detail::parse_probability(fields[2], path, line_no);
        } else {
            if (!default_p) throw ConfigError(path + ":" + std::to_string(line_no) + ": row omits p and no default probability was given");
            p = *default_p;
            if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("default probability outside [0,1]");
        }
        NodeId s = b.add_node(fields[0]);
        NodeId d = b.add_node(fields[1]);
        try {
            b.add_edge(s, d, p);
        } catch (const ParseError& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return std::move(b).build();
}

// One diffusion tree per file; the file's first node is its root. All roots are
// identified into one node labeled kMergedRootLabel, duplicate edges across trees
// collapse, and the merged edge probabilities are left at 1 (parameter synthesis
// assigns real values later). Stats count, per user node, in how many trees it
// appears (n_share) and how many of those are labeled fake (n_fake).
inline std::pair<Graph, NodeStats> merge_diffusion_trees(std::span<const std::string> tree_files,
                                                         std::span<const bool> fake_labels) {
    if (tree_files.empty()) throw ConfigError("merge_diffusion_trees: empty file list");
    if (tree_files.size() != fake_labels.size())
        throw ConfigError("merge_diffusion_trees: one veracity label is required per tree file");

    GraphBuilder b;
    NodeId root = b.add_node(kMergedRootLabel);
    std::vector<std::uint32_t> share, fake;
    auto ensure_sized = [&](std::size_t n) {
        if (share.size() < n) {
            share.resize(n, 0);
            fake.resize(n, 0);
        }
    };
    ensure_sized(1);

    std::string line;
    for (std::size_t f = 0; f < tree_files.size(); ++f) {
        std::ifstream in(tree_files[f]);
        if (!in) throw IoError("cannot open tree file: " + tree_files[f]);
        std::string tree_root;  // label of this file's root, mapped onto `root`
        std::vector<NodeId> in_this_tree;
        auto map_node = [&](std::string_view label) -> NodeId {
            if (label == tree_root) return root;
            return b.add_node(label);
        };
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            std::string_view sv = detail::strip_cr(line);
            if (detail::is_comment_or_blank(sv)) continue;
            auto fields = detail::split_fields(sv);
            if (fields.size() != 2 && fields.size() != 3)
                throw ParseError(tree_files[f] + ":" + std::to_string(line_no) + ": expected 2 or 3 fields");
            if (tree_root.empty()) tree_root = std::string(fields[0]);
            NodeId s = map_node(fields[0]);
            NodeId d = map_node(fields[1]);
            if (s == d) continue;  // both endpoints were roots of this tree
            b.add_edge_dedup(s, d, 1.0, 1.0);
            ensure_sized(b.node_count());
            for (NodeId v : {s, d}) {
                if (v == root) continue;
                if (std::find(in_this_tree.begin(), in_this_tree.end(), v) == in_this_tree.end())
                    in_this_tree.push_back(v);
            }
        }
        for (NodeId v : in_this_tree) {
            ++share[v];
            if (fake_labels[f]) ++fake[v];
        }
    }

    ensure_sized(b.node_count());
    NodeStats stats;
    stats.n_share = std::move(share);
    stats.n_fake = std::move(fake);
    stats.total_news = static_cast<std::uint32_t>(tree_files.size());
    // The collapsed root stands for every news article.
    stats.n_share[root] = stats.total_news;
    stats.n_fake[root] = static_cast<std::uint32_t>(std::count(fake_labels.begin(), fake_labels.end(), true));
    Graph g = std::move(b).build();
    stats.validate();
    return {std::move(g), std::move(stats)};
}

// Hardness-reduction fixture: dummy node a -> subset nodes b_j -> element nodes c_i,
// all probabilities 1, all q = eps = 1, seed = a. Diffusion on it is deterministic.
struct SetCoverGadget {
    Graph graph;
    NodeParams params;
    NodeId seed = 0;
    std::vector<NodeId> subset_nodes;   // b_j in input order
    std::vector<NodeId> element_nodes;  // c_i in input order
};

inline SetCoverGadget build_set_cover_gadget(std::size_t universe_size,
                                             std::span<const std::vector<std::size_t>> subsets) {
    std::vector<bool> covered(universe_size, false);
    for (const auto& t : subsets)
        for (std::size_t u : t) {
            if (u >= universe_size) throw ConfigError("set-cover gadget: element index out of range");
            covered[u] = true;
        }
    for (std::size_t i = 0; i < universe_size; ++i)
        if (!covered[i]) throw ConfigError("set-cover gadget: element " + std::to_string(i) + " is uncovered");

    GraphBuilder b;
    SetCoverGadget out;
    NodeId a = b.add_node("a");
    for (std::size_t j = 0; j < subsets.size(); ++j)
        out.subset_nodes.push_back(b.add_node("b" + std::to_string(j)));
    for (std::size_t i = 0; i < universe_size; ++i)
        out.element_nodes.push_back(b.add_node("c" + std::to_string(i)));
    for (std::size_t j = 0; j < subsets.size(); ++j) {
        b.add_edge(a, out.subset_nodes[j], 1.0);
        for (std::size_t u : subsets[j]) b.add_edge(out.subset_nodes[j], out.element_nodes[u], 1.0);
    }
    out.graph = std::move(b).build();
    out.params.q.assign(out.graph.node_count(), 1.0);
    out.params.eps.assign(out.graph.node_count(), 1.0);
    out.seed = a;
    return out;
}

// Rebuild a graph with the same labels/structure but new per-edge probabilities
// (one value per edge, both channels). Used by parameter synthesis.
inline Graph with_probabilities(const Graph& g, std::span<const double> p) {
    if (p.size() != g.edge_count()) throw ConfigError("with_probabilities: wrong probability count");
    GraphBuilder b;
    for (NodeId v = 0; v < g.node_count(); ++v) b.add_node(g.label(v));
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        const Edge& ed = g.edge(e);
        b.add_edge(ed.src, ed.dst, p[e]);
    }
    return std::move(b).build();
}

// Undirected input networks are expanded to two directed edges per line.
inline Graph load_undirected_edge_list(const std::string& path, double default_p = 1.0) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open edge list: " + path);
    GraphBuilder b;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = detail::strip_cr(line);
        if (detail::is_comment_or_blank(sv)) continue;
        auto fields = detail::split_fields(sv);
        if (fields.size() != 2 && fields.size() != 3)
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected 2 or 3 fields");
        double p = fields.size() == 3 ? detail::parse_probability(fields[2], path, line_no) : default_p;
        NodeId s = b.add_node(fields[0]);
        NodeId d = b.add_node(fields[1]);
        if (s == d) throw ParseError(path + ":" + std::to_string(line_no) + ": self-loop");
        if (!b.has_edge(s, d)) b.add_edge(s, d, p);
        if (!b.has_edge(d, s)) b.add_edge(d, s, p);
    }
    return std::move(b).build();
}

// --- canonical TSV emission / ingestion -------------------------------------

inline void save_edge_list(const Graph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write: " + path);
    out << "# src\tdst\tp\n";
    char buf[64];
    for (const Edge& e : g.edges()) {
        std::snprintf(buf, sizeof buf, "%.17g", e.p_plus);
        out << g.label(e.src) << '\t' << g.label(e.dst) << '\t' << buf << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

inline void save_node_stats(const Graph& g, const NodeStats& stats, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write: " + path);
    out << "# D = " << stats.total_news << '\n';
    out << "# node\tn_share\tn_fake\n";
    for (NodeId v = 0; v < g.node_count(); ++v)
        out << g.label(v) << '\t' << stats.n_share[v] << '\t' << stats.n_fake[v] << '\n';
    if (!out) throw IoError("write failed: " + path);
}

inline NodeStats load_node_stats(const Graph& g, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open stats file: " + path);
    NodeStats stats;
    stats.n_share.assign(g.node_count(), 0);
    stats.n_fake.assign(g.node_count(), 0);
    std::string line;
    std::size_t line_no = 0;
    bool have_d = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = detail::strip_cr(line);
        if (detail::is_comment_or_blank(sv)) {
            // D rides in a comment header: "# D = <int>"
            auto pos = sv.find("D =");
            if (pos != std::string_view::npos && sv.find('#') != std::string_view::npos) {
                stats.total_news = static_cast<std::uint32_t>(std::stoul(std::string(sv.substr(pos + 3))));
                have_d = true;
            }
            continue;
        }
        auto fields = detail::split_fields(sv);
        if (fields.size() != 3)
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected node\tn_share\tn_fake");
        NodeId v = g.require(fields[0]);
        try {
            stats.n_share[v] = static_cast<std::uint32_t>(std::stoul(std::string(fields[1])));
            stats.n_fake[v] = static_cast<std::uint32_t>(std::stoul(std::string(fields[2])));
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": malformed count");
        }
    }
    if (!have_d)
        stats.total_news = *std::max_element(stats.n_share.begin(), stats.n_share.end());
    stats.validate();
    return stats;
}

inline void save_node_params(const Graph& g, const NodeParams& params, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write: " + path);
    out << "# node\tq\teps\n";
    char qb[64], eb[64];
    for (NodeId v = 0; v < g.node_count(); ++v) {
        std::snprintf(qb, sizeof qb, "%.17g", params.q[v]);
        std::snprintf(eb, sizeof eb, "%.17g", params.eps[v]);
        out << g.label(v) << '\t' << qb << '\t' << eb << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

inline NodeParams load_node_params(const Graph& g, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open params file: " + path);
    NodeParams params;
    params.q.assign(g.node_count(), 0.0);
    params.eps.assign(g.node_count(), 0.0);
    std::vector<bool> seen(g.node_count(), false);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = detail::strip_cr(line);
        if (detail::is_comment_or_blank(sv)) continue;
        auto fields = detail::split_fields(sv);
        if (fields.size() != 3)
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected node\tq\teps");
        NodeId v = g.require(fields[0]);
        params.q[v] = detail::parse_probability(fields[1], path, line_no);
        params.eps[v] = detail::parse_probability(fields[2], path, line_no);
        seen[v] = true;
    }
    for (NodeId v = 0; v < g.node_count(); ++v)
        if (!seen[v]) throw ParseError(path + ": missing parameters for node '" + g.label(v) + "'");
    params.validate(g.node_count());
    return params;
}

}  // namespace prebunk
