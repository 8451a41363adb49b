#pragma once

#include <span>
#include <unordered_set>
#include <vector>

#include "prebunk/errors.hpp"
#include "prebunk/graph.hpp"

namespace prebunk {

// Ordered prebunking target list (selection order matters: prefixes of a budget-k
// selection are valid selections for smaller budgets).
struct InterventionSet {
    std::vector<NodeId> targets;
    std::size_t budget = 0;

    static InterventionSet empty() { return {}; }

    static InterventionSet of(std::vector<NodeId> nodes) {
        InterventionSet x;
        x.budget = nodes.size();
        x.targets = std::move(nodes);
        return x;
    }

    std::size_t size() const { return targets.size(); }

    InterventionSet prefix(std::size_t k) const {
        InterventionSet x;
        x.budget = k;
        x.targets.assign(targets.begin(), targets.begin() + std::min(k, targets.size()));
        return x;
    }

    void validate(std::size_t node_count, std::span<const NodeId> seeds) const {
        if (targets.size() > budget) throw ConfigError("intervention set exceeds its budget");
        std::unordered_set<NodeId> seen;
        for (NodeId v : targets) {
            if (v >= node_count) throw IndexError("intervention target out of range");
            if (!seen.insert(v).second) throw ConfigError("duplicate intervention target");
        }
        for (NodeId s : seeds)
            if (seen.count(s)) throw ConfigError("intervention set overlaps the seed set");
    }
};

// Membership mask over dense node ids.
inline std::vector<std::uint8_t> target_mask(std::size_t node_count, std::span<const NodeId> targets) {
    std::vector<std::uint8_t> mask(node_count, 0);
    for (NodeId v : targets) {
        if (v >= node_count) throw IndexError("node index out of range");
        mask[v] = 1;
    }
    return mask;
}

// The prebunking operator: q_v -> (1 - eps_v) q_v on targeted nodes.
inline std::vector<double> post_intervention_q(const NodeParams& params, std::span<const NodeId> targets) {
    std::vector<double> q = params.q;
    for (NodeId v : targets) {
        if (v >= q.size()) throw IndexError("intervention target out of range");
        q[v] = (1.0 - params.eps[v]) * q[v];
    }
    return q;
}

}  // namespace prebunk
