#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "prebunk/errors.hpp"
#include "prebunk/graph.hpp"
#include "prebunk/intervention.hpp"
#include "prebunk/mia.hpp"

namespace prebunk {

// Positive/negative activation probabilities for each arborescence member,
// indexed by member slot.
struct ActivationTrace {
    std::vector<double> ap_plus;
    std::vector<double> ap_minus;
    std::int32_t terminal_step = 0;
    std::size_t push_count = 0;

    double ap_plus_of(const Arborescence& arb, NodeId v) const { return ap_plus[arb.member_slot(v)]; }
    double ap_minus_of(const Arborescence& arb, NodeId v) const { return ap_minus[arb.member_slot(v)]; }
};

// Step-sliced activation dynamic program over one in-arborescence.
//
// For a node v with tree parents w, define per parent at step t
//   A_w = P(no arrival from w through t)      = 1 - ap_{t-1}(w) * p_wv
//   B_w = P(no arrival from w through t+1)    = 1 - ap_t(w) * p_wv
//   C_w = P(no arrival through t and no negative arrival at t+1) = A_w - pi_t^-(w) p^-_wv
// (channels split as p^+/p^- where they differ). Parents of distinct subtrees are
// independent, so with R_B = prod B_w/A_w and R_C = prod C_w/A_w over the parents
// that push this step,
//   pi_{t+1}(v)   = (1 - ap_t(v)) (1 - R_B)
//   pi_{t+1}^+(v) = q_v^X (1 - ap_t(v)) (R_C - R_B)
// which is exact on arborescences. Pushes follow the frontier sets Z_t (children
// of the previous frontier), so the work stays linear in member count times depth.
//
// Two boundary modes share the loop:
//   Prebunk        - IC-N with post-intervention susceptibilities; seeds positive at 0.
//   CorrectiveSeed - competitive-cascade estimate used by corrective seeding:
//                    q == 1 everywhere, intervened nodes start negative at step 0.
class TreeDp {
public:
    enum class Mode : std::uint8_t { Prebunk, CorrectiveSeed };

    TreeDp(const Arborescence& miia, const NodeParams& params, std::span<const NodeId> seeds,
           Mode mode = Mode::Prebunk)
        : mode_(mode) {
        if (miia.direction() != ArborescenceDirection::In)
            throw ConfigError("activation DP requires an in-arborescence");
        if (miia.size() == 0 || miia.members()[0].node != miia.root())
            throw InvariantError("arborescence root must occupy slot 0");
        const auto members = miia.members();
        const std::size_t m = members.size();
        node_.resize(m);
        q_.resize(m);
        eps_.resize(m);
        link_slot_.assign(m, kNoSlot);
        p_plus_.assign(m, 0.0);
        p_minus_.assign(m, 0.0);
        is_seed_.assign(m, 0);
        seed_slots_.clear();
        for (std::size_t i = 0; i < m; ++i) {
            node_[i] = members[i].node;
            q_[i] = params.q[members[i].node];
            eps_[i] = params.eps[members[i].node];
            if (members[i].link != kNoNode) {
                link_slot_[i] = static_cast<std::uint32_t>(miia.member_slot(members[i].link));
                p_plus_[i] = members[i].link_p_plus;
                p_minus_[i] = members[i].link_p_minus;
            }
        }
        for (NodeId s : seeds) {
            if (!miia.contains(s)) continue;
            const std::size_t slot = miia.member_slot(s);
            is_seed_[slot] = 1;
            seed_slots_.push_back(static_cast<std::uint32_t>(slot));
        }
        const std::size_t n = m;
        ap_plus_.resize(n);
        ap_minus_.resize(n);
        ap_prev_plus_.resize(n);
        ap_prev_minus_.resize(n);
        pi_plus_.resize(n);
        pi_minus_.resize(n);
        acc_b_.resize(n);
        acc_c_.resize(n);
        in_next_.assign(n, 0);
        frontier_.reserve(n);
        next_frontier_.reserve(n);
    }

    // ap at the root under intervention mask `x_mask` (dense node-id mask, may be
    // empty meaning no interventions) plus one optional extra intervened node.
    double run_root(std::span<const std::uint8_t> x_mask, NodeId extra = kNoNode) {
        run(x_mask, extra);
        return ap_plus_[0];
    }

    double run_root_minus(std::span<const std::uint8_t> x_mask, NodeId extra = kNoNode) {
        run(x_mask, extra);
        return ap_minus_[0];
    }

    ActivationTrace run_trace(std::span<const std::uint8_t> x_mask, NodeId extra = kNoNode) {
        run(x_mask, extra);
        ActivationTrace trace;
        trace.ap_plus = ap_plus_;
        trace.ap_minus = ap_minus_;
        trace.terminal_step = terminal_step_;
        trace.push_count = push_count_;
        return trace;
    }

private:
    static constexpr std::uint32_t kNoSlot = static_cast<std::uint32_t>(-1);

    double effective_q(std::size_t slot, std::span<const std::uint8_t> x_mask, NodeId extra) const {
        if (mode_ == Mode::CorrectiveSeed) return 1.0;
        const NodeId v = node_[slot];
        const bool targeted = (!x_mask.empty() && x_mask[v]) || v == extra;
        return targeted ? (1.0 - eps_[slot]) * q_[slot] : q_[slot];
    }

    bool negatively_seeded(std::size_t slot, std::span<const std::uint8_t> x_mask, NodeId extra) const {
        const NodeId v = node_[slot];
        return (!x_mask.empty() && x_mask[v]) || v == extra;
    }

    static double clamp_unit(double x) {
        if (x < 0.0) {
            if (x < -1e-12) throw InvariantError("activation probability drifted below 0");
            return 0.0;
        }
        if (x > 1.0) {
            if (x > 1.0 + 1e-12) throw InvariantError("activation probability drifted above 1");
            return 1.0;
        }
        return x;
    }

    void run(std::span<const std::uint8_t> x_mask, NodeId extra) {
        const std::size_t m = node_.size();
        for (std::size_t i = 0; i < m; ++i) {
            ap_plus_[i] = ap_minus_[i] = 0.0;
            ap_prev_plus_[i] = ap_prev_minus_[i] = 0.0;
            pi_plus_[i] = pi_minus_[i] = 0.0;
        }
        push_count_ = 0;
        terminal_step_ = 0;
        frontier_.clear();

        for (std::uint32_t slot : seed_slots_) {
            ap_plus_[slot] = pi_plus_[slot] = 1.0;
            frontier_.push_back(slot);
        }
        if (mode_ == Mode::CorrectiveSeed) {
            for (std::size_t i = 0; i < m; ++i) {
                if (is_seed_[i] || !negatively_seeded(i, x_mask, extra)) continue;
                ap_minus_[i] = pi_minus_[i] = 1.0;
                frontier_.push_back(static_cast<std::uint32_t>(i));
            }
        }

        std::int32_t t = 0;
        while (!frontier_.empty()) {
            next_frontier_.clear();
            for (std::uint32_t w : frontier_) {
                const std::uint32_t v = link_slot_[w];
                if (v == kNoSlot || is_seed_[v]) continue;
                const double pp = p_plus_[w];
                const double pm = p_minus_[w];
                const double a = 1.0 - ap_prev_plus_[w] * pp - ap_prev_minus_[w] * pm;
                const double b = 1.0 - ap_plus_[w] * pp - ap_minus_[w] * pm;
                const double c = a - pi_minus_[w] * pm;
                if (!in_next_[v]) {
                    in_next_[v] = 1;
                    next_frontier_.push_back(v);
                    acc_b_[v] = 1.0;
                    acc_c_[v] = 1.0;
                }
                ++push_count_;
                if (a > 0.0) {
                    acc_b_[v] *= b / a;
                    acc_c_[v] *= c / a;
                } else {
                    // The parent certainly delivered earlier; v is active a.s. and
                    // its inactive factor below is 0.
                    acc_b_[v] = acc_c_[v] = 1.0;
                }
            }
            for (std::uint32_t v : next_frontier_) {
                in_next_[v] = 0;
                double inactive = 1.0 - ap_plus_[v] - ap_minus_[v];
                if (inactive < 0.0) inactive = 0.0;
                const double pi_total = clamp_unit(inactive * (1.0 - acc_b_[v]));
                double pi_pos = effective_q(v, x_mask, extra) * inactive * (acc_c_[v] - acc_b_[v]);
                pi_pos = clamp_unit(pi_pos);
                if (pi_pos > pi_total) pi_pos = pi_total;
                const double pi_neg = pi_total - pi_pos;
                ap_prev_plus_[v] = ap_plus_[v];
                ap_prev_minus_[v] = ap_minus_[v];
                pi_plus_[v] = pi_pos;
                pi_minus_[v] = pi_neg;
                ap_plus_[v] = clamp_unit(ap_plus_[v] + pi_pos);
                ap_minus_[v] = clamp_unit(ap_minus_[v] + pi_neg);
            }
            frontier_.swap(next_frontier_);
            ++t;
        }
        terminal_step_ = t > 0 ? t - 1 : 0;
    }

    Mode mode_;
    std::vector<NodeId> node_;
    std::vector<double> q_, eps_;
    std::vector<std::uint32_t> link_slot_;
    std::vector<double> p_plus_, p_minus_;
    std::vector<std::uint8_t> is_seed_;
    std::vector<std::uint32_t> seed_slots_;

    // per-run scratch
    std::vector<double> ap_plus_, ap_minus_, ap_prev_plus_, ap_prev_minus_;
    std::vector<double> pi_plus_, pi_minus_;
    std::vector<double> acc_b_, acc_c_;
    std::vector<std::uint8_t> in_next_;
    std::vector<std::uint32_t> frontier_, next_frontier_;
    std::size_t push_count_ = 0;
    std::int32_t terminal_step_ = 0;
};

// Activation probabilities inside a MIIA for seed set S and prebunking set X.
inline ActivationTrace ap_plus(const Arborescence& miia, std::span<const NodeId> seeds,
                               const InterventionSet& x, const NodeParams& params) {
    std::size_t n = 0;
    for (const auto& m : miia.members()) n = std::max<std::size_t>(n, m.node + 1);
    for (NodeId s : seeds) n = std::max<std::size_t>(n, s + 1);
    for (NodeId v : x.targets) n = std::max<std::size_t>(n, v + 1);
    x.validate(n, seeds);
    TreeDp dp(miia, params, seeds, TreeDp::Mode::Prebunk);
    return dp.run_trace(target_mask(n, x.targets));
}

}  // namespace prebunk
