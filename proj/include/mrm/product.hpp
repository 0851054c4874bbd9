#pragma once

#include <deque>

#include "mrm/mdp.hpp"
#include "mrm/model.hpp"
#include "mrm/reward_machine.hpp"
#include "mrm/scc.hpp"
#include "mrm/types.hpp"

namespace mrm {

/// Immediate-reward MDP over S x U with a global reset action, optionally
/// restricted to pairs reachable from (s0, u0). The solver model carries expected
/// per-step rewards; `transition_reward` exposes the reward actually paid
/// when action a lands in s' while the machine was at u (the simulator
/// convention: the observation belongs to the successor).
struct ProductMdp {
    MdpModel model;
    int num_mdp_states = 0;
    int num_nodes = 0;
    ActionId reset_action = 0;  // == base action count
    double reset_cost = 0.0;
    MealyRewardMachine machine;
    LabelingFunction labels;
    std::vector<StateId> compact;  // full (s,u) index -> model state, -1 if unreachable
    std::vector<StateId> full;     // model state -> full (s,u) index
    StateId home = 0;              // model state of (s0, u0)

    StateId index(StateId s, NodeId u) const {
        StateId x = compact.at(s * num_nodes + u);
        if (x < 0) throw Error("product: state (" + std::to_string(s) + "," +
                               std::to_string(u) + ") is unreachable");
        return x;
    }
    StateId mdp_state(StateId product_state) const { return full.at(product_state) / num_nodes; }
    NodeId node(StateId product_state) const { return full.at(product_state) % num_nodes; }

    double transition_reward(ActionId a, StateId s_next, NodeId u_before) const {
        if (a == reset_action) return reset_cost;
        return machine.step(u_before, labels.at(a, s_next)).second;
    }
};

inline void require_same_alphabet(const LabelingFunction& labels, const MealyRewardMachine& h) {
    if (labels.observation_alphabet != h.alphabet)
        throw AlphabetMismatch("product: labeling alphabet differs from machine alphabet");
}

inline ProductMdp build_product_with_reset(const Nrmdp& m, const LabelingFunction& labels,
                                           const MealyRewardMachine& h, double reset_cost,
                                           bool prune_unreachable = false) {
    require_same_alphabet(labels, h);

    ProductMdp p;
    p.num_mdp_states = m.num_states;
    p.num_nodes = h.num_nodes;
    p.reset_action = m.num_actions;
    p.reset_cost = reset_cost;
    p.machine = h;
    p.labels = labels;

    // full product first, then keep only what (s0, u0) can reach; the reset
    // action makes the reachable part strongly connected
    int full_states = m.num_states * h.num_nodes;
    auto full_index = [&](StateId s, NodeId u) { return s * h.num_nodes + u; };
    MdpModel full;
    full.resize(full_states, m.num_actions + 1, /*with_rewards=*/true);
    StateId home = full_index(m.initial_state, h.start);
    for (StateId s = 0; s < m.num_states; ++s) {
        for (NodeId u = 0; u < h.num_nodes; ++u) {
            StateId x = full_index(s, u);
            for (ActionId a = 0; a < m.num_actions; ++a) {
                SparseRow row;
                double expected = 0.0;
                for (auto [t, prob] : m.row(s, a)) {
                    auto [v, r] = h.step(u, labels.at(a, t));
                    row.emplace_back(full_index(t, v), prob);
                    expected += prob * r;
                }
                full.trans[x][a] = normalize_row(row);
                full.reward[x][a] = expected;
            }
            full.trans[x][p.reset_action] = {{home, 1.0}};
            full.reward[x][p.reset_action] = reset_cost;
        }
    }

    if (!prune_unreachable) {
        p.model = std::move(full);
        p.compact.resize(full_states);
        p.full.resize(full_states);
        for (StateId x = 0; x < full_states; ++x) p.compact[x] = p.full[x] = x;
        p.home = home;
        return p;
    }

    p.compact.assign(full_states, -1);
    std::deque<StateId> queue{home};
    p.compact[home] = 0;
    p.full.push_back(home);
    while (!queue.empty()) {
        StateId x = queue.front();
        queue.pop_front();
        for (ActionId a = 0; a <= m.num_actions; ++a) {
            for (auto [t, prob] : full.trans[x][a]) {
                if (prob <= 0.0 || p.compact[t] >= 0) continue;
                p.compact[t] = static_cast<StateId>(p.full.size());
                p.full.push_back(t);
                queue.push_back(t);
            }
        }
    }

    p.model.resize(static_cast<int>(p.full.size()), m.num_actions + 1, true);
    for (StateId x = 0; x < p.model.num_states; ++x) {
        for (ActionId a = 0; a <= m.num_actions; ++a) {
            SparseRow row;
            for (auto [t, prob] : full.trans[p.full[x]][a])
                row.emplace_back(p.compact[t], prob);
            p.model.trans[x][a] = normalize_row(row);
            p.model.reward[x][a] = full.reward[p.full[x]][a];
        }
    }
    p.home = 0;
    return p;
}

/// Product of the MDP with both the true machine and a hypothesis, plus an
/// absorbing counterexample state entered exactly when the two machines
/// disagree on the reward of an observed step.
struct TripleProduct {
    MdpModel model;  // reward-free
    int num_mdp_states = 0;
    int num_truth_nodes = 0;
    int num_hyp_nodes = 0;
    ActionId reset_action = 0;
    StateId ce_state = 0;  // last index

    StateId index(StateId s, NodeId ur, NodeId uh) const {
        return (s * num_truth_nodes + ur) * num_hyp_nodes + uh;
    }
};

inline TripleProduct build_triple_product(const Nrmdp& m, const LabelingFunction& labels,
                                          const MealyRewardMachine& truth,
                                          const MealyRewardMachine& hyp, double /*reset_cost*/) {
    require_same_alphabet(labels, truth);
    require_same_alphabet(labels, hyp);

    TripleProduct tp;
    tp.num_mdp_states = m.num_states;
    tp.num_truth_nodes = truth.num_nodes;
    tp.num_hyp_nodes = hyp.num_nodes;
    tp.reset_action = m.num_actions;
    tp.ce_state = m.num_states * truth.num_nodes * hyp.num_nodes;
    tp.model.resize(tp.ce_state + 1, m.num_actions + 1, /*with_rewards=*/false);

    StateId home = tp.index(m.initial_state, truth.start, hyp.start);
    for (StateId s = 0; s < m.num_states; ++s) {
        for (NodeId ur = 0; ur < truth.num_nodes; ++ur) {
            for (NodeId uh = 0; uh < hyp.num_nodes; ++uh) {
                StateId x = tp.index(s, ur, uh);
                for (ActionId a = 0; a < m.num_actions; ++a) {
                    SparseRow row;
                    double ce_mass = 0.0;
                    for (auto [t, prob] : m.row(s, a)) {
                        Observation z = labels.at(a, t);
                        auto [vr, rr] = truth.step(ur, z);
                        auto [vh, rh] = hyp.step(uh, z);
                        if (rewards_equal(rr, rh))
                            row.emplace_back(tp.index(t, vr, vh), prob);
                        else
                            ce_mass += prob;
                    }
                    if (ce_mass > 0.0) row.emplace_back(tp.ce_state, ce_mass);
                    tp.model.trans[x][a] = normalize_row(row);
                }
                tp.model.trans[x][tp.reset_action] = {{home, 1.0}};
            }
        }
    }
    for (ActionId a = 0; a <= m.num_actions; ++a)
        tp.model.trans[tp.ce_state][a] = {{tp.ce_state, 1.0}};
    return tp;
}

}  // namespace mrm
