#pragma once

#include "mrm/mdp.hpp"
#include "mrm/model.hpp"
#include "mrm/solver.hpp"
#include "mrm/types.hpp"

namespace mrm {

enum class QueryMode { Max, Min };

/// Prefix-tracking MDP for one membership query. States are pairs (s, i)
/// with i the number of matched symbols. Two solver views are kept:
///  - `model`: an incompatible observation returns to (s0, 0) in the same
///    step, so expected-step planning accounts for resets;
///  - `attempt_model`: incompatible observations and explicit resets end in
///    an absorbing fail sink, so reachability gives the per-attempt success
///    probability.
struct QueryMdp {
    MdpModel model;
    MdpModel attempt_model;
    int num_mdp_states = 0;
    int prefix_length = 0;  // k
    ActionId reset_action = 0;
    StateId initial_mdp_state = 0;
    Word word;
    LabelingFunction labels;

    StateId index(StateId s, int i) const { return i * num_mdp_states + s; }
    StateId fail_state() const { return (prefix_length + 1) * num_mdp_states; }

    std::vector<StateId> goal_states() const {
        std::vector<StateId> goal;
        for (StateId s = 0; s < num_mdp_states; ++s) goal.push_back(index(s, prefix_length));
        return goal;
    }
};

inline QueryMdp build_query_mdp(const Nrmdp& m, const LabelingFunction& labels,
                                const Word& word) {
    if (word.empty()) throw Error("build_query_mdp: empty query word");
    for (SymbolId z : word)
        if (z < 0 || z >= labels.alphabet_size())
            throw Error("build_query_mdp: unknown observation symbol in query");

    QueryMdp q;
    q.num_mdp_states = m.num_states;
    q.prefix_length = static_cast<int>(word.size());
    q.reset_action = m.num_actions;
    q.initial_mdp_state = m.initial_state;
    q.word = word;
    q.labels = labels;

    int k = q.prefix_length;
    StateId origin = q.index(m.initial_state, 0);
    StateId fail = q.fail_state();
    q.model.resize(m.num_states * (k + 1), m.num_actions + 1, /*with_rewards=*/false);
    q.attempt_model.resize(m.num_states * (k + 1) + 1, m.num_actions + 1, false);

    for (int i = 0; i <= k; ++i) {
        for (StateId s = 0; s < m.num_states; ++s) {
            StateId x = q.index(s, i);
            for (ActionId a = 0; a <= m.num_actions; ++a) {
                if (i == k) {  // goal states are absorbing for planning
                    q.model.trans[x][a] = {{x, 1.0}};
                    q.attempt_model.trans[x][a] = {{x, 1.0}};
                    continue;
                }
                if (a == m.num_actions) {
                    q.model.trans[x][a] = {{origin, 1.0}};
                    q.attempt_model.trans[x][a] = {{fail, 1.0}};
                    continue;
                }
                SparseRow row, attempt_row;
                for (auto [t, p] : m.row(s, a)) {
                    Observation z = labels.at(a, t);
                    if (z.is_null()) {
                        row.emplace_back(q.index(t, i), p);
                        attempt_row.emplace_back(q.index(t, i), p);
                    } else if (z.symbol == word[i]) {
                        row.emplace_back(q.index(t, i + 1), p);
                        attempt_row.emplace_back(q.index(t, i + 1), p);
                    } else {  // incompatible prefix: automatic reset
                        row.emplace_back(origin, p);
                        attempt_row.emplace_back(fail, p);
                    }
                }
                q.model.trans[x][a] = normalize_row(row);
                q.attempt_model.trans[x][a] = normalize_row(attempt_row);
            }
        }
    }
    for (ActionId a = 0; a <= m.num_actions; ++a) q.attempt_model.trans[fail][a] = {{fail, 1.0}};
    return q;
}

struct QueryPlan {
    Strategy strategy;  // over (s, i) pairs
    QueryMode mode;
    double value;  // MAX: per-attempt probability alpha; MIN: expected steps N
};

inline QueryPlan plan(const QueryMdp& q, QueryMode mode, const SolveParams& params = {}) {
    auto goal = q.goal_states();
    Strategy reach = max_reachability(q.attempt_model, goal, params);
    StateId origin = q.index(q.initial_mdp_state, 0);
    if (reach.value[origin] <= 0.0)
        throw UnrealizableQuery("membership query cannot be realized in this MDP");

    if (mode == QueryMode::Max) return {reach, mode, reach.value[origin]};

    Strategy ssp = min_expected_steps(q.model, goal, params);
    return {ssp, mode, ssp.value[origin]};
}

struct ExecutionResult {
    RewardTrace rewards;   // the k rewards at index-advancing steps
    long model_steps = 0;  // steps as counted by the query MDP
    long attempts = 1;     // segments separated by resets
};

/// Plays the planned strategy online until the query word has been realized.
/// The environment must be freshly reset. An incompatible observation
/// triggers an environment reset as part of the same model step.
template <typename Env>
ExecutionResult execute_membership_query(Env& env, const QueryMdp& q, const Strategy& strat,
                                         long step_budget) {
    ExecutionResult res;
    StateId s = env.state();
    int i = 0;
    RewardTrace rewards;
    while (i < q.prefix_length) {
        if (res.model_steps >= step_budget) throw BudgetExhausted(res.model_steps);
        ActionId a = strat.choice.at(q.index(s, i));
        ++res.model_steps;
        if (a == q.reset_action) {
            s = env.reset().state;
            i = 0;
            rewards.clear();
            ++res.attempts;
            continue;
        }
        auto outcome = env.step(a);
        Observation z = q.labels.at(a, outcome.state);
        s = outcome.state;
        if (z.is_null()) continue;
        if (z.symbol == q.word[i]) {
            rewards.push_back(outcome.reward);
            ++i;
        } else {
            s = env.reset().state;
            i = 0;
            rewards.clear();
            ++res.attempts;
        }
    }
    res.rewards = std::move(rewards);
    return res;
}

}  // namespace mrm
