#pragma once

#include <algorithm>
#include <random>
#include <sstream>

#include "mrm/types.hpp"

namespace mrm {

/// Non-rewarding MDP: dynamics only. Every action is enabled in every state.
struct Nrmdp {
    int num_states = 0;
    int num_actions = 0;
    StateId initial_state = 0;
    std::vector<std::string> state_names;   // optional, empty = use indices
    std::vector<std::string> action_names;  // optional
    std::vector<std::vector<SparseRow>> transitions;  // [state][action]

    const SparseRow& row(StateId s, ActionId a) const { return transitions.at(s).at(a); }

    std::string state_name(StateId s) const {
        return state_names.empty() ? std::to_string(s) : state_names.at(s);
    }
    std::string action_name(ActionId a) const {
        return action_names.empty() ? std::to_string(a) : action_names.at(a);
    }
};

/// Maps (action, successor state) pairs to observations; null elsewhere.
struct LabelingFunction {
    std::vector<std::string> observation_alphabet;  // Z
    std::vector<std::vector<SymbolId>> table;       // [action][state], -1 = null

    Observation at(ActionId a, StateId s) const {
        SymbolId z = table.at(a).at(s);
        return z < 0 ? Observation::null() : Observation::of(z);
    }

    int alphabet_size() const { return static_cast<int>(observation_alphabet.size()); }

    SymbolId symbol_index(const std::string& name) const {
        for (size_t i = 0; i < observation_alphabet.size(); ++i)
            if (observation_alphabet[i] == name) return static_cast<SymbolId>(i);
        throw Error("unknown observation symbol: " + name);
    }
};

/// One environment step as remembered by the agent.
struct InteractionStep {
    ActionId action;
    Reward reward;
    StateId state;  // successor
};

/// s0 then repeated (action, reward, successor) triples.
struct InteractionTrace {
    StateId initial_state = 0;
    std::vector<InteractionStep> steps;

    void append(ActionId a, Reward r, StateId s) { steps.push_back({a, r, s}); }
    void clear_to(StateId s0) {
        initial_state = s0;
        steps.clear();
    }
};

inline std::vector<std::string> validate(const Nrmdp& m) {
    std::vector<std::string> violations;
    auto complain = [&](const std::string& msg) { violations.push_back(msg); };

    if (m.initial_state < 0 || m.initial_state >= m.num_states)
        complain("initial state " + std::to_string(m.initial_state) + " out of range");
    if (static_cast<int>(m.transitions.size()) != m.num_states)
        complain("transition table has " + std::to_string(m.transitions.size()) +
                 " rows, expected " + std::to_string(m.num_states));

    for (int s = 0; s < static_cast<int>(m.transitions.size()); ++s) {
        if (static_cast<int>(m.transitions[s].size()) != m.num_actions) {
            complain("state " + m.state_name(s) + ": not all actions enabled");
            continue;
        }
        for (int a = 0; a < m.num_actions; ++a) {
            double total = 0.0;
            for (auto [t, p] : m.transitions[s][a]) {
                if (t < 0 || t >= m.num_states)
                    complain("(" + m.state_name(s) + "," + m.action_name(a) +
                             "): target out of range");
                if (p < 0.0 || p > 1.0)
                    complain("(" + m.state_name(s) + "," + m.action_name(a) +
                             "): probability outside [0,1]");
                total += p;
            }
            if (std::abs(total - 1.0) > 1e-9) {
                std::ostringstream os;
                os << "(" << m.state_name(s) << "," << m.action_name(a)
                   << "): row sums to " << total;
                complain(os.str());
            }
        }
    }
    return violations;
}

/// Draws s' with probability T(s,a,s'). Deterministic given the generator state.
inline StateId sample_transition(const Nrmdp& m, StateId s, ActionId a,
                                 std::mt19937_64& rng) {
    if (s < 0 || s >= m.num_states || a < 0 || a >= m.num_actions)
        throw Error("sample_transition: invalid state or action index");
    const SparseRow& row = m.row(s, a);
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0.0;
    for (auto [t, p] : row) {
        acc += p;
        if (u < acc) return t;
    }
    return row.back().first;  // guard against rounding at u ~ 1
}

/// Applies lambda stepwise and drops null entries.
inline ObservationTrace extract_observation_trace(const InteractionTrace& t,
                                                  const LabelingFunction& labels) {
    ObservationTrace out;
    for (const auto& step : t.steps) {
        Observation z = labels.at(step.action, step.state);
        if (!z.is_null()) out.push_back(z.symbol);
    }
    return out;
}

/// Rewards at exactly the positions retained by extract_observation_trace.
inline RewardTrace extract_reward_trace(const InteractionTrace& t,
                                        const LabelingFunction& labels) {
    RewardTrace out;
    for (const auto& step : t.steps) {
        if (!labels.at(step.action, step.state).is_null()) out.push_back(step.reward);
    }
    return out;
}

}  // namespace mrm
