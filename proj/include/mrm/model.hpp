#pragma once

#include <algorithm>

#include "mrm/types.hpp"

namespace mrm {

/// Generic finite MDP as consumed by the solver. `reward[s][a]` is the
/// expected immediate reward for playing a in s (may be left empty for
/// reward-free planning problems).
struct MdpModel {
    int num_states = 0;
    int num_actions = 0;
    std::vector<std::vector<SparseRow>> trans;  // [state][action]
    std::vector<std::vector<double>> reward;    // [state][action], optional

    void resize(int states, int actions, bool with_rewards) {
        num_states = states;
        num_actions = actions;
        trans.assign(states, std::vector<SparseRow>(actions));
        if (with_rewards) reward.assign(states, std::vector<double>(actions, 0.0));
    }

    bool has_rewards() const { return !reward.empty(); }
};

/// A Markov chain: one sparse row per state.
struct MarkovChain {
    std::vector<SparseRow> rows;
    int num_states() const { return static_cast<int>(rows.size()); }
};

inline void sort_row(SparseRow& row) {
    std::sort(row.begin(), row.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
}

/// Merges duplicate targets and drops zero entries; keeps targets sorted.
inline SparseRow normalize_row(const SparseRow& row) {
    SparseRow sorted = row;
    sort_row(sorted);
    SparseRow out;
    for (auto [t, p] : sorted) {
        if (p == 0.0) continue;
        if (!out.empty() && out.back().first == t)
            out.back().second += p;
        else
            out.emplace_back(t, p);
    }
    return out;
}

/// Chain induced by a memoryless deterministic strategy.
inline MarkovChain induced_chain(const MdpModel& m, const std::vector<ActionId>& choice) {
    MarkovChain chain;
    chain.rows.reserve(m.num_states);
    for (int s = 0; s < m.num_states; ++s) chain.rows.push_back(m.trans[s].at(choice.at(s)));
    return chain;
}

/// Chain induced by the uniform strategy over all actions.
inline MarkovChain uniform_chain(const MdpModel& m) {
    MarkovChain chain;
    double w = 1.0 / m.num_actions;
    for (int s = 0; s < m.num_states; ++s) {
        SparseRow row;
        for (int a = 0; a < m.num_actions; ++a)
            for (auto [t, p] : m.trans[s][a]) row.emplace_back(t, p * w);
        chain.rows.push_back(normalize_row(row));
    }
    return chain;
}

}  // namespace mrm
