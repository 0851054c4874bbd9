#pragma once

#include <random>

#include "mrm/builtins.hpp"
#include "mrm/lstar.hpp"
#include "mrm/reward_machine.hpp"

namespace mrm::testing {

/// L* against a perfect teacher: run_observations answers membership
/// queries, check_equivalence answers equivalence queries.
inline MealyRewardMachine learn_with_oracle(const MealyRewardMachine& truth,
                                            int* hypotheses_built = nullptr) {
    ObservationTable table(truth.alphabet, truth.default_reward);
    while (true) {
        for (const Word& w : table.pending_queries())
            table.resolve_query(w, run_observations(truth, w));
        auto cert = table.completeness();
        if (!cert.complete()) {
            table.fix(cert);
            continue;
        }
        MealyRewardMachine h = table.build_hypothesis();
        auto eq = check_equivalence(truth, h);
        if (eq.equivalent()) {
            if (hypotheses_built) *hypotheses_built = table.hypothesis_count();
            return h;
        }
        table.add_counterexample(*eq.counterexample, run_observations(truth, *eq.counterexample));
    }
}

/// Random strongly connected MDP with rewards in [-1,1]; a ring edge on
/// action 0 guarantees connectivity.
inline MdpModel random_connected_mdp(std::mt19937_64& rng, int max_states = 5,
                                     int max_actions = 3) {
    std::uniform_int_distribution<int> nstates(2, max_states), nactions(1, max_actions);
    std::uniform_real_distribution<double> unit(0.05, 1.0), reward(-1.0, 1.0);
    int n = nstates(rng), k = nactions(rng);
    std::uniform_int_distribution<int> anystate(0, n - 1);

    MdpModel m;
    m.resize(n, k, /*with_rewards=*/true);
    for (int s = 0; s < n; ++s) {
        for (int a = 0; a < k; ++a) {
            SparseRow row;
            if (a == 0) row.emplace_back((s + 1) % n, unit(rng));
            int extras = 1 + static_cast<int>(anystate(rng) % 2);
            for (int e = 0; e < extras; ++e) row.emplace_back(anystate(rng), unit(rng));
            double total = 0.0;
            for (auto& [t, p] : row) total += p;
            for (auto& [t, p] : row) p /= total;
            m.trans[s][a] = normalize_row(row);
            m.reward[s][a] = reward(rng);
        }
    }
    return m;
}

/// Best gain over all memoryless deterministic strategies, seen from state 0.
inline double brute_force_gain(const MdpModel& m) {
    std::vector<ActionId> choice(m.num_states, 0);
    double best = -kInfinity;
    while (true) {
        best = std::max(best, evaluate_strategy(m, choice)[0]);
        int i = 0;
        while (i < m.num_states && ++choice[i] == m.num_actions) choice[i++] = 0;
        if (i == m.num_states) return best;
    }
}

/// A deterministic corridor MDP: k+1 states in a line, action 0 advances,
/// entering state i+1 emits symbol syms[i]; the last state loops to 0.
struct Corridor {
    Nrmdp m;
    LabelingFunction labels;
};

inline Corridor corridor(const std::vector<SymbolId>& syms,
                         const std::vector<std::string>& alphabet) {
    Corridor c;
    int n = static_cast<int>(syms.size()) + 1;
    c.m.num_states = n;
    c.m.num_actions = 1;
    c.m.initial_state = 0;
    c.m.transitions.assign(n, std::vector<SparseRow>(1));
    for (int s = 0; s < n; ++s) c.m.transitions[s][0] = {{(s + 1) % n, 1.0}};
    c.labels.observation_alphabet = alphabet;
    c.labels.table.assign(1, std::vector<SymbolId>(n, -1));
    for (size_t i = 0; i < syms.size(); ++i) c.labels.table[0][i + 1] = syms[i];
    return c;
}

}  // namespace mrm::testing
