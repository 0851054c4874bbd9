#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <deque>

#include "mrm/model.hpp"
#include "mrm/scc.hpp"
#include "mrm/types.hpp"

namespace mrm {

struct SolveParams {
    double tolerance = 1e-9;
    long max_iterations = 1'000'000;
    double damping = 0.5;  // aperiodicity transform: T' = (1-d)T + d*I
};

enum class StrategyKind { MaxReach, MinSteps, MeanPayoff };

/// Memoryless deterministic strategy with its per-state value. The value
/// semantics depend on the producing operation (probability, expected
/// steps, or gain).
struct Strategy {
    std::vector<ActionId> choice;
    std::vector<double> value;
    StrategyKind kind = StrategyKind::MeanPayoff;
};

namespace detail {

inline std::vector<char> goal_mask(const MdpModel& m, const std::vector<StateId>& goal) {
    if (goal.empty()) throw Error("solver: empty goal set");
    std::vector<char> mask(m.num_states, 0);
    for (StateId s : goal) mask.at(s) = 1;
    return mask;
}

/// States with a positive-probability path into the goal.
inline std::vector<char> can_reach(const MdpModel& m, const std::vector<char>& goal) {
    std::vector<std::vector<int>> rev(m.num_states);
    for (int s = 0; s < m.num_states; ++s)
        for (int a = 0; a < m.num_actions; ++a)
            for (auto [t, p] : m.trans[s][a])
                if (p > 0.0) rev[t].push_back(s);
    std::vector<char> seen(m.num_states, 0);
    std::deque<int> queue;
    for (int s = 0; s < m.num_states; ++s)
        if (goal[s]) {
            seen[s] = 1;
            queue.push_back(s);
        }
    while (!queue.empty()) {
        int t = queue.front();
        queue.pop_front();
        for (int s : rev[t])
            if (!seen[s]) {
                seen[s] = 1;
                queue.push_back(s);
            }
    }
    return seen;
}

/// States from which some strategy reaches the goal with probability one
/// (standard qualitative fixpoint).
inline std::vector<char> almost_sure_reach(const MdpModel& m, const std::vector<char>& goal) {
    std::vector<char> candidate(m.num_states, 1);
    while (true) {
        std::vector<char> reach = goal;
        bool grew = true;
        while (grew) {
            grew = false;
            for (int s = 0; s < m.num_states; ++s) {
                if (reach[s] || !candidate[s]) continue;
                for (int a = 0; a < m.num_actions && !reach[s]; ++a) {
                    bool stays = true, progresses = false;
                    for (auto [t, p] : m.trans[s][a]) {
                        if (p <= 0.0) continue;
                        if (!candidate[t] && !goal[t]) stays = false;
                        if (reach[t]) progresses = true;
                    }
                    if (stays && progresses) {
                        reach[s] = 1;
                        grew = true;
                    }
                }
            }
        }
        for (int s = 0; s < m.num_states; ++s)
            if (goal[s]) reach[s] = 1;
        if (reach == candidate) return candidate;
        candidate = reach;
    }
}

}  // namespace detail

/// Optimal probability of reaching `goal`, by value iteration after a
/// qualitative prob-0 precomputation. Goal states are treated as absorbing.
inline Strategy max_reachability(const MdpModel& m, const std::vector<StateId>& goal,
                                 const SolveParams& params = {}) {
    auto mask = detail::goal_mask(m, goal);
    auto reachable = detail::can_reach(m, mask);

    std::vector<double> value(m.num_states, 0.0);
    for (int s = 0; s < m.num_states; ++s)
        if (mask[s]) value[s] = 1.0;

    for (long it = 0; it < params.max_iterations; ++it) {
        double delta = 0.0;
        for (int s = 0; s < m.num_states; ++s) {
            if (mask[s] || !reachable[s]) continue;
            double best = 0.0;
            for (int a = 0; a < m.num_actions; ++a) {
                double q = 0.0;
                for (auto [t, p] : m.trans[s][a]) q += p * value[t];
                best = std::max(best, q);
            }
            delta = std::max(delta, std::abs(best - value[s]));
            value[s] = best;
        }
        if (delta < params.tolerance) break;
    }

    Strategy strat;
    strat.kind = StrategyKind::MaxReach;
    strat.value = value;
    strat.choice.assign(m.num_states, 0);

    // Greedy value-optimal choices can stall (a self-loop preserves the
    // optimal value), so assign states in rounds: pick the lowest-index
    // value-optimal action with positive mass on an already-assigned state.
    std::vector<char> done = mask;
    for (int s = 0; s < m.num_states; ++s)
        if (!reachable[s]) done[s] = 1;  // value 0, any action
    bool grew = true;
    while (grew) {
        grew = false;
        for (int s = 0; s < m.num_states; ++s) {
            if (done[s]) continue;
            for (int a = 0; a < m.num_actions && !done[s]; ++a) {
                double q = 0.0;
                bool progresses = false;
                for (auto [t, p] : m.trans[s][a]) {
                    q += p * value[t];
                    if (p > 0.0 && done[t] && value[t] > 0.0) progresses = true;
                }
                if (progresses && q >= value[s] - 1e-9) {
                    strat.choice[s] = a;
                    done[s] = 1;
                    grew = true;
                }
            }
        }
    }
    return strat;
}

/// Minimum expected number of steps to reach `goal` (each transition costs
/// one). States that cannot reach the goal almost surely under any strategy
/// get value +infinity.
inline Strategy min_expected_steps(const MdpModel& m, const std::vector<StateId>& goal,
                                   const SolveParams& params = {}) {
    auto mask = detail::goal_mask(m, goal);
    auto sure = detail::almost_sure_reach(m, mask);

    std::vector<double> value(m.num_states, 0.0);
    for (int s = 0; s < m.num_states; ++s)
        if (!sure[s]) value[s] = kInfinity;

    for (long it = 0; it < params.max_iterations; ++it) {
        double delta = 0.0;
        for (int s = 0; s < m.num_states; ++s) {
            if (mask[s] || !sure[s]) continue;
            double best = kInfinity;
            for (int a = 0; a < m.num_actions; ++a) {
                double q = 1.0;
                for (auto [t, p] : m.trans[s][a]) {
                    if (std::isinf(value[t])) {
                        q = kInfinity;
                        break;
                    }
                    q += p * value[t];
                }
                best = std::min(best, q);
            }
            if (std::isfinite(best)) {
                delta = std::max(delta, std::abs(best - value[s]));
                value[s] = best;
            }
        }
        if (delta < params.tolerance) break;
    }

    Strategy strat;
    strat.kind = StrategyKind::MinSteps;
    strat.value = value;
    strat.choice.assign(m.num_states, 0);
    for (int s = 0; s < m.num_states; ++s) {
        if (mask[s] || !sure[s]) continue;
        double best = kInfinity;
        for (int a = 0; a < m.num_actions; ++a) {
            double q = 1.0;
            for (auto [t, p] : m.trans[s][a]) {
                if (std::isinf(value[t])) {
                    q = kInfinity;
                    break;
                }
                q += p * value[t];
            }
            if (q < best - 1e-12) {
                best = q;
                strat.choice[s] = a;
            }
        }
    }
    return strat;
}

/// Gains of the chain induced by a fixed strategy: stationary-weighted
/// average reward per bottom SCC, absorption-weighted mixture on transient
/// states.
inline std::vector<double> evaluate_strategy(const MdpModel& m,
                                             const std::vector<ActionId>& choice) {
    if (!m.has_rewards()) throw Error("evaluate_strategy: model has no rewards");
    MarkovChain chain = induced_chain(m, choice);
    auto bottoms = bsccs(chain);

    std::vector<int> bscc_of(m.num_states, -1);
    for (size_t b = 0; b < bottoms.size(); ++b)
        for (int s : bottoms[b]) bscc_of[s] = static_cast<int>(b);

    std::vector<double> gain_of_bscc(bottoms.size(), 0.0);
    for (size_t b = 0; b < bottoms.size(); ++b) {
        const auto& states = bottoms[b];
        int k = static_cast<int>(states.size());
        std::vector<int> local(m.num_states, -1);
        for (int i = 0; i < k; ++i) local[states[i]] = i;

        // stationary distribution: pi P = pi, sum pi = 1
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(k, k);
        for (int i = 0; i < k; ++i) {
            for (auto [t, p] : chain.rows[states[i]]) A(local[t], i) += p;
            A(i, i) -= 1.0;
        }
        A.row(k - 1).setOnes();
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
        rhs(k - 1) = 1.0;
        Eigen::VectorXd pi = A.fullPivLu().solve(rhs);
        if ((A * pi - rhs).norm() > 1e-8)
            throw Error("evaluate_strategy: singular stationary system in BSCC " +
                        std::to_string(b));
        double g = 0.0;
        for (int i = 0; i < k; ++i) g += pi(i) * m.reward[states[i]][choice[states[i]]];
        gain_of_bscc[b] = g;
    }

    std::vector<double> gain(m.num_states, 0.0);
    for (int s = 0; s < m.num_states; ++s)
        if (bscc_of[s] >= 0) gain[s] = gain_of_bscc[bscc_of[s]];

    std::vector<int> transient;
    for (int s = 0; s < m.num_states; ++s)
        if (bscc_of[s] < 0) transient.push_back(s);
    if (transient.empty()) return gain;

    std::vector<int> tindex(m.num_states, -1);
    for (size_t i = 0; i < transient.size(); ++i) tindex[transient[i]] = static_cast<int>(i);

    int n = static_cast<int>(transient.size());
    Eigen::MatrixXd iq = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd absorb = Eigen::MatrixXd::Zero(n, static_cast<int>(bottoms.size()));
    for (int i = 0; i < n; ++i) {
        for (auto [t, p] : chain.rows[transient[i]]) {
            if (bscc_of[t] >= 0)
                absorb(i, bscc_of[t]) += p;
            else
                iq(i, tindex[t]) -= p;
        }
    }
    Eigen::MatrixXd reach = iq.partialPivLu().solve(absorb);
    for (int i = 0; i < n; ++i) {
        double g = 0.0;
        for (size_t b = 0; b < bottoms.size(); ++b) g += reach(i, b) * gain_of_bscc[b];
        gain[transient[i]] = g;
    }
    return gain;
}

/// Optimal mean payoff on a strongly connected MDP by relative value
/// iteration on the damped (aperiodic) model; the gain is read off the span
/// bounds of successive differences.
inline Strategy optimal_mean_payoff(const MdpModel& m, const SolveParams& params = {}) {
    if (!m.has_rewards()) throw Error("optimal_mean_payoff: model has no rewards");
    if (!is_strongly_connected(m))
        throw NotStronglyConnected("optimal_mean_payoff: input MDP is not strongly connected");

    double d = params.damping;
    std::vector<double> h(m.num_states, 0.0), hnext(m.num_states, 0.0);
    double gain = 0.0;

    auto backup = [&](int s, int a) {
        double q = m.reward[s][a] + d * h[s];
        for (auto [t, p] : m.trans[s][a]) q += (1.0 - d) * p * h[t];
        return q;
    };

    bool converged = false;
    for (long it = 0; it < params.max_iterations && !converged; ++it) {
        double lo = kInfinity, hi = -kInfinity;
        for (int s = 0; s < m.num_states; ++s) {
            double best = -kInfinity;
            for (int a = 0; a < m.num_actions; ++a) best = std::max(best, backup(s, a));
            hnext[s] = best;
            double diff = best - h[s];
            lo = std::min(lo, diff);
            hi = std::max(hi, diff);
        }
        gain = 0.5 * (lo + hi);
        if (hi - lo < params.tolerance) converged = true;
        double offset = hnext[0];
        for (int s = 0; s < m.num_states; ++s) h[s] = hnext[s] - offset;
    }

    Strategy strat;
    strat.kind = StrategyKind::MeanPayoff;
    strat.value.assign(m.num_states, gain);
    strat.choice.assign(m.num_states, 0);
    for (int s = 0; s < m.num_states; ++s) {
        double best = -kInfinity;
        for (int a = 0; a < m.num_actions; ++a) {
            double q = backup(s, a);
            if (q > best + 1e-12) {
                best = q;
                strat.choice[s] = a;
            }
        }
    }
    return strat;
}

}  // namespace mrm
