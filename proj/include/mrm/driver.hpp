#pragma once

#include <cstdio>
#include <optional>
#include <ostream>

#include "mrm/environment.hpp"
#include "mrm/lstar.hpp"
#include "mrm/product.hpp"
#include "mrm/query.hpp"
#include "mrm/solver.hpp"
#include "mrm/types.hpp"

namespace mrm {

struct DriverConfig {
    double v_expert = 0.0;
    int episode_length = 100;
    long total_step_budget = 100'000;
    long query_step_budget = 1'000'000;  // per membership query
    QueryMode mode = QueryMode::Min;
    std::uint64_t seed = 1;
    SolveParams solve;
};

struct EpisodeRecord {
    long episode;
    std::string phase;  // learn | explore | exploit
    int hypothesis;     // id of the latest hypothesis, 0 before the first
    long steps;
    double episode_return;
    long mq_count;  // cumulative
    long ce_count;  // cumulative
};

struct HypothesisRecord {
    int id;
    int nodes;
    double gain;  // V(pi*_H)
};

struct RunLog {
    std::vector<EpisodeRecord> episodes;
    std::vector<HypothesisRecord> hypotheses;
    std::optional<MealyRewardMachine> learned;
    long mq_count = 0;
    long ce_count = 0;
    int hypothesis_count = 0;
    double final_gain = 0.0;
    long total_steps = 0;
};

struct CounterexampleTrace {
    Word word;       // null-filtered, truncated at the first mismatch
    RewardTrace rewards;
};

/// Environment wrapper that charges every interaction to the step budget
/// and chops the run into episode records. An episode closes when it has
/// episode_length steps or when the phase changes.
template <typename Env>
class AccountingEnv {
public:
    AccountingEnv(Env& env, const DriverConfig& cfg, RunLog& log)
        : env_(env), cfg_(cfg), log_(log) {}

    EnvOutcome reset() {
        EnvOutcome o = env_.reset();
        account(o.reward);
        return o;
    }

    EnvOutcome step(ActionId a) {
        EnvOutcome o = env_.step(a);
        account(o.reward);
        return o;
    }

    StateId state() const { return env_.state(); }
    long total_steps() const { return steps_; }
    long remaining() const { return cfg_.total_step_budget - steps_; }

    void set_phase(std::string phase, int hypothesis) {
        if (phase != phase_ && ep_steps_ > 0) close_episode();
        phase_ = std::move(phase);
        hypothesis_ = hypothesis;
    }

    void finish() {
        if (ep_steps_ > 0) close_episode();
    }

private:
    void account(double reward) {
        ++steps_;
        ++ep_steps_;
        ep_return_ += reward;
        if (ep_steps_ >= cfg_.episode_length) close_episode();
    }

    void close_episode() {
        log_.episodes.push_back({next_episode_++, phase_, hypothesis_, ep_steps_, ep_return_,
                                 log_.mq_count, log_.ce_count});
        ep_steps_ = 0;
        ep_return_ = 0.0;
    }

    Env& env_;
    const DriverConfig& cfg_;
    RunLog& log_;
    std::string phase_ = "learn";
    int hypothesis_ = 0;
    long steps_ = 0;
    long ep_steps_ = 0;
    double ep_return_ = 0.0;
    long next_episode_ = 0;
};

inline double empirical_mean_payoff(const RewardTrace& rewards) {
    if (rewards.empty()) throw Error("empirical_mean_payoff: empty reward trace");
    double total = 0.0;
    for (double r : rewards) total += r;
    return total / static_cast<double>(rewards.size());
}

/// Uniform random walk over A and reset until the observed rewards
/// contradict the hypothesis.
template <typename Env>
std::optional<CounterexampleTrace> explore_uniform_until_ce(Env& env,
                                                            const LabelingFunction& labels,
                                                            const MealyRewardMachine& h,
                                                            int num_actions,
                                                            std::mt19937_64& rng,
                                                            long max_steps) {
    env.reset();  // sync both machines to their start nodes
    NodeId u = h.start;
    Word word;
    RewardTrace rewards;
    std::uniform_int_distribution<int> pick(0, num_actions);  // index num_actions = reset
    for (long used = 1; used < max_steps; ++used) {
        int a = pick(rng);
        if (a == num_actions) {
            env.reset();
            u = h.start;
            word.clear();
            rewards.clear();
            continue;
        }
        EnvOutcome o = env.step(a);
        Observation z = labels.at(a, o.state);
        if (z.is_null()) continue;
        word.push_back(z.symbol);
        rewards.push_back(o.reward);
        auto [v, predicted] = h.step(u, z);
        if (!rewards_equal(predicted, o.reward)) return CounterexampleTrace{word, rewards};
        u = v;
    }
    return std::nullopt;
}

/// Plays the product-optimal strategy in episodes (reset between episodes)
/// until a counterexample shows up or the step allotment runs out.
template <typename Env>
std::optional<CounterexampleTrace> exploit_until_ce(Env& env, const ProductMdp& product,
                                                    const Strategy& strategy,
                                                    int episode_length, long max_steps) {
    const MealyRewardMachine& h = product.machine;
    const LabelingFunction& labels = product.labels;
    long used = 0;
    while (used < max_steps) {
        StateId s = env.reset().state;
        ++used;
        NodeId u = h.start;
        Word word;
        RewardTrace rewards;
        for (int t = 0; t < episode_length && used < max_steps; ++t) {
            ActionId a = strategy.choice.at(product.index(s, u));
            if (a == product.reset_action) {
                s = env.reset().state;
                ++used;
                u = h.start;
                word.clear();
                rewards.clear();
                continue;
            }
            EnvOutcome o = env.step(a);
            ++used;
            Observation z = labels.at(a, o.state);
            s = o.state;
            if (z.is_null()) continue;
            word.push_back(z.symbol);
            rewards.push_back(o.reward);
            auto [v, predicted] = h.step(u, z);
            if (!rewards_equal(predicted, o.reward)) return CounterexampleTrace{word, rewards};
            u = v;
        }
    }
    return std::nullopt;
}

/// The full online loop: plan and run membership queries until the table
/// is complete, build a hypothesis and its optimal product strategy, then
/// explore (below the expert value) or exploit until a counterexample, and
/// repeat until the step budget runs out.
inline RunLog run_active_learning(HiddenEnvironment& env, const DriverConfig& cfg) {
    RunLog log;
    const Nrmdp& m = env.model();
    const LabelingFunction& labels = env.labels();
    ObservationTable table(labels.observation_alphabet, env.default_reward());
    AccountingEnv acct(env, cfg, log);
    std::mt19937_64 rng(cfg.seed ^ 0x9E3779B97F4A7C15ull);

    std::optional<MealyRewardMachine> hypothesis;
    std::optional<ProductMdp> product;
    std::optional<Strategy> policy;
    double gain = 0.0;

    while (acct.total_steps() < cfg.total_step_budget) {
        if (!hypothesis) {
            acct.set_phase("learn", log.hypothesis_count);
            auto pending = table.pending_queries();
            if (!pending.empty()) {
                const Word& word = pending.front();
                QueryMdp q = build_query_mdp(m, labels, word);
                QueryPlan qp = plan(q, cfg.mode, cfg.solve);
                acct.reset();
                long budget = std::min(cfg.query_step_budget, acct.remaining());
                auto result = execute_membership_query(acct, q, qp.strategy, budget);
                table.resolve_query(word, result.rewards);
                ++log.mq_count;
                continue;
            }
            auto cert = table.completeness();
            if (!cert.complete()) {
                table.fix(cert);
                continue;
            }
            MealyRewardMachine h = table.build_hypothesis();
            ++log.hypothesis_count;
            product = build_product_with_reset(m, labels, h, env.reset_cost(),
                                               /*prune_unreachable=*/true);
            policy = optimal_mean_payoff(product->model, cfg.solve);
            gain = policy->value.front();
            log.hypotheses.push_back({log.hypothesis_count, h.num_nodes, gain});
            log.learned = h;
            log.final_gain = gain;
            hypothesis = std::move(h);
            continue;
        }
        std::optional<CounterexampleTrace> ce;
        if (gain < cfg.v_expert) {
            acct.set_phase("explore", log.hypothesis_count);
            ce = explore_uniform_until_ce(acct, labels, *hypothesis, m.num_actions, rng,
                                          acct.remaining());
        } else {
            acct.set_phase("exploit", log.hypothesis_count);
            ce = exploit_until_ce(acct, *product, *policy, cfg.episode_length,
                                  acct.remaining());
        }
        if (ce) {
            table.add_counterexample(ce->word, ce->rewards);
            ++log.ce_count;
            hypothesis.reset();
        }
    }
    acct.finish();
    log.total_steps = acct.total_steps();
    return log;
}

// -- output files -----------------------------------------------------------

inline std::string format_number(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

inline void write_run_csv(const RunLog& log, std::ostream& out) {
    out << "episode,phase,hypothesis,steps,return,mq_count,ce_count\n";
    for (const auto& e : log.episodes) {
        out << e.episode << ',' << e.phase << ',' << e.hypothesis << ',' << e.steps << ','
            << format_number(e.episode_return) << ',' << e.mq_count << ',' << e.ce_count
            << '\n';
    }
}

inline nlohmann::json summary_json(const RunLog& log) {
    nlohmann::json hyps = nlohmann::json::array();
    for (const auto& h : log.hypotheses)
        hyps.push_back({{"id", h.id}, {"nodes", h.nodes}, {"gain", h.gain}});
    return {{"final_gain", log.final_gain},
            {"mq_count", log.mq_count},
            {"ce_count", log.ce_count},
            {"hypothesis_count", log.hypothesis_count},
            {"total_steps", log.total_steps},
            {"episodes", static_cast<long>(log.episodes.size())},
            {"hypotheses", hyps}};
}

}  // namespace mrm
