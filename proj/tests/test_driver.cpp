#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "helpers.hpp"
#include "mrm/driver.hpp"

using namespace mrm;

TEST_CASE("empirical mean payoff is the arithmetic mean") {
    CHECK(empirical_mean_payoff({2, 2, 2}) == Catch::Approx(2.0));
    CHECK(empirical_mean_payoff({10, 70, 95, 180}) == Catch::Approx(88.75));
    CHECK(empirical_mean_payoff({0}) == 0.0);
    CHECK_THROWS_AS(empirical_mean_payoff({}), Error);
}

TEST_CASE("a one-node truth machine is learned in one hypothesis") {
    BuiltinDomain d = builtin("cube");
    auto flat = MealyRewardMachine::self_loops(1, d.truth.alphabet, 0.0);
    flat.set_edge(0, 0, 0, 1.0);
    flat.set_edge(0, 1, 0, 2.0);
    d.truth = flat;
    HiddenEnvironment env = make_environment(d, 5);
    DriverConfig cfg = d.config;
    cfg.total_step_budget = 20'000;
    cfg.seed = 5;
    RunLog log = run_active_learning(env, cfg);
    CHECK(log.hypothesis_count == 1);
    CHECK(log.ce_count == 0);
    REQUIRE(log.learned.has_value());
    CHECK(check_equivalence(flat, *log.learned).equivalent());
}

TEST_CASE("exploration finds a counterexample against a wrong hypothesis") {
    BuiltinDomain d = builtin("cube");
    HiddenEnvironment env = make_environment(d, 7);
    auto wrong = MealyRewardMachine::self_loops(1, d.truth.alphabet, 0.0);
    std::mt19937_64 rng(7);
    auto ce = explore_uniform_until_ce(env, env.labels(), wrong, env.model().num_actions, rng,
                                       100'000);
    REQUIRE(ce.has_value());
    // the trace contradicts the hypothesis but matches the truth
    CHECK(run_observations(wrong, ce->word) != ce->rewards);
    CHECK(run_observations(env.truth_machine(), ce->word) == ce->rewards);
    // truncation: only the last symbol disagrees
    RewardTrace predicted = run_observations(wrong, ce->word);
    for (size_t i = 0; i + 1 < ce->word.size(); ++i)
        CHECK(rewards_equal(predicted[i], ce->rewards[i]));
}

TEST_CASE("exploration never reports a counterexample against the truth") {
    BuiltinDomain d = builtin("cube");
    HiddenEnvironment env = make_environment(d, 11);
    std::mt19937_64 rng(11);
    auto ce = explore_uniform_until_ce(env, env.labels(), d.truth, env.model().num_actions,
                                       rng, 30'000);
    CHECK_FALSE(ce.has_value());
}

TEST_CASE("exploitation finds a counterexample when the optimal path is mispriced") {
    BuiltinDomain d = builtin("treasure");
    HiddenEnvironment env = make_environment(d, 3);
    auto wrong = d.truth;
    wrong.set_edge(0, 0, 1, 11.0);  // misprice the map purchase
    ProductMdp product =
        build_product_with_reset(env.model(), env.labels(), wrong, env.reset_cost(), true);
    Strategy strat = optimal_mean_payoff(product.model);
    auto ce = exploit_until_ce(env, product, strat, 507, 100'000);
    REQUIRE(ce.has_value());
    CHECK(ce->word.back() == 0);  // the mispriced m edge
    CHECK(ce->rewards.back() == Catch::Approx(10.0));
}

TEST_CASE("full runs learn machines equivalent to the truth on cube") {
    BuiltinDomain d = builtin("cube");
    HiddenEnvironment env = make_environment(d, 1);
    DriverConfig cfg = d.config;
    cfg.seed = 1;
    RunLog log = run_active_learning(env, cfg);
    REQUIRE(log.learned.has_value());
    CHECK(check_equivalence(d.truth, *log.learned).equivalent());
    CHECK(log.learned->num_nodes == 6);
    CHECK(log.final_gain > cfg.v_expert);
    CHECK(log.total_steps >= cfg.total_step_budget);
}

TEST_CASE("episode accounting covers every step exactly once") {
    BuiltinDomain d = builtin("office");
    HiddenEnvironment env = make_environment(d, 2);
    DriverConfig cfg = d.config;
    cfg.total_step_budget = 50'000;
    cfg.seed = 2;
    RunLog log = run_active_learning(env, cfg);
    long steps = 0;
    double ret = 0.0;
    long last_episode = -1;
    for (const auto& e : log.episodes) {
        CHECK(e.episode == last_episode + 1);
        last_episode = e.episode;
        CHECK(e.steps >= 1);
        CHECK(e.steps <= cfg.episode_length);
        CHECK((e.phase == "learn" || e.phase == "explore" || e.phase == "exploit"));
        steps += e.steps;
        ret += e.episode_return;
    }
    CHECK(steps == log.total_steps);
    CHECK(ret == Catch::Approx(env.total_reward()).margin(1e-6));
    // counters monotone
    for (size_t i = 1; i < log.episodes.size(); ++i) {
        CHECK(log.episodes[i].mq_count >= log.episodes[i - 1].mq_count);
        CHECK(log.episodes[i].ce_count >= log.episodes[i - 1].ce_count);
    }
}

TEST_CASE("identical config and seed give identical run logs") {
    auto run = [] {
        BuiltinDomain d = builtin("cube");
        HiddenEnvironment env = make_environment(d, 9);
        DriverConfig cfg = d.config;
        cfg.total_step_budget = 60'000;
        cfg.seed = 9;
        return run_active_learning(env, cfg);
    };
    RunLog a = run(), b = run();
    std::ostringstream csv_a, csv_b;
    write_run_csv(a, csv_a);
    write_run_csv(b, csv_b);
    CHECK(csv_a.str() == csv_b.str());
    CHECK(summary_json(a).dump() == summary_json(b).dump());
    REQUIRE((a.learned.has_value() && b.learned.has_value()));
    CHECK(to_json(*a.learned).dump() == to_json(*b.learned).dump());
}

TEST_CASE("run csv has the fixed header and one row per episode") {
    RunLog log;
    log.episodes.push_back({0, "learn", 0, 10, -1.25, 3, 0});
    log.episodes.push_back({1, "exploit", 1, 75, 17.5, 3, 1});
    std::ostringstream os;
    write_run_csv(log, os);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "episode,phase,hypothesis,steps,return,mq_count,ce_count");
    std::getline(in, line);
    CHECK(line == "0,learn,0,10,-1.25,3,0");
    std::getline(in, line);
    CHECK(line == "1,exploit,1,75,17.5,3,1");
}

TEST_CASE("budget smaller than the first query plan raises BudgetExhausted") {
    BuiltinDomain d = builtin("treasure");
    HiddenEnvironment env = make_environment(d, 4);
    DriverConfig cfg = d.config;
    cfg.total_step_budget = 3;  // not even one realized observation
    cfg.seed = 4;
    CHECK_THROWS_AS(run_active_learning(env, cfg), BudgetExhausted);
}
