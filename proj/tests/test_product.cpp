#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "mrm/product.hpp"

using namespace mrm;

namespace {

struct Domain {
    Nrmdp m;
    LabelingFunction labels;
    MealyRewardMachine truth;
    double reset_cost;
};

Domain load(const std::string& name) {
    BuiltinDomain d = builtin(name);
    auto [m, labels] = compile(d.grid);
    return {std::move(m), std::move(labels), d.truth, d.grid.reset_cost};
}

}  // namespace

TEST_CASE("unpruned product has |S| times |U| states") {
    Domain d = load("cube");
    REQUIRE(d.m.num_states == 25);
    auto h = testing::learn_with_oracle(d.truth);
    REQUIRE(h.num_nodes == 6);
    ProductMdp p = build_product_with_reset(d.m, d.labels, h, d.reset_cost);
    CHECK(p.model.num_states == 150);
}

TEST_CASE("pruning keeps only pairs reachable from the home state") {
    Domain d = load("cube");
    ProductMdp p = build_product_with_reset(d.m, d.labels, d.truth, d.reset_cost, true);
    CHECK(p.model.num_states < d.m.num_states * d.truth.num_nodes);
    CHECK(is_strongly_connected(p.model));
    // standing on an a-cell is incompatible with the machine's start node
    StateId a_cell = -1;
    for (StateId s = 0; s < d.m.num_states; ++s)
        if (d.labels.at(0, s) == Observation::of(0)) a_cell = s;
    REQUIRE(a_cell >= 0);
    CHECK_THROWS_AS(p.index(a_cell, d.truth.start), Error);
}

TEST_CASE("reset action goes home and pays the reset cost") {
    Domain d = load("treasure");
    ProductMdp p = build_product_with_reset(d.m, d.labels, d.truth, d.reset_cost, true);
    for (StateId x = 0; x < p.model.num_states; ++x) {
        REQUIRE(p.model.trans[x][p.reset_action].size() == 1);
        CHECK(p.model.trans[x][p.reset_action][0].first == p.home);
        CHECK(p.model.reward[x][p.reset_action] == Catch::Approx(-10.0));
    }
    CHECK(p.mdp_state(p.home) == d.m.initial_state);
    CHECK(p.node(p.home) == d.truth.start);
}

TEST_CASE("all product rows are distributions") {
    for (auto name : {"treasure", "office", "cube"}) {
        Domain d = load(name);
        ProductMdp p = build_product_with_reset(d.m, d.labels, d.truth, d.reset_cost, true);
        for (StateId x = 0; x < p.model.num_states; ++x) {
            for (ActionId a = 0; a <= p.reset_action; ++a) {
                double total = 0.0;
                for (auto [t, prob] : p.model.trans[x][a]) total += prob;
                CHECK(total == Catch::Approx(1.0).margin(1e-9));
            }
        }
    }
}

TEST_CASE("one-node machine yields constant rewards everywhere") {
    Domain d = load("cube");
    auto flat = MealyRewardMachine::self_loops(1, d.truth.alphabet, 0.0);
    for (int u = 0; u < 1; ++u)
        for (int z = 0; z < flat.alphabet_size(); ++z) flat.set_edge(u, z, u, 2.5);
    flat.default_reward = 2.5;
    ProductMdp p = build_product_with_reset(d.m, d.labels, flat, -1.0);
    for (StateId x = 0; x < p.model.num_states; ++x)
        for (ActionId a = 0; a < p.reset_action; ++a)
            CHECK(p.model.reward[x][a] == Catch::Approx(2.5));
}

TEST_CASE("treasure product pays 180 for selling at the jeweler with node 4") {
    Domain d = load("treasure");
    ProductMdp p = build_product_with_reset(d.m, d.labels, d.truth, d.reset_cost, true);
    ActionId sell = -1;
    for (int a = 0; a < d.m.num_actions; ++a)
        if (d.m.action_name(a) == "sell") sell = a;
    REQUIRE(sell >= 0);
    StateId j_cell = -1;
    for (StateId s = 0; s < d.m.num_states; ++s)
        if (!d.labels.at(sell, s).is_null() &&
            d.labels.observation_alphabet[d.labels.at(sell, s).symbol] == "j")
            j_cell = s;
    REQUIRE(j_cell >= 0);
    CHECK(p.transition_reward(sell, j_cell, 4) == Catch::Approx(180.0));
    // expected reward of selling while standing on the jeweler cell at node 4:
    // the sell action stays put, so the full mass observes j
    StateId x = p.index(j_cell, 4);
    CHECK(p.model.reward[x][sell] == Catch::Approx(180.0));
}

TEST_CASE("alphabet mismatch is rejected") {
    Domain d = load("cube");
    auto wrong = MealyRewardMachine::self_loops(2, {"q"}, 0.0);
    CHECK_THROWS_AS(build_product_with_reset(d.m, d.labels, wrong, 0.0), AlphabetMismatch);
    CHECK_THROWS_AS(build_triple_product(d.m, d.labels, d.truth, wrong, 0.0),
                    AlphabetMismatch);
}

TEST_CASE("triple product with h = r never reaches CE") {
    Domain d = load("cube");
    TripleProduct tp = build_triple_product(d.m, d.labels, d.truth, d.truth, d.reset_cost);
    // CE edges exist only from off-diagonal (uR != uH) states, none of which
    // are reachable from the start when the machines coincide
    std::vector<char> seen(tp.model.num_states, 0);
    std::deque<StateId> queue{tp.index(d.m.initial_state, d.truth.start, d.truth.start)};
    seen[queue.front()] = 1;
    while (!queue.empty()) {
        StateId x = queue.front();
        queue.pop_front();
        CHECK(x != tp.ce_state);
        CHECK(tp.index(0, 0, 0) >= 0);  // indexing stays valid
        for (ActionId a = 0; a <= tp.reset_action; ++a)
            for (auto [t, p] : tp.model.trans[x][a])
                if (p > 0.0 && !seen[t]) {
                    seen[t] = 1;
                    queue.push_back(t);
                }
    }
    // every reachable state is diagonal
    for (StateId x = 0; x < tp.model.num_states - 1; ++x)
        if (seen[x]) CHECK((x / tp.num_hyp_nodes) % tp.num_truth_nodes == x % tp.num_hyp_nodes);
}

TEST_CASE("CE state is absorbing and rows conserve mass") {
    Domain d = load("office");
    auto h = d.truth;
    h.set_edge(0, 0, 1, 99.0);  // disagree on the first mail request
    TripleProduct tp = build_triple_product(d.m, d.labels, d.truth, h, d.reset_cost);
    for (ActionId a = 0; a <= tp.reset_action; ++a) {
        REQUIRE(tp.model.trans[tp.ce_state][a].size() == 1);
        CHECK(tp.model.trans[tp.ce_state][a][0].first == tp.ce_state);
    }
    for (StateId x = 0; x < tp.model.num_states; ++x) {
        for (ActionId a = 0; a <= tp.reset_action; ++a) {
            double total = 0.0;
            for (auto [t, p] : tp.model.trans[x][a]) total += p;
            CHECK(total == Catch::Approx(1.0).margin(1e-9));
        }
    }
}

TEST_CASE("CE mass from the start equals the probability of observing the changed symbol") {
    Domain d = load("office");
    auto h = d.truth;
    h.set_edge(0, 0, 1, 99.0);  // mrA mispriced at the start node
    TripleProduct tp = build_triple_product(d.m, d.labels, d.truth, h, d.reset_cost);
    ActionId ask = -1;
    for (int a = 0; a < d.m.num_actions; ++a)
        if (d.m.action_name(a) == "ask") ask = a;
    REQUIRE(ask >= 0);

    // find a state where asking can produce mrA
    SymbolId mrA = d.labels.symbol_index("mrA");
    for (StateId s = 0; s < d.m.num_states; ++s) {
        double expect = 0.0;
        for (auto [t, p] : d.m.row(s, ask))
            if (d.labels.at(ask, t) == Observation::of(mrA)) expect += p;
        StateId x = tp.index(s, d.truth.start, h.start);
        double ce_mass = 0.0;
        for (auto [t, p] : tp.model.trans[x][ask])
            if (t == tp.ce_state) ce_mass += p;
        CHECK(ce_mass == Catch::Approx(expect).margin(1e-12));
    }
}

TEST_CASE("simulating a product strategy on the MDP gives the product's gain") {
    Domain d = load("cube");
    ProductMdp p = build_product_with_reset(d.m, d.labels, d.truth, d.reset_cost, true);
    Strategy strat = optimal_mean_payoff(p.model);

    HiddenEnvironment env(d.m, d.labels, d.truth, d.reset_cost, 99);
    StateId s = env.reset().state;
    NodeId u = d.truth.start;
    double total = 0.0;
    long steps = 400'000;
    for (long i = 0; i < steps; ++i) {
        ActionId a = strat.choice[p.index(s, u)];
        if (a == p.reset_action) {
            auto o = env.reset();
            s = o.state;
            u = d.truth.start;
            total += o.reward;
        } else {
            auto o = env.step(a);
            total += o.reward;
            u = d.truth.step(u, d.labels.at(a, o.state)).first;
            s = o.state;
        }
    }
    CHECK(total / steps == Catch::Approx(strat.value[0]).margin(0.01));
}
