#pragma once

#include "mrm/driver.hpp"
#include "mrm/environment.hpp"

namespace mrm {

struct BuiltinDomain {
    std::string name;
    std::string grid_text;
    GridSpec grid;
    MealyRewardMachine truth;
    DriverConfig config;
};

namespace detail {

// 7x7 map world. The map seller sits in the middle, the treasure at the top,
// the trader at the bottom, and the two equipment shops at the left and right
// edges. The agent may begin at any corner of the five 3x3 quadrant areas.
inline const char* treasure_grid() {
    return R"(width 7
height 7
slip 0.05
default_reward -0.1
reset_cost -10
actions buy sell collect
grid
...t...
.......
.......
e..m..g
.......
.......
...j...
endgrid
start 0 0
start 2 0
start 0 2
start 2 2
start 4 0
start 6 0
start 4 2
start 6 2
start 0 4
start 2 4
start 0 6
start 2 6
start 4 4
start 6 4
start 4 6
start 6 6
start 2 2
start 4 2
start 2 4
start 4 4
bind m buy m
bind e buy e
bind g buy g
bind t collect t
bind j sell j
)";
}

inline MealyRewardMachine treasure_truth() {
    // alphabet order follows the bindings above
    auto h = MealyRewardMachine::self_loops(5, {"m", "e", "g", "t", "j"}, -0.1);
    h.set_edge(0, 0, 1, 10.0);   // buy the map
    h.set_edge(1, 1, 2, 80.0);   // cheap equipment
    h.set_edge(1, 2, 3, 70.0);   // good equipment
    h.set_edge(2, 3, 4, 80.0);   // collect with cheap gear
    h.set_edge(3, 3, 4, 95.0);   // collect with good gear
    h.set_edge(4, 4, 1, 180.0);  // sell, keep the map
    return h;
}

// 4x3 office. A and B are the two requesters (lowercase cells are their
// second doors), K is the kitchen, M the mail room. Asking gets a mail or
// doughnut request with equal probability, encoded by the ask group jump.
inline const char* office_grid() {
    return R"(width 4
height 3
slip 0.05
default_reward -0.1
reset_cost -2
actions ask pickMailA pickDonutA dropItemA pickMailB pickDonutB dropItemB
grid
Aa.K
....
Bb.M
endgrid
start 2 1
bind A ask mrA
bind a ask drA
bind B ask mrB
bind b ask drB
bind M pickMailA hmA
bind M pickMailB hmB
bind K pickDonutA hdA
bind K pickDonutB hdB
bind A dropItemA del
bind a dropItemA del
bind B dropItemB del
bind b dropItemB del
group ask A a
group ask B b
)";
}

inline MealyRewardMachine office_truth() {
    auto h = MealyRewardMachine::self_loops(
        9, {"mrA", "drA", "mrB", "drB", "hmA", "hmB", "hdA", "hdB", "del"}, -0.1);
    h.set_edge(0, 0, 1, 1.0);  // A asks for mail
    h.set_edge(0, 2, 2, 1.0);  // B asks for mail
    h.set_edge(0, 1, 3, 1.0);  // A asks for a doughnut
    h.set_edge(0, 3, 4, 1.0);  // B asks for a doughnut
    h.set_edge(1, 4, 5, 2.0);  // picked up mail for A
    h.set_edge(2, 5, 6, 2.0);  // picked up mail for B
    h.set_edge(3, 6, 7, 2.0);  // picked up a doughnut for A
    h.set_edge(4, 7, 8, 2.0);  // picked up a doughnut for B
    h.set_edge(5, 8, 0, 4.0);  // delivered mail
    h.set_edge(6, 8, 0, 4.0);
    h.set_edge(7, 8, 0, 3.0);  // delivered a doughnut
    h.set_edge(8, 8, 0, 3.0);
    return h;
}

// 5x5 room with two a-cells and two b-cells; the pattern aaab / aabb pays
// out after it completes. Observations fire on entering a marked cell.
inline const char* cube_grid() {
    return R"(width 5
height 5
slip 0.05
default_reward 0
reset_cost -1
grid
.....
.a.b.
.....
.b.a.
.....
endgrid
start 4 4
bind a * a
bind b * b
)";
}

inline MealyRewardMachine cube_truth() {
    auto h = MealyRewardMachine::self_loops(7, {"a", "b"}, 0.0);
    h.set_edge(0, 0, 1, 0.0);
    h.set_edge(1, 0, 2, 0.0);
    h.set_edge(2, 0, 3, 0.0);
    h.set_edge(2, 1, 5, 2.0);  // aaab completed
    h.set_edge(3, 0, 4, 0.0);
    h.set_edge(4, 0, 1, 0.0);
    h.set_edge(4, 1, 6, 1.0);  // aabb halfway bonus
    h.set_edge(5, 1, 0, 0.0);
    h.set_edge(6, 1, 0, 0.0);
    return h;
}

}  // namespace detail

inline std::vector<std::string> builtin_names() { return {"treasure", "office", "cube"}; }

inline BuiltinDomain builtin(const std::string& name) {
    BuiltinDomain d;
    d.name = name;
    if (name == "treasure") {
        d.grid_text = detail::treasure_grid();
        d.truth = detail::treasure_truth();
        d.config.v_expert = 9.0;
        d.config.episode_length = 507;
        d.config.total_step_budget = 300'000;
    } else if (name == "office") {
        d.grid_text = detail::office_grid();
        d.truth = detail::office_truth();
        d.config.v_expert = 0.3;
        d.config.episode_length = 63;
        d.config.total_step_budget = 400'000;
    } else if (name == "cube") {
        d.grid_text = detail::cube_grid();
        d.truth = detail::cube_truth();
        d.config.v_expert = 0.15;
        d.config.episode_length = 75;
        d.config.total_step_budget = 150'000;
    } else {
        throw Error("unknown builtin domain: " + name);
    }
    d.grid = load_grid(d.grid_text);
    return d;
}

inline HiddenEnvironment make_environment(const BuiltinDomain& d, std::uint64_t seed) {
    auto [m, labels] = compile(d.grid);
    return HiddenEnvironment(std::move(m), std::move(labels), d.truth, d.grid.reset_cost, seed);
}

}  // namespace mrm
