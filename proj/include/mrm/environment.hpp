#pragma once

#include <random>
#include <sstream>

#include "mrm/mdp.hpp"
#include "mrm/model.hpp"
#include "mrm/reward_machine.hpp"
#include "mrm/types.hpp"

namespace mrm {

struct EnvOutcome {
    StateId state;
    Reward reward;
};

/// Text grid world. One character per cell: '#' wall, '.' blank, letters
/// are item symbols. Bindings attach observations to (item, action) pairs;
/// groups make an action jump uniformly between the cells of the group
/// (used for stochastic answers).
struct GridSpec {
    int width = 0;
    int height = 0;
    std::vector<std::string> cells;  // height rows of width chars
    double slip = 0.05;
    double default_reward = 0.0;
    double reset_cost = 0.0;
    std::vector<std::string> extra_actions;  // beyond the four moves
    std::vector<std::pair<int, int>> starts;  // (x, y)

    struct Binding {
        char cell;
        std::string action;  // "*" = every action
        std::string observation;
    };
    std::vector<Binding> bindings;

    struct Group {
        std::string action;
        std::string cell_chars;
    };
    std::vector<Group> groups;

    char at(int x, int y) const { return cells.at(y).at(x); }
    bool wall(int x, int y) const { return at(x, y) == '#'; }
};

inline GridSpec load_grid(const std::string& text) {
    GridSpec spec;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool in_grid = false;
    auto fail = [&](const std::string& msg) {
        throw ParseError("grid line " + std::to_string(lineno) + ": " + msg);
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (in_grid) {
            if (line == "endgrid") {
                in_grid = false;
                if (static_cast<int>(spec.cells.size()) != spec.height)
                    fail("grid block has wrong number of rows");
                continue;
            }
            if (static_cast<int>(line.size()) != spec.width) fail("grid row has wrong width");
            spec.cells.push_back(line);
            continue;
        }
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "width") {
            ls >> spec.width;
        } else if (key == "height") {
            ls >> spec.height;
        } else if (key == "slip") {
            ls >> spec.slip;
        } else if (key == "default_reward") {
            ls >> spec.default_reward;
        } else if (key == "reset_cost") {
            ls >> spec.reset_cost;
        } else if (key == "actions") {
            std::string a;
            while (ls >> a) spec.extra_actions.push_back(a);
            ls.clear();
        } else if (key == "grid") {
            if (spec.width <= 0 || spec.height <= 0) fail("grid before width/height");
            in_grid = true;
        } else if (key == "start") {
            int x = -1, y = -1;
            ls >> x >> y;
            spec.starts.emplace_back(x, y);
        } else if (key == "bind") {
            std::string cell, action, obs;
            ls >> cell >> action >> obs;
            if (cell.size() != 1 || action.empty() || obs.empty()) fail("malformed bind");
            spec.bindings.push_back({cell[0], action, obs});
        } else if (key == "group") {
            std::string action, chars, c;
            ls >> action;
            while (ls >> c) {
                if (c.size() != 1) fail("group cells must be single characters");
                chars += c;
            }
            if (action.empty() || chars.size() < 2) fail("malformed group");
            spec.groups.push_back({action, chars});
            ls.clear();
        } else {
            fail("unknown directive: " + key);
        }
        if (ls.fail()) fail("malformed value for " + key);
    }
    if (in_grid) throw ParseError("grid: missing endgrid");
    if (spec.cells.empty()) throw ParseError("grid: no grid block");
    if (spec.starts.empty()) throw ParseError("grid: no start cell");
    if (spec.slip < 0.0 || spec.slip >= 1.0) throw ParseError("grid: slip outside [0,1)");
    for (auto [x, y] : spec.starts) {
        if (x < 0 || x >= spec.width || y < 0 || y >= spec.height)
            throw ParseError("grid: start cell out of range");
        if (spec.wall(x, y)) throw ParseError("grid: start cell is a wall");
    }
    return spec;
}

/// One MDP state per non-wall cell; multiple start cells are funneled
/// through an auxiliary initial state with a uniform start transition on
/// every action.
inline std::pair<Nrmdp, LabelingFunction> compile(const GridSpec& spec,
                                                  std::vector<std::string>* warnings = nullptr) {
    Nrmdp m;
    std::vector<std::vector<int>> cell_state(spec.height, std::vector<int>(spec.width, -1));
    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            if (spec.wall(x, y)) continue;
            cell_state[y][x] = m.num_states++;
            m.state_names.push_back(std::to_string(x) + "," + std::to_string(y));
        }
    }

    std::vector<int> start_states;
    for (auto [x, y] : spec.starts) {
        int s = cell_state[y][x];
        if (std::find(start_states.begin(), start_states.end(), s) == start_states.end())
            start_states.push_back(s);
    }
    std::sort(start_states.begin(), start_states.end());
    bool multi_start = start_states.size() > 1;
    int aux = -1;
    if (multi_start) {
        aux = m.num_states++;
        m.state_names.push_back("start");
        m.initial_state = aux;
    } else {
        m.initial_state = start_states.front();
    }

    m.action_names = {"north", "east", "south", "west"};
    for (const auto& a : spec.extra_actions) m.action_names.push_back(a);
    m.num_actions = static_cast<int>(m.action_names.size());

    auto group_for = [&](const std::string& action, char cell) -> const GridSpec::Group* {
        for (const auto& g : spec.groups)
            if (g.action == action && g.cell_chars.find(cell) != std::string::npos) return &g;
        return nullptr;
    };

    constexpr int dx[4] = {0, 1, 0, -1};
    constexpr int dy[4] = {-1, 0, 1, 0};
    m.transitions.assign(m.num_states, std::vector<SparseRow>(m.num_actions));
    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            int s = cell_state[y][x];
            if (s < 0) continue;
            for (int a = 0; a < m.num_actions; ++a) {
                SparseRow row;
                if (a < 4) {
                    int nx = x + dx[a], ny = y + dy[a];
                    int target = s;
                    if (nx >= 0 && nx < spec.width && ny >= 0 && ny < spec.height &&
                        !spec.wall(nx, ny))
                        target = cell_state[ny][nx];
                    row = {{target, 1.0 - spec.slip}, {s, spec.slip}};
                } else if (const auto* g = group_for(m.action_names[a], spec.at(x, y))) {
                    double share = (1.0 - spec.slip) / static_cast<double>(g->cell_chars.size());
                    for (char c : g->cell_chars) {
                        bool found = false;
                        for (int yy = 0; yy < spec.height && !found; ++yy)
                            for (int xx = 0; xx < spec.width && !found; ++xx)
                                if (spec.at(xx, yy) == c) {
                                    row.emplace_back(cell_state[yy][xx], share);
                                    found = true;
                                }
                        if (!found)
                            throw ParseError(std::string("group cell '") + c +
                                             "' does not appear in the grid");
                    }
                    row.emplace_back(s, spec.slip);
                } else {
                    row = {{s, 1.0}};
                }
                m.transitions[s][a] = normalize_row(row);
            }
        }
    }
    if (multi_start) {
        double share = 1.0 / static_cast<double>(start_states.size());
        SparseRow row;
        for (int s : start_states) row.emplace_back(s, share);
        for (int a = 0; a < m.num_actions; ++a) m.transitions[aux][a] = row;
    }

    LabelingFunction labels;
    for (const auto& b : spec.bindings) {
        if (std::find(labels.observation_alphabet.begin(), labels.observation_alphabet.end(),
                      b.observation) == labels.observation_alphabet.end())
            labels.observation_alphabet.push_back(b.observation);
    }
    labels.table.assign(m.num_actions, std::vector<SymbolId>(m.num_states, -1));
    for (const auto& b : spec.bindings) {
        std::vector<int> actions;
        if (b.action == "*") {
            for (int a = 0; a < m.num_actions; ++a) actions.push_back(a);
        } else {
            auto it = std::find(m.action_names.begin(), m.action_names.end(), b.action);
            if (it == m.action_names.end())
                throw ParseError("bind references unknown action: " + b.action);
            actions.push_back(static_cast<int>(it - m.action_names.begin()));
        }
        SymbolId z = labels.symbol_index(b.observation);
        bool bound_somewhere = false;
        for (int y = 0; y < spec.height; ++y) {
            for (int x = 0; x < spec.width; ++x) {
                if (spec.at(x, y) != b.cell) continue;
                int s = cell_state[y][x];
                for (int a : actions) {
                    if (labels.table[a][s] >= 0 && labels.table[a][s] != z)
                        throw ParseError(std::string("conflicting bindings for cell '") +
                                         b.cell + "' and action " + m.action_names[a]);
                    labels.table[a][s] = z;
                    bound_somewhere = true;
                }
            }
        }
        if (!bound_somewhere && warnings)
            warnings->push_back(std::string("binding for '") + b.cell +
                                "' matches no grid cell");
    }
    if (warnings) {
        std::vector<char> seen(labels.observation_alphabet.size(), 0);
        for (const auto& col : labels.table)
            for (SymbolId z : col)
                if (z >= 0) seen[z] = 1;
        for (size_t z = 0; z < seen.size(); ++z)
            if (!seen[z])
                warnings->push_back("observation '" + labels.observation_alphabet[z] +
                                    "' is never produced");
    }
    return {m, labels};
}

/// Simulated environment with a hidden ground-truth reward machine. The
/// agent-facing surface is reset/step returning (state, reward); the truth
/// machine is reachable only for test harnesses.
class HiddenEnvironment {
public:
    HiddenEnvironment(Nrmdp model, LabelingFunction labels, MealyRewardMachine truth,
                      double reset_cost, std::uint64_t seed)
        : model_(std::move(model)),
          labels_(std::move(labels)),
          truth_(std::move(truth)),
          reset_cost_(reset_cost),
          rng_(seed),
          state_(model_.initial_state),
          node_(truth_.start) {
        if (labels_.observation_alphabet != truth_.alphabet)
            throw AlphabetMismatch("environment: truth machine alphabet differs from labels");
    }

    EnvOutcome reset() {
        state_ = model_.initial_state;
        node_ = truth_.start;
        ++steps_;
        total_reward_ += reset_cost_;
        return {state_, reset_cost_};
    }

    EnvOutcome step(ActionId a) {
        StateId next = sample_transition(model_, state_, a, rng_);
        auto [node, reward] = truth_.step(node_, labels_.at(a, next));
        state_ = next;
        node_ = node;
        ++steps_;
        total_reward_ += reward;
        return {state_, reward};
    }

    StateId state() const { return state_; }
    long total_steps() const { return steps_; }
    double total_reward() const { return total_reward_; }
    double reset_cost() const { return reset_cost_; }
    double default_reward() const { return truth_.default_reward; }

    const Nrmdp& model() const { return model_; }
    const LabelingFunction& labels() const { return labels_; }

    /// Test harnesses only; the learning agent must not look at this.
    const MealyRewardMachine& truth_machine() const { return truth_; }

private:
    Nrmdp model_;
    LabelingFunction labels_;
    MealyRewardMachine truth_;
    double reset_cost_;
    std::mt19937_64 rng_;
    StateId state_;
    NodeId node_;
    long steps_ = 0;
    double total_reward_ = 0.0;
};

}  // namespace mrm
