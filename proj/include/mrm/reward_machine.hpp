#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mrm/mdp.hpp"
#include "mrm/types.hpp"

namespace mrm {

/// Deterministic transducer from observation words to reward words.
/// Null observations are handled implicitly: they self-loop and pay the
/// default reward, and are never stored in the tables.
struct MealyRewardMachine {
    int num_nodes = 0;
    NodeId start = 0;
    std::vector<std::string> alphabet;  // Z
    double default_reward = 0.0;        // c
    std::vector<std::vector<NodeId>> next;  // [node][symbol]
    std::vector<std::vector<Reward>> out;   // [node][symbol]

    int alphabet_size() const { return static_cast<int>(alphabet.size()); }

    /// Totally defined machine with every transition a self-loop of reward 0.
    static MealyRewardMachine self_loops(int nodes, std::vector<std::string> alphabet,
                                         double default_reward) {
        MealyRewardMachine m;
        m.num_nodes = nodes;
        m.alphabet = std::move(alphabet);
        m.default_reward = default_reward;
        m.next.resize(nodes);
        m.out.resize(nodes);
        for (int u = 0; u < nodes; ++u) {
            for (int z = 0; z < m.alphabet_size(); ++z) {
                m.next[u].push_back(u);
                m.out[u].push_back(0.0);
            }
        }
        return m;
    }

    void set_edge(NodeId from, SymbolId z, NodeId to, Reward r) {
        next.at(from).at(z) = to;
        out.at(from).at(z) = r;
    }

    std::pair<NodeId, Reward> step(NodeId u, Observation z) const {
        if (u < 0 || u >= num_nodes) throw Error("step: invalid machine node");
        if (z.is_null()) return {u, default_reward};
        if (z.symbol >= alphabet_size()) throw Error("step: unknown observation symbol");
        return {next[u][z.symbol], out[u][z.symbol]};
    }
};

inline RewardTrace run_observations(const MealyRewardMachine& m, const ObservationTrace& word) {
    RewardTrace rewards;
    rewards.reserve(word.size());
    NodeId u = m.start;
    for (SymbolId z : word) {
        auto [v, r] = m.step(u, Observation::of(z));
        rewards.push_back(r);
        u = v;
    }
    return rewards;
}

/// Rewards assigned along a history, one per step, null steps paying c.
inline RewardTrace run_history(const MealyRewardMachine& m, const InteractionTrace& history,
                               const LabelingFunction& labels) {
    RewardTrace rewards;
    rewards.reserve(history.steps.size());
    NodeId u = m.start;
    for (const auto& step : history.steps) {
        auto [v, r] = m.step(u, labels.at(step.action, step.state));
        rewards.push_back(r);
        u = v;
    }
    return rewards;
}

struct EquivalenceResult {
    std::optional<Word> counterexample;  // empty optional = equivalent
    bool equivalent() const { return !counterexample.has_value(); }
};

/// BFS over the synchronous pair graph; returns a shortest distinguishing
/// word if the machines differ on any input word.
inline EquivalenceResult check_equivalence(const MealyRewardMachine& r,
                                           const MealyRewardMachine& h) {
    if (r.alphabet != h.alphabet)
        throw AlphabetMismatch("check_equivalence: machines use different alphabets");
    if (!rewards_equal(r.default_reward, h.default_reward))
        throw AlphabetMismatch("check_equivalence: machines use different default rewards");

    int k = r.alphabet_size();
    std::map<std::pair<NodeId, NodeId>, std::pair<std::pair<NodeId, NodeId>, SymbolId>> parent;
    std::deque<std::pair<NodeId, NodeId>> queue;
    auto origin = std::make_pair(r.start, h.start);
    parent[origin] = {origin, -1};
    queue.push_back(origin);

    auto word_to = [&](std::pair<NodeId, NodeId> pair, SymbolId last) {
        Word w{last};
        while (pair != origin) {
            auto [prev, z] = parent.at(pair);
            w.push_back(z);
            pair = prev;
        }
        std::reverse(w.begin(), w.end());
        return w;
    };

    while (!queue.empty()) {
        auto [ur, uh] = queue.front();
        queue.pop_front();
        for (SymbolId z = 0; z < k; ++z) {
            if (!rewards_equal(r.out[ur][z], h.out[uh][z]))
                return {word_to({ur, uh}, z)};
            auto succ = std::make_pair(r.next[ur][z], h.next[uh][z]);
            if (!parent.contains(succ)) {
                parent[succ] = {{ur, uh}, z};
                queue.push_back(succ);
            }
        }
    }
    return {std::nullopt};
}

// -- serialization ----------------------------------------------------------

inline nlohmann::json to_json(const MealyRewardMachine& m) {
    nlohmann::json edges = nlohmann::json::array();
    for (NodeId u = 0; u < m.num_nodes; ++u) {
        for (SymbolId z = 0; z < m.alphabet_size(); ++z) {
            edges.push_back({{"from", u},
                             {"input", m.alphabet[z]},
                             {"to", m.next[u][z]},
                             {"reward", m.out[u][z]}});
        }
    }
    return {{"nodes", m.num_nodes},
            {"start", m.start},
            {"alphabet", m.alphabet},
            {"default_reward", m.default_reward},
            {"edges", edges}};
}

/// Pairs absent from "edges" are completed as self-loops with reward 0,
/// so zero-reward self-loops can be left implicit.
inline MealyRewardMachine machine_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("machine JSON: ") + e.what());
    }
    try {
        auto m = MealyRewardMachine::self_loops(
            j.at("nodes").get<int>(), j.at("alphabet").get<std::vector<std::string>>(),
            j.at("default_reward").get<double>());
        m.start = j.at("start").get<NodeId>();
        if (m.start < 0 || m.start >= m.num_nodes)
            throw ParseError("machine JSON: start node out of range");
        std::set<std::pair<NodeId, SymbolId>> seen;
        for (const auto& e : j.at("edges")) {
            NodeId from = e.at("from").get<NodeId>();
            NodeId to = e.at("to").get<NodeId>();
            std::string input = e.at("input").get<std::string>();
            SymbolId z = -1;
            for (size_t i = 0; i < m.alphabet.size(); ++i)
                if (m.alphabet[i] == input) z = static_cast<SymbolId>(i);
            if (z < 0) throw ParseError("machine JSON: edge input not in alphabet: " + input);
            if (from < 0 || from >= m.num_nodes || to < 0 || to >= m.num_nodes)
                throw ParseError("machine JSON: edge endpoint out of range");
            if (!seen.insert({from, z}).second)
                throw ParseError("machine JSON: duplicate edge for (" +
                                 std::to_string(from) + "," + input + ")");
            m.set_edge(from, z, to, e.at("reward").get<double>());
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("machine JSON: ") + e.what());
    }
}

inline std::string to_dot(const MealyRewardMachine& m) {
    std::ostringstream os;
    os << "digraph mrm {\n  rankdir=LR;\n";
    os << "  init [shape=point];\n  init -> " << m.start << ";\n";
    for (NodeId u = 0; u < m.num_nodes; ++u) os << "  " << u << " [shape=circle];\n";
    for (NodeId u = 0; u < m.num_nodes; ++u) {
        for (SymbolId z = 0; z < m.alphabet_size(); ++z) {
            os << "  " << u << " -> " << m.next[u][z] << " [label=\"" << m.alphabet[z]
               << "|" << m.out[u][z] << "\"];\n";
        }
    }
    os << "}\n";
    return os.str();
}

}  // namespace mrm
