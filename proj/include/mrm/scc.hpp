#pragma once

#include <algorithm>

#include "mrm/model.hpp"
#include "mrm/types.hpp"

namespace mrm {

/// Tarjan's algorithm, iterative to keep large chains off the call stack.
/// Components are returned in reverse topological order (sinks first).
inline std::vector<std::vector<int>> strongly_connected_components(
    const std::vector<std::vector<int>>& adj) {
    int n = static_cast<int>(adj.size());
    std::vector<int> index(n, -1), lowlink(n, 0), on_stack(n, 0);
    std::vector<int> stack;
    std::vector<std::vector<int>> components;
    int counter = 0;

    struct Frame {
        int v;
        size_t edge;
    };
    std::vector<Frame> call;

    for (int root = 0; root < n; ++root) {
        if (index[root] != -1) continue;
        call.push_back({root, 0});
        while (!call.empty()) {
            auto& [v, edge] = call.back();
            if (edge == 0) {
                index[v] = lowlink[v] = counter++;
                stack.push_back(v);
                on_stack[v] = 1;
            }
            bool descended = false;
            while (edge < adj[v].size()) {
                int w = adj[v][edge++];
                if (index[w] == -1) {
                    call.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (on_stack[w]) lowlink[v] = std::min(lowlink[v], index[w]);
            }
            if (descended) continue;
            if (lowlink[v] == index[v]) {
                std::vector<int> comp;
                int w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp.push_back(w);
                } while (w != v);
                std::sort(comp.begin(), comp.end());
                components.push_back(std::move(comp));
            }
            int finished = v;
            call.pop_back();
            if (!call.empty())
                lowlink[call.back().v] = std::min(lowlink[call.back().v], lowlink[finished]);
        }
    }
    return components;
}

inline std::vector<std::vector<int>> adjacency(const MarkovChain& chain) {
    std::vector<std::vector<int>> adj(chain.num_states());
    for (int s = 0; s < chain.num_states(); ++s)
        for (auto [t, p] : chain.rows[s])
            if (p > 0.0) adj[s].push_back(t);
    return adj;
}

/// Positive-probability edges over all actions.
inline std::vector<std::vector<int>> adjacency(const MdpModel& m) {
    std::vector<std::vector<int>> adj(m.num_states);
    for (int s = 0; s < m.num_states; ++s) {
        std::vector<int>& row = adj[s];
        for (int a = 0; a < m.num_actions; ++a)
            for (auto [t, p] : m.trans[s][a])
                if (p > 0.0) row.push_back(t);
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
    }
    return adj;
}

inline bool is_strongly_connected(const std::vector<std::vector<int>>& adj) {
    if (adj.empty()) return true;
    return strongly_connected_components(adj).size() == 1;
}

inline bool is_strongly_connected(const MdpModel& m) { return is_strongly_connected(adjacency(m)); }
inline bool is_strongly_connected(const MarkovChain& c) { return is_strongly_connected(adjacency(c)); }

/// Bottom SCCs of a Markov chain: components with no edge leaving them.
inline std::vector<std::vector<int>> bsccs(const MarkovChain& chain) {
    auto adj = adjacency(chain);
    auto comps = strongly_connected_components(adj);
    std::vector<int> comp_of(chain.num_states(), -1);
    for (size_t c = 0; c < comps.size(); ++c)
        for (int s : comps[c]) comp_of[s] = static_cast<int>(c);

    std::vector<std::vector<int>> bottoms;
    for (size_t c = 0; c < comps.size(); ++c) {
        bool bottom = true;
        for (int s : comps[c])
            for (int t : adj[s])
                if (comp_of[t] != static_cast<int>(c)) bottom = false;
        if (bottom) bottoms.push_back(comps[c]);
    }
    return bottoms;
}

}  // namespace mrm
