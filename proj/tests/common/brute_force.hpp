#pragma once

#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hubsim/nav_graph.hpp"

namespace testing {

struct BrutePath {
    std::int64_t weight = hubsim::kUnreachable;
    std::vector<hubsim::NodeId> nodes;
};

// Enumerates simple paths (pruning strictly heavier prefixes); keeps the lightest, then the lexicographically smallest.
inline BrutePath brute_force_path(const hubsim::NavGraph& g, hubsim::NodeId from, hubsim::NodeId to, const std::set<std::string>& exclude) {
    BrutePath best;
    std::vector<hubsim::NodeId> path{from};
    std::vector<bool> used(g.size(), false);
    used[static_cast<std::size_t>(from)] = true;
    std::function<void(hubsim::NodeId, std::int64_t)> dfs = [&](hubsim::NodeId n, std::int64_t w) {
        // Bound only on strictly heavier prefixes so every tying path is still compared.
        if (w > best.weight) return;
        if (n == to) {
            if (w < best.weight || (w == best.weight && path < best.nodes)) best = {w, path};
            return;
        }
        for (int ei : g.out_edges(n)) {
            const auto& e = g.edges()[static_cast<std::size_t>(ei)];
            if (!e.connector_id.empty() && exclude.contains(e.connector_id)) continue;
            if (used[static_cast<std::size_t>(e.to)]) continue;
            used[static_cast<std::size_t>(e.to)] = true;
            path.push_back(e.to);
            dfs(e.to, w + e.weight);
            path.pop_back();
            used[static_cast<std::size_t>(e.to)] = false;
        }
    };
    dfs(from, 0);
    return best;
}

// Random directed graph with 2..12 nodes and integer-millimetre edge lengths drawn from a narrow range to force ties.
// Roughly one edge in ten belongs to connector "C".
inline hubsim::NavGraph random_graph(std::mt19937_64& gen) {
    hubsim::NavGraph g;
    const int n = std::uniform_int_distribution<int>(2, 12)(gen);
    for (int i = 0; i < n; ++i) g.add_node(0, {static_cast<double>(i), 0.0});
    const double density = std::uniform_real_distribution<double>(0.15, 0.45)(gen);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            if (a == b || std::uniform_real_distribution<double>(0, 1)(gen) > density) continue;
            const double mm = static_cast<double>(std::uniform_int_distribution<int>(1, 4)(gen) * 500);
            const std::string connector = std::uniform_int_distribution<int>(0, 9)(gen) == 0 ? "C" : "";
            g.add_edge(a, b, mm / 1000.0, connector);
        }
    }
    return g;
}

// Compares shortest_path with brute force for every node pair; returns the number of mismatches.
inline int compare_with_brute_force(const hubsim::NavGraph& g, const std::set<std::string>& exclude) {
    int mismatches = 0;
    const auto n = static_cast<hubsim::NodeId>(g.size());
    for (hubsim::NodeId from = 0; from < n; ++from) {
        for (hubsim::NodeId to = 0; to < n; ++to) {
            const auto got = hubsim::shortest_path(g, from, to, exclude);
            const auto want = brute_force_path(g, from, to, exclude);
            if (want.weight == hubsim::kUnreachable) {
                if (got) ++mismatches;
            } else if (!got || got->weight != want.weight || got->nodes != want.nodes) {
                ++mismatches;
            }
        }
    }
    return mismatches;
}

}  // namespace testing
