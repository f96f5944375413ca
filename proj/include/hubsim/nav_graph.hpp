#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hubsim/geometry.hpp"
#include "hubsim/site.hpp"

namespace hubsim {

enum class NavMode { walk, road, tram };

std::string_view to_string(NavMode m);

using NodeId = int;

struct NavNode {
    NodeId id = 0;
    LevelId level = 0;
    Vec2 pos;
};

struct NavEdge {
    NodeId from = 0;
    NodeId to = 0;
    double length = 0.0;
    // Integer micrometers; all path arithmetic runs on this.
    std::int64_t weight = 0;
    // Set when traversal requires the named connector to be operational.
    std::string connector_id;
};

class NavGraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NavGraph {
public:
    static constexpr double kGridPitch = 0.5;

    explicit NavGraph(NavMode mode = NavMode::walk) : mode_(mode) {}

    NodeId add_node(LevelId level, Vec2 pos);
    // Rejects zero-length edges.
    void add_edge(NodeId from, NodeId to, double length, std::string connector_id = {});
    void add_undirected_edge(NodeId a, NodeId b, double length, std::string connector_id = {});

    NavMode mode() const { return mode_; }
    const std::vector<NavNode>& nodes() const { return nodes_; }
    const std::vector<NavEdge>& edges() const { return edges_; }
    const std::vector<int>& out_edges(NodeId n) const { return out_[static_cast<std::size_t>(n)]; }
    const std::vector<int>& in_edges(NodeId n) const { return in_[static_cast<std::size_t>(n)]; }
    std::size_t size() const { return nodes_.size(); }
    const NavNode& node(NodeId n) const { return nodes_[static_cast<std::size_t>(n)]; }

    std::string built_from;

    // Walk-mode grid index. Cell (i, j) has its centre at ((i + 0.5) * pitch, (j + 0.5) * pitch).
    int grid_cols() const { return cols_; }
    int grid_rows() const { return rows_; }
    std::optional<NodeId> node_at_cell(LevelId level, int i, int j) const;
    std::optional<NodeId> node_at(LevelId level, Vec2 p) const;
    // Nearest node on the level (ties to the smaller id).
    std::optional<NodeId> nearest_node(LevelId level, Vec2 p) const;
    // Crossing feature id containing the node, empty if none.
    const std::string& crossing_of(NodeId n) const;

    // Road / tram lookups.
    const std::vector<NodeId>& path_nodes(const std::string& feature_id) const;
    std::optional<NodeId> stop_node(const std::string& stop_id) const;

private:
    friend NavGraph build_nav_graph(const SiteMap&, NavMode);

    NavMode mode_;
    std::vector<NavNode> nodes_;
    std::vector<NavEdge> edges_;
    std::vector<std::vector<int>> out_;
    std::vector<std::vector<int>> in_;

    int cols_ = 0;
    int rows_ = 0;
    std::map<LevelId, std::vector<NodeId>> cells_;
    std::vector<int> node_crossing_;
    std::vector<std::string> crossing_ids_;

    std::map<std::string, std::vector<NodeId>> feature_nodes_;
    std::map<std::string, NodeId> stop_nodes_;
};

/// Builds the navigation graph for one travel mode. Throws NavGraphError when
/// the site has no features supporting the mode.
NavGraph build_nav_graph(const SiteMap& site, NavMode mode);

struct Path {
    std::vector<NodeId> nodes;
    std::int64_t weight = 0;
    double length() const { return static_cast<double>(weight) * 1e-6; }
};

inline constexpr std::int64_t kUnreachable = std::numeric_limits<std::int64_t>::max();

// Shortest distance from every node to one target node.
struct DistanceField {
    NodeId target = 0;
    std::set<std::string> excluded;
    std::vector<std::int64_t> dist;

    bool reaches(NodeId n) const { return dist[static_cast<std::size_t>(n)] != kUnreachable; }
};

DistanceField distance_field(const NavGraph& graph, NodeId to, const std::set<std::string>& exclude);

/// Walks a distance field from `from`, always taking the smallest-id successor
/// that stays on a shortest route; this yields the lexicographically smallest
/// node sequence among all minimum-length paths.
std::optional<Path> extract_path(const NavGraph& graph, const DistanceField& field, NodeId from);

std::optional<Path> shortest_path(const NavGraph& graph, NodeId from, NodeId to,
                                  const std::set<std::string>& exclude = {});

}  // namespace hubsim
