#include "hubsim/nav_graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>

namespace hubsim {

namespace {

std::int64_t to_weight(double length) { return static_cast<std::int64_t>(std::llround(length * 1e6)); }

struct AreaIndex {
    const Feature* feature;
    Rect box;
};

std::vector<AreaIndex> areas_of(const SiteMap& site, LevelId level, std::initializer_list<FeatureKind> kinds) {
    std::vector<AreaIndex> out;
    for (const Feature& f : site.features) {
        if (f.level != level) continue;
        if (std::find(kinds.begin(), kinds.end(), f.kind) == kinds.end()) continue;
        out.push_back({&f, bounding_box(f.geometry)});
    }
    return out;
}

const Feature* hit(const std::vector<AreaIndex>& areas, Vec2 p) {
    for (const auto& a : areas) {
        if (a.box.contains(p) && point_in_polygon(p, a.feature->geometry)) return a.feature;
    }
    return nullptr;
}

void build_walk(NavGraph& g, const SiteMap& site, int cols, int rows, std::map<LevelId, std::vector<NodeId>>& cells,
                std::vector<int>& node_crossing, std::vector<std::string>& crossing_ids) {
    const double pitch = NavGraph::kGridPitch;
    for (LevelId level : site.levels) {
        const auto walk = areas_of(site, level, {FeatureKind::walk_surface, FeatureKind::crossing});
        const auto blocked = areas_of(site, level, {FeatureKind::obstacle});
        if (walk.empty()) continue;
        auto& grid = cells[level];
        grid.assign(static_cast<std::size_t>(cols) * static_cast<std::size_t>(rows), -1);
        for (int j = 0; j < rows; ++j) {
            for (int i = 0; i < cols; ++i) {
                const Vec2 p{(i + 0.5) * pitch, (j + 0.5) * pitch};
                const Feature* area = hit(walk, p);
                if (!area || hit(blocked, p)) continue;
                // Prefer the crossing tag when a cell centre sits on a shared border.
                const Feature* crossing = nullptr;
                for (const auto& a : walk) {
                    if (a.feature->kind == FeatureKind::crossing && a.box.contains(p) &&
                        point_in_polygon(p, a.feature->geometry)) {
                        crossing = a.feature;
                        break;
                    }
                }
                const NodeId n = g.add_node(level, p);
                grid[static_cast<std::size_t>(j) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(i)] = n;
                int tag = -1;
                if (crossing) {
                    auto it = std::find(crossing_ids.begin(), crossing_ids.end(), crossing->id);
                    if (it == crossing_ids.end()) {
                        crossing_ids.push_back(crossing->id);
                        tag = static_cast<int>(crossing_ids.size()) - 1;
                    } else {
                        tag = static_cast<int>(it - crossing_ids.begin());
                    }
                }
                node_crossing.push_back(tag);
            }
        }
        auto at = [&](int i, int j) -> NodeId {
            if (i < 0 || j < 0 || i >= cols || j >= rows) return -1;
            return grid[static_cast<std::size_t>(j) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(i)];
        };
        // Each undirected edge is emitted once, from its lower-left end.
        for (int j = 0; j < rows; ++j) {
            for (int i = 0; i < cols; ++i) {
                const NodeId n = at(i, j);
                if (n < 0) continue;
                if (const NodeId e = at(i + 1, j); e >= 0) g.add_undirected_edge(n, e, pitch);
                if (const NodeId u = at(i, j + 1); u >= 0) g.add_undirected_edge(n, u, pitch);
                const double diag = std::sqrt(2.0) * pitch;
                if (const NodeId ne = at(i + 1, j + 1); ne >= 0 && at(i + 1, j) >= 0 && at(i, j + 1) >= 0) {
                    g.add_undirected_edge(n, ne, diag);
                }
                if (const NodeId nw = at(i - 1, j + 1); nw >= 0 && at(i - 1, j) >= 0 && at(i, j + 1) >= 0) {
                    g.add_undirected_edge(n, nw, diag);
                }
            }
        }
    }
}

}  // namespace

std::string_view to_string(NavMode m) {
    switch (m) {
    case NavMode::walk: return "walk";
    case NavMode::road: return "road";
    case NavMode::tram: return "tram";
    }
    return "?";
}

NodeId NavGraph::add_node(LevelId level, Vec2 pos) {
    const auto id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back({id, level, pos});
    out_.emplace_back();
    in_.emplace_back();
    return id;
}

void NavGraph::add_edge(NodeId from, NodeId to, double length, std::string connector_id) {
    if (from < 0 || to < 0 || static_cast<std::size_t>(from) >= nodes_.size() || static_cast<std::size_t>(to) >= nodes_.size()) {
        throw NavGraphError("edge endpoint out of range");
    }
    const std::int64_t w = to_weight(length);
    if (w <= 0) throw NavGraphError("zero-length edge");
    const auto idx = static_cast<int>(edges_.size());
    edges_.push_back({from, to, length, w, std::move(connector_id)});
    out_[static_cast<std::size_t>(from)].push_back(idx);
    in_[static_cast<std::size_t>(to)].push_back(idx);
}

void NavGraph::add_undirected_edge(NodeId a, NodeId b, double length, std::string connector_id) {
    add_edge(a, b, length, connector_id);
    add_edge(b, a, length, std::move(connector_id));
}

std::optional<NodeId> NavGraph::node_at_cell(LevelId level, int i, int j) const {
    auto it = cells_.find(level);
    if (it == cells_.end() || i < 0 || j < 0 || i >= cols_ || j >= rows_) return std::nullopt;
    const NodeId n = it->second[static_cast<std::size_t>(j) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(i)];
    if (n < 0) return std::nullopt;
    return n;
}

std::optional<NodeId> NavGraph::node_at(LevelId level, Vec2 p) const {
    return node_at_cell(level, static_cast<int>(std::floor(p.x / kGridPitch)), static_cast<int>(std::floor(p.y / kGridPitch)));
}

std::optional<NodeId> NavGraph::nearest_node(LevelId level, Vec2 p) const {
    if (mode_ == NavMode::walk && cells_.contains(level)) {
        const int ci = static_cast<int>(std::floor(p.x / kGridPitch));
        const int cj = static_cast<int>(std::floor(p.y / kGridPitch));
        std::optional<NodeId> best;
        double best_d = std::numeric_limits<double>::infinity();
        const int max_r = std::max(cols_, rows_);
        for (int r = 0; r <= max_r; ++r) {
            // Any cell at ring r is at least (r - 1) pitches away.
            if (best && (r - 1) * kGridPitch > best_d) break;
            for (int j = cj - r; j <= cj + r; ++j) {
                for (int i = ci - r; i <= ci + r; ++i) {
                    if (std::max(std::abs(i - ci), std::abs(j - cj)) != r) continue;
                    const auto n = node_at_cell(level, i, j);
                    if (!n) continue;
                    const double d = distance(node(*n).pos, p);
                    if (d < best_d || (d == best_d && *n < *best)) {
                        best_d = d;
                        best = n;
                    }
                }
            }
        }
        return best;
    }
    std::optional<NodeId> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (const NavNode& n : nodes_) {
        if (n.level != level) continue;
        const double d = distance(n.pos, p);
        if (d < best_d) {
            best_d = d;
            best = n.id;
        }
    }
    return best;
}

const std::string& NavGraph::crossing_of(NodeId n) const {
    static const std::string none;
    if (static_cast<std::size_t>(n) >= node_crossing_.size()) return none;
    const int tag = node_crossing_[static_cast<std::size_t>(n)];
    return tag < 0 ? none : crossing_ids_[static_cast<std::size_t>(tag)];
}

const std::vector<NodeId>& NavGraph::path_nodes(const std::string& feature_id) const {
    static const std::vector<NodeId> none;
    auto it = feature_nodes_.find(feature_id);
    return it == feature_nodes_.end() ? none : it->second;
}

std::optional<NodeId> NavGraph::stop_node(const std::string& stop_id) const {
    auto it = stop_nodes_.find(stop_id);
    if (it == stop_nodes_.end()) return std::nullopt;
    return it->second;
}

NavGraph build_nav_graph(const SiteMap& site, NavMode mode) {
    NavGraph g(mode);
    g.built_from = site_digest(site);

    if (mode == NavMode::walk) {
        g.cols_ = static_cast<int>(std::ceil(site.width / NavGraph::kGridPitch));
        g.rows_ = static_cast<int>(std::ceil(site.height / NavGraph::kGridPitch));
        build_walk(g, site, g.cols_, g.rows_, g.cells_, g.node_crossing_, g.crossing_ids_);
        if (g.size() == 0) throw NavGraphError("site has no walkable area");
        for (const Feature* c : site.of_kind(FeatureKind::connector)) {
            const auto info = connector_info(*c);
            const auto a = g.nearest_node(info.level_a, info.anchors.at(info.level_a));
            const auto b = g.nearest_node(info.level_b, info.anchors.at(info.level_b));
            if (a && b) g.add_undirected_edge(*a, *b, info.traversal_length(), c->id);
        }
        return g;
    }

    const FeatureKind kind = mode == NavMode::road ? FeatureKind::road_lane : FeatureKind::tram_track;
    const auto paths = site.of_kind(kind);
    if (paths.empty()) throw NavGraphError(std::string("site has no features for mode ") + std::string(to_string(mode)));

    for (const Feature* f : paths) {
        const ArcPath arc(f->geometry);
        // (arc length, stop id or empty) in travel order.
        std::vector<std::pair<double, std::string>> marks;
        for (std::size_t i = 0; i < f->geometry.size(); ++i) marks.emplace_back(arc.cumulative()[i], std::string{});
        if (mode == NavMode::tram) {
            for (const Feature* stop : site.of_kind(FeatureKind::stop)) {
                if (stop->level != f->level || !polyline_intersects_polygon(f->geometry, stop->geometry)) continue;
                marks.emplace_back(arc.project(centroid(stop->geometry)), stop->id);
            }
            std::stable_sort(marks.begin(), marks.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        }
        std::vector<NodeId> ids;
        double last_s = -1.0;
        for (const auto& [s, stop_id] : marks) {
            if (!ids.empty() && to_weight(s - last_s) <= 0) {
                if (!stop_id.empty()) g.stop_nodes_[stop_id] = ids.back();
                continue;
            }
            const NodeId n = g.add_node(f->level, arc.point_at(s));
            if (!ids.empty()) g.add_edge(ids.back(), n, distance(g.node(ids.back()).pos, g.node(n).pos));
            ids.push_back(n);
            last_s = s;
            if (!stop_id.empty()) g.stop_nodes_[stop_id] = n;
        }
        g.feature_nodes_[f->id] = std::move(ids);
    }

    if (mode == NavMode::road) {
        for (const Feature* f : paths) {
            const auto adj = f->prop_string("adjacent_lane_id");
            if (adj.empty()) continue;
            const Feature* other = site.find(adj);
            const ArcPath from_arc(f->geometry);
            const ArcPath to_arc(other->geometry);
            const auto& from_nodes = g.feature_nodes_[f->id];
            const auto& to_nodes = g.feature_nodes_[adj];
            // Lane-change edges in both directions, matched by arc length.
            auto link = [&](const ArcPath& a, const std::vector<NodeId>& an, const ArcPath& b, const std::vector<NodeId>& bn) {
                for (std::size_t i = 0; i < an.size(); ++i) {
                    const double s = a.cumulative()[i];
                    std::size_t best = 0;
                    for (std::size_t k = 1; k < bn.size(); ++k) {
                        if (std::abs(b.cumulative()[k] - s) < std::abs(b.cumulative()[best] - s)) best = k;
                    }
                    const double len = distance(g.node(an[i]).pos, g.node(bn[best]).pos);
                    if (to_weight(len) > 0) g.add_edge(an[i], bn[best], len);
                }
            };
            link(from_arc, from_nodes, to_arc, to_nodes);
            if (other->prop_string("adjacent_lane_id") != f->id) link(to_arc, to_nodes, from_arc, from_nodes);
        }
    }
    return g;
}

DistanceField distance_field(const NavGraph& graph, NodeId to, const std::set<std::string>& exclude) {
    DistanceField field;
    field.target = to;
    field.excluded = exclude;
    field.dist.assign(graph.size(), kUnreachable);
    using Item = std::pair<std::int64_t, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    field.dist[static_cast<std::size_t>(to)] = 0;
    queue.emplace(0, to);
    while (!queue.empty()) {
        const auto [d, n] = queue.top();
        queue.pop();
        if (d != field.dist[static_cast<std::size_t>(n)]) continue;
        for (int ei : graph.in_edges(n)) {
            const NavEdge& e = graph.edges()[static_cast<std::size_t>(ei)];
            if (!e.connector_id.empty() && exclude.contains(e.connector_id)) continue;
            const std::int64_t nd = d + e.weight;
            auto& slot = field.dist[static_cast<std::size_t>(e.from)];
            if (nd < slot) {
                slot = nd;
                queue.emplace(nd, e.from);
            }
        }
    }
    return field;
}

std::optional<Path> extract_path(const NavGraph& graph, const DistanceField& field, NodeId from) {
    if (!field.reaches(from)) return std::nullopt;
    Path path;
    path.weight = field.dist[static_cast<std::size_t>(from)];
    path.nodes.push_back(from);
    NodeId u = from;
    while (u != field.target) {
        NodeId next = -1;
        const std::int64_t du = field.dist[static_cast<std::size_t>(u)];
        for (int ei : graph.out_edges(u)) {
            const NavEdge& e = graph.edges()[static_cast<std::size_t>(ei)];
            if (!e.connector_id.empty() && field.excluded.contains(e.connector_id)) continue;
            const std::int64_t dv = field.dist[static_cast<std::size_t>(e.to)];
            if (dv == kUnreachable || e.weight + dv != du) continue;
            if (next < 0 || e.to < next) next = e.to;
        }
        if (next < 0) return std::nullopt;
        path.nodes.push_back(next);
        u = next;
    }
    return path;
}

std::optional<Path> shortest_path(const NavGraph& graph, NodeId from, NodeId to, const std::set<std::string>& exclude) {
    if (from < 0 || to < 0 || static_cast<std::size_t>(from) >= graph.size() || static_cast<std::size_t>(to) >= graph.size()) {
        throw NavGraphError("node id out of range");
    }
    return extract_path(graph, distance_field(graph, to, exclude), from);
}

}  // namespace hubsim
