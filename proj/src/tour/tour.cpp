#include "hubsim/tour.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "hubsim/hash.hpp"
#include "hubsim/world.hpp"

namespace hubsim {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Vec2 read_vec2(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

Polyline read_polyline(const nlohmann::json& j) {
    Polyline out;
    for (const auto& p : j) out.push_back(read_vec2(p));
    return out;
}

nlohmann::ordered_json vec2_json(Vec2 v) { return nlohmann::ordered_json::array({v.x, v.y}); }

MutationSpec read_resolution(const nlohmann::json& j) {
    const auto type = j.at("type").get<std::string>();
    if (type == "AddGuideStripSegment") {
        return AddGuideStripSegment{j.at("guide_strip").get<std::string>(), read_polyline(j.at("polyline"))};
    }
    if (type == "ClearObstacles") {
        ClearObstacles c;
        c.guide_strip = j.value("guide_strip", std::string{});
        c.duration = j.value("duration", 2.0);
        for (const auto& o : j.at("obstacles")) c.obstacles.push_back({o.at("id").get<std::string>(), read_vec2(o.at("displacement"))});
        return c;
    }
    if (type == "ActivateArrowGuides") {
        return ActivateArrowGuides{j.at("broken_connector").get<std::string>(), j.at("alternative_connector").get<std::string>()};
    }
    throw ScenarioError("unknown resolution type '" + type + "'");
}

nlohmann::ordered_json resolution_json(const MutationSpec& m) {
    nlohmann::ordered_json j;
    j["type"] = std::string(mutation_name(m));
    std::visit(overloaded{
                   [&](const AddGuideStripSegment& a) {
                       j["guide_strip"] = a.guide_strip;
                       j["polyline"] = nlohmann::ordered_json::array();
                       for (Vec2 p : a.polyline) j["polyline"].push_back(vec2_json(p));
                   },
                   [&](const ClearObstacles& c) {
                       j["guide_strip"] = c.guide_strip;
                       j["obstacles"] = nlohmann::ordered_json::array();
                       for (const auto& o : c.obstacles) {
                           j["obstacles"].push_back({{"id", o.obstacle_id}, {"displacement", vec2_json(o.displacement)}});
                       }
                       j["duration"] = c.duration;
                   },
                   [&](const ActivateArrowGuides& a) {
                       j["broken_connector"] = a.broken_connector;
                       j["alternative_connector"] = a.alternative_connector;
                   },
               },
               m);
    return j;
}

GroundPath to_ground(const NavGraph& g, const Path& path) {
    GroundPath out;
    out.reserve(path.nodes.size());
    for (NodeId n : path.nodes) out.push_back({g.node(n).level, g.node(n).pos});
    return out;
}

Vec2 connector_point(const Feature& c, LevelId level) {
    const auto info = connector_info(c);
    auto it = info.anchors.find(level);
    return it != info.anchors.end() ? it->second : centroid(c.geometry);
}

}  // namespace

std::string_view to_string(BarrierKind k) {
    switch (k) {
    case BarrierKind::interrupted_guide_strip: return "interrupted_guide_strip";
    case BarrierKind::cluttered_sidewalk: return "cluttered_sidewalk";
    case BarrierKind::broken_elevator: return "broken_elevator";
    }
    return "?";
}

std::optional<BarrierKind> barrier_kind_from_string(std::string_view s) {
    if (s == "interrupted_guide_strip") return BarrierKind::interrupted_guide_strip;
    if (s == "cluttered_sidewalk") return BarrierKind::cluttered_sidewalk;
    if (s == "broken_elevator") return BarrierKind::broken_elevator;
    return std::nullopt;
}

std::string_view mutation_name(const MutationSpec& m) {
    switch (m.index()) {
    case 0: return "AddGuideStripSegment";
    case 1: return "ClearObstacles";
    default: return "ActivateArrowGuides";
    }
}

std::string_view to_string(BarrierPhase p) {
    switch (p) {
    case BarrierPhase::guided: return "Guided";
    case BarrierPhase::approached: return "Approached";
    case BarrierPhase::resolved: return "Resolved";
    }
    return "?";
}

TourError::TourError(TourErrorCode code, std::string subject, const std::string& message)
    : std::runtime_error(message), code_(code), subject_(std::move(subject)) {}

BarrierScenario load_scenario(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ScenarioError(std::string("scenario is not valid JSON: ") + e.what());
    }
    BarrierScenario sc;
    try {
        sc.version = doc.value("version", std::string{"1"});
        const auto& sp = doc.at("start_pose");
        sc.start.level = sp.at("level").get<int>();
        sc.start.position = read_vec2(sp.at("position"));
        sc.start.heading = sp.value("heading", 0);
        sc.corridor_half_width = doc.value("corridor_half_width", 0.6);
        for (const auto& bj : doc.at("barriers")) {
            BarrierDef b;
            b.id = bj.at("id").get<std::string>();
            const auto kind = barrier_kind_from_string(bj.at("kind").get<std::string>());
            if (!kind) throw ScenarioError("barrier '" + b.id + "' has unknown kind");
            b.kind = *kind;
            b.level = bj.at("level").get<int>();
            b.trigger_center = read_vec2(bj.at("trigger").at("center"));
            b.trigger_radius = bj.at("trigger").value("radius", 3.0);
            const auto& hl = bj.at("highlight");
            const auto& m = hl.at("marker_anchor");
            b.marker_anchor = {m.at(0).get<double>(), m.at(1).get<double>(), m.at(2).get<double>()};
            b.cue_radius = hl.value("cue_radius", 8.0);
            b.info_text = bj.value("info_text", std::string{});
            b.resolution = read_resolution(bj.at("resolution"));
            sc.barriers.push_back(std::move(b));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioError(std::string("scenario malformed: ") + e.what());
    }
    return sc;
}

BarrierScenario load_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_scenario(ss.str());
}

nlohmann::ordered_json scenario_to_json(const BarrierScenario& sc) {
    nlohmann::ordered_json j;
    j["version"] = sc.version;
    j["start_pose"] = {{"level", sc.start.level}, {"position", vec2_json(sc.start.position)}, {"heading", sc.start.heading}};
    j["corridor_half_width"] = sc.corridor_half_width;
    j["barriers"] = nlohmann::ordered_json::array();
    for (const auto& b : sc.barriers) {
        nlohmann::ordered_json bj;
        bj["id"] = b.id;
        bj["kind"] = std::string(to_string(b.kind));
        bj["level"] = b.level;
        bj["trigger"] = {{"center", vec2_json(b.trigger_center)}, {"radius", b.trigger_radius}};
        bj["highlight"] = {{"marker_anchor", {b.marker_anchor.x, b.marker_anchor.y, b.marker_anchor.z}}, {"cue_radius", b.cue_radius}};
        bj["info_text"] = b.info_text;
        bj["resolution"] = resolution_json(b.resolution);
        j["barriers"].push_back(std::move(bj));
    }
    return j;
}

std::string scenario_digest(const BarrierScenario& scenario) { return to_hex(fnv1a64(scenario_to_json(scenario).dump())); }

ValidationReport validate_scenario(const BarrierScenario& sc, const SiteMap& site) {
    ValidationReport r;
    auto err = [&](const std::string& subject, const std::string& msg) { r.push_back({Severity::error, subject, msg}); };

    if (!site.has_level(sc.start.level)) err("start_pose", "level " + std::to_string(sc.start.level) + " not in site");
    if (sc.start.heading % 45 != 0) err("start_pose", "heading must be a multiple of 45");
    if (!on_walk_area(site, sc.start.level, sc.start.position)) err("start_pose", "StartPoseInvalid: position is not on a walk surface");
    if (!(sc.corridor_half_width > 0.0)) err("scenario", "corridor_half_width must be positive");

    std::set<std::string> ids;
    for (const auto& b : sc.barriers) {
        if (!ids.insert(b.id).second) err(b.id, "duplicate barrier id");
        if (!site.has_level(b.level)) err(b.id, "level " + std::to_string(b.level) + " not in site");
        if (!(b.trigger_radius > 0.0)) err(b.id, "trigger radius must be positive");
        if (b.cue_radius < b.trigger_radius) err(b.id, "cue_radius must be at least the trigger radius");
        if (!on_walk_area(site, b.level, b.trigger_center)) err(b.id, "trigger centre is not on a walk surface of its level");
        const double dx = b.marker_anchor.x - b.trigger_center.x;
        const double dy = b.marker_anchor.y - b.trigger_center.y;
        if (std::sqrt(dx * dx + dy * dy + b.marker_anchor.z * b.marker_anchor.z) > 5.0) err(b.id, "marker_anchor farther than 5 m from the trigger centre");

        auto require = [&](const std::string& fid, FeatureKind kind) -> const Feature* {
            const Feature* f = site.find(fid);
            if (!f || f->kind != kind) {
                err(b.id, "DanglingReference: '" + fid + "' is not a " + std::string(to_string(kind)));
                return nullptr;
            }
            return f;
        };
        std::visit(overloaded{
                       [&](const AddGuideStripSegment& a) {
                           require(a.guide_strip, FeatureKind::guide_strip);
                           if (a.polyline.size() < 2) err(b.id, "guide strip segment needs at least two points");
                       },
                       [&](const ClearObstacles& c) {
                           const Feature* strip = require(c.guide_strip, FeatureKind::guide_strip);
                           if (!(c.duration > 0.0)) err(b.id, "animation duration must be positive");
                           for (const auto& o : c.obstacles) {
                               const Feature* obs = require(o.obstacle_id, FeatureKind::obstacle);
                               if (!obs || !strip) continue;
                               const Polygon moved = translate(obs->geometry, o.displacement);
                               if (polygon_polyline_distance(moved, strip->geometry) < sc.corridor_half_width) {
                                   err(b.id, "displacement leaves '" + o.obstacle_id + "' inside the guide-strip corridor");
                               }
                           }
                       },
                       [&](const ActivateArrowGuides& a) {
                           const Feature* broken = require(a.broken_connector, FeatureKind::connector);
                           const Feature* alt = require(a.alternative_connector, FeatureKind::connector);
                           if (broken && alt && !connector_info(*alt).operational) {
                               err(b.id, "AlternativeUnavailable: connector '" + a.alternative_connector + "' is not operational");
                           }
                       },
                   },
                   b.resolution);
    }
    return r;
}

GroundPath guided_path(const WorldState& world, LevelId level, Vec2 pos, const BarrierDef& target) {
    const NavGraph& g = world.walk_graph();
    const auto from = g.nearest_node(level, pos);
    const auto to = g.nearest_node(target.level, target.trigger_center);
    if (!from || !to) throw TourError(TourErrorCode::NoPath, target.id, "NoPath: no walk node near avatar or barrier " + target.id);
    auto path = extract_path(g, world.walk_field(*to), *from);
    if (!path) throw TourError(TourErrorCode::NoPath, target.id, "NoPath: barrier " + target.id + " unreachable");
    return to_ground(g, *path);
}

TourState init_tour(const WorldState& world) {
    const auto& sc = world.ctx->scenario;
    TourState t;
    t.phases.assign(sc.barriers.size(), BarrierPhase::guided);
    t.cued.assign(sc.barriers.size(), false);
    const NavGraph& g = world.walk_graph();
    const auto start = g.nearest_node(world.avatar.level, world.avatar.pos);
    for (const auto& b : sc.barriers) {
        const auto goal = g.nearest_node(b.level, b.trigger_center);
        if (!start || !goal || !world.walk_field(*goal).reaches(*start)) {
            throw TourError(TourErrorCode::UnreachableBarrier, b.id, "UnreachableBarrier: no walk path from the start to barrier " + b.id);
        }
    }
    if (!sc.barriers.empty()) {
        t.guided_path = guided_path(world, world.avatar.level, world.avatar.pos, sc.barriers.front());
        t.guided_from = *start;
    }
    return t;
}

MutationRecord apply_resolution(WorldState& world, std::size_t index) {
    const auto& sc = world.ctx->scenario;
    const BarrierDef& b = sc.barriers.at(index);
    for (const auto& m : world.mutations_applied) {
        if (m.barrier_index == index) throw TourError(TourErrorCode::AlreadyApplied, b.id, "AlreadyApplied: " + b.id);
    }
    auto dangling = [&](const std::string& fid) {
        return TourError(TourErrorCode::DanglingReference, b.id, "DanglingReference: '" + fid + "' referenced by " + b.id);
    };

    MutationRecord rec;
    rec.barrier_id = b.id;
    rec.barrier_index = index;
    rec.kind = std::string(mutation_name(b.resolution));
    rec.tick = world.tick;
    SiteMap& site = world.runtime.site;

    if (const auto* add = std::get_if<AddGuideStripSegment>(&b.resolution)) {
        Feature* strip = site.find(add->guide_strip);
        if (!strip || strip->kind != FeatureKind::guide_strip) throw dangling(add->guide_strip);
        auto first = add->polyline.begin();
        if (!strip->geometry.empty() && first != add->polyline.end() && distance(strip->geometry.back(), *first) < 1e-9) ++first;
        strip->geometry.insert(strip->geometry.end(), first, add->polyline.end());
        rec.guide_strip = add->guide_strip;
        rec.polyline = add->polyline;
        rebuild_walk_graph(world);
    } else if (const auto* clear = std::get_if<ClearObstacles>(&b.resolution)) {
        ObstacleAnimation anim;
        anim.barrier_index = index;
        anim.total_ticks = std::max<std::int64_t>(1, std::llround(clear->duration / world.dt));
        for (const auto& o : clear->obstacles) {
            const Feature* f = site.find(o.obstacle_id);
            if (!f || f->kind != FeatureKind::obstacle) throw dangling(o.obstacle_id);
            anim.obstacle_ids.push_back(o.obstacle_id);
            anim.origins.push_back(f->geometry);
            anim.displacements.push_back(o.displacement);
        }
        if (world.runtime.animation) {
            // Finish any running animation first so both end where they were sent.
            world.runtime.animation->elapsed_ticks = world.runtime.animation->total_ticks - 1;
            advance_animations(world);
        }
        world.runtime.animation = std::move(anim);
        rec.guide_strip = clear->guide_strip;
        rec.obstacles = clear->obstacles;
        rec.duration = clear->duration;
    } else {
        const auto& arrows = std::get<ActivateArrowGuides>(b.resolution);
        const Feature* broken = site.find(arrows.broken_connector);
        const Feature* alt = site.find(arrows.alternative_connector);
        if (!broken || broken->kind != FeatureKind::connector) throw dangling(arrows.broken_connector);
        if (!alt || alt->kind != FeatureKind::connector) throw dangling(arrows.alternative_connector);
        const NavGraph& g = world.walk_graph();
        const auto from = g.nearest_node(b.level, connector_point(*broken, b.level));
        const auto to = g.nearest_node(b.level, connector_point(*alt, b.level));
        std::optional<Path> path;
        if (from && to) path = extract_path(g, world.walk_field(*to), *from);
        if (!path) throw TourError(TourErrorCode::NoPath, b.id, "NoPath: no walk route between the connectors of " + b.id);
        rec.arrows = to_ground(g, *path);
    }
    world.mutations_applied.push_back(rec);
    return rec;
}

void advance_animations(WorldState& world) {
    auto& anim = world.runtime.animation;
    if (!anim) return;
    ++anim->elapsed_ticks;
    const bool done = anim->elapsed_ticks >= anim->total_ticks;
    const double frac = done ? 1.0 : static_cast<double>(anim->elapsed_ticks) / static_cast<double>(anim->total_ticks);
    for (std::size_t i = 0; i < anim->obstacle_ids.size(); ++i) {
        Feature* f = world.runtime.site.find(anim->obstacle_ids[i]);
        f->geometry = translate(anim->origins[i], anim->displacements[i] * frac);
    }
    if (done) {
        anim.reset();
        rebuild_walk_graph(world);
        world.tour.guided_from = -1;
    }
}

void advance_tour(WorldState& world, const InputFrame& input) {
    auto& t = world.tour;
    const auto& sc = world.ctx->scenario;
    const std::size_t n = sc.barriers.size();
    const AvatarState& av = world.avatar;

    if (t.target_index < n) {
        const std::size_t i = t.target_index;
        const BarrierDef& b = sc.barriers[i];
        const bool here = !av.transit && av.level == b.level;
        const double d = distance(av.pos, b.trigger_center);
        if (here && d <= b.cue_radius && !t.cued[i] && t.phases[i] == BarrierPhase::guided) {
            t.cued[i] = true;
            emit(world, 7, i, ParticleCue{b.id, i, b.level, Vec2{b.marker_anchor.x, b.marker_anchor.y}});
        }
        if (here && d <= b.trigger_radius) {
            t.phases[i] = BarrierPhase::approached;
            std::optional<std::string> info;
            if (input.act) info = b.info_text;
            emit(world, 7, i, BarrierApproached{b.id, i, info});
            const MutationRecord rec = apply_resolution(world, i);
            t.phases[i] = BarrierPhase::resolved;
            emit(world, 7, i, BarrierResolved{b.id, i, rec.kind});
            ++t.target_index;
            t.guided_from = -1;
        }
    }
    if (t.target_index >= n) {
        if (!t.completion_emitted) {
            t.completed = true;
            t.completion_emitted = true;
            t.guided_path.clear();
            emit(world, 7, n, TourCompleted{n});
        }
        return;
    }
    if (av.transit) return;
    const auto node = world.walk_graph().nearest_node(av.level, av.pos);
    if (node && *node != t.guided_from) {
        try {
            t.guided_path = guided_path(world, av.level, av.pos, sc.barriers[t.target_index]);
        } catch (const TourError&) {
            t.guided_path.clear();
        }
        t.guided_from = *node;
    }
}

}  // namespace hubsim
