#include "hubsim/world.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "hubsim/hash.hpp"

namespace hubsim {

namespace {

// Arc length along `lane` where it first meets `line`, if anywhere.
std::optional<double> crossing_arc(const ArcPath& lane, const Polyline& line) {
    const auto& pts = lane.points();
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const Vec2 a = pts[i];
        const Vec2 r = pts[i + 1] - a;
        for (std::size_t k = 0; k + 1 < line.size(); ++k) {
            const Vec2 c = line[k];
            const Vec2 q = line[k + 1] - c;
            const double den = cross(r, q);
            if (std::abs(den) < 1e-12) continue;
            const double t = cross(c - a, q) / den;
            const double u = cross(c - a, r) / den;
            if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0) return lane.cumulative()[i] + t * length(r);
        }
    }
    return std::nullopt;
}

void append_issues(std::vector<std::string>& out, const std::string& source, const ValidationReport& report) {
    for (const auto& issue : report) {
        if (issue.severity == Severity::error) out.push_back(source + ": " + issue.subject + ": " + issue.message);
    }
}

}  // namespace

InputFrame neutral_frame(std::uint64_t tick) { return InputFrame{tick, {}, 0, false}; }

InputFrame sanitize(InputFrame f) {
    auto clamp1 = [](double v) { return std::isfinite(v) ? std::clamp(v, -1.0, 1.0) : 0.0; };
    f.move = {clamp1(f.move.x), clamp1(f.move.y)};
    const double m = length(f.move);
    if (m > 1.0) f.move = f.move * (1.0 / m);
    f.rot = f.rot > 0 ? 1 : (f.rot < 0 ? -1 : 0);
    return f;
}

std::shared_ptr<const SimContext> make_context(SiteMap site, BarrierScenario scenario, TransitSchedule schedule,
                                               ArchetypeCatalog catalog, SimConfig config) {
    std::vector<std::string> problems;
    append_issues(problems, "site", validate_site(site));
    append_issues(problems, "scenario", validate_scenario(scenario, site));
    append_issues(problems, "schedule", validate_schedule(schedule));
    append_issues(problems, "schedule", validate_schedule_against(schedule, site, catalog));
    append_issues(problems, "catalog", validate_catalog(catalog));
    if (!problems.empty()) {
        std::string msg = "invalid simulation inputs:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw WorldError(msg);
    }

    auto ctx = std::make_shared<SimContext>();
    ctx->site = std::move(site);
    ctx->scenario = std::move(scenario);
    ctx->schedule = std::move(schedule);
    ctx->catalog = std::move(catalog);
    ctx->config = config;
    ctx->signals = signal_program_from_site(ctx->site);

    for (const Feature* f : ctx->site.of_kind(FeatureKind::road_lane)) {
        LaneInfo lane;
        lane.id = f->id;
        lane.level = f->level;
        lane.path = ArcPath(f->geometry);
        lane.speed_limit = f->prop_number("speed_limit", 13.9);
        lane.adjacent = f->prop_string("adjacent_lane_id");
        ctx->lanes.emplace(lane.id, std::move(lane));
    }
    for (const Feature* head : ctx->site.of_kind(FeatureKind::signal_head)) {
        for (const auto& lane_id : head->props.value("lane_ids", std::vector<std::string>{})) {
            auto it = ctx->lanes.find(lane_id);
            if (it == ctx->lanes.end()) continue;
            auto s = crossing_arc(it->second.path, head->geometry);
            if (!s) s = it->second.path.project(centroid(head->geometry));
            it->second.stop_lines.push_back({head->id, *s});
        }
    }
    for (auto& [id, lane] : ctx->lanes) {
        std::sort(lane.stop_lines.begin(), lane.stop_lines.end(), [](const StopLine& a, const StopLine& b) { return a.s < b.s; });
    }

    for (const auto& line : ctx->schedule.lines) {
        const Feature* track = ctx->site.find(line.track_id);
        const auto& tram = ctx->catalog.trams[line.tram_archetype];
        TramRoute r;
        r.line = &line;
        r.track = ArcPath(track->geometry);
        r.level = track->level;
        for (const auto& stop_id : line.stops) r.stop_s.push_back(r.track.project(centroid(ctx->site.find(stop_id)->geometry)));
        r.cruise = tram.max_speed * config.tram_cruise_factor;
        r.dwell_ticks = std::llround(tram.dwell / config.dt);
        r.approach_ticks = std::llround(r.stop_s.front() / r.cruise / config.dt);
        ctx->tram_routes.push_back(std::move(r));
    }

    std::vector<const Feature*> spawn_features = ctx->site.of_kind(FeatureKind::spawn_point);
    std::sort(spawn_features.begin(), spawn_features.end(), [](const Feature* a, const Feature* b) { return a->id < b->id; });
    for (const Feature* f : spawn_features) {
        SpawnInfo s;
        s.id = f->id;
        s.agent_kind = f->prop_string("agent_kind");
        s.level = f->level;
        s.pos = f->geometry.front();
        s.rate = f->prop_number("rate", 0.0);
        s.lane_id = f->prop_string("lane_id");
        s.goals = f->props.value("goals", std::vector<std::string>{});
        ctx->spawns.push_back(std::move(s));
    }
    return ctx;
}

const DistanceField& PathCache::field(const NavGraph& graph, NodeId target, const std::set<std::string>& excluded) {
    auto key = std::make_pair(target, excluded);
    auto it = fields_.find(key);
    if (it == fields_.end()) it = fields_.emplace(std::move(key), distance_field(graph, target, excluded)).first;
    return it->second;
}

std::set<std::string> WorldState::closed_connectors() const {
    std::set<std::string> out;
    for (const Feature* c : runtime.site.of_kind(FeatureKind::connector)) {
        if (!connector_info(*c).operational) out.insert(c->id);
    }
    return out;
}

const DistanceField& WorldState::walk_field(NodeId target) const { return paths.field(*runtime.walk, target, closed_connectors()); }

void emit(WorldState& world, int phase, std::uint64_t subject, EventPayload payload) {
    world.event_queue.push_back(Event{world.tick, phase, subject, std::move(payload)});
}

WorldState init_world(std::shared_ptr<const SimContext> ctx, std::uint64_t seed) {
    WorldState w;
    w.ctx = ctx;
    w.dt = ctx->config.dt;
    w.rng = Rng(seed);
    w.runtime.site = ctx->site;
    w.runtime.walk = std::make_shared<const NavGraph>(build_nav_graph(w.runtime.site, NavMode::walk));

    const auto& start = ctx->scenario.start;
    if (!avatar_position_valid(w.runtime.site, start.level, start.position)) {
        throw WorldError("StartPoseInvalid: start position is not on a walkable surface clear of obstacles");
    }
    if (start.heading % kRotationStep != 0) throw WorldError("StartPoseInvalid: heading must be a multiple of 45");
    w.avatar.level = start.level;
    w.avatar.pos = start.position;
    w.avatar.heading = ((start.heading % 360) + 360) % 360;

    for (const auto& [id, plan] : ctx->signals.heads) w.signals[id] = plan_color(plan, 0.0);
    for (std::size_t r = 0; r < ctx->tram_routes.size(); ++r) {
        for (std::size_t o = 0; o < ctx->tram_routes[r].line->offsets.size(); ++o) w.tram_cursors.push_back({r, o, 0});
    }
    w.tour = init_tour(w);
    return w;
}

void rebuild_walk_graph(WorldState& world) {
    auto graph = std::make_shared<const NavGraph>(build_nav_graph(world.runtime.site, NavMode::walk));
    world.runtime.walk = graph;
    ++world.runtime.walk_version;
    world.paths.clear();
    // Node ids change with the raster, so every route is re-planned on the new graph.
    for (auto& [id, a] : world.agents) {
        if (a.kind == AgentKind::pedestrian) a.pedestrian().needs_repath = true;
    }
}

const std::vector<Event>& step(WorldState& world, const InputFrame& input) {
    if (input.tick != world.tick) {
        throw TickMismatch("input frame for tick " + std::to_string(input.tick) + " applied at tick " + std::to_string(world.tick));
    }
    world.event_queue.clear();
    world.updates_this_tick = 0;
    const InputFrame frame = sanitize(input);
    const double dt = world.dt;

    spawn_tick(world);
    update_signals(world);
    transit_update(world);

    for (auto& [id, agent] : world.agents) {
        if (agent.kind != AgentKind::vehicle) continue;
        std::optional<LaneChange> change;
        AgentState next = vehicle_step(agent, world, dt, &change);
        next.last_updated_tick = world.tick;
        agent = std::move(next);
        ++world.updates_this_tick;
        if (change) emit(world, 4, id, *change);
    }
    for (auto& [id, agent] : world.agents) {
        if (agent.kind != AgentKind::pedestrian) continue;
        AgentState next = pedestrian_step(agent, world, dt);
        next.last_updated_tick = world.tick;
        agent = std::move(next);
        ++world.updates_this_tick;
    }

    avatar_step(world, frame, dt);
    advance_animations(world);
    advance_tour(world, frame);
    despawn_phase(world);

    std::stable_sort(world.event_queue.begin(), world.event_queue.end(), [](const Event& a, const Event& b) {
        if (a.phase != b.phase) return a.phase < b.phase;
        return a.subject < b.subject;
    });
    ++world.tick;
    return world.event_queue;
}

std::string canonical_bytes(const WorldState& w) {
    CanonicalWriter out;
    out.put_int(static_cast<std::int64_t>(w.tick));
    out.put_int(static_cast<std::int64_t>(w.next_agent_id));

    out.put_int(static_cast<std::int64_t>(w.agents.size()));
    for (const auto& [id, a] : w.agents) {
        out.put_int(static_cast<std::int64_t>(a.id));
        out.put_int(static_cast<std::int64_t>(a.kind));
        out.put_int(static_cast<std::int64_t>(a.archetype_id));
        out.put_int(a.level);
        out.put_real(a.pos.x);
        out.put_real(a.pos.y);
        out.put_real(a.speed);
        out.put_int(static_cast<std::int64_t>(a.route.size()));
        for (NodeId n : a.route) out.put_int(n);
        out.put_int(static_cast<std::int64_t>(a.route_index));
        out.put_int(static_cast<std::int64_t>(a.last_updated_tick));
        if (const auto* v = std::get_if<VehicleFields>(&a.fields)) {
            out.put_string(v->lane_id);
            out.put_real(v->s);
            out.put_real(v->length);
            out.put_real(v->desired_speed);
            out.put_real(v->blocked_time);
        } else if (const auto* p = std::get_if<PedestrianFields>(&a.fields)) {
            out.put_string(p->goal_feature);
            out.put_int(p->goal_node);
            out.put_int(p->goal_level);
            out.put_bool(p->cyclist);
            out.put_real(p->repath_cooldown);
            out.put_bool(p->arrived);
            out.put_bool(p->needs_repath);
            out.put_real(p->stuck_time);
            out.put_real(p->connector_remaining);
            out.put_int(p->connector_to_level);
            out.put_real(p->connector_exit.x);
            out.put_real(p->connector_exit.y);
        } else {
            const auto& t = std::get<TramFields>(a.fields);
            out.put_string(t.line_id);
            out.put_int(static_cast<std::int64_t>(t.offset_index));
            out.put_int(static_cast<std::int64_t>(t.run_index));
            out.put_int(static_cast<std::int64_t>(t.next_stop));
            out.put_real(t.s);
            out.put_real(t.dwell_remaining);
        }
    }

    const auto& av = w.avatar;
    out.put_int(av.level);
    out.put_real(av.pos.x);
    out.put_real(av.pos.y);
    out.put_int(av.heading);
    out.put_real(av.speed_cap);
    out.put_bool(av.rot_latch);
    out.put_bool(av.transit.has_value());
    if (av.transit) {
        out.put_string(av.transit->connector_id);
        out.put_int(av.transit->remaining_ticks);
        out.put_int(av.transit->to_level);
        out.put_real(av.transit->exit_anchor.x);
        out.put_real(av.transit->exit_anchor.y);
    }

    out.put_int(static_cast<std::int64_t>(w.signals.size()));
    for (const auto& [id, color] : w.signals) {
        out.put_string(id);
        out.put_int(static_cast<std::int64_t>(color));
    }

    out.put_int(static_cast<std::int64_t>(w.tour.target_index));
    out.put_int(static_cast<std::int64_t>(w.tour.phases.size()));
    for (std::size_t i = 0; i < w.tour.phases.size(); ++i) {
        out.put_int(static_cast<std::int64_t>(w.tour.phases[i]));
        out.put_bool(w.tour.cued[i]);
    }
    out.put_bool(w.tour.completed);
    out.put_bool(w.tour.completion_emitted);

    out.put_int(static_cast<std::int64_t>(w.tram_cursors.size()));
    for (const auto& c : w.tram_cursors) out.put_int(static_cast<std::int64_t>(c.next_run));

    out.put_bool(w.runtime.animation.has_value());
    if (w.runtime.animation) {
        out.put_int(static_cast<std::int64_t>(w.runtime.animation->barrier_index));
        out.put_int(w.runtime.animation->elapsed_ticks);
        out.put_int(w.runtime.animation->total_ticks);
    }
    out.put_int(static_cast<std::int64_t>(w.mutations_applied.size()));
    for (const auto& m : w.mutations_applied) {
        out.put_string(m.barrier_id);
        out.put_string(m.kind);
        out.put_int(static_cast<std::int64_t>(m.tick));
    }
    return out.bytes();
}

std::uint64_t state_hash(const WorldState& world) { return fnv1a64(canonical_bytes(world)); }

}  // namespace hubsim
