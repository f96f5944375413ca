#include "hubsim/agents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "hubsim/world.hpp"

namespace hubsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct LaneNeighbor {
    const AgentState* agent = nullptr;
    double s = 0.0;
    double length = 0.0;
};

// Closest vehicle ahead of arc position `s` on `lane_id`, and closest at or behind it.
std::pair<LaneNeighbor, LaneNeighbor> lane_neighbors(const WorldState& world, const std::string& lane_id, double s, AgentId self) {
    LaneNeighbor ahead, behind;
    for (const auto& [id, a] : world.agents) {
        if (id == self || a.kind != AgentKind::vehicle) continue;
        const auto& f = a.vehicle();
        if (f.lane_id != lane_id) continue;
        if (f.s > s) {
            if (!ahead.agent || f.s < ahead.s) ahead = {&a, f.s, f.length};
        } else if (!behind.agent || f.s > behind.s) {
            behind = {&a, f.s, f.length};
        }
    }
    return {ahead, behind};
}

struct GoalSpot {
    LevelId level = 0;
    Vec2 pos;
    bool is_stop = false;
};

std::optional<GoalSpot> goal_spot(const SiteMap& site, const std::string& feature_id) {
    const Feature* f = site.find(feature_id);
    if (!f || f->geometry.empty()) return std::nullopt;
    if (f->kind == FeatureKind::stop) return GoalSpot{f->level, centroid(f->geometry), true};
    return GoalSpot{f->level, f->geometry.front(), false};
}

double ped_speed(const SimContext& ctx, const AgentState& p) {
    return p.pedestrian().cyclist ? ctx.catalog.cyclists[p.archetype_id].speed : ctx.catalog.pedestrians[p.archetype_id].walk_speed;
}

double ped_radius(const SimContext& ctx, const AgentState& p) {
    return p.pedestrian().cyclist ? ctx.catalog.cyclists[p.archetype_id].radius : ctx.catalog.pedestrians[p.archetype_id].radius;
}

// Fresh route from the walk node nearest the pedestrian to its goal.
bool plan_route(AgentState& a, const WorldState& world) {
    auto& f = a.pedestrian();
    const NavGraph& g = world.walk_graph();
    const auto spot = goal_spot(world.site(), f.goal_feature);
    if (!spot) return false;
    const auto start = g.nearest_node(a.level, a.pos);
    const auto goal = g.nearest_node(spot->level, spot->pos);
    if (!start || !goal) return false;
    const DistanceField& field = world.walk_field(*goal);
    auto path = extract_path(g, field, *start);
    if (!path) return false;
    f.goal_node = *goal;
    f.goal_level = spot->level;
    a.route = std::move(path->nodes);
    a.route_index = 0;
    return true;
}

std::optional<AgentState> make_vehicle(WorldState& world, const SpawnInfo& sp) {
    const auto& ctx = *world.ctx;
    const std::size_t arch_id = world.rng.below(ctx.catalog.vehicles.size());
    const auto& arch = ctx.catalog.vehicles[arch_id];
    const auto lane_it = ctx.lanes.find(sp.lane_id);
    if (lane_it == ctx.lanes.end()) return std::nullopt;
    const LaneInfo& lane = lane_it->second;
    const double desired = std::min(arch.max_speed, lane.speed_limit);
    const double s0 = std::min(lane.path.project(sp.pos) + arch.length, lane.path.total_length());

    const auto& cfg = ctx.config.traffic;
    double gap = kInf;
    for (const auto& [id, a] : world.agents) {
        if (a.kind != AgentKind::vehicle || a.vehicle().lane_id != lane.id) continue;
        const auto& f = a.vehicle();
        if (f.s < s0 - arch.length) continue;
        gap = std::min(gap, f.s - f.length - s0);
    }
    if (gap < std::max(cfg.min_gap, cfg.headway_time * desired)) return std::nullopt;

    AgentState v;
    v.kind = AgentKind::vehicle;
    v.archetype_id = arch_id;
    v.level = lane.level;
    v.pos = lane.path.point_at(s0);
    v.speed = desired;
    v.fields = VehicleFields{lane.id, s0, arch.length, desired, 0.0};
    return v;
}

std::optional<AgentState> make_pedestrian(WorldState& world, const SpawnInfo& sp, bool cyclist) {
    const auto& ctx = *world.ctx;
    const std::size_t pool = cyclist ? ctx.catalog.cyclists.size() : ctx.catalog.pedestrians.size();
    if (pool == 0 || sp.goals.empty()) return std::nullopt;
    const std::size_t arch_id = world.rng.below(pool);
    const std::string& goal = sp.goals[world.rng.below(sp.goals.size())];

    AgentState p;
    p.kind = AgentKind::pedestrian;
    p.archetype_id = arch_id;
    p.level = sp.level;
    p.pos = sp.pos;
    PedestrianFields f;
    f.goal_feature = goal;
    f.cyclist = cyclist;
    p.fields = f;
    if (!plan_route(p, world)) return std::nullopt;
    return p;
}

std::int64_t arrival_tick(const TramRoute& r, std::size_t offset_index, std::uint64_t run, std::size_t stop, double dt) {
    const auto& line = *r.line;
    const double t = line.offsets[offset_index] + static_cast<double>(run) * line.period + line.time_to_stop(stop);
    return std::llround(t / dt);
}

struct TramPose {
    double s = 0.0;
    std::size_t next_stop = 0;
    double dwell_remaining = 0.0;
};

// Position of one scheduled run at tick `t`, driven purely by the timetable.
TramPose tram_pose(const TramRoute& r, std::size_t offset_index, std::uint64_t run, std::int64_t t, double dt) {
    const std::size_t n = r.stop_s.size();
    const std::int64_t a0 = arrival_tick(r, offset_index, run, 0, dt);
    if (t < a0) return {std::max(0.0, r.stop_s[0] - r.cruise * static_cast<double>(a0 - t) * dt), 0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        const std::int64_t ai = arrival_tick(r, offset_index, run, i, dt);
        const std::int64_t di = ai + r.dwell_ticks;
        if (t >= ai && t <= di) return {r.stop_s[i], i, static_cast<double>(di - t) * dt};
        if (i + 1 < n) {
            const std::int64_t an = arrival_tick(r, offset_index, run, i + 1, dt);
            if (t > di && t < an) {
                const double frac = static_cast<double>(t - di) / static_cast<double>(an - di);
                return {r.stop_s[i] + (r.stop_s[i + 1] - r.stop_s[i]) * frac, i + 1, 0.0};
            }
        }
    }
    const std::int64_t dl = arrival_tick(r, offset_index, run, n - 1, dt) + r.dwell_ticks;
    return {r.stop_s[n - 1] + r.cruise * static_cast<double>(t - dl) * dt, n, 0.0};
}

const std::string& crossing_signal(const WorldState& world, const std::string& crossing_id) {
    static const std::string none;
    const Feature* c = world.site().find(crossing_id);
    if (!c || !c->props.contains("signal_head") || !c->props["signal_head"].is_string()) return none;
    return c->props["signal_head"].get_ref<const std::string&>();
}

bool may_enter_crossing(const WorldState& world, const std::string& crossing_id) {
    const std::string& head = crossing_signal(world, crossing_id);
    if (head.empty()) return true;
    auto it = world.signals.find(head);
    return it != world.signals.end() && it->second == SignalColor::red;
}

}  // namespace

std::vector<AgentState> spawn_tick(WorldState& world) {
    const auto& ctx = *world.ctx;
    std::vector<AgentState> spawned;
    for (const auto& sp : ctx.spawns) {
        const double p = sp.rate * ctx.config.spawn_rate_scale * world.dt;
        if (!world.rng.bernoulli(p)) continue;
        std::optional<AgentState> agent;
        if (sp.agent_kind == "vehicle") {
            agent = make_vehicle(world, sp);
        } else if (sp.agent_kind == "pedestrian" || sp.agent_kind == "cyclist") {
            agent = make_pedestrian(world, sp, sp.agent_kind == "cyclist");
        }
        if (!agent) continue;
        agent->id = world.next_agent_id++;
        agent->last_updated_tick = world.tick;
        emit(world, 1, agent->id, AgentSpawned{agent->id, agent->kind, agent->archetype_id, sp.id});
        world.agents.emplace(agent->id, *agent);
        spawned.push_back(std::move(*agent));
    }
    return spawned;
}

void update_signals(WorldState& world) {
    const double t = static_cast<double>(world.tick) * world.dt;
    for (const auto& [id, plan] : world.ctx->signals.heads) world.signals[id] = plan_color(plan, t);
}

void transit_update(WorldState& world) {
    const auto& ctx = *world.ctx;
    const auto now = static_cast<std::int64_t>(world.tick);
    for (auto& cursor : world.tram_cursors) {
        const TramRoute& r = ctx.tram_routes[cursor.route];
        while (arrival_tick(r, cursor.offset_index, cursor.next_run, 0, world.dt) - r.approach_ticks <= now) {
            AgentState tram;
            tram.id = world.next_agent_id++;
            tram.kind = AgentKind::tram;
            tram.archetype_id = r.line->tram_archetype;
            tram.level = r.level;
            tram.fields = TramFields{r.line->id, cursor.offset_index, cursor.next_run, 0, 0.0, 0.0};
            tram.last_updated_tick = world.tick;
            ++cursor.next_run;
            emit(world, 3, tram.id, AgentSpawned{tram.id, AgentKind::tram, tram.archetype_id, r.line->id});
            const TramPose pose = tram_pose(r, tram.tram().offset_index, tram.tram().run_index, now, world.dt);
            tram.tram().s = pose.s;
            tram.pos = r.track.point_at(pose.s);
            // Start from the previous tick's pose so the first update yields a speed.
            if (now > 0) tram.tram().s = tram_pose(r, tram.tram().offset_index, tram.tram().run_index, now - 1, world.dt).s;
            world.agents.emplace(tram.id, std::move(tram));
        }
    }

    for (auto& [id, a] : world.agents) {
        if (a.kind != AgentKind::tram) continue;
        auto& f = a.tram();
        const TramRoute* route = nullptr;
        for (const auto& r : ctx.tram_routes) {
            if (r.line->id == f.line_id) route = &r;
        }
        const TramRoute& r = *route;
        const TramPose pose = tram_pose(r, f.offset_index, f.run_index, now, world.dt);
        const double len = r.track.total_length();
        const double s = std::min(pose.s, len);
        a.speed = std::abs(s - f.s) / world.dt;
        f.s = s;
        f.next_stop = pose.next_stop;
        f.dwell_remaining = pose.dwell_remaining;
        a.pos = r.track.point_at(s);
        a.last_updated_tick = world.tick;
        ++world.updates_this_tick;
        for (std::size_t i = 0; i < r.stop_s.size(); ++i) {
            const std::int64_t ai = arrival_tick(r, f.offset_index, f.run_index, i, world.dt);
            if (now == ai) emit(world, 3, id, TransitArrived{id, f.line_id, r.line->stops[i]});
            if (now == ai + r.dwell_ticks) emit(world, 3, id, TransitDeparted{id, f.line_id, r.line->stops[i]});
        }
        if (pose.s >= len) a.despawn_reason = "end_of_track";
    }
}

AgentState vehicle_step(const AgentState& v, const WorldState& world, double dt, std::optional<LaneChange>* change) {
    const auto& ctx = *world.ctx;
    const auto& cfg = ctx.config.traffic;
    const auto& arch = ctx.catalog.vehicles[v.archetype_id];
    AgentState out = v;
    auto& f = out.vehicle();
    const LaneInfo* lane = &ctx.lanes.at(f.lane_id);

    auto [leader, follower] = lane_neighbors(world, f.lane_id, f.s, v.id);
    double gap = leader.agent ? leader.s - leader.length - f.s : kInf;

    const bool blocked = leader.agent && gap < cfg.blocked_lookahead && leader.agent->speed < cfg.blocked_ratio * f.desired_speed;
    f.blocked_time = blocked ? f.blocked_time + dt : 0.0;

    if (blocked && f.blocked_time > cfg.blocked_duration && !lane->adjacent.empty() &&
        f.s < lane->path.total_length() - cfg.change_end_margin) {
        const LaneInfo& target = ctx.lanes.at(lane->adjacent);
        const double st = target.path.project(lane->path.point_at(f.s));
        auto [t_leader, t_follower] = lane_neighbors(world, target.id, st, v.id);
        // Lane ends bound the measured gaps when there is no neighbour.
        const double front_gap = t_leader.agent ? t_leader.s - t_leader.length - st : target.path.total_length() - st;
        const double rear_gap = t_follower.agent ? st - f.length - t_follower.s : st - f.length;
        const double follower_speed = t_follower.agent ? t_follower.agent->speed : 0.0;
        const double need_front = std::max(cfg.min_gap, cfg.change_front_time * v.speed);
        const double need_rear = std::max(cfg.min_gap, cfg.change_rear_time * follower_speed);
        if (front_gap >= need_front && rear_gap >= need_rear) {
            if (change) *change = LaneChange{v.id, f.lane_id, target.id, front_gap, rear_gap, v.speed, follower_speed};
            f.lane_id = target.id;
            f.s = st;
            f.blocked_time = 0.0;
            lane = &target;
            leader = t_leader;
            gap = t_leader.agent ? t_leader.s - t_leader.length - st : kInf;
        }
    }

    double v_target = f.desired_speed;
    if (leader.agent) v_target = std::min(v_target, std::max(0.0, (gap - cfg.min_gap) / cfg.headway_time));

    // First stop line not yet passed decides signal compliance.
    const StopLine* line = nullptr;
    SignalColor color = SignalColor::green;
    for (const auto& sl : lane->stop_lines) {
        if (sl.s >= f.s) {
            line = &sl;
            auto it = world.signals.find(sl.head_id);
            color = it == world.signals.end() ? SignalColor::green : it->second;
            break;
        }
    }
    bool must_stop = false;
    if (line && color != SignalColor::green) {
        const double d = line->s - cfg.stop_line_margin - f.s;
        const double stopping = v.speed * v.speed / (2.0 * arch.decel);
        must_stop = color == SignalColor::red || stopping <= std::max(d, 0.0);
        if (must_stop) v_target = std::min(v_target, std::sqrt(2.0 * arch.decel * std::max(d, 0.0)));
    }

    const double v_new = std::clamp(v_target, std::max(0.0, v.speed - arch.decel * dt), std::min(arch.max_speed, v.speed + arch.accel * dt));
    double s_new = f.s + v_new * dt;
    if (leader.agent) s_new = std::min(s_new, leader.s - leader.length);
    if (line && color == SignalColor::red) s_new = std::min(s_new, line->s);
    s_new = std::max(s_new, f.s);

    const double len = lane->path.total_length();
    if (s_new >= len) {
        s_new = len;
        out.despawn_reason = "exit";
    }
    out.speed = std::min((s_new - f.s) / dt, arch.max_speed);
    f.s = s_new;
    out.level = lane->level;
    out.pos = lane->path.point_at(s_new);
    return out;
}

AgentState pedestrian_step(const AgentState& p, const WorldState& world, double dt) {
    const auto& ctx = *world.ctx;
    const auto& cfg = ctx.config.traffic;
    AgentState out = p;
    auto& f = out.pedestrian();
    const double v_max = ped_speed(ctx, p);
    const double radius = ped_radius(ctx, p);
    const NavGraph& g = world.walk_graph();
    out.speed = 0.0;
    if (f.arrived) return out;
    f.repath_cooldown = std::max(0.0, f.repath_cooldown - dt);

    if (f.connector_remaining > 0.0) {
        f.connector_remaining -= v_max * dt;
        out.speed = v_max;
        if (f.connector_remaining <= 0.0) {
            f.connector_remaining = 0.0;
            out.level = f.connector_to_level;
            out.pos = f.connector_exit;
        }
        return out;
    }

    if (f.needs_repath) {
        if (!plan_route(out, world)) {
            out.despawn_reason = "no_route";
            return out;
        }
        f.needs_repath = false;
    }

    const NavNode& goal = g.node(f.goal_node);
    const auto spot = goal_spot(world.site(), f.goal_feature);
    if (spot && spot->is_stop && out.level == goal.level && distance(out.pos, goal.pos) <= cfg.stop_wait_radius) {
        f.arrived = true;
        f.stuck_time = 0.0;
        return out;
    }
    if (out.route_index >= out.route.size()) {
        if (spot && spot->is_stop) {
            f.arrived = true;
        } else {
            out.despawn_reason = "arrived";
        }
        return out;
    }

    // Follow the route with the full step budget.
    double budget = v_max * dt;
    Vec2 pos = out.pos;
    std::size_t idx = out.route_index;
    bool waiting = false;
    bool enter_connector = false;
    while (budget > 0.0 && idx < out.route.size()) {
        const NodeId next = out.route[idx];
        const NavNode& n = g.node(next);
        if (n.level != out.level) {
            enter_connector = true;
            break;
        }
        const std::string& crossing = g.crossing_of(next);
        const bool on_crossing = idx > 0 && !g.crossing_of(out.route[idx - 1]).empty();
        if (!crossing.empty() && !on_crossing && !may_enter_crossing(world, crossing)) {
            waiting = true;
            break;
        }
        const double d = distance(pos, n.pos);
        if (d <= budget) {
            pos = n.pos;
            budget -= d;
            ++idx;
        } else {
            pos = pos + (n.pos - pos) * (budget / d);
            budget = 0.0;
        }
    }

    if (enter_connector && budget > 0.0 && idx > 0) {
        const NodeId from = out.route[idx - 1];
        const NodeId to = out.route[idx];
        for (int e : g.out_edges(from)) {
            const NavEdge& edge = g.edges()[static_cast<std::size_t>(e)];
            if (edge.to != to) continue;
            f.connector_remaining = edge.length;
            f.connector_to_level = g.node(to).level;
            f.connector_exit = g.node(to).pos;
            break;
        }
        out.pos = pos;
        out.route_index = idx + 1;
        out.speed = distance(p.pos, pos) / dt;
        f.stuck_time = 0.0;
        return out;
    }

    const Vec2 desired = pos - out.pos;
    const Vec2 u = normalized(desired);
    const Vec2 right{u.y, -u.x};
    const double lateral_cap = 0.5 * v_max * dt;
    Vec2 offset;

    struct Body {
        Vec2 pos;
        double radius;
    };
    std::vector<Body> others;
    for (const auto& [id, q] : world.agents) {
        if (id == p.id || q.kind != AgentKind::pedestrian || q.level != out.level) continue;
        if (q.pedestrian().connector_remaining > 0.0) continue;
        others.push_back({q.pos, ped_radius(ctx, q)});
    }
    if (!world.avatar.transit && world.avatar.level == out.level) others.push_back({world.avatar.pos, kAvatarRadius});

    if (length(desired) > 0.0) {
        for (const auto& o : others) {
            const double reach = radius + o.radius + cfg.separation_margin;
            if (distance(out.pos, o.pos) >= reach) continue;
            const double side = cross(u, o.pos - out.pos);
            // Head-on ties deflect to the right.
            const Vec2 dir = side < -1e-12 ? right * -1.0 : right;
            offset += dir * lateral_cap;
        }
        const double m = length(offset);
        if (m > lateral_cap) offset = offset * (lateral_cap / m);
    }

    auto clamp_step = [&](Vec2 d) {
        const double m = length(d);
        return m > v_max * dt ? d * (v_max * dt / m) : d;
    };
    auto acceptable = [&](Vec2 cand) {
        if (!g.node_at(out.level, cand)) return false;
        for (const auto& o : others) {
            const double need = radius + o.radius;
            const double before = distance(out.pos, o.pos);
            const double after = distance(cand, o.pos);
            if (after < need && after < before) return false;
        }
        return true;
    };

    const Vec2 full = out.pos + clamp_step(desired + offset);
    const Vec2 lateral = out.pos + clamp_step(offset);
    Vec2 next = out.pos;
    if (acceptable(full)) {
        next = full;
        out.route_index = idx;
    } else if (length(offset) > 0.0 && acceptable(lateral)) {
        next = lateral;
    }

    out.speed = distance(p.pos, next) / dt;
    out.pos = next;

    if (!waiting && out.speed < 0.1 * v_max) {
        f.stuck_time += dt;
        if (f.stuck_time >= cfg.repath_cooldown && f.repath_cooldown <= 0.0) {
            f.needs_repath = true;
            f.repath_cooldown = cfg.repath_cooldown;
        }
        if (f.stuck_time >= cfg.stuck_timeout) out.despawn_reason = "stuck";
    } else {
        f.stuck_time = 0.0;
    }
    return out;
}

void despawn_phase(WorldState& world) {
    std::set<std::string> departed;
    for (const auto& e : world.event_queue) {
        if (const auto* d = std::get_if<TransitDeparted>(&e.payload)) departed.insert(d->stop_id);
    }
    std::vector<AgentId> gone;
    for (auto& [id, a] : world.agents) {
        if (a.kind == AgentKind::pedestrian && a.pedestrian().arrived && a.despawn_reason.empty() &&
            departed.contains(a.pedestrian().goal_feature)) {
            a.despawn_reason = "boarded";
        }
        if (!a.despawn_reason.empty()) gone.push_back(id);
    }
    for (AgentId id : gone) {
        const AgentState& a = world.agents.at(id);
        emit(world, 8, id, AgentDespawned{id, a.kind, a.despawn_reason});
        world.agents.erase(id);
    }
}

}  // namespace hubsim
