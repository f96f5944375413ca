#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hubsim/events.hpp"
#include "hubsim/nav_graph.hpp"
#include "hubsim/signals.hpp"

namespace hubsim {

struct WorldState;
class Rng;

struct VehicleFields {
    std::string lane_id;
    // Arc length of the front bumper along the lane.
    double s = 0.0;
    double length = 4.5;
    double desired_speed = 13.9;
    // Time the vehicle has been stuck behind a slow leader.
    double blocked_time = 0.0;
    bool operator==(const VehicleFields&) const = default;
};

struct TramFields {
    std::string line_id;
    std::size_t offset_index = 0;
    std::uint64_t run_index = 0;
    std::size_t next_stop = 0;
    double s = 0.0;
    double dwell_remaining = 0.0;
    bool operator==(const TramFields&) const = default;
};

struct PedestrianFields {
    std::string goal_feature;
    NodeId goal_node = 0;
    LevelId goal_level = 0;
    bool cyclist = false;
    double repath_cooldown = 0.0;
    // Set once the goal has been reached (or the pedestrian waits at its stop).
    bool arrived = false;
    bool needs_repath = false;
    double stuck_time = 0.0;
    // Remaining traversal distance while inside a connector.
    double connector_remaining = 0.0;
    LevelId connector_to_level = 0;
    Vec2 connector_exit;
    bool operator==(const PedestrianFields&) const = default;
};

struct AgentState {
    AgentId id = 0;
    AgentKind kind = AgentKind::pedestrian;
    std::size_t archetype_id = 0;
    LevelId level = 0;
    Vec2 pos;
    double speed = 0.0;
    std::vector<NodeId> route;
    std::size_t route_index = 0;
    std::variant<VehicleFields, PedestrianFields, TramFields> fields;
    std::uint64_t last_updated_tick = 0;
    // Non-empty once the agent is scheduled for removal in the despawn phase.
    std::string despawn_reason;

    bool operator==(const AgentState&) const = default;

    VehicleFields& vehicle() { return std::get<VehicleFields>(fields); }
    const VehicleFields& vehicle() const { return std::get<VehicleFields>(fields); }
    PedestrianFields& pedestrian() { return std::get<PedestrianFields>(fields); }
    const PedestrianFields& pedestrian() const { return std::get<PedestrianFields>(fields); }
    TramFields& tram() { return std::get<TramFields>(fields); }
    const TramFields& tram() const { return std::get<TramFields>(fields); }
};

// Behaviour constants; the defaults are the documented model, all overridable.
struct TrafficConfig {
    double min_gap = 2.0;
    double headway_time = 1.5;
    double blocked_ratio = 0.5;
    double blocked_duration = 3.0;
    double blocked_lookahead = 30.0;
    double change_front_time = 1.5;
    double change_rear_time = 2.0;
    // No lane changes this close to the lane end.
    double change_end_margin = 10.0;
    double stop_line_margin = 0.5;
    double repath_cooldown = 2.0;
    double separation_margin = 0.1;
    double stuck_timeout = 30.0;
    double stop_wait_radius = 3.0;
};

/// Phase 1: one Bernoulli draw per spawn point in feature-id order. New agents
/// are inserted into the world (with AgentSpawned events) and returned.
std::vector<AgentState> spawn_tick(WorldState& world);

// Phase 2: signal colours at the tick's start time.
void update_signals(WorldState& world);

// Phase 3: schedule-driven trams.
void transit_update(WorldState& world);

// Phase 8: removes flagged agents and tram riders whose stop saw a departure.
void despawn_phase(WorldState& world);

/// Car following, signal compliance and overtaking for one vehicle. Reads the
/// other agents from `world` in their current (partially updated) state.
AgentState vehicle_step(const AgentState& v, const WorldState& world, double dt, std::optional<LaneChange>* change);

/// Path following with separation against other pedestrians and the avatar.
AgentState pedestrian_step(const AgentState& p, const WorldState& world, double dt);

}  // namespace hubsim
