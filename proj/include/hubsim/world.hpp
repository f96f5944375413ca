#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hubsim/agents.hpp"
#include "hubsim/avatar.hpp"
#include "hubsim/catalog.hpp"
#include "hubsim/events.hpp"
#include "hubsim/nav_graph.hpp"
#include "hubsim/rng.hpp"
#include "hubsim/schedule.hpp"
#include "hubsim/signals.hpp"
#include "hubsim/site.hpp"
#include "hubsim/tour.hpp"

namespace hubsim {

inline constexpr double kTickSeconds = 0.05;

struct InputFrame {
    std::uint64_t tick = 0;
    Vec2 move;
    int rot = 0;
    bool act = false;
    bool operator==(const InputFrame&) const = default;
};

InputFrame neutral_frame(std::uint64_t tick);
// Clamps move components to [-1, 1] and the vector to unit length; rot to {-1, 0, 1}.
InputFrame sanitize(InputFrame f);

struct SimConfig {
    double dt = kTickSeconds;
    TrafficConfig traffic;
    // Multiplies every spawn point's rate.
    double spawn_rate_scale = 1.0;
    // Fraction of max speed trams run at outside scheduled segments.
    double tram_cruise_factor = 0.8;
};

struct StopLine {
    std::string head_id;
    double s = 0.0;
};

struct LaneInfo {
    std::string id;
    LevelId level = 0;
    ArcPath path;
    double speed_limit = 13.9;
    std::string adjacent;
    std::vector<StopLine> stop_lines;
};

struct TramRoute {
    const TransitLine* line = nullptr;
    ArcPath track;
    LevelId level = 0;
    std::vector<double> stop_s;
    double cruise = 10.0;
    std::int64_t dwell_ticks = 0;
    std::int64_t approach_ticks = 0;
};

struct SpawnInfo {
    std::string id;
    std::string agent_kind;
    LevelId level = 0;
    Vec2 pos;
    double rate = 0.0;
    std::string lane_id;
    std::vector<std::string> goals;
};

/// Immutable inputs of a world plus everything derived from them once.
struct SimContext {
    SiteMap site;
    BarrierScenario scenario;
    TransitSchedule schedule;
    ArchetypeCatalog catalog;
    SimConfig config;
    SignalProgram signals;
    std::map<std::string, LaneInfo> lanes;
    std::vector<TramRoute> tram_routes;
    std::vector<SpawnInfo> spawns;
};

class WorldError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Validates every input (throws WorldError with the collected messages) and
/// precomputes lane, transit and spawn layouts.
std::shared_ptr<const SimContext> make_context(SiteMap site, BarrierScenario scenario, TransitSchedule schedule,
                                               ArchetypeCatalog catalog, SimConfig config = {});

// Distance fields by (target node, excluded connectors), valid for one walk graph.
class PathCache {
public:
    const DistanceField& field(const NavGraph& graph, NodeId target, const std::set<std::string>& excluded);
    void clear() { fields_.clear(); }
    std::size_t size() const { return fields_.size(); }

private:
    std::map<std::pair<NodeId, std::set<std::string>>, DistanceField> fields_;
};

// Geometry that barrier resolutions change during a run.
struct RuntimeGeometry {
    SiteMap site;
    std::shared_ptr<const NavGraph> walk;
    std::uint64_t walk_version = 0;
    std::optional<ObstacleAnimation> animation;
};

struct TramRunCursor {
    std::size_t route = 0;
    std::size_t offset_index = 0;
    std::uint64_t next_run = 0;
};

struct WorldState {
    std::shared_ptr<const SimContext> ctx;
    std::uint64_t tick = 0;
    double dt = kTickSeconds;
    Rng rng;
    std::map<AgentId, AgentState> agents;
    AgentId next_agent_id = 1;
    AvatarState avatar;
    std::map<std::string, SignalColor> signals;
    TourState tour;
    std::vector<MutationRecord> mutations_applied;
    std::vector<Event> event_queue;
    std::vector<TramRunCursor> tram_cursors;
    RuntimeGeometry runtime;

    // Derived, not part of the hashed state.
    mutable PathCache paths;
    std::uint64_t updates_this_tick = 0;

    const SiteMap& site() const { return runtime.site; }
    const NavGraph& walk_graph() const { return *runtime.walk; }
    // Connector ids that are currently not operational.
    std::set<std::string> closed_connectors() const;
    const DistanceField& walk_field(NodeId target) const;
};

/// Throws WorldError("StartPoseInvalid ...") if the start pose is not walkable.
WorldState init_world(std::shared_ptr<const SimContext> ctx, std::uint64_t seed);

class TickMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Advances one tick through the eight phases; returns that tick's events.
const std::vector<Event>& step(WorldState& world, const InputFrame& input);

// Replaces the walk graph after a geometry change and remaps pedestrian routes.
void rebuild_walk_graph(WorldState& world);

void emit(WorldState& world, int phase, std::uint64_t subject, EventPayload payload);

std::string canonical_bytes(const WorldState& world);
std::uint64_t state_hash(const WorldState& world);

}  // namespace hubsim
