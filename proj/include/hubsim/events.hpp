#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hubsim/geometry.hpp"

namespace hubsim {

using AgentId = std::uint64_t;

enum class AgentKind { vehicle = 0, pedestrian = 1, tram = 2 };

std::string_view to_string(AgentKind k);
std::optional<AgentKind> agent_kind_from_string(std::string_view s);

struct BarrierApproached {
    std::string barrier_id;
    std::size_t barrier_index = 0;
    // Present when the interact trigger was held on the approach tick.
    std::optional<std::string> info_text;
    bool operator==(const BarrierApproached&) const = default;
};

struct BarrierResolved {
    std::string barrier_id;
    std::size_t barrier_index = 0;
    std::string mutation;
    bool operator==(const BarrierResolved&) const = default;
};

struct TourCompleted {
    std::size_t barriers = 0;
    bool operator==(const TourCompleted&) const = default;
};

struct ParticleCue {
    std::string barrier_id;
    std::size_t barrier_index = 0;
    int level = 0;
    Vec2 anchor;
    bool operator==(const ParticleCue&) const = default;
};

struct AgentSpawned {
    AgentId agent_id = 0;
    AgentKind agent_kind = AgentKind::pedestrian;
    std::size_t archetype = 0;
    std::string source;
    bool operator==(const AgentSpawned&) const = default;
};

struct AgentDespawned {
    AgentId agent_id = 0;
    AgentKind agent_kind = AgentKind::pedestrian;
    std::string reason;
    bool operator==(const AgentDespawned&) const = default;
};

struct TransitArrived {
    AgentId agent_id = 0;
    std::string line_id;
    std::string stop_id;
    bool operator==(const TransitArrived&) const = default;
};

struct TransitDeparted {
    AgentId agent_id = 0;
    std::string line_id;
    std::string stop_id;
    bool operator==(const TransitDeparted&) const = default;
};

// Carries the measured gaps so every change can be audited against the thresholds.
struct LaneChange {
    AgentId agent_id = 0;
    std::string from_lane;
    std::string to_lane;
    double front_gap = 0.0;
    double rear_gap = 0.0;
    double speed = 0.0;
    double follower_speed = 0.0;
    bool operator==(const LaneChange&) const = default;
};

using EventPayload = std::variant<BarrierApproached, BarrierResolved, TourCompleted, ParticleCue, AgentSpawned, AgentDespawned,
                                  TransitArrived, TransitDeparted, LaneChange>;

enum class EventKind {
    BarrierApproached,
    BarrierResolved,
    TourCompleted,
    ParticleCue,
    AgentSpawned,
    AgentDespawned,
    TransitArrived,
    TransitDeparted,
    LaneChange,
};

std::string_view to_string(EventKind k);

struct Event {
    std::uint64_t tick = 0;
    // Step phase (1..8) that emitted the event.
    int phase = 0;
    // Ordering key inside a phase: agent id, or barrier index for tour events.
    std::uint64_t subject = 0;
    EventPayload payload;

    EventKind kind() const { return static_cast<EventKind>(payload.index()); }
    bool operator==(const Event&) const = default;
};

nlohmann::ordered_json event_to_json(const Event& e);
// Throws std::runtime_error on unknown kinds or missing fields.
Event event_from_json(const nlohmann::json& j);

}  // namespace hubsim
