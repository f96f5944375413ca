#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hubsim/world.hpp"

namespace hubsim {

inline constexpr int kProtocolVersion = 1;
inline constexpr int kTickHz = 20;

struct AgentView {
    AgentId id = 0;
    AgentKind kind = AgentKind::pedestrian;
    std::size_t archetype = 0;
    LevelId level = 0;
    Vec2 pos;
    double speed = 0.0;
    bool operator==(const AgentView&) const = default;
};

struct AvatarView {
    LevelId level = 0;
    Vec2 pos;
    int heading = 0;
    // Connector being traversed, empty when walking.
    std::string transit;
    bool operator==(const AvatarView&) const = default;
};

struct SignalView {
    std::string id;
    SignalColor color = SignalColor::green;
    bool operator==(const SignalView&) const = default;
};

struct TourView {
    std::size_t target_index = 0;
    std::vector<BarrierPhase> phases;
    bool completed = false;
    GroundPath guided_path;
    bool operator==(const TourView&) const = default;
};

// Full world state as streamed to clients; every real is quantized to 1e-6.
struct Snapshot {
    std::uint64_t tick = 0;
    AvatarView avatar;
    std::vector<AgentView> agents;
    std::vector<SignalView> signals;
    TourView tour;
    std::vector<MutationRecord> mutations;
    bool operator==(const Snapshot&) const = default;
};

struct Delta {
    std::uint64_t tick = 0;
    std::vector<AgentView> changed_agents;
    std::vector<AgentId> removed_agent_ids;
    std::optional<AvatarView> avatar;
    std::optional<TourView> tour;
    std::optional<std::vector<SignalView>> signals;
    std::optional<std::vector<MutationRecord>> mutations;
    std::vector<Event> events;
    bool operator==(const Delta&) const = default;
};

struct Hello {
    int proto = kProtocolVersion;
    std::string name;
    bool operator==(const Hello&) const = default;
};

struct InputMsg {
    InputFrame frame;
    bool operator==(const InputMsg&) const = default;
};

struct Ping {
    double ts = 0.0;
    bool operator==(const Ping&) const = default;
};

struct Resync {
    bool operator==(const Resync&) const = default;
};

struct Welcome {
    std::string session_id;
    int tick_hz = kTickHz;
    std::string site_digest;
    std::string scenario_digest;
    bool operator==(const Welcome&) const = default;
};

struct Pong {
    double ts = 0.0;
    bool operator==(const Pong&) const = default;
};

struct ErrorMsg {
    std::string code;
    std::string message;
    bool operator==(const ErrorMsg&) const = default;
};

// Non-fatal notice, e.g. an input frame dropped on queue overflow.
struct Warning {
    std::string code;
    std::string message;
    std::uint64_t dropped = 0;
    bool operator==(const Warning&) const = default;
};

using WireMessage = std::variant<Hello, InputMsg, Ping, Resync, Welcome, Snapshot, Delta, Pong, ErrorMsg, Warning>;

class DecodeError : public std::runtime_error {
public:
    DecodeError(std::string code, std::size_t offset, const std::string& reason);
    // UNSUPPORTED for an unknown type tag, BAD_FRAME otherwise.
    const std::string& code() const { return code_; }
    std::size_t offset() const { return offset_; }

private:
    std::string code_;
    std::size_t offset_;
};

std::string encode(const WireMessage& msg);
WireMessage decode(std::string_view text);

Snapshot make_snapshot(const WorldState& world);
Delta make_delta(const Snapshot& prev, const Snapshot& curr, std::vector<Event> events);
void apply_delta(Snapshot& base, const Delta& delta);

nlohmann::ordered_json snapshot_to_json(const Snapshot& s);
nlohmann::ordered_json mutation_to_json(const MutationRecord& m);

}  // namespace hubsim
