#pragma once

#include <optional>
#include <string>

#include "hubsim/geometry.hpp"
#include "hubsim/site.hpp"

namespace hubsim {

struct WorldState;
struct InputFrame;

inline constexpr double kAvatarRadius = 0.3;
inline constexpr double kDefaultWalkSpeed = 1.4;
inline constexpr int kRotationStep = 45;

struct ConnectorTransit {
    std::string connector_id;
    std::int64_t remaining_ticks = 0;
    LevelId to_level = 0;
    Vec2 exit_anchor;
    bool operator==(const ConnectorTransit&) const = default;
};

// Heading 0 faces +y (north); positive angles turn clockwise.
struct AvatarState {
    LevelId level = 0;
    Vec2 pos;
    int heading = 0;
    double speed_cap = kDefaultWalkSpeed;
    bool rot_latch = false;
    std::optional<ConnectorTransit> transit;
    // Tick on which the last connector transit completed, for auditing level changes.
    std::optional<std::uint64_t> last_transit_tick;

    bool operator==(const AvatarState&) const = default;
};

Vec2 heading_forward(int heading_deg);
Vec2 heading_right(int heading_deg);
// Avatar-local (+x right, +y forward) to world frame.
Vec2 local_to_world(Vec2 local, int heading_deg);

// Walkable for the avatar: on a walk area and clear of every obstacle footprint by kAvatarRadius.
bool avatar_position_valid(const SiteMap& runtime_site, LevelId level, Vec2 p);

/// Rotation first (edge-triggered), then translation with axis-separated sliding,
/// then connector handling.
void avatar_step(WorldState& world, const InputFrame& input, double dt);

}  // namespace hubsim
