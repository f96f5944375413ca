#include "hubsim/avatar.hpp"

#include <cmath>
#include <numbers>

#include "hubsim/world.hpp"

namespace hubsim {

namespace {

double radians(int deg) { return static_cast<double>(deg) * std::numbers::pi / 180.0; }

}  // namespace

Vec2 heading_forward(int heading_deg) {
    const double h = radians(heading_deg);
    return {std::sin(h), std::cos(h)};
}

Vec2 heading_right(int heading_deg) {
    const double h = radians(heading_deg);
    return {std::cos(h), -std::sin(h)};
}

Vec2 local_to_world(Vec2 local, int heading_deg) { return heading_right(heading_deg) * local.x + heading_forward(heading_deg) * local.y; }

bool avatar_position_valid(const SiteMap& site, LevelId level, Vec2 p) {
    if (!on_walk_area(site, level, p)) return false;
    for (const auto& f : site.features) {
        if (f.kind != FeatureKind::obstacle || f.level != level) continue;
        if (distance_to_polygon(p, f.geometry) < kAvatarRadius) return false;
    }
    return true;
}

void avatar_step(WorldState& world, const InputFrame& input, double dt) {
    AvatarState& av = world.avatar;
    if (input.rot != 0) {
        if (!av.rot_latch) {
            av.heading = ((av.heading + input.rot * kRotationStep) % 360 + 360) % 360;
            av.rot_latch = true;
        }
    } else {
        av.rot_latch = false;
    }

    if (av.transit) {
        if (--av.transit->remaining_ticks <= 0) {
            av.level = av.transit->to_level;
            av.pos = av.transit->exit_anchor;
            av.last_transit_tick = world.tick;
            av.transit.reset();
        }
        return;
    }

    const SiteMap& site = world.site();
    const Vec2 d = local_to_world(input.move, av.heading) * (av.speed_cap * dt);
    const Vec2 from = av.pos;
    if (d.x != 0.0 || d.y != 0.0) {
        for (const Vec2 cand : {from + d, from + Vec2{d.x, 0.0}, from + Vec2{0.0, d.y}}) {
            if (cand == from) continue;
            if (avatar_position_valid(site, av.level, cand)) {
                av.pos = cand;
                break;
            }
        }
    }

    for (const auto& f : site.features) {
        if (f.kind != FeatureKind::connector) continue;
        const ConnectorInfo info = connector_info(f);
        if (!info.operational || !info.joins(av.level)) continue;
        if (!point_in_polygon(av.pos, f.geometry) || point_in_polygon(from, f.geometry)) continue;
        const LevelId to = info.other_level(av.level);
        const auto ticks = static_cast<std::int64_t>(std::ceil(info.traversal_length() / av.speed_cap / dt - 1e-9));
        av.transit = ConnectorTransit{f.id, ticks, to, info.anchors.at(to)};
        break;
    }
}

}  // namespace hubsim
