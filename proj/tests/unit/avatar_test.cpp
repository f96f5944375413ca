#include <doctest.h>

#include "hubsim/replay.hpp"
#include "support.hpp"

using namespace testing;

namespace {

double obstacle_clearance(const WorldState& w) {
    double best = 1e9;
    for (const auto& f : w.site().features) {
        if (f.kind == FeatureKind::obstacle && f.level == w.avatar.level) best = std::min(best, distance_to_polygon(w.avatar.pos, f.geometry));
    }
    return best;
}

WorldState fixture_at(Vec2 pos, int heading) {
    WorldState w = init_world(shared_fixture(), 0);
    w.avatar.pos = pos;
    w.avatar.heading = heading;
    return w;
}

}  // namespace

TEST_CASE("heading conventions") {
    CHECK(heading_forward(0).x == doctest::Approx(0.0));
    CHECK(heading_forward(0).y == doctest::Approx(1.0));
    CHECK(heading_forward(90).x == doctest::Approx(1.0));
    CHECK(heading_right(0).x == doctest::Approx(1.0));
    const Vec2 v = local_to_world({0, 1}, 180);
    CHECK(v.x == doctest::Approx(0.0));
    CHECK(v.y == doctest::Approx(-1.0));
}

TEST_CASE("forward input at heading 0 moves 0.07 m north") {
    WorldState w = init_world(custom_context(plaza_site(), plaza_scenario(5, 5, 0)), 0);
    step(w, frame(0, {0, 1}));
    CHECK(w.avatar.pos.x == doctest::Approx(5.0));
    CHECK(w.avatar.pos.y == doctest::Approx(5.07).epsilon(1e-12));
}

TEST_CASE("a held rotation turns exactly one step") {
    WorldState w = init_world(custom_context(plaza_site(), plaza_scenario(5, 5, 0)), 0);
    for (int i = 0; i < 10; ++i) step(w, frame(w.tick, {}, 1));
    CHECK(w.avatar.heading == 45);
    step(w, frame(w.tick));
    CHECK_FALSE(w.avatar.rot_latch);
    step(w, frame(w.tick, {}, -1));
    step(w, frame(w.tick));
    step(w, frame(w.tick, {}, -1));
    CHECK(w.avatar.heading == 315);
}

TEST_CASE("collisions slide along obstacles and never penetrate") {
    auto site = plaza_site();
    site["features"].push_back(feature("wall", "obstacle", 0, "polygon", rect(10, 0, 12, 30)));
    WorldState w = init_world(custom_context(site, plaza_scenario(9.5, 5, 45)), 0);
    Vec2 prev = w.avatar.pos;
    for (int i = 0; i < 100; ++i) {
        step(w, frame(w.tick, {0, 1}));
        REQUIRE(obstacle_clearance(w) >= kAvatarRadius);
        REQUIRE(on_walk_area(w.site(), 0, w.avatar.pos));
        REQUIRE(distance(prev, w.avatar.pos) <= 1.4 * 0.05 + 1e-9);
        prev = w.avatar.pos;
    }
    // Pinned against the wall in x, still making progress in y.
    CHECK(w.avatar.pos.x <= 9.7 + 1e-9);
    CHECK(w.avatar.pos.y > 8.0);
}

TEST_CASE("the plaza edge stops the avatar") {
    WorldState w = init_world(custom_context(plaza_site(), plaza_scenario(1, 20, 270)), 0);
    for (int i = 0; i < 60; ++i) step(w, frame(w.tick, {0, 1}));
    CHECK(w.avatar.pos.x >= 0.0);
    CHECK(on_walk_area(w.site(), 0, w.avatar.pos));
}

TEST_CASE("the broken elevator never changes level") {
    WorldState w = fixture_at({41.5, 46}, 180);
    const Feature* elev = w.site().find("elev_west");
    REQUIRE(elev);
    int ticks_on_floor = 0;
    for (int i = 0; i < 600; ++i) {
        step(w, frame(w.tick, {0, 1}));
        REQUIRE(w.avatar.level == 0);
        REQUIRE_FALSE(w.avatar.transit.has_value());
        if (point_in_polygon(w.avatar.pos, elev->geometry)) ++ticks_on_floor;
    }
    // It walked across the elevator floor as ordinary ground.
    CHECK(ticks_on_floor > 30);
}

TEST_CASE("the stairs take 215 ticks to descend") {
    CHECK(static_cast<int>(std::ceil(15.0 / 1.4 / 0.05)) == 215);
    WorldState w = fixture_at({80, 46}, 180);
    std::optional<std::uint64_t> entered;
    while (w.tick < 1000 && w.avatar.level == 0) {
        step(w, frame(w.tick, {0, 1}));
        if (!entered && w.avatar.transit) {
            entered = w.tick;
            CHECK(w.avatar.transit->connector_id == "stairs_mid");
            CHECK(w.avatar.transit->remaining_ticks == 215);
        }
    }
    REQUIRE(entered);
    CHECK(w.avatar.level == -1);
    CHECK(w.tick - *entered == 215);
    CHECK(w.avatar.pos == Vec2{80, 40.5});
    REQUIRE(w.avatar.last_transit_tick);
    CHECK(*w.avatar.last_transit_tick + 1 == w.tick);
}

TEST_CASE("scripted tour keeps headings on the 45 degree lattice") {
    const auto log = read_input_log_file(data_path("tour-walk.input.jsonl"));
    WorldState w = init_world(shared_fixture(), 0);
    LevelId level = w.avatar.level;
    Vec2 prev = w.avatar.pos;
    bool was_in_transit = false;
    int level_changes = 0;
    for (const auto& f : log) {
        step(w, f);
        REQUIRE(w.avatar.heading % 45 == 0);
        REQUIRE(w.avatar.heading >= 0);
        REQUIRE(w.avatar.heading < 360);
        if (w.avatar.level != level) {
            // Level changes only complete a connector transit.
            REQUIRE(was_in_transit);
            REQUIRE(w.avatar.last_transit_tick == w.tick - 1);
            ++level_changes;
        } else if (!w.avatar.transit && !was_in_transit) {
            REQUIRE(distance(prev, w.avatar.pos) <= w.avatar.speed_cap * w.dt + 1e-9);
            REQUIRE(obstacle_clearance(w) >= kAvatarRadius);
            REQUIRE(on_walk_area(w.site(), w.avatar.level, w.avatar.pos));
        }
        level = w.avatar.level;
        prev = w.avatar.pos;
        was_in_transit = w.avatar.transit.has_value();
    }
    CHECK(level_changes >= 1);
}
