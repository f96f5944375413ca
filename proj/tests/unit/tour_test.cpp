#include <doctest.h>

#include <fstream>

#include "hubsim/replay.hpp"
#include "support.hpp"

using namespace testing;

namespace {

double path_length(const GroundPath& p) {
    double total = 0.0;
    for (std::size_t i = 1; i < p.size(); ++i) {
        if (p[i].level == p[i - 1].level) total += distance(p[i].pos, p[i - 1].pos);
    }
    return total;
}

std::vector<EventKind> kinds(const std::vector<Event>& events) {
    std::vector<EventKind> out;
    for (const auto& e : events) out.push_back(e.kind());
    return out;
}

nlohmann::json fixture_site_json() {
    std::ifstream in(data_path("durlacher-tor-mini.site.json"));
    return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("fixture tour starts guided toward the first barrier") {
    const WorldState w = init_world(shared_fixture(), 0);
    const auto& b1 = w.ctx->scenario.barriers.at(0);
    CHECK(w.tour.target_index == 0);
    CHECK(w.tour.phases == std::vector<BarrierPhase>(3, BarrierPhase::guided));
    REQUIRE_FALSE(w.tour.guided_path.empty());
    CHECK(distance(w.tour.guided_path.back().pos, b1.trigger_center) <= b1.trigger_radius);
    CHECK(distance(w.tour.guided_path.front().pos, w.avatar.pos) <= 0.5);
    CHECK_FALSE(w.tour.completed);
}

TEST_CASE("a barrier on a disconnected island is unreachable") {
    nlohmann::json f = nlohmann::json::array();
    f.push_back(feature("main", "walk_surface", 0, "polygon", rect(0, 0, 40, 25)));
    f.push_back(feature("island", "walk_surface", 0, "polygon", rect(0, 30, 40, 40)));
    f.push_back(feature("strip", "guide_strip", 0, "polyline", nlohmann::json::array({{5, 20}, {20, 20}})));
    const nlohmann::json site{{"format_version", 1}, {"name", "islands"}, {"bounds", {{"w", 40}, {"h", 40}}}, {"levels", {0}}, {"features", f}};
    const nlohmann::json r1 = {{"type", "AddGuideStripSegment"}, {"guide_strip", "strip"}, {"polyline", {{20, 20}, {25, 20}}}};
    const nlohmann::json r2 = {{"type", "AddGuideStripSegment"}, {"guide_strip", "strip"}, {"polyline", {{25, 20}, {30, 20}}}};
    const nlohmann::json scenario{{"version", "1"},
                                  {"start_pose", {{"level", 0}, {"position", {5, 5}}, {"heading", 0}}},
                                  {"corridor_half_width", 0.6},
                                  {"barriers", {barrier("b1", 35, 20, r1), barrier("b2", 20, 35, r2)}}};
    const auto ctx = custom_context(site, scenario);
    try {
        init_world(ctx, 0);
        FAIL("unreachable barrier accepted");
    } catch (const TourError& e) {
        CHECK(e.code() == TourErrorCode::UnreachableBarrier);
        CHECK(e.subject() == "b2");
    }
}

TEST_CASE("starting inside the first trigger resolves on the first tick, not at init") {
    WorldState w = init_world(custom_context(plaza_site(), plaza_scenario(35, 34)), 0);
    CHECK(w.tour.phases[0] == BarrierPhase::guided);
    CHECK(w.mutations_applied.empty());
    const auto events = step(w, neutral_frame(0));
    CHECK(kinds(events) == std::vector<EventKind>{EventKind::ParticleCue, EventKind::BarrierApproached, EventKind::BarrierResolved,
                                                  EventKind::TourCompleted});
    CHECK(w.tour.phases[0] == BarrierPhase::resolved);
    CHECK(w.tour.completed);
    REQUIRE(w.mutations_applied.size() == 1);
    CHECK(w.mutations_applied[0].kind == "AddGuideStripSegment");
    CHECK(w.mutations_applied[0].tick == 0);
    const Feature* strip = w.site().find("strip");
    REQUIRE(strip);
    CHECK(strip->geometry.back() == Vec2{30, 35});
    // Completion is reported once only.
    for (int i = 0; i < 20; ++i) CHECK(step(w, neutral_frame(w.tick)).empty());
}

TEST_CASE("outside every radius the tour is unchanged") {
    WorldState w = init_world(custom_context(plaza_site(), plaza_scenario(5, 5)), 0);
    const auto before = w.tour.phases;
    const auto path = w.tour.guided_path;
    CHECK(step(w, neutral_frame(0)).empty());
    CHECK(w.tour.phases == before);
    CHECK(w.tour.guided_path == path);
    CHECK(w.tour.target_index == 0);
}

TEST_CASE("interact on approach attaches the info text") {
    WorldState w = init_world(custom_context(plaza_site(), plaza_scenario(35, 34)), 0);
    const auto events = step(w, frame(0, {}, 0, true));
    bool seen = false;
    for (const auto& e : events) {
        if (const auto* a = std::get_if<BarrierApproached>(&e.payload)) {
            REQUIRE(a->info_text.has_value());
            CHECK(*a->info_text == "info b1");
            seen = true;
        }
    }
    CHECK(seen);
}

TEST_CASE("guided path edge cases") {
    const WorldState w = init_world(shared_fixture(), 0);
    const auto& barriers = w.ctx->scenario.barriers;

    SUBCASE("from the trigger centre the path is at most one cell") {
        const auto p = guided_path(w, barriers[0].level, barriers[0].trigger_center, barriers[0]);
        REQUIRE_FALSE(p.empty());
        CHECK(path_length(p) <= 0.5 + 1e-9);
    }
    SUBCASE("level 0 to the underground barrier avoids the broken elevator") {
        const auto p = guided_path(w, 0, {41.5, 47}, barriers[2]);
        REQUIRE(p.size() >= 2);
        CHECK(p.front().level == 0);
        CHECK(p.back().level == -1);
        int transitions = 0;
        for (std::size_t i = 1; i < p.size(); ++i) {
            if (p[i].level == p[i - 1].level) continue;
            ++transitions;
            // The level change happens at the stairs anchors.
            const Vec2 upper = p[i - 1].level == 0 ? p[i - 1].pos : p[i].pos;
            CHECK(distance(upper, {80, 45.5}) <= 0.5);
        }
        CHECK(transitions == 1);
    }
    SUBCASE("paths from neighbouring positions share the target endpoint") {
        const auto a = guided_path(w, 0, {20, 67}, barriers[0]);
        const auto b = guided_path(w, 0, {21, 67}, barriers[0]);
        REQUIRE_FALSE(a.empty());
        REQUIRE_FALSE(b.empty());
        CHECK(a.back() == b.back());
        CHECK(a.front() != b.front());
    }
}

TEST_CASE("scooter clearing animates over exactly 40 ticks") {
    WorldState w = init_world(shared_fixture(), 0);
    const MutationRecord rec = apply_resolution(w, 1);
    CHECK(rec.kind == "ClearObstacles");
    CHECK(rec.duration == 2.0);
    CHECK(rec.obstacles.size() == 4);
    CHECK_THROWS_AS(apply_resolution(w, 1), TourError);

    auto footprint = [&] { return w.site().find("scooter_1")->geometry; };
    Polygon prev = footprint();
    const Polygon origin = prev;
    int moving_ticks = 0;
    for (int i = 0; i < 100; ++i) {
        step(w, neutral_frame(w.tick));
        const Polygon now = footprint();
        if (now != prev) ++moving_ticks;
        prev = now;
    }
    CHECK(moving_ticks == 40);
    CHECK_FALSE(w.runtime.animation.has_value());
    const Vec2 d = rec.obstacles[0].displacement;
    CHECK(prev[0].x == doctest::Approx(origin[0].x + d.x));
    CHECK(prev[0].y == doctest::Approx(origin[0].y + d.y));
}

TEST_CASE("arrow guides run from the broken elevator to the alternative") {
    WorldState w = init_world(shared_fixture(), 0);
    const MutationRecord rec = apply_resolution(w, 2);
    CHECK(rec.kind == "ActivateArrowGuides");
    REQUIRE(rec.arrows.size() >= 2);
    for (const auto& p : rec.arrows) CHECK(p.level == -1);
    CHECK(distance(rec.arrows.front().pos, {41.5, 40.5}) <= 1.0);
    CHECK(distance(rec.arrows.back().pos, {118.5, 40.5}) <= 1.0);
}

TEST_CASE("an arrow-guide alternative that is out of service fails validation") {
    auto site = fixture_site_json();
    for (auto& f : site["features"]) {
        if (f["id"] == "elev_east") f["props"]["operational"] = false;
    }
    const auto report = validate_scenario(load_scenario_file(data_path("tour.json")), load_site(site.dump()));
    REQUIRE(has_errors(report));
    bool cited = false;
    for (const auto& issue : report) cited = cited || issue.message.find("AlternativeUnavailable") != std::string::npos;
    CHECK(cited);
}

TEST_CASE("dangling references in the scenario are rejected") {
    auto scenario = plaza_scenario();
    scenario["barriers"][0]["resolution"]["guide_strip"] = "missing";
    const auto report = validate_scenario(load_scenario(scenario.dump()), load_site(plaza_site().dump()));
    CHECK(has_errors(report));
    auto far_marker = plaza_scenario();
    far_marker["barriers"][0]["highlight"]["marker_anchor"] = {35, 25, 2.5};
    CHECK(has_errors(validate_scenario(load_scenario(far_marker.dump()), load_site(plaza_site().dump()))));
    auto small_cue = plaza_scenario();
    small_cue["barriers"][0]["highlight"]["cue_radius"] = 2;
    CHECK(has_errors(validate_scenario(load_scenario(small_cue.dump()), load_site(plaza_site().dump()))));
}

TEST_CASE("the scripted walk completes the tour in order") {
    const auto log = read_input_log_file(data_path("tour-walk.input.jsonl"));
    WorldState w = init_world(shared_fixture(), 0);
    std::vector<std::string> resolved;
    std::map<std::string, std::vector<EventKind>> per_barrier;
    int completions = 0;
    std::size_t target = 0;
    for (const auto& f : log) {
        for (const auto& e : step(w, f)) {
            if (const auto* c = std::get_if<ParticleCue>(&e.payload)) per_barrier[c->barrier_id].push_back(e.kind());
            if (const auto* a = std::get_if<BarrierApproached>(&e.payload)) per_barrier[a->barrier_id].push_back(e.kind());
            if (const auto* r = std::get_if<BarrierResolved>(&e.payload)) {
                per_barrier[r->barrier_id].push_back(e.kind());
                resolved.push_back(r->barrier_id);
            }
            if (e.kind() == EventKind::TourCompleted) ++completions;
        }
        REQUIRE(w.tour.target_index >= target);
        target = w.tour.target_index;
        for (std::size_t i = 0; i < target; ++i) REQUIRE(w.tour.phases[i] == BarrierPhase::resolved);
    }
    CHECK(resolved == std::vector<std::string>{"b1_strip", "b2_scooters", "b3_elevator"});
    CHECK(completions == 1);
    CHECK(w.tour.completed);
    const std::vector<EventKind> full{EventKind::ParticleCue, EventKind::BarrierApproached, EventKind::BarrierResolved};
    for (const auto& [id, seq] : per_barrier) {
        const std::vector<EventKind> no_cue{EventKind::BarrierApproached, EventKind::BarrierResolved};
        CHECK((seq == full || seq == no_cue));
    }
    CHECK(w.mutations_applied.size() == 3);
}
