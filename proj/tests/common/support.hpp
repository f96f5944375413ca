#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "hubsim/world.hpp"

#ifndef HUBSIM_DATA_DIR
#define HUBSIM_DATA_DIR "data"
#endif

namespace testing {

using namespace hubsim;

inline std::string data_path(const std::string& name) { return std::string(HUBSIM_DATA_DIR) + "/" + name; }

inline const ArchetypeCatalog& fixture_catalog() {
    static const ArchetypeCatalog c = load_catalog_file(data_path("catalog.json"));
    return c;
}

inline std::shared_ptr<const SimContext> fixture_context(SimConfig config = {}) {
    return make_context(load_site_file(data_path("durlacher-tor-mini.site.json")), load_scenario_file(data_path("tour.json")),
                        load_schedule_file(data_path("schedule.json")), fixture_catalog(), config);
}

// Shared default-config fixture context; building the walk graph dominates setup time.
inline std::shared_ptr<const SimContext> shared_fixture() {
    static const auto ctx = fixture_context();
    return ctx;
}

inline nlohmann::json feature(const std::string& id, const std::string& kind, int level, const std::string& geom_key,
                              nlohmann::json geom, nlohmann::json props = nlohmann::json::object()) {
    return {{"id", id}, {"kind", kind}, {"level", level}, {geom_key, std::move(geom)}, {"props", std::move(props)}};
}

inline nlohmann::json rect(double x0, double y0, double x1, double y1) {
    return nlohmann::json::array({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
}

// A 40 x 40 m single-level plaza with a guide strip and no traffic.
inline nlohmann::json plaza_site() {
    nlohmann::json f = nlohmann::json::array();
    f.push_back(feature("plaza", "walk_surface", 0, "polygon", rect(0, 0, 40, 40)));
    f.push_back(feature("strip", "guide_strip", 0, "polyline", nlohmann::json::array({{5, 35}, {20, 35}})));
    return {{"format_version", 1}, {"name", "plaza"}, {"bounds", {{"w", 40}, {"h", 40}}}, {"levels", {0}}, {"features", f}};
}

inline nlohmann::json barrier(const std::string& id, double x, double y, nlohmann::json resolution, int level = 0) {
    return {{"id", id},
            {"kind", "interrupted_guide_strip"},
            {"level", level},
            {"trigger", {{"center", {x, y}}, {"radius", 3}}},
            {"highlight", {{"marker_anchor", {x, y, 2.5}}, {"cue_radius", 8}}},
            {"info_text", "info " + id},
            {"resolution", std::move(resolution)}};
}

inline nlohmann::json plaza_scenario(double sx = 5, double sy = 5, int heading = 0) {
    const nlohmann::json res = {{"type", "AddGuideStripSegment"}, {"guide_strip", "strip"}, {"polyline", {{20, 35}, {30, 35}}}};
    return {{"version", "1"},
            {"start_pose", {{"level", 0}, {"position", {sx, sy}}, {"heading", heading}}},
            {"corridor_half_width", 0.6},
            {"barriers", {barrier("b1", 35, 35, res)}}};
}

inline std::shared_ptr<const SimContext> custom_context(const nlohmann::json& site, const nlohmann::json& scenario,
                                                        const nlohmann::json& schedule = {{"lines", nlohmann::json::array()}},
                                                        SimConfig config = {}) {
    return make_context(load_site(site.dump()), load_scenario(scenario.dump()), load_schedule(schedule.dump()), fixture_catalog(),
                        config);
}

inline InputFrame frame(std::uint64_t tick, Vec2 move = {}, int rot = 0, bool act = false) { return InputFrame{tick, move, rot, act}; }

// Steps with neutral input until the world reaches `tick`.
inline void run_until(WorldState& w, std::uint64_t tick) {
    while (w.tick < tick) step(w, neutral_frame(w.tick));
}

}  // namespace testing
