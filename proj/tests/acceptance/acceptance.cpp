#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <unistd.h>

#include "brute_force.hpp"
#include "hubsim/cli.hpp"
#include "hubsim/replay.hpp"
#include "support.hpp"

using namespace testing;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    std::string name;
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int digits = 3) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(digits) << v;
    return ss.str();
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cli(std::vector<std::string> args) {
    args.insert(args.begin(), "hubsim");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

std::vector<std::string> fixture_args(std::vector<std::string> head) {
    const std::vector<std::string> tail{"--site",     data_path("durlacher-tor-mini.site.json"), "--scenario", data_path("tour.json"),
                                        "--schedule", data_path("schedule.json"),               "--catalog",  data_path("catalog.json")};
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
}

// Independent planar helpers for the geometry checks.
double point_segment(Vec2 p, Vec2 a, Vec2 b) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

double point_polyline(Vec2 p, const std::vector<Vec2>& line) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < line.size(); ++i) best = std::min(best, point_segment(p, line[i - 1], line[i]));
    if (line.size() == 1) best = std::hypot(p.x - line[0].x, p.y - line[0].y);
    return best;
}

double orient(Vec2 a, Vec2 b, Vec2 c) { return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x); }

bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const double o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
    return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

bool inside(Vec2 p, const std::vector<Vec2>& poly) {
    bool in = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        if ((poly[i].y > p.y) != (poly[j].y > p.y) && p.x < (poly[j].x - poly[i].x) * (p.y - poly[i].y) / (poly[j].y - poly[i].y) + poly[i].x) {
            in = !in;
        }
    }
    return in;
}

double polygon_polyline(const std::vector<Vec2>& poly, const std::vector<Vec2>& line) {
    for (const auto& p : line) {
        if (inside(p, poly)) return 0.0;
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2 a = poly[i], b = poly[(i + 1) % poly.size()];
        for (std::size_t k = 1; k < line.size(); ++k) {
            if (segments_cross(a, b, line[k - 1], line[k])) return 0.0;
            best = std::min({best, point_segment(a, line[k - 1], line[k]), point_segment(b, line[k - 1], line[k]),
                             point_segment(line[k - 1], a, b), point_segment(line[k], a, b)});
        }
    }
    return best;
}

// Longest run along the straight line start -> target farther than 5 cm from the strip centreline, sampled every 1 cm.
double longest_gap(const std::vector<Vec2>& centre, Vec2 start, Vec2 target) {
    const double len = std::hypot(target.x - start.x, target.y - start.y);
    const int n = static_cast<int>(std::lround(len / 0.01));
    double best = 0.0, run = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) / n;
        const Vec2 p{start.x + (target.x - start.x) * t, start.y + (target.y - start.y) * t};
        if (point_polyline(p, centre) > 0.05) {
            run += 0.01;
            best = std::max(best, run);
        } else {
            run = 0.0;
        }
    }
    return best;
}

// Connector whose two anchors match a level change between `a` and `b`, or null.
const Feature* transition_connector(const SiteMap& site, const PathPoint& a, const PathPoint& b) {
    for (const auto& f : site.features) {
        if (f.kind != FeatureKind::connector) continue;
        const auto anchors = f.props.at("anchors");
        const auto ka = std::to_string(a.level), kb = std::to_string(b.level);
        if (!anchors.contains(ka) || !anchors.contains(kb)) continue;
        const Vec2 pa{anchors[ka][0].get<double>(), anchors[ka][1].get<double>()};
        const Vec2 pb{anchors[kb][0].get<double>(), anchors[kb][1].get<double>()};
        if (distance(pa, a.pos) <= 0.75 && distance(pb, b.pos) <= 0.75) return &f;
    }
    return nullptr;
}

bool operational(const Feature& connector) { return connector.props.value("operational", true); }

Vec2 anchor_of(const SiteMap& site, const std::string& connector, LevelId level) {
    const auto& a = site.find(connector)->props.at("anchors").at(std::to_string(level));
    return {a[0].get<double>(), a[1].get<double>()};
}

// Level changes along a ground path: {transitions, transitions through a non-operational or unknown connector, used ids}.
struct Transitions {
    int total = 0;
    int bad = 0;
    std::vector<std::string> used;
};

Transitions transitions(const SiteMap& site, const GroundPath& path) {
    Transitions t;
    for (std::size_t i = 1; i < path.size(); ++i) {
        if (path[i].level == path[i - 1].level) continue;
        ++t.total;
        const Feature* c = transition_connector(site, path[i - 1], path[i]);
        if (!c || !operational(*c)) ++t.bad;
        t.used.push_back(c ? c->id : "?");
    }
    return t;
}

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
    return s;
}

struct CliRuns {
    Outcome tour;
    Outcome determinism;
};

CliRuns cli_runs(const std::filesystem::path& tmp) {
    CliRuns r;
    const std::string script = data_path("tour-walk.input.jsonl");
    const auto a_events = (tmp / "a.events.jsonl").string();
    const auto a_cp = (tmp / "a.checkpoints").string();
    const auto t0 = Clock::now();
    const int code = cli(fixture_args({"run", "--script", script, "--out-events", a_events, "--out-checkpoints", a_cp}));
    const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();

    std::vector<std::string> resolved;
    int completions = 0;
    std::istringstream lines(slurp(a_events));
    std::string line;
    while (std::getline(lines, line)) {
        const Event e = event_from_json(nlohmann::json::parse(line));
        if (const auto* b = std::get_if<BarrierResolved>(&e.payload)) resolved.push_back(b->barrier_id);
        if (e.kind() == EventKind::TourCompleted) ++completions;
    }
    const std::vector<std::string> expected{"b1_strip", "b2_scooters", "b3_elevator"};
    r.tour = {"tour_reproduction",
              code == exit_ok && resolved == expected && completions == 1 && seconds < 10.0,
              "exit=" + std::to_string(code) + " resolved=[" + join(resolved) + "] TourCompleted=" + std::to_string(completions) +
                  " runtime=" + fmt(seconds, 2) + "s (limit 10 s, 24000 ticks)"};

    const auto b_cp = (tmp / "b.checkpoints").string();
    const int code_b = cli(fixture_args({"run", "--script", script, "--out-events", (tmp / "b.events.jsonl").string(), "--out-checkpoints", b_cp}));
    const auto cps_a = read_checkpoints_file(a_cp);
    const auto cps_b = read_checkpoints_file(b_cp);
    const bool identical = code_b == exit_ok && slurp(a_cp) == slurp(b_cp) && slurp(a_events) == slurp(tmp / "b.events.jsonl");

    const auto c_cp = (tmp / "c.checkpoints").string();
    const int code_c = cli(fixture_args({"run", "--script", script, "--ticks", "2000", "--seed", "1", "--out-checkpoints", c_cp}));
    const auto cps_c = read_checkpoints_file(c_cp);
    std::optional<std::uint64_t> diverged;
    for (std::size_t i = 0; i < cps_c.size() && i < cps_a.size(); ++i) {
        if (cps_c[i].hash != cps_a[i].hash) {
            diverged = cps_c[i].tick;
            break;
        }
    }
    r.determinism = {"determinism",
                     identical && cps_a.size() == 241 && code_c == exit_ok && diverged && *diverged <= 2000,
                     "identical_checkpoints=" + std::string(identical ? "yes" : "no") + " (" + std::to_string(cps_a.size()) +
                         " checkpoints) seed_change_diverges_at_tick=" + (diverged ? std::to_string(*diverged) : "none") +
                         " (limit 2000)"};
    return r;
}

struct ScriptedOutcomes {
    Outcome control;
    Outcome barrier1;
    Outcome barrier2;
    Outcome barrier3;
};

ScriptedOutcomes scripted_run() {
    ScriptedOutcomes out;
    const auto ctx = shared_fixture();
    const auto log = read_input_log_file(data_path("tour-walk.input.jsonl"));
    WorldState w = init_world(ctx, 0);
    const auto& scenario = ctx->scenario;
    const auto& b1 = std::get<AddGuideStripSegment>(scenario.barriers[0].resolution);
    const auto& b2 = std::get<ClearObstacles>(scenario.barriers[1].resolution);
    const auto& b3 = std::get<ActivateArrowGuides>(scenario.barriers[2].resolution);

    const Feature* strip0 = w.site().find(b1.guide_strip);
    const auto target_json = strip0->props.at("target");
    const Vec2 target{target_json[0].get<double>(), target_json[1].get<double>()};
    const Vec2 strip_start = strip0->geometry.front();
    const double gap_before = longest_gap(strip0->geometry, strip_start, target);

    // Guided path from level 0 next to the broken elevator to the underground barrier, on the initial world.
    const auto to_b3 = guided_path(w, 0, anchor_of(w.site(), b3.broken_connector, 0), scenario.barriers[2]);
    const Transitions guided = transitions(w.site(), to_b3);
    const bool guided_avoids_broken =
        guided.total >= 1 && guided.bad == 0 && std::find(guided.used.begin(), guided.used.end(), b3.broken_connector) == guided.used.end();

    int heading_violations = 0;
    std::optional<double> gap_after;
    std::optional<std::uint64_t> b2_resolved_tick;
    std::map<std::string, double> scooter_distance;
    for (const auto& f : log) {
        const auto& events = step(w, f);
        if (w.avatar.heading % 45 != 0 || w.avatar.heading < 0 || w.avatar.heading >= 360) ++heading_violations;
        for (const auto& e : events) {
            if (const auto* r = std::get_if<BarrierResolved>(&e.payload)) {
                if (r->barrier_index == 0) {
                    gap_after = longest_gap(w.site().find(b1.guide_strip)->geometry, strip_start, target);
                }
                if (r->barrier_index == 1) b2_resolved_tick = e.tick;
            }
        }
        if (b2_resolved_tick && scooter_distance.empty() && !w.runtime.animation) {
            const auto& centre = w.site().find(b2.guide_strip)->geometry;
            for (const auto& o : b2.obstacles) scooter_distance[o.obstacle_id] = polygon_polyline(w.site().find(o.obstacle_id)->geometry, centre);
        }
    }

    // A held rotation input turns exactly one step.
    WorldState plaza = init_world(custom_context(plaza_site(), plaza_scenario(5, 5, 0)), 0);
    for (int i = 0; i < 20; ++i) step(plaza, frame(plaza.tick, {}, 1));
    const bool one_step = plaza.avatar.heading == 45;

    out.control = {"control_scheme", heading_violations == 0 && one_step && log.size() == 24000,
                   "heading_violations=" + std::to_string(heading_violations) + " over " + std::to_string(log.size()) +
                       " ticks; held rotation for 20 ticks gives heading " + std::to_string(plaza.avatar.heading)};

    out.barrier1 = {"barrier1_geometry", gap_before > 5.0 && gap_after && *gap_after <= 0.05,
                    "max_gap_before=" + fmt(gap_before, 2) + " m (> 5) max_gap_after=" + (gap_after ? fmt(*gap_after, 2) : "n/a") +
                        " m (<= 0.05)"};

    double min_scooter = std::numeric_limits<double>::infinity();
    std::string per;
    for (const auto& [id, d] : scooter_distance) {
        min_scooter = std::min(min_scooter, d);
        per += " " + id + "=" + fmt(d, 3);
    }
    out.barrier2 = {"barrier2_geometry", scooter_distance.size() == b2.obstacles.size() && min_scooter >= 0.6,
                    "min_footprint_distance=" + fmt(min_scooter, 3) + " m (>= 0.6);" + per};

    const MutationRecord* arrows = nullptr;
    for (const auto& m : w.mutations_applied) {
        if (m.kind == "ActivateArrowGuides") arrows = &m;
    }
    bool arrows_ok = false;
    std::string arrow_detail = "no arrow guides applied";
    if (arrows && !arrows->arrows.empty()) {
        const auto& front = arrows->arrows.front();
        const auto& back = arrows->arrows.back();
        const double d_start = distance(front.pos, anchor_of(w.site(), b3.broken_connector, front.level));
        const double d_end = distance(back.pos, anchor_of(w.site(), b3.alternative_connector, back.level));
        const Transitions t = transitions(w.site(), arrows->arrows);
        arrows_ok = d_start <= 1.0 && d_end <= 1.0 && t.bad == 0;
        arrow_detail = "arrow_start_to_" + b3.broken_connector + "=" + fmt(d_start, 2) + " m arrow_end_to_" + b3.alternative_connector + "=" +
                       fmt(d_end, 2) + " m (<= 1) non_operational_used=" + std::to_string(t.bad);
    }
    out.barrier3 = {"barrier3_routing", arrows_ok && guided_avoids_broken,
                    arrow_detail + "; guided path level 0 -> -1 via [" + join(guided.used) + "]"};
    return out;
}

struct LongRun {
    Outcome headway;
    Outcome traffic;
};

LongRun long_run() {
    const auto ctx = shared_fixture();
    WorldState w = init_world(ctx, 0);
    const std::uint64_t ticks = 7200 * 20;
    std::map<std::string, std::vector<std::uint64_t>> arrivals;
    int red_crossings = 0;
    int overlaps = 0;
    int lane_changes = 0;
    int bad_lane_changes = 0;
    const auto& cfg = ctx->config.traffic;
    std::map<AgentId, std::pair<std::string, double>> before;

    while (w.tick < ticks) {
        before.clear();
        for (const auto& [id, a] : w.agents) {
            if (a.kind == AgentKind::vehicle) before[id] = {a.vehicle().lane_id, a.vehicle().s};
        }
        const auto& events = step(w, neutral_frame(w.tick));
        for (const auto& e : events) {
            if (const auto* t = std::get_if<TransitArrived>(&e.payload)) arrivals[t->line_id + "/" + t->stop_id].push_back(e.tick);
            if (const auto* lc = std::get_if<LaneChange>(&e.payload)) {
                ++lane_changes;
                const bool ok = lc->front_gap >= std::max(cfg.min_gap, cfg.change_front_time * lc->speed) &&
                                lc->rear_gap >= std::max(cfg.min_gap, cfg.change_rear_time * lc->follower_speed);
                if (!ok) ++bad_lane_changes;
            }
        }
        std::map<std::string, std::vector<const AgentState*>> by_lane;
        for (const auto& [id, a] : w.agents) {
            if (a.kind != AgentKind::vehicle) continue;
            const auto& v = a.vehicle();
            by_lane[v.lane_id].push_back(&a);
            auto it = before.find(id);
            if (it == before.end()) continue;
            const double s0 = it->second.second;
            for (const auto& line : ctx->lanes.at(v.lane_id).stop_lines) {
                if (s0 <= line.s && v.s > line.s && w.signals.at(line.head_id) == SignalColor::red) ++red_crossings;
            }
        }
        for (auto& [lane, vs] : by_lane) {
            std::sort(vs.begin(), vs.end(), [](const AgentState* a, const AgentState* b) { return a->vehicle().s < b->vehicle().s; });
            for (std::size_t i = 1; i < vs.size(); ++i) {
                const auto& leader = vs[i]->vehicle();
                if (leader.s - leader.length - vs[i - 1]->vehicle().s < 0.0) ++overlaps;
            }
        }
    }

    int violations = 0;
    std::size_t gaps = 0;
    double lo = 1e9, hi = 0;
    std::string per;
    for (const auto& [key, ts] : arrivals) {
        for (std::size_t i = 1; i < ts.size(); ++i) {
            const double gap = static_cast<double>(ts[i] - ts[i - 1]) * w.dt;
            lo = std::min(lo, gap);
            hi = std::max(hi, gap);
            ++gaps;
            if (gap < 300.0 || gap > 600.0) ++violations;
        }
        per += " " + key + "=" + std::to_string(ts.size());
    }
    LongRun r;
    r.headway = {"headway", violations == 0 && arrivals.size() == 2 && gaps >= 20,
                 "violations=" + std::to_string(violations) + " gaps=" + std::to_string(gaps) + " range=[" + fmt(lo, 1) + ", " +
                     fmt(hi, 1) + "] s (band [300, 600]) arrivals:" + per};
    r.traffic = {"traffic_invariants", red_crossings == 0 && overlaps == 0 && lane_changes >= 1 && bad_lane_changes == 0,
                 "red_crossings=" + std::to_string(red_crossings) + " overlaps=" + std::to_string(overlaps) +
                     " lane_changes=" + std::to_string(lane_changes) + " lane_change_threshold_violations=" +
                     std::to_string(bad_lane_changes) + " over 7200 s"};
    return r;
}

Outcome catalog_cardinality(const std::filesystem::path& tmp) {
    std::ifstream in(data_path("catalog.json"));
    const auto catalog = nlohmann::json::parse(in);
    auto write_variant = [&](const std::string& name, int peds, int vehicles) {
        auto c = catalog;
        c["pedestrians"].get_ref<nlohmann::json::array_t&>().resize(static_cast<std::size_t>(peds), catalog["pedestrians"][0]);
        c["vehicles"].get_ref<nlohmann::json::array_t&>().resize(static_cast<std::size_t>(vehicles), catalog["vehicles"][0]);
        const auto path = (tmp / name).string();
        std::ofstream(path) << c.dump();
        return path;
    };
    auto validate = [&](const std::string& path) {
        auto args = fixture_args({"validate"});
        args[8] = path;
        return cli(args);
    };
    const auto& fixture = fixture_catalog();
    const int ok = validate(data_path("catalog.json"));
    const int p106 = validate(write_variant("p106.json", 106, 19));
    const int p108 = validate(write_variant("p108.json", 108, 19));
    const int v18 = validate(write_variant("v18.json", 107, 18));
    const int v20 = validate(write_variant("v20.json", 107, 20));
    const bool pass = fixture.pedestrians.size() == 107 && fixture.vehicles.size() == 19 && ok == exit_ok && p106 == exit_validation &&
                      p108 == exit_validation && v18 == exit_validation && v20 == exit_validation;
    return {"catalog_cardinality", pass,
            "bundled=" + std::to_string(fixture.pedestrians.size()) + "/" + std::to_string(fixture.vehicles.size()) + " exit codes: bundled=" +
                std::to_string(ok) + " 106ped=" + std::to_string(p106) + " 108ped=" + std::to_string(p108) + " 18veh=" +
                std::to_string(v18) + " 20veh=" + std::to_string(v20)};
}

Outcome pathfinding_oracle() {
    std::mt19937_64 gen(424242);
    int mismatches = 0;
    std::size_t pairs = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const NavGraph g = random_graph(gen);
        const std::set<std::string> exclude = trial % 2 == 0 ? std::set<std::string>{} : std::set<std::string>{"C"};
        mismatches += compare_with_brute_force(g, exclude);
        pairs += g.size() * g.size();
    }
    return {"pathfinding_oracle", mismatches == 0,
            "graphs=200 node_pairs=" + std::to_string(pairs) + " mismatches=" + std::to_string(mismatches)};
}

Outcome performance() {
    SimConfig cfg;
    cfg.spawn_rate_scale = 12.0;
    WorldState w = init_world(fixture_context(cfg), 0);
    while (w.tick < 12000 && w.agents.size() < 230) step(w, neutral_frame(w.tick));
    std::vector<double> ms;
    std::size_t min_agents = w.agents.size();
    std::size_t max_agents = w.agents.size();
    for (int i = 0; i < 2000; ++i) {
        const auto t0 = Clock::now();
        step(w, neutral_frame(w.tick));
        ms.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
        min_agents = std::min(min_agents, w.agents.size());
        max_agents = std::max(max_agents, w.agents.size());
    }
    std::sort(ms.begin(), ms.end());
    const double p99 = ms[static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(ms.size()))) - 1];
    const double mean = std::accumulate(ms.begin(), ms.end(), 0.0) / static_cast<double>(ms.size());
    return {"performance", min_agents >= 200 && p99 < 50.0,
            "agents=[" + std::to_string(min_agents) + ", " + std::to_string(max_agents) + "] p99=" + fmt(p99, 3) + " ms mean=" +
                fmt(mean, 3) + " ms max=" + fmt(ms.back(), 3) + " ms (limit 50 ms) over 2000 ticks"};
}

}  // namespace

int main() {
    const auto tmp = std::filesystem::temp_directory_path() / ("hubsim-acceptance-" + std::to_string(::getpid()));
    std::filesystem::create_directories(tmp);

    std::vector<Outcome> outcomes;
    auto report = [&](Outcome o) {
        std::cout << (o.pass ? "PASS " : "FAIL ") << o.name << ": " << o.detail << std::endl;
        outcomes.push_back(std::move(o));
    };

    const CliRuns runs = cli_runs(tmp);
    report(runs.tour);
    const LongRun long_outcomes = long_run();
    report(long_outcomes.headway);
    const ScriptedOutcomes scripted = scripted_run();
    report(scripted.control);
    report(catalog_cardinality(tmp));
    report(runs.determinism);
    report(long_outcomes.traffic);
    report(scripted.barrier1);
    report(scripted.barrier2);
    report(scripted.barrier3);
    report(pathfinding_oracle());
    report(performance());

    std::filesystem::remove_all(tmp);
    const auto passed = std::count_if(outcomes.begin(), outcomes.end(), [](const Outcome& o) { return o.pass; });
    std::cout << passed << "/" << outcomes.size() << " criteria passed" << std::endl;
    return passed == static_cast<long>(outcomes.size()) ? 0 : 1;
}
