// Autopilot that walks the guided path through the whole tour and writes the
// consumed input frames as a replayable input log.
#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>

#include "hubsim/replay.hpp"
#include "hubsim/world.hpp"

using namespace hubsim;

namespace {

int wrap_heading(int h) { return ((h % 360) + 360) % 360; }

Vec2 connector_entry(const WorldState& w, LevelId level, Vec2 near) {
    const Feature* best = nullptr;
    double best_d = 1e18;
    for (const Feature* c : w.site().of_kind(FeatureKind::connector)) {
        const auto info = connector_info(*c);
        if (!info.operational || !info.joins(level)) continue;
        const double d = distance(info.anchors.at(level), near);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best ? centroid(best->geometry) : near;
}

// Point about `lookahead` metres further along the guided path than the avatar.
Vec2 steer_target(const WorldState& w, double lookahead) {
    const auto& path = w.tour.guided_path;
    const auto& av = w.avatar;
    std::size_t k = 0;
    double best = 1e18;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (path[i].level != av.level) continue;
        const double d = distance(path[i].pos, av.pos);
        if (d < best) {
            best = d;
            k = i;
        }
    }
    double left = lookahead;
    Vec2 at = path[k].pos;
    for (std::size_t i = k; i + 1 < path.size(); ++i) {
        if (path[i + 1].level != path[i].level) return connector_entry(w, path[i].level, path[i].pos);
        const double seg = distance(path[i].pos, path[i + 1].pos);
        if (seg >= left) return path[i].pos + (path[i + 1].pos - path[i].pos) * (left / seg);
        left -= seg;
        at = path[i + 1].pos;
    }
    return at;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generate the scripted tour walk input log"};
    std::string data = "data";
    std::string out_path;
    std::uint64_t ticks = 24000;
    app.add_option("--data", data, "Directory with the fixture files");
    app.add_option("--out", out_path, "Output input log (default <data>/tour-walk.input.jsonl)");
    app.add_option("--ticks", ticks, "Total frames to write");
    CLI11_PARSE(app, argc, argv);
    if (out_path.empty()) out_path = data + "/tour-walk.input.jsonl";

    auto ctx = make_context(load_site_file(data + "/durlacher-tor-mini.site.json"), load_scenario_file(data + "/tour.json"),
                            load_schedule_file(data + "/schedule.json"), load_catalog_file(data + "/catalog.json"));
    WorldState w = init_world(ctx, 0);
    std::vector<InputFrame> frames;
    int last_rot = 0;
    std::uint64_t still = 0;
    std::uint64_t completed_at = 0;
    while (w.tick < ticks) {
        InputFrame f = neutral_frame(w.tick);
        if (!w.tour.completed && !w.avatar.transit && !w.tour.guided_path.empty()) {
            const Vec2 target = steer_target(w, 1.5);
            const Vec2 dir = normalized(target - w.avatar.pos);
            if (length(dir) > 0.0) {
                const double bearing = std::atan2(dir.x, dir.y) * 180.0 / std::numbers::pi;
                const int want = wrap_heading(static_cast<int>(std::lround(bearing / 45.0)) * 45);
                int heading = w.avatar.heading;
                if (want != heading && last_rot == 0) {
                    const int diff = wrap_heading(want - heading);
                    f.rot = diff <= 180 ? 1 : -1;
                    heading = wrap_heading(heading + f.rot * 45);
                }
                f.move = {dot(dir, heading_right(heading)), dot(dir, heading_forward(heading))};
                f.move = {std::round(f.move.x * 1e6) / 1e6, std::round(f.move.y * 1e6) / 1e6};
            }
        }
        // Read every barrier's info board on arrival.
        if (!w.tour.completed) {
            const auto& b = ctx->scenario.barriers[w.tour.target_index];
            f.act = w.avatar.level == b.level && distance(w.avatar.pos, b.trigger_center) <= b.trigger_radius + 1.0;
        }
        // Step with exactly what the log will hold.
        f = input_frame_from_line(input_frame_to_line(sanitize(f)));
        last_rot = f.rot;
        const Vec2 before = w.avatar.pos;
        step(w, f);
        frames.push_back(f);
        if (w.tour.completed && completed_at == 0) completed_at = w.tick;
        if (!w.tour.completed && !w.avatar.transit && distance(before, w.avatar.pos) < 1e-9) {
            if (++still > 200) {
                std::cerr << "autopilot stuck at tick " << w.tick << " (" << w.avatar.pos.x << ", " << w.avatar.pos.y << ")\n";
                return 1;
            }
        } else {
            still = 0;
        }
    }
    std::ofstream out(out_path, std::ios::binary);
    write_input_log(out, frames);
    std::cout << "frames=" << frames.size() << " tour_completed=" << (w.tour.completed ? "true" : "false") << " completed_at=" << completed_at << "\n";
    return w.tour.completed ? 0 : 1;
}
