#include "hubsim/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace hubsim {

double TransitLine::time_to_stop(std::size_t index) const {
    double t = 0.0;
    for (std::size_t i = 0; i < index && i < run_times.size(); ++i) t += run_times[i];
    return t;
}

const TransitLine* TransitSchedule::find(std::string_view line_id) const {
    for (const auto& l : lines) {
        if (l.id == line_id) return &l;
    }
    return nullptr;
}

TransitSchedule load_schedule(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ScheduleError(std::string("schedule is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("lines") || !doc["lines"].is_array()) {
        throw ScheduleError("schedule must be an object with a 'lines' array");
    }
    TransitSchedule schedule;
    try {
        for (const auto& lj : doc["lines"]) {
            TransitLine line;
            line.id = lj.at("id").get<std::string>();
            line.track_id = lj.at("track_id").get<std::string>();
            line.stops = lj.at("stops").get<std::vector<std::string>>();
            line.offsets = lj.at("offsets").get<std::vector<double>>();
            line.period = lj.at("period").get<double>();
            line.run_times = lj.value("run_times", std::vector<double>{});
            line.tram_archetype = lj.value("tram_archetype", std::size_t{0});
            schedule.lines.push_back(std::move(line));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ScheduleError(std::string("schedule line malformed: ") + e.what());
    }
    return schedule;
}

TransitSchedule load_schedule_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScheduleError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_schedule(ss.str());
}

std::vector<double> transit_arrivals(const TransitSchedule& schedule, const std::string& stop_id, double t0, double t1) {
    std::vector<double> out;
    bool served = false;
    for (const auto& line : schedule.lines) {
        for (std::size_t si = 0; si < line.stops.size(); ++si) {
            if (line.stops[si] != stop_id) continue;
            served = true;
            if (!(line.period > 0.0)) continue;
            const double lag = line.time_to_stop(si);
            for (double offset : line.offsets) {
                const double first = offset + lag;
                // Smallest k >= 0 with first + k * period >= t0.
                double k = std::max(0.0, std::ceil((t0 - first) / line.period));
                for (double t = first + k * line.period; t < t1; k += 1.0, t = first + k * line.period) {
                    if (t >= t0) out.push_back(t);
                }
            }
        }
    }
    if (!served) throw ScheduleError("UnknownStop: " + stop_id);
    std::sort(out.begin(), out.end());
    return out;
}

double repeating_horizon(const TransitSchedule& schedule) {
    long long horizon = 1;
    bool integral = true;
    double max_period = 0.0;
    for (const auto& line : schedule.lines) {
        max_period = std::max(max_period, line.period);
        const double r = std::round(line.period);
        if (std::abs(r - line.period) > 1e-9 || r <= 0) {
            integral = false;
            continue;
        }
        horizon = std::lcm(horizon, static_cast<long long>(r));
        if (horizon > 1'000'000) integral = false;
    }
    if (!integral) return max_period * static_cast<double>(std::max<std::size_t>(1, schedule.lines.size()));
    return static_cast<double>(horizon);
}

ValidationReport validate_schedule(const TransitSchedule& schedule) {
    ValidationReport report;
    std::set<std::string> ids;
    std::set<std::string> stops;
    double max_start = 0.0;
    for (const auto& line : schedule.lines) {
        if (!ids.insert(line.id).second) report.push_back({Severity::error, line.id, "duplicate line id"});
        if (!(line.period > 0.0)) report.push_back({Severity::error, line.id, "period must be positive"});
        if (line.offsets.empty()) report.push_back({Severity::error, line.id, "line needs at least one offset"});
        if (line.stops.empty()) report.push_back({Severity::error, line.id, "line serves no stops"});
        if (!line.stops.empty() && line.run_times.size() != line.stops.size() - 1) {
            report.push_back({Severity::error, line.id, "run_times needs one entry per consecutive stop pair"});
        }
        for (double r : line.run_times) {
            if (!(r > 0.0)) report.push_back({Severity::error, line.id, "run times must be positive"});
        }
        for (double o : line.offsets) {
            if (o < 0.0) report.push_back({Severity::error, line.id, "offsets must be non-negative"});
            max_start = std::max(max_start, o + line.time_to_stop(line.stops.size()));
        }
        stops.insert(line.stops.begin(), line.stops.end());
    }
    if (has_errors(report)) return report;

    const double window = 3.0 * repeating_horizon(schedule) + max_start;
    for (const auto& stop : stops) {
        const auto arrivals = transit_arrivals(schedule, stop, 0.0, window);
        for (std::size_t i = 1; i < arrivals.size(); ++i) {
            const double gap = arrivals[i] - arrivals[i - 1];
            if (gap < kMinHeadway - 1e-9 || gap > kMaxHeadway + 1e-9) {
                char buf[200];
                std::snprintf(buf, sizeof buf, "headway %.0f s between arrivals at t=%.0f s and t=%.0f s outside [%.0f, %.0f] s", gap,
                              arrivals[i - 1], arrivals[i], kMinHeadway, kMaxHeadway);
                report.push_back({Severity::error, stop, buf});
                break;
            }
        }
    }
    return report;
}

ValidationReport validate_schedule_against(const TransitSchedule& schedule, const SiteMap& site, const ArchetypeCatalog& catalog) {
    ValidationReport report;
    for (const auto& line : schedule.lines) {
        const Feature* track = site.find(line.track_id);
        if (!track || track->kind != FeatureKind::tram_track) {
            report.push_back({Severity::error, line.id, "track '" + line.track_id + "' is not a tram_track in the site"});
            continue;
        }
        if (line.tram_archetype >= catalog.trams.size()) {
            report.push_back({Severity::error, line.id, "tram_archetype out of catalog range"});
            continue;
        }
        const ArcPath arc(track->geometry);
        const auto& tram = catalog.trams[line.tram_archetype];
        double last_s = -1.0;
        for (std::size_t si = 0; si < line.stops.size(); ++si) {
            const auto& stop_id = line.stops[si];
            const Feature* stop = site.find(stop_id);
            if (!stop || stop->kind != FeatureKind::stop) {
                report.push_back({Severity::error, line.id, "stop '" + stop_id + "' is not a stop in the site"});
                continue;
            }
            if (stop->level != track->level || !polyline_intersects_polygon(track->geometry, stop->geometry)) {
                report.push_back({Severity::error, line.id, "stop '" + stop_id + "' does not lie on track '" + line.track_id + "'"});
                continue;
            }
            const double s = arc.project(centroid(stop->geometry));
            if (s <= last_s) report.push_back({Severity::error, line.id, "stops are not in track order"});
            if (si > 0 && last_s >= 0.0 && si - 1 < line.run_times.size()) {
                const double moving = line.run_times[si - 1] - tram.dwell;
                if (moving > 0.0 && (s - last_s) / moving > tram.max_speed) {
                    report.push_back({Severity::error, line.id, "run time to '" + stop_id + "' needs more than the tram's max speed"});
                }
            }
            last_s = s;
        }
        for (double r : line.run_times) {
            if (r <= tram.dwell) report.push_back({Severity::error, line.id, "run time does not exceed the tram dwell time"});
        }
    }
    return report;
}

}  // namespace hubsim
