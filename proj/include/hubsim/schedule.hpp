#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hubsim/catalog.hpp"
#include "hubsim/site.hpp"

namespace hubsim {

inline constexpr double kMinHeadway = 300.0;
inline constexpr double kMaxHeadway = 600.0;

struct TransitLine {
    std::string id;
    std::string track_id;
    std::vector<std::string> stops;
    // Arrival times at the first stop within one period, seconds.
    std::vector<double> offsets;
    double period = 0.0;
    // Arrival-to-arrival times between consecutive stops (dwell included).
    std::vector<double> run_times;
    std::size_t tram_archetype = 0;

    // Time from the first-stop arrival to the arrival at stop `index`.
    double time_to_stop(std::size_t index) const;
};

struct TransitSchedule {
    std::vector<TransitLine> lines;

    const TransitLine* find(std::string_view line_id) const;
};

class ScheduleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

TransitSchedule load_schedule(std::string_view text);
TransitSchedule load_schedule_file(const std::string& path);

/// All arrivals at `stop_id` in [t0, t1), ascending, merged over every line
/// serving the stop. Throws ScheduleError ("UnknownStop") when no line serves it.
std::vector<double> transit_arrivals(const TransitSchedule& schedule, const std::string& stop_id, double t0, double t1);

// Length of simulated time after which every stop's arrival pattern repeats.
double repeating_horizon(const TransitSchedule& schedule);

ValidationReport validate_schedule(const TransitSchedule& schedule);
// Stops and tracks exist in the site, stops lie on the line's track, dwell fits in run times.
ValidationReport validate_schedule_against(const TransitSchedule& schedule, const SiteMap& site, const ArchetypeCatalog& catalog);

}  // namespace hubsim
