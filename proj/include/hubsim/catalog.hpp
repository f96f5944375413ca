#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hubsim/site.hpp"

namespace hubsim {

inline constexpr std::size_t kPedestrianArchetypes = 107;
inline constexpr std::size_t kVehicleArchetypes = 19;

struct PedestrianArchetype {
    std::string id;
    double walk_speed = 1.4;
    double radius = 0.3;
};

// Cyclists share the pedestrian agent model at a higher speed.
struct CyclistArchetype {
    std::string id;
    double speed = 4.0;
    double radius = 0.4;
};

struct VehicleArchetype {
    std::string id;
    double length = 4.5;
    double max_speed = 13.9;
    double accel = 2.5;
    double decel = 4.5;
};

struct TramArchetype {
    std::string id;
    double length = 30.0;
    double max_speed = 14.0;
    double dwell = 25.0;
};

struct ArchetypeCatalog {
    std::vector<PedestrianArchetype> pedestrians;
    std::vector<CyclistArchetype> cyclists;
    std::vector<VehicleArchetype> vehicles;
    std::vector<TramArchetype> trams;
};

// Throws std::runtime_error on malformed JSON or missing fields; range and
// cardinality rules are left to validate_catalog.
ArchetypeCatalog load_catalog(std::string_view text);
ArchetypeCatalog load_catalog_file(const std::string& path);

ValidationReport validate_catalog(const ArchetypeCatalog& catalog);

}  // namespace hubsim
