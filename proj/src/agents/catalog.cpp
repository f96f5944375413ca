#include "hubsim/catalog.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hubsim {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const nlohmann::json& array_field(const nlohmann::json& doc, const char* key, bool required) {
    static const nlohmann::json empty = nlohmann::json::array();
    if (!doc.contains(key)) {
        if (required) throw std::runtime_error(std::string("catalog is missing '") + key + "'");
        return empty;
    }
    if (!doc[key].is_array()) throw std::runtime_error(std::string("catalog '") + key + "' must be an array");
    return doc[key];
}

std::string fmt_range(const char* what, const std::string& id, double v, double lo, double hi) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s %.3f of '%s' outside [%.2f, %.2f]", what, v, id.c_str(), lo, hi);
    return buf;
}

}  // namespace

ArchetypeCatalog load_catalog(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(std::string("catalog is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw std::runtime_error("catalog must be a JSON object");

    ArchetypeCatalog cat;
    try {
        for (const auto& p : array_field(doc, "pedestrians", true)) {
            cat.pedestrians.push_back({p.at("id").get<std::string>(), p.at("walk_speed").get<double>(), p.at("radius").get<double>()});
        }
        for (const auto& c : array_field(doc, "cyclists", false)) {
            cat.cyclists.push_back({c.at("id").get<std::string>(), c.at("speed").get<double>(), c.at("radius").get<double>()});
        }
        for (const auto& v : array_field(doc, "vehicles", true)) {
            cat.vehicles.push_back({v.at("id").get<std::string>(), v.at("length").get<double>(), v.at("max_speed").get<double>(),
                                    v.at("accel").get<double>(), v.at("decel").get<double>()});
        }
        for (const auto& t : array_field(doc, "trams", true)) {
            cat.trams.push_back({t.at("id").get<std::string>(), t.at("length").get<double>(), t.at("max_speed").get<double>(),
                                 t.at("dwell").get<double>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("catalog entry malformed: ") + e.what());
    }
    return cat;
}

ArchetypeCatalog load_catalog_file(const std::string& path) { return load_catalog(read_file(path)); }

ValidationReport validate_catalog(const ArchetypeCatalog& catalog) {
    ValidationReport report;
    if (catalog.pedestrians.size() != kPedestrianArchetypes) {
        report.push_back({Severity::error, "pedestrians",
                          "catalog has " + std::to_string(catalog.pedestrians.size()) + " pedestrian archetypes, required count is " +
                              std::to_string(kPedestrianArchetypes)});
    }
    if (catalog.vehicles.size() != kVehicleArchetypes) {
        report.push_back({Severity::error, "vehicles",
                          "catalog has " + std::to_string(catalog.vehicles.size()) + " vehicle archetypes, required count is " +
                              std::to_string(kVehicleArchetypes)});
    }
    if (catalog.trams.empty()) report.push_back({Severity::error, "trams", "catalog needs at least one tram archetype"});

    for (const auto& p : catalog.pedestrians) {
        if (p.walk_speed < 1.0 || p.walk_speed > 1.8) report.push_back({Severity::error, p.id, fmt_range("walk_speed", p.id, p.walk_speed, 1.0, 1.8)});
        if (p.radius < 0.25 || p.radius > 0.4) report.push_back({Severity::error, p.id, fmt_range("radius", p.id, p.radius, 0.25, 0.4)});
    }
    for (const auto& c : catalog.cyclists) {
        if (c.speed <= 1.8 || c.speed > 5.0) report.push_back({Severity::error, c.id, fmt_range("cyclist speed", c.id, c.speed, 1.8, 5.0)});
        if (c.radius < 0.25 || c.radius > 0.6) report.push_back({Severity::error, c.id, fmt_range("radius", c.id, c.radius, 0.25, 0.6)});
    }
    for (const auto& v : catalog.vehicles) {
        if (v.length < 3.5 || v.length > 6.0) report.push_back({Severity::error, v.id, fmt_range("length", v.id, v.length, 3.5, 6.0)});
        if (!(v.max_speed > 0.0) || !(v.accel > 0.0) || !(v.decel > 0.0)) {
            report.push_back({Severity::error, v.id, "max_speed, accel and decel must be positive"});
        }
    }
    for (const auto& t : catalog.trams) {
        if (!(t.length > 0.0) || !(t.max_speed > 0.0) || !(t.dwell > 0.0)) {
            report.push_back({Severity::error, t.id, "tram length, max_speed and dwell must be positive"});
        }
    }
    return report;
}

}  // namespace hubsim
