#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hubsim/geometry.hpp"

namespace hubsim {

using LevelId = int;

enum class FeatureKind {
    walk_surface,
    road_lane,
    tram_track,
    stop,
    connector,
    guide_strip,
    obstacle,
    signal_head,
    spawn_point,
    crossing,
};

std::string_view to_string(FeatureKind k);
std::optional<FeatureKind> feature_kind_from_string(std::string_view s);

// Polygon kinds carry a closed ring, the rest an open polyline.
bool kind_uses_polygon(FeatureKind k);

struct Feature {
    std::string id;
    LevelId level = 0;
    FeatureKind kind = FeatureKind::walk_surface;
    std::vector<Vec2> geometry;
    nlohmann::json props = nlohmann::json::object();

    bool operator==(const Feature&) const = default;

    double prop_number(const std::string& key, double fallback) const;
    std::string prop_string(const std::string& key, const std::string& fallback = {}) const;
    bool prop_bool(const std::string& key, bool fallback) const;
};

enum class ConnectorKind { elevator, stairs };

// Typed view of a connector's props.
struct ConnectorInfo {
    ConnectorKind kind = ConnectorKind::stairs;
    LevelId level_a = 0;
    LevelId level_b = 0;
    bool operational = true;
    std::map<LevelId, Vec2> anchors;

    double traversal_length() const { return kind == ConnectorKind::elevator ? 10.0 : 15.0; }
    LevelId other_level(LevelId from) const { return from == level_a ? level_b : level_a; }
    bool joins(LevelId l) const { return l == level_a || l == level_b; }
};

ConnectorInfo connector_info(const Feature& f);

struct SiteMap {
    int format_version = 1;
    std::string name;
    double width = 0.0;
    double height = 0.0;
    std::vector<LevelId> levels;
    std::vector<Feature> features;

    Rect bounds() const { return {0.0, 0.0, width, height}; }
    const Feature* find(std::string_view id) const;
    Feature* find(std::string_view id);
    bool has_level(LevelId l) const;
    std::vector<const Feature*> of_kind(FeatureKind k) const;
};

enum class SiteErrorCode { MalformedDocument, UnknownKind, GeometryError, DanglingReference };

std::string_view to_string(SiteErrorCode c);

class SiteError : public std::runtime_error {
public:
    SiteError(SiteErrorCode code, std::string feature_id, const std::string& message);

    SiteErrorCode code() const { return code_; }
    const std::string& feature_id() const { return feature_id_; }

private:
    SiteErrorCode code_;
    std::string feature_id_;
};

/// Parses and structurally validates a site document. Unknown top-level keys
/// are reported through `warnings` when given and otherwise ignored.
SiteMap load_site(std::string_view text, std::vector<std::string>* warnings = nullptr);
SiteMap load_site_file(const std::string& path, std::vector<std::string>* warnings = nullptr);

std::string serialize_site(const SiteMap& site);

// FNV-1a over the canonical serialization, as 16 hex digits.
std::string site_digest(const SiteMap& site);

enum class Severity { error, warning };

struct Issue {
    Severity severity = Severity::error;
    std::string subject;
    std::string message;

    bool operator==(const Issue&) const = default;
};

using ValidationReport = std::vector<Issue>;

bool has_errors(const ValidationReport& report);
nlohmann::json report_to_json(const ValidationReport& report, const std::string& source);

/// Cross-feature consistency checks; empty iff the site is fully consistent.
ValidationReport validate_site(const SiteMap& site);

// Whether p lies on a walk_surface or crossing of the level.
bool on_walk_area(const SiteMap& site, LevelId level, Vec2 p);

}  // namespace hubsim
