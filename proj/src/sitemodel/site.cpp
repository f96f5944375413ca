#include "hubsim/site.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "hubsim/hash.hpp"

namespace hubsim {

namespace {

constexpr std::pair<FeatureKind, std::string_view> kKindNames[] = {
    {FeatureKind::walk_surface, "walk_surface"}, {FeatureKind::road_lane, "road_lane"},
    {FeatureKind::tram_track, "tram_track"},     {FeatureKind::stop, "stop"},
    {FeatureKind::connector, "connector"},       {FeatureKind::guide_strip, "guide_strip"},
    {FeatureKind::obstacle, "obstacle"},         {FeatureKind::signal_head, "signal_head"},
    {FeatureKind::spawn_point, "spawn_point"},   {FeatureKind::crossing, "crossing"},
};

constexpr double kMaxExtent = 1000.0;

[[noreturn]] void fail(SiteErrorCode code, const std::string& id, const std::string& msg) {
    throw SiteError(code, id, msg);
}

std::vector<Vec2> parse_points(const nlohmann::json& arr, const std::string& id) {
    if (!arr.is_array()) fail(SiteErrorCode::MalformedDocument, id, "geometry must be an array of [x, y] pairs");
    std::vector<Vec2> pts;
    pts.reserve(arr.size());
    for (const auto& p : arr) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
            fail(SiteErrorCode::MalformedDocument, id, "vertex must be a [x, y] number pair");
        }
        pts.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    return pts;
}

Feature parse_feature(const nlohmann::json& j, const SiteMap& site) {
    if (!j.is_object()) fail(SiteErrorCode::MalformedDocument, "", "feature must be an object");
    if (!j.contains("id") || !j["id"].is_string()) fail(SiteErrorCode::MalformedDocument, "", "feature without string id");
    Feature f;
    f.id = j["id"].get<std::string>();
    if (f.id.empty()) fail(SiteErrorCode::MalformedDocument, f.id, "empty feature id");

    if (!j.contains("kind") || !j["kind"].is_string()) fail(SiteErrorCode::MalformedDocument, f.id, "feature without kind");
    const auto kind_name = j["kind"].get<std::string>();
    const auto kind = feature_kind_from_string(kind_name);
    if (!kind) fail(SiteErrorCode::UnknownKind, f.id, "unknown feature kind '" + kind_name + "' on feature '" + f.id + "'");
    f.kind = *kind;

    if (!j.contains("level") || !j["level"].is_number_integer()) {
        fail(SiteErrorCode::MalformedDocument, f.id, "feature level must be an integer");
    }
    f.level = j["level"].get<int>();
    if (!site.has_level(f.level)) {
        fail(SiteErrorCode::DanglingReference, f.id, "feature '" + f.id + "' references undeclared level " + std::to_string(f.level));
    }

    const bool polygon = kind_uses_polygon(f.kind);
    const char* key = polygon ? "polygon" : "polyline";
    if (!j.contains(key)) {
        fail(SiteErrorCode::MalformedDocument, f.id, std::string("feature of kind ") + std::string(to_string(f.kind)) + " needs '" + key + "'");
    }
    f.geometry = parse_points(j[key], f.id);
    if (polygon && f.geometry.size() < 3) fail(SiteErrorCode::GeometryError, f.id, "polygon needs at least 3 vertices");
    const std::size_t min_points = f.kind == FeatureKind::spawn_point ? 1 : 2;
    if (!polygon && f.geometry.size() < min_points) {
        fail(SiteErrorCode::GeometryError, f.id, "polyline needs at least " + std::to_string(min_points) + " vertices");
    }
    if (polygon && polygon_self_intersects(f.geometry)) fail(SiteErrorCode::GeometryError, f.id, "polygon is self-intersecting");
    for (const Vec2& p : f.geometry) {
        if (!site.bounds().contains(p)) fail(SiteErrorCode::GeometryError, f.id, "vertex outside site bounds");
    }

    if (j.contains("props")) {
        if (!j["props"].is_object()) fail(SiteErrorCode::MalformedDocument, f.id, "props must be an object");
        f.props = j["props"];
    }
    return f;
}

void require_feature(const SiteMap& site, const Feature& owner, const std::string& ref, FeatureKind kind) {
    const Feature* target = site.find(ref);
    if (!target || target->kind != kind) {
        fail(SiteErrorCode::DanglingReference, owner.id,
             "feature '" + owner.id + "' references missing " + std::string(to_string(kind)) + " '" + ref + "'");
    }
}

Vec2 mean_direction(const Feature& lane) {
    Vec2 sum;
    for (std::size_t i = 0; i + 1 < lane.geometry.size(); ++i) sum += normalized(lane.geometry[i + 1] - lane.geometry[i]);
    return sum;
}

void check_references(const SiteMap& site) {
    for (const Feature& f : site.features) {
        switch (f.kind) {
        case FeatureKind::road_lane: {
            const auto adj = f.prop_string("adjacent_lane_id");
            if (adj.empty()) break;
            require_feature(site, f, adj, FeatureKind::road_lane);
            const Feature& other = *site.find(adj);
            if (other.level != f.level) fail(SiteErrorCode::DanglingReference, f.id, "adjacent lane '" + adj + "' is on another level");
            if (dot(mean_direction(f), mean_direction(other)) <= 0.0) {
                fail(SiteErrorCode::GeometryError, f.id, "adjacent lane '" + adj + "' runs in the opposite direction");
            }
            break;
        }
        case FeatureKind::connector: {
            if (!f.props.contains("connects") || !f.props["connects"].is_array() || f.props["connects"].size() != 2) {
                fail(SiteErrorCode::MalformedDocument, f.id, "connector needs 'connects': [level, level]");
            }
            const auto kind = f.prop_string("connector_kind");
            if (kind != "elevator" && kind != "stairs") {
                fail(SiteErrorCode::MalformedDocument, f.id, "connector_kind must be elevator or stairs");
            }
            for (const auto& l : f.props["connects"]) {
                if (!l.is_number_integer() || !site.has_level(l.get<int>())) {
                    fail(SiteErrorCode::DanglingReference, f.id, "connector '" + f.id + "' joins an undeclared level");
                }
            }
            const auto info = connector_info(f);
            if (info.level_a == info.level_b) fail(SiteErrorCode::GeometryError, f.id, "connector joins a level to itself");
            if (!info.joins(f.level)) fail(SiteErrorCode::DanglingReference, f.id, "connector level is not one of the joined levels");
            for (LevelId l : {info.level_a, info.level_b}) {
                auto it = info.anchors.find(l);
                if (it == info.anchors.end()) {
                    fail(SiteErrorCode::MalformedDocument, f.id, "connector needs an anchor for level " + std::to_string(l));
                }
                if (!site.bounds().contains(it->second)) fail(SiteErrorCode::GeometryError, f.id, "anchor outside site bounds");
            }
            break;
        }
        case FeatureKind::signal_head: {
            if (!f.props.contains("lane_ids") || !f.props["lane_ids"].is_array()) {
                fail(SiteErrorCode::MalformedDocument, f.id, "signal_head needs 'lane_ids'");
            }
            for (const auto& l : f.props["lane_ids"]) require_feature(site, f, l.get<std::string>(), FeatureKind::road_lane);
            break;
        }
        case FeatureKind::spawn_point: {
            const auto agent = f.prop_string("agent_kind");
            if (agent != "vehicle" && agent != "pedestrian" && agent != "cyclist") {
                fail(SiteErrorCode::MalformedDocument, f.id, "spawn_point agent_kind must be vehicle, pedestrian or cyclist");
            }
            if (f.prop_number("rate", -1.0) < 0.0) fail(SiteErrorCode::MalformedDocument, f.id, "spawn_point needs a non-negative rate");
            if (agent == "vehicle") {
                require_feature(site, f, f.prop_string("lane_id"), FeatureKind::road_lane);
            } else if (f.props.contains("goals")) {
                for (const auto& g : f.props["goals"]) {
                    if (!g.is_string() || !site.find(g.get<std::string>())) {
                        fail(SiteErrorCode::DanglingReference, f.id, "spawn goal does not name a feature");
                    }
                }
            }
            break;
        }
        case FeatureKind::crossing: {
            const auto sig = f.prop_string("signal_head");
            if (!sig.empty()) require_feature(site, f, sig, FeatureKind::signal_head);
            break;
        }
        case FeatureKind::stop: {
            if (f.props.contains("line_ids") && !f.props["line_ids"].is_array()) {
                fail(SiteErrorCode::MalformedDocument, f.id, "line_ids must be an array");
            }
            break;
        }
        default:
            break;
        }
    }
}

}  // namespace

std::string_view to_string(FeatureKind k) {
    for (const auto& [kind, name] : kKindNames) {
        if (kind == k) return name;
    }
    return "?";
}

std::optional<FeatureKind> feature_kind_from_string(std::string_view s) {
    for (const auto& [kind, name] : kKindNames) {
        if (name == s) return kind;
    }
    return std::nullopt;
}

bool kind_uses_polygon(FeatureKind k) {
    switch (k) {
    case FeatureKind::walk_surface:
    case FeatureKind::stop:
    case FeatureKind::connector:
    case FeatureKind::obstacle:
    case FeatureKind::crossing:
        return true;
    default:
        return false;
    }
}

double Feature::prop_number(const std::string& key, double fallback) const {
    auto it = props.find(key);
    return it != props.end() && it->is_number() ? it->get<double>() : fallback;
}

std::string Feature::prop_string(const std::string& key, const std::string& fallback) const {
    auto it = props.find(key);
    return it != props.end() && it->is_string() ? it->get<std::string>() : fallback;
}

bool Feature::prop_bool(const std::string& key, bool fallback) const {
    auto it = props.find(key);
    return it != props.end() && it->is_boolean() ? it->get<bool>() : fallback;
}

ConnectorInfo connector_info(const Feature& f) {
    ConnectorInfo info;
    info.kind = f.prop_string("connector_kind") == "elevator" ? ConnectorKind::elevator : ConnectorKind::stairs;
    info.operational = f.prop_bool("operational", true);
    if (auto it = f.props.find("connects"); it != f.props.end() && it->is_array() && it->size() == 2) {
        info.level_a = (*it)[0].get<int>();
        info.level_b = (*it)[1].get<int>();
    }
    if (auto it = f.props.find("anchors"); it != f.props.end() && it->is_object()) {
        for (const auto& [key, val] : it->items()) {
            if (val.is_array() && val.size() == 2) {
                info.anchors[std::stoi(key)] = {val[0].get<double>(), val[1].get<double>()};
            }
        }
    }
    return info;
}

const Feature* SiteMap::find(std::string_view id) const {
    for (const Feature& f : features) {
        if (f.id == id) return &f;
    }
    return nullptr;
}

Feature* SiteMap::find(std::string_view id) {
    for (Feature& f : features) {
        if (f.id == id) return &f;
    }
    return nullptr;
}

bool SiteMap::has_level(LevelId l) const { return std::find(levels.begin(), levels.end(), l) != levels.end(); }

std::vector<const Feature*> SiteMap::of_kind(FeatureKind k) const {
    std::vector<const Feature*> out;
    for (const Feature& f : features) {
        if (f.kind == k) out.push_back(&f);
    }
    return out;
}

std::string_view to_string(SiteErrorCode c) {
    switch (c) {
    case SiteErrorCode::MalformedDocument: return "MalformedDocument";
    case SiteErrorCode::UnknownKind: return "UnknownKind";
    case SiteErrorCode::GeometryError: return "GeometryError";
    case SiteErrorCode::DanglingReference: return "DanglingReference";
    }
    return "?";
}

SiteError::SiteError(SiteErrorCode code, std::string feature_id, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), feature_id_(std::move(feature_id)) {}

SiteMap load_site(std::string_view text, std::vector<std::string>* warnings) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(SiteErrorCode::MalformedDocument, "", e.what());
    }
    if (!doc.is_object()) fail(SiteErrorCode::MalformedDocument, "", "site document must be a JSON object");

    static const std::set<std::string> known = {"format_version", "name", "bounds", "levels", "features"};
    for (const auto& [key, _] : doc.items()) {
        if (!known.contains(key) && warnings) warnings->push_back("ignoring unknown top-level key '" + key + "'");
    }

    SiteMap site;
    if (!doc.contains("format_version") || doc["format_version"] != 1) {
        fail(SiteErrorCode::MalformedDocument, "", "format_version must be 1");
    }
    site.name = doc.value("name", std::string{});

    const auto& bounds = doc.contains("bounds") ? doc["bounds"] : nlohmann::json{};
    if (!bounds.is_object() || !bounds.contains("w") || !bounds.contains("h") || !bounds["w"].is_number() ||
        !bounds["h"].is_number()) {
        fail(SiteErrorCode::MalformedDocument, "", "bounds must be {\"w\": number, \"h\": number}");
    }
    site.width = bounds["w"].get<double>();
    site.height = bounds["h"].get<double>();
    if (!(site.width > 0.0 && site.width <= kMaxExtent && site.height > 0.0 && site.height <= kMaxExtent)) {
        fail(SiteErrorCode::GeometryError, "", "bounds must be in (0, 1000] m on both axes");
    }

    if (!doc.contains("levels") || !doc["levels"].is_array() || doc["levels"].empty()) {
        fail(SiteErrorCode::MalformedDocument, "", "levels must be a non-empty array of integers");
    }
    for (const auto& l : doc["levels"]) {
        if (!l.is_number_integer()) fail(SiteErrorCode::MalformedDocument, "", "levels must be integers");
        if (site.has_level(l.get<int>())) fail(SiteErrorCode::MalformedDocument, "", "duplicate level");
        site.levels.push_back(l.get<int>());
    }

    if (!doc.contains("features") || !doc["features"].is_array()) {
        fail(SiteErrorCode::MalformedDocument, "", "features must be an array");
    }
    std::set<std::string> ids;
    for (const auto& fj : doc["features"]) {
        Feature f = parse_feature(fj, site);
        if (!ids.insert(f.id).second) fail(SiteErrorCode::MalformedDocument, f.id, "duplicate feature id '" + f.id + "'");
        site.features.push_back(std::move(f));
    }
    check_references(site);
    return site;
}

SiteMap load_site_file(const std::string& path, std::vector<std::string>* warnings) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_site(ss.str(), warnings);
}

std::string serialize_site(const SiteMap& site) {
    nlohmann::ordered_json doc;
    doc["format_version"] = site.format_version;
    doc["name"] = site.name;
    doc["bounds"] = {{"w", site.width}, {"h", site.height}};
    doc["levels"] = site.levels;
    auto features = nlohmann::ordered_json::array();
    for (const Feature& f : site.features) {
        nlohmann::ordered_json fj;
        fj["id"] = f.id;
        fj["kind"] = std::string(to_string(f.kind));
        fj["level"] = f.level;
        auto pts = nlohmann::ordered_json::array();
        for (const Vec2& p : f.geometry) pts.push_back({p.x, p.y});
        fj[kind_uses_polygon(f.kind) ? "polygon" : "polyline"] = std::move(pts);
        if (!f.props.empty()) fj["props"] = nlohmann::ordered_json::parse(f.props.dump());
        features.push_back(std::move(fj));
    }
    doc["features"] = std::move(features);
    return doc.dump(1);
}

std::string site_digest(const SiteMap& site) { return to_hex(fnv1a64(serialize_site(site))); }

bool has_errors(const ValidationReport& report) {
    return std::any_of(report.begin(), report.end(), [](const Issue& i) { return i.severity == Severity::error; });
}

nlohmann::json report_to_json(const ValidationReport& report, const std::string& source) {
    auto arr = nlohmann::json::array();
    for (const Issue& i : report) {
        arr.push_back({{"source", source},
                       {"severity", i.severity == Severity::error ? "error" : "warning"},
                       {"subject", i.subject},
                       {"message", i.message}});
    }
    return arr;
}

bool on_walk_area(const SiteMap& site, LevelId level, Vec2 p) {
    for (const Feature& f : site.features) {
        if (f.level != level) continue;
        if (f.kind != FeatureKind::walk_surface && f.kind != FeatureKind::crossing) continue;
        if (point_in_polygon(p, f.geometry)) return true;
    }
    return false;
}

ValidationReport validate_site(const SiteMap& site) {
    ValidationReport report;

    for (const Feature* stop : site.of_kind(FeatureKind::stop)) {
        bool served = false;
        for (const Feature& f : site.features) {
            if (f.level != stop->level) continue;
            if (f.kind != FeatureKind::tram_track && f.kind != FeatureKind::road_lane) continue;
            if (polyline_intersects_polygon(f.geometry, stop->geometry)) {
                served = true;
                break;
            }
        }
        if (!served) report.push_back({Severity::error, stop->id, "stop does not intersect any tram_track or road_lane"});
    }

    // Level reachability from the ground level through connectors.
    std::set<LevelId> used;
    for (const Feature& f : site.features) used.insert(f.level);
    std::set<LevelId> reached = {0};
    bool grew = true;
    while (grew) {
        grew = false;
        for (const Feature* c : site.of_kind(FeatureKind::connector)) {
            const auto info = connector_info(*c);
            if (reached.contains(info.level_a) != reached.contains(info.level_b)) {
                reached.insert(info.level_a);
                reached.insert(info.level_b);
                grew = true;
            }
        }
    }
    for (LevelId l : used) {
        if (!reached.contains(l)) report.push_back({Severity::error, "level " + std::to_string(l), "level " + std::to_string(l) + " unreachable"});
    }

    constexpr double kStripSampleStep = 0.25;
    for (const Feature* strip : site.of_kind(FeatureKind::guide_strip)) {
        std::vector<const Feature*> surfaces;
        for (const Feature* w : site.of_kind(FeatureKind::walk_surface)) {
            if (w->level == strip->level) surfaces.push_back(w);
        }
        const ArcPath path(strip->geometry);
        const auto samples = static_cast<long>(std::floor(path.total_length() / kStripSampleStep));
        for (long i = 0; i <= samples + 1; ++i) {
            const double s = std::min(path.total_length(), static_cast<double>(i) * kStripSampleStep);
            const Vec2 p = path.point_at(s);
            const bool inside = std::any_of(surfaces.begin(), surfaces.end(),
                                            [&](const Feature* w) { return point_in_polygon(p, w->geometry); });
            if (!inside) {
                char buf[96];
                std::snprintf(buf, sizeof buf, "guide strip leaves walk surfaces at (%.2f, %.2f)", p.x, p.y);
                report.push_back({Severity::error, strip->id, buf});
                break;
            }
        }
    }
    return report;
}

}  // namespace hubsim
