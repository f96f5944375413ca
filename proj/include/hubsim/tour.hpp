#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "hubsim/geometry.hpp"
#include "hubsim/site.hpp"

namespace hubsim {

struct WorldState;
struct InputFrame;

enum class BarrierKind { interrupted_guide_strip, cluttered_sidewalk, broken_elevator };

std::string_view to_string(BarrierKind k);
std::optional<BarrierKind> barrier_kind_from_string(std::string_view s);

struct AddGuideStripSegment {
    std::string guide_strip;
    Polyline polyline;
    bool operator==(const AddGuideStripSegment&) const = default;
};

struct ObstacleShift {
    std::string obstacle_id;
    Vec2 displacement;
    bool operator==(const ObstacleShift&) const = default;
};

struct ClearObstacles {
    // Strip whose corridor the obstacles must end up clear of.
    std::string guide_strip;
    std::vector<ObstacleShift> obstacles;
    double duration = 2.0;
    bool operator==(const ClearObstacles&) const = default;
};

struct ActivateArrowGuides {
    std::string broken_connector;
    std::string alternative_connector;
    bool operator==(const ActivateArrowGuides&) const = default;
};

using MutationSpec = std::variant<AddGuideStripSegment, ClearObstacles, ActivateArrowGuides>;

std::string_view mutation_name(const MutationSpec& m);

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    bool operator==(const Vec3&) const = default;
};

struct BarrierDef {
    std::string id;
    BarrierKind kind = BarrierKind::interrupted_guide_strip;
    LevelId level = 0;
    Vec2 trigger_center;
    double trigger_radius = 3.0;
    Vec3 marker_anchor;
    double cue_radius = 8.0;
    std::string info_text;
    MutationSpec resolution;
    bool operator==(const BarrierDef&) const = default;
};

struct StartPose {
    LevelId level = 0;
    Vec2 position;
    int heading = 0;
    bool operator==(const StartPose&) const = default;
};

struct BarrierScenario {
    std::string version = "1";
    StartPose start;
    std::vector<BarrierDef> barriers;
    double corridor_half_width = 0.6;
    bool operator==(const BarrierScenario&) const = default;
};

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

BarrierScenario load_scenario(std::string_view text);
BarrierScenario load_scenario_file(const std::string& path);
std::string scenario_digest(const BarrierScenario& scenario);
nlohmann::ordered_json scenario_to_json(const BarrierScenario& scenario);

/// Checks references against the site, trigger placement, radii and marker
/// distances, and that an arrow-guide alternative connector is operational.
ValidationReport validate_scenario(const BarrierScenario& scenario, const SiteMap& site);

enum class BarrierPhase { guided = 0, approached = 1, resolved = 2 };

std::string_view to_string(BarrierPhase p);

struct PathPoint {
    LevelId level = 0;
    Vec2 pos;
    bool operator==(const PathPoint&) const = default;
};

using GroundPath = std::vector<PathPoint>;

struct TourState {
    std::size_t target_index = 0;
    std::vector<BarrierPhase> phases;
    std::vector<bool> cued;
    GroundPath guided_path;
    // Walk node the guided path was last computed from.
    int guided_from = -1;
    bool completed = false;
    bool completion_emitted = false;
};

struct MutationRecord {
    std::string barrier_id;
    std::size_t barrier_index = 0;
    std::string kind;
    std::uint64_t tick = 0;
    // AddGuideStripSegment
    std::string guide_strip;
    Polyline polyline;
    // ClearObstacles
    std::vector<ObstacleShift> obstacles;
    double duration = 0.0;
    // ActivateArrowGuides
    GroundPath arrows;

    bool operator==(const MutationRecord&) const = default;
};

// Runs the linear obstacle displacement of a ClearObstacles resolution.
struct ObstacleAnimation {
    std::size_t barrier_index = 0;
    std::vector<std::string> obstacle_ids;
    std::vector<Polygon> origins;
    std::vector<Vec2> displacements;
    std::int64_t total_ticks = 0;
    std::int64_t elapsed_ticks = 0;
    bool operator==(const ObstacleAnimation&) const = default;
};

enum class TourErrorCode { UnreachableBarrier, NoPath, AlreadyApplied, DanglingReference };

class TourError : public std::runtime_error {
public:
    TourError(TourErrorCode code, std::string subject, const std::string& message);
    TourErrorCode code() const { return code_; }
    const std::string& subject() const { return subject_; }

private:
    TourErrorCode code_;
    std::string subject_;
};

/// Phases all Guided, target 0, guided path toward barrier 0. Throws
/// TourError(UnreachableBarrier) naming the first barrier without a walk route.
TourState init_tour(const WorldState& world);

/// Ground path from the walk node nearest `pos` to the node nearest the
/// barrier's trigger centre, never through a non-operational connector.
/// Throws TourError(NoPath).
GroundPath guided_path(const WorldState& world, LevelId level, Vec2 pos, const BarrierDef& target);

/// Applies one barrier's resolution to the runtime geometry and appends the record.
MutationRecord apply_resolution(WorldState& world, std::size_t barrier_index);

// Phase 7 of the step.
void advance_tour(WorldState& world, const InputFrame& input);

// One step of any running obstacle animation; rebuilds the walk graph on completion.
void advance_animations(WorldState& world);

}  // namespace hubsim
