#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace hubsim {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double k) const { return {x * k, y * k}; }
    constexpr Vec2& operator+=(Vec2 o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    constexpr bool operator==(const Vec2&) const = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double length(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) { return length(a - b); }

inline Vec2 normalized(Vec2 v) {
    const double n = length(v);
    return n > 0.0 ? v * (1.0 / n) : Vec2{};
}

using Polyline = std::vector<Vec2>;
using Polygon = std::vector<Vec2>;

struct Rect {
    double min_x = 0.0;
    double min_y = 0.0;
    double max_x = 0.0;
    double max_y = 0.0;

    bool contains(Vec2 p) const {
        return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
    }
};

// Even-odd rule. Points exactly on an edge count as inside.
bool point_in_polygon(Vec2 p, std::span<const Vec2> poly);

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b);
Vec2 closest_point_on_segment(Vec2 p, Vec2 a, Vec2 b);

double distance_to_polyline(Vec2 p, std::span<const Vec2> line);

// Zero when p is inside the polygon.
double distance_to_polygon(Vec2 p, std::span<const Vec2> poly);

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

// True when some pair of non-adjacent edges touch.
bool polygon_self_intersects(std::span<const Vec2> poly);

bool polyline_intersects_polygon(std::span<const Vec2> line, std::span<const Vec2> poly);
bool polygons_intersect(std::span<const Vec2> a, std::span<const Vec2> b);

// Minimum distance between a closed polygon and an open polyline (0 on overlap).
double polygon_polyline_distance(std::span<const Vec2> poly, std::span<const Vec2> line);

Vec2 centroid(std::span<const Vec2> pts);
Rect bounding_box(std::span<const Vec2> pts);
double polyline_length(std::span<const Vec2> line);

// Arc-length parametrised polyline with projection support.
class ArcPath {
public:
    ArcPath() = default;
    explicit ArcPath(Polyline pts);

    const Polyline& points() const { return pts_; }
    const std::vector<double>& cumulative() const { return cum_; }
    double total_length() const { return cum_.empty() ? 0.0 : cum_.back(); }

    Vec2 point_at(double s) const;
    Vec2 direction_at(double s) const;
    double project(Vec2 p) const;

private:
    Polyline pts_;
    std::vector<double> cum_;
};

std::vector<Polygon> translate(const std::vector<Polygon>& polys, Vec2 offset);
Polygon translate(const Polygon& poly, Vec2 offset);

}  // namespace hubsim
