#include "hubsim/geometry.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace hubsim {

bool point_in_polygon(Vec2 p, std::span<const Vec2> poly) {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 a = poly[j];
        const Vec2 b = poly[i];
        if (distance_to_segment(p, a, b) <= 1e-12) return true;
        if ((b.y > p.y) != (a.y > p.y)) {
            const double x_at = (a.x - b.x) * (p.y - b.y) / (a.y - b.y) + b.x;
            if (p.x < x_at) inside = !inside;
        }
    }
    return inside;
}

Vec2 closest_point_on_segment(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 <= 0.0) return a;
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return a + ab * t;
}

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b) {
    return distance(p, closest_point_on_segment(p, a, b));
}

double distance_to_polyline(Vec2 p, std::span<const Vec2> line) {
    if (line.empty()) return std::numeric_limits<double>::infinity();
    if (line.size() == 1) return distance(p, line[0]);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
        best = std::min(best, distance_to_segment(p, line[i], line[i + 1]));
    }
    return best;
}

double distance_to_polygon(Vec2 p, std::span<const Vec2> poly) {
    if (point_in_polygon(p, poly)) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poly.size(); ++i) {
        best = std::min(best, distance_to_segment(p, poly[i], poly[(i + 1) % poly.size()]));
    }
    return best;
}

namespace {

int orientation(Vec2 a, Vec2 b, Vec2 c) {
    const double v = cross(b - a, c - a);
    if (std::abs(v) <= 1e-12) return 0;
    return v > 0 ? 1 : -1;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
    return std::min(a.x, b.x) - 1e-12 <= p.x && p.x <= std::max(a.x, b.x) + 1e-12 &&
           std::min(a.y, b.y) - 1e-12 <= p.y && p.y <= std::max(a.y, b.y) + 1e-12;
}

}  // namespace

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const int o1 = orientation(a, b, c);
    const int o2 = orientation(a, b, d);
    const int o3 = orientation(c, d, a);
    const int o4 = orientation(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

bool polygon_self_intersects(std::span<const Vec2> poly) {
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = poly[i];
        const Vec2 b = poly[(i + 1) % n];
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if (adjacent) continue;
            if (segments_intersect(a, b, poly[j], poly[(j + 1) % n])) return true;
        }
    }
    // Repeated vertices also make the ring degenerate.
    for (std::size_t i = 0; i < n; ++i) {
        if (poly[i] == poly[(i + 1) % n]) return true;
    }
    return false;
}

bool polyline_intersects_polygon(std::span<const Vec2> line, std::span<const Vec2> poly) {
    for (const Vec2& p : line) {
        if (point_in_polygon(p, poly)) return true;
    }
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
        for (std::size_t j = 0; j < poly.size(); ++j) {
            if (segments_intersect(line[i], line[i + 1], poly[j], poly[(j + 1) % poly.size()])) return true;
        }
    }
    return false;
}

bool polygons_intersect(std::span<const Vec2> a, std::span<const Vec2> b) {
    for (const Vec2& p : a) {
        if (point_in_polygon(p, b)) return true;
    }
    for (const Vec2& p : b) {
        if (point_in_polygon(p, a)) return true;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (segments_intersect(a[i], a[(i + 1) % a.size()], b[j], b[(j + 1) % b.size()])) return true;
        }
    }
    return false;
}

double polygon_polyline_distance(std::span<const Vec2> poly, std::span<const Vec2> line) {
    if (polyline_intersects_polygon(line, poly)) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (const Vec2& p : line) best = std::min(best, distance_to_polygon(p, poly));
    for (const Vec2& p : poly) best = std::min(best, distance_to_polyline(p, line));
    return best;
}

Vec2 centroid(std::span<const Vec2> pts) {
    Vec2 sum;
    for (const Vec2& p : pts) sum += p;
    return pts.empty() ? sum : sum * (1.0 / static_cast<double>(pts.size()));
}

Rect bounding_box(std::span<const Vec2> pts) {
    Rect r{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const Vec2& p : pts) {
        r.min_x = std::min(r.min_x, p.x);
        r.min_y = std::min(r.min_y, p.y);
        r.max_x = std::max(r.max_x, p.x);
        r.max_y = std::max(r.max_y, p.y);
    }
    return r;
}

double polyline_length(std::span<const Vec2> line) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < line.size(); ++i) total += distance(line[i], line[i + 1]);
    return total;
}

ArcPath::ArcPath(Polyline pts) : pts_(std::move(pts)) {
    if (pts_.size() < 2) throw std::invalid_argument("ArcPath needs at least two points");
    cum_.reserve(pts_.size());
    cum_.push_back(0.0);
    for (std::size_t i = 1; i < pts_.size(); ++i) cum_.push_back(cum_.back() + distance(pts_[i - 1], pts_[i]));
}

Vec2 ArcPath::point_at(double s) const {
    if (s <= 0.0) return pts_.front();
    if (s >= total_length()) return pts_.back();
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - cum_.begin()) - 1;
    const double seg = cum_[i + 1] - cum_[i];
    const double t = seg > 0.0 ? (s - cum_[i]) / seg : 0.0;
    return pts_[i] + (pts_[i + 1] - pts_[i]) * t;
}

Vec2 ArcPath::direction_at(double s) const {
    auto it = std::upper_bound(cum_.begin(), cum_.end(), std::clamp(s, 0.0, total_length()));
    std::size_t i = it == cum_.begin() ? 0 : static_cast<std::size_t>(it - cum_.begin()) - 1;
    i = std::min(i, pts_.size() - 2);
    return normalized(pts_[i + 1] - pts_[i]);
}

double ArcPath::project(Vec2 p) const {
    double best_d = std::numeric_limits<double>::infinity();
    double best_s = 0.0;
    for (std::size_t i = 0; i + 1 < pts_.size(); ++i) {
        const Vec2 q = closest_point_on_segment(p, pts_[i], pts_[i + 1]);
        const double d = distance(p, q);
        if (d < best_d) {
            best_d = d;
            best_s = cum_[i] + distance(pts_[i], q);
        }
    }
    return best_s;
}

Polygon translate(const Polygon& poly, Vec2 offset) {
    Polygon out;
    out.reserve(poly.size());
    for (const Vec2& p : poly) out.push_back(p + offset);
    return out;
}

std::vector<Polygon> translate(const std::vector<Polygon>& polys, Vec2 offset) {
    std::vector<Polygon> out;
    out.reserve(polys.size());
    for (const auto& p : polys) out.push_back(translate(p, offset));
    return out;
}

}  // namespace hubsim
