#pragma once

// Small 2D/3D vector types and the polygon predicates shared by the
// tessellation, slicing and toolpath code. All lengths are millimeters.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lamina {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
    friend Vec2 operator*(double s, Vec2 a) { return a * s; }
    friend bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double length(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return length(b - a); }

// x first, then y; used wherever a deterministic vertex order is needed.
inline bool lex_less(Vec2 a, Vec2 b) {
    if (a.x != b.x) return a.x < b.x;
    return a.y < b.y;
}

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
    friend bool operator==(Vec3 a, Vec3 b) { return a.x == b.x && a.y == b.y && a.z == b.z; }
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double length(Vec3 a) { return std::sqrt(a.x * a.x + a.y * a.y + a.z * a.z); }

inline bool lex_less(const Vec3& a, const Vec3& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.y != b.y) return a.y < b.y;
    return a.z < b.z;
}

struct Segment2 {
    Vec2 a;
    Vec2 b;
};

struct Box2 {
    double min_x = std::numeric_limits<double>::infinity();
    double min_y = std::numeric_limits<double>::infinity();
    double max_x = -std::numeric_limits<double>::infinity();
    double max_y = -std::numeric_limits<double>::infinity();

    void expand(Vec2 p) {
        min_x = std::min(min_x, p.x);
        min_y = std::min(min_y, p.y);
        max_x = std::max(max_x, p.x);
        max_y = std::max(max_y, p.y);
    }
    void expand(const Box2& o) {
        min_x = std::min(min_x, o.min_x);
        min_y = std::min(min_y, o.min_y);
        max_x = std::max(max_x, o.max_x);
        max_y = std::max(max_y, o.max_y);
    }
    bool empty() const { return min_x > max_x; }
    double width() const { return max_x - min_x; }
    double height() const { return max_y - min_y; }
    bool contains(const Box2& o) const {
        return o.min_x >= min_x && o.max_x <= max_x && o.min_y >= min_y && o.max_y <= max_y;
    }
};

// Twice the signed area is the shoelace sum; positive means counter-clockwise.
inline double ring_signed_area(std::span<const Vec2> ring) {
    double sum2 = 0.0;
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 p = ring[i];
        const Vec2 q = ring[(i + 1) % n];
        sum2 += cross(p, q);
    }
    return 0.5 * sum2;
}

inline double ring_perimeter(std::span<const Vec2> ring) {
    double len = 0.0;
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i)
        len += distance(ring[i], ring[(i + 1) % n]);
    return len;
}

inline Box2 ring_bounds(std::span<const Vec2> ring) {
    Box2 box;
    for (const Vec2& p : ring) box.expand(p);
    return box;
}

// Even-odd rule with a half-open edge test so lattice-aligned query points
// do not double count vertices.
inline bool point_in_ring(Vec2 p, std::span<const Vec2> ring) {
    bool inside = false;
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = ring[i];
        const Vec2 b = ring[(i + 1) % n];
        if ((a.y <= p.y) != (b.y <= p.y)) {
            const double x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (p.x < x_cross) inside = !inside;
        }
    }
    return inside;
}

namespace detail {

inline int orientation_sign(Vec2 a, Vec2 b, Vec2 c) {
    const double v = cross(b - a, c - a);
    if (v > 0.0) return 1;
    if (v < 0.0) return -1;
    return 0;
}

inline bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

}  // namespace detail

// True when the closed segments [a,b] and [c,d] share at least one point,
// including endpoint contact and collinear overlap.
inline bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    using detail::on_segment;
    using detail::orientation_sign;
    const int d1 = orientation_sign(c, d, a);
    const int d2 = orientation_sign(c, d, b);
    const int d3 = orientation_sign(a, b, c);
    const int d4 = orientation_sign(a, b, d);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
        ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    if (d1 == 0 && on_segment(c, d, a)) return true;
    if (d2 == 0 && on_segment(c, d, b)) return true;
    if (d3 == 0 && on_segment(a, b, c)) return true;
    if (d4 == 0 && on_segment(a, b, d)) return true;
    return false;
}

// Any contact between non-adjacent edges of the implicitly closed ring.
inline bool ring_self_intersects(std::span<const Vec2> ring) {
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = ring[i];
        const Vec2 b = ring[(i + 1) % n];
        const double lo_x = std::min(a.x, b.x), hi_x = std::max(a.x, b.x);
        const double lo_y = std::min(a.y, b.y), hi_y = std::max(a.y, b.y);
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            if (adjacent) continue;
            const Vec2 c = ring[j];
            const Vec2 d = ring[(j + 1) % n];
            if (std::max(c.x, d.x) < lo_x || std::min(c.x, d.x) > hi_x ||
                std::max(c.y, d.y) < lo_y || std::min(c.y, d.y) > hi_y)
                continue;
            if (segments_intersect(a, b, c, d)) return true;
        }
    }
    return false;
}

// Any contact between an edge of ring a and an edge of ring b.
inline bool rings_intersect(std::span<const Vec2> a, std::span<const Vec2> b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Vec2 p = a[i];
        const Vec2 q = a[(i + 1) % a.size()];
        const double lo_x = std::min(p.x, q.x), hi_x = std::max(p.x, q.x);
        const double lo_y = std::min(p.y, q.y), hi_y = std::max(p.y, q.y);
        for (std::size_t j = 0; j < b.size(); ++j) {
            const Vec2 r = b[j];
            const Vec2 s = b[(j + 1) % b.size()];
            if (std::max(r.x, s.x) < lo_x || std::min(r.x, s.x) > hi_x ||
                std::max(r.y, s.y) < lo_y || std::min(r.y, s.y) > hi_y)
                continue;
            if (segments_intersect(p, q, r, s)) return true;
        }
    }
    return false;
}

}  // namespace lamina
