#pragma once

#include <cmath>

namespace pid {

/// Planar vector used for granule kinematics and contact geometry.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(const Vec2& o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    Vec2& operator-=(const Vec2& o) {
        x -= o.x;
        y -= o.y;
        return *this;
    }
};

inline Vec2 operator*(double s, const Vec2& v) { return {s * v.x, s * v.y}; }

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }

/// z-component of the planar cross product a x b.
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

inline double norm(const Vec2& v) { return std::sqrt(v.x * v.x + v.y * v.y); }

/// Counterclockwise 90-degree rotation; perp(n) is the tangent convention everywhere.
inline Vec2 perp(const Vec2& v) { return {-v.y, v.x}; }

}  // namespace pid
