#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "swarm/error.hpp"

namespace swarm {

/// Planar point or displacement in meters. Components are always finite.
class Vec2 {
public:
    constexpr Vec2() = default;
    Vec2(double x, double y) : x_(x), y_(y) {
        if (!std::isfinite(x) || !std::isfinite(y)) {
            throw Error(ErrorCode::NonFinite,
                        "Vec2(" + std::to_string(x) + ", " + std::to_string(y) + ")");
        }
    }

    double x() const { return x_; }
    double y() const { return y_; }

    Vec2 operator+(Vec2 o) const { return {x_ + o.x_, y_ + o.y_}; }
    Vec2 operator-(Vec2 o) const { return {x_ - o.x_, y_ - o.y_}; }
    Vec2 operator-() const { return {-x_, -y_}; }
    Vec2 operator*(double s) const { return {x_ * s, y_ * s}; }
    Vec2 operator/(double s) const { return {x_ / s, y_ / s}; }
    Vec2& operator+=(Vec2 o) { return *this = *this + o; }
    Vec2& operator-=(Vec2 o) { return *this = *this - o; }

    bool operator==(const Vec2&) const = default;

    double dot(Vec2 o) const { return x_ * o.x_ + y_ * o.y_; }
    double cross(Vec2 o) const { return x_ * o.y_ - y_ * o.x_; }
    double norm() const { return std::hypot(x_, y_); }
    double squared_norm() const { return x_ * x_ + y_ * y_; }

    /// Unit vector in the same direction; throws ZeroDirection on the zero vector.
    Vec2 normalized() const {
        const double n = norm();
        if (n == 0.0) throw Error(ErrorCode::ZeroDirection, "cannot normalize zero vector");
        return {x_ / n, y_ / n};
    }

    /// Counter-clockwise rotation by `angle` radians.
    Vec2 rotated(double angle) const {
        const double c = std::cos(angle), s = std::sin(angle);
        return {c * x_ - s * y_, s * x_ + c * y_};
    }

private:
    double x_ = 0.0;
    double y_ = 0.0;
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

struct Circle {
    Vec2 center;
    double radius = 0.0;

    Circle() = default;
    Circle(Vec2 c, double r) : center(c), radius(r) {
        if (!(r >= 0.0) || !std::isfinite(r)) {
            throw Error(ErrorCode::InvalidArgument, "circle radius must be finite and >= 0");
        }
    }

    bool operator==(const Circle&) const = default;
};

enum class Role { Leader, Follower };

struct DroneState {
    int id = 0;
    Vec2 position;
    Vec2 velocity;
    double speed_limit = 0.0;
    Role role = Role::Follower;
    double energy_used = 0.0;
};

enum class Side { Left, On, Right };

inline constexpr double kSideTolerance = 1e-9;

inline double distance(Vec2 a, Vec2 b) { return (b - a).norm(); }

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::fmod(a, two_pi);
    if (a <= -std::numbers::pi) a += two_pi;
    if (a > std::numbers::pi) a -= two_pi;
    return a;
}

inline double bearing(Vec2 from, Vec2 to) {
    if (from == to) throw Error(ErrorCode::CoincidentPoints, "bearing of coincident points");
    const Vec2 d = to - from;
    return wrap_angle(std::atan2(d.y(), d.x()));
}

/// Which side of the directed line (line_point, line_dir) the point lies on.
inline Side signed_side(Vec2 p, Vec2 line_point, Vec2 line_dir) {
    const double len = line_dir.norm();
    if (len == 0.0) throw Error(ErrorCode::ZeroDirection, "line direction is zero");
    const double c = line_dir.cross(p - line_point) / len;
    if (c > kSideTolerance) return Side::Left;
    if (c < -kSideTolerance) return Side::Right;
    return Side::On;
}

/// Rigid frame whose +x axis points along `heading` (radians) with its origin
/// at `origin`. Used to put the CA grid in the swarm's direction of travel.
struct Frame2 {
    Vec2 origin;
    double heading = 0.0;

    Vec2 to_local(Vec2 world) const { return (world - origin).rotated(-heading); }
    Vec2 to_world(Vec2 local) const { return local.rotated(heading) + origin; }
    Vec2 dir_to_local(Vec2 world_dir) const { return world_dir.rotated(-heading); }
    Vec2 dir_to_world(Vec2 local_dir) const { return local_dir.rotated(heading); }
};

}  // namespace swarm
