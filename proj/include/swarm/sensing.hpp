#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "swarm/error.hpp"
#include "swarm/geometry.hpp"

namespace swarm {

/// Ground truth for one disc obstacle, known only to the simulator.
struct ObstacleTruth {
    Vec2 center;
    double radius = 1.0;
    Vec2 velocity;
};

/// What a drone's range sensor reports about a disc: nearest-point distance
/// plus the two tangent edges as seen from the observer.
struct EdgeDetection {
    int observer_id = 0;
    double D_obs = 0.0;
    double DR = 0.0;
    double DL = 0.0;
    double theta_R = 0.0;
    double theta_L = 0.0;
    double timestamp = 0.0;
};

enum class ObstacleMotion { Stationary, Approaching, Receding };

inline constexpr double kStationarySpeed = 1e-3;

struct ObstacleEstimate {
    double v_obs = 0.0;
    ObstacleMotion motion = ObstacleMotion::Stationary;
    double D_impact = 0.0;
    Vec2 point_of_impact;
    Circle danger_zone;
};

struct Impact {
    Vec2 point;
    double D_impact = 0.0;
    double time_to_impact = 0.0;
};

inline std::optional<EdgeDetection> detect(const DroneState& drone, const ObstacleTruth& obstacle,
                                           double detection_range, double t) {
    if (!(detection_range > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "detection_range must be > 0");
    }
    const double center_dist = distance(drone.position, obstacle.center);
    if (center_dist < obstacle.radius) {
        throw Error(ErrorCode::ObserverInsideObstacle,
                    "drone " + std::to_string(drone.id) + " is inside an obstacle");
    }
    const double nearest = center_dist - obstacle.radius;
    if (nearest > detection_range) return std::nullopt;

    // Tangent lines from the observer touch the disc at +-half_angle around the
    // line of sight; both tangent segments have the same length.
    const double half_angle = std::asin(std::min(1.0, obstacle.radius / center_dist));
    const double los = bearing(drone.position, obstacle.center);
    const double tangent_len =
        std::sqrt(std::max(0.0, center_dist * center_dist - obstacle.radius * obstacle.radius));

    EdgeDetection det;
    det.observer_id = drone.id;
    det.D_obs = nearest;
    det.DR = tangent_len;
    det.DL = tangent_len;
    det.theta_R = wrap_angle(los - half_angle);
    det.theta_L = wrap_angle(los + half_angle);
    det.timestamp = t;
    return det;
}

/// Half of the angle the obstacle subtends between its two edges.
inline double half_subtense(const EdgeDetection& det) {
    return 0.5 * std::abs(wrap_angle(det.theta_L - det.theta_R));
}

/// Disc radius recovered from the nearest distance and the edge angles.
inline double estimated_radius(const EdgeDetection& det) {
    const double s = std::sin(half_subtense(det));
    if (s >= 1.0) return det.D_obs;  // observer on the surface; radius unobservable
    return det.D_obs * s / (1.0 - s);
}

/// Disc center recovered from an observer position and its detection.
inline Vec2 estimated_center(Vec2 observer, const EdgeDetection& det) {
    const double los = det.theta_R + 0.5 * wrap_angle(det.theta_L - det.theta_R);
    const double range = det.D_obs + estimated_radius(det);
    return observer + Vec2(std::cos(los), std::sin(los)) * range;
}

/// Obstacle speed along the observer-obstacle axis from two range samples.
/// Positive means the obstacle closes the gap on its own (approaching).
inline double estimate_velocity(double d0, double d1, double v_uav, double t0, double t1) {
    if (!(t1 > t0)) throw Error(ErrorCode::NonpositiveInterval, "t1 must be greater than t0");
    if (d0 < 0.0 || d1 < 0.0) throw Error(ErrorCode::InvalidArgument, "distances must be >= 0");
    const double dt = t1 - t0;
    const double d_uav = v_uav * dt;
    const double d_obs = d0 - d_uav - d1;
    return d_obs / dt;
}

inline ObstacleMotion classify_motion(double v_obs) {
    if (std::abs(v_obs) <= kStationarySpeed) return ObstacleMotion::Stationary;
    return v_obs > 0.0 ? ObstacleMotion::Approaching : ObstacleMotion::Receding;
}

/// 1D closing model along the drone's heading. Empty when the gap never closes.
inline std::optional<Impact> try_compute_impact(const DroneState& drone, const EdgeDetection& det,
                                                double v_obs) {
    const double v_drone = drone.velocity.norm();
    const double closing =
        classify_motion(v_obs) == ObstacleMotion::Stationary ? v_drone : v_drone + v_obs;
    if (!(closing > 0.0)) return std::nullopt;

    const double tau = det.D_obs / closing;
    Impact impact;
    impact.time_to_impact = tau;
    impact.D_impact = v_drone * tau;
    impact.point = v_drone > 0.0 ? drone.position + drone.velocity * tau : drone.position;
    return impact;
}

inline Impact compute_impact(const DroneState& drone, const EdgeDetection& det, double v_obs) {
    auto impact = try_compute_impact(drone, det, v_obs);
    if (!impact) throw Error(ErrorCode::NoClosing, "relative closing speed is not positive");
    return *impact;
}

inline Circle danger_zone(Vec2 point_of_impact, double obstacle_radius, double safety_margin) {
    if (!(obstacle_radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "obstacle radius must be > 0");
    if (!(safety_margin >= 0.0)) throw Error(ErrorCode::InvalidArgument, "safety margin must be >= 0");
    return Circle(point_of_impact, obstacle_radius + safety_margin);
}

}  // namespace swarm
