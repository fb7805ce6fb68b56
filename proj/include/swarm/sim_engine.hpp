#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <numeric>
#include <optional>
#include <vector>

#include "swarm/ca_grid.hpp"
#include "swarm/error.hpp"
#include "swarm/ga_planner.hpp"
#include "swarm/geometry.hpp"
#include "swarm/registration.hpp"
#include "swarm/scenario.hpp"
#include "swarm/sensing.hpp"
#include "swarm/tps.hpp"

namespace swarm {

enum class Outcome { Arrived, Timeout, CollisionFault };

inline const char* to_string(Outcome o) {
    switch (o) {
    case Outcome::Arrived: return "arrived";
    case Outcome::Timeout: return "timeout";
    case Outcome::CollisionFault: return "collision_fault";
    }
    return "unknown";
}

struct DroneRecord {
    Vec2 position;
    Vec2 velocity;
    Role role = Role::Follower;
    int energy = 0;
};

struct TickRecord {
    double t = 0.0;
    std::vector<DroneRecord> drones;  // ascending drone id
    bool flag_obs = false;
    bool avoiding = false;
    double d_rms = 0.0;
    double e_tps = 0.0;
    int leader_id = 0;
    std::vector<double> pair_distances;  // (i, j) with i > j, i ascending then j ascending
    std::optional<Circle> danger_zone;
    int energy_total = 0;
    double min_separation = 0.0;
    double min_obstacle_clearance = std::numeric_limits<double>::infinity();
};

struct RunResult {
    Mode mode = Mode::CPSR;
    std::vector<int> ids;
    std::vector<TickRecord> trace;
    Outcome outcome = Outcome::Timeout;
    double mission_time = 0.0;
    std::optional<double> detection_time;
    std::optional<double> avoidance_end_time;
    /// Detection to re-formed; 0 when nothing was detected, empty when the
    /// swarm never re-formed.
    std::optional<double> reformation_time;
    double reform_threshold = 0.0;
    int total_energy = 0;
    double flight_distance = 0.0;
    int plans_adopted = 0;
    int plans_failed = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct LeaderSample {
    double t = 0.0;
    double d = 0.0;
    Vec2 observer;
    Vec2 los;
    Vec2 center;
};

struct Avoidance {
    std::size_t obstacle = 0;
    Frame2 frame;
    Chromosome plan;
    std::vector<std::vector<Vec2>> waypoints;  // world frame, one set per step
    std::vector<Vec2> predicted_centers;       // world frame, index = step
    Circle zone;
    int steps = 0;
    int step = 0;
    int tick_in_step = 0;
    int ticks_per_step = 1;
};

/// Sum of squared radial deviations of `rel` against `goal` (both centered).
inline double radial_error(const std::vector<Vec2>& rel, const std::vector<Vec2>& goal) {
    double f = 0.0;
    for (std::size_t i = 0; i < rel.size(); ++i) {
        const double d = goal[i].norm() - rel[i].norm();
        f += d * d;
    }
    return f;
}

/// Per-drone correction directions in the centroid frame (`rel` current,
/// `goal` assigned slots). The radial part closes each drone's distance to
/// the centroid exactly; the tangential part follows the straight line to
/// the slot, adjusted (least norm) so the corrections sum to zero and the
/// centroid does not drift. Falls back to straight lines when the scene is
/// collinear through its centroid.
inline std::vector<Vec2> contraction_field(const std::vector<Vec2>& rel, const std::vector<Vec2>& goal) {
    const std::size_t n = rel.size();
    std::vector<Vec2> straight(n), field(n), tangent(n);
    double sx = 0.0, sy = 0.0, axx = 0.0, axy = 0.0, ayy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        straight[i] = goal[i] - rel[i];
        const double rho = rel[i].norm();
        if (rho < 1e-9) {
            field[i] = straight[i];
            tangent[i] = Vec2{};
        } else {
            const Vec2 radial = rel[i] / rho;
            tangent[i] = Vec2(-radial.y(), radial.x());
            field[i] = radial * (goal[i].norm() - rho) + tangent[i] * straight[i].dot(tangent[i]);
        }
        sx += field[i].x();
        sy += field[i].y();
        axx += tangent[i].x() * tangent[i].x();
        axy += tangent[i].x() * tangent[i].y();
        ayy += tangent[i].y() * tangent[i].y();
    }
    const double det = axx * ayy - axy * axy;
    if (det < 1e-9) return straight;
    const double lx = -(ayy * sx - axy * sy) / det;
    const double ly = -(axx * sy - axy * sx) / det;
    for (std::size_t i = 0; i < n; ++i) field[i] = field[i] + tangent[i] * (tangent[i].x() * lx + tangent[i].y() * ly);
    return field;
}

struct Turn {
    double angle = 0.0;
    std::vector<std::size_t> relabel;
};

/// Rotation of `goal` about the origin, together with a relabeling among
/// slots of equal radius, that best fits `rel` in least squares. Drones in
/// `pinned` keep their slot. Candidates are seeded on a coarse angle grid and
/// refined in closed form.
inline Turn best_turn(const std::vector<Vec2>& rel, const std::vector<Vec2>& goal, const std::vector<bool>& pinned) {
    const std::size_t n = rel.size();
    double scale = 1.0;
    for (const Vec2& g : goal) scale = std::max(scale, g.norm());
    const double same = 1e-9 * scale;
    Turn best;
    best.relabel.resize(n);
    std::iota(best.relabel.begin(), best.relabel.end(), 0);
    double best_cost = std::numeric_limits<double>::infinity();
    constexpr int kSeeds = 24;
    for (int k = 0; k < kSeeds; ++k) {
        double angle = wrap_angle(2.0 * std::numbers::pi * k / kSeeds);
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        for (int round = 0; round < 3; ++round) {
            CostMatrix cost(n, std::vector<double>(n, -1.0));
            double worst = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (std::abs(goal[j].norm() - goal[i].norm()) <= same) {
                        cost[i][j] = (rel[i] - goal[j].rotated(angle)).squared_norm();
                        worst = std::max(worst, cost[i][j]);
                    }
            for (auto& row : cost)
                for (double& c : row)
                    if (c < 0.0) c = 1e3 * (1.0 + worst) * static_cast<double>(n);
            cancel_negative_cycles(cost, perm, pinned);
            double sd = 0.0, sc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                sd += goal[perm[i]].dot(rel[i]);
                sc += goal[perm[i]].cross(rel[i]);
            }
            angle = (sd == 0.0 && sc == 0.0) ? 0.0 : std::atan2(sc, sd);
        }
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i) c += (rel[i] - goal[perm[i]].rotated(angle)).squared_norm();
        const bool tie = k > 0 && costs_tie(c, best_cost);
        if ((!tie && c < best_cost) || (tie && std::abs(angle) < std::abs(best.angle))) {
            best_cost = std::min(best_cost, c);
            best.angle = angle;
            best.relabel = perm;
        }
    }
    return best;
}

/// Fraction `beta` of the way from `rel` to `goal` in polar coordinates about
/// the centroid: each radius and each angle is interpolated, then the points
/// are re-centered while holding the interpolated radii (alternating
/// projections). Empty when re-centering does not converge.
inline std::optional<std::vector<Vec2>> polar_step(const std::vector<Vec2>& rel, const std::vector<Vec2>& goal,
                                                   double beta) {
    const std::size_t n = rel.size();
    std::vector<Vec2> y(n);
    std::vector<double> radius(n, -1.0);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double rho = rel[i].norm();
        scale = std::max({scale, rho, goal[i].norm()});
        if (rho < 1e-9 || goal[i].norm() < 1e-9) {
            y[i] = rel[i] + (goal[i] - rel[i]) * beta;
            continue;
        }
        const double phi = std::atan2(rel[i].y(), rel[i].x());
        const double psi = std::atan2(goal[i].y(), goal[i].x());
        radius[i] = rho + beta * (goal[i].norm() - rho);
        const double ang = phi + beta * wrap_angle(psi - phi);
        y[i] = Vec2(std::cos(ang), std::sin(ang)) * radius[i];
    }
    const double tol = 1e-13 * std::max(1.0, scale);
    for (int iter = 0; iter < 500; ++iter) {
        const Vec2 c = centroid(y);
        if (c.norm() <= tol) {
            for (Vec2& p : y) p = p - c;
            return y;
        }
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = y[i] - c;
            const double r = y[i].norm();
            if (radius[i] >= 0.0 && r > 0.0) y[i] = y[i] * (radius[i] / r);
        }
    }
    return std::nullopt;
}

}  // namespace detail

class Simulation {
public:
    explicit Simulation(Scenario sc) : sc_(std::move(sc)) {
        validate(sc_);
        std::vector<DroneState> drones = sc_.drones;
        std::sort(drones.begin(), drones.end(), [](const DroneState& a, const DroneState& b) { return a.id < b.id; });
        for (const DroneState& d : drones) {
            ids_.push_back(d.id);
            pos_.push_back(d.position);
            limit_.push_back(d.speed_limit);
        }
        energy_.assign(ids_.size(), 0);
        obstacles_ = sc_.obstacles;
        samples_.resize(obstacles_.size());

        const Vec2 spawn_c = centroid(pos_);
        dir_ = (sc_.destination - spawn_c).normalized();
        heading_ = std::atan2(dir_.y(), dir_.x());
        vel_.assign(ids_.size(), dir_ * sc_.cruise_speed);
        threshold_ = 0.01 * sc_.formation_edge();
        cell_ = sc_.effective_cell_size();
        ticks_per_step_ = std::max(1, static_cast<int>(std::ceil(cell_ / (sc_.cruise_speed * sc_.tick_dt) - 1e-9)));

        slots_ = sc_.formation;
        model_labels_.resize(slots_.size());
        for (std::size_t j = 0; j < slots_.size(); ++j) model_labels_[j] = static_cast<int>(j);

        leader_ = map_now(centroid(pos_)).new_leader;
        if (sc_.mode == Mode::UniqueLeader) fixed_leader_ = leader_;
    }

    RunResult run() {
        RunResult res;
        res.mode = sc_.mode;
        res.ids = ids_;
        res.reform_threshold = threshold_;
        record(res, 0.0, false, true);

        for (int tick = 1; tick <= sc_.max_ticks; ++tick) {
            const double t = tick * sc_.tick_dt;
            for (ObstacleTruth& o : obstacles_) o.center = o.center + o.velocity * sc_.tick_dt;
            if (engulfed()) {
                record(res, t, false, avoid_.has_value());
                res.outcome = Outcome::CollisionFault;
                res.mission_time = t;
                break;
            }

            const bool flag = sense_and_plan(t, res);
            if (flag && !res.detection_time) res.detection_time = t;

            const std::vector<Vec2> before = pos_;
            const bool avoiding = avoid_.has_value();
            if (avoiding) {
                follow_plan();
            } else {
                reform();
            }
            emergency_stop(before);
            for (std::size_t i = 0; i < pos_.size(); ++i) {
                vel_[i] = (pos_[i] - before[i]) / sc_.tick_dt;
                res.flight_distance += distance(pos_[i], before[i]);
            }
            if (avoid_ && avoid_->tick_in_step == 0 && avoid_->step >= avoid_->steps) {
                avoid_.reset();
                res.avoidance_end_time = t;
            }

            const TickRecord& rec = record(res, t, flag, avoiding);
            if (res.avoidance_end_time && res.detection_time && !res.reformation_time && !avoid_ &&
                rec.d_rms < threshold_) {
                res.reformation_time = t - *res.detection_time;
            }
            if (collided(rec)) {
                res.outcome = Outcome::CollisionFault;
                res.mission_time = t;
                break;
            }
            if (distance(centroid(pos_), sc_.destination) <= sc_.effective_arrival_radius()) {
                res.outcome = Outcome::Arrived;
                res.mission_time = t;
                break;
            }
            res.mission_time = t;
        }
        if (!res.detection_time) res.reformation_time = 0.0;
        res.total_energy = std::accumulate(energy_.begin(), energy_.end(), 0);
        return res;
    }

private:
    bool obstacles_active() const { return sc_.mode != Mode::NoObstacle; }

    PointSet scene() const { return {pos_, ids_}; }

    std::vector<Vec2> placed(Vec2 anchor) const { return place_model(slots_, anchor, heading_); }

    MappingResult map_now(Vec2 anchor) const {
        const PointSet model{placed(anchor), model_labels_};
        if (sc_.mode == Mode::UniqueLeader && fixed_leader_) {
            const std::size_t idx = static_cast<std::size_t>(
                std::find(ids_.begin(), ids_.end(), *fixed_leader_) - ids_.begin());
            return map_scene_to_model_fixed_leader(scene(), model, sc_.registration, idx);
        }
        return map_scene_to_model(scene(), model, sc_.registration);
    }

    DroneState drone_state(std::size_t i) const {
        DroneState d;
        d.id = ids_[i];
        d.position = pos_[i];
        d.velocity = vel_[i];
        d.speed_limit = limit_[i];
        d.role = ids_[i] == leader_ ? Role::Leader : Role::Follower;
        return d;
    }

    std::size_t index_of(int id) const {
        return static_cast<std::size_t>(std::find(ids_.begin(), ids_.end(), id) - ids_.begin());
    }

    /// Leader detection (velocity needs two consecutive samples of the same
    /// obstacle) and GA planning. Returns FLAG_obs for this tick.
    bool sense_and_plan(double t, RunResult& res) {
        if (!obstacles_active()) return false;
        const DroneState leader = drone_state(index_of(leader_));
        bool flag = false;
        for (std::size_t k = 0; k < obstacles_.size(); ++k) {
            const auto det = detect(leader, obstacles_[k], sc_.detection_range, t);
            if (!det) {
                samples_[k].reset();
                continue;
            }
            const Vec2 center = estimated_center(leader.position, *det);
            const Vec2 los = (center - leader.position).normalized();
            const auto prev = samples_[k];
            samples_[k] = detail::LeaderSample{t, det->D_obs, leader.position, los, center};
            if (!prev) continue;

            const double v_uav = (leader.position - prev->observer).dot(prev->los) / (t - prev->t);
            const double v_obs = estimate_velocity(prev->d, det->D_obs, v_uav, prev->t, t);
            // Predicted track: displacement of the estimated center.
            const Vec2 obs_velocity = classify_motion(v_obs) == ObstacleMotion::Stationary
                                          ? Vec2{}
                                          : (center - prev->center) / (t - prev->t);

            if (avoid_) {
                // Replan only when the obstacle strays from the predicted track.
                if (avoid_->obstacle != k || avoid_->tick_in_step != 0) continue;
                const Vec2 expected = avoid_->predicted_centers[std::min<std::size_t>(
                    avoid_->step, avoid_->predicted_centers.size() - 1)];
                if (distance(expected, center) <= 0.5 * cell_) continue;
            } else if ((center - leader.position).dot(dir_) <= 0.0) {
                continue;
            }
            const auto impact = try_compute_impact(leader, *det, v_obs);
            if (!impact) continue;

            flag = true;
            const double r_est = estimated_radius(*det);
            if (plan(k, center, r_est, obs_velocity, danger_zone(impact->point, r_est, sc_.danger_margin))) {
                ++res.plans_adopted;
            } else {
                ++res.plans_failed;
            }
            break;
        }
        return flag;
    }

    bool plan(std::size_t k, Vec2 center, double r_est, Vec2 obs_velocity, Circle zone) {
        const Frame2 frame{pos_[index_of(leader_)], heading_};
        std::vector<Vec2> local;
        for (const Vec2& p : pos_) local.push_back(frame.to_local(p));
        const Vec2 c0 = frame.to_local(center);
        const Vec2 vo = frame.dir_to_local(obs_velocity);
        const Vec2 z = frame.to_local(zone.center);
        const double step_time = ticks_per_step_ * sc_.tick_dt;
        const double reach = r_est + sc_.safety_radius;

        double min_x = std::numeric_limits<double>::infinity();
        for (const Vec2& p : local) min_x = std::min(min_x, p.x());
        int clear = 1;
        while (clear < 10000 && !(min_x + clear * cell_ > (c0 + vo * (clear * step_time)).x() + reach)) ++clear;
        const int base_h = std::max(1, static_cast<int>(std::ceil(1.5 * clear)));

        ++plan_counter_;
        for (int attempt = 0; attempt < 2; ++attempt) {
            const int h = base_h << attempt;
            std::vector<Vec2> centers;
            for (int s = 0; s <= h; ++s) centers.push_back(c0 + vo * (s * step_time));

            double lo_x = z.x() - zone.radius, hi_x = z.x() + zone.radius;
            double lo_y = z.y() - zone.radius, hi_y = z.y() + zone.radius;
            for (const Vec2& p : local) {
                lo_x = std::min(lo_x, p.x());
                hi_x = std::max(hi_x, p.x() + h * cell_);
                lo_y = std::min(lo_y, p.y());
                hi_y = std::max(hi_y, p.y());
            }
            for (const Vec2& c : centers) {
                lo_x = std::min(lo_x, c.x() - reach);
                hi_x = std::max(hi_x, c.x() + reach);
                lo_y = std::min(lo_y, c.y() - reach);
                hi_y = std::max(hi_y, c.y() + reach);
            }
            auto idx = [&](double v) { return static_cast<int>(std::floor(v / cell_ + 0.5)); };
            const int m = sc_.grid_margin_cells;
            const int c_lo = idx(lo_x) - m, c_hi = idx(hi_x) + m;
            const int r_lo = idx(lo_y) - m, r_hi = idx(hi_y) + m;
            GridSpec spec;
            spec.cell_size = cell_;
            spec.origin = Vec2((c_lo - 0.5) * cell_, (r_lo - 0.5) * cell_);
            spec.width = c_hi - c_lo + 1;
            spec.height = r_hi - r_lo + 1;

            const CellSet zone_cells = rasterize_blocked(spec, Circle(z, zone.radius));
            PlanContext ctx;
            ctx.spec = spec;
            ctx.swarm_velocity = Vec2(1.0, 0.0);
            ctx.obstacle_center = c0;
            ctx.center_schedule = centers;
            for (int s = 0; s <= h; ++s) {
                CellSet blocked = zone_cells;
                const CellSet now = rasterize_blocked(spec, Circle(centers[s], reach));
                blocked.insert(now.begin(), now.end());
                if (s > 0) {
                    const CellSet prev = rasterize_blocked(spec, Circle(centers[s - 1], reach));
                    blocked.insert(prev.begin(), prev.end());
                }
                ctx.blocked_schedule.push_back(std::make_shared<const CellSet>(std::move(blocked)));
            }

            std::map<int, Cell> cells;
            CellSet start_blocked = *ctx.blocked_schedule[0];
            for (std::size_t i = 0; i < local.size(); ++i) {
                const Cell c = world_to_cell(spec, local[i]);
                cells.emplace(ids_[i], c);
                start_blocked.erase(c);
            }
            GridState start;
            try {
                start = make_grid_state(cells, start_blocked);
            } catch (const Error&) {
                return false;
            }

            GAConfig cfg = sc_.ga;
            cfg.horizon = h;
            cfg.rng_seed = detail::splitmix64(sc_.ga.rng_seed ^ detail::splitmix64(sc_.rng_seed + plan_counter_));
            const std::vector<Chromosome> seeds{uniform_plan(start.ids, h, Move::E),
                                                uniform_plan(start.ids, h, Move::Stay)};
            const EvolveResult best = evolve_best_effort(cfg, start, ctx, seeds);
            if (!best.fitness.feasible) continue;
            if (best.fitness.steps_to_hfd == 0) return true;

            detail::Avoidance a;
            a.obstacle = k;
            a.frame = frame;
            a.plan = best.best;
            a.steps = best.fitness.steps_to_hfd;
            a.ticks_per_step = ticks_per_step_;
            a.zone = zone;
            for (const auto& wps : plan_to_tshape(best.best, start, ctx, a.steps)) {
                std::vector<Vec2> world;
                for (const Vec2& p : wps) world.push_back(frame.to_world(p));
                a.waypoints.push_back(std::move(world));
            }
            for (const Vec2& c : centers) a.predicted_centers.push_back(frame.to_world(c));
            avoid_ = std::move(a);
            return true;
        }
        return false;
    }

    void follow_plan() {
        detail::Avoidance& a = *avoid_;
        const int remaining = a.ticks_per_step - a.tick_in_step;
        const std::vector<Vec2>& wp = a.waypoints[a.step];
        for (std::size_t i = 0; i < pos_.size(); ++i) {
            Vec2 d = (wp[i] - pos_[i]) / static_cast<double>(remaining);
            const double cap = limit_[i] * sc_.tick_dt;
            if (d.norm() > cap) d = d * (cap / d.norm());
            pos_[i] = pos_[i] + d;
        }
        if (++a.tick_in_step == a.ticks_per_step) {
            for (std::size_t i = 0; i < pos_.size(); ++i) energy_[i] += move_energy(a.plan.at(i, a.step));
            a.tick_in_step = 0;
            ++a.step;
        }
    }

    int apex_holder(const std::vector<std::size_t>& assignment) const {
        for (std::size_t i = 0; i < assignment.size(); ++i) {
            if (assignment[i] == sc_.registration.leader_slot) return ids_[i];
        }
        throw Error(ErrorCode::InvalidArgument, "leader slot not assigned");
    }

    /// The optimal correspondence replaces the current one unless it would
    /// raise d_rms at the current positions.
    std::vector<std::size_t> adopt(const MappingResult& optimal, Vec2 anchor) const {
        if (!assign_.empty() && assign_ != optimal.assignment) {
            const PointSet model{placed(anchor), model_labels_};
            if (formation_error(scene(), model, optimal.assignment).d_rms >
                formation_error(scene(), model, assign_).d_rms) {
                return assign_;
            }
        }
        return optimal.assignment;
    }

    /// Every drone gets the common anchor advance plus the largest shared
    /// fraction of its shape correction that fits under its speed limit. In
    /// the unique-leader baseline the anchor slows to the loiter speed while
    /// the fixed leader is away from the apex.
    void reform() {
        const Vec2 c = centroid(pos_);
        const Vec2 to_dest = sc_.destination - c;
        const double dist = to_dest.norm();
        auto advance_at = [&](double speed) {
            return dist > 0.0 ? to_dest * (std::min(speed * sc_.tick_dt, dist) / dist) : Vec2{};
        };
        Vec2 advance = advance_at(sc_.cruise_speed);
        assign_ = adopt(map_now(c + advance), c + advance);
        std::vector<Vec2> targets = reformation_targets(assign_, placed(c + advance));
        if (sc_.mode == Mode::UniqueLeader) {
            const std::size_t li = index_of(leader_);
            if (distance(pos_[li], reformation_targets(assign_, placed(c))[li]) > sc_.slot_tolerance) {
                advance = advance_at(sc_.loiter_fraction * sc_.cruise_speed);
                targets = reformation_targets(assign_, placed(c + advance));
            }
        }

        const std::size_t n = pos_.size();
        std::vector<Vec2> rel(n), goal(n);
        for (std::size_t i = 0; i < n; ++i) {
            rel[i] = pos_[i] - c;
            goal[i] = targets[i] - (c + advance);
        }
        // The shape is steered toward the model turned to fit the scene, and
        // that fit turns toward the mission heading a little every tick.
        std::vector<bool> pinned(n, false);
        if (sc_.mode == Mode::UniqueLeader) pinned[index_of(leader_)] = true;
        const detail::Turn turn = detail::best_turn(rel, goal, pinned);
        double reach = 1.0;
        for (const Vec2& g : goal) reach = std::max(reach, g.norm());
        const double step = std::min(std::abs(turn.angle), sc_.cruise_speed * sc_.tick_dt / reach);
        const double angle = turn.angle - std::copysign(step, turn.angle);
        std::vector<std::size_t> relabeled(n);
        std::vector<Vec2> turned(n);
        for (std::size_t i = 0; i < n; ++i) {
            relabeled[i] = assign_[turn.relabel[i]];
            turned[i] = goal[turn.relabel[i]].rotated(angle);
        }
        assign_ = std::move(relabeled);
        goal = std::move(turned);
        if (sc_.mode != Mode::UniqueLeader) leader_ = apex_holder(assign_);
        // Largest step (halving from a full one) that respects every speed
        // limit and does not grow the radial error; arcs first, then lines.
        const double f0 = detail::radial_error(rel, goal);
        const std::vector<Vec2> field = detail::contraction_field(rel, goal);
        // Pairs inside the guard distance may not close in further.
        const double guard = 2.0 * sc_.safety_radius;
        bool blocked = false;
        const auto accept = [&](const std::vector<Vec2>& next) {
            if (detail::radial_error(next, goal) > f0 + 1e-14) return false;
            for (std::size_t i = 0; i < n; ++i) {
                if ((advance + next[i] - rel[i]).norm() > limit_[i] * sc_.tick_dt + 1e-12) return false;
                for (std::size_t j = 0; j < i; ++j) {
                    const double d = distance(next[i], next[j]);
                    if (d < guard && d < distance(rel[i], rel[j])) {
                        blocked = true;
                        return false;
                    }
                }
            }
            for (std::size_t i = 0; i < n; ++i) pos_[i] = c + advance + next[i];
            return true;
        };
        for (double beta = 1.0; beta > 1e-6; beta *= 0.5) {
            if (const auto arc = detail::polar_step(rel, goal, beta); arc && accept(*arc)) return;
            std::vector<Vec2> line(n);
            for (std::size_t i = 0; i < n; ++i) line[i] = rel[i] + field[i] * beta;
            if (accept(line)) return;
        }
        if (blocked) {
            sidestep(c, advance, rel, field, guard);
            return;
        }
        for (std::size_t i = 0; i < n; ++i) pos_[i] = pos_[i] + advance;
    }

    /// Fallback when guarded pairs block every contraction step: follow the
    /// capped correction field, but drones closing in on a neighbor inside the
    /// guard distance trade the closing part of their motion for a sidestep
    /// to their right. A pair that would still come within the safety radius
    /// holds its shape.
    void sidestep(Vec2 c, Vec2 advance, const std::vector<Vec2>& rel, const std::vector<Vec2>& field, double guard) {
        const std::size_t n = rel.size();
        std::vector<double> room(n);
        double beta = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            room[i] = std::max(0.0, limit_[i] * sc_.tick_dt - advance.norm());
            if (field[i].norm() > room[i]) beta = std::min(beta, room[i] / field[i].norm());
        }
        std::vector<Vec2> d(n);
        for (std::size_t i = 0; i < n; ++i) d[i] = field[i] * beta;
        for (int sweep = 0; sweep < 8; ++sweep) {
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i + 1; j < n; ++j) {
                    const Vec2 gap = rel[j] - rel[i];
                    if (gap.norm() >= guard || gap.norm() == 0.0) continue;
                    const Vec2 u = gap / gap.norm();
                    const double closing = u.dot(d[i] - d[j]);
                    if (closing <= 0.0) continue;
                    const Vec2 right(u.y(), -u.x());
                    d[i] = d[i] + (right - u) * (0.5 * closing);
                    d[j] = d[j] + (u - right) * (0.5 * closing);
                }
            }
            for (std::size_t i = 0; i < n; ++i) {
                if (d[i].norm() > room[i]) d[i] = d[i] * (room[i] / d[i].norm());
            }
        }
        std::vector<bool> hold(n, false);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < i; ++j)
                if (distance(rel[i] + d[i], rel[j] + d[j]) <= sc_.safety_radius) hold[i] = hold[j] = true;
        for (std::size_t i = 0; i < n; ++i) pos_[i] = c + advance + rel[i] + (hold[i] ? Vec2{} : d[i]);
    }

    /// A drone whose move would bring it within one safety radius of an
    /// obstacle's surface holds position instead.
    void emergency_stop(const std::vector<Vec2>& before) {
        if (!obstacles_active()) return;
        for (std::size_t i = 0; i < pos_.size(); ++i) {
            for (const ObstacleTruth& o : obstacles_) {
                const Vec2 next_center = o.center + o.velocity * sc_.tick_dt;
                if (distance(pos_[i], next_center) - o.radius < sc_.safety_radius &&
                    distance(pos_[i], next_center) < distance(before[i], next_center)) {
                    pos_[i] = before[i];
                    break;
                }
            }
        }
    }

    /// A moving obstacle ran over a drone before it could react.
    bool engulfed() const {
        if (!obstacles_active()) return false;
        for (const Vec2& p : pos_)
            for (const ObstacleTruth& o : obstacles_)
                if (distance(p, o.center) < o.radius) return true;
        return false;
    }

    bool collided(const TickRecord& rec) const {
        if (rec.min_separation <= sc_.safety_radius) return true;
        return obstacles_active() && rec.min_obstacle_clearance < 0.0;
    }

    const TickRecord& record(RunResult& res, double t, bool flag, bool fresh_mapping) {
        TickRecord rec;
        rec.t = t;
        rec.flag_obs = flag;
        rec.avoiding = avoid_.has_value();
        rec.leader_id = leader_;
        rec.energy_total = std::accumulate(energy_.begin(), energy_.end(), 0);
        if (avoid_) rec.danger_zone = avoid_->zone;
        for (std::size_t i = 0; i < pos_.size(); ++i) {
            rec.drones.push_back({pos_[i], vel_[i], ids_[i] == leader_ ? Role::Leader : Role::Follower, energy_[i]});
        }
        rec.min_separation = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < pos_.size(); ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                const double d = distance(pos_[i], pos_[j]);
                rec.pair_distances.push_back(d);
                rec.min_separation = std::min(rec.min_separation, d);
            }
        }
        if (obstacles_active()) {
            for (const ObstacleTruth& o : obstacles_) {
                for (const Vec2& p : pos_) {
                    rec.min_obstacle_clearance = std::min(rec.min_obstacle_clearance, distance(p, o.center) - o.radius);
                }
            }
        }

        const Vec2 c = centroid(pos_);
        const std::vector<Vec2> model_pts = placed(c);
        if (fresh_mapping || assign_.empty()) assign_ = map_now(c).assignment;
        const PointSet model{model_pts, model_labels_};
        rec.d_rms = formation_error(scene(), model, assign_).d_rms;
        std::vector<Vec2> matched;
        for (std::size_t j : assign_) matched.push_back(model_pts[j]);
        if (pos_.size() >= 3) {
            const TpsMap f = fit_tps(matched, pos_, sc_.lambda_metric, LinearPart::Identity);
            rec.e_tps = tps_energy(pos_, matched, f, sc_.lambda_metric);
        } else {
            rec.e_tps = 0.0;
            const Vec2 shift = c - centroid(matched);
            for (std::size_t i = 0; i < pos_.size(); ++i) rec.e_tps += (pos_[i] - matched[i] - shift).squared_norm();
        }
        res.trace.push_back(std::move(rec));
        return res.trace.back();
    }

    Scenario sc_;
    std::vector<int> ids_;
    std::vector<Vec2> pos_;
    std::vector<Vec2> vel_;
    std::vector<double> limit_;
    std::vector<int> energy_;
    std::vector<ObstacleTruth> obstacles_;
    std::vector<std::optional<detail::LeaderSample>> samples_;
    std::vector<Vec2> slots_;
    std::vector<int> model_labels_;
    Vec2 dir_;
    double heading_ = 0.0;
    double threshold_ = 0.0;
    double cell_ = 1.0;
    int ticks_per_step_ = 1;
    int leader_ = 0;
    std::optional<int> fixed_leader_;
    std::optional<detail::Avoidance> avoid_;
    std::vector<std::size_t> assign_;  // correspondence the reformation is tracking
    std::uint64_t plan_counter_ = 0;
};

inline RunResult run(const Scenario& sc) { return Simulation(sc).run(); }

inline RunResult run_unique_leader_baseline(Scenario sc) {
    if (sc.mode != Mode::UniqueLeader) throw Error(ErrorCode::InvalidScenario, "mode: baseline requires unique_leader");
    return Simulation(std::move(sc)).run();
}

struct Summary {
    std::string outcome;
    double mission_time = 0.0;
    std::optional<double> reformation_time;
    double peak_d_rms = 0.0;
    double peak_e_tps = 0.0;
    int total_energy = 0;
    double flight_distance = 0.0;
    double min_separation = 0.0;
    double min_obstacle_clearance = 0.0;
    int leader_changes = 0;
    bool flag_ever = false;
};

inline Summary metrics(const RunResult& r) {
    if (r.trace.empty()) throw Error(ErrorCode::EmptyTrace, "trace has no records");
    Summary s;
    s.outcome = to_string(r.outcome);
    s.mission_time = r.mission_time;
    s.reformation_time = r.reformation_time;
    s.total_energy = r.total_energy;
    s.flight_distance = r.flight_distance;
    s.min_separation = std::numeric_limits<double>::infinity();
    s.min_obstacle_clearance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
        const TickRecord& rec = r.trace[i];
        s.peak_d_rms = std::max(s.peak_d_rms, rec.d_rms);
        s.peak_e_tps = std::max(s.peak_e_tps, rec.e_tps);
        s.min_separation = std::min(s.min_separation, rec.min_separation);
        s.min_obstacle_clearance = std::min(s.min_obstacle_clearance, rec.min_obstacle_clearance);
        s.flag_ever = s.flag_ever || rec.flag_obs;
        if (i > 0 && rec.leader_id != r.trace[i - 1].leader_id) ++s.leader_changes;
    }
    return s;
}

}  // namespace swarm
