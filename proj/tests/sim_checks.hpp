#pragma once

// Scenario generators and trace checks shared by test_sim_engine and the
// acceptance binary.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "swarm/scenario_io.hpp"
#include "swarm/sim_engine.hpp"

namespace checks {

inline std::filesystem::path source_dir() { return SWARM_SOURCE_DIR; }

inline swarm::Scenario fixture(const std::string& name) {
    return swarm::load_scenario(source_dir() / "scenarios" / name);
}

inline swarm::Scenario with(swarm::Scenario sc, swarm::Mode m, std::uint64_t seed) {
    sc.mode = m;
    sc.rng_seed = seed;
    return sc;
}

/// Obstacle-free copy of `base` with every drone displaced from its slot by
/// up to 5 cells per axis, keeping spawns 3 safety radii apart.
inline swarm::Scenario disturbed_start(swarm::Scenario base, std::uint64_t seed) {
    base.mode = swarm::Mode::NoObstacle;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double reach = 5.0 * base.effective_cell_size() / std::sqrt(2.0);
    for (std::size_t i = 0; i < base.drones.size(); ++i) {
        for (;;) {
            const swarm::Vec2 p = base.formation[i] + swarm::Vec2(u(rng), u(rng)) * reach;
            bool ok = true;
            for (std::size_t j = 0; j < i; ++j) ok = ok && distance(p, base.drones[j].position) >= 3.0 * base.safety_radius;
            if (ok) {
                base.drones[i].position = p;
                break;
            }
        }
    }
    return base;
}

/// Fixture geometry with a randomized obstacle: offset across the path,
/// distance, radius and velocity all vary. Even seeds use the 3-drone fixture.
inline swarm::Scenario random_obstacle_scenario(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    swarm::Scenario sc = fixture(seed % 2 == 0 ? "canonical_3.json" : "canonical_8.json");
    sc.name = "random_" + std::to_string(seed);
    sc.rng_seed = seed;
    swarm::ObstacleTruth& o = sc.obstacles.at(0);
    o.center = {u(100.0, 250.0), u(-12.0, 12.0)};
    o.radius = u(1.5, 6.0);
    o.velocity = seed % 5 == 0 ? swarm::Vec2(0.0, 0.0) : swarm::Vec2(u(-4.0, 0.0), u(-0.5, 0.5));
    return sc;
}

/// Largest tick-to-tick d_rms increase after the peak that follows avoidance
/// end (or the start of the run when nothing was avoided).
inline double contraction_violation(const swarm::RunResult& r) {
    std::size_t from = 0;
    if (r.avoidance_end_time) {
        while (from < r.trace.size() && r.trace[from].t < *r.avoidance_end_time - 1e-9) ++from;
    }
    if (from >= r.trace.size()) return 0.0;
    std::size_t peak = from;
    for (std::size_t k = from; k < r.trace.size(); ++k)
        if (r.trace[k].d_rms > r.trace[peak].d_rms) peak = k;
    double worst = 0.0;
    for (std::size_t k = peak + 1; k < r.trace.size(); ++k) worst = std::max(worst, r.trace[k].d_rms - r.trace[k - 1].d_rms);
    return worst;
}

/// True when d_rms drops below the reformation threshold at or after avoidance end.
inline bool reaches_threshold(const swarm::RunResult& r) {
    for (const swarm::TickRecord& rec : r.trace) {
        if (r.avoidance_end_time && rec.t < *r.avoidance_end_time - 1e-9) continue;
        if (rec.d_rms < r.reform_threshold) return true;
    }
    return false;
}

struct SafetyReport {
    bool ok = true;
    double min_separation = INFINITY;
    double min_clearance = INFINITY;
    std::string detail;
};

/// Collision-free: outcome is not a fault, every pair stays more than one
/// safety radius apart and no drone is inside an obstacle disc.
inline SafetyReport safety(const swarm::RunResult& r, const swarm::Scenario& sc) {
    SafetyReport s;
    for (const swarm::TickRecord& rec : r.trace) {
        s.min_separation = std::min(s.min_separation, rec.min_separation);
        s.min_clearance = std::min(s.min_clearance, rec.min_obstacle_clearance);
    }
    if (r.outcome == swarm::Outcome::CollisionFault) {
        s.ok = false;
        s.detail = "collision fault";
    } else if (!(s.min_separation > sc.safety_radius) && r.ids.size() > 1) {
        s.ok = false;
        s.detail = "separation " + std::to_string(s.min_separation);
    } else if (!(s.min_clearance > 0.0)) {
        s.ok = false;
        s.detail = "clearance " + std::to_string(s.min_clearance);
    }
    return s;
}

}  // namespace checks
