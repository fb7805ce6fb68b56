#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "swarm/error.hpp"
#include "swarm/ga_planner.hpp"
#include "swarm/geometry.hpp"
#include "swarm/registration.hpp"
#include "swarm/sensing.hpp"

namespace swarm {

enum class Mode { CPSR, UniqueLeader, NoObstacle };

inline const char* to_string(Mode m) {
    switch (m) {
    case Mode::CPSR: return "cpsr";
    case Mode::UniqueLeader: return "unique_leader";
    case Mode::NoObstacle: return "no_obstacle";
    }
    return "unknown";
}

struct Scenario {
    int schema_version = 1;
    std::string name = "scenario";
    Mode mode = Mode::CPSR;

    std::vector<DroneState> drones;
    /// Formation slots in the formation frame (+x = direction of travel).
    /// Slot 0 is the apex of the V and therefore the leader position.
    std::vector<Vec2> formation;
    std::vector<ObstacleTruth> obstacles;
    Vec2 destination;

    double tick_dt = 0.1;
    int max_ticks = 5000;
    std::uint64_t rng_seed = 1;
    double cruise_speed = 5.0;
    double safety_radius = 1.0;
    double detection_range = 60.0;
    double arrival_radius = 0.0;  // 0 means one cell width

    // CA grid / danger zone
    double cell_size = 0.0;       // 0 means 2 x safety_radius
    int grid_margin_cells = 3;
    double danger_margin = 2.0;

    GAConfig ga;
    RegistrationConfig registration;
    double lambda_metric = 0.1;

    // Unique-leader baseline
    double loiter_fraction = 0.25;
    double slot_tolerance = 1.0;

    /// Optional path (relative to the scenario file) of the larger-swarm
    /// variant used by the mode comparison.
    std::string large_variant;

    double effective_cell_size() const { return cell_size > 0.0 ? cell_size : 2.0 * safety_radius; }
    double effective_arrival_radius() const {
        return arrival_radius > 0.0 ? arrival_radius : effective_cell_size();
    }
    /// Shortest distance between two slots of the golden formation.
    double formation_edge() const {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < formation.size(); ++a)
            for (std::size_t b = a + 1; b < formation.size(); ++b) best = std::min(best, distance(formation[a], formation[b]));
        return std::isfinite(best) ? best : 0.0;
    }
};

/// Throws InvalidScenario naming the first offending field.
inline void validate(const Scenario& sc) {
    auto fail = [](const std::string& field, const std::string& why) {
        throw Error(ErrorCode::InvalidScenario, field + ": " + why);
    };
    if (sc.schema_version != 1) fail("schema_version", "only version 1 is supported");
    if (!(sc.tick_dt > 0.0)) fail("tick_dt", "must be > 0");
    if (sc.max_ticks < 1) fail("max_ticks", "must be >= 1");
    if (sc.drones.empty()) fail("drones", "at least one drone required");
    if (sc.formation.size() != sc.drones.size()) fail("formation", "needs exactly one slot per drone");
    if (!(sc.cruise_speed > 0.0)) fail("cruise_speed", "must be > 0");
    if (!(sc.safety_radius > 0.0)) fail("safety_radius", "must be > 0");
    if (!(sc.detection_range > 0.0)) fail("detection_range", "must be > 0");
    if (sc.cell_size < 0.0) fail("grid.cell_size", "must be >= 0");
    if (sc.grid_margin_cells < 0) fail("grid.margin_cells", "must be >= 0");
    if (sc.danger_margin < 0.0) fail("grid.safety_margin", "must be >= 0");
    if (sc.arrival_radius < 0.0) fail("arrival_radius", "must be >= 0");
    if (!(sc.loiter_fraction >= 0.0 && sc.loiter_fraction <= 1.0)) fail("unique_leader.loiter_fraction", "must be in [0, 1]");
    if (!(sc.slot_tolerance > 0.0)) fail("unique_leader.slot_tolerance", "must be > 0");
    if (sc.lambda_metric < 0.0) fail("registration.lambda_metric", "must be >= 0");
    std::vector<int> ids;
    for (const DroneState& d : sc.drones) {
        if (!(d.speed_limit >= sc.cruise_speed)) fail("drones.speed_limit", "must be >= cruise_speed");
        if (std::find(ids.begin(), ids.end(), d.id) != ids.end()) fail("drones.id", "duplicate id");
        ids.push_back(d.id);
    }
    for (const ObstacleTruth& o : sc.obstacles) {
        if (!(o.radius > 0.0)) fail("obstacles.radius", "must be > 0");
    }
    for (std::size_t a = 0; a < sc.formation.size(); ++a)
        for (std::size_t b = a + 1; b < sc.formation.size(); ++b)
            if (sc.formation[a] == sc.formation[b]) fail("formation", "duplicate slot");
    std::vector<Vec2> spawn;
    for (const DroneState& d : sc.drones) spawn.push_back(d.position);
    if (distance(centroid(spawn), sc.destination) <= sc.effective_arrival_radius()) {
        fail("destination", "must be distinct from the spawn centroid");
    }
    try {
        validate(sc.ga);
    } catch (const Error& e) {
        fail("ga", e.what());
    }
    if (!(sc.registration.anneal_rate > 0.0 && sc.registration.anneal_rate < 1.0)) {
        fail("registration.anneal_rate", "must be in (0, 1)");
    }
    if (sc.registration.max_iters < 1) fail("registration.sweeps", "must be >= 1");
}

}  // namespace swarm
