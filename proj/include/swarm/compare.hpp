#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "swarm/scenario.hpp"
#include "swarm/sim_engine.hpp"
#include "swarm/trace_io.hpp"

namespace swarm {

struct ModeRun {
    std::string label;  // no_obstacle, cpsr, unique, cpsr8
    RunResult result;
};

struct Comparison {
    std::vector<ModeRun> runs;
    std::string ordering;      // no_obstacle, cpsr and unique only
    std::string ordering_all;  // every run, cpsr8 included
};

inline Scenario with_mode(Scenario sc, Mode m) {
    sc.mode = m;
    return sc;
}

/// Runs the obstacle-free control, CPSR and the unique-leader baseline on
/// `sc` (and CPSR on `large` when given), all with the same seed.
inline Comparison compare_modes(const Scenario& sc, const std::optional<Scenario>& large = {}) {
    Comparison c;
    c.runs.push_back({"no_obstacle", run(with_mode(sc, Mode::NoObstacle))});
    c.runs.push_back({"cpsr", run(with_mode(sc, Mode::CPSR))});
    if (large) {
        Scenario l = with_mode(*large, Mode::CPSR);
        l.rng_seed = sc.rng_seed;
        c.runs.push_back({"cpsr8", run(l)});
    }
    c.runs.push_back({"unique", run(with_mode(sc, Mode::UniqueLeader))});

    std::vector<std::pair<std::string, double>> primary, all;
    for (const ModeRun& r : c.runs) {
        all.emplace_back(r.label, r.result.mission_time);
        if (r.label != "cpsr8") primary.emplace_back(r.label, r.result.mission_time);
    }
    c.ordering = ordering_verdict(primary, 0.5 * sc.tick_dt);
    c.ordering_all = ordering_verdict(all, 0.5 * sc.tick_dt);
    return c;
}

inline nlohmann::json comparison_json(const Scenario& sc, const Comparison& c) {
    nlohmann::json j;
    j["scenario"] = sc.name;
    j["rng_seed"] = sc.rng_seed;
    j["modes"] = nlohmann::json::object();
    for (const ModeRun& r : c.runs) {
        j["modes"][r.label] = {{"mission_time", r.result.mission_time},
                               {"outcome", to_string(r.result.outcome)},
                               {"drones", r.result.ids.size()}};
        const auto& rt = r.result.reformation_time;
        j["modes"][r.label]["reformation_time"] = rt ? nlohmann::json(*rt) : nlohmann::json(nullptr);
    }
    j["ordering"] = c.ordering;
    j["ordering_all"] = c.ordering_all;
    return j;
}

}  // namespace swarm
