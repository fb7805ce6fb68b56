#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "swarm/error.hpp"
#include "swarm/scenario.hpp"

namespace swarm {

namespace detail {

using nlohmann::json;

[[noreturn]] inline void bad_field(const std::string& field, const std::string& why) {
    throw Error(ErrorCode::InvalidScenario, field + ": " + why);
}

inline void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> known) {
    if (!obj.is_object()) bad_field(where.empty() ? "scenario" : where, "expected an object");
    const std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) bad_field(where.empty() ? key : where + "." + key, "unknown key");
    }
}

inline double get_number(const json& obj, const char* key, const std::string& field, double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) bad_field(field, "expected a number");
    return v.get<double>();
}

inline int get_int(const json& obj, const char* key, const std::string& field, int fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) bad_field(field, "expected an integer");
    return v.get<int>();
}

inline Vec2 get_vec(const json& v, const std::string& field) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        bad_field(field, "expected [x, y]");
    }
    try {
        return {v[0].get<double>(), v[1].get<double>()};
    } catch (const Error&) {
        bad_field(field, "coordinates must be finite");
    }
}

inline Mode parse_mode(const json& v) {
    if (!v.is_string()) bad_field("mode", "expected a string");
    const std::string s = v.get<std::string>();
    if (s == "cpsr") return Mode::CPSR;
    if (s == "unique_leader") return Mode::UniqueLeader;
    if (s == "no_obstacle") return Mode::NoObstacle;
    bad_field("mode", "expected one of cpsr, unique_leader, no_obstacle");
}

}  // namespace detail

/// Parses and validates a scenario document. Unknown keys are rejected at
/// every level; diagnostics name the offending field.
inline Scenario scenario_from_json(const nlohmann::json& doc) {
    using detail::bad_field;
    detail::reject_unknown(doc, "",
                           {"schema_version", "name", "mode", "tick_dt", "max_ticks", "rng_seed", "cruise_speed",
                            "speed_limit", "safety_radius", "detection_range", "arrival_radius", "destination",
                            "drones", "formation", "obstacles", "grid", "ga", "registration", "unique_leader",
                            "large_variant"});
    Scenario sc;
    if (!doc.contains("schema_version")) bad_field("schema_version", "missing");
    sc.schema_version = detail::get_int(doc, "schema_version", "schema_version", 0);
    if (doc.contains("name")) {
        if (!doc["name"].is_string()) bad_field("name", "expected a string");
        sc.name = doc["name"].get<std::string>();
    }
    if (doc.contains("mode")) sc.mode = detail::parse_mode(doc["mode"]);
    sc.tick_dt = detail::get_number(doc, "tick_dt", "tick_dt", sc.tick_dt);
    sc.max_ticks = detail::get_int(doc, "max_ticks", "max_ticks", sc.max_ticks);
    if (doc.contains("rng_seed")) {
        if (!doc["rng_seed"].is_number_unsigned()) bad_field("rng_seed", "expected a non-negative integer");
        sc.rng_seed = doc["rng_seed"].get<std::uint64_t>();
    }
    sc.cruise_speed = detail::get_number(doc, "cruise_speed", "cruise_speed", sc.cruise_speed);
    const double default_limit = detail::get_number(doc, "speed_limit", "speed_limit", 2.0 * sc.cruise_speed);
    sc.safety_radius = detail::get_number(doc, "safety_radius", "safety_radius", sc.safety_radius);
    sc.detection_range = detail::get_number(doc, "detection_range", "detection_range", sc.detection_range);
    sc.arrival_radius = detail::get_number(doc, "arrival_radius", "arrival_radius", sc.arrival_radius);

    if (!doc.contains("destination")) bad_field("destination", "missing");
    sc.destination = detail::get_vec(doc["destination"], "destination");

    if (!doc.contains("drones") || !doc["drones"].is_array()) bad_field("drones", "expected an array");
    for (const auto& d : doc["drones"]) {
        detail::reject_unknown(d, "drones", {"id", "position", "speed_limit"});
        if (!d.contains("id")) bad_field("drones.id", "missing");
        if (!d.contains("position")) bad_field("drones.position", "missing");
        DroneState s;
        s.id = detail::get_int(d, "id", "drones.id", 0);
        s.position = detail::get_vec(d["position"], "drones.position");
        s.speed_limit = detail::get_number(d, "speed_limit", "drones.speed_limit", default_limit);
        sc.drones.push_back(s);
    }

    if (!doc.contains("formation") || !doc["formation"].is_array()) bad_field("formation", "expected an array");
    for (const auto& f : doc["formation"]) sc.formation.push_back(detail::get_vec(f, "formation"));

    if (doc.contains("obstacles")) {
        if (!doc["obstacles"].is_array()) bad_field("obstacles", "expected an array");
        for (const auto& o : doc["obstacles"]) {
            detail::reject_unknown(o, "obstacles", {"center", "radius", "velocity"});
            if (!o.contains("center")) bad_field("obstacles.center", "missing");
            if (!o.contains("radius")) bad_field("obstacles.radius", "missing");
            ObstacleTruth t;
            t.center = detail::get_vec(o["center"], "obstacles.center");
            t.radius = detail::get_number(o, "radius", "obstacles.radius", 0.0);
            if (o.contains("velocity")) t.velocity = detail::get_vec(o["velocity"], "obstacles.velocity");
            sc.obstacles.push_back(t);
        }
    }

    if (doc.contains("grid")) {
        const auto& g = doc["grid"];
        detail::reject_unknown(g, "grid", {"cell_size", "margin_cells", "safety_margin"});
        sc.cell_size = detail::get_number(g, "cell_size", "grid.cell_size", sc.cell_size);
        sc.grid_margin_cells = detail::get_int(g, "margin_cells", "grid.margin_cells", sc.grid_margin_cells);
        sc.danger_margin = detail::get_number(g, "safety_margin", "grid.safety_margin", sc.danger_margin);
    }

    if (doc.contains("ga")) {
        const auto& g = doc["ga"];
        detail::reject_unknown(g, "ga",
                               {"population_size", "generations", "mutation_rate", "elite_count", "tournament_size",
                                "w_t", "w_e", "rng_seed"});
        GAConfig& c = sc.ga;
        c.population_size = detail::get_int(g, "population_size", "ga.population_size", c.population_size);
        c.generations = detail::get_int(g, "generations", "ga.generations", c.generations);
        c.mutation_rate = detail::get_number(g, "mutation_rate", "ga.mutation_rate", c.mutation_rate);
        c.elite_count = detail::get_int(g, "elite_count", "ga.elite_count", c.elite_count);
        c.tournament_size = detail::get_int(g, "tournament_size", "ga.tournament_size", c.tournament_size);
        c.w_t = detail::get_number(g, "w_t", "ga.w_t", c.w_t);
        c.w_e = detail::get_number(g, "w_e", "ga.w_e", c.w_e);
        if (g.contains("rng_seed")) {
            if (!g["rng_seed"].is_number_unsigned()) bad_field("ga.rng_seed", "expected a non-negative integer");
            c.rng_seed = g["rng_seed"].get<std::uint64_t>();
        }
    }

    if (doc.contains("registration")) {
        const auto& r = doc["registration"];
        detail::reject_unknown(r, "registration", {"anneal_rate", "sweeps", "T_init", "T_final", "lambda_metric"});
        RegistrationConfig& c = sc.registration;
        c.anneal_rate = detail::get_number(r, "anneal_rate", "registration.anneal_rate", c.anneal_rate);
        c.max_iters = detail::get_int(r, "sweeps", "registration.sweeps", c.max_iters);
        if (r.contains("T_init")) c.T_init = detail::get_number(r, "T_init", "registration.T_init", 0.0);
        if (r.contains("T_final")) c.T_final = detail::get_number(r, "T_final", "registration.T_final", 0.0);
        sc.lambda_metric = detail::get_number(r, "lambda_metric", "registration.lambda_metric", sc.lambda_metric);
    }

    if (doc.contains("unique_leader")) {
        const auto& u = doc["unique_leader"];
        detail::reject_unknown(u, "unique_leader", {"loiter_fraction", "slot_tolerance"});
        sc.loiter_fraction =
            detail::get_number(u, "loiter_fraction", "unique_leader.loiter_fraction", sc.loiter_fraction);
        sc.slot_tolerance = detail::get_number(u, "slot_tolerance", "unique_leader.slot_tolerance", sc.slot_tolerance);
    }

    if (doc.contains("large_variant")) {
        if (!doc["large_variant"].is_string()) bad_field("large_variant", "expected a string");
        sc.large_variant = doc["large_variant"].get<std::string>();
    }

    validate(sc);
    return sc;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidScenario, "scenario: cannot open " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::InvalidScenario, std::string("scenario: malformed JSON: ") + e.what());
    }
    return scenario_from_json(doc);
}

}  // namespace swarm
