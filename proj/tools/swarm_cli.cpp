// Command-line front end for the swarm simulator.
//
//   swarm_cli run --scenario <path> --out <dir> [--seed N]
//   swarm_cli compare --scenario <path> --out <dir>
//   swarm_cli validate --scenario <path>
//   swarm_cli oracle --instance <path>
//
// Exit codes: 0 arrived / ok, 1 invalid input, 2 timeout, 3 collision fault.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "swarm/compare.hpp"
#include "swarm/ga_planner.hpp"
#include "swarm/registration.hpp"
#include "swarm/scenario_io.hpp"
#include "swarm/sim_engine.hpp"
#include "swarm/trace_io.hpp"

namespace {

enum class Level { Error = 0, Info = 1, Debug = 2 };

Level log_level() {
    const char* env = std::getenv("SWARM_LOG");
    if (!env) return Level::Info;
    const std::string v(env);
    if (v == "error") return Level::Error;
    if (v == "debug") return Level::Debug;
    return Level::Info;
}

void log(Level lvl, const std::string& msg) {
    static const Level threshold = log_level();
    if (lvl > threshold) return;
    static const char* names[] = {"error", "info", "debug"};
    std::cerr << "[" << names[static_cast<int>(lvl)] << "] " << msg << '\n';
}

int exit_code(swarm::Outcome o) {
    switch (o) {
    case swarm::Outcome::Arrived: return 0;
    case swarm::Outcome::Timeout: return 2;
    case swarm::Outcome::CollisionFault: return 3;
    }
    return 1;
}

std::string describe(const swarm::RunResult& r) {
    const swarm::Summary s = swarm::metrics(r);
    std::string out = std::string(swarm::to_string(r.mode)) + ": " + s.outcome +
                      " mission_time=" + std::to_string(s.mission_time) +
                      " leader_changes=" + std::to_string(s.leader_changes) +
                      " energy=" + std::to_string(s.total_energy);
    if (s.reformation_time) out += " reformation_time=" + std::to_string(*s.reformation_time);
    return out;
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir, std::optional<std::uint64_t> seed) {
    swarm::Scenario sc = swarm::load_scenario(scenario_path);
    if (seed) sc.rng_seed = *seed;
    const swarm::RunResult r = swarm::run(sc);
    swarm::write_run(out_dir, r);
    log(Level::Info, describe(r));
    log(Level::Debug, "wrote " + (std::filesystem::path(out_dir) / "trace.csv").string());
    return exit_code(r.outcome);
}

int cmd_compare(const std::string& scenario_path, const std::string& out_dir) {
    const swarm::Scenario sc = swarm::load_scenario(scenario_path);
    std::optional<swarm::Scenario> large;
    if (!sc.large_variant.empty()) {
        large = swarm::load_scenario(std::filesystem::path(scenario_path).parent_path() / sc.large_variant);
    }
    const swarm::Comparison c = swarm::compare_modes(sc, large);
    const std::filesystem::path out(out_dir);
    for (const swarm::ModeRun& m : c.runs) {
        swarm::write_run(out / m.label, m.result);
        log(Level::Info, m.label + " -> " + describe(m.result));
    }
    std::filesystem::create_directories(out);
    swarm::write_text(out / "comparison.json", swarm::comparison_json(sc, c).dump(2) + "\n");
    log(Level::Info, "ordering: " + c.ordering + " (all: " + c.ordering_all + ")");
    int code = 0;
    for (const swarm::ModeRun& m : c.runs) code = std::max(code, exit_code(m.result.outcome));
    return code;
}

int cmd_validate(const std::string& scenario_path) {
    const swarm::Scenario sc = swarm::load_scenario(scenario_path);
    std::cout << "ok: " << sc.name << " (" << sc.drones.size() << " drones, " << sc.obstacles.size()
              << " obstacles)\n";
    return 0;
}

// Oracle instances:
//   {"kind": "assignment", "scene": [[x,y],...], "model": [[x,y],...]}
//   {"kind": "ga", "width": W, "height": H, "cell_size": c, "horizon": h,
//    "drones": [{"id": 1, "cell": [col,row]}], "blocked": [[col,row]],
//    "velocity": [x,y], "obstacle_center": [x,y], "w_t": 10, "w_e": 1,
//    "ga": {"population_size": 200, "generations": 100, "rng_seed": 1}}
nlohmann::json oracle_assignment(const nlohmann::json& inst) {
    swarm::PointSet scene, model;
    for (const auto& p : inst.at("scene")) scene.points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    for (const auto& p : inst.at("model")) model.points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    const std::size_t n = scene.points.size();
    if (n != model.points.size()) throw swarm::Error(swarm::ErrorCode::SizeMismatch, "scene and model sizes differ");
    if (n > 10) throw swarm::Error(swarm::ErrorCode::InvalidArgument, "brute force limited to 10 points");

    const swarm::Vec2 cs = swarm::centroid(scene.points), cm = swarm::centroid(model.points);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i) c += ((scene.points[i] - cs) - (model.points[perm[i]] - cm)).squared_norm();
        best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));

    const swarm::MappingResult m = swarm::map_scene_to_model(scene, model);
    double mapped = 0.0;
    for (std::size_t i = 0; i < n; ++i) mapped += ((scene.points[i] - cs) - (model.points[m.assignment[i]] - cm)).squared_norm();
    return {{"kind", "assignment"},
            {"brute_force_cost", best},
            {"mapping_cost", mapped},
            {"assignment", m.assignment}};
}

nlohmann::json oracle_ga(const nlohmann::json& inst) {
    swarm::GridSpec spec;
    spec.width = inst.at("width").get<int>();
    spec.height = inst.at("height").get<int>();
    spec.cell_size = inst.value("cell_size", 1.0);
    swarm::validate(spec);
    std::map<int, swarm::Cell> cells;
    for (const auto& d : inst.at("drones")) {
        cells[d.at("id").get<int>()] = {d.at("cell").at(0).get<int>(), d.at("cell").at(1).get<int>()};
    }
    swarm::CellSet blocked;
    for (const auto& b : inst.value("blocked", nlohmann::json::array())) blocked.insert({b.at(0).get<int>(), b.at(1).get<int>()});
    const swarm::GridState start = swarm::make_grid_state(cells, blocked);

    swarm::PlanContext ctx;
    ctx.spec = spec;
    const auto& v = inst.at("velocity");
    const auto& oc = inst.at("obstacle_center");
    ctx.swarm_velocity = {v.at(0).get<double>(), v.at(1).get<double>()};
    ctx.obstacle_center = {oc.at(0).get<double>(), oc.at(1).get<double>()};
    swarm::GAConfig cfg;
    cfg.horizon = inst.at("horizon").get<int>();
    cfg.w_t = inst.value("w_t", cfg.w_t);
    cfg.w_e = inst.value("w_e", cfg.w_e);
    ctx.w_t = cfg.w_t;
    ctx.w_e = cfg.w_e;
    if (inst.contains("ga")) {
        const auto& g = inst["ga"];
        cfg.population_size = g.value("population_size", cfg.population_size);
        cfg.generations = g.value("generations", cfg.generations);
        cfg.mutation_rate = g.value("mutation_rate", cfg.mutation_rate);
        cfg.rng_seed = g.value("rng_seed", cfg.rng_seed);
    }
    const std::size_t genes = start.size() * static_cast<std::size_t>(cfg.horizon);
    if (genes > 8) throw swarm::Error(swarm::ErrorCode::InvalidArgument, "exhaustive search limited to 8 genes");

    swarm::Chromosome ch = swarm::uniform_plan(start.ids, cfg.horizon, swarm::Move::Stay);
    std::size_t total = 1;
    for (std::size_t g = 0; g < genes; ++g) total *= swarm::kAllMoves.size();
    std::optional<double> best;
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t c = code;
        for (std::size_t g = 0; g < genes; ++g) {
            ch.genes[g] = swarm::kAllMoves[c % swarm::kAllMoves.size()];
            c /= swarm::kAllMoves.size();
        }
        const swarm::Fitness f = swarm::evaluate(ch, start, ctx);
        if (f.feasible && (!best || f.scalar_cost < *best)) best = f.scalar_cost;
    }
    const swarm::EvolveResult r = swarm::evolve_best_effort(cfg, start, ctx);
    nlohmann::json out{{"kind", "ga"}, {"ga_feasible", r.fitness.feasible}};
    out["exhaustive_optimum"] = best ? nlohmann::json(*best) : nlohmann::json(nullptr);
    out["ga_cost"] = r.fitness.feasible ? nlohmann::json(r.fitness.scalar_cost) : nlohmann::json(nullptr);
    return out;
}

int cmd_oracle(const std::string& instance_path) {
    std::ifstream in(instance_path);
    if (!in) throw swarm::Error(swarm::ErrorCode::InvalidArgument, "instance: cannot open " + instance_path);
    const nlohmann::json inst = nlohmann::json::parse(in);
    const std::string kind = inst.at("kind").get<std::string>();
    nlohmann::json out;
    if (kind == "assignment") {
        out = oracle_assignment(inst);
    } else if (kind == "ga") {
        out = oracle_ga(inst);
    } else {
        throw swarm::Error(swarm::ErrorCode::InvalidArgument, "kind: expected assignment or ga");
    }
    std::cout << out.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic 2D drone swarm simulator"};
    app.require_subcommand(1);

    std::string scenario, out_dir, instance;
    std::optional<std::uint64_t> seed;

    auto* run = app.add_subcommand("run", "Run one scenario and write trace.csv + summary.json");
    run->add_option("--scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory")->required();
    run->add_option("--seed", seed, "Override the scenario rng_seed");

    auto* cmp = app.add_subcommand("compare", "Run every mode and write comparison.json");
    cmp->add_option("--scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
    cmp->add_option("--out", out_dir, "Output directory")->required();

    auto* val = app.add_subcommand("validate", "Check a scenario file");
    val->add_option("--scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);

    auto* orc = app.add_subcommand("oracle", "Brute-force oracle for a small assignment or GA instance");
    orc->add_option("--instance", instance, "Instance file")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*run) return cmd_run(scenario, out_dir, seed);
        if (*cmp) return cmd_compare(scenario, out_dir);
        if (*val) return cmd_validate(scenario);
        if (*orc) return cmd_oracle(instance);
    } catch (const swarm::Error& e) {
        log(Level::Error, e.what());
        return 1;
    } catch (const std::exception& e) {
        log(Level::Error, e.what());
        return 1;
    }
    return 1;
}
