#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "swarm/ca_grid.hpp"
#include "swarm/error.hpp"
#include "swarm/geometry.hpp"

namespace swarm {

/// Per-drone move sequences of a common horizon. Genes are stored drone-major:
/// the move of drone index d at step s is genes[d * horizon + s].
struct Chromosome {
    std::vector<int> ids;
    int horizon = 1;
    std::vector<Move> genes;

    Move at(std::size_t drone, int s) const { return genes[drone * horizon + s]; }
    Move& at(std::size_t drone, int s) { return genes[drone * horizon + s]; }

    bool operator==(const Chromosome&) const = default;
};

/// Builds a chromosome where every drone repeats `m` for the whole horizon.
inline Chromosome uniform_plan(std::vector<int> ids, int horizon, Move m) {
    Chromosome ch;
    ch.genes.assign(ids.size() * static_cast<std::size_t>(horizon), m);
    ch.ids = std::move(ids);
    ch.horizon = horizon;
    return ch;
}

struct Fitness {
    bool feasible = false;
    int steps_to_hfd = 0;
    int total_energy = 0;
    double scalar_cost = std::numeric_limits<double>::infinity();
};

struct GAConfig {
    int population_size = 100;
    int horizon = 1;
    int generations = 60;
    double mutation_rate = 0.08;
    int elite_count = 4;
    int tournament_size = 3;
    double w_t = 10.0;
    double w_e = 1.0;
    std::uint64_t rng_seed = 0;
};

inline void validate(const GAConfig& cfg) {
    if (cfg.horizon < 1) throw Error(ErrorCode::InvalidArgument, "horizon must be >= 1");
    if (cfg.elite_count < 1 || cfg.population_size < cfg.elite_count) {
        throw Error(ErrorCode::InvalidArgument, "need population_size >= elite_count >= 1");
    }
    if (!(cfg.mutation_rate >= 0.0 && cfg.mutation_rate <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "mutation_rate must be in [0, 1]");
    }
    if (cfg.tournament_size < 1) throw Error(ErrorCode::InvalidArgument, "tournament_size must be >= 1");
    if (cfg.generations < 0) throw Error(ErrorCode::InvalidArgument, "generations must be >= 0");
    if (!(cfg.w_t > 0.0) || !(cfg.w_e > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "fitness weights must be > 0");
    }
}

/// Everything a plan is scored against. The optional schedules give, per CA
/// step s in [0, H], the blocked cells and the obstacle mass point at the
/// moment step s completes; when empty, the start state's blocked set and
/// `obstacle_center` are used for every step.
struct PlanContext {
    GridSpec spec;
    Vec2 swarm_velocity{1.0, 0.0};
    Vec2 obstacle_center;
    std::vector<std::shared_ptr<const CellSet>> blocked_schedule;
    std::vector<Vec2> center_schedule;
    double w_t = 10.0;
    double w_e = 1.0;

    Vec2 center_at(int s) const {
        if (center_schedule.empty()) return obstacle_center;
        return center_schedule[std::min<std::size_t>(s, center_schedule.size() - 1)];
    }
    const std::shared_ptr<const CellSet>* blocked_at(int s) const {
        if (blocked_schedule.empty()) return nullptr;
        return &blocked_schedule[std::min<std::size_t>(s, blocked_schedule.size() - 1)];
    }
};

namespace detail {

inline Chromosome random_chromosome(const std::vector<int>& ids, int horizon, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> gene(0, static_cast<int>(kAllMoves.size()) - 1);
    Chromosome ch;
    ch.ids = ids;
    ch.horizon = horizon;
    ch.genes.resize(ids.size() * static_cast<std::size_t>(horizon));
    for (Move& m : ch.genes) m = kAllMoves[gene(rng)];
    return ch;
}

/// Cells still to travel before every drone is past the line (summed).
inline double hfd_deficit(const GridState& s, const GridSpec& spec, Vec2 dir, Vec2 center) {
    double deficit = 0.0;
    for (const Cell& c : s.cells) {
        const double along = (cell_to_world(spec, c) - center).dot(dir) / spec.cell_size;
        deficit += std::max(0.0, 0.5 - along);
    }
    return deficit;
}

}  // namespace detail

inline std::vector<Chromosome> init_population(const GAConfig& cfg, const std::vector<int>& ids,
                                               std::mt19937_64& rng) {
    validate(cfg);
    std::vector<Chromosome> pop;
    pop.reserve(cfg.population_size);
    for (int i = 0; i < cfg.population_size; ++i) pop.push_back(detail::random_chromosome(ids, cfg.horizon, rng));
    return pop;
}

/// Uniformly random population, reproducible for a given rng_seed.
inline std::vector<Chromosome> init_population(const GAConfig& cfg, const std::vector<int>& ids) {
    std::mt19937_64 rng(cfg.rng_seed);
    return init_population(cfg, ids, rng);
}

/// Plays the plan through the CA until the highest-disturbance state. Moves
/// after that state are ignored. Infeasible plans get a finite penalty above
/// every feasible cost, ordered by how far the swarm still is from the line
/// and then by how early the plan failed.
inline Fitness evaluate(const Chromosome& ch, const GridState& start, const PlanContext& ctx) {
    const std::size_t n = start.size();
    if (ch.ids != start.ids) throw Error(ErrorCode::SizeMismatch, "chromosome and state drone sets differ");
    const Vec2 dir = ctx.swarm_velocity.normalized();
    const int H = ch.horizon;

    GridState state = start;
    if (auto b = ctx.blocked_at(0)) state.blocked = *b;

    auto energy_since_start = [&](const GridState& s) {
        int e = 0;
        for (std::size_t i = 0; i < n; ++i) e += s.energy[i] - start.energy[i];
        return e;
    };

    Fitness f;
    if (is_highest_disturbance(state, ctx.spec, dir, ctx.center_at(0))) {
        f.feasible = true;
        f.steps_to_hfd = 0;
        f.total_energy = 0;
        f.scalar_cost = 0.0;
        return f;
    }

    std::vector<Move> moves(n);
    int failed_at = H + 1;
    for (int s = 1; s <= H; ++s) {
        for (std::size_t d = 0; d < n; ++d) moves[d] = ch.at(d, s - 1);
        if (auto b = ctx.blocked_at(s)) state.blocked = *b;
        StepResult r = step(state, ctx.spec, moves);
        if (std::holds_alternative<Conflict>(r)) {
            failed_at = s;
            break;
        }
        state = std::move(std::get<GridState>(r));
        if (is_highest_disturbance(state, ctx.spec, dir, ctx.center_at(s))) {
            f.feasible = true;
            f.steps_to_hfd = s;
            f.total_energy = energy_since_start(state);
            f.scalar_cost = ctx.w_t * s + ctx.w_e * f.total_energy;
            return f;
        }
    }

    const double worst_feasible = ctx.w_t * (H + 1) + ctx.w_e * 2.0 * H * static_cast<double>(n);
    const double deficit = detail::hfd_deficit(state, ctx.spec, dir, ctx.center_at(std::min(failed_at - 1, H)));
    f.feasible = false;
    f.steps_to_hfd = H + 1;
    f.total_energy = energy_since_start(state);
    f.scalar_cost = 1e6 + worst_feasible + 100.0 * deficit + (H + 1 - failed_at);
    return f;
}

/// Static-danger-zone form: blocked cells come from `start`.
inline Fitness evaluate(const Chromosome& ch, const GridState& start, const GridSpec& spec, Vec2 swarm_velocity,
                        Vec2 obstacle_center, double w_t = 10.0, double w_e = 1.0) {
    PlanContext ctx;
    ctx.spec = spec;
    ctx.swarm_velocity = swarm_velocity;
    ctx.obstacle_center = obstacle_center;
    ctx.w_t = w_t;
    ctx.w_e = w_e;
    return evaluate(ch, start, ctx);
}

struct EvolveResult {
    Chromosome best;
    Fitness fitness;
    std::vector<double> best_cost_history;  // best-ever cost after each generation, generation 0 first
};

/// Elitism + tournament selection + per-gene resampling mutation. `seeds`
/// replace the first random individuals of generation 0.
inline EvolveResult evolve_best_effort(const GAConfig& cfg, const GridState& start, PlanContext ctx,
                                       const std::vector<Chromosome>& seeds = {}) {
    validate(cfg);
    if (start.size() == 0) throw Error(ErrorCode::InvalidArgument, "at least one drone required");
    ctx.w_t = cfg.w_t;
    ctx.w_e = cfg.w_e;

    std::mt19937_64 rng(cfg.rng_seed);
    std::vector<Chromosome> pop = init_population(cfg, start.ids, rng);
    for (std::size_t i = 0; i < seeds.size() && i < pop.size(); ++i) {
        if (seeds[i].ids != start.ids || seeds[i].horizon != cfg.horizon) {
            throw Error(ErrorCode::InvalidArgument, "seed chromosome shape does not match the configuration");
        }
        pop[i] = seeds[i];
    }

    std::vector<Fitness> fit(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) fit[i] = evaluate(pop[i], start, ctx);

    EvolveResult result;
    auto track_best = [&]() {
        for (std::size_t i = 0; i < pop.size(); ++i) {
            if (fit[i].scalar_cost < result.fitness.scalar_cost) {
                result.best = pop[i];
                result.fitness = fit[i];
            }
        }
        result.best_cost_history.push_back(result.fitness.scalar_cost);
    };
    track_best();

    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_int_distribution<int> gene(0, static_cast<int>(kAllMoves.size()) - 1);
    std::uniform_int_distribution<int> pick(0, cfg.population_size - 1);
    std::vector<std::size_t> order(pop.size());

    for (int g = 0; g < cfg.generations; ++g) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fit[a].scalar_cost < fit[b].scalar_cost; });

        // All random draws for this generation happen here, before any
        // evaluation, so scoring order never influences the trajectory.
        std::vector<Chromosome> next;
        next.reserve(pop.size());
        for (int e = 0; e < cfg.elite_count; ++e) next.push_back(pop[order[e]]);
        while (static_cast<int>(next.size()) < cfg.population_size) {
            std::size_t winner = static_cast<std::size_t>(pick(rng));
            for (int k = 1; k < cfg.tournament_size; ++k) {
                const std::size_t challenger = static_cast<std::size_t>(pick(rng));
                if (fit[challenger].scalar_cost < fit[winner].scalar_cost ||
                    (fit[challenger].scalar_cost == fit[winner].scalar_cost && challenger < winner)) {
                    winner = challenger;
                }
            }
            Chromosome child = pop[winner];
            for (Move& m : child.genes) {
                if (coin(rng) < cfg.mutation_rate) m = kAllMoves[gene(rng)];
            }
            next.push_back(std::move(child));
        }

        std::vector<Fitness> next_fit(next.size());
        for (int e = 0; e < cfg.elite_count; ++e) next_fit[e] = fit[order[e]];
        for (std::size_t i = cfg.elite_count; i < next.size(); ++i) next_fit[i] = evaluate(next[i], start, ctx);
        pop = std::move(next);
        fit = std::move(next_fit);
        track_best();
    }
    return result;
}

/// As evolve_best_effort, but a plan that never becomes feasible is an error.
inline EvolveResult evolve(const GAConfig& cfg, const GridState& start, const PlanContext& ctx,
                           const std::vector<Chromosome>& seeds = {}) {
    EvolveResult r = evolve_best_effort(cfg, start, ctx, seeds);
    if (!r.fitness.feasible) throw Error(ErrorCode::NoFeasiblePlan, "no feasible plan within the horizon");
    return r;
}

/// World-frame cell-center targets for the first `steps` CA steps of a plan,
/// one set per step with one point per drone (in `start.ids` order).
inline std::vector<std::vector<Vec2>> plan_to_tshape(const Chromosome& ch, const GridState& start,
                                                     const PlanContext& ctx, std::optional<int> steps = {}) {
    const int count = steps.value_or(ch.horizon);
    if (count < 0 || count > ch.horizon) throw Error(ErrorCode::InvalidArgument, "step count outside horizon");
    if (ch.ids != start.ids) throw Error(ErrorCode::SizeMismatch, "chromosome and state drone sets differ");

    std::vector<std::vector<Vec2>> out;
    out.reserve(count);
    GridState state = start;
    std::vector<Move> moves(start.size());
    for (int s = 1; s <= count; ++s) {
        for (std::size_t d = 0; d < start.size(); ++d) moves[d] = ch.at(d, s - 1);
        if (auto b = ctx.blocked_at(s)) state.blocked = *b;
        StepResult r = step(state, ctx.spec, moves);
        if (auto* c = std::get_if<Conflict>(&r)) {
            throw Error(ErrorCode::InfeasiblePlan,
                        std::string("plan conflicts (") + to_string(c->kind) + ") at step " + std::to_string(s));
        }
        state = std::move(std::get<GridState>(r));
        std::vector<Vec2> wp;
        wp.reserve(state.size());
        for (const Cell& c : state.cells) wp.push_back(cell_to_world(ctx.spec, c));
        out.push_back(std::move(wp));
    }
    return out;
}

inline std::vector<std::vector<Vec2>> plan_to_tshape(const Chromosome& ch, const GridState& start,
                                                     const GridSpec& spec, std::optional<int> steps = {}) {
    PlanContext ctx;
    ctx.spec = spec;
    return plan_to_tshape(ch, start, ctx, steps);
}

}  // namespace swarm
