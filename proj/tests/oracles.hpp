#pragma once

// Independent reference implementations shared by the unit tests and the
// acceptance binary. Nothing here calls into the code it checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "swarm/ca_grid.hpp"
#include "swarm/ga_planner.hpp"
#include "swarm/geometry.hpp"

namespace oracle {

// ---- assignment -----------------------------------------------------------

using Pts = std::vector<std::pair<double, double>>;

/// Minimum of sum |(s_i - cs) - (m_p(i) - cm)|^2 over all n! permutations.
inline double brute_force_assignment(const Pts& scene, const Pts& model) {
    const std::size_t n = scene.size();
    double sx = 0, sy = 0, mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += scene[i].first;
        sy += scene[i].second;
        mx += model[i].first;
        my += model[i].second;
    }
    sx /= n, sy /= n, mx /= n, my /= n;
    std::vector<std::vector<double>> c(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double dx = (scene[i].first - sx) - (model[j].first - mx);
            const double dy = (scene[i].second - sy) - (model[j].second - my);
            c[i][j] = dx * dx + dy * dy;
        }
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0;
        for (std::size_t i = 0; i < n; ++i) total += c[i][p[i]];
        best = std::min(best, total);
    } while (std::next_permutation(p.begin(), p.end()));
    return best;
}

// ---- GA micro-instances -----------------------------------------------------

struct MicroInstance {
    int width = 0, height = 0;
    double cell = 1.0;
    std::vector<std::pair<int, int>> drones;  // (col, row), ids 1..n
    std::set<std::pair<int, int>> blocked;
    double vx = 1.0, vy = 0.0;
    double ox = 0.0, oy = 0.0;  // obstacle mass point, world frame, grid origin at (0, 0)
    int horizon = 1;
    double w_t = 10.0, w_e = 1.0;
};

namespace detail {

constexpr std::array<std::pair<int, int>, 9> kOffsets{
    {{0, 0}, {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}, {-1, 0}, {-1, 1}}};

inline int cost(int k) {
    const auto [dc, dr] = kOffsets[k];
    return std::abs(dc) + std::abs(dr);
}

inline bool past_line(const MicroInstance& in, std::pair<int, int> c) {
    const double len = std::hypot(in.vx, in.vy);
    const double px = (c.first + 0.5) * in.cell - in.ox, py = (c.second + 0.5) * in.cell - in.oy;
    return (px * in.vx + py * in.vy) / len > 1e-9;
}

inline bool all_past(const MicroInstance& in, const std::vector<std::pair<int, int>>& cells) {
    return std::all_of(cells.begin(), cells.end(), [&](auto c) { return past_line(in, c); });
}

// Smallest distance between two points moving linearly over t in [0, 1],
// found by sampling the squared distance (a parabola) at its vertex and ends.
inline double closest(std::pair<int, int> a0, std::pair<int, int> a1, std::pair<int, int> b0,
                      std::pair<int, int> b1) {
    auto d2 = [&](double t) {
        const double ax = a0.first + t * (a1.first - a0.first), ay = a0.second + t * (a1.second - a0.second);
        const double bx = b0.first + t * (b1.first - b0.first), by = b0.second + t * (b1.second - b0.second);
        return (ax - bx) * (ax - bx) + (ay - by) * (ay - by);
    };
    // d2(t) = A t^2 + B t + C; recover A and B from three samples.
    const double f0 = d2(0), fh = d2(0.5), f1 = d2(1);
    const double A = 2 * (f0 + f1) - 4 * fh, B = f1 - f0 - A;
    double best = std::min(f0, f1);
    if (A > 0) {
        const double t = -B / (2 * A);
        if (t > 0 && t < 1) best = std::min(best, d2(t));
    }
    return std::sqrt(std::max(0.0, best));
}

inline std::optional<std::vector<std::pair<int, int>>> joint_step(const MicroInstance& in,
                                                                   const std::vector<std::pair<int, int>>& cells,
                                                                   const std::vector<int>& moves) {
    std::vector<std::pair<int, int>> next(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        next[i] = {cells[i].first + kOffsets[moves[i]].first, cells[i].second + kOffsets[moves[i]].second};
        if (next[i].first < 0 || next[i].second < 0 || next[i].first >= in.width || next[i].second >= in.height)
            return std::nullopt;
        if (in.blocked.count(next[i])) return std::nullopt;
    }
    for (std::size_t i = 0; i < cells.size(); ++i)
        for (std::size_t j = i + 1; j < cells.size(); ++j) {
            if (next[i] == next[j]) return std::nullopt;
            if (next[i] == cells[j] && next[j] == cells[i]) return std::nullopt;
            if (closest(cells[i], next[i], cells[j], next[j]) <= 0.5) return std::nullopt;
        }
    return next;
}

}  // namespace detail

/// Exact optimum of w_t * steps + w_e * energy over all plans of the instance,
/// by exhaustive layered search over joint configurations (equivalent to
/// enumerating all 9^(H n) plans, since moves after the target state do not
/// count and energy is non-negative). Empty when no plan is feasible.
inline std::optional<double> ga_optimum(const MicroInstance& in) {
    using Cells = std::vector<std::pair<int, int>>;
    const std::size_t n = in.drones.size();
    if (detail::all_past(in, in.drones)) return 0.0;
    std::map<Cells, int> layer{{in.drones, 0}};
    std::optional<double> best;
    std::vector<int> moves(n, 0);
    for (int s = 1; s <= in.horizon && !layer.empty(); ++s) {
        std::map<Cells, int> next;
        for (const auto& [cells, energy] : layer) {
            std::size_t combos = 1;
            for (std::size_t i = 0; i < n; ++i) combos *= 9;
            for (std::size_t code = 0; code < combos; ++code) {
                std::size_t c = code;
                int e = energy;
                for (std::size_t i = 0; i < n; ++i) {
                    moves[i] = static_cast<int>(c % 9);
                    c /= 9;
                    e += detail::cost(moves[i]);
                }
                const auto to = detail::joint_step(in, cells, moves);
                if (!to) continue;
                if (detail::all_past(in, *to)) {
                    const double v = in.w_t * s + in.w_e * e;
                    if (!best || v < *best) best = v;
                    continue;
                }
                auto it = next.find(*to);
                if (it == next.end() || e < it->second) next[*to] = e;
            }
        }
        layer = std::move(next);
    }
    return best;
}

/// Seeded micro-instance: up to 2 drones, H <= 4, grid <= 8x8, a few blocked
/// cells, an arbitrary travel direction and no drone past the line at start.
inline MicroInstance random_micro_instance(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    for (;;) {
        MicroInstance in;
        in.width = uni(3, 8);
        in.height = uni(3, 8);
        in.cell = std::uniform_real_distribution<double>(0.5, 5.0)(rng);
        in.horizon = uni(1, 4);
        const double a = std::uniform_real_distribution<double>(-3.14159, 3.14159)(rng);
        in.vx = std::cos(a);
        in.vy = std::sin(a);
        in.ox = std::uniform_real_distribution<double>(0.0, in.width)(rng) * in.cell;
        in.oy = std::uniform_real_distribution<double>(0.0, in.height)(rng) * in.cell;
        const int blocks = uni(0, 4);
        for (int b = 0; b < blocks; ++b) in.blocked.insert({uni(0, in.width - 1), uni(0, in.height - 1)});
        const int n = uni(1, 2);
        std::set<std::pair<int, int>> used;
        for (int i = 0; i < n; ++i) {
            const std::pair<int, int> c{uni(0, in.width - 1), uni(0, in.height - 1)};
            if (in.blocked.count(c) || !used.insert(c).second || detail::past_line(in, c)) break;
            in.drones.push_back(c);
        }
        if (static_cast<int>(in.drones.size()) == n) return in;
    }
}

inline swarm::GridState start_state(const MicroInstance& in) {
    std::map<int, swarm::Cell> cells;
    for (std::size_t i = 0; i < in.drones.size(); ++i)
        cells[static_cast<int>(i) + 1] = {in.drones[i].first, in.drones[i].second};
    swarm::CellSet blocked;
    for (auto [c, r] : in.blocked) blocked.insert({c, r});
    return swarm::make_grid_state(cells, blocked);
}

inline swarm::PlanContext context(const MicroInstance& in) {
    swarm::PlanContext ctx;
    ctx.spec.cell_size = in.cell;
    ctx.spec.width = in.width;
    ctx.spec.height = in.height;
    ctx.swarm_velocity = {in.vx, in.vy};
    ctx.obstacle_center = {in.ox, in.oy};
    ctx.w_t = in.w_t;
    ctx.w_e = in.w_e;
    return ctx;
}

struct GaOracleTally {
    int instances = 0;         // instances with a feasible plan, as counted toward `count`
    int skipped = 0;           // drawn instances without any feasible plan
    int optimal = 0;
    int missed_feasible = 0;   // GA returned an infeasible plan
    int below_optimum = 0;     // GA beat the exhaustive optimum or was feasible where none exists (a bug)
};

/// Runs the GA with a generous budget on seeded micro-instances until `count`
/// of them have a feasible plan, and compares with the exhaustive optimum.
inline GaOracleTally run_ga_oracle(int count, std::uint64_t base_seed = 1000) {
    GaOracleTally t;
    for (std::uint64_t k = 0; t.instances < count; ++k) {
        const MicroInstance in = random_micro_instance(base_seed + k);
        const auto best = ga_optimum(in);
        swarm::GAConfig cfg;
        cfg.population_size = 200;
        cfg.generations = 100;
        cfg.horizon = in.horizon;
        cfg.rng_seed = base_seed * 7919 + k;
        const swarm::EvolveResult r = swarm::evolve_best_effort(cfg, start_state(in), context(in));
        if (!best) {
            ++t.skipped;
            if (r.fitness.feasible) ++t.below_optimum;
            continue;
        }
        ++t.instances;
        if (!r.fitness.feasible) {
            ++t.missed_feasible;
            continue;
        }
        if (r.fitness.scalar_cost < *best - 1e-9) ++t.below_optimum;
        if (std::abs(r.fitness.scalar_cost - *best) <= 1e-9) ++t.optimal;
    }
    return t;
}

}  // namespace oracle
