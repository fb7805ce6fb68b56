#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "swarm/error.hpp"
#include "swarm/geometry.hpp"

namespace swarm {

/// Ordered points with optional labels (drone ids for a scene, slot ids for a model).
struct PointSet {
    std::vector<Vec2> points;
    std::vector<int> labels;

    std::size_t size() const { return points.size(); }
    int label(std::size_t i) const { return labels.empty() ? static_cast<int>(i) : labels[i]; }
};

inline void validate(const PointSet& ps) {
    if (ps.points.empty()) throw Error(ErrorCode::InvalidArgument, "point set is empty");
    if (!ps.labels.empty()) {
        if (ps.labels.size() != ps.points.size()) {
            throw Error(ErrorCode::SizeMismatch, "label count differs from point count");
        }
        if (std::set<int>(ps.labels.begin(), ps.labels.end()).size() != ps.labels.size()) {
            throw Error(ErrorCode::InvalidArgument, "duplicate labels");
        }
    }
}

struct RegistrationConfig {
    double lambda = 0.0;
    std::optional<double> T_init;   // defaults to the model's mean pairwise squared distance
    std::optional<double> T_final;  // defaults to T_init / 500
    double anneal_rate = 0.93;
    int max_iters = 30;             // normalization sweeps per temperature
    std::size_t leader_slot = 0;    // model index of the leader position
};

/// `assignment[i]` is the model index taken by scene point i.
struct MappingResult {
    std::vector<std::size_t> assignment;
    double total_cost = 0.0;
    double E_tps = 0.0;
    int new_leader = 0;
};

struct FormationError {
    Vec2 centroid;
    std::vector<double> deltas;
    double d_rms = 0.0;
};

inline Vec2 centroid(std::span<const Vec2> pts) {
    if (pts.empty()) throw Error(ErrorCode::InvalidArgument, "centroid of empty set");
    double sx = 0.0, sy = 0.0;
    for (const Vec2& p : pts) {
        sx += p.x();
        sy += p.y();
    }
    const double n = static_cast<double>(pts.size());
    return {sx / n, sy / n};
}

inline Vec2 centroid(const PointSet& ps) { return centroid(ps.points); }

inline void check_bijection(std::span<const std::size_t> assignment, std::size_t n) {
    if (assignment.size() != n) throw Error(ErrorCode::SizeMismatch, "assignment size differs from set size");
    std::vector<bool> used(n, false);
    for (std::size_t j : assignment) {
        if (j >= n || used[j]) throw Error(ErrorCode::InvalidArgument, "assignment is not a bijection");
        used[j] = true;
    }
}

/// Per-drone deviation of centroid distances against the golden model and
/// their root sum of squares.
inline FormationError formation_error(const PointSet& scene, const PointSet& model,
                                      std::span<const std::size_t> assignment) {
    if (scene.size() != model.size()) throw Error(ErrorCode::SizeMismatch, "scene and model sizes differ");
    check_bijection(assignment, scene.size());
    FormationError fe;
    fe.centroid = centroid(scene);
    const Vec2 model_c = centroid(model);
    double sum_sq = 0.0;
    fe.deltas.reserve(scene.size());
    for (std::size_t i = 0; i < scene.size(); ++i) {
        const double d = distance(model.points[assignment[i]], model_c) - distance(scene.points[i], fe.centroid);
        fe.deltas.push_back(d);
        sum_sq += d * d;
    }
    fe.d_rms = std::sqrt(sum_sq);
    return fe;
}

inline double assignment_cost(std::span<const Vec2> scene, std::span<const Vec2> model,
                              std::span<const std::size_t> assignment) {
    double c = 0.0;
    for (std::size_t i = 0; i < scene.size(); ++i) c += (scene[i] - model[assignment[i]]).squared_norm();
    return c;
}

namespace detail {

using CostMatrix = std::vector<std::vector<double>>;

inline bool costs_tie(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); }

/// Cancels negative exchange cycles until the permutation is a minimum-cost
/// assignment. Rows in `frozen` keep their column.
inline void cancel_negative_cycles(const CostMatrix& cost, std::vector<std::size_t>& perm,
                                   const std::vector<bool>& frozen) {
    const std::size_t n = perm.size();
    double scale = 0.0;
    for (const auto& row : cost)
        for (double c : row) scale = std::max(scale, std::abs(c));
    const double eps = 1e-12 * std::max(1.0, scale);

    for (;;) {
        // Edge i -> j: row i gives up its column and takes row j's column.
        std::vector<double> dist(n, 0.0);
        std::vector<std::ptrdiff_t> pred(n, -1);
        std::ptrdiff_t touched = -1;
        for (std::size_t pass = 0; pass < n; ++pass) {
            touched = -1;
            for (std::size_t i = 0; i < n; ++i) {
                if (frozen[i]) continue;
                for (std::size_t j = 0; j < n; ++j) {
                    if (i == j || frozen[j]) continue;
                    const double w = cost[i][perm[j]] - cost[i][perm[i]];
                    if (dist[i] + w < dist[j] - eps) {
                        dist[j] = dist[i] + w;
                        pred[j] = static_cast<std::ptrdiff_t>(i);
                        touched = static_cast<std::ptrdiff_t>(j);
                    }
                }
            }
            if (touched < 0) return;
        }
        // Walk back n times to land inside the cycle, then collect it.
        std::size_t v = static_cast<std::size_t>(touched);
        for (std::size_t k = 0; k < n; ++k) {
            if (pred[v] < 0) return;
            v = static_cast<std::size_t>(pred[v]);
        }
        std::vector<std::size_t> cycle;
        std::size_t u = v;
        do {
            cycle.push_back(u);
            if (pred[u] < 0 || cycle.size() > n) return;
            u = static_cast<std::size_t>(pred[u]);
        } while (u != v);
        // cycle holds nodes in reverse edge order: pred[c_k] -> c_k.
        double delta = 0.0;
        for (std::size_t k = 0; k < cycle.size(); ++k) {
            const std::size_t to = cycle[k], from = cycle[(k + 1) % cycle.size()];
            delta += cost[from][perm[to]] - cost[from][perm[from]];
        }
        if (!(delta < -eps)) return;
        std::vector<std::size_t> taken(cycle.size());
        for (std::size_t k = 0; k < cycle.size(); ++k) taken[k] = perm[cycle[k]];
        for (std::size_t k = 0; k < cycle.size(); ++k) perm[cycle[(k + 1) % cycle.size()]] = taken[k];
    }
}

inline double perm_cost(const CostMatrix& cost, const std::vector<std::size_t>& perm) {
    double c = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) c += cost[i][perm[i]];
    return c;
}

/// Among minimum-cost assignments, hands `slot` to the lowest-labelled scene
/// point that can hold it without raising the total cost.
inline void prefer_lowest_label_for_slot(const CostMatrix& cost, std::vector<std::size_t>& perm,
                                         const PointSet& scene, std::size_t slot) {
    const std::size_t n = perm.size();
    const double best = perm_cost(cost, perm);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scene.label(a) < scene.label(b); });
    for (std::size_t cand : order) {
        if (perm[cand] == slot) return;
        std::vector<std::size_t> trial = perm;
        const std::size_t holder =
            static_cast<std::size_t>(std::find(trial.begin(), trial.end(), slot) - trial.begin());
        std::swap(trial[cand], trial[holder]);
        std::vector<bool> frozen(n, false);
        frozen[cand] = true;
        cancel_negative_cycles(cost, trial, frozen);
        if (costs_tie(perm_cost(cost, trial), best)) {
            perm = std::move(trial);
            return;
        }
    }
}

inline CostMatrix centered_cost(std::span<const Vec2> scene, std::span<const Vec2> model) {
    const std::size_t n = scene.size();
    const Vec2 cs = centroid(scene), cm = centroid(model);
    CostMatrix cost(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) cost[i][j] = ((scene[i] - cs) - (model[j] - cm)).squared_norm();
    return cost;
}

inline double log_sum_exp(const double* v, std::size_t n, std::size_t stride) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) mx = std::max(mx, v[k * stride]);
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += std::exp(v[k * stride] - mx);
    return mx + std::log(s);
}

}  // namespace detail

/// Deterministic-annealing soft assignment on centroid-aligned sets.
/// Returns the doubly-stochastic correspondence at the final temperature
/// (row-major n x n).
inline std::vector<double> softassign(std::span<const Vec2> scene, std::span<const Vec2> model,
                                      const RegistrationConfig& cfg) {
    const std::size_t n = scene.size();
    const Vec2 cs = centroid(scene), cm = centroid(model);
    std::vector<double> cost(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = ((scene[i] - cs) - (model[j] - cm)).squared_norm();

    double t_init = 0.0;
    if (cfg.T_init) {
        t_init = *cfg.T_init;
    } else {
        double s = 0.0;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b) s += (model[a] - model[b]).squared_norm();
        t_init = n > 1 ? s / (0.5 * static_cast<double>(n * (n - 1))) : 1.0;
        if (!(t_init > 0.0)) t_init = 1.0;
    }
    const double t_final = cfg.T_final.value_or(t_init / 500.0);
    if (!(t_init > t_final && t_final > 0.0)) throw Error(ErrorCode::InvalidArgument, "need T_init > T_final > 0");
    if (!(cfg.anneal_rate > 0.0 && cfg.anneal_rate < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "anneal_rate must be in (0, 1)");
    }

    // Sinkhorn in the log domain; the dual potentials carry over between
    // temperatures so each stage starts from the previous correspondence.
    std::vector<double> row_pot(n, 0.0), col_pot(n, 0.0), log_m(n * n);
    for (double temp = t_init;; temp *= cfg.anneal_rate) {
        const double t = std::max(temp, t_final);
        for (int sweep = 0; sweep < cfg.max_iters; ++sweep) {
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) log_m[i * n + j] = (col_pot[j] - cost[i * n + j]) / t;
                row_pot[i] = -t * detail::log_sum_exp(&log_m[i * n], n, 1);
            }
            double moved = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t i = 0; i < n; ++i) log_m[i * n + j] = (row_pot[i] - cost[i * n + j]) / t;
                const double next = -t * detail::log_sum_exp(&log_m[j], n, n);
                moved = std::max(moved, std::abs(next - col_pot[j]));
                col_pot[j] = next;
            }
            if (moved <= 1e-7 * t) break;
        }
        std::vector<double> m(n * n);
        double least_peak = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            double peak = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                m[i * n + j] = std::exp((row_pot[i] + col_pot[j] - cost[i * n + j]) / t);
                peak = std::max(peak, m[i * n + j]);
            }
            least_peak = std::min(least_peak, peak);
        }
        // Frozen: every row already picks one column with near certainty.
        if (t <= t_final || least_peak > 1.0 - 1e-9) return m;
    }
}

/// Greedy hardening: repeatedly take the largest remaining entry.
inline std::vector<std::size_t> harden(const std::vector<double>& m, std::size_t n) {
    std::vector<std::size_t> perm(n, n);
    std::vector<bool> col_used(n, false);
    for (std::size_t round = 0; round < n; ++round) {
        double best = -1.0;
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (perm[i] != n) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (!col_used[j] && m[i * n + j] > best) {
                    best = m[i * n + j];
                    bi = i;
                    bj = j;
                }
            }
        }
        perm[bi] = bj;
        col_used[bj] = true;
    }
    return perm;
}

/// Scene-to-model correspondence: annealed soft assignment, greedy hardening,
/// then exchange-cycle repair so the permutation is a minimum-cost assignment.
/// Among equal-cost assignments the leader slot goes to the lowest label.
inline MappingResult map_scene_to_model(const PointSet& scene, const PointSet& model,
                                        const RegistrationConfig& cfg = {}) {
    validate(scene);
    validate(model);
    const std::size_t n = scene.size();
    if (model.size() != n) throw Error(ErrorCode::SizeMismatch, "scene and model sizes differ");
    if (cfg.leader_slot >= n) throw Error(ErrorCode::InvalidArgument, "leader slot outside model");

    MappingResult r;
    if (n == 1) {
        r.assignment = {0};
    } else {
        const std::vector<double> soft = softassign(scene.points, model.points, cfg);
        r.assignment = harden(soft, n);

        const detail::CostMatrix cost = detail::centered_cost(scene.points, model.points);
        detail::cancel_negative_cycles(cost, r.assignment, std::vector<bool>(n, false));
        detail::prefer_lowest_label_for_slot(cost, r.assignment, scene, cfg.leader_slot);
    }
    r.total_cost = assignment_cost(scene.points, model.points, r.assignment);
    r.E_tps = r.total_cost;
    for (std::size_t i = 0; i < n; ++i) {
        if (r.assignment[i] == cfg.leader_slot) r.new_leader = scene.label(i);
    }
    return r;
}

/// Minimum-cost mapping subject to scene point `fixed` holding the leader
/// slot. Used by the fixed-leader baseline, where election is disabled.
inline MappingResult map_scene_to_model_fixed_leader(const PointSet& scene, const PointSet& model,
                                                     const RegistrationConfig& cfg, std::size_t fixed) {
    MappingResult r = map_scene_to_model(scene, model, cfg);
    const std::size_t n = scene.size();
    if (fixed >= n) throw Error(ErrorCode::InvalidArgument, "fixed scene index outside scene");
    if (r.assignment[fixed] != cfg.leader_slot) {
        const std::size_t holder = static_cast<std::size_t>(
            std::find(r.assignment.begin(), r.assignment.end(), cfg.leader_slot) - r.assignment.begin());
        std::swap(r.assignment[fixed], r.assignment[holder]);
        std::vector<bool> frozen(n, false);
        frozen[fixed] = true;
        detail::cancel_negative_cycles(detail::centered_cost(scene.points, model.points), r.assignment, frozen);
        r.total_cost = assignment_cost(scene.points, model.points, r.assignment);
        r.E_tps = r.total_cost;
    }
    r.new_leader = scene.label(fixed);
    return r;
}

/// Drone holding the model's leader slot under `mapping`. `scene` must be the
/// point set the mapping was computed for.
inline int elect_leader(const MappingResult& mapping, const PointSet& scene, std::size_t model_leader_slot) {
    check_bijection(mapping.assignment, scene.size());
    for (std::size_t i = 0; i < scene.size(); ++i) {
        if (mapping.assignment[i] == model_leader_slot) return scene.label(i);
    }
    throw Error(ErrorCode::InvalidArgument, "leader slot not assigned");
}

/// Model placed rigidly with its centroid at `anchor` and its +x axis along
/// `heading` (radians). `slots` are model offsets in the formation frame.
inline std::vector<Vec2> place_model(std::span<const Vec2> slots, Vec2 anchor, double heading) {
    const Vec2 c = centroid(slots);
    std::vector<Vec2> out;
    out.reserve(slots.size());
    for (const Vec2& s : slots) out.push_back(anchor + (s - c).rotated(heading));
    return out;
}

/// Each drone's target is its assigned slot in the placed model.
inline std::vector<Vec2> reformation_targets(std::span<const std::size_t> assignment,
                                             std::span<const Vec2> placed_model) {
    check_bijection(assignment, placed_model.size());
    std::vector<Vec2> out;
    out.reserve(assignment.size());
    for (std::size_t j : assignment) out.push_back(placed_model[j]);
    return out;
}

}  // namespace swarm
