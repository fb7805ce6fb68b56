#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "swarm/error.hpp"
#include "swarm/geometry.hpp"

namespace swarm {

struct GridSpec {
    double cell_size = 1.0;
    Vec2 origin;
    int width = 1;
    int height = 1;
};

struct Cell {
    int col = 0;
    int row = 0;

    auto operator<=>(const Cell&) const = default;
};

using CellSet = std::set<Cell>;

enum class Move { Stay, N, NE, E, SE, S, SW, W, NW };

inline constexpr std::array<Move, 9> kAllMoves = {Move::Stay, Move::N,  Move::NE,
                                                  Move::E,    Move::SE, Move::S,
                                                  Move::SW,   Move::W,  Move::NW};

/// Column/row offset of a move. N is +row, E is +col.
inline constexpr Cell move_offset(Move m) {
    switch (m) {
    case Move::Stay: return {0, 0};
    case Move::N: return {0, 1};
    case Move::NE: return {1, 1};
    case Move::E: return {1, 0};
    case Move::SE: return {1, -1};
    case Move::S: return {0, -1};
    case Move::SW: return {-1, -1};
    case Move::W: return {-1, 0};
    case Move::NW: return {-1, 1};
    }
    return {0, 0};
}

/// 0 to stay, 1 for a cardinal step, 2 for an inter-cardinal step.
inline constexpr int move_energy(Move m) {
    const Cell d = move_offset(m);
    return (d.col != 0 ? 1 : 0) + (d.row != 0 ? 1 : 0);
}

inline constexpr Move opposite(Move m) {
    switch (m) {
    case Move::Stay: return Move::Stay;
    case Move::N: return Move::S;
    case Move::NE: return Move::SW;
    case Move::E: return Move::W;
    case Move::SE: return Move::NW;
    case Move::S: return Move::N;
    case Move::SW: return Move::NE;
    case Move::W: return Move::E;
    case Move::NW: return Move::SE;
    }
    return Move::Stay;
}

inline const char* to_string(Move m) {
    static constexpr const char* names[] = {"Stay", "N", "NE", "E", "SE", "S", "SW", "W", "NW"};
    return names[static_cast<int>(m)];
}

inline bool in_bounds(const GridSpec& spec, Cell c) {
    return c.col >= 0 && c.col < spec.width && c.row >= 0 && c.row < spec.height;
}

inline void validate(const GridSpec& spec) {
    if (!(spec.cell_size > 0.0)) throw Error(ErrorCode::InvalidArgument, "cell_size must be > 0");
    if (spec.width < 1 || spec.height < 1) {
        throw Error(ErrorCode::InvalidArgument, "grid width and height must be >= 1");
    }
}

inline Cell world_to_cell(const GridSpec& spec, Vec2 p) {
    const Vec2 rel = p - spec.origin;
    const Cell c{static_cast<int>(std::floor(rel.x() / spec.cell_size)),
                 static_cast<int>(std::floor(rel.y() / spec.cell_size))};
    if (!in_bounds(spec, c)) throw Error(ErrorCode::OutOfBounds, "point outside grid");
    return c;
}

inline Vec2 cell_to_world(const GridSpec& spec, Cell c) {
    return spec.origin + Vec2((c.col + 0.5) * spec.cell_size, (c.row + 0.5) * spec.cell_size);
}

/// Cells whose center lies within zone.radius + cell_size/2 of the zone center.
inline CellSet rasterize_blocked(const GridSpec& spec, const Circle& zone) {
    CellSet out;
    const double reach = zone.radius + 0.5 * spec.cell_size;
    const Vec2 rel = zone.center - spec.origin;
    const int c0 = std::max(0, static_cast<int>(std::floor((rel.x() - reach) / spec.cell_size)));
    const int c1 = std::min(spec.width - 1, static_cast<int>(std::floor((rel.x() + reach) / spec.cell_size)));
    const int r0 = std::max(0, static_cast<int>(std::floor((rel.y() - reach) / spec.cell_size)));
    const int r1 = std::min(spec.height - 1, static_cast<int>(std::floor((rel.y() + reach) / spec.cell_size)));
    for (int col = c0; col <= c1; ++col) {
        for (int row = r0; row <= r1; ++row) {
            if (distance(cell_to_world(spec, {col, row}), zone.center) <= reach) out.insert({col, row});
        }
    }
    return out;
}

/// Unchecked neighbor in the direction of `m`.
inline Cell offset_cell(Cell c, Move m) {
    const Cell d = move_offset(m);
    return {c.col + d.col, c.row + d.row};
}

inline Cell apply_move(const GridSpec& spec, Cell c, Move m) {
    const Cell out = offset_cell(c, m);
    if (!in_bounds(spec, out)) throw Error(ErrorCode::OutOfBounds, "move leaves the grid");
    return out;
}

/// Occupancy of the CA model. `ids` is sorted ascending; `cells` and `energy`
/// are parallel to it. The blocked set is shared between successive states.
struct GridState {
    std::vector<int> ids;
    std::vector<Cell> cells;
    std::vector<int> energy;
    std::shared_ptr<const CellSet> blocked = std::make_shared<const CellSet>();

    std::size_t size() const { return ids.size(); }

    std::size_t index_of(int id) const {
        auto it = std::lower_bound(ids.begin(), ids.end(), id);
        if (it == ids.end() || *it != id) {
            throw Error(ErrorCode::InvalidArgument, "unknown drone id " + std::to_string(id));
        }
        return static_cast<std::size_t>(it - ids.begin());
    }

    Cell cell_of(int id) const { return cells[index_of(id)]; }
    int energy_of(int id) const { return energy[index_of(id)]; }
    bool is_blocked(Cell c) const { return blocked->count(c) != 0; }
};

/// Builds a state and checks the occupancy invariants.
inline GridState make_grid_state(const std::map<int, Cell>& drone_cells, CellSet blocked = {}) {
    GridState s;
    CellSet seen;
    for (const auto& [id, cell] : drone_cells) {
        if (blocked.count(cell)) {
            throw Error(ErrorCode::InvalidArgument, "drone " + std::to_string(id) + " on a blocked cell");
        }
        if (!seen.insert(cell).second) {
            throw Error(ErrorCode::InvalidArgument, "two drones share a cell");
        }
        s.ids.push_back(id);
        s.cells.push_back(cell);
        s.energy.push_back(0);
    }
    s.blocked = std::make_shared<const CellSet>(std::move(blocked));
    return s;
}

enum class ConflictKind { OutOfBounds, Blocked, Vertex, Swap, Crossing };

inline const char* to_string(ConflictKind k) {
    switch (k) {
    case ConflictKind::OutOfBounds: return "out_of_bounds";
    case ConflictKind::Blocked: return "blocked";
    case ConflictKind::Vertex: return "vertex";
    case ConflictKind::Swap: return "swap";
    case ConflictKind::Crossing: return "crossing";
    }
    return "unknown";
}

struct Conflict {
    ConflictKind kind = ConflictKind::Vertex;
    std::vector<int> drone_ids;
};

using StepResult = std::variant<GridState, Conflict>;

/// Closest approach, in cell units, of two drones moving synchronously and
/// linearly from `a0` to `a1` and from `b0` to `b1` during one step.
inline double min_step_separation(Cell a0, Cell a1, Cell b0, Cell b1) {
    const double dx = b0.col - a0.col, dy = b0.row - a0.row;
    const double vx = (b1.col - b0.col) - (a1.col - a0.col);
    const double vy = (b1.row - b0.row) - (a1.row - a0.row);
    const double vv = vx * vx + vy * vy;
    double t = vv > 0.0 ? -(dx * vx + dy * vy) / vv : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(dx + t * vx, dy + t * vy);
}

/// Two synchronously moving drones closer than this (in cells) at any instant
/// of a step are treated as colliding.
inline constexpr double kMinStepSeparation = 0.5;

/// Synchronous CA update. `moves` is parallel to `state.ids`.
inline StepResult step(const GridState& state, const GridSpec& spec, std::span<const Move> moves) {
    const std::size_t n = state.size();
    if (moves.size() != n) throw Error(ErrorCode::SizeMismatch, "one move per drone required");

    GridState next;
    next.ids = state.ids;
    next.blocked = state.blocked;
    next.cells.resize(n);
    next.energy.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Cell target = offset_cell(state.cells[i], moves[i]);
        if (!in_bounds(spec, target)) return Conflict{ConflictKind::OutOfBounds, {state.ids[i]}};
        if (state.is_blocked(target)) return Conflict{ConflictKind::Blocked, {state.ids[i]}};
        next.cells[i] = target;
        next.energy[i] = state.energy[i] + move_energy(moves[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const std::vector<int> pair{state.ids[i], state.ids[j]};
            if (next.cells[i] == next.cells[j]) return Conflict{ConflictKind::Vertex, pair};
            if (next.cells[i] == state.cells[j] && next.cells[j] == state.cells[i]) {
                return Conflict{ConflictKind::Swap, pair};
            }
            if (min_step_separation(state.cells[i], next.cells[i], state.cells[j], next.cells[j]) <=
                kMinStepSeparation) {
                return Conflict{ConflictKind::Crossing, pair};
            }
        }
    }
    return next;
}

inline StepResult step(const GridState& state, const GridSpec& spec, const std::map<int, Move>& moves) {
    std::vector<Move> ordered;
    ordered.reserve(state.size());
    for (int id : state.ids) {
        auto it = moves.find(id);
        if (it == moves.end()) {
            throw Error(ErrorCode::InvalidArgument, "no move for drone " + std::to_string(id));
        }
        ordered.push_back(it->second);
    }
    return step(state, spec, ordered);
}

/// True iff every drone's cell center is strictly beyond the line through
/// `obstacle_center` perpendicular to `swarm_velocity`.
inline bool is_highest_disturbance(const GridState& state, const GridSpec& spec, Vec2 swarm_velocity,
                                   Vec2 obstacle_center) {
    if (swarm_velocity.norm() == 0.0) throw Error(ErrorCode::ZeroVelocity, "swarm velocity is zero");
    const Vec2 dir = swarm_velocity.normalized();
    for (const Cell& c : state.cells) {
        if ((cell_to_world(spec, c) - obstacle_center).dot(dir) <= kSideTolerance) return false;
    }
    return true;
}

}  // namespace swarm
