#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "swarm/ga_planner.hpp"

using namespace swarm;

namespace {

template <typename F>
void expect_code(F&& f, ErrorCode code) {
    try {
        f();
        ADD_FAILURE() << "no exception, expected " << to_string(code);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), code) << e.what();
    }
}

GridSpec grid10() {
    GridSpec g;
    g.cell_size = 1.0;
    g.width = 10;
    g.height = 10;
    return g;
}

// One drone sitting exactly on the line through the obstacle center.
struct Single {
    GridState start = make_grid_state({{1, {4, 5}}});
    PlanContext ctx;
    Single() {
        ctx.spec = grid10();
        ctx.swarm_velocity = {1.0, 0.0};
        ctx.obstacle_center = {4.5, 5.5};
    }
};

}  // namespace

TEST(Evaluate, SingleEastMove) {
    Single s;
    const Fitness f = evaluate(uniform_plan({1}, 1, Move::E), s.start, s.ctx);
    EXPECT_TRUE(f.feasible);
    EXPECT_EQ(f.steps_to_hfd, 1);
    EXPECT_EQ(f.total_energy, 1);
    EXPECT_DOUBLE_EQ(f.scalar_cost, 11.0);
}

TEST(Evaluate, DiagonalCostsTwo) {
    Single s;
    const Fitness f = evaluate(uniform_plan({1}, 1, Move::NE), s.start, s.ctx);
    EXPECT_TRUE(f.feasible);
    EXPECT_EQ(f.steps_to_hfd, 1);
    EXPECT_EQ(f.total_energy, 2);
    EXPECT_DOUBLE_EQ(f.scalar_cost, 12.0);
}

TEST(Evaluate, StayIsInfeasible) {
    Single s;
    const Fitness f = evaluate(uniform_plan({1}, 3, Move::Stay), s.start, s.ctx);
    EXPECT_FALSE(f.feasible);
    EXPECT_GT(f.scalar_cost, 1e6);
}

TEST(Evaluate, MovesAfterTargetAreIgnored) {
    Single s;
    Chromosome ch = uniform_plan({1}, 3, Move::E);
    const Fitness a = evaluate(ch, s.start, s.ctx);
    ch.at(0, 1) = Move::NW;
    ch.at(0, 2) = Move::SW;
    const Fitness b = evaluate(ch, s.start, s.ctx);
    EXPECT_EQ(a.scalar_cost, b.scalar_cost);
    EXPECT_EQ(b.steps_to_hfd, 1);
}

TEST(Evaluate, AlreadyPastLineCostsZero) {
    Single s;
    s.ctx.obstacle_center = {1.0, 5.5};
    const Fitness f = evaluate(uniform_plan({1}, 2, Move::W), s.start, s.ctx);
    EXPECT_TRUE(f.feasible);
    EXPECT_EQ(f.steps_to_hfd, 0);
    EXPECT_EQ(f.scalar_cost, 0.0);
}

TEST(Evaluate, ImmediateSwapIsInfeasible) {
    PlanContext ctx;
    ctx.spec = grid10();
    ctx.obstacle_center = {5.5, 5.5};
    const GridState start = make_grid_state({{1, {4, 5}}, {2, {5, 5}}});
    Chromosome ch = uniform_plan({1, 2}, 2, Move::E);
    ch.at(1, 0) = Move::W;
    const Fitness f = evaluate(ch, start, ctx);
    EXPECT_FALSE(f.feasible);
    EXPECT_GT(f.scalar_cost, 1e6);
}

TEST(Evaluate, BlockedCellIsInfeasible) {
    PlanContext ctx;
    ctx.spec = grid10();
    ctx.obstacle_center = {4.5, 5.5};
    const GridState start = make_grid_state({{1, {4, 5}}}, {{5, 5}});
    EXPECT_FALSE(evaluate(uniform_plan({1}, 1, Move::E), start, ctx).feasible);
    EXPECT_TRUE(evaluate(uniform_plan({1}, 1, Move::NE), start, ctx).feasible);
}

TEST(Evaluate, StaticFormMatchesContext) {
    Single s;
    const Chromosome ch = uniform_plan({1}, 2, Move::SE);
    const Fitness a = evaluate(ch, s.start, s.ctx);
    const Fitness b = evaluate(ch, s.start, s.ctx.spec, s.ctx.swarm_velocity, s.ctx.obstacle_center);
    EXPECT_EQ(a.scalar_cost, b.scalar_cost);
}

TEST(Evaluate, MismatchedIdsThrow) {
    Single s;
    expect_code([&] { evaluate(uniform_plan({2}, 1, Move::E), s.start, s.ctx); }, ErrorCode::SizeMismatch);
}

TEST(Evaluate, InfeasibleAlwaysWorseThanFeasible) {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 50; ++k) {
        const oracle::MicroInstance in = oracle::random_micro_instance(300 + k);
        const GridState start = oracle::start_state(in);
        const PlanContext ctx = oracle::context(in);
        double worst_feasible = -1.0, best_infeasible = std::numeric_limits<double>::infinity();
        for (int p = 0; p < 200; ++p) {
            Chromosome ch = uniform_plan(start.ids, in.horizon, Move::Stay);
            for (Move& m : ch.genes) m = kAllMoves[rng() % kAllMoves.size()];
            const Fitness f = evaluate(ch, start, ctx);
            if (f.feasible) {
                worst_feasible = std::max(worst_feasible, f.scalar_cost);
            } else {
                best_infeasible = std::min(best_infeasible, f.scalar_cost);
            }
        }
        EXPECT_LT(worst_feasible, best_infeasible);
    }
}

TEST(Evaluate, DominanceImpliesLowerCost) {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 40; ++k) {
        const oracle::MicroInstance in = oracle::random_micro_instance(500 + k);
        const GridState start = oracle::start_state(in);
        const PlanContext ctx = oracle::context(in);
        std::vector<Fitness> feasible;
        for (int p = 0; p < 300; ++p) {
            Chromosome ch = uniform_plan(start.ids, in.horizon, Move::Stay);
            for (Move& m : ch.genes) m = kAllMoves[rng() % kAllMoves.size()];
            const Fitness f = evaluate(ch, start, ctx);
            if (f.feasible) feasible.push_back(f);
        }
        for (const Fitness& a : feasible)
            for (const Fitness& b : feasible) {
                const bool dominates = a.steps_to_hfd <= b.steps_to_hfd && a.total_energy <= b.total_energy &&
                                       (a.steps_to_hfd < b.steps_to_hfd || a.total_energy < b.total_energy);
                if (dominates) {
                    EXPECT_LT(a.scalar_cost, b.scalar_cost);
                }
            }
    }
}

TEST(Population, SeededAndShaped) {
    GAConfig cfg;
    cfg.population_size = 30;
    cfg.horizon = 3;
    cfg.rng_seed = 42;
    const auto a = init_population(cfg, {1, 2});
    const auto b = init_population(cfg, {1, 2});
    ASSERT_EQ(a.size(), 30u);
    EXPECT_EQ(a, b);
    for (const Chromosome& c : a) {
        EXPECT_EQ(c.horizon, 3);
        EXPECT_EQ(c.genes.size(), 6u);
    }
    cfg.rng_seed = 43;
    EXPECT_NE(init_population(cfg, {1, 2}), a);
}

TEST(Population, InvalidConfig) {
    GAConfig cfg;
    cfg.horizon = 0;
    expect_code([&] { init_population(cfg, {1}); }, ErrorCode::InvalidArgument);
    cfg = {};
    cfg.elite_count = 0;
    expect_code([&] { validate(cfg); }, ErrorCode::InvalidArgument);
    cfg = {};
    cfg.mutation_rate = 1.5;
    expect_code([&] { validate(cfg); }, ErrorCode::InvalidArgument);
    cfg = {};
    cfg.w_e = 0.0;
    expect_code([&] { validate(cfg); }, ErrorCode::InvalidArgument);
}

TEST(Evolve, ClearFieldFindsOneStepOptimum) {
    Single s;
    GAConfig cfg;
    cfg.horizon = 3;
    cfg.rng_seed = 9;
    const EvolveResult r = evolve(cfg, s.start, s.ctx);
    EXPECT_DOUBLE_EQ(r.fitness.scalar_cost, cfg.w_t + cfg.w_e);
    EXPECT_EQ(r.best.at(0, 0), Move::E);
}

TEST(Evolve, HistoryIsMonotoneAndDeterministic) {
    for (int k = 0; k < 20; ++k) {
        const oracle::MicroInstance in = oracle::random_micro_instance(700 + k);
        GAConfig cfg;
        cfg.horizon = in.horizon;
        cfg.generations = 30;
        cfg.rng_seed = k;
        const EvolveResult a = evolve_best_effort(cfg, oracle::start_state(in), oracle::context(in));
        const EvolveResult b = evolve_best_effort(cfg, oracle::start_state(in), oracle::context(in));
        ASSERT_EQ(a.best_cost_history.size(), 31u);
        for (std::size_t g = 1; g < a.best_cost_history.size(); ++g)
            EXPECT_LE(a.best_cost_history[g], a.best_cost_history[g - 1]);
        EXPECT_EQ(a.best, b.best);
        EXPECT_EQ(a.best_cost_history, b.best_cost_history);
        // The reported fitness is the fitness of the returned plan.
        EXPECT_EQ(evaluate(a.best, oracle::start_state(in), oracle::context(in)).scalar_cost, a.fitness.scalar_cost);
    }
}

TEST(Evolve, SeedsEnterGenerationZero) {
    Single s;
    GAConfig cfg;
    cfg.horizon = 2;
    cfg.generations = 0;
    const EvolveResult r = evolve_best_effort(cfg, s.start, s.ctx, {uniform_plan({1}, 2, Move::E)});
    EXPECT_DOUBLE_EQ(r.fitness.scalar_cost, 11.0);
    expect_code([&] { evolve_best_effort(cfg, s.start, s.ctx, {uniform_plan({1}, 3, Move::E)}); },
                ErrorCode::InvalidArgument);
}

TEST(Evolve, BoxedInThrowsNoFeasiblePlan) {
    PlanContext ctx;
    ctx.spec = grid10();
    ctx.obstacle_center = {4.5, 5.5};
    const GridState start = make_grid_state({{1, {4, 5}}}, {{5, 4}, {5, 5}, {5, 6}});
    GAConfig cfg;
    cfg.horizon = 1;
    expect_code([&] { evolve(cfg, start, ctx); }, ErrorCode::NoFeasiblePlan);
    EXPECT_FALSE(evolve_best_effort(cfg, start, ctx).fitness.feasible);
}

TEST(Evolve, MatchesExhaustiveOptimum) {
    const oracle::GaOracleTally t = oracle::run_ga_oracle(100);
    EXPECT_EQ(t.instances, 100);
    EXPECT_EQ(t.missed_feasible, 0);
    EXPECT_EQ(t.below_optimum, 0);
    EXPECT_GE(t.optimal, 95);
}

TEST(PlanToTShape, CellCenters) {
    GridSpec g = grid10();
    g.origin = {-5.0, 2.0};
    g.cell_size = 2.0;
    const GridState start = make_grid_state({{1, {1, 1}}, {2, {3, 1}}});
    const auto wp = plan_to_tshape(uniform_plan({1, 2}, 2, Move::N), start, g);
    ASSERT_EQ(wp.size(), 2u);
    EXPECT_EQ(wp[0][0], Vec2(-2.0, 7.0));
    EXPECT_EQ(wp[0][1], Vec2(2.0, 7.0));
    EXPECT_EQ(wp[1][0], Vec2(-2.0, 9.0));
    EXPECT_EQ(plan_to_tshape(uniform_plan({1, 2}, 2, Move::N), start, g, 1).size(), 1u);
    EXPECT_TRUE(plan_to_tshape(uniform_plan({1, 2}, 2, Move::N), start, g, 0).empty());
}

TEST(PlanToTShape, Errors) {
    const GridSpec g = grid10();
    const GridState start = make_grid_state({{1, {4, 5}}, {2, {5, 5}}});
    expect_code([&] { plan_to_tshape(uniform_plan({1, 2}, 1, Move::N), start, g, 2); }, ErrorCode::InvalidArgument);
    expect_code([&] { plan_to_tshape(uniform_plan({1}, 1, Move::N), start, g); }, ErrorCode::SizeMismatch);
    Chromosome swap = uniform_plan({1, 2}, 1, Move::E);
    swap.at(1, 0) = Move::W;
    expect_code([&] { plan_to_tshape(swap, start, g); }, ErrorCode::InfeasiblePlan);
    const GridState edge = make_grid_state({{1, {9, 0}}});
    expect_code([&] { plan_to_tshape(uniform_plan({1}, 1, Move::E), edge, g); }, ErrorCode::InfeasiblePlan);
}
