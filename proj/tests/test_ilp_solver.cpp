#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <random>

#include "repart/ilp_solver.hpp"
#include "tiny_ilp.hpp"

using namespace repart;
using namespace tiny_ilp;

TEST(IlpSolver, MatchesBruteForceOnTinyInstances) {
  std::mt19937 rng(21);
  int feasible = 0;
  for (int t = 0; t < 150; ++t) {
    IlpInstance inst = random_tiny(rng);
    Brute b = brute_force(inst);
    if (b.optima.empty()) {
      EXPECT_THROW(solve(inst), InvariantViolation);
      continue;
    }
    ++feasible;
    for (SolverMode mode : {SolverMode::Pricing, SolverMode::Enumeration}) {
      SolveOptions opts;
      opts.mode = mode;
      opts.lp_certificate = mode == SolverMode::Pricing;
      IlpSolution sol = solve(inst, nullptr, opts);
      EXPECT_TRUE(check_solution(inst, sol).empty());
      EXPECT_EQ(sol.scaled_objective, b.best) << instance_json(inst, &sol);
    }
  }
  EXPECT_GE(feasible, 50);
}

TEST(IlpSolver, AnchoredSolveIsNearestOptimum) {
  std::mt19937 rng(22);
  int checked = 0;
  for (int t = 0; t < 200 && checked < 40; ++t) {
    IlpInstance inst = random_tiny(rng);
    Brute b = brute_force(inst);
    if (b.optima.empty()) continue;
    // Anchor: an optimum of a perturbed instance with the same source vectors.
    IlpInstance other = inst;
    other.demand[0] = std::max<std::int64_t>(0, inst.demand[0] - 1);
    other.demand[1] = std::min<std::int64_t>(3, inst.demand[1] + 1);
    Brute bo = brute_force(other);
    if (bo.optima.empty()) continue;
    const IlpSolution& anchor = bo.optima[rng() % bo.optima.size()];
    ++checked;
    for (SolverMode mode : {SolverMode::Pricing, SolverMode::Enumeration}) {
      SolveOptions opts;
      opts.mode = mode;
      IlpSolution sol = solve(inst, &anchor, opts);
      EXPECT_EQ(sol.scaled_objective, b.best);
      EXPECT_EQ(l1_distance(sol, anchor), min_distance(b.optima, anchor));
    }
  }
  EXPECT_GE(checked, 20);
}

TEST(IlpSolver, AnchorThatIsOptimalIsKept) {
  std::mt19937 rng(23);
  for (int t = 0; t < 50; ++t) {
    IlpInstance inst = random_tiny(rng);
    Brute b = brute_force(inst);
    if (b.optima.empty()) continue;
    IlpSolution anchor = b.optima.front();
    evaluate(inst, anchor);
    EXPECT_EQ(l1_distance(solve(inst, &anchor), anchor), 0);
  }
}

TEST(IlpSolver, PoolSizeMatchesNestedLoops) {
  IlpInstance inst = tiny(2, CostMode::Deterministic);
  inst.z[{2, 0, 0}] = 1;
  inst.z[{0, 2, 0}] = 1;
  inst.demand = {1, 0, 0};
  // class 2 is neither demanded nor used by a source vector: r = (a, b, 0) with a + b <= 4
  EXPECT_EQ(configuration_pool(inst, 1000).size(), 2u * 15u);
  inst.demand = {1, 1, 2};
  EXPECT_EQ(configuration_pool(inst, 1000).size(), 2u * all_reservations().size());
  EXPECT_THROW(configuration_pool(inst, 10), PoolOverflow);
}

TEST(IlpSolver, LpRelaxationBelowIntegerOptimum) {
  std::mt19937 rng(24);
  for (int t = 0; t < 60; ++t) {
    IlpInstance inst = random_tiny(rng);
    if (brute_force(inst).optima.empty()) continue;
    IlpSolution sol = solve(inst);
    std::vector<Configuration> seed;
    for (const auto& [c, n] : sol.x) seed.push_back(c);
    LpBound lb = lp_relaxation(inst, seed);
    mpq_class integral(static_cast<long>(sol.scaled_objective), static_cast<long>(inst.scale()));
    integral.canonicalize();
    EXPECT_LE(lb.value, integral);
    EXPECT_GE(lb.value, 0);
  }
}

TEST(IlpSolver, AugmentedPrefersDominatingSourceVectors) {
  // Six class-2 units force one server onto (0,0,4), so exactly one server is extraordinary and
  // either could be. The prefix-larger source vector is the cheaper one to give up.
  IlpInstance inst = tiny(2, CostMode::Augmented);
  ClassVec big{2, 0, 0}, small{0, 2, 0};
  inst.z[big] = 1;
  inst.z[small] = 1;
  inst.demand = {0, 0, 6};
  IlpSolution sol = solve(inst);
  ASSERT_EQ(sol.extraordinary_count(), 1);
  EXPECT_LT(inst.extra_cost(big), inst.extra_cost(small));
  for (const auto& [c, n] : sol.x)
    if (!c.ordinary()) EXPECT_EQ(c.m, big);
}
