#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include <gmpxx.h>

#include "repart/ilp_model.hpp"

namespace repart {

enum class SolverMode { Pricing, Enumeration };

struct SolveOptions {
  SolverMode mode = SolverMode::Pricing;
  // Pricing mode: also run column generation and check that its LP bound does not exceed the
  // integer optimum.
  bool lp_certificate = false;
  std::size_t pool_cap = 200000;
};

// Enumeration mode was asked for a pool larger than the cap; use pricing mode instead.
struct PoolOverflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Optimal x for inst. With an anchor, x additionally minimizes ||x - anchor||_1 among optima.
IlpSolution solve(const IlpInstance& inst, const IlpSolution* anchor = nullptr, const SolveOptions& opts = {});

// Every gamma-valid reservation over the active classes and those some source vector uses, for every
// source vector in Z, plus the anchor's configurations whose source vector is still in Z.
std::vector<Configuration> configuration_pool(const IlpInstance& inst, std::size_t cap,
                                              const IlpSolution* anchor = nullptr);

struct LpBound {
  mpq_class value;  // in objective units (already divided by scale)
  int columns = 0;
  int rounds = 0;
};

// Column generation for the LP relaxation, seeded with the given configurations (which must
// contain a feasible set). Exact: stops only when no column has negative reduced cost.
LpBound lp_relaxation(const IlpInstance& inst, const std::vector<Configuration>& seed);

}  // namespace repart
