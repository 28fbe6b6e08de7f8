#pragma once

#include <utility>
#include <vector>

#include <gmpxx.h>

namespace repart {

enum class Sense { Le, Ge, Eq };

struct LpRow {
  std::vector<std::pair<int, mpq_class>> coeffs;
  Sense sense = Sense::Ge;
  mpq_class rhs;
};

// minimize cost . x  subject to rows, x >= 0.
struct LpProblem {
  int num_vars = 0;
  std::vector<mpq_class> cost;
  std::vector<LpRow> rows;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  mpq_class objective;
  std::vector<mpq_class> x;
  // One multiplier per row, for the row as written: reduced cost of x_j is cost_j - sum_i duals_i * a_ij.
  std::vector<mpq_class> duals;
};

// Two-phase dense tableau simplex in exact rational arithmetic with Bland's rule.
LpResult solve_lp(const LpProblem& lp);

struct MipResult {
  LpStatus status = LpStatus::Infeasible;
  mpq_class objective;
  std::vector<mpq_class> x;
  long nodes = 0;
};

// Depth-first LP branch-and-bound; vars flagged in `integer` must take integral values.
MipResult solve_mip(const LpProblem& lp, const std::vector<bool>& integer, long node_limit = 1000000);

}  // namespace repart
