#pragma once

#include <cstdint>
#include <vector>

#include "repart/adversaries.hpp"
#include "repart/params.hpp"

namespace repart {

struct Component {
  int volume = 0;              // in 1/k units
  std::vector<int> histogram;  // vertices per color
};

struct FinalInstance {
  int k = 0;
  int ell = 0;
  std::vector<Component> components;
};

FinalInstance final_instance(int k, int ell, const std::vector<Edge>& edges);

// Exact offline optimum of the one-shot reassignment; ell above `max_ell` is rejected.
Rational opt_cost(const FinalInstance& inst, int max_ell = 8, std::int64_t node_limit = 50000000);

// Branch and bound only, without the assignment shortcut (cross-check helper).
Rational opt_cost_bnb(const FinalInstance& inst, std::int64_t node_limit = 50000000);

// Minimum-cost perfect assignment of a square integer matrix (Hungarian method).
std::int64_t min_cost_assignment(const std::vector<std::vector<std::int64_t>>& cost);

Rational nm_lower_bound(const FinalInstance& inst);
Rational ilp_lower_bound(int h, const Params& params);

}  // namespace repart
