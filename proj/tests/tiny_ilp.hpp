#pragma once

// Brute-force oracle for tiny configuration ILPs, shared by the unit tests and the acceptance run.

#include <algorithm>
#include <limits>
#include <random>
#include <vector>

#include "repart/ilp_model.hpp"

namespace tiny_ilp {

using namespace repart;

// 3 classes, budget 4, ceil(1) = 2: the k = 8, delta = 1/2 shape.
inline IlpInstance tiny(int ell, CostMode mode) {
  IlpInstance inst;
  inst.num_classes = 3;
  inst.budget = 4;
  inst.ceil_one = 2;
  inst.ell = ell;
  inst.delta_units = 4;
  inst.mode = mode;
  inst.demand.assign(3, 0);
  return inst;
}

inline std::vector<ClassVec> all_reservations() {
  std::vector<ClassVec> out;
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; a + b <= 4; ++b)
      for (int c = 0; a + b + c <= 4; c += 2) out.push_back({a, b, c});
  return out;
}

struct Brute {
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  std::vector<IlpSolution> optima;
};

// Tries every reservation for every server independently.
inline Brute brute_force(const IlpInstance& inst) {
  std::vector<ClassVec> servers;
  for (const auto& [m, n] : inst.z)
    for (int c = 0; c < n; ++c) servers.push_back(m);
  auto rs = all_reservations();
  Brute out;
  std::vector<std::size_t> pick(servers.size(), 0);
  while (true) {
    std::vector<std::int64_t> cover(3, 0);
    std::int64_t cost = 0;
    for (std::size_t s = 0; s < servers.size(); ++s) {
      const ClassVec& r = rs[pick[s]];
      for (int i = 0; i < 3; ++i) cover[i] += r[i];
      if (!geq(r, servers[s])) cost += inst.extra_cost(servers[s]);
    }
    bool ok = true;
    for (int i = 0; i < 3; ++i) ok = ok && cover[i] >= inst.demand[i];
    if (ok && cost <= out.best) {
      if (cost < out.best) out.optima.clear();
      out.best = cost;
      IlpSolution sol;
      for (std::size_t s = 0; s < servers.size(); ++s) ++sol.x[{rs[pick[s]], servers[s]}];
      out.optima.push_back(sol);
    }
    std::size_t s = 0;
    while (s < pick.size() && ++pick[s] == rs.size()) pick[s++] = 0;
    if (s == pick.size()) break;
  }
  return out;
}

inline IlpInstance random_tiny(std::mt19937& rng) {
  static const std::vector<ClassVec> sources = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {0, 1, 0},
                                                {1, 1, 0}, {0, 2, 0}, {0, 0, 2}};
  int ell = std::uniform_int_distribution<int>(2, 3)(rng);
  IlpInstance inst = tiny(ell, rng() % 2 ? CostMode::Augmented : CostMode::Deterministic);
  std::uniform_int_distribution<std::size_t> pick(0, sources.size() - 1);
  for (int s = 0; s < ell; ++s) ++inst.z[sources[pick(rng)]];
  inst.demand[0] = std::uniform_int_distribution<int>(0, 2 * ell)(rng);
  inst.demand[1] = std::uniform_int_distribution<int>(0, 3)(rng);
  inst.demand[2] = 2 * std::uniform_int_distribution<int>(0, 2)(rng);
  return inst;
}

inline int min_distance(const std::vector<IlpSolution>& optima, const IlpSolution& anchor) {
  int best = std::numeric_limits<int>::max();
  for (const auto& o : optima) best = std::min(best, l1_distance(o, anchor));
  return best;
}

}  // namespace tiny_ilp
