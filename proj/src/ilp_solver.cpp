#include "repart/ilp_solver.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <set>

#include "repart/exact_lp.hpp"

namespace repart {

namespace {

struct Group {
  ClassVec m;
  int ordinary = 0;
  int extra = 0;
};

struct Bin {
  const ClassVec* m;
  bool ordinary;
  int cap;
};

class Packer {
 public:
  Packer(std::vector<int> caps, std::vector<int> items) : cap_(std::move(caps)), items_(std::move(items)) {
    where_.assign(items_.size(), -1);
  }

  bool run() { return dfs(0); }
  const std::vector<int>& where() const { return where_; }

 private:
  bool dfs(std::size_t idx) {
    if (idx == items_.size()) return true;
    int size = items_[idx];
    if (size == 1) {
      // Items are sorted descending, so everything left has size 1.
      long left = static_cast<long>(items_.size() - idx);
      long room = std::accumulate(cap_.begin(), cap_.end(), 0L);
      if (room < left) return false;
      for (std::size_t b = 0; b < cap_.size() && idx < items_.size(); ++b)
        while (cap_[b] > 0 && idx < items_.size()) {
          --cap_[b];
          where_[idx++] = static_cast<int>(b);
        }
      return true;
    }
    std::vector<int> key = cap_;
    std::sort(key.begin(), key.end());
    auto memo = std::make_pair(idx, key);
    if (failed_.count(memo)) return false;
    std::set<int> tried;
    for (std::size_t b = 0; b < cap_.size(); ++b) {
      if (cap_[b] < size || !tried.insert(cap_[b]).second) continue;
      cap_[b] -= size;
      where_[idx] = static_cast<int>(b);
      if (dfs(idx + 1)) return true;
      cap_[b] += size;
    }
    failed_.insert(std::move(memo));
    return false;
  }

  std::vector<int> cap_;
  std::vector<int> items_;
  std::vector<int> where_;
  std::set<std::pair<std::size_t, std::vector<int>>> failed_;
};

// Finds reservations for the servers described by groups so that, together with the already
// fixed coverage, every class demand is met. Exact for the given ordinary/extraordinary split.
std::optional<std::vector<Configuration>> realize(const IlpInstance& inst, const std::vector<std::int64_t>& fixed,
                                                  const std::vector<Group>& groups) {
  const int nc = inst.num_classes;
  std::vector<std::int64_t> residual(nc);
  for (int i = 0; i < nc; ++i) {
    std::int64_t d = inst.demand[i] - fixed[i];
    for (const Group& g : groups) d -= static_cast<std::int64_t>(g.ordinary) * g.m[i];
    residual[i] = std::max<std::int64_t>(0, d);
  }
  std::vector<Bin> bins;
  for (const Group& g : groups) {
    for (int c = 0; c < g.ordinary; ++c) bins.push_back({&g.m, true, inst.budget - l1(g.m)});
    for (int c = 0; c < g.extra; ++c) bins.push_back({&g.m, false, inst.budget});
  }
  std::vector<int> items;
  std::vector<int> item_class;
  long item_volume = 0;
  for (int i = nc - 1; i >= 1; --i) {
    std::int64_t n = (residual[i] + i - 1) / i;
    for (std::int64_t c = 0; c < n; ++c) {
      items.push_back(i);
      item_class.push_back(i);
    }
    item_volume += n * i;
  }
  long room = 0;
  for (const Bin& b : bins) room += b.cap;
  if (room < item_volume + residual[0]) return std::nullopt;
  if (bins.empty()) {
    if (item_volume == 0 && residual[0] == 0) return std::vector<Configuration>{};
    return std::nullopt;
  }
  std::vector<int> caps;
  for (const Bin& b : bins) caps.push_back(b.cap);
  Packer packer(caps, items);
  if (!packer.run()) return std::nullopt;

  std::vector<Configuration> out;
  std::vector<int> left(bins.size());
  for (std::size_t b = 0; b < bins.size(); ++b) {
    Configuration c;
    c.m = *bins[b].m;
    c.r = bins[b].ordinary ? c.m : ClassVec(nc, 0);
    out.push_back(std::move(c));
    left[b] = bins[b].cap;
  }
  for (std::size_t t = 0; t < items.size(); ++t) {
    int b = packer.where()[t];
    out[b].r[item_class[t]] += items[t];
    left[b] -= items[t];
  }
  std::int64_t fluid = residual[0];
  for (std::size_t b = 0; b < bins.size() && fluid > 0; ++b) {
    int add = static_cast<int>(std::min<std::int64_t>(left[b], fluid));
    out[b].r[0] += add;
    fluid -= add;
  }
  for (std::size_t b = 0; b < bins.size(); ++b)
    if (!bins[b].ordinary && out[b].ordinary())
      throw InvariantViolation("structural solve: extraordinary slot received an ordinary reservation");
  return out;
}

struct HVec {
  std::int64_t cost;
  std::vector<int> h;
};

std::vector<HVec> enumerate_h(const IlpInstance& inst, const std::vector<ClassVec>& ms, const std::vector<int>& limit) {
  std::vector<HVec> out;
  std::vector<int> h(ms.size(), 0);
  auto rec = [&](auto&& self, std::size_t k, std::int64_t cost) -> void {
    if (k == ms.size()) {
      out.push_back({cost, h});
      return;
    }
    std::int64_t c = inst.extra_cost(ms[k]);
    for (int v = 0; v <= limit[k]; ++v) {
      h[k] = v;
      self(self, k + 1, cost + c * v);
    }
    h[k] = 0;
  };
  rec(rec, 0, 0);
  std::sort(out.begin(), out.end(), [](const HVec& a, const HVec& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    return a.h < b.h;
  });
  return out;
}

IlpSolution to_solution(const IlpInstance& inst, const std::vector<Configuration>& configs) {
  IlpSolution sol;
  for (const Configuration& c : configs) ++sol.x[c];
  evaluate(inst, sol);
  return sol;
}

void require_valid(const IlpInstance& inst, const IlpSolution& sol, const char* who) {
  auto errs = check_solution(inst, sol);
  if (!errs.empty()) throw InvariantViolation(std::string(who) + ": " + errs.front());
}

IlpSolution structural_solve(const IlpInstance& inst) {
  std::vector<ClassVec> ms;
  std::vector<int> zs;
  for (const auto& [m, n] : inst.z) {
    ms.push_back(m);
    zs.push_back(n);
  }
  std::vector<std::int64_t> none(inst.num_classes, 0);
  for (const HVec& hv : enumerate_h(inst, ms, zs)) {
    std::vector<Group> groups;
    for (std::size_t k = 0; k < ms.size(); ++k) groups.push_back({ms[k], zs[k] - hv.h[k], hv.h[k]});
    if (auto configs = realize(inst, none, groups)) return to_solution(inst, *configs);
  }
  throw InvariantViolation("ILP infeasible");
}

IlpSolution anchored_structural(const IlpInstance& inst, const IlpSolution& best, const IlpSolution& anchor) {
  std::vector<std::pair<Configuration, int>> cand;
  for (const auto& [c, n] : anchor.x)
    if (inst.z.count(c.m) && inst.valid_reservation(c.r)) cand.push_back({c, n});

  struct Kept {
    int size;
    std::vector<int> take;
  };
  std::vector<Kept> subsets;
  std::vector<int> take(cand.size(), 0);
  auto rec = [&](auto&& self, std::size_t k, int size) -> void {
    if (k == cand.size()) {
      subsets.push_back({size, take});
      return;
    }
    for (int v = cand[k].second; v >= 0; --v) {
      take[k] = v;
      self(self, k + 1, size + v);
    }
    take[k] = 0;
  };
  rec(rec, 0, 0);
  std::stable_sort(subsets.begin(), subsets.end(), [](const Kept& a, const Kept& b) { return a.size > b.size; });

  const std::int64_t target = best.scaled_objective;
  for (const Kept& kept : subsets) {
    std::map<ClassVec, int> used;
    std::int64_t cost = 0;
    std::vector<std::int64_t> fixed(inst.num_classes, 0);
    std::vector<Configuration> configs;
    for (std::size_t k = 0; k < cand.size(); ++k) {
      if (kept.take[k] == 0) continue;
      const Configuration& c = cand[k].first;
      used[c.m] += kept.take[k];
      cost += inst.scaled_cost(c) * kept.take[k];
      for (int i = 0; i < inst.num_classes; ++i) fixed[i] += static_cast<std::int64_t>(c.r[i]) * kept.take[k];
      for (int t = 0; t < kept.take[k]; ++t) configs.push_back(c);
    }
    if (cost > target) continue;
    bool fits = true;
    std::vector<ClassVec> ms;
    std::vector<int> rest;
    for (const auto& [m, n] : inst.z) {
      int u = used.count(m) ? used[m] : 0;
      if (u > n) fits = false;
      ms.push_back(m);
      rest.push_back(n - u);
    }
    if (!fits) continue;
    for (const HVec& hv : enumerate_h(inst, ms, rest)) {
      if (cost + hv.cost != target) continue;
      std::vector<Group> groups;
      for (std::size_t k = 0; k < ms.size(); ++k)
        if (rest[k] > 0) groups.push_back({ms[k], rest[k] - hv.h[k], hv.h[k]});
      if (auto more = realize(inst, fixed, groups)) {
        configs.insert(configs.end(), more->begin(), more->end());
        return to_solution(inst, configs);
      }
    }
  }
  throw InvariantViolation("anchored re-solve found no optimal solution");
}

// Active classes plus any class some source vector uses, so ordinary reservations r = m + e exist.
std::vector<int> covering_classes(const IlpInstance& inst) {
  std::vector<char> use(inst.num_classes, 0);
  for (int i : inst.active_classes()) use[i] = 1;
  for (const auto& [m, n] : inst.z)
    for (int i = 0; i < inst.num_classes; ++i)
      if (m[i] > 0) use[i] = 1;
  std::vector<int> out;
  for (int i = 0; i < inst.num_classes; ++i)
    if (use[i]) out.push_back(i);
  return out;
}

LpProblem master(const IlpInstance& inst, const std::vector<Configuration>& cols, std::vector<int>& classes,
                 std::vector<ClassVec>& ms) {
  classes = covering_classes(inst);
  ms.clear();
  for (const auto& [m, n] : inst.z) ms.push_back(m);
  LpProblem lp;
  lp.num_vars = static_cast<int>(cols.size());
  for (const Configuration& c : cols) lp.cost.emplace_back(static_cast<long>(inst.scaled_cost(c)));
  for (int i : classes) {
    LpRow row;
    row.sense = Sense::Ge;
    row.rhs = static_cast<long>(inst.demand[i]);
    for (std::size_t j = 0; j < cols.size(); ++j)
      if (cols[j].r[i] != 0) row.coeffs.push_back({static_cast<int>(j), mpq_class(cols[j].r[i])});
    lp.rows.push_back(std::move(row));
  }
  for (const ClassVec& m : ms) {
    LpRow row;
    row.sense = Sense::Eq;
    row.rhs = inst.z.at(m);
    for (std::size_t j = 0; j < cols.size(); ++j)
      if (cols[j].m == m) row.coeffs.push_back({static_cast<int>(j), mpq_class(1)});
    lp.rows.push_back(std::move(row));
  }
  return lp;
}

// max sum value * count subject to sum weight * count <= cap, classes weigh i (class 0 weighs 1).
std::pair<mpq_class, ClassVec> knapsack(int nc, const std::vector<int>& classes, const std::vector<mpq_class>& pi,
                                        int cap) {
  std::vector<mpq_class> best(cap + 1, mpq_class(0));
  std::vector<int> choice(cap + 1, -1);
  for (int c = 1; c <= cap; ++c) {
    best[c] = best[c - 1];
    for (std::size_t t = 0; t < classes.size(); ++t) {
      int w = std::max(1, classes[t]);
      if (w > c || sgn(pi[t]) <= 0) continue;
      mpq_class v = best[c - w] + pi[t] * w;
      if (v > best[c]) {
        best[c] = v;
        choice[c] = static_cast<int>(t);
      }
    }
  }
  ClassVec e(nc, 0);
  int c = cap;
  while (c > 0) {
    if (choice[c] < 0) {
      --c;
      continue;
    }
    int cls = classes[choice[c]];
    int w = std::max(1, cls);
    e[cls] += w;
    c -= w;
  }
  return {best[cap], e};
}

mpq_class dot(const std::vector<int>& classes, const std::vector<mpq_class>& pi, const ClassVec& v) {
  mpq_class s = 0;
  for (std::size_t t = 0; t < classes.size(); ++t) s += pi[t] * v[classes[t]];
  return s;
}

void enumerate_reservations(const IlpInstance& inst, const std::vector<int>& classes, std::size_t cap,
                            std::vector<ClassVec>& out) {
  ClassVec r(inst.num_classes, 0);
  auto rec = [&](auto&& self, std::size_t k, int left) -> void {
    if (k == classes.size()) {
      if (out.size() >= cap) throw PoolOverflow("configuration pool exceeds cap; use pricing mode");
      out.push_back(r);
      return;
    }
    int i = classes[k];
    int step = std::max(1, i);
    for (int v = 0; v <= left; v += step) {
      r[i] = v;
      self(self, k + 1, left - v);
    }
    r[i] = 0;
  };
  rec(rec, 0, inst.budget);
}

IlpSolution enumeration_solve(const IlpInstance& inst, const IlpSolution* anchor, std::size_t cap) {
  std::vector<Configuration> pool = configuration_pool(inst, cap, anchor);
  std::vector<int> classes;
  std::vector<ClassVec> ms;
  LpProblem lp = master(inst, pool, classes, ms);
  std::vector<bool> integer(pool.size(), true);
  MipResult first = solve_mip(lp, integer);
  if (first.status != LpStatus::Optimal) throw InvariantViolation("ILP infeasible (enumeration)");
  std::vector<mpq_class> x = first.x;

  if (anchor) {
    // Stage 2: minimize the distance to the anchor among cost-optimal solutions.
    std::map<Configuration, int> a = anchor->x;
    LpProblem lp2 = lp;
    int n = static_cast<int>(pool.size());
    std::vector<int> dvar(pool.size(), -1);
    lp2.cost.assign(n, mpq_class(0));
    for (int j = 0; j < n; ++j) {
      auto it = a.find(pool[j]);
      if (it == a.end()) {
        lp2.cost[j] = 1;
        continue;
      }
      dvar[j] = lp2.num_vars++;
      lp2.cost.emplace_back(1);
      long aj = it->second;
      lp2.rows.push_back(LpRow{{{dvar[j], mpq_class(1)}, {j, mpq_class(-1)}}, Sense::Ge, mpq_class(-aj)});
      lp2.rows.push_back(LpRow{{{dvar[j], mpq_class(1)}, {j, mpq_class(1)}}, Sense::Ge, mpq_class(aj)});
    }
    LpRow budget_row;
    budget_row.sense = Sense::Le;
    budget_row.rhs = first.objective;
    for (int j = 0; j < n; ++j)
      if (sgn(lp.cost[j]) != 0) budget_row.coeffs.push_back({j, lp.cost[j]});
    lp2.rows.push_back(std::move(budget_row));
    std::vector<bool> integer2(lp2.num_vars, false);
    for (int j = 0; j < n; ++j) integer2[j] = true;
    MipResult second = solve_mip(lp2, integer2);
    if (second.status != LpStatus::Optimal) throw InvariantViolation("anchored stage infeasible (enumeration)");
    x.assign(second.x.begin(), second.x.begin() + n);
  }

  IlpSolution sol;
  for (std::size_t j = 0; j < pool.size(); ++j) {
    if (sgn(x[j]) == 0) continue;
    sol.x[pool[j]] = static_cast<int>(x[j].get_num().get_si());
  }
  evaluate(inst, sol);
  return sol;
}

}  // namespace

std::vector<Configuration> configuration_pool(const IlpInstance& inst, std::size_t cap, const IlpSolution* anchor) {
  std::vector<int> classes = covering_classes(inst);
  std::vector<ClassVec> rs;
  enumerate_reservations(inst, classes, cap, rs);
  std::set<Configuration> seen;
  std::vector<Configuration> pool;
  for (const auto& [m, n] : inst.z) {
    for (const ClassVec& r : rs) {
      if (pool.size() >= cap) throw PoolOverflow("configuration pool exceeds cap; use pricing mode");
      Configuration c{r, m};
      seen.insert(c);
      pool.push_back(std::move(c));
    }
  }
  if (anchor)
    for (const auto& [c, n] : anchor->x)
      if (inst.z.count(c.m) && inst.valid_reservation(c.r) && seen.insert(c).second) pool.push_back(c);
  return pool;
}

LpBound lp_relaxation(const IlpInstance& inst, const std::vector<Configuration>& seed) {
  std::vector<Configuration> cols = seed;
  std::set<Configuration> have(cols.begin(), cols.end());
  LpBound out;
  const std::int64_t scale = inst.scale();
  while (true) {
    ++out.rounds;
    std::vector<int> classes;
    std::vector<ClassVec> ms;
    LpProblem lp = master(inst, cols, classes, ms);
    LpResult res = solve_lp(lp);
    if (res.status != LpStatus::Optimal) throw InvariantViolation("column generation master not optimal");
    std::vector<mpq_class> pi(res.duals.begin(), res.duals.begin() + classes.size());
    bool added = false;
    auto [gvalue, gbest] = knapsack(inst.num_classes, classes, pi, inst.budget);
    for (std::size_t k = 0; k < ms.size(); ++k) {
      const ClassVec& m = ms[k];
      const mpq_class& mu = res.duals[classes.size() + k];
      auto [value, e] = knapsack(inst.num_classes, classes, pi, inst.budget - l1(m));
      mpq_class reduced = -dot(classes, pi, m) - value - mu;
      if (sgn(reduced) < 0) {
        Configuration c{m, m};
        for (int i = 0; i < inst.num_classes; ++i) c.r[i] += e[i];
        if (have.insert(c).second) {
          cols.push_back(std::move(c));
          added = true;
        }
      }
      // An extraordinary column can only price out if its reservation is not ordinary for m;
      // otherwise the ordinary column above dominates it.
      if (!geq(gbest, m)) {
        mpq_class red = mpq_class(static_cast<long>(inst.extra_cost(m))) - gvalue - mu;
        Configuration c{gbest, m};
        if (sgn(red) < 0 && have.insert(c).second) {
          cols.push_back(std::move(c));
          added = true;
        }
      }
    }
    if (!added) {
      out.value = res.objective / mpq_class(static_cast<long>(scale));
      out.columns = static_cast<int>(cols.size());
      return out;
    }
  }
}

IlpSolution solve(const IlpInstance& inst, const IlpSolution* anchor, const SolveOptions& opts) {
  IlpSolution sol;
  if (opts.mode == SolverMode::Enumeration) {
    sol = enumeration_solve(inst, anchor, opts.pool_cap);
    require_valid(inst, sol, "enumeration solve");
    return sol;
  }
  sol = structural_solve(inst);
  require_valid(inst, sol, "structural solve");
  if (opts.lp_certificate) {
    std::vector<Configuration> seed;
    for (const auto& [c, n] : sol.x) seed.push_back(c);
    LpBound bound = lp_relaxation(inst, seed);
    mpq_class integral(static_cast<long>(sol.scaled_objective), static_cast<long>(inst.scale()));
    integral.canonicalize();
    if (bound.value > integral) throw InvariantViolation("LP relaxation exceeds the integer optimum");
  }
  if (anchor) {
    sol = anchored_structural(inst, sol, *anchor);
    require_valid(inst, sol, "anchored solve");
  }
  return sol;
}

}  // namespace repart
