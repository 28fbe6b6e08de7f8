#include "repart/exact_lp.hpp"

#include <optional>

#include "repart/params.hpp"

namespace repart {

namespace {

struct Tableau {
  int m = 0;     // rows
  int cols = 0;  // structural + slack/surplus + identity columns
  std::vector<std::vector<mpq_class>> a;  // m x cols
  std::vector<mpq_class> b;
  std::vector<int> basis;
  std::vector<mpq_class> d;  // reduced costs
  mpq_class z;               // -objective

  void pivot(int r, int c) {
    mpq_class piv = a[r][c];
    for (int k = 0; k < cols; ++k)
      if (sgn(a[r][k]) != 0) a[r][k] /= piv;
    b[r] /= piv;
    for (int i = 0; i < m; ++i) {
      if (i == r || sgn(a[i][c]) == 0) continue;
      mpq_class f = a[i][c];
      for (int k = 0; k < cols; ++k)
        if (sgn(a[r][k]) != 0) a[i][k] -= f * a[r][k];
      b[i] -= f * b[r];
    }
    if (sgn(d[c]) != 0) {
      mpq_class f = d[c];
      for (int k = 0; k < cols; ++k)
        if (sgn(a[r][k]) != 0) d[k] -= f * a[r][k];
      z -= f * b[r];
    }
    basis[r] = c;
  }

  void price(const std::vector<mpq_class>& cost) {
    d = cost;
    z = 0;
    for (int i = 0; i < m; ++i) {
      const mpq_class& cb = cost[basis[i]];
      if (sgn(cb) == 0) continue;
      for (int k = 0; k < cols; ++k)
        if (sgn(a[i][k]) != 0) d[k] -= cb * a[i][k];
      z -= cb * b[i];
    }
  }

  // Returns false when unbounded.
  bool optimize(const std::vector<bool>& allowed) {
    while (true) {
      int enter = -1;
      for (int k = 0; k < cols; ++k)
        if (allowed[k] && sgn(d[k]) < 0) {
          enter = k;
          break;
        }
      if (enter < 0) return true;
      int leave = -1;
      mpq_class best;
      for (int i = 0; i < m; ++i) {
        if (sgn(a[i][enter]) <= 0) continue;
        mpq_class ratio = b[i] / a[i][enter];
        if (leave < 0 || ratio < best || (ratio == best && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }
};

}  // namespace

LpResult solve_lp(const LpProblem& lp) {
  const int n = lp.num_vars;
  const int m = static_cast<int>(lp.rows.size());
  // Column layout: [0,n) structural, then one surplus per Ge row, then one identity column per row
  // (slack for Le rows, artificial for Ge/Eq rows).
  std::vector<bool> negated(m);
  std::vector<Sense> sense(m);
  for (int i = 0; i < m; ++i) {
    sense[i] = lp.rows[i].sense;
    negated[i] = sgn(lp.rows[i].rhs) < 0;
    if (negated[i] && sense[i] != Sense::Eq) sense[i] = sense[i] == Sense::Le ? Sense::Ge : Sense::Le;
  }
  std::vector<int> surplus_col(m, -1);
  int cols = n;
  for (int i = 0; i < m; ++i)
    if (sense[i] == Sense::Ge) surplus_col[i] = cols++;
  std::vector<int> id_col(m);
  for (int i = 0; i < m; ++i) id_col[i] = cols++;

  Tableau t;
  t.m = m;
  t.cols = cols;
  t.a.assign(m, std::vector<mpq_class>(cols));
  t.b.assign(m, mpq_class(0));
  t.basis.assign(m, -1);
  std::vector<bool> artificial(cols, false);
  for (int i = 0; i < m; ++i) {
    mpq_class sign = negated[i] ? -1 : 1;
    for (const auto& [j, v] : lp.rows[i].coeffs) {
      if (j < 0 || j >= n) throw InvariantViolation("lp coefficient out of range");
      t.a[i][j] += sign * v;
    }
    t.b[i] = sign * lp.rows[i].rhs;
    if (surplus_col[i] >= 0) t.a[i][surplus_col[i]] = -1;
    t.a[i][id_col[i]] = 1;
    t.basis[i] = id_col[i];
    if (sense[i] != Sense::Le) artificial[id_col[i]] = true;
  }

  std::vector<bool> allowed(cols, true);
  std::vector<mpq_class> phase1(cols, mpq_class(0));
  for (int k = 0; k < cols; ++k)
    if (artificial[k]) phase1[k] = 1;
  t.price(phase1);
  t.optimize(allowed);
  LpResult res;
  if (sgn(t.z) != 0) {
    res.status = LpStatus::Infeasible;
    return res;
  }
  // Drive zero-level artificials out of the basis where possible.
  for (int i = 0; i < m; ++i) {
    if (!artificial[t.basis[i]]) continue;
    for (int k = 0; k < cols; ++k)
      if (!artificial[k] && sgn(t.a[i][k]) != 0) {
        t.pivot(i, k);
        break;
      }
  }
  for (int k = 0; k < cols; ++k)
    if (artificial[k]) allowed[k] = false;
  std::vector<mpq_class> phase2(cols, mpq_class(0));
  for (int j = 0; j < n; ++j) phase2[j] = lp.cost[j];
  t.price(phase2);
  if (!t.optimize(allowed)) {
    res.status = LpStatus::Unbounded;
    return res;
  }
  res.status = LpStatus::Optimal;
  res.objective = -t.z;
  res.x.assign(n, mpq_class(0));
  for (int i = 0; i < m; ++i)
    if (t.basis[i] < n) res.x[t.basis[i]] = t.b[i];
  res.duals.resize(m);
  for (int i = 0; i < m; ++i) {
    // identity column has zero cost, so its reduced cost is -y_i of the (possibly negated) row
    mpq_class y = -t.d[id_col[i]];
    res.duals[i] = negated[i] ? mpq_class(-y) : y;
  }
  return res;
}

namespace {

mpq_class floor_q(const mpq_class& q) {
  mpz_class f;
  mpz_fdiv_q(f.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return mpq_class(f);
}

struct Bnb {
  const LpProblem& base;
  const std::vector<bool>& integer;
  long node_limit;
  long nodes = 0;
  std::optional<mpq_class> best;
  std::vector<mpq_class> best_x;

  void run(std::vector<LpRow>& extra) {
    if (++nodes > node_limit) throw InvariantViolation("branch-and-bound node limit exceeded");
    LpProblem lp = base;
    lp.rows.insert(lp.rows.end(), extra.begin(), extra.end());
    LpResult r = solve_lp(lp);
    if (r.status == LpStatus::Infeasible) return;
    if (r.status == LpStatus::Unbounded) throw InvariantViolation("unbounded relaxation in branch-and-bound");
    if (best && r.objective >= *best) return;
    int frac = -1;
    for (int j = 0; j < lp.num_vars; ++j)
      if (integer[j] && r.x[j].get_den() != 1) {
        frac = j;
        break;
      }
    if (frac < 0) {
      best = r.objective;
      best_x = r.x;
      return;
    }
    mpq_class lo = floor_q(r.x[frac]);
    // round-down branch first; configurations rarely want more copies than the LP suggests
    extra.push_back(LpRow{{{frac, mpq_class(1)}}, Sense::Le, lo});
    run(extra);
    extra.back() = LpRow{{{frac, mpq_class(1)}}, Sense::Ge, lo + 1};
    run(extra);
    extra.pop_back();
  }
};

}  // namespace

MipResult solve_mip(const LpProblem& lp, const std::vector<bool>& integer, long node_limit) {
  Bnb b{lp, integer, node_limit, 0, std::nullopt, {}};
  std::vector<LpRow> extra;
  b.run(extra);
  MipResult res;
  res.nodes = b.nodes;
  if (!b.best) return res;
  res.status = LpStatus::Optimal;
  res.objective = *b.best;
  res.x = b.best_x;
  return res;
}

}  // namespace repart
