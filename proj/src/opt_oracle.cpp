#include "repart/opt_oracle.hpp"

#include <algorithm>
#include <limits>
#include <map>

namespace repart {

FinalInstance final_instance(int k, int ell, const std::vector<Edge>& edges) {
  ComponentTracker comps(k, ell);
  for (auto [u, v] : edges) comps.unite(u, v);
  std::map<int, Component> by_root;
  for (int v = 0; v < k * ell; ++v) {
    Component& c = by_root[comps.find(v)];
    if (c.histogram.empty()) c.histogram.assign(ell, 0);
    ++c.volume;
    ++c.histogram[v / k];
  }
  FinalInstance inst{k, ell, {}};
  for (auto& [r, c] : by_root) inst.components.push_back(std::move(c));
  return inst;
}

namespace {

void validate(const FinalInstance& inst) {
  std::int64_t total = 0;
  for (const Component& c : inst.components) {
    if (c.volume > inst.k) throw InputError("component larger than a server");
    total += c.volume;
  }
  if (total != static_cast<std::int64_t>(inst.k) * inst.ell) throw InputError("component volumes do not sum to ell");
}

struct Search {
  const FinalInstance& inst;
  std::vector<int> order;
  std::vector<std::int64_t> tail_bound;  // sum of (volume - max color) from position i on
  std::vector<int> room;
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  std::int64_t nodes = 0;
  std::int64_t node_limit;

  void dfs(std::size_t i, std::int64_t cost) {
    if (++nodes > node_limit) throw ConfigError("exact OPT search exceeded its node limit");
    if (cost + tail_bound[i] >= best) return;
    if (i == order.size()) {
      best = cost;
      return;
    }
    const Component& c = inst.components[order[i]];
    // cheapest servers first; servers with equal room and equal gain are interchangeable here
    std::vector<int> servers(inst.ell);
    for (int s = 0; s < inst.ell; ++s) servers[s] = s;
    std::sort(servers.begin(), servers.end(), [&](int a, int b) {
      return c.histogram[a] != c.histogram[b] ? c.histogram[a] > c.histogram[b] : a < b;
    });
    for (int s : servers) {
      if (room[s] < c.volume) continue;
      room[s] -= c.volume;
      dfs(i + 1, cost + c.volume - c.histogram[s]);
      room[s] += c.volume;
    }
  }
};

}  // namespace

Rational opt_cost_bnb(const FinalInstance& inst, std::int64_t node_limit) {
  validate(inst);
  Search s{inst, {}, {}, std::vector<int>(inst.ell, inst.k), std::numeric_limits<std::int64_t>::max(), 0, node_limit};
  s.order.resize(inst.components.size());
  for (std::size_t i = 0; i < s.order.size(); ++i) s.order[i] = static_cast<int>(i);
  std::sort(s.order.begin(), s.order.end(), [&](int a, int b) {
    return inst.components[a].volume != inst.components[b].volume ? inst.components[a].volume > inst.components[b].volume
                                                                   : a < b;
  });
  s.tail_bound.assign(s.order.size() + 1, 0);
  for (std::size_t i = s.order.size(); i-- > 0;) {
    const Component& c = inst.components[s.order[i]];
    s.tail_bound[i] = s.tail_bound[i + 1] + c.volume - *std::max_element(c.histogram.begin(), c.histogram.end());
  }
  s.dfs(0, 0);
  if (s.best == std::numeric_limits<std::int64_t>::max()) throw InputError("no capacity-respecting assignment exists");
  return Rational(s.best, inst.k);
}

std::int64_t min_cost_assignment(const std::vector<std::vector<std::int64_t>>& cost) {
  const int n = static_cast<int>(cost.size());
  if (n == 0) return 0;
  const std::int64_t inf = std::numeric_limits<std::int64_t>::max() / 4;
  // potentials u (rows), v (columns); p[j] = row matched to column j; 1-based with column 0 as sentinel
  std::vector<std::int64_t> u(n + 1, 0), v(n + 1, 0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    if (static_cast<int>(cost[i - 1].size()) != n) throw InputError("assignment matrix must be square");
    p[0] = i;
    int j0 = 0;
    std::vector<std::int64_t> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = 0;
      std::int64_t delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        std::int64_t cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::int64_t total = 0;
  for (int j = 1; j <= n; ++j) total += cost[p[j] - 1][j - 1];
  return total;
}

Rational opt_cost(const FinalInstance& inst, int max_ell, std::int64_t node_limit) {
  if (inst.ell > max_ell) throw ConfigError("instance too large for exact OPT (ell = " + std::to_string(inst.ell) + ")");
  validate(inst);
  bool unit = std::all_of(inst.components.begin(), inst.components.end(),
                          [&](const Component& c) { return c.volume == inst.k; });
  if (!unit) return opt_cost_bnb(inst, node_limit);
  std::vector<std::vector<std::int64_t>> cost;
  for (const Component& c : inst.components) {
    std::vector<std::int64_t> row(inst.ell);
    for (int s = 0; s < inst.ell; ++s) row[s] = c.volume - c.histogram[s];
    cost.push_back(std::move(row));
  }
  return Rational(min_cost_assignment(cost), inst.k);
}

Rational nm_lower_bound(const FinalInstance& inst) {
  std::int64_t nm = 0;
  for (const Component& c : inst.components) nm += c.volume - *std::max_element(c.histogram.begin(), c.histogram.end());
  return Rational(nm, inst.k);
}

Rational ilp_lower_bound(int h, const Params& params) { return (params.gamma() - params.delta) * h; }

}  // namespace repart
