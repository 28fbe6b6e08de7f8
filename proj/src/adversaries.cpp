#include "repart/adversaries.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

namespace repart {

std::uint64_t schedule_hash(const std::vector<int>& vertex_server) {
  std::uint64_t h = 14695981039346656037ULL;
  for (int s : vertex_server) {
    auto x = static_cast<std::uint32_t>(s);
    for (int b = 0; b < 4; ++b) {
      h ^= (x >> (8 * b)) & 0xff;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

std::string trace_to_jsonl(const std::vector<TraceEvent>& trace) {
  std::ostringstream out;
  for (const TraceEvent& e : trace) {
    nlohmann::json j{{"t", e.t}, {"u", e.u}, {"v", e.v}};
    if (e.view_hash) j["hash"] = *e.view_hash;
    out << j.dump() << '\n';
  }
  return out.str();
}

std::vector<TraceEvent> trace_from_jsonl(const std::string& text) {
  std::vector<TraceEvent> out;
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      TraceEvent e;
      e.t = j.value("t", static_cast<long>(out.size()));
      e.u = j.at("u").get<int>();
      e.v = j.at("v").get<int>();
      if (j.contains("hash")) e.view_hash = j.at("hash").get<std::uint64_t>();
      out.push_back(e);
    } catch (const nlohmann::json::exception& ex) {
      throw InputError("trace line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

ComponentTracker::ComponentTracker(int k, int ell)
    : k_(k), parent_(k * ell), size_(k * ell, 1), color_(k * ell), min_(k * ell) {
  std::iota(parent_.begin(), parent_.end(), 0);
  std::iota(min_.begin(), min_.end(), 0);
  for (int v = 0; v < k * ell; ++v) color_[v] = v / k;
}

int ComponentTracker::find(int v) const {
  if (v < 0 || v >= num_vertices()) throw InputError("unknown vertex " + std::to_string(v));
  while (parent_[v] != v) {
    parent_[v] = parent_[parent_[v]];
    v = parent_[v];
  }
  return v;
}

bool ComponentTracker::unite(int u, int v) {
  int a = find(u), b = find(v);
  if (a == b) return false;
  if (size_[a] < size_[b]) std::swap(a, b);
  parent_[b] = a;
  size_[a] += size_[b];
  if (color_[a] != color_[b]) color_[a] = -1;
  min_[a] = std::min(min_[a], min_[b]);
  return true;
}

std::vector<int> ComponentTracker::roots() const {
  std::vector<int> out;
  for (int v = 0; v < num_vertices(); ++v)
    if (find(v) == v) out.push_back(v);
  std::sort(out.begin(), out.end(), [&](int a, int b) { return min_[a] < min_[b]; });
  return out;
}

std::pair<std::size_t, std::size_t> pick_pair(const std::vector<std::pair<int, int>>& pieces) {
  if (pieces.size() < 2) throw InvariantViolation("pick_pair needs two pieces");
  std::vector<std::size_t> order(pieces.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return pieces[a].first < pieces[b].first; });
  for (std::size_t a = 0; a < order.size(); ++a)
    for (std::size_t b = a + 1; b < order.size(); ++b)
      if (pieces[order[a]].second != pieces[order[b]].second) return {order[a], order[b]};
  return {order[0], order[1]};
}

int main_server(int color, int k, int ell, const ServerLookup& server_of_vertex) {
  std::vector<int> count(ell, 0);
  for (int v = color * k; v < (color + 1) * k; ++v) ++count[server_of_vertex(v)];
  return static_cast<int>(std::max_element(count.begin(), count.end()) - count.begin());
}

namespace {

int exact_log2(int x) {
  int m = 0;
  while ((1 << m) < x) ++m;
  return (1 << m) == x ? m : -1;
}

int epsilon_units(int k, const Rational& eps) {
  Rational u = eps * k;
  if (u.denominator() != 1) throw ConfigError("epsilon * k must be an integer");
  return static_cast<int>(u.numerator());
}

void chain(std::vector<Edge>& out, const std::vector<int>& reps) {
  for (std::size_t i = 1; i < reps.size(); ++i) out.push_back({reps[i - 1], reps[i]});
}

}  // namespace

std::vector<Edge> det_lb_init(int k, int ell, const Rational& epsilon) {
  if (k < 32 || ell < 3) throw ConfigError("det-lb needs k >= 32 and ell >= 3");
  if (epsilon < Rational(1, k) || epsilon > Rational(1, 32)) throw ConfigError("det-lb needs 1/k <= epsilon <= 1/32");
  int eu = epsilon_units(k, epsilon);
  if (exact_log2(eu) < 0) throw ConfigError("det-lb needs epsilon * k to be a power of two");
  std::vector<Edge> out;
  for (int s = 0; s < ell; ++s)
    for (int t = 1; t < 2 * eu; ++t) out.push_back({s * k + t - 1, s * k + t});
  out.push_back({0, k});
  out.push_back({k, 2 * k});
  return out;
}

DetLbAdversary::DetLbAdversary(int k, int ell, const Rational& epsilon)
    : k_(k), ell_(ell), comps_(k, ell), exponent_(ell, 0), finished_(ell, 0) {
  pending_ = det_lb_init(k, ell, epsilon);
  eps_units_ = epsilon_units(k, epsilon);
  m_ = exact_log2(eps_units_);
  stats_.rounds_per_color.assign(ell, 0);
}

Edge DetLbAdversary::emit(Edge e) {
  comps_.unite(e.first, e.second);
  return e;
}

// Small single-colored pieces of the color at the current level, as roots ordered by min vertex.
std::vector<int> DetLbAdversary::level_pieces(int color) const {
  std::vector<int> out;
  int vol = 1 << exponent_[color];
  for (int r : comps_.roots())
    if (comps_.color(r) == color && comps_.size(r) == vol && vol < 2 * eps_units_) out.push_back(r);
  return out;
}

std::optional<int> DetLbAdversary::leftover(int color) const {
  int vol = 1 << exponent_[color];
  for (int r : comps_.roots())
    if (comps_.color(r) == color && comps_.size(r) < vol) return r;
  return std::nullopt;
}

bool DetLbAdversary::deficient(int color, const ServerLookup& view) const {
  int main = main_server(color, k_, ell_, view);
  long away = 0;
  for (int r : comps_.roots())
    if (comps_.color(r) == color && comps_.size(r) < 2 * eps_units_ && view(r) != main) away += comps_.size(r);
  return away >= eps_units_;
}

void DetLbAdversary::start_round(const ServerLookup& view) {
  std::vector<int> unfinished, deficient_unfinished;
  for (int c = 0; c < ell_; ++c) {
    if (finished_[c]) continue;
    unfinished.push_back(c);
    if (deficient(c, view)) deficient_unfinished.push_back(c);
  }
  if (deficient_unfinished.empty()) ++stats_.split_server_violations;
  if (unfinished.size() <= 1) {
    plan_final();
    return;
  }
  // With two or more unfinished deficient colors, take the lowest. Otherwise keep the one deficient
  // color (if any) as the final color and advance another unfinished color.
  int pick = -1;
  if (deficient_unfinished.size() >= 2) {
    pick = deficient_unfinished.front();
  } else {
    ++stats_.fallback_rounds;
    for (int c : unfinished)
      if (deficient_unfinished.empty() || c != deficient_unfinished.front()) {
        pick = c;
        break;
      }
  }
  round_color_ = pick;
  ++stats_.rounds;
  ++stats_.rounds_per_color[pick];
}

void DetLbAdversary::end_round(int c) {
  auto level = level_pieces(c);
  int joined = -1;
  if (level.size() == 1) {
    if (auto old = leftover(c)) {
      pending_.push_back({*old, level.front()});
      joined = level.front();
    }
  }
  ++exponent_[c];
  if (exponent_[c] >= m_) {
    // Merge all non-special pieces of color c; the special piece is multi-colored and not listed.
    std::vector<int> reps;
    for (int r : comps_.roots())
      if (comps_.color(r) == c && r != joined) reps.push_back(r);
    chain(pending_, reps);
    finished_[c] = 1;
  }
  round_color_ = -1;
}

void DetLbAdversary::plan_final() {
  phase_ = Phase::Final;
  int cs = -1;
  for (int c = 0; c < ell_; ++c)
    if (!finished_[c]) cs = c;
  if (cs < 0) throw InvariantViolation("det-lb: no unfinished color left for the final merge");
  stats_.c_star = cs;
  auto level = level_pieces(cs);
  int per_block = (2 * eps_units_) >> exponent_[cs];
  std::vector<int> targets;
  for (int c = 0; c < 3; ++c)
    if (c != cs) targets.push_back(c * k_ + 2 * eps_units_);
  if (static_cast<int>(level.size()) < per_block * static_cast<int>(targets.size()))
    throw InvariantViolation("det-lb: too few small pieces of the final color");
  std::size_t idx = 0;
  for (int target : targets) {
    std::vector<int> block(level.begin() + idx, level.begin() + idx + per_block);
    idx += per_block;
    chain(pending_, block);
    pending_.push_back({block.front(), target});
  }
  std::vector<int> rest;
  std::vector<int> used(level.begin(), level.begin() + idx);
  for (int r : comps_.roots())
    if (comps_.color(r) == cs && std::find(used.begin(), used.end(), r) == used.end()) rest.push_back(r);
  // The rest becomes one piece before it joins the special piece (which contains vertex 0).
  rest.push_back(0);
  chain(pending_, rest);
}

std::optional<Edge> DetLbAdversary::next(const ServerLookup& view) {
  while (true) {
    if (pending_pos_ < pending_.size()) return emit(pending_[pending_pos_++]);
    pending_.clear();
    pending_pos_ = 0;
    switch (phase_) {
      case Phase::Init:
        phase_ = Phase::Rounds;
        break;
      case Phase::Rounds: {
        if (round_color_ < 0) {
          start_round(view);
          break;
        }
        auto level = level_pieces(round_color_);
        if (level.size() >= 2) {
          std::vector<std::pair<int, int>> cand;
          for (int r : level) cand.push_back({comps_.min_vertex(r), view(r)});
          auto [a, b] = pick_pair(cand);
          return emit({level[a], level[b]});
        }
        end_round(round_color_);
        break;
      }
      case Phase::Final: {
        for (int r : comps_.roots())
          if (comps_.size(r) != k_) throw InvariantViolation("det-lb: final component volume differs from 1");
        phase_ = Phase::Done;
        return std::nullopt;
      }
      case Phase::Done:
        return std::nullopt;
    }
  }
}

std::vector<Edge> rand_lb_logl(int k, int ell, const Rational& epsilon, std::uint64_t seed) {
  if (ell < 3) throw ConfigError("rand-logl needs ell >= 3");
  if (epsilon >= Rational(1, 6) || epsilon <= 0) throw ConfigError("rand-logl needs 0 < epsilon < 1/6");
  Rational piece = epsilon * 2 * k;
  if (piece.denominator() != 1 || k % piece.numerator() != 0)
    throw ConfigError("rand-logl needs 2 * epsilon * k to divide k");
  const int pv = static_cast<int>(piece.numerator());
  const int per_color = k / pv;
  std::mt19937_64 rng(seed);
  std::vector<Edge> out;
  // piece q of color c is vertices c*k + q*pv .. + pv - 1; its representative is the first vertex
  auto rep = [&](int c, int q) { return c * k + q * pv; };
  for (int c = 0; c < ell; ++c)
    for (int q = 0; q < per_color; ++q)
      for (int t = 1; t < pv; ++t) out.push_back({rep(c, q) + t - 1, rep(c, q) + t});
  std::vector<std::vector<int>> avail(ell);
  for (int c = 0; c < ell; ++c) {
    avail[c].resize(per_color);
    std::iota(avail[c].begin(), avail[c].end(), 0);
  }
  std::vector<int> colors(ell);
  std::iota(colors.begin(), colors.end(), 0);
  std::shuffle(colors.begin(), colors.end(), rng);
  std::vector<int> special_colors(colors.begin(), colors.begin() + 3);
  std::vector<int> special;
  for (int c : special_colors) {
    std::uniform_int_distribution<std::size_t> pick(0, avail[c].size() - 1);
    std::size_t i = pick(rng);
    special.push_back(rep(c, avail[c][i]));
    avail[c].erase(avail[c].begin() + static_cast<long>(i));
  }
  chain(out, special);
  // A finished color is left with one big piece (volume 1 - 2 eps) and maybe a spare piece.
  std::vector<int> big(ell, -1);
  std::vector<int> unfinished(ell);
  std::iota(unfinished.begin(), unfinished.end(), 0);
  for (int round = 0; round < ell - 1; ++round) {
    std::uniform_int_distribution<std::size_t> pick(0, unfinished.size() - 1);
    std::size_t i = pick(rng);
    int s = unfinished[i];
    unfinished.erase(unfinished.begin() + static_cast<long>(i));
    std::shuffle(avail[s].begin(), avail[s].end(), rng);
    std::vector<int> take(avail[s].begin(), avail[s].begin() + (per_color - 1));
    avail[s].erase(avail[s].begin(), avail[s].begin() + (per_color - 1));
    std::vector<int> reps;
    for (int q : take) reps.push_back(rep(s, q));
    chain(out, reps);
    big[s] = reps.front();
  }
  int sstar = unfinished.front();
  // special + pieces of s* totalling 1 - 6 eps
  std::shuffle(avail[sstar].begin(), avail[sstar].end(), rng);
  int need = per_color - 3;
  std::vector<int> reps{special.front()};
  for (int i = 0; i < need; ++i) reps.push_back(rep(sstar, avail[sstar][i]));
  avail[sstar].erase(avail[sstar].begin(), avail[sstar].begin() + need);
  chain(out, reps);
  // remaining s* pieces go to the finished special-origin colors
  std::size_t next = 0;
  for (int c : special_colors) {
    if (c == sstar) continue;
    out.push_back({rep(sstar, avail[sstar][next++]), big[c]});
  }
  if (next != avail[sstar].size()) throw InvariantViolation("rand-logl: final assembly left pieces of s*");
  for (int c = 0; c < ell; ++c) {
    if (c == sstar) continue;
    for (int q : avail[c]) out.push_back({rep(c, q), big[c]});
  }
  return out;
}

std::vector<Edge> rand_lb_logk(int k, int ell, std::uint64_t seed) {
  if (ell < 2) throw ConfigError("rand-logk needs ell >= 2");
  int lg = exact_log2(k);
  if (lg < 1) throw ConfigError("rand-logk needs k to be a power of two");
  std::mt19937_64 rng(seed);
  ComponentTracker comps(k, ell);
  std::vector<Edge> out;
  for (int round = 0; round < lg; ++round) {
    std::vector<int> roots = comps.roots();
    std::shuffle(roots.begin(), roots.end(), rng);
    for (std::size_t i = 0; i + 1 < roots.size(); i += 2) {
      out.push_back({roots[i], roots[i + 1]});
      comps.unite(roots[i], roots[i + 1]);
    }
  }
  return out;
}

std::vector<Edge> random_workload(int k, int ell, double mix, std::uint64_t seed) {
  if (k < 1 || ell < 1) throw ConfigError("random workload needs k, ell >= 1");
  if (mix < 0 || mix > 1) throw ConfigError("random workload mix must lie in [0, 1]");
  std::mt19937_64 rng(seed);
  const int n = k * ell;
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::uniform_int_distribution<int> any(0, n - 1);
  int swaps = static_cast<int>(mix * n / 2 + 0.5);
  for (int i = 0; i < swaps; ++i) std::swap(perm[any(rng)], perm[any(rng)]);
  std::vector<Edge> out;
  for (int g = 0; g < ell; ++g) {
    std::vector<int> members(perm.begin() + g * k, perm.begin() + (g + 1) * k);
    std::shuffle(members.begin(), members.end(), rng);
    for (int t = 1; t < k; ++t) {
      std::uniform_int_distribution<int> parent(0, t - 1);
      out.push_back({members[parent(rng)], members[t]});
    }
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

std::vector<int> final_component_sizes(int k, int ell, const std::vector<Edge>& edges) {
  ComponentTracker comps(k, ell);
  for (auto [u, v] : edges) comps.unite(u, v);
  std::vector<int> out;
  for (int r : comps.roots()) out.push_back(comps.size(r));
  return out;
}

}  // namespace repart
