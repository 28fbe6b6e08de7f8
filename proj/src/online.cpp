#include "repart/online.hpp"

#include <algorithm>
#include <cmath>

namespace repart {

std::string to_string(Algo a) { return a == Algo::Deterministic ? "det" : "rand"; }

Algo parse_algo(const std::string& text) {
  if (text == "det") return Algo::Deterministic;
  if (text == "rand") return Algo::Randomized;
  throw ConfigError("unknown algo: " + text);
}

namespace {

CostMode cost_mode(Algo a) { return a == Algo::Deterministic ? CostMode::Deterministic : CostMode::Augmented; }

std::vector<Configuration> initial_configs(const IlpSolution& x, const std::vector<ClassVec>& sources) {
  std::vector<Configuration> none(sources.size());
  return assign_configurations(x, none, sources);
}

// Paging parameter r = log2 k, rounded to an integer and at least 1.
Rational paging_parameter(int k) {
  long r = std::lround(std::log2(static_cast<double>(k)));
  return Rational(std::max(1L, r));
}

}  // namespace

OnlineAlgorithm::OnlineAlgorithm(const Params& params, const OnlineOptions& opts)
    : opts_(opts),
      state_(params),
      inst_(build_instance(state_, cost_mode(opts.algo))),
      x_(solve(inst_, nullptr, opts.solver)),
      sched_(state_, initial_configs(x_, source_vectors(state_))),
      sources_(source_vectors(state_)),
      prev_sources_(sources_),
      rng_(opts.seed),
      paging_r_(paging_parameter(params.k)) {
  if (opts_.algo == Algo::Randomized) marking_.emplace();
  for (int s = 0; s < params.ell; ++s) peak_load_ = std::max(peak_load_, sched_.total_load(state_, s));
}

std::vector<int> OnlineAlgorithm::vertex_assignment() const {
  std::vector<int> out(state_.num_vertices());
  for (int v = 0; v < state_.num_vertices(); ++v) out[v] = sched_.server_of_vertex(state_, v);
  return out;
}

std::int64_t OnlineAlgorithm::insert(int u, int v) {
  ++event_;
  sched_.begin_event(event_);
  steps_.clear();
  const std::int64_t before = sched_.moved_units();
  auto order = state_.merge_order(u, v);
  edges_.push_back({u, v});
  EventRecord rec;
  rec.event = event_;
  rec.u = u;
  rec.v = v;
  if (order) {
    auto [p1, p2] = *order;
    int origin = sched_.server_of(p1);
    int host = sched_.server_of(p2);
    if (origin != host) {
      sched_.move(state_, p1, host, true);
      steps_ += "I,";
    }
    MergeEvent ev = *state_.register_edge(u, v);
    sched_.merge(p1, p2, ev.pm);
    step_two(ev, origin, host);
    step_three(ev.pm);
    rec.merged = true;
  }
  h_max_ = std::max(h_max_, h());
  for (int s = 0; s < params().ell; ++s) peak_load_ = std::max(peak_load_, sched_.total_load(state_, s));
  if (!steps_.empty() && steps_.back() == ',') steps_.pop_back();
  rec.steps = steps_;
  rec.moved_units = sched_.moved_units() - before;
  rec.cumulative_units = sched_.moved_units();
  rec.h = h();
  rec.h_max = h_max_;
  events_.push_back(rec);
  if (opts_.check_invariants) check_or_throw();
  prev_sources_ = sources_;
  return rec.moved_units;
}

void OnlineAlgorithm::refresh_sources() { sources_ = source_vectors(state_); }

void OnlineAlgorithm::step_two(const MergeEvent& ev, int origin_p1, int host) {
  const std::int64_t before = sched_.moved_units();
  const int j = params().delta_units();
  bool variant_a = false;
  if (ev.p1_small) {
    IlpInstance fresh = build_instance(state_, inst_.mode);
    if (fresh == inst_) {
      Classification c = state_.classify(ev.pm);
      if (state_.is_small(ev.pm) && c.mono && c.majority != host && sched_.server(c.majority).config.ordinary()) {
        sched_.move(state_, ev.pm, c.majority, true);
        steps_ += "F,";
      }
    } else {
      generic({origin_p1, host}, true);
    }
  } else if (ev.mono_server && *ev.mono_server == host && sched_.server(host).config.ordinary()) {
    variant_a = true;
    VariantUpdate up = apply_variant_a(inst_, x_, sched_.server(host).config, ev.i1, ev.i2);
    IlpInstance fresh = build_instance(state_, inst_.mode);
    if (!(fresh == up.instance)) throw InvariantViolation("variant A update disagrees with the recomputed ILP");
    inst_ = std::move(fresh);
    x_ = std::move(up.solution);
    sched_.set_config(host, std::move(up.config), false, j);
    refresh_sources();
    steps_ += "A,";
  } else {
    generic({origin_p1, host}, true);
  }
  balance(state_, sched_);
  if (variant_a) {
    VariantCheck vc{event_, 'A', sched_.moved_units() - before, true};
    if (opts_.verify_variants) vc.objective_matches = solve(inst_, nullptr, opts_.solver).scaled_objective == x_.scaled_objective;
    variant_checks_.push_back(vc);
  }
  update_marking(ev.mono_server, ev.p1_units);
}

void OnlineAlgorithm::step_three(int pm) {
  const int j = params().delta_units();
  if (params().below_epsilon(state_.piece(pm).size())) return;
  while (state_.piece(pm).uncommitted_units > 2 * j) {
    const std::int64_t before = sched_.moved_units();
    int host = sched_.server_of(pm);
    Classification c0 = state_.classify(pm);
    bool mono_before = c0.mono && c0.majority == host;
    state_.commit_step(pm);
    Classification c1 = state_.classify(pm);
    bool mono_after = c1.mono && c1.majority == host;
    bool variant_b = mono_before && mono_after && sched_.server(host).config.ordinary();
    if (variant_b) {
      VariantUpdate up = apply_variant_b(inst_, x_, sched_.server(host).config, c0.cls);
      IlpInstance fresh = build_instance(state_, inst_.mode);
      if (!(fresh == up.instance)) throw InvariantViolation("variant B update disagrees with the recomputed ILP");
      inst_ = std::move(fresh);
      x_ = std::move(up.solution);
      // r_0 drops by delta but so does the uncommitted volume on host; no budget credit.
      sched_.set_config(host, std::move(up.config), false, j);
      refresh_sources();
      steps_ += "B,";
    } else {
      generic({host}, false);
    }
    balance(state_, sched_);
    if (variant_b) {
      VariantCheck vc{event_, 'B', sched_.moved_units() - before, true};
      if (opts_.verify_variants)
        vc.objective_matches = solve(inst_, nullptr, opts_.solver).scaled_objective == x_.scaled_objective;
      variant_checks_.push_back(vc);
    }
    update_marking(std::nullopt, 0);
  }
}

void OnlineAlgorithm::generic(const std::set<int>& touched, bool record_sensitivity) {
  const int j = params().delta_units();
  IlpInstance fresh = build_instance(state_, inst_.mode);
  std::vector<ClassVec> old_sources = sources_;
  refresh_sources();
  IlpSolution next = solve(fresh, &x_, opts_.solver);
  std::function<bool(int)> prefer;
  if (marking_ && marking_->h_guess > 0) {
    ensure_problems();
    prefer = [this](int s) { return marked(s); };
  }
  std::vector<Configuration> old = sched_.configs();
  auto fit = [this](int s, const Configuration& c) { return hosted_fit(state_, sched_, s, c); };
  std::vector<Configuration> configs = assign_configurations(next, old, sources_, prefer, fit);
  std::set<int> all = touched;
  for (int s = 0; s < params().ell; ++s)
    if (configs[s] != old[s]) {
      sched_.set_config(s, configs[s], true, j);
      all.insert(s);
    }
  rebuild(state_, sched_, all);
  if (record_sensitivity) {
    int d = 0;
    for (int s = 0; s < params().ell; ++s) d += old_sources[s] != sources_[s];
    sensitivity_.push_back({event_, l1_distance(x_, next), d});
  }
  inst_ = std::move(fresh);
  x_ = std::move(next);
  steps_ += "G,";
}

bool OnlineAlgorithm::marked(int server) const {
  if (!marking_ || marking_->h_guess == 0) return false;
  auto it = marking_->problems.find(sources_[server]);
  if (it == marking_->problems.end()) return false;
  if (it->second.frozen) return true;
  return !it->second.paging->cached(server);
}

void OnlineAlgorithm::ensure_problems() {
  MarkingState& mk = *marking_;
  const int ell = params().ell;
  for (const ClassVec& m : sources_) {
    if (mk.problems.count(m)) continue;
    std::vector<int> inside, cache;
    for (int s = 0; s < ell; ++s) (prefix_geq(sources_[s], m) ? inside : cache).push_back(s);
    int z = std::max(0, ell - mk.h_guess);
    std::shuffle(inside.begin(), inside.end(), rng_);
    for (int s : inside)
      if (static_cast<int>(cache.size()) < z) cache.push_back(s);
    MarkingState::Problem prob;
    prob.frozen = static_cast<int>(inside.size()) <= mk.h_guess;
    prob.paging = std::make_unique<MarkingPaging>(ell, z, cache);
    mk.problems.emplace(m, std::move(prob));
  }
}

void OnlineAlgorithm::pin_departed() {
  const int ell = params().ell;
  for (auto& [m, prob] : marking_->problems) {
    if (prob.frozen) continue;
    // A phase change while pinning can evict a page pinned earlier in the same sweep.
    for (bool again = true; again;) {
      again = false;
      for (int s = 0; s < ell; ++s)
        if (!prefix_geq(sources_[s], m) && !prob.paging->cached(s)) {
          prob.paging->serve(s, Rational(1), rng_);
          again = true;
        }
    }
  }
}

void OnlineAlgorithm::update_marking(const std::optional<int>& mono_server, int p1_units) {
  if (!marking_) return;
  MarkingState& mk = *marking_;
  int h_now = h();
  if (h_now > mk.h_guess) {
    int g = std::max(1, mk.h_guess);
    while (g < h_now) g *= 2;
    mk.h_guess = g;
    mk.problems.clear();
    ++mk.restarts;
  }
  if (mk.h_guess == 0) return;
  ensure_problems();
  const int ell = params().ell;
  for (auto& [m, prob] : mk.problems) {
    int inside = 0;
    for (int s = 0; s < ell; ++s) inside += prefix_geq(sources_[s], m);
    if (inside <= mk.h_guess) prob.frozen = true;
  }
  if (mono_server) {
    int s = *mono_server;
    for (auto& [m, prob] : mk.problems) {
      if (prob.frozen || !prefix_geq(sources_[s], m)) continue;
      prob.paging->serve(s, Rational(p1_units, params().k), rng_);
      for (int t = 0; t < ell; ++t)
        if (!prefix_geq(sources_[t], m)) prob.paging->serve(t, Rational(1), rng_);
    }
  }
  pin_departed();
  sync_marking();
}

void OnlineAlgorithm::sync_marking() {
  const int j = params().delta_units();
  bool swapped = false;
  for (int s = 0; s < params().ell; ++s) {
    if (sched_.server(s).config.ordinary() || marked(s)) continue;
    int partner = -1;
    for (int t = 0; t < params().ell && partner < 0; ++t)
      if (t != s && sources_[t] == sources_[s] && marked(t) && sched_.server(t).config.ordinary()) partner = t;
    if (partner < 0) throw InvariantViolation("marking sync found no swap partner for server " + std::to_string(s));
    Configuration cs = sched_.server(s).config;
    Configuration ct = sched_.server(partner).config;
    sched_.set_config(s, ct, true, j);
    sched_.set_config(partner, cs, true, j);
    rebuild(state_, sched_, {s, partner});
    ++marking_->swaps;
    swapped = true;
    steps_ += "S,";
  }
  if (swapped) balance(state_, sched_);
}

std::vector<std::string> OnlineAlgorithm::check() const {
  std::vector<std::string> out = state_.check_volume_invariants();
  for (auto& e : validate_respecting(state_, sched_, &x_)) out.push_back(std::move(e));
  for (auto& e : check_solution(inst_, x_)) out.push_back("ILP: " + e);
  if (!(build_instance(state_, inst_.mode) == inst_)) out.push_back("cached ILP instance is stale");
  auto fresh_sources = source_vectors(state_);
  if (fresh_sources != sources_) out.push_back("cached source vectors are stale");
  for (int s = 0; s < params().ell; ++s)
    if (!prefix_geq(prev_sources_[s], fresh_sources[s]))
      out.push_back("source vector of server " + std::to_string(s) + " increased in prefix order");
  // cc-condition against a from-scratch component computation
  for (const auto& comp : components_from_edges(state_.num_vertices(), edges_)) {
    int p = state_.piece_of(comp.front());
    if (state_.piece(p).size() != static_cast<int>(comp.size())) {
      out.push_back("piece " + std::to_string(p) + " differs from its connected component");
      continue;
    }
    for (int v : comp)
      if (state_.piece_of(v) != p) {
        out.push_back("component split across pieces");
        break;
      }
  }
  const Rational eps = params().epsilon;
  for (int s = 0; s < params().ell; ++s) {
    std::int64_t u = 0;
    for (int p : sched_.server(s).hosted)
      if (!state_.is_small(p)) u += state_.piece(p).uncommitted_units;
    if (Rational(u, params().k) > 10 * eps)
      out.push_back("server " + std::to_string(s) + ": uncommitted volume in large pieces above 10 eps");
  }
  if (marking_)
    for (int s = 0; s < params().ell; ++s)
      if (!sched_.server(s).config.ordinary() && !marked(s))
        out.push_back("server " + std::to_string(s) + ": extraordinary but unmarked");
  return out;
}

void OnlineAlgorithm::check_or_throw() const {
  auto errs = check();
  if (errs.empty()) return;
  std::string msg = "event " + std::to_string(event_) + ": " + errs.front();
  if (errs.size() > 1) msg += " (+" + std::to_string(errs.size() - 1) + " more)";
  throw InvariantViolation(msg);
}

}  // namespace repart
