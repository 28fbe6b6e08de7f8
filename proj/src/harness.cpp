#include "repart/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "repart/opt_oracle.hpp"
#include "toml.hpp"

namespace repart {

std::string to_string(Workload w) {
  switch (w) {
    case Workload::DetLb: return "det-lb";
    case Workload::RandLogl: return "rand-logl";
    case Workload::RandLogk: return "rand-logk";
    case Workload::Random: return "random";
    case Workload::File: return "file";
  }
  return "?";
}

Workload parse_workload(const std::string& text) {
  for (Workload w : {Workload::DetLb, Workload::RandLogl, Workload::RandLogk, Workload::Random, Workload::File})
    if (to_string(w) == text) return w;
  throw ConfigError("unknown workload: " + text);
}

namespace {

Rational rational_of(const toml::node& node, const std::string& key) {
  if (auto s = node.value<std::string>()) return parse_rational(*s);
  if (node.is_integer()) return Rational(*node.value<std::int64_t>());
  throw ConfigError(key + ": expected a rational such as \"1/8\"");
}

template <typename T>
T require(const toml::node& node, const std::string& key) {
  auto v = node.value<T>();
  if (!v) throw ConfigError(key + ": wrong value type");
  return *v;
}

int require_int(const toml::node& node, const std::string& key) {
  auto v = require<std::int64_t>(node, key);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) throw ConfigError(key + ": out of range");
  return static_cast<int>(v);
}

void set_key(ExperimentConfig& cfg, const std::string& key, const toml::node& node) {
  if (key == "algo") cfg.algo = parse_algo(require<std::string>(node, key));
  else if (key == "workload") cfg.workload = parse_workload(require<std::string>(node, key));
  else if (key == "k") cfg.k = require_int(node, key);
  else if (key == "ell") cfg.ell = require_int(node, key);
  else if (key == "epsilon") cfg.epsilon = rational_of(node, key);
  else if (key == "mode") cfg.mode = parse_mode(require<std::string>(node, key));
  else if (key == "delta") cfg.delta = rational_of(node, key);
  else if (key == "adversary_epsilon") cfg.adversary_epsilon = rational_of(node, key);
  else if (key == "mix") cfg.mix = require<double>(node, key);
  else if (key == "trace") cfg.trace_path = require<std::string>(node, key);
  else if (key == "trials") cfg.trials = require_int(node, key);
  else if (key == "seed") {
    auto v = require<std::int64_t>(node, key);
    if (v < 0) throw ConfigError("seed must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(v);
  } else if (key == "checks") cfg.checks = require<bool>(node, key);
  else if (key == "verify_variants") cfg.verify_variants = require<bool>(node, key);
  else if (key == "threads") cfg.threads = require_int(node, key);
  else if (key == "opt_max_ell") cfg.opt_max_ell = require_int(node, key);
  else throw ConfigError("unknown config key: " + key);
}

toml::table parse_toml(const std::string& text) {
  try {
    return toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config parse error at line " << e.source().begin.line << ": " << e.description();
    throw ConfigError(msg.str());
  }
}

ExperimentConfig base_config(const toml::table& tbl) {
  ExperimentConfig cfg;
  for (auto&& [k, node] : tbl) {
    std::string key(k.str());
    if (key == "sweep") continue;
    if (key == "output") {
      const toml::table* out = node.as_table();
      if (!out) throw ConfigError("output must be a table");
      for (auto&& [ok, on] : *out) {
        std::string okey(ok.str());
        if (okey == "csv") cfg.csv_path = require<std::string>(on, "output.csv");
        else if (okey == "json") cfg.json_path = require<std::string>(on, "output.json");
        else if (okey == "paging_dump") cfg.paging_dump_path = require<std::string>(on, "output.paging_dump");
        else if (okey == "move_log") cfg.move_log_path = require<std::string>(on, "output.move_log");
        else throw ConfigError("unknown config key: output." + okey);
      }
      continue;
    }
    set_key(cfg, key, node);
  }
  return cfg;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double to_double(const Rational& q) { return static_cast<double>(q.numerator()) / static_cast<double>(q.denominator()); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

}  // namespace

ExperimentConfig parse_config(const std::string& toml_text) {
  ExperimentConfig cfg = base_config(parse_toml(toml_text));
  resolve(cfg);
  return cfg;
}

std::vector<ExperimentConfig> parse_sweep(const std::string& toml_text) {
  toml::table tbl = parse_toml(toml_text);
  std::vector<ExperimentConfig> out{base_config(tbl)};
  if (const toml::table* sw = tbl["sweep"].as_table()) {
    for (auto&& [k, node] : *sw) {
      std::string key(k.str());
      const toml::array* arr = node.as_array();
      if (!arr || arr->empty()) throw ConfigError("sweep." + key + " must be a non-empty array");
      std::vector<ExperimentConfig> next;
      for (const ExperimentConfig& base : out)
        for (const toml::node& v : *arr) {
          ExperimentConfig c = base;
          set_key(c, key, v);
          next.push_back(std::move(c));
        }
      out = std::move(next);
    }
  }
  for (const ExperimentConfig& c : out) resolve(c);
  return out;
}

void apply_env_overrides(ExperimentConfig& cfg) {
  const char* s = std::getenv("REPARTITION_SEED");
  if (!s || !*s) return;
  char* end = nullptr;
  unsigned long long v = std::strtoull(s, &end, 10);
  if (*end != '\0') throw ConfigError("REPARTITION_SEED must be a non-negative integer");
  cfg.seed = v;
}

Params resolve(const ExperimentConfig& cfg) {
  if (cfg.trials < 0) throw ConfigError("trials must be non-negative");
  if (cfg.ell < 1 || cfg.k < 1) throw ConfigError("k and ell must be positive");
  if (cfg.threads < 0) throw ConfigError("threads must be non-negative");
  Params p = make_params(cfg.k, cfg.ell, cfg.epsilon, cfg.mode, cfg.delta);
  // Run the workload generators' own precondition checks on a throwaway seed.
  switch (cfg.workload) {
    case Workload::DetLb: det_lb_init(cfg.k, cfg.ell, cfg.adversary_epsilon); break;
    case Workload::RandLogl: rand_lb_logl(cfg.k, cfg.ell, cfg.adversary_epsilon, 0); break;
    case Workload::RandLogk: rand_lb_logk(cfg.k, cfg.ell, 0); break;
    case Workload::Random:
      if (cfg.mix < 0 || cfg.mix > 1) throw ConfigError("mix must lie in [0, 1]");
      break;
    case Workload::File:
      if (cfg.trace_path.empty()) throw ConfigError("file workload needs a trace path");
      break;
  }
  return p;
}

std::string config_json(const ExperimentConfig& cfg) {
  Params p = resolve(cfg);
  nlohmann::ordered_json j{{"algo", to_string(cfg.algo)},
                           {"workload", to_string(cfg.workload)},
                           {"k", cfg.k},
                           {"ell", cfg.ell},
                           {"epsilon", to_string(p.epsilon)},
                           {"delta", to_string(p.delta)},
                           {"gamma", to_string(p.gamma())},
                           {"mode", to_string(cfg.mode)},
                           {"adversary_epsilon", to_string(cfg.adversary_epsilon)},
                           {"mix", cfg.mix},
                           {"trace", cfg.trace_path},
                           {"trials", cfg.trials},
                           {"seed", cfg.seed},
                           {"checks", cfg.checks},
                           {"verify_variants", cfg.verify_variants},
                           {"opt_max_ell", cfg.opt_max_ell}};
  return j.dump();
}

std::uint64_t trial_seed(std::uint64_t base, int trial) {
  return splitmix64(base ^ splitmix64(static_cast<std::uint64_t>(trial) + 1));
}

TrialResult run_trial(const ExperimentConfig& cfg, int trial) {
  auto t0 = std::chrono::steady_clock::now();
  Params p = resolve(cfg);
  TrialResult res;
  res.trial = trial;
  res.seed = trial_seed(cfg.seed, trial);
  OnlineOptions opts;
  opts.algo = cfg.algo;
  opts.check_invariants = cfg.checks;
  opts.verify_variants = cfg.verify_variants;
  opts.seed = splitmix64(res.seed);
  OnlineAlgorithm alg(p, opts);
  auto feed = [&](int u, int v) {
    if (u < 0 || v < 0 || u >= p.n() || v >= p.n()) throw InputError("trace references an unknown vertex");
    res.trace.push_back({u, v});
    alg.insert(u, v);
  };
  switch (cfg.workload) {
    case Workload::DetLb: {
      DetLbAdversary adv(cfg.k, cfg.ell, cfg.adversary_epsilon);
      ServerLookup view = [&](int v) { return alg.schedule().server_of_vertex(alg.pieces(), v); };
      while (auto e = adv.next(view)) feed(e->first, e->second);
      res.det_lb = adv.stats();
      break;
    }
    case Workload::RandLogl:
      for (auto [u, v] : rand_lb_logl(cfg.k, cfg.ell, cfg.adversary_epsilon, res.seed)) feed(u, v);
      break;
    case Workload::RandLogk:
      for (auto [u, v] : rand_lb_logk(cfg.k, cfg.ell, res.seed)) feed(u, v);
      break;
    case Workload::Random:
      for (auto [u, v] : random_workload(cfg.k, cfg.ell, cfg.mix, res.seed)) feed(u, v);
      break;
    case Workload::File:
      for (const TraceEvent& e : trace_from_jsonl(read_file(cfg.trace_path))) feed(e.u, e.v);
      break;
  }
  res.events = alg.events();
  res.cost_units = alg.cost_units();
  res.h_max = alg.h_max();
  res.peak_load_units = alg.peak_load_units();
  FinalInstance fin = final_instance(cfg.k, cfg.ell, res.trace);
  res.nm_lb = nm_lower_bound(fin);
  res.ilp_lb = ilp_lower_bound(res.h_max, p);
  Rational onl(res.cost_units, cfg.k);
  if (cfg.ell <= cfg.opt_max_ell) {
    res.opt = opt_cost(fin, cfg.opt_max_ell);
    if (*res.opt > 0) {
      res.ratio = onl / *res.opt;
      res.ratio_kind = "exact";
    } else {
      res.ratio_kind = onl == 0 ? "exact" : "undefined";
      if (onl == 0) res.ratio = Rational(1);
    }
  } else {
    Rational lb = std::max(res.nm_lb, res.ilp_lb);
    res.ratio_kind = lb > 0 ? "lower-bound" : "undefined";
    if (lb > 0) res.ratio = onl / lb;
  }
  for (const VariantCheck& vc : alg.variant_checks()) {
    ++res.variant_events;
    res.variant_nonzero += vc.moved_units != 0;
    res.variant_mismatch += !vc.objective_matches;
  }
  for (const SensitivityRecord& s : alg.sensitivity()) {
    res.max_sensitivity = std::max(res.max_sensitivity, s.distance);
    res.max_changed_sources = std::max(res.max_changed_sources, s.changed_sources);
  }
  if (!cfg.move_log_path.empty()) res.moves = alg.schedule().log();
  if (alg.marking()) {
    res.swaps = alg.marking()->swaps;
    res.restarts = alg.marking()->restarts;
    if (!cfg.paging_dump_path.empty()) {
      std::ostringstream dump;
      for (const auto& [m, prob] : alg.marking()->problems) {
        nlohmann::json head{{"trial", trial}, {"source_vector", m}, {"frozen", prob.frozen}};
        dump << head.dump() << '\n' << paging_dump(prob.paging->trace());
      }
      res.paging_trace = dump.str();
    }
  }
  res.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

Report run(const ExperimentConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  Report rep{cfg, resolve(cfg), {}, 0};
  rep.trials.resize(cfg.trials);
  std::vector<std::exception_ptr> errors(cfg.trials);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int t = next++; t < cfg.trials; t = next++) {
      try {
        rep.trials[t] = run_trial(cfg, t);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, std::max(1, cfg.trials));
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  // report the lowest failing trial so failures are reproducible
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  rep.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

std::string events_csv(const Report& report) {
  std::ostringstream out;
  out << "trial,seed,event,u,v,merged,steps,moved_units,cumulative_units,h,h_max\n";
  for (const TrialResult& t : report.trials)
    for (const EventRecord& e : t.events)
      out << t.trial << ',' << t.seed << ',' << e.event << ',' << e.u << ',' << e.v << ',' << (e.merged ? 1 : 0) << ",\""
          << e.steps << "\"," << e.moved_units << ',' << e.cumulative_units << ',' << e.h << ',' << e.h_max << '\n';
  return out.str();
}

std::vector<TraceEvent> generate_trace(const ExperimentConfig& cfg, int trial) {
  std::vector<TraceEvent> out;
  if (cfg.workload != Workload::DetLb) {
    resolve(cfg);
    std::uint64_t seed = trial_seed(cfg.seed, trial);
    std::vector<Edge> edges;
    switch (cfg.workload) {
      case Workload::RandLogl: edges = rand_lb_logl(cfg.k, cfg.ell, cfg.adversary_epsilon, seed); break;
      case Workload::RandLogk: edges = rand_lb_logk(cfg.k, cfg.ell, seed); break;
      case Workload::Random: edges = random_workload(cfg.k, cfg.ell, cfg.mix, seed); break;
      case Workload::File: return trace_from_jsonl(read_file(cfg.trace_path));
      case Workload::DetLb: break;
    }
    for (auto [u, v] : edges) out.push_back({static_cast<long>(out.size()), u, v, std::nullopt});
    return out;
  }
  Params p = resolve(cfg);
  OnlineOptions opts;
  opts.algo = cfg.algo;
  opts.check_invariants = cfg.checks;
  opts.seed = splitmix64(trial_seed(cfg.seed, trial));
  OnlineAlgorithm alg(p, opts);
  DetLbAdversary adv(cfg.k, cfg.ell, cfg.adversary_epsilon);
  ServerLookup view = [&](int v) { return alg.schedule().server_of_vertex(alg.pieces(), v); };
  while (true) {
    std::uint64_t h = schedule_hash(alg.vertex_assignment());
    auto e = adv.next(view);
    if (!e) break;
    out.push_back({static_cast<long>(out.size()), e->first, e->second, h});
    alg.insert(e->first, e->second);
  }
  return out;
}

TraceCheck check_trace(const ExperimentConfig& cfg, const std::vector<TraceEvent>& trace) {
  TraceCheck tc;
  const int n = cfg.k * cfg.ell;
  std::vector<Edge> edges;
  ComponentTracker comps(cfg.k, cfg.ell);
  bool hashed = false;
  for (const TraceEvent& e : trace) {
    ++tc.events;
    if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n) {
      tc.problems.push_back("event " + std::to_string(e.t) + ": unknown vertex");
      continue;
    }
    tc.merges += comps.unite(e.u, e.v);
    edges.push_back({e.u, e.v});
    hashed = hashed || e.view_hash.has_value();
  }
  for (int r : comps.roots()) {
    ++tc.components;
    tc.max_component = std::max(tc.max_component, comps.size(r));
  }
  if (tc.max_component > cfg.k) tc.problems.push_back("a component is larger than one server");
  if (tc.problems.empty()) {
    if (cfg.ell <= cfg.opt_max_ell) {
      try {
        opt_cost(final_instance(cfg.k, cfg.ell, edges), cfg.opt_max_ell);
        tc.feasible = true;
      } catch (const InputError& e) {
        tc.problems.push_back(e.what());
      }
    } else {
      tc.problems.push_back("feasibility not checked: ell above the exact-OPT cap");
    }
  }
  if (hashed && tc.problems.empty()) {
    Params p = resolve(cfg);
    OnlineOptions opts;
    opts.algo = cfg.algo;
    opts.seed = splitmix64(trial_seed(cfg.seed, 0));
    OnlineAlgorithm alg(p, opts);
    for (const TraceEvent& e : trace) {
      if (e.view_hash) {
        ++tc.hashes_checked;
        if (schedule_hash(alg.vertex_assignment()) != *e.view_hash) {
          ++tc.hash_mismatches;
          if (tc.first_mismatch < 0) tc.first_mismatch = e.t;
        }
      }
      alg.insert(e.u, e.v);
    }
  }
  return tc;
}

std::string moves_csv(const Report& report) {
  std::ostringstream out;
  out << "trial,event_id,piece_id,from_server,to_server,volume_units\n";
  for (const TrialResult& t : report.trials)
    for (const MoveRecord& m : t.moves)
      out << t.trial << ',' << m.event << ',' << m.piece << ',' << m.from << ',' << m.to << ',' << m.units << '\n';
  return out.str();
}

std::pair<double, double> mean_stddev(const std::vector<double>& xs) {
  if (xs.empty()) return {0, 0};
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0};
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

SweepRow aggregate(const Report& report) {
  SweepRow row;
  row.config = report.config;
  row.trials = static_cast<int>(report.trials.size());
  std::vector<double> costs, ratios;
  for (const TrialResult& t : report.trials) {
    costs.push_back(static_cast<double>(t.cost_units) / report.config.k);
    if (t.ratio) ratios.push_back(to_double(*t.ratio));
    if (row.ratio_kind.empty()) row.ratio_kind = t.ratio_kind;
    else if (row.ratio_kind != t.ratio_kind) row.ratio_kind = "mixed";
  }
  std::tie(row.mean_cost, row.std_cost) = mean_stddev(costs);
  std::tie(row.mean_ratio, row.std_ratio) = mean_stddev(ratios);
  return row;
}

std::string summary_json(const Report& report) {
  nlohmann::ordered_json j;
  j["config"] = nlohmann::ordered_json::parse(config_json(report.config));
  nlohmann::ordered_json trials = nlohmann::ordered_json::array();
  for (const TrialResult& t : report.trials) {
    nlohmann::ordered_json tj{{"trial", t.trial},
                              {"seed", t.seed},
                              {"events", t.events.size()},
                              {"cost_units", t.cost_units},
                              {"cost", to_string(Rational(t.cost_units, report.config.k))},
                              {"h_max", t.h_max},
                              {"peak_load_units", t.peak_load_units},
                              {"opt", t.opt ? nlohmann::ordered_json(to_string(*t.opt)) : nlohmann::ordered_json()},
                              {"nm_lower_bound", to_string(t.nm_lb)},
                              {"ilp_lower_bound", to_string(t.ilp_lb)},
                              {"ratio", t.ratio ? nlohmann::ordered_json(to_double(*t.ratio)) : nlohmann::ordered_json()},
                              {"ratio_kind", t.ratio_kind},
                              {"variant_events", t.variant_events},
                              {"variant_nonzero_moves", t.variant_nonzero},
                              {"variant_objective_mismatches", t.variant_mismatch},
                              {"max_sensitivity", t.max_sensitivity},
                              {"max_changed_sources", t.max_changed_sources},
                              {"swaps", t.swaps},
                              {"restarts", t.restarts},
                              {"runtime_ms", t.runtime_ms}};
    if (t.det_lb)
      tj["det_lb"] = {{"rounds", t.det_lb->rounds},
                      {"fallback_rounds", t.det_lb->fallback_rounds},
                      {"split_server_violations", t.det_lb->split_server_violations},
                      {"c_star", t.det_lb->c_star}};
    trials.push_back(std::move(tj));
  }
  j["trials"] = std::move(trials);
  SweepRow agg = aggregate(report);
  j["totals"] = {{"trials", agg.trials},
                 {"mean_cost", agg.mean_cost},
                 {"stddev_cost", agg.std_cost},
                 {"mean_ratio", agg.mean_ratio},
                 {"stddev_ratio", agg.std_ratio},
                 {"ratio_kind", agg.ratio_kind}};
  j["runtime_ms"] = report.runtime_ms;
  return j.dump(2);
}

void write_report(const Report& report) {
  const ExperimentConfig& c = report.config;
  if (!c.csv_path.empty()) write_file(c.csv_path, events_csv(report));
  if (!c.json_path.empty()) write_file(c.json_path, summary_json(report) + "\n");
  if (!c.move_log_path.empty()) write_file(c.move_log_path, moves_csv(report));
  if (!c.paging_dump_path.empty()) {
    std::string all;
    for (const TrialResult& t : report.trials) all += t.paging_trace;
    write_file(c.paging_dump_path, all);
  }
}

std::vector<SweepRow> sweep(const std::vector<ExperimentConfig>& configs) {
  // Rows must all report exact ratios or all report lower-bound ratios.
  for (const ExperimentConfig& c : configs)
    if ((c.ell <= c.opt_max_ell) != (configs.front().ell <= configs.front().opt_max_ell))
      throw ConfigError("sweep mixes exact-OPT and lower-bound reports");
  std::vector<SweepRow> rows;
  for (const ExperimentConfig& c : configs) rows.push_back(aggregate(run(c)));
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << std::setprecision(10);
  out << "algo,workload,k,ell,epsilon,delta,seed,trials,mean_cost,stddev_cost,mean_ratio,stddev_ratio,ratio_kind\n";
  for (const SweepRow& r : rows) {
    Params p = resolve(r.config);
    out << to_string(r.config.algo) << ',' << to_string(r.config.workload) << ',' << r.config.k << ',' << r.config.ell
        << ',' << to_string(p.epsilon) << ',' << to_string(p.delta) << ',' << r.config.seed << ',' << r.trials << ','
        << r.mean_cost << ',' << r.std_cost << ',' << r.mean_ratio << ',' << r.std_ratio << ',' << r.ratio_kind << '\n';
  }
  return out.str();
}

}  // namespace repart
