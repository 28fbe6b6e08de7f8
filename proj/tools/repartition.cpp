// repartition: run, sweep, generate and check online re-partitioning experiments.
// Exit codes: 0 ok, 2 bad configuration or input, 3 invariant violation or failed trace check.
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "repart/harness.hpp"

using namespace repart;

namespace {

struct Flags {
  std::string config, algo, workload, trace, epsilon, mode, delta, adversary_epsilon, out, json, paging_dump, move_log;
  int k = 0, ell = 0, trials = -1, threads = -1;
  double mix = -1;
  long long seed = -1;
  bool checks = false, verify_variants = false;
};

void add_experiment_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "TOML experiment file");
  cmd->add_option("--algo", f.algo, "det | rand");
  cmd->add_option("--workload", f.workload, "det-lb | rand-logl | rand-logk | random | file");
  cmd->add_option("--trace", f.trace, "JSON-lines edge trace (implies --workload file)");
  cmd->add_option("--k", f.k, "vertices per server");
  cmd->add_option("--ell", f.ell, "number of servers");
  cmd->add_option("--epsilon", f.epsilon, "algorithm epsilon, e.g. 1/8");
  cmd->add_option("--mode", f.mode, "strict | relaxed");
  cmd->add_option("--delta", f.delta, "explicit delta (relaxed mode)");
  cmd->add_option("--adversary-epsilon", f.adversary_epsilon, "epsilon of the lower-bound constructions");
  cmd->add_option("--mix", f.mix, "displaced fraction for the random workload");
  cmd->add_option("--seed", f.seed, "base seed (REPARTITION_SEED overrides)");
  cmd->add_option("--trials", f.trials, "number of trials");
  cmd->add_option("--threads", f.threads, "worker threads (0: all cores)");
  cmd->add_flag("--check-invariants", f.checks, "check every invariant after each event");
  cmd->add_flag("--verify-variants", f.verify_variants, "re-solve after each special variant");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig build_config(const Flags& f) {
  ExperimentConfig cfg = f.config.empty() ? ExperimentConfig{} : parse_config(read_file(f.config));
  if (!f.algo.empty()) cfg.algo = parse_algo(f.algo);
  if (!f.trace.empty()) {
    cfg.trace_path = f.trace;
    cfg.workload = Workload::File;
  }
  if (!f.workload.empty()) cfg.workload = parse_workload(f.workload);
  if (f.k > 0) cfg.k = f.k;
  if (f.ell > 0) cfg.ell = f.ell;
  if (!f.epsilon.empty()) cfg.epsilon = parse_rational(f.epsilon);
  if (!f.mode.empty()) cfg.mode = parse_mode(f.mode);
  if (!f.delta.empty()) cfg.delta = parse_rational(f.delta);
  if (!f.adversary_epsilon.empty()) cfg.adversary_epsilon = parse_rational(f.adversary_epsilon);
  if (f.mix >= 0) cfg.mix = f.mix;
  if (f.seed >= 0) cfg.seed = static_cast<std::uint64_t>(f.seed);
  if (f.trials >= 0) cfg.trials = f.trials;
  if (f.threads >= 0) cfg.threads = f.threads;
  if (f.checks) cfg.checks = true;
  if (f.verify_variants) cfg.verify_variants = true;
  if (!f.out.empty()) cfg.csv_path = f.out;
  if (!f.json.empty()) cfg.json_path = f.json;
  if (!f.paging_dump.empty()) cfg.paging_dump_path = f.paging_dump;
  if (!f.move_log.empty()) cfg.move_log_path = f.move_log;
  apply_env_overrides(cfg);
  resolve(cfg);
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online graph re-partitioning simulator"};
  app.require_subcommand(1);
  Flags f;

  auto* run_cmd = app.add_subcommand("run", "run trials and write per-event CSV and a JSON summary");
  add_experiment_flags(run_cmd, f);
  run_cmd->add_option("--out", f.out, "per-event CSV path");
  run_cmd->add_option("--json", f.json, "summary JSON path (stdout when omitted)");
  run_cmd->add_option("--paging-dump", f.paging_dump, "JSON-lines dump of the paging problems (rand)");
  run_cmd->add_option("--move-log", f.move_log, "CSV of every piece move");

  std::string sweep_config, sweep_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "aggregate trials over the [sweep] grid of a config");
  sweep_cmd->add_option("--config", sweep_config, "TOML file with a [sweep] table")->required();
  sweep_cmd->add_option("--out", sweep_out, "aggregate CSV path (stdout when omitted)");

  auto* gen_cmd = app.add_subcommand("gen-trace", "write the edge trace of one trial as JSON lines");
  add_experiment_flags(gen_cmd, f);
  gen_cmd->add_option("--out", f.out, "trace path (stdout when omitted)");

  auto* check_cmd = app.add_subcommand("check-trace", "validate a trace and replay its view hashes");
  add_experiment_flags(check_cmd, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (run_cmd->parsed()) {
      ExperimentConfig cfg = build_config(f);
      Report rep = run(cfg);
      write_report(rep);
      if (cfg.json_path.empty()) std::cout << summary_json(rep) << '\n';
    } else if (sweep_cmd->parsed()) {
      auto configs = parse_sweep(read_file(sweep_config));
      for (auto& c : configs) apply_env_overrides(c);
      write_text(sweep_out, sweep_csv(sweep(configs)));
    } else if (gen_cmd->parsed()) {
      ExperimentConfig cfg = build_config(f);
      write_text(f.out, trace_to_jsonl(generate_trace(cfg, 0)));
    } else if (check_cmd->parsed()) {
      if (f.trace.empty()) throw ConfigError("check-trace needs --trace");
      ExperimentConfig cfg = build_config(f);
      TraceCheck tc = check_trace(cfg, trace_from_jsonl(read_file(f.trace)));
      std::cout << "events " << tc.events << " merges " << tc.merges << " components " << tc.components
                << " max_component " << tc.max_component << " feasible " << (tc.feasible ? "yes" : "no")
                << " hashes_checked " << tc.hashes_checked << " hash_mismatches " << tc.hash_mismatches << '\n';
      for (const auto& p : tc.problems) std::cout << "problem: " << p << '\n';
      if (tc.hash_mismatches > 0) std::cout << "first mismatch at t=" << tc.first_mismatch << '\n';
      if (!tc.problems.empty() || tc.hash_mismatches > 0) return 3;
    }
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
