#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "repart/adversaries.hpp"
#include "repart/online.hpp"
#include "repart/params.hpp"

namespace repart {

enum class Workload { DetLb, RandLogl, RandLogk, Random, File };
std::string to_string(Workload w);
Workload parse_workload(const std::string& text);

struct ExperimentConfig {
  Algo algo = Algo::Deterministic;
  Workload workload = Workload::Random;
  int k = 32;
  int ell = 3;
  Rational epsilon{1, 4};
  Mode mode = Mode::Relaxed;
  std::optional<Rational> delta;
  Rational adversary_epsilon{1, 32};  // det-lb and rand-logl construction parameter
  double mix = 0.3;                   // random workload displacement fraction
  std::string trace_path;             // file workload
  int trials = 1;
  std::uint64_t seed = 1;
  bool checks = false;
  bool verify_variants = false;
  int threads = 0;  // 0: hardware concurrency
  int opt_max_ell = 8;
  std::string csv_path, json_path, paging_dump_path, move_log_path;
};

// TOML text -> config; unknown keys and bad values raise ConfigError.
ExperimentConfig parse_config(const std::string& toml_text);
// Base config crossed with the arrays of an optional [sweep] table.
std::vector<ExperimentConfig> parse_sweep(const std::string& toml_text);
// REPARTITION_SEED, when set, replaces the configured seed.
void apply_env_overrides(ExperimentConfig& cfg);
// Checks the workload preconditions and returns the resolved parameters.
Params resolve(const ExperimentConfig& cfg);
std::string config_json(const ExperimentConfig& cfg);

// Independent per-trial seeds derived from the base seed.
std::uint64_t trial_seed(std::uint64_t base, int trial);

struct TrialResult {
  int trial = 0;
  std::uint64_t seed = 0;
  std::vector<EventRecord> events;
  std::vector<Edge> trace;
  std::int64_t cost_units = 0;
  int h_max = 0;
  std::int64_t peak_load_units = 0;
  std::optional<Rational> opt;
  Rational nm_lb{0}, ilp_lb{0};
  std::optional<Rational> ratio;
  std::string ratio_kind;  // "exact", "lower-bound" or "undefined"
  long variant_events = 0;
  long variant_nonzero = 0;
  long variant_mismatch = 0;
  int max_sensitivity = 0;
  int max_changed_sources = 0;
  long swaps = 0, restarts = 0;
  std::optional<DetLbStats> det_lb;
  std::string paging_trace;  // JSON lines, filled when a paging dump path is configured
  std::vector<MoveRecord> moves;  // filled when a move log path is configured
  double runtime_ms = 0;
};

struct Report {
  ExperimentConfig config;
  Params params;
  std::vector<TrialResult> trials;
  double runtime_ms = 0;
};

// Generates the edge sequence and drives the algorithm for one trial.
TrialResult run_trial(const ExperimentConfig& cfg, int trial);
Report run(const ExperimentConfig& cfg);

std::string events_csv(const Report& report);
// trial,event_id,piece_id,from_server,to_server,volume_units
std::string moves_csv(const Report& report);
std::string summary_json(const Report& report);
// Writes csv/json to the configured paths (skipped when empty).
void write_report(const Report& report);

struct SweepRow {
  ExperimentConfig config;
  int trials = 0;
  double mean_cost = 0, std_cost = 0;
  double mean_ratio = 0, std_ratio = 0;
  std::string ratio_kind;
};

SweepRow aggregate(const Report& report);
std::vector<SweepRow> sweep(const std::vector<ExperimentConfig>& configs);
std::string sweep_csv(const std::vector<SweepRow>& rows);

// Edge sequence of one trial as a trace; det-lb traces carry the view hash they reacted to.
std::vector<TraceEvent> generate_trace(const ExperimentConfig& cfg, int trial);

struct TraceCheck {
  long events = 0;
  long merges = 0;
  int components = 0;
  int max_component = 0;  // in vertices
  bool feasible = false;  // a capacity-respecting final assignment exists
  long hashes_checked = 0;
  long hash_mismatches = 0;
  long first_mismatch = -1;
  std::vector<std::string> problems;
};

// Validates vertex ids and the final partition promise; replays recorded view hashes with the
// configured algorithm.
TraceCheck check_trace(const ExperimentConfig& cfg, const std::vector<TraceEvent>& trace);

// Sample mean and standard deviation (0 for fewer than two values).
std::pair<double, double> mean_stddev(const std::vector<double>& xs);

}  // namespace repart
