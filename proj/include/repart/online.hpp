#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "repart/ilp_model.hpp"
#include "repart/ilp_solver.hpp"
#include "repart/paging.hpp"
#include "repart/pieces.hpp"
#include "repart/scheduler.hpp"

namespace repart {

enum class Algo { Deterministic, Randomized };
std::string to_string(Algo a);
Algo parse_algo(const std::string& text);

struct OnlineOptions {
  Algo algo = Algo::Deterministic;
  bool check_invariants = false;
  // Re-solve from scratch after every special variant and compare objectives.
  bool verify_variants = false;
  SolveOptions solver;
  std::uint64_t seed = 1;
};

struct EventRecord {
  long event = 0;
  int u = -1, v = -1;
  bool merged = false;
  std::string steps;  // e.g. "I,G,B,B" for Step I move, generic merge, two variant-B commits
  std::int64_t moved_units = 0;
  std::int64_t cumulative_units = 0;
  int h = 0;
  int h_max = 0;
};

struct VariantCheck {
  long event = 0;
  char variant = 'A';
  std::int64_t moved_units = 0;
  bool objective_matches = true;
};

struct SensitivityRecord {
  long event = 0;
  int distance = 0;  // ||x - x'||_1
  int changed_sources = 0;  // D
};

// Randomized-mode state: one paging problem per realized source vector.
struct MarkingState {
  int h_guess = 0;
  struct Problem {
    std::unique_ptr<MarkingPaging> paging;
    bool frozen = false;
  };
  std::map<ClassVec, Problem> problems;
  long restarts = 0;
  long swaps = 0;
};

class OnlineAlgorithm {
 public:
  OnlineAlgorithm(const Params& params, const OnlineOptions& opts);

  // Processes one edge insertion; returns the moved volume in 1/k units.
  std::int64_t insert(int u, int v);

  const Params& params() const { return state_.params(); }
  const PieceState& pieces() const { return state_; }
  const Schedule& schedule() const { return sched_; }
  const IlpInstance& instance() const { return inst_; }
  const IlpSolution& solution() const { return x_; }
  int h() const { return x_.extraordinary_count(); }
  int h_max() const { return h_max_; }
  std::int64_t cost_units() const { return sched_.moved_units(); }
  std::int64_t peak_load_units() const { return peak_load_; }
  const std::vector<EventRecord>& events() const { return events_; }
  const std::vector<VariantCheck>& variant_checks() const { return variant_checks_; }
  const std::vector<SensitivityRecord>& sensitivity() const { return sensitivity_; }
  const std::optional<MarkingState>& marking() const { return marking_; }
  std::vector<int> vertex_assignment() const;
  bool marked(int server) const;

  // Every runtime invariant; empty when all hold.
  std::vector<std::string> check() const;

 private:
  void step_two(const MergeEvent& ev, int origin_p1, int host);
  void step_three(int pm);
  void generic(const std::set<int>& touched, bool record_sensitivity);
  void update_marking(const std::optional<int>& mono_server, int p1_units);
  void ensure_problems();
  void pin_departed();
  void sync_marking();
  void refresh_sources();
  void check_or_throw() const;

  OnlineOptions opts_;
  PieceState state_;
  IlpInstance inst_;
  IlpSolution x_;
  Schedule sched_;
  std::vector<ClassVec> sources_;
  std::vector<ClassVec> prev_sources_;
  std::vector<std::pair<int, int>> edges_;
  std::mt19937_64 rng_;
  std::optional<MarkingState> marking_;
  Rational paging_r_;
  int h_max_ = 0;
  std::int64_t peak_load_ = 0;
  long event_ = 0;
  std::string steps_;
  std::vector<EventRecord> events_;
  std::vector<VariantCheck> variant_checks_;
  std::vector<SensitivityRecord> sensitivity_;
};

}  // namespace repart
