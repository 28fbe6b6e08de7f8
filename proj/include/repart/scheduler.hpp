#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "repart/ilp_model.hpp"
#include "repart/pieces.hpp"

namespace repart {

struct MoveRecord {
  long event = 0;
  int piece = -1;
  int from = -1;
  int to = -1;
  int units = 0;
};

struct ServerState {
  int id = 0;
  Configuration config;
  std::int64_t budget = 0;  // eviction budget, 1/k units
  std::set<int> hosted;
};

// Piece to server assignment plus per-server configuration and eviction budget.
class Schedule {
 public:
  // Identity placement: every singleton on its own color's server.
  Schedule(const PieceState& state, std::vector<Configuration> configs);

  int num_servers() const { return static_cast<int>(servers_.size()); }
  const ServerState& server(int s) const { return servers_[s]; }
  int server_of(int piece) const;
  int server_of_vertex(const PieceState& state, int v) const { return server_of(state.piece_of(v)); }
  std::vector<Configuration> configs() const;

  std::int64_t uncommitted_load(const PieceState& state, int s) const;
  std::int64_t committed_load(const PieceState& state, int s, int cls) const;
  std::int64_t total_load(const PieceState& state, int s) const;
  // r_0 - v_u in 1/k units.
  std::int64_t slack(const PieceState& state, int s) const;

  // Moves a piece and logs the move when the server changes. Outside balancing the destination's
  // budget grows by the piece's uncommitted volume.
  void move(const PieceState& state, int piece, int to, bool add_budget);
  // p1 and p2 have just been merged into pm; both must be on the same server.
  void merge(int p1, int p2, int pm);
  // New configuration for s. With adjust_budget a drop of r_0 is credited to the budget.
  void set_config(int s, Configuration c, bool adjust_budget, int delta_units);
  void spend_budget(int s, std::int64_t units) { servers_[s].budget -= units; }
  void add_budget(int s, std::int64_t units) { servers_[s].budget += units; }

  void begin_event(long id) { event_ = id; }
  long event() const { return event_; }
  const std::vector<MoveRecord>& log() const { return log_; }
  std::int64_t moved_units() const { return moved_units_; }

  // Low-level placement used by rebuild: detach without logging, attach later with `place`.
  void detach(int piece);
  void place(const PieceState& state, int piece, int to, int origin, bool add_budget);

 private:
  std::vector<ServerState> servers_;
  std::vector<int> piece_server_;
  std::vector<MoveRecord> log_;
  std::int64_t moved_units_ = 0;
  long event_ = 0;
};

// Hands out the configurations of x to servers: retain previous ones while possible, then
// ascending server id. prefer_extra(s) asks for an extraordinary configuration first; among the
// rest the one with the highest fit(s, c) wins, ties going to the smallest configuration.
std::vector<Configuration> assign_configurations(
    const IlpSolution& x, const std::vector<Configuration>& prev, const std::vector<ClassVec>& sources,
    const std::function<bool(int)>& prefer_extra = nullptr,
    const std::function<std::int64_t(int, const Configuration&)>& fit = nullptr);

// Volume already hosted on s that configuration c has room for, in 1/k units.
std::int64_t hosted_fit(const PieceState& state, const Schedule& sched, int s, const Configuration& c);

// Re-places every piece hosted on a server in `touched` (steps 1-3 of the generic adjustment).
// Returns the moved volume in 1/k units.
std::int64_t rebuild(const PieceState& state, Schedule& sched, const std::set<int>& touched);

// Balancing procedure for small pieces; returns moved volume in 1/k units.
std::int64_t balance(const PieceState& state, Schedule& sched);

bool movable(const PieceState& state, const Schedule& sched, int piece);

// Properties 1-3, the augmentation load bound and the budget ledger; empty when all hold.
std::vector<std::string> validate_respecting(const PieceState& state, const Schedule& sched, const IlpSolution* x);

}  // namespace repart
