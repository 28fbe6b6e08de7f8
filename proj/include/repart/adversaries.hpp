#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "repart/params.hpp"

namespace repart {

using Edge = std::pair<int, int>;

struct TraceEvent {
  long t = 0;
  int u = -1, v = -1;
  // FNV-1a hash of the vertex->server view an adaptive adversary reacted to.
  std::optional<std::uint64_t> view_hash;
};

std::uint64_t schedule_hash(const std::vector<int>& vertex_server);
std::string trace_to_jsonl(const std::vector<TraceEvent>& trace);
std::vector<TraceEvent> trace_from_jsonl(const std::string& text);

// Published schedule view: server of a vertex.
using ServerLookup = std::function<int(int)>;

// Tiny union-find that also tracks volume and the single color of a component (-1 if mixed).
class ComponentTracker {
 public:
  ComponentTracker(int k, int ell);
  int find(int v) const;
  // Returns false if u and v were already connected.
  bool unite(int u, int v);
  int size(int v) const { return size_[find(v)]; }
  int color(int v) const { return color_[find(v)]; }  // -1 when not single-colored
  int k() const { return k_; }
  int num_vertices() const { return static_cast<int>(parent_.size()); }
  // Component roots ordered by smallest member vertex.
  std::vector<int> roots() const;
  int min_vertex(int v) const { return min_[find(v)]; }

 private:
  int k_;
  mutable std::vector<int> parent_;
  std::vector<int> size_, color_, min_;
};

// Picks the next pair to merge among equal pieces given as (piece id, server): the first piece
// (by id) that has a partner on another server, paired with its first such partner; otherwise
// the two lowest ids. Returns indices into `pieces`.
std::pair<std::size_t, std::size_t> pick_pair(const std::vector<std::pair<int, int>>& pieces);

// Server with the most color-c vertices, lowest index on ties.
int main_server(int color, int k, int ell, const ServerLookup& server_of_vertex);

struct DetLbStats {
  int rounds = 0;
  // Rounds started on a non-deficient color because too few unfinished deficient colors were left.
  int fallback_rounds = 0;
  // Round starts where no unfinished deficient color existed.
  int split_server_violations = 0;
  int c_star = -1;
  std::vector<int> rounds_per_color;
};

// Adaptive deterministic lower-bound adversary. It only reads the published vertex->server view.
class DetLbAdversary {
 public:
  DetLbAdversary(int k, int ell, const Rational& epsilon);

  // Next edge given the current view, or nullopt when the construction is complete.
  std::optional<Edge> next(const ServerLookup& server_of_vertex);
  bool done() const { return phase_ == Phase::Done; }
  const DetLbStats& stats() const { return stats_; }
  const ComponentTracker& components() const { return comps_; }
  bool deficient(int color, const ServerLookup& server_of_vertex) const;
  bool finished(int color) const { return finished_[color]; }
  int exponent(int color) const { return exponent_[color]; }

 private:
  enum class Phase { Init, Rounds, Final, Done };
  std::vector<int> level_pieces(int color) const;
  std::optional<int> leftover(int color) const;
  void start_round(const ServerLookup& view);
  void end_round(int color);
  void plan_final();
  Edge emit(Edge e);

  int k_, ell_;
  int eps_units_;  // epsilon * k
  int m_;          // log2(epsilon * k)
  ComponentTracker comps_;
  Phase phase_ = Phase::Init;
  std::vector<Edge> pending_;
  std::size_t pending_pos_ = 0;
  int round_color_ = -1;
  std::vector<int> exponent_;
  std::vector<char> finished_;
  DetLbStats stats_;
};

// The fixed initialization edges: one 2*epsilon path per server, then the two special-piece merges.
std::vector<Edge> det_lb_init(int k, int ell, const Rational& epsilon);

// Oblivious Omega(log ell) construction.
std::vector<Edge> rand_lb_logl(int k, int ell, const Rational& epsilon, std::uint64_t seed);

// Oblivious Omega(log k) construction: lg k rounds of uniformly random perfect matchings.
std::vector<Edge> rand_lb_logk(int k, int ell, std::uint64_t seed);

// Random final partition into ell groups of k vertices (a `mix` fraction of vertices displaced from
// their color's group), revealed as random spanning trees in random order.
std::vector<Edge> random_workload(int k, int ell, double mix, std::uint64_t seed);

// Component volumes (in vertices) after applying all edges.
std::vector<int> final_component_sizes(int k, int ell, const std::vector<Edge>& edges);

}  // namespace repart
