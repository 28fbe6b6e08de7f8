#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "repart/params.hpp"

namespace repart {

struct Piece {
  int id = -1;
  std::vector<int> vertices;
  int committed_units = 0;
  int uncommitted_units = 0;
  std::vector<int> histogram;  // vertex count per color

  int size() const { return committed_units + uncommitted_units; }
};

struct Classification {
  int cls = 0;
  int majority = 0;
  bool mono = false;
  int foreign_units = 0;
};

struct MergeEvent {
  int u = -1, v = -1;
  int p1 = -1, p2 = -1, pm = -1;
  int i1 = 0, i2 = 0, im = 0;
  int p1_units = 0;
  int p1_committed = 0, p2_committed = 0;
  int p1_uncommitted = 0;
  bool p1_small = true;
  // Server s when p1, p2 and pm are all monochromatic for s.
  std::optional<int> mono_server;
};

// Vertices, pieces and commitment state. Colors are 0-based; vertex v has color v / k.
class PieceState {
 public:
  explicit PieceState(const Params& params);

  const Params& params() const { return params_; }
  int num_vertices() const { return static_cast<int>(vertex_piece_.size()); }
  int color_of(int v) const { return v / params_.k; }
  int piece_of(int v) const;
  bool committed(int v) const { return committed_[v] != 0; }
  bool alive(int p) const { return p >= 0 && p < static_cast<int>(pieces_.size()) && pieces_[p].has_value(); }
  const Piece& piece(int p) const;
  const std::set<int>& live_pieces() const { return live_; }
  int uncommitted_of_color(int c) const { return uncommitted_by_color_[c]; }

  // (p1, p2) that an edge u-v would merge, p1 the smaller; nullopt when u and v already share a piece.
  std::optional<std::pair<int, int>> merge_order(int u, int v) const;
  // nullopt when u and v already share a piece.
  std::optional<MergeEvent> register_edge(int u, int v);
  // Commits delta*k vertices of p; returns them in ascending order.
  std::vector<int> commit_step(int p);

  Classification classify(int p) const;
  int piece_class(int p) const;
  bool is_small(int p) const { return pieces_[p]->committed_units == 0; }
  // Would a piece with this foreign volume count as monochromatic once large.
  bool mono_if_large(int p) const;

  std::vector<std::string> check_volume_invariants() const;

 private:
  Piece& mut(int p);

  Params params_;
  std::vector<int> vertex_piece_;
  std::vector<char> committed_;
  std::vector<std::optional<Piece>> pieces_;
  std::set<int> live_;
  std::vector<int> uncommitted_by_color_;
};

// Pieces recomputed from an edge list by BFS, as sorted vertex lists (test and audit helper).
std::vector<std::vector<int>> components_from_edges(int n, const std::vector<std::pair<int, int>>& edges);

// JSON text {params, vertices[], pieces[], assignment[]}; assignment maps piece id to server.
std::string snapshot_json(const PieceState& state, const std::vector<int>* assignment);

}  // namespace repart
