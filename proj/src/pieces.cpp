#include "repart/pieces.hpp"

#include <algorithm>
#include <queue>

#include "json.hpp"

namespace repart {

PieceState::PieceState(const Params& params)
    : params_(params),
      vertex_piece_(params.n()),
      committed_(params.n(), 0),
      pieces_(params.n()),
      uncommitted_by_color_(params.ell, params.k) {
  for (int v = 0; v < params.n(); ++v) {
    Piece p;
    p.id = v;
    p.vertices = {v};
    p.uncommitted_units = 1;
    p.histogram.assign(params.ell, 0);
    p.histogram[color_of(v)] = 1;
    pieces_[v] = std::move(p);
    vertex_piece_[v] = v;
    live_.insert(v);
  }
}

int PieceState::piece_of(int v) const {
  if (v < 0 || v >= num_vertices()) throw InputError("unknown vertex " + std::to_string(v));
  return vertex_piece_[v];
}

const Piece& PieceState::piece(int p) const {
  if (!alive(p)) throw InvariantViolation("no live piece " + std::to_string(p));
  return *pieces_[p];
}

Piece& PieceState::mut(int p) { return *pieces_[p]; }

int PieceState::piece_class(int p) const { return piece(p).committed_units / params_.delta_units(); }

Classification PieceState::classify(int p) const {
  const Piece& pc = piece(p);
  Classification c;
  c.cls = pc.committed_units / params_.delta_units();
  int best = 0;
  for (int col = 1; col < params_.ell; ++col)
    if (pc.histogram[col] > pc.histogram[best]) best = col;
  c.majority = best;
  c.foreign_units = pc.size() - pc.histogram[best];
  if (pc.committed_units > 0) {
    c.mono = c.foreign_units <= params_.delta_units();
  } else {
    c.mono = Rational(c.foreign_units) < params_.epsilon * pc.size();
  }
  return c;
}

bool PieceState::mono_if_large(int p) const {
  return classify(p).foreign_units <= params_.delta_units();
}

std::optional<std::pair<int, int>> PieceState::merge_order(int u, int v) const {
  int pu = piece_of(u);
  int pv = piece_of(v);
  if (pu == pv) return std::nullopt;
  const Piece& a = *pieces_[pu];
  const Piece& b = *pieces_[pv];
  if (b.size() < a.size() || (b.size() == a.size() && pv < pu)) return std::make_pair(pv, pu);
  return std::make_pair(pu, pv);
}

std::optional<MergeEvent> PieceState::register_edge(int u, int v) {
  auto order = merge_order(u, v);
  if (!order) return std::nullopt;
  auto [p1, p2] = *order;

  MergeEvent ev;
  ev.u = u;
  ev.v = v;
  ev.p1 = p1;
  ev.p2 = p2;
  Classification c1 = classify(p1);
  Classification c2 = classify(p2);
  ev.i1 = c1.cls;
  ev.i2 = c2.cls;
  const Piece& q1 = *pieces_[p1];
  const Piece& q2 = *pieces_[p2];
  ev.p1_units = q1.size();
  ev.p1_committed = q1.committed_units;
  ev.p1_uncommitted = q1.uncommitted_units;
  ev.p2_committed = q2.committed_units;
  ev.p1_small = q1.committed_units == 0;

  Piece m;
  m.id = static_cast<int>(pieces_.size());
  m.vertices.reserve(q1.vertices.size() + q2.vertices.size());
  m.vertices.insert(m.vertices.end(), q2.vertices.begin(), q2.vertices.end());
  m.vertices.insert(m.vertices.end(), q1.vertices.begin(), q1.vertices.end());
  m.committed_units = q1.committed_units + q2.committed_units;
  m.uncommitted_units = q1.uncommitted_units + q2.uncommitted_units;
  m.histogram.assign(params_.ell, 0);
  for (int col = 0; col < params_.ell; ++col) m.histogram[col] = q1.histogram[col] + q2.histogram[col];
  for (int x : m.vertices) vertex_piece_[x] = m.id;
  ev.pm = m.id;

  pieces_[p1].reset();
  pieces_[p2].reset();
  live_.erase(p1);
  live_.erase(p2);
  pieces_.push_back(std::move(m));
  live_.insert(ev.pm);

  Classification cm = classify(ev.pm);
  ev.im = cm.cls;
  if (c1.mono && c2.mono && cm.mono && c1.majority == c2.majority && c2.majority == cm.majority)
    ev.mono_server = cm.majority;
  return ev;
}

std::vector<int> PieceState::commit_step(int p) {
  Piece& pc = mut(p);
  int j = params_.delta_units();
  if (params_.below_epsilon(pc.size()) || pc.uncommitted_units <= 2 * j)
    throw InvariantViolation("commit_step precondition violated on piece " + std::to_string(p));
  Classification c = classify(p);
  bool majority_only = c.mono || c.foreign_units <= j;
  std::vector<int> eligible;
  for (int x : pc.vertices) {
    if (committed_[x]) continue;
    if (majority_only && color_of(x) != c.majority) continue;
    eligible.push_back(x);
  }
  if (static_cast<int>(eligible.size()) < j)
    throw InvariantViolation("insufficient majority vertices to commit on piece " + std::to_string(p));
  std::partial_sort(eligible.begin(), eligible.begin() + j, eligible.end());
  eligible.resize(j);
  for (int x : eligible) {
    committed_[x] = 1;
    --uncommitted_by_color_[color_of(x)];
  }
  pc.committed_units += j;
  pc.uncommitted_units -= j;
  return eligible;
}

std::vector<std::string> PieceState::check_volume_invariants() const {
  std::vector<std::string> out;
  int j = params_.delta_units();
  for (int p : live_) {
    const Piece& pc = *pieces_[p];
    std::string tag = "piece " + std::to_string(p) + ": ";
    bool small = pc.committed_units == 0;
    if (small != params_.below_epsilon(pc.size())) out.push_back(tag + "invariant 1 (small iff below epsilon)");
    if (pc.committed_units % j != 0) out.push_back(tag + "committed volume not a multiple of delta");
    if (pc.committed_units / j > params_.max_class()) out.push_back(tag + "class out of range");
    if (!small) {
      Classification c = classify(p);
      if (c.mono) {
        for (int x : pc.vertices)
          if (committed_[x] && color_of(x) != c.majority) {
            out.push_back(tag + "invariant 2 (foreign committed vertex " + std::to_string(x) + ")");
            break;
          }
      }
      if (pc.uncommitted_units > 2 * j) out.push_back(tag + "invariant 3 (uncommitted above 2 delta)");
    } else if (Rational(pc.uncommitted_units, params_.k) > params_.epsilon) {
      out.push_back(tag + "invariant 3 (uncommitted above epsilon)");
    }
  }
  return out;
}

std::vector<std::vector<int>> components_from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> adj(n);
  for (auto [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<int> seen(n, 0);
  std::vector<std::vector<int>> comps;
  for (int s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<int> comp;
    std::queue<int> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
      int x = q.front();
      q.pop();
      comp.push_back(x);
      for (int y : adj[x])
        if (!seen[y]) {
          seen[y] = 1;
          q.push(y);
        }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  return comps;
}

std::string snapshot_json(const PieceState& state, const std::vector<int>* assignment) {
  using nlohmann::json;
  const Params& p = state.params();
  json j;
  j["params"] = {{"k", p.k},
                 {"ell", p.ell},
                 {"epsilon", to_string(p.epsilon)},
                 {"delta", to_string(p.delta)},
                 {"gamma", to_string(p.gamma())},
                 {"mode", to_string(p.mode)}};
  json verts = json::array();
  for (int v = 0; v < state.num_vertices(); ++v)
    verts.push_back({{"id", v}, {"color", state.color_of(v)}, {"committed", state.committed(v)}});
  j["vertices"] = std::move(verts);
  json pieces = json::array();
  json assign = json::array();
  for (int id : state.live_pieces()) {
    const Piece& pc = state.piece(id);
    Classification c = state.classify(id);
    std::vector<int> vs = pc.vertices;
    std::sort(vs.begin(), vs.end());
    pieces.push_back({{"id", id},
                      {"vertices", vs},
                      {"committed_units", pc.committed_units},
                      {"uncommitted_units", pc.uncommitted_units},
                      {"class", c.cls},
                      {"majority", c.majority},
                      {"monochromatic", c.mono}});
    if (assignment) assign.push_back({{"piece", id}, {"server", (*assignment)[id]}});
  }
  j["pieces"] = std::move(pieces);
  j["assignment"] = std::move(assign);
  return j.dump();
}

}  // namespace repart
