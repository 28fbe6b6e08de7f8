#include "repart/scheduler.hpp"

#include <algorithm>
#include <map>

namespace repart {

Schedule::Schedule(const PieceState& state, std::vector<Configuration> configs) {
  const Params& p = state.params();
  if (static_cast<int>(configs.size()) != p.ell) throw InvariantViolation("one configuration per server expected");
  servers_.resize(p.ell);
  for (int s = 0; s < p.ell; ++s) {
    servers_[s].id = s;
    servers_[s].config = std::move(configs[s]);
  }
  for (int id : state.live_pieces()) {
    const Piece& pc = state.piece(id);
    int s = state.classify(id).majority;
    if (static_cast<int>(piece_server_.size()) <= id) piece_server_.resize(id + 1, -1);
    piece_server_[id] = s;
    servers_[s].hosted.insert(pc.id);
  }
}

int Schedule::server_of(int piece) const {
  if (piece < 0 || piece >= static_cast<int>(piece_server_.size()) || piece_server_[piece] < 0)
    throw InvariantViolation("piece " + std::to_string(piece) + " is not scheduled");
  return piece_server_[piece];
}

std::vector<Configuration> Schedule::configs() const {
  std::vector<Configuration> out;
  for (const ServerState& s : servers_) out.push_back(s.config);
  return out;
}

std::int64_t Schedule::uncommitted_load(const PieceState& state, int s) const {
  std::int64_t u = 0;
  for (int p : servers_[s].hosted) u += state.piece(p).uncommitted_units;
  return u;
}

std::int64_t Schedule::committed_load(const PieceState& state, int s, int cls) const {
  std::int64_t c = 0;
  for (int p : servers_[s].hosted) {
    const Piece& pc = state.piece(p);
    if (pc.committed_units > 0 && state.piece_class(p) == cls) c += pc.committed_units;
  }
  return c;
}

std::int64_t Schedule::total_load(const PieceState& state, int s) const {
  std::int64_t t = 0;
  for (int p : servers_[s].hosted) t += state.piece(p).size();
  return t;
}

std::int64_t Schedule::slack(const PieceState& state, int s) const {
  return static_cast<std::int64_t>(servers_[s].config.r[0]) * state.params().delta_units() -
         uncommitted_load(state, s);
}

void Schedule::detach(int piece) {
  int s = server_of(piece);
  servers_[s].hosted.erase(piece);
  piece_server_[piece] = -1;
}

void Schedule::place(const PieceState& state, int piece, int to, int origin, bool add_budget) {
  if (static_cast<int>(piece_server_.size()) <= piece) piece_server_.resize(piece + 1, -1);
  if (piece_server_[piece] >= 0) throw InvariantViolation("placing a piece that is still scheduled");
  piece_server_[piece] = to;
  servers_[to].hosted.insert(piece);
  if (to == origin) return;
  const Piece& pc = state.piece(piece);
  log_.push_back({event_, piece, origin, to, pc.size()});
  moved_units_ += pc.size();
  if (add_budget) servers_[to].budget += pc.uncommitted_units;
}

void Schedule::move(const PieceState& state, int piece, int to, bool add_budget) {
  int from = server_of(piece);
  if (from == to) return;
  detach(piece);
  place(state, piece, to, from, add_budget);
}

void Schedule::merge(int p1, int p2, int pm) {
  int s = server_of(p2);
  if (server_of(p1) != s) throw InvariantViolation("merging pieces on different servers");
  detach(p1);
  detach(p2);
  if (static_cast<int>(piece_server_.size()) <= pm) piece_server_.resize(pm + 1, -1);
  piece_server_[pm] = s;
  servers_[s].hosted.insert(pm);
}

void Schedule::set_config(int s, Configuration c, bool adjust_budget, int delta_units) {
  ServerState& srv = servers_[s];
  if (adjust_budget && c.r[0] < srv.config.r[0])
    srv.budget += static_cast<std::int64_t>(srv.config.r[0] - c.r[0]) * delta_units;
  srv.config = std::move(c);
}

std::vector<Configuration> assign_configurations(const IlpSolution& x, const std::vector<Configuration>& prev,
                                                 const std::vector<ClassVec>& sources,
                                                 const std::function<bool(int)>& prefer_extra,
                                                 const std::function<std::int64_t(int, const Configuration&)>& fit) {
  std::map<Configuration, int> free = x.x;
  const int ell = static_cast<int>(sources.size());
  std::vector<Configuration> out(ell);
  std::vector<bool> done(ell, false);
  for (int s = 0; s < ell; ++s) {
    if (prev[s].m != sources[s]) continue;
    auto it = free.find(prev[s]);
    if (it == free.end() || it->second == 0) continue;
    --it->second;
    out[s] = prev[s];
    done[s] = true;
  }
  for (int s = 0; s < ell; ++s) {
    if (done[s]) continue;
    bool want_extra = prefer_extra && prefer_extra(s);
    const Configuration* pick = nullptr;
    std::int64_t best = 0;
    for (int pass = 0; pass < 2 && !pick; ++pass) {
      for (auto& [c, n] : free) {
        if (n == 0 || c.m != sources[s]) continue;
        bool extra = !c.ordinary();
        if (pass == 0 && prefer_extra && extra != want_extra) continue;
        std::int64_t f = fit ? fit(s, c) : 0;
        if (!pick || f > best) {
          pick = &c;
          best = f;
        }
        if (!fit) break;
      }
    }
    if (!pick) throw InvariantViolation("no configuration left for server " + std::to_string(s));
    --free[*pick];
    out[s] = *pick;
  }
  return out;
}

std::int64_t hosted_fit(const PieceState& state, const Schedule& sched, int s, const Configuration& c) {
  const int j = state.params().delta_units();
  std::int64_t f = std::min<std::int64_t>(static_cast<std::int64_t>(c.r[0]) * j, sched.uncommitted_load(state, s));
  for (std::size_t i = 1; i < c.r.size(); ++i)
    if (c.r[i] > 0)
      f += std::min<std::int64_t>(static_cast<std::int64_t>(c.r[i]) * j, sched.committed_load(state, s, static_cast<int>(i)));
  return f;
}

namespace {

// Live pieces monochromatic for each server.
std::vector<std::vector<int>> mono_pieces(const PieceState& state) {
  std::vector<std::vector<int>> out(state.params().ell);
  for (int id : state.live_pieces()) {
    Classification c = state.classify(id);
    if (c.mono) out[c.majority].push_back(id);
  }
  return out;
}

}  // namespace

std::int64_t rebuild(const PieceState& state, Schedule& sched, const std::set<int>& touched) {
  std::int64_t before = sched.moved_units();
  const int j = state.params().delta_units();
  std::map<int, int> origin;
  for (int s : touched)
    for (int p : sched.server(s).hosted) origin[p] = s;
  for (const auto& [p, s] : origin) sched.detach(p);

  auto mono = mono_pieces(state);
  for (int s : touched) {
    if (!sched.server(s).config.ordinary()) continue;
    for (int p : mono[s]) {
      auto it = origin.find(p);
      if (it != origin.end()) {
        sched.place(state, p, s, it->second, true);
        origin.erase(it);
      } else {
        sched.move(state, p, s, true);
      }
    }
  }

  std::vector<int> rest;
  for (const auto& [p, s] : origin) rest.push_back(p);
  std::sort(rest.begin(), rest.end(), [&](int a, int b) {
    const Piece& pa = state.piece(a);
    const Piece& pb = state.piece(b);
    if (pa.committed_units != pb.committed_units) return pa.committed_units > pb.committed_units;
    if (pa.size() != pb.size()) return pa.size() > pb.size();
    return a < b;
  });
  for (int p : rest) {
    int cls = state.piece_class(p);
    auto free_for = [&](int t) {
      const Configuration& c = sched.server(t).config;
      return cls > 0 ? sched.committed_load(state, t, cls) < static_cast<std::int64_t>(c.r[cls]) * j
                     : sched.uncommitted_load(state, t) < static_cast<std::int64_t>(c.r[0]) * j;
    };
    // Staying put is free; otherwise scan servers in ascending order.
    int dest = free_for(origin[p]) ? origin[p] : -1;
    for (int t = 0; t < sched.num_servers() && dest < 0; ++t)
      if (free_for(t)) dest = t;
    if (dest < 0) throw InvariantViolation("first fit found no free server for piece " + std::to_string(p));
    sched.place(state, p, dest, origin[p], true);
  }
  return sched.moved_units() - before;
}

bool movable(const PieceState& state, const Schedule& sched, int piece) {
  const Piece& pc = state.piece(piece);
  if (pc.committed_units > 0) return false;
  Classification c = state.classify(piece);
  const Rational& eps = state.params().epsilon;
  std::int64_t majority = pc.size() - c.foreign_units;
  // majority / size <= 1 - 2 eps
  if (Rational(majority) <= Rational(pc.size()) * (1 - 2 * eps)) return true;
  return !sched.server(c.majority).config.ordinary();
}

std::int64_t balance(const PieceState& state, Schedule& sched) {
  std::int64_t before = sched.moved_units();
  // Later servers can refill earlier ones; repeat passes until nothing moves.
  for (bool changed = true; changed;) {
    changed = false;
    for (int s = 0; s < sched.num_servers(); ++s) {
      while (true) {
        std::int64_t budget = sched.server(s).budget;
        int pick = -1;
        for (int p : sched.server(s).hosted)
          if (state.piece(p).size() < budget && movable(state, sched, p)) {
            pick = p;
            break;
          }
        if (pick < 0) break;
        // A server with non-negative slack is itself a valid destination: the piece stays and
        // the budget is spent all the same.
        int target = sched.slack(state, s) >= 0 ? s : -1;
        std::int64_t best = 0;
        for (int t = 0; t < sched.num_servers() && target != s; ++t) {
          std::int64_t sl = sched.slack(state, t);
          if (sl < 0) continue;
          if (target < 0 || sl > best) {
            target = t;
            best = sl;
          }
        }
        if (target < 0) throw InvariantViolation("balancing found no server with non-negative slack");
        sched.spend_budget(s, state.piece(pick).size());
        if (target == s) continue;
        sched.move(state, pick, target, false);
        changed = true;
      }
    }
  }
  return sched.moved_units() - before;
}

std::vector<std::string> validate_respecting(const PieceState& state, const Schedule& sched, const IlpSolution* x) {
  std::vector<std::string> out;
  const Params& p = state.params();
  const int j = p.delta_units();
  const Rational eps = p.epsilon;
  auto sources = source_vectors(state);
  auto mono = mono_pieces(state);
  std::map<Configuration, int> used;
  for (int s = 0; s < sched.num_servers(); ++s) {
    const ServerState& srv = sched.server(s);
    const Configuration& c = srv.config;
    std::string tag = "server " + std::to_string(s) + ": ";
    ++used[c];
    if (c.m != sources[s]) out.push_back(tag + "configuration source vector differs from m_s");
    std::map<int, std::int64_t> per_class;
    std::int64_t vu = 0, total = 0;
    for (int id : srv.hosted) {
      const Piece& pc = state.piece(id);
      if (pc.committed_units > 0) per_class[state.piece_class(id)] += pc.committed_units;
      vu += pc.uncommitted_units;
      total += pc.size();
    }
    for (const auto& [cls, load] : per_class)
      if (load > static_cast<std::int64_t>(c.r[cls]) * j)
        out.push_back(tag + "property 1 (class " + std::to_string(cls) + " overloaded)");
    Rational r0(static_cast<std::int64_t>(c.r[0]) * j, p.k);
    if (Rational(vu, p.k) > r0 + 14 * eps) out.push_back(tag + "property 2 (uncommitted above r_0 + 14 eps)");
    if (c.ordinary())
      for (int id : mono[s])
        if (!srv.hosted.count(id)) {
          out.push_back(tag + "property 3 (monochromatic piece " + std::to_string(id) + " elsewhere)");
          break;
        }
    if (Rational(total, p.k) > 1 + p.gamma() + 14 * eps) out.push_back(tag + "load above 1 + gamma + 14 eps");
    if (srv.budget < 0) out.push_back(tag + "negative eviction budget");
    // budget >= v_u - r_0 - 2 eps
    if (Rational(srv.budget, p.k) < Rational(vu, p.k) - r0 - 2 * eps) out.push_back(tag + "budget ledger below -slack - 2 eps");
  }
  if (x && used != x->x) out.push_back("assigned configurations differ from the ILP solution");
  for (int id : state.live_pieces()) {
    try {
      sched.server_of(id);
    } catch (const InvariantViolation&) {
      out.push_back("piece " + std::to_string(id) + " unscheduled");
    }
  }
  return out;
}

}  // namespace repart
