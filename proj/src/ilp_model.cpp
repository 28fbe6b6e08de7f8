#include "repart/ilp_model.hpp"

#include <algorithm>
#include <cstdlib>

#include "json.hpp"

namespace repart {

bool geq(const ClassVec& a, const ClassVec& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] < b[i]) return false;
  return true;
}

int l1(const ClassVec& v) {
  int s = 0;
  for (int x : v) s += x;
  return s;
}

bool prefix_geq(const ClassVec& m1, const ClassVec& m2) {
  long a = 0, b = 0;
  for (std::size_t i = 0; i < m1.size(); ++i) {
    a += m1[i];
    b += m2[i];
    if (a < b) return false;
  }
  return true;
}

bool Configuration::ordinary() const { return geq(r, m); }

std::string to_string(CostMode mode) { return mode == CostMode::Deterministic ? "deterministic" : "augmented"; }

namespace {

std::int64_t key_max(const IlpInstance& inst) {
  return static_cast<std::int64_t>(inst.num_classes) * inst.ceil_one;
}

}  // namespace

std::int64_t IlpInstance::scale() const {
  if (mode == CostMode::Deterministic) return 1;
  std::int64_t n = key_max(*this) + 1;
  return n * n * ell;
}

std::int64_t IlpInstance::id_of(const ClassVec& m) const {
  // key is the sum of all prefix sums, so m1 >=_p m2 implies key(m1) >= key(m2), strictly if m1 != m2.
  std::int64_t key = 0;
  for (int i = 0; i < num_classes; ++i) key += static_cast<std::int64_t>(num_classes - i) * m[i];
  return key_max(*this) - key + 1;
}

std::int64_t IlpInstance::extra_cost(const ClassVec& m) const {
  if (mode == CostMode::Deterministic) return 1;
  return scale() + id_of(m);
}

bool IlpInstance::valid_reservation(const ClassVec& r) const {
  if (static_cast<int>(r.size()) != num_classes) return false;
  for (int i = 0; i < num_classes; ++i) {
    if (r[i] < 0) return false;
    if (i > 0 && r[i] % i != 0) return false;
  }
  return l1(r) <= budget;
}

bool IlpInstance::valid_source(const ClassVec& m) const {
  if (static_cast<int>(m.size()) != num_classes) return false;
  for (int i = 0; i < num_classes; ++i) {
    if (m[i] < 0) return false;
    if (i > 0 && m[i] % i != 0) return false;
  }
  return l1(m) <= ceil_one;
}

std::vector<int> IlpInstance::active_classes() const {
  std::vector<int> out{0};
  for (int i = 1; i < num_classes; ++i)
    if (demand[i] > 0) out.push_back(i);
  return out;
}

int IlpSolution::extraordinary_count() const {
  int h = 0;
  for (const auto& [c, n] : x)
    if (!c.ordinary()) h += n;
  return h;
}

namespace {

int ceil_div(std::int64_t a, int b) { return static_cast<int>((a + b - 1) / b); }

}  // namespace

std::vector<ClassVec> source_vectors(const PieceState& state) {
  const Params& p = state.params();
  int nc = p.num_classes();
  int j = p.delta_units();
  std::vector<ClassVec> ms(p.ell, ClassVec(nc, 0));
  for (int s = 0; s < p.ell; ++s) ms[s][0] = ceil_div(state.uncommitted_of_color(s), j);
  for (int id : state.live_pieces()) {
    const Piece& pc = state.piece(id);
    if (pc.committed_units == 0) continue;
    Classification c = state.classify(id);
    if (c.mono) ms[c.majority][c.cls] += c.cls;
  }
  return ms;
}

ClassVec source_vector_of(const PieceState& state, int server) {
  if (server < 0 || server >= state.params().ell) throw InputError("unknown server " + std::to_string(server));
  return source_vectors(state)[server];
}

IlpInstance build_instance(const PieceState& state, CostMode mode) {
  const Params& p = state.params();
  IlpInstance inst;
  inst.num_classes = p.num_classes();
  inst.budget = p.reservation_budget();
  inst.ceil_one = p.ceil_one();
  inst.ell = p.ell;
  inst.delta_units = p.delta_units();
  inst.mode = mode;
  inst.demand.assign(inst.num_classes, 0);
  std::int64_t uncommitted = 0;
  for (int id : state.live_pieces()) {
    const Piece& pc = state.piece(id);
    uncommitted += pc.uncommitted_units;
    int cls = pc.committed_units / inst.delta_units;
    if (cls > 0) inst.demand[cls] += cls;
  }
  inst.v0_units = uncommitted;
  inst.demand[0] = ceil_div(uncommitted, inst.delta_units);
  for (const ClassVec& m : source_vectors(state)) ++inst.z[m];
  return inst;
}

void evaluate(const IlpInstance& inst, IlpSolution& sol) {
  std::int64_t total = 0;
  for (const auto& [c, n] : sol.x) total += inst.scaled_cost(c) * n;
  sol.scaled_objective = total;
  sol.objective = Rational(total, inst.scale());
}

std::vector<std::string> check_solution(const IlpInstance& inst, const IlpSolution& sol) {
  std::vector<std::string> out;
  std::map<ClassVec, int> per_m;
  std::vector<std::int64_t> cover(inst.num_classes, 0);
  int total = 0;
  for (const auto& [c, n] : sol.x) {
    if (n <= 0) out.push_back("non-positive multiplicity");
    if (!inst.valid_reservation(c.r)) out.push_back("reservation not gamma-valid");
    if (!inst.valid_source(c.m)) out.push_back("invalid source vector");
    if (c.r.size() != static_cast<std::size_t>(inst.num_classes)) continue;
    per_m[c.m] += n;
    total += n;
    for (int i = 0; i < inst.num_classes; ++i) cover[i] += static_cast<std::int64_t>(c.r[i]) * n;
  }
  if (total != inst.ell) out.push_back("configurations do not sum to ell");
  if (per_m != inst.z) out.push_back("source vector counts differ from Z");
  for (int i = 0; i < inst.num_classes; ++i)
    if (cover[i] < inst.demand[i]) out.push_back("class " + std::to_string(i) + " under-reserved");
  IlpSolution copy = sol;
  evaluate(inst, copy);
  if (copy.scaled_objective != sol.scaled_objective) out.push_back("objective does not match x");
  return out;
}

int l1_distance(const IlpSolution& a, const IlpSolution& b) {
  int d = 0;
  for (const auto& [c, n] : a.x) {
    auto it = b.x.find(c);
    d += std::abs(n - (it == b.x.end() ? 0 : it->second));
  }
  for (const auto& [c, n] : b.x)
    if (!a.x.count(c)) d += n;
  return d;
}

namespace {

VariantUpdate replace_config(const IlpInstance& inst, const IlpSolution& x, const Configuration& cfg,
                             Configuration next, IlpInstance next_inst) {
  if (!cfg.ordinary() || !next.ordinary()) throw InvariantViolation("special variant on a non-ordinary configuration");
  if (!inst.valid_reservation(next.r) || !inst.valid_source(next.m))
    throw InvariantViolation("special variant produced an invalid configuration");
  auto zit = next_inst.z.find(cfg.m);
  if (zit == next_inst.z.end()) throw InvariantViolation("special variant: source vector not in Z");
  if (--zit->second == 0) next_inst.z.erase(zit);
  ++next_inst.z[next.m];

  VariantUpdate up;
  up.solution = x;
  auto it = up.solution.x.find(cfg);
  if (it == up.solution.x.end()) throw InvariantViolation("special variant: configuration not in x");
  if (--it->second == 0) up.solution.x.erase(it);
  ++up.solution.x[next];
  evaluate(next_inst, up.solution);
  up.instance = std::move(next_inst);
  up.config = std::move(next);
  return up;
}

}  // namespace

VariantUpdate apply_variant_a(const IlpInstance& inst, const IlpSolution& x, const Configuration& cfg, int i1,
                              int i2) {
  int im = i1 + i2;
  if (i1 <= 0 || i2 <= 0 || im >= inst.num_classes) throw InvariantViolation("variant A needs two large pieces");
  Configuration next = cfg;
  IlpInstance ni = inst;
  for (ClassVec* v : {&next.r, &next.m}) {
    (*v)[i1] -= i1;
    (*v)[i2] -= i2;
    (*v)[im] += im;
  }
  ni.demand[i1] -= i1;
  ni.demand[i2] -= i2;
  ni.demand[im] += im;
  return replace_config(inst, x, cfg, std::move(next), std::move(ni));
}

VariantUpdate apply_variant_b(const IlpInstance& inst, const IlpSolution& x, const Configuration& cfg, int i) {
  int ip = i + 1;
  if (i < 0 || ip >= inst.num_classes) throw InvariantViolation("variant B class out of range");
  Configuration next = cfg;
  IlpInstance ni = inst;
  for (ClassVec* v : {&next.r, &next.m}) {
    (*v)[i] -= i;
    (*v)[ip] += ip;
    (*v)[0] -= 1;
  }
  if (i > 0) ni.demand[i] -= i;
  ni.demand[ip] += ip;
  ni.v0_units -= inst.delta_units;
  ni.demand[0] = ceil_div(ni.v0_units, inst.delta_units);
  return replace_config(inst, x, cfg, std::move(next), std::move(ni));
}

std::string instance_json(const IlpInstance& inst, const IlpSolution* sol) {
  using nlohmann::json;
  json j;
  j["mode"] = to_string(inst.mode);
  j["budget"] = inst.budget;
  j["V"] = inst.demand;
  j["V0_units_k"] = inst.v0_units;
  json z = json::array();
  for (const auto& [m, n] : inst.z) z.push_back({{"m", m}, {"count", n}});
  j["Z"] = std::move(z);
  if (sol) {
    json x = json::array();
    for (const auto& [c, n] : sol->x) x.push_back({{"r", c.r}, {"m", c.m}, {"count", n}});
    j["x"] = std::move(x);
    j["objective"] = to_string(sol->objective);
  }
  return j.dump();
}

}  // namespace repart
