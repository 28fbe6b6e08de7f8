#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "repart/params.hpp"
#include "repart/pieces.hpp"

namespace repart {

// Per-class volumes in delta units, indexed 0..max_class.
using ClassVec = std::vector<int>;

struct Configuration {
  ClassVec r;  // reservation
  ClassVec m;  // source
  bool ordinary() const;
  auto operator<=>(const Configuration&) const = default;
};

bool geq(const ClassVec& a, const ClassVec& b);
int l1(const ClassVec& v);
// Every prefix sum of m1 is at least the matching prefix sum of m2.
bool prefix_geq(const ClassVec& m1, const ClassVec& m2);

enum class CostMode { Deterministic, Augmented };
std::string to_string(CostMode mode);

struct IlpInstance {
  int num_classes = 0;
  int budget = 0;    // l1 bound of a gamma-valid reservation, delta units
  int ceil_one = 0;  // bound on l1 of a source vector, delta units
  int ell = 0;
  int delta_units = 1;
  std::vector<std::int64_t> demand;  // demand[0] = ceil(V_0 / delta), demand[i] = V_i
  std::int64_t v0_units = 0;         // raw uncommitted volume, 1/k units
  std::map<ClassVec, int> z;
  CostMode mode = CostMode::Deterministic;

  // Objective = (sum of scaled costs) / scale().
  std::int64_t scale() const;
  // Scaled cost of an extraordinary configuration with source vector m.
  std::int64_t extra_cost(const ClassVec& m) const;
  std::int64_t scaled_cost(const Configuration& c) const { return c.ordinary() ? 0 : extra_cost(c.m); }
  std::int64_t id_of(const ClassVec& m) const;
  bool valid_reservation(const ClassVec& r) const;
  bool valid_source(const ClassVec& m) const;
  std::vector<int> active_classes() const;

  bool operator==(const IlpInstance&) const = default;
};

struct IlpSolution {
  std::map<Configuration, int> x;
  std::int64_t scaled_objective = 0;
  Rational objective;

  int extraordinary_count() const;
  bool operator==(const IlpSolution& o) const { return x == o.x; }
};

ClassVec source_vector_of(const PieceState& state, int server);
// Source vectors of all servers, indexed by server.
std::vector<ClassVec> source_vectors(const PieceState& state);
IlpInstance build_instance(const PieceState& state, CostMode mode);

// Fills scaled_objective / objective from x.
void evaluate(const IlpInstance& inst, IlpSolution& sol);
// Empty iff sol is feasible for inst and its objective matches x.
std::vector<std::string> check_solution(const IlpInstance& inst, const IlpSolution& sol);
int l1_distance(const IlpSolution& a, const IlpSolution& b);

struct VariantUpdate {
  IlpInstance instance;
  IlpSolution solution;
  Configuration config;  // the new configuration of the server
};

// Monochromatic merge of two large pieces of classes i1, i2 on an ordinary server. A class-i piece
// holds exactly i delta units of committed volume, so the classes are also the volumes.
VariantUpdate apply_variant_a(const IlpInstance& inst, const IlpSolution& x, const Configuration& cfg, int i1,
                              int i2);
// Monochromatic commit of one delta on an ordinary server; i is the class before the commit.
VariantUpdate apply_variant_b(const IlpInstance& inst, const IlpSolution& x, const Configuration& cfg, int i);

std::string instance_json(const IlpInstance& inst, const IlpSolution* sol);

}  // namespace repart
