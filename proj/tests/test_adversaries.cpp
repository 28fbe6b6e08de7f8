#include <gtest/gtest.h>

#include <set>

#include "repart/adversaries.hpp"
#include "repart/online.hpp"

using namespace repart;

namespace {

bool all_equal_to(const std::vector<int>& xs, int v) {
  for (int x : xs)
    if (x != v) return false;
  return true;
}

std::vector<Edge> run_det_lb(int k, int ell, const Rational& eps, const ServerLookup& view) {
  DetLbAdversary adv(k, ell, eps);
  std::vector<Edge> out;
  while (auto e = adv.next(view)) out.push_back(*e);
  EXPECT_TRUE(adv.done());
  return out;
}

}  // namespace

TEST(DetLb, InitializationEdges) {
  auto init = det_lb_init(64, 4, Rational(1, 32));
  EXPECT_EQ(init.size(), 14u);  // ell (2 eps k - 1) + 2
  EXPECT_EQ(init[0], Edge(0, 1));
  EXPECT_EQ(init[12], Edge(0, 64));
  EXPECT_EQ(init[13], Edge(64, 128));
  EXPECT_THROW(det_lb_init(64, 2, Rational(1, 32)), ConfigError);
  EXPECT_THROW(det_lb_init(96, 3, Rational(1, 32)), ConfigError);  // eps k = 3
  EXPECT_THROW(det_lb_init(64, 3, Rational(1, 16)), ConfigError);
}

TEST(DetLb, PickPairPrefersCrossServer) {
  // ids 4, 2 on server 0; 7, 9 on server 1
  std::vector<std::pair<int, int>> pieces{{4, 0}, {7, 1}, {2, 0}, {9, 1}};
  auto [a, b] = pick_pair(pieces);
  EXPECT_EQ(pieces[a].first, 2);
  EXPECT_EQ(pieces[b].first, 7);
  std::vector<std::pair<int, int>> same{{4, 0}, {2, 0}, {6, 0}};
  auto [c, d] = pick_pair(same);
  EXPECT_EQ(same[c].first, 2);
  EXPECT_EQ(same[d].first, 4);
  EXPECT_THROW(pick_pair({{1, 0}}), InvariantViolation);
}

TEST(DetLb, StaticViewProducesUnitComponents) {
  for (int k : {64, 128})
    for (int ell : {3, 4, 5}) {
      auto edges = run_det_lb(k, ell, Rational(1, 32), [k](int v) { return v / k; });
      auto sizes = final_component_sizes(k, ell, edges);
      EXPECT_EQ(sizes.size(), static_cast<std::size_t>(ell));
      EXPECT_TRUE(all_equal_to(sizes, k));
      EXPECT_EQ(edges.size(), static_cast<std::size_t>(k * ell - ell));  // a spanning forest
    }
}

TEST(DetLb, AgainstTheOnlineAlgorithm) {
  Params p = make_params(64, 4, Rational(1, 8), Mode::Relaxed);
  OnlineOptions o;
  o.check_invariants = true;
  OnlineAlgorithm alg(p, o);
  DetLbAdversary adv(64, 4, Rational(1, 32));
  ServerLookup view = [&](int v) { return alg.schedule().server_of_vertex(alg.pieces(), v); };
  std::vector<Edge> edges;
  while (auto e = adv.next(view)) {
    edges.push_back(*e);
    alg.insert(e->first, e->second);
  }
  EXPECT_TRUE(all_equal_to(final_component_sizes(64, 4, edges), 64));
  const DetLbStats& st = adv.stats();
  EXPECT_GT(st.rounds, 0);
  EXPECT_GE(st.c_star, 0);
  int total = 0;
  for (int r : st.rounds_per_color) total += r;
  EXPECT_EQ(total, st.rounds);
  EXPECT_GT(alg.cost_units(), 0);
}

TEST(DetLb, ColorExponentsOnlyGrow) {
  // Every round doubles the level of one color, and a color finishes once it reaches 2 eps.
  DetLbAdversary adv(64, 3, Rational(1, 32));
  ServerLookup view = [](int v) { return v / 64; };
  std::vector<int> last(3, 0);
  while (adv.next(view)) {
    for (int c = 0; c < 3; ++c) {
      EXPECT_GE(adv.exponent(c), last[c]);
      EXPECT_LE(adv.exponent(c), 1);  // eps k = 2 = 2^1
      last[c] = adv.exponent(c);
    }
  }
}

TEST(ComponentTracker, ColorsAndVolumes) {
  ComponentTracker t(4, 2);
  EXPECT_TRUE(t.unite(0, 1));
  EXPECT_FALSE(t.unite(1, 0));
  EXPECT_EQ(t.color(0), 0);
  EXPECT_EQ(t.size(1), 2);
  t.unite(1, 5);
  EXPECT_EQ(t.color(5), -1);
  EXPECT_EQ(t.min_vertex(5), 0);
  EXPECT_EQ(t.roots().size(), 6u);
  EXPECT_THROW(t.find(8), InputError);
}

TEST(RandLogk, EdgeCountAndComponents) {
  auto edges = rand_lb_logk(8, 2, 3);
  EXPECT_EQ(edges.size(), 14u);
  auto sizes = final_component_sizes(8, 2, edges);
  EXPECT_EQ(sizes.size(), 2u);
  EXPECT_TRUE(all_equal_to(sizes, 8));
  EXPECT_EQ(rand_lb_logk(8, 2, 3), edges);
  EXPECT_NE(rand_lb_logk(8, 2, 4), edges);
  EXPECT_THROW(rand_lb_logk(12, 2, 1), ConfigError);
}

TEST(RandLogk, EveryRoundPairsEqualVolumes) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto edges = rand_lb_logk(16, 3, seed);
    ComponentTracker t(16, 3);
    for (auto [u, v] : edges) {
      EXPECT_EQ(t.size(u), t.size(v));
      t.unite(u, v);
    }
    EXPECT_TRUE(all_equal_to(final_component_sizes(16, 3, edges), 16));
  }
}

TEST(RandLogl, FinalPartitionIsValid) {
  for (int ell : {3, 4, 6})
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      auto edges = rand_lb_logl(64, ell, Rational(1, 32), seed);
      auto sizes = final_component_sizes(64, ell, edges);
      EXPECT_EQ(sizes.size(), static_cast<std::size_t>(ell));
      EXPECT_TRUE(all_equal_to(sizes, 64));
      EXPECT_EQ(edges.size(), static_cast<std::size_t>(64 * ell - ell));
    }
  EXPECT_THROW(rand_lb_logl(64, 2, Rational(1, 32), 1), ConfigError);
  EXPECT_THROW(rand_lb_logl(60, 3, Rational(1, 32), 1), ConfigError);
}

TEST(RandLogl, FirstPiecesAreSingleColored) {
  auto edges = rand_lb_logl(64, 4, Rational(1, 32), 9);
  ComponentTracker t(64, 4);
  // the first ell * k / (2 eps k) * (2 eps k - 1) edges build the 2 eps pieces
  std::size_t init = 4 * 16 * 3;
  for (std::size_t i = 0; i < init; ++i) t.unite(edges[i].first, edges[i].second);
  for (int r : t.roots()) {
    EXPECT_EQ(t.size(r), 4);
    EXPECT_GE(t.color(r), 0);
  }
}

TEST(RandomWorkload, PartitionAndDeterminism) {
  auto edges = random_workload(32, 3, 0.3, 5);
  EXPECT_EQ(edges.size(), 93u);
  EXPECT_TRUE(all_equal_to(final_component_sizes(32, 3, edges), 32));
  EXPECT_EQ(random_workload(32, 3, 0.3, 5), edges);
  auto pure = random_workload(32, 3, 0.0, 5);
  ComponentTracker t(32, 3);
  for (auto [u, v] : pure) t.unite(u, v);
  for (int r : t.roots()) EXPECT_GE(t.color(r), 0);
  EXPECT_THROW(random_workload(32, 3, 1.5, 5), ConfigError);
}

TEST(Trace, JsonLinesRoundTrip) {
  std::vector<TraceEvent> tr{{0, 1, 2, std::nullopt}, {1, 3, 4, 12345678901234ULL}};
  auto back = trace_from_jsonl(trace_to_jsonl(tr));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].u, 3);
  EXPECT_EQ(back[1].view_hash, tr[1].view_hash);
  EXPECT_FALSE(back[0].view_hash);
  EXPECT_THROW(trace_from_jsonl("{\"u\": 1}\n"), InputError);
  EXPECT_THROW(trace_from_jsonl("not json\n"), InputError);
  EXPECT_EQ(trace_from_jsonl("\n{\"u\":0,\"v\":1}\n").size(), 1u);
}

TEST(Trace, ScheduleHashSeesEveryServer) {
  std::vector<int> a{0, 0, 1, 1}, b{0, 1, 0, 1};
  EXPECT_NE(schedule_hash(a), schedule_hash(b));
  EXPECT_EQ(schedule_hash(a), schedule_hash(std::vector<int>{0, 0, 1, 1}));
}
