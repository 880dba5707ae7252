#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "mata/refine.hpp"
#include "oracles.hpp"

namespace {

mata::CandidateSet random_candidates(std::mt19937_64& rng, int n1, int n2, int k) {
  mata::CandidateSet c{n1, n2, std::vector<std::vector<int>>(n1)};
  for (auto& row : c.rows) {
    std::vector<int> t(n2);
    std::iota(t.begin(), t.end(), 0);
    std::shuffle(t.begin(), t.end(), rng);
    row.assign(t.begin(), t.begin() + k);
  }
  return c;
}

}  // namespace

TEST(MataStar, FullWidthIsExact) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = oracle::random_pair(rng, 1, 7);
    const int n2 = p.g2.node_count();
    const auto c = random_candidates(rng, p.g1.node_count(), n2, n2);
    EXPECT_EQ(mata::mata_star(p, c).distance, oracle::brute_force_ged(p)) << "trial " << trial;
  }
}

TEST(MataStar, WitnessCandidatesAreExact) {
  std::mt19937_64 rng(62);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = oracle::random_pair(rng, 2, 7);
    const auto exact = mata::exact_ged(p);
    mata::CandidateSet c{p.g1.node_count(), p.g2.node_count(), {}};
    for (int t : exact.matching.assigned) c.rows.push_back({t});
    EXPECT_EQ(mata::mata_star(p, c).distance, exact.distance);
  }
}

TEST(MataStar, RandomCandidatesUpperBoundExact) {
  std::mt19937_64 rng(63);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = oracle::random_pair(rng, 2, 7);
    const int k = 1 + static_cast<int>(rng() % 3);
    const auto c = random_candidates(rng, p.g1.node_count(), p.g2.node_count(), std::min(k, p.g2.node_count()));
    const auto r = mata::mata_star(p, c);
    EXPECT_GE(r.distance, oracle::brute_force_ged(p));
    EXPECT_EQ(oracle::injection_cost(p, r.matching.assigned), r.distance);
  }
}

TEST(MataStar, ExhaustedLevelFallsBack) {
  // both sources list only target 0; the second must still be placed
  mata::Graph a("a", {"A", "A"}, {});
  mata::Graph b("b", {"A", "B", "C"}, {});
  const auto p = mata::make_pair(a, b);
  mata::CandidateSet c{2, 3, {{0}, {0}}};
  const auto r = mata::mata_star(p, c);
  EXPECT_EQ(r.matching.assigned[0], 0);
  EXPECT_EQ(r.matching.assigned[1], 1);
  EXPECT_EQ(r.distance, 2);
}

TEST(KSweep, NonIncreasingAndEndsExact) {
  std::mt19937_64 rng(64);
  for (int trial = 0; trial < 60; ++trial) {
    const auto p = oracle::random_pair(rng, 2, 7);
    const int n2 = p.g2.node_count();
    const auto c = random_candidates(rng, p.g1.node_count(), n2, n2);
    std::vector<int> ks(n2);
    std::iota(ks.begin(), ks.end(), 1);
    const auto sweep = mata::k_sweep(p, c, ks);
    for (std::size_t i = 1; i < sweep.size(); ++i) EXPECT_LE(sweep[i].distance, sweep[i - 1].distance);
    EXPECT_EQ(sweep.back().distance, oracle::brute_force_ged(p));
  }
}

TEST(MataStar, RejectsMalformedCandidates) {
  mata::Graph a("a", {"A", "A"}, {});
  mata::Graph b("b", {"A", "B", "C"}, {});
  const auto p = mata::make_pair(a, b);
  EXPECT_THROW(mata::mata_star(p, {2, 3, {{0}}}), std::invalid_argument);
  EXPECT_THROW(mata::mata_star(p, {2, 3, {{0}, {}}}), std::invalid_argument);
  EXPECT_THROW(mata::mata_star(p, {2, 3, {{0, 0}, {1, 2}}}), std::invalid_argument);
  EXPECT_THROW(mata::mata_star(p, {2, 3, {{0}, {7}}}), std::invalid_argument);
}
