#include <gtest/gtest.h>

#include <random>

#include "mata/bipartite.hpp"
#include "oracles.hpp"

namespace {

mata::CostMatrix random_matrix(std::mt19937_64& rng, int n, bool integer, double forbid = 0.0) {
  std::uniform_real_distribution<double> real(0.0, 10.0);
  std::uniform_int_distribution<int> small(0, 4);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  mata::CostMatrix c(n);
  for (int r = 0; r < n; ++r)
    for (int j = 0; j < n; ++j) c(r, j) = coin(rng) < forbid ? mata::kForbidden : (integer ? small(rng) : real(rng));
  return c;
}

std::vector<double> cells(const mata::CostMatrix& c) {
  std::vector<double> v;
  for (int r = 0; r < c.size(); ++r)
    for (int j = 0; j < c.size(); ++j) v.push_back(c(r, j));
  return v;
}

void expect_permutation(const mata::Assignment& a, int n) {
  ASSERT_EQ(static_cast<int>(a.row_to_col.size()), n);
  std::vector<char> seen(n, 0);
  for (int j : a.row_to_col) {
    ASSERT_GE(j, 0);
    ASSERT_LT(j, n);
    EXPECT_FALSE(seen[j]);
    seen[j] = 1;
  }
}

}  // namespace

TEST(Lsap, BothSolversMatchEnumeration) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 400; ++trial) {
    const int n = 1 + static_cast<int>(trial % 6);
    const auto c = random_matrix(rng, n, trial % 2 == 0);
    const double oracle_cost = oracle::brute_force_lsap(cells(c), n);
    for (auto method : {mata::LsapMethod::kHungarian, mata::LsapMethod::kJonkerVolgenant}) {
      const auto a = mata::solve_assignment(c, method);
      expect_permutation(a, n);
      EXPECT_NEAR(a.cost, oracle_cost, 1e-9) << "trial " << trial;
      double recomputed = 0;
      for (int r = 0; r < n; ++r) recomputed += c(r, a.row_to_col[r]);
      EXPECT_NEAR(a.cost, recomputed, 1e-12);
    }
  }
}

TEST(Lsap, ForbiddenCellsAvoided) {
  std::mt19937_64 rng(22);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(trial % 5);
    const auto c = random_matrix(rng, n, true, 0.3);
    const double oracle_cost = oracle::brute_force_lsap(cells(c), n);
    for (auto method : {mata::LsapMethod::kHungarian, mata::LsapMethod::kJonkerVolgenant}) {
      if (std::isinf(oracle_cost)) {
        EXPECT_THROW(mata::solve_assignment(c, method), std::invalid_argument);
      } else {
        EXPECT_NEAR(mata::solve_assignment(c, method).cost, oracle_cost, 1e-9);
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(Lsap, RowWithoutPermittedCellThrows) {
  mata::CostMatrix c(2, 1.0);
  c(1, 0) = c(1, 1) = mata::kForbidden;
  EXPECT_THROW(mata::hungarian(c), std::invalid_argument);
  EXPECT_THROW(mata::jonker_volgenant(c), std::invalid_argument);
}

TEST(Lsap, DegenerateInputs) {
  EXPECT_TRUE(mata::hungarian(mata::CostMatrix(0)).row_to_col.empty());
  EXPECT_TRUE(mata::jonker_volgenant(mata::CostMatrix(0)).row_to_col.empty());
  const auto tie = mata::CostMatrix(5, 3.0);
  EXPECT_DOUBLE_EQ(mata::hungarian(tie).cost, 15.0);
  EXPECT_DOUBLE_EQ(mata::jonker_volgenant(tie).cost, 15.0);
}

TEST(Lsap, SolversAgreeOnLargerMatrices) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 7 + static_cast<int>(trial % 30);
    const auto c = random_matrix(rng, n, trial % 3 == 0);
    EXPECT_NEAR(mata::hungarian(c).cost, mata::jonker_volgenant(c).cost, 1e-9) << "trial " << trial;
  }
}

TEST(CostMatrix, PaddedLayout) {
  mata::Graph a("a", {"A", "B"}, {{0, 1, ""}});
  mata::Graph b("b", {"A", "C", "C"}, {{0, 1, ""}, {0, 2, ""}});
  const auto c = mata::build_cost_matrix(mata::make_pair(a, b));
  ASSERT_EQ(c.size(), 5);
  EXPECT_DOUBLE_EQ(c(0, 0), 0.5);   // same label, degree 1 vs 2
  EXPECT_DOUBLE_EQ(c(1, 1), 1.0);   // B vs C, degree 1 vs 1
  EXPECT_DOUBLE_EQ(c(1, 2), 1.0);
  EXPECT_DOUBLE_EQ(c(0, 3), 1.5);   // deletion of node 0
  EXPECT_TRUE(std::isinf(c(0, 4)));
  EXPECT_DOUBLE_EQ(c(2, 0), 2.0);   // insertion of target 0
  EXPECT_TRUE(std::isinf(c(2, 1)));
  EXPECT_DOUBLE_EQ(c(3, 3), 0.0);
  EXPECT_DOUBLE_EQ(c(4, 4), 0.0);
}

TEST(BipartiteGed, UpperBoundsExactDistance) {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = oracle::random_pair(rng, 1, 7, 0.5, 3);
    const int exact = oracle::brute_force_ged(p);
    for (auto method : {mata::LsapMethod::kHungarian, mata::LsapMethod::kJonkerVolgenant}) {
      const auto r = mata::bipartite_ged(p, method);
      EXPECT_GE(r.distance, exact);
      EXPECT_EQ(r.distance, oracle::injection_cost(p, r.matching.assigned));
    }
  }
}

TEST(BipartiteGed, IdenticalGraphsGiveZero) {
  mata::Graph g("g", {"A", "B", "C", "D"}, {{0, 1, ""}, {1, 2, ""}, {2, 3, ""}});
  EXPECT_EQ(mata::bipartite_ged(mata::make_pair(g, g), mata::LsapMethod::kHungarian).distance, 0);
  EXPECT_EQ(mata::bipartite_ged(mata::make_pair(g, g), mata::LsapMethod::kJonkerVolgenant).distance, 0);
}
