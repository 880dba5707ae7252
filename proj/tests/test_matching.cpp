#include <gtest/gtest.h>

#include <random>
#include <set>

#include "mata/matching.hpp"
#include "mata/model.hpp"
#include "oracles.hpp"

namespace ad = mata::ad;

namespace {

std::vector<double> random_scores(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

mata::SinkhornConfig converging() {
  mata::SinkhornConfig c;
  c.max_iter = 1000000;
  return c;
}

}  // namespace

TEST(Sinkhorn, TwoCellExample) {
  const auto t = mata::sinkhorn_trace(std::vector<double>{0.9, 0.1}, 1, converging(), false);
  EXPECT_TRUE(t.converged);
  EXPECT_NEAR(t.keep[0], 1.0, 1e-4);
  EXPECT_NEAR(t.keep[1], 0.0, 1e-4);
}

TEST(Sinkhorn, MarginalsAndMass) {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 30);
    const int k = 1 + static_cast<int>(rng() % (n - 1));
    const auto d = random_scores(rng, n);
    const auto t = mata::sinkhorn_trace(d, k, converging(), false);
    ASSERT_TRUE(t.converged);
    double keep = 0, discard = 0;
    for (int i = 0; i < n; ++i) {
      EXPECT_NEAR(t.keep[i] + t.discard[i], 1.0, 1e-6);
      EXPECT_GE(t.keep[i], 0.0);
      EXPECT_LE(t.keep[i], 1.0 + 1e-6);
      keep += t.keep[i];
      discard += t.discard[i];
    }
    EXPECT_NEAR(keep, k, 1e-6);
    EXPECT_NEAR(discard, n - k, 1e-6);
  }
}

TEST(Sinkhorn, ShiftInvariantAndMonotone) {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 50; ++trial) {
    const auto d = random_scores(rng, 12);
    auto shifted = d;
    for (auto& x : shifted) x += 3.25;
    const auto a = mata::sinkhorn_trace(d, 4, converging(), false);
    const auto b = mata::sinkhorn_trace(shifted, 4, converging(), false);
    for (int i = 0; i < 12; ++i) EXPECT_NEAR(a.keep[i], b.keep[i], 1e-8);
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 12; ++j)
        if (d[i] > d[j]) EXPECT_GE(a.keep[i], a.keep[j] - 1e-12);
  }
}

TEST(Sinkhorn, DegenerateCases) {
  const auto all = mata::sinkhorn_trace(std::vector<double>{0.3, 0.1, 0.2}, 3, {});
  EXPECT_EQ(all.keep, (std::vector<double>{1.0, 1.0, 1.0}));
  const auto flat = mata::sinkhorn_trace(std::vector<double>{0.5, 0.5, 0.5, 0.5}, 1, {});
  for (double x : flat.keep) EXPECT_DOUBLE_EQ(x, 0.25);
  EXPECT_THROW(mata::sinkhorn_trace(std::vector<double>{0.1, 0.2}, 0, {}), std::invalid_argument);
  EXPECT_THROW(mata::sinkhorn_trace(std::vector<double>{0.1, 0.2}, 3, {}), std::invalid_argument);
  EXPECT_THROW(mata::sinkhorn_trace(std::vector<double>{}, 1, {}), std::invalid_argument);
  mata::SinkhornConfig bad;
  bad.epsilon = 0;
  EXPECT_THROW(mata::sinkhorn_trace(std::vector<double>{0.1, 0.2}, 1, bad), std::invalid_argument);
}

TEST(Sinkhorn, SmallerEpsilonIsSharper) {
  const std::vector<double> d{0.8, 0.6, 0.4, 0.2};
  mata::SinkhornConfig soft = converging(), sharp = converging();
  soft.epsilon = 0.5;
  sharp.epsilon = 0.02;
  const auto a = mata::sinkhorn_trace(d, 2, soft, false);
  const auto b = mata::sinkhorn_trace(d, 2, sharp, false);
  EXPECT_GT(b.keep[1], a.keep[1]);
  EXPECT_LT(b.keep[2], a.keep[2]);
}

TEST(Sinkhorn, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s0 = random_scores(rng, 12);
    auto s = ad::Tensor::parameter(3, 4, s0);
    std::vector<double> w(12);
    for (auto& x : w) x = std::uniform_real_distribution<double>(-1, 1)(rng);
    const auto weights = ad::Tensor::from_values(3, 4, w);
    mata::SinkhornConfig cfg;
    cfg.epsilon = 0.2;
    cfg.max_iter = trial % 2 ? 10 : 200;
    auto f = [&] { return ad::reduce_sum(ad::mul(mata::sinkhorn_topk(s, 1 + trial % 11, cfg), weights)); };
    const auto report = ad::gradient_check(f, {{"s", s}}, 1e-6, 1e-6);
    EXPECT_TRUE(report.passed) << "trial " << trial << " err " << report.max_relative_error;
  }
}

TEST(Greedy, RoundsAreInjectiveAndDisjoint) {
  std::mt19937_64 rng(54);
  for (int trial = 0; trial < 200; ++trial) {
    const int n1 = 1 + static_cast<int>(rng() % 7);
    const int n2 = n1 + static_cast<int>(rng() % 4);
    const int k = 1 + static_cast<int>(rng() % n2);
    const auto scores = random_scores(rng, n1 * n2);
    const auto c = mata::greedy_candidates(scores, n1, n2, k);
    ASSERT_EQ(c.k(), k);
    // an injective round always exists for square inputs or after at most n2 - n1 rounds
    for (int r = 0; r < k; ++r) {
      if (n1 != n2 && r > n2 - n1) break;
      std::set<int> cols;
      for (int i = 0; i < n1; ++i) cols.insert(c.rows[i][r]);
      EXPECT_EQ(static_cast<int>(cols.size()), n1) << "round " << r << " not injective";
    }
    for (int i = 0; i < n1; ++i) {
      std::set<int> row(c.rows[i].begin(), c.rows[i].end());
      EXPECT_EQ(static_cast<int>(row.size()), k);
    }
    const auto pre = c.prefix(1);
    for (int i = 0; i < n1; ++i) EXPECT_EQ(pre.rows[i][0], c.rows[i][0]);
  }
}

TEST(Greedy, FirstRoundFollowsScores) {
  // diagonal dominates
  const std::vector<double> s{0.9, 0.2, 0.1, 0.3, 0.8, 0.2, 0.1, 0.4, 0.7};
  const auto c = mata::greedy_candidates(s, 3, 3, 2);
  EXPECT_EQ(c.rows[0][0], 0);
  EXPECT_EQ(c.rows[1][0], 1);
  EXPECT_EQ(c.rows[2][0], 2);
  EXPECT_EQ(c.rows[2][1], 1);
  EXPECT_THROW(mata::greedy_candidates(s, 3, 3, 4), std::invalid_argument);
  EXPECT_THROW(mata::greedy_candidates(s, 3, 3, 0), std::invalid_argument);
}

TEST(Greedy, AugmentsWhenGreedyStalls) {
  // round 2 greedily takes (0,1) and (1,0), leaving row 2 without a column
  const std::vector<double> s{0.9, 0.8, 0.1, 0.7, 0.9, 0.1, 0.2, 0.3, 0.9};
  const auto c = mata::greedy_candidates(s, 3, 3, 2);
  EXPECT_EQ(c.rows[0], (std::vector<int>{0, 2}));
  EXPECT_EQ(c.rows[1], (std::vector<int>{1, 0}));
  EXPECT_EQ(c.rows[2], (std::vector<int>{2, 1}));
}

TEST(JointLoss, HandComputedValue) {
  auto a0 = ad::Tensor::from_values(2, 2, {0.5, 0.1, 0.2, 0.25});
  auto al = ad::Tensor::from_values(2, 2, {0.8, 0.1, 0.2, 0.0});
  auto d = ad::Tensor::from_values(1, 1, {0.6});
  const auto loss = mata::joint_loss({{a0, al, d}}, {{{0, 1}, 0.4}});
  const double ln = -(std::log(0.5) + std::log(0.25) + std::log(0.8) + std::log(1e-12));
  EXPECT_NEAR(loss.ln.item(), ln, 1e-9);
  EXPECT_NEAR(loss.lg.item(), 0.04, 1e-12);
  EXPECT_DOUBLE_EQ(loss.total.item(), loss.ln.item() + loss.lg.item());
  EXPECT_THROW(mata::joint_loss({{a0, al, d}}, {{{0}, 0.4}}), std::invalid_argument);
  EXPECT_THROW(mata::joint_loss({}, {}), std::invalid_argument);
}

TEST(GedHead, OutputInUnitInterval) {
  std::mt19937_64 rng(55);
  ad::ParameterStore params;
  mata::GedHead head(4, params, rng);
  std::vector<double> v(12);
  for (auto& x : v) x = std::uniform_real_distribution<double>(-3, 3)(rng);
  const auto h1 = ad::Tensor::from_values(3, 4, v);
  const auto h2 = ad::Tensor::from_values(2, 4, std::vector<double>(v.begin(), v.begin() + 8));
  const double y = head.predict(h1, h1, h2, h2).item();
  EXPECT_GT(y, 0.0);
  EXPECT_LT(y, 1.0);
}

TEST(Model, JointLossGradientsThroughWholePipeline) {
  std::mt19937_64 rng(56);
  mata::ModelConfig cfg;
  cfg.segcn.alphabet = {"A", "B", "C"};
  cfg.segcn.hidden = 4;
  cfg.segcn.degree_dim = 2;
  cfg.segcn.layers = 2;
  cfg.segcn.walk_steps = 3;
  cfg.segcn.max_degree = 6;
  cfg.topk = 2;
  cfg.sinkhorn.epsilon = 0.5;
  cfg.sinkhorn.max_iter = 10;
  mata::Model model(cfg);
  const auto p = oracle::random_pair(rng, 3, 4, 0.5, 3);
  const auto f1 = model.features(p.g1);
  const auto f2 = model.features(p.g2);
  std::vector<int> witness(p.g1.node_count());
  std::iota(witness.begin(), witness.end(), 0);
  auto loss = [&] {
    const auto out = model.forward(f1, f2).output;
    return mata::joint_loss({out}, {{witness, 0.5}}).total;
  };
  const auto report = ad::gradient_check(loss, model.params().all(), 1e-5, 1e-4);
  EXPECT_TRUE(report.passed) << report.worst_parameter << " " << report.max_relative_error;
}

TEST(Model, CheckpointRoundTripPreservesInference) {
  mata::ModelConfig cfg;
  cfg.segcn.alphabet = {"A", "B"};
  cfg.segcn.hidden = 8;
  cfg.seed = 9;
  mata::Model a(cfg);
  const auto b = mata::Model::from_json(nlohmann::ordered_json::parse(a.to_json().dump()));
  EXPECT_EQ(a.params().snapshot(), b.params().snapshot());
  std::mt19937_64 rng(57);
  const auto p = oracle::random_pair(rng, 3, 6, 0.5, 2);
  const auto ia = a.infer(a.features(p.g1), a.features(p.g2), 3);
  const auto ib = b.infer(b.features(p.g1), b.features(p.g2), 3);
  EXPECT_EQ(ia.d_pred, ib.d_pred);
  EXPECT_EQ(ia.candidates.rows, ib.candidates.rows);
}
