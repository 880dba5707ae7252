#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "mata/dataset.hpp"
#include "oracles.hpp"

TEST(Jsonl, GraphRoundTripAndKeyOrder) {
  const mata::Graph g("g1", {"A", "B", "C"}, {{0, 1, ""}, {1, 2, "x"}});
  std::stringstream s;
  mata::write_graphs(s, {g});
  EXPECT_EQ(s.str(), "{\"id\":\"g1\",\"nodes\":[\"A\",\"B\",\"C\"],\"edges\":[[0,1,\"\"],[1,2,\"x\"]]}\n");
  const auto back = mata::read_graphs(s);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], g);
}

TEST(Jsonl, PairRoundTrip) {
  mata::PairRecord labeled{"a", "b", mata::Split::kVal, mata::PairLabel{2, 0.5, {1, 0}, mata::Producer::kExact}, false};
  mata::PairRecord bare{"a", "c", mata::Split::kTest, std::nullopt, false};
  mata::PairRecord tomb{"b", "c", mata::Split::kTrain, std::nullopt, true};
  std::stringstream s;
  mata::write_pairs(s, {labeled, bare, tomb});
  const std::string text = s.str();
  EXPECT_NE(text.find("{\"g1\":\"a\",\"g2\":\"b\",\"split\":\"val\",\"ged\":2,\"sim\":0.5,\"matching\":[1,0],\"producer\":\"EXACT\"}"),
            std::string::npos);
  EXPECT_NE(text.find("\"producer\":\"TIMEOUT\""), std::string::npos);
  const auto back = mata::read_pairs(s);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[0], labeled);
  EXPECT_EQ(back[1], bare);
  EXPECT_EQ(back[2], tomb);
}

TEST(Jsonl, ErrorsNameTheLine) {
  std::stringstream s("{\"id\":\"x\",\"nodes\":[\"A\"],\"edges\":[]}\n\nnot json\n");
  try {
    mata::read_graphs(s);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  std::stringstream bad_edge("{\"id\":\"x\",\"nodes\":[\"A\",\"B\"],\"edges\":[[0]]}\n");
  EXPECT_THROW(mata::read_graphs(bad_edge), std::invalid_argument);
  std::stringstream bad_split("{\"g1\":\"a\",\"g2\":\"b\",\"split\":\"dev\"}\n");
  EXPECT_THROW(mata::read_pairs(bad_split), std::invalid_argument);
}

TEST(Dataset, LookupAndValidation) {
  mata::Dataset d;
  d.graphs = {mata::Graph("a", {"A"}, {}), mata::Graph("b", {"A", "B"}, {})};
  d.pairs = {{"b", "a", mata::Split::kTrain, std::nullopt, false}};
  EXPECT_NO_THROW(d.validate());
  const auto p = d.pair(d.pairs[0]);
  EXPECT_TRUE(p.swapped);
  EXPECT_EQ(p.g1.id(), "a");
  d.pairs.push_back({"a", "zzz", mata::Split::kTest, std::nullopt, false});
  EXPECT_THROW(d.validate(), std::out_of_range);
  d.pairs.pop_back();
  d.graphs.push_back(mata::Graph("a", {"C"}, {}));
  EXPECT_THROW(d.validate(), std::invalid_argument);
}

TEST(Generate, RespectsSpecAndSeed) {
  mata::RandomGraphSpec spec{50, 4, 8, 0.3, 3, 99};
  const auto a = mata::generate_random_graphs(spec);
  const auto b = mata::generate_random_graphs(spec);
  ASSERT_EQ(a.size(), 50u);
  std::set<std::string> labels;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], b[i]);
    EXPECT_GE(a[i].node_count(), 4);
    EXPECT_LE(a[i].node_count(), 8);
    for (const auto& l : a[i].labels()) labels.insert(l);
  }
  EXPECT_EQ(labels, (std::set<std::string>{"A", "B", "C"}));
  EXPECT_EQ(a[7].id(), "g0007");
  spec.min_nodes = 0;
  EXPECT_THROW(mata::generate_random_graphs(spec), std::invalid_argument);
}

TEST(SamplePairs, DistinctAndSplit) {
  const auto graphs = mata::generate_random_graphs({30, 3, 5, 0.5, 2, 1});
  for (int count : {100, 435}) {
    const auto pairs = mata::sample_pairs(graphs, count, 5);
    ASSERT_EQ(static_cast<int>(pairs.size()), count);
    std::set<std::pair<std::string, std::string>> seen;
    int train = 0, val = 0, test = 0;
    for (const auto& p : pairs) {
      EXPECT_NE(p.g1, p.g2);
      EXPECT_TRUE(seen.insert({std::min(p.g1, p.g2), std::max(p.g1, p.g2)}).second);
      (p.split == mata::Split::kTrain ? train : p.split == mata::Split::kVal ? val : test)++;
    }
    EXPECT_EQ(train, static_cast<int>(std::llround(0.6 * count)));
    EXPECT_EQ(val, static_cast<int>(std::llround(0.2 * count)));
    EXPECT_EQ(train + val + test, count);
  }
  EXPECT_THROW(mata::sample_pairs(graphs, 436, 5), std::invalid_argument);
}

TEST(GroundTruth, ExactLabelsMatchOracle) {
  mata::Dataset d;
  d.graphs = mata::generate_random_graphs({12, 2, 6, 0.5, 3, 4});
  d.pairs = mata::sample_pairs(d.graphs, 30, 2);
  mata::GroundTruthConfig cfg;
  cfg.threads = 2;
  const auto labeled = mata::build_ground_truth(d, cfg);
  for (const auto& r : labeled) {
    ASSERT_TRUE(r.label);
    EXPECT_EQ(r.label->producer, mata::Producer::kExact);
    const auto p = d.pair(r);
    EXPECT_EQ(r.label->ged, oracle::brute_force_ged(p));
    EXPECT_EQ(oracle::injection_cost(p, r.label->matching), r.label->ged);
    EXPECT_DOUBLE_EQ(r.label->similarity, mata::normalized_similarity(r.label->ged, p.g1.node_count(), p.g2.node_count()));
  }
}

TEST(GroundTruth, BestOfMethodsNeverIncreases) {
  mata::Dataset d;
  d.graphs = mata::generate_random_graphs({10, 6, 9, 0.4, 2, 8});
  d.pairs = mata::sample_pairs(d.graphs, 20, 3);
  mata::GroundTruthConfig cfg;
  cfg.exact_budget_nodes = 5;
  cfg.beam_width = 1;
  const auto first = mata::build_ground_truth(d, cfg);
  for (const auto& r : first) {
    ASSERT_TRUE(r.label);
    EXPECT_EQ(r.label->producer, mata::Producer::kBestOfMethods);
    const auto p = d.pair(r);
    EXPECT_GE(r.label->ged, mata::exact_ged(p).distance);
    EXPECT_LE(r.label->ged, mata::bipartite_ged(p, mata::LsapMethod::kHungarian).distance);
  }
  // an extra method returning the exact answer only lowers labels
  d.pairs = first;
  cfg.extra = [](const mata::PairRecord&, const mata::GraphPair& p) -> std::optional<mata::GedResult> {
    return mata::exact_ged(p);
  };
  const auto second = mata::build_ground_truth(d, cfg);
  for (std::size_t i = 0; i < second.size(); ++i) {
    EXPECT_LE(second[i].label->ged, first[i].label->ged);
    EXPECT_EQ(second[i].label->ged, mata::exact_ged(d.pair(second[i])).distance);
  }
  // a worse method cannot raise an existing label
  d.pairs = second;
  cfg.extra = {};
  cfg.beam_width = 1;
  const auto third = mata::build_ground_truth(d, cfg);
  for (std::size_t i = 0; i < third.size(); ++i) EXPECT_EQ(third[i].label->ged, second[i].label->ged);
}

TEST(GroundTruth, TimeoutBecomesTombstone) {
  std::mt19937_64 rng(9);
  mata::Dataset d;
  d.graphs = {oracle::random_graph(rng, 16, 0.5, 1, "x"), oracle::random_graph(rng, 16, 0.15, 1, "y")};
  d.pairs = {{"x", "y", mata::Split::kTest, std::nullopt, false}};
  mata::GroundTruthConfig cfg;
  cfg.exact_budget_nodes = 20;
  cfg.timeout = std::chrono::milliseconds(0);
  const auto out = mata::build_ground_truth(d, cfg);
  if (!out[0].label) EXPECT_TRUE(out[0].tombstone);
}
