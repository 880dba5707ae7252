#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mata/graph.hpp"
#include "mata/matching.hpp"
#include "mata/params.hpp"
#include "mata/segcn.hpp"

namespace mata {

struct ModelConfig {
  SegcnConfig segcn;
  int topk = 4;  // candidates per source node the keep mass is sized for
  SinkhornConfig sinkhorn;
  std::uint64_t seed = 0;
};

struct NodeEmbeddings {
  ad::Tensor h0;
  ad::Tensor hl;
};

struct PairForward {
  SimilarityMatrices similarity;
  PairOutput output;
};

struct Inference {
  double d_pred = 0.0;
  CandidateSet candidates;
};

/// SEGcn encoder, shared similarity weights, Sinkhorn top-k and GED head.
class Model {
 public:
  explicit Model(ModelConfig config)
      : config_(std::move(config)), params_(std::make_unique<ad::ParameterStore>()) {
    std::mt19937_64 rng(mix_seed(config_.seed, 0x5E6C));
    segcn_ = std::make_unique<Segcn>(config_.segcn, *params_, rng);
    params_->add_xavier("matching.wn", config_.segcn.hidden, config_.segcn.hidden, rng);
    head_ = std::make_unique<GedHead>(config_.segcn.hidden, *params_, rng);
  }

  const ModelConfig& config() const { return config_; }
  ad::ParameterStore& params() { return *params_; }
  const ad::ParameterStore& params() const { return *params_; }
  const Segcn& segcn() const { return *segcn_; }

  GraphFeatures features(const Graph& g) const { return segcn_->features(g, config_.seed); }

  NodeEmbeddings embed(const GraphFeatures& f) const {
    auto h0 = segcn_->local_embeddings(f);
    auto hl = segcn_->gcn_forward(f, h0);
    return {h0, hl};
  }

  /// Total keep mass handed to Sinkhorn: topk per source node, capped at
  /// the cell count.
  int keep_mass(int n1, int n2) const { return std::clamp(config_.topk * n1, 1, n1 * n2); }

  PairForward forward(const GraphFeatures& f1, const GraphFeatures& f2) const {
    const auto e1 = embed(f1);
    const auto e2 = embed(f2);
    auto sim = similarity_matrices(e1.h0, e1.hl, e2.h0, e2.hl, params_->at("matching.wn"));
    const int k = keep_mass(f1.nodes, f2.nodes);
    auto a0 = sinkhorn_topk(sim.s0, k, config_.sinkhorn);
    auto al = sinkhorn_topk(sim.sl, k, config_.sinkhorn);
    auto d = head_->predict(e1.h0, e1.hl, e2.h0, e2.hl);
    return {std::move(sim), {std::move(a0), std::move(al), std::move(d)}};
  }

  /// Frozen-parameter inference; `rounds` is clamped to |V2|.
  Inference infer(const GraphFeatures& f1, const GraphFeatures& f2, int rounds) const {
    ad::NoGradGuard no_grad;
    const auto fw = forward(f1, f2);
    const int k = std::clamp(rounds, 1, f2.nodes);
    return {fw.output.d_pred.item(), greedy_candidates(fw.output.a0, fw.output.al, k)};
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    const auto& s = config_.segcn;
    j["meta"] = {{"alphabet", s.alphabet},
                 {"hidden", s.hidden},
                 {"degree_dim", s.degree_dim},
                 {"layers", s.layers},
                 {"walk_steps", s.walk_steps},
                 {"perturb_fraction", s.perturb_fraction},
                 {"max_degree", s.max_degree},
                 {"topk", config_.topk},
                 {"epsilon", config_.sinkhorn.epsilon},
                 {"tolerance", config_.sinkhorn.tolerance},
                 {"max_iter", config_.sinkhorn.max_iter},
                 {"seed", config_.seed}};
    const auto params = ad::to_json(*params_);
    for (const auto& [name, value] : params.items()) j[name] = value;
    return j;
  }

  static Model from_json(const nlohmann::ordered_json& j) {
    const auto& m = j.at("meta");
    ModelConfig c;
    c.segcn.alphabet = m.at("alphabet").get<std::vector<std::string>>();
    c.segcn.hidden = m.at("hidden").get<int>();
    c.segcn.degree_dim = m.at("degree_dim").get<int>();
    c.segcn.layers = m.at("layers").get<int>();
    c.segcn.walk_steps = m.at("walk_steps").get<int>();
    c.segcn.perturb_fraction = m.at("perturb_fraction").get<double>();
    c.segcn.max_degree = m.at("max_degree").get<int>();
    c.topk = m.at("topk").get<int>();
    c.sinkhorn.epsilon = m.at("epsilon").get<double>();
    c.sinkhorn.tolerance = m.at("tolerance").get<double>();
    c.sinkhorn.max_iter = m.at("max_iter").get<int>();
    c.seed = m.at("seed").get<std::uint64_t>();
    Model model(std::move(c));
    ad::load_json(model.params(), j);
    return model;
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
    out << to_json().dump() << '\n';
  }

  static Model load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read checkpoint '" + path + "'");
    return from_json(nlohmann::ordered_json::parse(in));
  }

 private:
  ModelConfig config_;
  std::unique_ptr<ad::ParameterStore> params_;
  std::unique_ptr<Segcn> segcn_;
  std::unique_ptr<GedHead> head_;
};

}  // namespace mata
