#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "mata/graph.hpp"
#include "mata/params.hpp"
#include "mata/tensor.hpp"

namespace mata {

struct SegcnConfig {
  std::vector<std::string> alphabet;  // node label vocabulary, one-hot order
  int hidden = 64;                    // d
  int degree_dim = 16;
  int layers = 3;                     // l
  int walk_steps = 16;                // t
  double perturb_fraction = 0.1;
  int max_degree = 32;                // degree-table cap
};

/// Return-probabilities diag(R^s), s = 1..t, with R = A D^-1. Rows of
/// isolated nodes are zero. Result is |V| x t, row-major.
inline std::vector<double> landing_probabilities(const Graph& g, int steps) {
  if (steps < 1) throw std::invalid_argument("walk steps must be >= 1");
  const int n = g.node_count();
  std::vector<double> r(static_cast<std::size_t>(n) * n, 0.0);
  for (int j = 0; j < n; ++j) {
    const int deg = g.degree(j);
    for (int i : g.neighbors(j)) r[static_cast<std::size_t>(i) * n + j] = 1.0 / deg;
  }
  std::vector<double> out(static_cast<std::size_t>(n) * steps, 0.0);
  std::vector<double> power = r;
  std::vector<double> next(power.size());
  for (int s = 0; s < steps; ++s) {
    for (int i = 0; i < n; ++i)
      out[static_cast<std::size_t>(i) * steps + s] = g.degree(i) == 0 ? 0.0 : power[static_cast<std::size_t>(i) * n + i];
    if (s + 1 == steps) break;
    std::fill(next.begin(), next.end(), 0.0);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        const double a = power[static_cast<std::size_t>(i) * n + k];
        if (a == 0.0) continue;
        for (int j = 0; j < n; ++j) next[static_cast<std::size_t>(i) * n + j] += a * r[static_cast<std::size_t>(k) * n + j];
      }
    power.swap(next);
  }
  return out;
}

/// Sum of the landing probabilities of a graph and its two perturbed copies.
inline std::vector<double> rw_encoding_from(const Graph& g, const Graph& inserted,
                                            const Graph& removed, int steps) {
  auto p = landing_probabilities(g, steps);
  const auto pin = landing_probabilities(inserted, steps);
  const auto pre = landing_probabilities(removed, steps);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] += pin[i] + pre[i];
  return p;
}

struct PerturbedViews {
  Graph inserted;
  Graph removed;
};

inline PerturbedViews perturbed_views(const Graph& g, double fraction, std::uint64_t seed) {
  return {perturb_edges(g, fraction, PerturbMode::kInsert, mix_seed(seed, 1)),
          perturb_edges(g, fraction, PerturbMode::kRemove, mix_seed(seed, 2))};
}

/// Position encoding p_hat (|V| x t): original plus INSERT and REMOVE
/// perturbations, each seeded from `seed`.
inline std::vector<double> rw_position_encoding(const Graph& g, int steps, double perturb_fraction,
                                                std::uint64_t seed) {
  const auto views = perturbed_views(g, perturb_fraction, seed);
  return rw_encoding_from(g, views.inserted, views.removed, steps);
}

/// Parameter-independent per-graph inputs, computed once per graph.
struct GraphFeatures {
  int nodes = 0;
  ad::Tensor label_onehot;   // |V| x A
  ad::Tensor position;       // p_hat, |V| x t
  ad::Tensor degree_onehot;  // |V| x (max_degree + 1)
  ad::Tensor propagation;    // D~^-1/2 (A + I) D~^-1/2, |V| x |V|
};

class Segcn {
 public:
  Segcn(SegcnConfig config, ad::ParameterStore& params, std::mt19937_64& rng)
      : config_(std::move(config)), params_(&params) {
    if (config_.layers < 1 || config_.walk_steps < 1 || config_.hidden < 1)
      throw std::invalid_argument("segcn needs layers, walk steps and width >= 1");
    for (std::size_t i = 0; i < config_.alphabet.size(); ++i)
      label_index_.emplace(config_.alphabet[i], static_cast<int>(i));
    const int d = config_.hidden;
    const int in = static_cast<int>(config_.alphabet.size()) + config_.degree_dim + config_.walk_steps;
    params.add_xavier("segcn.degree_table", config_.max_degree + 1, config_.degree_dim, rng);
    params.add_xavier("segcn.mlp.w1", in, d, rng);
    params.add_zeros("segcn.mlp.b1", 1, d);
    params.add_xavier("segcn.mlp.w2", d, d, rng);
    params.add_zeros("segcn.mlp.b2", 1, d);
    for (int m = 1; m <= config_.layers; ++m)
      params.add_xavier("segcn.gcn.w" + std::to_string(m), d, d, rng);
  }

  const SegcnConfig& config() const { return config_; }

  GraphFeatures features(const Graph& g, const std::vector<double>& position) const {
    const int n = g.node_count();
    const int a = static_cast<int>(config_.alphabet.size());
    const int t = config_.walk_steps;
    if (position.size() != static_cast<std::size_t>(n) * t)
      throw std::invalid_argument("position encoding shape mismatch");
    std::vector<double> onehot(static_cast<std::size_t>(n) * a, 0.0);
    std::vector<double> deg(static_cast<std::size_t>(n) * (config_.max_degree + 1), 0.0);
    for (int i = 0; i < n; ++i) {
      auto it = label_index_.find(g.label(i));
      if (it == label_index_.end())
        throw std::invalid_argument("label '" + g.label(i) + "' is outside the model alphabet");
      onehot[static_cast<std::size_t>(i) * a + it->second] = 1.0;
      deg[static_cast<std::size_t>(i) * (config_.max_degree + 1) + std::min(g.degree(i), config_.max_degree)] = 1.0;
    }
    std::vector<double> prop(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
      prop[static_cast<std::size_t>(i) * n + i] = 1.0 / (g.degree(i) + 1.0);
      for (int j : g.neighbors(i))
        prop[static_cast<std::size_t>(i) * n + j] = 1.0 / std::sqrt((g.degree(i) + 1.0) * (g.degree(j) + 1.0));
    }
    return {n, ad::Tensor::from_values(n, a, std::move(onehot)), ad::Tensor::from_values(n, t, position),
            ad::Tensor::from_values(n, config_.max_degree + 1, std::move(deg)),
            ad::Tensor::from_values(n, n, std::move(prop))};
  }

  /// Features with the configured perturbation, seeded per graph id.
  GraphFeatures features(const Graph& g, std::uint64_t seed) const {
    return features(g, rw_position_encoding(g, config_.walk_steps, config_.perturb_fraction,
                                            fnv1a(g.id(), seed)));
  }

  /// h0 = MLP(x | degree embedding | p_hat).
  ad::Tensor local_embeddings(const GraphFeatures& f) const {
    const auto& p = *params_;
    const auto degree = ad::matmul(f.degree_onehot, p.at("segcn.degree_table"));
    const auto x = ad::concat_cols({f.label_onehot, degree, f.position});
    const auto hidden = ad::relu(ad::add_row(ad::matmul(x, p.at("segcn.mlp.w1")), p.at("segcn.mlp.b1")));
    return ad::add_row(ad::matmul(hidden, p.at("segcn.mlp.w2")), p.at("segcn.mlp.b2"));
  }

  /// l rounds of h <- relu(P h W), P the self-looped symmetric propagation.
  ad::Tensor gcn_forward(const GraphFeatures& f, const ad::Tensor& h0) const {
    if (h0.rows() != f.nodes) throw ad::ShapeError("gcn_forward: row count differs from node count");
    ad::Tensor h = h0;
    for (int m = 1; m <= config_.layers; ++m)
      h = ad::relu(ad::matmul(f.propagation, ad::matmul(h, params_->at("segcn.gcn.w" + std::to_string(m)))));
    return h;
  }

 private:
  SegcnConfig config_;
  ad::ParameterStore* params_;
  std::unordered_map<std::string, int> label_index_;
};

}  // namespace mata
