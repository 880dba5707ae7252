#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mata/dataset.hpp"
#include "mata/model.hpp"

namespace mata {

struct TrainConfig {
  ModelConfig model;  // empty alphabet: collected from the dataset
  int batch_size = 128;
  int epochs = 200;
  int validation_interval = 1;  // epochs between validation passes
  ad::AdamConfig adam;
  std::uint64_t shuffle_seed = 0;
};

struct EpochLog {
  int epoch = 0;
  double ln = 0.0;
  double lg = 0.0;
  double val = 0.0;  // combined validation loss, NaN when not evaluated
};

inline nlohmann::ordered_json to_json(const EpochLog& e) {
  nlohmann::ordered_json j;
  j["epoch"] = e.epoch;
  j["ln"] = e.ln;
  j["lg"] = e.lg;
  if (std::isnan(e.val))
    j["val"] = nullptr;
  else
    j["val"] = e.val;
  return j;
}

struct TrainResult {
  Model model;  // parameters of the best validation epoch
  std::vector<EpochLog> log;
  double best_val = std::numeric_limits<double>::quiet_NaN();
  int best_epoch = 0;
};

/// Sorted distinct node labels over all graphs.
inline std::vector<std::string> collect_alphabet(const std::vector<Graph>& graphs) {
  std::set<std::string> s;
  for (const auto& g : graphs)
    for (const auto& l : g.labels()) s.insert(l);
  return {s.begin(), s.end()};
}

namespace detail {

struct Example {
  const GraphFeatures* f1;
  const GraphFeatures* f2;
  PairTarget target;
};

inline std::vector<Example> examples_for(const Dataset& data, Split split,
                                         const std::map<std::string, GraphFeatures>& features) {
  std::vector<Example> out;
  for (const auto* rec : data.split(split)) {
    if (!rec->label) continue;
    const auto pair = data.pair(*rec);
    const auto& s = pair.swapped ? rec->g2 : rec->g1;
    const auto& t = pair.swapped ? rec->g1 : rec->g2;
    out.push_back({&features.at(s), &features.at(t), {rec->label->matching, rec->label->similarity}});
  }
  return out;
}

inline JointLoss batch_loss(const Model& model, const std::vector<Example>& examples,
                            std::span<const std::size_t> idx) {
  std::vector<PairOutput> outputs;
  std::vector<PairTarget> targets;
  outputs.reserve(idx.size());
  for (std::size_t i : idx) {
    outputs.push_back(model.forward(*examples[i].f1, *examples[i].f2).output);
    targets.push_back(examples[i].target);
  }
  return joint_loss(outputs, targets);
}

}  // namespace detail

/// Rejects training pairs without an EXACT label and witness matching.
inline void check_training_labels(const Dataset& data) {
  for (const auto* rec : data.split(Split::kTrain)) {
    if (!rec->label)
      throw std::invalid_argument("training pair " + rec->g1 + "/" + rec->g2 + " has no label");
    if (rec->label->producer != Producer::kExact)
      throw std::invalid_argument("training pair " + rec->g1 + "/" + rec->g2 + " is not EXACT-labeled");
    const auto pair = data.pair(*rec);
    if (static_cast<int>(rec->label->matching.size()) != pair.g1.node_count())
      throw std::invalid_argument("training pair " + rec->g1 + "/" + rec->g2 + " has no witness matching");
    detail::check_complete_injection(pair, rec->label->matching);
  }
}

/// Mini-batch Adam on L = L_g + L_n. Validation pairs only select the
/// returned parameters. `on_epoch` sees each log entry as it is produced.
inline TrainResult train(const Dataset& data, TrainConfig cfg,
                         const std::function<void(const EpochLog&)>& on_epoch = {}) {
  if (cfg.batch_size < 1 || cfg.epochs < 0 || cfg.validation_interval < 1)
    throw std::invalid_argument("train: batch size and validation interval must be positive, epochs >= 0");
  check_training_labels(data);
  if (cfg.model.segcn.alphabet.empty()) cfg.model.segcn.alphabet = collect_alphabet(data.graphs);
  TrainResult result{Model(cfg.model), {}, std::numeric_limits<double>::quiet_NaN(), 0};
  Model& model = result.model;

  std::map<std::string, GraphFeatures> features;
  for (const auto& g : data.graphs) features.emplace(g.id(), model.features(g));
  const auto train_set = detail::examples_for(data, Split::kTrain, features);
  const auto val_set = detail::examples_for(data, Split::kVal, features);
  if (cfg.epochs > 0 && train_set.empty()) throw std::invalid_argument("train: no training pairs");

  auto validation_loss = [&]() {
    ad::NoGradGuard no_grad;
    const auto& set = val_set.empty() ? train_set : val_set;
    std::vector<std::size_t> all(set.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return detail::batch_loss(model, set, all).total.item();
  };

  std::mt19937_64 rng(cfg.shuffle_seed);
  ad::AdamState adam;
  ad::ParameterStore::Snapshot best = model.params().snapshot();
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double ln = 0.0, lg = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      model.params().zero_grad();
      const auto loss = detail::batch_loss(model, train_set, idx);
      ad::backward(loss.total);
      ad::adam_step(model.params(), adam, cfg.adam);
      const double w = static_cast<double>(idx.size());
      ln += loss.ln.item() * w;
      lg += loss.lg.item() * w;
    }
    EpochLog entry{epoch, ln / static_cast<double>(order.size()), lg / static_cast<double>(order.size()),
                   std::numeric_limits<double>::quiet_NaN()};
    if (epoch % cfg.validation_interval == 0 || epoch == cfg.epochs) {
      entry.val = validation_loss();
      if (std::isnan(result.best_val) || entry.val < result.best_val) {
        result.best_val = entry.val;
        result.best_epoch = epoch;
        best = model.params().snapshot();
      }
    }
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
  }
  model.params().restore(best);
  model.params().zero_grad();
  return result;
}

struct Prediction {
  std::string g1;
  std::string g2;
  int k = 0;
  CandidateSet candidates;  // oriented source = smaller graph
  double d_pred = 0.0;      // predicted normalized similarity
};

inline nlohmann::ordered_json to_json(const Prediction& p) {
  nlohmann::ordered_json j;
  j["g1"] = p.g1;
  j["g2"] = p.g2;
  j["k"] = p.k;
  j["candidates"] = p.candidates.rows;
  j["d_pred"] = p.d_pred;
  return j;
}

inline Prediction prediction_from_json(const nlohmann::ordered_json& j) {
  Prediction p;
  p.g1 = j.at("g1").get<std::string>();
  p.g2 = j.at("g2").get<std::string>();
  p.candidates.rows = j.at("candidates").get<std::vector<std::vector<int>>>();
  p.k = j.value("k", p.candidates.k());
  p.d_pred = j.value("d_pred", 0.0);
  p.candidates.sources = static_cast<int>(p.candidates.rows.size());
  return p;
}

/// Frozen-model inference over one split. `k` is clamped per pair to |V2|;
/// `clamped` counts the pairs where that happened.
inline std::vector<Prediction> evaluate_model(const Model& model, const Dataset& data, Split split, int k,
                                              int* clamped = nullptr) {
  std::vector<Prediction> out;
  std::map<std::string, GraphFeatures> cache;
  auto feats = [&](const Graph& g) -> const GraphFeatures& {
    auto it = cache.find(g.id());
    if (it == cache.end()) it = cache.emplace(g.id(), model.features(g)).first;
    return it->second;
  };
  if (clamped) *clamped = 0;
  for (const auto* rec : data.split(split)) {
    const auto pair = data.pair(*rec);
    const int rounds = std::min(k, pair.g2.node_count());
    if (rounds < k && clamped) ++*clamped;
    auto inf = model.infer(feats(pair.g1), feats(pair.g2), rounds);
    out.push_back({rec->g1, rec->g2, rounds, std::move(inf.candidates), inf.d_pred});
  }
  return out;
}

}  // namespace mata
