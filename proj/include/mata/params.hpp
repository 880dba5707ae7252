#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mata/tensor.hpp"

namespace mata::ad {

/// Named trainable tensors, iterated in name order.
class ParameterStore {
 public:
  Tensor& add(const std::string& name, Tensor t) {
    auto [it, inserted] = params_.emplace(name, std::move(t));
    if (!inserted) throw std::invalid_argument("duplicate parameter '" + name + "'");
    return it->second;
  }

  /// Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
  Tensor& add_xavier(const std::string& name, int rows, int cols, std::mt19937_64& rng) {
    const double a = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> dist(-a, a);
    std::vector<double> v(static_cast<std::size_t>(rows) * cols);
    for (auto& x : v) x = dist(rng);
    return add(name, Tensor::parameter(rows, cols, std::move(v)));
  }

  Tensor& add_zeros(const std::string& name, int rows, int cols) {
    return add(name, Tensor::parameter(rows, cols, std::vector<double>(static_cast<std::size_t>(rows) * cols, 0.0)));
  }

  const Tensor& at(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw std::out_of_range("no parameter '" + name + "'");
    return it->second;
  }
  Tensor& at(const std::string& name) { return const_cast<Tensor&>(std::as_const(*this).at(name)); }

  std::map<std::string, Tensor>& all() { return params_; }
  const std::map<std::string, Tensor>& all() const { return params_; }

  void zero_grad() {
    for (auto& [_, t] : params_) t.zero_grad();
  }

  using Snapshot = std::map<std::string, std::vector<double>>;

  Snapshot snapshot() const {
    Snapshot s;
    for (const auto& [name, t] : params_) s[name].assign(t.values().begin(), t.values().end());
    return s;
  }

  void restore(const Snapshot& s) {
    for (auto& [name, t] : params_) {
      auto it = s.find(name);
      if (it == s.end() || it->second.size() != t.size())
        throw std::invalid_argument("snapshot does not match parameter '" + name + "'");
      std::copy(it->second.begin(), it->second.end(), t.mutable_values().begin());
    }
  }

 private:
  std::map<std::string, Tensor> params_;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 5e-4;  // decoupled
};

struct AdamState {
  std::map<std::string, std::vector<double>> m;
  std::map<std::string, std::vector<double>> v;
  long long step = 0;
};

/// One Adam update with decoupled weight decay, reading each parameter's
/// accumulated grad.
inline void adam_step(ParameterStore& params, AdamState& state, const AdamConfig& cfg) {
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (auto& [name, t] : params.all()) {
    auto& m = state.m[name];
    auto& v = state.v[name];
    if (m.empty()) {
      m.assign(t.size(), 0.0);
      v.assign(t.size(), 0.0);
    }
    const auto g = t.grad();
    auto w = t.mutable_values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] -= cfg.lr * (mhat / (std::sqrt(vhat) + cfg.eps) + cfg.weight_decay * w[i]);
    }
  }
}

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  bool passed = true;
};

/// Compares backward() gradients of a scalar expression with central
/// differences. Relative error is |a - n| / max(|a|, |n|, 1).
inline GradCheckReport gradient_check(const std::function<Tensor()>& f,
                                      std::map<std::string, Tensor> params, double step,
                                      double tolerance) {
  for (auto& [_, p] : params) p.zero_grad();
  const Tensor out = f();
  if (out.size() != 1) throw ShapeError("gradient_check: expression is not scalar");
  backward(out);
  GradCheckReport report;
  for (auto& [name, p] : params) {
    const auto analytic = p.grad();
    auto w = p.mutable_values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double keep = w[i];
      double plus, minus;
      {
        NoGradGuard ng;
        w[i] = keep + step;
        plus = f().item();
        w[i] = keep - step;
        minus = f().item();
      }
      w[i] = keep;
      const double numeric = (plus - minus) / (2.0 * step);
      const double err = std::abs(analytic[i] - numeric) /
                         std::max({std::abs(analytic[i]), std::abs(numeric), 1.0});
      if (err > report.max_relative_error) {
        report.max_relative_error = err;
        report.worst_parameter = name;
        report.worst_index = i;
      }
    }
  }
  report.passed = report.max_relative_error <= tolerance;
  return report;
}

// Checkpoint: {"<name>": {"shape": [r, c], "values": [...]}, ...} plus an
// optional "meta" object. Doubles are written in shortest round-trip form.
inline nlohmann::ordered_json to_json(const ParameterStore& params) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, t] : params.all()) {
    nlohmann::ordered_json entry;
    entry["shape"] = {t.rows(), t.cols()};
    entry["values"] = std::vector<double>(t.values().begin(), t.values().end());
    j[name] = std::move(entry);
  }
  return j;
}

/// Loads values into an already-shaped store; every parameter must be present.
inline void load_json(ParameterStore& params, const nlohmann::ordered_json& j) {
  for (auto& [name, t] : params.all()) {
    if (!j.contains(name)) throw std::invalid_argument("checkpoint is missing '" + name + "'");
    const auto& e = j.at(name);
    const auto shape = e.at("shape").get<std::vector<int>>();
    if (shape.size() != 2 || shape[0] != t.rows() || shape[1] != t.cols())
      throw std::invalid_argument("checkpoint shape mismatch for '" + name + "'");
    const auto values = e.at("values").get<std::vector<double>>();
    if (values.size() != t.size()) throw std::invalid_argument("checkpoint size mismatch for '" + name + "'");
    std::copy(values.begin(), values.end(), t.mutable_values().begin());
  }
}

}  // namespace mata::ad
