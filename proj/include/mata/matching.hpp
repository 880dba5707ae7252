#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mata/params.hpp"
#include "mata/tensor.hpp"

namespace mata {

struct SimilarityMatrices {
  ad::Tensor s0;  // local view, |V1| x |V2|
  ad::Tensor sl;  // high-order view
};

/// s = sigmoid(h1 * wn * h2^T) for both views with one shared wn.
inline SimilarityMatrices similarity_matrices(const ad::Tensor& h0_1, const ad::Tensor& hl_1,
                                              const ad::Tensor& h0_2, const ad::Tensor& hl_2,
                                              const ad::Tensor& wn) {
  const int d = wn.rows();
  if (wn.cols() != d || h0_1.cols() != d || hl_1.cols() != d || h0_2.cols() != d || hl_2.cols() != d)
    throw ad::ShapeError("similarity_matrices: embedding width does not match wn");
  auto view = [&](const ad::Tensor& a, const ad::Tensor& b) {
    return ad::sigmoid(ad::matmul(ad::matmul(a, wn), ad::transpose(b)));
  };
  return {view(h0_1, h0_2), view(hl_1, hl_2)};
}

struct SinkhornConfig {
  double epsilon = 0.05;
  double tolerance = 1e-6;  // max row-marginal violation
  int max_iter = 100;
};

/// Forward record of the two-column transport used for top-k selection. The
/// plan is exp(z_c[n] + a[n] + b[c]) with z = -D / epsilon.
struct SinkhornTrace {
  int cells = 0;
  int k = 0;
  double epsilon = 0.0;
  bool constant = false;
  bool saturated = false;  // k == cells: every cell kept
  int argmin = 0;
  int argmax = 0;
  std::vector<double> z0, z1;
  std::vector<std::vector<double>> a;  // row potentials per iteration
  std::vector<std::array<double, 2>> b;  // column potentials per iteration
  std::vector<double> discard, keep;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

inline double log_add(double x, double y) {
  const double m = std::max(x, y);
  return m + std::log(std::exp(x - m) + std::exp(y - m));
}

}  // namespace detail

/// Sinkhorn top-k over a flattened score vector: each cell sends unit mass
/// to "discard" (capacity N - k) or "keep" (capacity k), alternating row and
/// column normalization in the log domain. With `record` off the per-iteration
/// potentials are not kept and the trace cannot be differentiated.
inline SinkhornTrace sinkhorn_trace(std::span<const double> d, int k, const SinkhornConfig& cfg, bool record = true) {
  const int n = static_cast<int>(d.size());
  if (n == 0) throw std::invalid_argument("sinkhorn_topk: empty score matrix");
  if (k < 1 || k > n)
    throw std::invalid_argument("sinkhorn_topk: k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  if (!(cfg.epsilon > 0)) throw std::invalid_argument("sinkhorn_topk: epsilon must be positive");
  SinkhornTrace t;
  t.cells = n;
  t.k = k;
  t.epsilon = cfg.epsilon;
  t.argmin = static_cast<int>(std::min_element(d.begin(), d.end()) - d.begin());
  t.argmax = static_cast<int>(std::max_element(d.begin(), d.end()) - d.begin());
  const double dmin = d[t.argmin];
  const double dmax = d[t.argmax];
  if (k == n) {
    t.saturated = true;
    t.discard.assign(n, 0.0);
    t.keep.assign(n, 1.0);
    t.converged = true;
    return t;
  }
  if (dmax == dmin) {
    t.constant = true;
    t.keep.assign(n, static_cast<double>(k) / n);
    t.discard.assign(n, 1.0 - static_cast<double>(k) / n);
    t.converged = true;
    return t;
  }
  t.z0.resize(n);
  t.z1.resize(n);
  for (int i = 0; i < n; ++i) {
    t.z0[i] = -(d[i] - dmin) / cfg.epsilon;
    t.z1[i] = -(dmax - d[i]) / cfg.epsilon;
  }
  const std::array<double, 2> log_capacity{std::log(static_cast<double>(n - k)), std::log(static_cast<double>(k))};
  std::array<double, 2> b{0.0, 0.0};
  std::vector<double> a(n);
  for (int it = 0; it < std::max(1, cfg.max_iter); ++it) {
    for (int i = 0; i < n; ++i) a[i] = -detail::log_add(t.z0[i] + b[0], t.z1[i] + b[1]);
    for (int c = 0; c < 2; ++c) {
      const auto& z = c == 0 ? t.z0 : t.z1;
      double m = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) m = std::max(m, z[i] + a[i]);
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += std::exp(z[i] + a[i] - m);
      b[c] = log_capacity[c] - (m + std::log(s));
    }
    if (record) {
      t.a.push_back(a);
      t.b.push_back(b);
    }
    ++t.iterations;
    double violation = 0.0;
    for (int i = 0; i < n; ++i)
      violation = std::max(violation, std::abs(std::exp(t.z0[i] + a[i] + b[0]) + std::exp(t.z1[i] + a[i] + b[1]) - 1.0));
    if (violation < cfg.tolerance) {
      t.converged = true;
      break;
    }
  }
  t.discard.resize(n);
  t.keep.resize(n);
  for (int i = 0; i < n; ++i) {
    t.discard[i] = std::exp(t.z0[i] + a[i] + b[0]);
    t.keep[i] = std::exp(t.z1[i] + a[i] + b[1]);
  }
  return t;
}

namespace detail {

// Reverse pass through the unrolled iterations: given dL/dkeep, returns dL/dd.
inline std::vector<double> sinkhorn_backward(const SinkhornTrace& t, std::span<const double> grad_keep) {
  const int n = t.cells;
  std::vector<double> gd(n, 0.0);
  if (t.saturated || t.constant) return gd;
  if (static_cast<int>(t.a.size()) != t.iterations)
    throw std::logic_error("sinkhorn_backward: trace was recorded without history");
  std::vector<double> gz0(n, 0.0), gz1(n, 0.0), ga(n, 0.0);
  std::array<double, 2> gb{0.0, 0.0};
  for (int i = 0; i < n; ++i) {
    const double gu = grad_keep[i] * t.keep[i];
    gz1[i] += gu;
    ga[i] += gu;
    gb[1] += gu;
  }
  for (int it = t.iterations - 1; it >= 0; --it) {
    const auto& a = t.a[it];
    const auto& b = t.b[it];
    // b_c = log cap_c - LSE_i(z_c[i] + a[i])
    for (int c = 0; c < 2; ++c) {
      const auto& z = c == 0 ? t.z0 : t.z1;
      auto& gz = c == 0 ? gz0 : gz1;
      // softmax weights are exp(z + a + b) / cap, the plan column normalized
      const double cap = c == 0 ? static_cast<double>(n - t.k) : static_cast<double>(t.k);
      for (int i = 0; i < n; ++i) {
        const double w = -gb[c] * std::exp(z[i] + a[i] + b[c]) / cap;
        gz[i] += w;
        ga[i] += w;
      }
    }
    // a_i = -LSE_c(z_c[i] + b_prev[c])
    const std::array<double, 2> b_prev = it == 0 ? std::array<double, 2>{0.0, 0.0} : t.b[it - 1];
    std::array<double, 2> gb_prev{0.0, 0.0};
    for (int i = 0; i < n; ++i) {
      const double e0 = t.z0[i] + b_prev[0] + a[i];
      const double e1 = t.z1[i] + b_prev[1] + a[i];
      const double w0 = -ga[i] * std::exp(e0);
      const double w1 = -ga[i] * std::exp(e1);
      gz0[i] += w0;
      gz1[i] += w1;
      gb_prev[0] += w0;
      gb_prev[1] += w1;
      ga[i] = 0.0;
    }
    gb = gb_prev;
  }
  double gmin = 0.0, gmax = 0.0;
  for (int i = 0; i < n; ++i) {
    gd[i] += (-gz0[i] + gz1[i]) / t.epsilon;
    gmin += gz0[i] / t.epsilon;
    gmax -= gz1[i] / t.epsilon;
  }
  gd[t.argmin] += gmin;
  gd[t.argmax] += gmax;
  return gd;
}

}  // namespace detail

/// Differentiable top-k keep probabilities, same shape as `s`.
inline ad::Tensor sinkhorn_topk(const ad::Tensor& s, int k, const SinkhornConfig& cfg = {}) {
  auto trace = std::make_shared<SinkhornTrace>(sinkhorn_trace(s.values(), k, cfg));
  std::vector<double> keep = trace->keep;
  return ad::Tensor::from_op(s.shape(), std::move(keep), {s}, [trace](ad::Node& node) {
    if (auto* g = ad::detail::grad_of(node, 0)) {
      const auto gd = detail::sinkhorn_backward(*trace, node.grad);
      for (std::size_t i = 0; i < gd.size(); ++i) (*g)[i] += gd[i];
    }
  });
}

/// Per-source ordered candidate targets; entry r of every row came from
/// greedy round r, so shorter prefixes are the candidate sets for smaller k.
struct CandidateSet {
  int sources = 0;
  int targets = 0;
  std::vector<std::vector<int>> rows;

  int k() const { return rows.empty() ? 0 : static_cast<int>(rows[0].size()); }
  CandidateSet prefix(int k) const {
    CandidateSet c{sources, targets, rows};
    for (auto& r : c.rows) r.resize(std::min<std::size_t>(r.size(), static_cast<std::size_t>(k)));
    return c;
  }
};

/// k greedy rounds over a |V1| x |V2| score matrix. Each round repeatedly
/// takes the largest remaining score whose row and column are still free in
/// the round, skipping cells chosen in earlier rounds. A row left without a
/// column is placed by an augmenting path so every round stays injective.
inline CandidateSet greedy_candidates(std::span<const double> scores, int n1, int n2, int k) {
  if (k < 1 || k > n2)
    throw std::invalid_argument("greedy_candidates: k=" + std::to_string(k) + " outside [1, " + std::to_string(n2) + "]");
  if (scores.size() != static_cast<std::size_t>(n1) * n2)
    throw std::invalid_argument("greedy_candidates: score shape mismatch");
  if (n1 > n2) throw std::invalid_argument("greedy_candidates: more sources than targets");
  auto score = [&](int i, int j) { return scores[static_cast<std::size_t>(i) * n2 + j]; };
  std::vector<int> order(static_cast<std::size_t>(n1) * n2);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return scores[x] > scores[y]; });

  CandidateSet out{n1, n2, std::vector<std::vector<int>>(n1)};
  std::vector<char> taken(static_cast<std::size_t>(n1) * n2, 0);  // chosen in an earlier round
  auto allowed = [&](int i, int j) { return !taken[static_cast<std::size_t>(i) * n2 + j]; };
  std::vector<int> row_pick(n1), col_owner(n2);
  std::vector<char> visited(n2);

  // Kuhn augmenting path from row i, preferring higher-scoring columns
  std::function<bool(int)> augment = [&](int i) {
    std::vector<int> cols;
    for (int j = 0; j < n2; ++j)
      if (allowed(i, j) && !visited[j]) cols.push_back(j);
    std::stable_sort(cols.begin(), cols.end(), [&](int x, int y) { return score(i, x) > score(i, y); });
    for (int j : cols) {
      if (visited[j]) continue;
      visited[j] = 1;
      if (col_owner[j] < 0 || augment(col_owner[j])) {
        col_owner[j] = i;
        row_pick[i] = j;
        return true;
      }
    }
    return false;
  };

  for (int round = 0; round < k; ++round) {
    std::fill(row_pick.begin(), row_pick.end(), -1);
    std::fill(col_owner.begin(), col_owner.end(), -1);
    int placed = 0;
    for (int cell : order) {
      if (placed == n1) break;
      const int i = cell / n2;
      const int j = cell % n2;
      if (taken[cell] || row_pick[i] >= 0 || col_owner[j] >= 0) continue;
      row_pick[i] = j;
      col_owner[j] = i;
      ++placed;
    }
    for (int i = 0; i < n1; ++i) {
      if (row_pick[i] >= 0) continue;
      std::fill(visited.begin(), visited.end(), 0);
      if (augment(i)) continue;
      // no injective completion: take the row's best unchosen column
      int best = -1;
      for (int j = 0; j < n2; ++j)
        if (allowed(i, j) && (best < 0 || score(i, j) > score(i, best))) best = j;
      row_pick[i] = best;
    }
    for (int i = 0; i < n1; ++i) {
      out.rows[i].push_back(row_pick[i]);
      taken[static_cast<std::size_t>(i) * n2 + row_pick[i]] = 1;
    }
  }
  return out;
}

/// Candidates from the element-wise mean of both assignment matrices.
inline CandidateSet greedy_candidates(const ad::Tensor& a0, const ad::Tensor& al, int k) {
  if (a0.shape() != al.shape()) throw ad::ShapeError("greedy_candidates: view shapes differ");
  std::vector<double> fused(a0.size());
  for (std::size_t i = 0; i < fused.size(); ++i) fused[i] = 0.5 * (a0.values()[i] + al.values()[i]);
  return greedy_candidates(fused, a0.rows(), a0.cols(), k);
}

/// Graph-level readout and pair regressor predicting the normalized
/// similarity exp(-2 ged / (n1 + n2)).
class GedHead {
 public:
  GedHead(int hidden, ad::ParameterStore& params, std::mt19937_64& rng) : params_(&params) {
    const int d = hidden;
    const int half = std::max(1, d / 2);
    params.add_xavier("matching.graph_mlp.w", 2 * d, d, rng);
    params.add_zeros("matching.graph_mlp.b", 1, d);
    params.add_xavier("matching.pair_mlp.w1", 2 * d, half, rng);
    params.add_zeros("matching.pair_mlp.b1", 1, half);
    params.add_xavier("matching.pair_mlp.w2", half, 1, rng);
    params.add_zeros("matching.pair_mlp.b2", 1, 1);
  }

  /// h^g = relu(W [mean(h0) | mean(hl)] + b).
  ad::Tensor graph_vector(const ad::Tensor& h0, const ad::Tensor& hl) const {
    const auto pooled = ad::concat_cols({ad::mean_rows(h0), ad::mean_rows(hl)});
    return ad::relu(ad::add_row(ad::matmul(pooled, params_->at("matching.graph_mlp.w")),
                                params_->at("matching.graph_mlp.b")));
  }

  ad::Tensor predict(const ad::Tensor& h0_1, const ad::Tensor& hl_1, const ad::Tensor& h0_2,
                     const ad::Tensor& hl_2) const {
    const auto& p = *params_;
    const auto pair = ad::concat_cols({graph_vector(h0_1, hl_1), graph_vector(h0_2, hl_2)});
    const auto hidden = ad::relu(ad::add_row(ad::matmul(pair, p.at("matching.pair_mlp.w1")), p.at("matching.pair_mlp.b1")));
    return ad::sigmoid(ad::add_row(ad::matmul(hidden, p.at("matching.pair_mlp.w2")), p.at("matching.pair_mlp.b2")));
  }

 private:
  ad::ParameterStore* params_;
};

/// Model outputs for one pair that the loss consumes.
struct PairOutput {
  ad::Tensor a0;      // keep probabilities, local view
  ad::Tensor al;      // keep probabilities, high-order view
  ad::Tensor d_pred;  // 1 x 1
};

struct PairTarget {
  std::vector<int> witness;  // witness[i] = target of source i
  double similarity = 1.0;
};

struct JointLoss {
  ad::Tensor total;
  ad::Tensor ln;  // matching negative log-likelihood over witness cells
  ad::Tensor lg;  // squared error of the predicted similarity
};

inline constexpr double kLogFloor = 1e-12;

/// L = L_g + L_n averaged over the batch; only witness cells are penalized.
inline JointLoss joint_loss(const std::vector<PairOutput>& outputs, const std::vector<PairTarget>& targets) {
  if (outputs.empty() || outputs.size() != targets.size())
    throw std::invalid_argument("joint_loss: outputs and targets must be non-empty and aligned");
  const double inv = 1.0 / static_cast<double>(outputs.size());
  std::vector<ad::Tensor> nll, sq;
  for (std::size_t p = 0; p < outputs.size(); ++p) {
    const auto& o = outputs[p];
    const auto& t = targets[p];
    if (static_cast<int>(t.witness.size()) != o.a0.rows())
      throw std::invalid_argument("joint_loss: witness size differs from source node count");
    std::vector<std::pair<int, int>> cells;
    for (int i = 0; i < static_cast<int>(t.witness.size()); ++i) cells.emplace_back(i, t.witness[i]);
    nll.push_back(ad::reduce_sum(ad::clamped_log(ad::gather(o.a0, cells), kLogFloor)));
    nll.push_back(ad::reduce_sum(ad::clamped_log(ad::gather(o.al, cells), kLogFloor)));
    sq.push_back(ad::square(ad::add_scalar(o.d_pred, -t.similarity)));
  }
  auto ln = ad::scale(ad::reduce_sum(ad::concat_cols(nll)), -inv);
  auto lg = ad::scale(ad::reduce_sum(ad::concat_cols(sq)), inv);
  auto total = ad::add(lg, ln);
  return {total, ln, lg};
}

}  // namespace mata
