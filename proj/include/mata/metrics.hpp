#pragma once

#include <algorithm>
#include <iterator>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mata/search.hpp"

namespace mata {

enum class ErrorScale { kSimilarity, kNormalizedDistance };

/// One evaluated pair: predicted and ground-truth distance plus the node
/// counts needed for normalization. `query` groups pairs for ranking.
struct MetricItem {
  std::string query;
  std::string partner;
  double predicted = 0.0;
  int truth = 0;
  int n1 = 1;
  int n2 = 1;
  std::optional<double> seconds;
};

struct MetricsReport {
  std::size_t pairs = 0;
  double acc = 0.0;  // percent
  double mae = 0.0;
  double mse = 0.0;
  double p_at_10 = 0.0;
  double p_at_20 = 0.0;
  double rho = 0.0;
  double tau = 0.0;
  std::optional<double> mean_time;  // seconds per pair
  int queries = 0;
  int skipped_p10 = 0;
  int skipped_p20 = 0;
  int skipped_rank = 0;  // queries with < 2 partners or constant scores
};

/// Average (fractional) 1-based ranks, ties share the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t m = i; m <= j; ++m) r[idx[m]] = avg;
    i = j + 1;
  }
  return r;
}

/// Spearman rho as the Pearson correlation of average ranks. NaN when
/// either side is constant.
inline double spearman_rho(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("spearman_rho: length mismatch");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0 || sbb == 0) return std::nan("");
  return sab / std::sqrt(saa * sbb);
}

/// Kendall tau-b with tie correction. NaN when either side is constant.
inline double kendall_tau_b(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("kendall_tau_b: length mismatch");
  long long concordant = 0, discordant = 0, ties_a = 0, ties_b = 0, pairs = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      ++pairs;
      const double da = a[i] - a[j];
      const double db = b[i] - b[j];
      if (da == 0) ++ties_a;
      if (db == 0) ++ties_b;
      if (da == 0 || db == 0) continue;
      if ((da > 0) == (db > 0))
        ++concordant;
      else
        ++discordant;
    }
  const double denom = std::sqrt(static_cast<double>(pairs - ties_a) * static_cast<double>(pairs - ties_b));
  if (denom == 0) return std::nan("");
  return static_cast<double>(concordant - discordant) / denom;
}

/// |top-k(predicted) ∩ top-k(truth)| / k, highest score first, ties broken
/// by position.
inline double precision_at_k(std::span<const double> predicted, std::span<const double> truth, int k) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("precision_at_k: length mismatch");
  if (k < 1 || static_cast<std::size_t>(k) > predicted.size())
    throw std::invalid_argument("precision_at_k: k outside [1, n]");
  auto top = [k](std::span<const double> s) {
    std::vector<std::size_t> idx(s.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
    idx.resize(static_cast<std::size_t>(k));
    std::sort(idx.begin(), idx.end());
    return idx;
  };
  const auto p = top(predicted);
  const auto t = top(truth);
  std::vector<std::size_t> common;
  std::set_intersection(p.begin(), p.end(), t.begin(), t.end(), std::back_inserter(common));
  return static_cast<double>(common.size()) / k;
}

inline double scaled(double ged, int n1, int n2, ErrorScale scale) {
  const double nd = 2.0 * ged / (n1 + n2);
  return scale == ErrorScale::kSimilarity ? std::exp(-nd) : nd;
}

/// ACC on raw distances, MAE/MSE on the chosen scale,
/// ranking metrics per query on normalized similarity then averaged.
inline MetricsReport compute_metrics(std::span<const MetricItem> items, ErrorScale scale = ErrorScale::kSimilarity) {
  MetricsReport r;
  r.pairs = items.size();
  if (items.empty()) return r;
  int exact = 0;
  double abs_err = 0, sq_err = 0, time = 0;
  int timed = 0;
  std::map<std::string, std::vector<const MetricItem*>> groups;
  for (const auto& it : items) {
    if (it.predicted == static_cast<double>(it.truth)) ++exact;
    const double e = scaled(it.predicted, it.n1, it.n2, scale) - scaled(it.truth, it.n1, it.n2, scale);
    abs_err += std::abs(e);
    sq_err += e * e;
    if (it.seconds) {
      time += *it.seconds;
      ++timed;
    }
    groups[it.query].push_back(&it);
  }
  const double n = static_cast<double>(items.size());
  r.acc = 100.0 * exact / n;
  r.mae = abs_err / n;
  r.mse = sq_err / n;
  if (timed) r.mean_time = time / timed;

  double p10 = 0, p20 = 0, rho = 0, tau = 0;
  int c10 = 0, c20 = 0, crank = 0;
  for (const auto& [query, members] : groups) {
    ++r.queries;
    std::vector<double> pred, truth;
    for (const auto* m : members) {
      pred.push_back(normalized_similarity(m->predicted, m->n1, m->n2));
      truth.push_back(normalized_similarity(m->truth, m->n1, m->n2));
    }
    if (members.size() >= 10) {
      p10 += precision_at_k(pred, truth, 10);
      ++c10;
    } else {
      ++r.skipped_p10;
    }
    if (members.size() >= 20) {
      p20 += precision_at_k(pred, truth, 20);
      ++c20;
    } else {
      ++r.skipped_p20;
    }
    const double q_rho = members.size() >= 2 ? spearman_rho(pred, truth) : std::nan("");
    const double q_tau = members.size() >= 2 ? kendall_tau_b(pred, truth) : std::nan("");
    if (std::isnan(q_rho) || std::isnan(q_tau)) {
      ++r.skipped_rank;
      continue;
    }
    rho += q_rho;
    tau += q_tau;
    ++crank;
  }
  const double nan = std::nan("");
  r.p_at_10 = c10 ? p10 / c10 : nan;
  r.p_at_20 = c20 ? p20 / c20 : nan;
  r.rho = crank ? rho / crank : nan;
  r.tau = crank ? tau / crank : nan;
  return r;
}

inline nlohmann::ordered_json to_json(const MetricsReport& r) {
  auto num = [](double v) { return std::isnan(v) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(v); };
  nlohmann::ordered_json j;
  j["pairs"] = r.pairs;
  j["acc"] = r.acc;
  j["mae"] = r.mae;
  j["mse"] = r.mse;
  j["p_at_10"] = num(r.p_at_10);
  j["p_at_20"] = num(r.p_at_20);
  j["rho"] = num(r.rho);
  j["tau"] = num(r.tau);
  j["mean_time"] = r.mean_time ? nlohmann::ordered_json(*r.mean_time) : nlohmann::ordered_json(nullptr);
  j["queries"] = r.queries;
  j["skipped_p_at_10"] = r.skipped_p10;
  j["skipped_p_at_20"] = r.skipped_p20;
  j["skipped_rank"] = r.skipped_rank;
  return j;
}

}  // namespace mata
