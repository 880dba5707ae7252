#pragma once

#include <algorithm>
#include <chrono>
#include <span>
#include <stdexcept>
#include <vector>

#include "mata/graph.hpp"
#include "mata/matching.hpp"
#include "mata/search.hpp"

namespace mata {

/// Restricts level i to the first k candidates of source node i. When every
/// one of them is already used, the level falls back to the single most
/// preferred unused target: the rest of the candidate row, then the remaining
/// targets by index. The fallback keeps search trees nested as k grows.
class CandidateChildren {
 public:
  CandidateChildren(const CandidateSet& candidates, int k, int targets) : k_(k) {
    if (k < 1) throw std::invalid_argument("mata_star: k must be >= 1");
    preference_.resize(candidates.rows.size());
    for (std::size_t i = 0; i < candidates.rows.size(); ++i) {
      const auto& row = candidates.rows[i];
      if (row.empty()) throw std::invalid_argument("mata_star: source node without candidates");
      std::vector<char> seen(static_cast<std::size_t>(targets), 0);
      for (int t : row) {
        if (t < 0 || t >= targets) throw std::invalid_argument("mata_star: candidate out of range");
        if (seen[t]) throw std::invalid_argument("mata_star: duplicate candidate in a row");
        seen[t] = 1;
        preference_[i].push_back(t);
      }
      for (int t = 0; t < targets; ++t)
        if (!seen[t]) preference_[i].push_back(t);
    }
  }

  void operator()(int level, std::span<const char> used, std::vector<int>& out) const {
    out.clear();
    const auto& pref = preference_[level];
    const int k = std::min<int>(k_, static_cast<int>(pref.size()));
    for (int r = 0; r < k; ++r)
      if (!used[pref[r]]) out.push_back(pref[r]);
    if (!out.empty()) return;
    for (int t : pref)
      if (!used[t]) {
        out.push_back(t);
        return;
      }
  }

 private:
  int k_;
  std::vector<std::vector<int>> preference_;
};

/// A* refinement restricted to learned candidates. `k` defaults to the
/// candidate width; candidate entries past k only order the fallback.
inline GedResult mata_star(const GraphPair& pair, const CandidateSet& candidates, int k = 0,
                           SearchOptions options = {}) {
  if (static_cast<int>(candidates.rows.size()) != pair.g1.node_count())
    throw std::invalid_argument("mata_star: candidate rows differ from source node count");
  if (k <= 0) k = candidates.k();
  options.beam_width.reset();
  return astar_ged(pair, CandidateChildren(candidates, k, pair.g2.node_count()), options);
}

struct SweepPoint {
  int k = 0;
  int distance = 0;
  std::chrono::nanoseconds elapsed{0};
};

/// Distance for each k over nested prefixes of one candidate set.
inline std::vector<SweepPoint> k_sweep(const GraphPair& pair, const CandidateSet& candidates,
                                       const std::vector<int>& k_values, const SearchOptions& options = {}) {
  std::vector<SweepPoint> out;
  for (int k : k_values) {
    const auto r = mata_star(pair, candidates, k, options);
    out.push_back({k, r.distance, r.elapsed});
  }
  return out;
}

}  // namespace mata
