#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <chrono>
#include <string>
#include <vector>

#include "mata/graph.hpp"
#include "mata/lsap.hpp"
#include "mata/search.hpp"

namespace mata {

/// Padded (|V1|+|V2|) square matrix: substitution block top-left, deletion
/// diagonal top-right, insertion diagonal bottom-left, zeros bottom-right.
inline CostMatrix build_cost_matrix(const GraphPair& pair) {
  const Graph& g1 = pair.g1;
  const Graph& g2 = pair.g2;
  const int n1 = g1.node_count();
  const int n2 = g2.node_count();
  CostMatrix c(n1 + n2, kForbidden);
  for (int i = 0; i < n1; ++i)
    for (int k = 0; k < n2; ++k)
      c(i, k) = (g1.label(i) != g2.label(k) ? 1.0 : 0.0) +
                0.5 * std::abs(g1.degree(i) - g2.degree(k));
  for (int i = 0; i < n1; ++i) c(i, n2 + i) = 1.0 + 0.5 * g1.degree(i);
  for (int k = 0; k < n2; ++k) c(n1 + k, k) = 1.0 + 0.5 * g2.degree(k);
  for (int k = 0; k < n2; ++k)
    for (int i = 0; i < n1; ++i) c(n1 + k, n2 + i) = 0.0;
  return c;
}

/// Bipartite-relaxation GED: solve the padded LSAP, keep its substitutions,
/// re-attach sources that landed in the deletion block to their cheapest
/// remaining targets, and evaluate the induced matching exactly.
inline GedResult bipartite_ged(const GraphPair& pair, LsapMethod method) {
  const auto start = std::chrono::steady_clock::now();
  const int n1 = pair.g1.node_count();
  const int n2 = pair.g2.node_count();
  const CostMatrix c = build_cost_matrix(pair);
  const Assignment a = solve_assignment(c, method);
  std::vector<int> m(static_cast<std::size_t>(n1), kUnset);
  std::vector<char> used(static_cast<std::size_t>(n2), 0);
  for (int i = 0; i < n1; ++i) {
    if (a.row_to_col[i] < n2) {
      m[i] = a.row_to_col[i];
      used[m[i]] = 1;
    }
  }
  for (int i = 0; i < n1; ++i) {
    if (m[i] != kUnset) continue;
    int best = -1;
    for (int k = 0; k < n2; ++k)
      if (!used[k] && (best < 0 || c(i, k) < c(i, best))) best = k;
    m[i] = best;
    used[best] = 1;
  }
  GedResult r = evaluate_matching(pair, std::move(m));
  r.elapsed = std::chrono::steady_clock::now() - start;
  return r;
}

}  // namespace mata