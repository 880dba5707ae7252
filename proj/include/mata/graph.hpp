#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mata {

// Empty string is the UNLABELED symbol for both nodes and edges.
inline const std::string kUnlabeled;

struct Edge {
  int u = 0;
  int v = 0;
  std::string label;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Labeled undirected simple graph. Node identity is positional and
/// 0-based; labels may repeat. Immutable after construction.
class Graph {
 public:
  Graph() = default;

  Graph(std::string id, std::vector<std::string> node_labels,
        std::vector<Edge> edges)
      : id_(std::move(id)), labels_(std::move(node_labels)) {
    const int n = node_count();
    if (n < 1) throw std::invalid_argument("graph '" + id_ + "' has no nodes");
    adjacency_.assign(n, {});
    edge_index_.assign(static_cast<std::size_t>(n) * n, -1);
    for (auto& e : edges) {
      if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n)
        throw std::invalid_argument("graph '" + id_ + "': edge endpoint out of range");
      if (e.u == e.v)
        throw std::invalid_argument("graph '" + id_ + "': self-loop on node " +
                                    std::to_string(e.u));
      if (e.u > e.v) std::swap(e.u, e.v);
      if (edge_index_[index(e.u, e.v)] >= 0)
        throw std::invalid_argument("graph '" + id_ + "': duplicate edge");
      const int k = static_cast<int>(edges_.size());
      edge_index_[index(e.u, e.v)] = k;
      edge_index_[index(e.v, e.u)] = k;
      adjacency_[e.u].push_back(e.v);
      adjacency_[e.v].push_back(e.u);
      edges_.push_back(std::move(e));
    }
    for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
  }

  const std::string& id() const { return id_; }
  int node_count() const { return static_cast<int>(labels_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::string& label(int node) const { return labels_[node]; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int node) const { return adjacency_[node]; }
  int degree(int node) const { return static_cast<int>(adjacency_[node].size()); }

  bool has_edge(int u, int v) const { return edge_index_[index(u, v)] >= 0; }

  /// Label of edge (u,v); nullptr when absent.
  const std::string* edge_label(int u, int v) const {
    const int k = edge_index_[index(u, v)];
    return k < 0 ? nullptr : &edges_[k].label;
  }

  /// Returns the graph with node i moved to position perm[i].
  Graph permuted(const std::vector<int>& perm) const {
    const int n = node_count();
    if (static_cast<int>(perm.size()) != n)
      throw std::invalid_argument("permutation size mismatch");
    std::vector<std::string> labels(n);
    for (int i = 0; i < n; ++i) labels[perm[i]] = labels_[i];
    std::vector<Edge> edges;
    edges.reserve(edges_.size());
    for (const auto& e : edges_) edges.push_back({perm[e.u], perm[e.v], e.label});
    return Graph(id_, std::move(labels), std::move(edges));
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    if (a.id_ != b.id_ || a.labels_ != b.labels_ || a.edges_.size() != b.edges_.size())
      return false;
    for (const auto& e : a.edges_) {
      const auto* l = b.edge_label(e.u, e.v);
      if (l == nullptr || *l != e.label) return false;
    }
    return true;
  }

 private:
  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(u) * labels_.size() + static_cast<std::size_t>(v);
  }

  std::string id_;
  std::vector<std::string> labels_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<int> edge_index_;
};

/// Source/target pair with the source never larger than the target.
struct GraphPair {
  Graph g1;
  Graph g2;
  bool swapped = false;
};

inline GraphPair make_pair(Graph a, Graph b) {
  if (b.node_count() < a.node_count()) return {std::move(b), std::move(a), true};
  return {std::move(a), std::move(b), false};
}

enum class PerturbMode { kInsert, kRemove };

/// Inserts or removes ceil(fraction * |E|) uniformly chosen edges. INSERT is
/// capped at the number of non-edges. Inserted edges are UNLABELED.
inline Graph perturb_edges(const Graph& g, double fraction, PerturbMode mode,
                           std::uint64_t seed) {
  const int n = g.node_count();
  const auto m = static_cast<std::size_t>(g.edge_count());
  const auto want = static_cast<std::size_t>(std::ceil(std::clamp(fraction, 0.0, 1.0) * m - 1e-12));
  std::mt19937_64 rng(seed);

  std::vector<Edge> edges = g.edges();
  if (mode == PerturbMode::kRemove) {
    const std::size_t count = std::min(want, m);
    if (count == 0) return g;
    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    // partial Fisher-Yates: the first `count` slots are the removed edges
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, m - 1);
      std::swap(order[i], order[pick(rng)]);
    }
    std::vector<bool> drop(m, false);
    for (std::size_t i = 0; i < count; ++i) drop[order[i]] = true;
    std::vector<Edge> kept;
    for (std::size_t i = 0; i < m; ++i)
      if (!drop[i]) kept.push_back(edges[i]);
    return Graph(g.id(), g.labels(), std::move(kept));
  }

  std::vector<std::pair<int, int>> complement;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (!g.has_edge(u, v)) complement.emplace_back(u, v);
  const std::size_t count = std::min(want, complement.size());
  if (count == 0) return g;
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, complement.size() - 1);
    std::swap(complement[i], complement[pick(rng)]);
  }
  for (std::size_t i = 0; i < count; ++i)
    edges.push_back({complement[i].first, complement[i].second, kUnlabeled});
  return Graph(g.id(), g.labels(), std::move(edges));
}

/// Stable 64-bit FNV-1a, used to derive per-graph seeds from ids.
inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 14695981039346656037ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace mata
