#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <concepts>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mata/graph.hpp"
#include "mata/lsap.hpp"

namespace mata {

inline constexpr int kUnset = -1;

inline double normalized_similarity(double ged, int n1, int n2) {
  return std::exp(-2.0 * ged / static_cast<double>(n1 + n2));
}

/// Injective map from source nodes (assigned in index order) to target nodes.
struct NodeMatching {
  std::vector<int> assigned;  // assigned[i] = target of source i, or kUnset
  int level = 0;
  int g_cost = 0;

  static NodeMatching empty(int source_nodes) {
    return {std::vector<int>(static_cast<std::size_t>(source_nodes), kUnset), 0, 0};
  }
  bool complete() const { return level == static_cast<int>(assigned.size()); }
};

class SearchTimeout : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GedResult {
  int distance = 0;
  double normalized_similarity = 1.0;
  NodeMatching matching;
  long long expanded_states = 0;
  std::chrono::nanoseconds elapsed{0};
  bool timed_out = false;  // distance is the best complete matching seen
};

namespace detail {

inline void check_complete_injection(const GraphPair& pair, std::span<const int> m) {
  const int n1 = pair.g1.node_count();
  const int n2 = pair.g2.node_count();
  if (static_cast<int>(m.size()) != n1)
    throw std::invalid_argument("matching size differs from source node count");
  std::vector<char> used(static_cast<std::size_t>(n2), 0);
  for (int t : m) {
    if (t == kUnset) throw std::invalid_argument("matching is partial");
    if (t < 0 || t >= n2) throw std::invalid_argument("matching target out of range");
    if (used[t]) throw std::invalid_argument("matching is not injective");
    used[t] = 1;
  }
}

// Edit cost contributed by assigning source node `i` to `t`, given that
// sources 0..i-1 are already assigned in `m`.
inline int assign_cost(const GraphPair& pair, std::span<const int> m, int i, int t) {
  const Graph& g1 = pair.g1;
  const Graph& g2 = pair.g2;
  int cost = g1.label(i) != g2.label(t) ? 1 : 0;
  // source edges back to already-matched nodes
  int covered = 0;
  for (int j : g1.neighbors(i)) {
    if (j >= i) break;
    const std::string* tl = g2.edge_label(t, m[j]);
    if (tl == nullptr) {
      ++cost;
    } else {
      ++covered;
      if (*tl != *g1.edge_label(i, j)) ++cost;
    }
  }
  // target edges from t into the matched image that no source edge covers
  int image_edges = 0;
  for (int j = 0; j < i; ++j)
    if (g2.has_edge(t, m[j])) ++image_edges;
  return cost + image_edges - covered;
}

// Cost charged once the last source node is placed: inserted target nodes
// and every target edge touching a node outside the image.
inline int completion_cost(const GraphPair& pair, std::span<const int> m) {
  const Graph& g2 = pair.g2;
  std::vector<char> in_image(static_cast<std::size_t>(g2.node_count()), 0);
  for (int t : m) in_image[t] = 1;
  int cost = g2.node_count() - pair.g1.node_count();
  for (const auto& e : g2.edges())
    if (!in_image[e.u] || !in_image[e.v]) ++cost;
  return cost;
}

}  // namespace detail

/// Uniform-cost edit cost of the edit path induced by a complete matching.
inline int mapping_edit_cost(const GraphPair& pair, std::span<const int> m) {
  detail::check_complete_injection(pair, m);
  int cost = 0;
  for (int i = 0; i < static_cast<int>(m.size()); ++i) cost += detail::assign_cost(pair, m, i, m[i]);
  return cost + detail::completion_cost(pair, m);
}

inline int mapping_edit_cost(const GraphPair& pair, const NodeMatching& m) {
  if (!m.complete()) throw std::invalid_argument("matching is partial");
  return mapping_edit_cost(pair, std::span<const int>(m.assigned));
}

/// Edit cost of the decided portion of a partial matching, from scratch.
inline int partial_edit_cost(const GraphPair& pair, const NodeMatching& m) {
  int cost = 0;
  for (int i = 0; i < m.level; ++i) cost += detail::assign_cost(pair, m.assigned, i, m.assigned[i]);
  if (m.complete()) cost += detail::completion_cost(pair, m.assigned);
  return cost;
}

/// Precomputed per-pair data for the label-set lower bound.
class LowerBoundContext {
 public:
  explicit LowerBoundContext(const GraphPair& pair) : pair_(&pair) {
    const Graph& g1 = pair.g1;
    const Graph& g2 = pair.g2;
    std::unordered_map<std::string, int> ids;
    auto id_of = [&](const std::string& s) {
      return ids.try_emplace(s, static_cast<int>(ids.size())).first->second;
    };
    source_label_.resize(g1.node_count());
    target_label_.resize(g2.node_count());
    for (int i = 0; i < g1.node_count(); ++i) source_label_[i] = id_of(g1.label(i));
    for (int k = 0; k < g2.node_count(); ++k) target_label_[k] = id_of(g2.label(k));
    label_count_ = static_cast<int>(ids.size());

    const int n1 = g1.node_count();
    // suffix label histograms and remaining source edges per level
    suffix_counts_.assign(static_cast<std::size_t>(n1 + 1) * label_count_, 0);
    for (int lvl = n1 - 1; lvl >= 0; --lvl) {
      for (int l = 0; l < label_count_; ++l)
        suffix_counts_[lvl * label_count_ + l] = suffix_counts_[(lvl + 1) * label_count_ + l];
      ++suffix_counts_[lvl * label_count_ + source_label_[lvl]];
    }
    remaining_source_edges_.assign(n1 + 1, 0);
    for (const auto& e : g1.edges())
      for (int lvl = 0; lvl <= std::max(e.u, e.v); ++lvl) ++remaining_source_edges_[lvl];
    target_totals_.assign(label_count_, 0);
    for (int l : target_label_) ++target_totals_[l];

    std::unordered_map<std::string, int> edge_ids;
    auto adjacency = [&](const Graph& g) {
      std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(g.node_count()));
      for (const auto& e : g.edges()) {
        const int l = edge_ids.try_emplace(e.label, static_cast<int>(edge_ids.size())).first->second;
        adj[e.u].push_back({e.v, l});
        adj[e.v].push_back({e.u, l});
      }
      return adj;
    };
    source_adj_ = adjacency(g1);
    target_adj_ = adjacency(g2);
  }

  const GraphPair& pair() const { return *pair_; }
  int label_count() const { return label_count_; }
  int source_label(int i) const { return source_label_[i]; }
  int target_label(int k) const { return target_label_[k]; }
  const std::vector<int>& target_totals() const { return target_totals_; }
  int remaining_source_edges(int level) const { return remaining_source_edges_[level]; }
  std::span<const int> suffix_counts(int level) const {
    return {suffix_counts_.data() + static_cast<std::size_t>(level) * label_count_,
            static_cast<std::size_t>(label_count_)};
  }

  /// Heuristic for the unmatched remainder of a partial matching at `level`,
  /// given histogram of unused target labels and the count of target edges
  /// with both endpoints inside the image.
  int heuristic(int level, std::span<const int> unused_target_counts, int image_edges) const {
    const int n1 = pair_->g1.node_count();
    const int n2 = pair_->g2.node_count();
    if (level == n1) return 0;
    const auto src = suffix_counts(level);
    int common = 0;
    for (int l = 0; l < label_count_; ++l) common += std::min(src[l], unused_target_counts[l]);
    const int unmatched_src = n1 - level;
    const int unmatched_tgt = n2 - level;
    const int node_term = (unmatched_tgt - unmatched_src) + (unmatched_src - common);
    const int edge_term = std::abs(remaining_source_edges_[level] -
                                   (pair_->g2.edge_count() - image_edges));
    return node_term + edge_term;
  }

  /// Tighter heuristic: the remaining targets are assigned to unmatched
  /// sources or to insertion. Each cell charges the node edit, the exact edge
  /// edits against the matched part, and half the edge-label mismatch inside
  /// the remainder (each such vertex pair is shared by two cells).
  /// `m` holds targets for sources below `level`; `used` marks that image.
  int assignment_heuristic(int level, std::span<const int> m, std::span<const char> used) const {
    const int n1 = pair_->g1.node_count();
    const int n2 = pair_->g2.node_count();
    if (level == n1) return 0;
    std::vector<int> rest;
    for (int t = 0; t < n2; ++t)
      if (!used[t]) rest.push_back(t);
    const int size = static_cast<int>(rest.size());
    // per remaining target: image degree and sorted labels of edges into the remainder
    std::vector<int> image_degree(size, 0);
    std::vector<std::vector<int>> inner(size);
    for (int r = 0; r < size; ++r) {
      for (auto [nb, l] : target_adj_[rest[r]]) {
        if (used[nb])
          ++image_degree[r];
        else
          inner[r].push_back(l);
      }
      std::sort(inner[r].begin(), inner[r].end());
    }
    std::vector<int> mark(static_cast<std::size_t>(n2), -1);
    std::vector<int> src_inner;
    std::vector<double> cells(static_cast<std::size_t>(size) * size, 0.0);
    for (int c = 0; c < size; ++c) {
      const int i = level + c;  // source column, or insertion when i >= n1
      int matched_degree = 0;
      src_inner.clear();
      if (i < n1) {
        for (auto [nb, l] : source_adj_[i]) {
          if (nb < level) {
            mark[m[nb]] = l;
            ++matched_degree;
          } else {
            src_inner.push_back(l);
          }
        }
        std::sort(src_inner.begin(), src_inner.end());
      }
      for (int r = 0; r < size; ++r) {
        const int t = rest[r];
        int node = i < n1 ? (source_label_[i] != target_label_[t]) : 1;
        int both = 0, relabel = 0;
        if (i < n1)
          for (auto [nb, l] : target_adj_[t])
            if (used[nb] && mark[nb] >= 0) {
              ++both;
              relabel += mark[nb] != l;
            }
        const int outer = matched_degree + image_degree[r] - 2 * both + relabel;
        int common = 0;
        for (std::size_t x = 0, y = 0; x < src_inner.size() && y < inner[r].size();) {
          if (src_inner[x] < inner[r][y]) {
            ++x;
          } else if (inner[r][y] < src_inner[x]) {
            ++y;
          } else {
            ++common;
            ++x;
            ++y;
          }
        }
        const int inside = static_cast<int>(std::max(src_inner.size(), inner[r].size())) - common;
        cells[static_cast<std::size_t>(r) * size + c] = 2.0 * (node + outer) + inside;
      }
      if (i < n1)
        for (auto [nb, l] : source_adj_[i])
          if (nb < level) mark[m[nb]] = -1;
    }
    const double doubled = hungarian(CostMatrix(size, std::move(cells))).cost;
    return (static_cast<int>(std::llround(doubled)) + 1) / 2;
  }

 private:
  const GraphPair* pair_;
  std::vector<int> source_label_;
  std::vector<int> target_label_;
  int label_count_ = 0;
  std::vector<int> suffix_counts_;
  std::vector<int> remaining_source_edges_;
  std::vector<int> target_totals_;
  std::vector<std::vector<std::pair<int, int>>> source_adj_;
  std::vector<std::vector<std::pair<int, int>>> target_adj_;
};

/// Supplies the ordered target nodes a search state may branch to.
template <class P>
concept CandidateProvider = requires(const P& p, int level, std::span<const char> used,
                                     std::vector<int>& out) {
  { p(level, used, out) } -> std::same_as<void>;
};

/// Every unused target node, in index order.
struct FullCandidates {
  void operator()(int /*level*/, std::span<const char> used, std::vector<int>& out) const {
    out.clear();
    for (int k = 0; k < static_cast<int>(used.size()); ++k)
      if (!used[k]) out.push_back(k);
  }
};

/// kLabelSet: label multisets plus edge counts. kAssignment: the larger of
/// that and the assignment heuristic; tighter, costlier per state.
enum class Heuristic { kLabelSet, kAssignment };

/// Admissible lower bound g_cost + h for a (partial) matching.
inline int lower_bound(const GraphPair& pair, const NodeMatching& m, Heuristic heuristic = Heuristic::kLabelSet) {
  if (m.complete()) return m.g_cost;
  LowerBoundContext ctx(pair);
  std::vector<int> unused = ctx.target_totals();
  std::vector<char> in_image(static_cast<std::size_t>(pair.g2.node_count()), 0);
  for (int i = 0; i < m.level; ++i) {
    --unused[ctx.target_label(m.assigned[i])];
    in_image[m.assigned[i]] = 1;
  }
  int image_edges = 0;
  for (const auto& e : pair.g2.edges())
    if (in_image[e.u] && in_image[e.v]) ++image_edges;
  int h = ctx.heuristic(m.level, unused, image_edges);
  if (heuristic == Heuristic::kAssignment) h = std::max(h, ctx.assignment_heuristic(m.level, m.assigned, in_image));
  return m.g_cost + h;
}

struct SearchOptions {
  std::optional<int> beam_width;
  Heuristic heuristic = Heuristic::kAssignment;
  std::chrono::milliseconds timeout{60'000};
  bool verify_incremental = false;
};

/// Best-first search over node matchings. Level i assigns source node i.
/// With FullCandidates and no beam the result is the exact GED; states pop
/// in (lb asc, level desc, insertion asc) order and the first complete state
/// popped is returned.
template <CandidateProvider Provider>
GedResult astar_ged(const GraphPair& pair, const Provider& candidates,
                    const SearchOptions& options = {}) {
  const auto start = std::chrono::steady_clock::now();
  const Graph& g2 = pair.g2;
  const int n1 = pair.g1.node_count();
  const int n2 = g2.node_count();
  const LowerBoundContext ctx(pair);

  struct Record {
    int parent;
    int target;
    int level;
    int g;
    int lb;
  };
  struct Entry {
    int lb;
    int level;
    long long seq;
    int record;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.lb != b.lb) return a.lb > b.lb;
      if (a.level != b.level) return a.level < b.level;
      return a.seq > b.seq;
    }
  };

  std::vector<Record> records;
  std::priority_queue<Entry, std::vector<Entry>, Later> open;
  long long seq = 0;
  {
    std::vector<int> unused = ctx.target_totals();
    records.push_back({-1, kUnset, 0, 0, ctx.heuristic(0, unused, 0)});
    open.push({records.back().lb, 0, seq++, 0});
  }

  GedResult result;
  int best_complete = -1;
  std::vector<int> matching(static_cast<std::size_t>(n1), kUnset);
  std::vector<char> used(static_cast<std::size_t>(n2), 0);
  std::vector<int> unused_counts;
  std::vector<int> children;
  struct Child {
    int target;
    int g;
    int lb;
  };
  std::vector<Child> scored;

  auto finish = [&](int record, bool timed_out) {
    std::vector<int> m(static_cast<std::size_t>(n1), kUnset);
    for (int r = record; records[r].parent >= 0; r = records[r].parent)
      m[records[r].level - 1] = records[r].target;
    result.distance = records[record].g;
    result.matching = {std::move(m), n1, records[record].g};
    result.normalized_similarity = normalized_similarity(result.distance, n1, n2);
    result.timed_out = timed_out;
    result.elapsed = std::chrono::steady_clock::now() - start;
    return result;
  };

  while (!open.empty()) {
    const Entry top = open.top();
    open.pop();
    const Record state = records[top.record];
    if (state.level == n1) return finish(top.record, false);

    if ((++result.expanded_states & 255) == 0 &&
        std::chrono::steady_clock::now() - start > options.timeout) {
      if (best_complete >= 0) return finish(best_complete, true);
      throw SearchTimeout("A* search exceeded its time budget without a complete matching");
    }

    // rebuild the partial matching from parent links
    std::fill(matching.begin(), matching.end(), kUnset);
    std::fill(used.begin(), used.end(), 0);
    for (int r = top.record; records[r].parent >= 0; r = records[r].parent) {
      matching[records[r].level - 1] = records[r].target;
      used[records[r].target] = 1;
    }
    const int i = state.level;
    unused_counts = ctx.target_totals();
    int image_edges = 0;
    for (int j = 0; j < i; ++j) {
      --unused_counts[ctx.target_label(matching[j])];
      for (int nb : g2.neighbors(matching[j]))
        if (used[nb] && nb < matching[j]) ++image_edges;
    }

    candidates(i, std::span<const char>(used), children);
    scored.clear();
    for (int t : children) {
      if (t < 0 || t >= n2 || used[t]) continue;
      int g = state.g + detail::assign_cost(pair, matching, i, t);
      int lb;
      matching[i] = t;
      if (i + 1 == n1) {
        g += detail::completion_cost(pair, matching);
        lb = g;
      } else {
        --unused_counts[ctx.target_label(t)];
        int child_edges = image_edges;
        for (int nb : g2.neighbors(t))
          if (used[nb]) ++child_edges;
        int h = ctx.heuristic(i + 1, unused_counts, child_edges);
        ++unused_counts[ctx.target_label(t)];
        if (options.heuristic == Heuristic::kAssignment) {
          used[t] = 1;
          h = std::max(h, ctx.assignment_heuristic(i + 1, matching, used));
          used[t] = 0;
        }
        lb = g + h;
      }
      if (options.verify_incremental) {
        NodeMatching probe{matching, i + 1, 0};
        if (partial_edit_cost(pair, probe) != g)
          throw std::logic_error("incremental edit cost diverged from recomputation");
      }
      matching[i] = kUnset;
      scored.push_back({t, g, lb});
    }
    if (options.beam_width) {
      std::stable_sort(scored.begin(), scored.end(), [](const Child& a, const Child& b) {
        return a.lb != b.lb ? a.lb < b.lb : a.target < b.target;
      });
      if (static_cast<int>(scored.size()) > *options.beam_width) scored.resize(*options.beam_width);
    }
    for (const auto& c : scored) {
      records.push_back({top.record, c.target, i + 1, c.g, c.lb});
      const int id = static_cast<int>(records.size()) - 1;
      if (i + 1 == n1 && (best_complete < 0 || c.g < records[best_complete].g)) best_complete = id;
      open.push({c.lb, i + 1, seq++, id});
    }
  }
  if (best_complete >= 0) return finish(best_complete, false);
  throw std::runtime_error("search space contains no complete matching");
}

inline GedResult exact_ged(const GraphPair& pair, SearchOptions options = {}) {
  options.beam_width.reset();
  return astar_ged(pair, FullCandidates{}, options);
}

inline GedResult beam_ged(const GraphPair& pair, int width, SearchOptions options = {}) {
  options.beam_width = width;
  return astar_ged(pair, FullCandidates{}, options);
}

/// Evaluates a complete matching into a GedResult.
inline GedResult evaluate_matching(const GraphPair& pair, std::vector<int> m) {
  GedResult r;
  r.distance = mapping_edit_cost(pair, m);
  const int n1 = pair.g1.node_count();
  r.matching = {std::move(m), n1, r.distance};
  r.normalized_similarity = normalized_similarity(r.distance, n1, pair.g2.node_count());
  return r;
}

enum class EditKind { kRelabelNode, kInsertNode, kDeleteEdge, kRelabelEdge, kInsertEdge };

inline const char* to_string(EditKind k) {
  switch (k) {
    case EditKind::kRelabelNode: return "relabel_node";
    case EditKind::kInsertNode: return "insert_node";
    case EditKind::kDeleteEdge: return "delete_edge";
    case EditKind::kRelabelEdge: return "relabel_edge";
    case EditKind::kInsertEdge: return "insert_edge";
  }
  return "?";
}

/// One edit operation; node indices refer to source (`a`) or target (`b`)
/// graphs as the kind dictates.
struct EditOp {
  EditKind kind;
  int a = -1;
  int b = -1;
  std::string from;
  std::string to;
};

/// Edit path certified by a complete matching; its length is the edit cost.
inline std::vector<EditOp> edit_path(const GraphPair& pair, std::span<const int> m) {
  detail::check_complete_injection(pair, m);
  const Graph& g1 = pair.g1;
  const Graph& g2 = pair.g2;
  std::vector<EditOp> ops;
  std::vector<int> preimage(static_cast<std::size_t>(g2.node_count()), kUnset);
  for (int i = 0; i < g1.node_count(); ++i) {
    preimage[m[i]] = i;
    if (g1.label(i) != g2.label(m[i]))
      ops.push_back({EditKind::kRelabelNode, i, m[i], g1.label(i), g2.label(m[i])});
  }
  for (int k = 0; k < g2.node_count(); ++k)
    if (preimage[k] == kUnset) ops.push_back({EditKind::kInsertNode, -1, k, "", g2.label(k)});
  for (const auto& e : g1.edges()) {
    const std::string* tl = g2.edge_label(m[e.u], m[e.v]);
    if (tl == nullptr)
      ops.push_back({EditKind::kDeleteEdge, e.u, e.v, e.label, ""});
    else if (*tl != e.label)
      ops.push_back({EditKind::kRelabelEdge, e.u, e.v, e.label, *tl});
  }
  for (const auto& e : g2.edges()) {
    const int a = preimage[e.u];
    const int b = preimage[e.v];
    if (a == kUnset || b == kUnset || !g1.has_edge(a, b))
      ops.push_back({EditKind::kInsertEdge, e.u, e.v, "", e.label});
  }
  return ops;
}

}  // namespace mata
