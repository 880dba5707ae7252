#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "mata/bipartite.hpp"
#include "mata/graph.hpp"
#include "mata/parallel.hpp"
#include "mata/search.hpp"

namespace mata {

using Json = nlohmann::ordered_json;

enum class Split { kTrain, kVal, kTest };

inline const char* to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

inline Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw std::invalid_argument("unknown split '" + s + "'");
}

enum class Producer { kExact, kBestOfMethods };

inline const char* to_string(Producer p) { return p == Producer::kExact ? "EXACT" : "BEST_OF_METHODS"; }

/// Ground truth for a pair. `matching` is oriented source = smaller graph
/// (the first graph on ties), matching[i] = target index of source node i.
struct PairLabel {
  int ged = 0;
  double similarity = 1.0;
  std::vector<int> matching;
  Producer producer = Producer::kExact;
  friend bool operator==(const PairLabel&, const PairLabel&) = default;
};

inline constexpr const char* kTombstone = "TIMEOUT";
inline constexpr const char* kUnlabeledProducer = "UNLABELED";

struct PairRecord {
  std::string g1;
  std::string g2;
  Split split = Split::kTrain;
  std::optional<PairLabel> label;
  bool tombstone = false;  // labeling exceeded its budget
  friend bool operator==(const PairRecord&, const PairRecord&) = default;
};

struct Dataset {
  std::vector<Graph> graphs;
  std::vector<PairRecord> pairs;

  const Graph& graph(const std::string& id) const {
    if (index_.size() != graphs.size()) reindex();
    auto it = index_.find(id);
    if (it == index_.end()) throw std::out_of_range("unknown graph id '" + id + "'");
    return graphs[it->second];
  }

  GraphPair pair(const PairRecord& r) const { return make_pair(graph(r.g1), graph(r.g2)); }

  std::vector<const PairRecord*> split(Split s) const {
    std::vector<const PairRecord*> out;
    for (const auto& p : pairs)
      if (p.split == s) out.push_back(&p);
    return out;
  }

  /// Throws unless every pair references known graphs.
  void validate() const {
    reindex();
    for (const auto& p : pairs) {
      graph(p.g1);
      graph(p.g2);
    }
  }

 private:
  void reindex() const {
    index_.clear();
    for (std::size_t i = 0; i < graphs.size(); ++i)
      if (!index_.emplace(graphs[i].id(), i).second)
        throw std::invalid_argument("duplicate graph id '" + graphs[i].id() + "'");
  }
  mutable std::unordered_map<std::string, std::size_t> index_;
};

// ---- line-delimited JSON ----

inline Json graph_to_json(const Graph& g) {
  Json j;
  j["id"] = g.id();
  j["nodes"] = g.labels();
  Json edges = Json::array();
  for (const auto& e : g.edges()) edges.push_back(Json::array({e.u, e.v, e.label}));
  j["edges"] = std::move(edges);
  return j;
}

inline Graph graph_from_json(const Json& j) {
  std::vector<Edge> edges;
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() < 2 || e.size() > 3) throw std::invalid_argument("malformed edge entry");
    edges.push_back({e.at(0).get<int>(), e.at(1).get<int>(), e.size() == 3 ? e.at(2).get<std::string>() : ""});
  }
  return Graph(j.at("id").get<std::string>(), j.at("nodes").get<std::vector<std::string>>(), std::move(edges));
}

inline Json pair_to_json(const PairRecord& p) {
  Json j;
  j["g1"] = p.g1;
  j["g2"] = p.g2;
  j["split"] = to_string(p.split);
  if (p.label) {
    j["ged"] = p.label->ged;
    j["sim"] = p.label->similarity;
    j["matching"] = p.label->matching;
    j["producer"] = to_string(p.label->producer);
  } else {
    j["ged"] = nullptr;
    j["sim"] = nullptr;
    j["matching"] = nullptr;
    j["producer"] = p.tombstone ? kTombstone : kUnlabeledProducer;
  }
  return j;
}

inline PairRecord pair_from_json(const Json& j) {
  PairRecord p;
  p.g1 = j.at("g1").get<std::string>();
  p.g2 = j.at("g2").get<std::string>();
  p.split = parse_split(j.value("split", std::string("train")));
  const std::string producer = j.value("producer", std::string(kUnlabeledProducer));
  if (j.contains("ged") && !j.at("ged").is_null()) {
    PairLabel l;
    l.ged = j.at("ged").get<int>();
    l.similarity = j.at("sim").get<double>();
    if (j.contains("matching") && !j.at("matching").is_null()) l.matching = j.at("matching").get<std::vector<int>>();
    if (producer == "EXACT")
      l.producer = Producer::kExact;
    else if (producer == "BEST_OF_METHODS")
      l.producer = Producer::kBestOfMethods;
    else
      throw std::invalid_argument("unknown producer '" + producer + "'");
    p.label = std::move(l);
  } else {
    p.tombstone = producer == kTombstone;
  }
  return p;
}

template <class T, class Parse>
std::vector<T> read_jsonl(std::istream& in, Parse parse) {
  std::vector<T> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse(Json::parse(line)));
    } catch (const std::exception& e) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<Graph> read_graphs(std::istream& in) { return read_jsonl<Graph>(in, graph_from_json); }
inline std::vector<PairRecord> read_pairs(std::istream& in) { return read_jsonl<PairRecord>(in, pair_from_json); }

inline void write_graphs(std::ostream& out, const std::vector<Graph>& graphs) {
  for (const auto& g : graphs) out << graph_to_json(g).dump() << '\n';
}

inline void write_pairs(std::ostream& out, const std::vector<PairRecord>& pairs) {
  for (const auto& p : pairs) out << pair_to_json(p).dump() << '\n';
}

inline std::vector<Graph> read_graphs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  return read_graphs(in);
}

inline std::vector<PairRecord> read_pairs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  return read_pairs(in);
}

// ---- synthetic data ----

inline std::string label_name(int i) {
  return i < 26 ? std::string(1, static_cast<char>('A' + i)) : "L" + std::to_string(i);
}

struct RandomGraphSpec {
  int count = 1;
  int min_nodes = 4;
  int max_nodes = 8;
  double edge_density = 0.5;
  int alphabet = 3;
  std::uint64_t seed = 0;
};

/// Erdos-Renyi style labeled graphs with ids g0000, g0001, ...
inline std::vector<Graph> generate_random_graphs(const RandomGraphSpec& spec) {
  if (spec.min_nodes < 1 || spec.max_nodes < spec.min_nodes)
    throw std::invalid_argument("node range must satisfy 1 <= min <= max");
  if (spec.edge_density < 0 || spec.edge_density > 1) throw std::invalid_argument("density must lie in [0,1]");
  if (spec.alphabet < 1) throw std::invalid_argument("alphabet size must be >= 1");
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> size(spec.min_nodes, spec.max_nodes);
  std::uniform_int_distribution<int> label(0, spec.alphabet - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<Graph> out;
  for (int c = 0; c < spec.count; ++c) {
    const int n = size(rng);
    std::vector<std::string> labels(n);
    for (auto& l : labels) l = label_name(label(rng));
    std::vector<Edge> edges;
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (coin(rng) < spec.edge_density) edges.push_back({u, v, kUnlabeled});
    char id[32];
    std::snprintf(id, sizeof id, "g%04d", c);
    out.emplace_back(id, std::move(labels), std::move(edges));
  }
  return out;
}

/// Samples distinct unordered graph pairs and tags them train/val/test by
/// the given fractions (the remainder goes to test).
inline std::vector<PairRecord> sample_pairs(const std::vector<Graph>& graphs, int count, std::uint64_t seed,
                                            double train_fraction = 0.6, double val_fraction = 0.2) {
  const auto n = static_cast<long long>(graphs.size());
  const long long available = n * (n - 1) / 2;
  if (count < 0 || count > available) throw std::invalid_argument("cannot sample that many distinct pairs");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long long> pick(0, n - 1);
  std::vector<std::pair<int, int>> chosen;
  std::map<std::pair<int, int>, bool> seen;
  if (count * 2 > available) {
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) chosen.emplace_back(a, b);
    std::shuffle(chosen.begin(), chosen.end(), rng);
    chosen.resize(static_cast<std::size_t>(count));
  } else {
    while (static_cast<int>(chosen.size()) < count) {
      int a = static_cast<int>(pick(rng));
      int b = static_cast<int>(pick(rng));
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      if (seen.emplace(std::make_pair(a, b), true).second) chosen.emplace_back(a, b);
    }
  }
  const auto train_end = static_cast<std::size_t>(std::llround(train_fraction * count));
  const auto val_end = std::min(chosen.size(), train_end + static_cast<std::size_t>(std::llround(val_fraction * count)));
  std::vector<PairRecord> out;
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    PairRecord r;
    r.g1 = graphs[chosen[i].first].id();
    r.g2 = graphs[chosen[i].second].id();
    r.split = i < train_end ? Split::kTrain : (i < val_end ? Split::kVal : Split::kTest);
    out.push_back(std::move(r));
  }
  return out;
}

// ---- ground truth ----

/// Extra candidate method for best-of-methods labels (e.g. MATA* with a
/// trained model). Returns nothing when it cannot produce a result.
using ExtraMethod = std::function<std::optional<GedResult>(const PairRecord&, const GraphPair&)>;

struct GroundTruthConfig {
  int exact_budget_nodes = 10;
  std::chrono::milliseconds timeout{10'000};  // per pair and search
  int beam_width = 5;
  ExtraMethod extra;  // optional
  unsigned threads = 0;  // 0: hardware concurrency
};

inline PairLabel label_from(const GedResult& r, Producer producer) {
  return {r.distance, r.normalized_similarity, r.matching.assigned, producer};
}

/// Labels every pair. Small pairs get EXACT labels from exact A*; larger
/// ones the minimum over beam A*, Hungarian, VJ and the optional extra
/// method. An existing label is only ever replaced by a strictly smaller
/// distance. Pairs whose exact solve times out become tombstones.
inline std::vector<PairRecord> build_ground_truth(const Dataset& data, const GroundTruthConfig& cfg) {
  data.validate();
  std::vector<PairRecord> out = data.pairs;
  parallel_for(out.size(), cfg.threads, [&](std::size_t i) {
    PairRecord& rec = out[i];
    const GraphPair pair = data.pair(rec);
    std::optional<PairLabel> fresh;
    const bool small = std::max(pair.g1.node_count(), pair.g2.node_count()) <= cfg.exact_budget_nodes;
    if (small) {
      try {
        SearchOptions opt;
        opt.timeout = cfg.timeout;
        const auto r = exact_ged(pair, opt);
        if (!r.timed_out) fresh = label_from(r, Producer::kExact);
      } catch (const SearchTimeout&) {
      }
    } else {
      SearchOptions opt;
      opt.timeout = cfg.timeout;
      std::vector<GedResult> results;
      try {
        results.push_back(beam_ged(pair, cfg.beam_width, opt));
      } catch (const SearchTimeout&) {
      }
      results.push_back(bipartite_ged(pair, LsapMethod::kHungarian));
      results.push_back(bipartite_ged(pair, LsapMethod::kJonkerVolgenant));
      if (cfg.extra)
        if (auto r = cfg.extra(rec, pair)) results.push_back(std::move(*r));
      const auto best = std::min_element(results.begin(), results.end(),
                                         [](const GedResult& a, const GedResult& b) { return a.distance < b.distance; });
      fresh = label_from(*best, Producer::kBestOfMethods);
    }
    if (!fresh) {
      if (!rec.label) rec.tombstone = true;
      return;
    }
    if (!rec.label || fresh->ged < rec.label->ged ||
        (fresh->producer == Producer::kExact && rec.label->producer != Producer::kExact && fresh->ged <= rec.label->ged)) {
      rec.label = std::move(fresh);
      rec.tombstone = false;
    }
  });
  return out;
}

}  // namespace mata
