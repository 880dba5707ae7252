// Command-line front end: dataset generation, labeling, training, inference,
// single/batch GED, k sweeps and metric reports.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mata/bipartite.hpp"
#include "mata/dataset.hpp"
#include "mata/metrics.hpp"
#include "mata/model.hpp"
#include "mata/parallel.hpp"
#include "mata/refine.hpp"
#include "mata/search.hpp"
#include "mata/trainer.hpp"

namespace {

using mata::Json;

struct Globals {
  std::uint64_t seed = 0;
  std::optional<double> timeout;  // seconds
  int k = 4;
  int beam_width = 5;
  double epsilon = 0.05;
  std::string checkpoint;
  std::string format = "text";
  std::string error_scale = "sim";
  bool timing = false;
  unsigned threads = 0;

  bool json() const { return format == "json"; }
  std::chrono::milliseconds timeout_or(double fallback) const {
    return std::chrono::milliseconds(static_cast<long long>(std::llround(1000.0 * timeout.value_or(fallback))));
  }
};

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::runtime_error("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

mata::Dataset load_dataset(const std::string& graphs, const std::string& pairs) {
  mata::Dataset d;
  d.graphs = mata::read_graphs_file(graphs);
  if (!pairs.empty()) d.pairs = mata::read_pairs_file(pairs);
  d.validate();
  return d;
}

std::vector<const mata::PairRecord*> select(const mata::Dataset& d, const std::string& split) {
  if (split == "all") {
    std::vector<const mata::PairRecord*> out;
    for (const auto& p : d.pairs) out.push_back(&p);
    return out;
  }
  return d.split(mata::parse_split(split));
}

mata::Model load_model(const Globals& g) {
  if (g.checkpoint.empty()) throw std::runtime_error("this command needs --checkpoint");
  return mata::Model::load(g.checkpoint);
}

std::string pair_key(const std::string& a, const std::string& b) { return a + '\n' + b; }

std::map<std::string, mata::Prediction> load_candidates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::map<std::string, mata::Prediction> out;
  for (auto& p : mata::read_jsonl<mata::Prediction>(in, mata::prediction_from_json))
    out[pair_key(p.g1, p.g2)] = std::move(p);
  return out;
}

// Candidate source for MATA*: a candidate file or a checkpoint.
class CandidateSource {
 public:
  CandidateSource(const Globals& g, const std::string& file) {
    if (!file.empty())
      file_ = load_candidates(file);
    else if (!g.checkpoint.empty())
      model_ = std::make_unique<mata::Model>(load_model(g));
    else
      throw std::runtime_error("method mata needs --candidates or --checkpoint");
  }

  mata::CandidateSet get(const std::string& g1, const std::string& g2, const mata::GraphPair& pair,
                         int rounds) const {
    if (model_) {
      const int r = std::clamp(rounds, 1, pair.g2.node_count());
      return model_->infer(model_->features(pair.g1), model_->features(pair.g2), r).candidates;
    }
    auto it = file_.find(pair_key(g1, g2));
    if (it == file_.end()) throw std::runtime_error("no candidates for pair " + g1 + "/" + g2);
    auto c = it->second.candidates;
    c.targets = pair.g2.node_count();
    return c;
  }

 private:
  std::map<std::string, mata::Prediction> file_;
  std::unique_ptr<mata::Model> model_;
};

mata::GedResult run_method(const std::string& method, const mata::GraphPair& pair, const Globals& g,
                           const CandidateSource* candidates, const std::string& id1, const std::string& id2) {
  mata::SearchOptions opt;
  opt.timeout = g.timeout_or(60.0);
  if (method == "exact") return mata::exact_ged(pair, opt);
  if (method == "beam") return mata::beam_ged(pair, g.beam_width, opt);
  if (method == "hungarian") return mata::bipartite_ged(pair, mata::LsapMethod::kHungarian);
  if (method == "vj") return mata::bipartite_ged(pair, mata::LsapMethod::kJonkerVolgenant);
  const auto c = candidates->get(id1, id2, pair, g.k);
  return mata::mata_star(pair, c, std::min(g.k, std::max(1, c.k())), opt);
}

Json result_json(const std::string& g1, const std::string& g2, const std::string& method,
                 const mata::GraphPair& pair, const mata::GedResult& r, const Globals& g) {
  Json j;
  j["g1"] = g1;
  j["g2"] = g2;
  j["method"] = method;
  j["source"] = pair.g1.id();
  j["distance"] = r.distance;
  j["sim"] = r.normalized_similarity;
  j["matching"] = r.matching.assigned;
  if (r.timed_out) j["timed_out"] = true;
  if (g.timing) j["elapsed_ms"] = std::chrono::duration<double, std::milli>(r.elapsed).count();
  return j;
}

Json edit_path_json(const mata::GraphPair& pair, const mata::GedResult& r) {
  Json ops = Json::array();
  for (const auto& op : mata::edit_path(pair, r.matching.assigned)) {
    Json o;
    o["op"] = mata::to_string(op.kind);
    o["a"] = op.a;
    o["b"] = op.b;
    o["from"] = op.from;
    o["to"] = op.to;
    ops.push_back(std::move(o));
  }
  return ops;
}

std::string join(const std::vector<int>& v) {
  std::ostringstream s;
  s << '[';
  for (std::size_t i = 0; i < v.size(); ++i) s << (i ? ", " : "") << v[i];
  s << ']';
  return s.str();
}

// ---- subcommands ----

struct GenArgs {
  int count = 100;
  int min_nodes = 4;
  int max_nodes = 8;
  double density = 0.4;
  int alphabet = 3;
  int pairs = -1;  // -1: every unordered pair
  double train = 0.6;
  double val = 0.2;
  std::string graphs_out;
  std::string pairs_out;
};

void cmd_gen(const Globals& g, const GenArgs& a) {
  mata::RandomGraphSpec spec{a.count, a.min_nodes, a.max_nodes, a.density, a.alphabet, g.seed};
  const auto graphs = mata::generate_random_graphs(spec);
  {
    Output out(a.graphs_out);
    mata::write_graphs(out.stream(), graphs);
  }
  if (!a.pairs_out.empty()) {
    const long long all = static_cast<long long>(graphs.size()) * (static_cast<long long>(graphs.size()) - 1) / 2;
    const int count = a.pairs < 0 ? static_cast<int>(all) : a.pairs;
    const auto pairs = mata::sample_pairs(graphs, count, mata::mix_seed(g.seed, 1), a.train, a.val);
    Output out(a.pairs_out);
    mata::write_pairs(out.stream(), pairs);
  }
}

struct LabelArgs {
  std::string graphs, pairs, out;
  int exact_nodes = 10;
};

void cmd_label(const Globals& g, const LabelArgs& a) {
  const auto data = load_dataset(a.graphs, a.pairs);
  mata::GroundTruthConfig cfg;
  cfg.exact_budget_nodes = a.exact_nodes;
  cfg.timeout = g.timeout_or(10.0);
  cfg.beam_width = g.beam_width;
  cfg.threads = g.threads;
  std::unique_ptr<mata::Model> model;
  if (!g.checkpoint.empty()) {
    model = std::make_unique<mata::Model>(load_model(g));
    cfg.extra = [&](const mata::PairRecord&, const mata::GraphPair& pair) -> std::optional<mata::GedResult> {
      const int rounds = std::min(g.k, pair.g2.node_count());
      const auto c = model->infer(model->features(pair.g1), model->features(pair.g2), rounds).candidates;
      mata::SearchOptions opt;
      opt.timeout = cfg.timeout;
      try {
        return mata::mata_star(pair, c, rounds, opt);
      } catch (const mata::SearchTimeout&) {
        return std::nullopt;
      }
    };
  }
  const auto labeled = mata::build_ground_truth(data, cfg);
  Output out(a.out);
  mata::write_pairs(out.stream(), labeled);
  int exact = 0, best = 0, tomb = 0;
  for (const auto& p : labeled) {
    if (p.tombstone) ++tomb;
    else if (p.label && p.label->producer == mata::Producer::kExact) ++exact;
    else if (p.label) ++best;
  }
  std::cerr << "labeled " << labeled.size() << " pairs: " << exact << " exact, " << best << " best-of-methods, "
            << tomb << " timed out\n";
}

struct TrainArgs {
  std::string graphs, pairs, out, log;
  int epochs = 200;
  int batch_size = 128;
  double lr = 1e-3;
  double weight_decay = 5e-4;
  int hidden = 64;
  int layers = 3;
  int walk_steps = 16;
  int degree_dim = 16;
  double perturb = 0.1;
  int val_interval = 1;
  int max_iter = 100;
};

void cmd_train(const Globals& g, const TrainArgs& a) {
  const auto data = load_dataset(a.graphs, a.pairs);
  mata::TrainConfig cfg;
  cfg.model.seed = g.seed;
  cfg.model.topk = g.k;
  cfg.model.sinkhorn.epsilon = g.epsilon;
  cfg.model.sinkhorn.max_iter = a.max_iter;
  cfg.model.segcn.hidden = a.hidden;
  cfg.model.segcn.layers = a.layers;
  cfg.model.segcn.walk_steps = a.walk_steps;
  cfg.model.segcn.degree_dim = a.degree_dim;
  cfg.model.segcn.perturb_fraction = a.perturb;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch_size;
  cfg.validation_interval = a.val_interval;
  cfg.adam.lr = a.lr;
  cfg.adam.weight_decay = a.weight_decay;
  cfg.shuffle_seed = mata::mix_seed(g.seed, 7);
  Output log(a.log.empty() ? "-" : a.log);
  const bool log_to_stdout = a.log.empty() || a.log == "-";
  const auto result = mata::train(data, cfg, [&](const mata::EpochLog& e) {
    log.stream() << mata::to_json(e).dump() << '\n';
    log.stream().flush();
  });
  result.model.save(a.out);
  if (!log_to_stdout || g.json()) return;
  std::cout << "best epoch " << result.best_epoch << ", validation loss " << result.best_val << '\n';
}

struct InferArgs {
  std::string graphs, pairs, out;
  std::string split = "test";
};

void cmd_infer(const Globals& g, const InferArgs& a) {
  const auto data = load_dataset(a.graphs, a.pairs);
  const auto model = load_model(g);
  const auto recs = select(data, a.split);
  std::vector<mata::Prediction> preds(recs.size());
  std::vector<char> clamped(recs.size(), 0);
  mata::parallel_for(recs.size(), g.threads, [&](std::size_t i) {
    const auto pair = data.pair(*recs[i]);
    const int rounds = std::min(g.k, pair.g2.node_count());
    clamped[i] = rounds < g.k;
    auto inf = model.infer(model.features(pair.g1), model.features(pair.g2), rounds);
    preds[i] = {recs[i]->g1, recs[i]->g2, rounds, std::move(inf.candidates), inf.d_pred};
  });
  Output out(a.out);
  for (const auto& p : preds) out.stream() << mata::to_json(p).dump() << '\n';
  const auto n = std::count(clamped.begin(), clamped.end(), 1);
  if (n) std::cerr << "warning: k clamped to |V2| on " << n << " pairs\n";
}

struct GedArgs {
  std::string graphs, pairs, out, candidates;
  std::string g1, g2;
  std::string method = "exact";
  std::string split = "test";
};

void cmd_ged(const Globals& g, const GedArgs& a) {
  const auto data = load_dataset(a.graphs, a.pairs);
  std::unique_ptr<CandidateSource> cands;
  if (a.method == "mata") cands = std::make_unique<CandidateSource>(g, a.candidates);

  if (a.pairs.empty()) {
    if (a.g1.empty() || a.g2.empty()) throw CLI::ValidationError("ged", "give --g1 and --g2, or --pairs");
    const auto pair = mata::make_pair(data.graph(a.g1), data.graph(a.g2));
    const auto r = run_method(a.method, pair, g, cands.get(), a.g1, a.g2);
    Output out(a.out);
    if (g.json()) {
      auto j = result_json(a.g1, a.g2, a.method, pair, r, g);
      j["edit_path"] = edit_path_json(pair, r);
      out.stream() << j.dump() << '\n';
      return;
    }
    auto& o = out.stream();
    o << "distance: " << r.distance << '\n';
    o << "similarity: " << std::setprecision(6) << r.normalized_similarity << '\n';
    o << "source: " << pair.g1.id() << '\n';
    o << "matching: " << join(r.matching.assigned) << '\n';
    if (r.timed_out) o << "timed out: best complete matching reported\n";
    if (g.timing) o << "elapsed_ms: " << std::chrono::duration<double, std::milli>(r.elapsed).count() << '\n';
    const auto ops = mata::edit_path(pair, r.matching.assigned);
    o << "edit path (" << ops.size() << " ops)" << (ops.empty() ? "" : ":") << '\n';
    for (const auto& op : ops)
      o << "  " << mata::to_string(op.kind) << ' ' << op.a << ' ' << op.b << ' ' << std::quoted(op.from) << " -> "
        << std::quoted(op.to) << '\n';
    return;
  }

  const auto recs = select(data, a.split);
  std::vector<std::string> lines(recs.size());
  mata::parallel_for(recs.size(), g.threads, [&](std::size_t i) {
    const auto pair = data.pair(*recs[i]);
    const auto r = run_method(a.method, pair, g, cands.get(), recs[i]->g1, recs[i]->g2);
    lines[i] = result_json(recs[i]->g1, recs[i]->g2, a.method, pair, r, g).dump();
  });
  Output out(a.out);
  for (const auto& l : lines) out.stream() << l << '\n';
}

struct SweepArgs {
  std::string graphs, candidates, g1, g2;
  std::vector<int> k_values;
};

void cmd_sweep(const Globals& g, const SweepArgs& a) {
  const auto data = load_dataset(a.graphs, "");
  const auto pair = mata::make_pair(data.graph(a.g1), data.graph(a.g2));
  const int n2 = pair.g2.node_count();
  std::vector<int> ks = a.k_values;
  if (ks.empty())
    for (int k = 1; k <= n2; ++k) ks.push_back(k);
  const int max_k = *std::max_element(ks.begin(), ks.end());
  CandidateSource source(g, a.candidates);
  const auto c = source.get(a.g1, a.g2, pair, std::min(max_k, n2));
  mata::SearchOptions opt;
  opt.timeout = g.timeout_or(60.0);
  const auto points = mata::k_sweep(pair, c, ks, opt);
  if (g.json()) {
    Json arr = Json::array();
    for (const auto& p : points) {
      Json j;
      j["k"] = p.k;
      j["distance"] = p.distance;
      if (g.timing) j["elapsed_ms"] = std::chrono::duration<double, std::milli>(p.elapsed).count();
      arr.push_back(std::move(j));
    }
    Json j;
    j["g1"] = a.g1;
    j["g2"] = a.g2;
    j["sweep"] = std::move(arr);
    std::cout << j.dump() << '\n';
    return;
  }
  std::cout << std::setw(4) << "k" << std::setw(10) << "distance" << (g.timing ? "   elapsed_ms" : "") << '\n';
  for (const auto& p : points) {
    std::cout << std::setw(4) << p.k << std::setw(10) << p.distance;
    if (g.timing)
      std::cout << std::setw(13) << std::fixed << std::setprecision(3)
                << std::chrono::duration<double, std::milli>(p.elapsed).count();
    std::cout << '\n';
  }
}

struct MetricsArgs {
  std::string graphs, labels, predictions;
};

void cmd_metrics(const Globals& g, const MetricsArgs& a) {
  mata::Dataset data = load_dataset(a.graphs, a.labels);
  std::map<std::string, const mata::PairRecord*> labels;
  for (const auto& p : data.pairs) labels[pair_key(p.g1, p.g2)] = &p;
  std::ifstream in(a.predictions);
  if (!in) throw std::runtime_error("cannot read '" + a.predictions + "'");
  const auto preds = mata::read_jsonl<Json>(in, [](const Json& j) { return j; });
  std::vector<mata::MetricItem> items;
  for (const auto& p : preds) {
    const auto g1 = p.at("g1").get<std::string>();
    const auto g2 = p.at("g2").get<std::string>();
    auto it = labels.find(pair_key(g1, g2));
    if (it == labels.end() || !it->second->label)
      throw std::runtime_error("no ground-truth label for pair " + g1 + "/" + g2);
    const int n1 = data.graph(g1).node_count();
    const int n2 = data.graph(g2).node_count();
    mata::MetricItem m{g1, g2, 0.0, it->second->label->ged, n1, n2, std::nullopt};
    if (p.contains("distance")) {
      m.predicted = p.at("distance").get<double>();
    } else if (p.contains("d_pred")) {
      const double s = std::max(p.at("d_pred").get<double>(), 1e-300);
      m.predicted = std::round(-std::log(s) * (n1 + n2) / 2.0);
    } else {
      throw std::runtime_error("prediction for " + g1 + "/" + g2 + " has neither distance nor d_pred");
    }
    if (p.contains("elapsed_ms")) m.seconds = p.at("elapsed_ms").get<double>() / 1000.0;
    items.push_back(std::move(m));
  }
  const auto scale = g.error_scale == "ndist" ? mata::ErrorScale::kNormalizedDistance : mata::ErrorScale::kSimilarity;
  const auto r = mata::compute_metrics(items, scale);
  if (g.json()) {
    std::cout << mata::to_json(r).dump() << '\n';
    return;
  }
  auto show = [](double v) {
    std::ostringstream s;
    if (std::isnan(v))
      s << "n/a";
    else
      s << std::fixed << std::setprecision(4) << v;
    return s.str();
  };
  std::cout << std::left;
  std::cout << std::setw(12) << "pairs" << r.pairs << '\n';
  std::cout << std::setw(12) << "ACC (%)" << std::fixed << std::setprecision(2) << r.acc << '\n';
  std::cout << std::setw(12) << ("MAE (" + g.error_scale + ")") << show(r.mae) << '\n';
  std::cout << std::setw(12) << ("MSE (" + g.error_scale + ")") << show(r.mse) << '\n';
  std::cout << std::setw(12) << "p@10" << show(r.p_at_10) << "  (" << r.skipped_p10 << " queries skipped)\n";
  std::cout << std::setw(12) << "p@20" << show(r.p_at_20) << "  (" << r.skipped_p20 << " queries skipped)\n";
  std::cout << std::setw(12) << "rho" << show(r.rho) << '\n';
  std::cout << std::setw(12) << "tau" << show(r.tau) << "  (" << r.skipped_rank << " queries skipped)\n";
  std::cout << std::setw(12) << "time (ms)" << (r.mean_time ? show(*r.mean_time * 1000.0) : "n/a") << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph edit distance toolkit: exact and approximate GED, learned node matching"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--timeout", g.timeout, "Per-search time budget in seconds");
  app.add_option("--k", g.k, "Candidates per source node")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--beam-width", g.beam_width, "Beam width")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--epsilon", g.epsilon, "Sinkhorn entropic regularizer")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--checkpoint", g.checkpoint, "Model checkpoint");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"text", "json"}))->capture_default_str();
  app.add_option("--error-scale", g.error_scale, "MAE/MSE scale")->check(CLI::IsMember({"sim", "ndist"}))->capture_default_str();
  app.add_flag("--timing", g.timing, "Include wall-clock timings in outputs");
  app.add_option("--threads", g.threads, "Worker threads for batch work (0: all cores)")->capture_default_str();

  GenArgs gen;
  auto* c_gen = app.add_subcommand("gen", "Generate random labeled graphs and pairs");
  c_gen->add_option("--count", gen.count)->capture_default_str()->check(CLI::PositiveNumber);
  c_gen->add_option("--min-nodes", gen.min_nodes)->capture_default_str();
  c_gen->add_option("--max-nodes", gen.max_nodes)->capture_default_str();
  c_gen->add_option("--density", gen.density)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  c_gen->add_option("--alphabet", gen.alphabet, "Node label count")->capture_default_str();
  c_gen->add_option("--pairs", gen.pairs, "Pair count (default: all pairs)");
  c_gen->add_option("--train", gen.train, "Train fraction")->capture_default_str();
  c_gen->add_option("--val", gen.val, "Validation fraction")->capture_default_str();
  c_gen->add_option("--graphs-out", gen.graphs_out)->required();
  c_gen->add_option("--pairs-out", gen.pairs_out);

  LabelArgs label;
  auto* c_label = app.add_subcommand("label", "Build ground-truth labels for a pair file");
  c_label->add_option("--graphs", label.graphs)->required();
  c_label->add_option("--pairs", label.pairs)->required();
  c_label->add_option("--out", label.out)->required();
  c_label->add_option("--exact-nodes", label.exact_nodes, "Largest graph solved exactly")->capture_default_str();

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train a model on EXACT-labeled pairs");
  c_train->add_option("--graphs", train.graphs)->required();
  c_train->add_option("--pairs", train.pairs)->required();
  c_train->add_option("--out", train.out, "Checkpoint to write")->required();
  c_train->add_option("--log", train.log, "Training log (default stdout)");
  c_train->add_option("--epochs", train.epochs)->capture_default_str();
  c_train->add_option("--batch-size", train.batch_size)->capture_default_str()->check(CLI::PositiveNumber);
  c_train->add_option("--lr", train.lr)->capture_default_str();
  c_train->add_option("--weight-decay", train.weight_decay)->capture_default_str();
  c_train->add_option("--hidden", train.hidden)->capture_default_str();
  c_train->add_option("--layers", train.layers)->capture_default_str();
  c_train->add_option("--walk-steps", train.walk_steps)->capture_default_str();
  c_train->add_option("--degree-dim", train.degree_dim)->capture_default_str();
  c_train->add_option("--perturb", train.perturb)->capture_default_str();
  c_train->add_option("--val-interval", train.val_interval)->capture_default_str();
  c_train->add_option("--max-iter", train.max_iter, "Sinkhorn iterations")->capture_default_str();

  InferArgs infer;
  auto* c_infer = app.add_subcommand("infer", "Emit candidate sets and predicted similarities");
  c_infer->add_option("--graphs", infer.graphs)->required();
  c_infer->add_option("--pairs", infer.pairs)->required();
  c_infer->add_option("--out", infer.out);
  c_infer->add_option("--split", infer.split)->check(CLI::IsMember({"train", "val", "test", "all"}))->capture_default_str();

  GedArgs ged;
  auto* c_ged = app.add_subcommand("ged", "Graph edit distance for one pair or a pair file");
  c_ged->add_option("--graphs", ged.graphs)->required();
  c_ged->add_option("--g1", ged.g1);
  c_ged->add_option("--g2", ged.g2);
  c_ged->add_option("--pairs", ged.pairs, "Batch mode pair file");
  c_ged->add_option("--split", ged.split)->check(CLI::IsMember({"train", "val", "test", "all"}))->capture_default_str();
  c_ged->add_option("--method", ged.method)
      ->check(CLI::IsMember({"exact", "beam", "hungarian", "vj", "mata"}))
      ->capture_default_str();
  c_ged->add_option("--candidates", ged.candidates, "Candidate file from infer (method mata)");
  c_ged->add_option("--out", ged.out);

  SweepArgs sweep;
  auto* c_sweep = app.add_subcommand("sweep", "MATA* distance for a range of k on one pair");
  c_sweep->add_option("--graphs", sweep.graphs)->required();
  c_sweep->add_option("--g1", sweep.g1)->required();
  c_sweep->add_option("--g2", sweep.g2)->required();
  c_sweep->add_option("--candidates", sweep.candidates);
  c_sweep->add_option("--k-values", sweep.k_values, "k values (default 1..|V2|)")->delimiter(',');

  MetricsArgs metrics;
  auto* c_metrics = app.add_subcommand("metrics", "Report ACC/MAE/MSE/p@k/rho/tau for predictions");
  c_metrics->add_option("--graphs", metrics.graphs)->required();
  c_metrics->add_option("--labels", metrics.labels)->required();
  c_metrics->add_option("--predictions", metrics.predictions)->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*c_gen) cmd_gen(g, gen);
    else if (*c_label) cmd_label(g, label);
    else if (*c_train) cmd_train(g, train);
    else if (*c_infer) cmd_infer(g, infer);
    else if (*c_ged) cmd_ged(g, ged);
    else if (*c_sweep) cmd_sweep(g, sweep);
    else if (*c_metrics) cmd_metrics(g, metrics);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
