#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "n2hp/data_io.hpp"
#include "n2hp/errors.hpp"
#include "n2hp/graph.hpp"
#include "n2hp/metrics.hpp"
#include "n2hp/model.hpp"
#include "n2hp/scorers.hpp"
#include "n2hp/splitter.hpp"

namespace n2hp {

struct TrainGridPoint {
  double learning_rate = 0.01;
  std::size_t epochs = 200;
  std::size_t embed_dim = 16;
  std::size_t hidden_dim = 32;

  friend bool operator==(const TrainGridPoint&,
                         const TrainGridPoint&) = default;
};

struct HyperGrids {
  std::vector<TrainGridPoint> lgae = {TrainGridPoint{}};
  std::vector<TrainGridPoint> gae = {TrainGridPoint{}};
  std::vector<double> katz_beta = {0.001, 0.005, 0.01, 0.05};
};

struct BenchmarkConfig {
  std::vector<DatasetSpec> datasets;
  std::vector<ScorerKind> scorers = {kAllScorers.begin(), kAllScorers.end()};
  std::size_t runs = 50;
  std::uint64_t base_seed = 0;
  SplitRatios ratios;
  HyperGrids grids;
  std::size_t dense_threshold = 4096;
  std::size_t katz_series_terms = 5;
  // 0 disables the per-dataset budget.
  double time_budget_seconds = 0.0;
  // When set, run_benchmark writes runs.csv and summary.csv here.
  std::filesystem::path output_dir;
  // Datasets resolvable by id in addition to `datasets`.
  std::vector<DatasetSpec> registry;

  void validate() const {
    if (runs < 1) throw ConfigError("runs must be >= 1");
    ratios.validate();
    for (ScorerKind s : scorers) {
      const bool lgae_backed = s == ScorerKind::N2HP ||
                               s == ScorerKind::Method1 ||
                               s == ScorerKind::LGAE;
      if (lgae_backed && grids.lgae.empty()) {
        throw ConfigError("LGAE grid is empty");
      }
      if (s == ScorerKind::GAE && grids.gae.empty()) {
        throw ConfigError("GAE grid is empty");
      }
      if (s == ScorerKind::Katz && grids.katz_beta.empty()) {
        throw ConfigError("Katz beta grid is empty");
      }
    }
  }

  std::optional<DatasetSpec> find_dataset(const std::string& id) const {
    for (const auto& d : datasets) {
      if (d.id == id) return d;
    }
    for (const auto& d : registry) {
      if (d.id == id) return d;
    }
    return std::nullopt;
  }
};

// Chosen grid index per scorer.
using Selection = std::map<ScorerKind, std::size_t>;

struct GridChoice {
  std::size_t index = 0;
  double val_auc = 0.0;
};

// Exhaustive search; the earliest of equally good points wins.
inline GridChoice grid_search(std::size_t grid_size,
                              const std::function<double(std::size_t)>& val_auc) {
  if (grid_size == 0) throw ConfigError("grid_search on an empty grid");
  GridChoice best{0, -std::numeric_limits<double>::infinity()};
  for (std::size_t k = 0; k < grid_size; ++k) {
    const double auc = val_auc(k);
    if (auc > best.val_auc) best = {k, auc};
  }
  return best;
}

inline std::size_t grid_size(ScorerKind scorer, const HyperGrids& grids) {
  switch (scorer) {
    case ScorerKind::N2HP:
    case ScorerKind::Method1:
    case ScorerKind::LGAE:
      return grids.lgae.size();
    case ScorerKind::GAE:
      return grids.gae.size();
    case ScorerKind::Katz:
      return grids.katz_beta.size();
    default:
      return 1;
  }
}

inline std::vector<NodePair> to_node_pairs(const BipartiteGraph& g,
                                           std::span<const Edge> edges) {
  std::vector<NodePair> out;
  out.reserve(edges.size());
  for (const Edge& e : edges) out.push_back(g.to_pair(e));
  return out;
}

// Everything one run derives from the training graph. The split's
// validation and test pairs are only touched through score(), after the
// training graph, its normalization and all models have been fixed.
class RunContext {
 public:
  RunContext(const BipartiteGraph& g, const BenchmarkConfig& config,
             std::uint64_t seed)
      : config_(config),
        seed_(seed),
        split_(split_edges(g, config.ratios, seed)),
        train_(train_graph(g, split_)),
        adjacency_(adjacency(train_)),
        normalized_(normalize(adjacency_)),
        labels_(reconstruction_labels(adjacency_)) {}

  const EdgeSplit& split() const { return split_; }
  const BipartiteGraph& train() const { return train_; }
  const SparseSymMatrix& adjacency_matrix() const { return adjacency_; }
  const NormalizedAdjacency& normalized() const { return normalized_; }
  const SparseSymMatrix& labels() const { return labels_; }
  std::uint64_t seed() const { return seed_; }

  TrainConfig train_config(ModelKind kind, std::size_t grid_index) const {
    const auto& grid = kind == ModelKind::LGAE ? config_.grids.lgae
                                               : config_.grids.gae;
    const TrainGridPoint& p = grid.at(grid_index);
    TrainConfig c;
    c.kind = kind;
    c.embed_dim = p.embed_dim;
    c.hidden_dim = p.hidden_dim;
    c.learning_rate = p.learning_rate;
    c.epochs = p.epochs;
    c.seed = seed_;
    c.dense_threshold = config_.dense_threshold;
    return c;
  }

  // Trained on first use, then cached.
  const EmbeddingModel& model(ModelKind kind, std::size_t grid_index) {
    const auto key = std::make_pair(static_cast<int>(kind), grid_index);
    auto it = models_.find(key);
    if (it == models_.end()) {
      it = models_
               .emplace(key, n2hp::train(normalized_, labels_,
                                   train_config(kind, grid_index)))
               .first;
    }
    return it->second;
  }

  PairScores score(ScorerKind scorer, std::size_t grid_index,
                   std::span<const NodePair> pairs) {
    switch (scorer) {
      case ScorerKind::N2HP:
        return n2hp_score(model(ModelKind::LGAE, grid_index), normalized_,
                          pairs);
      case ScorerKind::Method1:
        return method1_score(model(ModelKind::LGAE, grid_index), pairs);
      case ScorerKind::LGAE:
        return decode_score(model(ModelKind::LGAE, grid_index), pairs);
      case ScorerKind::GAE:
        return decode_score(model(ModelKind::GAE, grid_index), pairs);
      case ScorerKind::Katz: {
        KatzOptions options;
        options.series_terms = config_.katz_series_terms;
        options.dense_threshold = config_.dense_threshold;
        const double beta = config_.grids.katz_beta.at(grid_index);
        try {
          return katz_score(adjacency_, beta, pairs, options);
        } catch (const ConfigError&) {
          // beta above 1 / lambda_max: the truncated series is still defined.
          options.mode = KatzMode::Series;
          return katz_score(adjacency_, beta, pairs, options);
        }
      }
      default:
        return heuristic_scores(train_, scorer, pairs);
    }
  }

  double auc(ScorerKind scorer, std::size_t grid_index,
             std::span<const NodePair> pos, std::span<const NodePair> neg) {
    const auto p = score(scorer, grid_index, pos);
    const auto n = score(scorer, grid_index, neg);
    return roc_auc(p.scores, n.scores);
  }

  std::vector<NodePair> pairs(std::span<const Edge> edges) const {
    return to_node_pairs(train_, edges);
  }

  // Validation-AUC grid search for one scorer on this run's split.
  GridChoice select(ScorerKind scorer) {
    const std::size_t size = grid_size(scorer, config_.grids);
    const auto pos = pairs(split_.val_pos);
    const auto neg = pairs(split_.val_neg);
    if (size == 1) return {0, auc(scorer, 0, pos, neg)};
    return grid_search(size, [&](std::size_t k) {
      return auc(scorer, k, pos, neg);
    });
  }

 private:
  const BenchmarkConfig& config_;
  std::uint64_t seed_;
  EdgeSplit split_;
  BipartiteGraph train_;
  SparseSymMatrix adjacency_;
  NormalizedAdjacency normalized_;
  SparseSymMatrix labels_;
  std::map<std::pair<int, std::size_t>, EmbeddingModel> models_;
};

// Grid search only for scorers with more than one grid point.
inline Selection select_hyperparameters(RunContext& ctx,
                                        const BenchmarkConfig& config) {
  Selection chosen;
  for (ScorerKind s : config.scorers) {
    chosen[s] = grid_size(s, config.grids) > 1 ? ctx.select(s).index : 0;
  }
  return chosen;
}

inline std::vector<MetricReport> evaluate_run(RunContext& ctx,
                                              const BenchmarkConfig& config,
                                              const std::string& dataset,
                                              std::size_t run_index,
                                              const Selection& selection) {
  std::vector<MetricReport> reports;
  if (config.scorers.empty()) return reports;
  const auto pos = ctx.pairs(ctx.split().test_pos);
  const auto neg = ctx.pairs(ctx.split().test_neg);
  for (ScorerKind s : config.scorers) {
    const auto it = selection.find(s);
    const std::size_t index = it == selection.end() ? 0 : it->second;
    const auto p = ctx.score(s, index, pos);
    const auto n = ctx.score(s, index, neg);
    MetricReport r;
    r.auc = roc_auc(p.scores, n.scores);
    r.ap = average_precision(p.scores, n.scores);
    r.scorer = s;
    r.dataset = dataset;
    r.run = run_index;
    r.seed = ctx.seed();
    reports.push_back(std::move(r));
  }
  return reports;
}

// One run: split with seed base_seed + run_index, train on the training
// graph, tune on validation when a grid has several points (unless a frozen
// selection is supplied), then score the test pairs.
inline std::vector<MetricReport> run_experiment(
    const BipartiteGraph& g, const BenchmarkConfig& config,
    std::size_t run_index, const std::string& dataset = "",
    const Selection* frozen = nullptr) {
  config.validate();
  if (config.scorers.empty()) return {};
  try {
    RunContext ctx(g, config, config.base_seed + run_index);
    const Selection selection =
        frozen ? *frozen : select_hyperparameters(ctx, config);
    return evaluate_run(ctx, config, dataset, run_index, selection);
  } catch (const Error& e) {
    throw Error("run " + std::to_string(run_index) + ": " + e.what());
  }
}

struct BenchmarkResult {
  std::vector<MetricReport> records;
  Summary summary;
  std::map<std::string, Selection> selections;
};

// R runs per dataset. Hyperparameters are tuned once per dataset on run 0's
// validation split and frozen for every run.
inline BenchmarkResult run_benchmark(const BenchmarkConfig& config) {
  config.validate();
  BenchmarkResult result;
  std::vector<std::string> partial;
  for (const DatasetSpec& spec : config.datasets) {
    LoadedGraph loaded;
    try {
      loaded = load_dataset(spec);
    } catch (const Error& e) {
      result.summary.absent.push_back({spec.id, e.what()});
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    try {
      Selection selection;
      for (std::size_t r = 0; r < config.runs; ++r) {
        RunContext ctx(loaded.graph, config, config.base_seed + r);
        if (r == 0) selection = select_hyperparameters(ctx, config);
        auto reports = evaluate_run(ctx, config, spec.id, r, selection);
        result.records.insert(result.records.end(), reports.begin(),
                              reports.end());
        const std::chrono::duration<double> elapsed =
            std::chrono::steady_clock::now() - start;
        if (config.time_budget_seconds > 0 && r + 1 < config.runs &&
            elapsed.count() > config.time_budget_seconds) {
          partial.push_back(spec.id);
          break;
        }
      }
      result.selections[spec.id] = selection;
    } catch (const Error& e) {
      std::erase_if(result.records,
                    [&](const MetricReport& r) { return r.dataset == spec.id; });
      result.summary.absent.push_back({spec.id, e.what()});
    }
  }
  auto absent = std::move(result.summary.absent);
  result.summary = summarize(result.records);
  result.summary.absent = std::move(absent);
  result.summary.partial = std::move(partial);
  if (!config.output_dir.empty()) {
    write_report(result.records, result.summary, config.output_dir / "runs.csv",
                 config.output_dir / "summary.csv");
  }
  return result;
}

// AUC / AP of the reconstruction A1 and of A~ on one family of pairs.
struct SetComparison {
  std::string set;
  double auc_reconstructed = 0.0;
  double ap_reconstructed = 0.0;
  double auc_normalized = 0.0;
  double ap_normalized = 0.0;
};

struct DiagnosticBundle {
  std::size_t population = 0;
  std::size_t held_out_edges = 0;
  ConfusionMatrix reconstructed_confusion;  // A1 vs original adjacency
  ConfusionMatrix normalized_confusion;     // A~ vs original adjacency
  TwoHopMassTable method1;
  TwoHopMassTable method2;
  std::vector<SetComparison> sets;
};

// Diagnostics on run 0's split (seed = base_seed) with the LGAE model.
// Confusion matrices are taken at the best-F1 threshold over every
// Left x Right pair when n <= 2000, otherwise over all edges plus as many
// sampled non-edges.
inline DiagnosticBundle diagnose(const BipartiteGraph& g,
                                 const BenchmarkConfig& config) {
  config.validate();
  RunContext ctx(g, config, config.base_seed);
  const std::size_t grid_index =
      config.grids.lgae.size() > 1 ? ctx.select(ScorerKind::LGAE).index : 0;
  const EmbeddingModel& model = ctx.model(ModelKind::LGAE, grid_index);
  const EdgeSplit& split = ctx.split();

  DiagnosticBundle out;
  out.held_out_edges = split.val_pos.size() + split.test_pos.size();

  std::vector<Edge> population;
  std::vector<int> labels;
  if (g.num_nodes() <= 2000) {
    for (std::size_t l = 0; l < g.n_left(); ++l) {
      for (std::size_t r = 0; r < g.n_right(); ++r) {
        population.push_back({l, r});
        labels.push_back(g.has_edge(l, r) ? 1 : 0);
      }
    }
  } else {
    const std::uint64_t non_edges =
        static_cast<std::uint64_t>(g.n_left()) * g.n_right() - g.num_edges();
    population = g.edges();
    labels.assign(population.size(), 1);
    auto neg = sample_negatives(
        g, std::min<std::uint64_t>(g.num_edges(), non_edges), {},
        config.base_seed, rng_stream::kDiagnostics);
    population.insert(population.end(), neg.begin(), neg.end());
    labels.resize(population.size(), 0);
  }
  out.population = population.size();
  const auto pop_pairs = to_node_pairs(g, population);
  const auto reconstructed = decode_score(model, pop_pairs).scores;
  std::vector<double> normalized;
  normalized.reserve(pop_pairs.size());
  for (const NodePair& p : pop_pairs) {
    normalized.push_back(ctx.normalized().matrix.at(p.u, p.v));
  }
  out.reconstructed_confusion = confusion_at(
      reconstructed, labels, best_f1_threshold(reconstructed, labels).threshold);
  out.normalized_confusion = confusion_at(
      normalized, labels, best_f1_threshold(normalized, labels).threshold);

  // Matched non-edges for the "all edges" row and for the training set.
  std::vector<Edge> taken = split.val_neg;
  taken.insert(taken.end(), split.test_neg.begin(), split.test_neg.end());
  auto matched = [&](std::size_t count, std::uint64_t stream) {
    const std::uint64_t available =
        static_cast<std::uint64_t>(g.n_left()) * g.n_right() - g.num_edges() -
        taken.size();
    return sample_negatives(g, std::min<std::uint64_t>(count, available), taken,
                            config.base_seed, stream);
  };
  const auto false_edges = matched(g.num_edges(), rng_stream::kDiagnostics + 1);
  const auto train_neg =
      matched(split.train_edges.size(), rng_stream::kDiagnostics + 2);

  const std::vector<std::vector<Edge>> sets = {
      split.test_pos, split.test_neg, split.val_pos,
      split.val_neg,  g.edges(),      false_edges};
  auto table = [&](ScorerKind scorer) {
    std::vector<std::vector<double>> s;
    for (const auto& set : sets) {
      s.push_back(ctx.score(scorer, grid_index, to_node_pairs(g, set)).scores);
    }
    return two_hop_mass_report({s[0], s[1], s[2], s[3], s[4], s[5]});
  };
  out.method1 = table(ScorerKind::Method1);
  out.method2 = table(ScorerKind::N2HP);

  auto compare = [&](const std::string& name, const std::vector<Edge>& pos,
                     const std::vector<Edge>& neg) {
    SetComparison c;
    c.set = name;
    const auto pp = to_node_pairs(g, pos);
    const auto np = to_node_pairs(g, neg);
    const auto rp = decode_score(model, pp).scores;
    const auto rn = decode_score(model, np).scores;
    std::vector<double> ap_, an_;
    for (const auto& p : pp) ap_.push_back(ctx.normalized().matrix.at(p.u, p.v));
    for (const auto& p : np) an_.push_back(ctx.normalized().matrix.at(p.u, p.v));
    c.auc_reconstructed = roc_auc(rp, rn);
    c.ap_reconstructed = average_precision(rp, rn);
    c.auc_normalized = roc_auc(ap_, an_);
    c.ap_normalized = average_precision(ap_, an_);
    return c;
  };
  if (!train_neg.empty()) {
    out.sets.push_back(compare("train", split.train_edges, train_neg));
  }
  out.sets.push_back(compare("val", split.val_pos, split.val_neg));
  out.sets.push_back(compare("test", split.test_pos, split.test_neg));
  return out;
}

inline std::string format_two_hop_table(const TwoHopMassTable& t,
                                        const std::string& title) {
  std::ostringstream out;
  out << title << '\n'
      << std::left << std::setw(12) << "" << std::setw(14) << "edge"
      << "false edge" << '\n';
  for (std::size_t r = 0; r < 3; ++r) {
    out << std::left << std::setw(12) << TwoHopMassTable::kRows[r]
        << std::setw(14) << std::setprecision(5) << t.mean[r][0]
        << std::setprecision(5) << t.mean[r][1] << '\n';
  }
  return out.str();
}

inline std::string format_diagnostics(const DiagnosticBundle& d) {
  std::ostringstream out;
  auto confusion = [&](const char* name, const ConfusionMatrix& c) {
    out << std::left << std::setw(28) << name << "threshold "
        << std::setprecision(6) << c.threshold << "  tp " << c.tp << "  fp "
        << c.fp << "  fn " << c.fn << "  tn " << c.tn << "  f1 "
        << std::setprecision(4) << c.f1() << '\n';
  };
  out << "pairs evaluated: " << d.population
      << "  held-out edges: " << d.held_out_edges << '\n';
  confusion("reconstructed A1", d.reconstructed_confusion);
  confusion("normalized training A~", d.normalized_confusion);
  out << '\n' << format_two_hop_table(d.method1, "two-hop mass, A1 A1");
  out << '\n' << format_two_hop_table(d.method2, "two-hop mass, A~ A1");
  out << '\n'
      << std::left << std::setw(8) << "set" << std::setw(12) << "AUC(A1)"
      << std::setw(12) << "AP(A1)" << std::setw(12) << "AUC(A~)" << "AP(A~)"
      << '\n';
  for (const auto& s : d.sets) {
    out << std::left << std::fixed << std::setprecision(4) << std::setw(8)
        << s.set << std::setw(12) << s.auc_reconstructed << std::setw(12)
        << s.ap_reconstructed << std::setw(12) << s.auc_normalized
        << s.ap_normalized << '\n';
    out.unsetf(std::ios::fixed);
  }
  return out.str();
}

// Benchmark configuration file (JSON):
//   registry            path to a registry file, relative to the config
//   datasets            list of dataset ids (resolved in the registry) or
//                       inline dataset objects
//   methods             scorer names; default all
//   runs, seed          default 50, 0
//   ratios              [train, val, test]; default [0.85, 0.05, 0.10]
//   grids               {"lgae": [{"lr", "epochs", "dim"}],
//                        "gae": [{"lr", "epochs", "dim", "hidden"}],
//                        "katz_beta": [...]}
//   dense_threshold, katz_series_terms, time_budget_seconds, output_dir
inline BenchmarkConfig parse_benchmark_config(const nlohmann::json& j,
                                              const std::filesystem::path& base) {
  BenchmarkConfig c;
  try {
    if (j.contains("registry")) {
      std::filesystem::path reg = j.at("registry").get<std::string>();
      c.registry = load_registry(reg.is_absolute() ? reg : base / reg);
    }
    if (j.contains("datasets")) {
      for (const auto& d : j.at("datasets")) {
        if (d.is_string()) {
          const auto id = d.get<std::string>();
          auto found = c.find_dataset(id);
          if (!found) throw ConfigError("unknown dataset id '" + id + "'");
          c.datasets.push_back(*found);
        } else {
          c.datasets.push_back(dataset_from_json(d, base));
        }
      }
    }
    if (j.contains("methods")) {
      c.scorers.clear();
      for (const auto& m : j.at("methods")) {
        auto kind = parse_scorer_kind(m.get<std::string>());
        if (!kind) {
          throw ConfigError("unknown method '" + m.get<std::string>() + "'");
        }
        c.scorers.push_back(*kind);
      }
    }
    c.runs = j.value("runs", c.runs);
    c.base_seed = j.value("seed", c.base_seed);
    if (j.contains("ratios")) {
      const auto r = j.at("ratios").get<std::vector<double>>();
      if (r.size() != 3) throw ConfigError("ratios needs three values");
      c.ratios = {r[0], r[1], r[2]};
    }
    c.dense_threshold = j.value("dense_threshold", c.dense_threshold);
    c.katz_series_terms = j.value("katz_series_terms", c.katz_series_terms);
    c.time_budget_seconds = j.value("time_budget_seconds", c.time_budget_seconds);
    if (j.contains("output_dir")) {
      std::filesystem::path out = j.at("output_dir").get<std::string>();
      c.output_dir = out.is_absolute() ? out : base / out;
    }
    if (j.contains("grids")) {
      const auto& g = j.at("grids");
      auto points = [](const nlohmann::json& list, bool gae) {
        std::vector<TrainGridPoint> out;
        for (const auto& p : list) {
          TrainGridPoint t;
          t.learning_rate = p.value("lr", t.learning_rate);
          t.epochs = p.value("epochs", t.epochs);
          t.embed_dim = p.value("dim", t.embed_dim);
          if (gae) t.hidden_dim = p.value("hidden", t.hidden_dim);
          out.push_back(t);
        }
        return out;
      };
      if (g.contains("lgae")) c.grids.lgae = points(g.at("lgae"), false);
      if (g.contains("gae")) c.grids.gae = points(g.at("gae"), true);
      if (g.contains("katz_beta")) {
        c.grids.katz_beta = g.at("katz_beta").get<std::vector<double>>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad benchmark config: ") + e.what());
  }
  c.validate();
  return c;
}

inline BenchmarkConfig load_benchmark_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_benchmark_config(j, path.parent_path());
}

}  // namespace n2hp
