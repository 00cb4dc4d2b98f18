#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "n2hp/errors.hpp"
#include "n2hp/graph.hpp"
#include "n2hp/metrics.hpp"
#include "n2hp/rng.hpp"

namespace n2hp {

// A graph read from an edge list together with the original node ids.
struct LoadedGraph {
  BipartiteGraph graph;
  std::vector<std::string> left_ids;
  std::vector<std::string> right_ids;
  std::size_t duplicates = 0;
};

// Edge-list format: one edge per line, "<left-id> <right-id>" separated by
// whitespace. `#` starts a comment, blank lines are ignored. Ids are mapped
// to contiguous indices in order of first appearance, independently per
// column. An id appearing in both columns is an error.
inline LoadedGraph parse_edge_list(std::istream& in) {
  LoadedGraph out;
  std::unordered_map<std::string, std::size_t> left_index, right_index;
  std::vector<Edge> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string left, right, extra;
    if (!(fields >> left)) continue;
    if (!(fields >> right) || (fields >> extra)) {
      throw InputError("expected exactly two node ids", line_no);
    }
    if (left == right) throw InputError("self-loop on '" + left + "'", line_no);
    if (right_index.contains(left)) {
      throw InputError("id '" + left + "' appears in both columns", line_no);
    }
    if (left_index.contains(right)) {
      throw InputError("id '" + right + "' appears in both columns", line_no);
    }
    auto [l, new_left] = left_index.try_emplace(left, out.left_ids.size());
    if (new_left) out.left_ids.push_back(left);
    auto [r, new_right] = right_index.try_emplace(right, out.right_ids.size());
    if (new_right) out.right_ids.push_back(right);
    raw.push_back({l->second, r->second});
  }
  out.graph = build_graph(out.left_ids.size(), out.right_ids.size(), raw);
  out.duplicates = raw.size() - out.graph.num_edges();
  return out;
}

inline LoadedGraph load_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edge list " + path.string());
  try {
    return parse_edge_list(in);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.detail(), e.line());
  }
}

inline void write_edge_list(std::ostream& out, const LoadedGraph& loaded) {
  for (const Edge& e : loaded.graph.edges()) {
    out << loaded.left_ids[e.left] << ' ' << loaded.right_ids[e.right] << '\n';
  }
}

// Generated graphs name Left nodes L<i> and Right nodes R<j>.
inline LoadedGraph with_default_ids(BipartiteGraph g) {
  LoadedGraph out;
  for (std::size_t i = 0; i < g.n_left(); ++i) {
    out.left_ids.push_back("L" + std::to_string(i));
  }
  for (std::size_t j = 0; j < g.n_right(); ++j) {
    out.right_ids.push_back("R" + std::to_string(j));
  }
  out.graph = std::move(g);
  return out;
}

inline BipartiteGraph generate_bipartite_er(std::size_t n_left,
                                            std::size_t n_right, double p,
                                            std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ConfigError("edge probability must lie in [0, 1]");
  }
  CounterRng rng(seed, rng_stream::kGenerator);
  std::vector<Edge> edges;
  for (std::size_t l = 0; l < n_left; ++l) {
    for (std::size_t r = 0; r < n_right; ++r) {
      if (rng.bernoulli(p)) edges.push_back({l, r});
    }
  }
  return build_graph(n_left, n_right, edges);
}

// Bipartite stochastic block model with k aligned blocks: Left block b and
// Right block b connect with p_in, all other block pairs with p_out.
struct SbmSpec {
  std::vector<std::size_t> left_sizes;
  std::vector<std::size_t> right_sizes;
  double p_in = 0.0;
  double p_out = 0.0;

  // Splits each side as evenly as possible, earlier blocks taking the
  // remainder.
  static SbmSpec balanced(std::size_t blocks, std::size_t n_left,
                          std::size_t n_right, double p_in, double p_out) {
    if (blocks == 0) throw ConfigError("SBM needs at least one block");
    SbmSpec s;
    s.p_in = p_in;
    s.p_out = p_out;
    for (std::size_t b = 0; b < blocks; ++b) {
      s.left_sizes.push_back(n_left / blocks + (b < n_left % blocks ? 1 : 0));
      s.right_sizes.push_back(n_right / blocks + (b < n_right % blocks ? 1 : 0));
    }
    return s;
  }
};

inline BipartiteGraph generate_bipartite_sbm(const SbmSpec& spec,
                                             std::uint64_t seed) {
  if (spec.left_sizes.empty() ||
      spec.left_sizes.size() != spec.right_sizes.size()) {
    throw ConfigError("SBM needs the same positive number of blocks per side");
  }
  if (!(spec.p_in >= 0.0 && spec.p_in <= 1.0 && spec.p_out >= 0.0 &&
        spec.p_out <= 1.0)) {
    throw ConfigError("SBM probabilities must lie in [0, 1]");
  }
  if (!(spec.p_in > spec.p_out)) throw ConfigError("SBM needs p_in > p_out");
  std::vector<std::size_t> left_block, right_block;
  for (std::size_t b = 0; b < spec.left_sizes.size(); ++b) {
    left_block.insert(left_block.end(), spec.left_sizes[b], b);
    right_block.insert(right_block.end(), spec.right_sizes[b], b);
  }
  CounterRng rng(seed, rng_stream::kGenerator);
  std::vector<Edge> edges;
  for (std::size_t l = 0; l < left_block.size(); ++l) {
    for (std::size_t r = 0; r < right_block.size(); ++r) {
      const double p = left_block[l] == right_block[r] ? spec.p_in : spec.p_out;
      if (rng.bernoulli(p)) edges.push_back({l, r});
    }
  }
  return build_graph(left_block.size(), right_block.size(), edges);
}

struct GeneratorSpec {
  std::string model = "er";  // "er" or "sbm"
  std::size_t n_left = 0;
  std::size_t n_right = 0;
  double p = 0.0;            // er
  std::size_t blocks = 1;    // sbm
  double p_in = 0.0;         // sbm
  double p_out = 0.0;        // sbm
  std::uint64_t seed = 0;
};

inline BipartiteGraph generate(const GeneratorSpec& spec) {
  if (spec.model == "er") {
    return generate_bipartite_er(spec.n_left, spec.n_right, spec.p, spec.seed);
  }
  if (spec.model == "sbm") {
    return generate_bipartite_sbm(
        SbmSpec::balanced(spec.blocks, spec.n_left, spec.n_right, spec.p_in,
                          spec.p_out),
        spec.seed);
  }
  throw ConfigError("unknown generator model '" + spec.model + "'");
}

struct DatasetSpec {
  std::string id;
  std::optional<std::filesystem::path> path;
  std::optional<GeneratorSpec> generator;
  std::optional<std::size_t> expected_nodes;
  std::optional<std::size_t> expected_edges;
  std::string source;
  std::string description;
};

inline void from_json(const nlohmann::json& j, GeneratorSpec& g) {
  g.model = j.at("model").get<std::string>();
  g.n_left = j.at("left").get<std::size_t>();
  g.n_right = j.at("right").get<std::size_t>();
  g.p = j.value("p", 0.0);
  g.blocks = j.value("blocks", std::size_t{1});
  g.p_in = j.value("p_in", 0.0);
  g.p_out = j.value("p_out", 0.0);
  g.seed = j.value("seed", std::uint64_t{0});
}

// `base` resolves relative file paths.
inline DatasetSpec dataset_from_json(const nlohmann::json& j,
                                     const std::filesystem::path& base) {
  DatasetSpec d;
  try {
    d.id = j.at("id").get<std::string>();
    if (j.contains("path")) {
      std::filesystem::path p = j.at("path").get<std::string>();
      d.path = p.is_absolute() ? p : base / p;
    }
    if (j.contains("generator")) d.generator = j.at("generator").get<GeneratorSpec>();
    if (j.contains("nodes")) d.expected_nodes = j.at("nodes").get<std::size_t>();
    if (j.contains("edges")) d.expected_edges = j.at("edges").get<std::size_t>();
    d.source = j.value("source", std::string{});
    d.description = j.value("description", std::string{});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad dataset entry: ") + e.what());
  }
  if (!d.path && !d.generator) {
    throw ConfigError("dataset '" + d.id + "' has neither path nor generator");
  }
  return d;
}

// Registry file: {"datasets": [{"id", "path"?, "generator"?, "nodes"?,
// "edges"?, "source"?, "description"?}, ...]}.
inline std::vector<DatasetSpec> load_registry(
    const std::filesystem::path& registry_path) {
  std::ifstream in(registry_path);
  if (!in) throw IoError("cannot open registry " + registry_path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(registry_path.string() + ": " + e.what());
  }
  std::vector<DatasetSpec> out;
  for (const auto& entry : j.at("datasets")) {
    out.push_back(dataset_from_json(entry, registry_path.parent_path()));
  }
  return out;
}

inline void validate_counts(const DatasetSpec& spec, const BipartiteGraph& g) {
  if (spec.expected_nodes && *spec.expected_nodes != g.num_nodes()) {
    throw InputError("dataset '" + spec.id + "': expected " +
                     std::to_string(*spec.expected_nodes) + " nodes, got " +
                     std::to_string(g.num_nodes()));
  }
  if (spec.expected_edges && *spec.expected_edges != g.num_edges()) {
    throw InputError("dataset '" + spec.id + "': expected " +
                     std::to_string(*spec.expected_edges) + " edges, got " +
                     std::to_string(g.num_edges()));
  }
}

inline LoadedGraph load_dataset(const DatasetSpec& spec) {
  LoadedGraph loaded = spec.path ? load_edge_list(*spec.path)
                                 : with_default_ids(generate(*spec.generator));
  validate_counts(spec, loaded.graph);
  return loaded;
}

namespace detail {

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

}  // namespace detail

inline void write_runs_csv(std::ostream& out,
                           std::span<const MetricReport> records) {
  out << "dataset,method,run,seed,auc,ap\n";
  for (const auto& r : records) {
    out << r.dataset << ',' << to_string(r.scorer) << ',' << r.run << ','
        << r.seed << ',' << r.auc << ',' << r.ap << '\n';
  }
}

inline void write_summary_csv(std::ostream& out, const Summary& summary) {
  out << "dataset,method,auc_mean,auc_std,ap_mean,ap_std\n";
  for (const auto& r : summary.rows) {
    out << r.dataset << ',' << to_string(r.scorer) << ',' << r.auc_mean << ','
        << r.auc_std << ',' << r.ap_mean << ',' << r.ap_std << '\n';
  }
}

// Per-run CSV plus its companion mean/std summary.
inline void write_report(std::span<const MetricReport> records,
                         const Summary& summary,
                         const std::filesystem::path& runs_path,
                         const std::filesystem::path& summary_path) {
  auto runs = detail::open_for_write(runs_path);
  write_runs_csv(runs, records);
  auto sum = detail::open_for_write(summary_path);
  write_summary_csv(sum, summary);
  if (!runs || !sum) throw IoError("failed writing report");
}

// Aligned text, AUC and AP in percent as "mean+std".
inline std::string format_summary_table(const Summary& summary) {
  std::ostringstream out;
  out << std::left << std::setw(24) << "dataset" << std::setw(24) << "method"
      << std::setw(6) << "runs" << std::setw(16) << "AUC" << "AP" << '\n';
  auto cell = [](double mean, double std) {
    std::ostringstream c;
    c << std::fixed << std::setprecision(1) << 100.0 * mean << '+'
      << std::setprecision(2) << 100.0 * std;
    return c.str();
  };
  for (const auto& r : summary.rows) {
    out << std::left << std::setw(24) << r.dataset << std::setw(24)
        << to_string(r.scorer) << std::setw(6) << r.runs << std::setw(16)
        << cell(r.auc_mean, r.auc_std) << cell(r.ap_mean, r.ap_std) << '\n';
  }
  for (const auto& a : summary.absent) {
    out << std::left << std::setw(24) << a.dataset << "absent: " << a.reason
        << '\n';
  }
  for (const auto& p : summary.partial) {
    out << std::left << std::setw(24) << p
        << "partial: wall-clock budget reached\n";
  }
  return out.str();
}

}  // namespace n2hp
