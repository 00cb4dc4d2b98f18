// Command-line front end: benchmark, generate, diagnose, split.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "n2hp/n2hp.hpp"

namespace fs = std::filesystem;
using namespace n2hp;

namespace {

// Machine-readable failure record on stderr.
int report_error(const char* kind, const std::string& message,
                 std::optional<std::size_t> line, int code) {
  nlohmann::json record = {{"error", {{"kind", kind}, {"message", message}}}};
  if (line) record["error"]["line"] = *line;
  std::cerr << record.dump() << std::endl;
  return code;
}

BenchmarkConfig config_or_default(const std::string& config_path,
                                  const std::string& registry_path) {
  BenchmarkConfig config;
  if (!config_path.empty()) config = load_benchmark_config(config_path);
  if (config.registry.empty() && !registry_path.empty() &&
      fs::exists(registry_path)) {
    config.registry = load_registry(registry_path);
  }
  return config;
}

// A registered id, or else a path to an edge-list file.
DatasetSpec resolve_dataset(const BenchmarkConfig& config,
                            const std::string& id) {
  if (auto found = config.find_dataset(id)) return *found;
  if (fs::is_regular_file(id)) {
    DatasetSpec spec;
    spec.id = fs::path(id).stem().string();
    spec.path = id;
    return spec;
  }
  throw ConfigError("unknown dataset '" + id + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bipartite link prediction benchmark (N2HP and baselines)"};
  app.require_subcommand(1);

  std::string registry_path = "data/registry.json";
  app.add_option("--registry", registry_path,
                 "Dataset registry used to resolve ids");

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "Run the multi-run benchmark");
  std::string bench_config;
  std::optional<std::size_t> bench_runs;
  std::optional<std::uint64_t> bench_seed;
  std::vector<std::string> bench_datasets, bench_methods;
  std::string bench_out;
  bench->add_option("--config", bench_config, "Benchmark config (JSON)")
      ->required();
  bench->add_option("--runs", bench_runs, "Runs per dataset");
  bench->add_option("--seed", bench_seed, "Base seed");
  bench->add_option("--dataset", bench_datasets, "Restrict to dataset id(s)");
  bench->add_option("--method", bench_methods, "Restrict to method(s)");
  bench->add_option("--out", bench_out, "Output directory for CSV reports");

  // generate
  auto* gen = app.add_subcommand("generate", "Write a synthetic bipartite graph");
  GeneratorSpec gen_spec;
  std::string gen_out;
  gen->add_option("--model", gen_spec.model, "er or sbm")
      ->required()
      ->check(CLI::IsMember({"er", "sbm"}));
  gen->add_option("--out", gen_out, "Edge-list output path")->required();
  gen->add_option("--left", gen_spec.n_left, "Left node count")->required();
  gen->add_option("--right", gen_spec.n_right, "Right node count")->required();
  gen->add_option("--p", gen_spec.p, "Edge probability (er)");
  gen->add_option("--blocks", gen_spec.blocks, "Block count (sbm)");
  gen->add_option("--p-in", gen_spec.p_in, "Within-block probability (sbm)");
  gen->add_option("--p-out", gen_spec.p_out, "Cross-block probability (sbm)");
  gen->add_option("--seed", gen_spec.seed, "Seed");

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "Confusion and two-hop diagnostics");
  std::string diag_dataset, diag_config;
  diag->add_option("--dataset", diag_dataset, "Dataset id or edge list")
      ->required();
  diag->add_option("--config", diag_config, "Benchmark config (JSON)");

  // split
  auto* split_cmd = app.add_subcommand("split", "Write one train/val/test split");
  std::string split_dataset, split_out, split_config;
  std::uint64_t split_seed = 0;
  split_cmd->add_option("--dataset", split_dataset, "Dataset id or edge list")
      ->required();
  split_cmd->add_option("--seed", split_seed, "Split seed")->required();
  split_cmd->add_option("--out", split_out, "Split output path")->required();
  split_cmd->add_option("--config", split_config,
                        "Benchmark config supplying ratios and datasets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*bench) {
      BenchmarkConfig config = config_or_default(bench_config, registry_path);
      if (bench_runs) config.runs = *bench_runs;
      if (bench_seed) config.base_seed = *bench_seed;
      if (!bench_datasets.empty()) {
        std::vector<DatasetSpec> chosen;
        for (const auto& id : bench_datasets) {
          chosen.push_back(resolve_dataset(config, id));
        }
        config.datasets = std::move(chosen);
      }
      if (!bench_methods.empty()) {
        config.scorers.clear();
        for (const auto& m : bench_methods) {
          auto kind = parse_scorer_kind(m);
          if (!kind) throw ConfigError("unknown method '" + m + "'");
          config.scorers.push_back(*kind);
        }
      }
      if (!bench_out.empty()) config.output_dir = bench_out;
      if (config.output_dir.empty()) config.output_dir = "results";
      const auto result = run_benchmark(config);
      std::cout << format_summary_table(result.summary);
      std::cout << "wrote " << (config.output_dir / "runs.csv").string()
                << " and " << (config.output_dir / "summary.csv").string()
                << '\n';
    } else if (*gen) {
      const LoadedGraph g = with_default_ids(generate(gen_spec));
      std::ofstream out(gen_out);
      if (!out) throw IoError("cannot write " + gen_out);
      out << "# " << gen_spec.model << " left=" << gen_spec.n_left
          << " right=" << gen_spec.n_right << " seed=" << gen_spec.seed << '\n';
      write_edge_list(out, g);
      std::cout << "wrote " << g.graph.num_edges() << " edges to " << gen_out
                << '\n';
    } else if (*diag) {
      const BenchmarkConfig config = config_or_default(diag_config, registry_path);
      const LoadedGraph g = load_dataset(resolve_dataset(config, diag_dataset));
      std::cout << "dataset " << diag_dataset << ": "
                << g.graph.num_nodes() << " nodes, " << g.graph.num_edges()
                << " edges\n";
      std::cout << format_diagnostics(diagnose(g.graph, config));
    } else if (*split_cmd) {
      const BenchmarkConfig config =
          config_or_default(split_config, registry_path);
      const LoadedGraph g = load_dataset(resolve_dataset(config, split_dataset));
      const EdgeSplit s = split_edges(g.graph, config.ratios, split_seed);
      std::ofstream out(split_out);
      if (!out) throw IoError("cannot write " + split_out);
      write_split(out, s);
      std::cout << "train " << s.train_edges.size() << ", val "
                << s.val_pos.size() << ", test " << s.test_pos.size() << '\n';
    }
  } catch (const InputError& e) {
    return report_error(e.kind(), e.what(), e.line(), 2);
  } catch (const ConfigError& e) {
    return report_error(e.kind(), e.what(), std::nullopt, 2);
  } catch (const Error& e) {
    return report_error(e.kind(), e.what(), std::nullopt, 1);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), std::nullopt, 1);
  }
  return 0;
}
