#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "n2hp/data_io.hpp"

using namespace n2hp;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = N2HP_SOURCE_DIR;

LoadedGraph parse(const std::string& text) {
  std::istringstream in(text);
  return parse_edge_list(in);
}

std::size_t line_of_error(const std::string& text) {
  try {
    parse(text);
  } catch (const InputError& e) {
    return e.line().value_or(0);
  }
  ADD_FAILURE() << "no error for: " << text;
  return 0;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("n2hp_data_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST(EdgeList, TwoLines) {
  const auto g = parse("u1 v1\nu2 v1\n");
  EXPECT_EQ(g.graph.n_left(), 2u);
  EXPECT_EQ(g.graph.n_right(), 1u);
  EXPECT_EQ(g.graph.num_edges(), 2u);
  EXPECT_EQ(g.left_ids, (std::vector<std::string>{"u1", "u2"}));
  EXPECT_EQ(g.right_ids, (std::vector<std::string>{"v1"}));
}

TEST(EdgeList, DuplicateCounted) {
  const auto g = parse("a x\na x\n");
  EXPECT_EQ(g.graph.num_edges(), 1u);
  EXPECT_EQ(g.duplicates, 1u);
}

TEST(EdgeList, CommentsBlanksAndTabs) {
  const auto g = parse("# header\n\n  a\tx   # trailing\n   \nb x\n");
  EXPECT_EQ(g.graph.num_edges(), 2u);
  EXPECT_EQ(g.graph.n_left(), 2u);
}

TEST(EdgeList, EmptyInput) {
  const auto g = parse("# nothing\n");
  EXPECT_EQ(g.graph.num_nodes(), 0u);
  EXPECT_EQ(g.graph.num_edges(), 0u);
}

TEST(EdgeList, ErrorsCarryLineNumbers) {
  EXPECT_EQ(line_of_error("a x\nx b\n"), 2u);       // x on both sides
  EXPECT_EQ(line_of_error("a x\nb c\nd a\n"), 3u);  // a on both sides
  EXPECT_EQ(line_of_error("a x\n# c\nb b\n"), 3u);  // self-loop
  EXPECT_EQ(line_of_error("a\n"), 1u);
  EXPECT_EQ(line_of_error("a x\na x y\n"), 2u);
}

TEST(EdgeList, FileErrorsNameThePath) {
  const auto dir = scratch_dir("bad");
  const auto path = dir / "bad.txt";
  std::ofstream(path) << "a x\nx a\n";
  try {
    load_edge_list(path);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("bad.txt"), std::string::npos);
  }
  EXPECT_THROW(load_edge_list(dir / "missing.txt"), IoError);
}

TEST(EdgeList, RoundTrip) {
  const auto g = parse("p q\nr q\np s\nt u\n");
  std::stringstream buf;
  write_edge_list(buf, g);
  const auto back = parse_edge_list(buf);
  EXPECT_TRUE(back.graph == g.graph);
  EXPECT_EQ(back.left_ids, g.left_ids);
  EXPECT_EQ(back.right_ids, g.right_ids);
}

TEST(Generators, ErExtremes) {
  EXPECT_EQ(generate_bipartite_er(7, 5, 0.0, 3).num_edges(), 0u);
  EXPECT_EQ(generate_bipartite_er(7, 5, 1.0, 3).num_edges(), 35u);
  EXPECT_THROW(generate_bipartite_er(2, 2, 1.5, 0), ConfigError);
}

TEST(Generators, ErEdgeCountWithinFourSigma) {
  // 10000 Bernoulli(0.05) draws: mean 500, sd sqrt(475) ~ 21.8.
  const double sd = std::sqrt(10000 * 0.05 * 0.95);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = generate_bipartite_er(100, 100, 0.05, seed);
    EXPECT_NEAR(static_cast<double>(g.num_edges()), 500.0, 4 * sd) << seed;
  }
}

TEST(Generators, Deterministic) {
  EXPECT_TRUE(generate_bipartite_er(30, 20, 0.2, 9) ==
              generate_bipartite_er(30, 20, 0.2, 9));
  EXPECT_FALSE(generate_bipartite_er(30, 20, 0.2, 9) ==
               generate_bipartite_er(30, 20, 0.2, 10));
  const auto spec = SbmSpec::balanced(3, 20, 25, 0.5, 0.05);
  EXPECT_TRUE(generate_bipartite_sbm(spec, 4) == generate_bipartite_sbm(spec, 4));
}

TEST(Generators, SbmBlockDensities) {
  const auto spec = SbmSpec::balanced(4, 100, 100, 0.2, 0.01);
  const auto g = generate_bipartite_sbm(spec, 1);
  std::size_t within = 0, across = 0;
  for (const Edge& e : g.edges()) (e.left / 25 == e.right / 25 ? within : across)++;
  // 2500 within-block pairs, 7500 across.
  EXPECT_NEAR(within, 500.0, 4 * std::sqrt(2500 * 0.2 * 0.8));
  EXPECT_NEAR(across, 75.0, 4 * std::sqrt(7500 * 0.01 * 0.99));
}

TEST(Generators, SbmSingleBlockIsEr) {
  const auto spec = SbmSpec::balanced(1, 15, 12, 0.3, 0.1);
  EXPECT_TRUE(generate_bipartite_sbm(spec, 5) ==
              generate_bipartite_er(15, 12, 0.3, 5));
}

TEST(Generators, SbmDisjointBicliques) {
  const auto spec = SbmSpec::balanced(2, 6, 4, 1.0, 0.0);
  const auto g = generate_bipartite_sbm(spec, 0);
  EXPECT_EQ(g.num_edges(), 3u * 2u * 2u);
  for (std::size_t l = 0; l < 6; ++l)
    for (std::size_t r = 0; r < 4; ++r)
      EXPECT_EQ(g.has_edge(l, r), l / 3 == r / 2);
}

TEST(Generators, SbmRejectsBadSpecs) {
  EXPECT_THROW(SbmSpec::balanced(0, 4, 4, 0.5, 0.1), ConfigError);
  EXPECT_THROW(generate_bipartite_sbm(SbmSpec::balanced(2, 4, 4, 0.1, 0.5), 0),
               ConfigError);
  SbmSpec uneven;
  uneven.left_sizes = {2, 2};
  uneven.right_sizes = {4};
  uneven.p_in = 0.5;
  EXPECT_THROW(generate_bipartite_sbm(uneven, 0), ConfigError);
  GeneratorSpec unknown;
  unknown.model = "ba";
  EXPECT_THROW(generate(unknown), ConfigError);
}

TEST(Registry, ListsPublishedCounts) {
  const auto reg = load_registry(kSource / "data" / "registry.json");
  const std::map<std::string, std::pair<std::size_t, std::size_t>> want = {
      {"gpcr", {318, 635}},
      {"enzyme", {1109, 2926}},
      {"ion_channel", {414, 1476}},
      {"bipartite_pubmed", {16859, 18782}},
      {"bipartite_cora", {1611, 1802}},
      {"bipartite_citeseer", {1123, 1000}},
      {"food_disease_negative", {243, 376}},
      {"food_disease_positive", {175, 207}},
      {"drug", {350, 454}},
      {"southern_women", {32, 89}},
      {"ml100k", {2625, 100000}},
      {"ml1m", {9746, 1000209}},
  };
  std::size_t seen = 0;
  for (const auto& d : reg) {
    auto it = want.find(d.id);
    if (it == want.end()) continue;
    ++seen;
    ASSERT_TRUE(d.path.has_value()) << d.id;
    EXPECT_EQ(d.expected_nodes, it->second.first) << d.id;
    EXPECT_EQ(d.expected_edges, it->second.second) << d.id;
  }
  EXPECT_EQ(seen, want.size());
}

TEST(Registry, SouthernWomenLoads) {
  const auto reg = load_registry(kSource / "data" / "registry.json");
  for (const auto& d : reg) {
    if (d.id != "southern_women") continue;
    const auto g = load_dataset(d);
    EXPECT_EQ(g.graph.n_left(), 18u);
    EXPECT_EQ(g.graph.n_right(), 14u);
    EXPECT_EQ(g.graph.num_edges(), 89u);
    EXPECT_EQ(g.duplicates, 0u);
    return;
  }
  FAIL() << "southern_women missing from registry";
}

TEST(Registry, CountMismatchIsAnInputError) {
  DatasetSpec d;
  d.id = "tiny";
  d.expected_nodes = 3;
  d.expected_edges = 2;
  EXPECT_NO_THROW(validate_counts(d, build_graph(2, 1, {{0, 0}, {1, 0}})));
  EXPECT_THROW(validate_counts(d, build_graph(2, 1, {{0, 0}})), InputError);
  EXPECT_THROW(validate_counts(d, build_graph(2, 2, {{0, 0}, {1, 0}})),
               InputError);
}

TEST(Registry, MalformedEntries) {
  EXPECT_THROW(dataset_from_json(nlohmann::json{{"id", "x"}}, "."), ConfigError);
  EXPECT_THROW(dataset_from_json(nlohmann::json{{"path", "x.txt"}}, "."),
               ConfigError);
  const auto d = dataset_from_json(
      nlohmann::json{{"id", "x"}, {"path", "sub/x.txt"}}, "/base");
  EXPECT_EQ(*d.path, fs::path("/base/sub/x.txt"));
  const auto dir = scratch_dir("registry");
  std::ofstream(dir / "r.json") << "{ not json";
  EXPECT_THROW(load_registry(dir / "r.json"), ConfigError);
  EXPECT_THROW(load_registry(dir / "absent.json"), IoError);
}

TEST(Report, EmptyRecordsGiveHeadersOnly) {
  const auto dir = scratch_dir("empty");
  write_report({}, summarize({}), dir / "runs.csv", dir / "summary.csv");
  EXPECT_EQ(read_lines(dir / "runs.csv"),
            (std::vector<std::string>{"dataset,method,run,seed,auc,ap"}));
  EXPECT_EQ(read_lines(dir / "summary.csv"),
            (std::vector<std::string>{
                "dataset,method,auc_mean,auc_std,ap_mean,ap_std"}));
}

TEST(Report, SingleRecord) {
  MetricReport r;
  r.dataset = "d";
  r.scorer = ScorerKind::N2HP;
  r.run = 0;
  r.seed = 11;
  r.auc = 0.75;
  r.ap = 0.5;
  const std::vector<MetricReport> records = {r};
  const auto dir = scratch_dir("single");
  write_report(records, summarize(records), dir / "runs.csv",
               dir / "summary.csv");
  const auto runs = read_lines(dir / "runs.csv");
  ASSERT_EQ(runs.size(), 2u);
  EXPECT_EQ(runs[1], "d,N2HP,0,11,0.75,0.5");
  const auto summary = read_lines(dir / "summary.csv");
  ASSERT_EQ(summary.size(), 2u);
  EXPECT_EQ(summary[1], "d,N2HP,0.75,0,0.5,0");
}

TEST(Report, FiftyRunStdMatchesTwoPassFormula) {
  std::vector<MetricReport> records;
  std::vector<double> aucs;
  for (int k = 0; k < 50; ++k) {
    MetricReport r;
    r.dataset = "d";
    r.scorer = ScorerKind::LGAE;
    r.run = k;
    r.auc = 0.6 + 0.3 * std::sin(1.7 * k);
    r.ap = 0.5;
    aucs.push_back(r.auc);
    records.push_back(r);
  }
  double mean = 0;
  for (double a : aucs) mean += a;
  mean /= 50;
  double var = 0;
  for (double a : aucs) var += (a - mean) * (a - mean);
  const double sd = std::sqrt(var / 50);

  const auto dir = scratch_dir("fifty");
  write_report(records, summarize(records), dir / "runs.csv",
               dir / "summary.csv");
  const auto summary = read_lines(dir / "summary.csv");
  ASSERT_EQ(summary.size(), 2u);
  std::istringstream row(summary[1]);
  std::vector<std::string> cells;
  for (std::string c; std::getline(row, c, ',');) cells.push_back(c);
  ASSERT_EQ(cells.size(), 6u);
  EXPECT_NEAR(std::stod(cells[2]), mean, 1e-12);
  EXPECT_NEAR(std::stod(cells[3]), sd, 1e-12);
  EXPECT_EQ(read_lines(dir / "runs.csv").size(), 51u);
}

TEST(Report, SummaryTableFormatting) {
  MetricReport r;
  r.dataset = "sw";
  r.scorer = ScorerKind::Katz;
  r.auc = 0.944;
  r.ap = 0.9;
  const std::vector<MetricReport> records = {r};
  const auto table = format_summary_table(summarize(records));
  EXPECT_NE(table.find("94.4+0.00"), std::string::npos) << table;
  EXPECT_NE(table.find("Katz"), std::string::npos);
}
