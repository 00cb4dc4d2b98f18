#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "n2hp/errors.hpp"
#include "n2hp/graph.hpp"
#include "n2hp/rng.hpp"

namespace n2hp {

struct SplitRatios {
  double train = 0.85;
  double val = 0.05;
  double test = 0.10;

  void validate() const {
    if (!(train > 0 && val > 0 && test > 0)) {
      throw ConfigError("split ratios must be positive");
    }
    if (std::abs(train + val + test - 1.0) > 1e-9) {
      throw ConfigError("split ratios must sum to 1");
    }
  }
};

// One experimental run's partition of the edge set plus sampled negatives.
// All pairs are in partition-local coordinates.
struct EdgeSplit {
  std::vector<Edge> train_edges;
  std::vector<Edge> val_pos;
  std::vector<Edge> test_pos;
  std::vector<Edge> val_neg;
  std::vector<Edge> test_neg;
  std::uint64_t seed = 0;

  friend bool operator==(const EdgeSplit&, const EdgeSplit&) = default;
};

namespace detail {

inline std::uint64_t pair_key(const Edge& e, std::size_t n_right) {
  return static_cast<std::uint64_t>(e.left) * n_right + e.right;
}

// round(fraction * m) with halves rounded up. The epsilon absorbs the
// representation error of products such as 0.1 * 635.
inline std::size_t round_half_up(double fraction, std::size_t m) {
  return static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(m) + 0.5 + 1e-9));
}

}  // namespace detail

// Draws `count` distinct Left x Right pairs that are neither edges of `g`
// nor members of `exclude`.
inline std::vector<Edge> sample_negatives(const BipartiteGraph& g,
                                          std::size_t count,
                                          const std::vector<Edge>& exclude,
                                          std::uint64_t seed,
                                          std::uint64_t stream = 0) {
  if (count == 0) return {};
  const std::size_t n_right = g.n_right();
  const std::uint64_t total =
      static_cast<std::uint64_t>(g.n_left()) * g.n_right();
  std::unordered_set<std::uint64_t> excluded;
  for (const Edge& e : exclude) {
    if (e.left < g.n_left() && e.right < n_right &&
        !g.has_edge(e.left, e.right)) {
      excluded.insert(detail::pair_key(e, n_right));
    }
  }
  const std::uint64_t non_edges = total - g.num_edges();
  const std::uint64_t available = non_edges - excluded.size();
  if (count > available) {
    throw InfeasibleError("cannot sample " + std::to_string(count) +
                          " negative pairs; only " +
                          std::to_string(available) + " non-edges available");
  }

  CounterRng rng(seed, stream);
  std::vector<Edge> out;
  out.reserve(count);
  const double non_edge_density =
      static_cast<double>(non_edges) / static_cast<double>(total);
  if (non_edge_density < 0.05 || 2 * count > available) {
    // Sparse candidate pool: enumerate and take a shuffled prefix.
    std::vector<Edge> candidates;
    candidates.reserve(available);
    for (std::size_t l = 0; l < g.n_left(); ++l) {
      for (std::size_t r = 0; r < n_right; ++r) {
        const Edge e{l, r};
        if (!g.has_edge(l, r) &&
            !excluded.contains(detail::pair_key(e, n_right))) {
          candidates.push_back(e);
        }
      }
    }
    for (std::size_t i = 0; i < count; ++i) {
      const auto j = i + static_cast<std::size_t>(
                             rng.below(candidates.size() - i));
      std::swap(candidates[i], candidates[j]);
      out.push_back(candidates[i]);
    }
    return out;
  }

  std::unordered_set<std::uint64_t> chosen;
  while (out.size() < count) {
    const Edge e{static_cast<std::size_t>(rng.below(g.n_left())),
                 static_cast<std::size_t>(rng.below(n_right))};
    const std::uint64_t key = detail::pair_key(e, n_right);
    if (g.has_edge(e.left, e.right) || excluded.contains(key) ||
        !chosen.insert(key).second) {
      continue;
    }
    out.push_back(e);
  }
  return out;
}

// Shuffles the edge set with the seeded stream, then carves off test and
// validation prefixes; the remainder is the training set.
inline EdgeSplit split_edges(const BipartiteGraph& g, const SplitRatios& ratios,
                             std::uint64_t seed) {
  ratios.validate();
  const std::size_t m = g.num_edges();
  if (m < 3) {
    throw InfeasibleError("graph has " + std::to_string(m) +
                          " edges; at least 3 are needed to split");
  }
  const std::size_t n_test = detail::round_half_up(ratios.test, m);
  const std::size_t n_val = detail::round_half_up(ratios.val, m);
  if (n_test == 0 || n_val == 0 || n_test + n_val >= m) {
    throw InfeasibleError("graph with " + std::to_string(m) +
                          " edges is too small to give every split part an "
                          "edge");
  }

  std::vector<Edge> shuffled = g.edges();
  CounterRng rng(seed, rng_stream::kSplitShuffle);
  rng.shuffle(shuffled);

  EdgeSplit split;
  split.seed = seed;
  split.test_pos.assign(shuffled.begin(), shuffled.begin() + n_test);
  split.val_pos.assign(shuffled.begin() + n_test,
                       shuffled.begin() + n_test + n_val);
  split.train_edges.assign(shuffled.begin() + n_test + n_val, shuffled.end());
  std::sort(split.train_edges.begin(), split.train_edges.end());

  split.val_neg = sample_negatives(g, n_val, {}, seed, rng_stream::kValNegatives);
  split.test_neg =
      sample_negatives(g, n_test, split.val_neg, seed, rng_stream::kTestNegatives);
  return split;
}

inline BipartiteGraph train_graph(const BipartiteGraph& g,
                                  const EdgeSplit& split) {
  return build_graph(g.n_left(), g.n_right(), split.train_edges);
}

// Text form: a `#n2hp-split 1` line, `#seed <s>`, then sections headed
// `#train`, `#val_pos`, `#val_neg`, `#test_pos`, `#test_neg`, each followed by
// one "left right" pair per line.
inline void write_split(std::ostream& out, const EdgeSplit& split) {
  out << "#n2hp-split 1\n#seed " << split.seed << '\n';
  auto section = [&](const char* name, const std::vector<Edge>& pairs) {
    out << '#' << name << '\n';
    for (const Edge& e : pairs) out << e.left << ' ' << e.right << '\n';
  };
  section("train", split.train_edges);
  section("val_pos", split.val_pos);
  section("val_neg", split.val_neg);
  section("test_pos", split.test_pos);
  section("test_neg", split.test_neg);
}

inline EdgeSplit read_split(std::istream& in) {
  EdgeSplit split;
  std::vector<Edge>* current = nullptr;
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream header(line.substr(1));
      std::string tag;
      header >> tag;
      if (tag == "n2hp-split") {
        int version = 0;
        header >> version;
        if (version != 1) {
          throw InputError("unsupported split version", line_no);
        }
        saw_header = true;
      } else if (tag == "seed") {
        if (!(header >> split.seed)) throw InputError("bad seed", line_no);
      } else if (tag == "train") {
        current = &split.train_edges;
      } else if (tag == "val_pos") {
        current = &split.val_pos;
      } else if (tag == "val_neg") {
        current = &split.val_neg;
      } else if (tag == "test_pos") {
        current = &split.test_pos;
      } else if (tag == "test_neg") {
        current = &split.test_neg;
      } else {
        throw InputError("unknown section '" + tag + "'", line_no);
      }
      continue;
    }
    if (!saw_header || current == nullptr) {
      throw InputError("pair outside of a section", line_no);
    }
    std::istringstream fields(line);
    Edge e;
    std::string extra;
    if (!(fields >> e.left >> e.right) || (fields >> extra)) {
      throw InputError("expected two indices", line_no);
    }
    current->push_back(e);
  }
  if (!saw_header) throw InputError("missing #n2hp-split header");
  return split;
}

}  // namespace n2hp
