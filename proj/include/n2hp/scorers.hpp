#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Cholesky>

#include "n2hp/errors.hpp"
#include "n2hp/graph.hpp"
#include "n2hp/model.hpp"

namespace n2hp {

enum class ScorerKind {
  N2HP,
  Method1,
  LGAE,
  GAE,
  PreferentialAttachment,
  Katz,
  CommonNeighbors,
  Jaccard,
  AdamicAdar,
  ResourceAllocation,
};

inline constexpr std::array<ScorerKind, 10> kAllScorers = {
    ScorerKind::N2HP,           ScorerKind::Method1,
    ScorerKind::LGAE,           ScorerKind::GAE,
    ScorerKind::PreferentialAttachment, ScorerKind::Katz,
    ScorerKind::CommonNeighbors, ScorerKind::Jaccard,
    ScorerKind::AdamicAdar,     ScorerKind::ResourceAllocation,
};

inline const char* to_string(ScorerKind kind) {
  switch (kind) {
    case ScorerKind::N2HP: return "N2HP";
    case ScorerKind::Method1: return "Method1";
    case ScorerKind::LGAE: return "LGAE";
    case ScorerKind::GAE: return "GAE";
    case ScorerKind::PreferentialAttachment: return "PreferentialAttachment";
    case ScorerKind::Katz: return "Katz";
    case ScorerKind::CommonNeighbors: return "CommonNeighbors";
    case ScorerKind::Jaccard: return "Jaccard";
    case ScorerKind::AdamicAdar: return "AdamicAdar";
    case ScorerKind::ResourceAllocation: return "ResourceAllocation";
  }
  return "?";
}

// Accepts the canonical names and the usual abbreviations, case-insensitive.
inline std::optional<ScorerKind> parse_scorer_kind(std::string_view text) {
  std::string lower(text);
  for (char& c : lower) c = static_cast<char>(std::tolower(c));
  for (ScorerKind kind : kAllScorers) {
    std::string name = to_string(kind);
    for (char& c : name) c = static_cast<char>(std::tolower(c));
    if (lower == name) return kind;
  }
  if (lower == "pa") return ScorerKind::PreferentialAttachment;
  if (lower == "cn") return ScorerKind::CommonNeighbors;
  if (lower == "jc") return ScorerKind::Jaccard;
  if (lower == "aa") return ScorerKind::AdamicAdar;
  if (lower == "ra") return ScorerKind::ResourceAllocation;
  if (lower == "method-1" || lower == "method_1") return ScorerKind::Method1;
  return std::nullopt;
}

inline bool is_heuristic(ScorerKind kind) {
  switch (kind) {
    case ScorerKind::PreferentialAttachment:
    case ScorerKind::CommonNeighbors:
    case ScorerKind::Jaccard:
    case ScorerKind::AdamicAdar:
    case ScorerKind::ResourceAllocation:
      return true;
    default:
      return false;
  }
}

// Scorers backed by a trained autoencoder.
inline bool is_learned(ScorerKind kind) {
  return kind == ScorerKind::N2HP || kind == ScorerKind::Method1 ||
         kind == ScorerKind::LGAE || kind == ScorerKind::GAE;
}

struct PairScores {
  std::vector<NodePair> pairs;
  std::vector<double> scores;
  ScorerKind scorer = ScorerKind::N2HP;
};

// Dense materializes the n x n reconstruction once; Lazy evaluates rows on
// the fly per pair. Auto picks Dense up to the model's dense_threshold.
enum class Evaluation { Auto, Dense, Lazy };

namespace detail {

inline void check_pairs(std::span<const NodePair> pairs, std::size_t n) {
  for (const NodePair& p : pairs) {
    if (p.u >= n || p.v >= n) {
      throw DimensionError("pair (" + std::to_string(p.u) + ", " +
                           std::to_string(p.v) + ") out of range for " +
                           std::to_string(n) + " nodes");
    }
  }
}

inline bool use_dense(Evaluation mode, std::size_t n, std::size_t threshold) {
  return mode == Evaluation::Dense ||
         (mode == Evaluation::Auto && n <= threshold);
}

// sigmoid(Z Z^T)
inline DenseMatrix reconstruct(const DenseMatrix& z) {
  DenseMatrix logits = z * z.transpose();
  return logits.unaryExpr([](double x) { return sigmoid(x); });
}

// Row `u` of sigmoid(Z Z^T).
inline Eigen::VectorXd reconstructed_row(const DenseMatrix& z, std::size_t u) {
  Eigen::VectorXd logits = z * z.row(u).transpose();
  return logits.unaryExpr([](double x) { return sigmoid(x); });
}

}  // namespace detail

// score(u, v) = ((A~ A1)_uv + (A~ A1)_vu) / 2 with A1 = sigmoid(Z Z^T).
// No final squashing is applied.
inline PairScores n2hp_score(const EmbeddingModel& model,
                             const NormalizedAdjacency& adj,
                             std::span<const NodePair> pairs,
                             Evaluation mode = Evaluation::Auto) {
  const std::size_t n = adj.dim();
  if (model.num_nodes() != n) {
    throw DimensionError("model has " + std::to_string(model.num_nodes()) +
                         " nodes, graph has " + std::to_string(n));
  }
  detail::check_pairs(pairs, n);
  PairScores out{{pairs.begin(), pairs.end()}, {}, ScorerKind::N2HP};
  out.scores.reserve(pairs.size());
  if (pairs.empty()) return out;

  if (detail::use_dense(mode, n, model.config.dense_threshold)) {
    const DenseMatrix two_hop =
        sparse_dense_product(adj, detail::reconstruct(model.z));
    for (const NodePair& p : pairs) {
      out.scores.push_back(0.5 * (two_hop(p.u, p.v) + two_hop(p.v, p.u)));
    }
    return out;
  }

  const SparseSymMatrix& a = adj.matrix;
  auto half = [&](std::size_t from, std::size_t to) {
    auto cols = a.row_cols(from);
    auto vals = a.row_values(from);
    double s = 0.0;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      s += vals[k] * decode_pair(model.z, cols[k], to);
    }
    return s;
  };
  for (const NodePair& p : pairs) {
    out.scores.push_back(0.5 * (half(p.u, p.v) + half(p.v, p.u)));
  }
  return out;
}

// Ablation: (A1 A1)_uv, reconstructed connectivity on both hops.
inline PairScores method1_score(const EmbeddingModel& model,
                                std::span<const NodePair> pairs,
                                Evaluation mode = Evaluation::Auto) {
  const std::size_t n = model.num_nodes();
  detail::check_pairs(pairs, n);
  PairScores out{{pairs.begin(), pairs.end()}, {}, ScorerKind::Method1};
  out.scores.reserve(pairs.size());
  if (pairs.empty()) return out;

  if (detail::use_dense(mode, n, model.config.dense_threshold)) {
    const DenseMatrix a1 = detail::reconstruct(model.z);
    for (const NodePair& p : pairs) {
      out.scores.push_back(a1.row(p.u).dot(a1.row(p.v)));
    }
    return out;
  }
  for (const NodePair& p : pairs) {
    out.scores.push_back(detail::reconstructed_row(model.z, p.u)
                             .dot(detail::reconstructed_row(model.z, p.v)));
  }
  return out;
}

// Direct decoding, sigmoid(z_u . z_v). Labelled with the model's kind.
inline PairScores decode_score(const EmbeddingModel& model,
                               std::span<const NodePair> pairs) {
  detail::check_pairs(pairs, model.num_nodes());
  PairScores out{{pairs.begin(), pairs.end()},
                 {},
                 model.kind == ModelKind::LGAE ? ScorerKind::LGAE
                                               : ScorerKind::GAE};
  out.scores.reserve(pairs.size());
  for (const NodePair& p : pairs) {
    out.scores.push_back(decode_pair(model.z, p.u, p.v));
  }
  return out;
}

// Neighborhood indices adapted to bipartite graphs. For a Left node u and a
// Right node v the candidate intermediates are
//   C(u, v) = N(u) & N2(v),  N2(v) = (union of N(a), a in N(v) \ {u}) \ {v},
// i.e. the Right-side nodes b on some simple length-3 path u - b - a - v.
// Excluding u only matters when (u, v) is itself a training edge.
// Pairs are canonicalized to (Left, Right), so scores are symmetric.
class HeuristicScorer {
 public:
  explicit HeuristicScorer(const BipartiteGraph& g)
      : g_(g), mark_(g.num_nodes(), 0) {}

  double score(ScorerKind kind, std::size_t u, std::size_t v) {
    if (u >= g_.num_nodes() || v >= g_.num_nodes()) {
      throw DimensionError("pair out of range");
    }
    if (g_.partition(u) == g_.partition(v)) {
      throw InputError("heuristic scorers need a Left x Right pair, got (" +
                       std::to_string(u) + ", " + std::to_string(v) + ")");
    }
    if (g_.partition(u) == Partition::Right) std::swap(u, v);

    switch (kind) {
      case ScorerKind::PreferentialAttachment:
        return static_cast<double>(g_.degree(u)) *
               static_cast<double>(g_.degree(v));
      case ScorerKind::CommonNeighbors:
      case ScorerKind::Jaccard:
      case ScorerKind::AdamicAdar:
      case ScorerKind::ResourceAllocation:
        break;
      default:
        throw InputError(std::string(to_string(kind)) +
                         " is not a neighborhood heuristic");
    }

    touched_.clear();
    for (std::size_t a : g_.neighbors(v)) {
      if (a == u) continue;  // u - b - u - v is a walk, not a path
      for (std::size_t b : g_.neighbors(a)) {
        if (b != v && !mark_[b]) {
          mark_[b] = 1;
          touched_.push_back(b);
        }
      }
    }
    std::size_t common = 0;
    double adamic_adar = 0.0;
    double resource = 0.0;
    for (std::size_t b : g_.neighbors(u)) {
      if (!mark_[b]) continue;
      ++common;
      const auto deg = static_cast<double>(g_.degree(b));
      if (g_.degree(b) >= 2) adamic_adar += 1.0 / std::log(deg);
      resource += 1.0 / deg;
    }
    const std::size_t union_size =
        g_.degree(u) + touched_.size() - common;
    for (std::size_t b : touched_) mark_[b] = 0;

    switch (kind) {
      case ScorerKind::CommonNeighbors:
        return static_cast<double>(common);
      case ScorerKind::Jaccard:
        return union_size == 0 ? 0.0
                               : static_cast<double>(common) /
                                     static_cast<double>(union_size);
      case ScorerKind::AdamicAdar:
        return adamic_adar;
      default:
        return resource;
    }
  }

 private:
  const BipartiteGraph& g_;
  std::vector<char> mark_;
  std::vector<std::size_t> touched_;
};

inline double heuristic_score(const BipartiteGraph& g_train, ScorerKind kind,
                              std::size_t u, std::size_t v) {
  HeuristicScorer scorer(g_train);
  return scorer.score(kind, u, v);
}

inline PairScores heuristic_scores(const BipartiteGraph& g_train,
                                   ScorerKind kind,
                                   std::span<const NodePair> pairs) {
  HeuristicScorer scorer(g_train);
  PairScores out{{pairs.begin(), pairs.end()}, {}, kind};
  out.scores.reserve(pairs.size());
  for (const NodePair& p : pairs) out.scores.push_back(scorer.score(kind, p.u, p.v));
  return out;
}

enum class KatzMode { Auto, ClosedForm, Series };

struct KatzOptions {
  KatzMode mode = KatzMode::Auto;
  std::size_t series_terms = 5;
  std::size_t dense_threshold = 4096;
};

// S = (I - beta A)^{-1} - I. The closed form needs I - beta A positive
// definite, which for a symmetric A is exactly beta < 1 / lambda_max; the
// series form sum_{l=1..L} beta^l A^l has no such restriction.
inline PairScores katz_score(const SparseSymMatrix& a, double beta,
                             std::span<const NodePair> pairs,
                             const KatzOptions& options = {}) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw ConfigError("Katz beta must be positive");
  }
  const std::size_t n = a.dim();
  detail::check_pairs(pairs, n);
  PairScores out{{pairs.begin(), pairs.end()},
                 std::vector<double>(pairs.size(), 0.0),
                 ScorerKind::Katz};
  if (pairs.empty()) return out;

  const bool closed = options.mode == KatzMode::ClosedForm ||
                      (options.mode == KatzMode::Auto &&
                       n <= options.dense_threshold);
  if (closed) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      auto cols = a.row_cols(i);
      auto vals = a.row_values(i);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        m(i, cols[k]) -= beta * vals[k];
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) {
      throw ConfigError("Katz beta " + std::to_string(beta) +
                        " is not below 1 / spectral radius; use series mode");
    }
    const Eigen::MatrixXd inverse =
        llt.solve(Eigen::MatrixXd::Identity(n, n));
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const NodePair& p = pairs[k];
      out.scores[k] = inverse(p.u, p.v) - (p.u == p.v ? 1.0 : 0.0);
    }
    return out;
  }

  // Series: one walk expansion per distinct column node.
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return pairs[x].v < pairs[y].v;
  });
  Eigen::VectorXd walk(n), next(n), acc(n);
  for (std::size_t start = 0; start < order.size();) {
    const std::size_t v = pairs[order[start]].v;
    walk.setZero();
    walk(v) = 1.0;
    acc.setZero();
    for (std::size_t l = 0; l < options.series_terms; ++l) {
      next.setZero();
      for (std::size_t i = 0; i < n; ++i) {
        auto cols = a.row_cols(i);
        auto vals = a.row_values(i);
        double s = 0.0;
        for (std::size_t k = 0; k < cols.size(); ++k) s += vals[k] * walk(cols[k]);
        next(i) = beta * s;
      }
      walk.swap(next);
      acc += walk;
    }
    std::size_t end = start;
    while (end < order.size() && pairs[order[end]].v == v) {
      out.scores[order[end]] = acc(pairs[order[end]].u);
      ++end;
    }
    start = end;
  }
  return out;
}

// CSV with header `u,v,score,scorer,label`; `labels` parallels the pairs.
inline void write_scores_csv(std::ostream& out, const PairScores& scores,
                             std::span<const int> labels) {
  if (labels.size() != scores.pairs.size()) {
    throw DimensionError("labels and pairs differ in length");
  }
  out << "u,v,score,scorer,label\n";
  const auto precision = out.precision(17);
  for (std::size_t k = 0; k < scores.pairs.size(); ++k) {
    out << scores.pairs[k].u << ',' << scores.pairs[k].v << ','
        << scores.scores[k] << ',' << to_string(scores.scorer) << ','
        << labels[k] << '\n';
  }
  out.precision(precision);
}

}  // namespace n2hp
