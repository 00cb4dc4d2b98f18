#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "n2hp/errors.hpp"
#include "n2hp/graph.hpp"
#include "n2hp/rng.hpp"

namespace n2hp {

enum class ModelKind { LGAE, GAE };

inline const char* to_string(ModelKind kind) {
  return kind == ModelKind::LGAE ? "LGAE" : "GAE";
}

struct TrainConfig {
  ModelKind kind = ModelKind::LGAE;
  std::size_t embed_dim = 16;
  std::size_t hidden_dim = 32;  // GAE only
  double learning_rate = 0.01;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
  // Above this node count the n x n residual is streamed in row blocks.
  std::size_t dense_threshold = 4096;

  // A learning rate of exactly zero is accepted so that grids can carry a
  // "no training" reference point.
  void validate() const {
    if (embed_dim < 1) throw ConfigError("embed_dim must be >= 1");
    if (kind == ModelKind::GAE && hidden_dim < 1) {
      throw ConfigError("hidden_dim must be >= 1");
    }
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
      throw ConfigError("learning_rate must be finite and positive");
    }
  }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Class-imbalance reweighting of the reconstruction loss.
struct LossWeights {
  double pos_weight = 1.0;
  double norm = 1.0;
};

// LGAE: {W}. GAE: {W0, W1}.
using Weights = std::vector<DenseMatrix>;

struct EmbeddingModel {
  ModelKind kind = ModelKind::LGAE;
  TrainConfig config;
  Weights weights;
  DenseMatrix z;
  std::vector<double> loss_history;

  std::size_t num_nodes() const { return static_cast<std::size_t>(z.rows()); }
};

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow or log(0).
inline double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

// n / s: label-matrix size and number of positive labels.
inline LossWeights loss_weights(std::size_t n, std::size_t s) {
  const double total = static_cast<double>(n) * static_cast<double>(n);
  const double pos = static_cast<double>(s);
  if (s == 0 || pos >= total) {
    throw InputError("degenerate label matrix: " + std::to_string(s) +
                     " positives out of " + std::to_string(n) + "^2 pairs");
  }
  return {(total - pos) / pos, total / (2.0 * (total - pos))};
}

// Reconstruction targets A + I.
inline SparseSymMatrix reconstruction_labels(const SparseSymMatrix& a) {
  std::vector<std::vector<SparseSymMatrix::Entry>> rows(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) {
    auto cols = a.row_cols(i);
    auto vals = a.row_values(i);
    bool diagonal = false;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (cols[k] == i) {
        diagonal = true;
        rows[i].push_back({i, 1.0});
      } else {
        rows[i].push_back({cols[k], vals[k]});
      }
    }
    if (!diagonal) rows[i].push_back({i, 1.0});
  }
  return SparseSymMatrix::from_rows(std::move(rows));
}

inline LossWeights loss_weights(const SparseSymMatrix& labels) {
  return loss_weights(labels.dim(),
                      static_cast<std::size_t>(std::llround(labels.sum())));
}

// Z = A~ W (the feature matrix is the identity).
inline DenseMatrix lgae_forward(const NormalizedAdjacency& adj,
                                const DenseMatrix& w) {
  if (static_cast<std::size_t>(w.rows()) != adj.dim()) {
    throw DimensionError("lgae_forward: W has " + std::to_string(w.rows()) +
                         " rows, graph has " + std::to_string(adj.dim()) +
                         " nodes");
  }
  return sparse_dense_product(adj, w);
}

// Z = A~ relu(A~ W0) W1.
inline DenseMatrix gae_forward(const NormalizedAdjacency& adj,
                               const DenseMatrix& w0, const DenseMatrix& w1) {
  if (static_cast<std::size_t>(w0.rows()) != adj.dim() ||
      w0.cols() != w1.rows()) {
    throw DimensionError("gae_forward: incompatible weight shapes");
  }
  DenseMatrix hidden = sparse_dense_product(adj, w0).cwiseMax(0.0);
  return sparse_dense_product(adj, hidden) * w1;
}

inline DenseMatrix forward(ModelKind kind, const NormalizedAdjacency& adj,
                           const Weights& weights) {
  if (kind == ModelKind::LGAE) {
    if (weights.size() != 1) throw DimensionError("LGAE expects one weight");
    return lgae_forward(adj, weights[0]);
  }
  if (weights.size() != 2) throw DimensionError("GAE expects two weights");
  return gae_forward(adj, weights[0], weights[1]);
}

// sigmoid(z_i . z_j)
inline double decode_pair(const DenseMatrix& z, std::size_t i, std::size_t j) {
  return sigmoid(z.row(i).dot(z.row(j)));
}

namespace detail {

struct Residual {
  double loss = 0.0;
  DenseMatrix dz;  // dL/dZ
};

// Weighted cross-entropy over all n^2 logits z_i . z_j and its gradient with
// respect to Z, evaluated `block_rows` rows at a time (0 = one block).
// Row sums are reduced in row order, so the result does not depend on how
// the work is scheduled.
inline Residual residual(const DenseMatrix& z, const SparseSymMatrix& labels,
                         const LossWeights& lw, std::size_t block_rows,
                         bool want_gradient) {
  const auto n = static_cast<std::size_t>(z.rows());
  if (labels.dim() != n) {
    throw DimensionError("labels are " + std::to_string(labels.dim()) +
                         "x" + std::to_string(labels.dim()) +
                         " but Z has " + std::to_string(n) + " rows");
  }
  if (block_rows == 0 || block_rows > n) block_rows = n;
  const double scale = lw.norm / (static_cast<double>(n) * n);

  Residual out;
  if (want_gradient) out.dz = DenseMatrix::Zero(z.rows(), z.cols());
  double total = 0.0;
  for (std::size_t r0 = 0; r0 < n; r0 += block_rows) {
    const std::size_t rb = std::min(block_rows, n - r0);
    DenseMatrix g = z.middleRows(r0, rb) * z.transpose();
    for (std::size_t i = 0; i < rb; ++i) {
      auto cols = labels.row_cols(r0 + i);
      auto vals = labels.row_values(r0 + i);
      std::size_t k = 0;
      double row_loss = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        double y = 0.0;
        if (k < cols.size() && cols[k] == j) y = vals[k++];
        const double x = g(i, j);
        row_loss += lw.pos_weight * y * softplus(-x) + (1.0 - y) * softplus(x);
        g(i, j) = scale * (-lw.pos_weight * y * sigmoid(-x) +
                           (1.0 - y) * sigmoid(x));
      }
      total += row_loss;
    }
    // The residual is symmetric, so d/dZ of sum_ij l(z_i . z_j) is 2 G Z.
    if (want_gradient) out.dz.middleRows(r0, rb).noalias() = 2.0 * g * z;
  }
  out.loss = scale * total;
  return out;
}

inline std::size_t block_rows_for(std::size_t n, std::size_t dense_threshold) {
  constexpr std::size_t kStreamBlockRows = 512;
  return n > dense_threshold ? kStreamBlockRows : 0;
}

}  // namespace detail

// norm * mean_ij [pos_weight * y * softplus(-x) + (1 - y) * softplus(x)],
// x = z_i . z_j.
inline double reconstruction_loss(const DenseMatrix& z,
                                  const SparseSymMatrix& labels,
                                  const LossWeights& lw,
                                  std::size_t block_rows = 0) {
  return detail::residual(z, labels, lw, block_rows, false).loss;
}

struct LossAndGradient {
  double loss = 0.0;
  Weights gradient;
};

// Loss and analytic gradient with respect to every weight matrix.
inline LossAndGradient loss_and_gradient(ModelKind kind, const Weights& weights,
                                         const NormalizedAdjacency& adj,
                                         const SparseSymMatrix& labels,
                                         const LossWeights& lw,
                                         std::size_t block_rows = 0) {
  LossAndGradient out;
  if (kind == ModelKind::LGAE) {
    DenseMatrix z = forward(kind, adj, weights);
    auto r = detail::residual(z, labels, lw, block_rows, true);
    out.loss = r.loss;
    out.gradient.push_back(sparse_dense_product(adj, r.dz));
    return out;
  }
  if (weights.size() != 2) throw DimensionError("GAE expects two weights");
  const DenseMatrix& w0 = weights[0];
  const DenseMatrix& w1 = weights[1];
  if (static_cast<std::size_t>(w0.rows()) != adj.dim() ||
      w0.cols() != w1.rows()) {
    throw DimensionError("GAE: incompatible weight shapes");
  }
  DenseMatrix pre = sparse_dense_product(adj, w0);
  DenseMatrix hidden = pre.cwiseMax(0.0);
  DenseMatrix mixed = sparse_dense_product(adj, hidden);
  DenseMatrix z = mixed * w1;
  auto r = detail::residual(z, labels, lw, block_rows, true);
  out.loss = r.loss;

  DenseMatrix d_w1 = mixed.transpose() * r.dz;
  DenseMatrix d_hidden = sparse_dense_product(adj, r.dz * w1.transpose());
  DenseMatrix d_pre =
      (pre.array() > 0.0).select(d_hidden.array(), 0.0).matrix();
  out.gradient.push_back(sparse_dense_product(adj, d_pre));
  out.gradient.push_back(std::move(d_w1));
  return out;
}

inline Weights loss_gradient(ModelKind kind, const Weights& weights,
                             const NormalizedAdjacency& adj,
                             const SparseSymMatrix& labels,
                             const LossWeights& lw,
                             std::size_t block_rows = 0) {
  return loss_and_gradient(kind, weights, adj, labels, lw, block_rows)
      .gradient;
}

// Adam with bias correction.
class Adam {
 public:
  explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-8)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

  void step(Weights& params, const Weights& grads) {
    if (m_.empty()) {
      for (const auto& p : params) {
        m_.push_back(DenseMatrix::Zero(p.rows(), p.cols()));
        v_.push_back(DenseMatrix::Zero(p.rows(), p.cols()));
      }
    }
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
      m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * grads[k];
      v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * grads[k].cwiseProduct(grads[k]);
      params[k].array() -=
          lr_ * (m_[k].array() / c1) / ((v_[k].array() / c2).sqrt() + eps_);
    }
  }

  std::size_t steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  Weights m_, v_;
  std::size_t t_ = 0;
};

// Glorot-uniform initialization, +-sqrt(6 / (fan_in + fan_out)).
inline Weights init_weights(std::size_t n, const TrainConfig& config) {
  CounterRng rng(config.seed, rng_stream::kWeightInit);
  auto glorot = [&](std::size_t rows, std::size_t cols) {
    const double range = std::sqrt(6.0 / static_cast<double>(rows + cols));
    DenseMatrix w(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) w(i, j) = rng.uniform(-range, range);
    }
    return w;
  };
  Weights weights;
  if (config.kind == ModelKind::LGAE) {
    weights.push_back(glorot(n, config.embed_dim));
  } else {
    weights.push_back(glorot(n, config.hidden_dim));
    weights.push_back(glorot(config.hidden_dim, config.embed_dim));
  }
  return weights;
}

// Full-batch Adam for `config.epochs` steps. loss_history[e] is the loss
// evaluated before step e.
inline EmbeddingModel train(const NormalizedAdjacency& adj,
                            const SparseSymMatrix& labels,
                            const TrainConfig& config) {
  config.validate();
  const std::size_t n = adj.dim();
  const LossWeights lw = loss_weights(labels);
  const std::size_t block_rows = detail::block_rows_for(n, config.dense_threshold);

  EmbeddingModel model;
  model.kind = config.kind;
  model.config = config;
  model.weights = init_weights(n, config);
  model.loss_history.reserve(config.epochs);
  Adam adam(config.learning_rate);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    auto lg = loss_and_gradient(config.kind, model.weights, adj, labels, lw,
                                block_rows);
    if (!std::isfinite(lg.loss)) {
      throw TrainingError("non-finite loss", epoch);
    }
    for (const auto& g : lg.gradient) {
      if (!g.allFinite()) throw TrainingError("non-finite gradient", epoch);
    }
    model.loss_history.push_back(lg.loss);
    adam.step(model.weights, lg.gradient);
  }
  model.z = forward(config.kind, adj, model.weights);
  if (!model.z.allFinite()) {
    throw TrainingError("non-finite embedding", config.epochs);
  }
  return model;
}

// Checkpoint layout (text, version 1). Reals are C99 hex floats so values
// round-trip bit for bit.
//
//   n2hp-model 1
//   kind LGAE|GAE
//   embed_dim <d>  hidden_dim <h>  learning_rate <x>  epochs <e>
//   seed <s>  dense_threshold <t>          (one key per line)
//   loss_history <count>   followed by one value per line
//   matrix <name> <rows> <cols>   followed by one row per line
//     (names: W for LGAE, W0 and W1 for GAE, then Z)
//   end
inline void save_model(std::ostream& out, const EmbeddingModel& model) {
  auto real = [](double x) {
    std::ostringstream s;
    s << std::hexfloat << x;
    return s.str();
  };
  const TrainConfig& c = model.config;
  out << "n2hp-model 1\n"
      << "kind " << to_string(model.kind) << '\n'
      << "embed_dim " << c.embed_dim << '\n'
      << "hidden_dim " << c.hidden_dim << '\n'
      << "learning_rate " << real(c.learning_rate) << '\n'
      << "epochs " << c.epochs << '\n'
      << "seed " << c.seed << '\n'
      << "dense_threshold " << c.dense_threshold << '\n'
      << "loss_history " << model.loss_history.size() << '\n';
  for (double x : model.loss_history) out << real(x) << '\n';
  auto matrix = [&](const char* name, const DenseMatrix& m) {
    out << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (j) out << ' ';
        out << real(m(i, j));
      }
      out << '\n';
    }
  };
  if (model.kind == ModelKind::LGAE) {
    matrix("W", model.weights.at(0));
  } else {
    matrix("W0", model.weights.at(0));
    matrix("W1", model.weights.at(1));
  }
  matrix("Z", model.z);
  out << "end\n";
}

inline EmbeddingModel load_model(std::istream& in) {
  std::size_t line_no = 0;
  std::string line;
  auto next_line = [&]() -> std::istringstream {
    if (!std::getline(in, line)) {
      throw InputError("unexpected end of model file", line_no + 1);
    }
    ++line_no;
    return std::istringstream(line);
  };
  auto parse_real = [&](const std::string& token) {
    char* end = nullptr;
    const double x = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') {
      throw InputError("bad real '" + token + "'", line_no);
    }
    return x;
  };
  auto keyed = [&](const char* key) {
    auto s = next_line();
    std::string k, v;
    if (!(s >> k >> v) || k != key) {
      throw InputError(std::string("expected key '") + key + "'", line_no);
    }
    return v;
  };
  auto count = [&](const char* key) {
    const std::string v = keyed(key);
    try {
      return static_cast<std::size_t>(std::stoull(v));
    } catch (const std::exception&) {
      throw InputError(std::string("bad count for '") + key + "'", line_no);
    }
  };

  if (keyed("n2hp-model") != "1") {
    throw InputError("unsupported model version", line_no);
  }
  EmbeddingModel model;
  const std::string kind = keyed("kind");
  if (kind == "LGAE") {
    model.kind = ModelKind::LGAE;
  } else if (kind == "GAE") {
    model.kind = ModelKind::GAE;
  } else {
    throw InputError("unknown model kind '" + kind + "'", line_no);
  }
  TrainConfig& c = model.config;
  c.kind = model.kind;
  c.embed_dim = count("embed_dim");
  c.hidden_dim = count("hidden_dim");
  c.learning_rate = parse_real(keyed("learning_rate"));
  c.epochs = count("epochs");
  c.seed = count("seed");
  c.dense_threshold = count("dense_threshold");
  const std::size_t history = count("loss_history");
  for (std::size_t k = 0; k < history; ++k) {
    auto s = next_line();
    std::string token;
    s >> token;
    model.loss_history.push_back(parse_real(token));
  }
  auto matrix = [&](const char* name) {
    auto s = next_line();
    std::string tag, got;
    Eigen::Index rows = 0, cols = 0;
    if (!(s >> tag >> got >> rows >> cols) || tag != "matrix" || got != name) {
      throw InputError(std::string("expected matrix ") + name, line_no);
    }
    DenseMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      auto r = next_line();
      std::string token;
      for (Eigen::Index j = 0; j < cols; ++j) {
        if (!(r >> token)) throw InputError("short matrix row", line_no);
        m(i, j) = parse_real(token);
      }
    }
    return m;
  };
  if (model.kind == ModelKind::LGAE) {
    model.weights.push_back(matrix("W"));
  } else {
    model.weights.push_back(matrix("W0"));
    model.weights.push_back(matrix("W1"));
  }
  model.z = matrix("Z");
  auto s = next_line();
  std::string tag;
  if (!(s >> tag) || tag != "end") throw InputError("missing 'end'", line_no);
  return model;
}

}  // namespace n2hp
