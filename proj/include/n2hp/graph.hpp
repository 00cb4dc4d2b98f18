#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "n2hp/errors.hpp"

namespace n2hp {

// Row-major so that node embeddings are contiguous rows.
using DenseMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Partition { Left, Right };

// An edge in partition-local coordinates: `left` indexes the Left side,
// `right` the Right side.
struct Edge {
  std::size_t left = 0;
  std::size_t right = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// A pair of nodes in global coordinates (Left nodes first, then Right).
struct NodePair {
  std::size_t u = 0;
  std::size_t v = 0;
  friend auto operator<=>(const NodePair&, const NodePair&) = default;
};

// Immutable bipartite graph. Left nodes occupy global indices
// [0, n_left), Right nodes [n_left, n_left + n_right).
class BipartiteGraph {
 public:
  BipartiteGraph() = default;

  std::size_t n_left() const { return n_left_; }
  std::size_t n_right() const { return n_right_; }
  std::size_t num_nodes() const { return n_left_ + n_right_; }
  std::size_t num_edges() const { return edges_.size(); }

  // Sorted by (left, right), duplicate free.
  const std::vector<Edge>& edges() const { return edges_; }

  // Sorted global indices of the neighbors of global node `node`.
  std::span<const std::size_t> neighbors(std::size_t node) const {
    return {adjacent_.data() + offsets_[node],
            offsets_[node + 1] - offsets_[node]};
  }

  std::size_t degree(std::size_t node) const {
    return offsets_[node + 1] - offsets_[node];
  }

  Partition partition(std::size_t node) const {
    return node < n_left_ ? Partition::Left : Partition::Right;
  }

  std::size_t left_node(std::size_t local) const { return local; }
  std::size_t right_node(std::size_t local) const { return n_left_ + local; }

  NodePair to_pair(const Edge& e) const {
    return {left_node(e.left), right_node(e.right)};
  }

  bool has_edge(std::size_t left, std::size_t right) const {
    if (left >= n_left_ || right >= n_right_) return false;
    auto nbrs = neighbors(left);
    return std::binary_search(nbrs.begin(), nbrs.end(), right_node(right));
  }

  friend bool operator==(const BipartiteGraph& a, const BipartiteGraph& b) {
    return a.n_left_ == b.n_left_ && a.n_right_ == b.n_right_ &&
           a.edges_ == b.edges_;
  }

  friend BipartiteGraph build_graph(std::size_t n_left, std::size_t n_right,
                                    std::span<const Edge> edge_pairs);

 private:
  std::size_t n_left_ = 0;
  std::size_t n_right_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_ = {0};
  std::vector<std::size_t> adjacent_;
};

// Validates indices, drops duplicate pairs and builds sorted neighbor lists.
inline BipartiteGraph build_graph(std::size_t n_left, std::size_t n_right,
                                  std::span<const Edge> edge_pairs) {
  BipartiteGraph g;
  g.n_left_ = n_left;
  g.n_right_ = n_right;
  g.edges_.reserve(edge_pairs.size());
  for (std::size_t k = 0; k < edge_pairs.size(); ++k) {
    const Edge& e = edge_pairs[k];
    if (e.left >= n_left || e.right >= n_right) {
      throw InputError("edge pair #" + std::to_string(k) + " (" +
                       std::to_string(e.left) + ", " +
                       std::to_string(e.right) + ") out of range for " +
                       std::to_string(n_left) + " left and " +
                       std::to_string(n_right) + " right nodes");
    }
    g.edges_.push_back(e);
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end()),
                 g.edges_.end());

  const std::size_t n = n_left + n_right;
  std::vector<std::size_t> degree(n, 0);
  for (const Edge& e : g.edges_) {
    ++degree[e.left];
    ++degree[n_left + e.right];
  }
  g.offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    g.offsets_[i + 1] = g.offsets_[i] + degree[i];
  }
  g.adjacent_.resize(g.offsets_[n]);
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  // Edges are sorted by (left, right), so left rows fill in sorted order;
  // right rows receive left ids in increasing order as well.
  for (const Edge& e : g.edges_) {
    g.adjacent_[cursor[e.left]++] = n_left + e.right;
    g.adjacent_[cursor[n_left + e.right]++] = e.left;
  }
  return g;
}

inline BipartiteGraph build_graph(std::size_t n_left, std::size_t n_right,
                                  std::initializer_list<Edge> edge_pairs) {
  return build_graph(n_left, n_right,
                     std::span<const Edge>(edge_pairs.begin(),
                                           edge_pairs.size()));
}

// Symmetric sparse matrix in CSR form with column-sorted rows.
class SparseSymMatrix {
 public:
  struct Entry {
    std::size_t col;
    double value;
  };

  SparseSymMatrix() = default;

  // Builds from per-row entry lists. Rows are sorted here; symmetry and
  // finiteness are checked.
  static SparseSymMatrix from_rows(std::vector<std::vector<Entry>> rows) {
    SparseSymMatrix m;
    m.n_ = rows.size();
    m.row_ptr_.assign(m.n_ + 1, 0);
    for (std::size_t i = 0; i < m.n_; ++i) {
      auto& row = rows[i];
      std::sort(row.begin(), row.end(),
                [](const Entry& a, const Entry& b) { return a.col < b.col; });
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (row[k].col >= m.n_) {
          throw DimensionError("column " + std::to_string(row[k].col) +
                               " out of range in row " + std::to_string(i));
        }
        if (k > 0 && row[k].col == row[k - 1].col) {
          throw InputError("duplicate entry (" + std::to_string(i) + ", " +
                           std::to_string(row[k].col) + ")");
        }
        if (!std::isfinite(row[k].value)) {
          throw InputError("non-finite entry in row " + std::to_string(i));
        }
      }
      m.row_ptr_[i + 1] = m.row_ptr_[i] + row.size();
    }
    m.cols_.reserve(m.row_ptr_[m.n_]);
    m.vals_.reserve(m.row_ptr_[m.n_]);
    for (const auto& row : rows) {
      for (const Entry& e : row) {
        m.cols_.push_back(e.col);
        m.vals_.push_back(e.value);
      }
    }
    for (std::size_t i = 0; i < m.n_; ++i) {
      for (std::size_t k = m.row_ptr_[i]; k < m.row_ptr_[i + 1]; ++k) {
        if (m.at(m.cols_[k], i) != m.vals_[k]) {
          throw InputError("matrix is not symmetric at (" +
                           std::to_string(i) + ", " +
                           std::to_string(m.cols_[k]) + ")");
        }
      }
    }
    return m;
  }

  static SparseSymMatrix identity(std::size_t n) {
    std::vector<std::vector<Entry>> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i].push_back({i, 1.0});
    return from_rows(std::move(rows));
  }

  static SparseSymMatrix zero(std::size_t n) {
    return from_rows(std::vector<std::vector<Entry>>(n));
  }

  std::size_t dim() const { return n_; }
  std::size_t nnz() const { return cols_.size(); }

  std::span<const std::size_t> row_cols(std::size_t i) const {
    return {cols_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }
  std::span<const double> row_values(std::size_t i) const {
    return {vals_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }

  // Stored value or 0.
  double at(std::size_t i, std::size_t j) const {
    auto cols = row_cols(i);
    auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) return 0.0;
    return vals_[row_ptr_[i] + static_cast<std::size_t>(it - cols.begin())];
  }

  double sum() const {
    double s = 0.0;
    for (double v : vals_) s += v;
    return s;
  }

  DenseMatrix to_dense() const {
    DenseMatrix d = DenseMatrix::Zero(n_, n_);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        d(i, cols_[k]) = vals_[k];
      }
    }
    return d;
  }

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> row_ptr_ = {0};
  std::vector<std::size_t> cols_;
  std::vector<double> vals_;
};

// D~^{-1/2} (A + I) D~^{-1/2} together with d~_i = deg(i) + 1.
struct NormalizedAdjacency {
  SparseSymMatrix matrix;
  std::vector<double> tilde_degrees;

  std::size_t dim() const { return matrix.dim(); }
};

inline SparseSymMatrix adjacency(const BipartiteGraph& g) {
  std::vector<std::vector<SparseSymMatrix::Entry>> rows(g.num_nodes());
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    for (std::size_t j : g.neighbors(i)) rows[i].push_back({j, 1.0});
  }
  return SparseSymMatrix::from_rows(std::move(rows));
}

// Renormalized adjacency. The degree used is that of A + I, so every node
// has d~ >= 1 and isolated nodes keep a unit diagonal.
inline NormalizedAdjacency normalize(const SparseSymMatrix& a) {
  const std::size_t n = a.dim();
  NormalizedAdjacency out;
  out.tilde_degrees.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (double v : a.row_values(i)) deg += v;
    out.tilde_degrees[i] = deg + 1.0;
  }
  std::vector<std::vector<SparseSymMatrix::Entry>> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto cols = a.row_cols(i);
    auto vals = a.row_values(i);
    rows[i].reserve(cols.size() + 1);
    bool has_diagonal = false;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const std::size_t j = cols[k];
      double v = vals[k];
      if (j == i) {
        v += 1.0;
        has_diagonal = true;
      }
      rows[i].push_back(
          {j, v / std::sqrt(out.tilde_degrees[i] * out.tilde_degrees[j])});
    }
    if (!has_diagonal) rows[i].push_back({i, 1.0 / out.tilde_degrees[i]});
  }
  out.matrix = SparseSymMatrix::from_rows(std::move(rows));
  return out;
}

inline DenseMatrix sparse_dense_product(const SparseSymMatrix& s,
                                        const DenseMatrix& d) {
  if (static_cast<std::size_t>(d.rows()) != s.dim()) {
    throw DimensionError("sparse_dense_product: sparse is " +
                         std::to_string(s.dim()) + "x" +
                         std::to_string(s.dim()) + " but dense has " +
                         std::to_string(d.rows()) + " rows");
  }
  DenseMatrix out = DenseMatrix::Zero(d.rows(), d.cols());
  for (std::size_t i = 0; i < s.dim(); ++i) {
    auto cols = s.row_cols(i);
    auto vals = s.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      out.row(i) += vals[k] * d.row(cols[k]);
    }
  }
  return out;
}

inline DenseMatrix sparse_dense_product(const NormalizedAdjacency& s,
                                        const DenseMatrix& d) {
  return sparse_dense_product(s.matrix, d);
}

}  // namespace n2hp
