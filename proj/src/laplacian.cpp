#include "sepflow/laplacian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace sepflow {

SparseLaplacian::SparseLaplacian(int n) : m_(n, n) {}

SparseLaplacian SparseLaplacian::from_edges(int n, std::span<const WeightedEdge> edges) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(edges.size() * 4);
  for (const WeightedEdge& e : edges) {
    if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n) throw InvalidInput("Laplacian edge endpoint out of range");
    if (e.u == e.v) throw InvalidInput("Laplacian edge is a self-loop");
    if (!(e.w > 0.0) || !std::isfinite(e.w)) throw InvalidInput("Laplacian edge weight must be positive");
    triplets.emplace_back(e.u, e.u, e.w);
    triplets.emplace_back(e.v, e.v, e.w);
    triplets.emplace_back(e.u, e.v, -e.w);
    triplets.emplace_back(e.v, e.u, -e.w);
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return SparseLaplacian(std::move(m));
}

SparseLaplacian SparseLaplacian::from_matrix(SparseMatrix m, double rel_tol) {
  if (m.rows() != m.cols()) throw InvalidInput("Laplacian must be square");
  m.makeCompressed();
  SparseLaplacian out(std::move(m));
  if (!out.is_laplacian(rel_tol)) throw InvalidInput("matrix is not a graph Laplacian");
  return out;
}

std::vector<WeightedEdge> SparseLaplacian::edges() const {
  std::vector<WeightedEdge> out;
  for (int col = 0; col < m_.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(m_, col); it; ++it) {
      const auto row = static_cast<Vertex>(it.row());
      if (row < col && it.value() < 0.0) out.push_back({row, static_cast<Vertex>(col), -it.value()});
    }
  }
  std::sort(out.begin(), out.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  return out;
}

int SparseLaplacian::num_edges() const {
  int count = 0;
  for (int col = 0; col < m_.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(m_, col); it; ++it) {
      if (it.row() < col && it.value() < 0.0) ++count;
    }
  }
  return count;
}

double SparseLaplacian::min_weight() const {
  double best = std::numeric_limits<double>::infinity();
  for (const WeightedEdge& e : edges()) best = std::min(best, e.w);
  return best;
}

double SparseLaplacian::max_weight() const {
  double best = 0.0;
  for (const WeightedEdge& e : edges()) best = std::max(best, e.w);
  return best;
}

double SparseLaplacian::quadratic_form(const Eigen::VectorXd& x) const {
  if (x.size() != m_.rows()) throw InvalidInput("vector length does not match Laplacian dimension");
  return x.dot(m_ * x);
}

SparseLaplacian SparseLaplacian::operator+(const SparseLaplacian& other) const {
  if (other.dimension() != dimension()) throw InvalidInput("Laplacian dimensions differ");
  SparseMatrix sum = m_ + other.m_;
  sum.makeCompressed();
  return SparseLaplacian(std::move(sum));
}

SparseLaplacian SparseLaplacian::scaled(double factor) const {
  SparseMatrix s = m_ * factor;
  return SparseLaplacian(std::move(s));
}

bool SparseLaplacian::is_laplacian(double rel_tol) const {
  const int n = dimension();
  Eigen::VectorXd row_sum = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd scale = Eigen::VectorXd::Zero(n);
  for (int col = 0; col < m_.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(m_, col); it; ++it) {
      const double v = it.value();
      if (!std::isfinite(v)) return false;
      if (it.row() != col && v > 0.0) return false;
      if (std::abs(v - m_.coeff(col, it.row())) > rel_tol * std::max(1.0, std::abs(v))) return false;
      row_sum[it.row()] += v;
      scale[it.row()] += std::abs(v);
    }
  }
  for (int v = 0; v < n; ++v) {
    if (std::abs(row_sum[v]) > rel_tol * std::max(scale[v], std::numeric_limits<double>::min())) return false;
  }
  return true;
}

std::vector<int> SparseLaplacian::components(int* count) const {
  const int n = dimension();
  std::vector<int> label(static_cast<size_t>(n), -1);
  int next = 0;
  std::queue<int> queue;
  for (int root = 0; root < n; ++root) {
    if (label[static_cast<size_t>(root)] >= 0) continue;
    label[static_cast<size_t>(root)] = next;
    queue.push(root);
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop();
      for (SparseMatrix::InnerIterator it(m_, v); it; ++it) {
        const auto u = static_cast<int>(it.row());
        if (u != v && it.value() != 0.0 && label[static_cast<size_t>(u)] < 0) {
          label[static_cast<size_t>(u)] = next;
          queue.push(u);
        }
      }
    }
    ++next;
  }
  if (count) *count = next;
  return label;
}

LaplacianBlocks SparseLaplacian::blocks(std::span<const Vertex> boundary) const {
  const int n = dimension();
  std::vector<char> is_boundary(static_cast<size_t>(n), 0);
  LaplacianBlocks b;
  for (Vertex v : boundary) {
    if (v < 0 || v >= n) throw InvalidInput("boundary vertex out of range");
    if (is_boundary[static_cast<size_t>(v)]) throw InvalidInput("duplicate boundary vertex");
    is_boundary[static_cast<size_t>(v)] = 1;
    b.boundary.push_back(v);
  }
  for (Vertex v = 0; v < n; ++v) {
    if (!is_boundary[static_cast<size_t>(v)]) b.interior.push_back(v);
  }
  b.intr = submatrix(m_, b.interior, b.interior);
  b.mid = submatrix(m_, b.interior, b.boundary);
  b.bdry = submatrix(m_, b.boundary, b.boundary);
  return b;
}

SparseLaplacian laplacian_from_conductances(int n, std::span<const Edge> edges,
                                            std::span<const double> conductance) {
  if (edges.size() != conductance.size()) throw InvalidInput("edge/conductance length mismatch");
  std::vector<WeightedEdge> weighted;
  weighted.reserve(edges.size());
  for (size_t e = 0; e < edges.size(); ++e) weighted.push_back({edges[e].tail, edges[e].head, conductance[e]});
  return SparseLaplacian::from_edges(n, weighted);
}

SparseLaplacian laplacian_from_resistances(const WeightedGraph& g) {
  const std::vector<double>& r = g.resistance();
  std::vector<double> c(r.size());
  for (size_t e = 0; e < r.size(); ++e) {
    if (!(r[e] > 0.0)) throw InvalidInput("resistance must be positive");
    c[e] = 1.0 / r[e];
  }
  return laplacian_from_conductances(g.num_vertices(), g.edges(), c);
}

SparseLaplacian laplacian_from_weights(const WeightedGraph& g) {
  return laplacian_from_conductances(g.num_vertices(), g.edges(), g.weight());
}

SparseMatrix submatrix(const SparseMatrix& m, std::span<const Vertex> rows,
                       std::span<const Vertex> cols) {
  std::vector<int> row_pos(static_cast<size_t>(m.rows()), -1);
  for (size_t i = 0; i < rows.size(); ++i) row_pos[static_cast<size_t>(rows[i])] = static_cast<int>(i);
  std::vector<Eigen::Triplet<double>> triplets;
  for (size_t j = 0; j < cols.size(); ++j) {
    for (SparseMatrix::InnerIterator it(m, cols[j]); it; ++it) {
      const int i = row_pos[static_cast<size_t>(it.row())];
      if (i >= 0) triplets.emplace_back(i, static_cast<int>(j), it.value());
    }
  }
  SparseMatrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  out.setFromTriplets(triplets.begin(), triplets.end());
  out.makeCompressed();
  return out;
}

}  // namespace sepflow
