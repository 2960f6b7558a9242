#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "sepflow/graph.hpp"

namespace sepflow {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct WeightedEdge {
  Vertex u;
  Vertex v;
  double w;
};

/// Interior/boundary blocks of a Laplacian. `mid` is interior x boundary.
struct LaplacianBlocks {
  std::vector<Vertex> interior;
  std::vector<Vertex> boundary;
  SparseMatrix intr;
  SparseMatrix mid;
  SparseMatrix bdry;
};

/// Symmetric graph Laplacian stored in full (both triangles) compressed form.
class SparseLaplacian {
 public:
  SparseLaplacian() = default;
  explicit SparseLaplacian(int n);

  /// Parallel edges are summed. Weights must be positive.
  static SparseLaplacian from_edges(int n, std::span<const WeightedEdge> edges);
  /// Takes a symmetric matrix that is already a Laplacian; validated to `rel_tol`.
  static SparseLaplacian from_matrix(SparseMatrix m, double rel_tol = 1e-9);

  int dimension() const { return static_cast<int>(m_.rows()); }
  const SparseMatrix& matrix() const { return m_; }
  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(m_); }

  /// One entry per adjacent pair, u < v, w = -L(u,v) > 0, sorted by (u, v).
  std::vector<WeightedEdge> edges() const;
  int num_edges() const;
  double min_weight() const;
  double max_weight() const;
  /// Weighted degree of every vertex (the diagonal).
  Eigen::VectorXd degrees() const { return m_.diagonal(); }

  double quadratic_form(const Eigen::VectorXd& x) const;
  SparseLaplacian operator+(const SparseLaplacian& other) const;
  SparseLaplacian scaled(double factor) const;

  /// Zero row sums up to rel_tol * degree, nonpositive off-diagonals, symmetry.
  bool is_laplacian(double rel_tol = 1e-10) const;

  /// Connected components of the support graph; label per vertex.
  std::vector<int> components(int* count = nullptr) const;

  LaplacianBlocks blocks(std::span<const Vertex> boundary) const;

 private:
  explicit SparseLaplacian(SparseMatrix m) : m_(std::move(m)) {}
  SparseMatrix m_;
};

/// L = B^T R^{-1} B.
SparseLaplacian laplacian_from_resistances(const WeightedGraph& g);
/// L = B^T W B using the graph's weight vector as conductances.
SparseLaplacian laplacian_from_weights(const WeightedGraph& g);
SparseLaplacian laplacian_from_conductances(int n, std::span<const Edge> edges,
                                            std::span<const double> conductance);

/// Restriction of a sparse matrix to the given rows and columns.
SparseMatrix submatrix(const SparseMatrix& m, std::span<const Vertex> rows,
                       std::span<const Vertex> cols);

}  // namespace sepflow
