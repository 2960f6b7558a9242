#include "sepflow/schur.hpp"

#include <algorithm>
#include <cmath>

#include "sepflow/solver.hpp"

namespace sepflow {

namespace {

constexpr double kDropRelative = 1e-13;

void check_boundary(const SparseLaplacian& l, std::span<const Vertex> boundary) {
  if (boundary.empty()) throw InvalidInput("boundary set must be nonempty");
  std::vector<char> seen(static_cast<size_t>(l.dimension()), 0);
  for (Vertex v : boundary) {
    if (v < 0 || v >= l.dimension()) throw InvalidInput("boundary vertex out of range");
    if (seen[static_cast<size_t>(v)]) throw InvalidInput("duplicate boundary vertex");
    seen[static_cast<size_t>(v)] = 1;
  }
  int count = 0;
  const std::vector<int> comp = l.components(&count);
  std::vector<char> anchored(static_cast<size_t>(count), 0);
  for (Vertex v : boundary) anchored[static_cast<size_t>(comp[static_cast<size_t>(v)])] = 1;
  for (int v = 0; v < l.dimension(); ++v) {
    if (!anchored[static_cast<size_t>(comp[static_cast<size_t>(v)])]) {
      throw InvalidInput("interior vertex " + std::to_string(v) + " lies in a component without boundary vertices");
    }
  }
}

SparseLaplacian permuted(const SparseLaplacian& l, std::span<const Vertex> order) {
  std::vector<int> pos(static_cast<size_t>(l.dimension()), -1);
  for (size_t i = 0; i < order.size(); ++i) pos[static_cast<size_t>(order[i])] = static_cast<int>(i);
  std::vector<WeightedEdge> edges = l.edges();
  for (WeightedEdge& e : edges) {
    e.u = pos[static_cast<size_t>(e.u)];
    e.v = pos[static_cast<size_t>(e.v)];
  }
  return SparseLaplacian::from_edges(static_cast<int>(order.size()), edges);
}

// Off-diagonal part of a dense symmetric matrix as a Laplacian, dropping
// rounding-level entries. Positive entries must have been removed already.
SparseLaplacian from_dense_offdiagonal(const Eigen::MatrixXd& s) {
  const int n = static_cast<int>(s.rows());
  const double scale = n > 0 ? s.diagonal().cwiseAbs().maxCoeff() : 0.0;
  std::vector<WeightedEdge> edges;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      const double w = -0.5 * (s(i, j) + s(j, i));
      if (w > kDropRelative * scale) edges.push_back({i, j, w});
    }
  }
  return SparseLaplacian::from_edges(n, edges);
}

}  // namespace

SpectralBounds spectral_bounds(const SparseLaplacian& l) {
  const double n = l.dimension();
  if (l.num_edges() == 0) throw InvalidInput("spectral bounds need at least one edge");
  SpectralBounds b;
  b.lambda_min = l.min_weight() / (n * n);
  b.lambda_max = n * l.max_weight();
  b.kappa = b.lambda_max / b.lambda_min;
  return b;
}

SpectralBounds spectral_bounds(const WeightedGraph& g) {
  if (g.num_edges() == 0) throw InvalidInput("spectral bounds need at least one edge");
  const auto [lo, hi] = std::minmax_element(g.weight().begin(), g.weight().end());
  const double n = g.num_vertices();
  SpectralBounds b;
  b.lambda_min = *lo / (n * n);
  b.lambda_max = n * *hi;
  b.kappa = b.lambda_max / b.lambda_min;
  return b;
}

SparseLaplacian exact_schur(const SparseLaplacian& l, std::span<const Vertex> boundary) {
  check_boundary(l, boundary);
  const LaplacianBlocks blocks = l.blocks(boundary);
  if (blocks.interior.empty()) return permuted(l, boundary);
  const Eigen::MatrixXd intr(blocks.intr);
  const Eigen::MatrixXd mid(blocks.mid);
  Eigen::LLT<Eigen::MatrixXd> llt(intr);
  if (llt.info() != Eigen::Success) throw NumericalFailure("interior block is singular");
  Eigen::MatrixXd s = Eigen::MatrixXd(blocks.bdry) - mid.transpose() * llt.solve(mid);
  for (int j = 0; j < s.cols(); ++j) {
    for (int i = 0; i < s.rows(); ++i) {
      if (i != j && s(i, j) > 0.0) s(i, j) = 0.0;
    }
  }
  return from_dense_offdiagonal(s);
}

SparseLaplacian approx_schur(const SparseLaplacian& l, std::span<const Vertex> boundary, double kappa, double eps,
                             ApproxSchurStats* stats) {
  if (!(eps > 0.0) || !(eps < 0.5)) throw InvalidInput("approx_schur requires 0 < eps < 1/2");
  if (!(kappa >= 1.0)) throw InvalidInput("spectrum bound must be at least 1");
  check_boundary(l, boundary);
  ApproxSchurStats local;
  const LaplacianBlocks blocks = l.blocks(boundary);
  if (blocks.interior.empty()) {
    if (stats) *stats = local;
    return permuted(l, boundary);
  }
  const double n = l.dimension();
  const double delta = 2.0 * eps / (n * kappa);
  SolverOptions options;
  options.delta = delta;
  const SolverHandle handle(blocks.intr, options);

  const auto nb = static_cast<Eigen::Index>(blocks.boundary.size());
  const auto ni = static_cast<Eigen::Index>(blocks.interior.size());
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(ni, nb);
  for (Eigen::Index j = 0; j < nb; ++j) {
    const Eigen::VectorXd column = Eigen::VectorXd(blocks.mid.col(j));
    if (column.cwiseAbs().maxCoeff() == 0.0) continue;
    SolveStats solve_stats;
    y.col(j) = handle.solve(column, &solve_stats);
    local.solver_iterations += solve_stats.iterations;
  }
  Eigen::MatrixXd s = Eigen::MatrixXd(blocks.bdry) - Eigen::MatrixXd(blocks.mid.transpose() * y);
  s = 0.5 * (s + s.transpose()).eval();
  local.trace = s.trace();
  for (Eigen::Index j = 0; j < nb; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      if (s(i, j) > 0.0) {
        local.clamped_mass += s(i, j);
        s(i, j) = 0.0;
        s(j, i) = 0.0;
      }
    }
  }
  if (stats) *stats = local;
  if (local.clamped_mass > eps / 10.0 * local.trace) {
    throw NumericalFailure("approximate Schur complement clamped " + std::to_string(local.clamped_mass) +
                           " of off-diagonal mass, above eps/10 of the trace");
  }
  return from_dense_offdiagonal(s);
}

SparseLaplacian weight_floor(const SparseLaplacian& l, double lambda_min, int n) {
  if (!(lambda_min > 0.0)) throw InvalidInput("weight floor requires a positive lambda_min");
  const double nn = n > 0 ? n : l.dimension();
  const double add = lambda_min / (nn * nn);
  std::vector<WeightedEdge> edges = l.edges();
  for (WeightedEdge& e : edges) e.w += add;
  return SparseLaplacian::from_edges(l.dimension(), edges);
}

double recursion_levels(int n) {
  return std::max(1.0, std::log(static_cast<double>(std::max(n, 1))) / std::log(20.0 / 19.0));
}

}  // namespace sepflow
