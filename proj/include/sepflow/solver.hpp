#pragma once

#include <vector>

#include "sepflow/graph.hpp"
#include "sepflow/laplacian.hpp"

namespace sepflow {

enum class Preconditioner { kTree, kJacobi };

struct SolverOptions {
  double delta = 1e-8;
  Preconditioner preconditioner = Preconditioner::kTree;
  /// 0 selects 20 * sqrt(condition estimate) + 1000.
  int max_iterations = 0;
  /// Lag of the A-norm error estimate, in iterations.
  int estimate_delay = 10;
};

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
  /// Estimated ||x - x*||_A / ||x*||_A at termination.
  double error_estimate = 0.0;
  bool converged = false;
};

/// Thrown when the iteration cap is reached; carries the best iterate.
class SolverCapReached : public NumericalFailure {
 public:
  SolverCapReached(Eigen::VectorXd best, SolveStats stats);
  const Eigen::VectorXd& best_iterate() const { return best_; }
  const SolveStats& stats() const { return stats_; }

 private:
  Eigen::VectorXd best_;
  SolveStats stats_;
};

/// Preconditioned CG for a fixed symmetric diagonally dominant matrix.
///
/// Components without diagonal excess are singular; one vertex per such
/// component is grounded and the returned solution is shifted to zero mean on
/// the component. The right-hand side must then be orthogonal to the
/// component's all-ones vector.
class SolverHandle {
 public:
  SolverHandle(const SparseMatrix& a, SolverOptions options = {});

  Eigen::VectorXd solve(const Eigen::VectorXd& b, SolveStats* stats = nullptr) const;
  Eigen::VectorXd solve(const Eigen::VectorXd& b, double delta, SolveStats* stats = nullptr) const;

  int dimension() const { return n_; }
  const SolverOptions& options() const { return options_; }
  double condition_estimate() const { return kappa_; }
  int iteration_cap() const;

 private:
  void apply_reduced(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
  void precondition(const Eigen::VectorXd& r, Eigen::VectorXd& z) const;

  int n_ = 0;
  SolverOptions options_;
  bool m_matrix_ = true;
  // Reduced (grounded) system on active vertices.
  std::vector<int> active_of_;      // vertex -> active index or -1
  std::vector<int> vertex_of_;      // active index -> vertex
  std::vector<int> component_;      // vertex -> component label
  std::vector<char> singular_;      // per component
  int num_components_ = 0;
  SparseMatrix reduced_;
  Eigen::VectorXd diag_;
  // Tree factorization, elimination order is leaf first.
  std::vector<int> order_;
  std::vector<int> parent_;
  std::vector<double> parent_coupling_;
  std::vector<double> pivot_;
  double kappa_ = 1.0;
};

Eigen::VectorXd solve_sdd(const SparseMatrix& a, const Eigen::VectorXd& b, double delta,
                          SolveStats* stats = nullptr);

struct ElectricalFlowOptions {
  /// When true, certifies the per-edge energy bound as well as the total energy bound.
  bool certify_edge_energy = true;
  Preconditioner preconditioner = Preconditioner::kTree;
  /// Smallest relative duality gap requested from the solver.
  double gap_floor = 1e-12;
};

struct ElectricalFlowResult {
  std::vector<double> flow;
  std::vector<double> potentials;
  double energy = 0.0;
  /// 2 d^T phi - phi^T L phi, a certified lower bound on the optimal energy.
  double optimum_lower_bound = 0.0;
  int solver_iterations = 0;
  /// True when the requested guarantee was below the floating-point floor.
  bool precision_limited = false;
};

/// Demand-exact approximate electrical flow. Resistances come from g.resistance().
ElectricalFlowResult electrical_flow(const WeightedGraph& g, const DemandVector& d, double delta,
                                     const ElectricalFlowOptions& options = {});
ElectricalFlowResult electrical_flow(int n, std::span<const Edge> edges,
                                     std::span<const double> resistance, const DemandVector& d,
                                     double delta, const ElectricalFlowOptions& options = {});

/// d^T L^+ d.
double optimum_energy(const WeightedGraph& g, const DemandVector& d);

/// Route an arbitrary zero-sum residual along a maximum-conductance spanning tree.
void repair_on_tree(int n, std::span<const Edge> edges, std::span<const double> conductance,
                    std::span<double> flow, const DemandVector& d);

}  // namespace sepflow
