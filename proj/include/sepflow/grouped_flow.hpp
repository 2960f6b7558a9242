#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "sepflow/graph.hpp"
#include "sepflow/solver.hpp"

namespace sepflow {

struct MwuParameters {
  double rho = 0.0;
  long iterations = 0;
};

/// rho = 10 k^{1/3} eps^{-2/3}, N = ceil(20 rho ln(k) / eps^2), N >= 1.
MwuParameters mwu_parameters(int k, double eps);

struct GroupedFlowProblem {
  int num_vertices = 0;
  std::vector<Edge> edges;
  /// Congestion weight of every edge.
  std::vector<double> weight;
  std::vector<std::vector<EdgeId>> groups;
  DemandVector demand;
  double eps = 0.1;

  /// Validates shape; returns the group of every edge.
  std::vector<int> validate() const;
};

/// Per-group congestions of the averaged flow -> accept now.
using AcceptPredicate = std::function<bool(const std::vector<double>& group_congestion)>;

struct GroupedFlowOptions {
  bool early_exit = true;
  /// Early exit only once t >= fraction * N.
  double early_exit_min_fraction = 0.0;
  /// Replaces the default early-exit test (all congestions <= 1 + 10 eps).
  AcceptPredicate accept;
  /// 0 means the full N.
  long max_iterations = 0;
  /// 0 selects eps^2 / (100 rho).
  double solver_delta = 0.0;
  bool check_invariants = true;
  /// Starting group weights, each >= 1; empty means all ones.
  std::vector<double> initial_group_weight;
  /// CSV rows t,mu,energy,max_group_congestion,accepted.
  std::ostream* trace = nullptr;
};

enum class GroupedFlowStatus { kSuccess, kFail, kUnconverged };

struct MwuState {
  std::vector<double> group_weight;
  double mu = 0.0;
  long t = 0;
  long accepted = 0;
  double rho = 0.0;
  long n_total = 0;
  /// Energy of the electrical flow computed under this state's resistances; 0 if unknown.
  double energy = 0.0;
};

struct StepDiagnostics {
  bool ok = true;
  long iteration = 0;
  double mu_ratio = 1.0;
  double mu_ratio_bound = 1.0;
  bool weights_monotone = true;
  /// Recorded when some group exceeds rho: energy ratio across the step and its bound.
  bool width_exceeded = false;
  double energy_growth = 0.0;
  double energy_growth_bound = 0.0;
  std::string message;
};

/// Potential and weight checks on consecutive states; `congestion` is that of the iterate.
StepDiagnostics mwu_step_invariant_check(const MwuState& before, const MwuState& after,
                                         const std::vector<double>& congestion, double eps);

struct GroupedFlowResult {
  GroupedFlowStatus status = GroupedFlowStatus::kUnconverged;
  std::vector<double> flow;
  std::vector<double> group_congestion;
  double max_group_congestion = 0.0;
  MwuState state;
  bool early_exit = false;
  long solver_iterations = 0;
  long width_exceeded_iterations = 0;
  double max_mu_ratio = 0.0;
  /// Failing iteration's electrical flow data.
  std::vector<double> fail_potentials;
  std::vector<double> fail_resistance;
  double fail_energy = 0.0;
  double fail_mu = 0.0;
};

GroupedFlowResult grouped_flow(const GroupedFlowProblem& problem, const GroupedFlowOptions& options = {});

/// Group congestions sqrt(sum w f^2) of a flow.
std::vector<double> group_congestions(const std::vector<double>& flow, const std::vector<double>& weight,
                                      const std::vector<std::vector<EdgeId>>& groups);

}  // namespace sepflow
