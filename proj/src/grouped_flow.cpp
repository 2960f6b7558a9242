#include "sepflow/grouped_flow.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace sepflow {

MwuParameters mwu_parameters(int k, double eps) {
  if (k < 1) throw InvalidInput("grouped flow needs at least one group");
  if (!(eps > 0.0) || !(eps < 0.5)) throw InvalidInput("grouped flow requires 0 < eps < 1/2");
  MwuParameters p;
  p.rho = 10.0 * std::cbrt(static_cast<double>(k)) * std::pow(eps, -2.0 / 3.0);
  const double n = std::ceil(20.0 * p.rho * std::log(static_cast<double>(k)) / (eps * eps));
  p.iterations = std::max(1L, static_cast<long>(n));
  return p;
}

std::vector<int> GroupedFlowProblem::validate() const {
  if (weight.size() != edges.size()) throw InvalidInput("weight length does not match edge count");
  if (demand.size() != num_vertices) throw InvalidInput("demand length does not match vertex count");
  if (!(eps > 0.0) || !(eps < 0.5)) throw InvalidInput("grouped flow requires 0 < eps < 1/2");
  if (!demand.is_balanced()) throw InvalidInput("demand does not sum to zero");
  std::vector<int> owner(edges.size(), -1);
  for (size_t i = 0; i < groups.size(); ++i) {
    if (groups[i].empty()) throw InvalidInput("group " + std::to_string(i) + " is empty");
    for (EdgeId e : groups[i]) {
      if (e < 0 || static_cast<size_t>(e) >= edges.size()) throw InvalidInput("group edge out of range");
      if (owner[static_cast<size_t>(e)] >= 0) throw InvalidInput("edge " + std::to_string(e) + " is in two groups");
      owner[static_cast<size_t>(e)] = static_cast<int>(i);
    }
  }
  for (size_t e = 0; e < edges.size(); ++e) {
    if (owner[e] < 0) throw InvalidInput("edge " + std::to_string(e) + " is in no group");
    if (!(weight[e] > 0.0)) throw InvalidInput("edge weights must be positive");
  }
  return owner;
}

std::vector<double> group_congestions(const std::vector<double>& flow, const std::vector<double>& weight,
                                      const std::vector<std::vector<EdgeId>>& groups) {
  std::vector<double> out(groups.size(), 0.0);
  for (size_t i = 0; i < groups.size(); ++i) {
    double total = 0.0;
    for (EdgeId e : groups[i]) {
      const double f = flow[static_cast<size_t>(e)];
      total += weight[static_cast<size_t>(e)] * f * f;
    }
    out[i] = std::sqrt(total);
  }
  return out;
}

StepDiagnostics mwu_step_invariant_check(const MwuState& before, const MwuState& after,
                                         const std::vector<double>& congestion, double eps) {
  StepDiagnostics d;
  d.iteration = after.t;
  d.mu_ratio = after.mu / before.mu;
  d.mu_ratio_bound = std::exp(eps / before.rho);
  if (d.mu_ratio > d.mu_ratio_bound + 1e-12) {
    d.ok = false;
    d.message = "potential grew by " + std::to_string(d.mu_ratio) + ", above exp(eps/rho) = " +
                std::to_string(d.mu_ratio_bound);
  }
  for (size_t i = 0; i < before.group_weight.size(); ++i) {
    if (after.group_weight[i] < before.group_weight[i] || before.group_weight[i] < 1.0) {
      d.ok = false;
      d.weights_monotone = false;
      d.message = "group weight " + std::to_string(i) + " decreased or fell below 1";
    }
  }
  double sum = 0.0;
  for (double w : after.group_weight) sum += w;
  if (std::abs(sum - after.mu) > 1e-9 * after.mu) {
    d.ok = false;
    d.message = "potential does not equal the sum of group weights";
  }
  const double widest = congestion.empty() ? 0.0 : *std::max_element(congestion.begin(), congestion.end());
  if (widest > before.rho) {
    d.width_exceeded = true;
    const double k = static_cast<double>(before.group_weight.size());
    d.energy_growth_bound = std::exp(eps * eps * before.rho * before.rho / (4.0 * k));
    if (before.energy > 0.0 && after.energy > 0.0) d.energy_growth = after.energy / before.energy;
  }
  if (!d.ok) d.message = "iteration " + std::to_string(d.iteration) + ": " + d.message;
  return d;
}

GroupedFlowResult grouped_flow(const GroupedFlowProblem& problem, const GroupedFlowOptions& options) {
  const std::vector<int> owner = problem.validate();
  const int k = static_cast<int>(problem.groups.size());
  const double eps = problem.eps;
  const MwuParameters params = mwu_parameters(k, eps);
  const long budget = options.max_iterations > 0 ? std::min(params.iterations, options.max_iterations) : params.iterations;
  const double delta = options.solver_delta > 0.0 ? options.solver_delta : eps * eps / (100.0 * params.rho);
  const double target = 1.0 + 10.0 * eps;
  const size_t m = problem.edges.size();

  GroupedFlowResult out;
  MwuState state;
  state.group_weight.assign(static_cast<size_t>(k), 1.0);
  if (!options.initial_group_weight.empty()) {
    if (options.initial_group_weight.size() != static_cast<size_t>(k)) {
      throw InvalidInput("initial group weights do not match the group count");
    }
    for (double w : options.initial_group_weight) {
      if (!(w >= 1.0)) throw InvalidInput("initial group weights must be at least 1");
    }
    state.group_weight = options.initial_group_weight;
  }
  state.mu = 0.0;
  for (double w : state.group_weight) state.mu += w;
  state.rho = params.rho;
  state.n_total = params.iterations;
  std::vector<double> sum(m, 0.0);
  std::vector<double> resistance(m);
  ElectricalFlowOptions ef_options;
  ef_options.certify_edge_energy = false;

  if (options.trace) *options.trace << "t,mu,energy,max_group_congestion,accepted\n";

  bool have_pending = false;
  MwuState pending_before;
  std::vector<double> pending_cong;
  auto finish_pending = [&](double next_energy) {
    if (!have_pending) return;
    MwuState after = state;
    after.energy = next_energy;
    const StepDiagnostics diag = mwu_step_invariant_check(pending_before, after, pending_cong, eps);
    out.max_mu_ratio = std::max(out.max_mu_ratio, diag.mu_ratio);
    if (diag.width_exceeded) ++out.width_exceeded_iterations;
    if (!diag.ok && options.check_invariants) throw NumericalFailure("grouped flow invariant breach at " + diag.message);
    have_pending = false;
  };

  auto average = [&]() {
    std::vector<double> avg(m, 0.0);
    if (state.accepted > 0) {
      for (size_t e = 0; e < m; ++e) avg[e] = sum[e] / static_cast<double>(state.accepted);
    }
    return avg;
  };

  for (long t = 1; t <= budget; ++t) {
    const double mu = state.mu;
    for (size_t e = 0; e < m; ++e) {
      const double wg = state.group_weight[static_cast<size_t>(owner[e])];
      resistance[e] = (wg + eps / k * mu) * problem.weight[e];
    }
    const ElectricalFlowResult ef =
        electrical_flow(problem.num_vertices, problem.edges, resistance, problem.demand, delta, ef_options);
    out.solver_iterations += ef.solver_iterations;
    state.energy = ef.energy;
    finish_pending(ef.energy);
    state.t = t;

    if (ef.energy > mu) {
      out.status = GroupedFlowStatus::kFail;
      out.fail_potentials = ef.potentials;
      out.fail_resistance = resistance;
      out.fail_energy = ef.energy;
      out.fail_mu = mu;
      out.state = state;
      if (options.trace) *options.trace << t << ',' << mu << ',' << ef.energy << ",nan,0\n";
      return out;
    }

    const std::vector<double> cong = group_congestions(ef.flow, problem.weight, problem.groups);
    double weighted = 0.0;
    for (int i = 0; i < k; ++i) weighted += state.group_weight[static_cast<size_t>(i)] * cong[static_cast<size_t>(i)];
    if (options.check_invariants && weighted > mu * (1.0 + 1e-9)) {
      throw NumericalFailure("grouped flow invariant breach at iteration " + std::to_string(t) +
                             ": weighted congestion exceeds the potential");
    }
    const double widest = *std::max_element(cong.begin(), cong.end());
    const bool accepted = widest <= params.rho;
    if (accepted) {
      for (size_t e = 0; e < m; ++e) sum[e] += ef.flow[e];
      ++state.accepted;
    }
    if (options.trace) {
      *options.trace << t << ',' << mu << ',' << ef.energy << ',' << widest << ',' << (accepted ? 1 : 0) << '\n';
    }

    pending_before = state;
    pending_cong = cong;
    have_pending = true;
    double new_mu = 0.0;
    for (int i = 0; i < k; ++i) {
      double& w = state.group_weight[static_cast<size_t>(i)];
      w *= 1.0 + eps / params.rho * cong[static_cast<size_t>(i)];
      new_mu += w;
    }
    state.mu = new_mu;
    state.energy = 0.0;

    if (options.early_exit && state.accepted > 0 &&
        static_cast<double>(t) >= options.early_exit_min_fraction * static_cast<double>(params.iterations)) {
      std::vector<double> avg = average();
      std::vector<double> avg_cong = group_congestions(avg, problem.weight, problem.groups);
      const bool ok = options.accept ? options.accept(avg_cong)
                                     : *std::max_element(avg_cong.begin(), avg_cong.end()) <= target;
      if (ok) {
        finish_pending(0.0);
        out.status = GroupedFlowStatus::kSuccess;
        out.early_exit = t < params.iterations;
        out.flow = std::move(avg);
        out.group_congestion = std::move(avg_cong);
        out.max_group_congestion = *std::max_element(out.group_congestion.begin(), out.group_congestion.end());
        out.state = state;
        return out;
      }
    }
  }
  finish_pending(0.0);
  out.state = state;
  out.flow = average();
  out.group_congestion = group_congestions(out.flow, problem.weight, problem.groups);
  out.max_group_congestion = *std::max_element(out.group_congestion.begin(), out.group_congestion.end());
  const bool complete = budget >= params.iterations && state.accepted > 0;
  out.status = complete ? GroupedFlowStatus::kSuccess : GroupedFlowStatus::kUnconverged;
  return out;
}

}  // namespace sepflow
