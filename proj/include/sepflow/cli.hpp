#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sepflow/exact_flow.hpp"
#include "sepflow/instances.hpp"
#include "sepflow/pipeline.hpp"

namespace sepflow {

struct RunConfig {
  double eps = 0.1;
  /// 0 selects ceil(m^{2/5}).
  int r = 0;
  std::uint64_t seed = 1;
  bool strict = false;
  double c_w = 0.1;
  double c_s = 48.0;
  double c_div = 4.0;
  double c_bdry = 8.0;
  long outer_cap = 300;
  long inner_cap = 0;
  /// exact, one-step or recursive.
  std::string sparsifier = "one-step";

  std::optional<GridLayout> grid;
  bool unit_capacities = false;
  std::string input;
  std::string partition;
  std::string septree;
  /// Fixed-flow mode: route this much from s to t instead of maximising.
  std::optional<double> demand;
  bool exact = false;
  bool timings = false;

  std::string trace;
  std::string emit_flow;
  std::string emit_cut;
  std::string json;

  void validate() const;
  /// Settings for the pipeline entry points.
  MaxFlowOptions max_flow_options() const;
};

struct RunOutcome {
  /// 0 success, 2 infeasible with certificate.
  int exit_code = 0;
  std::string json;
  Instance instance;
  Partition partition;
  std::vector<double> flow;
  double flow_value = 0.0;
  std::optional<double> exact_value;
  std::optional<CutCertificate> cut;
};

/// Loads or generates the instance, partitions it, runs the pipeline and
/// writes the requested outputs. Throws on invalid input.
RunOutcome run_maxflow(const RunConfig& config);

struct BenchRow {
  std::string instance;
  int n = 0;
  int m = 0;
  int r = 0;
  double eps = 0.0;
  double value = 0.0;
  std::optional<double> exact;
  double wall_seconds = 0.0;
  long solver_iterations = 0;
};

struct BenchConfig {
  std::vector<GridLayout> grids;
  RunConfig base;
  /// Directory for trace bundles of rows that miss the guarantee; empty disables.
  std::string diagnostics_dir;
};

/// One row per grid, computed concurrently; rows keep the input order.
std::vector<BenchRow> run_bench(const BenchConfig& config);
/// Header plus rows; the wall-time column is blank unless `timings`.
std::string bench_csv(const std::vector<BenchRow>& rows, bool timings);
/// Least-squares slope of log(wall time) against log(m).
double loglog_slope(const std::vector<BenchRow>& rows);

/// Parses "RxC".
GridLayout parse_grid(const std::string& text, int layers = 1);

}  // namespace sepflow
