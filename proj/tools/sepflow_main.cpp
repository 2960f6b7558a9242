#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sepflow/cli.hpp"

namespace {

void add_common(CLI::App& app, sepflow::RunConfig& config, int& layers) {
  app.add_option("--eps", config.eps, "Accuracy, in (0, 1/2)");
  app.add_option("--r", config.r, "Target group size; 0 picks ceil(m^{2/5})");
  app.add_option("--seed", config.seed, "Seed for every random choice");
  app.add_option("--layers", layers, "Layers of a generated grid")->check(CLI::PositiveNumber);
  app.add_flag("--strict-paper", config.strict, "Unit starting group weights and no weighted early exit");
  app.add_flag("--unit-capacities", config.unit_capacities, "Unit instead of random capacities on generated grids");
  app.add_option("--sparsifier", config.sparsifier, "exact, one-step or recursive");
  app.add_option("--c-w", config.c_w, "Outer width constant");
  app.add_option("--c-s", config.c_s, "Sparsifier sample constant");
  app.add_option("--c-div", config.c_div, "Group count constant");
  app.add_option("--c-bdry", config.c_bdry, "Boundary size constant");
  app.add_option("--outer-cap", config.outer_cap, "Outer iterations per probe; 0 uses the full budget");
  app.add_option("--inner-cap", config.inner_cap, "Inner iterations per call; 0 uses the full budget");
  app.add_flag("--timings", config.timings, "Include wall-clock timings in the output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate maximum s-t flow on separable graphs"};
  app.require_subcommand(1);

  sepflow::RunConfig run;
  int run_layers = 1;
  std::string run_grid;
  double demand = 0.0;
  CLI::App* maxflow = app.add_subcommand("maxflow", "Run one instance and print result JSON");
  add_common(*maxflow, run, run_layers);
  maxflow->add_option("--input", run.input, "DIMACS max-flow file");
  maxflow->add_option("--grid", run_grid, "Generate an RxC grid");
  maxflow->add_option("--partition", run.partition, "Partition file");
  maxflow->add_option("--septree", run.septree, "Separator tree file");
  maxflow->add_option("--demand", demand, "Fixed-flow mode: route this value or certify that it is infeasible");
  maxflow->add_flag("--exact", run.exact, "Also run the exact max-flow oracle");
  maxflow->add_option("--trace", run.trace, "Per-iteration CSV trace");
  maxflow->add_option("--emit-flow", run.emit_flow, "Write the flow as CSV");
  maxflow->add_option("--emit-cut", run.emit_cut, "Write the cut certificate as JSON");
  maxflow->add_option("--json", run.json, "Write result JSON here as well as to stdout");

  sepflow::BenchConfig bench;
  int bench_layers = 1;
  std::vector<std::string> bench_grids;
  std::string csv_path;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Sweep generated grids and print CSV");
  add_common(*bench_cmd, bench.base, bench_layers);
  bench_cmd->add_option("--grid", bench_grids, "Grids to run, e.g. 16x16 32x32")->required();
  bench_cmd->add_option("--csv", csv_path, "Write CSV here as well as to stdout");
  bench_cmd->add_option("--diagnostics", bench.diagnostics_dir, "Bundle traces of rows below 1-eps here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*maxflow) {
      if (!run_grid.empty()) run.grid = sepflow::parse_grid(run_grid, run_layers);
      if (maxflow->count("--demand")) run.demand = demand;
      const sepflow::RunOutcome outcome = sepflow::run_maxflow(run);
      std::cout << outcome.json;
      return outcome.exit_code;
    }
    for (const std::string& g : bench_grids) bench.grids.push_back(sepflow::parse_grid(g, bench_layers));
    const std::vector<sepflow::BenchRow> rows = sepflow::run_bench(bench);
    const std::string csv = sepflow::bench_csv(rows, bench.base.timings);
    std::cout << csv;
    if (!csv_path.empty()) {
      std::ofstream out(csv_path);
      if (!out) throw sepflow::InvalidInput("cannot write " + csv_path);
      out << csv;
    }
    if (bench.base.timings) {
      const double slope = sepflow::loglog_slope(rows);
      if (std::isfinite(slope)) std::cerr << "log-log slope of wall time against m: " << slope << '\n';
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
