#include "sepflow/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "sepflow/dimacs.hpp"
#include "sepflow/parallel.hpp"

namespace sepflow {

namespace {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path);
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  return out;
}

Instance load_instance(const RunConfig& config) {
  if (config.grid) return grid_instance(*config.grid, config.seed, !config.unit_capacities);
  FlowInstance file = read_dimacs_file(config.input);
  Instance inst;
  inst.name = std::filesystem::path(config.input).filename().string();
  inst.graph = std::move(file.graph);
  inst.source = file.source;
  inst.sink = file.sink;
  return inst;
}

Partition make_partition(const RunConfig& config, const Instance& inst, int r) {
  const std::vector<Vertex> terminals{inst.source, inst.sink};
  PartitionLimits limits;
  limits.c_div = config.c_div;
  limits.c_bdry = config.c_bdry;
  if (!config.partition.empty()) return load_partition(config.partition, inst.graph, terminals, limits);
  Partition p;
  if (inst.layout) {
    p = grid_r_division(*inst.layout, r, terminals);
  } else {
    std::vector<EdgeId> all(static_cast<size_t>(inst.graph.num_edges()));
    for (size_t e = 0; e < all.size(); ++e) all[e] = static_cast<EdgeId>(e);
    p.r = inst.graph.num_edges();
    p.groups = {all};
    p.boundary = compute_boundaries(inst.graph, p.groups, terminals);
  }
  validate(p, inst.graph, terminals, limits);
  return p;
}

std::vector<std::optional<SeparatorTree>> make_trees(const RunConfig& config, const Instance& inst,
                                                     const Partition& p) {
  if (!config.septree.empty()) {
    std::ifstream in(config.septree);
    if (!in) throw InvalidInput("cannot open " + config.septree);
    std::vector<std::optional<SeparatorTree>> trees = read_septree_set(in, p.num_groups(), config.septree);
    for (int i = 0; i < p.num_groups(); ++i) {
      if (trees[static_cast<size_t>(i)]) validate(*trees[static_cast<size_t>(i)], inst.graph, p.groups[static_cast<size_t>(i)]);
    }
    return trees;
  }
  if (!inst.layout) throw InvalidInput("recursive sparsification of a file input needs --septree");
  std::vector<std::optional<SeparatorTree>> trees(static_cast<size_t>(p.num_groups()));
  for (int i = 0; i < p.num_groups(); ++i) {
    trees[static_cast<size_t>(i)] =
        separator_tree_for_grid_block(*inst.layout, inst.graph, p.groups[static_cast<size_t>(i)], 16);
  }
  return trees;
}

SparsifierKind parse_kind(const std::string& name) {
  if (name == "exact") return SparsifierKind::kExact;
  if (name == "one-step") return SparsifierKind::kOneStep;
  if (name == "recursive") return SparsifierKind::kRecursive;
  throw InvalidInput("unknown sparsifier `" + name + "`");
}

const char* status_name(GroupedFlowStatus s) {
  switch (s) {
    case GroupedFlowStatus::kSuccess:
      return "ok";
    case GroupedFlowStatus::kFail:
      return "fail";
    case GroupedFlowStatus::kUnconverged:
      return "unconverged";
  }
  return "?";
}

void write_flow(const std::string& path, const WeightedGraph& g, const std::vector<double>& flow) {
  std::ofstream out = open_output(path);
  out << "edge,tail,head,flow\n";
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    out << e << ',' << g.edge(e).tail << ',' << g.edge(e).head << ',' << flow[static_cast<size_t>(e)] << '\n';
  }
}

void write_cut(const std::string& path, const CutCertificate& cut) {
  Json j;
  j["cut_capacity"] = cut.cut_capacity;
  j["cut_norm"] = cut.cut_norm;
  j["demand_value"] = cut.demand_value;
  j["source_side"] = cut.source_side;
  j["potentials"] = cut.potentials;
  std::ofstream out = open_output(path);
  out << j.dump(2) << '\n';
}

}  // namespace

void RunConfig::validate() const {
  if (!(eps > 0.0) || !(eps < 0.5)) throw InvalidInput("--eps must lie in (0, 1/2)");
  if (r != 0 && r < 4) throw InvalidInput("--r must be at least 4");
  if (!(c_w > 0.0) || !(c_s > 0.0) || !(c_div > 0.0) || !(c_bdry > 0.0)) {
    throw InvalidInput("constant overrides must be positive");
  }
  if (outer_cap < 0 || inner_cap < 0) throw InvalidInput("iteration caps must be non-negative");
  if (grid.has_value() == !input.empty()) throw InvalidInput("give exactly one of --input and --grid");
  if (demand && !(*demand > 0.0)) throw InvalidInput("--demand must be positive");
  parse_kind(sparsifier);
}

MaxFlowOptions RunConfig::max_flow_options() const {
  MaxFlowOptions o;
  o.eps = eps;
  o.c_w = c_w;
  o.outer_iterations = outer_cap;
  o.inner_iterations = inner_cap;
  o.strict = strict;
  o.seed = seed;
  o.instance.kind = parse_kind(sparsifier);
  o.instance.sparsify.sparsify.c_s = c_s;
  return o;
}

GridLayout parse_grid(const std::string& text, int layers) {
  GridLayout layout;
  layout.layers = layers;
  char x = 0;
  std::istringstream in(text);
  if (!(in >> layout.rows >> x >> layout.cols) || x != 'x' || layout.rows < 1 || layout.cols < 1 || layers < 1) {
    throw InvalidInput("grid must look like RxC, got `" + text + "`");
  }
  std::string rest;
  if (in >> rest) throw InvalidInput("grid must look like RxC, got `" + text + "`");
  return layout;
}

RunOutcome run_maxflow(const RunConfig& config) {
  config.validate();
  const Clock::time_point start = Clock::now();
  RunOutcome out;
  out.instance = load_instance(config);
  const Instance& inst = out.instance;
  const WeightedGraph& g = inst.graph;
  const double ratio = spread(g.capacity());
  if (ratio > g.num_edges() / config.eps) {
    std::cerr << "warning: capacity ratio " << ratio << " exceeds m / eps = " << g.num_edges() / config.eps
              << "; running unclamped\n";
  }
  const int r = config.r > 0 ? config.r : default_group_size(g.num_edges());
  out.partition = make_partition(config, inst, r);
  const Partition& p = out.partition;
  std::vector<std::optional<SeparatorTree>> trees;
  MaxFlowOptions options = config.max_flow_options();
  if (options.instance.kind == SparsifierKind::kRecursive) {
    trees = make_trees(config, inst, p);
    options.instance.trees = &trees;
  }
  const double partition_seconds = seconds_since(start);

  std::ofstream trace;
  if (!config.trace.empty()) {
    trace = open_output(config.trace);
    trace << "demand,t,value,max_congestion,average_max_congestion\n";
    options.trace = &trace;
  }

  Json j;
  j["instance"] = inst.name;
  j["n"] = g.num_vertices();
  j["m"] = g.num_edges();
  j["r"] = p.r;
  j["groups"] = p.num_groups();
  j["eps"] = config.eps;
  j["seed"] = config.seed;
  j["strict"] = config.strict;
  j["sparsifier"] = config.sparsifier;

  const Clock::time_point solve_start = Clock::now();
  if (config.demand) {
    const ProbeResult probe = probe_flow(g, p, inst.source, inst.sink, *config.demand, options);
    out.flow = probe.flow.empty() ? std::vector<double>(static_cast<size_t>(g.num_edges()), 0.0) : probe.flow;
    out.flow_value = probe.value;
    out.cut = probe.cut;
    out.exit_code = probe.status == GroupedFlowStatus::kFail ? 2 : 0;
    j["status"] = status_name(probe.status);
    j["demand"] = *config.demand;
    j["flow_value"] = probe.value;
    j["iterations_outer"] = probe.outer_iterations;
    j["iterations_inner_total"] = probe.inner_iterations;
    j["average_max_congestion"] = probe.average_max_congestion;
    j["width_violations"] = probe.width_violations;
    j["oracle_contract_misses"] = probe.contract_misses;
    j["weight_spread"] = probe.weight_spread;
  } else {
    const MaxFlowResult result = approx_max_flow(g, p, inst.source, inst.sink, options);
    out.flow = result.flow;
    out.flow_value = result.flow_value;
    j["status"] = "ok";
    j["flow_value"] = result.flow_value;
    j["iterations_outer"] = result.iterations_outer;
    j["iterations_inner_total"] = result.iterations_inner_total;
    j["probes"] = result.probes;
    j["rho_outer"] = result.rho_outer;
    j["max_edge_congestion"] = result.max_edge_congestion;
    j["per_group_congestion_max"] = result.per_group_congestion_max;
    j["width_violations"] = result.width_violations;
    j["oracle_contract_misses"] = result.contract_misses;
    j["weight_spread"] = result.weight_spread;
    j["bracket"] = {result.bracket_lo, result.bracket_hi};
  }
  const double solve_seconds = seconds_since(solve_start);
  if (out.cut && out.cut->has_cut) j["cut_value"] = out.cut->cut_capacity;

  double exact_seconds = 0.0;
  if (config.exact) {
    const Clock::time_point exact_start = Clock::now();
    out.exact_value = exact_max_flow(g, inst.source, inst.sink).value;
    exact_seconds = seconds_since(exact_start);
    j["exact_value"] = *out.exact_value;
    j["ratio"] = out.flow_value / *out.exact_value;
  }
  if (config.timings) {
    j["timings"] = {{"partition", partition_seconds},
                    {"solve", solve_seconds},
                    {"exact", exact_seconds},
                    {"total", seconds_since(start)}};
  }
  out.json = j.dump(2) + "\n";

  if (!config.emit_flow.empty()) write_flow(config.emit_flow, g, out.flow);
  if (!config.emit_cut.empty() && out.cut) write_cut(config.emit_cut, *out.cut);
  if (!config.json.empty()) {
    std::ofstream file = open_output(config.json);
    file << out.json;
  }
  return out;
}

std::vector<BenchRow> run_bench(const BenchConfig& config) {
  std::vector<BenchRow> rows(config.grids.size());
  parallel_for(config.grids.size(), [&](std::size_t i) {
    RunConfig run = config.base;
    run.grid = config.grids[i];
    run.input.clear();
    run.json.clear();
    run.emit_flow.clear();
    run.emit_cut.clear();
    run.trace.clear();
    run.demand.reset();
    run.exact = false;
    const Clock::time_point start = Clock::now();
    const RunOutcome outcome = run_maxflow(run);
    BenchRow& row = rows[i];
    row.wall_seconds = seconds_since(start);
    const nlohmann::json parsed = nlohmann::json::parse(outcome.json);
    row.instance = outcome.instance.name;
    row.n = outcome.instance.graph.num_vertices();
    row.m = outcome.instance.graph.num_edges();
    row.r = outcome.partition.r;
    row.eps = run.eps;
    row.value = outcome.flow_value;
    row.solver_iterations = parsed.at("iterations_inner_total").get<long>();
    if (row.m <= 100000) {
      row.exact = exact_max_flow(outcome.instance.graph, outcome.instance.source, outcome.instance.sink).value;
      if (!config.diagnostics_dir.empty() && row.value < (1.0 - run.eps) * *row.exact) {
        std::filesystem::create_directories(config.diagnostics_dir);
        const std::string stem = config.diagnostics_dir + "/" + row.instance + "_seed" + std::to_string(run.seed);
        run.trace = stem + ".trace.csv";
        run.json = stem + ".json";
        run.exact = true;
        run_maxflow(run);
      }
    }
  });
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows, bool timings) {
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "instance,n,m,r,eps,value,exact,ratio,wall_time,solver_iters\n";
  for (const BenchRow& row : rows) {
    out << row.instance << ',' << row.n << ',' << row.m << ',' << row.r << ',' << row.eps << ',' << row.value << ',';
    if (row.exact) out << *row.exact << ',' << row.value / *row.exact;
    else out << ',';
    out << ',';
    if (timings) out << row.wall_seconds;
    out << ',' << row.solver_iterations << '\n';
  }
  return out.str();
}

double loglog_slope(const std::vector<BenchRow>& rows) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int count = 0;
  for (const BenchRow& row : rows) {
    if (row.m <= 0 || !(row.wall_seconds > 0.0)) continue;
    const double x = std::log(static_cast<double>(row.m));
    const double y = std::log(row.wall_seconds);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2) return std::numeric_limits<double>::quiet_NaN();
  const double denom = count * sxx - sx * sx;
  return denom == 0.0 ? std::numeric_limits<double>::quiet_NaN() : (count * sxy - sx * sy) / denom;
}

}  // namespace sepflow
