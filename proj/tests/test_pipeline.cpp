#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sepflow/cli.hpp"
#include "sepflow/exact_flow.hpp"
#include "sepflow/instances.hpp"
#include "sepflow/pipeline.hpp"

using namespace sepflow;

namespace {

MaxFlowOptions practical(double eps = 0.1) {
  RunConfig c;
  c.eps = eps;
  return c.max_flow_options();
}

Partition single_group(const WeightedGraph& g, const std::vector<Vertex>& terminals) {
  Partition p;
  p.r = std::max(4, g.num_edges());
  p.groups.resize(1);
  for (EdgeId e = 0; e < g.num_edges(); ++e) p.groups[0].push_back(e);
  p.boundary = compute_boundaries(g, p.groups, terminals);
  return p;
}

Partition with_groups(const WeightedGraph& g, std::vector<std::vector<EdgeId>> groups, int r,
                      const std::vector<Vertex>& terminals) {
  Partition p;
  p.r = r;
  p.groups = std::move(groups);
  p.boundary = compute_boundaries(g, p.groups, terminals);
  return p;
}

std::vector<double> boundary_demand(size_t b, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  std::vector<double> d(b);
  double mean = 0.0;
  for (double& x : d) {
    x = nd(gen);
    mean += x;
  }
  for (double& x : d) x -= mean / static_cast<double>(b);
  return d;
}

/// One-group network over local ids 0..n-1; boundary listed by position.
GroupedNetwork one_group(int n, std::vector<Edge> edges, std::vector<double> resistance, std::vector<Vertex> boundary) {
  GroupedNetwork net;
  net.num_vertices = n;
  net.edges = std::move(edges);
  net.weight = std::move(resistance);
  net.groups = {std::vector<EdgeId>(net.edges.size())};
  std::iota(net.groups[0].begin(), net.groups[0].end(), 0);
  net.boundary = {std::move(boundary)};
  return net;
}

GroupedNetwork network_of_sparsifier(const VertexSparsifier& s) {
  std::vector<Edge> edges;
  std::vector<double> resistance;
  for (const WeightedEdge& e : s.laplacian.edges()) {
    edges.push_back({e.u, e.v});
    resistance.push_back(1.0 / e.w);
  }
  std::vector<Vertex> local(s.boundary.size());
  std::iota(local.begin(), local.end(), 0);
  return one_group(static_cast<int>(s.boundary.size()), edges, resistance, local);
}

std::vector<Vertex> perimeter(const GridLayout& l) {
  std::vector<Vertex> out;
  for (int i = 0; i < l.rows; ++i)
    for (int j = 0; j < l.cols; ++j)
      if (i == 0 || j == 0 || i == l.rows - 1 || j == l.cols - 1) out.push_back(l.vertex(0, i, j));
  return out;
}

}  // namespace

TEST(OracleWeights, Formula) {
  WeightedGraph one(2, {{0, 1}}, {1.0});
  const Partition p1 = single_group(one, {0, 1});
  const auto w1 = oracle_edge_weights(OracleWeights::uniform(p1, 1), one.capacity(), p1, 0.2);
  EXPECT_NEAR(w1[0], 0.945, 1e-15);

  WeightedGraph path(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}, {1.0, 1.0, 1.0, 1.0});
  const Partition p4 = single_group(path, {0, 4});
  const auto w4 = oracle_edge_weights(OracleWeights::uniform(p4, 4), path.capacity(), p4, 0.2);
  for (double w : w4) EXPECT_NEAR(w, 0.23625, 1e-15);

  WeightedGraph doubled(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}, {2.0, 1.0, 1.0, 1.0});
  const auto w2 = oracle_edge_weights(OracleWeights::uniform(p4, 4), doubled.capacity(), p4, 0.2);
  EXPECT_NEAR(w2[0], w4[0] / 4.0, 1e-15);
  EXPECT_NEAR(w2[1], w4[1], 1e-15);
}

TEST(OracleWeights, TotalsTrackEntries) {
  const GridLayout layout{6, 6, 1};
  const WeightedGraph g = make_grid(layout);
  const Partition p = grid_r_division(layout, 12);
  OracleWeights w = OracleWeights::uniform(p, g.num_edges());
  EXPECT_DOUBLE_EQ(w.total(), g.num_edges());
  for (size_t e = 0; e < w.edge.size(); ++e) w.edge[e] = 1.0 + 0.01 * static_cast<double>(e);
  w.recompute_totals(p);
  for (int i = 0; i < p.num_groups(); ++i) {
    double sum = 0.0;
    for (EdgeId e : p.groups[static_cast<size_t>(i)]) sum += w.edge[static_cast<size_t>(e)];
    EXPECT_NEAR(w.group_total[static_cast<size_t>(i)], sum, 1e-12 * sum);
  }
  const double total = std::accumulate(w.edge.begin(), w.edge.end(), 0.0);
  EXPECT_NEAR(w.total(), total, 1e-9 * total);
}

TEST(PivotIdentity, BoundaryDemandsSeeTheSchurComplement) {
  std::mt19937_64 gen(83);
  std::uniform_int_distribution<int> size(3, 20);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = size(gen);
    const oracle::RandomGraph rg = oracle::random_connected(n, n, gen);
    std::vector<Vertex> all(static_cast<size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), gen);
    std::uniform_int_distribution<int> bsize(2, n - 1);
    all.resize(static_cast<size_t>(bsize(gen)));
    std::sort(all.begin(), all.end());
    const std::vector<double> db = boundary_demand(all.size(), gen);
    std::vector<double> d(static_cast<size_t>(n), 0.0);
    for (size_t k = 0; k < all.size(); ++k) d[static_cast<size_t>(all[k])] = db[k];
    const double full = oracle::optimum_energy(n, rg.edges, rg.weight, d);
    const Eigen::MatrixXd s = exact_schur(laplacian_from_conductances(n, rg.edges, rg.weight), all).dense();
    const Eigen::Map<const Eigen::VectorXd> x(db.data(), static_cast<Eigen::Index>(db.size()));
    const double reduced = x.dot(oracle::pinv(s) * x);
    EXPECT_LE(std::abs(full - reduced), 1e-7 * full);
  }
}

TEST(ConvertFlow, IdentityConversion) {
  const GridLayout layout{4, 4, 1};
  const WeightedGraph g = make_grid(layout);
  const auto bdry = perimeter(layout);
  std::vector<double> resistance(static_cast<size_t>(g.num_edges()));
  std::mt19937_64 gen(89);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (double& r : resistance) r = u(gen);
  const GroupedNetwork net = one_group(g.num_vertices(), g.edges(), resistance, bdry);
  std::vector<double> d(static_cast<size_t>(g.num_vertices()), 0.0);
  const auto db = boundary_demand(bdry.size(), gen);
  for (size_t k = 0; k < bdry.size(); ++k) d[static_cast<size_t>(bdry[k])] = db[k];
  const auto f = oracle::electrical_flow(g.num_vertices(), g.edges(), resistance, d);
  const double eps = 0.1;
  const auto back = convert_flow(net, net, f, eps);
  const double before = oracle::energy(f, resistance);
  const double after = oracle::energy(back, resistance);
  EXPECT_LE(std::sqrt(after), (1.0 + 3.0 * eps) * std::sqrt(before));
  EXPECT_LE(after, (1.0 + eps) * before);
  const auto res = oracle::residual(g.num_vertices(), g.edges(), back);
  for (size_t v = 0; v < d.size(); ++v) EXPECT_NEAR(res[v], d[v], 1e-9);
}

TEST(ConvertFlow, PathToSeriesEdge) {
  const GroupedNetwork path = one_group(3, {{0, 1}, {1, 2}}, {1.0, 1.0}, {0, 2});
  const GroupedNetwork edge = one_group(2, {{0, 1}}, {2.0}, {0, 1});
  const auto f = convert_flow(path, edge, std::vector<double>{1.0, 1.0}, 0.01);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_NEAR(f[0], 1.0, 1e-12);
  EXPECT_NEAR(oracle::energy(f, edge.weight), 2.0, 1e-12);
  const auto g = convert_flow(edge, path, f, 0.01);
  EXPECT_NEAR(g[0], 1.0, 1e-12);
  EXPECT_NEAR(g[1], 1.0, 1e-12);
  EXPECT_NEAR(oracle::energy(g, path.weight), 2.0, 1e-12);
}

TEST(ConvertFlow, GridBlockAgainstItsSparsifier) {
  const GridLayout layout{4, 4, 1};
  std::mt19937_64 gen(97);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  const double eps = 0.1;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> conductance(24);
    for (double& c : conductance) c = u(gen);
    const WeightedGraph g = make_grid(layout).with_weights(conductance);
    std::vector<EdgeId> all(24);
    std::iota(all.begin(), all.end(), 0);
    const auto bdry = perimeter(layout);
    const VertexSparsifier s = one_step_vertex_sparsify(g, all, bdry, eps, 7 + static_cast<std::uint64_t>(trial));
    std::vector<double> resistance(24);
    for (size_t e = 0; e < 24; ++e) resistance[e] = 1.0 / conductance[e];
    const GroupedNetwork dst = one_group(16, g.edges(), resistance, bdry);
    const GroupedNetwork src = network_of_sparsifier(s);
    const auto db = boundary_demand(bdry.size(), gen);
    const auto fh = oracle::electrical_flow(src.num_vertices, src.edges, src.weight, db);
    const auto fg = convert_flow(src, dst, fh, eps);
    const double ch = std::sqrt(oracle::energy(fh, src.weight));
    const double cg = std::sqrt(oracle::energy(fg, dst.weight));
    EXPECT_LE(cg, (1.0 + 3.0 * eps) * ch + 1e-6);
    std::vector<double> d(16, 0.0);
    for (size_t k = 0; k < bdry.size(); ++k) d[static_cast<size_t>(bdry[k])] = db[k];
    const double opt = oracle::optimum_energy(16, g.edges(), conductance, d);
    EXPECT_LE(cg * cg, (1.0 + 3.0 * eps) * opt + 1e-6);
    const auto fh2 = convert_flow(dst, src, fg, eps);
    EXPECT_LE(std::sqrt(oracle::energy(fh2, src.weight)), (1.0 + 3.0 * eps) * (1.0 + 3.0 * eps) * ch + 1e-6);
  }
}

TEST(ConvertFlow, RejectsMismatchedBoundaries) {
  const GroupedNetwork path = one_group(3, {{0, 1}, {1, 2}}, {1.0, 1.0}, {0, 2});
  const GroupedNetwork three = one_group(3, {{0, 1}, {1, 2}}, {1.0, 1.0}, {0, 1, 2});
  EXPECT_THROW(convert_flow(path, three, std::vector<double>{1.0, 1.0}, 0.1), InvalidInput);
}

TEST(SparsifiedInstance, QuotientCoversEveryBoundaryVertex) {
  const Instance inst = grid_instance({10, 10, 1}, 3);
  const Partition p = grid_r_division(*inst.layout, 24, {inst.source, inst.sink});
  const SparsifiedInstance si = build_sparsified_instance(inst.graph, p, 0.01, 5);
  for (const auto& b : p.boundary)
    for (Vertex v : b) EXPECT_GE(si.original_to_quotient[static_cast<size_t>(v)], 0);
  EXPECT_GE(si.original_to_quotient[static_cast<size_t>(inst.source)], 0);
  EXPECT_GE(si.original_to_quotient[static_cast<size_t>(inst.sink)], 0);
  for (size_t q = 0; q < si.quotient_to_original.size(); ++q) {
    EXPECT_EQ(si.original_to_quotient[static_cast<size_t>(si.quotient_to_original[q])], static_cast<int>(q));
  }
  EXPECT_EQ(si.quotient.groups.size(), p.groups.size());
}

TEST(SparsifiedInstance, CacheReturnsIdenticalSparsifiers) {
  const Instance inst = grid_instance({8, 8, 1}, 4);
  const Partition p = grid_r_division(*inst.layout, 24, {inst.source, inst.sink});
  SparsifierCache cache;
  const SparsifiedInstance a = build_sparsified_instance(inst.graph, p, 0.05, 9, {}, &cache);
  EXPECT_EQ(cache.hits, 0);
  const SparsifiedInstance b = build_sparsified_instance(inst.graph, p, 0.05, 9, {}, &cache);
  EXPECT_EQ(cache.hits, p.num_groups());
  const SparsifiedInstance c = build_sparsified_instance(inst.graph, p, 0.05, 9);
  for (int i = 0; i < p.num_groups(); ++i) {
    EXPECT_TRUE(a.sparsifiers[static_cast<size_t>(i)].laplacian.dense() == b.sparsifiers[static_cast<size_t>(i)].laplacian.dense());
    EXPECT_TRUE(a.sparsifiers[static_cast<size_t>(i)].laplacian.dense() == c.sparsifiers[static_cast<size_t>(i)].laplacian.dense());
  }
}

TEST(ApproxGroupedFlow, ExactSparsifiersTrackTheDirectSolver) {
  const Instance inst = grid_instance({6, 6, 1}, 2);
  const Partition p = grid_r_division(*inst.layout, 12, {inst.source, inst.sink});
  const double eps = 0.1;
  const auto w = oracle_edge_weights(OracleWeights::uniform(p, inst.graph.num_edges()), inst.graph.capacity(), p, eps);
  const WeightedGraph g = inst.graph.with_weights(w);
  const double maxflow = exact_max_flow(inst.graph, inst.source, inst.sink).value;
  const DemandVector d = DemandVector::st(g.num_vertices(), inst.source, inst.sink, 0.5 * maxflow);
  InstanceOptions io;
  io.kind = SparsifierKind::kExact;
  const SparsifiedInstance si = build_sparsified_instance(g, p, eps / 10.0, 1, io);
  GroupedFlowOptions opt;
  opt.early_exit = false;
  opt.max_iterations = 200;
  const ApproxGroupedFlowResult approx = approx_grouped_flow(si, d, eps, opt);

  GroupedFlowProblem direct;
  direct.num_vertices = g.num_vertices();
  direct.edges = g.edges();
  direct.weight = w;
  direct.groups = p.groups;
  direct.demand = d;
  direct.eps = eps / 2.0;
  const GroupedFlowResult ref = grouped_flow(direct, opt);
  ASSERT_EQ(approx.quotient.state.accepted, ref.state.accepted);
  EXPECT_LE(approx.max_group_congestion, (1.0 + eps) * ref.max_group_congestion);
  EXPECT_GE(approx.max_group_congestion, ref.max_group_congestion / (1.0 + eps));
  const DemandVector res = residual(approx.flow, g);
  for (int v = 0; v < g.num_vertices(); ++v) EXPECT_NEAR(res[v], d[v], 1e-9 * maxflow);
}

TEST(ApproxGroupedFlow, TenfoldOverDemandFails) {
  const Instance inst = grid_instance({6, 6, 1}, 6);
  const Partition p = grid_r_division(*inst.layout, 12, {inst.source, inst.sink});
  const double eps = 0.1;
  const auto w = oracle_edge_weights(OracleWeights::uniform(p, inst.graph.num_edges()), inst.graph.capacity(), p, eps);
  const WeightedGraph g = inst.graph.with_weights(w);
  const double maxflow = exact_max_flow(inst.graph, inst.source, inst.sink).value;
  const DemandVector d = DemandVector::st(g.num_vertices(), inst.source, inst.sink, 10.0 * maxflow);
  const SparsifiedInstance si = build_sparsified_instance(g, p, eps / 10.0, 1);
  const ApproxGroupedFlowResult r = approx_grouped_flow(si, d, eps);
  EXPECT_EQ(r.status, GroupedFlowStatus::kFail);
}

TEST(ApproxGroupedFlow, SingleGroupReducesToAnElectricalFlow) {
  const Instance inst = grid_instance({5, 5, 1}, 8);
  const Partition p = single_group(inst.graph, {inst.source, inst.sink});
  ASSERT_EQ(p.boundary[0], (std::vector<Vertex>{inst.source, inst.sink}));
  const double eps = 0.1;
  const WeightedGraph& g = inst.graph;
  std::vector<double> resistance(g.weight().size());
  for (size_t e = 0; e < resistance.size(); ++e) resistance[e] = g.weight()[e];
  std::vector<double> d(static_cast<size_t>(g.num_vertices()), 0.0);
  d[static_cast<size_t>(inst.source)] = 1.0;
  d[static_cast<size_t>(inst.sink)] = -1.0;
  const double unit_cong = std::sqrt(oracle::energy(oracle::electrical_flow(g.num_vertices(), g.edges(), resistance, d), resistance));
  for (double& x : d) x *= 0.8 / unit_cong;
  const auto witness = oracle::electrical_flow(g.num_vertices(), g.edges(), resistance, d);
  const double witness_cong = std::sqrt(oracle::energy(witness, resistance));
  ASSERT_NEAR(witness_cong, 0.8, 1e-9);
  const SparsifiedInstance si = build_sparsified_instance(g, p, eps / 10.0, 3);
  const ApproxGroupedFlowResult r = approx_grouped_flow(si, DemandVector(d), eps);
  ASSERT_EQ(r.status, GroupedFlowStatus::kSuccess);
  EXPECT_LE(r.max_group_congestion, (1.0 + eps) * witness_cong);
}

TEST(ApproxGroupedFlow, RejectsInteriorDemand) {
  const Instance inst = grid_instance({5, 5, 1}, 8);
  const Partition p = single_group(inst.graph, {inst.source, inst.sink});
  const SparsifiedInstance si = build_sparsified_instance(inst.graph, p, 0.01, 3);
  EXPECT_THROW(approx_grouped_flow(si, DemandVector::st(25, inst.source, 12, 1.0), 0.1), InvalidInput);
}

TEST(ExactMaxFlow, Examples) {
  WeightedGraph one(2, {{0, 1}}, {7.0});
  EXPECT_NEAR(exact_max_flow(one, 0, 1).value, 7.0, 1e-12);
  WeightedGraph two(4, {{0, 1}, {1, 3}, {0, 2}, {2, 3}}, {3.0, 3.0, 5.0, 5.0});
  EXPECT_NEAR(exact_max_flow(two, 0, 3).value, 8.0, 1e-12);
  const WeightedGraph grid = make_grid({4, 4, 1});
  EXPECT_NEAR(exact_max_flow(grid, 0, 15).value, 2.0, 1e-12);
}

TEST(ExactMaxFlow, MatchesBruteForceMinCut) {
  std::mt19937_64 gen(101);
  for (int trial = 0; trial < 40; ++trial) {
    const oracle::RandomGraph rg = oracle::random_connected(10, 14, gen, 1.0, 10.0);
    const WeightedGraph g(rg.n, rg.edges, rg.weight);
    const ExactMaxFlow r = exact_max_flow(g, 0, 9);
    const double brute = oracle::brute_min_cut(rg.n, g.edges(), g.capacity(), 0, 9);
    EXPECT_NEAR(r.value, brute, 1e-7 * brute);
    EXPECT_NEAR(r.cut_capacity, brute, 1e-7 * brute);
    EXPECT_NEAR(cut_capacity(g, r.source_side), brute, 1e-7 * brute);
    const DemandVector res = residual(r.flow, g);
    for (int v = 1; v < 9; ++v) EXPECT_NEAR(res[v], 0.0, 1e-9);
    EXPECT_NEAR(res[0], r.value, 1e-9);
    EXPECT_LE(max_edge_congestion(r.flow, g), 1.0 + 1e-9);
  }
}

TEST(ApproxMaxFlow, SingleEdge) {
  WeightedGraph g(2, {{0, 1}}, {7.0});
  const Partition p = single_group(g, {0, 1});
  const MaxFlowResult r = approx_max_flow(g, p, 0, 1, practical());
  EXPECT_GE(r.flow_value, 7.0 * 0.9);
  EXPECT_LE(r.flow_value, 7.0 + 1e-9);
  EXPECT_NEAR(r.flow[0], r.flow_value, 1e-12);
}

TEST(ApproxMaxFlow, TwoDisjointPaths) {
  WeightedGraph g(4, {{0, 1}, {1, 3}, {0, 2}, {2, 3}}, {3.0, 3.0, 5.0, 5.0});
  const Partition p = with_groups(g, {{0, 1}, {2, 3}}, 4, {0, 3});
  ASSERT_NO_THROW(validate(p, g, {0, 3}));
  const MaxFlowResult r = approx_max_flow(g, p, 0, 3, practical());
  EXPECT_GE(r.flow_value, 8.0 * 0.9);
  EXPECT_LE(r.max_edge_congestion, 1.0);
}

TEST(ApproxMaxFlow, UnitGridSixteen) {
  const Instance inst = grid_instance({16, 16, 1}, 1, false);
  const Partition p = grid_r_division(*inst.layout, 32, {inst.source, inst.sink});
  const MaxFlowResult r = approx_max_flow(inst.graph, p, inst.source, inst.sink, practical());
  const double exact = exact_max_flow(inst.graph, inst.source, inst.sink).value;
  EXPECT_GE(r.flow_value, 0.9 * exact);
  EXPECT_LE(r.max_edge_congestion, 1.0);
  const DemandVector res = residual(r.flow, inst.graph);
  for (int v = 0; v < inst.graph.num_vertices(); ++v) {
    const double want = v == inst.source ? r.flow_value : v == inst.sink ? -r.flow_value : 0.0;
    EXPECT_NEAR(res[v], want, 1e-9 * exact);
  }
}

TEST(ApproxMaxFlow, RejectsInteriorTerminals) {
  const Instance inst = grid_instance({8, 8, 1}, 1);
  const Partition p = grid_r_division(*inst.layout, 24);
  EXPECT_THROW(approx_max_flow(inst.graph, p, 9, inst.sink, practical()), InvalidInput);
  EXPECT_THROW(approx_max_flow(inst.graph, p, 0, 0, practical()), InvalidInput);
}

TEST(CutCertificate, SingleEdge) {
  WeightedGraph g(2, {{0, 1}}, {1.0});
  const Partition p = single_group(g, {0, 1});
  const ProbeResult r = probe_flow(g, p, 0, 1, 2.0, practical());
  ASSERT_EQ(r.status, GroupedFlowStatus::kFail);
  ASSERT_TRUE(r.cut.has_value());
  EXPECT_LE(r.cut->cut_norm, 1.0 + 1e-8);
  EXPECT_GE(r.cut->demand_value, 1.0 - 10.0 * 0.1 - 1e-8);
  EXPECT_TRUE(r.cut->has_cut);
  EXPECT_NEAR(r.cut->cut_capacity, 1.0, 1e-12);
  EXPECT_EQ(r.cut->source_side, (std::vector<Vertex>{0}));
}

TEST(CutCertificate, PathOfThree) {
  WeightedGraph g(4, {{0, 1}, {1, 2}, {2, 3}}, {1.0, 1.0, 1.0});
  const Partition p = with_groups(g, {{0}, {1}, {2}}, 4, {0, 3});
  const ProbeResult r = probe_flow(g, p, 0, 3, 2.0, practical());
  ASSERT_EQ(r.status, GroupedFlowStatus::kFail);
  EXPECT_LE(r.cut->cut_norm, 1.0 + 1e-8);
  EXPECT_GE(r.cut->demand_value, 1.0 - 10.0 * 0.1 - 1e-8);
  EXPECT_NEAR(r.cut->cut_capacity, 1.0, 1e-12);
}

TEST(CutCertificate, BottleneckColumn) {
  const GridLayout layout{8, 8, 1};
  std::vector<double> cap;
  for (const Edge& e : grid_edges(layout)) {
    const bool crosses = layout.row_of(e.tail) == layout.row_of(e.head) && layout.col_of(e.tail) == 3;
    cap.push_back(crosses ? 0.25 : 4.0);
  }
  const WeightedGraph g = make_grid(layout, cap);
  const Vertex s = 0, t = 63;
  const Partition p = grid_r_division(layout, 24, {s, t});
  const ExactMaxFlow exact = exact_max_flow(g, s, t);
  ASSERT_NEAR(exact.value, 2.0, 1e-9);
  const double eps = 0.02;
  const ProbeResult r = probe_flow(g, p, s, t, 4.0 * exact.value, practical(eps));
  ASSERT_EQ(r.status, GroupedFlowStatus::kFail);
  EXPECT_LE(r.cut->cut_norm, 1.0 + 1e-8);
  EXPECT_GE(r.cut->demand_value, 1.0 - 10.0 * eps - 1e-8);
  ASSERT_TRUE(r.cut->has_cut);
  EXPECT_LE(r.cut->cut_capacity, exact.value / (1.0 - 10.0 * eps) + 1e-9);
  EXPECT_GE(r.cut->cut_capacity, exact.value - 1e-9);
}

TEST(CutCertificate, RequiresAFailingRun) {
  WeightedGraph g(2, {{0, 1}}, {1.0});
  const Partition p = single_group(g, {0, 1});
  const SparsifiedInstance si = build_sparsified_instance(g, p, 0.01, 1);
  ApproxGroupedFlowResult ok;
  ok.status = GroupedFlowStatus::kSuccess;
  EXPECT_THROW(cut_certificate(si, ok, DemandVector::st(2, 0, 1, 1.0), 0, 1), InvalidInput);
}

TEST(OuterWidth, Formula) {
  EXPECT_DOUBLE_EQ(outer_width(32, 0.1, 10.0), std::ceil(10.0 * std::sqrt(320.0)));
  EXPECT_DOUBLE_EQ(outer_width(64, 0.1, 0.1), std::ceil(0.1 * std::sqrt(640.0)));
}

TEST(GroupRmsCongestion, PerGroup) {
  WeightedGraph g(3, {{0, 1}, {1, 2}}, {2.0, 4.0});
  const Partition p = with_groups(g, {{0, 1}}, 4, {0, 2});
  const auto rms = group_rms_congestion(g, p, std::vector<double>{1.0, 2.0});
  EXPECT_NEAR(rms[0], 0.5, 1e-15);
}
