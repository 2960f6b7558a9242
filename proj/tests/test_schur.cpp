#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sepflow/partition.hpp"
#include "sepflow/schur.hpp"

using namespace sepflow;

namespace {

SparseLaplacian lap(const oracle::RandomGraph& rg) { return laplacian_from_conductances(rg.n, rg.edges, rg.weight); }

SparseLaplacian path_laplacian(int n) {
  std::vector<WeightedEdge> e;
  for (int i = 0; i + 1 < n; ++i) e.push_back({i, i + 1, 1.0});
  return SparseLaplacian::from_edges(n, e);
}

std::vector<Vertex> random_subset(int n, int k, std::mt19937_64& gen) {
  std::vector<Vertex> all(static_cast<size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  std::shuffle(all.begin(), all.end(), gen);
  all.resize(static_cast<size_t>(k));
  std::sort(all.begin(), all.end());
  return all;
}

std::vector<EdgeId> all_edges(const WeightedGraph& g) {
  std::vector<EdgeId> out(static_cast<size_t>(g.num_edges()));
  std::iota(out.begin(), out.end(), 0);
  return out;
}

std::vector<Vertex> perimeter(const GridLayout& l) {
  std::vector<Vertex> out;
  for (int i = 0; i < l.rows; ++i)
    for (int j = 0; j < l.cols; ++j)
      if (i == 0 || j == 0 || i == l.rows - 1 || j == l.cols - 1) out.push_back(l.vertex(0, i, j));
  return out;
}

void expect_laplacian(const SparseLaplacian& l) {
  const Eigen::MatrixXd d = l.dense();
  for (int i = 0; i < d.rows(); ++i) {
    EXPECT_LE(std::abs(d.row(i).sum()), 1e-10 * std::max(1.0, d(i, i)));
    for (int j = 0; j < d.cols(); ++j)
      if (i != j) EXPECT_LE(d(i, j), 1e-10);
  }
}

}  // namespace

TEST(ExactSchur, SeriesResistors) {
  const SparseLaplacian s = exact_schur(path_laplacian(3), std::vector<Vertex>{0, 2});
  ASSERT_EQ(s.dimension(), 2);
  ASSERT_EQ(s.num_edges(), 1);
  EXPECT_NEAR(s.edges()[0].w, 0.5, 1e-14);
}

TEST(ExactSchur, StarToTriangle) {
  const std::vector<WeightedEdge> star{{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}};
  const SparseLaplacian s = exact_schur(SparseLaplacian::from_edges(4, star), std::vector<Vertex>{1, 2, 3});
  ASSERT_EQ(s.num_edges(), 3);
  for (const auto& e : s.edges()) EXPECT_NEAR(e.w, 1.0 / 3.0, 1e-14);
}

TEST(ExactSchur, FullBoundaryReturnsInput) {
  const SparseLaplacian l = path_laplacian(4);
  const SparseLaplacian s = exact_schur(l, std::vector<Vertex>{0, 1, 2, 3});
  EXPECT_TRUE(s.dense().isApprox(l.dense(), 1e-15));
}

TEST(ExactSchur, MatchesPartialElimination) {
  std::mt19937_64 gen(41);
  for (int trial = 0; trial < 30; ++trial) {
    const oracle::RandomGraph rg = oracle::random_connected(10, 12, gen);
    const auto bdry = random_subset(10, 4, gen);
    const Eigen::MatrixXd want = oracle::partial_elimination(oracle::laplacian(rg), bdry);
    const Eigen::MatrixXd got = exact_schur(lap(rg), bdry).dense();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) EXPECT_NEAR(got(i, j), want(i, j), 1e-9 * std::abs(want(i, i)));
  }
}

TEST(ExactSchur, IsolatedInteriorIsAnError) {
  const std::vector<WeightedEdge> e{{0, 1, 1.0}};
  EXPECT_THROW(exact_schur(SparseLaplacian::from_edges(3, e), std::vector<Vertex>{0, 1}), InvalidInput);
}

TEST(ExactSchur, EnergyMinimisationIdentity) {
  std::mt19937_64 gen(43);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    const oracle::RandomGraph rg = oracle::random_connected(18, 20, gen);
    const auto bdry = random_subset(18, 6, gen);
    const SparseLaplacian l = lap(rg);
    const LaplacianBlocks b = l.blocks(bdry);
    const SparseLaplacian s = exact_schur(l, bdry);
    Eigen::VectorXd x(6);
    for (int i = 0; i < 6; ++i) x[i] = nd(gen);
    const Eigen::MatrixXd intr(b.intr);
    const Eigen::VectorXd y = -intr.ldlt().solve(Eigen::MatrixXd(b.mid) * x);
    Eigen::VectorXd full(18);
    for (size_t i = 0; i < b.interior.size(); ++i) full[b.interior[i]] = y[static_cast<int>(i)];
    for (size_t i = 0; i < b.boundary.size(); ++i) full[b.boundary[i]] = x[static_cast<int>(i)];
    const double direct = l.quadratic_form(full);
    EXPECT_NEAR(s.quadratic_form(x), direct, 1e-8 * direct);
    Eigen::VectorXd bumped = full;
    bumped[b.interior.front()] += 0.1;
    EXPECT_GT(l.quadratic_form(bumped), direct);
  }
}

TEST(ExactSchur, PreservesSpectralSimilarity) {
  std::mt19937_64 gen(47);
  std::uniform_real_distribution<double> jitter(0.8, 1.2);
  for (int trial = 0; trial < 20; ++trial) {
    const oracle::RandomGraph g = oracle::random_connected(12, 15, gen);
    oracle::RandomGraph h = g;
    for (double& w : h.weight) w *= jitter(gen);
    const oracle::EigenRange before = oracle::generalized_range(oracle::laplacian(h), oracle::laplacian(g));
    const auto bdry = random_subset(12, 5, gen);
    const oracle::EigenRange after = oracle::generalized_range(exact_schur(lap(h), bdry).dense(), exact_schur(lap(g), bdry).dense());
    EXPECT_GE(after.lo, before.lo - 1e-9);
    EXPECT_LE(after.hi, before.hi + 1e-9);
  }
}

TEST(ExactSchur, SpectrumRelations) {
  std::mt19937_64 gen(53);
  for (int trial = 0; trial < 20; ++trial) {
    const oracle::RandomGraph rg = oracle::random_connected(14, 16, gen);
    const auto bdry = random_subset(14, 5, gen);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full(oracle::laplacian(rg));
    const SparseLaplacian s = exact_schur(lap(rg), bdry);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> red(s.dense());
    EXPECT_GE(red.eigenvalues()[1], full.eigenvalues()[1] * (1.0 - 1e-9));
    EXPECT_LE(red.eigenvalues().maxCoeff(), 14.0 * full.eigenvalues().maxCoeff());
    EXPECT_LE(s.max_weight(), 2.0 * full.eigenvalues().maxCoeff());
    expect_laplacian(s);
  }
}

TEST(ApproxSchur, PathWithinSandwich) {
  const SparseLaplacian l = path_laplacian(3);
  const SparseLaplacian s = approx_schur(l, std::vector<Vertex>{0, 2}, spectral_bounds(l).kappa, 0.01);
  ASSERT_EQ(s.num_edges(), 1);
  EXPECT_GE(s.edges()[0].w, 0.495);
  EXPECT_LE(s.edges()[0].w, 0.505);
}

TEST(ApproxSchur, FullBoundaryReturnsInput) {
  const SparseLaplacian l = path_laplacian(5);
  const SparseLaplacian s = approx_schur(l, std::vector<Vertex>{0, 1, 2, 3, 4}, spectral_bounds(l).kappa, 0.1);
  EXPECT_TRUE(s.dense().isApprox(l.dense(), 1e-15));
}

TEST(ApproxSchur, GeneralizedEigenvaluesNearOne) {
  std::mt19937_64 gen(59);
  for (int trial = 0; trial < 20; ++trial) {
    const oracle::RandomGraph rg = oracle::random_connected(30, 40, gen);
    const auto bdry = random_subset(30, 8, gen);
    const SparseLaplacian l = lap(rg);
    ApproxSchurStats stats;
    const SparseLaplacian s = approx_schur(l, bdry, spectral_bounds(l).kappa, 0.1, &stats);
    const oracle::EigenRange range = oracle::generalized_range(s.dense(), exact_schur(l, bdry).dense());
    EXPECT_GE(range.lo, 0.9);
    EXPECT_LE(range.hi, 1.1);
    EXPECT_LE(stats.clamped_mass, 0.01 * stats.trace);
    expect_laplacian(s);
  }
}

TEST(ApproxSchur, RejectsEpsOutOfRange) {
  const SparseLaplacian l = path_laplacian(3);
  EXPECT_THROW(approx_schur(l, std::vector<Vertex>{0, 2}, 10.0, 0.7), InvalidInput);
  EXPECT_THROW(approx_schur(l, std::vector<Vertex>{0, 2}, 10.0, 0.0), InvalidInput);
}

TEST(SpectralBounds, Formula) {
  const SpectralBounds one = spectral_bounds(path_laplacian(2));
  EXPECT_DOUBLE_EQ(one.lambda_min, 0.25);
  EXPECT_DOUBLE_EQ(one.lambda_max, 2.0);
  EXPECT_DOUBLE_EQ(one.kappa, 8.0);
  const SpectralBounds two = spectral_bounds(path_laplacian(3));
  EXPECT_NEAR(two.lambda_min, 1.0 / 9.0, 1e-15);
  EXPECT_DOUBLE_EQ(two.lambda_max, 3.0);
  const std::vector<WeightedEdge> e{{0, 1, 1.0}, {1, 2, 4.0}, {2, 3, 1.0}};
  const SpectralBounds four = spectral_bounds(SparseLaplacian::from_edges(4, e));
  EXPECT_DOUBLE_EQ(four.kappa, 256.0);
  EXPECT_LE(four.kappa, 64.0 * 4.0);
}

TEST(SpectralBounds, BracketTheSpectrum) {
  std::mt19937_64 gen(61);
  for (int trial = 0; trial < 20; ++trial) {
    const oracle::RandomGraph rg = oracle::random_connected(12, 10, gen, 0.01, 10.0);
    const SpectralBounds b = spectral_bounds(lap(rg));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(oracle::laplacian(rg));
    EXPECT_LE(b.lambda_min, es.eigenvalues()[1]);
    EXPECT_GE(b.lambda_max, es.eigenvalues().maxCoeff());
    const SparseLaplacian merged = lap(rg);
    const double u = merged.max_weight() / merged.min_weight();
    EXPECT_LE(b.kappa, 12.0 * 12.0 * 12.0 * u * (1.0 + 1e-12));
  }
}

TEST(WeightFloor, AdditiveRule) {
  const SparseLaplacian f = weight_floor(path_laplacian(2), 0.25);
  EXPECT_DOUBLE_EQ(f.edges()[0].w, 1.0625);
  const SparseLaplacian g = weight_floor(path_laplacian(4), 0.5);
  for (const auto& e : g.edges()) EXPECT_DOUBLE_EQ(e.w, 1.0 + 0.5 / 16.0);
}

TEST(WeightFloor, Sandwich) {
  std::mt19937_64 gen(67);
  for (int trial = 0; trial < 20; ++trial) {
    const oracle::RandomGraph rg = oracle::random_connected(10, 10, gen);
    const SparseLaplacian l = lap(rg);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l.dense());
    const SparseLaplacian f = weight_floor(l, es.eigenvalues()[1]);
    const oracle::EigenRange r = oracle::generalized_range(f.dense(), l.dense());
    EXPECT_GE(r.lo, 1.0 - 1e-10);
    EXPECT_LE(r.hi, 1.0 + 1.0 / 10.0 + 1e-10);
  }
}

TEST(Sparsify, UnderBudgetIsUnchanged) {
  const SparseLaplacian one = path_laplacian(2);
  EXPECT_TRUE(sparsify(one, 0.5, 1).dense().isApprox(one.dense(), 0.0));
  std::vector<WeightedEdge> k16;
  for (int a = 0; a < 16; ++a)
    for (int b = a + 1; b < 16; ++b) k16.push_back({a, b, 1.0});
  const SparseLaplacian k = SparseLaplacian::from_edges(16, k16);
  int good = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const oracle::EigenRange r = oracle::generalized_range(sparsify(k, 0.5, seed).dense(), k.dense());
    if (r.lo >= 0.5 && r.hi <= 1.5) ++good;
  }
  EXPECT_GE(good, 90);
}

TEST(Sparsify, SamplingMeetsBudgetAndSandwich) {
  std::vector<WeightedEdge> k128;
  std::mt19937_64 gen(71);
  std::uniform_real_distribution<double> w(1.0, 3.0);
  for (int a = 0; a < 128; ++a)
    for (int b = a + 1; b < 128; ++b) k128.push_back({a, b, w(gen)});
  const SparseLaplacian k = SparseLaplacian::from_edges(128, k128);
  SparsifyOptions opt;
  opt.c_s = 3.0;
  const long budget = sparsify_budget(128, 0.5, 3.0);
  ASSERT_LT(budget, static_cast<long>(k128.size()));
  int good = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const SparseLaplacian s = sparsify(k, 0.5, seed, opt);
    EXPECT_LE(s.num_edges(), budget);
    expect_laplacian(s);
    const oracle::EigenRange r = oracle::generalized_range(s.dense(), k.dense());
    if (r.lo >= 0.5 && r.hi <= 1.5) ++good;
  }
  EXPECT_GE(good, 18);
}

TEST(Sparsify, DeterministicGivenSeed) {
  std::vector<WeightedEdge> k40;
  for (int a = 0; a < 40; ++a)
    for (int b = a + 1; b < 40; ++b) k40.push_back({a, b, 1.0 + (a * b) % 7});
  const SparseLaplacian k = SparseLaplacian::from_edges(40, k40);
  SparsifyOptions opt;
  opt.c_s = 1.0;
  const SparseLaplacian a = sparsify(k, 0.5, 9, opt);
  const SparseLaplacian b = sparsify(k, 0.5, 9, opt);
  EXPECT_TRUE(a.dense() == b.dense());
  const SparseLaplacian c = sparsify(k, 0.5, 10, opt);
  EXPECT_FALSE(a.dense() == c.dense());
}

TEST(EffectiveResistance, SketchTracksExact) {
  std::mt19937_64 gen(73);
  const oracle::RandomGraph rg = oracle::random_connected(30, 60, gen);
  const SparseLaplacian l = lap(rg);
  const auto exact = effective_resistances(l);
  const auto sketch = sketched_resistances(l, 0.5, 3, 4.0);
  const Eigen::MatrixXd lp = oracle::pinv(l.dense());
  const auto edges = l.edges();
  for (size_t e = 0; e < edges.size(); ++e) {
    const double want = lp(edges[e].u, edges[e].u) + lp(edges[e].v, edges[e].v) - 2.0 * lp(edges[e].u, edges[e].v);
    EXPECT_NEAR(exact[e], want, 1e-10 * want);
    EXPECT_GT(sketch[e], 0.3 * want);
    EXPECT_LT(sketch[e], 3.0 * want);
  }
}

TEST(OneStepSparsify, PathSeriesValue) {
  WeightedGraph g(3, {{0, 1}, {1, 2}}, {1.0, 1.0}, {1.0, 1.0});
  const VertexSparsifier s = one_step_vertex_sparsify(g, {0, 1}, std::vector<Vertex>{0, 2}, 0.3, 1);
  ASSERT_EQ(s.laplacian.num_edges(), 1);
  EXPECT_GE(s.laplacian.edges()[0].w, 0.35);
  EXPECT_LE(s.laplacian.edges()[0].w, 0.65);
  EXPECT_EQ(s.boundary, (std::vector<Vertex>{0, 2}));
  EXPECT_EQ(s.provenance, Provenance::kOneStep);
}

TEST(OneStepSparsify, GridBlockPerimeter) {
  const GridLayout layout{5, 5, 1};
  const WeightedGraph g = make_grid(layout);
  const auto bdry = perimeter(layout);
  ASSERT_EQ(bdry.size(), 16u);
  const VertexSparsifier s = one_step_vertex_sparsify(g, all_edges(g), bdry, 0.2, 5);
  const SparseLaplacian exact = exact_vertex_sparsifier(g, all_edges(g), bdry).laplacian;
  const oracle::EigenRange r = oracle::generalized_range(s.laplacian.dense(), exact.dense());
  EXPECT_GE(r.lo, 0.8);
  EXPECT_LE(r.hi, 1.2);
  expect_laplacian(s.laplacian);
  const double u = s.laplacian.max_weight() / s.laplacian.min_weight();
  EXPECT_LE(u, 10.0 * std::pow(25.0, 5.0));
}

TEST(OneStepSparsify, FullBoundaryApproximatesInput) {
  std::mt19937_64 gen(79);
  const oracle::RandomGraph rg = oracle::random_connected(10, 10, gen);
  const SparseLaplacian l = lap(rg);
  std::vector<Vertex> all(10);
  std::iota(all.begin(), all.end(), 0);
  const VertexSparsifier s = one_step_vertex_sparsify(l, all, 0.3, 3);
  const oracle::EigenRange r = oracle::generalized_range(s.laplacian.dense(), l.dense());
  EXPECT_GE(r.lo, 0.7);
  EXPECT_LE(r.hi, 1.3);
}

TEST(RecursiveSparsify, LeafEqualsOneStep) {
  const GridLayout layout{3, 4, 1};
  const WeightedGraph g = make_grid(layout);
  const auto edges = all_edges(g);
  const SeparatorTree t = separator_tree_for_grid_block(layout, g, edges, 16);
  ASSERT_EQ(t.nodes.size(), 1u);
  const auto bdry = perimeter(layout);
  const VertexSparsifier rec = recursive_vertex_sparsify(g, edges, bdry, t, 0.3, 11);
  const VertexSparsifier one = one_step_vertex_sparsify(g, edges, bdry, 0.3, 11);
  const oracle::EigenRange r = oracle::generalized_range(rec.laplacian.dense(), one.laplacian.dense());
  EXPECT_NEAR(r.lo, 1.0, 0.3);
  EXPECT_NEAR(r.hi, 1.0, 0.3);
  const SparseLaplacian exact = exact_vertex_sparsifier(g, edges, bdry).laplacian;
  const oracle::EigenRange re = oracle::generalized_range(rec.laplacian.dense(), exact.dense());
  EXPECT_GE(re.lo, 0.7);
  EXPECT_LE(re.hi, 1.3);
}

TEST(RecursiveSparsify, PathOfNineVertices) {
  const GridLayout layout{1, 9, 1};
  const WeightedGraph g = make_grid(layout);
  const auto edges = all_edges(g);
  const SeparatorTree t = separator_tree_for_grid_block(layout, g, edges, 5);
  ASSERT_GE(t.depth(), 1);
  const double eps = 0.3;
  const VertexSparsifier s = recursive_vertex_sparsify(g, edges, std::vector<Vertex>{0, 8}, t, eps, 2);
  ASSERT_EQ(s.laplacian.num_edges(), 1);
  EXPECT_GE(s.laplacian.edges()[0].w, (1.0 - eps) / 8.0);
  EXPECT_LE(s.laplacian.edges()[0].w, (1.0 + eps) / 8.0);
  EXPECT_EQ(s.provenance, Provenance::kRecursive);
}

TEST(RecursiveSparsify, EightByEightOneSide) {
  const GridLayout layout{8, 8, 1};
  const WeightedGraph g = make_grid(layout);
  const auto edges = all_edges(g);
  const SeparatorTree t = separator_tree_for_grid_block(layout, g, edges, 16);
  std::vector<Vertex> side;
  for (int j = 0; j < 8; ++j) side.push_back(layout.vertex(0, 0, j));
  const VertexSparsifier s = recursive_vertex_sparsify(g, edges, side, t, 0.3, 4);
  const SparseLaplacian exact = exact_vertex_sparsifier(g, edges, side).laplacian;
  const oracle::EigenRange r = oracle::generalized_range(s.laplacian.dense(), exact.dense());
  EXPECT_GE(r.lo, 0.7);
  EXPECT_LE(r.hi, 1.3);
  expect_laplacian(s.laplacian);
}

TEST(VertexSparsifier, DeterministicAndSerialisable) {
  const GridLayout layout{6, 6, 1};
  const WeightedGraph g = make_grid(layout);
  const auto edges = all_edges(g);
  const auto bdry = perimeter(layout);
  const VertexSparsifier a = one_step_vertex_sparsify(g, edges, bdry, 0.2, 13);
  const VertexSparsifier b = one_step_vertex_sparsify(g, edges, bdry, 0.2, 13);
  EXPECT_TRUE(a.laplacian.dense() == b.laplacian.dense());
  std::stringstream buf;
  write_sparsifier(buf, a);
  const VertexSparsifier back = read_sparsifier(buf);
  EXPECT_EQ(back.boundary, a.boundary);
  EXPECT_EQ(back.provenance, a.provenance);
  EXPECT_DOUBLE_EQ(back.eps, a.eps);
  EXPECT_TRUE(back.laplacian.dense().isApprox(a.laplacian.dense(), 1e-15));
  std::stringstream garbage("vs x\n");
  EXPECT_THROW(read_sparsifier(garbage), InvalidInput);
}

TEST(RecursionLevels, Formula) {
  EXPECT_DOUBLE_EQ(recursion_levels(1), 1.0);
  EXPECT_NEAR(recursion_levels(100), std::log(100.0) / std::log(20.0 / 19.0), 1e-12);
}
