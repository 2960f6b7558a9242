#include <algorithm>
#include <cmath>
#include <map>

#include "sepflow/rng.hpp"
#include "sepflow/schur.hpp"
#include "sepflow/solver.hpp"

namespace sepflow {

long sparsify_budget(int n, double eps, double c_s) {
  if (n < 2) return 0;
  return static_cast<long>(std::ceil(c_s * n * std::log(static_cast<double>(n)) / (eps * eps)));
}

std::vector<double> effective_resistances(const SparseLaplacian& l) {
  int count = 0;
  l.components(&count);
  if (count > 1) throw InvalidInput("effective resistances require a connected Laplacian");
  const int n = l.dimension();
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  const Eigen::MatrixXd pinv = (l.dense() + ones).ldlt().solve(Eigen::MatrixXd::Identity(n, n)) - ones;
  std::vector<double> out;
  for (const WeightedEdge& e : l.edges()) out.push_back(pinv(e.u, e.u) + pinv(e.v, e.v) - 2.0 * pinv(e.u, e.v));
  return out;
}

std::vector<double> sketched_resistances(const SparseLaplacian& l, double eps, std::uint64_t seed,
                                         double oversampling) {
  const int n = l.dimension();
  const std::vector<WeightedEdge> edges = l.edges();
  const int rows = static_cast<int>(std::ceil(oversampling * std::log(static_cast<double>(std::max(n, 2))) / (eps * eps)));
  SolverOptions options;
  options.delta = 1e-6;
  const SolverHandle handle(l.matrix(), options);
  Rng rng(seed);
  std::vector<double> out(edges.size(), 0.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
  Eigen::VectorXd y(n);
  for (int k = 0; k < rows; ++k) {
    y.setZero();
    for (const WeightedEdge& e : edges) {
      const double q = rng.sign() * scale * std::sqrt(e.w);
      y[e.u] += q;
      y[e.v] -= q;
    }
    const Eigen::VectorXd z = handle.solve(y);
    for (size_t e = 0; e < edges.size(); ++e) {
      const double d = z[edges[e].u] - z[edges[e].v];
      out[e] += d * d;
    }
  }
  return out;
}

SparseLaplacian sparsify(const SparseLaplacian& l, double eps, std::uint64_t seed, const SparsifyOptions& options) {
  if (!(eps > 0.0) || !(eps < 1.0)) throw InvalidInput("sparsify requires 0 < eps < 1");
  const int n = l.dimension();
  const std::vector<WeightedEdge> edges = l.edges();
  const long q = sparsify_budget(n, eps, options.c_s);
  if (static_cast<long>(edges.size()) <= q) return l;

  const std::vector<double> reff =
      n <= options.dense_limit
          ? effective_resistances(l)
          : sketched_resistances(l, 0.5, derive_seed(seed, streams::kSketch), options.sketch_oversampling);
  std::vector<double> cumulative(edges.size());
  double total = 0.0;
  for (size_t e = 0; e < edges.size(); ++e) {
    total += edges[e].w * std::max(reff[e], 0.0);
    cumulative[e] = total;
  }
  if (!(total > 0.0)) throw NumericalFailure("sampling distribution is degenerate");

  Rng rng(derive_seed(seed, streams::kSparsify));
  std::map<std::pair<Vertex, Vertex>, double> merged;
  for (long s = 0; s < q; ++s) {
    const double x = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
    if (it == cumulative.end()) --it;
    const auto e = static_cast<size_t>(it - cumulative.begin());
    const double p = edges[e].w * std::max(reff[e], 0.0) / total;
    merged[{edges[e].u, edges[e].v}] += edges[e].w / (static_cast<double>(q) * p);
  }
  std::vector<WeightedEdge> out;
  out.reserve(merged.size());
  for (const auto& [key, w] : merged) out.push_back({key.first, key.second, w});
  return SparseLaplacian::from_edges(n, out);
}

}  // namespace sepflow
