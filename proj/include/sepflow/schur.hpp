#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sepflow/graph.hpp"
#include "sepflow/laplacian.hpp"
#include "sepflow/partition.hpp"

namespace sepflow {

struct SpectralBounds {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double kappa = 0.0;
};

/// lambda_min = min w / n^2, lambda_max = n max w.
SpectralBounds spectral_bounds(const SparseLaplacian& l);
SpectralBounds spectral_bounds(const WeightedGraph& g);

/// Dense elimination of the interior. The result is indexed by position in
/// `boundary`.
SparseLaplacian exact_schur(const SparseLaplacian& l, std::span<const Vertex> boundary);

struct ApproxSchurStats {
  double clamped_mass = 0.0;
  double trace = 0.0;
  int solver_iterations = 0;
};

/// Column-by-column solves against the interior block, followed by clamping of
/// positive off-diagonals. Indexed by position in `boundary`.
SparseLaplacian approx_schur(const SparseLaplacian& l, std::span<const Vertex> boundary, double kappa, double eps,
                             ApproxSchurStats* stats = nullptr);

struct SparsifyOptions {
  double c_s = 48.0;
  double sketch_oversampling = 4.0;
  /// Exact resistances up to this dimension.
  int dense_limit = 64;
};

/// Importance sampling by effective resistance; unchanged when under budget.
SparseLaplacian sparsify(const SparseLaplacian& l, double eps, std::uint64_t seed, const SparsifyOptions& options = {});
/// ceil(c_s n ln n / eps^2).
long sparsify_budget(int n, double eps, double c_s);
/// Effective resistance of every edge of `l.edges()`, dense and exact.
std::vector<double> effective_resistances(const SparseLaplacian& l);
/// Random-projection estimate of the same quantities.
std::vector<double> sketched_resistances(const SparseLaplacian& l, double eps, std::uint64_t seed,
                                         double oversampling);

/// Adds lambda_min / n^2 to every edge; n defaults to the dimension.
SparseLaplacian weight_floor(const SparseLaplacian& l, double lambda_min, int n = 0);

enum class Provenance { kExact, kOneStep, kRecursive };
const char* to_string(Provenance p);

struct VertexSparsifier {
  /// Vertex ids of the boundary in the caller's numbering; local id = position.
  std::vector<Vertex> boundary;
  SparseLaplacian laplacian;
  double eps = 0.0;
  Provenance provenance = Provenance::kOneStep;
  double clamped_mass = 0.0;
};

struct VertexSparsifyOptions {
  SparsifyOptions sparsify;
};

/// Boundary indices refer to rows of `l`.
VertexSparsifier one_step_vertex_sparsify(const SparseLaplacian& l, std::span<const Vertex> boundary, double eps,
                                          std::uint64_t seed, const VertexSparsifyOptions& options = {});

/// The subgraph of `g` spanned by `group`, with conductances g.weight().
/// Boundary vertices are global ids.
VertexSparsifier one_step_vertex_sparsify(const WeightedGraph& g, const std::vector<EdgeId>& group,
                                          std::span<const Vertex> boundary, double eps, std::uint64_t seed,
                                          const VertexSparsifyOptions& options = {});

VertexSparsifier recursive_vertex_sparsify(const WeightedGraph& g, const std::vector<EdgeId>& group,
                                           std::span<const Vertex> boundary, const SeparatorTree& tree, double eps,
                                           std::uint64_t seed, const VertexSparsifyOptions& options = {});

/// Exact Schur complement of a group, as a sparsifier with zero error.
VertexSparsifier exact_vertex_sparsifier(const WeightedGraph& g, const std::vector<EdgeId>& group,
                                         std::span<const Vertex> boundary);

/// log_{20/19} n, at least 1.
double recursion_levels(int n);

void write_sparsifier(std::ostream& out, const VertexSparsifier& s);
VertexSparsifier read_sparsifier(std::istream& in, const std::string& source = "<stream>");

}  // namespace sepflow
