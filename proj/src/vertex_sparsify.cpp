#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "sepflow/dimacs.hpp"
#include "sepflow/rng.hpp"
#include "sepflow/schur.hpp"

namespace sepflow {

namespace {

struct ScaledEdge {
  EdgeId id;
  double factor;
};

struct LocalGraph {
  std::vector<Vertex> vertices;
  SparseLaplacian laplacian;

  int local(Vertex v) const {
    auto it = std::lower_bound(vertices.begin(), vertices.end(), v);
    if (it == vertices.end() || *it != v) throw InvalidInput("vertex " + std::to_string(v) + " is not in the subgraph");
    return static_cast<int>(it - vertices.begin());
  }
};

LocalGraph local_graph(const WeightedGraph& g, const std::vector<ScaledEdge>& edges,
                       std::vector<Vertex> vertices = {}) {
  LocalGraph out;
  if (vertices.empty()) {
    for (const ScaledEdge& e : edges) {
      vertices.push_back(g.edge(e.id).tail);
      vertices.push_back(g.edge(e.id).head);
    }
  }
  std::sort(vertices.begin(), vertices.end());
  vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
  out.vertices = std::move(vertices);
  std::vector<WeightedEdge> weighted;
  weighted.reserve(edges.size());
  for (const ScaledEdge& e : edges) {
    weighted.push_back({out.local(g.edge(e.id).tail), out.local(g.edge(e.id).head),
                        e.factor * g.weight()[static_cast<size_t>(e.id)]});
  }
  out.laplacian = SparseLaplacian::from_edges(static_cast<int>(out.vertices.size()), weighted);
  return out;
}

std::vector<ScaledEdge> unit_edges(const std::vector<EdgeId>& group) {
  std::vector<ScaledEdge> out;
  out.reserve(group.size());
  for (EdgeId e : group) out.push_back({e, 1.0});
  return out;
}

std::vector<Vertex> to_local(const LocalGraph& lg, std::span<const Vertex> global) {
  std::vector<Vertex> out;
  out.reserve(global.size());
  for (Vertex v : global) out.push_back(lg.local(v));
  return out;
}

// Re-expresses a sparsifier on `order`, which must be a permutation of its boundary.
VertexSparsifier reorder(VertexSparsifier s, std::span<const Vertex> order) {
  if (std::equal(order.begin(), order.end(), s.boundary.begin(), s.boundary.end())) return s;
  std::vector<int> pos(s.boundary.size());
  for (size_t i = 0; i < s.boundary.size(); ++i) {
    auto it = std::find(order.begin(), order.end(), s.boundary[i]);
    if (it == order.end()) throw InvalidInput("boundary reorder is not a permutation");
    pos[i] = static_cast<int>(it - order.begin());
  }
  std::vector<WeightedEdge> edges = s.laplacian.edges();
  for (WeightedEdge& e : edges) {
    e.u = pos[static_cast<size_t>(e.u)];
    e.v = pos[static_cast<size_t>(e.v)];
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  s.laplacian = SparseLaplacian::from_edges(static_cast<int>(order.size()), edges);
  s.boundary.assign(order.begin(), order.end());
  return s;
}

void check_eps(double eps) {
  if (!(eps > 0.0) || !(eps < 0.5)) throw InvalidInput("vertex sparsification requires 0 < eps < 1/2");
}

}  // namespace

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::kExact:
      return "exact";
    case Provenance::kOneStep:
      return "one-step";
    case Provenance::kRecursive:
      return "recursive";
  }
  return "unknown";
}

VertexSparsifier one_step_vertex_sparsify(const SparseLaplacian& l, std::span<const Vertex> boundary, double eps,
                                          std::uint64_t seed, const VertexSparsifyOptions& options) {
  check_eps(eps);
  const SpectralBounds bounds = spectral_bounds(l);
  ApproxSchurStats stats;
  const SparseLaplacian schur = approx_schur(l, boundary, bounds.kappa, eps / 3.0, &stats);
  const SparseLaplacian sparse = sparsify(schur, eps / 3.0, seed, options.sparsify);
  VertexSparsifier out;
  out.boundary.assign(boundary.begin(), boundary.end());
  out.laplacian = weight_floor(sparse, bounds.lambda_min, l.dimension());
  out.eps = eps;
  out.provenance = Provenance::kOneStep;
  out.clamped_mass = stats.clamped_mass;
  return out;
}

VertexSparsifier one_step_vertex_sparsify(const WeightedGraph& g, const std::vector<EdgeId>& group,
                                          std::span<const Vertex> boundary, double eps, std::uint64_t seed,
                                          const VertexSparsifyOptions& options) {
  const LocalGraph lg = local_graph(g, unit_edges(group));
  VertexSparsifier out = one_step_vertex_sparsify(lg.laplacian, to_local(lg, boundary), eps, seed, options);
  out.boundary.assign(boundary.begin(), boundary.end());
  return out;
}

VertexSparsifier exact_vertex_sparsifier(const WeightedGraph& g, const std::vector<EdgeId>& group,
                                         std::span<const Vertex> boundary) {
  const LocalGraph lg = local_graph(g, unit_edges(group));
  VertexSparsifier out;
  out.laplacian = exact_schur(lg.laplacian, to_local(lg, boundary));
  out.boundary.assign(boundary.begin(), boundary.end());
  out.eps = 0.0;
  out.provenance = Provenance::kExact;
  return out;
}

namespace {

struct RecursionContext {
  const WeightedGraph& g;
  const SeparatorTree& tree;
  double eps_step;
  double kappa;
  std::uint64_t seed;
  const VertexSparsifyOptions& options;
};

// Sparsifier of a tree node's subgraph onto `boundary` (sorted global ids).
VertexSparsifier sparsify_node(const RecursionContext& ctx, int id, const std::vector<ScaledEdge>& edges,
                               const std::vector<Vertex>& boundary) {
  const SeparatorNode& node = ctx.tree.nodes.at(static_cast<size_t>(id));
  const std::uint64_t node_seed = derive_seed(ctx.seed, streams::kSparsify, static_cast<std::uint64_t>(id));
  if (node.is_leaf() || node.vertices.size() <= 2 * boundary.size()) {
    std::vector<Vertex> verts = boundary;
    for (const ScaledEdge& e : edges) {
      verts.push_back(ctx.g.edge(e.id).tail);
      verts.push_back(ctx.g.edge(e.id).head);
    }
    const LocalGraph lg = local_graph(ctx.g, edges, std::move(verts));
    VertexSparsifier out =
        one_step_vertex_sparsify(lg.laplacian, to_local(lg, boundary), ctx.eps_step, node_seed, ctx.options);
    out.boundary = boundary;
    return out;
  }

  std::vector<Vertex> sep = node.separator;
  std::sort(sep.begin(), sep.end());
  auto in = [](const std::vector<Vertex>& set, Vertex v) { return std::binary_search(set.begin(), set.end(), v); };
  std::vector<ScaledEdge> child_edges[2];
  for (const ScaledEdge& e : edges) {
    const Vertex a = ctx.g.edge(e.id).tail;
    const Vertex b = ctx.g.edge(e.id).head;
    if (in(sep, a) && in(sep, b)) {
      child_edges[0].push_back({e.id, e.factor * 0.5});
      child_edges[1].push_back({e.id, e.factor * 0.5});
      continue;
    }
    bool placed = false;
    for (int c = 0; c < 2 && !placed; ++c) {
      const auto& cv = ctx.tree.nodes[static_cast<size_t>(node.children[c])].vertices;
      if (in(cv, a) && in(cv, b)) {
        child_edges[c].push_back(e);
        placed = true;
      }
    }
    if (!placed) throw InvalidInput("separator tree node " + std::to_string(id) + " does not cover edge " + std::to_string(e.id));
  }

  std::vector<VertexSparsifier> parts;
  std::vector<Vertex> merged;
  for (int c = 0; c < 2; ++c) {
    const SeparatorNode& child = ctx.tree.nodes[static_cast<size_t>(node.children[c])];
    std::vector<Vertex> child_boundary;
    for (Vertex v : child.vertices) {
      if (in(boundary, v) || in(sep, v)) child_boundary.push_back(v);
    }
    if (child_edges[c].empty()) continue;
    parts.push_back(sparsify_node(ctx, node.children[c], child_edges[c], child_boundary));
    merged.insert(merged.end(), child_boundary.begin(), child_boundary.end());
  }
  merged.insert(merged.end(), boundary.begin(), boundary.end());
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  std::vector<WeightedEdge> sum;
  for (const VertexSparsifier& part : parts) {
    for (const WeightedEdge& e : part.laplacian.edges()) {
      const auto u = static_cast<Vertex>(std::lower_bound(merged.begin(), merged.end(), part.boundary[static_cast<size_t>(e.u)]) - merged.begin());
      const auto v = static_cast<Vertex>(std::lower_bound(merged.begin(), merged.end(), part.boundary[static_cast<size_t>(e.v)]) - merged.begin());
      sum.push_back({u, v, e.w});
    }
  }
  const SparseLaplacian combined = SparseLaplacian::from_edges(static_cast<int>(merged.size()), sum);
  std::vector<Vertex> keep;
  for (Vertex v : boundary) {
    keep.push_back(static_cast<Vertex>(std::lower_bound(merged.begin(), merged.end(), v) - merged.begin()));
  }
  ApproxSchurStats stats;
  const SparseLaplacian schur = approx_schur(combined, keep, ctx.kappa, ctx.eps_step / 3.0, &stats);
  VertexSparsifier out;
  out.boundary = boundary;
  out.laplacian = sparsify(schur, ctx.eps_step / 3.0, node_seed, ctx.options.sparsify);
  out.eps = ctx.eps_step;
  out.provenance = Provenance::kRecursive;
  out.clamped_mass = stats.clamped_mass;
  for (const VertexSparsifier& part : parts) out.clamped_mass += part.clamped_mass;
  return out;
}

}  // namespace

VertexSparsifier recursive_vertex_sparsify(const WeightedGraph& g, const std::vector<EdgeId>& group,
                                           std::span<const Vertex> boundary, const SeparatorTree& tree, double eps,
                                           std::uint64_t seed, const VertexSparsifyOptions& options) {
  check_eps(eps);
  if (tree.nodes.empty()) throw InvalidInput("separator tree has no nodes");
  const std::vector<ScaledEdge> edges = unit_edges(group);
  const LocalGraph whole = local_graph(g, edges);
  if (whole.vertices != tree.root().vertices) throw InvalidInput("separator tree does not match the group's vertex set");
  const double levels = recursion_levels(static_cast<int>(whole.vertices.size()));
  const double kappa = std::exp2(levels) * spectral_bounds(whole.laplacian).kappa;
  std::vector<Vertex> sorted(boundary.begin(), boundary.end());
  std::sort(sorted.begin(), sorted.end());
  for (Vertex v : sorted) whole.local(v);
  const RecursionContext ctx{g, tree, eps / (2.0 * levels), kappa, seed, options};
  VertexSparsifier out = sparsify_node(ctx, 0, edges, sorted);
  out.eps = eps;
  out.provenance = tree.root().is_leaf() ? Provenance::kOneStep : Provenance::kRecursive;
  return reorder(std::move(out), boundary);
}

void write_sparsifier(std::ostream& out, const VertexSparsifier& s) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "vs " << s.boundary.size() << ' ' << s.eps << ' ' << to_string(s.provenance) << '\n';
  out << "map";
  for (Vertex v : s.boundary) out << ' ' << v;
  out << '\n';
  for (const WeightedEdge& e : s.laplacian.edges()) out << e.u << ' ' << e.v << ' ' << e.w << '\n';
}

VertexSparsifier read_sparsifier(std::istream& in, const std::string& source) {
  VertexSparsifier s;
  std::string line;
  int lineno = 0;
  long nb = -1;
  bool have_map = false;
  std::vector<WeightedEdge> edges;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "vs") {
      std::string prov;
      if (!(ls >> nb >> s.eps >> prov) || nb < 0) throw ParseError(source, lineno, "expected `vs <n_bdry> <eps> <provenance>`");
      if (prov == "exact") s.provenance = Provenance::kExact;
      else if (prov == "one-step") s.provenance = Provenance::kOneStep;
      else if (prov == "recursive") s.provenance = Provenance::kRecursive;
      else throw ParseError(source, lineno, "unknown provenance `" + prov + "`");
    } else if (tag == "map") {
      if (nb < 0) throw ParseError(source, lineno, "map before header");
      Vertex v = 0;
      while (ls >> v) s.boundary.push_back(v);
      if (static_cast<long>(s.boundary.size()) != nb) throw ParseError(source, lineno, "map length differs from n_bdry");
      have_map = true;
    } else {
      if (!have_map) throw ParseError(source, lineno, "triplet before map");
      std::istringstream ts(line);
      WeightedEdge e{};
      if (!(ts >> e.u >> e.v >> e.w) || e.u < 0 || e.v < 0 || e.u >= nb || e.v >= nb || !(e.w > 0.0)) {
        throw ParseError(source, lineno, "malformed triplet");
      }
      edges.push_back(e);
    }
  }
  if (!have_map) throw ParseError(source, lineno, "missing header or map");
  s.laplacian = SparseLaplacian::from_edges(static_cast<int>(nb), edges);
  return s;
}

}  // namespace sepflow
