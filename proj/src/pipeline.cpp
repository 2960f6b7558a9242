#include "sepflow/pipeline.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>

#include <Eigen/SparseCholesky>

#include "sepflow/laplacian.hpp"
#include "sepflow/parallel.hpp"
#include "sepflow/rng.hpp"
#include "sepflow/solver.hpp"

namespace sepflow {

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t x) { return splitmix64(h ^ splitmix64(x)); }

std::uint64_t sparsifier_key(int group, const std::vector<EdgeId>& edges, std::span<const double> weight, double eps,
                             SparsifierKind kind) {
  std::uint64_t h = mix(static_cast<std::uint64_t>(group), static_cast<std::uint64_t>(kind));
  h = mix(h, std::bit_cast<std::uint64_t>(eps));
  for (EdgeId e : edges) h = mix(h, std::bit_cast<std::uint64_t>(weight[static_cast<size_t>(e)]));
  return h;
}

// Local vertex numbering of one group.
struct GroupFrame {
  std::vector<Vertex> vertices;
  std::vector<Edge> edges;
  std::vector<double> weight;

  int local(Vertex v) const {
    auto it = std::lower_bound(vertices.begin(), vertices.end(), v);
    if (it == vertices.end() || *it != v) return -1;
    return static_cast<int>(it - vertices.begin());
  }
};

GroupFrame frame_of(const GroupedNetwork& net, int i) {
  GroupFrame f;
  for (EdgeId e : net.groups[static_cast<size_t>(i)]) {
    f.vertices.push_back(net.edges[static_cast<size_t>(e)].tail);
    f.vertices.push_back(net.edges[static_cast<size_t>(e)].head);
  }
  std::sort(f.vertices.begin(), f.vertices.end());
  f.vertices.erase(std::unique(f.vertices.begin(), f.vertices.end()), f.vertices.end());
  for (EdgeId e : net.groups[static_cast<size_t>(i)]) {
    const Edge& edge = net.edges[static_cast<size_t>(e)];
    f.edges.push_back({f.local(edge.tail), f.local(edge.head)});
    f.weight.push_back(net.weight[static_cast<size_t>(e)]);
  }
  return f;
}

double max_congestion(std::span<const double> flow, std::span<const double> capacity) {
  double out = 0.0;
  for (size_t e = 0; e < flow.size(); ++e) out = std::max(out, std::abs(flow[e]) / capacity[e]);
  return out;
}

// Flow along a BFS path from s to t carrying the path's bottleneck capacity.
std::vector<double> bfs_path_flow(const WeightedGraph& g, Vertex s, Vertex t, double* value) {
  std::vector<EdgeId> via(static_cast<size_t>(g.num_vertices()), -1);
  std::vector<char> seen(static_cast<size_t>(g.num_vertices()), 0);
  std::queue<Vertex> queue;
  queue.push(s);
  seen[static_cast<size_t>(s)] = 1;
  while (!queue.empty()) {
    const Vertex v = queue.front();
    queue.pop();
    for (EdgeId e : g.incident(v)) {
      const Vertex w = g.other_end(e, v);
      if (seen[static_cast<size_t>(w)]) continue;
      seen[static_cast<size_t>(w)] = 1;
      via[static_cast<size_t>(w)] = e;
      queue.push(w);
    }
  }
  if (!seen[static_cast<size_t>(t)]) throw InvalidInput("terminals are disconnected");
  double bottleneck = std::numeric_limits<double>::infinity();
  for (Vertex v = t; v != s; v = g.other_end(via[static_cast<size_t>(v)], v)) {
    bottleneck = std::min(bottleneck, g.capacity()[static_cast<size_t>(via[static_cast<size_t>(v)])]);
  }
  std::vector<double> flow(static_cast<size_t>(g.num_edges()), 0.0);
  for (Vertex v = t; v != s;) {
    const EdgeId e = via[static_cast<size_t>(v)];
    const Vertex u = g.other_end(e, v);
    flow[static_cast<size_t>(e)] = g.edge(e).tail == u ? bottleneck : -bottleneck;
    v = u;
  }
  *value = bottleneck;
  return flow;
}

}  // namespace

OracleWeights OracleWeights::uniform(const Partition& p, int num_edges) {
  OracleWeights w;
  w.edge.assign(static_cast<size_t>(num_edges), 1.0);
  w.recompute_totals(p);
  return w;
}

void OracleWeights::recompute_totals(const Partition& p) {
  group_total.assign(p.groups.size(), 0.0);
  for (size_t i = 0; i < p.groups.size(); ++i) {
    for (EdgeId e : p.groups[i]) group_total[i] += edge[static_cast<size_t>(e)];
  }
}

double OracleWeights::total() const { return std::accumulate(group_total.begin(), group_total.end(), 0.0); }

std::vector<double> oracle_edge_weights(const OracleWeights& w_oracle, std::span<const double> capacity,
                                        const Partition& p, double eps) {
  if (!(eps > 0.0) || !(eps < 0.5)) throw InvalidInput("oracle weights require 0 < eps < 1/2");
  std::vector<double> w(capacity.size(), 0.0);
  for (size_t i = 0; i < p.groups.size(); ++i) {
    const double size = static_cast<double>(p.groups[i].size());
    for (EdgeId e : p.groups[i]) {
      const auto k = static_cast<size_t>(e);
      const double u = capacity[k];
      if (!(u > 0.0)) throw InvalidInput("capacities must be positive");
      w[k] = (1.0 - eps / 2.0) / (u * u) * (w_oracle.edge[k] / w_oracle.group_total[i] + eps / (4.0 * size));
    }
  }
  return w;
}

GroupedNetwork network_of(const WeightedGraph& g, const Partition& p) {
  GroupedNetwork net;
  net.num_vertices = g.num_vertices();
  net.edges = g.edges();
  net.weight = g.weight();
  net.groups = p.groups;
  net.boundary = p.boundary;
  return net;
}

std::vector<double> convert_flow(const GroupedNetwork& src, const GroupedNetwork& dst, std::span<const double> flow,
                                 double eps) {
  if (src.groups.size() != dst.groups.size() || src.boundary.size() != src.groups.size() ||
      dst.boundary.size() != dst.groups.size()) {
    throw InvalidInput("source and destination have different group counts");
  }
  if (flow.size() != src.edges.size()) throw InvalidInput("flow length does not match edge count");
  for (size_t i = 0; i < src.groups.size(); ++i) {
    if (src.boundary[i].size() != dst.boundary[i].size()) {
      throw InvalidInput("boundary mismatch in group " + std::to_string(i));
    }
  }
  std::vector<double> out(dst.edges.size(), 0.0);
  parallel_for(src.groups.size(), [&](std::size_t i) {
    const std::vector<Vertex>& sb = src.boundary[i];
    std::vector<std::pair<Vertex, int>> position;
    position.reserve(sb.size());
    for (size_t k = 0; k < sb.size(); ++k) position.emplace_back(sb[k], static_cast<int>(k));
    std::sort(position.begin(), position.end());
    std::vector<double> demand(sb.size(), 0.0);
    auto add = [&](Vertex v, double amount) {
      auto it = std::lower_bound(position.begin(), position.end(), std::make_pair(v, -1));
      if (it != position.end() && it->first == v) demand[static_cast<size_t>(it->second)] += amount;
    };
    double scale = 0.0;
    for (EdgeId e : src.groups[i]) {
      const double f = flow[static_cast<size_t>(e)];
      add(src.edges[static_cast<size_t>(e)].tail, f);
      add(src.edges[static_cast<size_t>(e)].head, -f);
      scale = std::max(scale, std::abs(f));
    }
    if (scale == 0.0) return;

    const GroupFrame frame = frame_of(dst, static_cast<int>(i));
    DemandVector local = DemandVector::zero(static_cast<int>(frame.vertices.size()));
    for (size_t k = 0; k < demand.size(); ++k) {
      const int v = frame.local(dst.boundary[i][k]);
      if (v < 0) {
        if (std::abs(demand[k]) > 1e-12 * scale) {
          throw InvalidInput("group " + std::to_string(i) + " cannot route demand at an untouched boundary vertex");
        }
        continue;
      }
      local[v] += demand[k];
    }
    if (local.max_abs() == 0.0) return;
    double total = local.total();
    if (std::abs(total) > 1e-9 * local.max_abs() * static_cast<double>(demand.size())) {
      throw NumericalFailure("group " + std::to_string(i) + " residual does not sum to zero");
    }
    // Rounding-level imbalance goes to the largest entry.
    const auto biggest = static_cast<Vertex>(
        std::max_element(local.values().begin(), local.values().end(),
                         [](double a, double b) { return std::abs(a) < std::abs(b); }) -
        local.values().begin());
    local[biggest] -= total;
    const ElectricalFlowResult ef =
        electrical_flow(static_cast<int>(frame.vertices.size()), frame.edges, frame.weight, local, eps);
    const std::vector<EdgeId>& group = dst.groups[i];
    for (size_t k = 0; k < group.size(); ++k) out[static_cast<size_t>(group[k])] = ef.flow[k];
  });
  return out;
}

const VertexSparsifier* SparsifierCache::find(std::uint64_t key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

void SparsifierCache::insert(std::uint64_t key, VertexSparsifier s) {
  if (entries_.size() >= capacity_) entries_.clear();
  entries_.emplace(key, std::move(s));
}

SparsifiedInstance build_sparsified_instance(const WeightedGraph& g, const Partition& p, double eps,
                                             std::uint64_t seed, const InstanceOptions& options,
                                             SparsifierCache* cache) {
  if (p.boundary.size() != p.groups.size()) throw InvalidInput("partition has no boundary sets");
  if (options.kind == SparsifierKind::kRecursive &&
      (options.trees == nullptr || options.trees->size() != p.groups.size())) {
    throw InvalidInput("recursive sparsification needs one separator tree slot per group");
  }
  const size_t k = p.groups.size();
  SparsifiedInstance inst;
  inst.graph = &g;
  inst.partition = &p;
  inst.eps = eps;
  inst.original = network_of(g, p);
  inst.sparsifiers.resize(k);

  std::vector<double> conductance(g.weight().size());
  for (size_t e = 0; e < conductance.size(); ++e) conductance[e] = 1.0 / g.weight()[e];
  const WeightedGraph gc = g.with_weights(conductance);

  std::vector<std::uint64_t> keys(k);
  std::vector<char> cached(k, 0);
  for (size_t i = 0; i < k; ++i) {
    keys[i] = sparsifier_key(static_cast<int>(i), p.groups[i], g.weight(), eps, options.kind);
    if (cache) {
      if (const VertexSparsifier* hit = cache->find(keys[i])) {
        inst.sparsifiers[i] = *hit;
        cached[i] = 1;
        ++cache->hits;
      }
    }
  }
  parallel_for(k, [&](std::size_t i) {
    if (cached[i]) return;
    const std::vector<Vertex>& boundary = p.boundary[i];
    const std::uint64_t group_seed = derive_seed(seed, streams::kSparsify, keys[i]);
    VertexSparsifier s;
    if (boundary.size() < 2) {
      s.boundary = boundary;
      s.laplacian = SparseLaplacian::from_edges(static_cast<int>(boundary.size()), {});
      s.eps = eps;
      s.provenance = Provenance::kExact;
    } else if (options.kind == SparsifierKind::kExact) {
      s = exact_vertex_sparsifier(gc, p.groups[i], boundary);
    } else if (options.kind == SparsifierKind::kRecursive && (*options.trees)[i].has_value()) {
      s = recursive_vertex_sparsify(gc, p.groups[i], boundary, *(*options.trees)[i], eps, group_seed, options.sparsify);
    } else {
      s = one_step_vertex_sparsify(gc, p.groups[i], boundary, eps, group_seed, options.sparsify);
    }
    inst.sparsifiers[i] = std::move(s);
  });
  if (cache) {
    for (size_t i = 0; i < k; ++i) {
      if (!cached[i]) cache->insert(keys[i], inst.sparsifiers[i]);
    }
  }

  inst.original_to_quotient.assign(static_cast<size_t>(g.num_vertices()), -1);
  for (const std::vector<Vertex>& b : p.boundary) {
    for (Vertex v : b) inst.original_to_quotient[static_cast<size_t>(v)] = 0;
  }
  for (Vertex v = 0; v < g.num_vertices(); ++v) {
    if (inst.original_to_quotient[static_cast<size_t>(v)] < 0) continue;
    inst.original_to_quotient[static_cast<size_t>(v)] = static_cast<int>(inst.quotient_to_original.size());
    inst.quotient_to_original.push_back(v);
  }
  GroupedNetwork& q = inst.quotient;
  q.num_vertices = static_cast<int>(inst.quotient_to_original.size());
  q.groups.resize(k);
  q.boundary.resize(k);
  for (size_t i = 0; i < k; ++i) {
    const VertexSparsifier& s = inst.sparsifiers[i];
    std::vector<Vertex> mapped;
    mapped.reserve(s.boundary.size());
    for (Vertex v : s.boundary) mapped.push_back(inst.original_to_quotient[static_cast<size_t>(v)]);
    for (const WeightedEdge& e : s.laplacian.edges()) {
      const Vertex a = mapped[static_cast<size_t>(e.u)];
      const Vertex b = mapped[static_cast<size_t>(e.v)];
      q.groups[i].push_back(static_cast<EdgeId>(q.edges.size()));
      q.edges.push_back({std::min(a, b), std::max(a, b)});
      q.weight.push_back(1.0 / e.w);
    }
    for (Vertex v : p.boundary[i]) q.boundary[i].push_back(inst.original_to_quotient[static_cast<size_t>(v)]);
  }
  return inst;
}

ApproxGroupedFlowResult approx_grouped_flow(const SparsifiedInstance& instance, const DemandVector& d, double eps,
                                            const GroupedFlowOptions& options) {
  const GroupedNetwork& q = instance.quotient;
  if (d.size() != instance.original.num_vertices) throw InvalidInput("demand length does not match vertex count");
  DemandVector dq = DemandVector::zero(q.num_vertices);
  for (Vertex v = 0; v < d.size(); ++v) {
    if (d[v] == 0.0) continue;
    const int at = instance.original_to_quotient[static_cast<size_t>(v)];
    if (at < 0) throw InvalidInput("demand at interior vertex " + std::to_string(v));
    dq[at] = d[v];
  }
  ApproxGroupedFlowResult out;
  GroupedFlowProblem problem;
  problem.num_vertices = q.num_vertices;
  problem.edges = q.edges;
  problem.weight = q.weight;
  problem.demand = dq;
  problem.eps = eps / 2.0;
  for (size_t i = 0; i < q.groups.size(); ++i) {
    if (q.groups[i].empty()) continue;
    out.quotient_groups.push_back(static_cast<int>(i));
    problem.groups.push_back(q.groups[i]);
  }
  out.quotient = grouped_flow(problem, options);
  out.status = out.quotient.status;
  if (out.status == GroupedFlowStatus::kFail || out.quotient.state.accepted == 0) return out;
  out.flow = convert_flow(q, instance.original, out.quotient.flow, eps / 10.0);
  out.group_congestion = group_congestions(out.flow, instance.original.weight, instance.original.groups);
  out.max_group_congestion = *std::max_element(out.group_congestion.begin(), out.group_congestion.end());
  return out;
}

CutCertificate cut_certificate(const SparsifiedInstance& instance, const ApproxGroupedFlowResult& fail,
                               const DemandVector& d, Vertex s, Vertex t) {
  if (fail.status != GroupedFlowStatus::kFail || fail.quotient.fail_potentials.empty()) {
    throw InvalidInput("cut certificate requires a failing run");
  }
  const WeightedGraph& g = *instance.graph;
  const GroupedNetwork& net = instance.original;
  const int n = g.num_vertices();
  std::vector<double> phi(static_cast<size_t>(n), 0.0);
  for (size_t qv = 0; qv < instance.quotient_to_original.size(); ++qv) {
    phi[static_cast<size_t>(instance.quotient_to_original[qv])] = fail.quotient.fail_potentials[qv];
  }
  parallel_for(net.groups.size(), [&](std::size_t i) {
    const GroupFrame frame = frame_of(net, static_cast<int>(i));
    std::vector<double> conductance(frame.weight.size());
    for (size_t e = 0; e < frame.weight.size(); ++e) conductance[e] = 1.0 / frame.weight[e];
    const SparseLaplacian l =
        laplacian_from_conductances(static_cast<int>(frame.vertices.size()), frame.edges, conductance);
    std::vector<Vertex> boundary;
    for (Vertex v : net.boundary[i]) {
      const int at = frame.local(v);
      if (at >= 0) boundary.push_back(at);
    }
    if (boundary.empty() || boundary.size() == frame.vertices.size()) return;
    const LaplacianBlocks blocks = l.blocks(boundary);
    Eigen::VectorXd known(static_cast<Eigen::Index>(blocks.boundary.size()));
    for (size_t k = 0; k < blocks.boundary.size(); ++k) {
      known[static_cast<Eigen::Index>(k)] = phi[static_cast<size_t>(frame.vertices[static_cast<size_t>(blocks.boundary[k])])];
    }
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(blocks.intr);
    if (ldlt.info() != Eigen::Success) throw NumericalFailure("group interior block is singular");
    const Eigen::VectorXd rhs = -(blocks.mid * known);
    const Eigen::VectorXd inner = ldlt.solve(rhs);
    for (size_t k = 0; k < blocks.interior.size(); ++k) {
      phi[static_cast<size_t>(frame.vertices[static_cast<size_t>(blocks.interior[k])])] = inner[static_cast<Eigen::Index>(k)];
    }
  });

  CutCertificate cert;
  double norm = 0.0;
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const Edge& edge = g.edge(e);
    norm += g.capacity()[static_cast<size_t>(e)] *
            std::abs(phi[static_cast<size_t>(edge.tail)] - phi[static_cast<size_t>(edge.head)]);
  }
  if (!(norm > 0.0)) throw NumericalFailure("failing potentials are constant");
  for (double& x : phi) x /= norm;
  double value = 0.0;
  double cut = 0.0;
  for (Vertex v = 0; v < n; ++v) value += d[v] * phi[static_cast<size_t>(v)];
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const Edge& edge = g.edge(e);
    cut += g.capacity()[static_cast<size_t>(e)] *
           std::abs(phi[static_cast<size_t>(edge.tail)] - phi[static_cast<size_t>(edge.head)]);
  }
  cert.cut_norm = cut;
  cert.demand_value = value;

  std::vector<Vertex> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Vertex a, Vertex b) { return phi[static_cast<size_t>(a)] > phi[static_cast<size_t>(b)]; });
  std::vector<char> inside(static_cast<size_t>(n), 0);
  double running = 0.0;
  double best = std::numeric_limits<double>::infinity();
  int best_prefix = -1;
  for (int k = 0; k + 1 < n; ++k) {
    const Vertex v = order[static_cast<size_t>(k)];
    inside[static_cast<size_t>(v)] = 1;
    for (EdgeId e : g.incident(v)) {
      const double u = g.capacity()[static_cast<size_t>(e)];
      running += inside[static_cast<size_t>(g.other_end(e, v))] ? -u : u;
    }
    if (inside[static_cast<size_t>(s)] != inside[static_cast<size_t>(t)] && running < best) {
      best = running;
      best_prefix = k;
    }
  }
  if (best_prefix >= 0) {
    std::vector<char> side(static_cast<size_t>(n), 0);
    for (int k = 0; k <= best_prefix; ++k) side[static_cast<size_t>(order[static_cast<size_t>(k)])] = 1;
    const bool flip = !side[static_cast<size_t>(s)];
    for (Vertex v = 0; v < n; ++v) {
      if (static_cast<bool>(side[static_cast<size_t>(v)]) != flip) cert.source_side.push_back(v);
    }
    cert.has_cut = true;
    cert.cut_capacity = best;
  }
  cert.potentials = std::move(phi);
  return cert;
}

double outer_width(int r, double eps, double c_w) {
  return std::ceil(c_w * std::sqrt(static_cast<double>(std::max(r, 1)) / eps));
}

std::vector<double> group_rms_congestion(const WeightedGraph& g, const Partition& p, std::span<const double> flow) {
  std::vector<double> out(p.groups.size(), 0.0);
  for (size_t i = 0; i < p.groups.size(); ++i) {
    double total = 0.0;
    for (EdgeId e : p.groups[i]) {
      const double c = flow[static_cast<size_t>(e)] / g.capacity()[static_cast<size_t>(e)];
      total += c * c;
    }
    out[i] = p.groups[i].empty() ? 0.0 : std::sqrt(total / static_cast<double>(p.groups[i].size()));
  }
  return out;
}

ProbeResult probe_flow(const WeightedGraph& g, const Partition& p, Vertex s, Vertex t, double demand,
                       const MaxFlowOptions& options, SparsifierCache* cache) {
  const double eps = options.eps;
  if (!(eps > 0.0) || !(eps < 0.5)) throw InvalidInput("max flow requires 0 < eps < 1/2");
  if (!(demand > 0.0)) throw InvalidInput("probe demand must be positive");
  const double eps_oracle = eps / 10.0;
  const double eps_sparsify = eps_oracle / 10.0;
  const double rho = outer_width(p.r, eps, options.c_w);
  const size_t m = static_cast<size_t>(g.num_edges());
  const long budget = options.outer_iterations > 0
                          ? options.outer_iterations
                          : static_cast<long>(std::ceil(20.0 * rho * std::log(std::max<double>(m, 2)) / (eps * eps)));
  const std::span<const double> capacity(g.capacity());
  const DemandVector d = DemandVector::st(g.num_vertices(), s, t, demand);
  const double done = 1.0 / (1.0 - eps / 2.0);

  ProbeResult out;
  out.demand = demand;
  OracleWeights w_oracle = OracleWeights::uniform(p, g.num_edges());
  std::vector<double> sum(m, 0.0);
  std::vector<double> average(m, 0.0);
  long count = 0;
  auto offer = [&](const std::vector<double>& flow) {
    const double c = max_congestion(flow, capacity);
    if (!(c > 0.0) || demand / c <= out.value) return;
    // Slightly over-scaled so that rounding cannot push an edge past capacity.
    const double scale = c * (1.0 + 4.0 * std::numeric_limits<double>::epsilon());
    out.value = demand / scale;
    out.flow = flow;
    for (double& x : out.flow) x /= scale;
  };

  for (long it = 1; it <= budget; ++it) {
    const std::vector<double> w = oracle_edge_weights(w_oracle, capacity, p, eps);
    out.weight_spread = std::max(out.weight_spread, spread(w));
    const WeightedGraph weighted = g.with_weights(w);
    const SparsifiedInstance inst = build_sparsified_instance(weighted, p, eps_sparsify, options.seed, options.instance, cache);

    GroupedFlowOptions inner;
    inner.max_iterations = options.inner_iterations;
    if (options.strict) {
      inner.early_exit_min_fraction = 0.1;
    } else {
      std::vector<double> start;
      double mu = 0.0;
      for (int i : [&] {
             std::vector<int> active;
             for (size_t i = 0; i < inst.quotient.groups.size(); ++i) {
               if (!inst.quotient.groups[i].empty()) active.push_back(static_cast<int>(i));
             }
             return active;
           }()) {
        start.push_back(w_oracle.group_total[static_cast<size_t>(i)]);
        mu += start.back();
      }
      const double threshold = (1.0 + eps) * std::sqrt(1.0 - eps / 2.0) * mu / (1.0 + 3.0 * eps_oracle);
      inner.initial_group_weight = start;
      inner.accept = [start, threshold](const std::vector<double>& cong) {
        double weighted_sum = 0.0;
        for (size_t i = 0; i < cong.size(); ++i) weighted_sum += start[i] * cong[i];
        return weighted_sum <= threshold;
      };
    }
    ApproxGroupedFlowResult r = approx_grouped_flow(inst, d, eps_oracle, inner);
    ++out.outer_iterations;
    out.inner_iterations += r.quotient.state.t;
    if (r.status == GroupedFlowStatus::kFail) {
      out.status = GroupedFlowStatus::kFail;
      out.cut = cut_certificate(inst, r, d, s, t);
      return out;
    }
    if (r.flow.empty()) break;

    const std::vector<double>& f = r.flow;
    double weighted_cong = 0.0;
    double widest = 0.0;
    for (size_t e = 0; e < m; ++e) {
      const double c = std::abs(f[e]) / capacity[e];
      weighted_cong += w_oracle.edge[e] * c;
      widest = std::max(widest, c);
    }
    if (weighted_cong > (1.0 + eps) * w_oracle.total() * (1.0 + 1e-9)) ++out.contract_misses;
    if (widest > rho) ++out.width_violations;
    for (size_t e = 0; e < m; ++e) w_oracle.edge[e] *= 1.0 + eps / rho * std::abs(f[e]) / capacity[e];
    w_oracle.recompute_totals(p);

    ++count;
    for (size_t e = 0; e < m; ++e) {
      sum[e] += f[e];
      average[e] = sum[e] / static_cast<double>(count);
    }
    offer(f);
    offer(average);
    out.average_max_congestion = max_congestion(average, capacity);
    if (options.trace) {
      *options.trace << demand << ',' << it << ',' << out.value << ',' << widest << ',' << out.average_max_congestion
                     << '\n';
    }
    if (out.average_max_congestion <= done) {
      out.status = GroupedFlowStatus::kSuccess;
      return out;
    }
  }
  out.status = GroupedFlowStatus::kUnconverged;
  return out;
}

MaxFlowResult approx_max_flow(const WeightedGraph& g, const Partition& p, Vertex s, Vertex t,
                              const MaxFlowOptions& options) {
  if (s == t || s < 0 || t < 0 || s >= g.num_vertices() || t >= g.num_vertices()) {
    throw InvalidInput("max flow needs two distinct terminals");
  }
  const std::vector<int> owner = edge_to_group(g, p);
  auto is_boundary = [&](Vertex v) {
    for (size_t i = 0; i < p.boundary.size(); ++i) {
      if (std::binary_search(p.boundary[i].begin(), p.boundary[i].end(), v)) return true;
    }
    return false;
  };
  if (!is_boundary(s) || !is_boundary(t)) throw InvalidInput("terminals must be boundary vertices");

  MaxFlowResult out;
  out.rho_outer = outer_width(p.r, options.eps, options.c_w);
  double lo = 0.0;
  out.flow = bfs_path_flow(g, s, t, &lo);
  out.flow_value = lo;
  double cap_s = 0.0;
  double cap_t = 0.0;
  for (EdgeId e : g.incident(s)) cap_s += g.capacity()[static_cast<size_t>(e)];
  for (EdgeId e : g.incident(t)) cap_t += g.capacity()[static_cast<size_t>(e)];
  double hi = std::min(cap_s, cap_t);
  out.bracket_lo = lo;
  out.bracket_hi = hi;
  const double eps = options.eps;
  const long max_probes = static_cast<long>(std::ceil(std::log2(std::max(hi / lo, 1.0)))) +
                          static_cast<long>(std::ceil(std::log2(4.0 / eps))) + 2;

  SparsifierCache cache;
  // A successful probe certifies its demand up to rescaling, so the search
  // moves past it even when the rescaled flow is worth less.
  while (hi > lo * (1.0 + eps / 4.0) && out.probes < max_probes) {
    const double demand = hi / lo > 4.0 ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    const ProbeResult probe = probe_flow(g, p, s, t, demand, options, &cache);
    ++out.probes;
    out.iterations_outer += probe.outer_iterations;
    out.iterations_inner_total += probe.inner_iterations;
    out.width_violations += probe.width_violations;
    out.contract_misses += probe.contract_misses;
    out.weight_spread = std::max(out.weight_spread, probe.weight_spread);
    if (probe.value > out.flow_value) {
      out.flow_value = probe.value;
      out.flow = probe.flow;
    }
    lo = std::max(lo, probe.value);
    if (probe.status == GroupedFlowStatus::kSuccess) lo = std::max(lo, demand);
    else hi = std::min(hi, demand);
    if (hi < lo) hi = lo;
  }
  out.cache_hits = cache.hits;
  out.max_edge_congestion = max_congestion(out.flow, g.capacity());
  const std::vector<double> rms = group_rms_congestion(g, p, out.flow);
  out.per_group_congestion_max = rms.empty() ? 0.0 : *std::max_element(rms.begin(), rms.end());
  (void)owner;
  return out;
}

}  // namespace sepflow
