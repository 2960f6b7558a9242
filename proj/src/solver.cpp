#include "sepflow/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "union_find.hpp"

namespace sepflow {

namespace {

constexpr double kZeroExcess = 1e-12;
constexpr double kDeltaFloor = 1e-13;

struct TreeEdge {
  int a;
  int b;
  double w;
};

// Maximum-weight spanning forest by Kruskal; ties broken by input order.
std::vector<TreeEdge> max_spanning_forest(int n, std::vector<TreeEdge> candidates) {
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const TreeEdge& x, const TreeEdge& y) { return x.w > y.w; });
  detail::UnionFind uf(n);
  std::vector<TreeEdge> forest;
  forest.reserve(static_cast<size_t>(std::max(0, n - 1)));
  for (const TreeEdge& e : candidates) {
    if (uf.unite(e.a, e.b)) forest.push_back(e);
  }
  return forest;
}

}  // namespace

SolverCapReached::SolverCapReached(Eigen::VectorXd best, SolveStats stats)
    : NumericalFailure("iteration cap reached after " + std::to_string(stats.iterations) +
                       " iterations (relative residual " + std::to_string(stats.relative_residual) + ")"),
      best_(std::move(best)),
      stats_(stats) {}

SolverHandle::SolverHandle(const SparseMatrix& a, SolverOptions options) : options_(options) {
  if (a.rows() != a.cols()) throw InvalidInput("solver matrix must be square");
  n_ = static_cast<int>(a.rows());
  SparseMatrix m = a;
  m.makeCompressed();

  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n_);
  Eigen::VectorXd off_sum = Eigen::VectorXd::Zero(n_);
  double max_entry = 0.0;
  double min_entry = std::numeric_limits<double>::infinity();
  for (int col = 0; col < m.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(m, col); it; ++it) {
      const double v = it.value();
      if (!std::isfinite(v)) throw InvalidInput("solver matrix has a non-finite entry");
      if (it.row() == col) {
        diag[col] += v;
      } else if (v != 0.0) {
        if (v > 0.0) m_matrix_ = false;
        off_sum[col] += std::abs(v);
        max_entry = std::max(max_entry, std::abs(v));
        min_entry = std::min(min_entry, std::abs(v));
      }
    }
  }
  Eigen::VectorXd excess = diag - off_sum;
  for (int v = 0; v < n_; ++v) {
    if (excess[v] < -1e-9 * std::max(diag[v], 1e-300)) {
      throw InvalidInput("solver matrix is not diagonally dominant at row " + std::to_string(v));
    }
    if (!(diag[v] > 0.0)) {
      throw InvalidInput("solver matrix has a nonpositive diagonal at row " + std::to_string(v));
    }
    if (excess[v] > kZeroExcess * diag[v]) {
      max_entry = std::max(max_entry, excess[v]);
      min_entry = std::min(min_entry, excess[v]);
    }
  }

  // Components of the off-diagonal support.
  component_.assign(static_cast<size_t>(n_), -1);
  num_components_ = 0;
  std::queue<int> queue;
  for (int root = 0; root < n_; ++root) {
    if (component_[static_cast<size_t>(root)] >= 0) continue;
    component_[static_cast<size_t>(root)] = num_components_;
    queue.push(root);
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop();
      for (SparseMatrix::InnerIterator it(m, v); it; ++it) {
        const auto u = static_cast<int>(it.row());
        if (u != v && it.value() != 0.0 && component_[static_cast<size_t>(u)] < 0) {
          component_[static_cast<size_t>(u)] = num_components_;
          queue.push(u);
        }
      }
    }
    ++num_components_;
  }

  // A component without excess is singular; ground its largest-diagonal vertex.
  singular_.assign(static_cast<size_t>(num_components_), m_matrix_ ? 1 : 0);
  std::vector<int> ground(static_cast<size_t>(num_components_), -1);
  for (int v = 0; v < n_; ++v) {
    const auto c = static_cast<size_t>(component_[static_cast<size_t>(v)]);
    if (excess[v] > kZeroExcess * diag[v]) singular_[c] = 0;
    if (ground[c] < 0 || diag[v] > diag[ground[c]]) ground[c] = v;
  }
  active_of_.assign(static_cast<size_t>(n_), -1);
  for (int v = 0; v < n_; ++v) {
    const auto c = static_cast<size_t>(component_[static_cast<size_t>(v)]);
    if (singular_[c] && ground[c] == v) continue;
    active_of_[static_cast<size_t>(v)] = static_cast<int>(vertex_of_.size());
    vertex_of_.push_back(v);
  }
  reduced_ = submatrix(m, vertex_of_, vertex_of_);
  const int na = static_cast<int>(vertex_of_.size());
  diag_ = reduced_.diagonal();

  if (std::isfinite(min_entry) && max_entry > 0.0) {
    const double nn = std::max(2.0, static_cast<double>(n_));
    kappa_ = nn * nn * nn * (max_entry / min_entry);
  }

  if (!m_matrix_) options_.preconditioner = Preconditioner::kJacobi;
  if (options_.preconditioner != Preconditioner::kTree || na == 0) return;

  // Tree over active vertices plus a ground node connected by the residual diagonal.
  std::vector<TreeEdge> candidates;
  Eigen::VectorXd to_ground = diag_;
  for (int col = 0; col < reduced_.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(reduced_, col); it; ++it) {
      if (it.row() == col || it.value() == 0.0) continue;
      to_ground[col] -= std::abs(it.value());
      if (it.row() < col) candidates.push_back({static_cast<int>(it.row()), col, std::abs(it.value())});
    }
  }
  for (int v = 0; v < na; ++v) {
    if (to_ground[v] > kZeroExcess * diag_[v]) candidates.push_back({v, na, to_ground[v]});
  }
  const std::vector<TreeEdge> forest = max_spanning_forest(na + 1, std::move(candidates));

  std::vector<std::vector<std::pair<int, double>>> adj(static_cast<size_t>(na) + 1);
  for (const TreeEdge& e : forest) {
    adj[static_cast<size_t>(e.a)].push_back({e.b, e.w});
    adj[static_cast<size_t>(e.b)].push_back({e.a, e.w});
  }
  parent_.assign(static_cast<size_t>(na), -1);
  parent_coupling_.assign(static_cast<size_t>(na), 0.0);
  std::vector<char> seen(static_cast<size_t>(na) + 1, 0);
  std::vector<int> bfs;
  bfs.reserve(static_cast<size_t>(na) + 1);
  auto grow = [&](int root) {
    seen[static_cast<size_t>(root)] = 1;
    size_t head = bfs.size();
    bfs.push_back(root);
    while (head < bfs.size()) {
      const int v = bfs[head++];
      for (const auto& [u, w] : adj[static_cast<size_t>(v)]) {
        if (seen[static_cast<size_t>(u)]) continue;
        seen[static_cast<size_t>(u)] = 1;
        if (v != na) {
          parent_[static_cast<size_t>(u)] = v;
          parent_coupling_[static_cast<size_t>(u)] = w;
        }
        bfs.push_back(u);
      }
    }
  };
  grow(na);
  for (int v = 0; v < na; ++v) {
    if (!seen[static_cast<size_t>(v)]) grow(v);
  }
  order_.clear();
  for (auto it = bfs.rbegin(); it != bfs.rend(); ++it) {
    if (*it != na) order_.push_back(*it);
  }
  pivot_.assign(diag_.data(), diag_.data() + na);
  for (int v : order_) {
    const int p = parent_[static_cast<size_t>(v)];
    if (p < 0) continue;
    const double c = parent_coupling_[static_cast<size_t>(v)];
    pivot_[static_cast<size_t>(p)] -= c * c / pivot_[static_cast<size_t>(v)];
  }
  for (double piv : pivot_) {
    if (!(piv > 0.0)) throw NumericalFailure("tree preconditioner lost positivity");
  }
}

int SolverHandle::iteration_cap() const {
  if (options_.max_iterations > 0) return options_.max_iterations;
  const double cap = 20.0 * std::sqrt(kappa_) + 1000.0;
  return static_cast<int>(std::min(cap, 5e6));
}

void SolverHandle::apply_reduced(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
  y.noalias() = reduced_ * x;
}

void SolverHandle::precondition(const Eigen::VectorXd& r, Eigen::VectorXd& z) const {
  if (options_.preconditioner == Preconditioner::kJacobi || pivot_.empty()) {
    z = r.cwiseQuotient(diag_);
    return;
  }
  z = r;
  for (int v : order_) {
    const int p = parent_[static_cast<size_t>(v)];
    if (p >= 0) z[p] += parent_coupling_[static_cast<size_t>(v)] * z[v] / pivot_[static_cast<size_t>(v)];
  }
  for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
    const int v = *it;
    const int p = parent_[static_cast<size_t>(v)];
    double rhs = z[v];
    if (p >= 0) rhs += parent_coupling_[static_cast<size_t>(v)] * z[p];
    z[v] = rhs / pivot_[static_cast<size_t>(v)];
  }
}

Eigen::VectorXd SolverHandle::solve(const Eigen::VectorXd& b, SolveStats* stats) const {
  return solve(b, options_.delta, stats);
}

Eigen::VectorXd SolverHandle::solve(const Eigen::VectorXd& b_in, double delta, SolveStats* stats) const {
  if (b_in.size() != n_) throw InvalidInput("right-hand side length does not match matrix");
  if (!(delta > 0.0)) throw InvalidInput("solver tolerance must be positive");
  delta = std::max(delta, kDeltaFloor);

  // Project out the null space of singular components.
  Eigen::VectorXd b = b_in;
  std::vector<double> sum(static_cast<size_t>(num_components_), 0.0);
  std::vector<double> mag(static_cast<size_t>(num_components_), 0.0);
  std::vector<int> size(static_cast<size_t>(num_components_), 0);
  for (int v = 0; v < n_; ++v) {
    const auto c = static_cast<size_t>(component_[static_cast<size_t>(v)]);
    sum[c] += b[v];
    mag[c] += std::abs(b[v]);
    ++size[c];
  }
  for (int v = 0; v < n_; ++v) {
    const auto c = static_cast<size_t>(component_[static_cast<size_t>(v)]);
    if (!singular_[c]) continue;
    if (std::abs(sum[c]) > 1e-8 * mag[c] + 1e-300) {
      throw InvalidInput("right-hand side is not orthogonal to the null space");
    }
    b[v] -= sum[c] / size[c];
  }

  const int na = static_cast<int>(vertex_of_.size());
  Eigen::VectorXd rhs(na);
  for (int i = 0; i < na; ++i) rhs[i] = b[vertex_of_[static_cast<size_t>(i)]];

  SolveStats local;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(na);
  const double bnorm = rhs.norm();
  if (bnorm == 0.0 || na == 0) {
    local.converged = true;
  } else {
    Eigen::VectorXd r = rhs;
    Eigen::VectorXd z(na);
    Eigen::VectorXd q(na);
    precondition(r, z);
    Eigen::VectorXd p = z;
    double gamma = r.dot(z);
    std::vector<double> terms;
    const int cap = iteration_cap();
    const int delay = std::max(1, options_.estimate_delay);
    double window = 0.0;
    for (int k = 0;; ++k) {
      if (k >= cap) {
        local.iterations = k;
        local.relative_residual = r.norm() / bnorm;
        local.converged = false;
        Eigen::VectorXd full = Eigen::VectorXd::Zero(n_);
        for (int i = 0; i < na; ++i) full[vertex_of_[static_cast<size_t>(i)]] = x[i];
        if (stats) *stats = local;
        throw SolverCapReached(full, local);
      }
      apply_reduced(p, q);
      const double pq = p.dot(q);
      if (!(pq > 0.0) || !(gamma > 0.0)) {
        local.iterations = k;
        local.converged = r.norm() <= 1e-12 * bnorm;
        break;
      }
      const double alpha = gamma / pq;
      x.noalias() += alpha * p;
      r.noalias() -= alpha * q;
      terms.push_back(alpha * gamma);
      // Summed afresh: a running difference cancels badly once terms shrink.
      window = 0.0;
      for (size_t i = terms.size() > static_cast<size_t>(delay) ? terms.size() - static_cast<size_t>(delay) : 0;
           i < terms.size(); ++i) {
        window += terms[i];
      }
      const double xnorm2 = rhs.dot(x);
      const double rnorm = r.norm();
      local.iterations = k + 1;
      local.relative_residual = rnorm / bnorm;
      local.error_estimate = xnorm2 > 0.0 ? std::sqrt(std::max(window, 0.0) / xnorm2) : 1.0;
      const bool enough = static_cast<int>(terms.size()) >= std::min(delay, na);
      if (rnorm == 0.0 || (enough && window <= delta * delta * xnorm2)) {
        local.converged = true;
        break;
      }
      precondition(r, z);
      const double gamma_next = r.dot(z);
      p = z + (gamma_next / gamma) * p;
      gamma = gamma_next;
    }
  }

  Eigen::VectorXd full = Eigen::VectorXd::Zero(n_);
  for (int i = 0; i < na; ++i) full[vertex_of_[static_cast<size_t>(i)]] = x[i];
  std::vector<double> mean(static_cast<size_t>(num_components_), 0.0);
  for (int v = 0; v < n_; ++v) mean[static_cast<size_t>(component_[static_cast<size_t>(v)])] += full[v];
  for (int v = 0; v < n_; ++v) {
    const auto c = static_cast<size_t>(component_[static_cast<size_t>(v)]);
    if (singular_[c]) full[v] -= mean[c] / size[c];
  }
  if (stats) *stats = local;
  return full;
}

Eigen::VectorXd solve_sdd(const SparseMatrix& a, const Eigen::VectorXd& b, double delta, SolveStats* stats) {
  SolverOptions options;
  options.delta = delta;
  return SolverHandle(a, options).solve(b, stats);
}

void repair_on_tree(int n, std::span<const Edge> edges, std::span<const double> conductance,
                    std::span<double> flow, const DemandVector& d) {
  std::vector<TreeEdge> candidates;
  candidates.reserve(edges.size());
  for (size_t e = 0; e < edges.size(); ++e) {
    candidates.push_back({static_cast<int>(e), 0, conductance[e]});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const TreeEdge& x, const TreeEdge& y) { return x.w > y.w; });
  detail::UnionFind uf(n);
  std::vector<std::vector<std::pair<int, int>>> adj(static_cast<size_t>(n));
  for (const TreeEdge& c : candidates) {
    const Edge& e = edges[static_cast<size_t>(c.a)];
    if (uf.unite(e.tail, e.head)) {
      adj[static_cast<size_t>(e.tail)].push_back({e.head, c.a});
      adj[static_cast<size_t>(e.head)].push_back({e.tail, c.a});
    }
  }

  std::vector<double> res(d.values());
  for (size_t e = 0; e < edges.size(); ++e) {
    res[static_cast<size_t>(edges[e].tail)] -= flow[e];
    res[static_cast<size_t>(edges[e].head)] += flow[e];
  }

  std::vector<int> parent_edge(static_cast<size_t>(n), -1);
  std::vector<int> parent(static_cast<size_t>(n), -1);
  std::vector<char> seen(static_cast<size_t>(n), 0);
  std::vector<int> order;
  order.reserve(static_cast<size_t>(n));
  for (int root = 0; root < n; ++root) {
    if (seen[static_cast<size_t>(root)]) continue;
    seen[static_cast<size_t>(root)] = 1;
    size_t head = order.size();
    order.push_back(root);
    while (head < order.size()) {
      const int v = order[head++];
      for (const auto& [u, e] : adj[static_cast<size_t>(v)]) {
        if (seen[static_cast<size_t>(u)]) continue;
        seen[static_cast<size_t>(u)] = 1;
        parent[static_cast<size_t>(u)] = v;
        parent_edge[static_cast<size_t>(u)] = e;
        order.push_back(u);
      }
    }
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int v = *it;
    const int e = parent_edge[static_cast<size_t>(v)];
    if (e < 0) continue;
    const double push = res[static_cast<size_t>(v)];
    if (push == 0.0) continue;
    if (edges[static_cast<size_t>(e)].tail == v) {
      flow[static_cast<size_t>(e)] += push;
    } else {
      flow[static_cast<size_t>(e)] -= push;
    }
    res[static_cast<size_t>(parent[static_cast<size_t>(v)])] += push;
    res[static_cast<size_t>(v)] = 0.0;
  }
}

ElectricalFlowResult electrical_flow(int n, std::span<const Edge> edges, std::span<const double> resistance,
                                     const DemandVector& d, double delta,
                                     const ElectricalFlowOptions& options) {
  if (d.size() != n) throw InvalidInput("demand length does not match vertex count");
  if (resistance.size() != edges.size()) throw InvalidInput("resistance length does not match edge count");
  if (!(delta > 0.0)) throw InvalidInput("electrical flow tolerance must be positive");
  if (!d.is_balanced()) throw InvalidInput("demand does not sum to zero");
  detail::UnionFind uf(n);
  int pieces = n;
  std::vector<double> conductance(edges.size());
  for (size_t e = 0; e < edges.size(); ++e) {
    if (!(resistance[e] > 0.0) || !std::isfinite(resistance[e])) throw InvalidInput("resistance must be positive");
    conductance[e] = 1.0 / resistance[e];
    if (uf.unite(edges[e].tail, edges[e].head)) --pieces;
  }
  if (pieces > 1) throw InvalidInput("electrical flow requires a connected graph");

  ElectricalFlowResult out;
  out.flow.assign(edges.size(), 0.0);
  out.potentials.assign(static_cast<size_t>(n), 0.0);
  if (d.max_abs() == 0.0) return out;

  const SparseLaplacian lap = laplacian_from_conductances(n, edges, conductance);
  SolverOptions solver_options;
  solver_options.preconditioner = options.preconditioner;
  const SolverHandle handle(lap.matrix(), solver_options);
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(d.values().data(), n);

  const double s = std::sqrt(1.0 + delta) - 1.0;
  const double wanted = options.certify_edge_energy ? s * s : delta;
  const double target = std::max(wanted, options.gap_floor);
  out.precision_limited = wanted < options.gap_floor;

  double solve_delta = std::min(0.25, target / 4.0);
  for (int round = 0;; ++round) {
    SolveStats stats;
    const Eigen::VectorXd phi = handle.solve(rhs, solve_delta, &stats);
    out.solver_iterations += stats.iterations;
    for (size_t e = 0; e < edges.size(); ++e) {
      out.flow[e] = (phi[edges[e].tail] - phi[edges[e].head]) * conductance[e];
    }
    repair_on_tree(n, edges, conductance, out.flow, d);
    out.energy = energy(out.flow, resistance);
    double phi_l_phi = 0.0;
    for (size_t e = 0; e < edges.size(); ++e) {
      const double diff = phi[edges[e].tail] - phi[edges[e].head];
      phi_l_phi += diff * diff * conductance[e];
    }
    out.optimum_lower_bound = 2.0 * rhs.dot(phi) - phi_l_phi;
    out.potentials.assign(phi.data(), phi.data() + n);
    const double gap = out.energy - out.optimum_lower_bound;
    if (out.optimum_lower_bound > 0.0 && gap <= target * out.optimum_lower_bound) break;
    if (solve_delta <= kDeltaFloor || round >= 12) {
      out.precision_limited = true;
      break;
    }
    solve_delta = std::max(kDeltaFloor, solve_delta * 0.01);
  }
  return out;
}

ElectricalFlowResult electrical_flow(const WeightedGraph& g, const DemandVector& d, double delta,
                                     const ElectricalFlowOptions& options) {
  if (!g.is_connected()) throw InvalidInput("electrical flow requires a connected graph");
  return electrical_flow(g.num_vertices(), g.edges(), g.resistance(), d, delta, options);
}

double optimum_energy(const WeightedGraph& g, const DemandVector& d) {
  if (!g.is_connected()) throw InvalidInput("optimum energy requires a connected graph");
  if (!d.is_balanced()) throw InvalidInput("demand does not sum to zero");
  const SparseLaplacian lap = laplacian_from_resistances(g);
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(d.values().data(), d.size());
  const Eigen::VectorXd phi = solve_sdd(lap.matrix(), rhs, 1e-10);
  return 2.0 * rhs.dot(phi) - phi.dot(lap.matrix() * phi);
}

}  // namespace sepflow
