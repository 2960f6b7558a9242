#include "sepflow/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

namespace sepflow {

namespace {

void check_positive(const std::vector<double>& values, const char* what) {
  for (size_t e = 0; e < values.size(); ++e) {
    if (!(values[e] > 0.0) || !std::isfinite(values[e])) {
      std::ostringstream msg;
      msg << what << " of edge " << e << " must be positive and finite (got " << values[e] << ")";
      throw InvalidInput(msg.str());
    }
  }
}

}  // namespace

WeightedGraph::WeightedGraph(int num_vertices, std::vector<Edge> edges,
                             std::vector<double> capacity, std::vector<double> weight,
                             std::optional<std::vector<double>> resistance)
    : n_(num_vertices),
      edges_(std::move(edges)),
      capacity_(std::move(capacity)),
      weight_(std::move(weight)),
      resistance_(std::move(resistance)) {
  if (n_ < 0) throw InvalidInput("negative vertex count");
  const size_t m = edges_.size();
  if (capacity_.empty()) capacity_.assign(m, 1.0);
  if (weight_.empty()) weight_.assign(m, 1.0);
  if (capacity_.size() != m || weight_.size() != m ||
      (resistance_ && resistance_->size() != m)) {
    throw InvalidInput("per-edge vectors must match the edge count");
  }
  for (size_t e = 0; e < m; ++e) {
    Edge& ed = edges_[e];
    if (ed.tail < 0 || ed.head < 0 || ed.tail >= n_ || ed.head >= n_) {
      std::ostringstream msg;
      msg << "edge " << e << " has an endpoint outside [0, " << n_ << ")";
      throw InvalidInput(msg.str());
    }
    if (ed.tail == ed.head) {
      std::ostringstream msg;
      msg << "edge " << e << " is a self-loop at vertex " << ed.tail;
      throw InvalidInput(msg.str());
    }
    if (ed.tail > ed.head) std::swap(ed.tail, ed.head);
  }
  check_positive(capacity_, "capacity");
  check_positive(weight_, "weight");
  if (resistance_) check_positive(*resistance_, "resistance");
  build_adjacency();
}

void WeightedGraph::build_adjacency() {
  offsets_.assign(static_cast<size_t>(n_) + 1, 0);
  for (const Edge& e : edges_) {
    ++offsets_[static_cast<size_t>(e.tail) + 1];
    ++offsets_[static_cast<size_t>(e.head) + 1];
  }
  std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
  incident_.assign(2 * edges_.size(), 0);
  std::vector<int> fill(offsets_.begin(), offsets_.end() - 1);
  for (EdgeId e = 0; e < num_edges(); ++e) {
    incident_[static_cast<size_t>(fill[static_cast<size_t>(edges_[e].tail)]++)] = e;
    incident_[static_cast<size_t>(fill[static_cast<size_t>(edges_[e].head)]++)] = e;
  }

  component_.assign(static_cast<size_t>(n_), -1);
  num_components_ = 0;
  std::queue<Vertex> queue;
  for (Vertex root = 0; root < n_; ++root) {
    if (component_[static_cast<size_t>(root)] >= 0) continue;
    component_[static_cast<size_t>(root)] = num_components_;
    queue.push(root);
    while (!queue.empty()) {
      Vertex v = queue.front();
      queue.pop();
      for (EdgeId e : incident(v)) {
        Vertex u = other_end(e, v);
        if (component_[static_cast<size_t>(u)] < 0) {
          component_[static_cast<size_t>(u)] = num_components_;
          queue.push(u);
        }
      }
    }
    ++num_components_;
  }
}

const std::vector<double>& WeightedGraph::resistance() const {
  if (!resistance_) throw InvalidInput("graph carries no resistance vector");
  return *resistance_;
}

std::span<const EdgeId> WeightedGraph::incident(Vertex v) const {
  const auto begin = static_cast<size_t>(offsets_[static_cast<size_t>(v)]);
  const auto end = static_cast<size_t>(offsets_[static_cast<size_t>(v) + 1]);
  return std::span<const EdgeId>(incident_.data() + begin, end - begin);
}

Vertex WeightedGraph::other_end(EdgeId e, Vertex v) const {
  const Edge& ed = edges_[static_cast<size_t>(e)];
  return ed.tail == v ? ed.head : ed.tail;
}

WeightedGraph WeightedGraph::with_weights(std::vector<double> weight) const {
  return WeightedGraph(n_, edges_, capacity_, std::move(weight), resistance_);
}

WeightedGraph WeightedGraph::with_resistances(std::vector<double> resistance) const {
  return WeightedGraph(n_, edges_, capacity_, weight_, std::move(resistance));
}

DemandVector DemandVector::st(int n, Vertex s, Vertex t, double amount) {
  if (s < 0 || t < 0 || s >= n || t >= n || s == t) {
    throw InvalidInput("s and t must be distinct vertices");
  }
  DemandVector d = zero(n);
  d[s] = amount;
  d[t] = -amount;
  return d;
}

double DemandVector::total() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0);
}

double DemandVector::max_abs() const {
  double best = 0.0;
  for (double x : values_) best = std::max(best, std::abs(x));
  return best;
}

bool DemandVector::is_balanced(double rel_tol) const {
  const double scale = std::max(1.0, max_abs()) * static_cast<double>(std::max(1, size()));
  return std::abs(total()) <= rel_tol * scale;
}

double edge_congestion(const FlowState& f, const WeightedGraph& g, EdgeId e) {
  if (e < 0 || e >= g.num_edges() || static_cast<size_t>(e) >= f.flow.size()) {
    throw InvalidInput("edge id out of range");
  }
  return std::abs(f.flow[static_cast<size_t>(e)]) / g.capacity()[static_cast<size_t>(e)];
}

double group_congestion(std::span<const double> flow, const WeightedGraph& g,
                        std::span<const EdgeId> group) {
  if (group.empty()) throw InvalidInput("degenerate (empty) edge group");
  double total = 0.0;
  for (EdgeId e : group) {
    const double fe = flow[static_cast<size_t>(e)];
    total += g.weight()[static_cast<size_t>(e)] * fe * fe;
  }
  return std::sqrt(total);
}

double group_congestion(const FlowState& f, const WeightedGraph& g,
                        std::span<const EdgeId> group) {
  return group_congestion(std::span<const double>(f.flow), g, group);
}

DemandVector residual(std::span<const double> flow, const WeightedGraph& g) {
  if (flow.size() != static_cast<size_t>(g.num_edges())) {
    throw InvalidInput("flow length does not match edge count");
  }
  DemandVector d = DemandVector::zero(g.num_vertices());
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(e);
    d[ed.tail] += flow[static_cast<size_t>(e)];
    d[ed.head] -= flow[static_cast<size_t>(e)];
  }
  return d;
}

double energy(std::span<const double> flow, std::span<const double> resistance) {
  if (flow.size() != resistance.size()) throw InvalidInput("flow/resistance length mismatch");
  double total = 0.0;
  for (size_t e = 0; e < flow.size(); ++e) total += resistance[e] * flow[e] * flow[e];
  return total;
}

double max_edge_congestion(std::span<const double> flow, const WeightedGraph& g) {
  double best = 0.0;
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    best = std::max(best, std::abs(flow[static_cast<size_t>(e)]) / g.capacity()[static_cast<size_t>(e)]);
  }
  return best;
}

double spread(std::span<const double> values) {
  if (values.empty()) return 1.0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return *hi / *lo;
}

}  // namespace sepflow
