#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sepflow {

using Vertex = std::int32_t;
using EdgeId = std::int32_t;

/// Raised when an input violates a documented precondition.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical routine cannot meet its contract.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Edge {
  Vertex tail;
  Vertex head;
};

/// Undirected multigraph with a fixed orientation per edge.
///
/// Orientation is normalised at construction so that tail < head; parallel
/// edges keep their insertion order. Capacities, weights and resistances are
/// per-edge and strictly positive. The graph is immutable once built.
class WeightedGraph {
 public:
  WeightedGraph() = default;
  WeightedGraph(int num_vertices, std::vector<Edge> edges,
                std::vector<double> capacity, std::vector<double> weight = {},
                std::optional<std::vector<double>> resistance = std::nullopt);

  int num_vertices() const { return n_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_.at(static_cast<size_t>(e)); }
  const std::vector<double>& capacity() const { return capacity_; }
  const std::vector<double>& weight() const { return weight_; }
  bool has_resistance() const { return resistance_.has_value(); }
  const std::vector<double>& resistance() const;

  bool is_connected() const { return num_components_ <= 1; }
  int num_components() const { return num_components_; }
  /// Component label per vertex, 0-based, in order of first appearance.
  const std::vector<int>& component() const { return component_; }

  /// Incident edges of v (CSR view).
  std::span<const EdgeId> incident(Vertex v) const;
  Vertex other_end(EdgeId e, Vertex v) const;

  WeightedGraph with_weights(std::vector<double> weight) const;
  WeightedGraph with_resistances(std::vector<double> resistance) const;

 private:
  void build_adjacency();

  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<double> capacity_;
  std::vector<double> weight_;
  std::optional<std::vector<double>> resistance_;
  std::vector<int> offsets_;
  std::vector<EdgeId> incident_;
  std::vector<int> component_;
  int num_components_ = 0;
};

/// Per-vertex demand; net outflow required at each vertex.
class DemandVector {
 public:
  DemandVector() = default;
  explicit DemandVector(std::vector<double> values) : values_(std::move(values)) {}
  static DemandVector zero(int n) { return DemandVector(std::vector<double>(static_cast<size_t>(n), 0.0)); }
  /// +amount at s, -amount at t.
  static DemandVector st(int n, Vertex s, Vertex t, double amount);

  int size() const { return static_cast<int>(values_.size()); }
  double operator[](Vertex v) const { return values_[static_cast<size_t>(v)]; }
  double& operator[](Vertex v) { return values_[static_cast<size_t>(v)]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  double total() const;
  double max_abs() const;
  bool is_balanced(double rel_tol = 1e-9) const;

 private:
  std::vector<double> values_;
};

/// A flow on the oriented edges together with the demand it is meant to route.
struct FlowState {
  std::vector<double> flow;
  DemandVector demand;
};

double edge_congestion(const FlowState& f, const WeightedGraph& g, EdgeId e);

/// sqrt(sum_{e in group} w(e) f(e)^2) for the graph's weight vector.
double group_congestion(std::span<const double> flow, const WeightedGraph& g,
                        std::span<const EdgeId> group);
double group_congestion(const FlowState& f, const WeightedGraph& g,
                        std::span<const EdgeId> group);

/// B^T f: net outflow at every vertex.
DemandVector residual(std::span<const double> flow, const WeightedGraph& g);
inline DemandVector residual(const FlowState& f, const WeightedGraph& g) {
  return residual(f.flow, g);
}

/// sum_e r(e) f(e)^2
double energy(std::span<const double> flow, std::span<const double> resistance);

double max_edge_congestion(std::span<const double> flow, const WeightedGraph& g);

/// Ratio max/min of a positive vector.
double spread(std::span<const double> values);

}  // namespace sepflow
