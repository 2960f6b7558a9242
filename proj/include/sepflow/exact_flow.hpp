#pragma once

#include <vector>

#include "sepflow/graph.hpp"

namespace sepflow {

struct ExactMaxFlow {
  double value = 0.0;
  /// Signed flow per edge in the graph's orientation.
  std::vector<double> flow;
  /// Vertices reachable from s in the final residual graph.
  std::vector<Vertex> source_side;
  double cut_capacity = 0.0;
};

/// Dinic's algorithm on the directed graph with two opposite arcs per edge.
ExactMaxFlow exact_max_flow(const WeightedGraph& g, Vertex s, Vertex t);

/// Total capacity of edges with exactly one end in `side`.
double cut_capacity(const WeightedGraph& g, const std::vector<Vertex>& side);

}  // namespace sepflow
