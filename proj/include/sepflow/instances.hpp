#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "sepflow/graph.hpp"
#include "sepflow/partition.hpp"

namespace sepflow {

struct Instance {
  std::string name;
  WeightedGraph graph;
  Vertex source = -1;
  Vertex sink = -1;
  std::optional<GridLayout> layout;
};

/// Grid with source at the first corner of the first layer and sink at the
/// opposite corner of the last layer. Random capacities are uniform in
/// [lo, hi) and depend only on the seed.
Instance grid_instance(const GridLayout& layout, std::uint64_t seed, bool random_capacities = true, double lo = 1.0,
                       double hi = 10.0);

/// ceil(m^{2/5}), at least 4.
int default_group_size(int num_edges);

}  // namespace sepflow
