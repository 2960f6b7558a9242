#include "sepflow/instances.hpp"

#include <algorithm>
#include <cmath>

#include "sepflow/rng.hpp"

namespace sepflow {

Instance grid_instance(const GridLayout& layout, std::uint64_t seed, bool random_capacities, double lo, double hi) {
  if (layout.rows < 1 || layout.cols < 1 || layout.layers < 1 || layout.num_vertices() < 2) {
    throw InvalidInput("grid needs at least two vertices");
  }
  Instance inst;
  inst.layout = layout;
  inst.name = std::to_string(layout.rows) + "x" + std::to_string(layout.cols);
  if (layout.layers > 1) inst.name = std::to_string(layout.layers) + "x" + inst.name;
  std::vector<double> capacity(grid_edges(layout).size(), 1.0);
  if (random_capacities) {
    Rng rng(derive_seed(seed, streams::kInstance));
    for (double& c : capacity) c = rng.uniform(lo, hi);
  }
  inst.graph = make_grid(layout, std::move(capacity));
  inst.source = layout.vertex(0, 0, 0);
  inst.sink = layout.vertex(layout.layers - 1, layout.rows - 1, layout.cols - 1);
  return inst;
}

int default_group_size(int num_edges) {
  return std::max(4, static_cast<int>(std::ceil(std::pow(static_cast<double>(std::max(num_edges, 1)), 0.4))));
}

}  // namespace sepflow
