#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sepflow/graph.hpp"

namespace sepflow {

/// Validation error naming the failed clause and the offending group or node.
class ValidationError : public InvalidInput {
 public:
  ValidationError(std::string clause, int where, const std::string& what);
  const std::string& clause() const { return clause_; }
  /// Group id or tree node id, -1 when global.
  int where() const { return where_; }

 private:
  std::string clause_;
  int where_;
};

/// Vertex layout of a (possibly layered) grid. Vertex id = (layer*rows + i)*cols + j.
struct GridLayout {
  int rows = 0;
  int cols = 0;
  int layers = 1;

  int num_vertices() const { return rows * cols * layers; }
  Vertex vertex(int layer, int i, int j) const { return (layer * rows + i) * cols + j; }
  int layer_of(Vertex v) const { return v / (rows * cols); }
  int row_of(Vertex v) const { return (v / cols) % rows; }
  int col_of(Vertex v) const { return v % cols; }
};

/// Edge order: per layer, per vertex in id order, the edge to the right then
/// the edge below; inter-layer edges follow, in vertex order.
WeightedGraph make_grid(const GridLayout& layout, std::vector<double> capacity = {});
std::vector<Edge> grid_edges(const GridLayout& layout);

struct PartitionLimits {
  double c_div = 4.0;
  double c_bdry = 8.0;
};

struct Partition {
  int r = 0;
  std::vector<std::vector<EdgeId>> groups;
  /// Sorted boundary vertex set per group.
  std::vector<std::vector<Vertex>> boundary;

  int num_groups() const { return static_cast<int>(groups.size()); }
  bool operator==(const Partition&) const = default;
};

/// Sorted vertex set touched by a group.
std::vector<Vertex> group_vertices(const WeightedGraph& g, const std::vector<EdgeId>& group);
/// Vertices of the group that are not boundary vertices.
std::vector<Vertex> group_interior(const WeightedGraph& g, const Partition& p, int i);
/// Group index per edge.
std::vector<int> edge_to_group(const WeightedGraph& g, const Partition& p);

/// Boundary = vertices incident to the group and to an edge outside it, plus
/// the terminals the group touches.
std::vector<std::vector<Vertex>> compute_boundaries(const WeightedGraph& g,
                                                    const std::vector<std::vector<EdgeId>>& groups,
                                                    const std::vector<Vertex>& terminals);

void validate(const Partition& p, const WeightedGraph& g, const std::vector<Vertex>& terminals,
              const PartitionLimits& limits = {});

/// Axis-aligned blocks of b x b cells spanning all layers, with the largest b
/// whose biggest block has at most r edges. When that leaves more than
/// 4 n / r groups, the fewest rectangular blocks within r are used instead,
/// either of cells or of vertex columns owning the edges they start.
Partition grid_r_division(const GridLayout& layout, int r, const std::vector<Vertex>& terminals = {});
/// Side length, in cells, chosen by grid_r_division.
int grid_block_side(const GridLayout& layout, int r);

struct SeparatorNode {
  int id = 0;
  int parent = -1;
  std::vector<Vertex> separator;
  std::vector<Vertex> vertices;
  int children[2] = {-1, -1};

  bool is_leaf() const { return children[0] < 0; }
};

/// Recursive separator hierarchy over a group's vertex set. Nodes are stored
/// in pre-order. Edges with both ends in a node's separator appear in both
/// children with half their weight.
struct SeparatorTree {
  std::vector<SeparatorNode> nodes;
  int leaf_size = 16;
  double alpha = 0.9;
  double c0 = 0.0;

  const SeparatorNode& root() const { return nodes.front(); }
  int depth() const;
};

SeparatorTree separator_tree_for_grid_block(const GridLayout& layout, const WeightedGraph& g,
                                            const std::vector<EdgeId>& group, int leaf_size = 16);

/// Structural checks: coverage, balance, literal separation, sizes.
void validate(const SeparatorTree& tree, const WeightedGraph& g, const std::vector<EdgeId>& group);

void write_partition(std::ostream& out, const Partition& p);
Partition read_partition(std::istream& in, const std::string& source = "<stream>");
Partition load_partition(const std::string& path, const WeightedGraph& g,
                         const std::vector<Vertex>& terminals, const PartitionLimits& limits = {});

void write_septree(std::ostream& out, const SeparatorTree& tree);
SeparatorTree read_septree(std::istream& in, const std::string& source = "<stream>");
SeparatorTree load_septree(const std::string& path, const WeightedGraph& g, const std::vector<EdgeId>& group);

/// Reads a multi-tree file: one `septree <group>` section per tree.
std::vector<std::optional<SeparatorTree>> read_septree_set(std::istream& in, int num_groups,
                                                           const std::string& source = "<stream>");
void write_septree_set(std::ostream& out, const std::vector<std::optional<SeparatorTree>>& trees);

}  // namespace sepflow
