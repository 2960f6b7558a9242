#include "sepflow/partition.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <queue>
#include <sstream>

#include "sepflow/dimacs.hpp"

namespace sepflow {

ValidationError::ValidationError(std::string clause, int where, const std::string& what)
    : InvalidInput(clause + ": " + what), clause_(std::move(clause)), where_(where) {}

std::vector<Edge> grid_edges(const GridLayout& layout) {
  if (layout.rows < 1 || layout.cols < 1 || layout.layers < 1) throw InvalidInput("grid dimensions must be positive");
  std::vector<Edge> edges;
  for (int l = 0; l < layout.layers; ++l) {
    for (int i = 0; i < layout.rows; ++i) {
      for (int j = 0; j < layout.cols; ++j) {
        const Vertex v = layout.vertex(l, i, j);
        if (j + 1 < layout.cols) edges.push_back({v, layout.vertex(l, i, j + 1)});
        if (i + 1 < layout.rows) edges.push_back({v, layout.vertex(l, i + 1, j)});
      }
    }
  }
  for (int l = 0; l + 1 < layout.layers; ++l) {
    for (int i = 0; i < layout.rows; ++i) {
      for (int j = 0; j < layout.cols; ++j) {
        edges.push_back({layout.vertex(l, i, j), layout.vertex(l + 1, i, j)});
      }
    }
  }
  return edges;
}

WeightedGraph make_grid(const GridLayout& layout, std::vector<double> capacity) {
  std::vector<Edge> edges = grid_edges(layout);
  return WeightedGraph(layout.num_vertices(), std::move(edges), std::move(capacity));
}

std::vector<Vertex> group_vertices(const WeightedGraph& g, const std::vector<EdgeId>& group) {
  std::vector<Vertex> out;
  out.reserve(group.size() * 2);
  for (EdgeId e : group) {
    out.push_back(g.edge(e).tail);
    out.push_back(g.edge(e).head);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Vertex> group_interior(const WeightedGraph& g, const Partition& p, int i) {
  std::vector<Vertex> all = group_vertices(g, p.groups.at(static_cast<size_t>(i)));
  std::vector<Vertex> out;
  std::set_difference(all.begin(), all.end(), p.boundary[static_cast<size_t>(i)].begin(),
                      p.boundary[static_cast<size_t>(i)].end(), std::back_inserter(out));
  return out;
}

std::vector<int> edge_to_group(const WeightedGraph& g, const Partition& p) {
  std::vector<int> owner(static_cast<size_t>(g.num_edges()), -1);
  for (int i = 0; i < p.num_groups(); ++i) {
    for (EdgeId e : p.groups[static_cast<size_t>(i)]) owner.at(static_cast<size_t>(e)) = i;
  }
  return owner;
}

std::vector<std::vector<Vertex>> compute_boundaries(const WeightedGraph& g,
                                                    const std::vector<std::vector<EdgeId>>& groups,
                                                    const std::vector<Vertex>& terminals) {
  std::vector<int> owner(static_cast<size_t>(g.num_edges()), -1);
  for (size_t i = 0; i < groups.size(); ++i) {
    for (EdgeId e : groups[i]) {
      if (e < 0 || e >= g.num_edges()) throw InvalidInput("edge id out of range");
      owner[static_cast<size_t>(e)] = static_cast<int>(i);
    }
  }
  std::vector<std::vector<Vertex>> out(groups.size());
  for (size_t i = 0; i < groups.size(); ++i) {
    for (Vertex v : group_vertices(g, groups[i])) {
      bool outside = std::find(terminals.begin(), terminals.end(), v) != terminals.end();
      for (EdgeId e : g.incident(v)) {
        if (outside) break;
        outside = owner[static_cast<size_t>(e)] != static_cast<int>(i);
      }
      if (outside) out[i].push_back(v);
    }
  }
  return out;
}

void validate(const Partition& p, const WeightedGraph& g, const std::vector<Vertex>& terminals,
              const PartitionLimits& limits) {
  const int k = p.num_groups();
  if (static_cast<int>(p.boundary.size()) != k) {
    throw ValidationError("shape", -1, "boundary list count differs from group count");
  }
  if (p.r < 1) throw ValidationError("group-size", -1, "group size bound r must be positive");
  std::vector<int> owner(static_cast<size_t>(g.num_edges()), -1);
  for (int i = 0; i < k; ++i) {
    const auto& group = p.groups[static_cast<size_t>(i)];
    if (group.empty()) throw ValidationError("degenerate-group", i, "group " + std::to_string(i) + " is empty");
    for (EdgeId e : group) {
      if (e < 0 || e >= g.num_edges()) {
        throw ValidationError("edge-partition", i, "edge " + std::to_string(e) + " in group " +
                                                       std::to_string(i) + " is out of range");
      }
      int& o = owner[static_cast<size_t>(e)];
      if (o >= 0) {
        throw ValidationError("edge-partition", i, "edge " + std::to_string(e) + " in groups " +
                                                       std::to_string(o) + " and " + std::to_string(i));
      }
      o = i;
    }
  }
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    if (owner[static_cast<size_t>(e)] < 0) {
      throw ValidationError("edge-partition", -1, "edge " + std::to_string(e) + " in no group");
    }
  }
  for (int i = 0; i < k; ++i) {
    const auto size = static_cast<int>(p.groups[static_cast<size_t>(i)].size());
    if (size > p.r) {
      throw ValidationError("group-size", i, "group " + std::to_string(i) + " has " + std::to_string(size) +
                                                 " edges, more than r = " + std::to_string(p.r));
    }
  }
  const double max_groups = std::max(1.0, limits.c_div * g.num_vertices() / p.r);
  if (k > max_groups) {
    throw ValidationError("group-count", -1, std::to_string(k) + " groups exceed c_div * n / r = " +
                                                 std::to_string(max_groups));
  }
  const double max_boundary = limits.c_bdry * std::sqrt(static_cast<double>(p.r));
  for (int i = 0; i < k; ++i) {
    const auto size = p.boundary[static_cast<size_t>(i)].size();
    if (static_cast<double>(size) > max_boundary) {
      throw ValidationError("boundary-size", i, "group " + std::to_string(i) + " has " + std::to_string(size) +
                                                    " boundary vertices, more than " + std::to_string(max_boundary));
    }
  }
  const auto expected = compute_boundaries(g, p.groups, terminals);
  for (int i = 0; i < k; ++i) {
    std::vector<Vertex> given = p.boundary[static_cast<size_t>(i)];
    std::sort(given.begin(), given.end());
    const auto& want = expected[static_cast<size_t>(i)];
    if (given == want) continue;
    std::vector<Vertex> extra;
    std::vector<Vertex> missing;
    std::set_difference(given.begin(), given.end(), want.begin(), want.end(), std::back_inserter(extra));
    std::set_difference(want.begin(), want.end(), given.begin(), given.end(), std::back_inserter(missing));
    std::string what = "group " + std::to_string(i);
    if (!missing.empty()) what += " is missing boundary vertex " + std::to_string(missing.front());
    else if (!extra.empty()) what += " lists non-boundary vertex " + std::to_string(extra.front());
    else what += " lists a duplicate boundary vertex";
    throw ValidationError("boundary-correctness", i, what);
  }
}

namespace {

struct CellIndex {
  int ci;
  int cj;
};

CellIndex edge_cell(const GridLayout& layout, const Edge& e) {
  const int li = layout.row_of(e.tail), lj = layout.col_of(e.tail);
  const int hi = layout.row_of(e.head), hj = layout.col_of(e.head);
  const int last_i = std::max(0, layout.rows - 2);
  const int last_j = std::max(0, layout.cols - 2);
  if (li == hi && lj != hj) return {std::min(li, last_i), std::min(lj, hj)};
  if (lj == hj && li != hi) return {std::min(li, hi), std::min(lj, last_j)};
  return {std::min(li, last_i), std::min(lj, last_j)};
}

std::vector<int> block_of_edges(const GridLayout& layout, const std::vector<Edge>& edges, int bi, int bj, int* count) {
  const int cells_j = std::max(1, layout.cols - 1);
  const int blocks_j = (cells_j + bj - 1) / bj;
  const int cells_i = std::max(1, layout.rows - 1);
  const int blocks_i = (cells_i + bi - 1) / bi;
  std::vector<int> out(edges.size());
  for (size_t e = 0; e < edges.size(); ++e) {
    const CellIndex c = edge_cell(layout, edges[e]);
    out[e] = (c.ci / bi) * blocks_j + (c.cj / bj);
  }
  if (count) *count = blocks_i * blocks_j;
  return out;
}

int largest_block(const std::vector<int>& owner, int blocks) {
  std::vector<int> size(static_cast<size_t>(blocks), 0);
  for (int o : owner) ++size[static_cast<size_t>(o)];
  return *std::max_element(size.begin(), size.end());
}

std::vector<int> block_of_tails(const GridLayout& layout, const std::vector<Edge>& edges, int bi, int bj, int* count) {
  const int blocks_j = (layout.cols + bj - 1) / bj;
  const int blocks_i = (layout.rows + bi - 1) / bi;
  std::vector<int> out(edges.size());
  for (size_t e = 0; e < edges.size(); ++e) {
    const int i = std::min(layout.row_of(edges[e].tail), layout.row_of(edges[e].head));
    const int j = std::min(layout.col_of(edges[e].tail), layout.col_of(edges[e].head));
    out[e] = (i / bi) * blocks_j + (j / bj);
  }
  if (count) *count = blocks_i * blocks_j;
  return out;
}

int nonempty_blocks(const std::vector<int>& owner, int blocks) {
  std::vector<char> used(static_cast<size_t>(blocks), 0);
  for (int o : owner) used[static_cast<size_t>(o)] = 1;
  return static_cast<int>(std::count(used.begin(), used.end(), 1));
}

}  // namespace

int grid_block_side(const GridLayout& layout, int r) {
  if (r < 4) throw InvalidInput("r must be at least 4");
  if (layout.rows < 2 || layout.cols < 2) throw InvalidInput("grid dimensions must be at least 2");
  const std::vector<Edge> edges = grid_edges(layout);
  for (int b = std::max(layout.rows - 1, layout.cols - 1); b >= 1; --b) {
    int blocks = 0;
    const std::vector<int> owner = block_of_edges(layout, edges, b, b, &blocks);
    if (largest_block(owner, blocks) <= r) return b;
  }
  throw InvalidInput("r = " + std::to_string(r) + " is smaller than a single grid cell's edge count");
}

Partition grid_r_division(const GridLayout& layout, int r, const std::vector<Vertex>& terminals) {
  if (r < 4) throw InvalidInput("r must be at least 4");
  if (layout.rows < 2 || layout.cols < 2) throw InvalidInput("grid dimensions must be at least 2");
  const std::vector<Edge> edges = grid_edges(layout);
  const int cells_i = layout.rows - 1;
  const int cells_j = layout.cols - 1;
  int bi = 0, bj = 0;
  int blocks = std::numeric_limits<int>::max();
  std::vector<int> owner;
  for (int b = std::max(cells_i, cells_j); b >= 1; --b) {
    int count = 0;
    std::vector<int> trial = block_of_edges(layout, edges, b, b, &count);
    if (largest_block(trial, count) <= r) {
      bi = bj = b;
      blocks = nonempty_blocks(trial, count);
      owner = std::move(trial);
      break;
    }
  }
  // Square blocks waste up to half of r when b is small; rectangles, or blocks
  // of vertex columns owning their outgoing edges, then keep the group count
  // within the default c_div bound.
  const PartitionLimits defaults;
  if (blocks > defaults.c_div * layout.num_vertices() / r) {
    for (int scheme = 0; scheme < 2; ++scheme) {
      for (int ti = 1; ti <= (scheme == 0 ? cells_i : layout.rows); ++ti) {
        for (int tj = 1; tj <= (scheme == 0 ? cells_j : layout.cols); ++tj) {
          int count = 0;
          std::vector<int> trial = scheme == 0 ? block_of_edges(layout, edges, ti, tj, &count)
                                               : block_of_tails(layout, edges, ti, tj, &count);
          if (largest_block(trial, count) > r) break;
          const int used = nonempty_blocks(trial, count);
          const bool better = used < blocks || (used == blocks && std::abs(ti - tj) < std::abs(bi - bj));
          if (better) {
            blocks = used;
            bi = ti;
            bj = tj;
            owner = std::move(trial);
          }
        }
      }
    }
  }
  if (owner.empty()) {
    throw InvalidInput("r = " + std::to_string(r) + " is smaller than a single grid cell's edge count");
  }
  blocks = 1 + *std::max_element(owner.begin(), owner.end());
  std::vector<std::vector<EdgeId>> by_block(static_cast<size_t>(blocks));
  for (size_t e = 0; e < edges.size(); ++e) by_block[static_cast<size_t>(owner[e])].push_back(static_cast<EdgeId>(e));
  Partition p;
  p.r = r;
  for (auto& group : by_block) {
    if (!group.empty()) p.groups.push_back(std::move(group));
  }
  const WeightedGraph g = make_grid(layout);
  p.boundary = compute_boundaries(g, p.groups, terminals);
  return p;
}

int SeparatorTree::depth() const {
  std::vector<int> level(nodes.size(), 0);
  int best = 0;
  for (size_t v = 0; v < nodes.size(); ++v) {
    if (nodes[v].parent >= 0) level[v] = level[static_cast<size_t>(nodes[v].parent)] + 1;
    best = std::max(best, level[v]);
  }
  return best;
}

namespace {

bool connected_on(const WeightedGraph& g, const std::vector<EdgeId>& edges, const std::vector<Vertex>& vertices) {
  if (vertices.empty()) return true;
  std::map<Vertex, std::vector<Vertex>> adj;
  for (Vertex v : vertices) adj[v];
  for (EdgeId e : edges) {
    adj[g.edge(e).tail].push_back(g.edge(e).head);
    adj[g.edge(e).head].push_back(g.edge(e).tail);
  }
  std::map<Vertex, bool> seen;
  std::queue<Vertex> queue;
  queue.push(vertices.front());
  seen[vertices.front()] = true;
  size_t reached = 1;
  while (!queue.empty()) {
    const Vertex v = queue.front();
    queue.pop();
    for (Vertex u : adj[v]) {
      if (!seen[u]) {
        seen[u] = true;
        ++reached;
        queue.push(u);
      }
    }
  }
  return reached == vertices.size();
}

}  // namespace

SeparatorTree separator_tree_for_grid_block(const GridLayout& layout, const WeightedGraph& g,
                                            const std::vector<EdgeId>& group, int leaf_size) {
  if (leaf_size < 2) throw InvalidInput("leaf size must be at least 2");
  const std::vector<Vertex> all = group_vertices(g, group);
  if (all.empty()) throw InvalidInput("block has no edges");
  if (!connected_on(g, group, all)) throw InvalidInput("block subgraph is disconnected");
  SeparatorTree tree;
  tree.leaf_size = leaf_size;

  std::function<int(std::vector<Vertex>, int)> build = [&](std::vector<Vertex> verts, int parent) -> int {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes.back().id = id;
    tree.nodes.back().parent = parent;
    int lo_i = std::numeric_limits<int>::max(), hi_i = -1;
    int lo_j = std::numeric_limits<int>::max(), hi_j = -1;
    for (Vertex v : verts) {
      lo_i = std::min(lo_i, layout.row_of(v));
      hi_i = std::max(hi_i, layout.row_of(v));
      lo_j = std::min(lo_j, layout.col_of(v));
      hi_j = std::max(hi_j, layout.col_of(v));
    }
    const int ext_i = hi_i - lo_i;
    const int ext_j = hi_j - lo_j;
    if (static_cast<int>(verts.size()) <= leaf_size || std::max(ext_i, ext_j) < 2) {
      tree.nodes[static_cast<size_t>(id)].vertices = std::move(verts);
      return id;
    }
    const bool by_col = ext_j >= ext_i;
    const int mid = by_col ? lo_j + ext_j / 2 : lo_i + ext_i / 2;
    std::vector<Vertex> sep, left, right;
    for (Vertex v : verts) {
      const int c = by_col ? layout.col_of(v) : layout.row_of(v);
      if (c == mid) sep.push_back(v);
      if (c <= mid) left.push_back(v);
      if (c >= mid) right.push_back(v);
    }
    const double ratio = static_cast<double>(sep.size()) / std::sqrt(static_cast<double>(verts.size()));
    tree.c0 = std::max(tree.c0, ratio);
    tree.nodes[static_cast<size_t>(id)].separator = std::move(sep);
    tree.nodes[static_cast<size_t>(id)].vertices = std::move(verts);
    const int c0 = build(std::move(left), id);
    const int c1 = build(std::move(right), id);
    tree.nodes[static_cast<size_t>(id)].children[0] = c0;
    tree.nodes[static_cast<size_t>(id)].children[1] = c1;
    return id;
  };
  build(all, -1);
  return tree;
}

void validate(const SeparatorTree& tree, const WeightedGraph& g, const std::vector<EdgeId>& group) {
  if (tree.nodes.empty()) throw ValidationError("tree-shape", -1, "tree has no nodes");
  const auto& nodes = tree.nodes;
  std::vector<int> child_count(nodes.size(), 0);
  for (size_t v = 0; v < nodes.size(); ++v) {
    const SeparatorNode& node = nodes[v];
    const int id = static_cast<int>(v);
    if (node.id != id) throw ValidationError("tree-shape", id, "node ids must be consecutive in pre-order");
    if ((v == 0) != (node.parent < 0) || node.parent >= id) {
      throw ValidationError("tree-shape", id, "node " + std::to_string(id) + " has an invalid parent");
    }
    if (node.parent >= 0) ++child_count[static_cast<size_t>(node.parent)];
    if (!std::is_sorted(node.vertices.begin(), node.vertices.end()) ||
        std::adjacent_find(node.vertices.begin(), node.vertices.end()) != node.vertices.end()) {
      throw ValidationError("tree-shape", id, "vertex list of node " + std::to_string(id) + " must be sorted and unique");
    }
  }
  if (nodes.front().vertices != group_vertices(g, group)) {
    throw ValidationError("root-coverage", 0, "root vertex set differs from the group's vertex set");
  }
  std::vector<char> in_group_edge(static_cast<size_t>(g.num_edges()), 0);
  for (EdgeId e : group) in_group_edge[static_cast<size_t>(e)] = 1;

  for (size_t v = 0; v < nodes.size(); ++v) {
    const SeparatorNode& node = nodes[v];
    const int id = static_cast<int>(v);
    const size_t size = node.vertices.size();
    if (child_count[v] == 0) {
      if (node.children[0] >= 0 || node.children[1] >= 0) throw ValidationError("tree-shape", id, "leaf lists children");
      if (static_cast<int>(size) > tree.leaf_size) {
        throw ValidationError("leaf-size", id, "leaf " + std::to_string(id) + " has " + std::to_string(size) +
                                                   " vertices, more than " + std::to_string(tree.leaf_size));
      }
      continue;
    }
    if (child_count[v] != 2 || node.children[0] < 0 || node.children[1] < 0 ||
        nodes[static_cast<size_t>(node.children[0])].parent != id ||
        nodes[static_cast<size_t>(node.children[1])].parent != id) {
      throw ValidationError("tree-shape", id, "internal node " + std::to_string(id) + " must have two children");
    }
    std::vector<Vertex> sep = node.separator;
    std::sort(sep.begin(), sep.end());
    if (!std::includes(node.vertices.begin(), node.vertices.end(), sep.begin(), sep.end())) {
      throw ValidationError("separator-subset", id, "separator of node " + std::to_string(id) + " leaves the node");
    }
    std::vector<Vertex> rest;
    std::set_difference(node.vertices.begin(), node.vertices.end(), sep.begin(), sep.end(), std::back_inserter(rest));
    std::vector<Vertex> side[2];
    for (int c = 0; c < 2; ++c) {
      const auto& cv = nodes[static_cast<size_t>(node.children[c])].vertices;
      if (!std::includes(cv.begin(), cv.end(), sep.begin(), sep.end())) {
        throw ValidationError("child-coverage", id, "child of node " + std::to_string(id) + " omits the separator");
      }
      std::set_difference(cv.begin(), cv.end(), sep.begin(), sep.end(), std::back_inserter(side[c]));
    }
    std::vector<Vertex> joined, overlap;
    std::set_union(side[0].begin(), side[0].end(), side[1].begin(), side[1].end(), std::back_inserter(joined));
    std::set_intersection(side[0].begin(), side[0].end(), side[1].begin(), side[1].end(), std::back_inserter(overlap));
    if (joined != rest || !overlap.empty()) {
      throw ValidationError("child-coverage", id, "children of node " + std::to_string(id) +
                                                      " do not split the non-separator vertices");
    }
    for (int c = 0; c < 2; ++c) {
      if (static_cast<double>(side[c].size()) > tree.alpha * static_cast<double>(size)) {
        throw ValidationError("balance", id, "side " + std::to_string(c) + " of node " + std::to_string(id) +
                                                 " exceeds alpha * |node|");
      }
    }
    if (static_cast<double>(sep.size()) > tree.c0 * std::sqrt(static_cast<double>(size)) + 1e-9) {
      throw ValidationError("separator-size", id, "separator of node " + std::to_string(id) + " exceeds c0 * sqrt(n)");
    }
    // Literal separation: search from side 0 avoiding the separator.
    std::map<Vertex, int> label;
    for (Vertex x : side[0]) label[x] = 0;
    for (Vertex x : side[1]) label[x] = 1;
    for (Vertex x : sep) label[x] = 2;
    std::map<Vertex, char> seen;
    std::queue<Vertex> queue;
    for (Vertex x : side[0]) {
      seen[x] = 1;
      queue.push(x);
    }
    while (!queue.empty()) {
      const Vertex x = queue.front();
      queue.pop();
      for (EdgeId e : g.incident(x)) {
        if (!in_group_edge[static_cast<size_t>(e)]) continue;
        const Vertex y = g.other_end(e, x);
        auto it = label.find(y);
        if (it == label.end() || it->second == 2 || seen[y]) continue;
        if (it->second == 1) {
          throw ValidationError("separation", id, "separator of node " + std::to_string(id) + " does not separate " +
                                                      std::to_string(side[0].front()) + " from " + std::to_string(y));
        }
        seen[y] = 1;
        queue.push(y);
      }
    }
  }
}

void write_partition(std::ostream& out, const Partition& p) {
  out << "k " << p.num_groups() << " r " << p.r << '\n';
  for (int i = 0; i < p.num_groups(); ++i) {
    out << "g " << i;
    for (EdgeId e : p.groups[static_cast<size_t>(i)]) out << ' ' << e;
    out << "\nb " << i;
    for (Vertex v : p.boundary[static_cast<size_t>(i)]) out << ' ' << v;
    out << '\n';
  }
}

Partition read_partition(std::istream& in, const std::string& source) {
  Partition p;
  int k = -1;
  std::vector<char> have_group, have_boundary;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag == "c" || tag[0] == '#') continue;
    if (tag == "k") {
      std::string rtag;
      if (k >= 0) throw ParseError(source, lineno, "duplicate header");
      if (!(ls >> k >> rtag >> p.r) || rtag != "r" || k < 0) throw ParseError(source, lineno, "expected `k <num> r <r>`");
      p.groups.assign(static_cast<size_t>(k), {});
      p.boundary.assign(static_cast<size_t>(k), {});
      have_group.assign(static_cast<size_t>(k), 0);
      have_boundary.assign(static_cast<size_t>(k), 0);
    } else if (tag == "g" || tag == "b") {
      if (k < 0) throw ParseError(source, lineno, "record before header");
      long gid = -1;
      if (!(ls >> gid) || gid < 0 || gid >= k) throw ParseError(source, lineno, "group id out of range");
      auto& seen = tag == "g" ? have_group : have_boundary;
      if (seen[static_cast<size_t>(gid)]) throw ParseError(source, lineno, "duplicate record for group " + std::to_string(gid));
      seen[static_cast<size_t>(gid)] = 1;
      std::vector<int> ids;
      long x = 0;
      while (ls >> x) {
        if (x < 0 || x > std::numeric_limits<int>::max()) throw ParseError(source, lineno, "id out of range");
        ids.push_back(static_cast<int>(x));
      }
      if (!ls.eof()) throw ParseError(source, lineno, "malformed id");
      if (tag == "g") {
        p.groups[static_cast<size_t>(gid)] = std::move(ids);
      } else {
        std::sort(ids.begin(), ids.end());
        p.boundary[static_cast<size_t>(gid)] = std::move(ids);
      }
    } else {
      throw ParseError(source, lineno, "unknown record type `" + tag + "`");
    }
  }
  if (k < 0) throw ParseError(source, lineno, "missing header");
  for (int i = 0; i < k; ++i) {
    if (!have_group[static_cast<size_t>(i)]) throw ParseError(source, lineno, "group " + std::to_string(i) + " has no edge record");
  }
  return p;
}

Partition load_partition(const std::string& path, const WeightedGraph& g, const std::vector<Vertex>& terminals,
                         const PartitionLimits& limits) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  Partition p = read_partition(in, path);
  validate(p, g, terminals, limits);
  return p;
}

namespace {

void write_tree_body(std::ostream& out, const SeparatorTree& tree) {
  for (const SeparatorNode& node : tree.nodes) {
    out << "node " << node.id << ' ' << node.parent << " sep";
    for (Vertex v : node.separator) out << ' ' << v;
    out << " verts";
    for (Vertex v : node.vertices) out << ' ' << v;
    out << '\n';
  }
  out << "end\n";
}

void write_tree_header(std::ostream& out, int gid, const SeparatorTree& tree) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "septree " << gid << " leaf " << tree.leaf_size << " alpha " << tree.alpha << " c0 " << tree.c0
      << " sepedge half\n";
}

// Reads the node records following a header; stops after `end`.
void read_tree_body(std::istream& in, SeparatorTree& tree, const std::string& source, int& lineno) {
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag == "c") continue;
    if (tag == "end") break;
    if (tag != "node") throw ParseError(source, lineno, "expected a node record");
    SeparatorNode node;
    std::string word;
    if (!(ls >> node.id >> node.parent >> word) || word != "sep") {
      throw ParseError(source, lineno, "expected `node <id> <parent> sep ... verts ...`");
    }
    bool in_verts = false;
    while (ls >> word) {
      if (word == "verts") {
        if (in_verts) throw ParseError(source, lineno, "duplicate verts list");
        in_verts = true;
        continue;
      }
      char* end = nullptr;
      const long v = std::strtol(word.c_str(), &end, 10);
      if (*end != '\0' || v < 0) throw ParseError(source, lineno, "malformed vertex id `" + word + "`");
      (in_verts ? node.vertices : node.separator).push_back(static_cast<Vertex>(v));
    }
    if (!in_verts) throw ParseError(source, lineno, "missing verts list");
    if (node.id != static_cast<int>(tree.nodes.size())) throw ParseError(source, lineno, "node ids must be consecutive");
    if (node.parent >= node.id) throw ParseError(source, lineno, "parent must precede child");
    if (node.parent >= 0) {
      SeparatorNode& parent = tree.nodes[static_cast<size_t>(node.parent)];
      if (parent.children[0] < 0) {
        parent.children[0] = node.id;
      } else if (parent.children[1] < 0) {
        parent.children[1] = node.id;
      } else {
        throw ParseError(source, lineno, "node " + std::to_string(node.parent) + " has more than two children");
      }
    }
    tree.nodes.push_back(std::move(node));
  }
}

int parse_tree_header(const std::string& line, SeparatorTree& tree, const std::string& source, int lineno) {
  std::istringstream ls(line);
  std::string tag, leaf, alpha, c0, sepedge, mode;
  int gid = -1;
  if (!(ls >> tag >> gid >> leaf >> tree.leaf_size >> alpha >> tree.alpha >> c0 >> tree.c0 >> sepedge >> mode) ||
      tag != "septree" || leaf != "leaf" || alpha != "alpha" || c0 != "c0" || sepedge != "sepedge") {
    throw ParseError(source, lineno, "expected `septree <gid> leaf <C> alpha <a> c0 <c> sepedge half`");
  }
  if (mode != "half") throw ParseError(source, lineno, "only the `half` separator-edge convention is supported");
  return gid;
}

}  // namespace

void write_septree(std::ostream& out, const SeparatorTree& tree) {
  write_tree_header(out, 0, tree);
  write_tree_body(out, tree);
}

SeparatorTree read_septree(std::istream& in, const std::string& source) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag == "c") continue;
    SeparatorTree tree;
    parse_tree_header(line, tree, source, lineno);
    read_tree_body(in, tree, source, lineno);
    if (tree.nodes.empty()) throw ParseError(source, lineno, "tree has no nodes");
    return tree;
  }
  throw ParseError(source, lineno, "missing septree header");
}

SeparatorTree load_septree(const std::string& path, const WeightedGraph& g, const std::vector<EdgeId>& group) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  SeparatorTree tree = read_septree(in, path);
  validate(tree, g, group);
  return tree;
}

std::vector<std::optional<SeparatorTree>> read_septree_set(std::istream& in, int num_groups, const std::string& source) {
  std::vector<std::optional<SeparatorTree>> out(static_cast<size_t>(num_groups));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag == "c") continue;
    SeparatorTree tree;
    const int gid = parse_tree_header(line, tree, source, lineno);
    if (gid < 0 || gid >= num_groups) throw ParseError(source, lineno, "tree group id out of range");
    if (out[static_cast<size_t>(gid)]) throw ParseError(source, lineno, "duplicate tree for group " + std::to_string(gid));
    read_tree_body(in, tree, source, lineno);
    if (tree.nodes.empty()) throw ParseError(source, lineno, "tree has no nodes");
    out[static_cast<size_t>(gid)] = std::move(tree);
  }
  return out;
}

void write_septree_set(std::ostream& out, const std::vector<std::optional<SeparatorTree>>& trees) {
  for (size_t i = 0; i < trees.size(); ++i) {
    if (!trees[i]) continue;
    write_tree_header(out, static_cast<int>(i), *trees[i]);
    write_tree_body(out, *trees[i]);
  }
}

}  // namespace sepflow
