#include "sepflow/exact_flow.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace sepflow {

namespace {

struct Arc {
  int to;
  double residual;
};

class Dinic {
 public:
  Dinic(const WeightedGraph& g, double slack) : g_(g), slack_(slack), head_(static_cast<size_t>(g.num_vertices()) + 1) {
    const int n = g.num_vertices();
    std::vector<int> degree(static_cast<size_t>(n), 0);
    for (const Edge& e : g.edges()) {
      ++degree[static_cast<size_t>(e.tail)];
      ++degree[static_cast<size_t>(e.head)];
    }
    for (int v = 0; v < n; ++v) head_[static_cast<size_t>(v) + 1] = head_[static_cast<size_t>(v)] + degree[static_cast<size_t>(v)];
    arcs_.resize(static_cast<size_t>(head_.back()));
    position_.resize(2 * static_cast<size_t>(g.num_edges()));
    partner_.resize(arcs_.size());
    std::vector<int> fill(head_.begin(), head_.end() - 1);
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
      const Edge& edge = g.edge(e);
      const double cap = g.capacity()[static_cast<size_t>(e)];
      const int a = fill[static_cast<size_t>(edge.tail)]++;
      const int b = fill[static_cast<size_t>(edge.head)]++;
      arcs_[static_cast<size_t>(a)] = {edge.head, cap};
      arcs_[static_cast<size_t>(b)] = {edge.tail, cap};
      position_[2 * static_cast<size_t>(e)] = a;
      position_[2 * static_cast<size_t>(e) + 1] = b;
      partner_[static_cast<size_t>(a)] = b;
      partner_[static_cast<size_t>(b)] = a;
    }
  }

  double run(Vertex s, Vertex t) {
    double total = 0.0;
    while (bfs(s, t)) {
      cursor_.assign(head_.begin(), head_.end() - 1);
      for (;;) {
        const double pushed = dfs(s, t, std::numeric_limits<double>::infinity());
        if (pushed <= slack_) break;
        total += pushed;
      }
    }
    return total;
  }

  std::vector<double> flow() const {
    std::vector<double> out(static_cast<size_t>(g_.num_edges()));
    for (EdgeId e = 0; e < g_.num_edges(); ++e) {
      const double cap = g_.capacity()[static_cast<size_t>(e)];
      const double forward = arcs_[static_cast<size_t>(position_[2 * static_cast<size_t>(e)])].residual;
      out[static_cast<size_t>(e)] = cap - forward;
    }
    return out;
  }

  std::vector<Vertex> reachable(Vertex s) const {
    std::vector<char> seen(static_cast<size_t>(g_.num_vertices()), 0);
    std::vector<Vertex> out{s};
    seen[static_cast<size_t>(s)] = 1;
    for (size_t i = 0; i < out.size(); ++i) {
      const Vertex v = out[i];
      for (int a = head_[static_cast<size_t>(v)]; a < head_[static_cast<size_t>(v) + 1]; ++a) {
        const Arc& arc = arcs_[static_cast<size_t>(a)];
        if (arc.residual > slack_ && !seen[static_cast<size_t>(arc.to)]) {
          seen[static_cast<size_t>(arc.to)] = 1;
          out.push_back(arc.to);
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  bool bfs(Vertex s, Vertex t) {
    level_.assign(static_cast<size_t>(g_.num_vertices()), -1);
    std::queue<Vertex> queue;
    level_[static_cast<size_t>(s)] = 0;
    queue.push(s);
    while (!queue.empty()) {
      const Vertex v = queue.front();
      queue.pop();
      for (int a = head_[static_cast<size_t>(v)]; a < head_[static_cast<size_t>(v) + 1]; ++a) {
        const Arc& arc = arcs_[static_cast<size_t>(a)];
        if (arc.residual > slack_ && level_[static_cast<size_t>(arc.to)] < 0) {
          level_[static_cast<size_t>(arc.to)] = level_[static_cast<size_t>(v)] + 1;
          queue.push(arc.to);
        }
      }
    }
    return level_[static_cast<size_t>(t)] >= 0;
  }

  double dfs(Vertex v, Vertex t, double limit) {
    if (v == t) return limit;
    for (int& a = cursor_[static_cast<size_t>(v)]; a < head_[static_cast<size_t>(v) + 1]; ++a) {
      Arc& arc = arcs_[static_cast<size_t>(a)];
      if (arc.residual <= slack_ || level_[static_cast<size_t>(arc.to)] != level_[static_cast<size_t>(v)] + 1) continue;
      const double pushed = dfs(arc.to, t, std::min(limit, arc.residual));
      if (pushed > slack_) {
        arc.residual -= pushed;
        arcs_[static_cast<size_t>(partner_[static_cast<size_t>(a)])].residual += pushed;
        return pushed;
      }
    }
    return 0.0;
  }

  const WeightedGraph& g_;
  double slack_;
  std::vector<int> head_;
  std::vector<Arc> arcs_;
  std::vector<int> partner_;
  std::vector<int> position_;
  std::vector<int> level_;
  std::vector<int> cursor_;
};

}  // namespace

double cut_capacity(const WeightedGraph& g, const std::vector<Vertex>& side) {
  std::vector<char> in(static_cast<size_t>(g.num_vertices()), 0);
  for (Vertex v : side) in[static_cast<size_t>(v)] = 1;
  double total = 0.0;
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const Edge& edge = g.edge(e);
    if (in[static_cast<size_t>(edge.tail)] != in[static_cast<size_t>(edge.head)]) total += g.capacity()[static_cast<size_t>(e)];
  }
  return total;
}

ExactMaxFlow exact_max_flow(const WeightedGraph& g, Vertex s, Vertex t) {
  if (s < 0 || t < 0 || s >= g.num_vertices() || t >= g.num_vertices() || s == t) {
    throw InvalidInput("max flow needs two distinct terminals");
  }
  double max_cap = 0.0;
  for (double c : g.capacity()) max_cap = std::max(max_cap, c);
  Dinic dinic(g, 1e-12 * max_cap);
  ExactMaxFlow out;
  out.value = dinic.run(s, t);
  out.flow = dinic.flow();
  out.source_side = dinic.reachable(s);
  out.cut_capacity = cut_capacity(g, out.source_side);
  return out;
}

}  // namespace sepflow
