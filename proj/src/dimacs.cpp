#include "sepflow/dimacs.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace sepflow {

ParseError::ParseError(const std::string& source, int line, const std::string& what)
    : InvalidInput(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

FlowInstance read_dimacs(std::istream& in, const std::string& source) {
  int n = -1;
  long declared_m = -1;
  std::vector<Edge> edges;
  std::vector<double> capacity;
  Vertex s = -1;
  Vertex t = -1;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag == "c") continue;
    if (tag == "p") {
      std::string kind;
      if (!(ls >> kind >> n >> declared_m) || kind != "max" || n < 0 || declared_m < 0) {
        throw ParseError(source, lineno, "expected `p max <n> <m>`");
      }
      edges.reserve(static_cast<size_t>(declared_m));
      capacity.reserve(static_cast<size_t>(declared_m));
    } else if (tag == "n") {
      long id = 0;
      std::string role;
      if (n < 0) throw ParseError(source, lineno, "node line before problem line");
      if (!(ls >> id >> role) || id < 1 || id > n) {
        throw ParseError(source, lineno, "expected `n <id> s|t` with 1 <= id <= n");
      }
      if (role == "s") {
        s = static_cast<Vertex>(id - 1);
      } else if (role == "t") {
        t = static_cast<Vertex>(id - 1);
      } else {
        throw ParseError(source, lineno, "node role must be s or t");
      }
    } else if (tag == "a") {
      long u = 0;
      long v = 0;
      double cap = 0.0;
      if (n < 0) throw ParseError(source, lineno, "arc line before problem line");
      if (!(ls >> u >> v >> cap)) throw ParseError(source, lineno, "expected `a <tail> <head> <cap>`");
      if (u < 1 || v < 1 || u > n || v > n) throw ParseError(source, lineno, "arc endpoint out of range");
      if (u == v) throw ParseError(source, lineno, "self-loop arcs are not supported");
      if (!(cap > 0.0) || !std::isfinite(cap)) throw ParseError(source, lineno, "capacity must be positive");
      edges.push_back({static_cast<Vertex>(u - 1), static_cast<Vertex>(v - 1)});
      capacity.push_back(cap);
    } else {
      throw ParseError(source, lineno, "unknown record type `" + tag + "`");
    }
  }
  if (n < 0) throw ParseError(source, lineno, "missing problem line");
  if (static_cast<long>(edges.size()) != declared_m) {
    throw ParseError(source, lineno, "arc count " + std::to_string(edges.size()) +
                                         " does not match declared " + std::to_string(declared_m));
  }
  FlowInstance instance;
  instance.graph = WeightedGraph(n, std::move(edges), std::move(capacity));
  instance.source = s;
  instance.sink = t;
  return instance;
}

FlowInstance read_dimacs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  return read_dimacs(in, path);
}

std::vector<double> read_edge_weights(std::istream& in, int num_edges, const std::string& source) {
  std::vector<double> weights;
  weights.reserve(static_cast<size_t>(num_edges));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    double w = 0.0;
    while (ls >> w) {
      if (!(w > 0.0) || !std::isfinite(w)) throw ParseError(source, lineno, "weights must be positive");
      weights.push_back(w);
    }
    if (!ls.eof()) throw ParseError(source, lineno, "malformed weight");
  }
  if (static_cast<int>(weights.size()) != num_edges) {
    throw ParseError(source, lineno, "expected " + std::to_string(num_edges) + " weights, found " +
                                         std::to_string(weights.size()));
  }
  return weights;
}

std::vector<double> read_edge_weights_file(const std::string& path, int num_edges) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  return read_edge_weights(in, num_edges, path);
}

void write_dimacs(std::ostream& out, const FlowInstance& instance) {
  const WeightedGraph& g = instance.graph;
  out << "p max " << g.num_vertices() << ' ' << g.num_edges() << '\n';
  if (instance.source >= 0) out << "n " << instance.source + 1 << " s\n";
  if (instance.sink >= 0) out << "n " << instance.sink + 1 << " t\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    out << "a " << g.edge(e).tail + 1 << ' ' << g.edge(e).head + 1 << ' '
        << g.capacity()[static_cast<size_t>(e)] << '\n';
  }
}

}  // namespace sepflow
