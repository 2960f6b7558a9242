#pragma once

#include <iosfwd>
#include <string>

#include "sepflow/graph.hpp"

namespace sepflow {

/// Parse error carrying the 1-based line number of the offending record.
class ParseError : public InvalidInput {
 public:
  ParseError(const std::string& source, int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

struct FlowInstance {
  WeightedGraph graph;
  Vertex source = -1;
  Vertex sink = -1;
};

/// Reads the max-flow DIMACS dialect: `p max n m`, `n id s|t`, `a u v cap`.
/// Vertex ids in the file are 1-based; arcs are taken as undirected edges in
/// file order, which fixes the edge ids.
FlowInstance read_dimacs(std::istream& in, const std::string& source = "<stream>");
FlowInstance read_dimacs_file(const std::string& path);

/// Optional sidecar: one positive real per edge, whitespace separated.
std::vector<double> read_edge_weights(std::istream& in, int num_edges,
                                      const std::string& source = "<stream>");
std::vector<double> read_edge_weights_file(const std::string& path, int num_edges);

void write_dimacs(std::ostream& out, const FlowInstance& instance);

}  // namespace sepflow
