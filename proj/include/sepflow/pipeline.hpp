#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "sepflow/graph.hpp"
#include "sepflow/grouped_flow.hpp"
#include "sepflow/partition.hpp"
#include "sepflow/schur.hpp"

namespace sepflow {

struct OracleWeights {
  std::vector<double> edge;
  std::vector<double> group_total;

  /// All ones.
  static OracleWeights uniform(const Partition& p, int num_edges);
  void recompute_totals(const Partition& p);
  double total() const;
};

/// w(e) = (1 - eps/2) / u(e)^2 * (w_o(e) / w_o(S_i) + eps / (4 |S_i|)).
std::vector<double> oracle_edge_weights(const OracleWeights& w_oracle, std::span<const double> capacity,
                                        const Partition& p, double eps);

/// Edge groups with position-matched boundary lists, in one vertex numbering.
struct GroupedNetwork {
  int num_vertices = 0;
  std::vector<Edge> edges;
  /// Congestion weight per edge; the conductance used for routing is 1/weight.
  std::vector<double> weight;
  std::vector<std::vector<EdgeId>> groups;
  std::vector<std::vector<Vertex>> boundary;
};

/// The graph's own groups and weights.
GroupedNetwork network_of(const WeightedGraph& g, const Partition& p);

/// Re-routes each group's boundary residual of `flow` inside the matching
/// group of `dst` by an electrical flow with accuracy eps.
std::vector<double> convert_flow(const GroupedNetwork& src, const GroupedNetwork& dst, std::span<const double> flow,
                                 double eps);

enum class SparsifierKind { kExact, kOneStep, kRecursive };

struct InstanceOptions {
  SparsifierKind kind = SparsifierKind::kOneStep;
  VertexSparsifyOptions sparsify;
  /// Per-group trees, required for kRecursive.
  const std::vector<std::optional<SeparatorTree>>* trees = nullptr;
};

/// Per-group sparsifiers memoised by (group, weights); seeds derive from the
/// key, so results do not depend on cache state.
class SparsifierCache {
 public:
  explicit SparsifierCache(std::size_t capacity = 4096) : capacity_(capacity) {}
  const VertexSparsifier* find(std::uint64_t key) const;
  void insert(std::uint64_t key, VertexSparsifier s);
  std::size_t size() const { return entries_.size(); }
  long hits = 0;

 private:
  std::size_t capacity_;
  std::map<std::uint64_t, VertexSparsifier> entries_;
};

/// Original graph (weights = group congestion weights) with its quotient over
/// all boundary vertices.
struct SparsifiedInstance {
  const WeightedGraph* graph = nullptr;
  const Partition* partition = nullptr;
  std::vector<VertexSparsifier> sparsifiers;
  GroupedNetwork original;
  GroupedNetwork quotient;
  std::vector<Vertex> quotient_to_original;
  /// -1 for interior vertices.
  std::vector<int> original_to_quotient;
  double eps = 0.0;
};

SparsifiedInstance build_sparsified_instance(const WeightedGraph& g, const Partition& p, double eps,
                                             std::uint64_t seed, const InstanceOptions& options = {},
                                             SparsifierCache* cache = nullptr);

struct ApproxGroupedFlowResult {
  GroupedFlowStatus status = GroupedFlowStatus::kUnconverged;
  /// On the original graph.
  std::vector<double> flow;
  std::vector<double> group_congestion;
  double max_group_congestion = 0.0;
  /// Grouped flow on the quotient; group i there is the i-th nonempty quotient group.
  GroupedFlowResult quotient;
  std::vector<int> quotient_groups;
};

/// Grouped flow on the quotient at eps/2, converted back at eps/10. The demand
/// lives on the original vertices and must vanish off the boundary.
ApproxGroupedFlowResult approx_grouped_flow(const SparsifiedInstance& instance, const DemandVector& d, double eps,
                                            const GroupedFlowOptions& options = {});

struct CutCertificate {
  std::vector<double> potentials;
  /// sum_e u(e) |phi_u - phi_v|
  double cut_norm = 0.0;
  /// d^T phi
  double demand_value = 0.0;
  bool has_cut = false;
  std::vector<Vertex> source_side;
  double cut_capacity = 0.0;
};

/// Quotient potentials of a failing run, extended harmonically into every
/// group interior and normalised to unit cut norm, then swept for the best
/// threshold cut separating the terminals.
CutCertificate cut_certificate(const SparsifiedInstance& instance, const ApproxGroupedFlowResult& fail,
                               const DemandVector& d, Vertex s, Vertex t);

struct MaxFlowOptions {
  double eps = 0.1;
  /// Outer width rho = ceil(c_w sqrt(r / eps)).
  double c_w = 10.0;
  /// Outer iterations per probe; 0 means ceil(20 rho ln(m) / eps^2).
  long outer_iterations = 0;
  /// Inner grouped-flow iterations; 0 means the full budget.
  long inner_iterations = 0;
  /// Paper-faithful inner loop: unit starting weights, no early exit.
  bool strict = false;
  std::uint64_t seed = 1;
  InstanceOptions instance;
  /// CSV rows probe,t,value,max_congestion,average_max_congestion.
  std::ostream* trace = nullptr;
};

struct ProbeResult {
  double demand = 0.0;
  GroupedFlowStatus status = GroupedFlowStatus::kUnconverged;
  /// Best feasible flow seen during the probe and its value.
  std::vector<double> flow;
  double value = 0.0;
  double average_max_congestion = 0.0;
  long outer_iterations = 0;
  long inner_iterations = 0;
  long width_violations = 0;
  long contract_misses = 0;
  double weight_spread = 0.0;
  std::optional<CutCertificate> cut;
};

struct MaxFlowResult {
  double flow_value = 0.0;
  /// Feasible: every |f(e)| <= u(e).
  std::vector<double> flow;
  double max_edge_congestion = 0.0;
  /// Largest root-mean-square edge congestion over the groups.
  double per_group_congestion_max = 0.0;
  double rho_outer = 0.0;
  long iterations_outer = 0;
  long iterations_inner_total = 0;
  long probes = 0;
  long width_violations = 0;
  long contract_misses = 0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double weight_spread = 0.0;
  long cache_hits = 0;
};

/// Outer multiplicative-weights phase at a fixed demand value.
ProbeResult probe_flow(const WeightedGraph& g, const Partition& p, Vertex s, Vertex t, double demand,
                       const MaxFlowOptions& options, SparsifierCache* cache = nullptr);

MaxFlowResult approx_max_flow(const WeightedGraph& g, const Partition& p, Vertex s, Vertex t,
                              const MaxFlowOptions& options = {});

/// ceil(c_w sqrt(r / eps)).
double outer_width(int r, double eps, double c_w);

/// Root-mean-square edge congestion per group.
std::vector<double> group_rms_congestion(const WeightedGraph& g, const Partition& p, std::span<const double> flow);

}  // namespace sepflow
