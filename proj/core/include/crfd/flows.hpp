#pragma once

// Leaky-tree flow calculus: spreading induced flows to a fixed point,
// validating condition flows of type m, and solving closed-form flows on
// end-less trees from a leak function.

#include "crfd/tree.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace crfd {

struct FlowGraph {
  TreeTopology tree;
  std::vector<long long> leak;       // per vertex
  std::vector<long long> half_flow;  // 2 per edge; index 2e+s is the half
                                     // adjacent to tree.edges[e][s]
  std::vector<long long> end_flow;   // per end

  long long half(int e, int side) const { return half_flow[static_cast<size_t>(2 * e + side)]; }
  // incoming flow: far halves of incident edges plus ends at v
  long long flow_at(int v) const;
};

struct ConditionFlowCertificate {
  int m = 0;
  struct EdgeViolation {
    int edge;
    long long sum;  // != m-1
  };
  struct VertexViolation {
    int vertex;
    long long flow, leak;
  };
  std::vector<EdgeViolation> edge_violations;
  std::vector<VertexViolation> vertex_violations;
  // vertices with flow zero that had to spread zero onto an edge (the case
  // the update rule leaves open)
  std::vector<int> zero_flow_vertices;

  bool valid() const { return edge_violations.empty() && vertex_violations.empty(); }
};

// Fixed point of the spread rule, processing-order independent. End flows
// are given; leak is filled with the resulting vertex flows. The optional
// vertex order only changes the sweep schedule, never the fixed point.
FlowGraph spread_flows(const TreeTopology& tree, const std::map<int, long long>& end_flows);
FlowGraph spread_flows(const TreeTopology& tree, const std::map<int, long long>& end_flows,
                       const std::vector<int>& vertex_order);

ConditionFlowCertificate validate_condition_flow(const FlowGraph& fg, int m);

// Unique condition flow of type m on an end-less tree with the given leak,
// via subtree sums. Requires sum(leak) = (m-1) * #edges; the error string
// names the first failing edge otherwise.
struct FlowOrInvalid {
  std::optional<FlowGraph> flow;
  std::string error;
};
FlowOrInvalid tree_flows_from_leak(const TreeTopology& tree, const std::vector<long long>& leak,
                                   int m);

}  // namespace crfd
