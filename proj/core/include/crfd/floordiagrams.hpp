#pragma once

// Cross-ratio floor diagrams: representation, validity, enumeration,
// vertex local problems, the 2D reduction, multiplicity providers, and the
// headline diagram count.

#include "crfd/maps.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace crfd {

struct DiagramEdge {
  int u = 0, v = 0;  // vertex indices, u < v in the point order
  long long weight = 1;
  int label = 0;  // fresh end label used when cutting at this edge
  long long flow_into_u = 0, flow_into_v = 0;  // condition-flow halves
};

struct DiagramVertex {
  // degree end labels by direction class
  std::vector<int> e0_ends, e1_ends, e2_ends;  // (1,1,1), (-1,0,0), (0,-1,0)
  std::vector<int> alpha_ends, beta_ends;      // vertical down / up
  std::vector<int> lambda;                     // cross-ratio indices
  long long leak = 0;
  bool leak_overridden = false;  // size-zero floor whose A(v) was nonzero

  long long size() const { return static_cast<long long>(e0_ends.size()); }
};

struct CrossRatioFloorDiagram {
  std::vector<DiagramVertex> vertices;
  std::vector<DiagramEdge> edges;  // canonical order: sorted by (u, v)

  TreeTopology skeleton() const;  // vertices + edges, no ends
};

bool diagram_equal(const CrossRatioFloorDiagram& a, const CrossRatioFloorDiagram& b);
std::string diagram_key(const CrossRatioFloorDiagram& d);

// Unique edge weights from leaf-stripping the z-balance, or empty when some
// weight comes out nonpositive. b[i] is the vertex's own z-flux:
// #delta^{(1,1,1)} + sum beta weights - sum alpha weights.
std::optional<std::vector<long long>> solve_edge_weights(
    int n_vertices, const std::vector<std::pair<int, int>>& edges,
    const std::vector<long long>& b);

// A(v) of the leak definition; leak is 0 for size-zero floors.
struct LeakReport {
  long long a_value = 0;
  long long leak = 0;
  bool overridden = false;
  bool valid = true;  // false when A(v) < 0
};
LeakReport diagram_leak(const Problem& p, const DiagramVertex& v, int valence);

struct DiagramBudget {
  std::uint64_t max_assignments = 10'000'000;
};

std::vector<CrossRatioFloorDiagram> enumerate_diagrams(const Problem& p,
                                                       const DiagramBudget& budget = {});

// Validity of an externally built diagram against the problem.
struct DiagramCheck {
  bool valid = true;
  std::string reason;
};
DiagramCheck validate_diagram(const Problem& p, const CrossRatioFloorDiagram& d);

// Floor decomposed solution -> cross-ratio floor diagram.
CrossRatioFloorDiagram degenerate(const EmbeddedMap& em, const Problem& p);

struct LocalVertexProblem {
  Problem problem;
  int vertex = 0;
  std::vector<int> edge_end_labels;  // labels of the cut-edge ends
};

LocalVertexProblem vertex_local_problem(const CrossRatioFloorDiagram& d, const Problem& p,
                                        int vertex);

// 2D reduction of a local problem; error names the obstruction.
struct PlaneReduction {
  std::optional<Problem> problem;
  std::string unsupported;  // set when reduction does not apply
};
PlaneReduction reduce_to_plane(const LocalVertexProblem& local);

// Canonical one-line serialization of a problem; lookup key in tables.
std::string canonical_problem_key(const Problem& p);

struct VertexMult {
  Int value = 0;
  std::string provenance;  // table | brute3d | plane2d
};

struct MultProvider {
  std::map<std::string, Int> table;
  bool use_table = true;
  bool use_brute3d = true;
  bool use_plane2d = true;
  int brute_max_ends = 10;
  std::uint64_t max_types = 0;
  int workers = 1;

  // resolution order: table, brute-force 3D, plane 2D
  std::optional<VertexMult> resolve(const Problem& local) const;
  mutable std::map<std::string, VertexMult> cache;
};

struct DiagramMult {
  Int edge_factor = 1;  // product of edge weights
  std::vector<VertexMult> vertex_mults;
  Int total = 0;
  bool resolved = true;
  std::vector<int> unresolved_vertices;
};

DiagramMult diagram_mult(const CrossRatioFloorDiagram& d, const Problem& p,
                         const MultProvider& provider);

struct FloorCount {
  Int total = 0;
  std::vector<CrossRatioFloorDiagram> diagrams;
  std::vector<DiagramMult> mults;
  bool resolved = true;
};

FloorCount floor_count(const Problem& p, const MultProvider& provider,
                       const DiagramBudget& budget = {});

}  // namespace crfd
