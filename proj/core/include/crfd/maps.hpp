#pragma once

// Tropical stable-map engine: combinatorial types, balancing-derived edge
// data, exact embedding solves, ev-matrices, multiplicities, brute-force
// counting and floor detection.

#include "crfd/crossratios.hpp"
#include "crfd/flows.hpp"
#include "crfd/linalg.hpp"
#include "crfd/model.hpp"
#include "crfd/typeenum.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace crfd {

enum class EnumMode { Degenerate, Lengths };

struct GenericityFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CombinatorialMap {
  TreeTopology tree;  // end labels are problem labels
  std::vector<IVec> edge_dir;  // direction at edges[e][0] pointing toward edges[e][1]
  std::vector<long long> edge_weight;
  std::vector<std::vector<int>> lambda_at;  // cross-ratio indices per vertex
};

// Balancing: each bounded edge direction is the sum of the end directions
// on its far side. Returns false when some bounded edge is contracted
// (zero direction), which is skipped as non-generic.
bool derive_edge_data(const Problem& p, CombinatorialMap& cm);

struct EmbeddedMap {
  CombinatorialMap cmap;
  int root = 0;
  RVec root_pos;
  std::vector<Rat> lengths;  // per bounded edge, positive
  std::map<int, int> ray_choice;  // line-condition label -> ray index 0..2

  RVec vertex_position(int v) const;
};

struct EvMatrix {
  IMat a;
  RVec rhs;
  std::vector<std::string> row_tag;
  std::vector<std::string> col_tag;
};

// Rows in label order of the condition-bearing ends (m rows per point,
// m-1 per projected point, 1 per line), then one row per non-degenerated
// cross-ratio in lengths mode. Columns: root coordinates, then bounded
// edge lengths in edge order. Line weights stay out of the matrix.
EvMatrix ev_matrix(const CombinatorialMap& cm, const Problem& p,
                   const PositionedConditions& pos, const std::map<int, int>& ray_choice,
                   EnumMode mode, int root_vertex);

// Exact solve of the square condition system for this type. nullopt when
// the system is singular or a strict validity check fails; GenericityFault
// when a length is exactly zero or a marked point hits a line vertex.
std::optional<EmbeddedMap> solve_embedding(const CombinatorialMap& cm, const Problem& p,
                                           const PositionedConditions& pos,
                                           const std::map<int, int>& ray_choice, EnumMode mode);

// Local star of a vertex: adjacent edge ids are bounded-edge indices and
// end indices offset past them; cross-ratio entries are mapped to exits.
LocalStar local_star(const CombinatorialMap& cm, const Problem& p, int v);

struct MapMult {
  Int ev_det = 0;      // signed determinant
  Int cr_factor = 1;   // product of vertex cross-ratio multiplicities
  Int line_factor = 1; // product of multi-line end weights
  Int total = 0;       // |ev_det| * cr_factor * line_factor
};

MapMult map_mult(const EmbeddedMap& em, const Problem& p, const PositionedConditions& pos,
                 EnumMode mode);

std::map<int, long long> induced_end_flows(const Problem& p);

// Condition flow the solution carries: spread of the induced end flows.
FlowGraph condition_flow_of(const CombinatorialMap& cm, const Problem& p);

struct Solution {
  std::uint64_t type_index = 0;
  std::uint64_t ray_index = 0;
  EmbeddedMap map;
  MapMult mult;
};

struct CountOptions {
  EnumMode mode = EnumMode::Degenerate;
  bool flow_pruning = true;  // degenerate mode only
  int max_ends = 10;
  std::uint64_t max_types = 0;  // 0 = uncapped
  bool keep_solutions = true;
  int workers = 1;
  int max_resamples = 32;
  std::optional<std::uint64_t> seed_override;
  std::optional<PositionedConditions> positions;  // pinned positions, no resampling
  std::map<size_t, Rat> synthetic_lengths;  // per cross-ratio index, lengths mode
};

struct CountResult {
  Int total = 0;
  std::vector<Solution> solutions;  // nonzero multiplicity only
  std::uint64_t types_enumerated = 0;
  std::uint64_t types_flow_pruned = 0;
  std::uint64_t embeddings_solved = 0;
  int resamples = 0;
  PositionedConditions positions;
};

CountResult direct_count(const Problem& p, const CountOptions& opts = {});

// Floor decomposition of a solution in R^3.
struct FloorDecomposition {
  int n_floors = 0;
  std::vector<int> floor_of_vertex;   // vertex -> floor, floors ordered by point label
  std::vector<int> floor_point_label; // per floor
  std::vector<long long> floor_size;  // #(1,1,1) ends per floor
  struct Elevator {
    int edge = 0;
    long long weight = 1;
    int lower_floor = 0, upper_floor = 0;
    long long flow_into_lower = 0, flow_into_upper = 0;
  };
  std::vector<Elevator> elevators;
};

struct FloorResult {
  std::optional<FloorDecomposition> decomposition;
  std::string reason;  // set when not floor decomposed
};

FloorResult detect_floors(const EmbeddedMap& em, const Problem& p);

}  // namespace crfd
