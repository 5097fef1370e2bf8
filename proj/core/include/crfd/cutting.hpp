#pragma once

// Elevator cutting, degenerated-line replacement, the multiplicity
// splitting identities, signed graphical contributions, and the
// moving-family direction tracer.

#include "crfd/floordiagrams.hpp"

#include <array>
#include <string>
#include <vector>

namespace crfd {

struct CutPiece {
  Problem problem;
  PositionedConditions positions;  // pinned
  EmbeddedMap map;
  int cut_end_label = 0;
};

struct CutResult {
  std::array<CutPiece, 2> piece;  // [0] holds the earlier point (lower)
  long long weight = 1;
  std::array<long long, 2> flow_into{};  // incoming flow at each piece's attachment
  bool is_11() const { return flow_into[0] == 1 && flow_into[1] == 1; }
};

// Cuts an elevator of a floor-decomposed solution; degenerate mode only.
CutResult cut_elevator(const EmbeddedMap& em, const Problem& p,
                       const PositionedConditions& pos, int elevator_edge);

// Rebuilds a stable map from the two pieces of a cut (round-trip check).
EmbeddedMap glue_pieces(const CutResult& cut);

// Geometric fingerprint of an embedded map, stable under vertex renumbering.
std::string embedded_map_signature(const EmbeddedMap& em, const Problem& p);

// |det| * cross-ratio factor * line weights of a pinned piece.
MapMult evaluate_piece(const CutPiece& piece);

// Replaces the cut line condition of a 1/1 piece by a degenerated line
// anchored at the elevator's projection.
CutPiece with_degenerate_line(const CutPiece& piece, DegLineKind kind);

struct CutIdentityReport {
  bool is_11 = false;
  long long weight = 1;
  Int mult_whole = 0;
  // 2/0 pieces
  std::array<Int, 2> mult_piece{};
  // 1/1: signed determinants and full multiplicities per replaced piece
  std::array<Int, 2> det_10{}, det_01{}, det_1m1{};
  std::array<Int, 2> mult_10{}, mult_01{};
  std::array<bool, 2> relation_ok{true, true};  // -det10 + det01 + det1m1 = 0
  Int identity_rhs = 0;
  bool identity_ok = false;
};

CutIdentityReport check_cut_identity(const EmbeddedMap& em, const Problem& p,
                                     const PositionedConditions& pos, int elevator_edge);

// Decorations of the 1/1 edges of a floor graph, in canonical order, with
// the sign exponent u (bit set = horizontal segment at the lower vertex).
std::vector<std::pair<std::vector<int>, int>> enumerate_decorations(size_t n_11_edges);

struct GraphicalContribution {
  std::vector<int> horizontal_at_lower;  // per 1/1 elevator
  int u = 0;
  std::vector<Int> floor_factors;
  Int signed_value = 0;
};

struct GraphicalSum {
  std::vector<GraphicalContribution> contributions;
  Int sum = 0;
  Int whole_mult = 0;
  size_t n_11 = 0;
  bool matches = false;  // |sum| == whole_mult
};

GraphicalSum graphical_contributions_sum(const EmbeddedMap& em, const Problem& p,
                                         const PositionedConditions& pos);

struct FamilyTrace {
  std::vector<std::array<long long, 2>> directions;  // on unbounded cells
  int families_seen = 0;
  bool all_standard = true;
};

// One-degree-of-freedom problems: for every combinatorial type carrying a
// one-parameter family, the projected velocity of the attachment vertex of
// end q on unbounded cells, gcd-normalized.
FamilyTrace trace_free_family(const Problem& p, const PositionedConditions& pos, int q_label,
                              int max_ends = 12);

}  // namespace crfd
