#pragma once

// Path criterion, cross-ratio-to-vertex assignment, cross-ratio
// multiplicities by counting total resolutions, adaptation under cutting,
// and length rows for non-degenerated cross-ratios on trivalent trees.

#include "crfd/model.hpp"
#include "crfd/numeric.hpp"
#include "crfd/tree.hpp"

#include <map>
#include <optional>
#include <set>
#include <vector>

namespace crfd {

// The unique vertex at which the four endpoint paths meet in exactly one
// vertex, for one (equivalently every) pairing. Endpoints are vertices;
// end entries use their attachment vertex (distinct ends at one vertex
// always count as distinct exits).
std::optional<int> satisfied_vertex(const TreeTopology& tree,
                                    const std::array<int, 4>& endpoint_vertex);

struct CrossRatioAssignment {
  std::vector<std::vector<int>> lambda_at;  // per vertex, cross-ratio indices
  std::vector<int> unassigned;              // cross-ratio indices with no vertex
  bool valid() const { return unassigned.empty(); }
};

// endpoint_map: entry label -> endpoint vertex; entries that are labels of
// ends of the tree use the end itself as path endpoint.
CrossRatioAssignment assign_crossratios(const TreeTopology& tree,
                                        const std::vector<CrossRatio>& crs,
                                        const std::map<int, int>& endpoint_map);

// A higher-valent vertex seen locally: its adjacent edges carry opaque ids,
// each cross-ratio names the four adjacent edges its entries leave through.
// The list order is the total order of the lengths.
struct StarCrossRatio {
  std::array<int, 4> exit_edges{};  // ids of adjacent edges, pairwise distinct
  int pairing_partner = 1;          // index paired with exit_edges[0]
};

struct LocalStar {
  std::vector<int> edge_ids;  // size = 3 + #crossratios
  std::vector<StarCrossRatio> crossratios;
};

// Number of total resolutions of the star, resolving in list order and
// branching over every admissible split; distinct resulting labeled
// trivalent trees are counted once.
Int cr_mult(const LocalStar& star);

// Replaces entries outside kept_labels by the replacement label. Needs at
// least three surviving entries.
CrossRatio adapt_crossratio(const CrossRatio& cr, const std::set<int>& kept_labels,
                            int replacement);

// Length row of a non-degenerated cross-ratio on a trivalent tree: the
// bounded edges of the unique path separating the two pairs. Empty optional
// when the tree realizes a different pairing (no solution in this type).
struct CrLengthRow {
  std::vector<int> edges;  // bounded edge indices, coefficient one each
  Rat rhs;
};
std::optional<CrLengthRow> cr_length_row(const TreeTopology& tree, const CrossRatio& cr);

}  // namespace crfd
