#pragma once

// Shared tree topology: internal vertices, bounded edges between them,
// and labeled ends hanging off vertices. Used by the flow calculus, the
// cross-ratio machinery and the stable-map engine.

#include <array>
#include <optional>
#include <vector>

namespace crfd {

struct EndAttachment {
  int label = 0;
  int vertex = 0;
};

struct TreeTopology {
  int n_vertices = 0;
  std::vector<std::array<int, 2>> edges;  // bounded edges
  std::vector<EndAttachment> ends;

  int valence(int v) const;
  bool is_tree() const;  // connected, |E| = |V|-1

  // adjacency: per vertex, (edge index, neighbor)
  std::vector<std::vector<std::pair<int, int>>> adjacency() const;

  // Vertices on the unique path from u to v, inclusive.
  std::vector<int> path_vertices(int u, int v) const;
  // Edge indices on the unique path from u to v.
  std::vector<int> path_edges(int u, int v) const;
  // Same, with +1 when the edge is traversed edges[e][0] -> edges[e][1].
  std::vector<std::pair<int, int>> path_edges_signed(int u, int v) const;

  // For every vertex w != v: the edge index at v through which w is reached.
  // exit_edge[v] itself is -1.
  std::vector<int> exits_from(int v) const;

  // Splits the end set by removing edge e: ends[i] true iff end i lies on the
  // edges[e][1] side.
  std::vector<bool> ends_on_far_side(int e) const;

  // Connected components after deleting the edges for which `removed` is
  // true. Returns per-vertex component ids, 0-based, in first-seen order.
  std::vector<int> components(const std::vector<bool>& removed_edges) const;

  int end_index_of_label(int label) const;  // -1 when absent
};

}  // namespace crfd
