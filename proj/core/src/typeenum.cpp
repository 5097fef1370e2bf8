#include "crfd/typeenum.hpp"

#include <stdexcept>

namespace crfd {

namespace {

// Removing the largest end from any topology gives a unique smaller
// topology, so inserting end k (a) into a bounded edge, (b) into an end
// edge, or (c) at a vertex generates each topology exactly once.
bool insert_rec(TreeTopology& t, int next_end, int n_ends, int excess_left,
                const std::function<bool(const TreeTopology&)>& fn) {
  if (next_end == n_ends) {
    if (excess_left == 0) return fn(t);
    return true;
  }
  if (excess_left > n_ends - next_end) return true;  // cannot spend the excess
  // (a) subdivide a bounded edge
  const size_t n_bedges = t.edges.size();
  for (size_t e = 0; e < n_bedges; ++e) {
    TreeTopology u = t;
    int w = u.n_vertices++;
    int b = u.edges[e][1];
    u.edges[e][1] = w;
    u.edges.push_back({w, b});
    u.ends.push_back({next_end, w});
    if (!insert_rec(u, next_end + 1, n_ends, excess_left, fn)) return false;
  }
  // (b) subdivide an end edge
  const size_t n_old_ends = t.ends.size();
  for (size_t i = 0; i < n_old_ends; ++i) {
    TreeTopology u = t;
    int w = u.n_vertices++;
    int old_v = u.ends[i].vertex;
    u.ends[i].vertex = w;
    u.edges.push_back({old_v, w});
    u.ends.push_back({next_end, w});
    if (!insert_rec(u, next_end + 1, n_ends, excess_left, fn)) return false;
  }
  // (c) fatten an existing vertex
  if (excess_left > 0) {
    for (int v = 0; v < t.n_vertices; ++v) {
      TreeTopology u = t;
      u.ends.push_back({next_end, v});
      if (!insert_rec(u, next_end + 1, n_ends, excess_left - 1, fn)) return false;
    }
  }
  return true;
}

}  // namespace

bool for_each_topology(int n_ends, int excess,
                       const std::function<bool(const TreeTopology&)>& fn) {
  if (n_ends < 3) throw std::invalid_argument("need at least 3 ends");
  if (excess < 0 || excess > n_ends - 3)
    throw std::invalid_argument("excess out of range");
  TreeTopology base;
  base.n_vertices = 1;
  base.ends = {{0, 0}, {1, 0}, {2, 0}};
  return insert_rec(base, 3, n_ends, excess, fn);
}

std::uint64_t count_trivalent(int n_ends) {
  std::uint64_t c = 1;
  for (int k = 3; k < n_ends; ++k) c *= static_cast<std::uint64_t>(2 * k - 3);
  return c;
}

}  // namespace crfd
