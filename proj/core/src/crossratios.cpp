#include "crfd/crossratios.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace crfd {

std::optional<int> satisfied_vertex(const TreeTopology& tree,
                                    const std::array<int, 4>& endpoint_vertex) {
  // Satisfied at v iff the four exit objects at v are pairwise distinct:
  // entries sitting at v count as distinct tokens (they are distinct ends
  // or length-zero paths), every other entry exits through the bounded
  // edge toward its endpoint. At most one vertex can qualify on a tree.
  std::optional<int> found;
  for (int v = 0; v < tree.n_vertices; ++v) {
    auto exits = tree.exits_from(v);
    std::array<int, 4> obj{};
    for (int i = 0; i < 4; ++i) {
      int u = endpoint_vertex[static_cast<size_t>(i)];
      obj[static_cast<size_t>(i)] = (u == v) ? -1 - i : exits[static_cast<size_t>(u)];
    }
    bool ok = true;
    for (int i = 0; i < 4 && ok; ++i)
      for (int j = i + 1; j < 4; ++j)
        if (obj[static_cast<size_t>(i)] == obj[static_cast<size_t>(j)]) {
          ok = false;
          break;
        }
    if (ok) {
      if (found) throw std::logic_error("cross-ratio satisfied at two vertices");
      found = v;
    }
  }
  return found;
}

CrossRatioAssignment assign_crossratios(const TreeTopology& tree,
                                        const std::vector<CrossRatio>& crs,
                                        const std::map<int, int>& endpoint_map) {
  CrossRatioAssignment out;
  out.lambda_at.assign(static_cast<size_t>(tree.n_vertices), {});
  for (size_t c = 0; c < crs.size(); ++c) {
    std::array<int, 4> vtx{};
    for (int i = 0; i < 4; ++i) {
      int label = crs[c].entries[static_cast<size_t>(i)];
      int e = tree.end_index_of_label(label);
      if (e >= 0) {
        vtx[static_cast<size_t>(i)] = tree.ends[static_cast<size_t>(e)].vertex;
      } else {
        auto it = endpoint_map.find(label);
        if (it == endpoint_map.end())
          throw std::invalid_argument("cross-ratio entry " + std::to_string(label) +
                                      " resolves to no endpoint");
        vtx[static_cast<size_t>(i)] = it->second;
      }
    }
    auto sat = satisfied_vertex(tree, vtx);
    if (sat) {
      out.lambda_at[static_cast<size_t>(*sat)].push_back(static_cast<int>(c));
    } else {
      out.unassigned.push_back(static_cast<int>(c));
    }
  }
  return out;
}

namespace {

// Resolution state: original star edges are leaves riding on vertices,
// internal edges join vertices.
struct ResState {
  std::vector<std::vector<int>> vertex_objs;  // per vertex: adjacent object ids
  std::vector<std::pair<int, int>> internal;  // id - kInternalBase -> (u, v)
  std::vector<int> leaf_vertex;               // original edge index -> vertex
  std::vector<int> cr_vertex;                 // cross-ratio index -> vertex
};

constexpr int kInternalBase = 1 << 20;

// Exit object at vertex v toward original leaf e: the leaf id if it sits at
// v, else the first internal edge on the path.
int exit_towards(const ResState& st, int v, int leaf) {
  int target = st.leaf_vertex[static_cast<size_t>(leaf)];
  if (target == v) return leaf;
  std::vector<int> par(st.vertex_objs.size(), -2);
  std::vector<int> par_obj(st.vertex_objs.size(), -1);
  std::vector<int> queue{v};
  par[static_cast<size_t>(v)] = -1;
  for (size_t qi = 0; qi < queue.size(); ++qi) {
    int u = queue[qi];
    for (int obj : st.vertex_objs[static_cast<size_t>(u)]) {
      if (obj < kInternalBase) continue;
      auto [a, b] = st.internal[static_cast<size_t>(obj - kInternalBase)];
      int w = a == u ? b : a;
      if (par[static_cast<size_t>(w)] != -2) continue;
      par[static_cast<size_t>(w)] = u;
      par_obj[static_cast<size_t>(w)] = obj;
      queue.push_back(w);
    }
  }
  int x = target;
  while (par[static_cast<size_t>(x)] != v) x = par[static_cast<size_t>(x)];
  return par_obj[static_cast<size_t>(x)];
}

using SplitKey = std::vector<std::vector<int>>;

void canonical_splits(const ResState& st, const std::vector<int>& all_leaves, SplitKey& key) {
  key.clear();
  for (size_t ie = 0; ie < st.internal.size(); ++ie) {
    auto [a, b] = st.internal[ie];
    std::vector<int> side;
    std::vector<int> stack{a};
    std::vector<bool> seen(st.vertex_objs.size(), false);
    seen[static_cast<size_t>(a)] = true;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int obj : st.vertex_objs[static_cast<size_t>(u)]) {
        if (obj < kInternalBase) {
          side.push_back(obj);
          continue;
        }
        if (obj == static_cast<int>(ie) + kInternalBase) continue;
        auto [x, y] = st.internal[static_cast<size_t>(obj - kInternalBase)];
        int w = x == u ? y : x;
        if (!seen[static_cast<size_t>(w)]) {
          seen[static_cast<size_t>(w)] = true;
          stack.push_back(w);
        }
      }
    }
    std::sort(side.begin(), side.end());
    if (side.empty() || side[0] != all_leaves[0]) {
      // name every split by the side holding the smallest leaf
      std::vector<int> comp;
      std::set_difference(all_leaves.begin(), all_leaves.end(), side.begin(), side.end(),
                          std::back_inserter(comp));
      side = std::move(comp);
    }
    key.push_back(std::move(side));
  }
  std::sort(key.begin(), key.end());
}

void resolve_rec(ResState st, const LocalStar& star, size_t next_cr,
                 std::set<SplitKey>& results, const std::vector<int>& all_leaves) {
  if (next_cr == star.crossratios.size()) {
    SplitKey key;
    canonical_splits(st, all_leaves, key);
    results.insert(std::move(key));
    return;
  }
  const StarCrossRatio& cr = star.crossratios[next_cr];
  int v = st.cr_vertex[next_cr];
  std::array<int, 4> ex{};
  for (int i = 0; i < 4; ++i)
    ex[static_cast<size_t>(i)] = exit_towards(st, v, cr.exit_edges[static_cast<size_t>(i)]);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (ex[static_cast<size_t>(i)] == ex[static_cast<size_t>(j)]) return;  // dead branch
  int p = cr.pairing_partner;
  std::array<int, 2> pair0{ex[0], ex[static_cast<size_t>(p)]};
  std::array<int, 2> pair1{};
  {
    int k = 0;
    for (int i = 1; i < 4; ++i)
      if (i != p) pair1[static_cast<size_t>(k++)] = ex[static_cast<size_t>(i)];
  }
  const std::vector<int>& objs = st.vertex_objs[static_cast<size_t>(v)];
  std::vector<int> rest;
  for (int o : objs)
    if (o != pair0[0] && o != pair0[1] && o != pair1[0] && o != pair1[1]) rest.push_back(o);

  std::vector<size_t> here;  // later cross-ratios currently at v
  for (size_t c = next_cr + 1; c < star.crossratios.size(); ++c)
    if (st.cr_vertex[c] == v) here.push_back(c);

  const size_t r = rest.size();
  for (size_t mask = 0; mask < (size_t{1} << r); ++mask) {
    std::vector<int> side1{pair0[0], pair0[1]};
    std::vector<int> side2{pair1[0], pair1[1]};
    for (size_t i = 0; i < r; ++i) (mask >> i & 1 ? side1 : side2).push_back(rest[i]);

    ResState nxt = st;
    int v1 = v;
    int v2 = static_cast<int>(nxt.vertex_objs.size());
    nxt.vertex_objs.push_back({});
    int eid = kInternalBase + static_cast<int>(nxt.internal.size());
    nxt.internal.push_back({v1, v2});
    nxt.vertex_objs[static_cast<size_t>(v1)] = side1;
    nxt.vertex_objs[static_cast<size_t>(v1)].push_back(eid);
    nxt.vertex_objs[static_cast<size_t>(v2)] = side2;
    nxt.vertex_objs[static_cast<size_t>(v2)].push_back(eid);
    for (int o : side2) {
      if (o >= kInternalBase) {
        auto& [a, b] = nxt.internal[static_cast<size_t>(o - kInternalBase)];
        if (a == v1) a = v2;
        else if (b == v1) b = v2;
      } else {
        nxt.leaf_vertex[static_cast<size_t>(o)] = v2;
      }
    }
    // remaining cross-ratios at v are forced to a side by their exits
    bool ok = true;
    int n1 = 0, n2 = 0;
    for (size_t c : here) {
      int in1 = 0;
      for (int i = 0; i < 4; ++i) {
        int o = exit_towards(st, v, star.crossratios[c].exit_edges[static_cast<size_t>(i)]);
        in1 += std::count(side1.begin(), side1.end(), o) > 0;
      }
      if (in1 >= 3) {
        nxt.cr_vertex[c] = v1;
        ++n1;
      } else if (in1 <= 1) {
        nxt.cr_vertex[c] = v2;
        ++n2;
      } else {
        ok = false;  // a 2-2 split leaves it satisfied nowhere
        break;
      }
    }
    if (!ok) continue;
    if (static_cast<int>(side1.size()) + 1 != 3 + n1) continue;
    if (static_cast<int>(side2.size()) + 1 != 3 + n2) continue;
    resolve_rec(std::move(nxt), star, next_cr + 1, results, all_leaves);
  }
}

}  // namespace

Int cr_mult(const LocalStar& star) {
  const size_t r = star.crossratios.size();
  if (star.edge_ids.size() != 3 + r)
    throw std::invalid_argument("star valence must equal 3 + #crossratios");
  if (r == 0) return Int(1);
  std::vector<int> ids = star.edge_ids;
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw std::invalid_argument("duplicate star edge id");
  auto idx_of = [&](int id) {
    auto it = std::lower_bound(ids.begin(), ids.end(), id);
    if (it == ids.end() || *it != id) throw std::invalid_argument("unknown star edge id");
    return static_cast<int>(it - ids.begin());
  };
  LocalStar norm = star;
  for (auto& cr : norm.crossratios) {
    for (auto& e : cr.exit_edges) e = idx_of(e);
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        if (cr.exit_edges[static_cast<size_t>(i)] == cr.exit_edges[static_cast<size_t>(j)])
          throw std::invalid_argument("cross-ratio exits must be four distinct edges");
  }
  ResState st;
  st.vertex_objs.push_back({});
  for (size_t i = 0; i < ids.size(); ++i) st.vertex_objs[0].push_back(static_cast<int>(i));
  st.leaf_vertex.assign(ids.size(), 0);
  st.cr_vertex.assign(r, 0);
  std::vector<int> all_leaves(ids.size());
  for (size_t i = 0; i < ids.size(); ++i) all_leaves[i] = static_cast<int>(i);
  std::set<SplitKey> results;
  resolve_rec(std::move(st), norm, 0, results, all_leaves);
  return Int(results.size());
}

CrossRatio adapt_crossratio(const CrossRatio& cr, const std::set<int>& kept_labels,
                            int replacement) {
  int missing = 0;
  for (int e : cr.entries)
    if (!kept_labels.count(e)) ++missing;
  if (missing > 1)
    throw std::invalid_argument("cross-ratio keeps fewer than 3 entries on this side");
  if (missing == 0) return cr;
  auto pr = cr.pairs();
  for (auto& pair : pr)
    for (auto& x : pair)
      if (!kept_labels.count(x)) x = replacement;
  std::array<int, 4> flat{pr[0][0], pr[0][1], pr[1][0], pr[1][1]};
  return CrossRatio::make(flat, cr.pairing_partner ? std::optional<int>(1) : std::nullopt,
                          cr.length);
}

std::optional<CrLengthRow> cr_length_row(const TreeTopology& tree, const CrossRatio& cr) {
  if (!cr.length) throw std::invalid_argument("cr_length_row needs a non-degenerated cross-ratio");
  auto pr = cr.pairs();
  std::array<int, 4> endidx{};
  const std::array<int, 4> flat{pr[0][0], pr[0][1], pr[1][0], pr[1][1]};
  for (int i = 0; i < 4; ++i) {
    int e = tree.end_index_of_label(flat[static_cast<size_t>(i)]);
    if (e < 0)
      throw std::invalid_argument("cross-ratio entry " +
                                  std::to_string(flat[static_cast<size_t>(i)]) +
                                  " is not an end of this tree");
    endidx[static_cast<size_t>(i)] = e;
  }
  CrLengthRow row;
  row.rhs = *cr.length;
  for (size_t e = 0; e < tree.edges.size(); ++e) {
    auto far = tree.ends_on_far_side(static_cast<int>(e));
    bool a0 = far[static_cast<size_t>(endidx[0])], a1 = far[static_cast<size_t>(endidx[1])];
    bool b0 = far[static_cast<size_t>(endidx[2])], b1 = far[static_cast<size_t>(endidx[3])];
    if (a0 == a1 && b0 == b1 && a0 != b0) row.edges.push_back(static_cast<int>(e));
  }
  if (row.edges.empty()) return std::nullopt;  // tree realizes another pairing
  return row;
}

}  // namespace crfd
