#include "crfd/tree.hpp"

#include <algorithm>
#include <stdexcept>

namespace crfd {

int TreeTopology::valence(int v) const {
  int val = 0;
  for (const auto& e : edges) val += (e[0] == v) + (e[1] == v);
  for (const auto& x : ends) val += (x.vertex == v);
  return val;
}

std::vector<std::vector<std::pair<int, int>>> TreeTopology::adjacency() const {
  std::vector<std::vector<std::pair<int, int>>> adj(static_cast<size_t>(n_vertices));
  for (size_t i = 0; i < edges.size(); ++i) {
    adj[static_cast<size_t>(edges[i][0])].push_back({static_cast<int>(i), edges[i][1]});
    adj[static_cast<size_t>(edges[i][1])].push_back({static_cast<int>(i), edges[i][0]});
  }
  return adj;
}

bool TreeTopology::is_tree() const {
  if (n_vertices == 0) return false;
  if (static_cast<int>(edges.size()) != n_vertices - 1) return false;
  std::vector<bool> none(edges.size(), false);
  auto comp = components(none);
  return *std::max_element(comp.begin(), comp.end()) == 0;
}

std::vector<int> TreeTopology::components(const std::vector<bool>& removed_edges) const {
  std::vector<int> comp(static_cast<size_t>(n_vertices), -1);
  auto adj = adjacency();
  int next = 0;
  std::vector<int> stack;
  for (int s = 0; s < n_vertices; ++s) {
    if (comp[static_cast<size_t>(s)] != -1) continue;
    comp[static_cast<size_t>(s)] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (auto [e, w] : adj[static_cast<size_t>(v)]) {
        if (removed_edges[static_cast<size_t>(e)]) continue;
        if (comp[static_cast<size_t>(w)] == -1) {
          comp[static_cast<size_t>(w)] = next;
          stack.push_back(w);
        }
      }
    }
    ++next;
  }
  return comp;
}

namespace {
// parent vertex + parent edge per vertex after rooting at r
void root_walk(const TreeTopology& t, int r, std::vector<int>& par_v, std::vector<int>& par_e) {
  auto adj = t.adjacency();
  par_v.assign(static_cast<size_t>(t.n_vertices), -1);
  par_e.assign(static_cast<size_t>(t.n_vertices), -1);
  std::vector<int> stack{r};
  std::vector<bool> seen(static_cast<size_t>(t.n_vertices), false);
  seen[static_cast<size_t>(r)] = true;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (auto [e, w] : adj[static_cast<size_t>(v)]) {
      if (seen[static_cast<size_t>(w)]) continue;
      seen[static_cast<size_t>(w)] = true;
      par_v[static_cast<size_t>(w)] = v;
      par_e[static_cast<size_t>(w)] = e;
      stack.push_back(w);
    }
  }
}
}  // namespace

std::vector<int> TreeTopology::path_vertices(int u, int v) const {
  std::vector<int> par_v, par_e;
  root_walk(*this, u, par_v, par_e);
  std::vector<int> path;
  int w = v;
  while (w != -1) {
    path.push_back(w);
    if (w == u) break;
    w = par_v[static_cast<size_t>(w)];
  }
  std::reverse(path.begin(), path.end());
  if (path.empty() || path.front() != u) throw std::logic_error("disconnected tree");
  return path;
}

std::vector<int> TreeTopology::path_edges(int u, int v) const {
  std::vector<int> par_v, par_e;
  root_walk(*this, u, par_v, par_e);
  std::vector<int> path;
  int w = v;
  while (w != u) {
    if (w == -1) throw std::logic_error("disconnected tree");
    path.push_back(par_e[static_cast<size_t>(w)]);
    w = par_v[static_cast<size_t>(w)];
  }
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<std::pair<int, int>> TreeTopology::path_edges_signed(int u, int v) const {
  auto pe = path_edges(u, v);
  auto pv = path_vertices(u, v);
  std::vector<std::pair<int, int>> out;
  for (size_t i = 0; i < pe.size(); ++i) {
    int from = pv[i];
    int sign = edges[static_cast<size_t>(pe[i])][0] == from ? 1 : -1;
    out.push_back({pe[i], sign});
  }
  return out;
}

std::vector<int> TreeTopology::exits_from(int v) const {
  std::vector<int> par_v, par_e;
  root_walk(*this, v, par_v, par_e);
  std::vector<int> exit(static_cast<size_t>(n_vertices), -1);
  for (int w = 0; w < n_vertices; ++w) {
    if (w == v) continue;
    int x = w;
    while (par_v[static_cast<size_t>(x)] != v) x = par_v[static_cast<size_t>(x)];
    exit[static_cast<size_t>(w)] = par_e[static_cast<size_t>(x)];
  }
  return exit;
}

std::vector<bool> TreeTopology::ends_on_far_side(int e) const {
  std::vector<bool> removed(edges.size(), false);
  removed[static_cast<size_t>(e)] = true;
  auto comp = components(removed);
  int far = comp[static_cast<size_t>(edges[static_cast<size_t>(e)][1])];
  std::vector<bool> side(ends.size(), false);
  for (size_t i = 0; i < ends.size(); ++i)
    side[i] = comp[static_cast<size_t>(ends[i].vertex)] == far;
  return side;
}

int TreeTopology::end_index_of_label(int label) const {
  for (size_t i = 0; i < ends.size(); ++i)
    if (ends[i].label == label) return static_cast<int>(i);
  return -1;
}

}  // namespace crfd
