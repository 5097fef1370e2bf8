#include "crfd/flows.hpp"

#include <algorithm>
#include <stdexcept>

namespace crfd {

long long FlowGraph::flow_at(int v) const {
  long long f = 0;
  for (size_t e = 0; e < tree.edges.size(); ++e) {
    if (tree.edges[e][0] == v) f += half_flow[2 * e + 1];
    if (tree.edges[e][1] == v) f += half_flow[2 * e];
  }
  for (size_t i = 0; i < tree.ends.size(); ++i)
    if (tree.ends[i].vertex == v) f += end_flow[i];
  return f;
}

FlowGraph spread_flows(const TreeTopology& tree, const std::map<int, long long>& end_flows) {
  std::vector<int> order(static_cast<size_t>(tree.n_vertices));
  for (int v = 0; v < tree.n_vertices; ++v) order[static_cast<size_t>(v)] = v;
  return spread_flows(tree, end_flows, order);
}

FlowGraph spread_flows(const TreeTopology& tree, const std::map<int, long long>& end_flows,
                       const std::vector<int>& vertex_order) {
  FlowGraph fg;
  fg.tree = tree;
  fg.half_flow.assign(tree.edges.size() * 2, 0);
  fg.end_flow.assign(tree.ends.size(), 0);
  for (size_t i = 0; i < tree.ends.size(); ++i) {
    auto it = end_flows.find(tree.ends[i].label);
    if (it != end_flows.end()) {
      if (it->second < 0) throw std::invalid_argument("end flows must be nonnegative");
      fg.end_flow[i] = it->second;
    }
  }
  // Iterate the update rule until nothing changes. Flows only ever grow
  // (maxima are kept), so termination is immediate from boundedness.
  bool changed = true;
  while (changed) {
    changed = false;
    for (int v : vertex_order) {
      long long fl = fg.flow_at(v);
      if (fl == 0) continue;  // spread from a zero-flow vertex stays zero
      for (size_t e = 0; e < tree.edges.size(); ++e) {
        int side = -1;
        if (tree.edges[e][0] == v) side = 0;
        else if (tree.edges[e][1] == v) side = 1;
        else continue;
        long long inc = fg.half_flow[2 * e + (1 - side)];
        long long out = fl - inc;
        long long val = out > 0 ? out - 1 : 0;
        if (val > fg.half_flow[2 * e + side]) {
          fg.half_flow[2 * e + side] = val;
          changed = true;
        }
      }
    }
  }
  fg.leak.assign(static_cast<size_t>(tree.n_vertices), 0);
  for (int v = 0; v < tree.n_vertices; ++v) fg.leak[static_cast<size_t>(v)] = fg.flow_at(v);
  return fg;
}

ConditionFlowCertificate validate_condition_flow(const FlowGraph& fg, int m) {
  ConditionFlowCertificate cert;
  cert.m = m;
  for (size_t e = 0; e < fg.tree.edges.size(); ++e) {
    long long s = fg.half_flow[2 * e] + fg.half_flow[2 * e + 1];
    if (s != m - 1) cert.edge_violations.push_back({static_cast<int>(e), s});
  }
  for (int v = 0; v < fg.tree.n_vertices; ++v) {
    long long fl = fg.flow_at(v);
    long long lk = fg.leak.empty() ? 0 : fg.leak[static_cast<size_t>(v)];
    if (fl != lk) cert.vertex_violations.push_back({v, fl, lk});
    if (fl == 0) {
      bool incident = false;
      for (const auto& edge : fg.tree.edges) incident |= edge[0] == v || edge[1] == v;
      if (incident) cert.zero_flow_vertices.push_back(v);
    }
  }
  return cert;
}

FlowOrInvalid tree_flows_from_leak(const TreeTopology& tree, const std::vector<long long>& leak,
                                   int m) {
  FlowOrInvalid out;
  if (!tree.ends.empty()) {
    out.error = "tree must have no ends";
    return out;
  }
  long long total = 0;
  for (long long l : leak) total += l;
  if (total != static_cast<long long>(m - 1) * static_cast<long long>(tree.edges.size())) {
    out.error = "sum of leaks is " + std::to_string(total) + ", needs (m-1)*#edges = " +
                std::to_string((m - 1) * static_cast<long long>(tree.edges.size()));
    return out;
  }
  FlowGraph fg;
  fg.tree = tree;
  fg.leak = leak;
  fg.half_flow.assign(tree.edges.size() * 2, 0);
  for (size_t e = 0; e < tree.edges.size(); ++e) {
    // flow entering the component of edges[e][0] after removing e
    std::vector<bool> removed(tree.edges.size(), false);
    removed[e] = true;
    auto comp = tree.components(removed);
    int c0 = comp[static_cast<size_t>(tree.edges[e][0])];
    long long leak_sum = 0, nv = 0;
    for (int v = 0; v < tree.n_vertices; ++v)
      if (comp[static_cast<size_t>(v)] == c0) {
        leak_sum += leak[static_cast<size_t>(v)];
        ++nv;
      }
    long long into0 = leak_sum - static_cast<long long>(m - 1) * (nv - 1);
    if (into0 < 0 || into0 > m - 1) {
      out.error = "edge " + std::to_string(e) + " needs incoming flow " + std::to_string(into0) +
                  " outside [0," + std::to_string(m - 1) + "]";
      return out;
    }
    // the half adjacent to edges[e][1] carries what flows toward edges[e][0]
    fg.half_flow[2 * e + 1] = into0;
    fg.half_flow[2 * e] = (m - 1) - into0;
  }
  out.flow = std::move(fg);
  return out;
}

}  // namespace crfd
