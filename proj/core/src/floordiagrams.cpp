#include "crfd/floordiagrams.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace crfd {

namespace {

enum class EndClass { E0, E1, E2, Alpha, Beta, Contracted };

EndClass classify(const ProblemEnd& e, int m) {
  if (e.contracted()) return EndClass::Contracted;
  IVec pdir = ivec_primitive(e.dir);
  IVec e0(static_cast<size_t>(m), 1);
  if (pdir == e0) return EndClass::E0;
  long long z = pdir[static_cast<size_t>(m - 1)];
  if (z < 0 && ivec_weight(IVec(pdir.begin(), pdir.end() - 1)) == 0) return EndClass::Alpha;
  if (z > 0 && ivec_weight(IVec(pdir.begin(), pdir.end() - 1)) == 0) return EndClass::Beta;
  for (int axis = 0; axis + 1 < m; ++axis) {
    IVec v = ivec_zero(m);
    v[static_cast<size_t>(axis)] = -1;
    if (pdir == v) return axis == 0 ? EndClass::E1 : EndClass::E2;
  }
  throw ProblemError("degree end " + std::to_string(e.label) +
                     " has no standard-direction class; floor diagrams need degrees of shape "
                     "Delta^3_d(alpha,beta)");
}

long long vertex_flux(const Problem& p, const DiagramVertex& v) {
  long long b = v.size();
  for (int l : v.beta_ends) b += p.end_by_label(l)->weight();
  for (int l : v.alpha_ends) b -= p.end_by_label(l)->weight();
  return b;
}

}  // namespace

TreeTopology CrossRatioFloorDiagram::skeleton() const {
  TreeTopology t;
  t.n_vertices = static_cast<int>(vertices.size());
  for (const auto& e : edges) t.edges.push_back({e.u, e.v});
  return t;
}

std::string diagram_key(const CrossRatioFloorDiagram& d) {
  std::ostringstream os;
  auto list = [&](const std::vector<int>& v) {
    os << "{";
    for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << "}";
  };
  for (size_t i = 0; i < d.vertices.size(); ++i) {
    const auto& v = d.vertices[i];
    os << "v" << i << ":";
    list(v.e0_ends);
    list(v.e1_ends);
    list(v.e2_ends);
    list(v.alpha_ends);
    list(v.beta_ends);
    list(v.lambda);
    os << "leak=" << v.leak << ";";
  }
  for (const auto& e : d.edges)
    os << "e" << e.u << "-" << e.v << ":w=" << e.weight << ",f=" << e.flow_into_u << "/"
       << e.flow_into_v << ";";
  return os.str();
}

bool diagram_equal(const CrossRatioFloorDiagram& a, const CrossRatioFloorDiagram& b) {
  return diagram_key(a) == diagram_key(b);
}

std::optional<std::vector<long long>> solve_edge_weights(
    int n_vertices, const std::vector<std::pair<int, int>>& edges,
    const std::vector<long long>& b) {
  std::vector<long long> flux = b;
  std::vector<long long> weight(edges.size(), 0);
  std::vector<bool> done(edges.size(), false);
  std::vector<int> degree(static_cast<size_t>(n_vertices), 0);
  for (const auto& [u, v] : edges) {
    ++degree[static_cast<size_t>(u)];
    ++degree[static_cast<size_t>(v)];
  }
  std::vector<bool> alive(static_cast<size_t>(n_vertices), true);
  for (size_t round = 0; round < edges.size(); ++round) {
    // find a leaf with exactly one undone edge
    int leaf = -1, le = -1;
    for (int v = 0; v < n_vertices && leaf < 0; ++v) {
      if (!alive[static_cast<size_t>(v)] || degree[static_cast<size_t>(v)] != 1) continue;
      for (size_t e = 0; e < edges.size(); ++e)
        if (!done[e] && (edges[e].first == v || edges[e].second == v)) {
          leaf = v;
          le = static_cast<int>(e);
          break;
        }
    }
    if (leaf < 0) return std::nullopt;  // not a tree
    int other = edges[static_cast<size_t>(le)].first == leaf ? edges[static_cast<size_t>(le)].second
                                                             : edges[static_cast<size_t>(le)].first;
    // balance at the leaf: flux + (edge to later) - (edge from earlier) = 0
    long long w = leaf < other ? -flux[static_cast<size_t>(leaf)] : flux[static_cast<size_t>(leaf)];
    if (w <= 0) return std::nullopt;
    weight[static_cast<size_t>(le)] = w;
    done[static_cast<size_t>(le)] = true;
    alive[static_cast<size_t>(leaf)] = false;
    --degree[static_cast<size_t>(leaf)];
    --degree[static_cast<size_t>(other)];
    // fold the resolved edge into the neighbor's balance: the edge appears
    // there with the opposite role (later vs earlier)
    flux[static_cast<size_t>(other)] += leaf < other ? -w : w;
  }
  // remaining single vertex must be balanced
  for (int v = 0; v < n_vertices; ++v)
    if (alive[static_cast<size_t>(v)] && flux[static_cast<size_t>(v)] != 0) return std::nullopt;
  return weight;
}

LeakReport diagram_leak(const Problem& p, const DiagramVertex& v, int valence) {
  LeakReport rep;
  long long n_p = 0, n_l = 0;
  for (int l : v.alpha_ends) {
    CondKind k = p.end_by_label(l)->cond;
    n_p += k == CondKind::ProjPoint;
    n_l += k == CondKind::ProjLine;
  }
  for (int l : v.beta_ends) {
    CondKind k = p.end_by_label(l)->cond;
    n_p += k == CondKind::ProjPoint;
    n_l += k == CondKind::ProjLine;
  }
  rep.a_value = 3 * v.size() + static_cast<long long>(v.alpha_ends.size()) +
                static_cast<long long>(v.beta_ends.size()) + valence - 2 -
                static_cast<long long>(v.lambda.size()) - 2 * n_p - n_l;
  if (v.size() == 0) {
    rep.leak = 0;
    rep.overridden = rep.a_value != 0;
  } else {
    rep.leak = rep.a_value;
    rep.valid = rep.a_value >= 0;
  }
  return rep;
}

namespace {

// Prufer decode; n >= 2. seq has length n-2 with entries in [0, n).
std::vector<std::pair<int, int>> prufer_tree(int n, const std::vector<int>& seq) {
  std::vector<int> deg(static_cast<size_t>(n), 1);
  for (int s : seq) ++deg[static_cast<size_t>(s)];
  std::vector<std::pair<int, int>> edges;
  std::vector<bool> used(static_cast<size_t>(n), false);
  for (int s : seq) {
    int leaf = -1;
    for (int v = 0; v < n; ++v)
      if (deg[static_cast<size_t>(v)] == 1 && !used[static_cast<size_t>(v)]) {
        leaf = v;
        break;
      }
    edges.push_back({std::min(leaf, s), std::max(leaf, s)});
    used[static_cast<size_t>(leaf)] = true;
    --deg[static_cast<size_t>(s)];
  }
  std::vector<int> rest;
  for (int v = 0; v < n; ++v)
    if (!used[static_cast<size_t>(v)] && deg[static_cast<size_t>(v)] >= 1) rest.push_back(v);
  edges.push_back({rest[0], rest[1]});
  return edges;
}

struct DegreeClasses {
  std::vector<int> e0, e1, e2, vertical;  // labels, ascending
};

DegreeClasses classify_degree(const Problem& p) {
  DegreeClasses dc;
  for (const auto& e : p.ends) {
    if (e.contracted()) continue;
    switch (classify(e, p.m)) {
      case EndClass::E0: dc.e0.push_back(e.label); break;
      case EndClass::E1: dc.e1.push_back(e.label); break;
      case EndClass::E2: dc.e2.push_back(e.label); break;
      case EndClass::Alpha:
      case EndClass::Beta: dc.vertical.push_back(e.label); break;
      case EndClass::Contracted: break;
    }
  }
  for (auto* v : {&dc.e0, &dc.e1, &dc.e2, &dc.vertical}) std::sort(v->begin(), v->end());
  return dc;
}

}  // namespace

std::vector<CrossRatioFloorDiagram> enumerate_diagrams(const Problem& p,
                                                       const DiagramBudget& budget) {
  p.validate();
  if (p.m != 3) throw ProblemError("floor diagrams are implemented for m = 3");
  DimensionReport dim = check_dimension(p);
  if (!dim.pass) throw ProblemError("dimension equation fails: " + dim.detail);
  const int n = p.n_points();
  if (n < 1) throw ProblemError("floor diagrams need at least one point");
  DegreeClasses dc = classify_degree(p);
  if (dc.e0.size() != dc.e1.size() || dc.e0.size() != dc.e2.size())
    throw ProblemError("degree is not of shape Delta^3_d(alpha,beta)");

  std::vector<CrossRatioFloorDiagram> out;
  std::uint64_t visited = 0;

  auto handle_assignment = [&](const std::vector<std::pair<int, int>>& edges,
                               const std::vector<int>& vert_of_label_e0,
                               const std::vector<int>& vert_of_label_e1,
                               const std::vector<int>& vert_of_label_e2,
                               const std::vector<int>& vert_of_vertical) {
    if (++visited > budget.max_assignments)
      throw BudgetError("diagram assignment budget of " + std::to_string(budget.max_assignments) +
                        " exceeded");
    CrossRatioFloorDiagram dg;
    dg.vertices.assign(static_cast<size_t>(n), {});
    for (size_t i = 0; i < dc.e0.size(); ++i)
      dg.vertices[static_cast<size_t>(vert_of_label_e0[i])].e0_ends.push_back(dc.e0[i]);
    for (size_t i = 0; i < dc.e1.size(); ++i)
      dg.vertices[static_cast<size_t>(vert_of_label_e1[i])].e1_ends.push_back(dc.e1[i]);
    for (size_t i = 0; i < dc.e2.size(); ++i)
      dg.vertices[static_cast<size_t>(vert_of_label_e2[i])].e2_ends.push_back(dc.e2[i]);
    for (size_t i = 0; i < dc.vertical.size(); ++i) {
      const ProblemEnd* pe = p.end_by_label(dc.vertical[i]);
      auto& v = dg.vertices[static_cast<size_t>(vert_of_vertical[i])];
      (pe->dir[2] < 0 ? v.alpha_ends : v.beta_ends).push_back(dc.vertical[i]);
    }
    // plane balance per vertex
    for (const auto& v : dg.vertices)
      if (v.e0_ends.size() != v.e1_ends.size() || v.e0_ends.size() != v.e2_ends.size()) return;

    std::vector<long long> flux(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
      flux[static_cast<size_t>(i)] = vertex_flux(p, dg.vertices[static_cast<size_t>(i)]);
    auto weights = solve_edge_weights(n, edges, flux);
    if (!weights) return;

    std::vector<int> valence(static_cast<size_t>(n), 0);
    for (const auto& [u, v] : edges) {
      ++valence[static_cast<size_t>(u)];
      ++valence[static_cast<size_t>(v)];
    }

    // cross-ratio satisfaction on the skeleton
    TreeTopology skel;
    skel.n_vertices = n;
    for (const auto& [u, v] : edges) skel.edges.push_back({u, v});
    std::map<int, int> endpoint;
    {
      int i = 0;
      for (int l : p.point_labels()) endpoint[l] = i++;
    }
    for (size_t i = 0; i < dc.vertical.size(); ++i)
      endpoint[dc.vertical[i]] = vert_of_vertical[i];
    if (!p.crossratios.empty()) {
      auto assign = assign_crossratios(skel, p.crossratios, endpoint);
      if (!assign.valid()) return;
      for (int i = 0; i < n; ++i)
        dg.vertices[static_cast<size_t>(i)].lambda = assign.lambda_at[static_cast<size_t>(i)];
    }

    // leaks and the condition flow
    std::vector<long long> leaks(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      LeakReport lr = diagram_leak(p, dg.vertices[static_cast<size_t>(i)],
                                   valence[static_cast<size_t>(i)]);
      if (!lr.valid) return;
      leaks[static_cast<size_t>(i)] = lr.leak;
      dg.vertices[static_cast<size_t>(i)].leak = lr.leak;
      dg.vertices[static_cast<size_t>(i)].leak_overridden = lr.overridden;
    }
    auto flow = tree_flows_from_leak(skel, leaks, 3);
    if (!flow.flow) return;

    const int n_deg = p.total_ends() - n;
    for (size_t e = 0; e < edges.size(); ++e) {
      DiagramEdge de;
      de.u = edges[e].first;
      de.v = edges[e].second;
      de.weight = (*weights)[e];
      de.flow_into_u = flow.flow->half_flow[2 * e + 1];
      de.flow_into_v = flow.flow->half_flow[2 * e];
      dg.edges.push_back(de);
    }
    std::sort(dg.edges.begin(), dg.edges.end(), [](const DiagramEdge& a, const DiagramEdge& b) {
      return std::tie(a.u, a.v) < std::tie(b.u, b.v);
    });
    for (size_t e = 0; e < dg.edges.size(); ++e)
      dg.edges[e].label = n + n_deg + 1 + static_cast<int>(e);
    out.push_back(std::move(dg));
  };

  auto enumerate_assignments = [&](const std::vector<std::pair<int, int>>& edges) {
    // per-class vertex assignments; e1/e2 pruned against the e0 profile
    std::vector<int> a0(dc.e0.size()), a1(dc.e1.size()), a2(dc.e2.size()),
        av(dc.vertical.size());
    std::vector<int> s0(static_cast<size_t>(n), 0), s1(static_cast<size_t>(n), 0),
        s2(static_cast<size_t>(n), 0);
    auto rec_v = [&](auto&& self, size_t i) -> void {
      if (i == dc.vertical.size()) {
        handle_assignment(edges, a0, a1, a2, av);
        return;
      }
      for (int v = 0; v < n; ++v) {
        av[i] = v;
        self(self, i + 1);
      }
    };
    auto rec_2 = [&](auto&& self, size_t i) -> void {
      if (i == dc.e2.size()) {
        rec_v(rec_v, 0);
        return;
      }
      for (int v = 0; v < n; ++v) {
        if (s2[static_cast<size_t>(v)] >= s0[static_cast<size_t>(v)]) continue;
        ++s2[static_cast<size_t>(v)];
        a2[i] = v;
        self(self, i + 1);
        --s2[static_cast<size_t>(v)];
      }
    };
    auto rec_1 = [&](auto&& self, size_t i) -> void {
      if (i == dc.e1.size()) {
        rec_2(rec_2, 0);
        return;
      }
      for (int v = 0; v < n; ++v) {
        if (s1[static_cast<size_t>(v)] >= s0[static_cast<size_t>(v)]) continue;
        ++s1[static_cast<size_t>(v)];
        a1[i] = v;
        self(self, i + 1);
        --s1[static_cast<size_t>(v)];
      }
    };
    auto rec_0 = [&](auto&& self, size_t i) -> void {
      if (i == dc.e0.size()) {
        rec_1(rec_1, 0);
        return;
      }
      for (int v = 0; v < n; ++v) {
        ++s0[static_cast<size_t>(v)];
        a0[i] = v;
        self(self, i + 1);
        --s0[static_cast<size_t>(v)];
      }
    };
    rec_0(rec_0, 0);
  };

  if (n == 1) {
    enumerate_assignments({});
  } else {
    std::vector<int> seq(static_cast<size_t>(n - 2), 0);
    for (;;) {
      enumerate_assignments(prufer_tree(n, seq));
      // next Prufer sequence
      int i = static_cast<int>(seq.size()) - 1;
      while (i >= 0 && seq[static_cast<size_t>(i)] == n - 1) seq[static_cast<size_t>(i--)] = 0;
      if (i < 0) break;
      ++seq[static_cast<size_t>(i)];
    }
  }
  return out;
}

DiagramCheck validate_diagram(const Problem& p, const CrossRatioFloorDiagram& d) {
  DiagramCheck ck;
  auto fail = [&](const std::string& r) {
    ck.valid = false;
    ck.reason = r;
    return ck;
  };
  const int n = p.n_points();
  if (static_cast<int>(d.vertices.size()) != n) return fail("vertex count != point count");
  TreeTopology skel = d.skeleton();
  if (n > 1 && !skel.is_tree()) return fail("skeleton is not a tree");

  // partition of the degree
  std::set<int> seen;
  for (const auto& v : d.vertices)
    for (const auto* lst : {&v.e0_ends, &v.e1_ends, &v.e2_ends, &v.alpha_ends, &v.beta_ends})
      for (int l : *lst)
        if (!seen.insert(l).second) return fail("label assigned twice");
  for (const auto& e : p.ends)
    if (!e.contracted() && !seen.count(e.label)) return fail("label missing from partition");

  for (size_t i = 0; i < d.vertices.size(); ++i) {
    const auto& v = d.vertices[i];
    if (v.e0_ends.size() != v.e1_ends.size() || v.e0_ends.size() != v.e2_ends.size())
      return fail("plane balance fails at vertex " + std::to_string(i));
    long long flux = vertex_flux(p, v);
    for (const auto& e : d.edges) {
      if (e.u == static_cast<int>(i)) flux += e.weight;
      if (e.v == static_cast<int>(i)) flux -= e.weight;
      if (e.weight <= 0) return fail("nonpositive edge weight");
    }
    if (flux != 0) return fail("z-balance fails at vertex " + std::to_string(i));
  }

  // leaks and flow
  std::vector<long long> leaks;
  for (size_t i = 0; i < d.vertices.size(); ++i) {
    LeakReport lr = diagram_leak(p, d.vertices[i], skel.valence(static_cast<int>(i)));
    if (!lr.valid) return fail("negative A(v) at vertex " + std::to_string(i));
    if (lr.leak != d.vertices[i].leak) return fail("stored leak differs from the definition");
    leaks.push_back(lr.leak);
  }
  auto flow = tree_flows_from_leak(skel, leaks, 3);
  if (!flow.flow) return fail("no condition flow of type 3: " + flow.error);
  for (size_t e = 0; e < d.edges.size(); ++e) {
    // skeleton edge order matches d.edges order
    if (flow.flow->half_flow[2 * e + 1] != d.edges[e].flow_into_u ||
        flow.flow->half_flow[2 * e] != d.edges[e].flow_into_v)
      return fail("stored flows differ from the leak-determined flow");
  }

  // cross-ratio satisfaction
  std::map<int, int> endpoint;
  {
    int i = 0;
    for (int l : p.point_labels()) endpoint[l] = i++;
  }
  for (size_t i = 0; i < d.vertices.size(); ++i) {
    for (int l : d.vertices[i].alpha_ends) endpoint[l] = static_cast<int>(i);
    for (int l : d.vertices[i].beta_ends) endpoint[l] = static_cast<int>(i);
  }
  if (!p.crossratios.empty()) {
    auto assign = assign_crossratios(skel, p.crossratios, endpoint);
    if (!assign.valid()) return fail("a cross-ratio is satisfied at no vertex");
    for (size_t i = 0; i < d.vertices.size(); ++i)
      if (assign.lambda_at[i] != d.vertices[i].lambda)
        return fail("stored lambda sets differ from the path criterion");
  }
  return ck;
}

CrossRatioFloorDiagram degenerate(const EmbeddedMap& em, const Problem& p) {
  FloorResult fr = detect_floors(em, p);
  if (!fr.decomposition)
    throw ProblemError("map is not floor decomposed: " + fr.reason);
  const FloorDecomposition& fd = *fr.decomposition;
  const int n = fd.n_floors;
  CrossRatioFloorDiagram dg;
  dg.vertices.assign(static_cast<size_t>(n), {});
  for (const auto& x : em.cmap.tree.ends) {
    const ProblemEnd* pe = p.end_by_label(x.label);
    if (!pe || pe->contracted()) continue;
    int f = fd.floor_of_vertex[static_cast<size_t>(x.vertex)];
    auto& v = dg.vertices[static_cast<size_t>(f)];
    switch (classify(*pe, p.m)) {
      case EndClass::E0: v.e0_ends.push_back(x.label); break;
      case EndClass::E1: v.e1_ends.push_back(x.label); break;
      case EndClass::E2: v.e2_ends.push_back(x.label); break;
      case EndClass::Alpha: v.alpha_ends.push_back(x.label); break;
      case EndClass::Beta: v.beta_ends.push_back(x.label); break;
      case EndClass::Contracted: break;
    }
  }
  for (auto& v : dg.vertices) {
    std::sort(v.e0_ends.begin(), v.e0_ends.end());
    std::sort(v.e1_ends.begin(), v.e1_ends.end());
    std::sort(v.e2_ends.begin(), v.e2_ends.end());
    std::sort(v.alpha_ends.begin(), v.alpha_ends.end());
    std::sort(v.beta_ends.begin(), v.beta_ends.end());
  }
  for (const auto& el : fd.elevators) {
    DiagramEdge de;
    de.u = el.lower_floor;
    de.v = el.upper_floor;
    de.weight = el.weight;
    de.flow_into_u = el.flow_into_lower;
    de.flow_into_v = el.flow_into_upper;
    dg.edges.push_back(de);
  }
  std::sort(dg.edges.begin(), dg.edges.end(), [](const DiagramEdge& a, const DiagramEdge& b) {
    return std::tie(a.u, a.v) < std::tie(b.u, b.v);
  });
  const int n_deg = p.total_ends() - n;
  for (size_t e = 0; e < dg.edges.size(); ++e)
    dg.edges[e].label = n + n_deg + 1 + static_cast<int>(e);

  // lambda sets: union over the floor's vertices
  for (int v = 0; v < em.cmap.tree.n_vertices; ++v) {
    if (em.cmap.lambda_at.empty()) break;
    int f = fd.floor_of_vertex[static_cast<size_t>(v)];
    for (int c : em.cmap.lambda_at[static_cast<size_t>(v)])
      dg.vertices[static_cast<size_t>(f)].lambda.push_back(c);
  }
  for (auto& v : dg.vertices) std::sort(v.lambda.begin(), v.lambda.end());

  TreeTopology skel = dg.skeleton();
  for (size_t i = 0; i < dg.vertices.size(); ++i) {
    LeakReport lr =
        diagram_leak(p, dg.vertices[i], skel.valence(static_cast<int>(i)));
    dg.vertices[i].leak = lr.leak;
    dg.vertices[i].leak_overridden = lr.overridden;
  }
  return dg;
}

LocalVertexProblem vertex_local_problem(const CrossRatioFloorDiagram& d, const Problem& p,
                                        int vertex) {
  LocalVertexProblem lvp;
  lvp.vertex = vertex;
  Problem& q = lvp.problem;
  q.m = p.m;
  q.seed = p.seed;
  const DiagramVertex& v = d.vertices[static_cast<size_t>(vertex)];
  int point_label = p.point_labels()[static_cast<size_t>(vertex)];
  {
    ProblemEnd e;
    e.label = point_label;
    e.dir = ivec_zero(p.m);
    e.cond = CondKind::Point;
    q.ends.push_back(e);
  }
  std::set<int> local_labels{point_label};
  for (const auto* lst : {&v.e0_ends, &v.e1_ends, &v.e2_ends, &v.alpha_ends, &v.beta_ends})
    for (int l : *lst) {
      q.ends.push_back(*p.end_by_label(l));
      local_labels.insert(l);
    }
  // cut-edge ends: down if the neighbor is earlier, up if later
  for (const auto& e : d.edges) {
    if (e.u != vertex && e.v != vertex) continue;
    bool neighbor_later = e.u == vertex;  // edges store u < v
    ProblemEnd pe;
    pe.label = e.label;
    pe.dir = ivec_zero(p.m);
    pe.dir[static_cast<size_t>(p.m - 1)] = neighbor_later ? e.weight : -e.weight;
    long long inflow = e.u == vertex ? e.flow_into_u : e.flow_into_v;
    if (inflow == 1) {
      pe.cond = CondKind::ProjLine;
      pe.line.weight = 1;
    } else if (inflow == 2) {
      pe.cond = CondKind::ProjPoint;
    } else {
      pe.cond = CondKind::None;
    }
    q.ends.push_back(pe);
    lvp.edge_end_labels.push_back(e.label);
  }
  std::sort(q.ends.begin(), q.ends.end(),
            [](const ProblemEnd& a, const ProblemEnd& b) { return a.label < b.label; });

  // adapted cross-ratios: nonlocal entries are replaced by the exit edge label
  TreeTopology skel = d.skeleton();
  std::map<int, int> endpoint;
  {
    int i = 0;
    for (int l : p.point_labels()) endpoint[l] = i++;
  }
  for (size_t i = 0; i < d.vertices.size(); ++i) {
    for (int l : d.vertices[i].alpha_ends) endpoint[l] = static_cast<int>(i);
    for (int l : d.vertices[i].beta_ends) endpoint[l] = static_cast<int>(i);
  }
  auto exits = skel.n_vertices > 1 ? skel.exits_from(vertex) : std::vector<int>{};
  auto edge_label_of_skel_edge = [&](int se) {
    // skeleton edges are in d.edges order
    return d.edges[static_cast<size_t>(se)].label;
  };
  for (int c : v.lambda) {
    const CrossRatio& cr = p.crossratios[static_cast<size_t>(c)];
    auto pr = cr.pairs();
    std::array<int, 4> flat{pr[0][0], pr[0][1], pr[1][0], pr[1][1]};
    for (auto& entry : flat) {
      int u = endpoint.at(entry);
      if (u == vertex) continue;  // local
      entry = edge_label_of_skel_edge(exits[static_cast<size_t>(u)]);
    }
    q.crossratios.push_back(
        CrossRatio::make(flat, cr.pairing_partner ? std::optional<int>(1) : std::nullopt,
                         std::nullopt));
  }
  q.validate();
  return lvp;
}

PlaneReduction reduce_to_plane(const LocalVertexProblem& local) {
  PlaneReduction out;
  const Problem& p = local.problem;
  if (p.m != 3) {
    out.unsupported = "reduction starts from m = 3";
    return out;
  }
  Problem q;
  q.m = 2;
  q.seed = p.seed;
  std::set<int> cr_labels;
  for (const auto& cr : p.crossratios)
    for (int e : cr.entries) cr_labels.insert(e);
  int n_e0 = 0;
  for (const auto& e : p.ends) {
    if (e.contracted()) {
      q.ends.push_back(e);
      if (static_cast<int>(e.dir.size()) == 3) q.ends.back().dir = ivec_zero(2);
      continue;
    }
    EndClass c = classify(e, 3);
    ProblemEnd ne;
    ne.label = e.label;
    switch (c) {
      case EndClass::E0:
        ne.dir = {e.dir[0], e.dir[1]};
        ++n_e0;
        break;
      case EndClass::E1:
      case EndClass::E2:
        ne.dir = {e.dir[0], e.dir[1]};
        break;
      case EndClass::Alpha:
      case EndClass::Beta: {
        ne.dir = ivec_zero(2);  // contracted marked end
        if (e.cond == CondKind::ProjPoint) {
          ne.cond = CondKind::Point;
        } else if (e.cond == CondKind::ProjLine) {
          ne.cond = CondKind::EvLine;
          ne.line = e.line;
        } else {
          if (cr_labels.count(e.label)) {
            out.unsupported = "unconditioned vertical end " + std::to_string(e.label) +
                              " appears in a cross-ratio";
            return out;
          }
          continue;  // dropped
        }
        break;
      }
      case EndClass::Contracted: break;
    }
    q.ends.push_back(ne);
  }
  if (n_e0 < 1) {
    out.unsupported = "size-zero local problem has no plane degree";
    return out;
  }
  q.crossratios = p.crossratios;
  std::sort(q.ends.begin(), q.ends.end(),
            [](const ProblemEnd& a, const ProblemEnd& b) { return a.label < b.label; });
  q.validate();
  DimensionReport dim = check_dimension(q);
  if (!dim.pass) {
    out.unsupported = "dimension equation fails after dropping: " + dim.detail;
    return out;
  }
  out.problem = std::move(q);
  return out;
}

std::string canonical_problem_key(const Problem& p) {
  std::ostringstream os;
  os << "m=" << p.m;
  std::vector<const ProblemEnd*> sorted;
  for (const auto& e : p.ends) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(),
            [](const ProblemEnd* a, const ProblemEnd* b) { return a->label < b->label; });
  for (const ProblemEnd* e : sorted) {
    os << "|" << e->label << ":";
    if (e->contracted()) {
      os << "0";
    } else {
      for (size_t j = 0; j < e->dir.size(); ++j) os << (j ? "," : "") << e->dir[j];
    }
    switch (e->cond) {
      case CondKind::None: break;
      case CondKind::Point: os << ":pt"; break;
      case CondKind::ProjPoint: os << ":P"; break;
      case CondKind::ProjLine: os << ":L" << e->line.weight; break;
      case CondKind::EvLine: os << ":E" << e->line.weight; break;
    }
  }
  std::vector<std::string> crs;
  for (const auto& cr : p.crossratios) {
    std::ostringstream cs;
    cs << "{" << cr.entries[0] << "," << cr.entries[1] << "," << cr.entries[2] << ","
       << cr.entries[3] << "}";
    if (cr.length) cs << "=" << rat_str(*cr.length);
    crs.push_back(cs.str());
  }
  std::sort(crs.begin(), crs.end());
  for (const auto& s : crs) os << "|cr" << s;
  return os.str();
}

std::optional<VertexMult> MultProvider::resolve(const Problem& local) const {
  std::string key = canonical_problem_key(local);
  auto hit = cache.find(key);
  if (hit != cache.end()) return hit->second;
  auto done = [&](VertexMult vm) {
    cache[key] = vm;
    return std::optional<VertexMult>(vm);
  };
  if (use_table) {
    auto it = table.find(key);
    if (it != table.end()) return done({it->second, "table"});
  }
  if (use_brute3d && local.total_ends() <= brute_max_ends) {
    CountOptions co;
    co.max_ends = brute_max_ends;
    co.max_types = max_types;
    co.keep_solutions = false;
    co.workers = workers;
    try {
      CountResult r = direct_count(local, co);
      return done({r.total, "brute3d"});
    } catch (const BudgetError&) {
    }
  }
  if (use_plane2d) {
    LocalVertexProblem lvp;
    lvp.problem = local;
    PlaneReduction red = reduce_to_plane(lvp);
    if (red.problem && red.problem->total_ends() <= brute_max_ends) {
      CountOptions co;
      co.max_ends = brute_max_ends;
      co.max_types = max_types;
      co.keep_solutions = false;
      co.workers = workers;
      try {
        CountResult r = direct_count(*red.problem, co);
        return done({r.total, "plane2d"});
      } catch (const BudgetError&) {
      }
    }
  }
  return std::nullopt;
}

DiagramMult diagram_mult(const CrossRatioFloorDiagram& d, const Problem& p,
                         const MultProvider& provider) {
  DiagramMult dm;
  for (const auto& e : d.edges) dm.edge_factor *= Int(e.weight);
  dm.total = dm.edge_factor;
  for (size_t i = 0; i < d.vertices.size(); ++i) {
    LocalVertexProblem lvp = vertex_local_problem(d, p, static_cast<int>(i));
    auto vm = provider.resolve(lvp.problem);
    if (!vm) {
      dm.resolved = false;
      dm.unresolved_vertices.push_back(static_cast<int>(i));
      dm.vertex_mults.push_back({Int(0), "unresolved"});
      continue;
    }
    dm.vertex_mults.push_back(*vm);
    dm.total *= vm->value;
  }
  if (!dm.resolved) dm.total = 0;
  return dm;
}

FloorCount floor_count(const Problem& p, const MultProvider& provider,
                       const DiagramBudget& budget) {
  FloorCount fc;
  fc.diagrams = enumerate_diagrams(p, budget);
  for (const auto& d : fc.diagrams) {
    DiagramMult dm = diagram_mult(d, p, provider);
    if (!dm.resolved) fc.resolved = false;
    fc.total += dm.total;
    fc.mults.push_back(std::move(dm));
  }
  return fc;
}

}  // namespace crfd
