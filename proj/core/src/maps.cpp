#include "crfd/maps.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <condition_variable>
#include <mutex>
#include <thread>

namespace crfd {

namespace {

// ray order on a multi line: (1,1), (-1,0), (0,-1)
const std::array<std::array<long long, 2>, 3> kRayDirs{{{1, 1}, {-1, 0}, {0, -1}}};
const std::array<std::array<long long, 2>, 3> kRayFunctionals{{{1, -1}, {0, 1}, {1, 0}}};

std::array<long long, 2> line_functional(const LineInstance& li, int ray) {
  if (li.degenerate) return degline_functional(li.kind);
  return kRayFunctionals[static_cast<size_t>(ray)];
}

}  // namespace

bool derive_edge_data(const Problem& p, CombinatorialMap& cm) {
  const TreeTopology& t = cm.tree;
  cm.edge_dir.assign(t.edges.size(), IVec());
  cm.edge_weight.assign(t.edges.size(), 0);
  for (size_t e = 0; e < t.edges.size(); ++e) {
    auto far = t.ends_on_far_side(static_cast<int>(e));
    IVec dir = ivec_zero(p.m);
    for (size_t i = 0; i < t.ends.size(); ++i) {
      if (!far[i]) continue;
      const ProblemEnd* pe = p.end_by_label(t.ends[i].label);
      if (!pe) throw std::invalid_argument("tree end label unknown to the problem");
      if (!pe->contracted()) dir = ivec_add(dir, pe->dir);
    }
    if (ivec_is_zero(dir)) return false;
    cm.edge_weight[e] = ivec_weight(dir);
    cm.edge_dir[e] = std::move(dir);
  }
  return true;
}

RVec EmbeddedMap::vertex_position(int v) const {
  RVec pos = root_pos;
  for (auto [e, sign] : cmap.tree.path_edges_signed(root, v)) {
    for (size_t j = 0; j < pos.size(); ++j)
      pos[j] += Rat(sign) * lengths[static_cast<size_t>(e)] *
                Rat(cmap.edge_dir[static_cast<size_t>(e)][j]);
  }
  return pos;
}

EvMatrix ev_matrix(const CombinatorialMap& cm, const Problem& p,
                   const PositionedConditions& pos, const std::map<int, int>& ray_choice,
                   EnumMode mode, int root_vertex) {
  const int m = p.m;
  const size_t n_edges = cm.tree.edges.size();
  const size_t n_cols = static_cast<size_t>(m) + n_edges;
  EvMatrix M;
  for (int j = 0; j < m; ++j) M.col_tag.push_back("root." + std::to_string(j));
  for (size_t e = 0; e < n_edges; ++e) M.col_tag.push_back("len." + std::to_string(e));

  // coordinate row of vertex v, coordinate j
  auto coord_row = [&](int v, int j) {
    std::vector<Int> row(n_cols, Int(0));
    row[static_cast<size_t>(j)] = 1;
    for (auto [e, sign] : cm.tree.path_edges_signed(root_vertex, v))
      row[static_cast<size_t>(m) + static_cast<size_t>(e)] +=
          Int(sign) * Int(cm.edge_dir[static_cast<size_t>(e)][static_cast<size_t>(j)]);
    return row;
  };

  std::vector<const EndAttachment*> by_label;
  for (const auto& x : cm.tree.ends) by_label.push_back(&x);
  std::sort(by_label.begin(), by_label.end(),
            [](const EndAttachment* a, const EndAttachment* b) { return a->label < b->label; });

  for (const EndAttachment* x : by_label) {
    const ProblemEnd* pe = p.end_by_label(x->label);
    if (!pe) continue;
    switch (pe->cond) {
      case CondKind::Point: {
        auto it = pos.point_pos.find(x->label);
        if (it == pos.point_pos.end()) throw std::invalid_argument("missing point position");
        for (int j = 0; j < m; ++j) {
          M.a.push_back(coord_row(x->vertex, j));
          M.rhs.push_back(it->second[static_cast<size_t>(j)]);
          M.row_tag.push_back("point." + std::to_string(x->label) + "." + std::to_string(j));
        }
        break;
      }
      case CondKind::ProjPoint: {
        auto it = pos.proj_point_pos.find(x->label);
        if (it == pos.proj_point_pos.end()) throw std::invalid_argument("missing P position");
        for (int j = 0; j + 1 < m; ++j) {
          M.a.push_back(coord_row(x->vertex, j));
          M.rhs.push_back(it->second[static_cast<size_t>(j)]);
          M.row_tag.push_back("P." + std::to_string(x->label) + "." + std::to_string(j));
        }
        break;
      }
      case CondKind::ProjLine:
      case CondKind::EvLine: {
        auto it = pos.line_pos.find(x->label);
        if (it == pos.line_pos.end()) throw std::invalid_argument("missing line position");
        int ray = 0;
        if (!it->second.degenerate) {
          auto rc = ray_choice.find(x->label);
          if (rc == ray_choice.end()) throw std::invalid_argument("missing ray choice");
          ray = rc->second;
        }
        auto f = line_functional(it->second, ray);
        auto rx = coord_row(x->vertex, 0);
        auto ry = coord_row(x->vertex, 1);
        std::vector<Int> row(n_cols, Int(0));
        for (size_t j = 0; j < n_cols; ++j) row[j] = Int(f[0]) * rx[j] + Int(f[1]) * ry[j];
        M.a.push_back(std::move(row));
        M.rhs.push_back(Rat(f[0]) * it->second.vertex[0] + Rat(f[1]) * it->second.vertex[1]);
        M.row_tag.push_back("L." + std::to_string(x->label));
        break;
      }
      case CondKind::None: break;
    }
  }

  if (mode == EnumMode::Lengths) {
    for (size_t c = 0; c < p.crossratios.size(); ++c) {
      auto row_opt = cr_length_row(cm.tree, p.crossratios[c]);
      std::vector<Int> row(n_cols, Int(0));
      Rat rhs(0);
      if (row_opt) {
        for (int e : row_opt->edges) row[static_cast<size_t>(m) + static_cast<size_t>(e)] = 1;
        rhs = row_opt->rhs;
      }
      // a missing row (wrong pairing in this type) stays zero with nonzero
      // rhs and makes the system unsolvable, which is the intended outcome
      M.a.push_back(std::move(row));
      M.rhs.push_back(row_opt ? rhs : Rat(1));
      M.row_tag.push_back("cr." + std::to_string(c));
    }
  }
  return M;
}

std::optional<EmbeddedMap> solve_embedding(const CombinatorialMap& cm, const Problem& p,
                                           const PositionedConditions& pos,
                                           const std::map<int, int>& ray_choice, EnumMode mode) {
  // root at the first point condition's vertex
  int root = -1;
  int best_label = 0;
  for (const auto& x : cm.tree.ends) {
    const ProblemEnd* pe = p.end_by_label(x.label);
    if (pe && pe->cond == CondKind::Point && (root < 0 || x.label < best_label)) {
      root = x.vertex;
      best_label = x.label;
    }
  }
  if (root < 0) root = 0;

  EvMatrix M = ev_matrix(cm, p, pos, ray_choice, mode, root);
  const size_t n_cols = static_cast<size_t>(p.m) + cm.tree.edges.size();
  if (M.a.size() != n_cols)
    throw std::logic_error("condition system is not square (" + std::to_string(M.a.size()) +
                           " rows, " + std::to_string(n_cols) + " cols)");
  auto x = solve_square(M.a, M.rhs);
  if (!x) return std::nullopt;

  EmbeddedMap em;
  em.cmap = cm;
  em.root = root;
  em.root_pos.assign(x->begin(), x->begin() + p.m);
  em.lengths.assign(x->begin() + p.m, x->end());
  em.ray_choice = ray_choice;
  for (const Rat& l : em.lengths) {
    if (l == 0) throw GenericityFault("zero edge length");
    if (l < 0) return std::nullopt;
  }
  // strict ray membership for multi lines
  for (const auto& x2 : cm.tree.ends) {
    const ProblemEnd* pe = p.end_by_label(x2.label);
    if (!pe || (pe->cond != CondKind::ProjLine && pe->cond != CondKind::EvLine)) continue;
    const LineInstance& li = pos.line_pos.at(x2.label);
    if (li.degenerate) continue;
    RVec v = em.vertex_position(x2.vertex);
    Rat sx = v[0] - li.vertex[0];
    Rat sy = v[1] - li.vertex[1];
    int ray = ray_choice.at(x2.label);
    Rat t = ray == 0 ? sx : (ray == 1 ? -sx : -sy);
    if (t == 0) throw GenericityFault("marked point at a line vertex");
    if (t < 0) return std::nullopt;
    // the solved functional already pins the other coordinate; double check
    auto d = kRayDirs[static_cast<size_t>(ray)];
    if (sx != t * d[0] || sy != t * d[1]) return std::nullopt;
  }
  return em;
}

LocalStar local_star(const CombinatorialMap& cm, const Problem& p, int v) {
  LocalStar star;
  const auto& t = cm.tree;
  const int end_base = static_cast<int>(t.edges.size());
  for (size_t e = 0; e < t.edges.size(); ++e)
    if (t.edges[e][0] == v || t.edges[e][1] == v) star.edge_ids.push_back(static_cast<int>(e));
  for (size_t i = 0; i < t.ends.size(); ++i)
    if (t.ends[i].vertex == v) star.edge_ids.push_back(end_base + static_cast<int>(i));

  auto exits = t.exits_from(v);
  if (v >= static_cast<int>(cm.lambda_at.size())) return star;
  for (int c : cm.lambda_at[static_cast<size_t>(v)]) {
    const CrossRatio& cr = p.crossratios[static_cast<size_t>(c)];
    auto pr = cr.pairs();
    std::array<int, 4> flat{pr[0][0], pr[0][1], pr[1][0], pr[1][1]};
    StarCrossRatio scr;
    scr.pairing_partner = 1;
    for (int i = 0; i < 4; ++i) {
      int idx = t.end_index_of_label(flat[static_cast<size_t>(i)]);
      if (idx < 0) throw std::invalid_argument("cross-ratio entry is not an end of the map");
      int u = t.ends[static_cast<size_t>(idx)].vertex;
      scr.exit_edges[static_cast<size_t>(i)] =
          u == v ? end_base + idx : exits[static_cast<size_t>(u)];
    }
    star.crossratios.push_back(scr);
  }
  return star;
}

MapMult map_mult(const EmbeddedMap& em, const Problem& p, const PositionedConditions& pos,
                 EnumMode mode) {
  MapMult mm;
  EvMatrix M = ev_matrix(em.cmap, p, pos, em.ray_choice, mode, em.root);
  mm.ev_det = det_bareiss(M.a);
  mm.cr_factor = 1;
  if (mode == EnumMode::Degenerate) {
    for (int v = 0; v < em.cmap.tree.n_vertices; ++v) {
      if (em.cmap.lambda_at.empty() || em.cmap.lambda_at[static_cast<size_t>(v)].empty()) continue;
      mm.cr_factor *= cr_mult(local_star(em.cmap, p, v));
    }
  }
  mm.line_factor = 1;
  for (const auto& x : em.cmap.tree.ends) {
    const ProblemEnd* pe = p.end_by_label(x.label);
    if (!pe || (pe->cond != CondKind::ProjLine && pe->cond != CondKind::EvLine)) continue;
    auto it = pos.line_pos.find(x.label);
    if (it != pos.line_pos.end() && !it->second.degenerate) mm.line_factor *= Int(it->second.weight);
  }
  mm.total = boost::multiprecision::abs(mm.ev_det) * mm.cr_factor * mm.line_factor;
  return mm;
}

std::map<int, long long> induced_end_flows(const Problem& p) {
  std::map<int, long long> f;
  for (const auto& e : p.ends) {
    switch (e.cond) {
      case CondKind::Point: f[e.label] = p.m; break;
      case CondKind::ProjPoint: f[e.label] = p.m - 1; break;
      case CondKind::ProjLine: f[e.label] = p.m - 2; break;
      case CondKind::EvLine: f[e.label] = 1; break;
      case CondKind::None: f[e.label] = 0; break;
    }
  }
  return f;
}

FlowGraph condition_flow_of(const CombinatorialMap& cm, const Problem& p) {
  return spread_flows(cm.tree, induced_end_flows(p));
}

namespace {

struct TypeWork {
  std::uint64_t index;
  TreeTopology topo;  // ends labeled with problem labels already
};

struct WorkerAccum {
  Int total = 0;
  std::vector<Solution> solutions;
  std::uint64_t flow_pruned = 0;
  std::uint64_t solved = 0;
};

}  // namespace

CountResult direct_count(const Problem& p, const CountOptions& opts) {
  p.validate();
  DimensionReport dim = check_dimension(p);
  if (!dim.pass) throw ProblemError("dimension equation fails: " + dim.detail);
  const int n_ends = p.total_ends();
  if (n_ends > opts.max_ends)
    throw BudgetError("instance has " + std::to_string(n_ends) + " ends, over the cap of " +
                      std::to_string(opts.max_ends) + " (raise --max-ends to override)");
  if (n_ends < 3) throw ProblemError("need at least 3 ends");

  Problem prob = p;  // lengths mode may fill synthetic lengths
  size_t n_cr = prob.crossratios.size();
  if (opts.mode == EnumMode::Lengths) {
    for (size_t c = 0; c < n_cr; ++c) {
      auto it = opts.synthetic_lengths.find(c);
      if (it != opts.synthetic_lengths.end()) prob.crossratios[c].length = it->second;
      if (!prob.crossratios[c].length)
        prob.crossratios[c].length = Rat(static_cast<long long>(2 * c + 3), 2);
    }
  }
  const int excess = opts.mode == EnumMode::Degenerate ? static_cast<int>(n_cr) : 0;
  if (excess > n_ends - 3)
    throw ProblemError("more cross-ratios than the end count supports");

  std::vector<int> labels;
  for (const auto& e : prob.ends) labels.push_back(e.label);
  std::sort(labels.begin(), labels.end());

  // line conditions needing a ray choice
  std::vector<int> ray_labels;
  std::uint64_t seed = opts.seed_override.value_or(prob.seed);

  for (int attempt = 0;; ++attempt) {
    PositionedConditions pos =
        opts.positions ? *opts.positions : sample_positions(prob, seed, attempt);
    ray_labels.clear();
    for (const auto& e : prob.ends)
      if ((e.cond == CondKind::ProjLine || e.cond == CondKind::EvLine)) {
        auto it = pos.line_pos.find(e.label);
        if (it != pos.line_pos.end() && !it->second.degenerate) ray_labels.push_back(e.label);
      }
    std::sort(ray_labels.begin(), ray_labels.end());
    std::uint64_t n_ray_combos = 1;
    for (size_t i = 0; i < ray_labels.size(); ++i) n_ray_combos *= 3;

    CountResult result;
    result.positions = pos;
    result.resamples = attempt;

    std::atomic<bool> fault{false};
    std::string fault_what;
    std::mutex fault_mu;

    auto process_type = [&](const TypeWork& tw, WorkerAccum& acc) {
      CombinatorialMap cm;
      cm.tree = tw.topo;
      if (!derive_edge_data(prob, cm)) return;
      cm.lambda_at.assign(static_cast<size_t>(cm.tree.n_vertices), {});
      if (opts.mode == EnumMode::Degenerate && n_cr > 0) {
        auto assign = assign_crossratios(cm.tree, prob.crossratios, {});
        if (!assign.valid()) return;
        for (int v = 0; v < cm.tree.n_vertices; ++v) {
          if (cm.tree.valence(v) !=
              3 + static_cast<int>(assign.lambda_at[static_cast<size_t>(v)].size()))
            return;
        }
        cm.lambda_at = std::move(assign.lambda_at);
      }
      if (opts.flow_pruning && opts.mode == EnumMode::Degenerate) {
        FlowGraph fg = condition_flow_of(cm, prob);
        for (auto& l : fg.leak) l = prob.m;
        auto cert = validate_condition_flow(fg, prob.m);
        if (!cert.valid()) {
          ++acc.flow_pruned;
          return;
        }
      }
      for (std::uint64_t combo = 0; combo < n_ray_combos; ++combo) {
        std::map<int, int> ray_choice;
        std::uint64_t c = combo;
        for (int l : ray_labels) {
          ray_choice[l] = static_cast<int>(c % 3);
          c /= 3;
        }
        try {
          auto em = solve_embedding(cm, prob, pos, ray_choice, opts.mode);
          if (!em) continue;
          ++acc.solved;
          MapMult mm = map_mult(*em, prob, pos, opts.mode);
          if (mm.total == 0) continue;
          acc.total += mm.total;
          if (opts.keep_solutions) acc.solutions.push_back({tw.index, combo, *em, mm});
        } catch (const GenericityFault& gf) {
          std::lock_guard<std::mutex> lk(fault_mu);
          fault_what = gf.what();
          fault.store(true);
          return;
        }
      }
    };

    const int workers = std::max(1, opts.workers);
    std::vector<WorkerAccum> accums(static_cast<size_t>(workers));
    std::uint64_t enumerated = 0;
    bool budget_hit = false;

    if (workers == 1) {
      for_each_topology(n_ends, excess, [&](const TreeTopology& t) {
        if (fault.load()) return false;
        if (opts.max_types && enumerated >= opts.max_types) {
          budget_hit = true;
          return false;
        }
        TypeWork tw;
        tw.index = enumerated++;
        tw.topo = t;
        for (auto& x : tw.topo.ends) x.label = labels[static_cast<size_t>(x.label)];
        process_type(tw, accums[0]);
        return true;
      });
    } else {
      std::mutex mu;
      std::vector<TypeWork> backlog;
      bool done = false;
      std::condition_variable cv;
      std::thread producer([&] {
        for_each_topology(n_ends, excess, [&](const TreeTopology& t) {
          if (fault.load()) return false;
          TypeWork tw;
          {
            std::unique_lock<std::mutex> lk(mu);
            cv.wait(lk, [&] { return backlog.size() < 4096 || fault.load(); });
            if (opts.max_types && enumerated >= opts.max_types) {
              budget_hit = true;
              return false;
            }
            tw.index = enumerated++;
          }
          tw.topo = t;
          for (auto& x : tw.topo.ends) x.label = labels[static_cast<size_t>(x.label)];
          {
            std::lock_guard<std::mutex> lk(mu);
            backlog.push_back(std::move(tw));
          }
          cv.notify_all();
          return true;
        });
        {
          std::lock_guard<std::mutex> lk(mu);
          done = true;
        }
        cv.notify_all();
      });
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          for (;;) {
            TypeWork tw;
            {
              std::unique_lock<std::mutex> lk(mu);
              cv.wait(lk, [&] { return !backlog.empty() || done || fault.load(); });
              if (backlog.empty()) {
                if (done || fault.load()) return;
                continue;
              }
              tw = std::move(backlog.back());
              backlog.pop_back();
            }
            cv.notify_all();
            process_type(tw, accums[static_cast<size_t>(w)]);
          }
        });
      }
      producer.join();
      for (auto& th : pool) th.join();
    }

    if (fault.load()) {
      if (opts.positions)
        throw GenericityFault("pinned positions are degenerate: " + fault_what);
      if (attempt + 1 >= opts.max_resamples)
        throw ProblemError("resample limit reached chasing genericity: " + fault_what);
      continue;  // resample
    }
    if (budget_hit)
      throw BudgetError("type budget of " + std::to_string(opts.max_types) +
                        " topologies exceeded (raise --max-types to override)");

    result.types_enumerated = enumerated;
    for (auto& acc : accums) {
      result.total += acc.total;
      result.types_flow_pruned += acc.flow_pruned;
      result.embeddings_solved += acc.solved;
      for (auto& s : acc.solutions) result.solutions.push_back(std::move(s));
    }
    std::sort(result.solutions.begin(), result.solutions.end(),
              [](const Solution& a, const Solution& b) {
                return a.type_index != b.type_index ? a.type_index < b.type_index
                                                    : a.ray_index < b.ray_index;
              });
    return result;
  }
}

FloorResult detect_floors(const EmbeddedMap& em, const Problem& p) {
  FloorResult out;
  if (p.m != 3) {
    out.reason = "floor decomposition needs m = 3";
    return out;
  }
  const auto& t = em.cmap.tree;
  std::vector<bool> is_elevator(t.edges.size(), false);
  for (size_t e = 0; e < t.edges.size(); ++e) {
    const IVec& d = em.cmap.edge_dir[e];
    is_elevator[e] = d[0] == 0 && d[1] == 0;
  }
  auto comp = t.components(is_elevator);
  int n_comp = t.n_vertices ? *std::max_element(comp.begin(), comp.end()) + 1 : 0;

  // points per component
  std::vector<std::vector<int>> pts(static_cast<size_t>(n_comp));
  for (const auto& x : t.ends) {
    const ProblemEnd* pe = p.end_by_label(x.label);
    if (pe && pe->cond == CondKind::Point)
      pts[static_cast<size_t>(comp[static_cast<size_t>(x.vertex)])].push_back(x.label);
  }
  for (int c = 0; c < n_comp; ++c) {
    if (pts[static_cast<size_t>(c)].size() > 1) {
      out.reason = "two points share a floor";
      return out;
    }
    if (pts[static_cast<size_t>(c)].empty()) {
      out.reason = "a floor carries no point";
      return out;
    }
  }

  FloorDecomposition fd;
  fd.n_floors = n_comp;
  // order floors by their point label
  std::vector<int> order(static_cast<size_t>(n_comp));
  for (int c = 0; c < n_comp; ++c) order[static_cast<size_t>(c)] = c;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return pts[static_cast<size_t>(a)][0] < pts[static_cast<size_t>(b)][0]; });
  std::vector<int> rank(static_cast<size_t>(n_comp));
  for (int i = 0; i < n_comp; ++i) rank[static_cast<size_t>(order[static_cast<size_t>(i)])] = i;

  fd.floor_of_vertex.assign(static_cast<size_t>(t.n_vertices), 0);
  for (int v = 0; v < t.n_vertices; ++v)
    fd.floor_of_vertex[static_cast<size_t>(v)] = rank[static_cast<size_t>(comp[static_cast<size_t>(v)])];
  fd.floor_point_label.assign(static_cast<size_t>(n_comp), 0);
  fd.floor_size.assign(static_cast<size_t>(n_comp), 0);
  for (int c = 0; c < n_comp; ++c)
    fd.floor_point_label[static_cast<size_t>(rank[static_cast<size_t>(c)])] =
        pts[static_cast<size_t>(c)][0];
  IVec e0{1, 1, 1};
  for (const auto& x : t.ends) {
    const ProblemEnd* pe = p.end_by_label(x.label);
    if (pe && !pe->contracted() && ivec_primitive(pe->dir) == e0)
      ++fd.floor_size[static_cast<size_t>(fd.floor_of_vertex[static_cast<size_t>(x.vertex)])];
  }

  FlowGraph fg = condition_flow_of(em.cmap, p);
  for (size_t e = 0; e < t.edges.size(); ++e) {
    if (!is_elevator[e]) continue;
    FloorDecomposition::Elevator el;
    el.edge = static_cast<int>(e);
    el.weight = em.cmap.edge_weight[e];
    int f0 = fd.floor_of_vertex[static_cast<size_t>(t.edges[e][0])];
    int f1 = fd.floor_of_vertex[static_cast<size_t>(t.edges[e][1])];
    if (f0 == f1) {
      out.reason = "elevator inside a single floor";  // cycle; cannot happen on trees
      return out;
    }
    // incoming flow at side s is the far half 2e+(1-s)
    long long into0 = fg.half_flow[2 * e + 1];
    long long into1 = fg.half_flow[2 * e];
    if (f0 < f1) {
      el.lower_floor = f0;
      el.upper_floor = f1;
      el.flow_into_lower = into0;
      el.flow_into_upper = into1;
    } else {
      el.lower_floor = f1;
      el.upper_floor = f0;
      el.flow_into_lower = into1;
      el.flow_into_upper = into0;
    }
    fd.elevators.push_back(el);
  }
  std::sort(fd.elevators.begin(), fd.elevators.end(),
            [](const auto& a, const auto& b) {
              return std::tie(a.lower_floor, a.upper_floor, a.edge) <
                     std::tie(b.lower_floor, b.upper_floor, b.edge);
            });
  out.decomposition = std::move(fd);
  return out;
}

}  // namespace crfd
