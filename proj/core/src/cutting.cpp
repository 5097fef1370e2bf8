#include "crfd/cutting.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace crfd {

namespace {

// Sub-map induced by one side of a removed edge; vertices renumbered in
// increasing original order.
struct SidePick {
  std::vector<int> vertices;        // original ids
  std::map<int, int> new_id;        // original -> piece id
  int attachment = -1;              // piece id of the cut edge's endpoint
};

SidePick pick_side(const TreeTopology& t, int edge, int side_vertex) {
  std::vector<bool> removed(t.edges.size(), false);
  removed[static_cast<size_t>(edge)] = true;
  auto comp = t.components(removed);
  int keep = comp[static_cast<size_t>(side_vertex)];
  SidePick sp;
  for (int v = 0; v < t.n_vertices; ++v)
    if (comp[static_cast<size_t>(v)] == keep) {
      sp.new_id[v] = static_cast<int>(sp.vertices.size());
      sp.vertices.push_back(v);
    }
  sp.attachment = sp.new_id.at(side_vertex);
  return sp;
}

}  // namespace

CutResult cut_elevator(const EmbeddedMap& em, const Problem& p,
                       const PositionedConditions& pos, int elevator_edge) {
  const auto& t = em.cmap.tree;
  const IVec& dir = em.cmap.edge_dir[static_cast<size_t>(elevator_edge)];
  if (p.m != 3 || dir[0] != 0 || dir[1] != 0)
    throw std::invalid_argument("edge is not an elevator");
  FloorResult fr = detect_floors(em, p);
  if (!fr.decomposition) throw std::invalid_argument("map is not floor decomposed: " + fr.reason);
  const FloorDecomposition& fd = *fr.decomposition;

  // canonical label of this elevator, shared by both loose ends
  int elevator_rank = -1;
  for (size_t i = 0; i < fd.elevators.size(); ++i)
    if (fd.elevators[i].edge == elevator_edge) elevator_rank = static_cast<int>(i);
  if (elevator_rank < 0) throw std::logic_error("elevator not found in the decomposition");
  const int cut_label = p.n_points() + (p.total_ends() - p.n_points()) + 1 + elevator_rank;

  FlowGraph fg = condition_flow_of(em.cmap, p);
  const int va = t.edges[static_cast<size_t>(elevator_edge)][0];
  const int vb = t.edges[static_cast<size_t>(elevator_edge)][1];
  long long into_a = fg.half_flow[2 * static_cast<size_t>(elevator_edge) + 1];
  long long into_b = fg.half_flow[2 * static_cast<size_t>(elevator_edge)];

  // lower piece first: the side whose floor has the smaller point label
  int fa = fd.floor_of_vertex[static_cast<size_t>(va)];
  int fb = fd.floor_of_vertex[static_cast<size_t>(vb)];
  int lower_vertex = fa < fb ? va : vb;
  int upper_vertex = fa < fb ? vb : va;
  long long into_lower = fa < fb ? into_a : into_b;
  long long into_upper = fa < fb ? into_b : into_a;

  CutResult cut;
  cut.weight = em.cmap.edge_weight[static_cast<size_t>(elevator_edge)];
  cut.flow_into = {into_lower, into_upper};

  RVec anchor3 = em.vertex_position(va);
  RVec anchor{anchor3[0], anchor3[1]};  // both attachments share the projection

  for (int s = 0; s < 2; ++s) {
    int attach = s == 0 ? lower_vertex : upper_vertex;
    SidePick sp = pick_side(t, elevator_edge, attach);
    CutPiece& piece = cut.piece[static_cast<size_t>(s)];
    piece.cut_end_label = cut_label;

    Problem& q = piece.problem;
    q.m = p.m;
    q.seed = p.seed;
    std::set<int> piece_end_labels;
    CombinatorialMap& cm = piece.map.cmap;
    cm.tree.n_vertices = static_cast<int>(sp.vertices.size());
    for (size_t e = 0; e < t.edges.size(); ++e) {
      if (static_cast<int>(e) == elevator_edge) continue;
      auto it0 = sp.new_id.find(t.edges[e][0]);
      auto it1 = sp.new_id.find(t.edges[e][1]);
      if (it0 == sp.new_id.end() || it1 == sp.new_id.end()) continue;
      cm.tree.edges.push_back({it0->second, it1->second});
      cm.edge_dir.push_back(em.cmap.edge_dir[e]);
      cm.edge_weight.push_back(em.cmap.edge_weight[e]);
      piece.map.lengths.push_back(em.lengths[e]);
    }
    for (const auto& x : t.ends) {
      auto it = sp.new_id.find(x.vertex);
      if (it == sp.new_id.end()) continue;
      cm.tree.ends.push_back({x.label, it->second});
      q.ends.push_back(*p.end_by_label(x.label));
      piece_end_labels.insert(x.label);
    }
    // the loose end, stretched to infinity
    {
      ProblemEnd pe;
      pe.label = cut_label;
      pe.dir = ivec_zero(3);
      pe.dir[2] = (s == 0 ? 1 : -1) * cut.weight;  // points toward the other piece
      long long inflow = s == 0 ? into_lower : into_upper;
      if (inflow == 2) {
        pe.cond = CondKind::ProjPoint;
      } else if (inflow == 1) {
        pe.cond = CondKind::ProjLine;
        pe.line.weight = 1;
      } else {
        pe.cond = CondKind::None;
      }
      q.ends.push_back(pe);
      cm.tree.ends.push_back({cut_label, sp.attachment});
      piece_end_labels.insert(cut_label);
    }
    std::sort(q.ends.begin(), q.ends.end(),
              [](const ProblemEnd& a, const ProblemEnd& b) { return a.label < b.label; });

    // positions restricted to the piece, plus the new condition's anchor
    for (const auto& [l, v] : pos.point_pos)
      if (piece_end_labels.count(l)) piece.positions.point_pos[l] = v;
    for (const auto& [l, v] : pos.proj_point_pos)
      if (piece_end_labels.count(l)) piece.positions.proj_point_pos[l] = v;
    for (const auto& [l, v] : pos.line_pos)
      if (piece_end_labels.count(l)) piece.positions.line_pos[l] = v;
    long long inflow = s == 0 ? into_lower : into_upper;
    if (inflow == 2) {
      piece.positions.proj_point_pos[cut_label] = anchor;
    } else if (inflow == 1) {
      LineInstance li;  // placeholder; instantiate with a degenerated kind
      li.vertex = anchor;
      li.weight = 1;
      li.degenerate = false;
      piece.positions.line_pos[cut_label] = li;
    }

    // adapted cross-ratios: those satisfied at a vertex of this piece
    cm.lambda_at.assign(sp.vertices.size(), {});
    for (int v = 0; v < t.n_vertices; ++v) {
      if (em.cmap.lambda_at.empty()) break;
      auto it = sp.new_id.find(v);
      if (it == sp.new_id.end()) continue;
      for (int c : em.cmap.lambda_at[static_cast<size_t>(v)]) {
        CrossRatio adapted =
            adapt_crossratio(p.crossratios[static_cast<size_t>(c)], piece_end_labels, cut_label);
        cm.lambda_at[static_cast<size_t>(it->second)].push_back(
            static_cast<int>(q.crossratios.size()));
        q.crossratios.push_back(adapted);
      }
    }
    q.validate();

    // embedded data; root at the smallest-label point end
    piece.map.root = sp.attachment;
    int best = 0;
    for (const auto& x : cm.tree.ends) {
      const ProblemEnd* pe = q.end_by_label(x.label);
      if (pe && pe->cond == CondKind::Point && (best == 0 || x.label < best)) {
        piece.map.root = x.vertex;
        best = x.label;
      }
    }
    int orig_root = sp.vertices[static_cast<size_t>(piece.map.root)];
    piece.map.root_pos = em.vertex_position(orig_root);
    for (const auto& [l, r] : em.ray_choice)
      if (piece_end_labels.count(l)) piece.map.ray_choice[l] = r;
  }
  return cut;
}

std::string embedded_map_signature(const EmbeddedMap& em, const Problem& p) {
  std::vector<std::string> parts;
  const auto& t = em.cmap.tree;
  auto vec_str = [](const RVec& v) {
    std::string s = "(";
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + rat_str(v[i]);
    return s + ")";
  };
  for (size_t e = 0; e < t.edges.size(); ++e) {
    RVec a = em.vertex_position(t.edges[e][0]);
    RVec b = em.vertex_position(t.edges[e][1]);
    std::string sa = vec_str(a), sb = vec_str(b);
    if (sb < sa) std::swap(sa, sb);
    parts.push_back("seg" + sa + sb + "w" + std::to_string(em.cmap.edge_weight[e]));
  }
  for (const auto& x : t.ends) {
    const ProblemEnd* pe = p.end_by_label(x.label);
    parts.push_back("end" + std::to_string(x.label) + "@" +
                    vec_str(em.vertex_position(x.vertex)) +
                    (pe && !pe->contracted() ? ivec_str(pe->dir) : "(c)"));
  }
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (const auto& s : parts) out += s + ";";
  return out;
}

EmbeddedMap glue_pieces(const CutResult& cut) {
  const CutPiece& lo = cut.piece[0];
  const CutPiece& hi = cut.piece[1];
  EmbeddedMap out;
  CombinatorialMap& cm = out.cmap;
  const int off = lo.map.cmap.tree.n_vertices;
  cm.tree.n_vertices = off + hi.map.cmap.tree.n_vertices;
  int attach_lo = -1, attach_hi = -1;
  auto copy_piece = [&](const CutPiece& piece, int offset) {
    for (size_t e = 0; e < piece.map.cmap.tree.edges.size(); ++e) {
      cm.tree.edges.push_back({piece.map.cmap.tree.edges[e][0] + offset,
                               piece.map.cmap.tree.edges[e][1] + offset});
      cm.edge_dir.push_back(piece.map.cmap.edge_dir[e]);
      cm.edge_weight.push_back(piece.map.cmap.edge_weight[e]);
      out.lengths.push_back(piece.map.lengths[e]);
    }
    for (const auto& x : piece.map.cmap.tree.ends) {
      if (x.label == piece.cut_end_label) {
        (offset == 0 ? attach_lo : attach_hi) = x.vertex + offset;
        continue;
      }
      cm.tree.ends.push_back({x.label, x.vertex + offset});
    }
  };
  copy_piece(lo, 0);
  copy_piece(hi, off);
  // the rebuilt elevator
  RVec zlo = lo.map.vertex_position(attach_lo);
  RVec zhi = hi.map.vertex_position(attach_hi - off);
  cm.tree.edges.push_back({attach_lo, attach_hi});
  IVec dir = ivec_zero(3);
  dir[2] = cut.weight;
  cm.edge_dir.push_back(dir);
  cm.edge_weight.push_back(cut.weight);
  out.lengths.push_back((zhi[2] - zlo[2]) / Rat(cut.weight));
  out.root = lo.map.root;
  out.root_pos = lo.map.root_pos;
  out.ray_choice = lo.map.ray_choice;
  for (const auto& [l, r] : hi.map.ray_choice) out.ray_choice[l] = r;
  // lambda sets travel with the vertices; entries were adapted per piece, so
  // gluing is only used for geometric round-trips and leaves lambda empty
  cm.lambda_at.assign(static_cast<size_t>(cm.tree.n_vertices), {});
  return out;
}

MapMult evaluate_piece(const CutPiece& piece) {
  for (const auto& [l, li] : piece.positions.line_pos) {
    if (!li.degenerate && !piece.map.ray_choice.count(l)) {
      const ProblemEnd* pe = piece.problem.end_by_label(l);
      if (pe && l == piece.cut_end_label)
        throw std::logic_error("1/1 piece evaluated before line instantiation");
    }
  }
  return map_mult(piece.map, piece.problem, piece.positions, EnumMode::Degenerate);
}

CutPiece with_degenerate_line(const CutPiece& piece, DegLineKind kind) {
  CutPiece out = piece;
  auto it = out.positions.line_pos.find(piece.cut_end_label);
  if (it == out.positions.line_pos.end())
    throw std::invalid_argument("piece has no cut line condition");
  it->second.degenerate = true;
  it->second.kind = kind;
  it->second.weight = 1;
  auto* pe = const_cast<ProblemEnd*>(out.problem.end_by_label(piece.cut_end_label));
  pe->line.degenerate = true;
  pe->line.kind = kind;
  return out;
}

CutIdentityReport check_cut_identity(const EmbeddedMap& em, const Problem& p,
                                     const PositionedConditions& pos, int elevator_edge) {
  CutIdentityReport rep;
  CutResult cut = cut_elevator(em, p, pos, elevator_edge);
  rep.weight = cut.weight;
  rep.is_11 = cut.is_11();
  rep.mult_whole = map_mult(em, p, pos, EnumMode::Degenerate).total;
  if (!rep.is_11) {
    for (int s = 0; s < 2; ++s)
      rep.mult_piece[static_cast<size_t>(s)] = evaluate_piece(cut.piece[static_cast<size_t>(s)]).total;
    rep.identity_rhs = Int(cut.weight) * rep.mult_piece[0] * rep.mult_piece[1];
    rep.identity_ok = rep.mult_whole == rep.identity_rhs;
    return rep;
  }
  for (int s = 0; s < 2; ++s) {
    auto piece10 = with_degenerate_line(cut.piece[static_cast<size_t>(s)], DegLineKind::Vertical);
    auto piece01 = with_degenerate_line(cut.piece[static_cast<size_t>(s)], DegLineKind::Horizontal);
    auto piece1m1 = with_degenerate_line(cut.piece[static_cast<size_t>(s)], DegLineKind::Diagonal);
    MapMult m10 = evaluate_piece(piece10);
    MapMult m01 = evaluate_piece(piece01);
    MapMult m1m1 = evaluate_piece(piece1m1);
    rep.det_10[static_cast<size_t>(s)] = m10.ev_det;
    rep.det_01[static_cast<size_t>(s)] = m01.ev_det;
    rep.det_1m1[static_cast<size_t>(s)] = m1m1.ev_det;
    rep.mult_10[static_cast<size_t>(s)] = m10.total;
    rep.mult_01[static_cast<size_t>(s)] = m01.total;
    rep.relation_ok[static_cast<size_t>(s)] =
        -m10.ev_det + m01.ev_det + m1m1.ev_det == 0;
  }
  rep.identity_rhs =
      Int(cut.weight) *
      boost::multiprecision::abs(rep.mult_10[0] * rep.mult_01[1] - rep.mult_01[0] * rep.mult_10[1]);
  rep.identity_ok = rep.mult_whole == rep.identity_rhs;
  return rep;
}

std::vector<std::pair<std::vector<int>, int>> enumerate_decorations(size_t n_11_edges) {
  std::vector<std::pair<std::vector<int>, int>> out;
  for (size_t mask = 0; mask < (size_t{1} << n_11_edges); ++mask) {
    std::vector<int> bits(n_11_edges, 0);
    int u = 0;
    for (size_t i = 0; i < n_11_edges; ++i) {
      bits[i] = (mask >> i) & 1;
      u += bits[i];
    }
    out.push_back({bits, u});
  }
  return out;
}

GraphicalSum graphical_contributions_sum(const EmbeddedMap& em, const Problem& p,
                                         const PositionedConditions& pos) {
  GraphicalSum gs;
  gs.whole_mult = map_mult(em, p, pos, EnumMode::Degenerate).total;
  FloorResult fr = detect_floors(em, p);
  if (!fr.decomposition) throw std::invalid_argument("map is not floor decomposed: " + fr.reason);
  const FloorDecomposition& fd = *fr.decomposition;

  std::vector<size_t> one_one;  // indices into fd.elevators
  for (size_t i = 0; i < fd.elevators.size(); ++i)
    if (fd.elevators[i].flow_into_lower == 1 && fd.elevators[i].flow_into_upper == 1)
      one_one.push_back(i);
  gs.n_11 = one_one.size();

  Int weight_factor = 1;
  for (const auto& el : fd.elevators) weight_factor *= Int(el.weight);

  // every elevator is cut at once, so assemble the floor pieces directly
  const auto& t = em.cmap.tree;
  std::vector<bool> removed(t.edges.size(), false);
  for (const auto& el : fd.elevators) removed[static_cast<size_t>(el.edge)] = true;

  const int n_deg = p.total_ends() - p.n_points();
  auto make_floor_piece = [&](int floor, const std::vector<int>& deco_bits) {
    CutPiece piece;
    Problem& q = piece.problem;
    q.m = 3;
    q.seed = p.seed;
    CombinatorialMap& cm = piece.map.cmap;
    std::map<int, int> new_id;
    std::vector<int> orig;
    for (int v = 0; v < t.n_vertices; ++v)
      if (fd.floor_of_vertex[static_cast<size_t>(v)] == floor) {
        new_id[v] = static_cast<int>(orig.size());
        orig.push_back(v);
      }
    cm.tree.n_vertices = static_cast<int>(orig.size());
    std::set<int> piece_labels;
    for (size_t e = 0; e < t.edges.size(); ++e) {
      if (removed[e]) continue;
      auto i0 = new_id.find(t.edges[e][0]);
      auto i1 = new_id.find(t.edges[e][1]);
      if (i0 == new_id.end() || i1 == new_id.end()) continue;
      cm.tree.edges.push_back({i0->second, i1->second});
      cm.edge_dir.push_back(em.cmap.edge_dir[e]);
      cm.edge_weight.push_back(em.cmap.edge_weight[e]);
      piece.map.lengths.push_back(em.lengths[e]);
    }
    for (const auto& x : t.ends) {
      auto it = new_id.find(x.vertex);
      if (it == new_id.end()) continue;
      cm.tree.ends.push_back({x.label, it->second});
      q.ends.push_back(*p.end_by_label(x.label));
      piece_labels.insert(x.label);
    }
    // loose elevator ends with decorated conditions
    for (size_t i = 0; i < fd.elevators.size(); ++i) {
      const auto& el = fd.elevators[i];
      bool lower_side = el.lower_floor == floor;
      bool upper_side = el.upper_floor == floor;
      if (!lower_side && !upper_side) continue;
      int attach_orig = -1;
      int e0v = t.edges[static_cast<size_t>(el.edge)][0];
      int e1v = t.edges[static_cast<size_t>(el.edge)][1];
      attach_orig = fd.floor_of_vertex[static_cast<size_t>(e0v)] == floor ? e0v : e1v;
      int other = attach_orig == e0v ? e1v : e0v;
      int label = p.n_points() + n_deg + 1 + static_cast<int>(i);
      ProblemEnd pe;
      pe.label = label;
      pe.dir = ivec_zero(3);
      pe.dir[2] = (lower_side ? 1 : -1) * el.weight;
      long long inflow = lower_side ? el.flow_into_lower : el.flow_into_upper;
      RVec other_pos3 = em.vertex_position(other);
      RVec anchor{other_pos3[0], other_pos3[1]};
      if (inflow == 2) {
        pe.cond = CondKind::ProjPoint;
        piece.positions.proj_point_pos[label] = anchor;
      } else if (inflow == 1) {
        pe.cond = CondKind::ProjLine;
        pe.line.weight = 1;
        pe.line.degenerate = true;
        // vertical segment -> vertical degenerated line, horizontal -> L01
        size_t rank = std::find(one_one.begin(), one_one.end(), i) - one_one.begin();
        bool horizontal_here = deco_bits[rank] == 1 ? lower_side : upper_side;
        pe.line.kind = horizontal_here ? DegLineKind::Horizontal : DegLineKind::Vertical;
        LineInstance li;
        li.vertex = anchor;
        li.weight = 1;
        li.degenerate = true;
        li.kind = pe.line.kind;
        piece.positions.line_pos[label] = li;
      } else {
        pe.cond = CondKind::None;
      }
      q.ends.push_back(pe);
      cm.tree.ends.push_back({label, new_id.at(attach_orig)});
      piece_labels.insert(label);
      piece.cut_end_label = label;
    }
    std::sort(q.ends.begin(), q.ends.end(),
              [](const ProblemEnd& a, const ProblemEnd& b) { return a.label < b.label; });
    for (const auto& [l, v] : pos.point_pos)
      if (piece_labels.count(l)) piece.positions.point_pos[l] = v;
    for (const auto& [l, v] : pos.proj_point_pos)
      if (piece_labels.count(l) && !piece.positions.proj_point_pos.count(l))
        piece.positions.proj_point_pos[l] = v;
    for (const auto& [l, v] : pos.line_pos)
      if (piece_labels.count(l) && !piece.positions.line_pos.count(l))
        piece.positions.line_pos[l] = v;

    cm.lambda_at.assign(orig.size(), {});
    for (size_t oi = 0; oi < orig.size(); ++oi) {
      if (em.cmap.lambda_at.empty()) break;
      for (int c : em.cmap.lambda_at[static_cast<size_t>(orig[oi])]) {
        CrossRatio cr = p.crossratios[static_cast<size_t>(c)];
        // adapt every nonlocal entry to the exit elevator's label
        auto prs = cr.pairs();
        std::array<int, 4> flat{prs[0][0], prs[0][1], prs[1][0], prs[1][1]};
        for (auto& entry : flat) {
          if (piece_labels.count(entry)) continue;
          // walk from the satisfied vertex toward the entry's end: the first
          // removed elevator on the path carries the adapted label
          int end_idx = t.end_index_of_label(entry);
          auto pedges = t.path_edges(orig[oi], t.ends[static_cast<size_t>(end_idx)].vertex);
          int lab = -1;
          for (int e : pedges) {
            if (!removed[static_cast<size_t>(e)]) continue;
            for (size_t i = 0; i < fd.elevators.size(); ++i)
              if (fd.elevators[i].edge == e)
                lab = p.n_points() + n_deg + 1 + static_cast<int>(i);
            break;
          }
          entry = lab;
        }
        cm.lambda_at[oi].push_back(static_cast<int>(q.crossratios.size()));
        q.crossratios.push_back(CrossRatio::make(
            flat, cr.pairing_partner ? std::optional<int>(1) : std::nullopt, std::nullopt));
      }
    }
    q.validate();
    piece.map.root = 0;
    for (const auto& x : cm.tree.ends) {
      const ProblemEnd* pe2 = q.end_by_label(x.label);
      if (pe2 && pe2->cond == CondKind::Point) {
        piece.map.root = x.vertex;
        break;
      }
    }
    piece.map.root_pos = em.vertex_position(orig[static_cast<size_t>(piece.map.root)]);
    for (const auto& [l, r] : em.ray_choice)
      if (piece_labels.count(l)) piece.map.ray_choice[l] = r;
    return piece;
  };

  for (auto& [bits, u] : enumerate_decorations(one_one.size())) {
    GraphicalContribution gc;
    gc.horizontal_at_lower = bits;
    gc.u = u;
    Int prod = weight_factor;
    for (int f = 0; f < fd.n_floors; ++f) {
      CutPiece piece = make_floor_piece(f, bits);
      Int factor = evaluate_piece(piece).total;
      gc.floor_factors.push_back(factor);
      prod *= factor;
    }
    gc.signed_value = (u % 2 == 0) ? prod : -prod;
    gs.sum += gc.signed_value;
    gs.contributions.push_back(std::move(gc));
  }
  gs.matches = boost::multiprecision::abs(gs.sum) == gs.whole_mult;
  return gs;
}

FamilyTrace trace_free_family(const Problem& p, const PositionedConditions& pos, int q_label,
                              int max_ends) {
  FamilyTrace trace;
  p.validate();
  const int n_ends = p.total_ends();
  if (n_ends > max_ends) throw BudgetError("trace_free_family: too many ends");
  // one degree of freedom: conditions must fall short of columns by one
  {
    long long rows = 0;
    for (const auto& e : p.ends) switch (e.cond) {
        case CondKind::Point: rows += p.m; break;
        case CondKind::ProjPoint: rows += p.m - 1; break;
        case CondKind::ProjLine:
        case CondKind::EvLine: rows += 1; break;
        case CondKind::None: break;
      }
    long long cols_triv = p.m + n_ends - 3 - static_cast<long long>(p.crossratios.size());
    if (rows != cols_triv - 1)
      throw std::invalid_argument("problem does not have exactly one degree of freedom");
  }

  std::vector<int> labels;
  for (const auto& e : p.ends) labels.push_back(e.label);
  std::sort(labels.begin(), labels.end());

  std::vector<int> ray_labels;
  for (const auto& e : p.ends)
    if (e.cond == CondKind::ProjLine || e.cond == CondKind::EvLine) {
      auto it = pos.line_pos.find(e.label);
      if (it != pos.line_pos.end() && !it->second.degenerate) ray_labels.push_back(e.label);
    }
  std::sort(ray_labels.begin(), ray_labels.end());
  std::uint64_t n_ray_combos = 1;
  for (size_t i = 0; i < ray_labels.size(); ++i) n_ray_combos *= 3;

  const int excess = static_cast<int>(p.crossratios.size());
  for_each_topology(n_ends, excess, [&](const TreeTopology& topo) {
    CombinatorialMap cm;
    cm.tree = topo;
    for (auto& x : cm.tree.ends) x.label = labels[static_cast<size_t>(x.label)];
    if (!derive_edge_data(p, cm)) return true;
    cm.lambda_at.assign(static_cast<size_t>(cm.tree.n_vertices), {});
    if (!p.crossratios.empty()) {
      auto assign = assign_crossratios(cm.tree, p.crossratios, {});
      if (!assign.valid()) return true;
      for (int v = 0; v < cm.tree.n_vertices; ++v)
        if (cm.tree.valence(v) != 3 + static_cast<int>(assign.lambda_at[static_cast<size_t>(v)].size()))
          return true;
      cm.lambda_at = std::move(assign.lambda_at);
    }
    int root = 0;
    for (const auto& x : cm.tree.ends) {
      const ProblemEnd* pe = p.end_by_label(x.label);
      if (pe && pe->cond == CondKind::Point) {
        root = x.vertex;
        break;
      }
    }
    int q_vertex = -1;
    for (const auto& x : cm.tree.ends)
      if (x.label == q_label) q_vertex = x.vertex;
    if (q_vertex < 0) throw std::invalid_argument("q label is not an end");

    for (std::uint64_t combo = 0; combo < n_ray_combos; ++combo) {
      std::map<int, int> ray_choice;
      std::uint64_t c = combo;
      for (int l : ray_labels) {
        ray_choice[l] = static_cast<int>(c % 3);
        c /= 3;
      }
      EvMatrix M = ev_matrix(cm, p, pos, ray_choice, EnumMode::Degenerate, root);
      const size_t n_cols = static_cast<size_t>(p.m) + cm.tree.edges.size();
      auto rs = row_reduce(M.a, M.rhs);
      if (!rs.consistent || rs.rank != static_cast<int>(n_cols) - 1) continue;
      auto kern = kernel_vector(M.a);
      if (!kern) continue;
      RVec x0 = particular_solution(rs, static_cast<int>(n_cols));

      // 1-parameter family x0 + t*k; constrain to the open cell
      Rat lo, hi;
      bool has_lo = false, has_hi = false, empty = false;
      auto add_constraint = [&](const Rat& c0, const Rat& c1) {
        // c0 + t*c1 > 0
        if (empty) return;
        if (c1 == 0) {
          if (c0 <= 0) empty = true;
          return;
        }
        Rat bound = -c0 / c1;
        if (c1 > 0) {
          if (!has_lo || bound > lo) lo = bound;
          has_lo = true;
        } else {
          if (!has_hi || bound < hi) hi = bound;
          has_hi = true;
        }
      };
      for (size_t e = 0; e < cm.tree.edges.size(); ++e)
        add_constraint(x0[static_cast<size_t>(p.m) + e],
                       Rat((*kern)[static_cast<size_t>(p.m) + e]));
      // ray membership of multi lines along the family
      auto pos_of = [&](int v, const RVec& coords) {
        RVec out(static_cast<size_t>(p.m));
        for (int j = 0; j < p.m; ++j) out[static_cast<size_t>(j)] = coords[static_cast<size_t>(j)];
        for (auto [e, sign] : cm.tree.path_edges_signed(root, v))
          for (int j = 0; j < p.m; ++j)
            out[static_cast<size_t>(j)] += Rat(sign) * coords[static_cast<size_t>(p.m) + e] *
                                           Rat(cm.edge_dir[static_cast<size_t>(e)][static_cast<size_t>(j)]);
        return out;
      };
      RVec kern_rat(kern->size());
      for (size_t i = 0; i < kern->size(); ++i) kern_rat[i] = Rat((*kern)[i]);
      for (int l : ray_labels) {
        int ei = cm.tree.end_index_of_label(l);
        int v = cm.tree.ends[static_cast<size_t>(ei)].vertex;
        const LineInstance& li = pos.line_pos.at(l);
        RVec p0 = pos_of(v, x0);
        RVec dv = pos_of(v, kern_rat);  // velocity: kernel has no offset
        int ray = ray_choice.at(l);
        Rat s0x = p0[0] - li.vertex[0], s0y = p0[1] - li.vertex[1];
        Rat t0 = ray == 0 ? s0x : (ray == 1 ? -s0x : -s0y);
        Rat t1 = ray == 0 ? dv[0] : (ray == 1 ? -dv[0] : -dv[1]);
        add_constraint(t0, t1);
      }
      if (empty || (has_lo && has_hi && lo >= hi)) continue;
      ++trace.families_seen;

      RVec dq = pos_of(q_vertex, kern_rat);
      auto record = [&](int orientation) {
        Rat rx = Rat(orientation) * dq[0], ry = Rat(orientation) * dq[1];
        if (rx == 0 && ry == 0) return;  // floor translation, projected velocity zero
        // the kernel is integer so the projected velocity is too
        Int ix = numerator(rx), iy = numerator(ry);
        Int g = boost::multiprecision::gcd(boost::multiprecision::abs(ix),
                                           boost::multiprecision::abs(iy));
        if (g == 0) return;
        long long vx = (ix / g).convert_to<long long>();
        long long vy = (iy / g).convert_to<long long>();
        std::array<long long, 2> dir{vx, vy};
        trace.directions.push_back(dir);
        bool standard = (vx == 1 && vy == 1) || (vx == -1 && vy == 0) || (vx == 0 && vy == -1);
        if (!standard) trace.all_standard = false;
      };
      if (!has_hi) record(+1);
      if (!has_lo) record(-1);
    }
    return true;
  });
  std::sort(trace.directions.begin(), trace.directions.end());
  trace.directions.erase(std::unique(trace.directions.begin(), trace.directions.end()),
                         trace.directions.end());
  return trace;
}

}  // namespace crfd
