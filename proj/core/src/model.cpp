#include "crfd/model.hpp"

#include <algorithm>
#include <set>

namespace crfd {

std::array<long long, 2> degline_functional(DegLineKind k) {
  switch (k) {
    case DegLineKind::Vertical: return {1, 0};
    case DegLineKind::Horizontal: return {0, 1};
    case DegLineKind::Diagonal: return {1, -1};
  }
  return {0, 0};
}

CrossRatio CrossRatio::make(std::array<int, 4> e, std::optional<int> partner,
                            std::optional<Rat> length) {
  std::array<int, 4> sorted = e;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 3; ++i)
    if (sorted[i] == sorted[i + 1])
      throw ProblemError("cross-ratio entries must be distinct: {" +
                         std::to_string(sorted[i]) + " repeated}");
  CrossRatio cr;
  cr.entries = sorted;
  if (partner) {
    // partner given against the original order: locate the entry paired
    // with e[0] and re-express against the sorted order
    int mate = e[static_cast<size_t>(*partner)];
    int a = e[0];
    int pos_a = static_cast<int>(std::find(sorted.begin(), sorted.end(), a) - sorted.begin());
    int pos_m = static_cast<int>(std::find(sorted.begin(), sorted.end(), mate) - sorted.begin());
    if (pos_a == 0) {
      cr.pairing_partner = pos_m;
    } else if (pos_m == 0) {
      cr.pairing_partner = pos_a;
    } else {
      // the pair {pos_a, pos_m} misses index 0, so 0 pairs with the rest
      cr.pairing_partner = 6 - pos_a - pos_m;
    }
  }
  cr.length = std::move(length);
  return cr;
}

std::array<std::array<int, 2>, 2> CrossRatio::pairs() const {
  int p = pairing_partner.value_or(1);
  std::array<int, 2> rest{};
  int k = 0;
  for (int i = 1; i < 4; ++i)
    if (i != p) rest[static_cast<size_t>(k++)] = entries[static_cast<size_t>(i)];
  return {{{entries[0], entries[static_cast<size_t>(p)]}, {rest[0], rest[1]}}};
}

LabeledDegree make_degree(int m, int d, const std::vector<long long>& alpha_in,
                          const std::vector<long long>& beta_in) {
  if (m < 2) throw ProblemError("ambient dimension must be at least 2");
  std::vector<long long> alpha = alpha_in, beta = beta_in;
  if (alpha.empty() && beta.empty() && d > 0) alpha = {d};  // plain degree
  long long balance = d;
  for (size_t i = 0; i < alpha.size(); ++i) balance -= static_cast<long long>(i + 1) * alpha[i];
  for (size_t i = 0; i < beta.size(); ++i) balance += static_cast<long long>(i + 1) * beta[i];
  if (balance != 0)
    throw ProblemError("degree balance violated: d - sum(i*alpha_i) + sum(i*beta_i) = " +
                       std::to_string(balance));

  LabeledDegree deg;
  deg.m = m;
  int label = 1;
  auto push = [&](IVec dir) {
    ProblemEnd e;
    e.label = label++;
    e.dir = std::move(dir);
    deg.ends.push_back(std::move(e));
  };
  IVec e0(static_cast<size_t>(m), 1);
  for (int i = 0; i < d; ++i) push(e0);
  for (int axis = 0; axis + 1 < m; ++axis) {
    IVec v = ivec_zero(m);
    v[static_cast<size_t>(axis)] = -1;
    for (int i = 0; i < d; ++i) push(v);
  }
  for (size_t w = 0; w < alpha.size(); ++w) {
    IVec v = ivec_zero(m);
    v[static_cast<size_t>(m - 1)] = -static_cast<long long>(w + 1);
    for (long long i = 0; i < alpha[w]; ++i) push(v);
  }
  for (size_t w = 0; w < beta.size(); ++w) {
    IVec v = ivec_zero(m);
    v[static_cast<size_t>(m - 1)] = static_cast<long long>(w + 1);
    for (long long i = 0; i < beta[w]; ++i) push(v);
  }

  IVec sum = ivec_zero(m);
  for (const auto& e : deg.ends) sum = ivec_add(sum, e.dir);
  if (!ivec_is_zero(sum)) throw ProblemError("degree directions do not sum to zero");
  // span check via rational rank
  {
    std::vector<std::vector<Rat>> rows;
    int rank = 0;
    for (const auto& e : deg.ends) {
      std::vector<Rat> v(static_cast<size_t>(m));
      for (int j = 0; j < m; ++j) v[static_cast<size_t>(j)] = Rat(e.dir[static_cast<size_t>(j)]);
      for (const auto& r : rows) {
        size_t p = 0;
        while (p < r.size() && r[p] == 0) ++p;
        if (p < r.size() && v[p] != 0) {
          Rat f = v[p] / r[p];
          for (size_t j = p; j < v.size(); ++j) v[j] -= f * r[j];
        }
      }
      if (std::any_of(v.begin(), v.end(), [](const Rat& x) { return x != 0; })) {
        rows.push_back(v);
        std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
          auto lead = [](const std::vector<Rat>& r) {
            size_t p = 0;
            while (p < r.size() && r[p] == 0) ++p;
            return p;
          };
          return lead(a) < lead(b);
        });
        ++rank;
      }
      if (rank == m) break;
    }
    if (rank < m)
      throw ProblemError("degree directions do not span the ambient space");
  }
  return deg;
}

const ProblemEnd* Problem::end_by_label(int label) const {
  for (const auto& e : ends)
    if (e.label == label) return &e;
  return nullptr;
}

std::vector<int> Problem::point_labels() const {
  std::vector<int> out;
  for (const auto& e : ends)
    if (e.cond == CondKind::Point) out.push_back(e.label);
  return out;
}

std::vector<int> Problem::labels_with(CondKind k) const {
  std::vector<int> out;
  for (const auto& e : ends)
    if (e.cond == k) out.push_back(e.label);
  return out;
}

bool Problem::standard_labels() const {
  int n = 0;
  for (const auto& e : ends)
    if (e.contracted()) {
      if (e.cond != CondKind::Point) return false;
      ++n;
    }
  std::set<int> labels;
  for (const auto& e : ends) labels.insert(e.label);
  if (static_cast<int>(labels.size()) != total_ends()) return false;
  int expect = 1;
  for (int l : labels)
    if (l != expect++) return false;
  for (const auto& e : ends)
    if (e.contracted() != (e.label <= n)) return false;
  return true;
}

void Problem::validate() const {
  std::set<int> labels;
  for (const auto& e : ends) {
    if (e.label <= 0) throw ProblemError("labels must be positive");
    if (!labels.insert(e.label).second)
      throw ProblemError("duplicate end label " + std::to_string(e.label));
    if (static_cast<int>(e.dir.size()) != m && !e.dir.empty())
      throw ProblemError("direction arity mismatch at label " + std::to_string(e.label));
    switch (e.cond) {
      case CondKind::Point:
        if (!e.contracted())
          throw ProblemError("point condition on non-contracted end " + std::to_string(e.label));
        break;
      case CondKind::ProjPoint:
      case CondKind::ProjLine: {
        if (e.contracted())
          throw ProblemError("tangency condition on contracted end " + std::to_string(e.label));
        IVec p = ivec_primitive(e.dir);
        for (int j = 0; j + 1 < m; ++j)
          if (p[static_cast<size_t>(j)] != 0)
            throw ProblemError("tangency condition on non-vertical end " + std::to_string(e.label));
        if (e.cond == CondKind::ProjLine && m == 2)
          throw ProblemError("codimension-two tangency has no content for m = 2");
        if (e.cond == CondKind::ProjLine && e.line.weight < 1)
          throw ProblemError("line end weight must be positive at label " + std::to_string(e.label));
        break;
      }
      case CondKind::EvLine:
        if (!e.contracted())
          throw ProblemError("line membership is a contracted-end condition");
        if (m != 2) throw ProblemError("EvLine conditions only arise for m = 2");
        break;
      case CondKind::None: break;
    }
  }
  for (const auto& cr : crossratios) {
    for (int entry : cr.entries) {
      const ProblemEnd* e = end_by_label(entry);
      if (!e) throw ProblemError("cross-ratio entry " + std::to_string(entry) + " is not a label");
      if (!e->contracted()) {
        IVec p = ivec_primitive(e->dir);
        for (int j = 0; j + 1 < m; ++j)
          if (p[static_cast<size_t>(j)] != 0)
            throw ProblemError("cross-ratio entry " + std::to_string(entry) +
                               " must be a contracted or vertical end");
      }
    }
  }
}

Problem assemble_problem(const LabeledDegree& degree, int n_points,
                         const std::vector<int>& eta_alpha,
                         const std::vector<int>& eta_beta,
                         const std::vector<int>& kappa_alpha,
                         const std::vector<int>& kappa_beta,
                         const std::map<int, long long>& line_end_weights,
                         std::vector<CrossRatio> crossratios, std::uint64_t seed) {
  Problem p;
  p.m = degree.m;
  p.seed = seed;
  for (int i = 1; i <= n_points; ++i) {
    ProblemEnd e;
    e.label = i;
    e.dir = ivec_zero(degree.m);
    e.cond = CondKind::Point;
    p.ends.push_back(e);
  }
  for (const auto& de : degree.ends) {
    ProblemEnd e = de;
    e.label = de.label + n_points;
    p.ends.push_back(e);
  }

  auto tag = [&](const std::vector<int>& labels, CondKind kind, bool alpha_side) {
    for (int l : labels) {
      bool found = false;
      for (auto& e : p.ends) {
        if (e.label != l) continue;
        found = true;
        if (e.cond != CondKind::None)
          throw ProblemError("label " + std::to_string(l) + " carries two tangency conditions");
        if (e.contracted())
          throw ProblemError("tangency label " + std::to_string(l) + " is a contracted end");
        long long zc = e.dir[static_cast<size_t>(degree.m - 1)];
        if ((alpha_side && zc >= 0) || (!alpha_side && zc <= 0))
          throw ProblemError("tangency label " + std::to_string(l) +
                             " listed on the wrong side for its direction");
        e.cond = kind;
        if (kind == CondKind::ProjLine) {
          auto it = line_end_weights.find(l);
          e.line.weight = it == line_end_weights.end() ? 1 : it->second;
        }
      }
      if (!found) throw ProblemError("unknown tangency label " + std::to_string(l));
    }
  };
  tag(eta_alpha, CondKind::ProjPoint, true);
  tag(eta_beta, CondKind::ProjPoint, false);
  tag(kappa_alpha, CondKind::ProjLine, true);
  tag(kappa_beta, CondKind::ProjLine, false);

  p.crossratios = std::move(crossratios);
  for (const auto& cr : p.crossratios)
    for (int entry : cr.entries) {
      const ProblemEnd* e = p.end_by_label(entry);
      if (e && e->cond != CondKind::None && e->cond != CondKind::Point)
        p.dual_use_labels.push_back(entry);
    }
  std::sort(p.dual_use_labels.begin(), p.dual_use_labels.end());
  p.dual_use_labels.erase(std::unique(p.dual_use_labels.begin(), p.dual_use_labels.end()),
                          p.dual_use_labels.end());
  p.validate();
  return p;
}

DimensionReport check_dimension(const Problem& p) {
  DimensionReport rep;
  long long n_deg = 0, n_pt = 0, n_eta = 0, n_kappa = 0, n_evline = 0, n_free_contracted = 0;
  for (const auto& e : p.ends) {
    if (e.contracted()) {
      if (e.cond == CondKind::Point) ++n_pt;
      else if (e.cond == CondKind::EvLine) ++n_evline;
      else ++n_free_contracted;
    } else {
      ++n_deg;
      if (e.cond == CondKind::ProjPoint) ++n_eta;
      if (e.cond == CondKind::ProjLine) ++n_kappa;
    }
  }
  long long l = static_cast<long long>(p.crossratios.size());
  rep.lhs = n_deg - 3 + p.m;
  // EvLine marked ends contribute net zero, free marked ends subtract one
  rep.rhs = (p.m - 1) * n_pt + l + (p.m - 1) * n_eta + (p.m - 2) * n_kappa - n_free_contracted;
  rep.pass = rep.lhs == rep.rhs;
  rep.detail = "#degree-3+m = " + std::to_string(rep.lhs) + " vs (m-1)n+l+(m-1)#eta+(m-2)#kappa" +
               (n_evline || n_free_contracted ? "+marked-end corrections" : "") + " = " +
               std::to_string(rep.rhs);
  return rep;
}

PositionedConditions sample_positions(const Problem& p, std::uint64_t seed, int resample_index) {
  PositionedConditions pos;
  pos.resample_index = resample_index;
  SplitMix64 rng(seed * 0x100000001b3ULL + 0x9e3779b9ULL * static_cast<std::uint64_t>(resample_index) + 1);
  const Int denom = Int(1) << 16;
  auto coord = [&]() { return Rat(Int(rng.box_numerator()), denom); };

  int point_rank = 0;
  for (const auto& e : p.ends) {
    if (e.cond == CondKind::Point) {
      RVec v(static_cast<size_t>(p.m));
      for (int j = 0; j + 1 < p.m; ++j) v[static_cast<size_t>(j)] = coord();
      v[static_cast<size_t>(p.m - 1)] = Rat(point_rank) * pos.z_gap + coord();
      pos.point_pos[e.label] = std::move(v);
      ++point_rank;
    } else if (e.cond == CondKind::ProjPoint) {
      RVec v(static_cast<size_t>(p.m - 1));
      for (auto& x : v) x = coord();
      pos.proj_point_pos[e.label] = std::move(v);
    } else if (e.cond == CondKind::ProjLine || e.cond == CondKind::EvLine) {
      LineInstance li;
      li.vertex = {coord(), coord()};
      li.weight = e.line.weight;
      li.degenerate = e.line.degenerate;
      li.kind = e.line.kind;
      pos.line_pos[e.label] = std::move(li);
    }
  }
  return pos;
}

}  // namespace crfd
