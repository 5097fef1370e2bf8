#pragma once

// Data model: labeled degrees, conditions, dimension bookkeeping and
// seeded sampling of positions in stretched configuration.

#include "crfd/numeric.hpp"

#include <array>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace crfd {

struct ProblemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Condition attached to a single labeled end.
//   None      - unconditioned
//   Point     - full point condition on a contracted end (m rows)
//   ProjPoint - codim-1 tangency P on a vertical end, point in R^{m-1}
//   ProjLine  - codim-2 tangency L on a vertical end, line in R^2 (m = 3)
//   EvLine    - contracted marked point constrained to a line in R^2 (m = 2)
enum class CondKind { None, Point, ProjPoint, ProjLine, EvLine };

enum class DegLineKind { Vertical, Horizontal, Diagonal };  // L10, L01, L1-1

// Constraint-row functional of a degenerated line, (1,0) / (0,1) / (1,-1).
std::array<long long, 2> degline_functional(DegLineKind k);

// Line-type condition payload; positions live in PositionedConditions.
struct LineCond {
  bool degenerate = false;
  DegLineKind kind = DegLineKind::Vertical;  // for degenerate lines
  long long weight = 1;                      // multi-line end weight
};

struct ProblemEnd {
  int label = 0;
  IVec dir;  // zero vector for contracted ends
  CondKind cond = CondKind::None;
  LineCond line;  // valid when cond is ProjLine / EvLine

  bool contracted() const { return ivec_is_zero(dir); }
  long long weight() const { return ivec_weight(dir); }
};

// Degenerated cross-ratio when length is absent; entries are end labels.
// The pairing is remembered when known (it never changes counts but
// selects concrete resolutions and length rows).
struct CrossRatio {
  std::array<int, 4> entries{};       // sorted ascending
  std::optional<int> pairing_partner; // index in entries paired with entries[0]
  std::optional<Rat> length;

  bool degenerated() const { return !length.has_value(); }
  // pairs as ((entries[0], p), (q, r)) with canonical fallback partner 1
  std::array<std::array<int, 2>, 2> pairs() const;
  static CrossRatio make(std::array<int, 4> entries,
                         std::optional<int> partner = std::nullopt,
                         std::optional<Rat> length = std::nullopt);
};

struct LabeledDegree {
  int m = 0;
  std::vector<ProblemEnd> ends;  // non-contracted, labels 1..#ends

  int size() const { return static_cast<int>(ends.size()); }
};

// Builds the degree with d ends of each standard direction e_0,-e_1,...,
// -e_{m-1} plus alpha_i ends of direction i*(-e_m) and beta_i ends of
// i*(+e_m). Empty alpha and beta stand for the plain degree, alpha = (d).
// Labels run 1..#ends: e_0 block, then -e_1..-e_{m-1} blocks, then alpha
// ends by increasing weight, then beta ends by increasing weight.
LabeledDegree make_degree(int m, int d, const std::vector<long long>& alpha,
                          const std::vector<long long>& beta);

struct Problem {
  int m = 2;
  std::vector<ProblemEnd> ends;  // sorted by label, contracted and not
  std::vector<CrossRatio> crossratios;
  std::uint64_t seed = 0;
  // labels carrying both a tangency condition and a cross-ratio entry,
  // permitted but surfaced in reports
  std::vector<int> dual_use_labels;

  const ProblemEnd* end_by_label(int label) const;
  std::vector<int> point_labels() const;      // contracted ends with Point
  std::vector<int> labels_with(CondKind k) const;
  int n_points() const { return static_cast<int>(point_labels().size()); }
  int total_ends() const { return static_cast<int>(ends.size()); }

  // Standard problem: contracted ends are exactly the point ends 1..n and
  // degree labels are n+1..n+#degree. Local vertex problems are not.
  bool standard_labels() const;

  void validate() const;  // throws ProblemError
};

// Assembles a standard problem: contracted point ends labeled 1..n, degree
// ends relabeled n+1..n+#degree in degree order, tangency label sets given
// in final (shifted) labels.
Problem assemble_problem(const LabeledDegree& degree, int n_points,
                         const std::vector<int>& eta_alpha,
                         const std::vector<int>& eta_beta,
                         const std::vector<int>& kappa_alpha,
                         const std::vector<int>& kappa_beta,
                         const std::map<int, long long>& line_end_weights,
                         std::vector<CrossRatio> crossratios, std::uint64_t seed);

struct DimensionReport {
  long long lhs = 0;  // #degree - 3 + m
  long long rhs = 0;  // (m-1) n + l + (m-1) #eta + (m-2) #kappa  (+ extras)
  bool pass = false;
  std::string detail;
};

DimensionReport check_dimension(const Problem& p);

struct LineInstance {
  RVec vertex;  // 2 coordinates
  long long weight = 1;
  bool degenerate = false;
  DegLineKind kind = DegLineKind::Vertical;
};

struct PositionedConditions {
  std::map<int, RVec> point_pos;       // point end label -> m coords
  std::map<int, RVec> proj_point_pos;  // eta end label -> m-1 coords
  std::map<int, LineInstance> line_pos;
  Rat epsilon = 1;
  Rat z_gap = Rat(1 << 20);
  int resample_index = 0;
};

// Deterministic per (problem, seed): coordinates are rationals with
// denominator 2^16 inside the unit box, point z-gaps of 2^20. Point
// z-order follows point label order.
PositionedConditions sample_positions(const Problem& p, std::uint64_t seed,
                                      int resample_index = 0);

}  // namespace crfd
