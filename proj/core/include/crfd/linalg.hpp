#pragma once

// Exact linear algebra on small dense systems: fraction-free determinants
// over the integers and rational elimination for solving / kernels.

#include "crfd/numeric.hpp"

#include <optional>
#include <vector>

namespace crfd {

using IMat = std::vector<std::vector<Int>>;
using RMat = std::vector<std::vector<Rat>>;

// Bareiss fraction-free elimination. Exact, integer-only intermediates.
Int det_bareiss(IMat a);

// Solves the square system a*x = b exactly. Returns nullopt when a is
// singular.
std::optional<RVec> solve_square(const IMat& a, const RVec& b);

// Row-reduces the (possibly non-square) system [a|b]. Returns the rank of a
// and flags inconsistency (a row 0 = nonzero).
struct ReducedSystem {
  RMat a;
  RVec b;
  std::vector<int> pivot_col;  // per pivot row
  int rank = 0;
  bool consistent = true;
};
ReducedSystem row_reduce(const IMat& a, const RVec& b);

// One kernel vector of a, scaled to a primitive integer vector, when the
// kernel is exactly one-dimensional; nullopt otherwise.
std::optional<std::vector<Int>> kernel_vector(const IMat& a);

// A particular solution of a*x = b for a consistent reduced system
// (free variables set to zero).
RVec particular_solution(const ReducedSystem& rs, int n_cols);

}  // namespace crfd
