#include "crfd/linalg.hpp"

#include <cassert>

namespace crfd {

Rat rat_parse(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rat(Int(s));
    Int num(s.substr(0, slash));
    Int den(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator");
    return Rat(num, den);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a rational: '" + s + "'");
  }
}

Int det_bareiss(IMat a) {
  const size_t n = a.size();
  if (n == 0) return Int(1);
  for (const auto& row : a) assert(row.size() == n);
  Int sign = 1, prev = 1;
  for (size_t k = 0; k + 1 < n; ++k) {
    if (a[k][k] == 0) {
      size_t p = k + 1;
      while (p < n && a[p][k] == 0) ++p;
      if (p == n) return Int(0);
      std::swap(a[k], a[p]);
      sign = -sign;
    }
    for (size_t i = k + 1; i < n; ++i) {
      for (size_t j = k + 1; j < n; ++j) {
        a[i][j] = (a[k][k] * a[i][j] - a[i][k] * a[k][j]) / prev;
      }
      a[i][k] = 0;
    }
    prev = a[k][k];
  }
  return sign * a[n - 1][n - 1];
}

ReducedSystem row_reduce(const IMat& a, const RVec& b) {
  const size_t rows = a.size();
  const size_t cols = rows ? a[0].size() : 0;
  ReducedSystem rs;
  rs.a.assign(rows, std::vector<Rat>(cols, Rat(0)));
  rs.b.assign(rows, Rat(0));
  for (size_t i = 0; i < rows; ++i) {
    for (size_t j = 0; j < cols; ++j) rs.a[i][j] = Rat(a[i][j]);
    rs.b[i] = i < b.size() ? b[i] : Rat(0);
  }
  size_t r = 0;
  for (size_t c = 0; c < cols && r < rows; ++c) {
    size_t p = r;
    while (p < rows && rs.a[p][c] == 0) ++p;
    if (p == rows) continue;
    std::swap(rs.a[r], rs.a[p]);
    std::swap(rs.b[r], rs.b[p]);
    Rat piv = rs.a[r][c];
    for (size_t j = c; j < cols; ++j) rs.a[r][j] /= piv;
    rs.b[r] /= piv;
    for (size_t i = 0; i < rows; ++i) {
      if (i == r || rs.a[i][c] == 0) continue;
      Rat f = rs.a[i][c];
      for (size_t j = c; j < cols; ++j) rs.a[i][j] -= f * rs.a[r][j];
      rs.b[i] -= f * rs.b[r];
    }
    rs.pivot_col.push_back(static_cast<int>(c));
    ++r;
  }
  rs.rank = static_cast<int>(r);
  for (size_t i = r; i < rows; ++i) {
    if (rs.b[i] != 0) {
      rs.consistent = false;
      break;
    }
  }
  return rs;
}

std::optional<RVec> solve_square(const IMat& a, const RVec& b) {
  const size_t n = a.size();
  ReducedSystem rs = row_reduce(a, b);
  if (rs.rank < static_cast<int>(n) || !rs.consistent) return std::nullopt;
  RVec x(n, Rat(0));
  for (int i = 0; i < rs.rank; ++i) x[static_cast<size_t>(rs.pivot_col[i])] = rs.b[i];
  return x;
}

std::optional<std::vector<Int>> kernel_vector(const IMat& a) {
  if (a.empty()) return std::nullopt;
  const size_t cols = a[0].size();
  ReducedSystem rs = row_reduce(a, RVec(a.size(), Rat(0)));
  if (rs.rank != static_cast<int>(cols) - 1) return std::nullopt;
  // exactly one free column
  std::vector<bool> is_pivot(cols, false);
  for (int c : rs.pivot_col) is_pivot[static_cast<size_t>(c)] = true;
  size_t free_col = 0;
  while (free_col < cols && is_pivot[free_col]) ++free_col;
  RVec k(cols, Rat(0));
  k[free_col] = 1;
  for (int i = 0; i < rs.rank; ++i)
    k[static_cast<size_t>(rs.pivot_col[i])] = -rs.a[i][free_col];
  // clear denominators, divide by content
  Int lcm = 1;
  for (const Rat& x : k) lcm = boost::multiprecision::lcm(lcm, Int(denominator(x)));
  std::vector<Int> ik(cols);
  Int g = 0;
  for (size_t i = 0; i < cols; ++i) {
    ik[i] = Int(numerator(k[i])) * (lcm / Int(denominator(k[i])));
    g = boost::multiprecision::gcd(g, ik[i]);
  }
  if (g > 1)
    for (auto& x : ik) x /= g;
  return ik;
}

RVec particular_solution(const ReducedSystem& rs, int n_cols) {
  RVec x(static_cast<size_t>(n_cols), Rat(0));
  for (int i = 0; i < rs.rank; ++i) x[static_cast<size_t>(rs.pivot_col[i])] = rs.b[i];
  return x;
}

}  // namespace crfd
