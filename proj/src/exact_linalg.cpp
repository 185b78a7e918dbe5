#include "isochron/exact_linalg.hpp"

namespace isochron {

std::vector<int> rref(RationalMatrix &m) {
  std::vector<int> pivots;
  if (m.empty())
    return pivots;
  const std::size_t rows = m.size(), cols = m.front().size();
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && m[p][c] == 0)
      ++p;
    if (p == rows)
      continue;
    std::swap(m[p], m[r]);
    const Rational inv = 1 / m[r][c];
    for (auto &v : m[r])
      v *= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || m[i][c] == 0)
        continue;
      const Rational f = m[i][c];
      for (std::size_t j = 0; j < cols; ++j)
        m[i][j] -= f * m[r][j];
    }
    pivots.push_back(static_cast<int>(c));
    ++r;
  }
  return pivots;
}

int rank(RationalMatrix m) { return static_cast<int>(rref(m).size()); }

std::vector<RationalVector> nullspace(RationalMatrix m) {
  if (m.empty())
    return {};
  const std::size_t cols = m.front().size();
  const auto pivots = rref(m);
  std::vector<bool> is_pivot(cols, false);
  for (int c : pivots)
    is_pivot[c] = true;
  std::vector<RationalVector> basis;
  for (std::size_t free = 0; free < cols; ++free) {
    if (is_pivot[free])
      continue;
    RationalVector v(cols, Rational(0));
    v[free] = 1;
    for (std::size_t i = 0; i < pivots.size(); ++i)
      v[pivots[i]] = -m[i][free];
    basis.push_back(std::move(v));
  }
  return basis;
}

bool same_kernel(const RationalMatrix &a, const RationalMatrix &b) {
  RationalMatrix stacked = a;
  stacked.insert(stacked.end(), b.begin(), b.end());
  const int ra = rank(a), rb = rank(b), rs = rank(stacked);
  return ra == rs && rb == rs;
}

RationalVector multiply(const RationalMatrix &m, const RationalVector &v) {
  RationalVector out(m.size(), Rational(0));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j)
      out[i] += m[i][j] * v[j];
  return out;
}

} // namespace isochron
