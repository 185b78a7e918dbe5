#pragma once

#include <vector>

#include "isochron/poly.hpp"

namespace isochron {

/// Row-major dense matrix over Q for the small exact problems (kernels of
/// coefficient maps, surjectivity witnesses).
using RationalMatrix = std::vector<std::vector<Rational>>;
using RationalVector = std::vector<Rational>;

/// Reduced row echelon form; returns the pivot columns.
std::vector<int> rref(RationalMatrix &m);
int rank(RationalMatrix m);
/// Basis of {v : m v = 0}.
std::vector<RationalVector> nullspace(RationalMatrix m);
/// {v : a v = 0} == {v : b v = 0}.
bool same_kernel(const RationalMatrix &a, const RationalMatrix &b);
RationalVector multiply(const RationalMatrix &m, const RationalVector &v);

} // namespace isochron
