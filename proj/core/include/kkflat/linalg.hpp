#pragma once

#include <cmath>
#include <vector>

#include "kkflat/errors.hpp"
#include "kkflat/jet.hpp"
#include "kkflat/tensor.hpp"

namespace kkflat {

inline double pivot_magnitude(double x) { return std::fabs(x); }
inline double pivot_magnitude(const Jet3& x) { return std::fabs(x.value()); }

inline double reciprocal_of(double x) { return 1.0 / x; }
inline Jet3 reciprocal_of(const Jet3& x) { return reciprocal(x); }

// Gauss-Jordan inverse with partial pivoting. Works for double and Jet3
// entries (pivoting on the value part); arbitrary signature, no symmetry
// assumed. Throws SingularMatrixError when the best pivot falls below tol.
template <typename T>
MultiArray<T> invert_matrix(const MultiArray<T>& m, double tol = 1e-12) {
  if (m.rank() != 2 || m.dim(0) != m.dim(1))
    throw DimensionError("invert_matrix: square rank-2 array required");
  const int n = m.dim(0);
  MultiArray<T> a = m;
  MultiArray<T> inv = m;  // same shape/layout
  // identity of matching scalar type
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      T zero = a.at(i, j);
      zero *= 0.0;
      if (i == j) zero += 1.0;
      inv.at(i, j) = zero;
    }
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = pivot_magnitude(a.at(col, col));
    for (int r = col + 1; r < n; ++r) {
      double mag = pivot_magnitude(a.at(r, col));
      if (mag > best) {
        best = mag;
        piv = r;
      }
    }
    if (best < tol)
      throw SingularMatrixError("pivot " + std::to_string(best) +
                                " below threshold " + std::to_string(tol));
    if (piv != col)
      for (int j = 0; j < n; ++j) {
        std::swap(a.at(piv, j), a.at(col, j));
        std::swap(inv.at(piv, j), inv.at(col, j));
      }
    T ipiv = reciprocal_of(a.at(col, col));
    for (int j = 0; j < n; ++j) {
      a.at(col, j) = a.at(col, j) * ipiv;
      inv.at(col, j) = inv.at(col, j) * ipiv;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      T f = a.at(r, col);
      if (pivot_magnitude(f) == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        a.at(r, j) -= f * a.at(col, j);
        inv.at(r, j) -= f * inv.at(col, j);
      }
    }
  }
  return inv;
}

// Cholesky positive-definiteness probe for a symmetric matrix of doubles.
bool is_positive_definite(const MultiArray<double>& m);

}  // namespace kkflat
