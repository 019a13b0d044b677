#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kkflat/errors.hpp"

namespace kkflat {

// Shared per-dimension tables for Jet3 arithmetic: monomial indexing in
// graded symmetric order (1, x_i, x_i x_j, x_i x_j x_k with i<=j<=k), the
// product table, and per-variable differentiation tables. Built once per
// dimension and immutable afterwards, so jets of equal dimension can share
// a pointer and all operations stay lock-free.
class JetLayout {
 public:
  static constexpr int kMaxDim = 16;

  struct MulEntry {
    std::uint16_t a, b, target;
  };
  struct DiffEntry {
    std::uint16_t src, dst;
    double factor;  // exponent of the differentiated variable in src
  };

  static const JetLayout& get(int dim);

  int dim() const { return dim_; }
  int size() const { return size_; }

  int index1(int i) const { return 1 + i; }
  int index2(int i, int j) const { return idx2_[i * dim_ + j]; }
  int index3(int i, int j, int k) const {
    return idx3_[(i * dim_ + j) * dim_ + k];
  }

  std::span<const MulEntry> mul_table() const { return mul_; }
  std::span<const DiffEntry> diff_table(int var) const {
    return {diff_.data() + diff_begin_[var],
            diff_begin_[var + 1] - diff_begin_[var]};
  }

 private:
  explicit JetLayout(int dim);

  int dim_ = 0;
  int size_ = 0;
  std::vector<int> idx2_, idx3_;
  std::vector<MulEntry> mul_;
  std::vector<DiffEntry> diff_;
  std::vector<std::size_t> diff_begin_;
};

// Truncated multivariate Taylor value of order 3: a function value together
// with all partial derivatives through third order in `dim` chart variables.
// Coefficients are stored Taylor-style (derivative / multi-index factorial),
// which makes multiplication a plain truncated convolution. Arithmetic on
// polynomials of degree <= 3 is exact up to roundoff; for smooth functions
// everything through order 3 is exact and order-4 content is dropped.
//
// partial() maps a jet to the jet of its derivative; the resulting
// third-order coefficients are zeroed (they would need fourth derivatives of
// the source), so a k-fold partial leaves orders <= 3-k trustworthy.
class Jet3 {
 public:
  Jet3() = default;

  static Jet3 constant(double value, int dim);
  // A coordinate jet: value x0, first derivative 1 in slot i.
  static Jet3 variable(int i, double x0, int dim);

  bool empty() const { return layout_ == nullptr; }
  int dim() const { return layout_ ? layout_->dim() : 0; }
  const JetLayout& layout() const { return *layout_; }

  double value() const { return c_[0]; }
  double d1(int i) const;
  double d2(int i, int j) const;
  double d3(int i, int j, int k) const;

  std::span<const double> coeffs() const { return c_; }
  std::span<double> coeffs() { return c_; }

  // d/dx_var as a jet (top-order coefficients zeroed).
  Jet3 partial(int var) const;

  Jet3& operator+=(const Jet3& o);
  Jet3& operator-=(const Jet3& o);
  Jet3& operator*=(double s);
  Jet3& operator+=(double s) { c_[0] += s; return *this; }
  Jet3& operator-=(double s) { c_[0] -= s; return *this; }

  // this += a * b, accumulating in place. The workhorse of contractions.
  Jet3& add_product(const Jet3& a, const Jet3& b);
  Jet3& add_scaled(const Jet3& a, double s);

  friend Jet3 operator+(const Jet3& a, const Jet3& b);
  friend Jet3 operator-(const Jet3& a, const Jet3& b);
  friend Jet3 operator*(const Jet3& a, const Jet3& b);
  friend Jet3 operator/(const Jet3& a, const Jet3& b);
  friend Jet3 operator-(const Jet3& a);

  friend Jet3 operator*(const Jet3& a, double s);
  friend Jet3 operator*(double s, const Jet3& a) { return a * s; }
  friend Jet3 operator/(const Jet3& a, double s) { return a * (1.0 / s); }
  friend Jet3 operator+(const Jet3& a, double s);
  friend Jet3 operator+(double s, const Jet3& a) { return a + s; }
  friend Jet3 operator-(const Jet3& a, double s) { return a + (-s); }
  friend Jet3 operator-(double s, const Jet3& a);
  friend Jet3 operator/(double s, const Jet3& a);

  // Composition with a scalar function given by its Taylor coefficients
  // at a.value(): f(a) = t0 + t1 u + t2 u^2 + t3 u^3, u = a - a.value().
  static Jet3 compose(const Jet3& a, double t0, double t1, double t2,
                      double t3);

 private:
  explicit Jet3(const JetLayout& layout);
  void check_same(const Jet3& o) const;

  const JetLayout* layout_ = nullptr;
  std::vector<double> c_;
};

Jet3 sqrt(const Jet3& a);
Jet3 exp(const Jet3& a);
Jet3 sin(const Jet3& a);
Jet3 cos(const Jet3& a);
Jet3 atan(const Jet3& a);
Jet3 reciprocal(const Jet3& a);
Jet3 pow_int(const Jet3& a, int n);

}  // namespace kkflat
