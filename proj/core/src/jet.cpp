#include "kkflat/jet.hpp"

#include <array>
#include <cmath>
#include <memory>
#include <mutex>

namespace kkflat {

namespace {

// Exponent vector of a monomial of degree <= 3 over kMaxDim variables,
// packed as up to three sorted variable slots (-1 = unused).
struct Mono {
  std::array<int, 3> v{-1, -1, -1};
  int deg = 0;
};

std::vector<Mono> enumerate_monomials(int dim) {
  std::vector<Mono> out;
  out.push_back({});
  for (int i = 0; i < dim; ++i) out.push_back({{i, -1, -1}, 1});
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) out.push_back({{i, j, -1}, 2});
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j)
      for (int k = j; k < dim; ++k) out.push_back({{i, j, k}, 3});
  return out;
}

}  // namespace

JetLayout::JetLayout(int dim) : dim_(dim) {
  const auto monos = enumerate_monomials(dim);
  size_ = static_cast<int>(monos.size());

  idx2_.assign(dim * dim, -1);
  idx3_.assign(dim * dim * dim, -1);
  for (int m = 0; m < size_; ++m) {
    const Mono& mo = monos[m];
    if (mo.deg == 2) {
      int i = mo.v[0], j = mo.v[1];
      idx2_[i * dim + j] = m;
      idx2_[j * dim + i] = m;
    } else if (mo.deg == 3) {
      int s[3] = {mo.v[0], mo.v[1], mo.v[2]};
      // all orderings map to the same slot
      int p[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                     {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
      for (auto& q : p)
        idx3_[(s[q[0]] * dim + s[q[1]]) * dim + s[q[2]]] = m;
    }
  }

  // product table: every ordered pair with total degree <= 3
  auto merge = [&](const Mono& a, const Mono& b) -> int {
    int s[3], n = 0;
    for (int t = 0; t < a.deg; ++t) s[n++] = a.v[t];
    for (int t = 0; t < b.deg; ++t) s[n++] = b.v[t];
    if (n == 0) return 0;
    // insertion sort of at most 3 entries
    for (int t = 1; t < n; ++t)
      for (int u = t; u > 0 && s[u - 1] > s[u]; --u) std::swap(s[u - 1], s[u]);
    if (n == 1) return 1 + s[0];
    if (n == 2) return idx2_[s[0] * dim + s[1]];
    return idx3_[(s[0] * dim + s[1]) * dim + s[2]];
  };
  for (int a = 0; a < size_; ++a)
    for (int b = 0; b < size_; ++b)
      if (monos[a].deg + monos[b].deg <= 3)
        mul_.push_back({static_cast<std::uint16_t>(a),
                        static_cast<std::uint16_t>(b),
                        static_cast<std::uint16_t>(merge(monos[a], monos[b]))});

  // differentiation tables: c'_{alpha - e_i} += alpha_i c_alpha
  diff_begin_.assign(dim + 1, 0);
  for (int var = 0; var < dim; ++var) {
    for (int m = 0; m < size_; ++m) {
      const Mono& mo = monos[m];
      int count = 0;
      for (int t = 0; t < mo.deg; ++t) count += (mo.v[t] == var);
      if (count == 0) continue;
      // remove one factor of var
      int s[3], n = 0;
      bool removed = false;
      for (int t = 0; t < mo.deg; ++t) {
        if (!removed && mo.v[t] == var) {
          removed = true;
          continue;
        }
        s[n++] = mo.v[t];
      }
      int dst = 0;
      if (n == 1) dst = 1 + s[0];
      else if (n == 2) dst = idx2_[s[0] * dim + s[1]];
      diff_.push_back({static_cast<std::uint16_t>(m),
                       static_cast<std::uint16_t>(dst),
                       static_cast<double>(count)});
    }
    diff_begin_[var + 1] = diff_.size();
  }
}

const JetLayout& JetLayout::get(int dim) {
  if (dim < 1 || dim > kMaxDim)
    throw DimensionError("Jet3 dimension must be in 1.." +
                         std::to_string(kMaxDim) + ", got " +
                         std::to_string(dim));
  static std::array<std::unique_ptr<const JetLayout>, kMaxDim + 1> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  if (!cache[dim]) cache[dim].reset(new JetLayout(dim));
  return *cache[dim];
}

Jet3::Jet3(const JetLayout& layout)
    : layout_(&layout), c_(layout.size(), 0.0) {}

Jet3 Jet3::constant(double value, int dim) {
  Jet3 j(JetLayout::get(dim));
  j.c_[0] = value;
  return j;
}

Jet3 Jet3::variable(int i, double x0, int dim) {
  if (i < 0 || i >= dim)
    throw DimensionError("variable index " + std::to_string(i) +
                         " out of range for dim " + std::to_string(dim));
  Jet3 j(JetLayout::get(dim));
  j.c_[0] = x0;
  j.c_[1 + i] = 1.0;
  return j;
}

void Jet3::check_same(const Jet3& o) const {
  if (layout_ != o.layout_)
    throw DimensionError("jet dimension mismatch: " + std::to_string(dim()) +
                         " vs " + std::to_string(o.dim()));
}

double Jet3::d1(int i) const { return c_[layout_->index1(i)]; }

double Jet3::d2(int i, int j) const {
  double mult = (i == j) ? 2.0 : 1.0;
  return mult * c_[layout_->index2(i, j)];
}

double Jet3::d3(int i, int j, int k) const {
  double mult;
  if (i == j && j == k) mult = 6.0;
  else if (i == j || j == k || i == k) mult = 2.0;
  else mult = 1.0;
  return mult * c_[layout_->index3(i, j, k)];
}

Jet3 Jet3::partial(int var) const {
  if (var < 0 || var >= dim())
    throw DimensionError("partial: variable out of range");
  Jet3 out(*layout_);
  for (const auto& e : layout_->diff_table(var))
    out.c_[e.dst] += e.factor * c_[e.src];
  return out;
}

Jet3& Jet3::operator+=(const Jet3& o) {
  check_same(o);
  for (std::size_t t = 0; t < c_.size(); ++t) c_[t] += o.c_[t];
  return *this;
}

Jet3& Jet3::operator-=(const Jet3& o) {
  check_same(o);
  for (std::size_t t = 0; t < c_.size(); ++t) c_[t] -= o.c_[t];
  return *this;
}

Jet3& Jet3::operator*=(double s) {
  for (double& x : c_) x *= s;
  return *this;
}

Jet3& Jet3::add_product(const Jet3& a, const Jet3& b) {
  check_same(a);
  a.check_same(b);
  const double* pa = a.c_.data();
  const double* pb = b.c_.data();
  double* pc = c_.data();
  for (const auto& e : layout_->mul_table())
    pc[e.target] += pa[e.a] * pb[e.b];
  return *this;
}

Jet3& Jet3::add_scaled(const Jet3& a, double s) {
  check_same(a);
  for (std::size_t t = 0; t < c_.size(); ++t) c_[t] += s * a.c_[t];
  return *this;
}

Jet3 operator+(const Jet3& a, const Jet3& b) {
  Jet3 out = a;
  out += b;
  return out;
}

Jet3 operator-(const Jet3& a, const Jet3& b) {
  Jet3 out = a;
  out -= b;
  return out;
}

Jet3 operator-(const Jet3& a) {
  Jet3 out = a;
  out *= -1.0;
  return out;
}

Jet3 operator*(const Jet3& a, const Jet3& b) {
  a.check_same(b);
  Jet3 out(*a.layout_);
  out.add_product(a, b);
  return out;
}

Jet3 operator/(const Jet3& a, const Jet3& b) { return a * reciprocal(b); }

Jet3 operator*(const Jet3& a, double s) {
  Jet3 out = a;
  out *= s;
  return out;
}

Jet3 operator+(const Jet3& a, double s) {
  Jet3 out = a;
  out.c_[0] += s;
  return out;
}

Jet3 operator-(double s, const Jet3& a) {
  Jet3 out = -a;
  out.c_[0] += s;
  return out;
}

Jet3 operator/(double s, const Jet3& a) { return reciprocal(a) * s; }

Jet3 Jet3::compose(const Jet3& a, double t0, double t1, double t2, double t3) {
  // Horner in u = a - a0; u has zero constant term so u^4 truncates away.
  Jet3 u = a;
  u.c_[0] = 0.0;
  Jet3 acc = Jet3::constant(t3, a.dim());
  for (double t : {t2, t1}) {
    Jet3 next(*a.layout_);
    next.add_product(acc, u);
    next.c_[0] += t;
    acc = std::move(next);
  }
  Jet3 out(*a.layout_);
  out.add_product(acc, u);
  out.c_[0] += t0;
  return out;
}

Jet3 sqrt(const Jet3& a) {
  double v = a.value();
  if (!(v > 0.0)) throw DomainError("sqrt of non-positive jet value");
  double s = std::sqrt(v);
  return Jet3::compose(a, s, 0.5 / s, -1.0 / (8.0 * s * v),
                       1.0 / (16.0 * s * v * v));
}

Jet3 exp(const Jet3& a) {
  double e = std::exp(a.value());
  return Jet3::compose(a, e, e, e / 2.0, e / 6.0);
}

Jet3 sin(const Jet3& a) {
  double s = std::sin(a.value()), c = std::cos(a.value());
  return Jet3::compose(a, s, c, -s / 2.0, -c / 6.0);
}

Jet3 cos(const Jet3& a) {
  double s = std::sin(a.value()), c = std::cos(a.value());
  return Jet3::compose(a, c, -s, -c / 2.0, s / 6.0);
}

Jet3 atan(const Jet3& a) {
  double v = a.value();
  double w = 1.0 + v * v;
  // f' = 1/w, f'' = -2v/w^2, f''' = (6v^2-2)/w^3
  return Jet3::compose(a, std::atan(v), 1.0 / w, -v / (w * w),
                       (6.0 * v * v - 2.0) / (6.0 * w * w * w));
}

Jet3 reciprocal(const Jet3& a) {
  double v = a.value();
  if (v == 0.0) throw DomainError("reciprocal of zero-valued jet");
  double iv = 1.0 / v;
  return Jet3::compose(a, iv, -iv * iv, iv * iv * iv, -iv * iv * iv * iv);
}

Jet3 pow_int(const Jet3& a, int n) {
  if (n < 0) return reciprocal(pow_int(a, -n));
  Jet3 result = Jet3::constant(1.0, a.dim());
  Jet3 base = a;
  while (n > 0) {
    if (n & 1) result = result * base;
    base = base * base;
    n >>= 1;
  }
  return result;
}

}  // namespace kkflat
