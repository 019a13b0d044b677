#include "kkflat/geom.hpp"

#include <cmath>
#include <string>

#include "kkflat/errors.hpp"
#include "kkflat/linalg.hpp"

namespace kkflat {

bool ChartDomain::contains(std::span<const double> p) const {
  if (static_cast<int>(p.size()) != dim()) return false;
  for (int i = 0; i < dim(); ++i)
    if (p[i] < box[i][0] || p[i] > box[i][1]) return false;
  return true;
}

std::vector<double> ChartDomain::sample(SplitMix64& rng) const {
  std::vector<double> p(dim());
  for (int i = 0; i < dim(); ++i) {
    double w = box[i][1] - box[i][0];
    p[i] = rng.uniform(box[i][0] + shrink * w, box[i][1] - shrink * w);
  }
  return p;
}

std::vector<std::vector<double>> sample_points(const ChartDomain& domain,
                                               int count, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<std::vector<double>> pts;
  pts.reserve(count);
  for (int i = 0; i < count; ++i) pts.push_back(domain.sample(rng));
  return pts;
}

MetricField::MetricField(int dim, std::vector<int> signature,
                         ChartDomain domain, EvalFn eval)
    : dim_(dim),
      signature_(std::move(signature)),
      domain_(std::move(domain)),
      eval_(std::move(eval)) {
  if (domain_.dim() != dim_)
    throw DimensionError("MetricField: domain dimension mismatch");
}

MultiArray<Jet3> MetricField::eval(std::span<const double> point,
                                   JetSpace space) const {
  if (static_cast<int>(point.size()) != dim_)
    throw DimensionError("MetricField::eval: point has wrong dimension");
  if (!domain_.contains(point))
    throw DomainError("MetricField::eval: point outside chart domain");
  std::vector<Jet3> coords;
  coords.reserve(dim_);
  for (int i = 0; i < dim_; ++i)
    coords.push_back(Jet3::variable(space.offset + i, point[i], space.jet_dim));
  MultiArray<Jet3> g = eval_(coords);
  if (g.rank() != 2 || g.dim(0) != dim_ || g.dim(1) != dim_)
    throw DimensionError("MetricField::eval: component shape mismatch");
  for (int i = 0; i < dim_; ++i)
    for (int j = i + 1; j < dim_; ++j)
      if (std::fabs(g.at(i, j).value() - g.at(j, i).value()) > 1e-14)
        throw InvariantError("MetricField::eval: metric not symmetric at (" +
                             std::to_string(i) + "," + std::to_string(j) + ")");
  return g;
}

MultiArray<double> values(const MultiArray<Jet3>& jets) {
  MultiArray<double> out(jets.dims(), 0.0);
  for (std::size_t i = 0; i < jets.size(); ++i) out[i] = jets[i].value();
  return out;
}

namespace {

// Gamma_{JK}^L from metric jets; partial derivatives taken at var_offset.
MultiArray<Jet3> christoffel_jets(const MultiArray<Jet3>& g,
                                  const MultiArray<Jet3>& ginv, int offset) {
  const int n = g.dim(0);
  const int jd = g.at(0, 0).dim();
  const Jet3 zero = Jet3::constant(0.0, jd);
  MultiArray<Jet3> dg(std::vector<int>{n, n, n}, zero);  // dg(J,K,M) = d_J g_{KM}
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int m = 0; m < n; ++m) dg.at(j, k, m) = g.at(k, m).partial(offset + j);
  MultiArray<Jet3> gamma(std::vector<int>{n, n, n}, zero);
  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k) {
      for (int l = 0; l < n; ++l) {
        Jet3 s = zero;
        for (int m = 0; m < n; ++m) {
          Jet3 t = dg.at(j, k, m) + dg.at(k, j, m) - dg.at(m, j, k);
          s.add_product(ginv.at(l, m), t);
        }
        s *= 0.5;
        gamma.at(j, k, l) = s;
        gamma.at(k, j, l) = std::move(s);
      }
    }
  return gamma;
}

}  // namespace

CurvatureJets curvature_jets(const MetricField& m, std::span<const double> pt,
                             JetSpace space) {
  CurvatureJets out;
  out.dim = m.dim();
  out.space = space;
  const int n = m.dim();
  const int off = space.offset;
  out.g = m.eval(pt, space);
  out.ginv = invert_matrix(out.g, 1e-10);
  out.gamma = christoffel_jets(out.g, out.ginv, off);

  const Jet3 zero = Jet3::constant(0.0, space.jet_dim);
  // P(I,J,K,L) = sum_M Gamma_{IM}^L Gamma_{JK}^M
  MultiArray<Jet3> P(std::vector<int>{n, n, n, n}, zero);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          Jet3& s = P.at(i, j, k, l);
          for (int mm = 0; mm < n; ++mm)
            s.add_product(out.gamma.at(i, mm, l), out.gamma.at(j, k, mm));
        }
  out.riemann = MultiArray<Jet3>(std::vector<int>{n, n, n, n}, zero);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          Jet3 r = out.gamma.at(j, k, l).partial(off + i) -
                   out.gamma.at(i, k, l).partial(off + j) +
                   P.at(i, j, k, l) - P.at(j, i, k, l);
          out.riemann.at(j, i, k, l) = -r;
          out.riemann.at(i, j, k, l) = std::move(r);
        }

  out.riemann_low = MultiArray<Jet3>(std::vector<int>{n, n, n, n}, zero);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          Jet3 s = zero;
          for (int mm = 0; mm < n; ++mm)
            s.add_product(out.riemann.at(i, j, k, mm), out.g.at(mm, l));
          out.riemann_low.at(j, i, k, l) = -s;
          out.riemann_low.at(i, j, k, l) = std::move(s);
        }

  out.ricci = MultiArray<Jet3>(std::vector<int>{n, n}, zero);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet3 s = zero;
      for (int k = 0; k < n; ++k) s += out.riemann.at(i, k, j, k);
      out.ricci.at(i, j) = std::move(s);
    }

  out.scalar = zero;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out.scalar.add_product(out.ginv.at(i, j), out.ricci.at(i, j));

  out.schouten = MultiArray<Jet3>(std::vector<int>{n, n}, zero);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet3 s = out.ricci.at(i, j);
      Jet3 t = zero;
      t.add_product(out.scalar, out.g.at(i, j));
      s.add_scaled(t, -1.0 / (2.0 * (n - 1)));
      out.schouten.at(i, j) = std::move(s);
    }

  if (n >= 3) {
    // nabla_K S_{JI}
    MultiArray<Jet3> ds(std::vector<int>{n, n, n}, zero);  // ds(K,J,I)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          Jet3 s = out.schouten.at(j, i).partial(off + k);
          for (int mm = 0; mm < n; ++mm) {
            Jet3 t = zero;
            t.add_product(out.gamma.at(k, j, mm), out.schouten.at(mm, i));
            t.add_product(out.gamma.at(k, i, mm), out.schouten.at(j, mm));
            s -= t;
          }
          ds.at(k, j, i) = std::move(s);
        }
    out.cotton = MultiArray<Jet3>(std::vector<int>{n, n, n}, zero);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          out.cotton.at(i, j, k) = ds.at(k, j, i) - ds.at(j, k, i);

    out.weyl = MultiArray<Jet3>(std::vector<int>{n, n, n, n}, zero);
    const double cw = 2.0 / (n - 2);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            // g_{I[K} S_{L]J} - g_{J[K} S_{L]I}
            Jet3 t = zero;
            t.add_product(out.g.at(i, k), out.schouten.at(l, j));
            Jet3 u = zero;
            u.add_product(out.g.at(i, l), out.schouten.at(k, j));
            u.add_product(out.g.at(j, k), out.schouten.at(l, i));
            t -= u;
            Jet3 v = zero;
            v.add_product(out.g.at(j, l), out.schouten.at(k, i));
            t += v;
            t *= 0.5 * cw;
            out.weyl.at(i, j, k, l) = out.riemann_low.at(i, j, k, l) - t;
          }
  }
  return out;
}

namespace {

DenseTensor tensor_from(const MultiArray<Jet3>& jets,
                        std::vector<Variance> var, double sign) {
  DenseTensor t(jets.dims(), std::move(var),
                std::vector<Block>(jets.rank(), Block::Total));
  for (std::size_t i = 0; i < jets.size(); ++i)
    t.comps()[i] = sign * jets[i].value();
  return t;
}

}  // namespace

CurvatureBundle curvature_bundle(const MetricField& m,
                                 std::span<const double> pt,
                                 Convention convention) {
  CurvatureJets geo = curvature_jets(m, pt, JetSpace{m.dim(), 0});
  const double cs = convention == Convention::Paper ? 1.0 : -1.0;
  CurvatureBundle b;
  b.point.assign(pt.begin(), pt.end());
  b.convention = convention;
  using V = Variance;
  b.gamma = tensor_from(geo.gamma, {V::Down, V::Down, V::Up}, 1.0);
  b.riemann = tensor_from(geo.riemann, {V::Down, V::Down, V::Down, V::Up}, 1.0);
  b.riemann_lowered =
      tensor_from(geo.riemann_low, {V::Down, V::Down, V::Down, V::Down}, 1.0);
  b.ricci = tensor_from(geo.ricci, {V::Down, V::Down}, cs);
  b.scalar = cs * geo.scalar.value();
  b.schouten = tensor_from(geo.schouten, {V::Down, V::Down}, cs);
  if (m.dim() >= 3) {
    b.cotton = tensor_from(geo.cotton, {V::Down, V::Down, V::Down}, cs);
    b.weyl =
        tensor_from(geo.weyl, {V::Down, V::Down, V::Down, V::Down}, 1.0);
  }
  return b;
}

DenseTensor christoffel(const MetricField& m, std::span<const double> pt) {
  CurvatureJets geo = curvature_jets(m, pt, JetSpace{m.dim(), 0});
  return tensor_from(geo.gamma, {Variance::Down, Variance::Down, Variance::Up},
                     1.0);
}

MultiArray<Jet3> cov_deriv_jets(const MultiArray<Jet3>& t,
                                std::span<const Variance> variances,
                                const MultiArray<Jet3>& gamma, int var_offset) {
  const int n = gamma.dim(0);
  const int rank = t.rank();
  const Jet3 zero = Jet3::constant(0.0, t.flat()[0].dim());
  std::vector<int> odims = t.dims();
  odims.push_back(n);
  MultiArray<Jet3> out(odims, zero);
  std::vector<int> idx(rank, 0), src(rank, 0);
  for (IndexIter it(t.dims()); !it.done(); it.next()) {
    auto base = *it;
    for (int s = 0; s < rank; ++s) idx[s] = base[s];
    for (int k = 0; k < n; ++k) {
      Jet3 s = t.flat()[t.offset(base)].partial(var_offset + k);
      for (int slot = 0; slot < rank; ++slot) {
        for (int mm = 0; mm < n; ++mm) {
          for (int q = 0; q < rank; ++q) src[q] = base[q];
          src[slot] = mm;
          const Jet3& comp = t.flat()[t.offset(src)];
          Jet3 term = zero;
          if (variances[slot] == Variance::Up)
            term.add_product(gamma.at(k, mm, base[slot]), comp);
          else
            term.add_product(gamma.at(k, base[slot], mm), comp);
          if (variances[slot] == Variance::Up)
            s += term;
          else
            s -= term;
        }
      }
      std::vector<int> oidx(base.begin(), base.end());
      oidx.push_back(k);
      out.flat()[out.offset(oidx)] = std::move(s);
    }
  }
  return out;
}

DenseTensor cov_deriv(
    const std::function<MultiArray<Jet3>(std::span<const Jet3>)>& field,
    std::span<const Variance> variances, const MetricField& m,
    std::span<const double> pt) {
  CurvatureJets geo = curvature_jets(m, pt, JetSpace{m.dim(), 0});
  std::vector<Jet3> coords;
  for (int i = 0; i < m.dim(); ++i)
    coords.push_back(Jet3::variable(i, pt[i], m.dim()));
  MultiArray<Jet3> t = field(coords);
  if (t.rank() != static_cast<int>(variances.size()))
    throw DimensionError("cov_deriv: variance list does not match field rank");
  MultiArray<Jet3> nab = cov_deriv_jets(t, variances, geo.gamma, 0);
  std::vector<Variance> var(variances.begin(), variances.end());
  var.push_back(Variance::Down);
  DenseTensor out(nab.dims(), var,
                  std::vector<Block>(nab.rank(), Block::Total));
  for (std::size_t i = 0; i < nab.size(); ++i) out.comps()[i] = nab[i].value();
  return out;
}

MultiArray<double> weyl_divergence(const CurvatureJets& geo) {
  const int n = geo.dim;
  const int off = geo.space.offset;
  const Jet3 zero = Jet3::constant(0.0, geo.space.jet_dim);
  // W_{IJK}^L = weyl(I,J,K,M) ginv(M,L)
  MultiArray<Jet3> wu(std::vector<int>{n, n, n, n}, zero);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          Jet3& s = wu.at(i, j, k, l);
          for (int mm = 0; mm < n; ++mm)
            s.add_product(geo.weyl.at(i, j, k, mm), geo.ginv.at(mm, l));
        }
  MultiArray<double> div(std::vector<int>{n, n, n}, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Jet3 s = zero;
        for (int l = 0; l < n; ++l) {
          s += wu.at(i, j, k, l).partial(off + l);
          for (int mm = 0; mm < n; ++mm) {
            Jet3 t = zero;
            t.add_product(geo.gamma.at(l, i, mm), wu.at(mm, j, k, l));
            t.add_product(geo.gamma.at(l, j, mm), wu.at(i, mm, k, l));
            t.add_product(geo.gamma.at(l, k, mm), wu.at(i, j, mm, l));
            s -= t;
            Jet3 u = zero;
            u.add_product(geo.gamma.at(l, mm, l), wu.at(i, j, k, mm));
            s += u;
          }
        }
        div.at(i, j, k) = s.value();
      }
  return div;
}

std::pair<double, double> cotton_weyl_residual(const CurvatureJets& geo) {
  const int n = geo.dim;
  MultiArray<double> div = weyl_divergence(geo);
  double max_res = 0.0, scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double lhs = (n - 3) * geo.cotton.at(j, k, i).value();
        double rhs = (n - 2) * div.at(i, j, k);
        max_res = std::max(max_res, std::fabs(lhs - rhs));
        scale = std::max({scale, std::fabs(lhs), std::fabs(rhs)});
      }
  return {max_res, scale};
}

}  // namespace kkflat
