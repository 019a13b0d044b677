#include "kkflat/kk.hpp"

#include <cmath>
#include <string>

#include "kkflat/errors.hpp"
#include "kkflat/linalg.hpp"

namespace kkflat {

namespace {

std::vector<Jet3> seed_coords(std::span<const double> p, int offset,
                              int jet_dim) {
  std::vector<Jet3> out;
  out.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    out.push_back(Jet3::variable(offset + static_cast<int>(i), p[i], jet_dim));
  return out;
}

}  // namespace

StructureConstants::StructureConstants(MultiArray<double> comps)
    : c(std::move(comps)) {
  if (c.rank() != 3 || c.dim(0) != c.dim(1) || c.dim(1) != c.dim(2))
    throw DimensionError("StructureConstants: cubic array required");
  const int n = c.dim(0);
  for (int b = 0; b < n; ++b)
    for (int c2 = 0; c2 < n; ++c2)
      for (int a = 0; a < n; ++a)
        if (c.at(b, c2, a) != -c.at(c2, b, a))
          throw InvariantError("StructureConstants: not antisymmetric");
  if (max_jacobi_violation() > 1e-12)
    throw InvariantError("StructureConstants: Jacobi identity violated");
}

StructureConstants StructureConstants::zero(int n) {
  StructureConstants s;
  s.c = MultiArray<double>(std::vector<int>{n, n, n}, 0.0);
  return s;
}

StructureConstants StructureConstants::su2(double scale) {
  MultiArray<double> c(std::vector<int>{3, 3, 3}, 0.0);
  c.at(0, 1, 2) = scale;
  c.at(1, 2, 0) = scale;
  c.at(2, 0, 1) = scale;
  c.at(1, 0, 2) = -scale;
  c.at(2, 1, 0) = -scale;
  c.at(0, 2, 1) = -scale;
  return StructureConstants(std::move(c));
}

double StructureConstants::max_jacobi_violation() const {
  const int n = count();
  double worst = 0.0;
  // c_{ab}^e c_{ec}^f + c_{bc}^e c_{ea}^f + c_{ca}^e c_{eb}^f = 0
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int cc = 0; cc < n; ++cc)
        for (int f = 0; f < n; ++f) {
          double s = 0.0;
          for (int e = 0; e < n; ++e)
            s += c.at(a, b, e) * c.at(e, cc, f) +
                 c.at(b, cc, e) * c.at(e, a, f) +
                 c.at(cc, a, e) * c.at(e, b, f);
          worst = std::max(worst, std::fabs(s));
        }
  return worst;
}

std::vector<double> KKPoint::joint() const {
  std::vector<double> z = x;
  z.insert(z.end(), y.begin(), y.end());
  return z;
}

KKPoint KKSpec::sample_point(SplitMix64& rng) const {
  KKPoint p;
  p.x = external.domain().sample(rng);
  p.y = internal.domain().sample(rng);
  return p;
}

std::vector<KKPoint> KKSpec::sample_points(int count,
                                           std::uint64_t seed) const {
  SplitMix64 rng(seed);
  std::vector<KKPoint> pts;
  pts.reserve(count);
  for (int i = 0; i < count; ++i) pts.push_back(sample_point(rng));
  return pts;
}

MultiArray<double> frame_brackets(const FrameField& frame,
                                  std::span<const double> y) {
  const int c = frame.manifold_dim, n = frame.count;
  auto yj = seed_coords(y, 0, c);
  MultiArray<Jet3> K = frame.eval(yj);
  MultiArray<double> br(std::vector<int>{n, n, c}, 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int i = 0; i < c; ++i) {
        double s = 0.0;
        for (int j = 0; j < c; ++j)
          s += K.at(a, j).value() * K.at(b, i).d1(j) -
               K.at(b, j).value() * K.at(a, i).d1(j);
        br.at(a, b, i) = s;
      }
  return br;
}

MultiArray<double> frame_gram(const KKSpec& spec, std::span<const double> y) {
  const int c = spec.c(), n = spec.n();
  auto yj = seed_coords(y, 0, c);
  MultiArray<Jet3> K = spec.killing.eval(yj);
  MultiArray<Jet3> kap = spec.internal.eval(y, JetSpace{c, 0});
  MultiArray<double> g(std::vector<int>{n, n}, 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double s = 0.0;
      for (int i = 0; i < c; ++i)
        for (int j = 0; j < c; ++j)
          s += K.at(a, i).value() * K.at(b, j).value() * kap.at(i, j).value();
      g.at(a, b) = s;
    }
  return g;
}

SpecValidation KKSpec::validate(int points, std::uint64_t seed,
                                double tol) const {
  SpecValidation v;
  const int cc = c(), nn = n();
  if (nn != gauge.count || nn != structure.count())
    throw DimensionError("KKSpec: killing/gauge/structure counts disagree");
  if (killing.manifold_dim != cc && nn > 0)
    throw DimensionError("KKSpec: frame manifold dimension mismatch");
  if (gauge.external_dim != d() && nn > 0)
    throw DimensionError("KKSpec: gauge external dimension mismatch");
  v.max_jacobi = structure.max_jacobi_violation();
  SplitMix64 rng(seed);
  for (int p = 0; p < points && nn > 0; ++p) {
    std::vector<double> y = internal.domain().sample(rng);
    auto yj = seed_coords(y, 0, cc);
    MultiArray<Jet3> K = killing.eval(yj);
    MultiArray<Jet3> kap = internal.eval(y, JetSpace{cc, 0});
    // Lie derivative of kappa along each K_a
    for (int a = 0; a < nn; ++a)
      for (int i = 0; i < cc; ++i)
        for (int j = 0; j < cc; ++j) {
          double s = 0.0;
          for (int m = 0; m < cc; ++m)
            s += K.at(a, m).value() * kap.at(i, j).d1(m) +
                 kap.at(m, j).value() * K.at(a, m).d1(i) +
                 kap.at(i, m).value() * K.at(a, m).d1(j);
          v.max_killing = std::max(v.max_killing, std::fabs(s));
        }
    // closure
    MultiArray<double> br = frame_brackets(killing, y);
    for (int a = 0; a < nn; ++a)
      for (int b = 0; b < nn; ++b)
        for (int i = 0; i < cc; ++i) {
          double s = br.at(a, b, i);
          for (int e = 0; e < nn; ++e)
            s -= structure.c.at(a, b, e) * K.at(e, i).value();
          v.max_closure = std::max(v.max_closure, std::fabs(s));
        }
  }
  v.pass = v.max_killing <= tol && v.max_closure <= tol && v.max_jacobi <= tol;
  return v;
}

MetricField assemble_metric(const KKSpec& spec) {
  SpecValidation v = spec.validate();
  if (!v.pass)
    throw InvariantError(
        "assemble_metric: spec failed validation (killing " +
        std::to_string(v.max_killing) + ", closure " +
        std::to_string(v.max_closure) + ", jacobi " +
        std::to_string(v.max_jacobi) + ")");
  const int d = spec.d(), c = spec.c(), n = spec.n(), D = spec.D();
  ChartDomain dom;
  dom.box = spec.external.domain().box;
  dom.box.insert(dom.box.end(), spec.internal.domain().box.begin(),
                 spec.internal.domain().box.end());
  std::vector<int> sig = spec.external.signature();
  sig.insert(sig.end(), spec.internal.signature().begin(),
             spec.internal.signature().end());
  // copies for the closure
  auto gx = spec.external;
  auto kap_f = spec.internal;
  auto frame = spec.killing;
  auto gauge = spec.gauge;
  auto eval = [d, c, n, D, gx, kap_f, frame, gauge](
                  std::span<const Jet3> coords) -> MultiArray<Jet3> {
    std::span<const Jet3> xj = coords.subspan(0, d);
    std::span<const Jet3> yj = coords.subspan(d, c);
    // component functions are reachable only through MetricField::eval,
    // which seeds its own jets; use the raw component closures instead
    (void)D;
    MultiArray<Jet3> g = gx.components()(xj);
    MultiArray<Jet3> kap = kap_f.components()(yj);
    const int jd = coords[0].dim();
    const Jet3 zero = Jet3::constant(0.0, jd);
    MultiArray<Jet3> out(std::vector<int>{d + c, d + c}, zero);
    for (int i = 0; i < c; ++i)
      for (int j = 0; j < c; ++j) out.at(d + i, d + j) = kap.at(i, j);
    if (n > 0) {
      MultiArray<Jet3> K = frame.eval(yj);
      MultiArray<Jet3> A = gauge.eval(xj);
      // KA^i_mu = K^i_a A^a_mu ; Klow_{a j} = kappa_{j k} K^k_a
      MultiArray<Jet3> KA(std::vector<int>{c, d}, zero);
      for (int i = 0; i < c; ++i)
        for (int mu = 0; mu < d; ++mu) {
          Jet3& s = KA.at(i, mu);
          for (int a = 0; a < n; ++a)
            s.add_product(K.at(a, i), A.at(a, mu));
        }
      MultiArray<Jet3> KAl(std::vector<int>{c, d}, zero);  // kappa_{ij} KA^j
      for (int i = 0; i < c; ++i)
        for (int mu = 0; mu < d; ++mu) {
          Jet3& s = KAl.at(i, mu);
          for (int j = 0; j < c; ++j) s.add_product(kap.at(i, j), KA.at(j, mu));
        }
      for (int mu = 0; mu < d; ++mu)
        for (int i = 0; i < c; ++i) {
          out.at(mu, d + i) = KAl.at(i, mu);
          out.at(d + i, mu) = KAl.at(i, mu);
        }
      for (int mu = 0; mu < d; ++mu)
        for (int nu = 0; nu < d; ++nu) {
          Jet3 s = g.at(mu, nu);
          for (int i = 0; i < c; ++i) s.add_product(KAl.at(i, mu), KA.at(i, nu));
          out.at(mu, nu) = std::move(s);
        }
    } else {
      for (int mu = 0; mu < d; ++mu)
        for (int nu = 0; nu < d; ++nu) out.at(mu, nu) = g.at(mu, nu);
    }
    return out;
  };
  return MetricField(D, sig, dom, eval);
}

MultiArray<Jet3> gauge_curvature_jets(const KKSpec& spec,
                                      std::span<const Jet3> xjets) {
  const int d = spec.d(), n = spec.n();
  const int jd = xjets.empty() ? 1 : xjets[0].dim();
  const Jet3 zero = Jet3::constant(0.0, jd);
  MultiArray<Jet3> F(std::vector<int>{n, d, d}, zero);
  if (n == 0) return F;
  MultiArray<Jet3> A = spec.gauge.eval(xjets);
  // partial index of x^mu inside the jet space: variable slot of xjets[mu]
  // (assembly always seeds external coordinates first)
  for (int a = 0; a < n; ++a)
    for (int mu = 0; mu < d; ++mu)
      for (int nu = 0; nu < d; ++nu) {
        Jet3 s = A.at(a, nu).partial(mu) - A.at(a, mu).partial(nu);
        for (int b = 0; b < n; ++b)
          for (int c2 = 0; c2 < n; ++c2) {
            double cv = spec.structure.c.at(b, c2, a);
            if (cv == 0.0) continue;
            Jet3 t = zero;
            t.add_product(A.at(b, mu), A.at(c2, nu));
            s.add_scaled(t, -cv);
          }
        F.at(a, mu, nu) = std::move(s);
      }
  return F;
}

GaugeCurvature gauge_curvature(const KKSpec& spec, const KKPoint& pt) {
  const int d = spec.d(), c = spec.c(), n = spec.n(), D = spec.D();
  auto xj = seed_coords(pt.x, 0, D);
  auto yj = seed_coords(pt.y, d, D);
  MultiArray<Jet3> F = gauge_curvature_jets(spec, xj);
  GaugeCurvature out;
  out.F_algebra = DenseTensor(
      std::vector<int>{n, d, d},
      {Variance::Up, Variance::Down, Variance::Down},
      {Block::Algebra, Block::External, Block::External});
  for (std::size_t i = 0; i < F.size(); ++i)
    out.F_algebra.comps()[i] = F[i].value();
  out.F_internal = DenseTensor(
      std::vector<int>{c, d, d},
      {Variance::Up, Variance::Down, Variance::Down},
      {Block::Internal, Block::External, Block::External});
  if (n > 0) {
    MultiArray<Jet3> K = spec.killing.eval(yj);
    for (int i = 0; i < c; ++i)
      for (int mu = 0; mu < d; ++mu)
        for (int nu = 0; nu < d; ++nu) {
          double s = 0.0;
          for (int a = 0; a < n; ++a)
            s += K.at(a, i).value() * F.at(a, mu, nu).value();
          out.F_internal.at(i, mu, nu) = s;
        }
  }
  return out;
}

PointContext::PointContext(const KKSpec& s, const KKPoint& p)
    : spec(&s), pt(p) {
  d = s.d();
  c = s.c();
  n = s.n();
  D = s.D();
  zero = Jet3::constant(0.0, D);
  ext = curvature_jets(s.external, pt.x, JetSpace{D, 0});
  intl = curvature_jets(s.internal, pt.y, JetSpace{D, d});
  auto xj = seed_coords(pt.x, 0, D);
  auto yj = seed_coords(pt.y, d, D);

  A = n > 0 ? s.gauge.eval(xj) : MultiArray<Jet3>(std::vector<int>{n, d}, zero);
  K = n > 0 ? s.killing.eval(yj)
            : MultiArray<Jet3>(std::vector<int>{n, c}, zero);
  F = gauge_curvature_jets(s, xj);

  Kl = MultiArray<Jet3>(std::vector<int>{n, c}, zero);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < c; ++i) {
      Jet3& t = Kl.at(a, i);
      for (int j = 0; j < c; ++j) t.add_product(intl.g.at(i, j), K.at(a, j));
    }

  nabKl = MultiArray<Jet3>(std::vector<int>{n, c, c}, zero);
  for (int a = 0; a < n; ++a)
    for (int m = 0; m < c; ++m)
      for (int i = 0; i < c; ++i) {
        Jet3 t = Kl.at(a, i).partial(d + m);
        for (int l = 0; l < c; ++l) {
          Jet3 u = zero;
          u.add_product(intl.gamma.at(m, i, l), Kl.at(a, l));
          t -= u;
        }
        nabKl.at(a, m, i) = std::move(t);
      }

  gbar = MultiArray<Jet3>(std::vector<int>{n, n}, zero);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Jet3& t = gbar.at(a, b);
      for (int i = 0; i < c; ++i) t.add_product(Kl.at(a, i), K.at(b, i));
    }

  Fup = MultiArray<Jet3>(std::vector<int>{n, d, d}, zero);
  Fmix = MultiArray<Jet3>(std::vector<int>{n, d, d}, zero);
  for (int a = 0; a < n; ++a)
    for (int mu = 0; mu < d; ++mu)
      for (int nu = 0; nu < d; ++nu) {
        Jet3& m = Fmix.at(a, mu, nu);
        for (int l = 0; l < d; ++l)
          m.add_product(F.at(a, mu, l), ext.ginv.at(l, nu));
      }
  for (int a = 0; a < n; ++a)
    for (int mu = 0; mu < d; ++mu)
      for (int nu = 0; nu < d; ++nu) {
        Jet3& u = Fup.at(a, mu, nu);
        for (int l = 0; l < d; ++l)
          u.add_product(ext.ginv.at(mu, l), Fmix.at(a, l, nu));
      }

  FF_ab = MultiArray<Jet3>(std::vector<int>{n, n}, zero);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Jet3& t = FF_ab.at(a, b);
      for (int mu = 0; mu < d; ++mu)
        for (int nu = 0; nu < d; ++nu)
          t.add_product(F.at(a, mu, nu), Fup.at(b, mu, nu));
    }

  F2mn = MultiArray<Jet3>(std::vector<int>{d, d}, zero);
  for (int mu = 0; mu < d; ++mu)
    for (int nu = 0; nu < d; ++nu) {
      Jet3& t = F2mn.at(mu, nu);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          Jet3 u = zero;
          for (int l = 0; l < d; ++l)
            u.add_product(F.at(a, mu, l), Fmix.at(b, nu, l));
          Jet3 w = zero;
          w.add_product(gbar.at(a, b), u);
          t += w;
        }
    }
  F2up = MultiArray<Jet3>(std::vector<int>{d, d}, zero);
  for (int mu = 0; mu < d; ++mu)
    for (int nu = 0; nu < d; ++nu) {
      Jet3& t = F2up.at(mu, nu);
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
          Jet3 u = zero;
          u.add_product(ext.ginv.at(mu, k), ext.ginv.at(nu, l));
          Jet3 w = zero;
          w.add_product(u, F2mn.at(k, l));
          t += w;
        }
    }
  F2ij = MultiArray<Jet3>(std::vector<int>{c, c}, zero);
  for (int i = 0; i < c; ++i)
    for (int j = 0; j < c; ++j) {
      Jet3& t = F2ij.at(i, j);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          Jet3 u = zero;
          u.add_product(Kl.at(a, i), Kl.at(b, j));
          Jet3 w = zero;
          w.add_product(u, FF_ab.at(a, b));
          t += w;
        }
    }
  F2 = zero;
  for (int mu = 0; mu < d; ++mu)
    for (int nu = 0; nu < d; ++nu)
      F2.add_product(F2mn.at(mu, nu), ext.ginv.at(mu, nu));

  Tup = MultiArray<Jet3>(std::vector<int>{d, d}, zero);
  for (int mu = 0; mu < d; ++mu)
    for (int nu = 0; nu < d; ++nu) {
      Jet3 t = F2up.at(mu, nu);
      Jet3 u = zero;
      u.add_product(F2, ext.ginv.at(mu, nu));
      t.add_scaled(u, -1.0 / (2.0 * (d - 1)));
      Tup.at(mu, nu) = std::move(t);
    }
}

MultiArray<Jet3> PointContext::hat_deriv(
    const MultiArray<Jet3>& X, std::span<const Variance> variances) const {
  const int rank = X.rank() - 1;  // trailing external slots
  std::vector<int> tdims(X.dims().begin() + 1, X.dims().end());
  std::vector<int> odims = {n, d};
  odims.insert(odims.end(), tdims.begin(), tdims.end());
  MultiArray<Jet3> out(odims, zero);
  std::vector<int> src(rank, 0);
  std::vector<int> xin(rank + 1, 0), oidx(rank + 2, 0);
  for (int a = 0; a < n; ++a) {
    for (IndexIter it(tdims); !it.done(); it.next()) {
      auto base = *it;
      xin[0] = a;
      for (int s = 0; s < rank; ++s) xin[1 + s] = base[s];
      const Jet3& val = X.flat()[X.offset(xin)];
      for (int kp = 0; kp < d; ++kp) {
        Jet3 s = val.partial(kp);
        for (int slot = 0; slot < rank; ++slot) {
          for (int mm = 0; mm < tdims[slot]; ++mm) {
            for (int q = 0; q < rank; ++q) src[q] = base[q];
            src[slot] = mm;
            xin[0] = a;
            for (int q = 0; q < rank; ++q) xin[1 + q] = src[q];
            const Jet3& comp = X.flat()[X.offset(xin)];
            Jet3 term = zero;
            if (variances[slot] == Variance::Up) {
              term.add_product(ext.gamma.at(kp, mm, base[slot]), comp);
              s += term;
            } else {
              term.add_product(ext.gamma.at(kp, base[slot], mm), comp);
              s -= term;
            }
          }
        }
        // gauge term: - c_{bc}^a A^b_k X^c
        for (int b = 0; b < n; ++b)
          for (int c2 = 0; c2 < n; ++c2) {
            double cv = spec->structure.c.at(b, c2, a);
            if (cv == 0.0) continue;
            xin[0] = c2;
            for (int q = 0; q < rank; ++q) xin[1 + q] = base[q];
            Jet3 term = zero;
            term.add_product(A.at(b, kp), X.flat()[X.offset(xin)]);
            s.add_scaled(term, -cv);
          }
        oidx[0] = a;
        oidx[1] = kp;
        for (int q = 0; q < rank; ++q) oidx[2 + q] = base[q];
        out.flat()[out.offset(oidx)] = std::move(s);
      }
    }
  }
  return out;
}

void PointContext::build_hatF() const {
  if (have_hatF_) return;
  const Variance dd[] = {Variance::Down, Variance::Down};
  const Variance uu[] = {Variance::Up, Variance::Up};
  hatF_dd_ = hat_deriv(F, dd);
  hatF_uu_ = hat_deriv(Fup, uu);
  have_hatF_ = true;
}

const MultiArray<Jet3>& PointContext::hatF_dd() const {
  build_hatF();
  return hatF_dd_;
}

const MultiArray<Jet3>& PointContext::hatF_uu() const {
  build_hatF();
  return hatF_uu_;
}

const MultiArray<Jet3>& PointContext::divF() const {
  if (!have_div_) {
    build_hatF();
    divF_ = MultiArray<Jet3>(std::vector<int>{n, d}, zero);
    for (int a = 0; a < n; ++a)
      for (int mu = 0; mu < d; ++mu) {
        Jet3 s = zero;
        for (int l = 0; l < d; ++l) s += hatF_uu_.at(a, l, mu, l);
        divF_.at(a, mu) = std::move(s);
      }
    have_div_ = true;
  }
  return divF_;
}

const MultiArray<Jet3>& PointContext::div1F() const {
  if (!have_div1_) {
    build_hatF();
    div1F_ = MultiArray<Jet3>(std::vector<int>{n, d}, zero);
    for (int a = 0; a < n; ++a)
      for (int mu = 0; mu < d; ++mu) {
        Jet3 s = zero;
        for (int l = 0; l < d; ++l) s += hatF_uu_.at(a, l, l, mu);
        div1F_.at(a, mu) = std::move(s);
      }
    have_div1_ = true;
  }
  return div1F_;
}

std::vector<Jet3> PointContext::hat_scalar(const Jet3& f) const {
  std::vector<Jet3> out(d, zero);
  for (int mu = 0; mu < d; ++mu) {
    Jet3 s = f.partial(mu);
    for (int i = 0; i < c; ++i) {
      Jet3 Ai = zero;
      for (int a = 0; a < n; ++a) Ai.add_product(K.at(a, i), A.at(a, mu));
      Jet3 t = zero;
      t.add_product(Ai, f.partial(d + i));
      s -= t;
    }
    out[mu] = std::move(s);
  }
  return out;
}

DenseTensor hatted_deriv_F(const KKSpec& spec, const KKPoint& pt) {
  PointContext ctx(spec, pt);
  const int d = ctx.d, c = ctx.c, n = ctx.n;
  const auto& h = ctx.hatF_dd();
  DenseTensor out(std::vector<int>{c, d, d, d},
                  {Variance::Up, Variance::Down, Variance::Down,
                   Variance::Down},
                  {Block::Internal, Block::External, Block::External,
                   Block::External});
  for (int i = 0; i < c; ++i)
    for (int kp = 0; kp < d; ++kp)
      for (int mu = 0; mu < d; ++mu)
        for (int nu = 0; nu < d; ++nu) {
          double s = 0.0;
          for (int a = 0; a < n; ++a)
            s += ctx.K.at(a, i).value() * h.at(a, kp, mu, nu).value();
          out.at(i, kp, mu, nu) = s;
        }
  return out;
}

FrameProjector::FrameProjector(const KKSpec& spec, const KKPoint& pt)
    : d_(spec.d()), c_(spec.c()) {
  const int D = d_ + c_, n = spec.n();
  auto xj = seed_coords(pt.x, 0, D);
  auto yj = seed_coords(pt.y, d_, D);
  E_ = MultiArray<double>(std::vector<int>{D, D}, 0.0);
  for (int i = 0; i < D; ++i) E_.at(i, i) = 1.0;
  if (n > 0) {
    MultiArray<Jet3> K = spec.killing.eval(yj);
    MultiArray<Jet3> A = spec.gauge.eval(xj);
    for (int mu = 0; mu < d_; ++mu)
      for (int i = 0; i < c_; ++i) {
        double ai = 0.0;
        for (int a = 0; a < n; ++a)
          ai += K.at(a, i).value() * A.at(a, mu).value();
        E_.at(mu, d_ + i) = -ai;
      }
  }
  MultiArray<Jet3> g = spec.external.eval(pt.x, JetSpace{d_, 0});
  MultiArray<Jet3> kap = spec.internal.eval(pt.y, JetSpace{c_, 0});
  gxi_ = invert_matrix(values(g), 1e-10);
  kapi_ = invert_matrix(values(kap), 1e-10);
}

namespace {

// out[... r ...] = sum_m M(r, m) T[... m ...] on `slot`
MultiArray<double> contract_slot(const MultiArray<double>& M,
                                 const MultiArray<double>& T, int slot) {
  MultiArray<double> out(T.dims(), 0.0);
  std::vector<int> idx(T.rank(), 0);
  for (IndexIter it(T.dims()); !it.done(); it.next()) {
    auto oidx = *it;
    for (int s = 0; s < T.rank(); ++s) idx[s] = oidx[s];
    double sum = 0.0;
    for (int m = 0; m < T.dim(slot); ++m) {
      idx[slot] = m;
      sum += M.at(oidx[slot], m) * T.flat()[T.offset(idx)];
    }
    out.flat()[out.offset(oidx)] = sum;
  }
  return out;
}

MultiArray<double> slice_ranges(const MultiArray<double>& T,
                                std::span<const std::pair<int, int>> ranges) {
  std::vector<int> odims;
  for (auto& r : ranges) odims.push_back(r.second - r.first);
  MultiArray<double> out(odims, 0.0);
  std::vector<int> idx(T.rank(), 0);
  for (IndexIter it(out.dims()); !it.done(); it.next()) {
    auto oidx = *it;
    for (int s = 0; s < T.rank(); ++s) idx[s] = ranges[s].first + oidx[s];
    out.flat()[out.offset(oidx)] = T.flat()[T.offset(idx)];
  }
  return out;
}

}  // namespace

MultiArray<double> FrameProjector::to_frame(const MultiArray<double>& t) const {
  MultiArray<double> out = t;
  for (int s = 0; s < t.rank(); ++s) out = contract_slot(E_, out, s);
  return out;
}

MultiArray<double> FrameProjector::raise_frame(const MultiArray<double>& t,
                                               int slot) const {
  const int D = d_ + c_;
  MultiArray<double> gif(std::vector<int>{D, D}, 0.0);
  for (int i = 0; i < d_; ++i)
    for (int j = 0; j < d_; ++j) gif.at(i, j) = gxi_.at(i, j);
  for (int i = 0; i < c_; ++i)
    for (int j = 0; j < c_; ++j) gif.at(d_ + i, d_ + j) = kapi_.at(i, j);
  return contract_slot(gif, t, slot);
}

MultiArray<double> FrameProjector::project(
    const MultiArray<double>& t, std::span<const SlotPattern> pattern) const {
  MultiArray<double> f = to_frame(t);
  for (std::size_t s = 0; s < pattern.size(); ++s)
    if (pattern[s] == SlotPattern::ExternalUp)
      f = raise_frame(f, static_cast<int>(s));
  std::vector<std::pair<int, int>> ranges;
  for (auto p : pattern)
    ranges.push_back(p == SlotPattern::ExternalUp
                         ? std::pair<int, int>{0, d_}
                         : std::pair<int, int>{d_, d_ + c_});
  return slice_ranges(f, ranges);
}

MultiArray<double> FrameProjector::cotton_trace(
    const MultiArray<double>& c3) const {
  const int D = d_ + c_;
  MultiArray<double> f = raise_frame(to_frame(c3), 0);
  MultiArray<double> out(std::vector<int>{D}, 0.0);
  for (int I = 0; I < D; ++I) {
    double s = 0.0;
    for (int nu = 0; nu < d_; ++nu) s += f.at(nu, nu, I);
    out.at(I) = s;
  }
  return out;
}

MultiArray<double> FrameProjector::weyl_trace(
    const MultiArray<double>& c4) const {
  const int D = d_ + c_;
  MultiArray<double> f = raise_frame(to_frame(c4), 3);
  MultiArray<double> out(std::vector<int>{D, D}, 0.0);
  for (int I = 0; I < D; ++I)
    for (int J = 0; J < D; ++J) {
      double s = 0.0;
      for (int kp = 0; kp < d_; ++kp) s += f.at(I, kp, J, kp);
      out.at(I, J) = s;
    }
  return out;
}

DenseTensor project_components(const DenseTensor& t, const KKSpec& spec,
                               const KKPoint& pt,
                               std::span<const SlotPattern> pattern) {
  if (t.rank() != static_cast<int>(pattern.size()))
    throw DimensionError("project_components: pattern length != rank");
  for (int s = 0; s < t.rank(); ++s) {
    if (t.dim(s) != spec.D())
      throw DimensionError("project_components: slot dimension != D");
    if (t.variance(s) != Variance::Down)
      throw DimensionError("project_components: input must be all-down");
  }
  FrameProjector proj(spec, pt);
  MultiArray<double> p = proj.project(t.comps(), pattern);
  std::vector<Variance> var;
  std::vector<Block> blk;
  for (auto pp : pattern) {
    var.push_back(pp == SlotPattern::ExternalUp ? Variance::Up
                                                : Variance::Down);
    blk.push_back(pp == SlotPattern::ExternalUp ? Block::External
                                                : Block::Internal);
  }
  DenseTensor out(p.dims(), var, blk);
  for (std::size_t i = 0; i < p.size(); ++i) out.comps()[i] = p[i];
  return out;
}

}  // namespace kkflat
