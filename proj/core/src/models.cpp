#include "kkflat/models.hpp"

#include <cmath>

#include "kkflat/errors.hpp"
#include "kkflat/linalg.hpp"

namespace kkflat {

namespace {

constexpr double kPi = 3.14159265358979323846;

double eta_sd(int a, int mu, int nu) {
  // self-dual 't Hooft symbols, distinguished index 0:
  // eta^a_{0b} = delta_{ab}, eta^a_{b0} = -delta_{ab}, eta^a_{bc} = eps_{abc}
  if (mu == 0 && nu == 0) return 0.0;
  if (mu == 0) return a == nu - 1 ? 1.0 : 0.0;
  if (nu == 0) return a == mu - 1 ? -1.0 : 0.0;
  int b = mu - 1, c = nu - 1;
  if (a == b || b == c || a == c) return 0.0;
  return ((b - a + 3) % 3 == 1) ? 1.0 : -1.0;  // eps_{abc}
}

double eps3(int a, int b, int c) {
  if (a == b || b == c || a == c) return 0.0;
  return ((b - a + 3) % 3 == 1) ? 1.0 : -1.0;
}

Jet3 dot(std::span<const Jet3> u) {
  Jet3 s = u[0] * u[0];
  for (std::size_t i = 1; i < u.size(); ++i) s.add_product(u[i], u[i]);
  return s;
}

MetricField stereographic_space(int dim, double radius, bool spherical) {
  // conf = 2r / (1 +- |u|^2); the sphere chart covers all of R^dim, the
  // hyperbolic one the unit ball.
  ChartDomain dom;
  double half = spherical ? 0.45 : 0.85 / std::sqrt(static_cast<double>(dim));
  dom.box.assign(dim, {-half, half});
  double sign = spherical ? 1.0 : -1.0;
  auto eval = [dim, radius, sign](std::span<const Jet3> u) {
    Jet3 conf = (2.0 * radius) * reciprocal(1.0 + sign * dot(u));
    Jet3 c2 = conf * conf;
    const Jet3 zero = c2 * 0.0;
    MultiArray<Jet3> g(std::vector<int>{dim, dim}, zero);
    for (int i = 0; i < dim; ++i) g.at(i, i) = c2;
    return g;
  };
  return MetricField(dim, std::vector<int>(dim, 1), dom, eval);
}

MetricField flat_space(int dim) {
  ChartDomain dom;
  dom.box.assign(dim, {{-1.0, 1.0}});
  auto eval = [dim](std::span<const Jet3> u) {
    const Jet3 zero = u[0] * 0.0;
    MultiArray<Jet3> g(std::vector<int>{dim, dim}, zero);
    for (int i = 0; i < dim; ++i) g.at(i, i) = zero + 1.0;
    return g;
  };
  return MetricField(dim, std::vector<int>(dim, 1), dom, eval);
}

MetricField hyperspherical_sphere(int dim, double radius) {
  ChartDomain dom;
  dom.box.assign(dim, {{0.0, kPi}});
  dom.box[dim - 1] = {0.0, 2.0 * kPi};
  auto eval = [dim, radius](std::span<const Jet3> th) {
    const Jet3 zero = th[0] * 0.0;
    MultiArray<Jet3> g(std::vector<int>{dim, dim}, zero);
    Jet3 factor = zero + radius * radius;
    for (int i = 0; i < dim; ++i) {
      g.at(i, i) = factor;
      if (i + 1 < dim) {
        Jet3 s = sin(th[i]);
        factor = factor * (s * s);
      }
    }
    return g;
  };
  return MetricField(dim, std::vector<int>(dim, 1), dom, eval);
}

}  // namespace

MetricField constant_curvature_space(int dim, double scalar_magnitude,
                                     SpaceKind kind, ChartKind chart) {
  if (dim < 1 || dim > 9) throw ConfigError("dimension out of range");
  if (scalar_magnitude < 0.0)
    throw ConfigError("scalar magnitude must be non-negative");
  if (kind == SpaceKind::Flat) {
    if (scalar_magnitude != 0.0)
      throw ConfigError("flat space requires zero scalar magnitude");
    return flat_space(dim);
  }
  if (dim < 2) throw ConfigError("curved space needs dimension >= 2");
  if (scalar_magnitude == 0.0)
    throw ConfigError("curved space needs positive scalar magnitude");
  double radius = std::sqrt(dim * (dim - 1) / scalar_magnitude);
  if (kind == SpaceKind::Sphere) {
    if (chart == ChartKind::Hyperspherical)
      return hyperspherical_sphere(dim, radius);
    return stereographic_space(dim, radius, true);
  }
  if (chart == ChartKind::Hyperspherical)
    throw ConfigError("hyperspherical chart is only valid for spheres");
  return stereographic_space(dim, radius, false);
}

FrameField s3_killing_frame(double radius) {
  if (!(radius > 0.0))
    throw ConfigError("s3_killing_frame: radius must be > 0");
  FrameField f;
  f.count = 3;
  f.manifold_dim = 3;
  f.eval = [radius](std::span<const Jet3> u) {
    // Unit-sphere chart map p(u); right-multiplication fields V_a = p e_a
    // pushed through du^i/dp^A and normalized to unit kappa-length.
    Jet3 u2 = dot(u);
    Jet3 den = reciprocal(1.0 + u2);
    Jet3 p0 = (1.0 - u2) * den;
    Jet3 pv[3] = {2.0 * u[0] * den, 2.0 * u[1] * den, 2.0 * u[2] * den};
    Jet3 inv1p0 = reciprocal(1.0 + p0);
    const Jet3 zero = u2 * 0.0;
    MultiArray<Jet3> K(std::vector<int>{3, 3}, zero);
    for (int a = 0; a < 3; ++a) {
      Jet3 V0 = -pv[a];  // V = p e_a: V^0 = -p_a, V^i = p0 d_{ia} + eps_{ija} p_j
      for (int i = 0; i < 3; ++i) {
        Jet3 Vi = zero;
        if (i == a) Vi += p0;
        for (int j = 0; j < 3; ++j) {
          double e = eps3(i, j, a);
          if (e != 0.0) Vi.add_scaled(pv[j], e);
        }
        Jet3 Ki = (Vi - pv[i] * V0 * inv1p0) * inv1p0;
        K.at(a, i) = Ki * (1.0 / radius);
      }
    }
    return K;
  };
  return f;
}

GaugeField instanton_gauge_field(double k, double R_in_magnitude) {
  if (!(k > 0.0) || !(R_in_magnitude > 0.0))
    throw ConfigError("instanton_gauge_field: k and R_in must be positive");
  if (std::fabs(k - 2.0 * R_in_magnitude / 3.0) > 1e-12 * std::fabs(k))
    throw ConfigError(
        "instanton_gauge_field: requires k = 2 |R_in| / 3 (got k = " +
        std::to_string(k) + ", R_in = " + std::to_string(R_in_magnitude) +
        ")");
  GaugeField gf;
  gf.count = 3;
  gf.external_dim = 4;
  const double scale = -2.0 / std::sqrt(k);
  gf.eval = [scale](std::span<const Jet3> x) {
    Jet3 den = reciprocal(1.0 + dot(x));
    const Jet3 zero = den * 0.0;
    MultiArray<Jet3> A(std::vector<int>{3, 4}, zero);
    for (int a = 0; a < 3; ++a)
      for (int mu = 0; mu < 4; ++mu) {
        Jet3 s = zero;
        for (int nu = 0; nu < 4; ++nu) {
          double e = eta_sd(a, mu, nu);
          if (e != 0.0) s.add_scaled(x[nu], e);
        }
        A.at(a, mu) = s * den * scale;
      }
    return A;
  };
  return gf;
}

namespace {

// F^a_{mu nu} jets of a gauge potential with su(2) constants scale * eps.
MultiArray<Jet3> su2_gauge_F(const GaugeField& gf, double struct_scale,
                             std::span<const Jet3> x) {
  MultiArray<Jet3> A = gf.eval(x);
  const Jet3 zero = A.at(0, 0) * 0.0;
  MultiArray<Jet3> F(std::vector<int>{3, 4, 4}, zero);
  for (int a = 0; a < 3; ++a)
    for (int mu = 0; mu < 4; ++mu)
      for (int nu = 0; nu < 4; ++nu) {
        Jet3 s = A.at(a, nu).partial(mu) - A.at(a, mu).partial(nu);
        for (int b = 0; b < 3; ++b)
          for (int c = 0; c < 3; ++c) {
            double cv = struct_scale * eps3(b, c, a);
            if (cv == 0.0) continue;
            Jet3 t = zero;
            t.add_product(A.at(b, mu), A.at(c, nu));
            s.add_scaled(t, -cv);
          }
        F.at(a, mu, nu) = std::move(s);
      }
  return F;
}

}  // namespace

QKStructure quaternionic_space_form(double k, double chart_scale) {
  if (!(k > 0.0)) throw ConfigError("quaternionic_space_form: k must be > 0");
  if (!(chart_scale > 0.0))
    throw ConfigError("quaternionic_space_form: chart_scale must be > 0");
  QKStructure qk;
  qk.k = k;
  const double R_in = 1.5 * k;  // |R_in| such that k = 2 |R_in| / 3
  const double S = std::sqrt(2.0 * R_in / 3.0);

  ChartDomain dom;
  dom.box.assign(4, {{-0.45 * chart_scale, 0.45 * chart_scale}});
  auto geval = [k](std::span<const Jet3> x) {
    Jet3 conf = reciprocal(1.0 + dot(x)) * (2.0 / std::sqrt(k));
    Jet3 c2 = conf * conf;
    const Jet3 zero = c2 * 0.0;
    MultiArray<Jet3> g(std::vector<int>{4, 4}, zero);
    for (int i = 0; i < 4; ++i) g.at(i, i) = c2;
    return g;
  };
  qk.g = MetricField(4, std::vector<int>(4, 1), dom, geval);

  GaugeField gf = instanton_gauge_field(k, R_in);
  auto gcomp = qk.g.components();
  qk.j_eval = [gf, S, gcomp](std::span<const Jet3> x) {
    MultiArray<Jet3> F = su2_gauge_F(gf, S, x);
    MultiArray<Jet3> g = gcomp(x);
    MultiArray<Jet3> gi = invert_matrix(g, 1e-10);
    const Jet3 zero = F.at(0, 0, 0) * 0.0;
    MultiArray<Jet3> Fm(std::vector<int>{3, 4, 4}, zero);
    for (int a = 0; a < 3; ++a)
      for (int mu = 0; mu < 4; ++mu)
        for (int nu = 0; nu < 4; ++nu) {
          Jet3& s = Fm.at(a, mu, nu);
          for (int l = 0; l < 4; ++l)
            s.add_product(F.at(a, mu, l), gi.at(l, nu));
        }
    // F^2 = F^{a mu nu} F^a_{mu nu}
    Jet3 F2 = zero;
    for (int a = 0; a < 3; ++a)
      for (int mu = 0; mu < 4; ++mu)
        for (int nu = 0; nu < 4; ++nu) {
          Jet3 up = zero;
          for (int l = 0; l < 4; ++l)
            up.add_product(gi.at(mu, l), Fm.at(a, l, nu));
          F2.add_product(up, F.at(a, mu, nu));
        }
    Jet3 pref = sqrt(12.0 / F2);  // sqrt(cd / F^2), c = 3, d = 4
    for (std::size_t i = 0; i < Fm.size(); ++i) Fm[i] = Fm[i] * pref;
    return Fm;
  };

  // theta radical calibration: the paper prints two incompatible radicals,
  // so the structure itself fixes the factor in theta = radical * A.
  const double x_cal[4] = {0.11, -0.07, 0.13, 0.05};
  std::vector<Jet3> xj;
  for (int i = 0; i < 4; ++i) xj.push_back(Jet3::variable(i, x_cal[i], 4));
  MultiArray<Jet3> J = qk.j_eval(xj);
  MultiArray<Jet3> A = gf.eval(xj);
  CurvatureJets geo =
      curvature_jets(qk.g, std::span<const double>(x_cal, 4), JetSpace{4, 0});
  double num = 0.0, den = 0.0;
  MultiArray<double> nabJ(std::vector<int>{3, 4, 4, 4}, 0.0);
  MultiArray<double> coup(std::vector<int>{3, 4, 4, 4}, 0.0);
  for (int a = 0; a < 3; ++a)
    for (int kp = 0; kp < 4; ++kp)
      for (int mu = 0; mu < 4; ++mu)
        for (int nu = 0; nu < 4; ++nu) {
          Jet3 s = J.at(a, mu, nu).partial(kp);
          for (int l = 0; l < 4; ++l) {
            Jet3 t = Jet3::constant(0.0, 4);
            t.add_product(geo.gamma.at(kp, l, nu), J.at(a, mu, l));
            s += t;
            Jet3 u = Jet3::constant(0.0, 4);
            u.add_product(geo.gamma.at(kp, mu, l), J.at(a, l, nu));
            s -= u;
          }
          nabJ.at(a, kp, mu, nu) = s.value();
          double cc = 0.0;
          for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c)
              cc += eps3(b, c, a) * A.at(b, kp).value() *
                    J.at(c, mu, nu).value();
          coup.at(a, kp, mu, nu) = cc;
          num += s.value() * cc;
          den += cc * cc;
        }
  qk.theta_radical = num / den;
  double resid = 0.0;
  for (std::size_t i = 0; i < nabJ.size(); ++i)
    resid = std::max(std::fabs(nabJ[i] - qk.theta_radical * coup[i]), resid);
  qk.calibration_residual = resid;
  if (resid > 1e-8)
    throw InvariantError(
        "quaternionic_space_form: theta calibration residual " +
        std::to_string(resid));
  double cand_a = std::sqrt(2.0 * R_in / 3.0);
  double cand_b = std::sqrt(2.0 * R_in / 2.0);
  if (std::fabs(qk.theta_radical - cand_a) < 1e-8 * cand_a)
    qk.theta_radical_match = "sqrt(2|R_in|/3)";
  else if (std::fabs(qk.theta_radical - cand_b) < 1e-8 * cand_b)
    qk.theta_radical_match = "sqrt(2|R_in|/2)";
  else
    qk.theta_radical_match = "neither";

  const double rad = qk.theta_radical;
  qk.theta_eval = [gf, rad](std::span<const Jet3> x) {
    MultiArray<Jet3> A2 = gf.eval(x);
    for (std::size_t i = 0; i < A2.size(); ++i) A2[i] *= rad;
    return A2;
  };

  // closure sign of the J triple in the quaternion relation
  double best[2] = {0.0, 0.0};
  for (int si = 0; si < 2; ++si) {
    double lam = si == 0 ? 1.0 : -1.0;
    double worst = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int mu = 0; mu < 4; ++mu)
          for (int nu = 0; nu < 4; ++nu) {
            double s = 0.0;
            for (int kx = 0; kx < 4; ++kx)
              s += J.at(a, mu, kx).value() * J.at(b, kx, nu).value() -
                   J.at(b, mu, kx).value() * J.at(a, kx, nu).value();
            for (int cx = 0; cx < 3; ++cx)
              s -= 2.0 * lam * eps3(a, b, cx) * J.at(cx, mu, nu).value();
            worst = std::max(worst, std::fabs(s));
          }
    best[si] = worst;
  }
  qk.algebra_closure_sign = best[0] <= best[1] ? 1 : -1;
  if (std::min(best[0], best[1]) > 1e-8)
    throw InvariantError("quaternionic_space_form: J triple fails closure");
  return qk;
}

KKSpec trivial_solution_spec(int d, int c, double R_in) {
  if (c != 1 && c != 3)
    throw ConfigError("trivial_solution_spec: c must be 1 or 3");
  KKSpec spec;
  spec.name = "trivial";
  spec.params = {{"d", double(d)}, {"c", double(c)}, {"R_in", R_in}};
  if (c == 1) {
    // flat circle fiber: R_in plays no role in one internal dimension
    spec.internal = flat_space(1);
    spec.external = flat_space(d);
    spec.structure = StructureConstants::zero(0);
    return spec;
  }
  if (R_in == 0.0)
    throw ConfigError("trivial_solution_spec: R_in must be nonzero");
  double R_ex = -d * (d - 1) * R_in / (c * (c - 1));
  spec.internal = constant_curvature_space(
      c, std::fabs(R_in),
      R_in > 0 ? SpaceKind::Sphere : SpaceKind::Hyperbolic,
      ChartKind::Stereographic);
  spec.external =
      R_ex == 0.0 ? flat_space(d)
                  : constant_curvature_space(
                        d, std::fabs(R_ex),
                        R_ex > 0 ? SpaceKind::Sphere : SpaceKind::Hyperbolic,
                        ChartKind::Stereographic);
  if (R_in > 0) {
    double radius = std::sqrt(6.0 / R_in);
    spec.killing = s3_killing_frame(radius);
    spec.structure = StructureConstants::su2(2.0 / radius);
    GaugeField zero_gauge;
    zero_gauge.count = 3;
    zero_gauge.external_dim = d;
    zero_gauge.eval = [d](std::span<const Jet3> x) {
      return MultiArray<Jet3>(std::vector<int>{3, d}, x[0] * 0.0);
    };
    spec.gauge = zero_gauge;
  } else {
    spec.structure = StructureConstants::zero(0);
  }
  return spec;
}

KKSpec hopf_instanton_spec(double R_in_magnitude, double detune_factor) {
  if (!(R_in_magnitude > 0.0))
    throw ConfigError("hopf_instanton_spec: R_in must be positive");
  if (!(detune_factor > 0.0))
    throw ConfigError("hopf_instanton_spec: detune factor must be positive");
  const double k = 2.0 * R_in_magnitude / 3.0;
  const double radius = std::sqrt(6.0 / R_in_magnitude) * detune_factor;
  const double R_in_eff = 6.0 / (radius * radius);
  KKSpec spec;
  spec.name =
      detune_factor == 1.0 ? "hopf-instanton" : "hopf-instanton-detuned";
  spec.params = {{"R_in", R_in_magnitude},
                 {"k", k},
                 {"detune", detune_factor}};
  QKStructure qk = quaternionic_space_form(k);
  spec.external = qk.g;
  spec.internal = constant_curvature_space(3, R_in_eff, SpaceKind::Sphere,
                                           ChartKind::Stereographic);
  spec.killing = s3_killing_frame(radius);
  spec.structure = StructureConstants::su2(2.0 / radius);
  spec.gauge = instanton_gauge_field(k, R_in_magnitude);
  return spec;
}

ModelValidation validate_model(const std::string& name,
                               const std::map<std::string, double>& params,
                               int points, std::uint64_t seed) {
  ModelValidation v;
  auto get = [&params](const std::string& key, double dflt) {
    auto it = params.find(key);
    return it == params.end() ? dflt : it->second;
  };
  if (name == "flat" || name == "sphere" || name == "hyperbolic") {
    int dim = static_cast<int>(get("dim", 4));
    double scalar = get("scalar", name == "flat" ? 0.0 : 6.0);
    SpaceKind kind =
        name == "flat"
            ? SpaceKind::Flat
            : (name == "sphere" ? SpaceKind::Sphere : SpaceKind::Hyperbolic);
    ChartKind chart = get("hyperspherical", 0.0) != 0.0
                          ? ChartKind::Hyperspherical
                          : ChartKind::Stereographic;
    MetricField m = constant_curvature_space(dim, scalar, kind, chart);
    double worst_scalar = 0.0, worst_weyl = 0.0, worst_cotton = 0.0;
    for (auto& p : sample_points(m.domain(), points, seed)) {
      CurvatureJets geo = curvature_jets(m, p);
      worst_scalar = std::max(
          worst_scalar, std::fabs(std::fabs(geo.scalar.value()) - scalar));
      if (dim >= 3) {
        for (auto& w : geo.weyl.flat())
          worst_weyl = std::max(worst_weyl, std::fabs(w.value()));
        for (auto& cc : geo.cotton.flat())
          worst_cotton = std::max(worst_cotton, std::fabs(cc.value()));
      }
    }
    v.checks["scalar_deviation"] = worst_scalar;
    v.checks["max_weyl"] = worst_weyl;
    v.checks["max_cotton"] = worst_cotton;
    v.pass =
        worst_scalar <= 1e-9 && worst_weyl <= 1e-10 && worst_cotton <= 1e-9;
    return v;
  }
  if (name == "s3-frame") {
    double radius = get("radius", 1.0);
    KKSpec probe;
    probe.external = flat_space(2);
    probe.internal =
        constant_curvature_space(3, 6.0 / (radius * radius), SpaceKind::Sphere,
                                 ChartKind::Stereographic);
    probe.killing = s3_killing_frame(radius);
    probe.structure = StructureConstants::su2(2.0 / radius);
    GaugeField zg;
    zg.count = 3;
    zg.external_dim = 2;
    zg.eval = [](std::span<const Jet3> x) {
      return MultiArray<Jet3>(std::vector<int>{3, 2}, x[0] * 0.0);
    };
    probe.gauge = zg;
    SpecValidation sv = probe.validate(points, seed);
    double gram_dev = 0.0;
    SplitMix64 rng(seed);
    for (int i = 0; i < points; ++i) {
      auto y = probe.internal.domain().sample(rng);
      MultiArray<double> g = frame_gram(probe, y);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          gram_dev = std::max(
              gram_dev, std::fabs(g.at(a, b) - (a == b ? 1.0 : 0.0)));
    }
    v.checks["killing"] = sv.max_killing;
    v.checks["closure"] = sv.max_closure;
    v.checks["jacobi"] = sv.max_jacobi;
    v.checks["gram_deviation"] = gram_dev;
    v.pass = sv.pass && gram_dev <= 1e-10;
    return v;
  }
  if (name == "qk-space-form") {
    QKStructure qk = quaternionic_space_form(get("k", 4.0));
    v.checks["theta_calibration"] = qk.calibration_residual;
    v.checks["theta_radical"] = qk.theta_radical;
    v.checks["closure_sign"] = qk.algebra_closure_sign;
    v.pass = qk.calibration_residual <= 1e-8;
    return v;
  }
  throw ConfigError("validate_model: unknown model '" + name + "'");
}

}  // namespace kkflat
