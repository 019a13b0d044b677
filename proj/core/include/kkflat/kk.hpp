#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kkflat/geom.hpp"
#include "kkflat/jet.hpp"
#include "kkflat/tensor.hpp"

namespace kkflat {

// Killing frame K^i_a(y): `count` vector fields on the internal chart.
// Components indexed (a, i).
struct FrameField {
  int count = 0;
  int manifold_dim = 0;
  std::function<MultiArray<Jet3>(std::span<const Jet3>)> eval;
};

// Gauge potential A^a_mu(x), components indexed (a, mu).
struct GaugeField {
  int count = 0;
  int external_dim = 0;
  std::function<MultiArray<Jet3>(std::span<const Jet3>)> eval;
};

// c_{bc}^a stored at (b, c, a). Antisymmetry and the Jacobi identity are
// checked on construction.
struct StructureConstants {
  MultiArray<double> c;

  StructureConstants() = default;
  explicit StructureConstants(MultiArray<double> comps);
  static StructureConstants zero(int n);
  static StructureConstants su2(double scale);  // scale * eps_{bc}^a

  int count() const { return c.rank() == 3 ? c.dim(0) : 0; }
  double max_jacobi_violation() const;
};

struct KKPoint {
  std::vector<double> x, y;
  std::vector<double> joint() const;
};

struct SpecValidation {
  double max_killing = 0.0;    // Lie derivative of kappa along each K_a
  double max_closure = 0.0;    // [K_a,K_b] - c_{ab}^c K_c
  double max_jacobi = 0.0;
  bool pass = false;
};

// The full lower-dimensional data bundle defining a D = d + c metric.
struct KKSpec {
  MetricField external;  // g_{mu nu}(x), dim d
  MetricField internal;  // kappa_{ij}(y), dim c
  FrameField killing;    // may be empty (count 0) for A == 0 specs
  GaugeField gauge;
  StructureConstants structure;
  std::string name;
  std::map<std::string, double> params;

  int d() const { return external.dim(); }
  int c() const { return internal.dim(); }
  int n() const { return killing.count; }
  int D() const { return d() + c(); }

  KKPoint sample_point(SplitMix64& rng) const;
  std::vector<KKPoint> sample_points(int count, std::uint64_t seed) const;

  SpecValidation validate(int points = 10, std::uint64_t seed = 17,
                          double tol = 1e-10) const;
};

// The Kaluza-Klein ansatz metric on the joint chart; validates the spec's
// Killing/closure/Jacobi invariants first.
MetricField assemble_metric(const KKSpec& spec);

// F^a_{mu nu} = d_mu A^a_nu - d_nu A^a_mu - c_{bc}^a A^b_mu A^c_nu, as jets
// in the joint space, indexed (a, mu, nu).
MultiArray<Jet3> gauge_curvature_jets(const KKSpec& spec,
                                      std::span<const Jet3> xjets);

struct GaugeCurvature {
  DenseTensor F_algebra;   // F^a_{mu nu}, slots (algebra-up, ext, ext)
  DenseTensor F_internal;  // F^i_{mu nu} = K^i_a F^a_{mu nu}
};
GaugeCurvature gauge_curvature(const KKSpec& spec, const KKPoint& pt);

// hat nabla_kappa F^i_{mu nu} = K^i_a (nabla_kappa F^a - c_{bc}^a A^b F^c),
// value-level, indexed (i, kappa, mu, nu).
DenseTensor hatted_deriv_F(const KKSpec& spec, const KKPoint& pt);

// Per-slot projection pattern for D-dimensional tensors.
enum class SlotPattern { ExternalUp, InternalDown };

// Components of D-tensors in the horizontal frame e_mu = d_mu - A^i_mu d_i,
// e_i = d_i, in which the assembled metric is block-diagonal diag(g, kappa).
// Contravariant-external / covariant-internal frame components coincide with
// the properly transforming coordinate projections.
class FrameProjector {
 public:
  FrameProjector(const KKSpec& spec, const KKPoint& pt);

  int d() const { return d_; }
  int c() const { return c_; }
  int D() const { return d_ + c_; }

  // Frame components of an all-down coordinate tensor.
  MultiArray<double> to_frame(const MultiArray<double>& t) const;
  // Raise a frame slot with diag(g^-1, kappa^-1).
  MultiArray<double> raise_frame(const MultiArray<double>& t, int slot) const;
  // Frame-project an all-down tensor and restrict ranges per pattern.
  MultiArray<double> project(const MultiArray<double>& t,
                             std::span<const SlotPattern> pattern) const;

  // C_I = C^nu_{nu I} of an all-down rank-3 tensor (trace over the external
  // range in the frame).
  MultiArray<double> cotton_trace(const MultiArray<double>& c3) const;
  // C_{IJ} = C_{I kappa J}^kappa of an all-down rank-4 tensor.
  MultiArray<double> weyl_trace(const MultiArray<double>& c4) const;

  const MultiArray<double>& gx_inv() const { return gxi_; }
  const MultiArray<double>& kap_inv() const { return kapi_; }

 private:
  int d_, c_;
  MultiArray<double> E_;     // frame rows in coordinate components
  MultiArray<double> gxi_, kapi_;
};

// Spec-level projection op: raise ExternalUp slots, restrict ranges.
DenseTensor project_components(const DenseTensor& t, const KKSpec& spec,
                               const KKPoint& pt,
                               std::span<const SlotPattern> pattern);

// Everything the residual evaluators and reduction formulas need at one
// KKPoint, jet-valued in the joint D-variable space. External partials are
// jet variables [0,d), internal ones [d,D).
struct PointContext {
  const KKSpec* spec = nullptr;
  KKPoint pt;
  int d = 0, c = 0, n = 0, D = 0;

  CurvatureJets ext;   // of g, offset 0
  CurvatureJets intl;  // of kappa, offset d

  MultiArray<Jet3> A;      // (a, mu)
  MultiArray<Jet3> K;      // K^i_a at (a, i)
  MultiArray<Jet3> Kl;     // K_{a i} = kappa_{ij} K^j_a
  MultiArray<Jet3> nabKl;  // (a, m, i) = nabla^int_m K_{a i}
  MultiArray<Jet3> gbar;   // (a, b)
  MultiArray<Jet3> F;      // F^a_{mu nu}
  MultiArray<Jet3> Fup;    // F^{a mu nu}
  MultiArray<Jet3> Fmix;   // F^a_mu{}^nu at (a, mu, nu)
  MultiArray<Jet3> FF_ab;  // F^a . F^b (external contraction only)
  MultiArray<Jet3> F2mn;   // F^2_{mu nu}
  MultiArray<Jet3> F2up;
  MultiArray<Jet3> F2ij;
  Jet3 F2;
  MultiArray<Jet3> Tup;    // T^{mu nu}

  Jet3 zero;

  // hat nabla_kappa F^a_{mu nu}, (a, kappa, mu, nu); lazily built
  const MultiArray<Jet3>& hatF_dd() const;
  const MultiArray<Jet3>& hatF_uu() const;
  // hat nabla_lambda F^{a mu lambda} -> (a, mu)
  const MultiArray<Jet3>& divF() const;
  // hat nabla_nu F^{a nu mu} -> (a, mu)
  const MultiArray<Jet3>& div1F() const;

  // hat nabla_mu f = d_mu f - A^i_mu d_i f for a joint-space scalar jet.
  std::vector<Jet3> hat_scalar(const Jet3& f) const;

  // Gauge-covariant derivative on the algebra slot of X(a, ...):
  // out(a, kappa, ...) = nabla^LC_kappa X^a... - c_{bc}^a A^b_kappa X^c...,
  // with external Levi-Civita terms per `variances` of the trailing slots.
  MultiArray<Jet3> hat_deriv(const MultiArray<Jet3>& X,
                             std::span<const Variance> variances) const;

 private:
  mutable MultiArray<Jet3> hatF_dd_, hatF_uu_, divF_, div1F_;
  mutable bool have_hatF_ = false, have_div_ = false, have_div1_ = false;
  void build_hatF() const;

 public:
  PointContext(const KKSpec& spec, const KKPoint& pt);
};

// Lie bracket [X, Y]^i = X^j d_j Y^i - Y^j d_j X^i for jet-valued frames,
// value-level, indexed (a, b, i).
MultiArray<double> frame_brackets(const FrameField& frame,
                                  std::span<const double> y);

// Gram matrix K^i_a K^j_b kappa_{ij} at a point.
MultiArray<double> frame_gram(const KKSpec& spec, std::span<const double> y);

}  // namespace kkflat
