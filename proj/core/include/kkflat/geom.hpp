#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "kkflat/jet.hpp"
#include "kkflat/rng.hpp"
#include "kkflat/tensor.hpp"

namespace kkflat {

// Where a chart's coordinates live inside a (possibly larger) jet space.
// Plain geometry uses {dim, 0}; Kaluza-Klein evaluation embeds external
// coordinates at offset 0 and internal ones at offset d of a D-variable
// jet space, so mixed third derivatives come out of one evaluation.
struct JetSpace {
  int jet_dim;
  int offset;
};

// Axis-aligned chart box. Sampling shrinks every side by `shrink` per end,
// keeping sample points away from chart boundaries and poles.
struct ChartDomain {
  std::vector<std::array<double, 2>> box;
  double shrink = 0.05;

  int dim() const { return static_cast<int>(box.size()); }
  bool contains(std::span<const double> p) const;
  std::vector<double> sample(SplitMix64& rng) const;
};

// A chart-evaluable metric: point -> symmetric dim x dim Jet3 components.
// The component function receives the chart coordinates as seeded jets and
// must use jet arithmetic throughout, so that all derivatives to order 3
// are exact.
class MetricField {
 public:
  using EvalFn = std::function<MultiArray<Jet3>(std::span<const Jet3>)>;

  MetricField() = default;
  MetricField(int dim, std::vector<int> signature, ChartDomain domain,
              EvalFn eval);

  int dim() const { return dim_; }
  const std::vector<int>& signature() const { return signature_; }
  const ChartDomain& domain() const { return domain_; }

  // Evaluate at a chart point, producing jets in `space`. Checks the point
  // against the domain and the result for symmetry.
  MultiArray<Jet3> eval(std::span<const double> point, JetSpace space) const;
  MultiArray<Jet3> eval(std::span<const double> point) const {
    return eval(point, JetSpace{dim_, 0});
  }

  // Raw component function, for composing fields into larger jet spaces.
  const EvalFn& components() const { return eval_; }

 private:
  int dim_ = 0;
  std::vector<int> signature_;
  ChartDomain domain_;
  EvalFn eval_;
};

enum class Convention { Paper, Standard };

// Every curvature quantity at one point, jet-valued. Computed in the paper
// convention: R_{IJK}^L = d_I Gamma_{JK}^L - d_J Gamma_{IK}^L
// + Gamma_{IM}^L Gamma_{JK}^M - Gamma_{JM}^L Gamma_{IK}^M, Ricci = R_{IKJ}^K.
// Valid jet orders degrade with each derivative taken from the metric:
// gamma to order 2, riemann/ricci/schouten/weyl to order 1, cotton to the
// value only.
struct CurvatureJets {
  int dim = 0;
  JetSpace space{0, 0};
  MultiArray<Jet3> g, ginv;
  MultiArray<Jet3> gamma;        // gamma(J,K,L) = Gamma_{JK}^L
  MultiArray<Jet3> riemann;      // riemann(I,J,K,L) = R_{IJK}^L
  MultiArray<Jet3> riemann_low;  // R_{IJKL}
  MultiArray<Jet3> ricci;        // R_{IJ} (paper sign)
  Jet3 scalar;
  MultiArray<Jet3> schouten;     // S_{IJ}
  MultiArray<Jet3> cotton;       // C_{IJK} (dim >= 3)
  MultiArray<Jet3> weyl;         // C_{IJKL} (dim >= 3; identically 0 in 3d)
};

CurvatureJets curvature_jets(const MetricField& m, std::span<const double> pt,
                             JetSpace space);
inline CurvatureJets curvature_jets(const MetricField& m,
                                    std::span<const double> pt) {
  return curvature_jets(m, pt, JetSpace{m.dim(), 0});
}

// Value-level extraction with the sign convention applied. Under
// Convention::Standard the signs of Ricci, scalar, Schouten and Cotton are
// flipped (the round sphere then gets positive scalar curvature); Riemann
// and Weyl are convention independent.
struct CurvatureBundle {
  std::vector<double> point;
  Convention convention = Convention::Paper;
  DenseTensor gamma;
  DenseTensor riemann, riemann_lowered;
  DenseTensor ricci;
  double scalar = 0.0;
  DenseTensor schouten;
  DenseTensor cotton;
  DenseTensor weyl;
};

CurvatureBundle curvature_bundle(const MetricField& m,
                                 std::span<const double> pt,
                                 Convention convention);

// Christoffel values Gamma_{JK}^L at a point.
DenseTensor christoffel(const MetricField& m, std::span<const double> pt);

// Covariant derivative of a jet-valued tensor, derivative slot appended
// last: out(idx..., K) = nabla_K t_{idx...}. `var_offset` locates the
// chart's coordinates inside the jet space.
MultiArray<Jet3> cov_deriv_jets(const MultiArray<Jet3>& t,
                                std::span<const Variance> variances,
                                const MultiArray<Jet3>& gamma, int var_offset);

// Covariant derivative of a user-supplied tensor field at a point
// (value-level, derivative slot last).
DenseTensor cov_deriv(
    const std::function<MultiArray<Jet3>(std::span<const Jet3>)>& field,
    std::span<const Variance> variances, const MetricField& m,
    std::span<const double> pt);

// nabla_L C_{IJK}^L of the Weyl tensor, value-level.
MultiArray<double> weyl_divergence(const CurvatureJets& geo);

// Residual of the Cotton-Weyl identity (D-3) C_{JKI} - (D-2) nabla_L C_{IJK}^L
// (slot pairing fixed by the conventions above). Returns {max_abs, scale}
// with scale = max |term|.
std::pair<double, double> cotton_weyl_residual(const CurvatureJets& geo);

// Deterministic sample points from the (shrunk) chart box.
std::vector<std::vector<double>> sample_points(const ChartDomain& domain,
                                               int count, std::uint64_t seed);

MultiArray<double> values(const MultiArray<Jet3>& jets);

}  // namespace kkflat
