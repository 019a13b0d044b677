#pragma once

#include <string>
#include <vector>

#include "kkflat/kk.hpp"
#include "kkflat/verify.hpp"

namespace kkflat {

// Appendix reduction formulas: Cotton traces/components (A.*) and Weyl
// traces/components (B.*), plus the d=2 / c=2 replacement forms.
enum class FormulaId {
  ACmu, ACi,
  ACmunukappa, ACijk, ACmunuk, ACijkappa, ACmujk, ACinukappa,
  BC, BCmunu, BCij, BCmuj,
  BGaussExt, BGaussInt, BCodazziExt, BCodazziInt, BRicci, B6th,
  BGaussExtD2, BGaussIntC2,
};

std::string formula_name(FormulaId id);
std::vector<FormulaId> all_formulas();

// Direct D-dimensional side at one point: Cotton and Weyl of the assembled
// metric plus the frame projector.
struct DirectContext {
  FrameProjector proj;
  MultiArray<double> cotton;   // C_{IJK} values
  MultiArray<double> weyl;     // C_{IJKL} values
  MultiArray<double> weyl_div; // nabla_L C_{IJK}^L values
  int d = 0, c = 0, D = 0;

  DirectContext(const KKSpec& spec, const MetricField& assembled,
                const KKPoint& pt);
};

struct FormulaValue {
  bool applicable = true;
  std::string note;
  MultiArray<double> value;
};

// Lower-dimensional assembled expression of a formula.
FormulaValue assembled_formula(const PointContext& ctx, FormulaId id);
// Directly projected D-dimensional counterpart.
FormulaValue direct_formula(const DirectContext& dc, FormulaId id);

struct FormulaCompare {
  std::string formula;
  bool applicable = true;
  std::string note;
  double max_abs_diff = 0.0;
  double max_rel_diff = 0.0;
  double scale = 0.0;  // max |direct| over components, floored at 1e-30
};

FormulaCompare compare_formula(const PointContext& ctx,
                               const DirectContext& dc, FormulaId id);

// Reduce-side extras: trace coherence of the assembled Weyl traces and the
// Cotton-Weyl identity between assembled Cotton blocks and the projected
// divergence of the assembled-space Weyl tensor.
struct ReductionExtras {
  double trace_coherence = 0.0;       // |C_mu^mu + C_i^i|
  double cotton_weyl_rel = 0.0;       // relative residual across blocks
  double cotton_weyl_scale = 0.0;
};

struct ReductionResult {
  std::vector<TagStats> formulas;     // aggregated over points
  ReductionExtras extras;
  bool pass = true;
};

ReductionResult run_reduction_suite(const KKSpec& spec,
                                    const SuiteConfig& cfg);

// Random comparator spec: g = delta + eps * (degree <= 2 symmetric
// perturbation), polynomial A of degree <= 2; unit S^3 internal for c = 3,
// flat torus with coordinate frame otherwise.
KKSpec random_kk_spec(int d, int c, std::uint64_t seed, double eps = 0.05,
                      double gauge_amp = 0.2);

}  // namespace kkflat
