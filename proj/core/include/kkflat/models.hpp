#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>

#include "kkflat/geom.hpp"
#include "kkflat/kk.hpp"

namespace kkflat {

enum class SpaceKind { Flat, Sphere, Hyperbolic };
enum class ChartKind { Stereographic, Hyperspherical };

// Constant-curvature model metric. `scalar_magnitude` is |R| in the
// standard sign convention (sphere positive); the engine's paper-convention
// scalar comes out with the opposite sign, which only the convention flag
// reshuffles. Stereographic charts use the scale-free form
// 2r/(1 +- |u|^2) with dimensionless chart coordinates.
MetricField constant_curvature_space(int dim, double scalar_magnitude,
                                     SpaceKind kind, ChartKind chart);

// Three orthonormal Killing fields parallelizing S^3(radius) in the
// stereographic chart, closing with structure constants
// sqrt(2 |R_in| / 3) eps = (2/radius) eps and gram matrix delta.
FrameField s3_killing_frame(double radius);

// g, three almost complex structures, connection one-forms and the constant
// quaternionic sectional curvature of the d = 4 space form. theta_radical
// records the numerically calibrated factor in theta = radical * A, and
// algebra_closure_sign the sign lambda for which
// J^a J^b - J^b J^a = 2 lambda eps^{ab}_c J^c holds.
struct QKStructure {
  MetricField g;
  std::function<MultiArray<Jet3>(std::span<const Jet3>)> j_eval;      // (a,mu,nu)
  std::function<MultiArray<Jet3>(std::span<const Jet3>)> theta_eval;  // (a,mu)
  double k = 0.0;
  double theta_radical = 0.0;
  std::string theta_radical_match;  // which printed radical it agrees with
  int algebra_closure_sign = 0;
  double calibration_residual = 0.0;
};

QKStructure quaternionic_space_form(double k, double chart_scale = 1.0);

// One-instanton su(2) potential on the quaternionic space-form chart;
// requires k = 2 R_in_magnitude / 3.
GaugeField instanton_gauge_field(double k, double R_in_magnitude);

// A == 0 product solution: internal constant-curvature space realizing
// R_in (standard convention) and external space with
// R_ex = -d(d-1) R_in / (c(c-1)). c = 3 with R_in > 0 ships the S^3 Killing
// frame; other supported cases carry an empty frame.
KKSpec trivial_solution_spec(int d, int c, double R_in);

// The flagship configuration: quaternionic space form (k = 2 R_in/3),
// unit-normalized S^3 frame and instanton gauge field. `detune_factor`
// scales the internal radius away from the solution (1.0 = on-shell).
KKSpec hopf_instanton_spec(double R_in_magnitude = 6.0,
                           double detune_factor = 1.0);

struct ModelDescriptor {
  std::string name;
  std::map<std::string, double> params;
  std::set<std::string> provides;
  std::map<std::string, std::string> notes;
};

struct ModelValidation {
  bool pass = false;
  std::map<std::string, double> checks;  // named residuals
};

// Run a catalog model's declared invariants at `points` seeded chart points.
ModelValidation validate_model(const std::string& name,
                               const std::map<std::string, double>& params,
                               int points = 50, std::uint64_t seed = 2024);

}  // namespace kkflat
