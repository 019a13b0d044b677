#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kkflat/kk.hpp"
#include "kkflat/models.hpp"

namespace kkflat {

// Tags for every displayed equation system in scope. Transcriptions carry a
// handful of numerically resolved signs where the printed formulas are
// inconsistent with the validated reduction identities; each such resolution
// is noted in the evaluator.
enum class EquationId {
  W8a, W8b, W8c, W8d, W8e, W8f, W8g, W8h,
  C9a, C9b,
  Rel10, Rex12,
  In13a, In13b,
  Ex16a, Ex16b, Ex16aPrime, Ex16bPrime,
  FF17, FF18, F221,
  QK1a, QK1b, QK2a, QK2b, QK3a, QK3b,
  Gbar22a, Gbar22b, GbarNorm,
};

std::string tag_name(EquationId id);

struct EqEval {
  bool applicable = true;
  std::string note;
  MultiArray<double> residual;  // rank 0 for scalar equations
  double scale = 0.0;           // largest participating term magnitude

  double max_abs() const;
  double max_rel() const;  // floor 1e-30 on the scale
};

// ---- system (8): conformal flatness of the assembled metric ----
EqEval eval_w8a(const PointContext& ctx);
EqEval eval_w8b(const PointContext& ctx);
EqEval eval_w8c(const PointContext& ctx);
EqEval eval_w8d(const PointContext& ctx);
EqEval eval_w8e(const PointContext& ctx);
EqEval eval_w8f(const PointContext& ctx);
EqEval eval_w8g(const PointContext& ctx);
EqEval eval_w8h(const PointContext& ctx);

// ---- system (9): Cotton integrability ----
EqEval eval_c9a(const PointContext& ctx);
EqEval eval_c9b(const PointContext& ctx);

// ---- scalar relations and solution-branch curvature forms ----
EqEval eval_rel10(const PointContext& ctx);
EqEval eval_rex12(const PointContext& ctx);
EqEval eval_in13a(const PointContext& ctx);
EqEval eval_in13b(const PointContext& ctx);
EqEval eval_ex16a(const PointContext& ctx);
EqEval eval_ex16b(const PointContext& ctx);
EqEval eval_ex16a_prime(const PointContext& ctx);
EqEval eval_ex16b_prime(const PointContext& ctx);
EqEval eval_ff17(const PointContext& ctx);
EqEval eval_ff18(const PointContext& ctx);
EqEval eval_f221(const PointContext& ctx);

// ---- quaternionic Kaehler structure ----
struct QKEval {
  std::map<EquationId, EqEval> results;
  int closure_sign = 0;  // sign for which QK1b holds
};
QKEval eval_qk(const QKStructure& qk, std::span<const double> x);

// ---- gbar-contracted gauge relations ----
struct GbarEval {
  std::map<EquationId, EqEval> results;
  double gbar_spread = 0.0;
  bool gbar_constant = true;
};
GbarEval eval_gbar(const PointContext& ctx);

// Spread of R_ex, R_in and F^2 over a set of contexts.
struct ConstancyStats {
  bool evaluated = false;
  double rex_mean = 0.0, rin_mean = 0.0, f2_mean = 0.0;
  double rex_spread = 0.0, rin_spread = 0.0, f2_spread = 0.0;
};
ConstancyStats constancy_check(const KKSpec& spec,
                               std::span<const KKPoint> points);

// Literal-sign calibration: evaluates the curvature-bearing scalar
// relations with each sign convention's values and reports which one
// reproduces the paper's signed equations as printed.
struct CalibrationEntry {
  std::string tag;
  double paper_residual = 0.0;
  double standard_residual = 0.0;
  std::string literal_convention;  // "paper", "standard" or "neither"
};
std::vector<CalibrationEntry> convention_calibration(const PointContext& ctx);

// ---- suite orchestration ----
struct TagStats {
  std::string tag;
  bool applicable = true;
  bool in_verdict = true;
  bool pass = true;
  double max_abs = 0.0;
  double max_rel = 0.0;
  int argmax_point = -1;
  std::string note;
};

struct SuiteConfig {
  int points = 20;
  std::uint64_t seed = 0;
  double tol_rel = 1e-7;        // solution certification
  double tol_analytic = 1e-9;   // analytic zeros
  Convention convention = Convention::Paper;
  int threads = 0;              // 0 = KKFLAT_THREADS env or hw concurrency
};

enum class Suite { Flatness, Integrability, Reduction, QK, All };
Suite suite_from_string(const std::string& s);
std::string to_string(Suite s);

struct SuiteResult {
  std::string suite;
  std::vector<TagStats> tags;
  ConstancyStats constancy;
  std::vector<CalibrationEntry> calibration;
  bool pass = true;
};

// Runs verification tags on a spec. `solution_class` marks specs whose
// solution-branch equations ((13)-(21)) participate in the verdict.
SuiteResult run_verify_suite(const KKSpec& spec, Suite suite,
                             const SuiteConfig& cfg, bool solution_class);

// QK suite on a structure (external-space identities only).
SuiteResult run_qk_suite(const QKStructure& qk, const SuiteConfig& cfg);

// Parallel map over points with deterministic index-ordered results.
int resolve_thread_count(int requested, int jobs);

}  // namespace kkflat
