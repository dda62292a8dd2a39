#pragma once

#include "dwell/analysis.hpp"
#include "dwell/lmi.hpp"

#include <optional>
#include <string>

namespace dwell {

/// Clock-scheduled state-feedback law. The gain at (tau, rho) is
/// K = U(tau, rho) X(rho)^{-1}; the clock saturates at the dwell time, so the
/// gain is frozen once the hold exceeds t_dwell.
struct GainSchedule {
  MatrixPoly U;  // q x n, in (tau, rho)
  MatrixPoly X;  // n x n, in rho only
  double t_dwell = 0.0;
  double gamma = 0.0;  // certified disturbance attenuation

  Matrix gain(double tau, const Vector& rho) const;
};

enum class SynthesisStatus { Feasible, Infeasible, SolverFailure };

const char* to_string(SynthesisStatus s);

struct SynthesisResult {
  SynthesisStatus status = SynthesisStatus::SolverFailure;
  std::optional<GainSchedule> gains;
  double gamma = 0.0;
  double gamma_optimal = 0.0;  // pre-backoff optimum (Minimize mode)
  std::optional<Certificate> tilde_certificate;  // solved P~, Q~, R~ and residuals
  SolveStats stats;  // stats of the solve that produced the returned gains
  std::string message;
};

struct SynthesisOptions {
  GridPlan grid;
  AnsatzDegrees degrees;
  double margin = kDefaultMargin;
  SolverOptions solver;
  GammaMode mode = GammaMode::Minimize;
  double gamma_fixed = 0.0;       // required when mode == Fixed
  UStructure structure = UStructure::Free;
  double backoff = 1.05;          // inflation of the optimal gamma^2 before re-certifying
  bool refine_check = true;
  double refine_tol = 1e-5;
};

/// Designs a gain schedule with guaranteed L2 performance. In Minimize mode
/// the attenuation is optimized first, then inflated by `backoff` and
/// re-certified from the interior for a well-conditioned gain.
SynthesisResult synthesize(const LpvDelaySystem& sys, const DelaySpec& delay,
                           const DwellSpec& dwell, const SynthesisOptions& opts = {});

/// Gains from a solved synthesis assignment.
GainSchedule reconstruct_gain(const SynthesisAnsatz& sa, const Vector& assignment,
                              double t_dwell, double gamma);

/// Theorem-style stability audit of the closed loop (A + B K, C + D K),
/// reusing the analysis machinery with a clock-dependent plant evaluation.
AnalysisResult certify_closed_loop(const LpvDelaySystem& sys, const GainSchedule& gains,
                                   const DelaySpec& delay, const DwellSpec& dwell,
                                   const AnalysisOptions& opts = {});

PlantEval closed_loop_eval(const LpvDelaySystem& sys, const GainSchedule& gains);

// --- gain file I/O (JSON) -----------------------------------------------------
//
// Schema: {"t_dwell","gamma","q","n",
//          "U":[{"exp":[e0,e1,...],"coeff":[[..]]}, ...], "X":[...]}
// Unlike plant files, the exponent vectors here include the clock power as
// their first entry.

std::string gains_to_json(const GainSchedule& gs);
GainSchedule parse_gains(const std::string& json_text);
void save_gains(const GainSchedule& gs, const std::string& path);
GainSchedule load_gains(const std::string& path);

}  // namespace dwell
