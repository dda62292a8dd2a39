#pragma once

#include "dwell/lmi.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dwell {

enum class AnalysisStatus { Certified, NotCertified, SolverFailure };

const char* to_string(AnalysisStatus s);

/// Concrete Lyapunov-Krasovskii certificate: the solved matrix functions plus
/// the context they were certified under and residual diagnostics.
struct Certificate {
  MatrixPoly P, Q, R;
  DelaySpec delay;
  DwellSpec dwell;
  double worst_grid_eig = 0.0;     // min eigenvalue over all assembled blocks
  double worst_refined_eig = 0.0;  // same over the doubled grid (if checked)
  std::string worst_refined_tag;
  bool refined_checked = false;
  bool refined_ok = true;
};

struct AnalysisResult {
  AnalysisStatus status = AnalysisStatus::SolverFailure;
  std::optional<Certificate> certificate;
  SolveStats stats;
  std::string message;
};

struct AnalysisOptions {
  GridPlan grid;
  AnsatzDegrees degrees;
  double margin = kDefaultMargin;
  SolverOptions solver;
  bool refine_check = true;    // re-verify the certificate on a doubled grid
  double refine_tol = 1e-5;    // acceptable eigenvalue violation off-grid
};

/// Certifies uniform asymptotic stability of the unforced system for the
/// given delay class and dwell time.
AnalysisResult check_stability(const LpvDelaySystem& sys, const DelaySpec& delay,
                               const DwellSpec& dwell, const AnalysisOptions& opts = {});

/// One-parameter family of plants, e.g. indexed by a parameter-box radius.
using SystemFamily = std::function<LpvDelaySystem(double)>;

struct SweepProbe {
  double value = 0.0;
  AnalysisStatus status = AnalysisStatus::SolverFailure;
  int iterations = 0;
  double seconds = 0.0;
};

struct SweepResult {
  bool never_certified = false;
  double certified_value = 0.0;  // meaningful only when !never_certified
  std::vector<SweepProbe> probes;
  AnalysisResult best;  // full result at certified_value (refined check applied)
  std::string message;
};

/// Largest v in [lo, hi] whose plant family(v) is certified, by bisection.
/// Assumes certifiability is monotone (harder as v grows). Solver failures
/// count as not certified but are recorded in the probe log.
SweepResult max_param_bound(const SystemFamily& family, const DelaySpec& delay,
                            const DwellSpec& dwell, double lo, double hi, double value_tol,
                            const AnalysisOptions& opts = {});

/// Smallest dwell time in [lo, hi] under which the plant is certified, by
/// bisection (easier as the dwell time grows).
SweepResult min_dwell_time(const LpvDelaySystem& sys, const DelaySpec& delay, double kappa,
                           double lo, double hi, double value_tol,
                           const AnalysisOptions& opts = {});

// --- certificate file I/O (JSON) ------------------------------------------------
//
// Schema: {"n", "delay": {"h","mu"}, "dwell": {"t_dwell","kappa"},
//          "P":[{"exp":[e0,e1,...],"coeff":[[..]]}, ...], "Q":[...], "R":[...],
//          plus the residual diagnostics}. Exponent vectors include the clock
// power as their first entry.

std::string certificate_to_json(const Certificate& cert);
Certificate parse_certificate(const std::string& json_text);
void save_certificate(const Certificate& cert, const std::string& path);
Certificate load_certificate(const std::string& path);

}  // namespace dwell
