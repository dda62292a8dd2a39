#include "dwell/synthesis.hpp"

#include "poly_json.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace dwell {

using nlohmann::json;

const char* to_string(SynthesisStatus s) {
  switch (s) {
    case SynthesisStatus::Feasible: return "feasible";
    case SynthesisStatus::Infeasible: return "infeasible";
    case SynthesisStatus::SolverFailure: return "solver-failure";
  }
  return "?";
}

Matrix GainSchedule::gain(double tau, const Vector& rho) const {
  const double tau_c = std::clamp(tau, 0.0, t_dwell);
  const Matrix Ue = U.eval(tau_c, rho);
  const Matrix Xe = X.eval(tau_c, rho);
  Eigen::FullPivLU<Matrix> lu(Xe.transpose());
  if (!lu.isInvertible())
    throw std::runtime_error("gain reconstruction: X(rho) is numerically singular");
  // K X = U  <=>  X^T K^T = U^T
  return lu.solve(Ue.transpose()).transpose();
}

GainSchedule reconstruct_gain(const SynthesisAnsatz& sa, const Vector& assignment,
                              double t_dwell, double gamma) {
  GainSchedule gs;
  gs.U = sa.U.extract(assignment);
  gs.X = sa.X.extract(assignment);
  gs.t_dwell = t_dwell;
  gs.gamma = gamma;
  return gs;
}

PlantEval closed_loop_eval(const LpvDelaySystem& sys, const GainSchedule& gains) {
  return [sys, gains](double tau, const Vector& rho) {
    PlantMatrices pm = eval_system(sys, rho);
    const Matrix K = gains.gain(tau, rho);
    pm.A += pm.B * K;
    pm.C += pm.D * K;
    return pm;
  };
}

AnalysisResult certify_closed_loop(const LpvDelaySystem& sys, const GainSchedule& gains,
                                   const DelaySpec& delay, const DwellSpec& dwell,
                                   const AnalysisOptions& opts) {
  sys.validate();
  const PlantEval cl = closed_loop_eval(sys, gains);
  AnalysisProblem ap = assemble_analysis(cl, sys.n, sys.params.dim(), sys.params, delay,
                                         dwell, opts.grid, opts.degrees, opts.margin);
  const SdpSolution sol = solve(ap.sdp, opts.solver);

  AnalysisResult out;
  out.stats = sol.stats;
  if (sol.status == SolveStatus::Infeasible) {
    out.status = AnalysisStatus::NotCertified;
    out.message = "closed-loop LMI system infeasible on the grid: " + sol.stats.message;
    return out;
  }
  if (sol.status == SolveStatus::NumericalFailure) {
    out.status = AnalysisStatus::SolverFailure;
    out.message = "solver failed: " + sol.stats.message;
    return out;
  }

  Certificate cert;
  cert.P = ap.ansatz.P.extract(sol.assignment);
  cert.Q = ap.ansatz.Q.extract(sol.assignment);
  cert.R = ap.ansatz.R.extract(sol.assignment);
  cert.delay = delay;
  cert.dwell = dwell;
  cert.worst_grid_eig = sol.stats.worst_block_eig;
  out.status = AnalysisStatus::Certified;
  out.message = "closed loop certified";

  if (opts.refine_check) {
    const Grid fine = build_grid(refine_plan(opts.grid), dwell, sys.params);
    const auto blocks = analysis_blocks(cl, sys.n, delay, dwell, ap.ansatz, fine, opts.margin);
    double worst = std::numeric_limits<double>::infinity();
    std::string worst_tag;
    for (const ConstraintBlock& b : blocks) {
      const double e = b.min_eigenvalue(sol.assignment);
      if (e < worst) {
        worst = e;
        worst_tag = b.tag;
      }
    }
    cert.refined_checked = true;
    cert.worst_refined_eig = worst;
    cert.worst_refined_tag = worst_tag;
    cert.refined_ok = worst >= -opts.refine_tol;
    if (!cert.refined_ok)
      out.message += "; refined-grid violation " + std::to_string(worst) + " at " + worst_tag;
  }
  out.certificate = std::move(cert);
  return out;
}

namespace {

std::string format_val(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

/// Worst eigenvalue of the synthesis constraints on a doubled grid.
void refined_synthesis_check(const LpvDelaySystem& sys, const DelaySpec& delay,
                             const DwellSpec& dwell, const SynthesisOptions& opts,
                             const SynthesisAnsatz& sa, const Vector& x, Certificate& cert,
                             std::string& message) {
  const Grid fine = build_grid(refine_plan(opts.grid), dwell, sys.params);
  const auto blocks = synthesis_blocks(make_plant_eval(sys), sys.n, sys.m, sys.q, sys.r,
                                       delay, dwell, sa, fine, opts.margin);
  double worst = std::numeric_limits<double>::infinity();
  std::string worst_tag;
  for (const ConstraintBlock& b : blocks) {
    const double e = b.min_eigenvalue(x);
    if (e < worst) {
      worst = e;
      worst_tag = b.tag;
    }
  }
  cert.refined_checked = true;
  cert.worst_refined_eig = worst;
  cert.worst_refined_tag = worst_tag;
  cert.refined_ok = worst >= -opts.refine_tol;
  if (!cert.refined_ok)
    message += "; refined-grid violation " + format_val(worst) + " at " + worst_tag;
}

}  // namespace

SynthesisResult synthesize(const LpvDelaySystem& sys, const DelaySpec& delay,
                           const DwellSpec& dwell, const SynthesisOptions& opts) {
  SynthesisResult out;
  if (opts.mode == GammaMode::Fixed && !(opts.gamma_fixed > 0.0)) {
    out.status = SynthesisStatus::SolverFailure;
    out.message = "fixed-gamma synthesis needs a positive gamma";
    return out;
  }
  if (!(opts.backoff >= 1.0)) {
    out.status = SynthesisStatus::SolverFailure;
    out.message = "backoff must be at least 1";
    return out;
  }

  double gamma_cert = opts.gamma_fixed;
  Vector assignment;
  SynthesisProblem certified_problem;

  if (opts.mode == GammaMode::Minimize) {
    SynthesisProblem min_problem =
        assemble_synthesis(sys, delay, dwell, opts.grid, opts.degrees, GammaMode::Minimize,
                           0.0, opts.structure, opts.margin);
    const SdpSolution min_sol = solve(min_problem.sdp, opts.solver);
    out.stats = min_sol.stats;
    if (min_sol.status == SolveStatus::Infeasible) {
      out.status = SynthesisStatus::Infeasible;
      out.message = "synthesis LMIs infeasible: " + min_sol.stats.message;
      return out;
    }
    if (min_sol.status == SolveStatus::NumericalFailure) {
      out.status = SynthesisStatus::SolverFailure;
      out.message = "gamma minimization failed: " + min_sol.stats.message;
      return out;
    }
    const double gamma_sq_opt = min_sol.assignment[min_problem.ansatz.gamma_sq_var];
    out.gamma_optimal = std::sqrt(std::max(gamma_sq_opt, 0.0));
    gamma_cert = std::sqrt(opts.backoff * std::max(gamma_sq_opt, 0.0));
    if (!(gamma_cert > 0.0)) gamma_cert = 1e-12;  // zero-gain plant edge case

    // Re-certify at the backed-off level from deep inside the feasible set:
    // the centered point yields better-conditioned gains and off-grid slack.
    certified_problem =
        assemble_synthesis(sys, delay, dwell, opts.grid, opts.degrees, GammaMode::Fixed,
                           gamma_cert, opts.structure, opts.margin);
    const SdpSolution fix_sol = solve(certified_problem.sdp, opts.solver);
    if (fix_sol.status == SolveStatus::Optimal) {
      assignment = fix_sol.assignment;
      out.stats = fix_sol.stats;
    } else {
      // Fall back on the verified minimizer; variable ids agree because the
      // gamma variable is registered last.
      assignment = min_sol.assignment.head(certified_problem.sdp.num_vars);
      gamma_cert = std::sqrt(std::max(gamma_sq_opt, 0.0));
      certified_problem.ansatz.gamma_sq_value = gamma_sq_opt;
      out.message = "re-centering at the backed-off gamma failed (" +
                    fix_sol.stats.message + "); returning the minimizer; ";
    }
  } else {
    certified_problem =
        assemble_synthesis(sys, delay, dwell, opts.grid, opts.degrees, GammaMode::Fixed,
                           gamma_cert, opts.structure, opts.margin);
    const SdpSolution sol = solve(certified_problem.sdp, opts.solver);
    out.stats = sol.stats;
    if (sol.status == SolveStatus::Infeasible) {
      out.status = SynthesisStatus::Infeasible;
      out.message = "synthesis LMIs infeasible at gamma = " + format_val(gamma_cert) + ": " +
                    sol.stats.message;
      return out;
    }
    if (sol.status == SolveStatus::NumericalFailure) {
      out.status = SynthesisStatus::SolverFailure;
      out.message = "solver failed: " + sol.stats.message;
      return out;
    }
    assignment = sol.assignment;
  }

  out.status = SynthesisStatus::Feasible;
  out.gamma = gamma_cert;
  out.gains = reconstruct_gain(certified_problem.ansatz, assignment, dwell.t_dwell, gamma_cert);

  Certificate cert;
  cert.P = certified_problem.ansatz.P.extract(assignment);
  cert.Q = certified_problem.ansatz.Q.extract(assignment);
  cert.R = certified_problem.ansatz.R.extract(assignment);
  cert.delay = delay;
  cert.dwell = dwell;
  cert.worst_grid_eig = out.stats.worst_block_eig;
  out.message += "feasible with gamma = " + format_val(gamma_cert);
  if (opts.refine_check)
    refined_synthesis_check(sys, delay, dwell, opts, certified_problem.ansatz, assignment,
                            cert, out.message);
  out.tilde_certificate = std::move(cert);
  return out;
}

// --- JSON I/O -------------------------------------------------------------------

std::string gains_to_json(const GainSchedule& gs) {
  json j{{"t_dwell", gs.t_dwell},
         {"gamma", gs.gamma},
         {"q", gs.U.rows()},
         {"n", gs.U.cols()},
         {"U", detail::poly_terms_to_json(gs.U)},
         {"X", detail::poly_terms_to_json(gs.X)}};
  return j.dump(2);
}

GainSchedule parse_gains(const std::string& json_text) {
  const json j = json::parse(json_text);
  const int q = j.at("q").get<int>();
  const int n = j.at("n").get<int>();
  GainSchedule gs;
  gs.t_dwell = j.at("t_dwell").get<double>();
  gs.gamma = j.at("gamma").get<double>();
  gs.U = detail::poly_terms_from_json(j.at("U"), q, n);
  gs.X = detail::poly_terms_from_json(j.at("X"), n, n);
  if (!(gs.t_dwell > 0.0)) throw std::invalid_argument("gain file: t_dwell must be positive");
  return gs;
}

void save_gains(const GainSchedule& gs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << gains_to_json(gs) << "\n";
}

GainSchedule load_gains(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_gains(text);
}

}  // namespace dwell
