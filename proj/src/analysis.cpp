#include "dwell/analysis.hpp"

#include "poly_json.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace dwell {

const char* to_string(AnalysisStatus s) {
  switch (s) {
    case AnalysisStatus::Certified: return "certified";
    case AnalysisStatus::NotCertified: return "not-certified";
    case AnalysisStatus::SolverFailure: return "solver-failure";
  }
  return "?";
}

namespace {

std::string format_eig(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

}  // namespace

AnalysisResult check_stability(const LpvDelaySystem& sys, const DelaySpec& delay,
                               const DwellSpec& dwell, const AnalysisOptions& opts) {
  AnalysisProblem ap = assemble_analysis(sys, delay, dwell, opts.grid, opts.degrees, opts.margin);
  const SdpSolution sol = solve(ap.sdp, opts.solver);

  AnalysisResult out;
  out.stats = sol.stats;
  if (sol.status == SolveStatus::Infeasible) {
    out.status = AnalysisStatus::NotCertified;
    out.message = "LMI system infeasible on the grid: " + sol.stats.message;
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
  out.message = "certified (worst grid eigenvalue " + format_eig(cert.worst_grid_eig) + ")";

  if (opts.refine_check) {
    const Grid fine = build_grid(refine_plan(opts.grid), dwell, sys.params);
    const auto blocks = analysis_blocks(make_plant_eval(sys), sys.n, delay, dwell, ap.ansatz,
                                        fine, opts.margin);
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
      out.message += "; refined-grid violation " + format_eig(worst) + " at " + worst_tag;
    else
      out.message += "; refined-grid worst eigenvalue " + format_eig(worst);
  }
  out.certificate = std::move(cert);
  return out;
}

namespace {

/// Bisects the certified/uncertified boundary of a monotone predicate.
/// `certified_high` states on which side of the boundary certification holds:
/// true means large values are certified (dwell-time sweeps), false means
/// small values are (parameter-bound sweeps).
SweepResult sweep_bisect(const std::function<AnalysisResult(double, bool)>& probe, double lo,
                         double hi, double value_tol, bool certified_high) {
  if (!(lo < hi)) throw std::invalid_argument("sweep: need lo < hi");
  if (!(value_tol > 0.0)) throw std::invalid_argument("sweep: need a positive value tolerance");

  SweepResult out;
  auto run = [&](double v, bool final_probe) {
    AnalysisResult r = probe(v, final_probe);
    out.probes.push_back({v, r.status, r.stats.iterations, r.stats.solve_seconds});
    return r;
  };

  const double easy = certified_high ? hi : lo;
  const double hard = certified_high ? lo : hi;

  AnalysisResult easy_result = run(easy, false);
  if (easy_result.status != AnalysisStatus::Certified) {
    out.never_certified = true;
    out.message = "not certified anywhere on the sweep interval (checked " +
                  std::to_string(easy) + ")";
    return out;
  }

  AnalysisResult hard_result = run(hard, false);
  if (hard_result.status == AnalysisStatus::Certified) {
    out.certified_value = hard;
    out.best = run(hard, true);
    out.message = "certified across the whole interval";
    return out;
  }

  double good = easy, bad = hard;
  while (std::abs(good - bad) > value_tol) {
    const double mid = 0.5 * (good + bad);
    if (run(mid, false).status == AnalysisStatus::Certified)
      good = mid;
    else
      bad = mid;
  }
  out.certified_value = good;
  out.best = run(good, true);
  if (out.best.status != AnalysisStatus::Certified)
    out.message = "warning: final re-solve at the certified value did not reproduce";
  return out;
}

}  // namespace

SweepResult max_param_bound(const SystemFamily& family, const DelaySpec& delay,
                            const DwellSpec& dwell, double lo, double hi, double value_tol,
                            const AnalysisOptions& opts) {
  auto probe = [&](double v, bool final_probe) {
    AnalysisOptions o = opts;
    o.refine_check = opts.refine_check && final_probe;  // refine only the answer
    return check_stability(family(v), delay, dwell, o);
  };
  return sweep_bisect(probe, lo, hi, value_tol, /*certified_high=*/false);
}

SweepResult min_dwell_time(const LpvDelaySystem& sys, const DelaySpec& delay, double kappa,
                           double lo, double hi, double value_tol,
                           const AnalysisOptions& opts) {
  auto probe = [&](double v, bool final_probe) {
    AnalysisOptions o = opts;
    o.refine_check = opts.refine_check && final_probe;
    return check_stability(sys, delay, DwellSpec{v, kappa}, o);
  };
  return sweep_bisect(probe, lo, hi, value_tol, /*certified_high=*/true);
}

// --- certificate file I/O ---------------------------------------------------------

std::string certificate_to_json(const Certificate& cert) {
  nlohmann::json j{{"n", cert.P.rows()},
                   {"delay", {{"h", cert.delay.h}, {"mu", cert.delay.mu}}},
                   {"dwell", {{"t_dwell", cert.dwell.t_dwell}, {"kappa", cert.dwell.kappa}}},
                   {"P", detail::poly_terms_to_json(cert.P)},
                   {"Q", detail::poly_terms_to_json(cert.Q)},
                   {"R", detail::poly_terms_to_json(cert.R)},
                   {"worst_grid_eig", cert.worst_grid_eig},
                   {"refined_checked", cert.refined_checked},
                   {"refined_ok", cert.refined_ok},
                   {"worst_refined_eig", cert.worst_refined_eig},
                   {"worst_refined_tag", cert.worst_refined_tag}};
  return j.dump(2);
}

Certificate parse_certificate(const std::string& json_text) {
  const nlohmann::json j = nlohmann::json::parse(json_text);
  const int n = j.at("n").get<int>();
  Certificate cert;
  cert.P = detail::poly_terms_from_json(j.at("P"), n, n, /*symmetric=*/true);
  cert.Q = detail::poly_terms_from_json(j.at("Q"), n, n, /*symmetric=*/true);
  cert.R = detail::poly_terms_from_json(j.at("R"), n, n, /*symmetric=*/true);
  cert.delay.h = j.at("delay").at("h").get<double>();
  cert.delay.mu = j.at("delay").at("mu").get<double>();
  cert.dwell.t_dwell = j.at("dwell").at("t_dwell").get<double>();
  cert.dwell.kappa = j.at("dwell").at("kappa").get<double>();
  cert.delay.validate();
  cert.dwell.validate();
  cert.worst_grid_eig = j.value("worst_grid_eig", 0.0);
  cert.refined_checked = j.value("refined_checked", false);
  cert.refined_ok = j.value("refined_ok", true);
  cert.worst_refined_eig = j.value("worst_refined_eig", 0.0);
  cert.worst_refined_tag = j.value("worst_refined_tag", std::string());
  return cert;
}

void save_certificate(const Certificate& cert, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << certificate_to_json(cert) << "\n";
}

Certificate load_certificate(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_certificate(text);
}

}  // namespace dwell
