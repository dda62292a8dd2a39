#include "dwell/analysis.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <filesystem>
#include <stdexcept>

using namespace dwell;

namespace {

AnalysisOptions small_options() {
  AnalysisOptions opts;
  opts.grid.n_tau = 3;
  opts.grid.n_rho = 3;
  opts.degrees = {1, 1};
  return opts;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("a comfortably stable delayed plant is certified") {
  const LpvDelaySystem sys = tb::scalar_system(-2.0, 0.5);
  const DelaySpec delay{0.3, 0.2};
  const DwellSpec dwell{0.5, 0.05};

  const AnalysisResult res = check_stability(sys, delay, dwell, small_options());
  REQUIRE(res.status == AnalysisStatus::Certified);
  REQUIRE(res.certificate.has_value());
  const Certificate& cert = *res.certificate;

  CHECK(cert.delay.h == delay.h);
  CHECK(cert.dwell.t_dwell == dwell.t_dwell);
  CHECK(cert.worst_grid_eig >= -1e-8);
  CHECK(cert.refined_checked);
  CHECK(cert.refined_ok);
  CHECK(cert.worst_refined_eig >= -1e-5);
  CHECK_FALSE(cert.worst_refined_tag.empty());

  // the solved functions are strictly positive on the domain
  for (double tau : {0.0, 0.25, 0.5})
    for (double r : {0.0, 0.5, 1.0}) {
      CHECK(cert.P.eval(tau, tb::vec1(r))(0, 0) > 0.0);
      CHECK(cert.Q.eval(tau, tb::vec1(r))(0, 0) > 0.0);
      CHECK(cert.R.eval(tau, tb::vec1(r))(0, 0) > 0.0);
    }
}

TEST_CASE("an unstable plant is reported not certified") {
  const LpvDelaySystem sys = tb::scalar_system(1.0, 0.0);
  const DelaySpec delay{0.3, 0.2};
  const DwellSpec dwell{0.5, 0.05};

  const AnalysisResult res = check_stability(sys, delay, dwell, small_options());
  CHECK(res.status == AnalysisStatus::NotCertified);
  CHECK_FALSE(res.certificate.has_value());
  CHECK(res.message.find("infeasible") != std::string::npos);
}

TEST_CASE("parameter-bound bisection brackets the stability margin") {
  // xdot = -2 x + rho x(t - d), delay-independent-stable for rho < 2
  const auto family = [](double v) {
    return tb::scalar_system(-2.0, 0.0, 0.0, v, 0.0, 1.0);
  };
  const DelaySpec delay{0.2, 0.1};
  const DwellSpec dwell{0.3, 0.05};

  AnalysisOptions opts = small_options();
  opts.grid.n_tau = 2;
  opts.grid.n_rho = 2;

  const SweepResult sweep = max_param_bound(family, delay, dwell, 0.5, 4.0, 0.05, opts);
  REQUIRE_FALSE(sweep.never_certified);
  CHECK(sweep.certified_value > 1.0);
  CHECK(sweep.certified_value < 2.1);
  CHECK(sweep.probes.size() >= 3);
  REQUIRE(sweep.best.status == AnalysisStatus::Certified);
  REQUIRE(sweep.best.certificate.has_value());
  CHECK(sweep.best.certificate->refined_checked);

  // monotone frontier: everything certified lies at or below the bound
  for (const auto& probe : sweep.probes)
    if (probe.status == AnalysisStatus::Certified)
      CHECK(probe.value <= sweep.certified_value + 1e-12);
}

TEST_CASE("a family that never certifies is flagged") {
  const auto family = [](double) { return tb::scalar_system(1.0, 0.0); };
  const DelaySpec delay{0.2, 0.1};
  const DwellSpec dwell{0.3, 0.05};

  const SweepResult sweep =
      max_param_bound(family, delay, dwell, 0.1, 1.0, 0.1, small_options());
  CHECK(sweep.never_certified);
  CHECK(sweep.probes.size() == 1);  // the easy endpoint already fails
  CHECK_FALSE(sweep.message.empty());
}

TEST_CASE("dwell-time sweep returns the easy endpoint when everything certifies") {
  const LpvDelaySystem sys = tb::scalar_system(-2.0, 0.3);
  const DelaySpec delay{0.2, 0.1};

  const SweepResult sweep =
      min_dwell_time(sys, delay, 0.05, 0.01, 1.0, 0.05, small_options());
  REQUIRE_FALSE(sweep.never_certified);
  CHECK(sweep.certified_value == doctest::Approx(0.01));
  CHECK(sweep.message.find("whole interval") != std::string::npos);
}

TEST_CASE("certificates round-trip through JSON") {
  const LpvDelaySystem sys = tb::scalar_system(-2.0, 0.5);
  const DelaySpec delay{0.3, 0.2};
  const DwellSpec dwell{0.5, 0.05};
  const AnalysisResult res = check_stability(sys, delay, dwell, small_options());
  REQUIRE(res.status == AnalysisStatus::Certified);
  const Certificate& cert = *res.certificate;

  const Certificate back = parse_certificate(certificate_to_json(cert));
  CHECK(back.P == cert.P);
  CHECK(back.Q == cert.Q);
  CHECK(back.R == cert.R);
  CHECK(back.delay.h == cert.delay.h);
  CHECK(back.delay.mu == cert.delay.mu);
  CHECK(back.dwell.t_dwell == cert.dwell.t_dwell);
  CHECK(back.dwell.kappa == cert.dwell.kappa);
  CHECK(back.worst_grid_eig == cert.worst_grid_eig);
  CHECK(back.refined_checked == cert.refined_checked);
  CHECK(back.refined_ok == cert.refined_ok);
  CHECK(back.worst_refined_eig == cert.worst_refined_eig);
  CHECK(back.worst_refined_tag == cert.worst_refined_tag);

  const auto path =
      (std::filesystem::temp_directory_path() / "dwell_cert_roundtrip.json").string();
  save_certificate(cert, path);
  const Certificate loaded = load_certificate(path);
  CHECK(loaded.P == cert.P);
  std::filesystem::remove(path);

  CHECK_THROWS(parse_certificate("{\"n\": 1}"));
  CHECK_THROWS_AS(load_certificate("/nonexistent/cert.json"), std::runtime_error);
}

TEST_CASE("status strings are stable") {
  CHECK(std::string(to_string(AnalysisStatus::Certified)) == "certified");
  CHECK(std::string(to_string(AnalysisStatus::NotCertified)) == "not-certified");
  CHECK(std::string(to_string(AnalysisStatus::SolverFailure)) == "solver-failure");
}

}  // TEST_SUITE
