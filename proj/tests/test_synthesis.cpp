#include "dwell/synthesis.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace dwell;

namespace {

SynthesisOptions small_options() {
  SynthesisOptions opts;
  opts.grid.n_tau = 3;
  opts.grid.n_rho = 3;
  opts.degrees = {1, 1};
  return opts;
}

// open-loop unstable at every rho: A = 1 + 0.2 rho
LpvDelaySystem unstable_plant() {
  LpvDelaySystem sys = tb::scalar_io_system(1.0, 0.2, 1.0, 1.0, 1.0, 0.0, 0.1, 0.0);
  sys.A.add_term({0, 1}, tb::mat1(0.2));
  return sys;
}

}  // namespace

TEST_SUITE("synthesis") {

TEST_CASE("an open-loop unstable plant is stabilized with finite attenuation") {
  const LpvDelaySystem sys = unstable_plant();
  const DelaySpec delay{0.1, 0.5};
  const DwellSpec dwell{0.05, 0.01};

  const SynthesisResult res = synthesize(sys, delay, dwell, small_options());
  REQUIRE(res.status == SynthesisStatus::Feasible);
  REQUIRE(res.gains.has_value());
  CHECK(std::isfinite(res.gamma));
  CHECK(res.gamma > 0.0);
  CHECK(res.gamma_optimal > 0.0);
  CHECK(res.gamma_optimal <= res.gamma + 1e-12);
  CHECK(res.gains->gamma == res.gamma);
  CHECK(res.gains->t_dwell == dwell.t_dwell);
  REQUIRE(res.tilde_certificate.has_value());
  CHECK(res.tilde_certificate->refined_checked);

  // reconstruction identity: K(tau, rho) X(rho) == U(tau, rho)
  for (double tau : {0.0, 0.03, 0.05})
    for (double r : {0.0, 0.4, 1.0}) {
      const Vector rho = tb::vec1(r);
      const Matrix K = res.gains->gain(tau, rho);
      const Matrix lhs = K * res.gains->X.eval(tau, rho);
      const Matrix rhs = res.gains->U.eval(tau, rho);
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + rhs.cwiseAbs().maxCoeff()));
    }

  // the gain freezes once the clock passes the dwell time
  const Vector rho = tb::vec1(0.7);
  CHECK((res.gains->gain(5.0, rho) - res.gains->gain(dwell.t_dwell, rho)).norm() == 0.0);

  // an independent stability audit of the designed loop passes
  AnalysisOptions audit;
  audit.grid.n_tau = 3;
  audit.grid.n_rho = 3;
  audit.degrees = {1, 1};
  const AnalysisResult cl = certify_closed_loop(sys, *res.gains, delay, dwell, audit);
  CHECK(cl.status == AnalysisStatus::Certified);
  REQUIRE(cl.certificate.has_value());
  CHECK(cl.certificate->refined_checked);
}

TEST_CASE("fixed-gamma mode certifies the requested level") {
  const LpvDelaySystem sys = unstable_plant();
  const DelaySpec delay{0.1, 0.5};
  const DwellSpec dwell{0.05, 0.01};

  SynthesisOptions opts = small_options();
  opts.mode = GammaMode::Fixed;
  opts.gamma_fixed = 8.0;
  const SynthesisResult res = synthesize(sys, delay, dwell, opts);
  REQUIRE(res.status == SynthesisStatus::Feasible);
  CHECK(res.gamma == 8.0);
  CHECK(res.gamma_optimal == 0.0);  // nothing was optimized
  CHECK(res.gains.has_value());

  // a gamma below the open feed-through level is structurally impossible:
  // the (w, z) corner of the constraint is indefinite whatever the variables do
  LpvDelaySystem direct = tb::scalar_io_system(-1.0, 0.1, 1.0, 1.0, 1.0, 0.0, 0.0, 0.5);
  SynthesisOptions tight = small_options();
  tight.mode = GammaMode::Fixed;
  tight.gamma_fixed = 0.1;
  const SynthesisResult bad = synthesize(direct, delay, dwell, tight);
  CHECK(bad.status == SynthesisStatus::Infeasible);
  CHECK_FALSE(bad.gains.has_value());
  CHECK(bad.message.find("infeasible") != std::string::npos);

  SynthesisOptions zero = small_options();
  zero.mode = GammaMode::Fixed;
  zero.gamma_fixed = 0.0;
  CHECK(synthesize(direct, delay, dwell, zero).status == SynthesisStatus::SolverFailure);
}

TEST_CASE("an uncontrollable unstable plant is infeasible") {
  // B = 0 and D = 0: the input never enters, and the open loop diverges
  const LpvDelaySystem sys = tb::scalar_io_system(1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0);
  const DelaySpec delay{0.1, 0.5};
  const DwellSpec dwell{0.05, 0.01};

  const SynthesisResult res = synthesize(sys, delay, dwell, small_options());
  CHECK(res.status == SynthesisStatus::Infeasible);
  CHECK_FALSE(res.gains.has_value());
}

TEST_CASE("the split structure pins the gain monomials") {
  const LpvDelaySystem sys = tb::scalar_io_system(-1.0, 0.2, 1.0, 1.0, 1.0, 0.0, 0.0, 0.1);
  const DelaySpec delay{0.1, 0.5};
  const DwellSpec dwell{0.05, 0.01};

  SynthesisOptions opts = small_options();
  opts.structure = UStructure::TauRhoSplit;
  const SynthesisResult res = synthesize(sys, delay, dwell, opts);
  REQUIRE(res.status == SynthesisStatus::Feasible);
  REQUIRE(res.gains.has_value());

  CHECK(res.gains->U.terms().size() <= 2);
  for (const auto& [exps, coeff] : res.gains->U.terms())
    CHECK((exps == Exponents{1, 0} || exps == Exponents{0, 1}));
  CHECK(res.gains->X.terms().size() <= 1);
  for (const auto& [exps, coeff] : res.gains->X.terms()) CHECK(exps == Exponents{0, 0});
  CHECK(res.gains->X.clock_independent());

  // with that structure the gain vanishes at tau = 0, rho = 0
  CHECK(res.gains->gain(0.0, tb::vec1(0.0)).norm() == 0.0);
}

TEST_CASE("gain schedules round-trip through JSON") {
  const LpvDelaySystem sys = unstable_plant();
  const DelaySpec delay{0.1, 0.5};
  const DwellSpec dwell{0.05, 0.01};
  const SynthesisResult res = synthesize(sys, delay, dwell, small_options());
  REQUIRE(res.status == SynthesisStatus::Feasible);
  const GainSchedule& gs = *res.gains;

  const GainSchedule back = parse_gains(gains_to_json(gs));
  CHECK(back.U == gs.U);
  CHECK(back.X == gs.X);
  CHECK(back.t_dwell == gs.t_dwell);
  CHECK(back.gamma == gs.gamma);

  const auto path =
      (std::filesystem::temp_directory_path() / "dwell_gains_roundtrip.json").string();
  save_gains(gs, path);
  const GainSchedule loaded = load_gains(path);
  CHECK(loaded.U == gs.U);
  CHECK((loaded.gain(0.02, tb::vec1(0.5)) - gs.gain(0.02, tb::vec1(0.5))).norm() == 0.0);
  std::filesystem::remove(path);

  CHECK_THROWS(parse_gains("{\"gamma\": 1.0}"));
  CHECK_THROWS_AS(load_gains("/nonexistent/gains.json"), std::runtime_error);
}

TEST_CASE("status strings are stable") {
  CHECK(std::string(to_string(SynthesisStatus::Feasible)) == "feasible");
  CHECK(std::string(to_string(SynthesisStatus::Infeasible)) == "infeasible");
  CHECK(std::string(to_string(SynthesisStatus::SolverFailure)) == "solver-failure");
}

}  // TEST_SUITE
