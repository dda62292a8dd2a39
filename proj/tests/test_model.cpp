#include "dwell/model.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <stdexcept>

using namespace dwell;

TEST_SUITE("model") {

TEST_CASE("parameter box validation and membership") {
  ParamBox box{tb::vec2(0.0, -1.0), tb::vec2(2.0, 1.0)};
  box.validate();
  CHECK(box.contains(tb::vec2(0.0, -1.0)));
  CHECK(box.contains(tb::vec2(2.0, 1.0)));
  CHECK_FALSE(box.contains(tb::vec2(2.1, 0.0)));
  CHECK(box.contains(tb::vec2(2.05, 0.0), 0.1));
  CHECK_FALSE(box.contains(tb::vec1(0.5)));  // dimension mismatch

  ParamBox bad{tb::vec1(1.0), tb::vec1(0.0)};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  ParamBox empty{Vector(0), Vector(0)};
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
}

TEST_CASE("delay and dwell specifications") {
  DelaySpec{0.0, 0.0}.validate();   // undelayed systems are in scope
  DelaySpec{0.5, 0.999}.validate();
  CHECK_THROWS_AS((DelaySpec{-0.1, 0.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((DelaySpec{0.5, 1.0}.validate()), std::invalid_argument);

  DwellSpec{0.1, 0.01}.validate();
  CHECK_THROWS_AS((DwellSpec{0.0, 0.01}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((DwellSpec{0.1, 0.0}.validate()), std::invalid_argument);
}

TEST_CASE("system validation catches shape and clock misuse") {
  LpvDelaySystem sys = tb::scalar_io_system(-1.0, 0.2, 1.0, 0.5, 1.0, 0.0, 0.0, 0.1);
  sys.validate();

  LpvDelaySystem bad_shape = sys;
  bad_shape.B = MatrixPoly(1, 2, 2, false);  // q == 1 but B is 1x2
  CHECK_THROWS_AS(bad_shape.validate(), std::invalid_argument);

  LpvDelaySystem clocked = sys;
  clocked.A = MatrixPoly(1, 1, 2, false);
  clocked.A.add_term({1, 0}, tb::mat1(1.0));  // plant must not depend on tau
  CHECK_THROWS_AS(clocked.validate(), std::invalid_argument);

  LpvDelaySystem no_states = sys;
  no_states.n = 0;
  CHECK_THROWS_AS(no_states.validate(), std::invalid_argument);
}

TEST_CASE("eval_system inserts the parameter and guards the box") {
  LpvDelaySystem sys = tb::scalar_system(-2.0, -1.0, 0.0, 1.0, 0.5, -0.25);
  const PlantMatrices pm = eval_system(sys, tb::vec1(0.4));
  CHECK(pm.A(0, 0) == doctest::Approx(-2.0 + 0.5 * 0.4));
  CHECK(pm.Ad(0, 0) == doctest::Approx(-1.0 - 0.25 * 0.4));
  CHECK(pm.B.rows() == 1);
  CHECK(pm.B.cols() == 0);
  CHECK_THROWS_AS(eval_system(sys, tb::vec1(1.5)), std::domain_error);
  CHECK_THROWS_AS(eval_system(sys, tb::vec1(-0.5)), std::domain_error);
}

TEST_CASE("piecewise-constant trajectories are right-continuous") {
  PwcTrajectory traj;
  traj.switch_times = {0.0, 1.0, 2.5};
  traj.values = {tb::vec1(0.1), tb::vec1(0.7), tb::vec1(0.3)};
  traj.validate();

  CHECK(traj.segment_index(0.0) == 0);
  CHECK(traj.segment_index(0.999) == 0);
  CHECK(traj.segment_index(1.0) == 1);  // right-continuous at the switch
  CHECK(traj.segment_index(10.0) == 2);
  CHECK(trajectory_value(traj, 1.0)[0] == doctest::Approx(0.7));
  CHECK(trajectory_value(traj, 2.49)[0] == doctest::Approx(0.7));
  CHECK_THROWS_AS(trajectory_value(traj, -0.1), std::domain_error);

  // clock saturates at the dwell time
  CHECK(trajectory_clock(traj, 1.2, 0.5) == doctest::Approx(0.2));
  CHECK(trajectory_clock(traj, 1.9, 0.5) == doctest::Approx(0.5));
  CHECK(trajectory_clock(traj, 4.0, 0.5) == doctest::Approx(0.5));
}

TEST_CASE("trajectory validation enforces dwell spacing and the box") {
  DwellSpec dwell{0.5, 0.01};
  ParamBox box{tb::vec1(0.0), tb::vec1(1.0)};

  PwcTrajectory traj;
  traj.switch_times = {0.0, 0.5, 1.2};
  traj.values = {tb::vec1(0.0), tb::vec1(1.0), tb::vec1(0.5)};
  traj.validate(&dwell, &box);

  PwcTrajectory tight = traj;
  tight.switch_times[2] = 0.9;  // gap 0.4 < dwell 0.5
  CHECK_THROWS_AS(tight.validate(&dwell, &box), std::invalid_argument);

  PwcTrajectory outside = traj;
  outside.values[1] = tb::vec1(1.5);
  CHECK_THROWS_AS(outside.validate(&dwell, &box), std::invalid_argument);

  PwcTrajectory late;
  late.switch_times = {0.5};
  late.values = {tb::vec1(0.0)};
  CHECK_THROWS_AS(late.validate(), std::invalid_argument);

  PwcTrajectory unordered;
  unordered.switch_times = {0.0, 1.0, 1.0};
  unordered.values = {tb::vec1(0.0), tb::vec1(0.1), tb::vec1(0.2)};
  CHECK_THROWS_AS(unordered.validate(), std::invalid_argument);
}

TEST_CASE("plant files round-trip value-identically") {
  PlantFile pf;
  pf.sys.n = 2;
  pf.sys.m = 0;
  pf.sys.q = 1;
  pf.sys.r = 0;
  pf.sys.params.lower = tb::vec1(0.0);
  pf.sys.params.upper = tb::vec1(0.76);
  pf.sys.A = MatrixPoly(2, 2, 2, false);
  pf.sys.A.add_term({0, 0}, tb::mat22(0, 1, -2, -1));
  pf.sys.A.add_term({0, 1}, tb::mat22(0, 0, -1, 0));
  pf.sys.Ad = MatrixPoly(2, 2, 2, false);
  pf.sys.Ad.add_term({0, 0}, tb::mat22(-1, 0, -1, -1));
  pf.sys.Ad.add_term({0, 1}, tb::mat22(0, 0, -1, 0));
  pf.sys.B = MatrixPoly(2, 1, 2, false);
  Matrix b(2, 1);
  b << 0.0, 1.0;
  pf.sys.B.add_term({0, 0}, b);
  pf.sys.C = MatrixPoly(0, 2, 2, false);
  pf.sys.Cd = MatrixPoly(0, 2, 2, false);
  pf.sys.D = MatrixPoly(0, 1, 2, false);
  pf.sys.E = MatrixPoly(2, 0, 2, false);
  pf.sys.F = MatrixPoly(0, 0, 2, false);
  pf.delay = {0.5, 0.5};
  pf.dwell = {1e-4, 0.005};

  const PlantFile back = parse_plant(plant_to_json(pf));
  CHECK(back.sys.n == 2);
  CHECK(back.sys.q == 1);
  CHECK(back.sys.A == pf.sys.A);
  CHECK(back.sys.Ad == pf.sys.Ad);
  CHECK(back.sys.B == pf.sys.B);
  CHECK(back.sys.Cd.is_zero());
  CHECK(back.delay.h == pf.delay.h);
  CHECK(back.delay.mu == pf.delay.mu);
  CHECK(back.dwell.t_dwell == pf.dwell.t_dwell);
  CHECK(back.dwell.kappa == pf.dwell.kappa);
  CHECK(back.sys.params.upper[0] == pf.sys.params.upper[0]);
}

TEST_CASE("omitted matrices parse as zero") {
  const char* text = R"({
    "n": 1, "q": 0, "r": 0,
    "params": {"lower": [0.0], "upper": [1.0]},
    "delay": {"h": 0.1, "mu": 0.0},
    "dwell": {"t_dwell": 0.5, "kappa": 0.01},
    "matrices": {"A": [{"exp": [0], "coeff": [[-1.0]]}]}
  })";
  const PlantFile pf = parse_plant(text);
  CHECK(pf.sys.m == 0);
  CHECK(pf.sys.Ad.is_zero());
  CHECK(pf.sys.A.eval(0.0, tb::vec1(0.3))(0, 0) == doctest::Approx(-1.0));

  // exponent arity must match the declared parameter count
  const char* bad = R"({
    "n": 1, "params": {"lower": [0.0], "upper": [1.0]},
    "delay": {"h": 0.1, "mu": 0.0},
    "dwell": {"t_dwell": 0.5, "kappa": 0.01},
    "matrices": {"A": [{"exp": [0, 1], "coeff": [[-1.0]]}]}
  })";
  CHECK_THROWS_AS(parse_plant(bad), std::invalid_argument);
}

}  // TEST_SUITE
