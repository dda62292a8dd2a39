#include "dwell/consensus.hpp"

#include "dwell/sim.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <array>
#include <functional>
#include <stdexcept>
#include <string>

using namespace dwell;

namespace {

Matrix circulant6(const std::array<double, 6>& c) {
  Matrix L(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) L(i, j) = c[static_cast<size_t>((j - i + 6) % 6)];
  return L;
}

// six oscillators on a ring, coupling slides between next-neighbour and
// two-neighbour topologies
ConsensusNetwork ring_network() {
  ConsensusNetwork net;
  net.A = tb::mat22(0.0, 1.0, -1.0, 0.0);
  net.Ad = net.A;
  net.B = tb::mat22(1.0, 0.0, 0.0, 0.6);
  net.E = 0.05 * net.B;
  net.C = Matrix::Identity(2, 2);
  net.Cd = Matrix::Identity(2, 2);
  net.D = Matrix::Zero(2, 2);
  net.F = 0.1 * Matrix::Identity(2, 2);
  net.L1 = circulant6({1.0, -0.5, 0.0, 0.0, 0.0, -0.5});
  net.L2 = circulant6({1.0, -0.25, -0.25, 0.0, -0.25, -0.25});
  return net;
}

Matrix kron(const Matrix& A, const Matrix& B) {
  Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

bool throws_mentioning(const std::function<void()>& fn, const std::string& needle) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

// a split-structure scalar schedule with hand-picked coefficient matrices
GainSchedule split_gain(const Matrix& Ua, const Matrix& Ub, const Matrix& X) {
  GainSchedule gs;
  gs.U = MatrixPoly(2, 2, 2);
  gs.U.add_term({1, 0}, Ua);
  gs.U.add_term({0, 1}, Ub);
  gs.X = MatrixPoly(2, 2, 2);
  gs.X.add_term({0, 0}, X);
  gs.t_dwell = 0.5;
  gs.gamma = 1.0;
  return gs;
}

const Matrix kUa = (Matrix(2, 2) << 0.3, -0.1, 0.2, 0.5).finished();
const Matrix kUb = (Matrix(2, 2) << -0.4, 0.05, 0.1, -0.2).finished();

}  // namespace

TEST_SUITE("consensus") {

TEST_CASE("the ring topologies have the expected spectra and coupling range") {
  const ConsensusNetwork net = ring_network();
  net.validate();
  CHECK(net.agents() == 6);

  const Vector e1 = Eigen::SelfAdjointEigenSolver<Matrix>(net.L1).eigenvalues();
  const Vector e2 = Eigen::SelfAdjointEigenSolver<Matrix>(net.L2).eigenvalues();
  const std::array<double, 6> want1{0.0, 0.5, 0.5, 1.5, 1.5, 2.0};
  const std::array<double, 6> want2{0.0, 1.0, 1.0, 1.0, 1.5, 1.5};
  for (int i = 0; i < 6; ++i) {
    CHECK(e1[i] == doctest::Approx(want1[static_cast<size_t>(i)]).epsilon(1e-9));
    CHECK(e2[i] == doctest::Approx(want2[static_cast<size_t>(i)]).epsilon(1e-9));
  }

  const ConsensusBuild build = build_consensus(net);
  CHECK(build.lambda_max == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(build.scalarized.params.upper[0] == build.lambda_max);
  CHECK(build.scalarized.params.lower[0] == 0.0);
  CHECK(build.network.params.upper[0] == 1.0);
  CHECK(build.scalarized.n == 2);
  CHECK(build.network.n == 12);
  CHECK(build.network.m == 12);
}

TEST_CASE("the scalarized and stacked plants agree with the Kronecker forms") {
  const ConsensusNetwork net = ring_network();
  const ConsensusBuild build = build_consensus(net);

  // scalarized: the coupling eigenvalue scales the delayed terms only
  for (double rho : {0.0, 0.7, 2.0}) {
    const Vector r = tb::vec1(rho);
    CHECK((build.scalarized.Ad.eval(0.0, r) - rho * net.Ad).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((build.scalarized.Cd.eval(0.0, r) - rho * net.Cd).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((build.scalarized.A.eval(0.0, r) - net.A).cwiseAbs().maxCoeff() == 0.0);
  }

  // stacked: sigma interpolates the Laplacian inside the delayed coupling
  const Matrix at1 = build.network.Ad.eval(0.0, tb::vec1(1.0));
  CHECK((at1 - kron(net.L1, net.Ad)).cwiseAbs().maxCoeff() <= 1e-13);
  const Matrix at0 = build.network.Ad.eval(0.0, tb::vec1(0.0));
  CHECK((at0 - kron(net.L2, net.Ad)).cwiseAbs().maxCoeff() <= 1e-13);
  const Matrix mid = build.network.Ad.eval(0.0, tb::vec1(0.25));
  CHECK((mid - kron(0.25 * net.L1 + 0.75 * net.L2, net.Ad)).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK((build.network.A.eval(0.0, tb::vec1(0.5)) -
         kron(Matrix::Identity(6, 6), net.A)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((build.network.F.eval(0.0, tb::vec1(0.5)) -
         kron(Matrix::Identity(6, 6), net.F)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("bad network data is rejected with a pointed message") {
  CHECK(throws_mentioning(
      [] {
        ConsensusNetwork net = ring_network();
        net.L2 = Matrix::Zero(6, 6);  // a path graph: breaks commutation
        for (int i = 0; i < 5; ++i) {
          net.L2(i, i) += 1.0;
          net.L2(i + 1, i + 1) += 1.0;
          net.L2(i, i + 1) = net.L2(i + 1, i) = -1.0;
        }
        net.validate();
      },
      "do not commute"));

  CHECK(throws_mentioning(
      [] {
        ConsensusNetwork net = ring_network();
        net.L1(0, 1) += 0.1;
        net.validate();
      },
      "symmetric"));

  CHECK(throws_mentioning(
      [] {
        ConsensusNetwork net = ring_network();
        net.L1(0, 0) += 0.1;
        net.validate();
      },
      "row sums"));

  CHECK(throws_mentioning(
      [] {
        ConsensusNetwork net = ring_network();
        net.Ad = Matrix::Zero(3, 3);
        net.validate();
      },
      "Ad"));

  CHECK(throws_mentioning(
      [] {
        ConsensusNetwork net = ring_network();
        net.L1 = Matrix::Zero(6, 6);
        net.L2 = Matrix::Zero(6, 6);
        build_consensus(net);
      },
      "no coupling"));
}

TEST_CASE("lifting reproduces the dyadic gain structure") {
  const ConsensusNetwork net = ring_network();
  const Matrix X = (Matrix(2, 2) << 2.0, 0.5, 0.1, 1.0).finished();
  const GainSchedule gs = split_gain(kUa, kUb, X);

  const GainSchedule lifted = lift_gain(gs, net);
  CHECK(lifted.t_dwell == gs.t_dwell);
  CHECK(lifted.gamma == gs.gamma);
  CHECK(lifted.U.rows() == 12);
  CHECK(lifted.X.rows() == 12);

  const Matrix Xinv = X.inverse();
  const Matrix Ka = kUa * Xinv;
  const Matrix Kb = kUb * Xinv;
  const double tau = 0.07, sigma = 0.3;
  const Matrix Ls = sigma * net.L1 + (1.0 - sigma) * net.L2;
  const Matrix want =
      tau * kron(Matrix::Identity(6, 6), Ka) + kron(Ls, Kb);
  const Matrix got = lifted.gain(tau, tb::vec1(sigma));
  CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-12);

  // the scalar schedule evaluated at a coupling eigenvalue matches the
  // corresponding network mode by construction
  const Matrix Ks = gs.gain(tau, tb::vec1(1.5));
  CHECK((Ks - (tau * Ka + 1.5 * Kb)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("lifting rejects schedules without the split structure") {
  const ConsensusNetwork net = ring_network();

  CHECK(throws_mentioning(
      [&] {
        GainSchedule gs = split_gain(kUa, kUb, Matrix::Identity(2, 2));
        gs.U.add_term({0, 0}, tb::mat22(1, 0, 0, 1));  // constant part not liftable
        lift_gain(gs, net);
      },
      "split structure"));

  CHECK(throws_mentioning(
      [&] {
        GainSchedule gs = split_gain(kUa, kUb, Matrix::Identity(2, 2));
        gs.X.add_term({0, 1}, tb::mat22(0.1, 0, 0, 0.1));
        lift_gain(gs, net);
      },
      "parameter-independent"));

  CHECK(throws_mentioning(
      [&] {
        GainSchedule gs = split_gain(kUa, kUb, Matrix::Zero(2, 2));
        lift_gain(gs, net);
      },
      "singular"));

  CHECK(throws_mentioning(
      [&] {
        GainSchedule gs = split_gain(kUa, kUb, Matrix::Identity(2, 2));
        gs.U = MatrixPoly(1, 2, 2);
        gs.U.add_term({1, 0}, (Matrix(1, 2) << 1.0, 0.0).finished());
        lift_gain(gs, net);
      },
      "shape"));
}

TEST_CASE("network trajectories decompose into scalar modes along eigenvectors") {
  // With sigma held at 1 the coupling is L1 = V diag(lambda) V'. Projecting
  // the stacked closed loop onto each eigenvector yields exactly the
  // scalarized closed loop at rho = lambda_i, so the stacked run must equal
  // the eigenvector recombination of six scalar runs.
  const ConsensusNetwork net = ring_network();
  const ConsensusBuild build = build_consensus(net);
  const GainSchedule gs = split_gain(kUa, kUb, Matrix::Identity(2, 2));
  const GainSchedule lifted = lift_gain(gs, net);

  const DelaySpec delay{0.1, 0.0};
  const DwellSpec dwell{0.5, 0.01};

  Vector x0(12);
  x0 << 2.0, 0.0, -1.5, 0.5, 1.0, -1.0, -0.5, 1.5, 0.5, -2.0, -1.0, 1.0;

  SimConfig cfg;
  cfg.dt = 0.01;
  cfg.horizon = 1.0;
  cfg.x0 = x0;
  const Trajectory net_run =
      simulate(build.network, &lifted, tb::hold(tb::vec1(1.0)), delay, dwell, cfg);
  REQUIRE_FALSE(net_run.diverged);

  const Eigen::SelfAdjointEigenSolver<Matrix> es(net.L1);
  const Matrix V = es.eigenvectors();
  const Vector lambda = es.eigenvalues();

  std::vector<Trajectory> modes;
  for (int i = 0; i < 6; ++i) {
    SimConfig mcfg;
    mcfg.dt = cfg.dt;
    mcfg.horizon = cfg.horizon;
    Vector xi = Vector::Zero(2);
    for (int a = 0; a < 6; ++a) xi += V(a, i) * x0.segment(2 * a, 2);
    mcfg.x0 = xi;
    modes.push_back(
        simulate(build.scalarized, &gs, tb::hold(tb::vec1(lambda[i])), delay, dwell, mcfg));
    REQUIRE(modes.back().times.size() == net_run.times.size());
  }

  for (size_t k : {size_t{0}, net_run.times.size() / 3, net_run.times.size() - 1}) {
    Vector rec = Vector::Zero(12);
    for (int i = 0; i < 6; ++i)
      for (int a = 0; a < 6; ++a) rec.segment(2 * a, 2) += V(a, i) * modes[static_cast<size_t>(i)].states[k];
    CHECK((net_run.states[k] - rec).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

}  // TEST_SUITE
