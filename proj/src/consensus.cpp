#include "dwell/consensus.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <stdexcept>
#include <string>

namespace dwell {

namespace {

Matrix kron(const Matrix& A, const Matrix& B) {
  Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

void add_nonzero(MatrixPoly& p, const Exponents& exps, const Matrix& M) {
  if (M.size() > 0 && M.cwiseAbs().maxCoeff() > 0.0) p.add_term(exps, M);
}

void check_laplacian(const Matrix& L, const char* name) {
  if (L.rows() != L.cols()) throw std::invalid_argument(std::string(name) + " must be square");
  const double scale = 1.0 + (L.size() > 0 ? L.cwiseAbs().maxCoeff() : 0.0);
  if ((L - L.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument(std::string(name) + " must be symmetric");
  const Vector row_sums = L.rowwise().sum();
  if (row_sums.cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument(std::string(name) + " must have zero row sums");
}

}  // namespace

void ConsensusNetwork::validate() const {
  const int n = static_cast<int>(A.rows());
  if (n < 1 || A.cols() != n) throw std::invalid_argument("agent A must be square");
  auto shape = [&](const Matrix& M, int rows, int cols, const char* name) {
    if (M.rows() != rows || M.cols() != cols)
      throw std::invalid_argument(std::string("agent ") + name + " has the wrong shape");
  };
  const int q = static_cast<int>(B.cols());
  const int m = static_cast<int>(E.cols());
  const int r = static_cast<int>(C.rows());
  shape(Ad, n, n, "Ad");
  shape(B, n, q, "B");
  shape(E, n, m, "E");
  shape(C, r, n, "C");
  shape(Cd, r, n, "Cd");
  shape(D, r, q, "D");
  shape(F, r, m, "F");

  check_laplacian(L1, "L1");
  check_laplacian(L2, "L2");
  if (L1.rows() != L2.rows()) throw std::invalid_argument("L1 and L2 disagree on the agent count");
  if (L1.rows() < 2) throw std::invalid_argument("a network needs at least two agents");

  const double scale =
      1.0 + L1.cwiseAbs().maxCoeff() * L2.cwiseAbs().maxCoeff() * static_cast<double>(L1.rows());
  if ((L1 * L2 - L2 * L1).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument(
        "L1 and L2 do not commute; they cannot be diagonalized together, so the "
        "eigenvalue-scalarized design does not cover the interpolated network");
}

ConsensusBuild build_consensus(const ConsensusNetwork& net) {
  net.validate();
  const int N = net.agents();
  const int n = static_cast<int>(net.A.rows());
  const int q = static_cast<int>(net.B.cols());
  const int m = static_cast<int>(net.E.cols());
  const int r = static_cast<int>(net.C.rows());
  const int vc = 2;  // clock + one scheduling parameter

  ConsensusBuild out;

  // sigma L1 + (1 - sigma) L2 has eigenvalues sigma l1_i + (1 - sigma) l2_i
  // along shared eigenvectors, so the range is covered by the endpoint spectra.
  const double lmax1 = Eigen::SelfAdjointEigenSolver<Matrix>(net.L1).eigenvalues().maxCoeff();
  const double lmax2 = Eigen::SelfAdjointEigenSolver<Matrix>(net.L2).eigenvalues().maxCoeff();
  out.lambda_max = std::max(lmax1, lmax2);
  if (!(out.lambda_max > 0.0))
    throw std::invalid_argument("both Laplacians are zero; there is no coupling to schedule on");

  LpvDelaySystem& sc = out.scalarized;
  sc.n = n;
  sc.m = m;
  sc.q = q;
  sc.r = r;
  sc.A = MatrixPoly(n, n, vc);
  sc.Ad = MatrixPoly(n, n, vc);
  sc.B = MatrixPoly(n, q, vc);
  sc.E = MatrixPoly(n, m, vc);
  sc.C = MatrixPoly(r, n, vc);
  sc.Cd = MatrixPoly(r, n, vc);
  sc.D = MatrixPoly(r, q, vc);
  sc.F = MatrixPoly(r, m, vc);
  add_nonzero(sc.A, {0, 0}, net.A);
  add_nonzero(sc.Ad, {0, 1}, net.Ad);  // coupling eigenvalue multiplies the delayed term
  add_nonzero(sc.B, {0, 0}, net.B);
  add_nonzero(sc.E, {0, 0}, net.E);
  add_nonzero(sc.C, {0, 0}, net.C);
  add_nonzero(sc.Cd, {0, 1}, net.Cd);
  add_nonzero(sc.D, {0, 0}, net.D);
  add_nonzero(sc.F, {0, 0}, net.F);
  sc.params.lower = Vector::Zero(1);
  sc.params.upper = Vector::Constant(1, out.lambda_max);
  sc.validate();

  const Matrix I = Matrix::Identity(N, N);
  const Matrix dL = net.L1 - net.L2;
  LpvDelaySystem& nw = out.network;
  nw.n = N * n;
  nw.m = N * m;
  nw.q = N * q;
  nw.r = N * r;
  nw.A = MatrixPoly(N * n, N * n, vc);
  nw.Ad = MatrixPoly(N * n, N * n, vc);
  nw.B = MatrixPoly(N * n, N * q, vc);
  nw.E = MatrixPoly(N * n, N * m, vc);
  nw.C = MatrixPoly(N * r, N * n, vc);
  nw.Cd = MatrixPoly(N * r, N * n, vc);
  nw.D = MatrixPoly(N * r, N * q, vc);
  nw.F = MatrixPoly(N * r, N * m, vc);
  add_nonzero(nw.A, {0, 0}, kron(I, net.A));
  add_nonzero(nw.Ad, {0, 0}, kron(net.L2, net.Ad));
  add_nonzero(nw.Ad, {0, 1}, kron(dL, net.Ad));
  add_nonzero(nw.B, {0, 0}, kron(I, net.B));
  add_nonzero(nw.E, {0, 0}, kron(I, net.E));
  add_nonzero(nw.C, {0, 0}, kron(I, net.C));
  add_nonzero(nw.Cd, {0, 0}, kron(net.L2, net.Cd));
  add_nonzero(nw.Cd, {0, 1}, kron(dL, net.Cd));
  add_nonzero(nw.D, {0, 0}, kron(I, net.D));
  add_nonzero(nw.F, {0, 0}, kron(I, net.F));
  nw.params.lower = Vector::Zero(1);
  nw.params.upper = Vector::Constant(1, 1.0);
  nw.validate();

  return out;
}

GainSchedule lift_gain(const GainSchedule& scalar_gain, const ConsensusNetwork& net) {
  net.validate();
  const int N = net.agents();
  const int n = static_cast<int>(net.A.rows());
  const int q = static_cast<int>(net.B.cols());
  if (scalar_gain.U.rows() != q || scalar_gain.U.cols() != n)
    throw std::invalid_argument("lift_gain: gain shape does not match the agent plant");
  if (scalar_gain.U.var_count() != 2 || scalar_gain.X.var_count() != 2)
    throw std::invalid_argument("lift_gain: the gain must be scheduled on one parameter");

  Matrix Xc;
  for (const auto& [exps, coeff] : scalar_gain.X.terms()) {
    if (exps != Exponents{0, 0})
      throw std::invalid_argument(
          "lift_gain: needs a parameter-independent X factor (split-structure synthesis)");
    Xc = coeff;
  }
  if (Xc.size() == 0) throw std::invalid_argument("lift_gain: X factor is zero");

  Matrix Ua = Matrix::Zero(q, n), Ub = Matrix::Zero(q, n);
  for (const auto& [exps, coeff] : scalar_gain.U.terms()) {
    if (exps == Exponents{1, 0})
      Ua = coeff;
    else if (exps == Exponents{0, 1})
      Ub = coeff;
    else
      throw std::invalid_argument(
          "lift_gain: needs the split structure U = tau*Ua + rho*Ub");
  }

  Eigen::FullPivLU<Matrix> lu(Xc.transpose());
  if (!lu.isInvertible()) throw std::invalid_argument("lift_gain: X factor is singular");
  const Matrix Ka = lu.solve(Ua.transpose()).transpose();
  const Matrix Kb = lu.solve(Ub.transpose()).transpose();

  GainSchedule out;
  out.t_dwell = scalar_gain.t_dwell;
  out.gamma = scalar_gain.gamma;
  out.U = MatrixPoly(N * q, N * n, 2);
  add_nonzero(out.U, {1, 0}, kron(Matrix::Identity(N, N), Ka));
  add_nonzero(out.U, {0, 0}, kron(net.L2, Kb));
  add_nonzero(out.U, {0, 1}, kron(net.L1 - net.L2, Kb));
  out.X = MatrixPoly(N * n, N * n, 2, /*symmetric=*/true);
  out.X.add_term({0, 0}, Matrix::Identity(N * n, N * n));
  return out;
}

}  // namespace dwell
