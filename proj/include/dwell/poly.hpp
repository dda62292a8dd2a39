#pragma once

#include <Eigen/Dense>

#include <map>
#include <vector>

namespace dwell {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Exponent multi-index over (tau, rho_1, ..., rho_s). Index 0 is the clock
/// power, the remaining entries are the parameter powers.
using Exponents = std::vector<int>;

/// Matrix-valued polynomial in the clock tau and the parameter vector rho.
///
/// Terms are stored as a map from exponent multi-index to a dense coefficient
/// matrix, so the term order is deterministic. A polynomial flagged symmetric
/// keeps every coefficient matrix symmetric and evaluates to a symmetric
/// matrix for any (tau, rho).
class MatrixPoly {
public:
  MatrixPoly() = default;
  MatrixPoly(int rows, int cols, int var_count, bool symmetric = false);

  static MatrixPoly constant(const Matrix& value, int var_count);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int var_count() const { return var_count_; }
  int param_count() const { return var_count_ - 1; }
  bool symmetric() const { return symmetric_; }
  bool is_zero() const { return terms_.empty(); }
  const std::map<Exponents, Matrix>& terms() const { return terms_; }

  /// Adds `coeff` to the term with the given exponents (creating it if absent).
  MatrixPoly& add_term(const Exponents& exps, const Matrix& coeff);

  Matrix eval(double tau, const Vector& rho) const;

  /// Formal partial derivative in the clock variable.
  MatrixPoly d_dtau() const;

  /// True when no term has a positive clock exponent.
  bool clock_independent() const;

  int degree_tau() const;
  int degree_rho() const;

  MatrixPoly operator+(const MatrixPoly& other) const;
  MatrixPoly scaled(double factor) const;

  bool operator==(const MatrixPoly& other) const;

private:
  int rows_ = 0;
  int cols_ = 0;
  int var_count_ = 1;
  bool symmetric_ = false;
  std::map<Exponents, Matrix> terms_;
};

/// Scalar monomial weight tau^e0 * prod_i rho_i^e_i.
double monomial_weight(const Exponents& exps, double tau, const Vector& rho);

/// d/dtau of the monomial weight.
double monomial_weight_dtau(const Exponents& exps, double tau, const Vector& rho);

}  // namespace dwell
