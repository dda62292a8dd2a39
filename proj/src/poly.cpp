#include "dwell/poly.hpp"

#include <cmath>
#include <stdexcept>

namespace dwell {

namespace {

void check_exponents(const Exponents& exps, int var_count) {
  if (static_cast<int>(exps.size()) != var_count)
    throw std::invalid_argument("exponent multi-index length does not match variable count");
  for (int e : exps)
    if (e < 0) throw std::invalid_argument("negative exponent");
}

}  // namespace

MatrixPoly::MatrixPoly(int rows, int cols, int var_count, bool symmetric)
    : rows_(rows), cols_(cols), var_count_(var_count), symmetric_(symmetric) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("negative dimension");
  if (var_count < 1) throw std::invalid_argument("var_count must be >= 1 (clock variable)");
  if (symmetric && rows != cols) throw std::invalid_argument("symmetric polynomial must be square");
}

MatrixPoly MatrixPoly::constant(const Matrix& value, int var_count) {
  bool sym = value.rows() == value.cols() &&
             (value.rows() == 0 || (value - value.transpose()).cwiseAbs().maxCoeff() == 0.0);
  MatrixPoly p(static_cast<int>(value.rows()), static_cast<int>(value.cols()), var_count, sym);
  if (value.size() > 0 && value.cwiseAbs().maxCoeff() != 0.0)
    p.add_term(Exponents(var_count, 0), value);
  return p;
}

MatrixPoly& MatrixPoly::add_term(const Exponents& exps, const Matrix& coeff) {
  check_exponents(exps, var_count_);
  if (coeff.rows() != rows_ || coeff.cols() != cols_)
    throw std::invalid_argument("coefficient shape mismatch");
  if (symmetric_ && rows_ > 0 &&
      (coeff - coeff.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + coeff.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("non-symmetric coefficient in symmetric polynomial");
  auto it = terms_.find(exps);
  if (it == terms_.end())
    terms_.emplace(exps, coeff);
  else
    it->second += coeff;
  return *this;
}

double monomial_weight(const Exponents& exps, double tau, const Vector& rho) {
  double w = std::pow(tau, exps[0]);
  for (size_t i = 1; i < exps.size(); ++i) w *= std::pow(rho[static_cast<int>(i) - 1], exps[i]);
  return w;
}

double monomial_weight_dtau(const Exponents& exps, double tau, const Vector& rho) {
  if (exps[0] == 0) return 0.0;
  double w = exps[0] * std::pow(tau, exps[0] - 1);
  for (size_t i = 1; i < exps.size(); ++i) w *= std::pow(rho[static_cast<int>(i) - 1], exps[i]);
  return w;
}

Matrix MatrixPoly::eval(double tau, const Vector& rho) const {
  if (rho.size() != param_count())
    throw std::invalid_argument("rho length does not match polynomial parameter count");
  Matrix out = Matrix::Zero(rows_, cols_);
  for (const auto& [exps, coeff] : terms_) out += monomial_weight(exps, tau, rho) * coeff;
  return out;
}

MatrixPoly MatrixPoly::d_dtau() const {
  MatrixPoly out(rows_, cols_, var_count_, symmetric_);
  for (const auto& [exps, coeff] : terms_) {
    if (exps[0] == 0) continue;
    Exponents de = exps;
    de[0] -= 1;
    out.add_term(de, static_cast<double>(exps[0]) * coeff);
  }
  return out;
}

bool MatrixPoly::clock_independent() const {
  for (const auto& [exps, coeff] : terms_)
    if (exps[0] > 0) return false;
  return true;
}

int MatrixPoly::degree_tau() const {
  int d = 0;
  for (const auto& [exps, coeff] : terms_) d = std::max(d, exps[0]);
  return d;
}

int MatrixPoly::degree_rho() const {
  int d = 0;
  for (const auto& [exps, coeff] : terms_) {
    int s = 0;
    for (size_t i = 1; i < exps.size(); ++i) s += exps[i];
    d = std::max(d, s);
  }
  return d;
}

MatrixPoly MatrixPoly::operator+(const MatrixPoly& other) const {
  if (rows_ != other.rows_ || cols_ != other.cols_ || var_count_ != other.var_count_)
    throw std::invalid_argument("polynomial shape mismatch in addition");
  MatrixPoly out(rows_, cols_, var_count_, symmetric_ && other.symmetric_);
  for (const auto& [exps, coeff] : terms_) out.add_term(exps, coeff);
  for (const auto& [exps, coeff] : other.terms_) out.add_term(exps, coeff);
  return out;
}

MatrixPoly MatrixPoly::scaled(double factor) const {
  MatrixPoly out(rows_, cols_, var_count_, symmetric_);
  for (const auto& [exps, coeff] : terms_) out.add_term(exps, factor * coeff);
  return out;
}

bool MatrixPoly::operator==(const MatrixPoly& other) const {
  if (rows_ != other.rows_ || cols_ != other.cols_ || var_count_ != other.var_count_ ||
      symmetric_ != other.symmetric_ || terms_.size() != other.terms_.size())
    return false;
  auto it = other.terms_.begin();
  for (const auto& [exps, coeff] : terms_) {
    if (exps != it->first || coeff != it->second) return false;
    ++it;
  }
  return true;
}

}  // namespace dwell
