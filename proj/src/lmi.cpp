#include "dwell/lmi.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <utility>

namespace dwell {

namespace {

std::string format_vec(const Vector& v) {
  std::string out = "(";
  char buf[40];
  for (int i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.6g", v[i]);
    if (i) out += ",";
    out += buf;
  }
  out += ")";
  return out;
}

std::string format_scalar(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string exponents_label(const Exponents& e) {
  std::string out = "[";
  for (size_t i = 0; i < e.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(e[i]);
  }
  out += "]";
  return out;
}

}  // namespace

// --- GridPlan / Grid ---------------------------------------------------------

void GridPlan::validate() const {
  if (n_tau < 2) throw std::invalid_argument("GridPlan: n_tau must be at least 2");
  if (n_rho < 2) throw std::invalid_argument("GridPlan: n_rho must be at least 2");
  if (!include_endpoints)
    throw std::invalid_argument("GridPlan: endpoints of the clock and parameter ranges "
                                "must be included; interior-only grids are not supported");
}

namespace {

std::vector<double> linspace(double a, double b, int count) {
  if (b <= a) return {a};
  std::vector<double> out(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i)
    out[static_cast<size_t>(i)] = a + (b - a) * static_cast<double>(i) / (count - 1);
  out.front() = a;
  out.back() = b;
  return out;
}

}  // namespace

Grid build_grid(const GridPlan& plan, const DwellSpec& dwell, const ParamBox& box) {
  plan.validate();
  dwell.validate();
  box.validate();

  Grid grid;
  grid.taus = linspace(0.0, dwell.t_dwell, plan.n_tau);

  const int s = box.dim();
  std::vector<std::vector<double>> axes(static_cast<size_t>(s));
  for (int i = 0; i < s; ++i)
    axes[static_cast<size_t>(i)] = linspace(box.lower[i], box.upper[i], plan.n_rho);

  // Cartesian product, lexicographic with axis 0 most significant.
  std::vector<size_t> idx(static_cast<size_t>(s), 0);
  while (true) {
    Vector rho(s);
    for (int i = 0; i < s; ++i) rho[i] = axes[static_cast<size_t>(i)][idx[static_cast<size_t>(i)]];
    grid.rhos.push_back(rho);
    int axis = s - 1;
    while (axis >= 0) {
      if (++idx[static_cast<size_t>(axis)] < axes[static_cast<size_t>(axis)].size()) break;
      idx[static_cast<size_t>(axis)] = 0;
      --axis;
    }
    if (axis < 0) break;
  }
  return grid;
}

GridPlan refine_plan(const GridPlan& plan) {
  GridPlan fine = plan;
  fine.n_tau = 2 * plan.n_tau - 1;
  fine.n_rho = 2 * plan.n_rho - 1;
  return fine;
}

// --- DecisionPoly ------------------------------------------------------------

DecisionPoly DecisionPoly::make(VarPool& pool, const std::string& name, int rows, int cols,
                                int var_count, int deg_tau, int deg_rho, bool symmetric) {
  if (deg_tau < 0 || deg_rho < 0)
    throw std::invalid_argument("DecisionPoly: negative degree cap");
  const int s = var_count - 1;
  if (s < 0) throw std::invalid_argument("DecisionPoly: var_count must be >= 1");

  // All monomials tau^e0 rho_1^e1 ... with e0 <= deg_tau and e_i <= deg_rho,
  // in lexicographic order (clock exponent most significant).
  std::vector<Exponents> monos;
  Exponents e(static_cast<size_t>(var_count), 0);
  while (true) {
    monos.push_back(e);
    int axis = var_count - 1;
    while (axis >= 0) {
      const int cap = (axis == 0) ? deg_tau : deg_rho;
      if (++e[static_cast<size_t>(axis)] <= cap) break;
      e[static_cast<size_t>(axis)] = 0;
      --axis;
    }
    if (axis < 0) break;
  }
  return make_structured(pool, name, rows, cols, var_count, std::move(monos), symmetric);
}

DecisionPoly DecisionPoly::make_structured(VarPool& pool, const std::string& name, int rows,
                                           int cols, int var_count,
                                           std::vector<Exponents> monomials, bool symmetric) {
  if (rows <= 0 || cols <= 0) throw std::invalid_argument("DecisionPoly: empty shape");
  if (symmetric && rows != cols)
    throw std::invalid_argument("DecisionPoly: symmetric block must be square");
  if (monomials.empty()) throw std::invalid_argument("DecisionPoly: no monomials");
  for (const Exponents& e : monomials) {
    if (static_cast<int>(e.size()) != var_count)
      throw std::invalid_argument("DecisionPoly: monomial arity mismatch");
    for (int p : e)
      if (p < 0) throw std::invalid_argument("DecisionPoly: negative exponent");
  }

  DecisionPoly dp;
  dp.rows_ = rows;
  dp.cols_ = cols;
  dp.var_count_ = var_count;
  dp.symmetric_ = symmetric;
  dp.monomials_ = std::move(monomials);

  const int bs = dp.block_size();
  dp.base_.reserve(dp.monomials_.size());
  for (const Exponents& mono : dp.monomials_) {
    const std::string prefix = name + exponents_label(mono);
    dp.base_.push_back(pool.size());
    for (int k = 0; k < bs; ++k) {
      const EntryRef er = dp.entry(k);
      pool.add(prefix + "(" + std::to_string(er.a) + "," + std::to_string(er.b) + ")");
    }
  }
  return dp;
}

int DecisionPoly::block_size() const {
  return symmetric_ ? rows_ * (rows_ + 1) / 2 : rows_ * cols_;
}

DecisionPoly::EntryRef DecisionPoly::entry(int k) const {
  if (!symmetric_) return {k / cols_, k % cols_, 1.0};
  // Lower triangle, column-major: (0,0),(1,0),...,(n-1,0),(1,1),...
  int b = 0;
  int remaining = k;
  while (remaining >= rows_ - b) {
    remaining -= rows_ - b;
    ++b;
  }
  const int a = b + remaining;
  return {a, b, a == b ? 1.0 : 1.0 / std::sqrt(2.0)};
}

double DecisionPoly::weight(int mono, double tau, const Vector& rho) const {
  return monomial_weight(monomials_[static_cast<size_t>(mono)], tau, rho);
}

double DecisionPoly::weight_dtau(int mono, double tau, const Vector& rho) const {
  return monomial_weight_dtau(monomials_[static_cast<size_t>(mono)], tau, rho);
}

MatrixPoly DecisionPoly::extract(const Vector& x) const {
  MatrixPoly out(rows_, cols_, var_count_, symmetric_);
  const int bs = block_size();
  for (int i = 0; i < monomial_count(); ++i) {
    Matrix coeff = Matrix::Zero(rows_, cols_);
    for (int k = 0; k < bs; ++k) {
      const EntryRef er = entry(k);
      const double v = x[var_id(i, k)];
      coeff(er.a, er.b) += er.scale * v;
      if (symmetric_ && er.a != er.b) coeff(er.b, er.a) += er.scale * v;
    }
    if (coeff.cwiseAbs().maxCoeff() > 0.0) out.add_term(monomials_[static_cast<size_t>(i)], coeff);
  }
  return out;
}

// --- LmiConstraint -----------------------------------------------------------

LmiConstraint::LmiConstraint(int dim, Sense sense, double margin, std::string tag)
    : dim_(dim), sense_(sense), margin_(margin), tag_(std::move(tag)) {
  if (dim <= 0) throw std::invalid_argument("LmiConstraint: empty block");
  if (sense == Sense::NegativeDefinite && margin <= 0.0)
    throw std::invalid_argument("LmiConstraint: strict inequality needs a positive margin");
  if (margin < 0.0) throw std::invalid_argument("LmiConstraint: negative margin");
  constant_ = Matrix::Zero(dim, dim);
}

void LmiConstraint::add_const(int r0, int c0, const Matrix& M, bool mirror) {
  constant_.block(r0, c0, M.rows(), M.cols()) += M;
  if (mirror) constant_.block(c0, r0, M.cols(), M.rows()) += M.transpose();
}

void LmiConstraint::add_var(const DecisionPoly& dp, int mono, double w, const Matrix* L,
                            const Matrix* R, int r0, int c0, bool transposed, bool mirror) {
  if (w == 0.0) return;
  const int vr = dp.rows(), vc = dp.cols();
  const int p = L ? static_cast<int>(L->rows()) : vr;
  const int q = R ? static_cast<int>(R->cols()) : vc;
  const int bs = dp.block_size();
  Vector lcol(p), rrow(q);

  for (int k = 0; k < bs; ++k) {
    const DecisionPoly::EntryRef er = dp.entry(k);
    Matrix& Cv = coeffs_.try_emplace(dp.var_id(mono, k), Matrix::Zero(dim_, dim_)).first->second;

    // At most two unit entries of the basis matrix: (a,b) and, when the block
    // is symmetric and off-diagonal, (b,a). Each contributes the outer product
    // of column a of L with row b of R.
    const int pairs = (dp.symmetric() && er.a != er.b) ? 2 : 1;
    for (int t = 0; t < pairs; ++t) {
      const int a = t == 0 ? er.a : er.b;
      const int b = t == 0 ? er.b : er.a;
      if (L)
        lcol = L->col(a);
      else {
        lcol.setZero();
        lcol[a] = 1.0;
      }
      if (R)
        rrow = R->row(b).transpose();
      else {
        rrow.setZero();
        rrow[b] = 1.0;
      }
      const double scale = w * er.scale;
      if (transposed) {
        Cv.block(r0, c0, q, p) += scale * (rrow * lcol.transpose());
        if (mirror) Cv.block(c0, r0, p, q) += scale * (lcol * rrow.transpose());
      } else {
        Cv.block(r0, c0, p, q) += scale * (lcol * rrow.transpose());
        if (mirror) Cv.block(c0, r0, q, p) += scale * (rrow * lcol.transpose());
      }
    }
  }
}

void LmiConstraint::add_scalar_var(int var, const Matrix& M, int r0, int c0, bool mirror) {
  Matrix& Cv = coeffs_.try_emplace(var, Matrix::Zero(dim_, dim_)).first->second;
  Cv.block(r0, c0, M.rows(), M.cols()) += M;
  if (mirror) Cv.block(c0, r0, M.cols(), M.rows()) += M.transpose();
}

Matrix LmiConstraint::eval(const Vector& x) const {
  Matrix out = constant_;
  for (const auto& [var, M] : coeffs_) out += x[var] * M;
  return out;
}

namespace {

void require_symmetric(const Matrix& M, const std::string& tag) {
  const double scale = 1.0 + M.cwiseAbs().maxCoeff();
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::logic_error("LMI block '" + tag + "' assembled asymmetric");
}

void push_lower_triangle(const Matrix& M, std::vector<Triplet>& out) {
  for (int c = 0; c < M.cols(); ++c)
    for (int r = c; r < M.rows(); ++r)
      if (M(r, c) != 0.0) out.push_back({r, c, M(r, c)});
}

}  // namespace

ConstraintBlock LmiConstraint::to_block() const {
  const double sign = sense_ == Sense::NegativeDefinite ? -1.0 : 1.0;
  ConstraintBlock block;
  block.tag = tag_;
  block.dim = dim_;

  require_symmetric(constant_, tag_);
  Matrix C = sign * constant_;
  C.diagonal().array() -= margin_;
  push_lower_triangle(C, block.constant);

  for (const auto& [var, M] : coeffs_) {
    require_symmetric(M, tag_);
    BlockCoeff bc;
    bc.var = var;
    push_lower_triangle(sign * M, bc.entries);
    if (!bc.entries.empty()) block.coeffs.push_back(std::move(bc));
  }
  return block;
}

// --- plant evaluation ---------------------------------------------------------

PlantEval make_plant_eval(const LpvDelaySystem& sys) {
  return [sys](double /*tau*/, const Vector& rho) { return eval_system(sys, rho); };
}

// --- analysis constraints -------------------------------------------------------

AnalysisAnsatz make_analysis_ansatz(VarPool& pool, int n, int param_count,
                                    const AnsatzDegrees& degrees) {
  const int vc = 1 + param_count;
  AnalysisAnsatz an;
  an.P = DecisionPoly::make(pool, "P", n, n, vc, degrees.p_clock_degree(), degrees.deg_rho, true);
  an.Q = DecisionPoly::make(pool, "Q", n, n, vc, degrees.deg_tau, degrees.deg_rho, true);
  an.R = DecisionPoly::make(pool, "R", n, n, vc, degrees.deg_tau, degrees.deg_rho, true);
  return an;
}

namespace {

LmiConstraint gamma_core(const PlantMatrices& pm, int n, const DelaySpec& delay,
                         const DwellSpec& dwell, const AnalysisAnsatz& an, double tau,
                         const Vector& rho, double margin, bool clock_derivatives,
                         std::string tag) {
  const double h = delay.h;
  const double ekh = std::exp(-dwell.kappa * h);
  const Matrix At = pm.A.transpose();
  const Matrix Adt = pm.Ad.transpose();
  LmiConstraint c(3 * n, Sense::NegativeDefinite, margin, std::move(tag));

  for (int i = 0; i < an.P.monomial_count(); ++i) {
    const double w = an.P.weight(i, tau, rho);
    if (w != 0.0) {
      c.add_var(an.P, i, w, nullptr, &pm.A, 0, 0, false, true);    // Sym[P A]
      c.add_var(an.P, i, w, nullptr, &pm.Ad, 0, n, false, true);   // P Ad
    }
    if (clock_derivatives) {
      const double wd = an.P.weight_dtau(i, tau, rho);
      if (wd != 0.0) c.add_var(an.P, i, wd, nullptr, nullptr, 0, 0);  // Pdot
    }
  }
  for (int i = 0; i < an.Q.monomial_count(); ++i) {
    const double w = an.Q.weight(i, tau, rho);
    if (w == 0.0) continue;
    c.add_var(an.Q, i, w, nullptr, nullptr, 0, 0);
    c.add_var(an.Q, i, -(1.0 - delay.mu) * ekh * w, nullptr, nullptr, n, n);
  }
  for (int i = 0; i < an.R.monomial_count(); ++i) {
    const double w = an.R.weight(i, tau, rho);
    if (w == 0.0) continue;
    c.add_var(an.R, i, -ekh * w, nullptr, nullptr, 0, 0);
    c.add_var(an.R, i, ekh * w, nullptr, nullptr, 0, n, false, true);
    c.add_var(an.R, i, h * w, &At, nullptr, 0, 2 * n, false, true);   // h A^T R
    c.add_var(an.R, i, -ekh * w, nullptr, nullptr, n, n);
    c.add_var(an.R, i, h * w, &Adt, nullptr, n, 2 * n, false, true);  // h Ad^T R
    c.add_var(an.R, i, -w, nullptr, nullptr, 2 * n, 2 * n);
  }
  return c;
}

LmiConstraint matrix_jump(const DecisionPoly& M, double t_dwell, const Vector& rho,
                          const Vector& eta, std::string tag) {
  LmiConstraint c(M.rows(), Sense::PositiveSemidefinite, 0.0, std::move(tag));
  for (int i = 0; i < M.monomial_count(); ++i) {
    c.add_var(M, i, M.weight(i, t_dwell, rho), nullptr, nullptr, 0, 0);
    c.add_var(M, i, -M.weight(i, 0.0, eta), nullptr, nullptr, 0, 0);
  }
  return c;
}

LmiConstraint derivative_jump(const DecisionPoly& M, double kappa, double t_dwell,
                              const Vector& rho, const Vector& eta, std::string tag) {
  LmiConstraint c(M.rows(), Sense::PositiveSemidefinite, 0.0, std::move(tag));
  for (int i = 0; i < M.monomial_count(); ++i) {
    c.add_var(M, i, kappa * M.weight(i, t_dwell, rho), nullptr, nullptr, 0, 0);
    c.add_var(M, i, -M.weight_dtau(i, 0.0, eta), nullptr, nullptr, 0, 0);
  }
  return c;
}

std::string pair_tag(const char* stem, const Vector& rho, const Vector& eta) {
  return std::string(stem) + "[rho=" + format_vec(rho) + ",eta=" + format_vec(eta) + "]";
}

std::string point_tag(const char* stem, double tau, const Vector& rho) {
  return std::string(stem) + "[tau=" + format_scalar(tau) + ",rho=" + format_vec(rho) + "]";
}

std::string rho_tag(const char* stem, const Vector& rho) {
  return std::string(stem) + "[rho=" + format_vec(rho) + "]";
}

}  // namespace

LmiConstraint gamma_analysis(const PlantMatrices& pm, int n, const DelaySpec& delay,
                             const DwellSpec& dwell, const AnalysisAnsatz& an, double tau,
                             const Vector& rho, double margin) {
  return gamma_core(pm, n, delay, dwell, an, tau, rho, margin, true,
                    point_tag("gamma", tau, rho));
}

LmiConstraint gamma_stationary(const PlantMatrices& pm, int n, const DelaySpec& delay,
                               const DwellSpec& dwell, const AnalysisAnsatz& an,
                               const Vector& rho, double margin) {
  return gamma_core(pm, n, delay, dwell, an, dwell.t_dwell, rho, margin, false,
                    rho_tag("gamma-stat", rho));
}

std::vector<LmiConstraint> jump_conditions(const AnalysisAnsatz& an, const DwellSpec& dwell,
                                           const Vector& rho, const Vector& eta) {
  std::vector<LmiConstraint> out;
  out.push_back(matrix_jump(an.P, dwell.t_dwell, rho, eta, pair_tag("jump-P", rho, eta)));
  out.push_back(matrix_jump(an.Q, dwell.t_dwell, rho, eta, pair_tag("jump-Q", rho, eta)));
  out.push_back(matrix_jump(an.R, dwell.t_dwell, rho, eta, pair_tag("jump-R", rho, eta)));
  out.push_back(derivative_jump(an.Q, dwell.kappa, dwell.t_dwell, rho, eta,
                                pair_tag("jump-dQ", rho, eta)));
  out.push_back(derivative_jump(an.R, dwell.kappa, dwell.t_dwell, rho, eta,
                                pair_tag("jump-dR", rho, eta)));
  return out;
}

LmiConstraint positivity_analysis(const AnalysisAnsatz& an, double tau, const Vector& rho,
                                  double margin) {
  const int n = an.P.rows();
  LmiConstraint c(3 * n, Sense::PositiveSemidefinite, margin, point_tag("pos", tau, rho));
  const DecisionPoly* mats[3] = {&an.P, &an.Q, &an.R};
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < mats[j]->monomial_count(); ++i)
      c.add_var(*mats[j], i, mats[j]->weight(i, tau, rho), nullptr, nullptr, j * n, j * n);
  return c;
}

// --- synthesis constraints -----------------------------------------------------

SynthesisAnsatz make_synthesis_ansatz(VarPool& pool, int n, int q, int param_count,
                                      const AnsatzDegrees& degrees, UStructure structure,
                                      GammaMode mode, double gamma_fixed) {
  const int vc = 1 + param_count;
  SynthesisAnsatz sa;
  sa.P = DecisionPoly::make(pool, "Pt", n, n, vc, degrees.p_clock_degree(), degrees.deg_rho, true);
  sa.Q = DecisionPoly::make(pool, "Qt", n, n, vc, degrees.deg_tau, degrees.deg_rho, true);
  sa.R = DecisionPoly::make(pool, "Rt", n, n, vc, degrees.deg_tau, degrees.deg_rho, true);

  if (structure == UStructure::TauRhoSplit) {
    // U(tau, rho) = tau * Ua + sum_i rho_i * Ub_i with a constant X: the gain
    // splits into a purely clock part and a purely parameter part.
    std::vector<Exponents> umonos;
    for (int axis = 0; axis < vc; ++axis) {
      Exponents e(static_cast<size_t>(vc), 0);
      e[static_cast<size_t>(axis)] = 1;
      umonos.push_back(e);
    }
    sa.U = DecisionPoly::make_structured(pool, "Ut", q, n, vc, std::move(umonos), false);
    sa.X = DecisionPoly::make_structured(pool, "Xt", n, n, vc,
                                         {Exponents(static_cast<size_t>(vc), 0)}, false);
  } else {
    sa.U = DecisionPoly::make(pool, "Ut", q, n, vc, degrees.deg_tau, degrees.deg_rho, false);
    sa.X = DecisionPoly::make(pool, "Xt", n, n, vc, 0, degrees.deg_rho, false);
  }

  if (mode == GammaMode::Minimize) {
    sa.gamma_sq_var = pool.add("gamma_sq");
  } else {
    if (!(gamma_fixed > 0.0))
      throw std::invalid_argument("make_synthesis_ansatz: fixed gamma must be positive");
    sa.gamma_sq_value = gamma_fixed * gamma_fixed;
  }
  return sa;
}

namespace {

LmiConstraint gamma_synthesis_core(const PlantMatrices& pm, int n, int m, int q, int r,
                                   const DelaySpec& delay, const DwellSpec& dwell,
                                   const SynthesisAnsatz& sa, double tau, const Vector& rho,
                                   double margin, bool clock_derivatives, std::string tag) {
  (void)q;
  const double h = delay.h;
  const double ekh = std::exp(-dwell.kappa * h);
  const int o2 = n, o3 = 2 * n, o4 = 3 * n, o5 = 3 * n + m, o6 = 3 * n + m + r,
            o7 = 4 * n + m + r;
  LmiConstraint c(5 * n + m + r, Sense::NegativeDefinite, margin, std::move(tag));

  for (int i = 0; i < sa.X.monomial_count(); ++i) {
    const double w = sa.X.weight(i, tau, rho);
    if (w == 0.0) continue;
    c.add_var(sa.X, i, -w, nullptr, nullptr, 0, 0, false, true);      // -Sym[X]
    c.add_var(sa.X, i, w, &pm.A, nullptr, 0, o2, false, true);        // A X
    c.add_var(sa.X, i, w, &pm.Ad, nullptr, 0, o3, false, true);       // Ad X
    c.add_var(sa.X, i, w, nullptr, nullptr, 0, o6, false, true);      // X
    c.add_var(sa.X, i, w, nullptr, nullptr, 0, o7, false, true);      // X (+ hR below)
    c.add_var(sa.X, i, w, &pm.C, nullptr, o2, o5, true, true);        // (C X)^T
    c.add_var(sa.X, i, w, &pm.Cd, nullptr, o3, o5, true, true);       // (Cd X)^T
  }
  for (int i = 0; i < sa.U.monomial_count(); ++i) {
    const double w = sa.U.weight(i, tau, rho);
    if (w == 0.0) continue;
    c.add_var(sa.U, i, w, &pm.B, nullptr, 0, o2, false, true);        // B U
    c.add_var(sa.U, i, w, &pm.D, nullptr, o2, o5, true, true);        // (D U)^T
  }
  for (int i = 0; i < sa.P.monomial_count(); ++i) {
    const double w = sa.P.weight(i, tau, rho);
    if (w != 0.0) {
      c.add_var(sa.P, i, w, nullptr, nullptr, 0, o2, false, true);
      c.add_var(sa.P, i, -w, nullptr, nullptr, o2, o2);               // Upsilon: -P
      c.add_var(sa.P, i, -w, nullptr, nullptr, o2, o7, false, true);
      c.add_var(sa.P, i, -w, nullptr, nullptr, o6, o6);
    }
    if (clock_derivatives) {
      const double wd = sa.P.weight_dtau(i, tau, rho);
      if (wd != 0.0) c.add_var(sa.P, i, wd, nullptr, nullptr, o2, o2);  // Upsilon: Pdot
    }
  }
  for (int i = 0; i < sa.Q.monomial_count(); ++i) {
    const double w = sa.Q.weight(i, tau, rho);
    if (w == 0.0) continue;
    c.add_var(sa.Q, i, w, nullptr, nullptr, o2, o2);                  // Upsilon: +Q
    c.add_var(sa.Q, i, -(1.0 - delay.mu) * ekh * w, nullptr, nullptr, o3, o3);
  }
  for (int i = 0; i < sa.R.monomial_count(); ++i) {
    const double w = sa.R.weight(i, tau, rho);
    if (w == 0.0) continue;
    c.add_var(sa.R, i, h * w, nullptr, nullptr, 0, o7, false, true);  // h R in (1,7)
    c.add_var(sa.R, i, -ekh * w, nullptr, nullptr, o2, o2);           // Upsilon: -e R
    c.add_var(sa.R, i, ekh * w, nullptr, nullptr, o2, o3, false, true);
    c.add_var(sa.R, i, -ekh * w, nullptr, nullptr, o3, o3);
    c.add_var(sa.R, i, -h * w, nullptr, nullptr, o6, o7, false, true);
    c.add_var(sa.R, i, (-1.0 - 2.0 * h) * w, nullptr, nullptr, o7, o7);
  }

  c.add_const(0, o4, pm.E, true);
  c.add_const(o4, o5, pm.F.transpose(), true);
  if (r > 0) c.add_const(o5, o5, -Matrix::Identity(r, r));
  if (m > 0) {
    const Matrix Im = Matrix::Identity(m, m);
    if (sa.gamma_sq_var >= 0)
      c.add_scalar_var(sa.gamma_sq_var, -Im, o4, o4);
    else
      c.add_const(o4, o4, -sa.gamma_sq_value * Im);
  }
  return c;
}

}  // namespace

LmiConstraint gamma_synthesis(const PlantMatrices& pm, int n, int m, int q, int r,
                              const DelaySpec& delay, const DwellSpec& dwell,
                              const SynthesisAnsatz& sa, double tau, const Vector& rho,
                              double margin) {
  return gamma_synthesis_core(pm, n, m, q, r, delay, dwell, sa, tau, rho, margin, true,
                              point_tag("sgamma", tau, rho));
}

std::vector<LmiConstraint> synthesis_boundary(const PlantMatrices& pm, int n, int m, int q,
                                              int r, const DelaySpec& delay,
                                              const DwellSpec& dwell, const SynthesisAnsatz& sa,
                                              const Vector& rho, const Vector& eta,
                                              double margin) {
  std::vector<LmiConstraint> out;
  out.push_back(gamma_synthesis_core(pm, n, m, q, r, delay, dwell, sa, dwell.t_dwell, rho,
                                     margin, false, rho_tag("sgamma-stat", rho)));
  out.push_back(matrix_jump(sa.P, dwell.t_dwell, rho, eta, pair_tag("sjump-P", rho, eta)));
  out.push_back(matrix_jump(sa.Q, dwell.t_dwell, rho, eta, pair_tag("sjump-Q", rho, eta)));
  out.push_back(matrix_jump(sa.R, dwell.t_dwell, rho, eta, pair_tag("sjump-R", rho, eta)));
  out.push_back(derivative_jump(sa.Q, dwell.kappa, dwell.t_dwell, rho, eta,
                                pair_tag("sjump-dQ", rho, eta)));
  out.push_back(derivative_jump(sa.R, dwell.kappa, dwell.t_dwell, rho, eta,
                                pair_tag("sjump-dR", rho, eta)));
  return out;
}

LmiConstraint positivity_synthesis(const SynthesisAnsatz& sa, double tau, const Vector& rho,
                                   double margin) {
  const int n = sa.P.rows();
  LmiConstraint c(3 * n, Sense::PositiveSemidefinite, margin, point_tag("spos", tau, rho));
  const DecisionPoly* mats[3] = {&sa.P, &sa.Q, &sa.R};
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < mats[j]->monomial_count(); ++i)
      c.add_var(*mats[j], i, mats[j]->weight(i, tau, rho), nullptr, nullptr, j * n, j * n);
  return c;
}

// --- grid aggregation ----------------------------------------------------------

std::vector<ConstraintBlock> analysis_blocks(const PlantEval& plant, int n,
                                             const DelaySpec& delay, const DwellSpec& dwell,
                                             const AnalysisAnsatz& an, const Grid& grid,
                                             double margin) {
  std::vector<ConstraintBlock> blocks;
  const size_t n_tau = grid.taus.size(), n_rho = grid.rhos.size();
  blocks.reserve(n_tau * n_rho * 2 + n_rho + 5 * n_rho * n_rho);

  for (double tau : grid.taus)
    for (size_t j = 0; j < n_rho; ++j) {
      const PlantMatrices pm = plant(tau, grid.rhos[j]);
      blocks.push_back(
          gamma_analysis(pm, n, delay, dwell, an, tau, grid.rhos[j], margin).to_block());
    }

  for (size_t j = 0; j < n_rho; ++j)
    blocks.push_back(gamma_stationary(plant(dwell.t_dwell, grid.rhos[j]), n, delay, dwell, an,
                                      grid.rhos[j], margin)
                         .to_block());

  // Equation-major: all P jumps over ordered pairs, then Q, R, dQ, dR.
  const DecisionPoly* jump_mats[5] = {&an.P, &an.Q, &an.R, &an.Q, &an.R};
  const char* jump_stems[5] = {"jump-P", "jump-Q", "jump-R", "jump-dQ", "jump-dR"};
  for (int eq = 0; eq < 5; ++eq)
    for (const Vector& rho : grid.rhos)
      for (const Vector& eta : grid.rhos) {
        if (eq < 3)
          blocks.push_back(matrix_jump(*jump_mats[eq], dwell.t_dwell, rho, eta,
                                       pair_tag(jump_stems[eq], rho, eta))
                               .to_block());
        else
          blocks.push_back(derivative_jump(*jump_mats[eq], dwell.kappa, dwell.t_dwell, rho,
                                           eta, pair_tag(jump_stems[eq], rho, eta))
                               .to_block());
      }

  for (double tau : grid.taus)
    for (const Vector& rho : grid.rhos)
      blocks.push_back(positivity_analysis(an, tau, rho, margin).to_block());

  return blocks;
}

std::vector<ConstraintBlock> synthesis_blocks(const PlantEval& plant, int n, int m, int q,
                                              int r, const DelaySpec& delay,
                                              const DwellSpec& dwell, const SynthesisAnsatz& sa,
                                              const Grid& grid, double margin) {
  std::vector<ConstraintBlock> blocks;
  const size_t n_rho = grid.rhos.size();
  blocks.reserve(grid.taus.size() * n_rho * 2 + n_rho + 5 * n_rho * n_rho);

  for (double tau : grid.taus)
    for (const Vector& rho : grid.rhos) {
      const PlantMatrices pm = plant(tau, rho);
      blocks.push_back(
          gamma_synthesis(pm, n, m, q, r, delay, dwell, sa, tau, rho, margin).to_block());
    }

  for (const Vector& rho : grid.rhos)
    blocks.push_back(gamma_synthesis_core(plant(dwell.t_dwell, rho), n, m, q, r, delay, dwell,
                                          sa, dwell.t_dwell, rho, margin, false,
                                          rho_tag("sgamma-stat", rho))
                         .to_block());

  const DecisionPoly* jump_mats[5] = {&sa.P, &sa.Q, &sa.R, &sa.Q, &sa.R};
  const char* jump_stems[5] = {"sjump-P", "sjump-Q", "sjump-R", "sjump-dQ", "sjump-dR"};
  for (int eq = 0; eq < 5; ++eq)
    for (const Vector& rho : grid.rhos)
      for (const Vector& eta : grid.rhos) {
        if (eq < 3)
          blocks.push_back(matrix_jump(*jump_mats[eq], dwell.t_dwell, rho, eta,
                                       pair_tag(jump_stems[eq], rho, eta))
                               .to_block());
        else
          blocks.push_back(derivative_jump(*jump_mats[eq], dwell.kappa, dwell.t_dwell, rho,
                                           eta, pair_tag(jump_stems[eq], rho, eta))
                               .to_block());
      }

  for (double tau : grid.taus)
    for (const Vector& rho : grid.rhos)
      blocks.push_back(positivity_synthesis(sa, tau, rho, margin).to_block());

  return blocks;
}

// --- assembly --------------------------------------------------------------------

AnalysisProblem assemble_analysis(const PlantEval& plant, int n, int param_count,
                                  const ParamBox& box, const DelaySpec& delay,
                                  const DwellSpec& dwell, const GridPlan& plan,
                                  const AnsatzDegrees& degrees, double margin) {
  delay.validate();
  dwell.validate();
  if (margin <= 0.0) throw std::invalid_argument("assemble_analysis: margin must be positive");

  AnalysisProblem out;
  out.n = n;
  out.ansatz = make_analysis_ansatz(out.pool, n, param_count, degrees);
  out.grid = build_grid(plan, dwell, box);
  out.sdp.num_vars = out.pool.size();
  out.sdp.objective = Vector::Zero(out.pool.size());
  out.sdp.var_names = out.pool.names;
  out.sdp.blocks = analysis_blocks(plant, n, delay, dwell, out.ansatz, out.grid, margin);
  out.sdp.validate();
  return out;
}

AnalysisProblem assemble_analysis(const LpvDelaySystem& sys, const DelaySpec& delay,
                                  const DwellSpec& dwell, const GridPlan& plan,
                                  const AnsatzDegrees& degrees, double margin) {
  sys.validate();
  return assemble_analysis(make_plant_eval(sys), sys.n, sys.params.dim(), sys.params, delay,
                           dwell, plan, degrees, margin);
}

SynthesisProblem assemble_synthesis(const LpvDelaySystem& sys, const DelaySpec& delay,
                                    const DwellSpec& dwell, const GridPlan& plan,
                                    const AnsatzDegrees& degrees, GammaMode mode,
                                    double gamma_fixed, UStructure structure, double margin) {
  sys.validate();
  delay.validate();
  dwell.validate();
  if (sys.q <= 0)
    throw std::invalid_argument("assemble_synthesis: the plant has no control input");
  if (margin < 0.0)
    throw std::invalid_argument("assemble_synthesis: margin must be non-negative");

  SynthesisProblem out;
  out.n = sys.n;
  out.m = sys.m;
  out.q = sys.q;
  out.r = sys.r;
  out.ansatz = make_synthesis_ansatz(out.pool, sys.n, sys.q, sys.params.dim(), degrees,
                                     structure, mode, gamma_fixed);
  out.grid = build_grid(plan, dwell, sys.params);
  out.sdp.num_vars = out.pool.size();
  out.sdp.objective = Vector::Zero(out.pool.size());
  if (mode == GammaMode::Minimize) out.sdp.objective[out.ansatz.gamma_sq_var] = 1.0;
  out.sdp.var_names = out.pool.names;
  out.sdp.blocks = synthesis_blocks(make_plant_eval(sys), sys.n, sys.m, sys.q, sys.r, delay,
                                    dwell, out.ansatz, out.grid, margin);
  if (mode == GammaMode::Minimize) {
    ConstraintBlock cone;
    cone.tag = "gamma-sq";
    cone.dim = 1;
    BlockCoeff bc;
    bc.var = out.ansatz.gamma_sq_var;
    bc.entries.push_back({0, 0, 1.0});
    cone.coeffs.push_back(std::move(bc));
    out.sdp.blocks.push_back(std::move(cone));
  }
  out.sdp.validate();
  return out;
}

}  // namespace dwell
