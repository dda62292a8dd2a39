#include "sdp_kernels.hpp"

#include <Eigen/Eigenvalues>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cmath>
#include <limits>

namespace dwell::ipm {

namespace {

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// <A, M> for a lower-triangle triplet list and a general square M.
double sparse_dot(const std::vector<Triplet>& tri, const Matrix& M) {
  double acc = 0.0;
  for (const auto& t : tri)
    acc += t.row == t.col ? t.value * M(t.row, t.col)
                          : t.value * (M(t.row, t.col) + M(t.col, t.row));
  return acc;
}

// G += Z * A * W for triplet A (rank-two updates per entry).
void accumulate_zaw(const std::vector<Triplet>& tri, const Matrix& Z, const Matrix& W,
                    Matrix& G) {
  for (const auto& t : tri) {
    G.noalias() += t.value * (Z.col(t.row) * W.col(t.col).transpose());
    if (t.row != t.col) G.noalias() += t.value * (Z.col(t.col) * W.col(t.row).transpose());
  }
}

// M += s * A for triplet A.
void axpy_tri(const std::vector<Triplet>& tri, double s, Matrix& M) {
  for (const auto& t : tri) {
    M(t.row, t.col) += s * t.value;
    if (t.row != t.col) M(t.col, t.row) += s * t.value;
  }
}

}  // namespace

void IterState::resize(const WorkProblem& w) {
  const size_t nb = w.blocks.size();
  x = Vector::Zero(w.m);
  S.resize(nb);
  Z.resize(nb);
  W.resize(nb);
  Slt.resize(nb);
  Zlt.resize(nb);
  Rp.resize(nb);
  T.resize(nb);
  dS.resize(nb);
  dZ.resize(nb);
  dS_aff.resize(nb);
  dZ_aff.resize(nb);
  rd = Vector::Zero(w.m);
  g = Vector::Zero(w.m);
}

WorkProblem build_work(const SdpProblem& p) {
  WorkProblem w;
  w.m = p.num_vars;
  w.c = p.objective.size() == p.num_vars ? p.objective : Vector::Zero(p.num_vars);
  w.var_scale = Vector::Ones(p.num_vars);
  w.blocks.reserve(p.blocks.size());
  for (const auto& b : p.blocks) {
    WorkBlock wb;
    wb.dim = b.dim;
    wb.C = b.constant_dense();
    wb.vars.reserve(b.coeffs.size());
    wb.tri.reserve(b.coeffs.size());
    wb.dense.reserve(b.coeffs.size());
    for (const auto& bc : b.coeffs) {
      wb.vars.push_back(bc.var);
      wb.tri.push_back(bc.entries);
      wb.dense.push_back(b.coeff_dense(bc));
    }
    w.total_dim += b.dim;
    w.blocks.push_back(std::move(wb));
  }
  w.block_scale.assign(w.blocks.size(), 1.0);
  return w;
}

void equilibrate(WorkProblem& w) {
  Vector max_norm = Vector::Zero(w.m);
  for (const auto& b : w.blocks)
    for (size_t k = 0; k < b.vars.size(); ++k)
      max_norm[b.vars[k]] = std::max(max_norm[b.vars[k]], b.dense[k].norm());
  for (int i = 0; i < w.m; ++i) {
    const double s = max_norm[i] > 0.0 ? 1.0 / std::clamp(max_norm[i], 1e-8, 1e8) : 1.0;
    w.var_scale[i] = s;
    w.c[i] *= s;
  }
  for (size_t j = 0; j < w.blocks.size(); ++j) {
    auto& b = w.blocks[j];
    double mx = b.C.norm();
    for (size_t k = 0; k < b.vars.size(); ++k) {
      const double s = w.var_scale[b.vars[k]];
      for (auto& t : b.tri[k]) t.value *= s;
      b.dense[k] *= s;
      mx = std::max(mx, b.dense[k].norm());
    }
    const double beta = std::clamp(mx, 1.0, 1e8);
    w.block_scale[j] = beta;
    const double inv = 1.0 / beta;
    b.C *= inv;
    for (size_t k = 0; k < b.vars.size(); ++k) {
      for (auto& t : b.tri[k]) t.value *= inv;
      b.dense[k] *= inv;
    }
  }
}

int append_phase1_var(WorkProblem& w) {
  const int t_var = w.m++;
  w.c = (Vector(w.m) << Vector::Zero(t_var), 1.0).finished();
  Vector vs(w.m);
  vs << w.var_scale, 1.0;
  w.var_scale = vs;
  for (auto& b : w.blocks) {
    b.vars.push_back(t_var);
    std::vector<Triplet> tri;
    tri.reserve(static_cast<size_t>(b.dim));
    for (int d = 0; d < b.dim; ++d) tri.push_back({d, d, 1.0});
    b.tri.push_back(std::move(tri));
    b.dense.push_back(Matrix::Identity(b.dim, b.dim));
  }
  WorkBlock cap;
  cap.dim = 1;
  cap.C = Matrix::Constant(1, 1, 1.0);
  cap.vars = {t_var};
  cap.tri = {{{0, 0, 1.0}}};
  cap.dense = {Matrix::Identity(1, 1)};
  w.blocks.push_back(std::move(cap));
  w.block_scale.push_back(1.0);
  w.total_dim += 1;
  return t_var;
}

bool prepare(const WorkProblem& w, IterState& st, Exec ex) {
  const int nb = static_cast<int>(w.blocks.size());
  int failed = 0;
#pragma omp parallel for schedule(static) reduction(| : failed) if (ex == Exec::Parallel)
  for (int j = 0; j < nb; ++j) {
    st.Slt[j].compute(st.S[j]);
    st.Zlt[j].compute(st.Z[j]);
    if (st.Slt[j].info() != Eigen::Success || st.Zlt[j].info() != Eigen::Success) {
      failed = 1;
      continue;
    }
    st.W[j] = st.Slt[j].solve(Matrix::Identity(w.blocks[j].dim, w.blocks[j].dim));
  }
  return failed == 0;
}

void residuals(const WorkProblem& w, IterState& st, Exec ex) {
  const int nb = static_cast<int>(w.blocks.size());
  if (ex == Exec::Reference) {
    st.rd = w.c;
    double trace_sz = 0.0;
    for (int j = 0; j < nb; ++j) {
      const auto& b = w.blocks[j];
      Matrix M = b.C - st.S[j];
      for (size_t k = 0; k < b.vars.size(); ++k) M += st.x[b.vars[k]] * b.dense[k];
      st.Rp[j] = M;
      for (size_t k = 0; k < b.vars.size(); ++k)
        st.rd[b.vars[k]] -= (b.dense[k].array() * st.Z[j].array()).sum();
      trace_sz += (st.S[j].array() * st.Z[j].array()).sum();
    }
    st.mu = trace_sz / static_cast<double>(w.total_dim);
    return;
  }
  const int nt = ex == Exec::Parallel ? thread_count() : 1;
  std::vector<Vector> adj_part(static_cast<size_t>(nt), Vector::Zero(w.m));
  std::vector<double> tr_part(static_cast<size_t>(nt), 0.0);
#pragma omp parallel for schedule(static) if (ex == Exec::Parallel)
  for (int j = 0; j < nb; ++j) {
#ifdef _OPENMP
    const int tid = ex == Exec::Parallel ? omp_get_thread_num() : 0;
#else
    const int tid = 0;
#endif
    const auto& b = w.blocks[j];
    Matrix M = b.C - st.S[j];
    for (size_t k = 0; k < b.vars.size(); ++k)
      if (st.x[b.vars[k]] != 0.0) axpy_tri(b.tri[k], st.x[b.vars[k]], M);
    st.Rp[j] = M;
    for (size_t k = 0; k < b.vars.size(); ++k)
      adj_part[static_cast<size_t>(tid)][b.vars[k]] += sparse_dot(b.tri[k], st.Z[j]);
    tr_part[static_cast<size_t>(tid)] += (st.S[j].array() * st.Z[j].array()).sum();
  }
  Vector adjoint = adj_part[0];
  double trace_sz = tr_part[0];
  for (int t = 1; t < nt; ++t) {
    adjoint += adj_part[static_cast<size_t>(t)];
    trace_sz += tr_part[static_cast<size_t>(t)];
  }
  st.rd = w.c - adjoint;
  st.mu = trace_sz / static_cast<double>(w.total_dim);
}

void schur(const WorkProblem& w, const IterState& st, Matrix& H, Exec ex) {
  const int nb = static_cast<int>(w.blocks.size());
  H = Matrix::Zero(w.m, w.m);
  if (ex == Exec::Reference) {
    for (int j = 0; j < nb; ++j) {
      const auto& b = w.blocks[j];
      const int nv = static_cast<int>(b.vars.size());
      for (int k = 0; k < nv; ++k) {
        const Matrix G = st.Z[j] * b.dense[static_cast<size_t>(k)] * st.W[j];
        for (int i = 0; i <= k; ++i) {
          const double v = (b.dense[static_cast<size_t>(i)].array() * G.array()).sum();
          H(b.vars[static_cast<size_t>(k)], b.vars[static_cast<size_t>(i)]) += v;
        }
      }
    }
    H = H.selfadjointView<Eigen::Lower>();
    return;
  }
  const int nt = ex == Exec::Parallel ? thread_count() : 1;
  std::vector<Matrix> H_part(static_cast<size_t>(nt), Matrix::Zero(w.m, w.m));
#pragma omp parallel for schedule(static) if (ex == Exec::Parallel)
  for (int j = 0; j < nb; ++j) {
#ifdef _OPENMP
    const int tid = ex == Exec::Parallel ? omp_get_thread_num() : 0;
#else
    const int tid = 0;
#endif
    Matrix& Hp = H_part[static_cast<size_t>(tid)];
    const auto& b = w.blocks[j];
    const int nv = static_cast<int>(b.vars.size());
    Matrix G(b.dim, b.dim);
    for (int k = 0; k < nv; ++k) {
      // Rank-one accumulation wins for very sparse coefficients; beyond about
      // dim nonzeros the two dense products are cheaper.
      if (static_cast<int>(b.tri[static_cast<size_t>(k)].size()) > b.dim) {
        G.noalias() = st.Z[j] * b.dense[static_cast<size_t>(k)] * st.W[j];
      } else {
        G.setZero();
        accumulate_zaw(b.tri[static_cast<size_t>(k)], st.Z[j], st.W[j], G);
      }
      for (int i = 0; i <= k; ++i)
        Hp(b.vars[static_cast<size_t>(k)], b.vars[static_cast<size_t>(i)]) +=
            sparse_dot(b.tri[static_cast<size_t>(i)], G);
    }
  }
  for (int t = 0; t < nt; ++t) H += H_part[static_cast<size_t>(t)];
  H = H.selfadjointView<Eigen::Lower>();
}

void rhs_target(const WorkProblem& w, const IterState& st, double sigma_mu,
                const std::vector<Matrix>* dS_aff, const std::vector<Matrix>* dZ_aff,
                std::vector<Matrix>& T, Vector& g, Exec ex) {
  const int nb = static_cast<int>(w.blocks.size());
  const int nt = ex == Exec::Parallel ? thread_count() : 1;
  std::vector<Vector> g_part(static_cast<size_t>(nt), Vector::Zero(w.m));
#pragma omp parallel for schedule(static) if (ex == Exec::Parallel)
  for (int j = 0; j < nb; ++j) {
#ifdef _OPENMP
    const int tid = ex == Exec::Parallel ? omp_get_thread_num() : 0;
#else
    const int tid = 0;
#endif
    const auto& b = w.blocks[j];
    Matrix M = sigma_mu * st.W[j] - st.Z[j];
    if (st.Rp[j].norm() > 0.0) {
      const Matrix ZRW = st.Z[j] * st.Rp[j] * st.W[j];
      M.noalias() -= 0.5 * (ZRW + ZRW.transpose());
    }
    if (dS_aff && dZ_aff) {
      const Matrix corr = (*dZ_aff)[j] * (*dS_aff)[j] * st.W[j];
      M.noalias() -= 0.5 * (corr + corr.transpose());
    }
    T[j] = M;
    if (ex == Exec::Reference) {
      for (size_t k = 0; k < b.vars.size(); ++k)
        g_part[0][b.vars[k]] += (b.dense[k].array() * M.array()).sum();
    } else {
      for (size_t k = 0; k < b.vars.size(); ++k)
        g_part[static_cast<size_t>(tid)][b.vars[k]] += sparse_dot(b.tri[k], M);
    }
  }
  g = g_part[0];
  for (int t = 1; t < nt; ++t) g += g_part[static_cast<size_t>(t)];
}

void directions(const WorkProblem& w, const IterState& st, const Vector& dx,
                const std::vector<Matrix>& T, std::vector<Matrix>& dS,
                std::vector<Matrix>& dZ, Exec ex) {
  const int nb = static_cast<int>(w.blocks.size());
#pragma omp parallel for schedule(static) if (ex == Exec::Parallel)
  for (int j = 0; j < nb; ++j) {
    const auto& b = w.blocks[j];
    Matrix Adx = Matrix::Zero(b.dim, b.dim);
    if (ex == Exec::Reference) {
      for (size_t k = 0; k < b.vars.size(); ++k) Adx += dx[b.vars[k]] * b.dense[k];
    } else {
      for (size_t k = 0; k < b.vars.size(); ++k)
        if (dx[b.vars[k]] != 0.0) axpy_tri(b.tri[k], dx[b.vars[k]], Adx);
    }
    dS[j] = st.Rp[j] + Adx;
    const Matrix ZAW = st.Z[j] * Adx * st.W[j];
    dZ[j] = T[j] - 0.5 * (ZAW + ZAW.transpose());
  }
}

double step_length(const std::vector<Eigen::LLT<Matrix>>& llts,
                   const std::vector<Matrix>& dM, double cap, Exec ex) {
  const int nb = static_cast<int>(llts.size());
  double alpha = cap;
#pragma omp parallel for schedule(static) reduction(min : alpha) if (ex == Exec::Parallel)
  for (int j = 0; j < nb; ++j) {
    const auto& L = llts[j].matrixL();
    Matrix Y = L.solve(dM[j]);
    Matrix G = L.solve(Y.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(G, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin < 0.0) alpha = std::min(alpha, -1.0 / lmin);
  }
  return alpha;
}

double exact_worst_eig(const WorkProblem& w, const Vector& x, int ignore_var, Exec ex) {
  const int nb = static_cast<int>(w.blocks.size());
  double worst = std::numeric_limits<double>::infinity();
#pragma omp parallel for schedule(static) reduction(min : worst) if (ex == Exec::Parallel)
  for (int j = 0; j < nb; ++j) {
    const auto& b = w.blocks[j];
    if (b.vars.size() == 1 && b.vars[0] == ignore_var) continue;  // phase-1 cap block
    Matrix M = b.C;
    for (size_t k = 0; k < b.vars.size(); ++k) {
      if (b.vars[k] == ignore_var || x[b.vars[k]] == 0.0) continue;
      if (ex == Exec::Reference)
        M += x[b.vars[k]] * b.dense[k];
      else
        axpy_tri(b.tri[k], x[b.vars[k]], M);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
    worst = std::min(worst, es.eigenvalues().minCoeff());
  }
  return worst;
}

}  // namespace dwell::ipm
