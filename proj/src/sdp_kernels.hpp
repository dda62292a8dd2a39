#pragma once

// Per-block computational kernels for the interior-point SDP solver.
//
// Every kernel comes in three executions:
//   Reference — dense textbook formulas, single-threaded; the ground truth
//               the optimized paths are tested against.
//   Serial    — sparse-triplet formulation, single-threaded.
//   Parallel  — the Serial formulation with OpenMP block loops; per-thread
//               accumulators are merged in thread order, so results are
//               deterministic for a fixed OMP_NUM_THREADS.

#include "dwell/sdp.hpp"

#include <Eigen/Cholesky>

#include <vector>

namespace dwell::ipm {

enum class Exec { Reference, Serial, Parallel };

struct WorkBlock {
  int dim = 0;
  Matrix C;
  std::vector<int> vars;                  // global variable ids, ascending
  std::vector<std::vector<Triplet>> tri;  // per local variable, lower triangle
  std::vector<Matrix> dense;              // per local variable, full symmetric
};

struct WorkProblem {
  int m = 0;  // variables
  Vector c;
  std::vector<WorkBlock> blocks;
  long total_dim = 0;

  // scaling applied relative to the source problem:
  //   A'_{j,i} = A_{j,i} * var_scale[i] / block_scale[j]
  //   C'_j     = C_j / block_scale[j]
  //   c'_i     = c_i * var_scale[i],   x_source = var_scale .* x_work
  Vector var_scale;
  std::vector<double> block_scale;
};

struct IterState {
  Vector x;
  std::vector<Matrix> S, Z;
  std::vector<Matrix> W;  // S^{-1}
  std::vector<Eigen::LLT<Matrix>> Slt, Zlt;
  std::vector<Matrix> Rp;  // C + A(x) - S
  Vector rd;               // c - adjoint(Z)
  double mu = 0.0;

  // scratch owned here so iteration loops do not reallocate
  std::vector<Matrix> T, dS, dZ, dS_aff, dZ_aff;
  Vector g;

  void resize(const WorkProblem& w);
};

/// Builds the working copy (dense C, per-variable triplets and dense
/// coefficients) from a validated problem. No scaling yet.
WorkProblem build_work(const SdpProblem& p);

/// One-shot equilibration: variable scales from coefficient norms, then block
/// scales from the resulting block data. Records the scales in w.
void equilibrate(WorkProblem& w);

/// Appends the phase-1 slack variable t (coefficient identity on every block)
/// plus the cap block 1 + t >= 0; returns the new variable's index.
int append_phase1_var(WorkProblem& w);

/// Cholesky-factorizes S and Z and forms W = S^{-1}. Returns false when either
/// factorization fails (iterate left the cone numerically).
bool prepare(const WorkProblem& w, IterState& st, Exec ex);

/// Primal residuals Rp_j = C_j + A_j(x) - S_j, dual residual
/// rd_i = c_i - sum_j <A_{j,i}, Z_j>, and mu = sum_j <S_j, Z_j> / total_dim.
void residuals(const WorkProblem& w, IterState& st, Exec ex);

/// Schur complement H_ik = sum_j <A_{j,i}, Z_j A_{j,k} W_j> (lower triangle
/// filled; symmetric by construction).
void schur(const WorkProblem& w, const IterState& st, Matrix& H, Exec ex);

/// Newton right-hand side: per-block target
///   T_j = sigma_mu W_j - Z_j - Sym(Z_j Rp_j W_j) [- Sym(dZ_aff dS_aff W_j)]
/// and its adjoint g_i = sum_j <A_{j,i}, T_j>. The corrector pair may be null.
void rhs_target(const WorkProblem& w, const IterState& st, double sigma_mu,
                const std::vector<Matrix>* dS_aff, const std::vector<Matrix>* dZ_aff,
                std::vector<Matrix>& T, Vector& g, Exec ex);

/// Search directions from the solved dx:
///   dS_j = Rp_j + A_j(dx),  dZ_j = T_j - Sym(Z_j A_j(dx) W_j).
void directions(const WorkProblem& w, const IterState& st, const Vector& dx,
                const std::vector<Matrix>& T, std::vector<Matrix>& dS,
                std::vector<Matrix>& dZ, Exec ex);

/// Largest alpha <= cap with M_j + alpha dM_j >= 0 for all j, via the minimum
/// eigenvalue of L_j^{-1} dM_j L_j^{-T}.
double step_length(const std::vector<Eigen::LLT<Matrix>>& llts,
                   const std::vector<Matrix>& dM, double cap, Exec ex);

/// Exact minimum eigenvalue over all blocks of C_j + A_j(x), in the working
/// problem's scaling. ignore_var (if >= 0) excludes one variable — used to
/// probe the original constraints at a phase-1 iterate.
double exact_worst_eig(const WorkProblem& w, const Vector& x, int ignore_var, Exec ex);

}  // namespace dwell::ipm
