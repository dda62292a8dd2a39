#pragma once

#include "dwell/poly.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dwell {

/// Entry of a sparse symmetric matrix; only the lower triangle (row >= col)
/// is stored, the mirrored entry is implied.
struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Sparse symmetric coefficient of one scalar variable inside a PSD block.
struct BlockCoeff {
  int var = -1;
  std::vector<Triplet> entries;
};

/// One PSD constraint  S(x) = C + sum_i x_i A_i  >= 0.
struct ConstraintBlock {
  std::string tag;
  int dim = 0;
  std::vector<Triplet> constant;   // lower triangle of C
  std::vector<BlockCoeff> coeffs;  // ascending by var, each var at most once

  Matrix constant_dense() const;
  Matrix coeff_dense(const BlockCoeff& bc) const;
  /// Full symmetric S(x) at an assignment.
  Matrix eval_dense(const Vector& x) const;
  double min_eigenvalue(const Vector& x) const;
};

/// minimize objective . x  subject to every block PSD. A zero (or empty)
/// objective makes this a pure feasibility problem.
struct SdpProblem {
  int num_vars = 0;
  Vector objective;  // size num_vars or 0
  std::vector<std::string> var_names;  // optional diagnostics, size num_vars or 0
  std::vector<ConstraintBlock> blocks;

  bool feasibility_only() const;
  void validate() const;
};

enum class SolveStatus { Optimal, Infeasible, NumericalFailure };

const char* to_string(SolveStatus s);

struct SolveStats {
  int iterations = 0;
  double duality_gap = 0.0;      // final relative gap
  double dual_residual = 0.0;    // final ||r_d||_inf (scaled problem)
  double primal_residual = 0.0;  // final ||R_p||_inf (scaled problem)
  double worst_block_eig = 0.0;  // exact min eigenvalue over blocks at the assignment
  double phase1_depth = 0.0;     // optimal t of the feasibility phase (negative = feasible)
  double solve_seconds = 0.0;
  std::string message;
};

struct SdpSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  Vector assignment;  // size num_vars iff status == Optimal, else empty
  std::optional<double> objective_value;
  SolveStats stats;
};

struct SolverOptions {
  double tol = 1e-8;        // post-solve eigenvalue tolerance and IPM target
  int max_iterations = 120;
  bool parallel = true;     // OpenMP kernels; false selects the serial reference
  int verbosity = 0;        // 0 silent, 1 per-solve summary, 2 per-iteration
  double deep_exit = -0.5;  // stop the feasibility phase once t falls below this
};

/// Solves the SDP. Optimal means the returned assignment satisfies every
/// block with min eigenvalue >= -tol (exactly re-verified before returning);
/// Infeasible is backed by a dual (Farkas) bound from the feasibility phase.
/// An assignment that fails re-verification is never returned.
SdpSolution solve(const SdpProblem& p, const SolverOptions& opts = {});
SdpSolution solve(const SdpProblem& p, double tol);

/// Per-constraint exact minimum eigenvalues at the assignment, worst first.
/// Extra blocks (e.g. from a refined grid) are appended with off_grid set and
/// their tag suffixed "[off-grid check]".
struct EigReport {
  std::string tag;
  double min_eig = 0.0;
  bool off_grid = false;
};

std::vector<EigReport> verify(const SdpProblem& p, const SdpSolution& s,
                              const std::vector<ConstraintBlock>* finer = nullptr);

// --- interchange format -----------------------------------------------------
//
// Text format, one item per line, '#' starts a comment:
//   sdp 1                    header and version
//   vars <m>
//   objective <i> <v>        one line per nonzero objective entry
//   varname <i> <name>       optional
//   block <dim> <tag>        starts a constraint block
//   const <r> <c> <v>        lower-triangle entry of C (r >= c)
//   coef <i> <r> <c> <v>     lower-triangle entry of A_i
//   end                      closes the block
// Variables are the scalar SDP unknowns. Symmetric decision matrices are
// packed before this layer with scaled lower-triangular vectorization
// (off-diagonal entries carry a factor sqrt(2), so Frobenius inner products
// equal dot products of the packed vectors); triplet values here already
// include that scaling. Values are printed with "%.17g" so a round-trip is
// structurally identical.

std::string serialize_problem(const SdpProblem& p);
SdpProblem parse_problem(const std::string& text);
void save_problem(const SdpProblem& p, const std::string& path);
SdpProblem load_problem(const std::string& path);

}  // namespace dwell
