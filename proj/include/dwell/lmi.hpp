#pragma once

#include "dwell/model.hpp"
#include "dwell/sdp.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace dwell {

/// Uniform (tau, rho) grid specification. Endpoints (0, T_D and the box
/// corners) are always included.
struct GridPlan {
  int n_tau = 50;
  int n_rho = 50;
  bool include_endpoints = true;

  void validate() const;
};

/// Polynomial degree caps of the decision-variable ansatz: clock degree and
/// per-axis parameter degree.
///
/// deg_tau_p, when non-negative, overrides the clock degree of the storage
/// matrix P alone. Raising only P's degree lets the functional dip and recover
/// within one dwell window — useful when some grid point leaves no decay budget
/// (e.g. an undamped mode with the scheduled gain still at zero). P's clock
/// slope is checked pointwise by the decay blocks, so the extra freedom stays
/// certified; Q and R keep the lower degree because their slopes are only
/// constrained at the window edges.
struct AnsatzDegrees {
  int deg_tau = 1;
  int deg_rho = 1;
  int deg_tau_p = -1;

  int p_clock_degree() const { return deg_tau_p < 0 ? deg_tau : deg_tau_p; }
};

/// Registry of scalar SDP unknowns.
struct VarPool {
  std::vector<std::string> names;

  int size() const { return static_cast<int>(names.size()); }
  int add(std::string name) {
    names.push_back(std::move(name));
    return size() - 1;
  }
};

/// Matrix polynomial whose monomial coefficients are decision variables.
///
/// Every monomial owns a contiguous run of scalar unknowns. Symmetric blocks
/// use scaled lower-triangular packing: scalar k maps to entry (a, b), a >= b
/// in column-major lower order, with basis (E_ab + E_ba)/sqrt(2) off the
/// diagonal and E_aa on it, so Frobenius inner products of coefficient
/// matrices equal dot products of the packed scalars. General blocks are
/// packed row-major with basis E_ab.
class DecisionPoly {
public:
  DecisionPoly() = default;

  static DecisionPoly make(VarPool& pool, const std::string& name, int rows, int cols,
                           int var_count, int deg_tau, int deg_rho, bool symmetric);
  /// Restricts the ansatz to an explicit monomial list (e.g. exactly {tau, rho}).
  static DecisionPoly make_structured(VarPool& pool, const std::string& name, int rows,
                                      int cols, int var_count,
                                      std::vector<Exponents> monomials, bool symmetric);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int var_count() const { return var_count_; }
  bool symmetric() const { return symmetric_; }
  const std::vector<Exponents>& monomials() const { return monomials_; }
  int monomial_count() const { return static_cast<int>(monomials_.size()); }
  int block_size() const;  // scalar unknowns per monomial
  int var_id(int mono, int k) const { return base_[static_cast<size_t>(mono)] + k; }

  double weight(int mono, double tau, const Vector& rho) const;
  double weight_dtau(int mono, double tau, const Vector& rho) const;

  /// Entry of scalar k: (a, b) plus the packing scale on that entry.
  struct EntryRef {
    int a, b;
    double scale;
  };
  EntryRef entry(int k) const;

  /// Concrete polynomial from a solved assignment.
  MatrixPoly extract(const Vector& x) const;

private:
  int rows_ = 0, cols_ = 0, var_count_ = 1;
  bool symmetric_ = false;
  std::vector<Exponents> monomials_;
  std::vector<int> base_;
};

/// polynomial ansatz with free coefficient slots registered in `pool`
inline DecisionPoly ansatz(VarPool& pool, const std::string& name, int rows, int cols,
                           int var_count, int deg_tau, int deg_rho, bool symmetric) {
  return DecisionPoly::make(pool, name, rows, cols, var_count, deg_tau, deg_rho, symmetric);
}

enum class Sense { NegativeDefinite, PositiveSemidefinite };

/// One matrix inequality, affine in the scalar unknowns. Accumulates a dense
/// constant part plus one dense coefficient per touched variable; converts to
/// the solver's PSD block form with the strictness margin folded in.
class LmiConstraint {
public:
  LmiConstraint(int dim, Sense sense, double margin, std::string tag);

  int dim() const { return dim_; }
  Sense sense() const { return sense_; }
  double margin() const { return margin_; }
  const std::string& tag() const { return tag_; }

  /// Adds M at block offset (r0, c0); with mirror, M^T is also added at
  /// (c0, r0) — used for the starred off-diagonal blocks and for Sym[.] terms
  /// on the diagonal.
  void add_const(int r0, int c0, const Matrix& M, bool mirror = false);

  /// Adds w * L * V_mono * R (L or R null means identity) at (r0, c0), where
  /// V_mono is the decision block of `dp` for monomial `mono`. `transposed`
  /// places the transpose of the product instead; `mirror` as in add_const.
  void add_var(const DecisionPoly& dp, int mono, double w, const Matrix* L,
               const Matrix* R, int r0, int c0, bool transposed = false,
               bool mirror = false);

  /// Adds x_var * M at (r0, c0).
  void add_scalar_var(int var, const Matrix& M, int r0, int c0, bool mirror = false);

  const Matrix& constant() const { return constant_; }
  const std::map<int, Matrix>& coefficients() const { return coeffs_; }

  /// Raw left-hand side at an assignment (before sense/margin conversion).
  Matrix eval(const Vector& x) const;

  /// PSD block: sense NegativeDefinite yields -LHS - margin I >= 0,
  /// PositiveSemidefinite yields LHS - margin I >= 0.
  ConstraintBlock to_block() const;

private:
  int dim_;
  Sense sense_;
  double margin_;
  std::string tag_;
  Matrix constant_;
  std::map<int, Matrix> coeffs_;
};

/// Plant matrices as a function of (tau, rho): the open loop ignores tau, a
/// closed loop gains clock dependence through the scheduled gain.
using PlantEval = std::function<PlantMatrices(double tau, const Vector& rho)>;

PlantEval make_plant_eval(const LpvDelaySystem& sys);

// --- analysis-side constraints (stability certificate P, Q, R) --------------

struct AnalysisAnsatz {
  DecisionPoly P, Q, R;
};

AnalysisAnsatz make_analysis_ansatz(VarPool& pool, int n, int param_count,
                                    const AnsatzDegrees& degrees);

LmiConstraint gamma_analysis(const PlantMatrices& pm, int n, const DelaySpec& delay,
                             const DwellSpec& dwell, const AnalysisAnsatz& an, double tau,
                             const Vector& rho, double margin);

/// Gamma at tau = T_D with all clock derivatives zeroed (frozen certificate).
LmiConstraint gamma_stationary(const PlantMatrices& pm, int n, const DelaySpec& delay,
                               const DwellSpec& dwell, const AnalysisAnsatz& an,
                               const Vector& rho, double margin);

/// The five coupling conditions between (T_D, rho) and (0, eta).
std::vector<LmiConstraint> jump_conditions(const AnalysisAnsatz& an, const DwellSpec& dwell,
                                           const Vector& rho, const Vector& eta);

/// P, Q, R >= margin I at one grid point, grouped as one block-diagonal block.
LmiConstraint positivity_analysis(const AnalysisAnsatz& an, double tau, const Vector& rho,
                                  double margin);

// --- synthesis-side constraints (Theorem-2 variables) ------------------------

struct SynthesisAnsatz {
  DecisionPoly P, Q, R;  // symmetric n x n in (tau, rho)
  DecisionPoly U;        // q x n in (tau, rho)
  DecisionPoly X;        // n x n in rho only
  int gamma_sq_var = -1;        // scalar SDP variable when minimizing
  double gamma_sq_value = 1.0;  // constant when gamma is fixed
};

enum class GammaMode { Fixed, Minimize };
enum class UStructure { Free, TauRhoSplit };

SynthesisAnsatz make_synthesis_ansatz(VarPool& pool, int n, int q, int param_count,
                                      const AnsatzDegrees& degrees, UStructure structure,
                                      GammaMode mode, double gamma_fixed);

LmiConstraint gamma_synthesis(const PlantMatrices& pm, int n, int m, int q, int r,
                              const DelaySpec& delay, const DwellSpec& dwell,
                              const SynthesisAnsatz& sa, double tau, const Vector& rho,
                              double margin);

/// Stationary Gamma-tilde at T_D plus the five tilde coupling conditions.
std::vector<LmiConstraint> synthesis_boundary(const PlantMatrices& pm, int n, int m, int q,
                                              int r, const DelaySpec& delay,
                                              const DwellSpec& dwell, const SynthesisAnsatz& sa,
                                              const Vector& rho, const Vector& eta,
                                              double margin);

LmiConstraint positivity_synthesis(const SynthesisAnsatz& sa, double tau, const Vector& rho,
                                   double margin);

// --- gridding and aggregation -------------------------------------------------

struct Grid {
  std::vector<double> taus;
  std::vector<Vector> rhos;  // full Cartesian product, lexicographic
};

Grid build_grid(const GridPlan& plan, const DwellSpec& dwell, const ParamBox& box);

constexpr double kDefaultMargin = 1e-6;

struct AnalysisProblem {
  SdpProblem sdp;
  VarPool pool;
  AnalysisAnsatz ansatz;
  Grid grid;
  int n = 0;
};

struct SynthesisProblem {
  SdpProblem sdp;
  VarPool pool;
  SynthesisAnsatz ansatz;
  Grid grid;
  int n = 0, m = 0, q = 0, r = 0;
};

/// Ordered constraint list for one grid (used both for assembly and for
/// re-verification on refined grids): Gamma points, stationary points, jump
/// pairs equation-major, grouped positivity points.
std::vector<ConstraintBlock> analysis_blocks(const PlantEval& plant, int n,
                                             const DelaySpec& delay, const DwellSpec& dwell,
                                             const AnalysisAnsatz& an, const Grid& grid,
                                             double margin);

std::vector<ConstraintBlock> synthesis_blocks(const PlantEval& plant, int n, int m, int q,
                                              int r, const DelaySpec& delay,
                                              const DwellSpec& dwell, const SynthesisAnsatz& sa,
                                              const Grid& grid, double margin);

AnalysisProblem assemble_analysis(const PlantEval& plant, int n, int param_count,
                                  const ParamBox& box, const DelaySpec& delay,
                                  const DwellSpec& dwell, const GridPlan& plan,
                                  const AnsatzDegrees& degrees, double margin = kDefaultMargin);

AnalysisProblem assemble_analysis(const LpvDelaySystem& sys, const DelaySpec& delay,
                                  const DwellSpec& dwell, const GridPlan& plan,
                                  const AnsatzDegrees& degrees, double margin = kDefaultMargin);

SynthesisProblem assemble_synthesis(const LpvDelaySystem& sys, const DelaySpec& delay,
                                    const DwellSpec& dwell, const GridPlan& plan,
                                    const AnsatzDegrees& degrees, GammaMode mode,
                                    double gamma_fixed, UStructure structure,
                                    double margin = kDefaultMargin);

/// Doubles grid density per axis (n -> 2n - 1, nesting the original points).
GridPlan refine_plan(const GridPlan& plan);

}  // namespace dwell
