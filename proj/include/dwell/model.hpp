#pragma once

#include "dwell/poly.hpp"

#include <string>
#include <vector>

namespace dwell {

/// Compact box of admissible parameter values.
struct ParamBox {
  Vector lower;
  Vector upper;

  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const Vector& rho, double slack = 0.0) const;
  void validate() const;
};

/// Delay class: 0 <= d(t) <= h with derivative bound mu < 1.
struct DelaySpec {
  double h = 0.0;
  double mu = 0.0;

  void validate() const;
};

/// Minimum dwell time and the exponential weight of the functional.
struct DwellSpec {
  double t_dwell = 0.0;
  double kappa = 0.0;

  void validate() const;
};

/// LPV time-delay plant with polynomial parameter dependence.
///
///   dx/dt = A(rho) x + Ad(rho) x(t - d(t)) + B(rho) u + E(rho) w
///   z     = C(rho) x + Cd(rho) x(t - d(t)) + D(rho) u + F(rho) w
///
/// All entry polynomials depend on rho only (clock-independent). Input and
/// output channels may be absent (dimension zero).
struct LpvDelaySystem {
  int n = 0;  ///< states
  int m = 0;  ///< exogenous inputs w
  int q = 0;  ///< control inputs u
  int r = 0;  ///< outputs z
  MatrixPoly A, Ad, B, C, Cd, D, E, F;
  ParamBox params;

  void validate() const;
};

/// The eight plant matrices evaluated at one parameter value (and, for
/// clock-dependent closed loops, one clock value).
struct PlantMatrices {
  Matrix A, Ad, B, C, Cd, D, E, F;
};

/// Evaluates all plant matrices at `rho`. Throws std::domain_error when rho
/// lies outside the parameter box.
PlantMatrices eval_system(const LpvDelaySystem& sys, const Vector& rho);

/// Right-continuous piecewise-constant parameter trajectory; value k holds on
/// [t_k, t_{k+1}).
struct PwcTrajectory {
  std::vector<double> switch_times;  // ascending, first entry 0
  std::vector<Vector> values;

  void validate(const DwellSpec* dwell = nullptr, const ParamBox* box = nullptr) const;

  /// Index of the interval containing t (t >= 0).
  int segment_index(double t) const;
};

/// Value held at time t; right-continuous at switch instants. Throws
/// std::domain_error for t < 0.
Vector trajectory_value(const PwcTrajectory& traj, double t);

/// Clock value min(t - t_k, t_dwell) for the segment active at t.
double trajectory_clock(const PwcTrajectory& traj, double t, double t_dwell);

// --- plant file I/O (JSON) -------------------------------------------------
//
// Schema: {"n","m","q","r", "params":{"lower","upper"},
//          "delay":{"h","mu"}, "dwell":{"t_dwell","kappa"},
//          "matrices":{"A":[{"exp":[..],"coeff":[[..]]}, ...], ...}}
// Matrix entries are polynomials in rho keyed by per-parameter exponents;
// omitted matrices are zero. Round-trips value-identically.

struct PlantFile {
  LpvDelaySystem sys;
  DelaySpec delay;
  DwellSpec dwell;
};

PlantFile load_plant(const std::string& path);
PlantFile parse_plant(const std::string& json_text);
std::string plant_to_json(const PlantFile& pf);
void save_plant(const PlantFile& pf, const std::string& path);

}  // namespace dwell
