#pragma once

#include "dwell/analysis.hpp"
#include "dwell/model.hpp"
#include "dwell/synthesis.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace dwell {

/// Simulation setup. The initial function phi on [-h, 0] is either constant
/// (x0) or sampled uniformly over [-h, 0] (history_samples, first sample at
/// -h, last at 0). The delay and disturbance default to d(t) = h and w = 0.
struct SimConfig {
  double dt = 1e-3;
  double horizon = 10.0;
  Vector x0;
  std::vector<Vector> history_samples;
  std::function<double(double)> delay_fn;
  std::function<Vector(double)> disturbance_fn;
  std::uint64_t seed = 0;

  /// Checks shapes and, by dense sampling, that d(t) stays in [0, h] with
  /// |d'(t)| <= mu, and that dt does not exceed min d(t) (the integrator
  /// never looks ahead of the computed history).
  void validate(const LpvDelaySystem& sys, const DelaySpec& delay) const;
};

/// Sampled run. Rows before zero_index carry the initial history (inputs,
/// outputs and disturbance zero there); all arrays share one length.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> inputs;
  std::vector<Vector> outputs;
  std::vector<Vector> disturbance;
  std::vector<Vector> params;
  std::vector<double> clock;
  std::vector<double> delays;  // d(t) samples
  std::vector<Vector> derivs;  // right-sided dx/dt from the integrator
  int zero_index = 0;
  bool diverged = false;
  double blowup_time = std::numeric_limits<double>::quiet_NaN();

  void validate() const;
};

/// Integrates the (closed-loop) delay system under the piecewise-constant
/// parameter trajectory: classical fixed-step 4th-order Runge-Kutta with
/// cubic-Hermite delayed-state lookup on the stored history. Steps are split
/// exactly at parameter switches and at the point where t - d(t) crosses 0.
/// When the state norm passes 1e6 or turns nonfinite the run stops with the
/// divergence flag and blow-up time set.
Trajectory simulate(const LpvDelaySystem& sys, const GainSchedule* gain,
                    const PwcTrajectory& rho_traj, const DelaySpec& delay,
                    const DwellSpec& dwell, const SimConfig& cfg);

enum class HoldMode { Exact, Random };

/// Random piecewise-constant parameter trajectory: switch spacing exactly
/// t_dwell (Exact) or uniform on [t_dwell, 2 t_dwell] (Random), values i.i.d.
/// uniform over the box. Deterministic for a given seed.
PwcTrajectory gen_pwc_trajectory(std::uint64_t seed, const DwellSpec& dwell,
                                 const ParamBox& box, double horizon, HoldMode hold);

/// sqrt(integral ||z||^2 / integral ||w||^2) by trapezoidal quadrature over
/// t >= 0. Requires a zero initial state and a nonzero-energy disturbance
/// (std::domain_error otherwise).
double empirical_l2_gain(const Trajectory& tr);

struct LyapunovTrace {
  std::vector<double> times;   // tr.times from zero_index on
  std::vector<double> values;  // V(t)
};

/// Numeric evaluation of the certified functional along a run:
///   V = x'P(tau,rho)x + int_{t-d}^{t} e^{k(s-t)} x'Qx ds
///       + h int_{-h}^{0} int_{t+v}^{t} e^{k(s-t)} xdot'R xdot ds dv,
/// with both integrals by trapezoidal quadrature on the sample grid (the
/// double integral collapses to a single weighted one). Requires sample
/// spacing <= h/50.
LyapunovTrace lyapunov_trace(const Trajectory& tr, const Certificate& cert,
                             const DelaySpec& delay, const DwellSpec& dwell);

struct NonincreaseReport {
  bool ok = true;
  int violations = 0;
  double worst_increase = 0.0;  // largest V(t+) - V(t) beyond the allowance
  double worst_time = 0.0;
};

/// Checks V non-increase sample to sample (switch instants included: the grid
/// contains every t_k). An increase up to rel_tol * max(V(0), V(t)) is
/// attributed to quadrature error.
NonincreaseReport check_nonincrease(const LyapunovTrace& trace, double rel_tol);

struct JensenCase {
  double lhs = 0.0;    // (int xdot)' R (int xdot)
  double rhs = 0.0;    // h * int xdot' R xdot
  double margin = 0.0; // rhs - lhs, nonnegative by the integral inequality
};

/// Exact closed-form check of the integral inequality for a polynomial
/// integrand: coeffs(i, j) is the s^j coefficient of component i on [0, h].
JensenCase jensen_case(const Matrix& coeffs, const Matrix& R, double h);

struct JensenReport {
  int cases = 0;
  int violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  double tolerance = 0.0;
};

/// Randomized sweep of jensen_case over low-order polynomials, random
/// positive-definite weights and random interval lengths.
JensenReport jensen_check(std::uint64_t seed, int cases = 100);

/// Per-sample disagreement of an N-agent stacked state: the norm of the
/// deviation of every agent's block from the across-agent mean.
std::vector<double> disagreement(const Trajectory& tr, int N);

/// CSV export, columns: t, x..., u..., z..., w..., rho..., tau.
void save_csv(const Trajectory& tr, const std::string& path);

}  // namespace dwell
