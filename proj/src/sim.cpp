#include "dwell/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <stdexcept>

namespace dwell {

namespace {

double uniform01(std::mt19937_64& rng) {
  // 53-bit mantissa draw; avoids distribution objects so streams are
  // reproducible across standard libraries.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Dense solution history with per-node left and right derivatives, so the
/// cubic interpolant honours derivative jumps at parameter switches and at
/// the seam between the initial function and the integrated solution.
class History {
public:
  void reserve(size_t n) {
    t_.reserve(n);
    x_.reserve(n);
    fin_.reserve(n);
    fout_.reserve(n);
  }

  void push(double t, const Vector& x, const Vector& f_in, const Vector& f_out) {
    if (!t_.empty() && !(t > t_.back()))
      throw std::logic_error("history times must increase");
    t_.push_back(t);
    x_.push_back(x);
    fin_.push_back(f_in);
    fout_.push_back(f_out);
  }

  Vector eval(double s) const {
    const double lo = t_.front(), hi = t_.back();
    const double out_tol = 1e-9 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
    if (s < lo - out_tol || s > hi + out_tol)
      throw std::domain_error("delayed-state lookup outside the stored history");
    s = std::clamp(s, lo, hi);

    const auto it = std::upper_bound(t_.begin(), t_.end(), s);
    size_t i = static_cast<size_t>(std::max<std::ptrdiff_t>(it - t_.begin() - 1, 0));
    if (i + 1 >= t_.size()) i = t_.size() - 2;

    const double snap = 1e-12 * std::max(1.0, std::abs(s));
    if (std::abs(s - t_[i]) <= snap) return x_[i];
    if (std::abs(s - t_[i + 1]) <= snap) return x_[i + 1];

    const double dt = t_[i + 1] - t_[i];
    const double th = (s - t_[i]) / dt;
    const double th2 = th * th, th3 = th2 * th;
    return (2 * th3 - 3 * th2 + 1) * x_[i] + dt * (th3 - 2 * th2 + th) * fout_[i] +
           (-2 * th3 + 3 * th2) * x_[i + 1] + dt * (th3 - th2) * fin_[i + 1];
  }

private:
  std::vector<double> t_;
  std::vector<Vector> x_, fin_, fout_;
};

}  // namespace

// --- SimConfig ---------------------------------------------------------------

void SimConfig::validate(const LpvDelaySystem& sys, const DelaySpec& delay) const {
  if (!(dt > 0.0)) throw std::invalid_argument("sim: dt must be positive");
  if (!(horizon > 0.0)) throw std::invalid_argument("sim: horizon must be positive");
  if (history_samples.empty()) {
    if (x0.size() != sys.n)
      throw std::invalid_argument("sim: x0 dimension does not match the state count");
  } else {
    if (history_samples.size() < 2)
      throw std::invalid_argument("sim: a sampled history needs at least two samples");
    for (const Vector& v : history_samples)
      if (v.size() != sys.n)
        throw std::invalid_argument("sim: history sample dimension mismatch");
  }
  if (disturbance_fn && sys.m > 0) {
    if (disturbance_fn(0.0).size() != sys.m)
      throw std::invalid_argument("sim: disturbance dimension does not match the plant");
  }

  const bool lookup = !(sys.Ad.is_zero() && sys.Cd.is_zero()) && delay.h > 0.0;
  if (delay_fn || lookup) {
    const auto d = delay_fn ? delay_fn : std::function<double(double)>([&](double) {
      return delay.h;
    });
    const int samples = 2000;
    double d_min = std::numeric_limits<double>::infinity();
    double prev = 0.0;
    for (int i = 0; i <= samples; ++i) {
      const double t = horizon * static_cast<double>(i) / samples;
      const double di = d(t);
      if (di < -1e-9 || di > delay.h + 1e-9)
        throw std::invalid_argument("sim: d(t) leaves [0, h] on the horizon");
      if (i > 0) {
        const double slope = (di - prev) / (horizon / samples);
        if (std::abs(slope) > delay.mu + 1e-6)
          throw std::invalid_argument("sim: |d'(t)| exceeds mu on the horizon");
      }
      prev = di;
      d_min = std::min(d_min, di);
    }
    if (lookup && dt > d_min + 1e-12)
      throw std::invalid_argument(
          "sim: dt must not exceed min d(t); the integrator only looks backward "
          "into computed history (reduce dt)");
  }
}

void Trajectory::validate() const {
  const size_t n = times.size();
  if (states.size() != n || inputs.size() != n || outputs.size() != n ||
      disturbance.size() != n || params.size() != n || clock.size() != n ||
      delays.size() != n || derivs.size() != n)
    throw std::logic_error("trajectory arrays have mismatched lengths");
  if (zero_index < 0 || static_cast<size_t>(zero_index) >= n)
    throw std::logic_error("trajectory zero_index out of range");
  for (size_t i = 1; i < n; ++i)
    if (!(times[i] > times[i - 1])) throw std::logic_error("trajectory times must increase");
}

// --- simulate ------------------------------------------------------------------

Trajectory simulate(const LpvDelaySystem& sys, const GainSchedule* gain,
                    const PwcTrajectory& rho_traj, const DelaySpec& delay,
                    const DwellSpec& dwell, const SimConfig& cfg) {
  sys.validate();
  delay.validate();
  dwell.validate();
  rho_traj.validate(&dwell, &sys.params);
  cfg.validate(sys, delay);
  if (gain) {
    if (gain->U.rows() != sys.q || gain->U.cols() != sys.n)
      throw std::invalid_argument("simulate: gain shape does not match the plant");
  }

  const int n = sys.n, m = sys.m, q = sys.q, r = sys.r;
  const double h = delay.h;
  const bool has_delay_terms = !(sys.Ad.is_zero() && sys.Cd.is_zero());
  const bool lookup = has_delay_terms && h > 0.0;

  std::function<double(double)> dfun = cfg.delay_fn;
  if (!dfun) dfun = [h](double) { return h; };
  std::function<Vector(double)> wfun = cfg.disturbance_fn;
  if (!wfun) wfun = [m](double) { return Vector::Zero(m); };

  // Integration grid: exact switch times, the seam where t - d(t) crosses
  // zero (unique: t - d(t) is strictly increasing for mu < 1), and the
  // horizon; gaps filled uniformly with steps <= dt.
  std::vector<double> specials{0.0, cfg.horizon};
  for (double tk : rho_traj.switch_times)
    if (tk > 0.0 && tk < cfg.horizon) specials.push_back(tk);
  if (lookup) {
    auto g = [&](double t) { return t - dfun(t); };
    if (g(0.0) < 0.0 && g(cfg.horizon) > 0.0) {
      double a = 0.0, b = cfg.horizon;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (a + b);
        (g(mid) < 0.0 ? a : b) = mid;
      }
      const double seam = 0.5 * (a + b);
      if (seam > 0.0 && seam < cfg.horizon) specials.push_back(seam);
    }
  }
  std::sort(specials.begin(), specials.end());
  const double same_tol = 1e-12 * std::max(1.0, cfg.horizon);
  specials.erase(std::unique(specials.begin(), specials.end(),
                             [&](double a, double b) { return b - a <= same_tol; }),
                 specials.end());

  std::vector<double> grid{specials.front()};
  for (size_t i = 0; i + 1 < specials.size(); ++i) {
    const double a = specials[i], b = specials[i + 1];
    const int nsub = std::max(1, static_cast<int>(std::ceil((b - a) / cfg.dt - 1e-9)));
    for (int k = 1; k <= nsub; ++k)
      grid.push_back(k == nsub ? b : a + (b - a) * static_cast<double>(k) / nsub);
  }

  // Initial history samples on [-h, 0).
  std::vector<double> h_times;
  std::vector<Vector> h_states, h_derivs;
  Vector x = cfg.history_samples.empty() ? cfg.x0 : cfg.history_samples.back();
  if (h > 0.0) {
    if (cfg.history_samples.empty()) {
      const int nh = std::max(1, static_cast<int>(std::ceil(h / cfg.dt - 1e-9)));
      for (int k = 0; k < nh; ++k) {
        h_times.push_back(-h * static_cast<double>(nh - k) / nh);
        h_states.push_back(cfg.x0);
        h_derivs.push_back(Vector::Zero(n));
      }
    } else {
      const int K = static_cast<int>(cfg.history_samples.size());
      const double step = h / (K - 1);
      for (int k = 0; k + 1 < K; ++k) {
        h_times.push_back(-h * static_cast<double>(K - 1 - k) / (K - 1));
        h_states.push_back(cfg.history_samples[static_cast<size_t>(k)]);
      }
      for (int k = 0; k + 1 < K; ++k) {
        const auto& s = cfg.history_samples;
        Vector slope;
        if (k == 0)
          slope = (s[1] - s[0]) / step;
        else
          slope = (s[static_cast<size_t>(k + 1)] - s[static_cast<size_t>(k - 1)]) / (2 * step);
        h_derivs.push_back(slope);
      }
    }
  }

  // Per-segment plant data; the gain's X factor depends only on rho, so its
  // inverse is cached per segment.
  struct Segment {
    int index = 0;
    double t_k = 0.0;
    Vector rho;
    PlantMatrices pm;
    Matrix Xinv;
  };
  auto load_segment = [&](double t) {
    Segment s;
    s.index = rho_traj.segment_index(t);
    s.t_k = rho_traj.switch_times[static_cast<size_t>(s.index)];
    s.rho = rho_traj.values[static_cast<size_t>(s.index)];
    s.pm = eval_system(sys, s.rho);
    if (gain) {
      const Matrix Xe = gain->X.eval(0.0, s.rho);
      Eigen::FullPivLU<Matrix> lu(Xe);
      if (!lu.isInvertible())
        throw std::runtime_error("simulate: gain factor X(rho) is singular");
      s.Xinv = lu.inverse();
    }
    return s;
  };

  Segment seg = load_segment(0.0);
  History hist;
  hist.reserve(h_times.size() + grid.size());
  for (size_t k = 0; k < h_times.size(); ++k)
    hist.push(h_times[k], h_states[k], h_derivs[k], h_derivs[k]);

  auto gain_at = [&](double t) -> Matrix {
    const double tau = std::min(t - seg.t_k, dwell.t_dwell);
    return gain->U.eval(tau, seg.rho) * seg.Xinv;
  };
  auto delayed = [&](double ts, const Vector& xs) -> Vector {
    if (!has_delay_terms) return Vector::Zero(n);
    if (!lookup) return xs;  // h == 0: the delayed argument is the state itself
    return hist.eval(ts - dfun(ts));
  };
  auto f = [&](double ts, const Vector& xs) -> Vector {
    Vector acc = seg.pm.A * xs + seg.pm.Ad * delayed(ts, xs);
    if (q > 0 && gain) acc.noalias() += seg.pm.B * (gain_at(ts) * xs);
    if (m > 0) acc.noalias() += seg.pm.E * wfun(ts);
    return acc;
  };

  Trajectory tr;
  const size_t total = h_times.size() + grid.size();
  tr.times.reserve(total);
  tr.states.reserve(total);
  tr.inputs.reserve(total);
  tr.outputs.reserve(total);
  tr.disturbance.reserve(total);
  tr.params.reserve(total);
  tr.clock.reserve(total);
  tr.delays.reserve(total);
  tr.derivs.reserve(total);

  for (size_t k = 0; k < h_times.size(); ++k) {
    tr.times.push_back(h_times[k]);
    tr.states.push_back(h_states[k]);
    tr.inputs.push_back(Vector::Zero(q));
    tr.outputs.push_back(Vector::Zero(r));
    tr.disturbance.push_back(Vector::Zero(m));
    tr.params.push_back(rho_traj.values.front());
    tr.clock.push_back(0.0);
    tr.delays.push_back(dfun(0.0));
    tr.derivs.push_back(h_derivs[k]);
  }
  tr.zero_index = static_cast<int>(h_times.size());

  auto record = [&](double t, const Vector& xs, const Vector& deriv) {
    const double tau = std::min(t - seg.t_k, dwell.t_dwell);
    const Vector w = wfun(t);
    const Vector u = (q > 0 && gain) ? Vector(gain_at(t) * xs) : Vector::Zero(q);
    Vector z = Vector::Zero(r);
    if (r > 0) {
      z = seg.pm.C * xs + seg.pm.Cd * delayed(t, xs);
      if (q > 0) z.noalias() += seg.pm.D * u;
      if (m > 0) z.noalias() += seg.pm.F * w;
    }
    tr.times.push_back(t);
    tr.states.push_back(xs);
    tr.inputs.push_back(u);
    tr.outputs.push_back(z);
    tr.disturbance.push_back(w);
    tr.params.push_back(seg.rho);
    tr.clock.push_back(tau);
    tr.delays.push_back(dfun(std::clamp(t, 0.0, cfg.horizon)));
    tr.derivs.push_back(deriv);
  };

  Vector k1 = f(0.0, x);
  {
    const Vector f_in = h_times.empty() ? k1 : h_derivs.back();
    hist.push(0.0, x, f_in, k1);
  }
  record(0.0, x, k1);

  for (size_t i = 0; i + 1 < grid.size(); ++i) {
    const double t = grid[i], t2 = grid[i + 1];
    const double step = t2 - t;
    const Vector k2 = f(t + 0.5 * step, x + (0.5 * step) * k1);
    const Vector k3 = f(t + 0.5 * step, x + (0.5 * step) * k2);
    const Vector k4 = f(t2, x + step * k3);
    Vector x2 = x + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    if (!x2.allFinite()) {
      tr.diverged = true;
      tr.blowup_time = t2;
      break;
    }
    const Vector f_in = f(t2, x2);
    const bool switched = rho_traj.segment_index(t2) != seg.index;
    if (switched) seg = load_segment(t2);
    const Vector f_out = switched ? f(t2, x2) : f_in;
    hist.push(t2, x2, f_in, f_out);
    record(t2, x2, f_out);
    x = x2;
    k1 = f_out;
    if (x2.norm() > 1e6) {
      tr.diverged = true;
      tr.blowup_time = t2;
      break;
    }
  }

  tr.validate();
  return tr;
}

// --- parameter trajectories ------------------------------------------------------

PwcTrajectory gen_pwc_trajectory(std::uint64_t seed, const DwellSpec& dwell,
                                 const ParamBox& box, double horizon, HoldMode hold) {
  dwell.validate();
  box.validate();
  if (!(horizon > 0.0)) throw std::invalid_argument("gen_pwc_trajectory: horizon <= 0");

  std::mt19937_64 rng(seed);
  auto draw = [&]() {
    Vector v(box.dim());
    for (int i = 0; i < box.dim(); ++i)
      v[i] = box.lower[i] + uniform01(rng) * (box.upper[i] - box.lower[i]);
    return v;
  };

  PwcTrajectory traj;
  double t = 0.0;
  while (true) {
    traj.switch_times.push_back(t);
    traj.values.push_back(draw());
    const double gap =
        hold == HoldMode::Exact ? dwell.t_dwell : dwell.t_dwell * (1.0 + uniform01(rng));
    t += gap;
    if (t >= horizon - 1e-12) break;
  }
  traj.validate(&dwell, &box);
  return traj;
}

// --- empirical L2 gain ------------------------------------------------------------

double empirical_l2_gain(const Trajectory& tr) {
  tr.validate();
  const size_t zi = static_cast<size_t>(tr.zero_index);
  if (tr.states[zi].norm() > 1e-9)
    throw std::domain_error("empirical_l2_gain: the run must start from a zero state");
  double ez = 0.0, ew = 0.0;
  for (size_t i = zi; i + 1 < tr.times.size(); ++i) {
    const double w = 0.5 * (tr.times[i + 1] - tr.times[i]);
    ez += w * (tr.outputs[i].squaredNorm() + tr.outputs[i + 1].squaredNorm());
    ew += w * (tr.disturbance[i].squaredNorm() + tr.disturbance[i + 1].squaredNorm());
  }
  if (!(ew > 0.0)) throw std::domain_error("empirical_l2_gain: disturbance energy is zero");
  return std::sqrt(ez / ew);
}

// --- Lyapunov functional trace ------------------------------------------------------

namespace {

/// Trapezoid of a grid-sampled integrand over [a, times[i_end]], the first
/// partial cell by linear interpolation of the integrand.
double integrate_tail(const std::vector<double>& ts, int i_end, double a,
                      const std::function<double(int)>& g) {
  const double tol = 1e-9 * std::max(1.0, std::abs(ts[static_cast<size_t>(i_end)]));
  if (a < ts.front() - tol)
    throw std::invalid_argument("lyapunov_trace: stored history does not reach t - h");
  a = std::max(a, ts.front());
  if (a >= ts[static_cast<size_t>(i_end)] - 1e-15) return 0.0;

  int ia = static_cast<int>(std::lower_bound(ts.begin(), ts.begin() + i_end + 1, a) -
                            ts.begin());
  double total = 0.0;
  double g_prev;
  if (ia > 0 && ts[static_cast<size_t>(ia)] - a > 1e-15) {
    const double t0 = ts[static_cast<size_t>(ia - 1)], t1 = ts[static_cast<size_t>(ia)];
    const double th = (a - t0) / (t1 - t0);
    const double ga = (1.0 - th) * g(ia - 1) + th * g(ia);
    g_prev = g(ia);
    total += 0.5 * (t1 - a) * (ga + g_prev);
  } else {
    g_prev = g(ia);
  }
  for (int j = ia; j < i_end; ++j) {
    const double g_next = g(j + 1);
    total += 0.5 * (ts[static_cast<size_t>(j + 1)] - ts[static_cast<size_t>(j)]) *
             (g_prev + g_next);
    g_prev = g_next;
  }
  return total;
}

}  // namespace

LyapunovTrace lyapunov_trace(const Trajectory& tr, const Certificate& cert,
                             const DelaySpec& delay, const DwellSpec& dwell) {
  tr.validate();
  const double h = delay.h, kappa = dwell.kappa;
  if (h > 0.0) {
    double max_gap = 0.0;
    for (size_t i = 1; i < tr.times.size(); ++i)
      max_gap = std::max(max_gap, tr.times[i] - tr.times[i - 1]);
    if (max_gap > h / 50.0 + 1e-9)
      throw std::invalid_argument(
          "lyapunov_trace: sample spacing exceeds h/50; rerun with a finer dt");
  }

  LyapunovTrace trace;
  const int count = static_cast<int>(tr.times.size());
  for (int i = tr.zero_index; i < count; ++i) {
    const double t = tr.times[static_cast<size_t>(i)];
    const double tau = tr.clock[static_cast<size_t>(i)];
    const Vector& rho = tr.params[static_cast<size_t>(i)];
    const Matrix P = cert.P.eval(tau, rho);
    const Matrix Q = cert.Q.eval(tau, rho);
    const Matrix R = cert.R.eval(tau, rho);
    const Vector& xi = tr.states[static_cast<size_t>(i)];

    double v = xi.dot(P * xi);
    if (h > 0.0) {
      auto gq = [&](int j) {
        const Vector& xs = tr.states[static_cast<size_t>(j)];
        return std::exp(kappa * (tr.times[static_cast<size_t>(j)] - t)) * xs.dot(Q * xs);
      };
      v += integrate_tail(tr.times, i, t - tr.delays[static_cast<size_t>(i)], gq);
      // h * int_{-h}^{0} int_{t+v}^{t} e^{k(s-t)} xdot'R xdot ds dv collapses
      // to h * int_{t-h}^{t} (s - t + h) e^{k(s-t)} xdot'R xdot ds.
      auto gr = [&](int j) {
        const Vector& xd = tr.derivs[static_cast<size_t>(j)];
        const double s = tr.times[static_cast<size_t>(j)];
        return (s - t + h) * std::exp(kappa * (s - t)) * xd.dot(R * xd);
      };
      v += h * integrate_tail(tr.times, i, t - h, gr);
    }
    trace.times.push_back(t);
    trace.values.push_back(v);
  }
  return trace;
}

NonincreaseReport check_nonincrease(const LyapunovTrace& trace, double rel_tol) {
  NonincreaseReport rep;
  if (trace.values.size() < 2) return rep;
  const double v0 = trace.values.front();
  for (size_t i = 0; i + 1 < trace.values.size(); ++i) {
    const double allowed = rel_tol * std::max(v0, trace.values[i]);
    const double inc = trace.values[i + 1] - trace.values[i];
    if (inc > allowed) {
      ++rep.violations;
      if (inc - allowed > rep.worst_increase) {
        rep.worst_increase = inc - allowed;
        rep.worst_time = trace.times[i + 1];
      }
    }
  }
  rep.ok = rep.violations == 0;
  return rep;
}

// --- integral inequality sweep --------------------------------------------------------

JensenCase jensen_case(const Matrix& coeffs, const Matrix& R, double h) {
  if (R.rows() != coeffs.rows() || R.cols() != coeffs.rows())
    throw std::invalid_argument("jensen_case: weight shape mismatch");
  if (!(h > 0.0)) throw std::invalid_argument("jensen_case: h must be positive");
  const int n = static_cast<int>(coeffs.rows());
  const int terms = static_cast<int>(coeffs.cols());

  Vector v(n);  // int_0^h xdot
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < terms; ++j) s += coeffs(i, j) * std::pow(h, j + 1) / (j + 1);
    v[i] = s;
  }
  double quad = 0.0;  // int_0^h xdot' R xdot
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int j = 0; j < terms; ++j)
        for (int l = 0; l < terms; ++l)
          s += coeffs(i, j) * coeffs(k, l) * std::pow(h, j + l + 1) / (j + l + 1);
      quad += R(i, k) * s;
    }

  JensenCase out;
  out.lhs = v.dot(R * v);
  out.rhs = h * quad;
  out.margin = out.rhs - out.lhs;
  return out;
}

JensenReport jensen_check(std::uint64_t seed, int cases) {
  std::mt19937_64 rng(seed);
  auto u = [&]() { return 2.0 * uniform01(rng) - 1.0; };

  JensenReport rep;
  rep.cases = cases;
  for (int c = 0; c < cases; ++c) {
    const int n = 1 + c % 3;
    const int deg = c % 4;  // includes the constant equality case
    Matrix coeffs(n, deg + 1);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= deg; ++j) coeffs(i, j) = u();
    Matrix G(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) G(i, j) = u();
    const Matrix R = G.transpose() * G + 0.1 * Matrix::Identity(n, n);
    const double h = 0.1 + 1.9 * uniform01(rng);

    const JensenCase jc = jensen_case(coeffs, R, h);
    const double tol = 1e-9 * std::max(1.0, std::abs(jc.rhs));
    rep.tolerance = std::max(rep.tolerance, tol);
    if (jc.margin < -tol) ++rep.violations;
    rep.worst_margin = std::min(rep.worst_margin, jc.margin);
  }
  return rep;
}

// --- consensus helpers ------------------------------------------------------------------

std::vector<double> disagreement(const Trajectory& tr, int N) {
  tr.validate();
  if (N <= 0) throw std::invalid_argument("disagreement: agent count must be positive");
  const int dim = static_cast<int>(tr.states.front().size());
  if (dim % N != 0)
    throw std::invalid_argument("disagreement: state dimension not divisible by N");
  const int nx = dim / N;

  std::vector<double> out;
  out.reserve(tr.times.size());
  for (const Vector& x : tr.states) {
    Vector mean = Vector::Zero(nx);
    for (int a = 0; a < N; ++a) mean += x.segment(a * nx, nx);
    mean /= static_cast<double>(N);
    double ss = 0.0;
    for (int a = 0; a < N; ++a) ss += (x.segment(a * nx, nx) - mean).squaredNorm();
    out.push_back(std::sqrt(ss));
  }
  return out;
}

// --- CSV ----------------------------------------------------------------------------------

void save_csv(const Trajectory& tr, const std::string& path) {
  tr.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(14);

  const auto width = [](const std::vector<Vector>& col) {
    return col.empty() ? 0 : static_cast<int>(col.front().size());
  };
  const int nx = width(tr.states), nu = width(tr.inputs), nz = width(tr.outputs),
            nw = width(tr.disturbance), np = width(tr.params);

  out << "t";
  for (int i = 0; i < nx; ++i) out << ",x" << i;
  for (int i = 0; i < nu; ++i) out << ",u" << i;
  for (int i = 0; i < nz; ++i) out << ",z" << i;
  for (int i = 0; i < nw; ++i) out << ",w" << i;
  for (int i = 0; i < np; ++i) out << ",rho" << i;
  out << ",tau\n";

  for (size_t row = 0; row < tr.times.size(); ++row) {
    out << tr.times[row];
    for (int i = 0; i < nx; ++i) out << "," << tr.states[row][i];
    for (int i = 0; i < nu; ++i) out << "," << tr.inputs[row][i];
    for (int i = 0; i < nz; ++i) out << "," << tr.outputs[row][i];
    for (int i = 0; i < nw; ++i) out << "," << tr.disturbance[row][i];
    for (int i = 0; i < np; ++i) out << "," << tr.params[row][i];
    out << "," << tr.clock[row] << "\n";
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace dwell
