#pragma once

// Small builders shared by the test suites.

#include "dwell/model.hpp"

namespace tb {

using dwell::Matrix;
using dwell::MatrixPoly;
using dwell::Vector;

inline Vector vec1(double a) {
  Vector v(1);
  v << a;
  return v;
}

inline Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

inline Matrix mat1(double a) {
  Matrix m(1, 1);
  m << a;
  return m;
}

inline Matrix mat22(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

/// Scalar plant over one parameter in [lo, hi]:
///   A = a0 + a1 rho,  Ad = ad0 + ad1 rho, no channels.
inline dwell::LpvDelaySystem scalar_system(double a0, double ad0, double lo = 0.0,
                                           double hi = 1.0, double a1 = 0.0,
                                           double ad1 = 0.0) {
  dwell::LpvDelaySystem sys;
  sys.n = 1;
  sys.m = sys.q = sys.r = 0;
  sys.params.lower = vec1(lo);
  sys.params.upper = vec1(hi);
  sys.A = MatrixPoly(1, 1, 2, false);
  if (a0 != 0.0) sys.A.add_term({0, 0}, mat1(a0));
  if (a1 != 0.0) sys.A.add_term({0, 1}, mat1(a1));
  sys.Ad = MatrixPoly(1, 1, 2, false);
  if (ad0 != 0.0) sys.Ad.add_term({0, 0}, mat1(ad0));
  if (ad1 != 0.0) sys.Ad.add_term({0, 1}, mat1(ad1));
  sys.B = MatrixPoly(1, 0, 2, false);
  sys.C = MatrixPoly(0, 1, 2, false);
  sys.Cd = MatrixPoly(0, 1, 2, false);
  sys.D = MatrixPoly(0, 0, 2, false);
  sys.E = MatrixPoly(1, 0, 2, false);
  sys.F = MatrixPoly(0, 0, 2, false);
  return sys;
}

/// Scalar plant with all four channels (m = q = r = 1); every matrix constant.
inline dwell::LpvDelaySystem scalar_io_system(double a, double ad, double b, double e,
                                              double c, double cd, double d, double f,
                                              double lo = 0.0, double hi = 1.0) {
  dwell::LpvDelaySystem sys;
  sys.n = sys.m = sys.q = sys.r = 1;
  sys.params.lower = vec1(lo);
  sys.params.upper = vec1(hi);
  auto one_by_one = [](double v) {
    MatrixPoly p(1, 1, 2, false);
    if (v != 0.0) p.add_term({0, 0}, mat1(v));
    return p;
  };
  sys.A = one_by_one(a);
  sys.Ad = one_by_one(ad);
  sys.B = one_by_one(b);
  sys.E = one_by_one(e);
  sys.C = one_by_one(c);
  sys.Cd = one_by_one(cd);
  sys.D = one_by_one(d);
  sys.F = one_by_one(f);
  return sys;
}

/// Single-segment parameter trajectory holding `rho` forever.
inline dwell::PwcTrajectory hold(const Vector& rho) {
  dwell::PwcTrajectory traj;
  traj.switch_times = {0.0};
  traj.values = {rho};
  return traj;
}

}  // namespace tb
