#include "dwell/model.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dwell {

using nlohmann::json;

bool ParamBox::contains(const Vector& rho, double slack) const {
  if (rho.size() != lower.size()) return false;
  for (int i = 0; i < rho.size(); ++i)
    if (rho[i] < lower[i] - slack || rho[i] > upper[i] + slack) return false;
  return true;
}

void ParamBox::validate() const {
  if (lower.size() < 1 || lower.size() != upper.size())
    throw std::invalid_argument("parameter box needs matching non-empty bounds");
  for (int i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]))
      throw std::invalid_argument("parameter box must be bounded");
    if (lower[i] > upper[i]) throw std::invalid_argument("parameter box lower > upper");
  }
}

void DelaySpec::validate() const {
  if (!(h >= 0.0)) throw std::invalid_argument("delay bound h must be >= 0");
  if (!(mu >= 0.0 && mu < 1.0)) throw std::invalid_argument("mu must lie in [0, 1)");
}

void DwellSpec::validate() const {
  if (!(t_dwell > 0.0)) throw std::invalid_argument("dwell time must be > 0");
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be > 0");
}

namespace {

void check_shape(const MatrixPoly& p, int rows, int cols, int s, const char* name) {
  if (p.rows() != rows || p.cols() != cols)
    throw std::invalid_argument(std::string(name) + ": shape mismatch");
  if (p.var_count() != 1 + s)
    throw std::invalid_argument(std::string(name) + ": variable count mismatch");
  if (!p.clock_independent())
    throw std::invalid_argument(std::string(name) + ": plant entries must not depend on the clock");
}

}  // namespace

void LpvDelaySystem::validate() const {
  params.validate();
  if (n < 1) throw std::invalid_argument("state dimension must be >= 1");
  if (m < 0 || q < 0 || r < 0) throw std::invalid_argument("negative channel dimension");
  const int s = params.dim();
  check_shape(A, n, n, s, "A");
  check_shape(Ad, n, n, s, "Ad");
  check_shape(B, n, q, s, "B");
  check_shape(C, r, n, s, "C");
  check_shape(Cd, r, n, s, "Cd");
  check_shape(D, r, q, s, "D");
  check_shape(E, n, m, s, "E");
  check_shape(F, r, m, s, "F");
}

PlantMatrices eval_system(const LpvDelaySystem& sys, const Vector& rho) {
  if (!sys.params.contains(rho, 1e-12))
    throw std::domain_error("rho outside the parameter box");
  PlantMatrices out;
  out.A = sys.A.eval(0.0, rho);
  out.Ad = sys.Ad.eval(0.0, rho);
  out.B = sys.B.eval(0.0, rho);
  out.C = sys.C.eval(0.0, rho);
  out.Cd = sys.Cd.eval(0.0, rho);
  out.D = sys.D.eval(0.0, rho);
  out.E = sys.E.eval(0.0, rho);
  out.F = sys.F.eval(0.0, rho);
  return out;
}

void PwcTrajectory::validate(const DwellSpec* dwell, const ParamBox* box) const {
  if (switch_times.empty() || switch_times.size() != values.size())
    throw std::invalid_argument("trajectory needs matching switch times and values");
  if (switch_times.front() != 0.0) throw std::invalid_argument("first switch time must be 0");
  for (size_t k = 1; k < switch_times.size(); ++k) {
    double gap = switch_times[k] - switch_times[k - 1];
    if (gap <= 0.0) throw std::invalid_argument("switch times must be strictly ascending");
    if (dwell && gap < dwell->t_dwell - 1e-12)
      throw std::invalid_argument("switch spacing below the dwell time");
  }
  if (box)
    for (const auto& v : values)
      if (!box->contains(v, 1e-12)) throw std::invalid_argument("trajectory value outside the box");
}

int PwcTrajectory::segment_index(double t) const {
  // first interval [t_k, t_{k+1}) containing t; last segment extends to +inf
  auto it = std::upper_bound(switch_times.begin(), switch_times.end(), t);
  int idx = static_cast<int>(it - switch_times.begin()) - 1;
  return std::max(idx, 0);
}

Vector trajectory_value(const PwcTrajectory& traj, double t) {
  if (t < 0.0) throw std::domain_error("trajectory evaluated at negative time");
  return traj.values[static_cast<size_t>(traj.segment_index(t))];
}

double trajectory_clock(const PwcTrajectory& traj, double t, double t_dwell) {
  if (t < 0.0) throw std::domain_error("trajectory evaluated at negative time");
  int k = traj.segment_index(t);
  return std::min(t - traj.switch_times[static_cast<size_t>(k)], t_dwell);
}

// --- JSON I/O ---------------------------------------------------------------

namespace {

json poly_to_json(const MatrixPoly& p) {
  json terms = json::array();
  for (const auto& [exps, coeff] : p.terms()) {
    json row_major = json::array();
    for (int i = 0; i < coeff.rows(); ++i) {
      json row = json::array();
      for (int j = 0; j < coeff.cols(); ++j) row.push_back(coeff(i, j));
      row_major.push_back(row);
    }
    // plant entries are clock-independent: store parameter exponents only
    json e = json::array();
    for (size_t i = 1; i < exps.size(); ++i) e.push_back(exps[i]);
    terms.push_back(json{{"exp", e}, {"coeff", row_major}});
  }
  return terms;
}

MatrixPoly poly_from_json(const json& terms, int rows, int cols, int s) {
  MatrixPoly p(rows, cols, 1 + s, false);
  for (const auto& term : terms) {
    Exponents exps(static_cast<size_t>(1 + s), 0);
    const auto& e = term.at("exp");
    if (static_cast<int>(e.size()) != s)
      throw std::invalid_argument("plant term exponent length must equal parameter count");
    for (int i = 0; i < s; ++i) exps[static_cast<size_t>(i) + 1] = e[i].get<int>();
    const auto& c = term.at("coeff");
    Matrix coeff(rows, cols);
    if (static_cast<int>(c.size()) != rows) throw std::invalid_argument("coefficient row count mismatch");
    for (int i = 0; i < rows; ++i) {
      if (static_cast<int>(c[i].size()) != cols)
        throw std::invalid_argument("coefficient column count mismatch");
      for (int j = 0; j < cols; ++j) coeff(i, j) = c[i][j].get<double>();
    }
    p.add_term(exps, coeff);
  }
  return p;
}

Vector vector_from_json(const json& a) {
  Vector v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v[static_cast<int>(i)] = a[i].get<double>();
  return v;
}

json vector_to_json(const Vector& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

PlantFile parse_plant(const std::string& json_text) {
  json j = json::parse(json_text);
  PlantFile pf;
  LpvDelaySystem& sys = pf.sys;
  sys.n = j.at("n").get<int>();
  sys.m = j.value("m", 0);
  sys.q = j.value("q", 0);
  sys.r = j.value("r", 0);
  sys.params.lower = vector_from_json(j.at("params").at("lower"));
  sys.params.upper = vector_from_json(j.at("params").at("upper"));
  const int s = sys.params.dim();
  const json mats = j.value("matrices", json::object());
  auto get = [&](const char* name, int rows, int cols) {
    if (mats.contains(name)) return poly_from_json(mats.at(name), rows, cols, s);
    return MatrixPoly(rows, cols, 1 + s, false);
  };
  sys.A = get("A", sys.n, sys.n);
  sys.Ad = get("Ad", sys.n, sys.n);
  sys.B = get("B", sys.n, sys.q);
  sys.C = get("C", sys.r, sys.n);
  sys.Cd = get("Cd", sys.r, sys.n);
  sys.D = get("D", sys.r, sys.q);
  sys.E = get("E", sys.n, sys.m);
  sys.F = get("F", sys.r, sys.m);
  pf.delay.h = j.at("delay").at("h").get<double>();
  pf.delay.mu = j.at("delay").at("mu").get<double>();
  pf.dwell.t_dwell = j.at("dwell").at("t_dwell").get<double>();
  pf.dwell.kappa = j.at("dwell").at("kappa").get<double>();
  sys.validate();
  pf.delay.validate();
  pf.dwell.validate();
  return pf;
}

PlantFile load_plant(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open plant file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_plant(ss.str());
}

std::string plant_to_json(const PlantFile& pf) {
  const LpvDelaySystem& sys = pf.sys;
  json mats;
  auto put = [&](const char* name, const MatrixPoly& p) {
    if (!p.is_zero()) mats[name] = poly_to_json(p);
  };
  put("A", sys.A);
  put("Ad", sys.Ad);
  put("B", sys.B);
  put("C", sys.C);
  put("Cd", sys.Cd);
  put("D", sys.D);
  put("E", sys.E);
  put("F", sys.F);
  json j{{"n", sys.n},
         {"m", sys.m},
         {"q", sys.q},
         {"r", sys.r},
         {"params", {{"lower", vector_to_json(sys.params.lower)}, {"upper", vector_to_json(sys.params.upper)}}},
         {"delay", {{"h", pf.delay.h}, {"mu", pf.delay.mu}}},
         {"dwell", {{"t_dwell", pf.dwell.t_dwell}, {"kappa", pf.dwell.kappa}}},
         {"matrices", mats}};
  return j.dump(2);
}

void save_plant(const PlantFile& pf, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write plant file: " + path);
  out << plant_to_json(pf) << "\n";
}

}  // namespace dwell
