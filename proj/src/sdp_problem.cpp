#include "dwell/sdp.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dwell {

Matrix ConstraintBlock::constant_dense() const {
  Matrix M = Matrix::Zero(dim, dim);
  for (const auto& t : constant) {
    M(t.row, t.col) += t.value;
    if (t.row != t.col) M(t.col, t.row) += t.value;
  }
  return M;
}

Matrix ConstraintBlock::coeff_dense(const BlockCoeff& bc) const {
  Matrix M = Matrix::Zero(dim, dim);
  for (const auto& t : bc.entries) {
    M(t.row, t.col) += t.value;
    if (t.row != t.col) M(t.col, t.row) += t.value;
  }
  return M;
}

Matrix ConstraintBlock::eval_dense(const Vector& x) const {
  Matrix M = constant_dense();
  for (const auto& bc : coeffs) {
    const double xi = x[bc.var];
    if (xi == 0.0) continue;
    for (const auto& t : bc.entries) {
      M(t.row, t.col) += xi * t.value;
      if (t.row != t.col) M(t.col, t.row) += xi * t.value;
    }
  }
  return M;
}

double ConstraintBlock::min_eigenvalue(const Vector& x) const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(eval_dense(x), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool SdpProblem::feasibility_only() const {
  return objective.size() == 0 || objective.isZero(0.0);
}

void SdpProblem::validate() const {
  if (num_vars < 0) throw std::invalid_argument("negative variable count");
  if (objective.size() != 0 && objective.size() != num_vars)
    throw std::invalid_argument("objective length mismatch");
  if (!var_names.empty() && static_cast<int>(var_names.size()) != num_vars)
    throw std::invalid_argument("variable name list length mismatch");
  for (const auto& b : blocks) {
    if (b.dim < 1) throw std::invalid_argument("block '" + b.tag + "': dim < 1");
    for (const auto& t : b.constant)
      if (t.row < t.col || t.row >= b.dim || t.col < 0)
        throw std::invalid_argument("block '" + b.tag + "': constant triplet out of range");
    int prev = -1;
    for (const auto& bc : b.coeffs) {
      if (bc.var < 0 || bc.var >= num_vars)
        throw std::invalid_argument("block '" + b.tag + "': undeclared variable");
      if (bc.var <= prev)
        throw std::invalid_argument("block '" + b.tag + "': coefficients not ascending by var");
      prev = bc.var;
      for (const auto& t : bc.entries)
        if (t.row < t.col || t.row >= b.dim || t.col < 0)
          throw std::invalid_argument("block '" + b.tag + "': coefficient triplet out of range");
    }
  }
}

std::vector<EigReport> verify(const SdpProblem& p, const SdpSolution& s,
                              const std::vector<ConstraintBlock>* finer) {
  if (s.status != SolveStatus::Optimal)
    throw std::logic_error("verify requires an optimal solution");
  std::vector<EigReport> out;
  out.reserve(p.blocks.size() + (finer ? finer->size() : 0));
  for (const auto& b : p.blocks)
    out.push_back({b.tag, b.min_eigenvalue(s.assignment), false});
  if (finer)
    for (const auto& b : *finer)
      out.push_back({b.tag + " [off-grid check]", b.min_eigenvalue(s.assignment), true});
  std::stable_sort(out.begin(), out.end(),
                   [](const EigReport& a, const EigReport& b) { return a.min_eig < b.min_eig; });
  return out;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

// --- interchange format ------------------------------------------------------

namespace {

void put(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

std::string serialize_problem(const SdpProblem& p) {
  std::string out;
  out.reserve(256 + p.blocks.size() * 64);
  out += "sdp 1\n";
  out += "vars " + std::to_string(p.num_vars) + "\n";
  if (p.objective.size() == p.num_vars)
    for (int i = 0; i < p.num_vars; ++i)
      if (p.objective[i] != 0.0) {
        out += "objective " + std::to_string(i) + " ";
        put(out, p.objective[i]);
        out += "\n";
      }
  if (static_cast<int>(p.var_names.size()) == p.num_vars)
    for (int i = 0; i < p.num_vars; ++i)
      if (!p.var_names[i].empty())
        out += "varname " + std::to_string(i) + " " + p.var_names[i] + "\n";
  for (const auto& b : p.blocks) {
    out += "block " + std::to_string(b.dim) + " " + b.tag + "\n";
    for (const auto& t : b.constant) {
      out += "const " + std::to_string(t.row) + " " + std::to_string(t.col) + " ";
      put(out, t.value);
      out += "\n";
    }
    for (const auto& bc : b.coeffs)
      for (const auto& t : bc.entries) {
        out += "coef " + std::to_string(bc.var) + " " + std::to_string(t.row) + " " +
               std::to_string(t.col) + " ";
        put(out, t.value);
        out += "\n";
      }
    out += "end\n";
  }
  return out;
}

SdpProblem parse_problem(const std::string& text) {
  SdpProblem p;
  std::istringstream in(text);
  std::string line;
  ConstraintBlock* open = nullptr;
  bool header_seen = false;
  int lineno = 0;
  auto fail = [&](const std::string& why) {
    throw std::runtime_error("sdp parse error at line " + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw)) continue;
    if (kw == "sdp") {
      int version = 0;
      if (!(ls >> version) || version != 1) fail("unsupported version");
      header_seen = true;
    } else if (!header_seen) {
      fail("missing header");
    } else if (kw == "vars") {
      if (!(ls >> p.num_vars) || p.num_vars < 0) fail("bad vars");
      p.objective = Vector::Zero(p.num_vars);
      p.var_names.assign(static_cast<size_t>(p.num_vars), "");
    } else if (kw == "objective") {
      int i;
      double v;
      if (!(ls >> i >> v) || i < 0 || i >= p.num_vars) fail("bad objective entry");
      p.objective[i] = v;
    } else if (kw == "varname") {
      int i;
      std::string name;
      if (!(ls >> i >> name) || i < 0 || i >= p.num_vars) fail("bad varname");
      p.var_names[static_cast<size_t>(i)] = name;
    } else if (kw == "block") {
      if (open) fail("nested block");
      ConstraintBlock b;
      if (!(ls >> b.dim)) fail("bad block dim");
      std::string rest;
      std::getline(ls, rest);
      const auto pos = rest.find_first_not_of(' ');
      b.tag = pos == std::string::npos ? "" : rest.substr(pos);
      p.blocks.push_back(std::move(b));
      open = &p.blocks.back();
    } else if (kw == "const") {
      if (!open) fail("const outside block");
      Triplet t;
      if (!(ls >> t.row >> t.col >> t.value)) fail("bad const triplet");
      open->constant.push_back(t);
    } else if (kw == "coef") {
      if (!open) fail("coef outside block");
      int var;
      Triplet t;
      if (!(ls >> var >> t.row >> t.col >> t.value)) fail("bad coef triplet");
      if (open->coeffs.empty() || open->coeffs.back().var != var) {
        if (!open->coeffs.empty() && open->coeffs.back().var > var)
          fail("coef variables out of order");
        open->coeffs.push_back({var, {}});
      }
      open->coeffs.back().entries.push_back(t);
    } else if (kw == "end") {
      if (!open) fail("end outside block");
      open = nullptr;
    } else {
      fail("unknown keyword '" + kw + "'");
    }
  }
  if (open) fail("unterminated block");
  if (!header_seen) fail("empty input");
  p.validate();
  return p;
}

void save_problem(const SdpProblem& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write sdp file: " + path);
  out << serialize_problem(p);
}

SdpProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sdp file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str());
}

}  // namespace dwell
