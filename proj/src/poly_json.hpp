#pragma once

#include "dwell/poly.hpp"

#include <json.hpp>

#include <stdexcept>

// Shared JSON (de)serialization of MatrixPoly term lists for the gain and
// certificate file formats. The exponent vectors here carry the clock power
// as their first entry, unlike plant files.

namespace dwell::detail {

inline nlohmann::json poly_terms_to_json(const MatrixPoly& p) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [exps, coeff] : p.terms()) {
    nlohmann::json row_major = nlohmann::json::array();
    for (int i = 0; i < coeff.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int j = 0; j < coeff.cols(); ++j) row.push_back(coeff(i, j));
      row_major.push_back(row);
    }
    terms.push_back(nlohmann::json{{"exp", exps}, {"coeff", row_major}});
  }
  return terms;
}

inline MatrixPoly poly_terms_from_json(const nlohmann::json& terms, int rows, int cols,
                                       bool symmetric = false) {
  int var_count = 1;
  for (const auto& term : terms)
    var_count = std::max(var_count, static_cast<int>(term.at("exp").size()));
  MatrixPoly p(rows, cols, var_count, symmetric);
  for (const auto& term : terms) {
    const auto& e = term.at("exp");
    if (static_cast<int>(e.size()) != var_count)
      throw std::invalid_argument("polynomial term exponent arity mismatch");
    Exponents exps(e.size());
    for (size_t i = 0; i < e.size(); ++i) exps[i] = e[i].get<int>();
    const auto& c = term.at("coeff");
    Matrix coeff(rows, cols);
    if (static_cast<int>(c.size()) != rows)
      throw std::invalid_argument("polynomial coefficient row count mismatch");
    for (int i = 0; i < rows; ++i) {
      if (static_cast<int>(c[i].size()) != cols)
        throw std::invalid_argument("polynomial coefficient column count mismatch");
      for (int j = 0; j < cols; ++j) coeff(i, j) = c[i][j].get<double>();
    }
    p.add_term(exps, coeff);
  }
  return p;
}

}  // namespace dwell::detail
