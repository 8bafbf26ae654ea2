#ifndef CORRME_JSON_IO_HPP
#define CORRME_JSON_IO_HPP

// Complex matrices in JSON are row-major nested arrays of [re, im] pairs.
// Plain numbers are accepted on input as purely real entries.

#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "corrme/operator.hpp"

namespace corrme {

using Json = nlohmann::json;

inline Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw std::invalid_argument("expected a number or [re, im] pair, got " + j.dump());
}

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw std::invalid_argument("expected a nested matrix array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[r].size()) != cols)
      throw std::invalid_argument("ragged matrix in JSON");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = complex_from_json(j[r][c]);
  }
  return m;
}

inline Json operator_to_json(const Operator& x) {
  return Json{{"dims", x.dims()}, {"matrix", matrix_to_json(x.matrix())}};
}

/// Accepts {"dims": [...], "matrix": [...]} or a bare matrix (single factor).
inline Operator operator_from_json(const Json& j) {
  if (j.is_object()) {
    Matrix m = matrix_from_json(j.at("matrix"));
    if (j.contains("dims")) return {j.at("dims").get<Dims>(), std::move(m)};
    return Operator(std::move(m));
  }
  return Operator(matrix_from_json(j));
}

}  // namespace corrme

#endif  // CORRME_JSON_IO_HPP
