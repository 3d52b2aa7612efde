#pragma once

// JSON serialization of operator models.  Complex entries are [re, im]
// pairs; doubles survive the round trip bit-exactly (shortest-round-trip
// number formatting on write, exact binary64 parse on read).

#include <string>

#include "json.hpp"

#include "gex/boundary_op.hpp"
#include "gex/green_model.hpp"

namespace gex {

using Json = nlohmann::json;

inline Json complex_to_json(const Complex& z) { return Json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw std::invalid_argument("complex entry must be a [re, im] pair");
  return Complex(j[0].get<double>(), j[1].get<double>());
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
  if (!j.is_array()) throw std::invalid_argument("matrix must be an array of rows");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  Matrix m;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array()) throw std::invalid_argument("matrix row must be an array");
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      m.resize(rows, cols);
    }
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw std::invalid_argument("matrix rows have inconsistent lengths");
    for (Eigen::Index k = 0; k < cols; ++k)
      m(i, k) = complex_from_json(row[static_cast<std::size_t>(k)]);
  }
  if (rows == 0) throw std::invalid_argument("matrix must be nonempty");
  return m;
}

inline Json model_to_json(const GreenOperatorModel& m) {
  Json j;
  j["dim"] = m.dim();
  j["gram"] = matrix_to_json(m.inner().gram);
  j["D"] = matrix_to_json(m.D);
  j["R"] = matrix_to_json(m.R);
  j["bmetric"] = matrix_to_json(m.bmetric.gram);
  j["nu"] = matrix_to_json(m.nu);
  j["grading"] = matrix_to_json(m.space.grading);
  Json alg = Json::array();
  for (const auto& e : m.algebra.elements) {
    Json el;
    el["name"] = e.name;
    el["matrix"] = matrix_to_json(e.matrix);
    el["ideal"] = e.ideal;
    alg.push_back(std::move(el));
  }
  j["algebra"] = std::move(alg);
  return j;
}

inline GreenOperatorModel model_from_json(const Json& j) {
  for (const char* key : {"dim", "gram", "D", "R", "bmetric", "nu", "grading", "algebra"})
    if (!j.contains(key)) throw std::invalid_argument(std::string("model is missing field ") + key);

  GreenOperatorModel m;
  const Matrix gram = matrix_from_json(j["gram"]);
  const Matrix grading = matrix_from_json(j["grading"]);
  m.space = GradedSpace(InnerProduct(gram), grading);
  m.D = matrix_from_json(j["D"]);
  m.R = matrix_from_json(j["R"]);
  m.bmetric = InnerProduct(matrix_from_json(j["bmetric"]));
  m.nu = matrix_from_json(j["nu"]);

  const Eigen::Index n = m.dim();
  if (j["dim"].get<Eigen::Index>() != n)
    throw std::invalid_argument("declared dim disagrees with the gram matrix");
  if (m.D.rows() != n || m.D.cols() != n) throw std::invalid_argument("D has the wrong shape");
  if (m.R.cols() != n) throw std::invalid_argument("R has the wrong shape");
  if (m.nu.rows() != m.R.rows() || m.nu.cols() != m.R.rows() ||
      m.bmetric.dim() != m.R.rows())
    throw std::invalid_argument("boundary blocks disagree with the trace map");

  // Oddness is a property, not a stored field.
  const Matrix anti = m.D * m.space.grading + m.space.grading * m.D;
  m.oddness = anti.norm() <= kStructTol * std::max(m.D.norm(), 1.0);

  for (const Json& el : j["algebra"]) {
    AlgebraElement e;
    e.name = el.at("name").get<std::string>();
    e.matrix = matrix_from_json(el.at("matrix"));
    e.ideal = el.at("ideal").get<bool>();
    if (e.matrix.rows() != n || e.matrix.cols() != n)
      throw std::invalid_argument("algebra element " + e.name + " has the wrong shape");
    m.algebra.elements.push_back(std::move(e));
  }
  return m;
}

inline Json boundary_to_json(const BoundaryTriple& bt) {
  Json j;
  j["dim"] = bt.space.dim;
  j["gram_n"] = matrix_to_json(bt.space.metric.gram);
  j["Dn"] = matrix_to_json(bt.Dn);
  j["nd"] = matrix_to_json(bt.space.nd);
  Json rep;
  for (const auto& [name, mat] : bt.space.rep) rep[name] = matrix_to_json(mat);
  j["rep"] = std::move(rep);
  return j;
}

inline std::string model_to_string(const GreenOperatorModel& m) { return model_to_json(m).dump(2); }

inline GreenOperatorModel model_from_string(const std::string& text) {
  return model_from_json(Json::parse(text));
}

}  // namespace gex
