#pragma once

#include <nlohmann/json.hpp>

#include "lpvcert/matcore.hpp"

namespace lpvcert {

inline nlohmann::json mat_to_json(const Matrix& m) {
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data;
  data.reserve(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(i, c));
  j["data"] = data;
  return j;
}

inline Matrix mat_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw std::invalid_argument("matrix data length does not match rows*cols");
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = data[i * cols + c];
  return m;
}

inline nlohmann::json vec_to_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline Vector vec_from_json(const nlohmann::json& j) {
  const auto data = j.get<std::vector<double>>();
  Vector v(static_cast<Eigen::Index>(data.size()));
  for (size_t i = 0; i < data.size(); ++i) v(static_cast<Eigen::Index>(i)) = data[i];
  return v;
}

}  // namespace lpvcert
