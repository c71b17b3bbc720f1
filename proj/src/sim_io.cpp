#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "conecraft/sim.hpp"

namespace conecraft {

namespace {

using ojson = nlohmann::ordered_json;

ojson matrix_to_json(const Mat& m) {
  ojson rows = ojson::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      rows.push_back(ojson::array({m(r, c).real(), m(r, c).imag()}));
  return rows;
}

Mat matrix_from_json(const nlohmann::json& entries, std::uint64_t dim, const char* what) {
  if (!entries.is_array() || entries.size() != dim * dim)
    fail(ErrorKind::validation,
         std::string(what) + ": matrix must hold " + std::to_string(dim * dim) + " [re, im] entries");
  Mat m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c, ++i) {
      const auto& e = entries[i];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        fail(ErrorKind::validation, std::string(what) + ": matrix entries must be [re, im] pairs");
      m(r, c) = cx(e[0].get<double>(), e[1].get<double>());
    }
  return m;
}

}  // namespace

std::string serialize_observable(const HeisenbergOperator& obs) {
  ojson j;
  j["support"] = obs.support;
  j["matrix"] = matrix_to_json(obs.matrix);
  return j.dump(2) + "\n";
}

HeisenbergOperator parse_observable(const std::string& text, int iteration) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::validation, std::string("observable file: ") + e.what());
  }
  if (!j.is_object() || !j.contains("support") || !j.contains("matrix"))
    fail(ErrorKind::validation, "observable file: expected an object with support and matrix");
  if (!j["support"].is_array())
    fail(ErrorKind::validation, "observable file: support must be an array of qubit ids");
  std::vector<QubitId> support;
  for (const auto& e : j["support"]) {
    if (!e.is_number_integer())
      fail(ErrorKind::validation, "observable file: support must be an array of qubit ids");
    support.push_back(e.get<QubitId>());
  }
  if (!std::is_sorted(support.begin(), support.end()) ||
      std::adjacent_find(support.begin(), support.end()) != support.end())
    fail(ErrorKind::validation, "observable file: support must be strictly ascending");
  const std::uint64_t dim = std::uint64_t{1} << support.size();
  Mat m = matrix_from_json(j["matrix"], dim, "observable file");
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
    fail(ErrorKind::validation, "observable file: matrix is not Hermitian");
  return HeisenbergOperator{std::move(support), std::move(m), iteration};
}

std::string serialize_state(const DensityState& state) {
  ojson j;
  j["roster"] = state.roster;
  j["matrix"] = matrix_to_json(state.matrix);
  return j.dump(2) + "\n";
}

}  // namespace conecraft
