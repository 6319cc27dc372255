#pragma once

#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include <nlohmann/json.hpp>

#include "meanfield/config.hpp"
#include "meanfield/lq_model.hpp"

namespace meanfield::testing {

inline std::string fixture_path(const std::string& name) {
  return std::string(MEANFIELD_FIXTURE_DIR) + "/" + name;
}

inline nlohmann::json load_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name));
  return nlohmann::json::parse(in);
}

inline RunConfig fixture_config(const std::string& name) { return parse_config(load_fixture(name)); }

inline LqModel lq_fixture() { return fixture_config("lq2.json").lq; }

// n = n1 = 1, A = G = 0, B = R = Q = 1, Qf = c: P' = P^2 - 1 backward.
inline LqModel scalar_tanh_model(double c, double horizon = 1.0) {
  LqModel m = LqModel::zero(1, 1, 1, 1, horizon);
  m.B(0, 0) = 1.0;
  m.Q(0, 0) = 1.0;
  m.Qf(0, 0) = c;
  return m;
}

inline double tanh_oracle(double t, double c, double horizon = 1.0) {
  return std::tanh((horizon - t) + std::atanh(c));
}

}  // namespace meanfield::testing
