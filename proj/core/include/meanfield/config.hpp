#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "meanfield/lq_model.hpp"
#include "meanfield/simulator.hpp"
#include "meanfield/systemic_risk.hpp"

namespace meanfield {

/// Parsed run configuration. Every section is optional except that LQ
/// commands need a "model" of kind "lq"; a missing model means the
/// systemic-risk model with default parameters.
struct RunConfig {
  enum class ModelKind { kLq, kSystemicRisk };

  ModelKind kind = ModelKind::kSystemicRisk;
  LqModel lq;
  sr::SrParams sr;
  int grid_steps = 2000;
  SimConfig simulation;
  std::vector<std::string> menu;  // empty: default menu
  bool include_exact = false;     // systemic risk: also try the exact finite-N law
  std::vector<int> agent_counts;  // empty: command default
  std::string output = "out";

  /// The document after overrides, as parsed (kept for manifests).
  nlohmann::json effective;

  TimeGrid grid() const;
  double horizon() const { return kind == ModelKind::kLq ? lq.horizon : sr.horizon; }
  int state_dim() const { return kind == ModelKind::kLq ? lq.state_dim() : 1; }
  int control_dim() const { return kind == ModelKind::kLq ? lq.control_dim() : 1; }
};

/// Applies "a.b.c=value" assignments. The value is read as JSON when it
/// parses, otherwise as a string. Throws ConfigError on malformed entries.
nlohmann::json apply_overrides(nlohmann::json doc, const std::vector<std::string>& overrides);

/// Strict: unknown keys and wrong shapes are ConfigErrors. Model structure
/// (symmetry, definiteness) is not checked here; see validate().
RunConfig parse_config(const nlohmann::json& doc);

/// Menu entries: "zero", "scaled:<k>", "constant:<c>" (c on every control
/// coordinate) and, for systemic risk only, "exact".
std::vector<Deviation> parse_menu(const std::vector<std::string>& entries, int control_dim,
                                  bool* wants_exact = nullptr);

Matrix matrix_from_json(const nlohmann::json& j, const std::string& what);
Vector vector_from_json(const nlohmann::json& j, const std::string& what);
nlohmann::json matrix_to_json(const Matrix& m);
nlohmann::json vector_to_json(const Vector& v);

}  // namespace meanfield
