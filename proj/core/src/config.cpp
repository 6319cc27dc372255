#include "meanfield/config.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "meanfield/errors.hpp"

namespace meanfield {

using nlohmann::json;

namespace {

void only_keys(const json& obj, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(section + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError(section + ": unknown key '" + it.key() + "'");
}

double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError(what + ": expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& what) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) throw ConfigError(what + ": expected an integer");
  return j.get<int>();
}

InitialDistribution parse_initial(const json& j, int n) {
  only_keys(j, "simulation.initial", {"kind", "mean", "covariance", "half_widths"});
  const std::string kind = j.value("kind", "point_mass");
  Vector mean = j.contains("mean") ? vector_from_json(j["mean"], "simulation.initial.mean") : Vector::Zero(n);
  InitialDistribution dist;
  if (kind == "point_mass") {
    dist = InitialDistribution::point_mass(mean);
  } else if (kind == "gaussian") {
    if (!j.contains("covariance")) throw ConfigError("simulation.initial: gaussian needs a covariance");
    dist = InitialDistribution::gaussian(mean, matrix_from_json(j["covariance"], "simulation.initial.covariance"));
  } else if (kind == "uniform_box") {
    if (!j.contains("half_widths")) throw ConfigError("simulation.initial: uniform_box needs half_widths");
    dist = InitialDistribution::uniform_box(mean, vector_from_json(j["half_widths"], "simulation.initial.half_widths"));
  } else {
    throw ConfigError("simulation.initial.kind: unknown kind '" + kind + "'");
  }
  if (dist.dim() != n) throw ConfigError("simulation.initial: dimension does not match the model");
  dist.check();
  return dist;
}

LqModel parse_lq(const json& m) {
  only_keys(m, "model", {"kind", "A", "B", "G", "D", "D0", "Q", "R", "Gamma", "eta", "Qf", "Gammaf", "etaf", "T"});
  for (const char* key : {"A", "B", "Q", "R"})
    if (!m.contains(key)) throw ConfigError(std::string("model: missing ") + key);
  LqModel model;
  model.A = matrix_from_json(m["A"], "model.A");
  model.B = matrix_from_json(m["B"], "model.B");
  const Eigen::Index n = model.A.rows();
  auto get = [&](const char* key, Matrix fallback) {
    return m.contains(key) ? matrix_from_json(m[key], std::string("model.") + key) : fallback;
  };
  auto get_vec = [&](const char* key) {
    return m.contains(key) ? vector_from_json(m[key], std::string("model.") + key) : Vector(Vector::Zero(n));
  };
  model.G = get("G", Matrix::Zero(n, n));
  model.D = get("D", Matrix::Zero(n, 1));
  model.D0 = get("D0", Matrix::Zero(n, 1));
  model.Q = matrix_from_json(m["Q"], "model.Q");
  model.R = matrix_from_json(m["R"], "model.R");
  model.Gamma = get("Gamma", Matrix::Zero(n, n));
  model.eta = get_vec("eta");
  model.Qf = get("Qf", Matrix::Zero(n, n));
  model.Gammaf = get("Gammaf", Matrix::Zero(n, n));
  model.etaf = get_vec("etaf");
  model.horizon = m.contains("T") ? number(m["T"], "model.T") : 1.0;
  return model;
}

sr::SrParams parse_sr(const json& m) {
  only_keys(m, "model", {"kind", "sigma", "rho", "q", "eps0", "c", "T"});
  sr::SrParams p;
  if (m.contains("sigma")) p.sigma = number(m["sigma"], "model.sigma");
  if (m.contains("rho")) p.rho = number(m["rho"], "model.rho");
  if (m.contains("q")) p.q = number(m["q"], "model.q");
  if (m.contains("eps0")) p.eps0 = number(m["eps0"], "model.eps0");
  if (m.contains("c")) p.c = number(m["c"], "model.c");
  if (m.contains("T")) p.horizon = number(m["T"], "model.T");
  return p;
}

}  // namespace

Matrix matrix_from_json(const json& j, const std::string& what) {
  if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) throw ConfigError(what + ": expected a non-empty array of rows");
  if (!j[0].is_array()) {
    // A flat array is a column.
    Vector v = vector_from_json(j, what);
    return v;
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ConfigError(what + ": ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = number(row[static_cast<std::size_t>(c)], what);
  }
  return m;
}

Vector vector_from_json(const json& j, const std::string& what) {
  if (j.is_number()) return Vector::Constant(1, j.get<double>());
  if (!j.is_array()) throw ConfigError(what + ": expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], what);
  return v;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

json apply_overrides(json doc, const std::vector<std::string>& overrides) {
  if (doc.is_null()) doc = json::object();
  for (const auto& entry : overrides) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + entry + "': expected key.path=value");
    const std::string path = entry.substr(0, eq);
    const std::string text = entry.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    json* node = &doc;
    std::istringstream parts(path);
    std::string key;
    std::vector<std::string> keys;
    while (std::getline(parts, key, '.')) {
      if (key.empty()) throw ConfigError("override '" + entry + "': empty path component");
      keys.push_back(key);
    }
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
      if (!node->is_object()) throw ConfigError("override '" + entry + "': '" + keys[i] + "' is not a section");
      node = &(*node)[keys[i]];
      if (node->is_null()) *node = json::object();
    }
    if (!node->is_object()) throw ConfigError("override '" + entry + "': parent is not a section");
    (*node)[keys.back()] = value;
  }
  return doc;
}

RunConfig parse_config(const json& doc) {
  only_keys(doc, "config", {"model", "grid", "simulation", "experiment", "output"});
  RunConfig cfg;
  cfg.effective = doc;

  if (doc.contains("model")) {
    const json& m = doc["model"];
    if (!m.is_object()) throw ConfigError("model: expected an object");
    const std::string kind = m.value("kind", "lq");
    if (kind == "lq") {
      cfg.kind = RunConfig::ModelKind::kLq;
      cfg.lq = parse_lq(m);
    } else if (kind == "systemic_risk") {
      cfg.kind = RunConfig::ModelKind::kSystemicRisk;
      cfg.sr = parse_sr(m);
    } else {
      throw ConfigError("model.kind: unknown kind '" + kind + "'");
    }
  }

  if (doc.contains("grid")) {
    only_keys(doc["grid"], "grid", {"steps"});
    if (doc["grid"].contains("steps")) cfg.grid_steps = integer(doc["grid"]["steps"], "grid.steps");
    if (cfg.grid_steps < 1) throw ConfigError("grid.steps: must be positive");
  }

  const int n = cfg.state_dim();
  cfg.simulation.initial = InitialDistribution::point_mass(Vector::Zero(n));
  cfg.simulation.paths = 1000;
  if (doc.contains("simulation")) {
    const json& s = doc["simulation"];
    only_keys(s, "simulation", {"N", "paths", "dt", "seed", "threads", "initial"});
    if (s.contains("N")) cfg.simulation.agents = integer(s["N"], "simulation.N");
    if (s.contains("paths")) cfg.simulation.paths = integer(s["paths"], "simulation.paths");
    if (s.contains("dt")) cfg.simulation.dt = number(s["dt"], "simulation.dt");
    if (s.contains("seed")) {
      if (!s["seed"].is_number_unsigned() && !(s["seed"].is_number_integer() && s["seed"].get<long long>() >= 0))
        throw ConfigError("simulation.seed: expected a non-negative integer");
      cfg.simulation.seed = s["seed"].get<std::uint64_t>();
    }
    if (s.contains("threads")) cfg.simulation.threads = integer(s["threads"], "simulation.threads");
    if (s.contains("initial")) cfg.simulation.initial = parse_initial(s["initial"], n);
  }
  if (cfg.simulation.agents < 2) throw ConfigError("simulation.N: need at least 2 agents");
  if (cfg.simulation.paths < 1) throw ConfigError("simulation.paths: must be positive");
  if (!(cfg.simulation.dt > 0.0)) throw ConfigError("simulation.dt: must be positive");
  if (cfg.simulation.threads < 0) throw ConfigError("simulation.threads: must be non-negative");

  if (doc.contains("experiment")) {
    const json& e = doc["experiment"];
    only_keys(e, "experiment", {"menu", "N_list", "include_exact"});
    if (e.contains("menu")) {
      if (!e["menu"].is_array()) throw ConfigError("experiment.menu: expected an array of strings");
      for (const auto& item : e["menu"]) {
        if (!item.is_string()) throw ConfigError("experiment.menu: expected an array of strings");
        cfg.menu.push_back(item.get<std::string>());
      }
    }
    if (e.contains("N_list")) {
      if (!e["N_list"].is_array()) throw ConfigError("experiment.N_list: expected an array");
      for (const auto& item : e["N_list"]) cfg.agent_counts.push_back(integer(item, "experiment.N_list"));
    }
    if (e.contains("include_exact")) {
      if (!e["include_exact"].is_boolean()) throw ConfigError("experiment.include_exact: expected a boolean");
      cfg.include_exact = e["include_exact"].get<bool>();
    }
  }

  if (doc.contains("output")) {
    if (!doc["output"].is_string()) throw ConfigError("output: expected a directory path");
    cfg.output = doc["output"].get<std::string>();
  }
  return cfg;
}

TimeGrid RunConfig::grid() const { return TimeGrid(horizon(), grid_steps); }

std::vector<Deviation> parse_menu(const std::vector<std::string>& entries, int control_dim, bool* wants_exact) {
  if (wants_exact) *wants_exact = false;
  std::vector<Deviation> menu;
  for (const auto& entry : entries) {
    const auto colon = entry.find(':');
    const std::string head = entry.substr(0, colon);
    auto argument = [&]() {
      if (colon == std::string::npos) throw ConfigError("menu entry '" + entry + "' needs a value");
      std::size_t used = 0;
      double value = 0.0;
      try {
        value = std::stod(entry.substr(colon + 1), &used);
      } catch (const std::exception&) {
        throw ConfigError("menu entry '" + entry + "': bad number");
      }
      if (used != entry.size() - colon - 1 || !std::isfinite(value))
        throw ConfigError("menu entry '" + entry + "': bad number");
      return value;
    };
    if (head == "zero" && colon == std::string::npos) {
      menu.push_back(Deviation::zero_control());
    } else if (head == "scaled") {
      menu.push_back(Deviation::scaled(argument()));
    } else if (head == "constant") {
      menu.push_back(Deviation::constant_control(Vector::Constant(control_dim, argument())));
    } else if (head == "exact" && colon == std::string::npos) {
      if (!wants_exact) throw ConfigError("menu entry 'exact' is only available for the systemic-risk model");
      *wants_exact = true;
    } else {
      throw ConfigError("unknown menu entry '" + entry + "'");
    }
  }
  return menu;
}

}  // namespace meanfield
