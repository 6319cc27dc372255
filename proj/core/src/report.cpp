#include "meanfield/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace meanfield {

namespace {

std::string number(double x) {
  if (!std::isfinite(x)) throw std::domain_error("canonical_json: non-finite number");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s(buf);
  // Keep a float marker so the value parses back as a floating-point number.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void write(std::ostringstream& os, const Json& j, int depth) {
  const std::string pad(2 * (depth + 1), ' ');
  const std::string close(2 * depth, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // std::map: sorted keys
        if (!first) os << ",\n";
        first = false;
        os << pad << Json(it.key()).dump() << ": ";
        write(os, it.value(), depth + 1);
      }
      os << '\n' << close << '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",\n";
        os << pad;
        write(os, j[i], depth + 1);
      }
      os << '\n' << close << ']';
      return;
    }
    case Json::value_t::number_float:
      os << number(j.get<double>());
      return;
    default:
      os << j.dump();
      return;
  }
}

Json vector_json(const Vector& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string canonical_json(const Json& doc) {
  std::ostringstream os;
  write(os, doc, 0);
  return os.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void emit_report(const Json& doc, const std::filesystem::path& path) {
  write_text_file(path, canonical_json(doc) + "\n");
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

Json to_json(const ResidualReport& r) {
  return Json{{"z_identity", r.z_identity},
              {"ode_residuals", r.ode_residuals},
              {"symmetry_defects", r.symmetry_defects},
              {"terminal_defects", r.terminal_defects},
              {"u_identity", r.u_identity},
              {"max_ode_residual", r.max_ode_residual()},
              {"max_terminal_defect", r.max_terminal_defect()},
              {"passes", r.passes()}};
}

Json to_json(const CostReport& r, bool include_paths) {
  Json j{{"N", r.agents},
         {"paths", r.paths},
         {"steps", r.steps},
         {"mean", r.mean},
         {"stderr", r.std_error},
         {"agent_mean_costs", vector_json(r.agent_mean_costs)},
         {"max_second_moment", r.max_second_moment},
         {"moment_warning", r.max_second_moment > kMomentWarningLevel}};
  if (include_paths) j["path_costs"] = r.path_costs;
  return j;
}

Json to_json(const PairedReport& r) {
  return Json{{"baseline", to_json(r.baseline)},
              {"deviated", to_json(r.deviated)},
              {"mean_difference", r.mean_difference},
              {"stderr", r.std_error}};
}

Json to_json(const GapReport& r) {
  Json gaps = Json::array();
  for (const auto& g : r.gaps) gaps.push_back({{"deviation", g.deviation}, {"mean", g.mean}, {"stderr", g.std_error}});
  return Json{{"experiment", r.experiment},
              {"seed", r.seed},
              {"N", r.agents},
              {"paths", r.paths},
              {"baseline_mean", r.baseline_mean},
              {"baseline_stderr", r.baseline_std_error},
              {"gaps", gaps},
              {"eps_hat", r.eps_hat()},
              {"min_gap", r.min_gap().mean}};
}

Json to_json(const ScalingReport& r) {
  Json Ns = Json::array(), gaps = Json::array();
  for (const auto& p : r.points) {
    Ns.push_back(p.agents);
    gaps.push_back({{"N", p.agents}, {"eps_hat", p.eps_hat}, {"stderr", p.std_error}});
  }
  Json j{{"experiment", r.experiment},
         {"seed", r.seed},
         {"N", Ns},
         {"paths", r.paths},
         {"gaps", gaps},
         {"insufficient_signal", r.insufficient_signal}};
  if (r.insufficient_signal) {
    j["slope"] = nullptr;
    j["slope_ci"] = nullptr;
  } else {
    j["slope"] = r.fit.slope;
    j["slope_ci"] = Json::array({r.slope_ci_low, r.slope_ci_high});
    j["intercept"] = r.fit.intercept;
  }
  return j;
}

Json to_json(const ConsistencyReport& r) {
  return Json{{"N", r.agents},
              {"paths", r.paths},
              {"mc_mean", r.mc_mean},
              {"mc_stderr", r.mc_std_error},
              {"benchmark_mean", r.benchmark_mean},
              {"benchmark_stderr", r.benchmark_std_error},
              {"discrepancy", r.discrepancy},
              {"discrepancy_stderr", r.discrepancy_std_error},
              {"discrepancy_times_N", r.scaled_discrepancy}};
}

Json to_json(const sr::ConvergenceReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) rows.push_back({{"N", row.agents}, {"e1", row.e1}, {"e2", row.e2}});
  Json j{{"experiment", "systemic-risk-convergence"}, {"rows", rows}, {"degenerate", r.degenerate}};
  if (!r.degenerate) {
    j["slope_e1"] = r.fit_e1.slope;
    j["slope_e2"] = r.fit_e2.slope;
    j["slope_e1_ci"] = Json::array({r.fit_e1.slope - 1.96 * r.fit_e1.slope_se, r.fit_e1.slope + 1.96 * r.fit_e1.slope_se});
    j["slope_e2_ci"] = Json::array({r.fit_e2.slope - 1.96 * r.fit_e2.slope_se, r.fit_e2.slope + 1.96 * r.fit_e2.slope_se});
  }
  return j;
}

std::string scaling_csv(const ScalingReport& r) {
  std::ostringstream os;
  os << "N,eps_hat,stderr\n";
  for (const auto& p : r.points) os << p.agents << ',' << fmt(p.eps_hat) << ',' << fmt(p.std_error) << '\n';
  return os.str();
}

std::string convergence_csv(const sr::ConvergenceReport& r) {
  std::ostringstream os;
  os << "N,e1,e2\n";
  for (const auto& row : r.rows) os << row.agents << ',' << fmt(row.e1) << ',' << fmt(row.e2) << '\n';
  return os.str();
}

std::string sr_solution_csv(const sr::SrDirectSolution& direct, const sr::SrMasterSolution& master) {
  if (!(direct.grid() == master.grid())) throw std::invalid_argument("sr_solution_csv: grids differ");
  std::ostringstream os;
  os << "t,pi1,pi2,Pd,P,Lambda,H,r\n";
  const TimeGrid& grid = direct.grid();
  for (int k = 0; k < grid.size(); ++k) {
    os << fmt(grid.time(k)) << ',' << fmt(direct.pi.values()(0, k)) << ',' << fmt(direct.pi.values()(1, k))
       << ',' << fmt(master.Pd.values()(0, k)) << ',' << fmt(master.P.values()(0, k)) << ','
       << fmt(master.Lambda.values()(0, k)) << ',' << fmt(master.H.values()(0, k)) << ','
       << fmt(master.r.values()(0, k)) << '\n';
  }
  return os.str();
}

}  // namespace meanfield
