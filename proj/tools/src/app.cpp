#include "meanfield_cli/app.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "meanfield/config.hpp"
#include "meanfield/errors.hpp"
#include "meanfield/experiments.hpp"
#include "meanfield/report.hpp"
#include "meanfield/systemic_risk.hpp"
#include "meanfield/value_synthesis.hpp"

#ifndef MEANFIELD_VERSION
#define MEANFIELD_VERSION "0.0.0"
#endif

namespace meanfield::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kOverrideHelp =
    "Config keys can be overridden with --<section>.<key>=<value> (for example "
    "--simulation.N=64 or --experiment.N_list=[8,16,32]); values are read as JSON "
    "when they parse, otherwise as strings.";

struct Options {
  std::string command;
  std::string config_path;
  std::string output;
  std::vector<std::string> overrides;
  bool convergence = false;
  std::string deviation;
  std::string dump_paths;
};

// Raised for command-level acceptance failures (exit 3).
struct CheckFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json parse_json_text(const std::string& text, const std::string& where) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ConfigError(where + ": not valid JSON");
  return doc;
}

class Session {
 public:
  Session(RunConfig cfg, const Options& opts, std::ostream& out)
      : cfg_(std::move(cfg)), out_(out), dir_(opts.output.empty() ? cfg_.output : opts.output) {
    fs::create_directories(dir_);
    std::ofstream probe(dir_ / ".write-test");
    if (!probe) throw ConfigError("output directory " + dir_.string() + " is not writable");
    probe.close();
    fs::remove(dir_ / ".write-test");
  }

  const RunConfig& config() const { return cfg_; }
  const fs::path& dir() const { return dir_; }
  std::ostream& out() { return out_; }

  void report(const std::string& name, const json& doc) {
    emit_report(doc, dir_ / name);
    outputs_.push_back(name);
  }
  void text(const std::string& name, const std::string& body) {
    write_text_file(dir_ / name, body);
    outputs_.push_back(name);
  }
  template <class Coeffs>
  void csv(const std::string& name, const Coeffs& coeffs) {
    std::ostringstream os;
    write_csv(os, coeffs);
    text(name, os.str());
  }

  void record(const std::string& name) { outputs_.push_back(name); }
  const std::vector<std::string>& outputs() const { return outputs_; }

  void require_sr(const char* command) const {
    if (cfg_.kind != RunConfig::ModelKind::kSystemicRisk)
      throw ConfigError(std::string(command) + " needs a model of kind \"systemic_risk\"");
  }

 private:
  RunConfig cfg_;
  std::ostream& out_;
  fs::path dir_;
  std::vector<std::string> outputs_;
};

struct LqSolution {
  VCoefficients v;
  MCoefficients m;
  UCoefficients u;
};

LqSolution solve_lq(const RunConfig& cfg) {
  require_valid(cfg.lq);
  const TimeGrid grid = cfg.grid();
  VCoefficients v = solve_V(cfg.lq, grid);
  MCoefficients m = solve_M(cfg.lq, v);
  UCoefficients u = assemble_U(v, m);
  return {std::move(v), std::move(m), std::move(u)};
}

// Identities of the systemic-risk master solution, with their tolerances.
json sr_identities(const sr::SrMasterSolution& ms) {
  double sum_defect = 0.0, pd_defect = 0.0, control_defect = 0.0;
  const TimeGrid& grid = ms.grid();
  const double probes[][2] = {{1.0, 0.0}, {-0.5, 0.7}, {2.0, -1.5}, {0.3, 0.3}};
  for (int k = 0; k < grid.size(); ++k) {
    const double P = ms.P.values()(0, k), L = ms.Lambda.values()(0, k), H = ms.H.values()(0, k);
    sum_defect = std::max(sum_defect, std::abs(L + 2.0 * H + P));
    pd_defect = std::max(pd_defect, std::abs(P - ms.Pd.values()(0, k)));
    const double t = grid.time(k);
    for (const auto& p : probes)
      control_defect = std::max(control_defect, std::abs(sr::control_limit(ms, t, p[0], p[1]) -
                                                         sr::control_master(ms, t, p[0], p[1])));
  }
  const bool ok = sum_defect <= 1e-8 && pd_defect <= 1e-10 && control_defect <= 1e-8;
  return json{{"lambda_2h_p", sum_defect},
              {"p_minus_pd", pd_defect},
              {"control_forms", control_defect},
              {"passes", ok}};
}

Deviation parse_single_deviation(const std::string& entry, int control_dim) {
  if (entry.empty() || entry == "none") return Deviation::none();
  auto menu = parse_menu({entry}, control_dim);
  return menu.front();
}

std::vector<Deviation> menu_for(const RunConfig& cfg, bool* wants_exact) {
  if (cfg.menu.empty()) {
    if (wants_exact) *wants_exact = cfg.include_exact;
    return default_menu(cfg.control_dim());
  }
  auto menu = parse_menu(cfg.menu, cfg.control_dim(), wants_exact);
  if (wants_exact) *wants_exact = *wants_exact || cfg.include_exact;
  return menu;
}

// Each command returns an exit status and fills the session outputs.

int cmd_solve(Session& s) {
  const RunConfig& cfg = s.config();
  if (cfg.kind == RunConfig::ModelKind::kLq) {
    const LqSolution sol = solve_lq(cfg);
    s.csv("V.csv", sol.v);
    s.csv("M.csv", sol.m);
    s.csv("U.csv", sol.u);
    const ResidualReport res = check_identities(sol.v, sol.m, sol.u, cfg.lq);
    s.report("solve.json", json{{"experiment", "solve"},
                                {"steps", cfg.grid_steps},
                                {"T", cfg.horizon()},
                                {"residuals", to_json(res)}});
    s.out() << "solved V, M, U on " << cfg.grid_steps << " steps\n";
    return kSuccess;
  }
  cfg.sr.check();
  const TimeGrid grid = cfg.grid();
  const auto direct = sr::solve_direct(cfg.sr, cfg.simulation.agents, grid);
  const auto master = sr::solve_master(cfg.sr, grid);
  s.text("systemic_risk.csv", sr_solution_csv(direct, master));
  s.report("solve.json", json{{"experiment", "solve"},
                              {"N", cfg.simulation.agents},
                              {"steps", cfg.grid_steps},
                              {"T", cfg.horizon()},
                              {"identities", sr_identities(master)}});
  s.out() << "solved systemic-risk coefficients for N=" << cfg.simulation.agents << '\n';
  return kSuccess;
}

int cmd_check(Session& s) {
  const RunConfig& cfg = s.config();
  json doc{{"experiment", "check"}, {"steps", cfg.grid_steps}};
  bool ok = false;
  if (cfg.kind == RunConfig::ModelKind::kLq) {
    const LqSolution sol = solve_lq(cfg);
    const ResidualReport res = check_identities(sol.v, sol.m, sol.u, cfg.lq);
    doc["residuals"] = to_json(res);
    ok = res.passes();
  } else {
    cfg.sr.check();
    const json ids = sr_identities(sr::solve_master(cfg.sr, cfg.grid()));
    doc["identities"] = ids;
    ok = ids["passes"].get<bool>();
  }
  doc["passes"] = ok;
  s.report("check.json", doc);
  if (!ok) throw CheckFailed("residual check failed; see " + (s.dir() / "check.json").string());
  s.out() << "all identities within tolerance\n";
  return kSuccess;
}

int cmd_simulate(Session& s, const Options& opts) {
  const RunConfig& cfg = s.config();
  const Deviation dev = parse_single_deviation(opts.deviation, cfg.control_dim());
  CostReport rep;
  json doc;
  auto run_with = [&](const AgentDynamics& dyn, const FeedbackPolicy& policy) {
    rep = simulate(dyn, policy, cfg.simulation, dev);
    if (!opts.dump_paths.empty()) {
      std::ofstream os(s.dir() / opts.dump_paths, std::ios::binary | std::ios::trunc);
      if (!os) throw std::runtime_error("cannot open " + (s.dir() / opts.dump_paths).string());
      dump_paths(os, dyn, policy, cfg.simulation, dev);
    }
  };
  if (cfg.kind == RunConfig::ModelKind::kLq) {
    const LqSolution sol = solve_lq(cfg);
    run_with(AgentDynamics::from_lq(cfg.lq), CooperativePolicy(cfg.lq, sol.v));
  } else {
    cfg.sr.check();
    const auto master = sr::solve_master(cfg.sr, cfg.grid());
    run_with(sr::dynamics(cfg.sr), sr::LimitPolicy(master));
  }
  doc = to_json(rep);
  doc["experiment"] = "simulate";
  doc["seed"] = cfg.simulation.seed;
  doc["deviation"] = dev.label();
  if (!opts.dump_paths.empty()) s.record(opts.dump_paths);
  s.report("simulate.json", doc);
  if (rep.max_second_moment > kMomentWarningLevel)
    s.out() << "warning: sample second moment reached " << rep.max_second_moment << '\n';
  s.out() << "J_soc = " << rep.mean << " +/- " << rep.std_error << '\n';
  return kSuccess;
}

int cmd_pbp(Session& s) {
  const RunConfig& cfg = s.config();
  GapReport rep;
  if (cfg.kind == RunConfig::ModelKind::kLq) {
    const auto menu = menu_for(cfg, nullptr);
    const LqSolution sol = solve_lq(cfg);
    rep = run_gap(cfg.lq, sol.v, sol.u, cfg.simulation, menu);
  } else {
    cfg.sr.check();
    bool exact = false;
    auto menu = menu_for(cfg, &exact);
    rep = sr_run_gap(cfg.sr, cfg.grid(), cfg.simulation, std::move(menu), exact);
  }
  s.report("pbp.json", to_json(rep));
  s.out() << "eps_hat = " << rep.eps_hat() << " at N=" << rep.agents << '\n';
  return kSuccess;
}

int cmd_scaling(Session& s) {
  const RunConfig& cfg = s.config();
  const std::vector<int> counts = cfg.agent_counts.empty() ? std::vector<int>{8, 16, 32, 64} : cfg.agent_counts;
  ScalingReport rep;
  if (cfg.kind == RunConfig::ModelKind::kLq) {
    const auto menu = menu_for(cfg, nullptr);
    const LqSolution sol = solve_lq(cfg);
    rep = run_scaling(
        [&](int n) {
          SimConfig sc = cfg.simulation;
          sc.agents = n;
          const GapReport g = run_gap(cfg.lq, sol.v, sol.u, sc, menu);
          return GapMeasurement{n, g.eps_hat(), g.min_gap().std_error};
        },
        counts);
  } else {
    cfg.sr.check();
    const TimeGrid grid = cfg.grid();
    rep = run_scaling(
        [&](int n) {
          SimConfig sc = cfg.simulation;
          sc.agents = n;
          return sr_joint_gap(cfg.sr, grid, sc);
        },
        counts);
    rep.experiment = "sr-joint-gap-scaling";
  }
  rep.seed = cfg.simulation.seed;
  rep.paths = cfg.simulation.paths;
  s.report("scaling.json", to_json(rep));
  s.text("scaling.csv", scaling_csv(rep));
  if (rep.insufficient_signal)
    s.out() << "gaps indistinguishable from zero; no slope fitted\n";
  else
    s.out() << "slope = " << rep.fit.slope << " [" << rep.slope_ci_low << ", " << rep.slope_ci_high << "]\n";
  return kSuccess;
}

int cmd_systemic_risk(Session& s, const Options& opts) {
  const RunConfig& cfg = s.config();
  s.require_sr("systemic-risk");
  cfg.sr.check();
  const TimeGrid grid = cfg.grid();
  if (opts.convergence) {
    const std::vector<int> counts =
        cfg.agent_counts.empty() ? std::vector<int>{4, 8, 16, 32, 64, 128, 256} : cfg.agent_counts;
    const auto rep = sr::convergence_report(cfg.sr, counts, grid);
    s.text("convergence.csv", convergence_csv(rep));
    s.report("convergence.json", to_json(rep));
    if (!rep.degenerate)
      s.out() << "slopes: e1 " << rep.fit_e1.slope << ", e2 " << rep.fit_e2.slope << '\n';
    return kSuccess;
  }
  const auto direct = sr::solve_direct(cfg.sr, cfg.simulation.agents, grid);
  const auto master = sr::solve_master(cfg.sr, grid);
  s.text("systemic_risk.csv", sr_solution_csv(direct, master));
  const json ids = sr_identities(master);
  s.report("systemic_risk.json", json{{"experiment", "systemic-risk"},
                                      {"N", cfg.simulation.agents},
                                      {"identities", ids}});
  if (!ids["passes"].get<bool>()) throw CheckFailed("systemic-risk identities out of tolerance");
  return kSuccess;
}

json options_json(const Options& opts) {
  json j = json::object();
  if (opts.convergence) j["convergence"] = true;
  if (!opts.deviation.empty()) j["deviation"] = opts.deviation;
  if (!opts.dump_paths.empty()) j["dump_paths"] = opts.dump_paths;
  return j;
}

int execute(const Options& opts, const json& doc, const std::string& config_bytes, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  Session s(parse_config(doc), opts, out);
  int status = kSuccess;
  std::string failure;
  try {
    if (opts.command == "solve") status = cmd_solve(s);
    else if (opts.command == "check") status = cmd_check(s);
    else if (opts.command == "simulate") status = cmd_simulate(s, opts);
    else if (opts.command == "pbp") status = cmd_pbp(s);
    else if (opts.command == "scaling") status = cmd_scaling(s);
    else if (opts.command == "systemic-risk") status = cmd_systemic_risk(s, opts);
    else throw ConfigError("unknown command '" + opts.command + "'");
  } catch (const CheckFailed& e) {
    status = kCheckFailure;
    failure = e.what();
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::string effective = canonical_json(s.config().effective);
  json manifest{{"command", opts.command},
                {"options", options_json(opts)},
                {"seed", s.config().simulation.seed},
                {"config_hash", hex64(fnv1a64(config_bytes))},
                {"effective_config_hash", hex64(fnv1a64(effective))},
                {"effective_config", s.config().effective},
                {"outputs", s.outputs()},
                {"version", MEANFIELD_VERSION},
                {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                      "." + std::to_string(EIGEN_MINOR_VERSION)},
                {"wall_time_seconds", wall},
                {"exit_status", status}};
  emit_report(manifest, s.dir() / "manifest.json");
  if (status == kCheckFailure) throw CheckFailed(failure);
  return status;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Linear-quadratic mean field social optimization: coefficient solves, particle "
               "simulation and person-by-person experiments.",
               "meanfield"};
  app.require_subcommand(1);
  app.footer(kOverrideHelp);

  Options opts;
  std::string manifest_path;
  auto common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", opts.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("-o,--output", opts.output, "Output directory (overrides the config \"output\" key)");
    sub->add_option("--set", opts.overrides, "Config override key.path=value (repeatable)");
    sub->allow_extras();
    sub->footer(kOverrideHelp);
  };

  auto* solve = app.add_subcommand("solve", "Solve the V, M and U coefficient systems and write them as CSV");
  auto* check = app.add_subcommand("check", "Solve and verify identities, ODE residuals and terminal values (exit 3 on failure)");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo social cost under the cooperative law");
  auto* pbp = app.add_subcommand("pbp", "Person-by-person gap of the deviation menu at one population size");
  auto* scaling = app.add_subcommand("scaling", "PbP gap over experiment.N_list with a log-log slope fit");
  auto* sr = app.add_subcommand("systemic-risk", "Inter-bank model: coefficients, identities, finite-N convergence");
  auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest.json");
  for (auto* sub : {solve, check, simulate, pbp, scaling, sr}) common(sub);
  simulate->add_option("--deviation", opts.deviation,
                       "Agent 1 plays this instead: none, zero, scaled:<k>, constant:<c>");
  simulate->add_option("--dump-paths", opts.dump_paths, "Also write per-step states and controls to this CSV");
  sr->add_flag("--convergence", opts.convergence, "Tabulate sup-norm errors against the limit over N_list");
  replay->add_option("manifest", manifest_path, "manifest.json of an earlier run")->required()->check(CLI::ExistingFile);
  replay->add_option("-o,--output", opts.output, "Output directory for the re-run")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "meanfield: " << e.what() << '\n';
    return kValidationFailure;
  }

  CLI::App* chosen = app.get_subcommands().front();
  opts.command = chosen->get_name();

  try {
    if (chosen == replay) {
      const std::string bytes = read_file(manifest_path);
      const json manifest = parse_json_text(bytes, manifest_path);
      if (!manifest.contains("command") || !manifest.contains("effective_config"))
        throw ConfigError(manifest_path + ": not a manifest");
      opts.command = manifest["command"].get<std::string>();
      const json& o = manifest.value("options", json::object());
      opts.convergence = o.value("convergence", false);
      opts.deviation = o.value("deviation", "");
      opts.dump_paths = o.value("dump_paths", "");
      const json& doc = manifest["effective_config"];
      return execute(opts, doc, canonical_json(doc), out);
    }

    for (const std::string& extra : chosen->remaining()) {
      if (extra.rfind("--", 0) != 0 || extra.find('=') == std::string::npos ||
          extra.substr(0, extra.find('=')).find('.') == std::string::npos)
        throw CLI::ExtrasError({extra});
      opts.overrides.push_back(extra.substr(2));
    }

    std::string bytes = "{}";
    if (!opts.config_path.empty()) bytes = read_file(opts.config_path);
    json doc = apply_overrides(parse_json_text(bytes, opts.config_path.empty() ? "config" : opts.config_path),
                               opts.overrides);
    // The hash covers the file and the overrides, so it changes with either.
    std::string hashed = bytes;
    for (const auto& o : opts.overrides) hashed += "\n" + o;
    return execute(opts, doc, hashed, out);
  } catch (const CLI::ParseError& e) {
    err << "meanfield: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const CheckFailed& e) {
    err << "meanfield: " << e.what() << '\n';
    return kCheckFailure;
  } catch (const BlowUpError& e) {
    err << "meanfield: numerical failure at t=" << e.time() << ": " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const ValidationError& e) {
    err << "meanfield: invalid model: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const ConfigError& e) {
    err << "meanfield: configuration error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const std::exception& e) {
    err << "meanfield: " << e.what() << '\n';
    return kValidationFailure;
  }
}

}  // namespace meanfield::cli
