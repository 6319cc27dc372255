// Acceptance checks. Each criterion prints one PASS/FAIL line with the
// numbers it was judged on; the exit status is non-zero if any selected
// criterion fails.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "meanfield/experiments.hpp"
#include "meanfield/field_eval.hpp"
#include "meanfield/systemic_risk.hpp"
#include "meanfield/value_synthesis.hpp"
#include "meanfield_cli/app.hpp"
#include "support.hpp"

namespace {

using namespace meanfield;
namespace fs = std::filesystem;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct LqSolve {
  LqModel model;
  VCoefficients v;
  MCoefficients m;
  UCoefficients u;
};

LqSolve solve_fixture(int steps, LqModel model = testing::lq_fixture()) {
  VCoefficients v = solve_V(model, TimeGrid(model.horizon, steps));
  MCoefficients m = solve_M(model, v);
  UCoefficients u = assemble_U(v, m);
  return {std::move(model), std::move(v), std::move(m), std::move(u)};
}

double z_identity_frobenius(const VCoefficients& v) {
  const int n = v.dim();
  double worst = 0.0;
  for (int k = 0; k < v.grid().size(); ++k) {
    const Matrix H = unflatten(v.H.at(k), n, n);
    const Matrix sum = unflatten(v.P.at(k), n, n) + unflatten(v.Lambda.at(k), n, n) + H + H.transpose();
    worst = std::max(worst, (sum - unflatten(v.Z.at(k), n, n)).norm());
  }
  return worst;
}

Verdict criterion1() {
  const LqSolve a = solve_fixture(2000);
  const LqSolve b = solve_fixture(4000);
  const double z = z_identity_frobenius(a.v);
  const double r2000 = check_identities(a.v, a.m, a.u, a.model).max_ode_residual();
  const double r4000 = check_identities(b.v, b.m, b.u, b.model).max_ode_residual();
  const double shrink = r2000 / r4000;
  return {z <= 1e-6 && shrink >= 3.0,
          fmt("max |P+L+H+H'-Z|_F = %.3e (<= 1e-6); ODE residual %.3e -> %.3e on doubling, shrink %.2fx (>= 3)", z,
              r2000, r4000, shrink)};
}

Verdict criterion2() {
  const LqSolve a = solve_fixture(2000);
  const double d = check_identities(a.v, a.m, a.u, a.model).max_terminal_defect();
  return {d <= 1e-12, fmt("max terminal defect over V, M, U = %.3e (<= 1e-12)", d)};
}

Verdict criterion3() {
  const double c = 0.5;
  bool ok = true;
  std::string detail;
  for (int steps : {50, 200, 2000}) {
    const LqSolve s = solve_fixture(steps, testing::scalar_tanh_model(c));
    double err = 0.0;
    for (int k = 0; k < s.v.grid().size(); ++k)
      err = std::max(err, std::abs(s.v.P.values()(0, k) - testing::tanh_oracle(s.v.grid().time(k), c)));
    const double bound = 10.0 * std::pow(1.0 / steps, 4);
    ok = ok && err <= bound;
    detail += fmt("%sh=1/%d err %.2e (bound %.2e)", detail.empty() ? "" : "; ", steps, err, bound);
  }
  return {ok, detail};
}

class PointGen {
 public:
  explicit PointGen(unsigned seed) : gen_(seed) {}
  double time() { return std::uniform_real_distribution<>(0.0, 1.0)(gen_); }
  Vector state() {
    Vector x(2);
    x << 1.5 * nd_(gen_), 1.5 * nd_(gen_);
    return x;
  }
  EmpiricalMeasure measure() {
    const int k = std::uniform_int_distribution<>(1, 10)(gen_);
    Matrix p(k, 2);
    for (int j = 0; j < k; ++j) p.row(j) = state().transpose();
    return EmpiricalMeasure(p);
  }
  double control() { return std::uniform_real_distribution<>(-10.0, 10.0)(gen_); }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<> nd_;
};

Verdict criterion4() {
  const LqSolve s = solve_fixture(2000);
  PointGen g(20241015);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double t = g.time();
    const Vector x = g.state();
    const EmpiricalMeasure mu = g.measure();
    double corr = 0.0;
    for (int j = 0; j < mu.size(); ++j) {
      const Vector y = mu.particle(j);
      corr += eval_delta_mu_V(s.v, t, y, mu, x) - eval_delta_mu_V(s.v, t, y, mu, y);
    }
    const double rhs = eval_V(s.v, t, x, mu) + eval_M(s.m, t, mu) + corr / mu.size();
    const double lhs = eval_U(s.u, t, x, mu);
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
  }
  return {worst <= 1e-10, fmt("max relative |U - (V + M + <mu, dV(y;x) - dV(y;y)>)| over 1000 points = %.3e", worst)};
}

Verdict criterion5() {
  const LqSolve s = solve_fixture(2000);
  PointGen g(777);
  double worst_gap = 1e300, worst_grad = 0.0;
  for (int p = 0; p < 20; ++p) {
    const double t = g.time();
    const Vector x = g.state();
    const EmpiricalMeasure mu = g.measure();
    const Vector phi = eval_phi(s.v, s.model, t, x, mu);
    const double at_phi = eval_Phi(s.v, s.model, t, x, phi, mu);
    for (int i = 0; i < 100; ++i) {
      const Vector u = Vector::Constant(1, g.control());
      worst_gap = std::min(worst_gap, eval_Phi(s.v, s.model, t, x, u, mu) - at_phi);
    }
    const double h = 1e-4;
    const Vector e = Vector::Constant(1, h);
    const double grad = (eval_Phi(s.v, s.model, t, x, phi + e, mu) - eval_Phi(s.v, s.model, t, x, phi - e, mu)) / (2 * h);
    worst_grad = std::max(worst_grad, std::abs(grad) / (1.0 + phi.norm()));
  }
  return {worst_gap >= -1e-9 && worst_grad <= 1e-6,
          fmt("min Phi(u) - Phi(phi) = %.3e (>= -1e-9); max |dPhi/du| / (1+|phi|) = %.3e (<= 1e-6)", worst_gap,
              worst_grad)};
}

Verdict criterion6() {
  const sr::SrMasterSolution ms = sr::solve_master(sr::SrParams{}, TimeGrid(1.0, 2000));
  double sum = 0.0, pd = 0.0, forms = 0.0;
  std::mt19937_64 gen(6);
  std::normal_distribution<> nd;
  for (int k = 0; k < ms.grid().size(); ++k) {
    const double P = ms.P.values()(0, k);
    sum = std::max(sum, std::abs(ms.Lambda.values()(0, k) + 2 * ms.H.values()(0, k) + P));
    pd = std::max(pd, std::abs(P - ms.Pd.values()(0, k)));
    const double t = ms.grid().time(k), x = 2 * nd(gen), xb = 2 * nd(gen);
    forms = std::max(forms, std::abs(sr::control_limit(ms, t, x, xb) - sr::control_master(ms, t, x, xb)));
  }
  return {sum <= 1e-8 && pd <= 1e-10 && forms <= 1e-8,
          fmt("max |L+2H+P| = %.2e; max |P-Pd| = %.2e; control forms differ by %.2e", sum, pd, forms)};
}

Verdict criterion7() {
  const auto rep = sr::convergence_report(sr::SrParams{}, {4, 8, 16, 32, 64, 128, 256}, TimeGrid(1.0, 2000));
  const double s1 = rep.fit_e1.slope, s2 = rep.fit_e2.slope;
  const bool ok = !rep.degenerate && s1 >= -1.2 && s1 <= -0.8 && s2 >= -1.2 && s2 <= -0.8;
  return {ok, fmt("slope e1 = %.4f, slope e2 = %.4f (both in [-1.2, -0.8])", s1, s2)};
}

Verdict criterion8() {
  LqModel model = testing::lq_fixture();
  model.D.setZero();
  model.D0.setZero();
  const LqSolve s = solve_fixture(2000, model);
  SimConfig cfg;
  cfg.paths = 1;
  cfg.threads = 1;
  Vector x0(2);
  x0 << 1.0, -0.5;
  cfg.initial = InitialDistribution::point_mass(x0);
  auto discrepancy = [&](int agents, double dt) {
    cfg.agents = agents;
    cfg.dt = dt;
    return std::abs(run_benchmark_consistency(s.model, s.v, s.u, cfg).discrepancy);
  };
  const double coarse = discrepancy(16, 0.02), quartered = discrepancy(16, 0.005);
  const double fine_n = discrepancy(16, 0.0005), fine_2n = discrepancy(32, 0.0005);
  const double dt_drop = coarse / quartered, n_drop = fine_n / fine_2n;
  return {dt_drop >= 3.0 && n_drop >= 1.5,
          fmt("N=16: dt 0.02 -> 0.005 discrepancy %.3e -> %.3e (drop %.2fx, need >= 3); dt=5e-4: N 16 -> 32 "
              "discrepancy %.3e -> %.3e (drop %.2fx, need >= 1.5)",
              coarse, quartered, dt_drop, fine_n, fine_2n, n_drop)};
}

SimConfig sr_sim(int agents, int paths, double dt = 0.01) {
  SimConfig cfg;
  cfg.agents = agents;
  cfg.paths = paths;
  cfg.dt = dt;
  cfg.seed = 20241015;
  cfg.threads = 0;
  cfg.initial = InitialDistribution::gaussian(Vector::Zero(1), Matrix::Constant(1, 1, 0.25));
  return cfg;
}

Verdict criterion9() {
  // Euler bias in the paired gap grows with N; a finer step keeps it below the O(1/N^2) term.
  constexpr double kFineDt = 0.0025;
  const TimeGrid grid(1.0, 2000);
  const std::vector<int> Ns{8, 16, 32, 64};
  bool ok = true;
  std::string detail = "noisy eps*N:";
  std::vector<double> scaled;
  for (int n : Ns) {
    const GapMeasurement g = sr_joint_gap(sr::SrParams{}, grid, sr_sim(n, 4000, kFineDt));
    ok = ok && g.eps_hat >= -3.0 * g.std_error;
    scaled.push_back(g.eps_hat * n);
    detail += fmt(" %d:%.3e(se %.1e)", n, g.eps_hat * n, g.std_error * n);
  }
  const TrendTest trend = kendall_trend(scaled);
  ok = ok && trend.p_increasing > 0.05;
  detail += fmt("; Kendall tau %.2f p %.3f (> 0.05)", trend.tau, trend.p_increasing);

  sr::SrParams quiet;
  quiet.sigma = 0.0;
  double lo = 1e300, hi = 0.0;
  detail += "; sigma=0 eps*N:";
  for (int n : Ns) {
    const GapMeasurement g = sr_joint_gap(quiet, grid, sr_sim(n, 1000, kFineDt));
    lo = std::min(lo, g.eps_hat * n);
    hi = std::max(hi, g.eps_hat * n);
    detail += fmt(" %.3e", g.eps_hat * n);
  }
  ok = ok && lo > 0.0 && hi / lo <= 4.0;
  detail += fmt(" max/min %.2f (<= 4)", hi / lo);
  return {ok, detail};
}

Verdict criterion10() {
  const TimeGrid grid(1.0, 2000);
  const SimConfig cfg = sr_sim(64, 4000);
  const GapMeasurement eps = sr_joint_gap(sr::SrParams{}, grid, cfg);
  const GapReport rep = sr_run_gap(sr::SrParams{}, grid, cfg, default_menu(1), false);
  bool ok = true;
  std::string detail = fmt("eps_64 = %.3e;", eps.eps_hat);
  for (const GapEntry& g : rep.gaps) {
    ok = ok && g.mean >= -(eps.eps_hat + 3.0 * g.std_error);
    detail += fmt(" %s %.3e(se %.1e)", g.deviation.c_str(), g.mean, g.std_error);
  }
  return {ok, detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict criterion11() {
  const fs::path root = fs::temp_directory_path() / "meanfield_acceptance_replay";
  fs::remove_all(root);
  std::ostringstream sink;
  bool ok = true;
  int compared = 0;
  struct Run {
    std::string name;
    std::vector<std::string> args;
  };
  const std::vector<Run> runs{
      {"sr-pbp", {"pbp", "-c", testing::fixture_path("sr.json"), "--simulation.paths=500"}},
      {"sr-scaling", {"scaling", "-c", testing::fixture_path("sr.json"), "--simulation.paths=300"}},
      {"lq-pbp", {"pbp", "-c", testing::fixture_path("lq2.json"), "--simulation.paths=300"}},
  };
  for (const Run& run : runs) {
    const fs::path first = root / run.name / "threads1", second = root / run.name / "threads4";
    ::setenv("MEANFIELD_THREADS", "1", 1);
    std::vector<std::string> args = run.args;
    args.insert(args.end(), {"-o", first.string()});
    ok = ok && cli::run(args, sink, sink) == 0;
    ::setenv("MEANFIELD_THREADS", "4", 1);
    ok = ok && cli::run({"replay", (first / "manifest.json").string(), "-o", second.string()}, sink, sink) == 0;
    ::unsetenv("MEANFIELD_THREADS");
    for (const auto& entry : fs::directory_iterator(first)) {
      const std::string name = entry.path().filename().string();
      if (name == "manifest.json") continue;
      ++compared;
      ok = ok && slurp(entry.path()) == slurp(second / name);
    }
  }
  fs::remove_all(root);
  return {ok && compared >= 4, fmt("%d report files re-run from manifests at MEANFIELD_THREADS=1 and 4; byte-identical: %s",
                                   compared, ok ? "yes" : "no")};
}

const std::map<int, std::pair<const char*, std::function<Verdict()>>>& registry() {
  static const std::map<int, std::pair<const char*, std::function<Verdict()>>> r{
      {1, {"Z-identity", criterion1}},
      {2, {"terminal conditions", criterion2}},
      {3, {"scalar Riccati oracle", criterion3}},
      {4, {"representation of U", criterion4}},
      {5, {"minimizer property", criterion5}},
      {6, {"systemic-risk identities", criterion6}},
      {7, {"finite-N convergence", criterion7}},
      {8, {"benchmark consistency", criterion8}},
      {9, {"PbP gap scaling", criterion9}},
      {10, {"default menu vs gap", criterion10}},
      {11, {"determinism", criterion11}},
  };
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks for the meanfield library"};
  std::vector<int> selected;
  app.add_option("-k,--criterion", selected, "Run only these criteria (default: all)")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);
  if (selected.empty())
    for (const auto& [k, _] : registry()) selected.push_back(k);

  int failures = 0;
  for (int k : selected) {
    const auto& [name, fn] = registry().at(k);
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %2d %s: %s\n", v.pass ? "PASS" : "FAIL", k, name, v.detail.c_str());
    std::fflush(stdout);
    if (!v.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
