#include "meanfield/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "meanfield/errors.hpp"

namespace meanfield {

const GapEntry& GapReport::min_gap() const {
  if (gaps.empty()) throw std::logic_error("gap report is empty");
  return *std::min_element(gaps.begin(), gaps.end(),
                           [](const GapEntry& a, const GapEntry& b) { return a.mean < b.mean; });
}

double GapReport::eps_hat() const { return std::max(0.0, -min_gap().mean); }

std::vector<Deviation> default_menu(int control_dim) {
  return {Deviation::zero_control(), Deviation::scaled(0.5), Deviation::scaled(1.5),
          Deviation::constant_control(Vector::Constant(control_dim, 0.1))};
}

GapReport run_gap(const AgentDynamics& dyn, const FeedbackPolicy& phi, const SimConfig& cfg,
                  const std::vector<Deviation>& menu) {
  if (menu.empty()) throw ConfigError("run_gap: deviation menu is empty");
  GapReport rep;
  rep.seed = cfg.seed;
  rep.agents = cfg.agents;
  rep.paths = cfg.paths;
  const CostReport baseline = simulate(dyn, phi, cfg, Deviation::none());
  rep.baseline_mean = baseline.mean;
  rep.baseline_std_error = baseline.std_error;
  for (const Deviation& dev : menu) {
    const CostReport deviated = simulate(dyn, phi, cfg, dev);
    std::vector<double> diff(cfg.paths);
    for (int p = 0; p < cfg.paths; ++p) diff[p] = deviated.path_costs[p] - baseline.path_costs[p];
    const MeanEstimate est = mean_and_stderr(diff);
    rep.gaps.push_back({dev.label(), est.mean, est.std_error});
  }
  return rep;
}

GapReport run_gap(const LqModel& model, const VCoefficients& v, const UCoefficients&,
                  const SimConfig& cfg, const std::vector<Deviation>& menu) {
  require_valid(model);
  const CooperativePolicy phi(model, v);
  return run_gap(AgentDynamics::from_lq(model), phi, cfg, menu);
}

ScalingReport run_scaling(const std::function<GapMeasurement(int)>& measure,
                          const std::vector<int>& agent_counts) {
  if (agent_counts.size() < 4) throw ConfigError("run_scaling: need at least four agent counts");
  for (std::size_t i = 1; i < agent_counts.size(); ++i) {
    if (agent_counts[i] <= agent_counts[i - 1]) {
      throw ConfigError("run_scaling: agent counts must be strictly increasing");
    }
  }
  ScalingReport rep;
  bool any_signal = false;
  bool all_positive = true;
  for (int N : agent_counts) {
    GapMeasurement m = measure(N);
    m.agents = N;
    if (m.eps_hat > 2.0 * m.std_error) any_signal = true;
    if (!(m.eps_hat > 0.0)) all_positive = false;
    rep.points.push_back(m);
  }
  rep.insufficient_signal = !any_signal || !all_positive;
  if (!rep.insufficient_signal) {
    std::vector<double> x, y;
    for (const auto& m : rep.points) {
      x.push_back(std::log(static_cast<double>(m.agents)));
      y.push_back(std::log(m.eps_hat));
    }
    rep.fit = fit_line(x, y);
    rep.slope_ci_low = rep.fit.slope - 1.96 * rep.fit.slope_se;
    rep.slope_ci_high = rep.fit.slope + 1.96 * rep.fit.slope_se;
  }
  return rep;
}

GapMeasurement sr_joint_gap(const sr::SrParams& params, const TimeGrid& grid, SimConfig cfg) {
  const sr::SrMasterSolution ms = sr::solve_master(params, grid);
  const sr::SrDirectSolution exact = sr::solve_direct(params, cfg.agents, grid);
  const AgentDynamics dyn = sr::dynamics(params);
  const sr::LimitPolicy phi(ms);
  const sr::DirectPolicy optimum(exact);
  const PairedReport paired = paired_compare(dyn, phi, optimum, Deviation::none(), cfg);
  // deviated - baseline = J(exact) - J(phi)
  return GapMeasurement{cfg.agents, -paired.mean_difference, paired.std_error};
}

GapReport sr_run_gap(const sr::SrParams& params, const TimeGrid& grid, const SimConfig& cfg,
                     std::vector<Deviation> menu, bool include_exact) {
  const sr::SrMasterSolution ms = sr::solve_master(params, grid);
  const sr::SrDirectSolution exact = sr::solve_direct(params, cfg.agents, grid);
  if (include_exact) menu.push_back(sr::exact_deviation(exact));
  const sr::LimitPolicy phi(ms);
  GapReport rep = run_gap(sr::dynamics(params), phi, cfg, menu);
  rep.experiment = "systemic-risk-pbp-gap";
  return rep;
}

ConsistencyReport run_benchmark_consistency(const LqModel& model, const VCoefficients& v,
                                            const UCoefficients& u, const SimConfig& cfg) {
  const CostReport mc = simulate(model, v, cfg);
  const InitialSampler sampler(cfg.initial);
  const GaussianSource source(cfg.seed);
  const int N = cfg.agents;
  std::vector<double> bench(cfg.paths), diff(cfg.paths);
  for (int p = 0; p < cfg.paths; ++p) {
    Matrix others(N - 1, model.state_dim());
    Vector x1;
    for (int i = 0; i < N; ++i) {
      const std::uint32_t label =
          cfg.agent_labels.empty() ? static_cast<std::uint32_t>(i + 1) : cfg.agent_labels[i];
      const Vector xi = sampler.draw(source, static_cast<std::uint64_t>(p), label);
      if (i == 0) {
        x1 = xi;
      } else {
        others.row(i - 1) = xi.transpose();
      }
    }
    bench[p] = benchmark_value(u, v, x1, EmpiricalMeasure(std::move(others)), 0.0);
    diff[p] = mc.path_costs[p] - bench[p];
  }
  const MeanEstimate b = mean_and_stderr(bench);
  const MeanEstimate d = mean_and_stderr(diff);
  ConsistencyReport rep;
  rep.agents = N;
  rep.paths = cfg.paths;
  rep.mc_mean = mc.mean;
  rep.mc_std_error = mc.std_error;
  rep.benchmark_mean = b.mean;
  rep.benchmark_std_error = b.std_error;
  rep.discrepancy = d.mean;
  rep.discrepancy_std_error = d.std_error;
  rep.scaled_discrepancy = N * d.mean;
  return rep;
}

ConsistencySweep run_benchmark_sweep(const LqModel& model, const VCoefficients& v,
                                     const UCoefficients& u, SimConfig cfg,
                                     const std::vector<int>& agent_counts) {
  ConsistencySweep sweep;
  std::vector<double> scaled;
  for (int N : agent_counts) {
    cfg.agents = N;
    cfg.agent_labels.clear();
    sweep.reports.push_back(run_benchmark_consistency(model, v, u, cfg));
    scaled.push_back(std::abs(sweep.reports.back().scaled_discrepancy));
  }
  if (scaled.size() >= 2) sweep.trend = kendall_trend(scaled);
  return sweep;
}

}  // namespace meanfield
