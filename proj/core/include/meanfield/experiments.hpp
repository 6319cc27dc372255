#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "meanfield/field_eval.hpp"
#include "meanfield/simulator.hpp"
#include "meanfield/stats.hpp"
#include "meanfield/systemic_risk.hpp"

namespace meanfield {

/// Delta = J_soc(deviation) - J_soc(phi), estimated on common random numbers.
struct GapEntry {
  std::string deviation;
  double mean = 0.0;
  double std_error = 0.0;
};

struct GapReport {
  std::string experiment = "pbp-gap";
  std::uint64_t seed = 0;
  int agents = 0;
  int paths = 0;
  double baseline_mean = 0.0;
  double baseline_std_error = 0.0;
  std::vector<GapEntry> gaps;

  /// Entry with the smallest mean gap.
  const GapEntry& min_gap() const;
  /// max(0, -min Delta).
  double eps_hat() const;
};

/// {zero-control, scaled(0.5), scaled(1.5), constant(0.1 * 1)}.
std::vector<Deviation> default_menu(int control_dim);

GapReport run_gap(const AgentDynamics& dynamics, const FeedbackPolicy& phi, const SimConfig& config,
                  const std::vector<Deviation>& menu);

GapReport run_gap(const LqModel& model, const VCoefficients& v, const UCoefficients& u,
                  const SimConfig& config, const std::vector<Deviation>& menu);

/// One point of a scaling sweep.
struct GapMeasurement {
  int agents = 0;
  double eps_hat = 0.0;
  double std_error = 0.0;
};

struct ScalingReport {
  std::string experiment = "pbp-scaling";
  std::uint64_t seed = 0;
  int paths = 0;
  std::vector<GapMeasurement> points;
  LineFit fit;  // log eps_hat = slope log N + intercept
  double slope_ci_low = 0.0;
  double slope_ci_high = 0.0;
  /// Every eps_hat is within two standard errors of zero; no fit is made.
  bool insufficient_signal = false;
};

/// Requires at least four strictly increasing agent counts.
ScalingReport run_scaling(const std::function<GapMeasurement(int agents)>& measure,
                          const std::vector<int>& agent_counts);

/// Gap of the limit law phi against the exact N-bank optimum, both applied by
/// every bank: eps_hat = J_soc(phi) - J_soc(exact), on common random numbers.
/// It bounds from above what any single bank could save by deviating.
GapMeasurement sr_joint_gap(const sr::SrParams& params, const TimeGrid& grid, SimConfig config);

/// Menu gaps in the systemic-risk model, with the unilateral exact deviation
/// appended when `include_exact` is set.
GapReport sr_run_gap(const sr::SrParams& params, const TimeGrid& grid, const SimConfig& config,
                     std::vector<Deviation> menu, bool include_exact);

struct ConsistencyReport {
  int agents = 0;
  int paths = 0;
  double mc_mean = 0.0;        // Monte Carlo J_soc under phi
  double mc_std_error = 0.0;
  double benchmark_mean = 0.0;  // E[U(0, X^1, mu^{-1}) + (N - 1) Ubar(0, mu^{-1})]
  double benchmark_std_error = 0.0;
  double discrepancy = 0.0;     // mc_mean - benchmark_mean
  double discrepancy_std_error = 0.0;  // of the per-path difference
  double scaled_discrepancy = 0.0;     // N * discrepancy
};

ConsistencyReport run_benchmark_consistency(const LqModel& model, const VCoefficients& v,
                                            const UCoefficients& u, const SimConfig& config);

struct ConsistencySweep {
  std::vector<ConsistencyReport> reports;
  TrendTest trend;  // Kendall test of N * |discrepancy| against increasing N
};

ConsistencySweep run_benchmark_sweep(const LqModel& model, const VCoefficients& v,
                                     const UCoefficients& u, SimConfig config,
                                     const std::vector<int>& agent_counts);

}  // namespace meanfield
