#pragma once

#include <vector>

#include "meanfield/ode.hpp"
#include "meanfield/simulator.hpp"
#include "meanfield/stats.hpp"

namespace meanfield::sr {

/// Inter-bank lending model: dX^i = u^i dt + sigma (sqrt(1-rho^2) dW^i + rho dW^0),
/// running cost u^2 + 2 q u (x - z) + eps0 (x - z)^2, terminal cost c (x - z)^2,
/// with z the mean of the other banks.
struct SrParams {
  double sigma = 0.2;
  double rho = 0.5;
  double q = 1.0;
  double eps0 = 2.0;
  double c = 1.0;
  double horizon = 1.0;

  /// Throws ValidationError unless sigma >= 0, rho in [0,1], q >= 0,
  /// q^2 <= eps0, c >= 0 and T > 0.
  void check() const;
};

/// Exact N-bank social optimum: U_soc = x' P x + r with P = pi1 on the
/// diagonal and pi2 off it.
struct SrDirectSolution {
  Trajectory pi;  // rows: pi1, pi2
  Trajectory r;
  int agents = 2;
  double q = 0.0;

  const TimeGrid& grid() const noexcept { return pi.grid(); }
  double pi1(double t) const;
  double pi2(double t) const;
};

/// Master-equation solution V = P x^2 + Lambda xbar^2 + 2 H x xbar + r.
struct SrMasterSolution {
  Trajectory P, Lambda, H, r, Pd;
  double q = 0.0;

  const TimeGrid& grid() const noexcept { return P.grid(); }
};

SrDirectSolution solve_direct(const SrParams& params, int agents, const TimeGrid& grid);

/// 0 = Pd' - (Pd + q)^2 + eps0, Pd(T) = c.
Trajectory solve_Pd(const SrParams& params, const TimeGrid& grid);

/// P from its Riccati equation, H from its linear equation after setting
/// Lambda + 2H = -P, then Lambda = -P - 2H and r by quadrature.
SrMasterSolution solve_master(const SrParams& params, const TimeGrid& grid);

/// Optimal control of bank i (0-based) in the N-bank problem.
double control_direct(const SrDirectSolution& sol, double t, const Vector& states, int agent);

/// (Pd + q)(xbar - x).
double control_limit(const SrMasterSolution& ms, double t, double x, double xbar);

/// -[(P + q) x + (Lambda + 2H - q) xbar], the master-equation form of the same law.
double control_master(const SrMasterSolution& ms, double t, double x, double xbar);

/// x' P(0) x + r(0).
double exact_social_value(const SrDirectSolution& sol, const Vector& states);

struct ConvergenceRow {
  int agents = 0;
  double e1 = 0.0;  // sup_t |pi1 - Pd|
  double e2 = 0.0;  // sup_t |(N - 1) pi2 + Pd|
};

/// Log-log fits of e1 and e2 against N. A fit is absent (zero slope, flagged
/// degenerate) when some error is exactly zero.
struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  LineFit fit_e1;
  LineFit fit_e2;
  bool degenerate = false;
};

/// Requires at least four agent counts, each >= 2.
ConvergenceReport convergence_report(const SrParams& params, const std::vector<int>& agent_counts,
                                     const TimeGrid& grid);

/// The model in simulator form (cross weight q, Gamma = Gammaf = 1).
AgentDynamics dynamics(const SrParams& params);

/// Limit law (Pd + q)(z_i - x_i) with z_i the mean of the other banks.
class LimitPolicy final : public FeedbackPolicy {
 public:
  explicit LimitPolicy(const SrMasterSolution& ms) : ms_(&ms) {}
  void controls(double t, const Matrix& states, const Matrix& others_mean,
                Matrix& out) const override;

 private:
  const SrMasterSolution* ms_;
};

/// Exact finite-N optimal law applied by every bank.
class DirectPolicy final : public FeedbackPolicy {
 public:
  explicit DirectPolicy(const SrDirectSolution& sol) : sol_(&sol) {}
  void controls(double t, const Matrix& states, const Matrix& others_mean,
                Matrix& out) const override;

 private:
  const SrDirectSolution* sol_;
};

/// Bank 1 alone switches to the exact finite-N law.
Deviation exact_deviation(const SrDirectSolution& sol);

}  // namespace meanfield::sr
