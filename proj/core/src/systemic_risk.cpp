#include "meanfield/systemic_risk.hpp"

#include <cmath>
#include <sstream>

#include "meanfield/errors.hpp"

namespace meanfield::sr {

namespace {

Vector scalar_vec(double x) { return Vector::Constant(1, x); }

double at(const Trajectory& tr, double t, int row = 0) { return sample(tr, t)(row); }

}  // namespace

void SrParams::check() const {
  std::ostringstream os;
  if (!(sigma >= 0.0)) os << "sigma must be >= 0; ";
  if (!(rho >= 0.0 && rho <= 1.0)) os << "rho must lie in [0,1]; ";
  if (!(q >= 0.0)) os << "q must be >= 0; ";
  if (!(q * q <= eps0)) os << "q^2 <= eps0 required for convexity; ";
  if (!(c >= 0.0)) os << "c must be >= 0; ";
  if (!(horizon > 0.0) || !std::isfinite(horizon)) os << "T must be positive; ";
  const std::string msg = os.str();
  if (!msg.empty()) throw ValidationError("invalid systemic-risk parameters: " + msg);
}

double SrDirectSolution::pi1(double t) const { return at(pi, t, 0); }
double SrDirectSolution::pi2(double t) const { return at(pi, t, 1); }

SrDirectSolution solve_direct(const SrParams& p, int agents, const TimeGrid& grid) {
  p.check();
  if (agents < 2) throw ConfigError("solve_direct: need N >= 2");
  const double N = agents;
  const double m1 = N - 1.0;
  const double q = p.q;
  const double e0 = p.eps0;

  Vector terminal(2);
  terminal << p.c * N / m1, -p.c * N / (m1 * m1);
  Trajectory pi = integrate_terminal(
      [=](double, const Vector& y) {
        const double a = y(0) + q;
        const double b = y(1) - q / m1;
        Vector d(2);
        d(0) = a * a + b * b * m1 - e0 * N / m1;
        d(1) = 2.0 * a * b + b * b * (N - 2.0) + e0 * N / (m1 * m1);
        return d;
      },
      terminal, grid);

  // Trace term of the HJB equation with Cov(dX^i, dX^j) = sigma^2 [rho^2 + (1 - rho^2) 1{i=j}] dt.
  const double s2 = p.sigma * p.sigma;
  const double rho2 = p.rho * p.rho;
  Trajectory r = integrate_terminal(
      [&](double t, const Vector&) {
        const Vector y = sample_smooth(pi, t);
        return scalar_vec(-s2 * ((1.0 - rho2) * N * y(0) + rho2 * (N * y(0) + N * m1 * y(1))));
      },
      Vector::Zero(1), grid);
  return SrDirectSolution{std::move(pi), std::move(r), agents, q};
}

Trajectory solve_Pd(const SrParams& p, const TimeGrid& grid) {
  p.check();
  const double q = p.q;
  const double e0 = p.eps0;
  return integrate_terminal(
      [=](double, const Vector& y) { return scalar_vec((y(0) + q) * (y(0) + q) - e0); },
      scalar_vec(p.c), grid);
}

SrMasterSolution solve_master(const SrParams& p, const TimeGrid& grid) {
  p.check();
  const double q = p.q;
  const double e0 = p.eps0;
  Trajectory P = integrate_terminal(
      [=](double, const Vector& y) { return scalar_vec((y(0) + q) * (y(0) + q) - e0); },
      scalar_vec(p.c), grid);

  // H' = (P + q)(H - q) + H (P + Lambda + 2H) + eps0 with Lambda + 2H = -P.
  Trajectory H = integrate_terminal(
      [&](double t, const Vector& y) {
        const double Pt = sample_smooth(P, t)(0);
        return scalar_vec((Pt + q) * (y(0) - q) + e0);
      },
      scalar_vec(-p.c), grid);

  Trajectory Lambda(grid, -P.values() - 2.0 * H.values(), -P.derivatives() - 2.0 * H.derivatives());

  const double s2 = p.sigma * p.sigma;
  const double rho2 = p.rho * p.rho;
  Trajectory r = integrate_terminal(
      [&](double t, const Vector&) {
        const double Pt = sample_smooth(P, t)(0);
        const double Z1 = sample_smooth(Lambda, t)(0) + 2.0 * sample_smooth(H, t)(0);
        return scalar_vec(-s2 * Pt - s2 * rho2 * Z1);
      },
      Vector::Zero(1), grid);

  Trajectory Pd = solve_Pd(p, grid);
  return SrMasterSolution{std::move(P), std::move(Lambda), std::move(H), std::move(r), std::move(Pd), q};
}

double control_direct(const SrDirectSolution& sol, double t, const Vector& x, int i) {
  if (x.size() != sol.agents) throw std::invalid_argument("control_direct: state vector must have N entries");
  const Vector pi = sample(sol.pi, t);
  const double others = x.sum() - x(i);
  return -(pi(0) + sol.q) * x(i) - (pi(1) - sol.q / (sol.agents - 1.0)) * others;
}

double control_limit(const SrMasterSolution& ms, double t, double x, double xbar) {
  return (at(ms.Pd, t) + ms.q) * (xbar - x);
}

double control_master(const SrMasterSolution& ms, double t, double x, double xbar) {
  const double P = at(ms.P, t);
  const double Z1 = at(ms.Lambda, t) + 2.0 * at(ms.H, t);
  return -((P + ms.q) * x + (Z1 - ms.q) * xbar);
}

double exact_social_value(const SrDirectSolution& sol, const Vector& x) {
  if (x.size() != sol.agents) throw std::invalid_argument("exact_social_value: need N states");
  const Vector pi = sol.pi.at(0);
  const double sum = x.sum();
  // x'Px = pi1 |x|^2 + pi2 ((sum x)^2 - |x|^2)
  const double sq = x.squaredNorm();
  return pi(0) * sq + pi(1) * (sum * sum - sq) + sol.r.values()(0, 0);
}

ConvergenceReport convergence_report(const SrParams& p, const std::vector<int>& agent_counts,
                                     const TimeGrid& grid) {
  if (agent_counts.size() < 4) throw ConfigError("convergence_report: need at least four agent counts");
  const Trajectory Pd = solve_Pd(p, grid);
  ConvergenceReport rep;
  std::vector<double> logN, log1, log2;
  for (int N : agent_counts) {
    const SrDirectSolution sol = solve_direct(p, N, grid);
    ConvergenceRow row{N, 0.0, 0.0};
    for (int k = 0; k < grid.size(); ++k) {
      const double pd = Pd.values()(0, k);
      row.e1 = std::max(row.e1, std::abs(sol.pi.values()(0, k) - pd));
      row.e2 = std::max(row.e2, std::abs((N - 1.0) * sol.pi.values()(1, k) + pd));
    }
    rep.rows.push_back(row);
    if (row.e1 > 0.0 && row.e2 > 0.0) {
      logN.push_back(std::log(static_cast<double>(N)));
      log1.push_back(std::log(row.e1));
      log2.push_back(std::log(row.e2));
    }
  }
  if (logN.size() == agent_counts.size()) {
    rep.fit_e1 = fit_line(logN, log1);
    rep.fit_e2 = fit_line(logN, log2);
  } else {
    rep.degenerate = true;
  }
  return rep;
}

AgentDynamics dynamics(const SrParams& p) {
  p.check();
  AgentDynamics d;
  const Matrix one = Matrix::Identity(1, 1);
  d.A = Matrix::Zero(1, 1);
  d.B = one;
  d.G = Matrix::Zero(1, 1);
  d.D = Matrix::Constant(1, 1, p.sigma * std::sqrt(1.0 - p.rho * p.rho));
  d.D0 = Matrix::Constant(1, 1, p.sigma * p.rho);
  d.Q = Matrix::Constant(1, 1, p.eps0);
  d.R = one;
  d.Gamma = one;
  d.eta = Vector::Zero(1);
  d.Qf = Matrix::Constant(1, 1, p.c);
  d.Gammaf = one;
  d.etaf = Vector::Zero(1);
  d.cross = Matrix::Constant(1, 1, p.q);
  d.horizon = p.horizon;
  return d;
}

void LimitPolicy::controls(double t, const Matrix& states, const Matrix& others_mean, Matrix& out) const {
  const double gain = at(ms_->Pd, t) + ms_->q;
  out = gain * (others_mean - states);
}

void DirectPolicy::controls(double t, const Matrix& states, const Matrix&, Matrix& out) const {
  const Vector pi = sample(sol_->pi, t);
  const double a = pi(0) + sol_->q;
  const double b = pi(1) - sol_->q / (sol_->agents - 1.0);
  if (states.rows() != sol_->agents) throw ConfigError("DirectPolicy: population size differs from N");
  const double total = states.col(0).sum();
  out.resize(states.rows(), 1);
  out.col(0) = -a * states.col(0) - b * (Vector::Constant(states.rows(), total) - states.col(0));
}

Deviation exact_deviation(const SrDirectSolution& sol) {
  const SrDirectSolution* s = &sol;
  return Deviation::custom("exact-finite-N", [s](double t, const Matrix& states) {
    return Vector::Constant(1, control_direct(*s, t, states.col(0), 0));
  });
}

}  // namespace meanfield::sr
