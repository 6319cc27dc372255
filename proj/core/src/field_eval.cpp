#include "meanfield/field_eval.hpp"

#include <stdexcept>

#include "meanfield/errors.hpp"

namespace meanfield {

namespace {

Matrix sym(const Matrix& m) { return 0.5 * (m + m.transpose()); }

void check_point(int n, const Vector& x, const EmpiricalMeasure& mu) {
  if (x.size() != n || mu.dim() != n) throw std::invalid_argument("field_eval: dimension mismatch");
}

}  // namespace

EmpiricalMeasure::EmpiricalMeasure(Matrix particles) : particles_(std::move(particles)) {
  if (particles_.rows() < 1 || particles_.cols() < 1) {
    throw std::invalid_argument("empirical measure needs at least one particle");
  }
  if (!particles_.allFinite()) throw std::invalid_argument("empirical measure: non-finite particle");
  mean_ = particles_.colwise().mean().transpose();
}

EmpiricalMeasure EmpiricalMeasure::dirac(const Vector& at) { return EmpiricalMeasure(at.transpose()); }

double EmpiricalMeasure::quadratic_moment(const Matrix& M) const {
  return (particles_ * M).cwiseProduct(particles_).sum() / static_cast<double>(size());
}

double eval_V(const VCoefficients& v, double t, const Vector& x, const EmpiricalMeasure& mu) {
  check_point(v.dim(), x, mu);
  const VSnapshot s = snapshot(v, t);
  const Vector& xb = mu.mean();
  return x.dot(sym(s.P) * x) + xb.dot(sym(s.Lambda) * xb) + 2.0 * x.dot(s.H * xb) +
         2.0 * x.dot(s.S) + 2.0 * xb.dot(s.theta) + s.r;
}

Vector eval_phi(const VCoefficients& v, const LqModel& model, double t, const Vector& x,
                const EmpiricalMeasure& mu) {
  check_point(v.dim(), x, mu);
  const VSnapshot s = snapshot(v, t);
  const Vector& xb = mu.mean();
  const Vector costate = s.P * x + (s.Lambda + s.H + s.H.transpose()) * xb + s.S + s.theta;
  return -model.R.llt().solve(model.B.transpose() * costate);
}

double eval_Ubar(const VCoefficients& v, double t, const EmpiricalMeasure& mu) {
  double total = 0.0;
  for (int j = 0; j < mu.size(); ++j) total += eval_V(v, t, mu.particle(j), mu);
  return total / static_cast<double>(mu.size());
}

double eval_delta_mu_V(const VCoefficients& v, double t, const Vector& x,
                       const EmpiricalMeasure& mu, const Vector& y) {
  check_point(v.dim(), x, mu);
  const VSnapshot s = snapshot(v, t);
  const Vector& xb = mu.mean();
  auto raw = [&](const Vector& z) {
    return 2.0 * xb.dot(s.Lambda * z) + 2.0 * x.dot(s.H * z) + 2.0 * z.dot(s.theta);
  };
  // chi = -<mu(dz), raw(z)>; raw is linear in z so the average is raw(xbar).
  const double chi = -raw(xb);
  return raw(y) + chi;
}

double eval_M(const MCoefficients& m, double t, const EmpiricalMeasure& mu) {
  const MSnapshot s = snapshot(m, t);
  const Vector& xb = mu.mean();
  return mu.quadratic_moment(sym(s.Pi1o)) + xb.dot(sym(s.Pi2o) * xb) + 2.0 * xb.dot(s.thetao) + s.ro;
}

double eval_U(const UCoefficients& u, double t, const Vector& x, const EmpiricalMeasure& mu) {
  check_point(u.dim(), x, mu);
  const USnapshot s = snapshot(u, t);
  const Vector& xb = mu.mean();
  return x.dot(sym(s.Pi1d) * x) + mu.quadratic_moment(sym(s.Pi2d)) + xb.dot(sym(s.Pi3d) * xb) +
         2.0 * x.dot(s.Pi4d * xb) + 2.0 * x.dot(s.Sd) + 2.0 * xb.dot(s.thetad) + s.rd;
}

double eval_Phi(const VCoefficients& v, const LqModel& model, double t, const Vector& x,
                const Vector& u, const EmpiricalMeasure& mu) {
  check_point(v.dim(), x, mu);
  const VSnapshot s = snapshot(v, t);
  const Vector& xb = mu.mean();
  const Vector f = model.A * x + model.B * u + model.G * xb;

  const Vector grad_V = 2.0 * (sym(s.P) * x + s.H * xb + s.S);
  // d/dx of delta_mu V(t, y, mu; x) = 2 Lambda xbar + 2 H' y + 2 theta, averaged
  // over the atoms y of mu.
  Vector grad_delta = Vector::Zero(x.size());
  for (int j = 0; j < mu.size(); ++j) {
    grad_delta += 2.0 * (sym(s.Lambda) * xb + s.H.transpose() * mu.particle(j) + s.theta);
  }
  grad_delta /= static_cast<double>(mu.size());

  const Vector e = x - model.Gamma * xb - model.eta;
  const double running = e.dot(model.Q * e) + u.dot(model.R * u);
  return grad_V.dot(f) + running + grad_delta.dot(f);
}

double benchmark_value(const UCoefficients& u, const VCoefficients& v, const Vector& x1,
                       const EmpiricalMeasure& mu_minus1, double t) {
  return eval_U(u, t, x1, mu_minus1) +
         static_cast<double>(mu_minus1.size()) * eval_Ubar(v, t, mu_minus1);
}

double terminal_cost(const LqModel& model, const Vector& x, const Vector& xbar) {
  const Vector e = x - model.Gammaf * xbar - model.etaf;
  return e.dot(model.Qf * e);
}

}  // namespace meanfield
