#pragma once

#include "meanfield/lq_model.hpp"
#include "meanfield/value_synthesis.hpp"

namespace meanfield {

/// Equal-weight particle cloud; row j of `particles()` is the j-th atom.
class EmpiricalMeasure {
 public:
  explicit EmpiricalMeasure(Matrix particles);
  static EmpiricalMeasure dirac(const Vector& at);

  int size() const noexcept { return static_cast<int>(particles_.rows()); }
  int dim() const noexcept { return static_cast<int>(particles_.cols()); }
  const Matrix& particles() const noexcept { return particles_; }
  Vector particle(int j) const { return particles_.row(j).transpose(); }
  const Vector& mean() const noexcept { return mean_; }
  /// (1/k) sum_j y_j' M y_j.
  double quadratic_moment(const Matrix& M) const;

 private:
  Matrix particles_;
  Vector mean_;
};

double eval_V(const VCoefficients& v, double t, const Vector& x, const EmpiricalMeasure& mu);

/// Cooperative feedback -R^{-1} B' [P x + (Lambda + H + H') xbar + S + theta].
Vector eval_phi(const VCoefficients& v, const LqModel& model, double t, const Vector& x,
                const EmpiricalMeasure& mu);

/// <mu, V(t, ., mu)>.
double eval_Ubar(const VCoefficients& v, double t, const EmpiricalMeasure& mu);

/// Linear functional derivative of V in the measure direction, with the
/// additive constant chosen so that its mu-average over y vanishes.
double eval_delta_mu_V(const VCoefficients& v, double t, const Vector& x,
                       const EmpiricalMeasure& mu, const Vector& y);

double eval_M(const MCoefficients& m, double t, const EmpiricalMeasure& mu);

double eval_U(const UCoefficients& u, double t, const Vector& x, const EmpiricalMeasure& mu);

/// Hamiltonian-type functional minimized by the cooperative control:
/// V_x f + L + <mu(dy), d_x delta_mu V(t, y, mu; x) f> with f = Ax + Bu + G xbar.
double eval_Phi(const VCoefficients& v, const LqModel& model, double t, const Vector& x,
                const Vector& u, const EmpiricalMeasure& mu);

/// U(t, x1, mu^{-1}) + (N - 1) Ubar(t, mu^{-1}), with N - 1 = mu^{-1}.size().
double benchmark_value(const UCoefficients& u, const VCoefficients& v, const Vector& x1,
                       const EmpiricalMeasure& mu_minus1, double t);

/// Terminal cost |x - Gammaf xbar - etaf|^2_Qf.
double terminal_cost(const LqModel& model, const Vector& x, const Vector& xbar);

}  // namespace meanfield
