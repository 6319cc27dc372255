#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace meanfield {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Uniform grid t_k = k*T/steps on [0, T].
class TimeGrid {
 public:
  TimeGrid(double horizon, int steps);

  double horizon() const noexcept { return horizon_; }
  int steps() const noexcept { return steps_; }
  int size() const noexcept { return steps_ + 1; }
  double step() const noexcept { return horizon_ / steps_; }
  /// Exact at both ends: time(0) == 0 and time(steps) == horizon.
  double time(int k) const;

  /// Index i with time(i) <= t < time(i+1) (i = steps-1 at t = T).
  int bracket(double t) const;

  bool operator==(const TimeGrid& other) const = default;

 private:
  double horizon_;
  int steps_;
};

/// Values of a vector-valued function of time at every grid point. The
/// right-hand side used to produce the values is kept alongside so that
/// later solves can read the trajectory at off-grid times to 4th order.
class Trajectory {
 public:
  Trajectory(TimeGrid grid, Matrix values, Matrix derivatives = Matrix());

  const TimeGrid& grid() const noexcept { return grid_; }
  int dim() const noexcept { return static_cast<int>(values_.rows()); }
  bool has_derivatives() const noexcept { return derivatives_.size() != 0; }

  /// Column k holds the value at time(k).
  const Matrix& values() const noexcept { return values_; }
  const Matrix& derivatives() const noexcept { return derivatives_; }
  Vector at(int k) const { return values_.col(k); }
  Vector derivative_at(int k) const { return derivatives_.col(k); }

  /// Max over the grid of the infinity norm.
  double max_abs() const;

 private:
  TimeGrid grid_;
  Matrix values_;
  Matrix derivatives_;
};

using OdeRhs = std::function<Vector(double t, const Vector& state)>;
/// Applied to the state after every completed step.
using StepProjection = std::function<void(Vector& state)>;

/// Classical RK4 run backward from the terminal state at t = T down to t = 0.
/// Throws BlowUpError if any intermediate state becomes non-finite.
Trajectory integrate_terminal(const OdeRhs& rhs, const Vector& terminal_state,
                              const TimeGrid& grid,
                              const StepProjection& project = {});

/// Piecewise-linear interpolation; returns stored values exactly at grid
/// points. Throws OutOfRangeError outside [0, T].
Vector sample(const Trajectory& trajectory, double t);

/// Cubic Hermite interpolation from stored values and derivatives; falls back
/// to linear interpolation when derivatives are absent.
Vector sample_smooth(const Trajectory& trajectory, double t);

/// Helpers for the row-major flat layout shared by all coefficient systems.
Matrix unflatten(const Eigen::Ref<const Vector>& flat, int rows, int cols);
Vector flatten(const Matrix& m);
void symmetrize_block(Vector& state, int offset, int n);

}  // namespace meanfield
