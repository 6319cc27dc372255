#include "meanfield/ode.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "meanfield/errors.hpp"

namespace meanfield {

TimeGrid::TimeGrid(double horizon, int steps) : horizon_(horizon), steps_(steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ConfigError("time grid: horizon must be positive and finite");
  }
  if (steps < 1) throw ConfigError("time grid: steps must be >= 1");
}

double TimeGrid::time(int k) const {
  if (k == steps_) return horizon_;
  return horizon_ * static_cast<double>(k) / static_cast<double>(steps_);
}

int TimeGrid::bracket(double t) const {
  if (!(t >= 0.0 && t <= horizon_)) {
    std::ostringstream os;
    os << "time " << t << " outside [0, " << horizon_ << "]";
    throw OutOfRangeError(os.str());
  }
  int i = static_cast<int>(std::floor(t / horizon_ * steps_));
  if (i >= steps_) i = steps_ - 1;
  if (i < 0) i = 0;
  while (i > 0 && time(i) > t) --i;
  while (i < steps_ - 1 && time(i + 1) <= t) ++i;
  return i;
}

Trajectory::Trajectory(TimeGrid grid, Matrix values, Matrix derivatives)
    : grid_(grid), values_(std::move(values)), derivatives_(std::move(derivatives)) {
  if (values_.cols() != grid_.size()) {
    throw std::invalid_argument("trajectory: one column per grid point required");
  }
  if (derivatives_.size() != 0 &&
      (derivatives_.rows() != values_.rows() || derivatives_.cols() != values_.cols())) {
    throw std::invalid_argument("trajectory: derivative shape mismatch");
  }
}

double Trajectory::max_abs() const {
  return values_.size() == 0 ? 0.0 : values_.cwiseAbs().maxCoeff();
}

namespace {

void require_finite(const Vector& y, double t, const char* stage) {
  if (!y.allFinite()) {
    std::ostringstream os;
    os << "ODE solution blew up at t=" << t << " (" << stage << ")";
    throw BlowUpError(os.str(), t);
  }
}

}  // namespace

Trajectory integrate_terminal(const OdeRhs& rhs, const Vector& terminal_state,
                              const TimeGrid& grid, const StepProjection& project) {
  require_finite(terminal_state, grid.horizon(), "terminal state");
  const int d = static_cast<int>(terminal_state.size());
  const int steps = grid.steps();
  const double h = grid.step();

  Matrix values(d, grid.size());
  Matrix derivatives(d, grid.size());
  Vector y = terminal_state;
  values.col(steps) = y;

  // s = T - t turns the terminal problem into an initial one: dy/ds = -f(T-s, y).
  for (int k = steps; k > 0; --k) {
    const double t = grid.time(k);
    const double t_mid = t - 0.5 * h;
    const double t_next = grid.time(k - 1);

    Vector f1 = rhs(t, y);
    require_finite(f1, t, "stage 1");
    derivatives.col(k) = f1;
    Vector f2 = rhs(t_mid, y - 0.5 * h * f1);
    require_finite(f2, t_mid, "stage 2");
    Vector f3 = rhs(t_mid, y - 0.5 * h * f2);
    require_finite(f3, t_mid, "stage 3");
    Vector f4 = rhs(t_next, y - h * f3);
    require_finite(f4, t_next, "stage 4");

    y -= (h / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4);
    if (project) project(y);
    require_finite(y, t_next, "step");
    values.col(k - 1) = y;
  }
  Vector f0 = rhs(grid.time(0), y);
  require_finite(f0, 0.0, "final derivative");
  derivatives.col(0) = f0;
  return Trajectory(grid, std::move(values), std::move(derivatives));
}

Vector sample(const Trajectory& trajectory, double t) {
  const TimeGrid& grid = trajectory.grid();
  const int i = grid.bracket(t);
  const double t0 = grid.time(i);
  if (t == t0) return trajectory.at(i);
  if (t == grid.time(i + 1)) return trajectory.at(i + 1);
  const double w = (t - t0) / grid.step();
  return (1.0 - w) * trajectory.values().col(i) + w * trajectory.values().col(i + 1);
}

Vector sample_smooth(const Trajectory& trajectory, double t) {
  if (!trajectory.has_derivatives()) return sample(trajectory, t);
  const TimeGrid& grid = trajectory.grid();
  const int i = grid.bracket(t);
  const double t0 = grid.time(i);
  if (t == t0) return trajectory.at(i);
  if (t == grid.time(i + 1)) return trajectory.at(i + 1);
  const double h = grid.step();
  const double s = (t - t0) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  const auto& v = trajectory.values();
  const auto& d = trajectory.derivatives();
  return h00 * v.col(i) + (h10 * h) * d.col(i) + h01 * v.col(i + 1) + (h11 * h) * d.col(i + 1);
}

Matrix unflatten(const Eigen::Ref<const Vector>& flat, int rows, int cols) {
  return Eigen::Map<const RowMajorMatrix>(flat.data(), rows, cols);
}

Vector flatten(const Matrix& m) {
  RowMajorMatrix rm = m;
  return Eigen::Map<const Vector>(rm.data(), rm.size());
}

void symmetrize_block(Vector& state, int offset, int n) {
  Eigen::Map<RowMajorMatrix> block(state.data() + offset, n, n);
  RowMajorMatrix sym = 0.5 * (block + block.transpose());
  block = sym;
}

}  // namespace meanfield
