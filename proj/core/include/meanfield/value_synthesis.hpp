#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "meanfield/lq_model.hpp"
#include "meanfield/ode.hpp"

namespace meanfield {

/// Coefficients of V(t,x,mu) = x'Px + xbar'Lambda xbar + 2x'H xbar + 2x'S
/// + 2xbar'theta + r, together with Z = P + Lambda + H + H'.
struct VCoefficients {
  Trajectory P, Lambda, H, S, theta, r, Z;

  const TimeGrid& grid() const noexcept { return P.grid(); }
  int dim() const noexcept { return static_cast<int>(S.dim()); }
};

/// Coefficients of M(t,mu) = <mu, y'Pi1o y> + xbar'Pi2o xbar + 2xbar'thetao + ro.
struct MCoefficients {
  Trajectory Pi1o, Pi2o, thetao, ro;

  const TimeGrid& grid() const noexcept { return Pi1o.grid(); }
  int dim() const noexcept { return static_cast<int>(thetao.dim()); }
};

/// Coefficients of U(t,x,mu) = x'Pi1d x + <mu, y'Pi2d y> + xbar'Pi3d xbar
/// + 2x'Pi4d xbar + 2x'Sd + 2xbar'thetad + rd.
struct UCoefficients {
  Trajectory Pi1d, Pi2d, Pi3d, Pi4d, Sd, thetad, rd;

  const TimeGrid& grid() const noexcept { return Pi1d.grid(); }
  int dim() const noexcept { return static_cast<int>(Sd.dim()); }
};

/// Point values of the V coefficients.
struct VSnapshot {
  Matrix P, Lambda, H;
  Vector S, theta;
  double r = 0.0;
};

struct MSnapshot {
  Matrix Pi1o, Pi2o;
  Vector thetao;
  double ro = 0.0;
};

struct USnapshot {
  Matrix Pi1d, Pi2d, Pi3d, Pi4d;
  Vector Sd, thetad;
  double rd = 0.0;
};

/// Linear interpolation in t (exact at grid points).
VSnapshot snapshot(const VCoefficients& v, double t);
VSnapshot snapshot_at(const VCoefficients& v, int k);
MSnapshot snapshot(const MCoefficients& m, double t);
MSnapshot snapshot_at(const MCoefficients& m, int k);
USnapshot snapshot(const UCoefficients& u, double t);
USnapshot snapshot_at(const UCoefficients& u, int k);

/// B R^{-1} B'.
Matrix control_gain(const LqModel& model);

/// Terminal values of the V system.
VSnapshot v_terminal(const LqModel& model);

/// Right-hand sides of the P, Lambda, H, S, theta, r equations as displayed,
/// i.e. with P + Lambda + H + H' formed from the arguments (no Z shortcut).
VSnapshot v_rates(const LqModel& model, const VSnapshot& at);
MSnapshot m_rates(const LqModel& model, const VSnapshot& v, const MSnapshot& at);
/// Right-hand side of the decoupled Riccati equation for Z.
Matrix z_rate(const LqModel& model, const Matrix& Z);

Trajectory solve_Z(const LqModel& model, const TimeGrid& grid);

/// Z decoupling: P, then Z, then H from its linear equation with
/// P + Lambda + H + H' replaced by Z, Lambda = Z - P - H - H', then (S, theta)
/// and finally r by quadrature.
VCoefficients solve_V(const LqModel& model, const TimeGrid& grid);

MCoefficients solve_M(const LqModel& model, const VCoefficients& v);

/// Pointwise: Pi1d = P, Pi2d = Pi1o - H - H', Pi3d = Pi2o - Lambda,
/// Pi4d = Lambda + H + H', Sd = S + theta, thetad = thetao, rd = r + ro.
UCoefficients assemble_U(const VCoefficients& v, const MCoefficients& m);

struct ResidualReport {
  double z_identity = 0.0;
  std::map<std::string, double> ode_residuals;
  std::map<std::string, double> symmetry_defects;
  std::map<std::string, double> terminal_defects;
  double u_identity = 0.0;

  double max_ode_residual() const;
  double max_terminal_defect() const;
  double max_symmetry_defect() const;
  bool passes(double residual_tolerance = 1e-6, double terminal_tolerance = 1e-12) const;
};

/// Max-over-grid defects. ODE residuals compare central differences at
/// interior grid points with the displayed right-hand sides.
ResidualReport check_identities(const VCoefficients& v, const MCoefficients& m,
                                const UCoefficients& u, const LqModel& model);

/// CSV with header t,P_00,...,r (17 significant digits).
void write_csv(std::ostream& os, const VCoefficients& v);
void write_csv(std::ostream& os, const MCoefficients& m);
void write_csv(std::ostream& os, const UCoefficients& u);

}  // namespace meanfield
