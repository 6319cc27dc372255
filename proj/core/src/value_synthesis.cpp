#include "meanfield/value_synthesis.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <vector>

#include "meanfield/errors.hpp"

namespace meanfield {

namespace {

Matrix mat(const Vector& flat, int n) { return unflatten(flat, n, n); }

Matrix mat_at(const Trajectory& tr, int k, int n) { return unflatten(tr.values().col(k), n, n); }

Matrix mat_smooth(const Trajectory& tr, double t, int n) { return mat(sample_smooth(tr, t), n); }

Matrix mat_linear(const Trajectory& tr, double t, int n) { return mat(sample(tr, t), n); }

double scalar_at(const Trajectory& tr, int k) { return tr.values()(0, k); }

Matrix sym(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Vector scalar_vec(double x) { return Vector::Constant(1, x); }

// Algebraic trajectory sum with matching derivatives.
Trajectory combine(const TimeGrid& grid,
                   std::initializer_list<std::pair<double, const Trajectory*>> terms) {
  Matrix values = Matrix::Zero(terms.begin()->second->dim(), grid.size());
  Matrix derivs = values;
  for (const auto& [w, tr] : terms) {
    values += w * tr->values();
    derivs += w * tr->derivatives();
  }
  return Trajectory(grid, std::move(values), std::move(derivs));
}

// Flattened transpose of every column of an n x n block trajectory.
Trajectory transposed(const Trajectory& tr, int n) {
  Matrix values(tr.dim(), tr.grid().size());
  Matrix derivs(tr.dim(), tr.grid().size());
  for (int k = 0; k < tr.grid().size(); ++k) {
    values.col(k) = flatten(mat(tr.values().col(k), n).transpose());
    derivs.col(k) = flatten(mat(tr.derivatives().col(k), n).transpose());
  }
  return Trajectory(tr.grid(), std::move(values), std::move(derivs));
}

Trajectory symmetrized(const Trajectory& tr, int n) {
  Matrix values(tr.dim(), tr.grid().size());
  Matrix derivs(tr.dim(), tr.grid().size());
  for (int k = 0; k < tr.grid().size(); ++k) {
    values.col(k) = flatten(sym(mat(tr.values().col(k), n)));
    derivs.col(k) = flatten(sym(mat(tr.derivatives().col(k), n)));
  }
  return Trajectory(tr.grid(), std::move(values), std::move(derivs));
}

Trajectory slice(const Trajectory& tr, int offset, int len) {
  return Trajectory(tr.grid(), tr.values().middleRows(offset, len),
                    tr.derivatives().middleRows(offset, len));
}

void require_same_grid(const TimeGrid& a, const TimeGrid& b, const char* what) {
  if (!(a == b)) throw ConfigError(std::string(what) + ": coefficient grids differ");
}

}  // namespace

Matrix control_gain(const LqModel& model) {
  Eigen::LLT<Matrix> llt(model.R);
  if (llt.info() != Eigen::Success) throw ValidationError("R not positive definite");
  return sym(model.B * llt.solve(model.B.transpose()));
}

VSnapshot v_terminal(const LqModel& m) {
  VSnapshot s;
  s.P = m.Qf;
  s.Lambda = sym(m.Gammaf.transpose() * m.Qf * m.Gammaf);
  s.H = -m.Qf * m.Gammaf;
  s.S = -m.Qf * m.etaf;
  s.theta = m.Gammaf.transpose() * m.Qf * m.etaf;
  s.r = m.etaf.dot(m.Qf * m.etaf);
  return s;
}

Matrix z_rate(const LqModel& m, const Matrix& Z) {
  const Matrix Bh = control_gain(m);
  const Matrix AG = m.A + m.G;
  const Matrix I = Matrix::Identity(m.state_dim(), m.state_dim());
  return -AG.transpose() * Z - Z * AG + Z * Bh * Z -
         (I - m.Gamma).transpose() * m.Q * (I - m.Gamma);
}

VSnapshot v_rates(const LqModel& m, const VSnapshot& v) {
  const Matrix Bh = control_gain(m);
  const Matrix& A = m.A;
  const Matrix& G = m.G;
  const Matrix sum = v.P + v.Lambda + v.H + v.H.transpose();
  const Matrix K = A + G - Bh * sum;

  VSnapshot d;
  d.P = -A.transpose() * v.P - v.P * A + v.P * Bh * v.P - m.Q;
  d.Lambda = -(v.Lambda + v.H) * Bh * (v.Lambda + v.H.transpose()) - v.Lambda * K -
             K.transpose() * v.Lambda + v.H.transpose() * Bh * v.H - v.H.transpose() * G -
             G.transpose() * v.H - m.Gamma.transpose() * m.Q * m.Gamma;
  d.H = -A.transpose() * v.H + v.P * Bh * v.H - v.H * K - v.P * G + m.Q * m.Gamma;
  d.S = -A.transpose() * v.S + v.P * Bh * v.S + v.H * Bh * (v.S + v.theta) + m.Q * m.eta;
  d.theta = v.H.transpose() * Bh * v.S + v.Lambda * Bh * (v.S + v.theta) - K.transpose() * v.theta -
            (v.Lambda + v.H) * Bh * v.theta - G.transpose() * v.S -
            m.Gamma.transpose() * m.Q * m.eta;
  d.r = v.S.dot(Bh * v.S) + v.theta.dot(Bh * (2.0 * v.S + v.theta)) -
        (sum * m.D0 * m.D0.transpose()).trace() - (v.P * m.D * m.D.transpose()).trace() -
        m.eta.dot(m.Q * m.eta);
  return d;
}

MSnapshot m_rates(const LqModel& m, const VSnapshot& v, const MSnapshot& o) {
  const Matrix Bh = control_gain(m);
  const Matrix Ghat = m.G - Bh * (v.Lambda + v.H + v.H.transpose());
  const Matrix Kp = m.A - Bh * v.P;
  const Matrix Kc = Kp + Ghat;
  const Matrix HG = v.H * Ghat + Ghat.transpose() * v.H.transpose();

  MSnapshot d;
  d.Pi1o = -o.Pi1o * Kp - Kp.transpose() * o.Pi1o - HG;
  d.Pi2o = -o.Pi2o * Kc - Kc.transpose() * o.Pi2o - o.Pi1o * Ghat - Ghat.transpose() * o.Pi1o + HG;
  d.thetao = -Kc.transpose() * o.thetao + (o.Pi1o + o.Pi2o) * Bh * (v.S + v.theta);
  d.ro = 2.0 * o.thetao.dot(Bh * (v.S + v.theta)) -
         ((o.Pi1o + v.Lambda) * m.D * m.D.transpose() +
          (o.Pi1o + o.Pi2o) * m.D0 * m.D0.transpose())
             .trace();
  return d;
}

Trajectory solve_Z(const LqModel& m, const TimeGrid& grid) {
  const int n = m.state_dim();
  const Matrix Bh = control_gain(m);
  const Matrix AG = m.A + m.G;
  const Matrix I = Matrix::Identity(n, n);
  const Matrix forcing = sym((I - m.Gamma).transpose() * m.Q * (I - m.Gamma));
  const Matrix terminal = sym((I - m.Gammaf).transpose() * m.Qf * (I - m.Gammaf));
  auto rhs = [&](double, const Vector& y) {
    const Matrix Z = mat(y, n);
    return flatten(-AG.transpose() * Z - Z * AG + Z * Bh * Z - forcing);
  };
  return integrate_terminal(rhs, flatten(terminal), grid,
                            [n](Vector& y) { symmetrize_block(y, 0, n); });
}

VCoefficients solve_V(const LqModel& m, const TimeGrid& grid) {
  if (std::abs(grid.horizon() - m.horizon) > 1e-12 * std::max(1.0, m.horizon)) {
    throw ConfigError("solve_V: grid horizon differs from model horizon");
  }
  const int n = m.state_dim();
  const Matrix Bh = control_gain(m);
  const Matrix& A = m.A;
  const Matrix& G = m.G;
  const VSnapshot fin = v_terminal(m);
  const auto symmetrize = [n](Vector& y) { symmetrize_block(y, 0, n); };

  // (1) standalone Riccati equation for P.
  Trajectory P = integrate_terminal(
      [&](double, const Vector& y) {
        const Matrix Pm = mat(y, n);
        return flatten(-A.transpose() * Pm - Pm * A + Pm * Bh * Pm - m.Q);
      },
      flatten(fin.P), grid, symmetrize);

  // (2) decoupled Riccati equation for Z = P + Lambda + H + H'.
  Trajectory Z = solve_Z(m, grid);

  // (3) H is linear once Z is known.
  Trajectory H = integrate_terminal(
      [&](double t, const Vector& y) {
        const Matrix Hm = mat(y, n);
        const Matrix Pm = mat_smooth(P, t, n);
        const Matrix K = A + G - Bh * mat_smooth(Z, t, n);
        return flatten(-A.transpose() * Hm + Pm * Bh * Hm - Hm * K - Pm * G + m.Q * m.Gamma);
      },
      flatten(fin.H), grid);

  // (4) Lambda = Z - P - H - H'.
  const Trajectory Ht = transposed(H, n);
  Trajectory Lambda = symmetrized(combine(grid, {{1.0, &Z}, {-1.0, &P}, {-1.0, &H}, {-1.0, &Ht}}), n);

  // (5) S and theta together.
  Vector st_terminal(2 * n);
  st_terminal << fin.S, fin.theta;
  Trajectory ST = integrate_terminal(
      [&](double t, const Vector& y) {
        const Vector S = y.head(n);
        const Vector th = y.tail(n);
        const Matrix Pm = mat_smooth(P, t, n);
        const Matrix Hm = mat_smooth(H, t, n);
        const Matrix Lm = mat_smooth(Lambda, t, n);
        const Matrix K = A + G - Bh * mat_smooth(Z, t, n);
        Vector out(2 * n);
        out.head(n) = -A.transpose() * S + Pm * Bh * S + Hm * Bh * (S + th) + m.Q * m.eta;
        out.tail(n) = Hm.transpose() * Bh * S + Lm * Bh * (S + th) - K.transpose() * th -
                      (Lm + Hm) * Bh * th - G.transpose() * S - m.Gamma.transpose() * m.Q * m.eta;
        return out;
      },
      st_terminal, grid);
  Trajectory S = slice(ST, 0, n);
  Trajectory theta = slice(ST, n, n);

  // (6) r by quadrature.
  const Matrix DD = m.D * m.D.transpose();
  const Matrix D0D0 = m.D0 * m.D0.transpose();
  const double eta_q = m.eta.dot(m.Q * m.eta);
  Trajectory r = integrate_terminal(
      [&](double t, const Vector&) {
        const Vector Sv = sample_smooth(S, t);
        const Vector th = sample_smooth(theta, t);
        const Matrix Zm = mat_smooth(Z, t, n);
        const Matrix Pm = mat_smooth(P, t, n);
        return scalar_vec(Sv.dot(Bh * Sv) + th.dot(Bh * (2.0 * Sv + th)) - (Zm * D0D0).trace() -
                          (Pm * DD).trace() - eta_q);
      },
      scalar_vec(fin.r), grid);

  return VCoefficients{std::move(P), std::move(Lambda), std::move(H), std::move(S),
                       std::move(theta), std::move(r), std::move(Z)};
}

MCoefficients solve_M(const LqModel& m, const VCoefficients& v) {
  const TimeGrid& grid = v.grid();
  const int n = m.state_dim();
  if (v.dim() != n) throw ConfigError("solve_M: coefficient dimension differs from model");
  const Matrix Bh = control_gain(m);

  auto v_smooth = [&](double t) {
    VSnapshot s;
    s.P = mat_smooth(v.P, t, n);
    s.Lambda = mat_smooth(v.Lambda, t, n);
    s.H = mat_smooth(v.H, t, n);
    s.S = sample_smooth(v.S, t);
    s.theta = sample_smooth(v.theta, t);
    return s;
  };

  // Pi1o, Pi2o and thetao form one linear system.
  const int nn = n * n;
  Trajectory joint = integrate_terminal(
      [&](double t, const Vector& y) {
        const VSnapshot vs = v_smooth(t);
        MSnapshot o;
        o.Pi1o = mat(y.segment(0, nn), n);
        o.Pi2o = mat(y.segment(nn, nn), n);
        o.thetao = y.segment(2 * nn, n);
        const Matrix Ghat = m.G - Bh * (vs.Lambda + vs.H + vs.H.transpose());
        const Matrix Kp = m.A - Bh * vs.P;
        const Matrix Kc = Kp + Ghat;
        const Matrix HG = vs.H * Ghat + Ghat.transpose() * vs.H.transpose();
        Vector out(2 * nn + n);
        out.segment(0, nn) = flatten(-o.Pi1o * Kp - Kp.transpose() * o.Pi1o - HG);
        out.segment(nn, nn) = flatten(-o.Pi2o * Kc - Kc.transpose() * o.Pi2o - o.Pi1o * Ghat -
                                      Ghat.transpose() * o.Pi1o + HG);
        out.segment(2 * nn, n) = -Kc.transpose() * o.thetao + (o.Pi1o + o.Pi2o) * Bh * (vs.S + vs.theta);
        return out;
      },
      Vector::Zero(2 * nn + n), grid,
      [n, nn](Vector& y) {
        symmetrize_block(y, 0, n);
        symmetrize_block(y, nn, n);
      });
  Trajectory Pi1o = slice(joint, 0, nn);
  Trajectory Pi2o = slice(joint, nn, nn);
  Trajectory thetao = slice(joint, 2 * nn, n);

  const Matrix DD = m.D * m.D.transpose();
  const Matrix D0D0 = m.D0 * m.D0.transpose();
  Trajectory ro = integrate_terminal(
      [&](double t, const Vector&) {
        const Matrix P1 = mat_smooth(Pi1o, t, n);
        const Matrix P2 = mat_smooth(Pi2o, t, n);
        const Vector tho = sample_smooth(thetao, t);
        const Matrix Lm = mat_smooth(v.Lambda, t, n);
        const Vector st = sample_smooth(v.S, t) + sample_smooth(v.theta, t);
        return scalar_vec(2.0 * tho.dot(Bh * st) - ((P1 + Lm) * DD + (P1 + P2) * D0D0).trace());
      },
      Vector::Zero(1), grid);

  return MCoefficients{std::move(Pi1o), std::move(Pi2o), std::move(thetao), std::move(ro)};
}

UCoefficients assemble_U(const VCoefficients& v, const MCoefficients& m) {
  require_same_grid(v.grid(), m.grid(), "assemble_U");
  const TimeGrid& grid = v.grid();
  const int n = v.dim();
  const Trajectory Ht = transposed(v.H, n);
  return UCoefficients{
      v.P,
      symmetrized(combine(grid, {{1.0, &m.Pi1o}, {-1.0, &v.H}, {-1.0, &Ht}}), n),
      symmetrized(combine(grid, {{1.0, &m.Pi2o}, {-1.0, &v.Lambda}}), n),
      combine(grid, {{1.0, &v.Lambda}, {1.0, &v.H}, {1.0, &Ht}}),
      combine(grid, {{1.0, &v.S}, {1.0, &v.theta}}),
      m.thetao,
      combine(grid, {{1.0, &v.r}, {1.0, &m.ro}}),
  };
}

VSnapshot snapshot_at(const VCoefficients& v, int k) {
  const int n = v.dim();
  return VSnapshot{mat_at(v.P, k, n), mat_at(v.Lambda, k, n), mat_at(v.H, k, n),
                   v.S.at(k),         v.theta.at(k),           scalar_at(v.r, k)};
}

VSnapshot snapshot(const VCoefficients& v, double t) {
  const int n = v.dim();
  return VSnapshot{mat_linear(v.P, t, n), mat_linear(v.Lambda, t, n), mat_linear(v.H, t, n),
                   sample(v.S, t),        sample(v.theta, t),          sample(v.r, t)(0)};
}

MSnapshot snapshot_at(const MCoefficients& m, int k) {
  const int n = m.dim();
  return MSnapshot{mat_at(m.Pi1o, k, n), mat_at(m.Pi2o, k, n), m.thetao.at(k), scalar_at(m.ro, k)};
}

MSnapshot snapshot(const MCoefficients& m, double t) {
  const int n = m.dim();
  return MSnapshot{mat_linear(m.Pi1o, t, n), mat_linear(m.Pi2o, t, n), sample(m.thetao, t),
                   sample(m.ro, t)(0)};
}

USnapshot snapshot_at(const UCoefficients& u, int k) {
  const int n = u.dim();
  return USnapshot{mat_at(u.Pi1d, k, n), mat_at(u.Pi2d, k, n), mat_at(u.Pi3d, k, n),
                   mat_at(u.Pi4d, k, n), u.Sd.at(k),           u.thetad.at(k),
                   scalar_at(u.rd, k)};
}

USnapshot snapshot(const UCoefficients& u, double t) {
  const int n = u.dim();
  return USnapshot{mat_linear(u.Pi1d, t, n), mat_linear(u.Pi2d, t, n), mat_linear(u.Pi3d, t, n),
                   mat_linear(u.Pi4d, t, n), sample(u.Sd, t),          sample(u.thetad, t),
                   sample(u.rd, t)(0)};
}

// ---------------------------------------------------------------------------
// Residual checks

double ResidualReport::max_ode_residual() const {
  double out = 0.0;
  for (const auto& [_, value] : ode_residuals) out = std::max(out, value);
  return out;
}

double ResidualReport::max_terminal_defect() const {
  double out = 0.0;
  for (const auto& [_, value] : terminal_defects) out = std::max(out, value);
  return out;
}

double ResidualReport::max_symmetry_defect() const {
  double out = 0.0;
  for (const auto& [_, value] : symmetry_defects) out = std::max(out, value);
  return out;
}

bool ResidualReport::passes(double residual_tolerance, double terminal_tolerance) const {
  return z_identity <= residual_tolerance && max_ode_residual() <= residual_tolerance &&
         max_symmetry_defect() <= terminal_tolerance &&
         max_terminal_defect() <= terminal_tolerance && u_identity <= terminal_tolerance;
}

namespace {

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }
double max_abs(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

double symmetry_defect(const Trajectory& tr, int n) {
  double out = 0.0;
  for (int k = 0; k < tr.grid().size(); ++k) {
    const Matrix X = mat_at(tr, k, n);
    out = std::max(out, max_abs(Matrix(X - X.transpose())));
  }
  return out;
}

}  // namespace

ResidualReport check_identities(const VCoefficients& v, const MCoefficients& m,
                                const UCoefficients& u, const LqModel& model) {
  require_same_grid(v.grid(), m.grid(), "check_identities");
  require_same_grid(v.grid(), u.grid(), "check_identities");
  const TimeGrid& grid = v.grid();
  const int n = v.dim();
  const int last = grid.steps();
  const double h = grid.step();
  ResidualReport rep;

  for (int k = 0; k <= last; ++k) {
    const VSnapshot s = snapshot_at(v, k);
    const Matrix sum = s.P + s.Lambda + s.H + s.H.transpose();
    rep.z_identity = std::max(rep.z_identity, (sum - mat_at(v.Z, k, n)).norm());
  }

  auto bump = [&](const std::string& key, double value) {
    auto& slot = rep.ode_residuals[key];
    slot = std::max(slot, value);
  };
  for (const char* key : {"P", "Lambda", "H", "S", "theta", "r", "Z", "Pi1o", "Pi2o", "thetao", "ro"}) {
    rep.ode_residuals[key] = 0.0;
  }
  for (int k = 1; k < last; ++k) {
    const VSnapshot lo = snapshot_at(v, k - 1);
    const VSnapshot mid = snapshot_at(v, k);
    const VSnapshot hi = snapshot_at(v, k + 1);
    const VSnapshot rate = v_rates(model, mid);
    const double inv = 1.0 / (2.0 * h);
    bump("P", max_abs(Matrix((hi.P - lo.P) * inv - rate.P)));
    bump("Lambda", max_abs(Matrix((hi.Lambda - lo.Lambda) * inv - rate.Lambda)));
    bump("H", max_abs(Matrix((hi.H - lo.H) * inv - rate.H)));
    bump("S", max_abs(Vector((hi.S - lo.S) * inv - rate.S)));
    bump("theta", max_abs(Vector((hi.theta - lo.theta) * inv - rate.theta)));
    bump("r", std::abs((hi.r - lo.r) * inv - rate.r));
    const Matrix Zlo = mat_at(v.Z, k - 1, n);
    const Matrix Zhi = mat_at(v.Z, k + 1, n);
    bump("Z", max_abs(Matrix((Zhi - Zlo) * inv - z_rate(model, mat_at(v.Z, k, n)))));

    const MSnapshot olo = snapshot_at(m, k - 1);
    const MSnapshot ohi = snapshot_at(m, k + 1);
    const MSnapshot orate = m_rates(model, mid, snapshot_at(m, k));
    bump("Pi1o", max_abs(Matrix((ohi.Pi1o - olo.Pi1o) * inv - orate.Pi1o)));
    bump("Pi2o", max_abs(Matrix((ohi.Pi2o - olo.Pi2o) * inv - orate.Pi2o)));
    bump("thetao", max_abs(Vector((ohi.thetao - olo.thetao) * inv - orate.thetao)));
    bump("ro", std::abs((ohi.ro - olo.ro) * inv - orate.ro));
  }

  const std::pair<const char*, const Trajectory*> symmetric_blocks[] = {
      {"P", &v.P},       {"Lambda", &v.Lambda}, {"Z", &v.Z},       {"Pi1o", &m.Pi1o},
      {"Pi2o", &m.Pi2o}, {"Pi1d", &u.Pi1d},     {"Pi2d", &u.Pi2d}, {"Pi3d", &u.Pi3d}};
  for (const auto& [name, tr] : symmetric_blocks) rep.symmetry_defects[name] = symmetry_defect(*tr, n);

  const VSnapshot fin = v_terminal(model);
  const VSnapshot vt = snapshot_at(v, last);
  const MSnapshot mt = snapshot_at(m, last);
  const USnapshot ut = snapshot_at(u, last);
  const Matrix I = Matrix::Identity(n, n);
  auto& td = rep.terminal_defects;
  td["P"] = max_abs(Matrix(vt.P - fin.P));
  td["Lambda"] = max_abs(Matrix(vt.Lambda - fin.Lambda));
  td["H"] = max_abs(Matrix(vt.H - fin.H));
  td["S"] = max_abs(Vector(vt.S - fin.S));
  td["theta"] = max_abs(Vector(vt.theta - fin.theta));
  td["r"] = std::abs(vt.r - fin.r);
  td["Z"] = max_abs(Matrix(mat_at(v.Z, last, n) -
                           (I - model.Gammaf).transpose() * model.Qf * (I - model.Gammaf)));
  td["Pi1o"] = max_abs(mt.Pi1o);
  td["Pi2o"] = max_abs(mt.Pi2o);
  td["thetao"] = max_abs(mt.thetao);
  td["ro"] = std::abs(mt.ro);
  td["Pi1d"] = max_abs(Matrix(ut.Pi1d - model.Qf));
  td["Pi2d"] = max_abs(Matrix(ut.Pi2d - (model.Qf * model.Gammaf + model.Gammaf.transpose() * model.Qf)));
  td["Pi4d"] = max_abs(Matrix(ut.Pi4d - (model.Gammaf.transpose() * model.Qf * model.Gammaf -
                                         model.Qf * model.Gammaf - model.Gammaf.transpose() * model.Qf)));

  for (int k = 0; k <= last; ++k) {
    const VSnapshot s = snapshot_at(v, k);
    const MSnapshot o = snapshot_at(m, k);
    const USnapshot w = snapshot_at(u, k);
    const double d = std::max(
        {max_abs(Matrix(w.Pi1d - s.P)), max_abs(Matrix(w.Pi2d - (o.Pi1o - s.H - s.H.transpose()))),
         max_abs(Matrix(w.Pi3d - (o.Pi2o - s.Lambda))),
         max_abs(Matrix(w.Pi4d - (s.Lambda + s.H + s.H.transpose()))),
         max_abs(Vector(w.Sd - (s.S + s.theta))), max_abs(Vector(w.thetad - o.thetao)),
         std::abs(w.rd - (s.r + o.ro))});
    rep.u_identity = std::max(rep.u_identity, d);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// CSV export

namespace {

struct Column {
  std::string name;
  const Trajectory* trajectory;
  int rows;
  int cols;  // 0 for vectors, -1 for scalars
};

void write_columns(std::ostream& os, const TimeGrid& grid, const std::vector<Column>& columns) {
  os << "t";
  for (const auto& c : columns) {
    if (c.cols > 0) {
      for (int i = 0; i < c.rows; ++i)
        for (int j = 0; j < c.cols; ++j) os << ',' << c.name << '_' << i << j;
    } else if (c.cols == 0) {
      for (int i = 0; i < c.rows; ++i) os << ',' << c.name << '_' << i;
    } else {
      os << ',' << c.name;
    }
  }
  os << '\n';
  char buf[40];
  for (int k = 0; k < grid.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", grid.time(k));
    os << buf;
    for (const auto& c : columns) {
      const auto col = c.trajectory->values().col(k);
      for (Eigen::Index i = 0; i < col.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", col(i));
        os << ',' << buf;
      }
    }
    os << '\n';
  }
}

}  // namespace

void write_csv(std::ostream& os, const VCoefficients& v) {
  const int n = v.dim();
  write_columns(os, v.grid(),
                {{"P", &v.P, n, n}, {"Lambda", &v.Lambda, n, n}, {"H", &v.H, n, n},
                 {"S", &v.S, n, 0}, {"theta", &v.theta, n, 0}, {"r", &v.r, 1, -1}});
}

void write_csv(std::ostream& os, const MCoefficients& m) {
  const int n = m.dim();
  write_columns(os, m.grid(),
                {{"Pi1o", &m.Pi1o, n, n}, {"Pi2o", &m.Pi2o, n, n}, {"thetao", &m.thetao, n, 0},
                 {"ro", &m.ro, 1, -1}});
}

void write_csv(std::ostream& os, const UCoefficients& u) {
  const int n = u.dim();
  write_columns(os, u.grid(),
                {{"Pi1d", &u.Pi1d, n, n}, {"Pi2d", &u.Pi2d, n, n}, {"Pi3d", &u.Pi3d, n, n},
                 {"Pi4d", &u.Pi4d, n, n}, {"Sd", &u.Sd, n, 0}, {"thetad", &u.thetad, n, 0},
                 {"rd", &u.rd, 1, -1}});
}

}  // namespace meanfield
