#include "meanfield/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "meanfield/errors.hpp"
#include "meanfield/stats.hpp"

namespace meanfield {

namespace {

constexpr double kExplosionLevel = 1e12;
// Paths per work unit. Fixed so that reductions never depend on thread count.
constexpr int kBlockPaths = 32;
constexpr double kMaxDumpRows = 1e7;

}  // namespace

AgentDynamics AgentDynamics::from_lq(const LqModel& m) {
  AgentDynamics d;
  d.A = m.A;
  d.B = m.B;
  d.G = m.G;
  d.D = m.D;
  d.D0 = m.D0;
  d.Q = m.Q;
  d.R = m.R;
  d.Gamma = m.Gamma;
  d.eta = m.eta;
  d.Qf = m.Qf;
  d.Gammaf = m.Gammaf;
  d.etaf = m.etaf;
  d.cross = Matrix::Zero(m.control_dim(), m.state_dim());
  d.horizon = m.horizon;
  return d;
}

CooperativePolicy::CooperativePolicy(const LqModel& model, const VCoefficients& v)
    : v_(&v), gain_(model.R.llt().solve(model.B.transpose())) {}

void CooperativePolicy::controls(double t, const Matrix& states, const Matrix& others_mean,
                                 Matrix& out) const {
  const VSnapshot s = snapshot(*v_, t);
  const Matrix mean_gain = s.Lambda + s.H + s.H.transpose();
  const Vector offset = s.S + s.theta;
  // Row form of -R^{-1}B'[P x_i + (Lambda + H + H') z_i + S + theta].
  Matrix costate = states * s.P.transpose() + others_mean * mean_gain.transpose();
  costate.rowwise() += offset.transpose();
  out.noalias() = -costate * gain_.transpose();
}

Deviation Deviation::none() { return Deviation{}; }

Deviation Deviation::zero_control() {
  Deviation d;
  d.kind = Kind::kZeroControl;
  return d;
}

Deviation Deviation::scaled(double kappa) {
  Deviation d;
  d.kind = Kind::kScaled;
  d.kappa = kappa;
  return d;
}

Deviation Deviation::constant_control(Vector u0) {
  Deviation d;
  d.kind = Kind::kConstant;
  d.constant = std::move(u0);
  return d;
}

Deviation Deviation::custom(std::string name, Feedback feedback) {
  Deviation d;
  d.kind = Kind::kCustomFeedback;
  d.name = std::move(name);
  d.feedback = std::move(feedback);
  return d;
}

namespace {

// Shortest text that reads back to the same double.
std::string shortest(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string Deviation::label() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::kNone:
      return "none";
    case Kind::kZeroControl:
      return "zero-control";
    case Kind::kScaled:
      os << "scaled(" << shortest(kappa) << ")";
      return os.str();
    case Kind::kConstant:
      os << "constant(";
      for (Eigen::Index i = 0; i < constant.size(); ++i) os << (i ? "," : "") << shortest(constant(i));
      os << ")";
      return os.str();
    case Kind::kCustomFeedback:
      return name.empty() ? "custom-feedback" : name;
  }
  return "unknown";
}

int SimConfig::steps(double horizon) const {
  if (!(dt > 0.0) || dt > horizon * (1.0 + 1e-12)) throw ConfigError("simulation: need 0 < dt <= T");
  const double ratio = horizon / dt;
  const double rounded = std::round(ratio);
  if (std::abs(rounded * dt - horizon) > 1e-12) {
    throw ConfigError("simulation: dt does not divide the horizon");
  }
  return static_cast<int>(rounded);
}

void SimConfig::check(const AgentDynamics& dynamics) const {
  if (agents < 2) throw ConfigError("simulation: need N >= 2 agents");
  if (paths < 1) throw ConfigError("simulation: need at least one path");
  steps(dynamics.horizon);
  initial.check();
  if (initial.dim() != dynamics.state_dim()) {
    throw ConfigError("simulation: initial distribution dimension differs from state dimension");
  }
  if (!agent_labels.empty() && static_cast<int>(agent_labels.size()) != agents) {
    throw ConfigError("simulation: agent_labels must have one entry per agent");
  }
}

int default_thread_count() {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MEANFIELD_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) return cap;
  }
  return static_cast<int>(hw);
}

namespace {

struct PathObserver {
  virtual ~PathObserver() = default;
  virtual void record(int step, double t, const Matrix& states, const Matrix& controls) = 0;
};

class PathKernel {
 public:
  PathKernel(const AgentDynamics& dyn, const FeedbackPolicy& policy, const SimConfig& cfg,
             const Deviation& dev)
      : dyn_(dyn),
        policy_(policy),
        cfg_(cfg),
        dev_(dev),
        sampler_(cfg.initial),
        source_(cfg.seed),
        steps_(cfg.steps(dyn.horizon)),
        grid_(dyn.horizon, steps_) {
    const int N = cfg.agents;
    labels_.resize(N);
    for (int i = 0; i < N; ++i) {
      labels_[i] = cfg.agent_labels.empty() ? static_cast<std::uint32_t>(i + 1) : cfg.agent_labels[i];
    }
    if (dev.kind == Deviation::Kind::kConstant && dev.constant.size() != dyn.control_dim()) {
      throw ConfigError("deviation: constant control has the wrong dimension");
    }
    if (dev.kind == Deviation::Kind::kCustomFeedback && !dev.feedback) {
      throw ConfigError("deviation: custom feedback is empty");
    }
  }

  int steps() const { return steps_; }

  /// Runs one path. Adds |X_t^i|^2 into moments (N x steps+1) and per-agent
  /// costs into agent_costs; returns J_soc.
  double run(std::uint64_t path, Matrix* moments, Vector& agent_costs,
             PathObserver* observer = nullptr) const {
    const int N = cfg_.agents;
    const int n = dyn_.state_dim();
    const int n1 = dyn_.control_dim();
    const int n2 = static_cast<int>(dyn_.D.cols());
    const int n3 = static_cast<int>(dyn_.D0.cols());
    const double dt = grid_.step();
    const double sqdt = std::sqrt(dt);
    const double inv_others = 1.0 / static_cast<double>(N - 1);

    Matrix X(N, n);
    for (int i = 0; i < N; ++i) X.row(i) = sampler_.draw(source_, path, labels_[i]).transpose();

    Matrix Z(N, n), U(N, n1), E(N, n), drift(N, n);
    RowMajorMatrix Wi(N, n2);
    Vector W0(n3);
    Vector costs = Vector::Zero(N);
    const Matrix At = dyn_.A.transpose(), Bt = dyn_.B.transpose(), Gt = dyn_.G.transpose();
    const Matrix Dt = dyn_.D.transpose(), GammaT = dyn_.Gamma.transpose();
    const Matrix GammafT = dyn_.Gammaf.transpose(), CrossT = dyn_.cross.transpose();
    const bool has_cross = dyn_.cross.size() != 0 && dyn_.cross.cwiseAbs().maxCoeff() != 0.0;
    const bool has_idio = n2 > 0 && dyn_.D.cwiseAbs().maxCoeff() != 0.0;
    const bool has_common = n3 > 0 && dyn_.D0.cwiseAbs().maxCoeff() != 0.0;

    auto others_mean = [&]() {
      const Eigen::RowVectorXd total = X.colwise().sum();
      Z = (-X).rowwise() + total;
      Z *= inv_others;
    };
    auto record_moments = [&](int k) {
      if (moments) moments->col(k) += X.rowwise().squaredNorm();
    };
    record_moments(0);

    for (int k = 0; k < steps_; ++k) {
      const double t = grid_.time(k);
      others_mean();
      policy_.controls(t, X, Z, U);
      apply_deviation(t, X, U);
      if (observer) observer->record(k, t, X, U);

      E = X - Z * GammaT;
      E.rowwise() -= dyn_.eta.transpose();
      Vector running = (E * dyn_.Q).cwiseProduct(E).rowwise().sum() +
                       (U * dyn_.R).cwiseProduct(U).rowwise().sum();
      if (has_cross) running += 2.0 * (U * dyn_.cross).cwiseProduct(E).rowwise().sum();
      costs += dt * running;

      drift.noalias() = X * At;
      drift.noalias() += U * Bt;
      drift.noalias() += Z * Gt;
      X += dt * drift;
      if (has_idio) {
        for (int i = 0; i < N; ++i) {
          source_.fill(std::span<double>(Wi.row(i).data(), n2), path, static_cast<std::uint32_t>(k),
                       labels_[i]);
        }
        X.noalias() += sqdt * (Wi * Dt);
      }
      if (has_common) {
        source_.fill(std::span<double>(W0.data(), n3), path, static_cast<std::uint32_t>(k), 0);
        const Vector shock = sqdt * (dyn_.D0 * W0);
        X.rowwise() += shock.transpose();
      }
      guard(X, path, k + 1);
      record_moments(k + 1);
    }

    others_mean();
    if (observer) {
      U.setZero();
      observer->record(steps_, grid_.horizon(), X, U);
    }
    E = X - Z * GammafT;
    E.rowwise() -= dyn_.etaf.transpose();
    costs += (E * dyn_.Qf).cwiseProduct(E).rowwise().sum();
    agent_costs += costs;
    return costs.sum();
  }

 private:
  void apply_deviation(double t, const Matrix& X, Matrix& U) const {
    switch (dev_.kind) {
      case Deviation::Kind::kNone:
        return;
      case Deviation::Kind::kZeroControl:
        U.row(0).setZero();
        return;
      case Deviation::Kind::kScaled:
        U.row(0) *= dev_.kappa;
        return;
      case Deviation::Kind::kConstant:
        U.row(0) = dev_.constant.transpose();
        return;
      case Deviation::Kind::kCustomFeedback: {
        const Vector u = dev_.feedback(t, X);
        if (u.size() != U.cols()) throw ConfigError("deviation: feedback returned wrong dimension");
        U.row(0) = u.transpose();
        return;
      }
    }
  }

  void guard(const Matrix& X, std::uint64_t path, int step) const {
    const double worst = X.rowwise().squaredNorm().maxCoeff();
    if (!std::isfinite(worst) || worst > kExplosionLevel * kExplosionLevel) {
      std::ostringstream os;
      os << "particle state exceeded 1e12 on path " << path << " at step " << step;
      throw BlowUpError(os.str(), grid_.time(step));
    }
  }

  const AgentDynamics& dyn_;
  const FeedbackPolicy& policy_;
  const SimConfig& cfg_;
  const Deviation& dev_;
  InitialSampler sampler_;
  GaussianSource source_;
  int steps_;
  TimeGrid grid_;
  std::vector<std::uint32_t> labels_;
};

struct BlockResult {
  Matrix moments;
  Vector agent_costs;
};

}  // namespace

CostReport simulate(const AgentDynamics& dyn, const FeedbackPolicy& policy, const SimConfig& cfg,
                    const Deviation& dev) {
  cfg.check(dyn);
  const PathKernel kernel(dyn, policy, cfg, dev);
  const int N = cfg.agents;
  const int steps = kernel.steps();
  const int blocks = (cfg.paths + kBlockPaths - 1) / kBlockPaths;

  CostReport report;
  report.agents = N;
  report.paths = cfg.paths;
  report.steps = steps;
  report.path_costs.assign(cfg.paths, 0.0);
  std::vector<BlockResult> results(blocks);

  std::atomic<int> next{0};
  std::mutex error_mutex;
  int error_block = blocks;
  std::exception_ptr error;

  auto worker = [&]() {
    for (;;) {
      const int b = next.fetch_add(1);
      if (b >= blocks) return;
      try {
        BlockResult res{Matrix::Zero(N, steps + 1), Vector::Zero(N)};
        const int first = b * kBlockPaths;
        const int last = std::min(cfg.paths, first + kBlockPaths);
        for (int p = first; p < last; ++p) {
          report.path_costs[p] = kernel.run(static_cast<std::uint64_t>(p), &res.moments, res.agent_costs);
        }
        results[b] = std::move(res);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (b < error_block) {
          error_block = b;
          error = std::current_exception();
        }
      }
    }
  };

  const int threads = std::clamp(cfg.threads > 0 ? cfg.threads : default_thread_count(), 1, blocks);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  // Serial reduction in block order.
  Matrix moments = Matrix::Zero(N, steps + 1);
  report.agent_mean_costs = Vector::Zero(N);
  for (const auto& res : results) {
    moments += res.moments;
    report.agent_mean_costs += res.agent_costs;
  }
  moments /= static_cast<double>(cfg.paths);
  report.agent_mean_costs /= static_cast<double>(cfg.paths);
  report.second_moment_by_step = moments.colwise().maxCoeff().transpose();
  report.max_second_moment = report.second_moment_by_step.maxCoeff();

  const MeanEstimate est = mean_and_stderr(report.path_costs);
  report.mean = est.mean;
  report.std_error = est.std_error;
  return report;
}

CostReport simulate(const LqModel& model, const VCoefficients& v, const SimConfig& config,
                    const Deviation& deviation) {
  require_valid(model);
  const CooperativePolicy phi(model, v);
  return simulate(AgentDynamics::from_lq(model), phi, config, deviation);
}

PairedReport paired_compare(const AgentDynamics& dyn, const FeedbackPolicy& baseline,
                            const FeedbackPolicy& alternative, const Deviation& alternative_deviation,
                            const SimConfig& cfg) {
  PairedReport out;
  out.baseline = simulate(dyn, baseline, cfg, Deviation::none());
  out.deviated = simulate(dyn, alternative, cfg, alternative_deviation);
  out.differences.resize(cfg.paths);
  for (int p = 0; p < cfg.paths; ++p) {
    out.differences[p] = out.deviated.path_costs[p] - out.baseline.path_costs[p];
  }
  const MeanEstimate est = mean_and_stderr(out.differences);
  out.mean_difference = est.mean;
  out.std_error = est.std_error;
  return out;
}

PairedReport paired_simulate(const AgentDynamics& dyn, const FeedbackPolicy& population,
                             const SimConfig& cfg, const Deviation& deviation) {
  return paired_compare(dyn, population, population, deviation, cfg);
}

PairedReport paired_simulate(const LqModel& model, const VCoefficients& v, const SimConfig& cfg,
                             const Deviation& deviation) {
  require_valid(model);
  const CooperativePolicy phi(model, v);
  return paired_simulate(AgentDynamics::from_lq(model), phi, cfg, deviation);
}

double moment_audit(const CostReport& report) { return report.max_second_moment; }

namespace {

class CsvObserver final : public PathObserver {
 public:
  CsvObserver(std::ostream& os, std::uint64_t path) : os_(os), path_(path) {}
  void record(int, double t, const Matrix& X, const Matrix& U) override {
    char buf[40];
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", t);
      os_ << path_ << ',' << buf << ',' << (i + 1);
      for (Eigen::Index j = 0; j < X.cols(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", X(i, j));
        os_ << ',' << buf;
      }
      for (Eigen::Index j = 0; j < U.cols(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", U(i, j));
        os_ << ',' << buf;
      }
      os_ << '\n';
    }
  }

 private:
  std::ostream& os_;
  std::uint64_t path_;
};

}  // namespace

void dump_paths(std::ostream& os, const AgentDynamics& dyn, const FeedbackPolicy& population,
                const SimConfig& cfg, const Deviation& deviation) {
  cfg.check(dyn);
  const PathKernel kernel(dyn, population, cfg, deviation);
  const double rows = static_cast<double>(cfg.agents) * (kernel.steps() + 1) * cfg.paths;
  if (rows > kMaxDumpRows) throw ConfigError("path dump would exceed 1e7 rows");
  os << "path,t,agent";
  for (int j = 0; j < dyn.state_dim(); ++j) os << ",state_" << j;
  for (int j = 0; j < dyn.control_dim(); ++j) os << ",control_" << j;
  os << '\n';
  Vector agent_costs = Vector::Zero(cfg.agents);
  for (int p = 0; p < cfg.paths; ++p) {
    CsvObserver observer(os, static_cast<std::uint64_t>(p));
    kernel.run(static_cast<std::uint64_t>(p), nullptr, agent_costs, &observer);
  }
}

}  // namespace meanfield
