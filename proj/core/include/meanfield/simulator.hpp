#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "meanfield/lq_model.hpp"
#include "meanfield/value_synthesis.hpp"

namespace meanfield {

/// Per-agent dynamics dX = (A x + B u + G z) dt + D dW^i + D0 dW^0, where z is
/// the mean of the other agents, with running cost
///   |x - Gamma z - eta|_Q^2 + u'Ru + 2 u' C (x - Gamma z - eta)
/// and terminal cost |x - Gammaf z - etaf|_Qf^2.
struct AgentDynamics {
  Matrix A, B, G, D, D0;
  Matrix Q, R, Gamma;
  Vector eta;
  Matrix Qf, Gammaf;
  Vector etaf;
  Matrix cross;  // n1 x n, C above
  double horizon = 1.0;

  static AgentDynamics from_lq(const LqModel& model);

  int state_dim() const { return static_cast<int>(A.rows()); }
  int control_dim() const { return static_cast<int>(B.cols()); }
};

/// A symmetric feedback law evaluated for the whole population at once.
class FeedbackPolicy {
 public:
  virtual ~FeedbackPolicy() = default;
  /// states and others_mean are N x n (row i of others_mean averages every row
  /// of states except i); out is resized to N x n1.
  virtual void controls(double t, const Matrix& states, const Matrix& others_mean,
                        Matrix& out) const = 0;
};

/// The cooperative law phi of the LQ model, evaluated against mu^{-i}.
class CooperativePolicy final : public FeedbackPolicy {
 public:
  CooperativePolicy(const LqModel& model, const VCoefficients& v);
  void controls(double t, const Matrix& states, const Matrix& others_mean,
                Matrix& out) const override;

 private:
  const VCoefficients* v_;
  Matrix gain_;  // R^{-1} B'
};

/// What agent 1 plays; every other agent always follows the population law.
struct Deviation {
  enum class Kind { kNone, kZeroControl, kScaled, kConstant, kCustomFeedback };
  using Feedback = std::function<Vector(double t, const Matrix& states)>;

  Kind kind = Kind::kNone;
  double kappa = 1.0;
  Vector constant;
  Feedback feedback;
  std::string name;

  static Deviation none();
  static Deviation zero_control();
  static Deviation scaled(double kappa);
  static Deviation constant_control(Vector u0);
  static Deviation custom(std::string name, Feedback feedback);

  std::string label() const;
};

struct SimConfig {
  int agents = 2;
  int paths = 1;
  double dt = 0.01;
  std::uint64_t seed = 0;
  InitialDistribution initial;
  /// 0 = use MEANFIELD_THREADS (default: hardware concurrency).
  int threads = 0;
  /// Optional key per agent slot for noise and initial draws (default i + 1).
  std::vector<std::uint32_t> agent_labels;

  /// Number of Euler steps; throws ConfigError if dt does not divide the horizon.
  int steps(double horizon) const;
  void check(const AgentDynamics& dynamics) const;
};

struct CostReport {
  std::vector<double> path_costs;  // J_soc per path
  double mean = 0.0;
  double std_error = 0.0;
  Vector agent_mean_costs;
  /// max over agents of the path-averaged |X_t^i|^2, per Euler step.
  Vector second_moment_by_step;
  double max_second_moment = 0.0;
  int agents = 0;
  int paths = 0;
  int steps = 0;
};

struct PairedReport {
  CostReport baseline;
  CostReport deviated;
  std::vector<double> differences;  // deviated - baseline, per path
  double mean_difference = 0.0;
  double std_error = 0.0;
};

/// Worker count from MEANFIELD_THREADS, else the hardware concurrency.
int default_thread_count();

CostReport simulate(const AgentDynamics& dynamics, const FeedbackPolicy& population,
                    const SimConfig& config, const Deviation& deviation = Deviation::none());

CostReport simulate(const LqModel& model, const VCoefficients& v, const SimConfig& config,
                    const Deviation& deviation = Deviation::none());

/// Baseline (everyone plays `baseline`) against an alternative profile on the
/// same initial draws and Brownian increments.
PairedReport paired_compare(const AgentDynamics& dynamics, const FeedbackPolicy& baseline,
                            const FeedbackPolicy& alternative, const Deviation& alternative_deviation,
                            const SimConfig& config);

PairedReport paired_simulate(const AgentDynamics& dynamics, const FeedbackPolicy& population,
                             const SimConfig& config, const Deviation& deviation);

PairedReport paired_simulate(const LqModel& model, const VCoefficients& v, const SimConfig& config,
                             const Deviation& deviation);

/// Largest sample second moment max_{i,t} E|X_t^i|^2 seen in a run.
double moment_audit(const CostReport& report);
constexpr double kMomentWarningLevel = 1e6;

/// CSV rows path,t,agent,state_0..,control_0.. for small runs
/// (agents * (steps + 1) * paths <= 1e7).
void dump_paths(std::ostream& os, const AgentDynamics& dynamics, const FeedbackPolicy& population,
                const SimConfig& config, const Deviation& deviation = Deviation::none());

}  // namespace meanfield
