#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "meanfield/ode.hpp"
#include "meanfield/rng.hpp"

namespace meanfield {

/// Linear dynamics dX^i = (A X^i + B u^i + G X^(-i)) dt + D dW^i + D0 dW^0 and
/// cost |X^i - Gamma X^(-i) - eta|_Q^2 + u^T R u with terminal weight Qf,
/// tracking matrix Gammaf and offset etaf.
struct LqModel {
  Matrix A, B, G, D, D0;
  Matrix Q, R, Gamma;
  Vector eta;
  Matrix Qf, Gammaf;
  Vector etaf;
  double horizon = 1.0;

  int state_dim() const { return static_cast<int>(A.rows()); }
  int control_dim() const { return static_cast<int>(B.cols()); }
  int idiosyncratic_noise_dim() const { return static_cast<int>(D.cols()); }
  int common_noise_dim() const { return static_cast<int>(D0.cols()); }

  /// All-zero model of the given shape: no dynamics, no noise, no cost
  /// except R = I.
  static LqModel zero(int n, int n1, int n2 = 1, int n3 = 1, double horizon = 1.0);
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const noexcept { return violations.empty(); }
  std::string summary() const;
};

/// Total: never throws, lists every violated requirement.
ValidationReport validate(const LqModel& model);

/// Throws ValidationError carrying the report summary when validation fails.
void require_valid(const LqModel& model);

struct InitialDistribution {
  enum class Kind { kGaussian, kPointMass, kUniformBox };

  Kind kind = Kind::kPointMass;
  Vector mean;
  Matrix covariance;   // kGaussian
  Vector half_widths;  // kUniformBox

  static InitialDistribution point_mass(Vector at);
  static InitialDistribution gaussian(Vector mean, Matrix covariance);
  static InitialDistribution uniform_box(Vector center, Vector half_widths);

  int dim() const { return static_cast<int>(mean.size()); }
  /// Throws ConfigError on a non-PSD covariance, negative widths or shape mismatch.
  void check() const;
};

/// Precomputes the coloring factor of a distribution once.
class InitialSampler {
 public:
  explicit InitialSampler(InitialDistribution dist);
  const InitialDistribution& distribution() const noexcept { return dist_; }
  Vector draw(const GaussianSource& source, std::uint64_t path, std::uint32_t label) const;

 private:
  InitialDistribution dist_;
  Matrix root_;
};

/// One i.i.d. draw for agent slot `label` of Monte Carlo path `path`.
Vector draw_initial_state(const InitialDistribution& dist, const GaussianSource& source,
                          std::uint64_t path, std::uint32_t label);

/// count x n matrix of i.i.d. draws (row i keyed on label i+1).
Matrix sample_initial_states(const InitialDistribution& dist, int count,
                             const GaussianSource& source, std::uint64_t path = 0);

/// Symmetric square root used to color Gaussian draws.
Matrix psd_square_root(const Matrix& covariance);

}  // namespace meanfield
