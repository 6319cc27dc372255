#include "meanfield/lq_model.hpp"

#include <cmath>
#include <sstream>

#include "meanfield/errors.hpp"

namespace meanfield {

namespace {

constexpr double kSymmetryTolerance = 1e-12;

bool shape_is(const Matrix& m, Eigen::Index rows, Eigen::Index cols) {
  return m.rows() == rows && m.cols() == cols;
}

bool symmetric(const Matrix& m) {
  const double scale = std::max(1.0, m.norm());
  return (m - m.transpose()).norm() <= kSymmetryTolerance * scale;
}

double smallest_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

LqModel LqModel::zero(int n, int n1, int n2, int n3, double horizon) {
  LqModel m;
  m.A = Matrix::Zero(n, n);
  m.B = Matrix::Zero(n, n1);
  m.G = Matrix::Zero(n, n);
  m.D = Matrix::Zero(n, n2);
  m.D0 = Matrix::Zero(n, n3);
  m.Q = Matrix::Zero(n, n);
  m.R = Matrix::Identity(n1, n1);
  m.Gamma = Matrix::Zero(n, n);
  m.eta = Vector::Zero(n);
  m.Qf = Matrix::Zero(n, n);
  m.Gammaf = Matrix::Zero(n, n);
  m.etaf = Vector::Zero(n);
  m.horizon = horizon;
  return m;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << violations[i];
  }
  return os.str();
}

ValidationReport validate(const LqModel& m) {
  ValidationReport report;
  auto fail = [&](std::string msg) { report.violations.push_back(std::move(msg)); };

  const Eigen::Index n = m.A.rows();
  const Eigen::Index n1 = m.B.cols();
  if (n == 0 || m.A.cols() != n) fail("A must be a non-empty square matrix");
  if (m.B.rows() != n || n1 == 0) fail("B must have n rows and at least one column");
  if (!shape_is(m.G, n, n)) fail("G must be n x n");
  if (m.D.rows() != n) fail("D must have n rows");
  if (m.D0.rows() != n) fail("D0 must have n rows");
  if (!shape_is(m.Q, n, n)) fail("Q must be n x n");
  if (!shape_is(m.R, n1, n1)) fail("R must be n1 x n1");
  if (!shape_is(m.Gamma, n, n)) fail("Gamma must be n x n");
  if (m.eta.size() != n) fail("eta must have n entries");
  if (!shape_is(m.Qf, n, n)) fail("Qf must be n x n");
  if (!shape_is(m.Gammaf, n, n)) fail("Gammaf must be n x n");
  if (m.etaf.size() != n) fail("etaf must have n entries");
  if (!(m.horizon > 0.0) || !std::isfinite(m.horizon)) fail("T must be positive and finite");
  if (!report.ok()) return report;

  const std::pair<const char*, const Matrix*> all[] = {
      {"A", &m.A},   {"B", &m.B},   {"G", &m.G},     {"D", &m.D},   {"D0", &m.D0},
      {"Q", &m.Q},   {"R", &m.R},   {"Gamma", &m.Gamma}, {"Qf", &m.Qf}, {"Gammaf", &m.Gammaf}};
  for (const auto& [name, mat] : all) {
    if (!mat->allFinite()) fail(std::string(name) + " has non-finite entries");
  }
  if (!m.eta.allFinite()) fail("eta has non-finite entries");
  if (!m.etaf.allFinite()) fail("etaf has non-finite entries");
  if (!report.ok()) return report;

  const std::pair<const char*, const Matrix*> psd[] = {{"Q", &m.Q}, {"Qf", &m.Qf}};
  for (const auto& [name, mat] : psd) {
    if (!symmetric(*mat)) {
      fail(std::string(name) + " asymmetric");
    } else if (smallest_eigenvalue(*mat) < -kSymmetryTolerance * std::max(1.0, mat->norm())) {
      fail(std::string(name) + " not positive semidefinite");
    }
  }
  if (!symmetric(m.R)) {
    fail("R asymmetric");
  } else {
    Eigen::LLT<Matrix> llt(m.R);
    if (llt.info() != Eigen::Success || !(smallest_eigenvalue(m.R) > 0.0)) {
      fail("R not positive definite");
    }
  }
  return report;
}

void require_valid(const LqModel& model) {
  const auto report = validate(model);
  if (!report.ok()) throw ValidationError("invalid LQ model: " + report.summary());
}

InitialDistribution InitialDistribution::point_mass(Vector at) {
  InitialDistribution d;
  d.kind = Kind::kPointMass;
  d.mean = std::move(at);
  return d;
}

InitialDistribution InitialDistribution::gaussian(Vector mean, Matrix covariance) {
  InitialDistribution d;
  d.kind = Kind::kGaussian;
  d.mean = std::move(mean);
  d.covariance = std::move(covariance);
  return d;
}

InitialDistribution InitialDistribution::uniform_box(Vector center, Vector half_widths) {
  InitialDistribution d;
  d.kind = Kind::kUniformBox;
  d.mean = std::move(center);
  d.half_widths = std::move(half_widths);
  return d;
}

void InitialDistribution::check() const {
  if (mean.size() == 0 || !mean.allFinite()) throw ConfigError("initial: mean must be finite and non-empty");
  switch (kind) {
    case Kind::kPointMass:
      break;
    case Kind::kGaussian:
      if (!shape_is(covariance, mean.size(), mean.size()) || !covariance.allFinite()) {
        throw ConfigError("initial: covariance must be a finite n x n matrix");
      }
      if (!symmetric(covariance)) throw ConfigError("initial: covariance asymmetric");
      if (smallest_eigenvalue(covariance) < -1e-12 * std::max(1.0, covariance.norm())) {
        throw ConfigError("initial: covariance not positive semidefinite");
      }
      break;
    case Kind::kUniformBox:
      if (half_widths.size() != mean.size() || !half_widths.allFinite() ||
          (half_widths.array() < 0.0).any()) {
        throw ConfigError("initial: half widths must be n finite non-negative numbers");
      }
      break;
  }
}

Matrix psd_square_root(const Matrix& covariance) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (covariance + covariance.transpose()));
  Vector roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

InitialSampler::InitialSampler(InitialDistribution dist) : dist_(std::move(dist)) {
  dist_.check();
  if (dist_.kind == InitialDistribution::Kind::kGaussian) root_ = psd_square_root(dist_.covariance);
}

Vector InitialSampler::draw(const GaussianSource& source, std::uint64_t path,
                            std::uint32_t label) const {
  const int n = dist_.dim();
  switch (dist_.kind) {
    case InitialDistribution::Kind::kPointMass:
      return dist_.mean;
    case InitialDistribution::Kind::kGaussian: {
      Vector z(n);
      source.fill(std::span<double>(z.data(), n), path, 0, label, NoiseDomain::kInitialState);
      return dist_.mean + root_ * z;
    }
    case InitialDistribution::Kind::kUniformBox: {
      Vector u(n);
      source.fill_uniform(std::span<double>(u.data(), n), path, 0, label,
                          NoiseDomain::kInitialState);
      return dist_.mean + dist_.half_widths.cwiseProduct(2.0 * u - Vector::Ones(n));
    }
  }
  return dist_.mean;
}

Vector draw_initial_state(const InitialDistribution& dist, const GaussianSource& source,
                          std::uint64_t path, std::uint32_t label) {
  return InitialSampler(dist).draw(source, path, label);
}

Matrix sample_initial_states(const InitialDistribution& dist, int count,
                             const GaussianSource& source, std::uint64_t path) {
  const InitialSampler sampler(dist);
  Matrix states(count, dist.dim());
  for (int i = 0; i < count; ++i) {
    states.row(i) = sampler.draw(source, path, static_cast<std::uint32_t>(i + 1)).transpose();
  }
  return states;
}

}  // namespace meanfield
