#include "meanfield/rng.hpp"

#include <cmath>
#include <numbers>

namespace meanfield {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(p);
  hi = static_cast<std::uint32_t>(p >> 32);
}

// 53 random bits mapped to the open interval (0, 1).
inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

Philox4x32::Counter block(const Philox4x32::Key& key, std::uint64_t path, std::uint32_t step,
                          std::uint32_t agent, NoiseDomain domain, std::uint32_t index) {
  // Word 3 packs the domain (top 4 bits), the high bits of the path (next 8)
  // and the block index within this (path, step, agent) slot (low 20).
  const auto path_lo = static_cast<std::uint32_t>(path);
  const auto path_hi = static_cast<std::uint32_t>(path >> 32) & 0xFFu;
  const std::uint32_t w3 = (static_cast<std::uint32_t>(domain) << 28) | (path_hi << 20) |
                           (index & 0xFFFFFu);
  return Philox4x32::generate({agent, step, path_lo, w3}, key);
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kM0, ctr[0], lo0, hi0);
    mulhilo(kM1, ctr[2], lo1, hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

GaussianSource::GaussianSource(std::uint64_t seed) noexcept
    : seed_(seed),
      key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

void GaussianSource::fill(std::span<double> out, std::uint64_t path, std::uint32_t step,
                          std::uint32_t agent, NoiseDomain domain) const noexcept {
  // Box-Muller: one Philox block yields two normals.
  const std::size_t n = out.size();
  for (std::size_t j = 0; j < n; j += 2) {
    const auto r = block(key_, path, step, agent, domain, static_cast<std::uint32_t>(j / 2));
    const double u1 = to_unit(r[0], r[1]);
    const double u2 = to_unit(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out[j] = radius * std::cos(angle);
    if (j + 1 < n) out[j + 1] = radius * std::sin(angle);
  }
}

void GaussianSource::fill_uniform(std::span<double> out, std::uint64_t path, std::uint32_t step,
                                  std::uint32_t agent, NoiseDomain domain) const noexcept {
  const std::size_t n = out.size();
  for (std::size_t j = 0; j < n; j += 2) {
    const auto r = block(key_, path, step, agent, domain, static_cast<std::uint32_t>(j / 2));
    out[j] = to_unit(r[0], r[1]);
    if (j + 1 < n) out[j + 1] = to_unit(r[2], r[3]);
  }
}

}  // namespace meanfield
