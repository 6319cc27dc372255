#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace meanfield {

/// Philox4x32-10 block cipher (Salmon et al., SC'11). Stateless: every output
/// block is a pure function of (counter, key).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;
  static Counter generate(Counter counter, Key key) noexcept;
};

/// Which family of draws a counter belongs to; keeps initial-state draws and
/// Brownian increments from ever sharing a counter.
enum class NoiseDomain : std::uint32_t { kIncrement = 0, kInitialState = 1, kAuxiliary = 2 };

/// Standard normals keyed on (seed, path, step, agent). Agent index 0 is
/// reserved for the common noise W^0; agents 1..N carry their own W^i.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }

  /// Fills `out` with independent N(0,1) draws. Identical arguments always
  /// produce identical values.
  void fill(std::span<double> out, std::uint64_t path, std::uint32_t step,
            std::uint32_t agent, NoiseDomain domain = NoiseDomain::kIncrement) const noexcept;

  /// Uniform(0,1) draws, open interval.
  void fill_uniform(std::span<double> out, std::uint64_t path, std::uint32_t step,
                    std::uint32_t agent, NoiseDomain domain) const noexcept;

 private:
  std::uint64_t seed_;
  Philox4x32::Key key_;
};

}  // namespace meanfield
