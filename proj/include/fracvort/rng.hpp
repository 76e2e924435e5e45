#pragma once

#include <array>
#include <cstdint>

namespace fracvort {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// Output is a pure function of (counter, key), so any variate of a stream
/// can be produced independently of the others.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) noexcept;
};

/// Standard normal quantile function, Wichura's AS241 (PPND16).
/// Accurate to about 1e-16 relative on (0, 1).
double inverse_normal_cdf(double p);

/// Stream of standard normals keyed by a 64-bit seed. normal(i) is
/// Phi^{-1}(u_i) where u_i is built from 64 bits of Philox output; the
/// mapping is fixed, so a (seed, i) pair yields the same double everywhere.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) noexcept;

  double uniform(std::uint64_t index) const noexcept;
  double normal(std::uint64_t index) const noexcept;
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  Philox4x32::Key key_;
};

}  // namespace fracvort
