#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace fracvort {

/// Hurst index of the driving fractional Brownian motion.
/// Construction accepts (0, 1); estimation routines call require_long_memory().
class HurstParam {
 public:
  explicit HurstParam(double value);

  double value() const noexcept { return value_; }
  /// Throws DomainError unless value > 1/2.
  void require_long_memory() const;

  friend bool operator==(const HurstParam&, const HurstParam&) = default;

 private:
  double value_;
};

/// Uniform dyadic grid t_j = j T / 2^level, j = 0..2^level.
class DyadicGrid {
 public:
  DyadicGrid(int level, double horizon);

  int level() const noexcept { return level_; }
  double horizon() const noexcept { return horizon_; }
  std::size_t intervals() const noexcept { return std::size_t{1} << level_; }
  std::size_t points() const noexcept { return intervals() + 1; }
  double mesh() const noexcept { return horizon_ / static_cast<double>(intervals()); }
  double time(std::size_t j) const noexcept { return horizon_ * static_cast<double>(j) / static_cast<double>(intervals()); }

  /// Index of t on this grid; throws DomainError if t is not a grid point
  /// (relative tolerance 1e-12 of the mesh).
  std::size_t index_of(double t) const;
  bool contains(double t) const noexcept;
  /// Number of complete intervals inside [0, t].
  std::size_t complete_intervals(double t) const noexcept;
  DyadicGrid coarsened(int level) const;

  friend bool operator==(const DyadicGrid&, const DyadicGrid&) = default;

 private:
  int level_;
  double horizon_;
};

/// Sample path of W^H on a dyadic grid. values[0] == 0.
struct FbmPath {
  HurstParam hurst;
  DyadicGrid grid;
  std::vector<double> values;
  std::uint64_t seed = 0;

  double at(double t) const { return values[grid.index_of(t)]; }
  /// Exact restriction to a coarser dyadic level (pure sub-sampling).
  FbmPath restricted(int level) const;
  /// Increments W_{t_{j+1}} - W_{t_j} at the given level (<= grid level).
  std::vector<double> increments(int level) const;
};

/// sup over grid pairs of |W_t - W_s| / |t - s|^gamma.
struct HolderEstimate {
  double exponent = 0.0;
  double constant = 0.0;
  int grid_level_used = 0;
  /// Set when exponent >= H: the constant may diverge under refinement.
  bool exponent_at_or_above_hurst = false;
};

/// Two-point covariance of unit-normalised fBm, E[W_s W_t].
double fbm_covariance(double s, double t, HurstParam hurst);

/// Autocovariance of unit-mesh fractional Gaussian noise at integer lag.
double fgn_autocovariance(long lag, HurstParam hurst);

struct GeneratorOptions {
  int max_level = 20;
  /// Largest increment count the dense Cholesky fallback accepts.
  std::size_t cholesky_max_n = 2048;
  /// Skip circulant embedding; used to test the fallback route.
  bool force_cholesky = false;
};

/// Exact-law fBm on the grid: circulant embedding of the increment covariance,
/// falling back to dense Cholesky if the embedding is not nonnegative definite.
/// Pure function of (hurst, grid, seed).
FbmPath generate_path(HurstParam hurst, const DyadicGrid& grid, std::uint64_t seed,
                      const GeneratorOptions& options = {});

/// Ensemble of paths with seeds seed + i, generated in parallel.
std::vector<FbmPath> generate_ensemble(HurstParam hurst, const DyadicGrid& grid, std::uint64_t seed,
                                       std::size_t count, const GeneratorOptions& options = {});

/// E[(dW_i)^2 (dW_j)^2] for mesh 1/n, i != j.
double squared_increment_cross_moment(long i, long j, long n, HurstParam hurst);
/// E[(dW_i)^4] = 3 n^{-4H}.
double squared_increment_fourth_moment(long n, HurstParam hurst);

/// f_H(a) = (1-a)^{2H} + (1+a)^{2H} - 2, a in (0, 1].
/// The raw-exponent overloads also accept the smooth endpoint h = 1.
double f_hurst(double a, double h);
double f_hurst(double a, HurstParam hurst);
/// Supremum of f_H(a)/a^2 over (0, 1] by dense scan, including the a -> 0 limit 2H(2H-1).
double c_hurst(double h, std::size_t scan_points = 100000);
double c_hurst(HurstParam hurst, std::size_t scan_points = 100000);

enum class HolderUse { diagnostic, estimator };

/// All-pairs Hölder constant of the path at its own grid level.
/// Estimator use rejects gamma <= 1/2.
HolderEstimate holder_constant(const FbmPath& path, double gamma, HolderUse use = HolderUse::diagnostic);
/// Same measurement on a raw series sampled on a grid.
double holder_seminorm(std::span<const double> values, const DyadicGrid& grid, double gamma);

/// FBM1 binary dump: "FBM1", H (f64), level (u32), horizon (f64), seed (u64),
/// then 2^level + 1 f64 values, all little-endian.
void write_fbm_binary(std::ostream& out, const FbmPath& path);
FbmPath read_fbm_binary(std::istream& in);
/// CSV with header "t,W".
void write_fbm_csv(std::ostream& out, const FbmPath& path);

}  // namespace fracvort
