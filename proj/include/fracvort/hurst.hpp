#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fracvort/fbm.hpp"
#include "fracvort/solver.hpp"

namespace fracvort {

/// Sum of squared level-k increments over the complete level-k intervals
/// inside [0, t]; `x` is sampled on `grid` (level >= k).
double quadratic_variation(std::span<const double> x, const DyadicGrid& grid, int k, double t);

/// Default QV window: the horizon minus one level-k_min interval.
double default_qv_window(const DyadicGrid& grid, int k_min);

struct QVLadder {
  int k_min = 0;
  int k_max = 0;
  double t = 0.0;
  std::vector<double> qv;
  /// mesh_k^{1-2H} qv_k; empty without an H hypothesis.
  std::vector<double> scaled_qv;
  /// Trapezoid integral of x_s^2 over [0, t] when a noise channel is supplied.
  std::optional<double> target;
};

QVLadder qv_ladder(std::span<const double> x, const DyadicGrid& grid, int k_min, int k_max, double t,
                   std::optional<double> hurst = std::nullopt, std::span<const double> noise = {});

struct Prop15Row {
  long n = 0;
  double mse = 0.0;
  double standard_error = 0.0;
};

struct Prop15Table {
  double hurst = 0.0;
  double t = 0.0;
  std::size_t ensemble = 0;
  std::vector<Prop15Row> rows;
  /// -d log2(mse) / d log2(n); NaN when every mse is zero (t = 0).
  double slope = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// Monte Carlo estimate of E[(n^{2H-1} sum_{j < nt} (dW_j)^2 - t)^2] at mesh
/// 1/n for each n (powers of two), on paths of unit horizon, 0 <= t <= 1.
/// Threshold min(1, 4 - 4H) - 0.2. Accepts H = 1/2 as the Brownian reference.
/// Refuses ensembles below 1000 (CapacityError).
Prop15Table prop15_monte_carlo(double hurst, const std::vector<long>& n_list, double t, std::size_t ensemble,
                               std::uint64_t seed);

struct ScaledQVCheck {
  std::vector<int> levels;
  std::vector<double> scaled_qv;
  std::vector<double> gap;
  double target = 0.0;
  /// 3-level moving average of the gap is non-increasing.
  bool monotone_trend = false;
  /// gap at k_max <= 0.15 target.
  bool within_band = false;
  /// Target too small to judge; try another test mode.
  bool inconclusive = false;
};

/// Compares the scaled QV ladder of x against int_0^t noise^2 ds under the
/// true H.
ScaledQVCheck scaled_qv_limit_check(std::span<const double> x, std::span<const double> noise, const DyadicGrid& grid,
                                    double hurst, int k_min, int k_max, std::optional<double> t = std::nullopt);
ScaledQVCheck scaled_qv_limit_check(const ObservableSeries& series, Channel channel, double hurst, int k_min, int k_max);

struct EstimatorReport {
  std::vector<int> levels;
  std::vector<double> qv;  // qv at levels and at k_max + 1
  std::vector<double> ratio_sequence;
  /// H_k = (log2(qv_k / qv_{k+1}) + 1) / 2, NaN where the ratio is undefined.
  std::vector<double> h_sequence;
  /// Entries outside [0, 1.5]; values are kept as computed.
  std::vector<bool> out_of_range;
  std::vector<bool> undefined;
  double final_h = 0.0;
  bool final_defined = false;
  /// H implied by the log2 QV slope across all levels: (1 - slope) / 2.
  double slope_h = 0.0;
  double t = 0.0;
  std::string channel = "raw";
  bool inconclusive = false;
};

/// H_k for k = k_min..k_max (the series needs level k_max + 1).
EstimatorReport hurst_estimate(std::span<const double> x, const DyadicGrid& grid, int k_min, int k_max,
                               std::optional<double> t = std::nullopt);

struct SolverEstimate {
  EstimatorReport real;
  EstimatorReport imag;
  /// Both channels carry no fractional noise.
  bool inconclusive = false;
};

/// Estimates on both real channels of X = <w, exp(i k.x)>. A channel whose
/// noise component vanishes is flagged inconclusive.
SolverEstimate estimate_from_solver(const SolverState& state, const ModelConfig& config, Wavevector mode, int k_min,
                                    int k_max);

/// y_t = int_0^t a(s, W_s) ds + int_0^t x(s, W_s) dW_s by left-point sums on the
/// path grid (exact for piecewise-constant integrands, Young-consistent otherwise).
std::vector<double> synthetic_young_sde(const FbmPath& w, const std::function<double(double, double)>& a,
                                        const std::function<double(double, double)>& x);

/// Single-path H_k of raw fBm for `count` seeds seed..seed+count-1, in parallel.
std::vector<double> fbm_estimates(HurstParam hurst, const DyadicGrid& grid, int k, std::uint64_t seed,
                                  std::size_t count);

struct EnsembleSummary {
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  std::size_t count = 0;
};
EnsembleSummary summarize(std::vector<double> values);

/// CSV rows k, qv, scaled_qv, ratio, h_k, channel (scaled_qv uses `hurst`
/// when given, otherwise the row's own H_k).
void write_estimator_csv(std::ostream& out, const EstimatorReport& report, const DyadicGrid& grid,
                         std::optional<double> hurst = std::nullopt, bool header = true);

}  // namespace fracvort
