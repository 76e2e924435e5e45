#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "fracvort/fbm.hpp"
#include "fracvort/spectral.hpp"

namespace fracvort {

/// Which semigroup weights the sum: the heat flow, or the identity surrogate
/// used for scalar and oracle checks.
enum class SemigroupMode { heat, identity };

/// Declared regularity of an integrand: Y in C(B_{alpha-1/2}) and
/// C^gamma(B_{alpha-gamma-1/2}).
struct IntegrandRegularity {
  SobolevIndex alpha{1.5};
  double gamma = 0.7;
};

/// Y sampled at every point of a dyadic grid. Coarser levels sub-sample.
class IntegrandTrace {
 public:
  IntegrandTrace(DyadicGrid grid, std::vector<FourierField> values, IntegrandRegularity regularity);
  /// Evaluates y(t) at every grid point.
  static IntegrandTrace from_function(const DyadicGrid& grid, const std::function<FourierField(double)>& y,
                                      IntegrandRegularity regularity);

  const DyadicGrid& grid() const noexcept { return grid_; }
  const IntegrandRegularity& regularity() const noexcept { return regularity_; }
  int grid_n() const noexcept { return values_.front().grid_n(); }
  std::span<const FourierField> values() const noexcept { return values_; }
  /// Y at point j of the level-k grid.
  const FourierField& at(int level, std::size_t j) const;

  /// max_t |Y_t|_{alpha - 1/2}
  double sup_norm() const;
  /// Hölder seminorm sup |Y_t - Y_s|_{alpha-gamma-1/2} / |t - s|^gamma over all
  /// pairs of a sub-sampled grid (level <= max_level).
  double holder_norm(int max_level = 7) const;

 private:
  DyadicGrid grid_;
  std::vector<FourierField> values_;
  IntegrandRegularity regularity_;
};

/// I^k_{s,t} = sum over level-k intervals [t_n, t_{n+1}] inside [s, t] of
/// S_{t - t_n} Y_{t_n} (W_{t_{n+1}} - W_{t_n}).
/// s and t must be points of the integrand grid; partial intervals are dropped.
FourierField dyadic_sum(const IntegrandTrace& y, const FbmPath& w, double t, int level,
                        SemigroupMode mode = SemigroupMode::heat);
FourierField dyadic_sum(const IntegrandTrace& y, const FbmPath& w, double s, double t, int level,
                        SemigroupMode mode = SemigroupMode::heat);

/// I^k_{t_m} for every point t_m of the level-k grid, in one pass.
std::vector<FourierField> dyadic_sum_series(const IntegrandTrace& y, const FbmPath& w, int level,
                                            SemigroupMode mode = SemigroupMode::heat);

/// Scalar surrogate with S = identity: a left-point Riemann-Stieltjes sum
/// of y (sampled on `grid`) against w.
double dyadic_sum_scalar(std::span<const double> y, const DyadicGrid& grid, const FbmPath& w, double t, int level);

/// Fractional gains tested for the spatial-regularity ladder.
inline constexpr std::array<double, 5> kSigmaLadder{0.0, 0.1, 0.2, 0.3, 0.4};

struct CauchyGap {
  int level = 0;  // gap between levels `level` and `level + 1`
  double gap_alpha = 0.0;
  double gap_alpha_minus_gamma = 0.0;
};

struct YoungIntegralResult {
  FourierField value;
  double time = 0.0;
  int level_used = 0;
  double cauchy_gap = 0.0;
  /// (|Y|_{0,alpha-1/2} + |Y|_{gamma,alpha-gamma-1/2}) K_W^gamma t^{gamma-1/2}, constant 1.
  double bound_certificate = 0.0;
  bool converged = false;
  std::vector<CauchyGap> gaps;
  /// ladder_norms[i][j] = |I^{k_i}_t|_{alpha - 1/2 + sigma_j} for each level visited.
  std::vector<std::array<double, kSigmaLadder.size()>> ladder_norms;
};

struct YoungOptions {
  double tol = 1e-8;
  int k_max = 16;
  int k_min = 0;
  SemigroupMode mode = SemigroupMode::heat;
  /// Level at which K_W^gamma is measured (all pairs, so capped for cost).
  int holder_level_cap = 12;
};

/// Refines k until |I^k_t - I^{k+1}_t|_alpha < tol or k + 1 reaches k_max
/// (or the finest level available), in which case converged is false.
/// Requires gamma > 1/2.
YoungIntegralResult young_integral(const IntegrandTrace& y, const FbmPath& w, double t, const YoungOptions& options = {});

struct ScalarYoungResult {
  double value = 0.0;
  int level_used = 0;
  double cauchy_gap = 0.0;
  bool converged = false;
};
ScalarYoungResult young_integral_scalar(std::span<const double> y, const DyadicGrid& grid, const FbmPath& w, double t,
                                        double tol = 1e-8, int k_max = 16);

/// Local germ S_{t-u} Y_u W_{u,t}.
FourierField one_step_increment(const FourierField& y_u, double w_inc, double t_minus_u);

struct RegularityReport {
  double gamma_measured = 0.0;
  double sigma_gain = 0.0;
  /// Every value in the series is exactly zero; gamma_measured is meaningless.
  bool zero_series = false;
};

/// Time series of integrals I_{t_m} at the points of one dyadic grid, each
/// with its refinement ladder.
struct ConvolutionSeries {
  DyadicGrid grid;
  IntegrandRegularity regularity;
  std::vector<YoungIntegralResult> results;
};

/// gamma_measured: slope of log2 max_m |I_{t_{m+l}} - I_{t_m}|_{alpha-gamma}
/// against log2 of the lag, over dyadic lags up to max(4, span/16) grid steps.
/// sigma_gain: largest ladder sigma whose norm grows
/// by less than 5% per level over the last two refinements.
RegularityReport convolution_regularity_report(const ConvolutionSeries& series);

/// Builds the series for every point of the level-`series_level` grid with
/// levels up to `k_max`, reusing one pass per level.
ConvolutionSeries convolution_series(const IntegrandTrace& y, const FbmPath& w, int series_level, int k_min, int k_max,
                                     SemigroupMode mode = SemigroupMode::heat);

/// CSV rows {k, gap_alpha, gap_alpha_minus_gamma}.
void write_gap_csv(std::ostream& out, std::span<const CauchyGap> gaps);

}  // namespace fracvort
