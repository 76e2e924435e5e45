#include "fracvort/young.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "fracvort/errors.hpp"
#include "fracvort/stats.hpp"

namespace fracvort {

namespace {

std::vector<double> sobolev_weights(int grid_n, double alpha) {
  const FourierField probe(grid_n);
  std::vector<double> w(probe.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::pow(1.0 + probe.wavevector(i).norm_squared(), 2.0 * alpha);
  return w;
}

double weighted_norm(std::span<const complex> c, const std::vector<double>& weights) {
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) s += weights[i] * std::norm(c[i]);
  return std::sqrt(s);
}

double weighted_distance(std::span<const complex> a, std::span<const complex> b, const std::vector<double>& weights) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += weights[i] * std::norm(a[i] - b[i]);
  return std::sqrt(s);
}

void check_compatible(const DyadicGrid& ygrid, const FbmPath& w, int level) {
  if (std::fabs(ygrid.horizon() - w.grid.horizon()) > 1e-12 * ygrid.horizon())
    throw DomainError("integrand and driver horizons differ");
  if (level < 0 || level > ygrid.level() || level > w.grid.level())
    throw DomainError("sum level " + std::to_string(level) + " exceeds the integrand or driver level");
}

// Level-k recursion A_{m+1} = S_h(A_m + Y_m dW_m), so that A_m = I^k_{t_m}.
// Intervals n in [n0, n1) are summed; `visit(m, A)` sees the accumulator at
// each t_m, m = n0..n1.
template <class Visit>
void accumulate(const IntegrandTrace& y, const FbmPath& w, int level, std::size_t n0, std::size_t n1, SemigroupMode mode,
                Visit&& visit) {
  const DyadicGrid grid = y.grid().coarsened(level);
  const std::size_t wstride = std::size_t{1} << (w.grid.level() - level);
  const int n = y.grid_n();
  const std::vector<double> mult = mode == SemigroupMode::heat ? heat_multipliers(n, grid.mesh()) : std::vector<double>{};
  FourierField acc(n);
  auto a = acc.coeffs();
  visit(n0, acc);
  for (std::size_t m = n0; m < n1; ++m) {
    const double dw = w.values[(m + 1) * wstride] - w.values[m * wstride];
    const auto ym = y.at(level, m).coeffs();
    if (mode == SemigroupMode::heat) {
      for (std::size_t i = 0; i < a.size(); ++i) a[i] = (a[i] + ym[i] * dw) * mult[i];
    } else {
      for (std::size_t i = 0; i < a.size(); ++i) a[i] += ym[i] * dw;
    }
    visit(m + 1, acc);
  }
}

std::array<double, kSigmaLadder.size()> ladder(const FourierField& f, double alpha) {
  std::array<double, kSigmaLadder.size()> out{};
  for (std::size_t j = 0; j < kSigmaLadder.size(); ++j)
    out[j] = sobolev_norm(f, SobolevIndex(alpha - 0.5 + kSigmaLadder[j]));
  return out;
}

double certificate(const IntegrandTrace& y, const FbmPath& w, double t, int level, int cap) {
  const double gamma = y.regularity().gamma;
  const int lw = std::min({level, cap, w.grid.level()});
  const double kw = holder_seminorm(w.restricted(lw).values, w.grid.coarsened(lw), gamma);
  return (y.sup_norm() + y.holder_norm()) * kw * std::pow(t, gamma - 0.5);
}

}  // namespace

IntegrandTrace::IntegrandTrace(DyadicGrid grid, std::vector<FourierField> values, IntegrandRegularity regularity)
    : grid_(grid), values_(std::move(values)), regularity_(regularity) {
  if (values_.size() != grid_.points()) throw DomainError("integrand trace needs one field per grid point");
  const int n = values_.front().grid_n();
  for (const auto& v : values_)
    if (v.grid_n() != n) throw ConfigError("integrand fields must share one grid size");
}

IntegrandTrace IntegrandTrace::from_function(const DyadicGrid& grid, const std::function<FourierField(double)>& y,
                                             IntegrandRegularity regularity) {
  std::vector<FourierField> values;
  values.reserve(grid.points());
  for (std::size_t j = 0; j < grid.points(); ++j) values.push_back(y(grid.time(j)));
  return IntegrandTrace(grid, std::move(values), regularity);
}

const FourierField& IntegrandTrace::at(int level, std::size_t j) const {
  if (level > grid_.level()) throw DomainError("integrand is not available at level " + std::to_string(level));
  return values_[j << (grid_.level() - level)];
}

double IntegrandTrace::sup_norm() const {
  const auto weights = sobolev_weights(grid_n(), regularity_.alpha.alpha() - 0.5);
  double best = 0.0;
  for (const auto& v : values_) best = std::max(best, weighted_norm(v.coeffs(), weights));
  return best;
}

double IntegrandTrace::holder_norm(int max_level) const {
  const int level = std::min(max_level, grid_.level());
  const DyadicGrid coarse = grid_.coarsened(level);
  const double gamma = regularity_.gamma;
  const auto weights = sobolev_weights(grid_n(), regularity_.alpha.alpha() - gamma - 0.5);
  double best = 0.0;
  for (std::size_t i = 0; i < coarse.points(); ++i)
    for (std::size_t j = i + 1; j < coarse.points(); ++j) {
      const double d = weighted_distance(at(level, i).coeffs(), at(level, j).coeffs(), weights);
      best = std::max(best, d / std::pow(coarse.time(j) - coarse.time(i), gamma));
    }
  return best;
}

FourierField dyadic_sum(const IntegrandTrace& y, const FbmPath& w, double t, int level, SemigroupMode mode) {
  return dyadic_sum(y, w, 0.0, t, level, mode);
}

FourierField dyadic_sum(const IntegrandTrace& y, const FbmPath& w, double s, double t, int level, SemigroupMode mode) {
  check_compatible(y.grid(), w, level);
  if (!y.grid().contains(s) || !y.grid().contains(t)) throw DomainError("dyadic_sum: s and t must be grid points");
  if (s > t) throw DomainError("dyadic_sum: s must not exceed t");
  const DyadicGrid grid = y.grid().coarsened(level);
  const double h = grid.mesh();
  const auto n0 = static_cast<std::size_t>(std::ceil(s / h - 1e-9));
  const std::size_t n1 = std::max(n0, grid.complete_intervals(t));
  FourierField result(y.grid_n());
  accumulate(y, w, level, n0, n1, mode, [&](std::size_t m, const FourierField& acc) {
    if (m == n1) result = acc;
  });
  const double tail = t - static_cast<double>(n1) * h;
  if (mode == SemigroupMode::heat && tail > 0.0) result = heat_semigroup(result, tail);
  return result;
}

std::vector<FourierField> dyadic_sum_series(const IntegrandTrace& y, const FbmPath& w, int level, SemigroupMode mode) {
  check_compatible(y.grid(), w, level);
  const std::size_t n = std::size_t{1} << level;
  std::vector<FourierField> out;
  out.reserve(n + 1);
  accumulate(y, w, level, 0, n, mode, [&](std::size_t, const FourierField& acc) { out.push_back(acc); });
  return out;
}

double dyadic_sum_scalar(std::span<const double> y, const DyadicGrid& grid, const FbmPath& w, double t, int level) {
  if (y.size() != grid.points()) throw DomainError("scalar integrand length does not match grid");
  check_compatible(grid, w, level);
  if (!grid.contains(t)) throw DomainError("dyadic_sum_scalar: t must be a grid point");
  const DyadicGrid coarse = grid.coarsened(level);
  const std::size_t ystride = std::size_t{1} << (grid.level() - level);
  const std::size_t wstride = std::size_t{1} << (w.grid.level() - level);
  const std::size_t n1 = coarse.complete_intervals(t);
  double sum = 0.0;
  for (std::size_t m = 0; m < n1; ++m) sum += y[m * ystride] * (w.values[(m + 1) * wstride] - w.values[m * wstride]);
  return sum;
}

YoungIntegralResult young_integral(const IntegrandTrace& y, const FbmPath& w, double t, const YoungOptions& options) {
  const double gamma = y.regularity().gamma;
  if (!(gamma > 0.5)) throw DomainError("Young integral needs gamma > 1/2");
  const int k_top = std::min({options.k_max, y.grid().level(), w.grid.level()});
  if (options.k_min >= k_top) throw DomainError("young_integral: k_min must be below the finest available level");
  const double alpha = y.regularity().alpha.alpha();
  const auto w_alpha = sobolev_weights(y.grid_n(), alpha);
  const auto w_alpha_gamma = sobolev_weights(y.grid_n(), alpha - gamma);

  YoungIntegralResult r;
  r.time = t;
  FourierField prev = dyadic_sum(y, w, t, options.k_min, options.mode);
  r.ladder_norms.push_back(ladder(prev, alpha));
  for (int k = options.k_min; k < k_top; ++k) {
    FourierField next = dyadic_sum(y, w, t, k + 1, options.mode);
    CauchyGap g;
    g.level = k;
    g.gap_alpha = weighted_distance(prev.coeffs(), next.coeffs(), w_alpha);
    g.gap_alpha_minus_gamma = weighted_distance(prev.coeffs(), next.coeffs(), w_alpha_gamma);
    r.gaps.push_back(g);
    r.ladder_norms.push_back(ladder(next, alpha));
    r.value = std::move(next);
    r.level_used = k + 1;
    r.cauchy_gap = g.gap_alpha;
    if (g.gap_alpha < options.tol) {
      r.converged = true;
      break;
    }
    prev = r.value;
  }
  r.bound_certificate = certificate(y, w, t, r.level_used, options.holder_level_cap);
  return r;
}

ScalarYoungResult young_integral_scalar(std::span<const double> y, const DyadicGrid& grid, const FbmPath& w, double t,
                                        double tol, int k_max) {
  const int k_top = std::min({k_max, grid.level(), w.grid.level()});
  if (k_top < 1) throw DomainError("young_integral_scalar needs at least level 1");
  ScalarYoungResult r;
  double prev = dyadic_sum_scalar(y, grid, w, t, 0);
  for (int k = 0; k < k_top; ++k) {
    const double next = dyadic_sum_scalar(y, grid, w, t, k + 1);
    r.value = next;
    r.level_used = k + 1;
    r.cauchy_gap = std::fabs(next - prev);
    if (r.cauchy_gap < tol) {
      r.converged = true;
      break;
    }
    prev = next;
  }
  return r;
}

FourierField one_step_increment(const FourierField& y_u, double w_inc, double t_minus_u) {
  if (!(t_minus_u >= 0.0)) throw DomainError("one_step_increment: t - u must be nonnegative");
  FourierField out = heat_semigroup(y_u, t_minus_u);
  out *= w_inc;
  return out;
}

ConvolutionSeries convolution_series(const IntegrandTrace& y, const FbmPath& w, int series_level, int k_min, int k_max,
                                     SemigroupMode mode) {
  if (k_min < series_level || k_max < k_min) throw DomainError("convolution_series: need series_level <= k_min <= k_max");
  const double gamma = y.regularity().gamma;
  const double alpha = y.regularity().alpha.alpha();
  const auto w_alpha = sobolev_weights(y.grid_n(), alpha);
  const auto w_alpha_gamma = sobolev_weights(y.grid_n(), alpha - gamma);
  const DyadicGrid sgrid = y.grid().coarsened(series_level);

  ConvolutionSeries series{sgrid, y.regularity(), std::vector<YoungIntegralResult>(sgrid.points())};
  for (std::size_t m = 0; m < sgrid.points(); ++m) series.results[m].time = sgrid.time(m);

  for (int k = k_min; k <= k_max; ++k) {
    check_compatible(y.grid(), w, k);
    const std::size_t stride = std::size_t{1} << (k - series_level);
    std::vector<FourierField> level_values(sgrid.points());
    accumulate(y, w, k, 0, std::size_t{1} << k, mode, [&](std::size_t m, const FourierField& acc) {
      if (m % stride == 0) level_values[m / stride] = acc;
    });
    for (std::size_t m = 0; m < sgrid.points(); ++m) {
      auto& r = series.results[m];
      if (k > k_min) {
        CauchyGap g;
        g.level = k - 1;
        g.gap_alpha = weighted_distance(r.value.coeffs(), level_values[m].coeffs(), w_alpha);
        g.gap_alpha_minus_gamma = weighted_distance(r.value.coeffs(), level_values[m].coeffs(), w_alpha_gamma);
        r.gaps.push_back(g);
        r.cauchy_gap = g.gap_alpha;
      }
      r.ladder_norms.push_back(ladder(level_values[m], alpha));
      r.value = std::move(level_values[m]);
      r.level_used = k;
    }
  }
  for (auto& r : series.results)
    r.bound_certificate = r.time > 0.0 ? certificate(y, w, r.time, k_max, 12) : 0.0;
  return series;
}

RegularityReport convolution_regularity_report(const ConvolutionSeries& series) {
  const auto& res = series.results;
  if (res.size() < 8) throw DomainError("regularity report needs at least 8 series points");
  RegularityReport rep;
  rep.zero_series = std::all_of(res.begin(), res.end(), [](const YoungIntegralResult& r) {
    return std::all_of(r.value.coeffs().begin(), r.value.coeffs().end(), [](complex c) { return c == complex{}; });
  });
  if (rep.zero_series) return rep;

  const double gamma = series.regularity.gamma;
  const auto weights = sobolev_weights(res.front().value.grid_n(), series.regularity.alpha.alpha() - gamma);
  std::vector<double> log_lag, log_inc;
  // Short lags only: at lags comparable to the heat time scale the increments
  // saturate and no longer reflect the local exponent.
  const std::size_t max_lag = std::max<std::size_t>(4, (res.size() - 1) / 16);
  for (std::size_t lag = 1; lag <= max_lag && 2 * lag < res.size(); lag *= 2) {
    double worst = 0.0;
    for (std::size_t m = 0; m + lag < res.size(); ++m)
      worst = std::max(worst, weighted_distance(res[m + lag].value.coeffs(), res[m].value.coeffs(), weights));
    if (worst > 0.0) {
      log_lag.push_back(std::log2(static_cast<double>(lag) * series.grid.mesh()));
      log_inc.push_back(std::log2(worst));
    }
  }
  rep.gamma_measured = log_lag.size() >= 2 ? stats::linear_fit(log_lag, log_inc).slope : 0.0;

  const std::size_t levels = res.front().ladder_norms.size();
  rep.sigma_gain = 0.0;
  for (std::size_t j = 0; j < kSigmaLadder.size(); ++j) {
    std::vector<double> peak(levels, 0.0);
    for (const auto& r : res)
      for (std::size_t l = 0; l < levels; ++l) peak[l] = std::max(peak[l], r.ladder_norms[l][j]);
    bool bounded = true;
    for (std::size_t l = levels >= 3 ? levels - 2 : 1; l < levels; ++l)
      if (peak[l] > 1.05 * peak[l - 1]) bounded = false;
    if (bounded) rep.sigma_gain = kSigmaLadder[j];
  }
  return rep;
}

void write_gap_csv(std::ostream& out, std::span<const CauchyGap> gaps) {
  const auto old = out.precision(17);
  out << "k,gap_alpha,gap_alpha_minus_gamma\n";
  for (const auto& g : gaps) out << g.level << ',' << g.gap_alpha << ',' << g.gap_alpha_minus_gamma << '\n';
  out.precision(old);
}

}  // namespace fracvort
