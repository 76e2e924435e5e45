#include "fracvort/hurst.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "fracvort/errors.hpp"
#include "fracvort/parallel.hpp"
#include "fracvort/stats.hpp"

namespace fracvort {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_series(std::span<const double> x, const DyadicGrid& grid) {
  if (x.size() != grid.points())
    throw DomainError("series has " + std::to_string(x.size()) + " samples, grid expects " +
                      std::to_string(grid.points()));
}

double mesh_at(const DyadicGrid& grid, int k) { return std::ldexp(grid.horizon(), -k); }

double trapezoid_square(std::span<const double> v, const DyadicGrid& grid, double t) {
  const std::size_t last = grid.complete_intervals(t);
  double s = 0.0;
  for (std::size_t j = 0; j < last; ++j) s += 0.5 * (v[j] * v[j] + v[j + 1] * v[j + 1]);
  return s * grid.mesh();
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

}  // namespace

double quadratic_variation(std::span<const double> x, const DyadicGrid& grid, int k, double t) {
  check_series(x, grid);
  if (k < 0 || k > grid.level())
    throw DomainError("QV level " + std::to_string(k) + " exceeds the series level " + std::to_string(grid.level()));
  if (t < 0.0 || t > grid.horizon() * (1.0 + 1e-12)) throw DomainError("QV window must lie inside [0, horizon]");
  const DyadicGrid coarse = grid.coarsened(k);
  const std::size_t stride = std::size_t{1} << (grid.level() - k);
  const std::size_t count = coarse.complete_intervals(t);
  double s = 0.0;
  for (std::size_t j = 0; j < count; ++j) {
    const double d = x[(j + 1) * stride] - x[j * stride];
    s += d * d;
  }
  return s;
}

double default_qv_window(const DyadicGrid& grid, int k_min) { return grid.horizon() - mesh_at(grid, k_min); }

QVLadder qv_ladder(std::span<const double> x, const DyadicGrid& grid, int k_min, int k_max, double t,
                   std::optional<double> hurst, std::span<const double> noise) {
  if (k_min > k_max) throw DomainError("qv_ladder: k_min exceeds k_max");
  QVLadder l;
  l.k_min = k_min;
  l.k_max = k_max;
  l.t = t;
  for (int k = k_min; k <= k_max; ++k) {
    const double q = quadratic_variation(x, grid, k, t);
    l.qv.push_back(q);
    if (hurst) l.scaled_qv.push_back(std::pow(mesh_at(grid, k), 1.0 - 2.0 * *hurst) * q);
  }
  if (!noise.empty()) {
    check_series(noise, grid);
    l.target = trapezoid_square(noise, grid, t);
  }
  return l;
}

Prop15Table prop15_monte_carlo(double hurst, const std::vector<long>& n_list, double t, std::size_t ensemble,
                               std::uint64_t seed) {
  if (ensemble < 1000) throw CapacityError("prop15 needs an ensemble of at least 1000 paths for a stable slope");
  if (n_list.empty()) throw DomainError("prop15 needs at least one mesh");
  if (t < 0.0 || t > 1.0) throw DomainError("prop15 window t must lie in [0, 1]");
  const HurstParam h(hurst);
  std::vector<int> levels;
  for (long n : n_list) {
    if (n < 1 || (n & (n - 1)) != 0) throw DomainError("prop15 meshes must be powers of two");
    levels.push_back(static_cast<int>(std::lround(std::log2(static_cast<double>(n)))));
  }
  const int top = *std::max_element(levels.begin(), levels.end());
  const DyadicGrid grid(top, 1.0);

  std::vector<std::vector<double>> sq(n_list.size(), std::vector<double>(ensemble));
  parallel_for(ensemble, [&](std::size_t i) {
    const auto p = generate_path(h, grid, seed + i);
    for (std::size_t r = 0; r < n_list.size(); ++r) {
      const double n = static_cast<double>(n_list[r]);
      const double v = std::pow(n, 2.0 * hurst - 1.0) * quadratic_variation(p.values, grid, levels[r], t);
      sq[r][i] = (v - t) * (v - t);
    }
  });

  Prop15Table table;
  table.hurst = hurst;
  table.t = t;
  table.ensemble = ensemble;
  table.threshold = std::min(1.0, 4.0 - 4.0 * hurst) - 0.2;
  std::vector<double> lx, ly;
  bool all_zero = true;
  for (std::size_t r = 0; r < n_list.size(); ++r) {
    const double m = stats::mean(sq[r]);
    table.rows.push_back({n_list[r], m, std::sqrt(stats::variance(sq[r]) / static_cast<double>(ensemble))});
    if (m > 0.0) {
      all_zero = false;
      lx.push_back(std::log2(static_cast<double>(n_list[r])));
      ly.push_back(std::log2(m));
    }
  }
  table.slope = (all_zero || lx.size() < 2) ? kNaN : -stats::linear_fit(lx, ly).slope;
  table.pass = std::isfinite(table.slope) && table.slope >= table.threshold;
  return table;
}

ScaledQVCheck scaled_qv_limit_check(std::span<const double> x, std::span<const double> noise, const DyadicGrid& grid,
                                    double hurst, int k_min, int k_max, std::optional<double> t) {
  const double window = t.value_or(default_qv_window(grid, k_min));
  const auto ladder = qv_ladder(x, grid, k_min, k_max, window, hurst, noise);
  ScaledQVCheck c;
  c.target = ladder.target.value_or(0.0);
  for (int k = k_min; k <= k_max; ++k) c.levels.push_back(k);
  c.scaled_qv = ladder.scaled_qv;
  for (double s : c.scaled_qv) c.gap.push_back(std::fabs(s - c.target));
  const double scale = 1.0 + max_abs(noise) * max_abs(noise) * window;
  c.inconclusive = !(c.target > 1e-12 * scale);

  std::vector<double> avg;
  if (c.gap.size() >= 3) {
    for (std::size_t i = 0; i + 2 < c.gap.size(); ++i) avg.push_back((c.gap[i] + c.gap[i + 1] + c.gap[i + 2]) / 3.0);
  } else {
    avg = c.gap;
  }
  c.monotone_trend = true;
  for (std::size_t i = 1; i < avg.size(); ++i)
    if (avg[i] > avg[i - 1]) c.monotone_trend = false;
  c.within_band = !c.inconclusive && c.gap.back() <= 0.15 * c.target;
  return c;
}

ScaledQVCheck scaled_qv_limit_check(const ObservableSeries& series, Channel channel, double hurst, int k_min,
                                    int k_max) {
  const auto x = series.channel(channel);
  const auto noise = series.noise(channel);
  return scaled_qv_limit_check(x, noise, series.times, hurst, k_min, k_max);
}

EstimatorReport hurst_estimate(std::span<const double> x, const DyadicGrid& grid, int k_min, int k_max,
                               std::optional<double> t) {
  check_series(x, grid);
  if (k_min < 0 || k_min > k_max) throw DomainError("hurst_estimate: need 0 <= k_min <= k_max");
  if (k_max + 1 > grid.level())
    throw DomainError("hurst_estimate: level " + std::to_string(k_max + 1) + " is not available in the series");
  EstimatorReport r;
  r.t = t.value_or(default_qv_window(grid, k_min));
  for (int k = k_min; k <= k_max + 1; ++k) r.qv.push_back(quadratic_variation(x, grid, k, r.t));
  for (int k = k_min; k <= k_max; ++k) {
    const std::size_t i = static_cast<std::size_t>(k - k_min);
    r.levels.push_back(k);
    const double ratio = r.qv[i + 1] > 0.0 ? r.qv[i] / r.qv[i + 1] : kNaN;
    const bool undefined = !(std::isfinite(ratio) && ratio > 0.0);
    const double h = undefined ? kNaN : 0.5 * (std::log2(ratio) + 1.0);
    r.ratio_sequence.push_back(ratio);
    r.h_sequence.push_back(h);
    r.undefined.push_back(undefined);
    r.out_of_range.push_back(!undefined && (h < 0.0 || h > 1.5));
  }
  r.final_h = r.h_sequence.back();
  r.final_defined = !r.undefined.back();

  std::vector<double> lk, lq;
  for (std::size_t i = 0; i < r.qv.size(); ++i)
    if (r.qv[i] > 0.0) {
      lk.push_back(k_min + static_cast<double>(i));
      lq.push_back(std::log2(r.qv[i]));
    }
  r.slope_h = lk.size() == r.qv.size() && lk.size() >= 2 ? 0.5 * (1.0 - stats::linear_fit(lk, lq).slope) : kNaN;
  return r;
}

SolverEstimate estimate_from_solver(const SolverState& state, const ModelConfig& config, Wavevector mode, int k_min,
                                    int k_max) {
  const auto series = extract_observable(state, config, mode);
  if (series.values.size() != series.times.points())
    throw DomainError("estimate_from_solver: the run did not reach the horizon (" + state.failure + ")");
  SolverEstimate out;
  auto one = [&](Channel ch, const char* name) {
    const auto x = series.channel(ch);
    const auto noise = series.noise(ch);
    auto r = hurst_estimate(x, series.times, k_min, k_max);
    r.channel = name;
    r.inconclusive = max_abs(noise) <= 1e-12 * (1.0 + max_abs(x));
    return r;
  };
  out.real = one(Channel::real, "real");
  out.imag = one(Channel::imag, "imag");
  out.inconclusive = out.real.inconclusive && out.imag.inconclusive;
  return out;
}

std::vector<double> synthetic_young_sde(const FbmPath& w, const std::function<double(double, double)>& a,
                                        const std::function<double(double, double)>& x) {
  const DyadicGrid& g = w.grid;
  std::vector<double> y(g.points(), 0.0);
  const double dt = g.mesh();
  for (std::size_t j = 0; j + 1 < g.points(); ++j) {
    const double t = g.time(j);
    y[j + 1] = y[j] + a(t, w.values[j]) * dt + x(t, w.values[j]) * (w.values[j + 1] - w.values[j]);
  }
  return y;
}

std::vector<double> fbm_estimates(HurstParam hurst, const DyadicGrid& grid, int k, std::uint64_t seed,
                                  std::size_t count) {
  std::vector<double> out(count);
  parallel_for(count, [&](std::size_t i) {
    const auto p = generate_path(hurst, grid, seed + i);
    out[i] = hurst_estimate(p.values, grid, k, k).final_h;
  });
  return out;
}

EnsembleSummary summarize(std::vector<double> values) {
  if (values.empty()) throw DomainError("summarize: no values");
  EnsembleSummary s;
  s.count = values.size();
  s.median = stats::median(values);
  s.q25 = stats::quantile(values, 0.25);
  s.q75 = stats::quantile(values, 0.75);
  return s;
}

void write_estimator_csv(std::ostream& out, const EstimatorReport& report, const DyadicGrid& grid,
                         std::optional<double> hurst, bool header) {
  if (header) out << "k,qv,scaled_qv,ratio,h_k,channel\n";
  out.precision(17);
  for (std::size_t i = 0; i < report.levels.size(); ++i) {
    const int k = report.levels[i];
    out << k << ',' << report.qv[i] << ',';
    if (hurst) out << std::pow(mesh_at(grid, k), 1.0 - 2.0 * *hurst) * report.qv[i];
    out << ',' << report.ratio_sequence[i] << ',' << report.h_sequence[i] << ',' << report.channel << '\n';
  }
}

}  // namespace fracvort
