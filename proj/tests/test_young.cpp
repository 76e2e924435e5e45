#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "fracvort/errors.hpp"
#include "fracvort/stats.hpp"
#include "fracvort/young.hpp"

using namespace fracvort;

namespace {

FourierField omega0(int n) {
  return FourierField::from_function(n, [](double x1, double x2) {
    return std::sin(x1) + std::cos(x2) + 0.5 * std::sin(x1 + x2) + 0.3 * std::cos(2 * x1 - x2);
  });
}

VectorField shear(int n) {
  return {FourierField::from_function(n, [](double, double x2) { return std::cos(x2); }), FourierField(n)};
}

// Y_r = xi . grad(S_r omega0) along the frozen heat trajectory.
IntegrandTrace frozen_transport(int n, const DyadicGrid& grid, double gamma) {
  const TransportOperator op(shear(n));
  const FourierField w0 = omega0(n);
  return IntegrandTrace::from_function(grid, [&](double r) { return op.apply(heat_semigroup(w0, r)); },
                                       {SobolevIndex(1.5), gamma});
}

IntegrandTrace constant_trace(const DyadicGrid& grid, const FourierField& f, double gamma = 0.7) {
  return IntegrandTrace(grid, std::vector<FourierField>(grid.points(), f), {SobolevIndex(1.5), gamma});
}

// Hölder exponent of a path by regression of the worst increment per lag.
double measured_holder_exponent(const FbmPath& p, int min_lag_log2, int max_lag_log2) {
  std::vector<double> x, y;
  for (int l = min_lag_log2; l <= max_lag_log2; ++l) {
    const std::size_t lag = std::size_t{1} << l;
    double worst = 0.0;
    for (std::size_t j = 0; j + lag < p.values.size(); ++j) worst = std::max(worst, std::fabs(p.values[j + lag] - p.values[j]));
    x.push_back(std::log2(lag * p.grid.mesh()));
    y.push_back(std::log2(worst));
  }
  return stats::linear_fit(x, y).slope;
}

double max_abs_diff(const FourierField& a, const FourierField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.coeffs()[i] - b.coeffs()[i]));
  return m;
}

}  // namespace

TEST_CASE("dyadic_sum elementary cases") {
  const int n = 8;
  const DyadicGrid grid(8, 1.0);
  const auto w = generate_path(HurstParam(0.75), grid, 3);

  const auto zero = constant_trace(grid, FourierField(n));
  CHECK(sobolev_norm(dyadic_sum(zero, w, 1.0, 8), SobolevIndex(1.0)) == 0.0);

  const auto one = constant_trace(grid, FourierField::single_mode(n, {0, 0}, 1.0));
  for (double t : {0.5, 0.75, 1.0}) {
    const auto v = dyadic_sum(one, w, t, 8, SemigroupMode::identity);
    CHECK(std::abs(v.mean_mode() - (w.at(t) - w.values[0])) < 1e-14);
  }
  CHECK_THROWS_AS(dyadic_sum(one, w, 0.3, 8), DomainError);
  CHECK_THROWS_AS(dyadic_sum(one, w, 1.0, 9), DomainError);

  // Smooth driver W_t = t against Y_r = r: left-point Riemann sum of int r dr.
  const DyadicGrid fine(10, 1.0);
  FbmPath line{HurstParam(0.75), fine, {}, 0};
  for (std::size_t j = 0; j < fine.points(); ++j) line.values.push_back(fine.time(j));
  const auto ramp = IntegrandTrace::from_function(
      fine, [&](double r) { return FourierField::single_mode(n, {0, 0}, r); }, {SobolevIndex(1.5), 0.7});
  const auto v = dyadic_sum(ramp, line, 1.0, 10, SemigroupMode::identity);
  CHECK(std::fabs(v.mean_mode().real() - 0.5) <= std::ldexp(1.0, -10));
}

TEST_CASE("dyadic_sum matches the per-mode direct sum") {
  const int n = 16;
  const DyadicGrid grid(9, 0.5);
  const auto w = generate_path(HurstParam(0.7), grid, 21);
  const auto y = frozen_transport(n, grid, 0.65);
  const int level = 7;
  const double t = 0.4375;
  const auto v = dyadic_sum(y, w, t, level);
  const DyadicGrid g = grid.coarsened(level);
  const std::size_t m_end = g.complete_intervals(t);
  double worst = 0.0, scale = 0.0;
  for (Wavevector k : {Wavevector{1, 0}, Wavevector{2, -1}, Wavevector{3, 3}, Wavevector{0, 1}}) {
    complex direct{};
    for (std::size_t m = 0; m < m_end; ++m) {
      const double dw = w.at(g.time(m + 1)) - w.at(g.time(m));
      direct += std::exp(-(t - g.time(m)) * k.norm_squared()) * y.at(level, m)[k] * dw;
    }
    worst = std::max(worst, std::abs(v[k] - direct));
    scale = std::max(scale, std::abs(direct));
  }
  CHECK(worst <= 1e-13 * scale);
}

TEST_CASE("dyadic_sum_series agrees with pointwise sums") {
  const int n = 16;
  const DyadicGrid grid(7, 1.0);
  const auto w = generate_path(HurstParam(0.8), grid, 5);
  const auto y = frozen_transport(n, grid, 0.7);
  const auto series = dyadic_sum_series(y, w, 6);
  REQUIRE(series.size() == 65);
  for (std::size_t m : {0u, 1u, 17u, 64u}) CHECK(max_abs_diff(series[m], dyadic_sum(y, w, m / 64.0, 6)) < 1e-13);
}

TEST_CASE("young_integral on a zero integrand") {
  const DyadicGrid grid(8, 1.0);
  const auto w = generate_path(HurstParam(0.75), grid, 1);
  const auto r = young_integral(constant_trace(grid, FourierField(8)), w, 1.0);
  CHECK(r.converged);
  CHECK(r.cauchy_gap == 0.0);
  CHECK(sobolev_norm(r.value, SobolevIndex(0.0)) == 0.0);
  CHECK_THROWS_AS(young_integral(constant_trace(grid, FourierField(8), 0.5), w, 1.0), DomainError);
}

TEST_CASE("scalar surrogate matches an oversampled Riemann-Stieltjes oracle") {
  const HurstParam h(0.75);
  const DyadicGrid fine(16, 1.0);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto w = generate_path(h, fine, seed);
    std::vector<double> y(fine.points());
    for (std::size_t j = 0; j < y.size(); ++j) y[j] = std::sin(3.0 * fine.time(j)) + fine.time(j);
    const int k_max = 12;
    const auto r = young_integral_scalar(y, fine, w, 1.0, 1e-8, k_max);
    CHECK(r.level_used == k_max);
    const double oracle = dyadic_sum_scalar(y, fine, w, 1.0, k_max + 4);
    const double gp = measured_holder_exponent(w, 0, 12);
    CHECK(gp > 0.5);
    CHECK(std::fabs(r.value - oracle) <= 10.0 * std::pow(2.0, -k_max * (2.0 * gp - 1.0)));
  }
}

TEST_CASE("Cauchy gaps on the frozen transport integrand") {
  const int n = 16;
  const DyadicGrid grid(12, 0.5);
  const auto w = generate_path(HurstParam(0.75), grid, 7);
  const auto y = frozen_transport(n, grid, 0.7);
  YoungOptions opt;
  opt.k_min = 6;
  opt.k_max = 12;
  const auto r = young_integral(y, w, 0.5, opt);
  CHECK_FALSE(r.converged);
  CHECK(r.level_used == 12);
  REQUIRE(r.gaps.size() == 6);
  std::vector<double> k, g;
  for (const auto& gap : r.gaps) {
    k.push_back(gap.level);
    g.push_back(gap.gap_alpha);
  }
  CHECK(-stats::log2_slope(k, g) >= 0.7 - 0.5 - 0.1);
  CHECK(std::isfinite(r.bound_certificate));
  CHECK(r.bound_certificate > 0.0);

  std::ostringstream csv;
  write_gap_csv(csv, r.gaps);
  CHECK(csv.str().rfind("k,gap_alpha,gap_alpha_minus_gamma\n6,", 0) == 0);
}

TEST_CASE("bound certificate is stable under refinement") {
  const int n = 16;
  const DyadicGrid grid(12, 0.5);
  const auto w = generate_path(HurstParam(0.75), grid, 8);
  const auto y = frozen_transport(n, grid, 0.7);
  std::vector<double> certs;
  for (int k_max : {8, 10, 12}) {
    YoungOptions opt;
    opt.k_min = k_max - 2;
    opt.k_max = k_max;
    const auto r = young_integral(y, w, 0.5, opt);
    certs.push_back(r.bound_certificate);
    CHECK(sobolev_norm(r.value, SobolevIndex(1.5)) <= r.bound_certificate);
  }
  CHECK(certs[2] / certs[0] < 1.25);
  CHECK(certs[2] / certs[0] > 0.8);
}

TEST_CASE("linearity and additivity") {
  const int n = 16;
  const DyadicGrid grid(10, 1.0);
  const auto w = generate_path(HurstParam(0.7), grid, 12);
  const auto y1 = frozen_transport(n, grid, 0.6);
  const auto y2 = IntegrandTrace::from_function(
      grid, [&](double r) { return FourierField::from_function(n, [r](double a, double b) { return std::cos(a + 2 * b) * r; }); },
      {SobolevIndex(1.5), 0.6});
  std::vector<FourierField> mix;
  for (std::size_t j = 0; j < grid.points(); ++j) mix.push_back(2.0 * y1.values()[j] + (-3.0) * y2.values()[j]);
  const IntegrandTrace y12(grid, mix, {SobolevIndex(1.5), 0.6});
  YoungOptions opt;
  opt.k_min = 6;
  opt.k_max = 10;
  const auto a = young_integral(y1, w, 1.0, opt);
  const auto b = young_integral(y2, w, 1.0, opt);
  const auto c = young_integral(y12, w, 1.0, opt);
  CHECK(sobolev_norm(c.value - (2.0 * a.value + (-3.0) * b.value), SobolevIndex(1.5)) < 1e-10);

  for (int level : {6, 8, 10}) {
    const double s = 0.375, t = 0.875;
    const auto whole = dyadic_sum(y1, w, t, level);
    const auto split = heat_semigroup(dyadic_sum(y1, w, s, level), t - s) + dyadic_sum(y1, w, s, t, level);
    CHECK(sobolev_norm(whole - split, SobolevIndex(1.5)) < 3.0 * 2e-8);
  }
}

TEST_CASE("Lipschitz constant in the integrand shrinks with the horizon") {
  // The integral is linear, so I(Y1) - I(Y2) = I(Y1 - Y2); the constant is
  // sup_{t <= T} |I_t|_alpha over the integrand norm on [0, T], for one driver
  // on [0, 1] restricted to shorter horizons.
  const int n = 16;
  const SobolevIndex alpha(1.5);
  const int level = 10;
  std::vector<double> medians;
  for (int j = 0; j < 3; ++j) {
    const double horizon = std::ldexp(1.0, -j);
    std::vector<double> ratios;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto full = generate_path(HurstParam(0.75), DyadicGrid(level, 1.0), 40 + seed);
      const DyadicGrid grid(level - j, horizon);
      FbmPath w{full.hurst, grid, std::vector<double>(full.values.begin(), full.values.begin() + grid.points()), full.seed};
      const auto dy = frozen_transport(n, grid, 0.7);
      double sup = 0.0;
      for (const auto& v : dyadic_sum_series(dy, w, grid.level())) sup = std::max(sup, sobolev_norm(v, alpha));
      ratios.push_back(sup / (dy.sup_norm() + dy.holder_norm()));
    }
    medians.push_back(stats::median(ratios));
  }
  CHECK(medians[1] < medians[0]);
  CHECK(medians[2] < medians[1]);
}

TEST_CASE("one_step_increment") {
  const auto f = omega0(16);
  CHECK(sobolev_norm(one_step_increment(f, 0.0, 0.3), SobolevIndex(1.0)) == 0.0);
  CHECK(max_abs_diff(one_step_increment(f, 0.7, 0.0), 0.7 * f) == 0.0);
  CHECK(max_abs_diff(one_step_increment(f, 2.0, 0.1), 2.0 * heat_semigroup(f, 0.1)) < 1e-15);
  CHECK_THROWS_AS(one_step_increment(f, 1.0, -0.1), DomainError);
}

TEST_CASE("convolution_regularity_report") {
  const int n = 16;
  const DyadicGrid grid(11, 0.5);
  const auto w = generate_path(HurstParam(0.75), grid, 17);

  const auto zero = constant_trace(grid, FourierField(n));
  CHECK(convolution_regularity_report(convolution_series(zero, w, 5, 8, 10)).zero_series);

  const auto y = frozen_transport(n, grid, 0.7);
  const auto series = convolution_series(y, w, 8, 9, 11);
  const auto rep = convolution_regularity_report(series);
  CHECK_FALSE(rep.zero_series);
  CHECK(rep.gamma_measured >= 0.55);
  CHECK(rep.sigma_gain < 0.7);

  ConvolutionSeries short_series = series;
  short_series.results.resize(7);
  CHECK_THROWS_AS(convolution_regularity_report(short_series), DomainError);
}
