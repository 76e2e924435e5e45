#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "fracvort/errors.hpp"
#include "fracvort/fbm.hpp"
#include "fracvort/stats.hpp"

using namespace fracvort;

namespace {

// Sample mean of X*Y for centred X, Y together with its standard error.
struct Moment {
  double mean;
  double se;
};

Moment product_moment(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> p(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) p[i] = x[i] * y[i];
  return {stats::mean(p), std::sqrt(stats::variance(p) / static_cast<double>(p.size()))};
}

}  // namespace

TEST_CASE("HurstParam and DyadicGrid validation") {
  CHECK_THROWS_AS(HurstParam(0.0), DomainError);
  CHECK_THROWS_AS(HurstParam(1.0), DomainError);
  CHECK_NOTHROW(HurstParam(0.3));
  CHECK_THROWS_AS(HurstParam(0.5).require_long_memory(), DomainError);
  CHECK_NOTHROW(HurstParam(0.51).require_long_memory());

  const DyadicGrid g(4, 2.0);
  CHECK(g.points() == 17);
  CHECK(g.mesh() == 0.125);
  CHECK(g.time(16) == 2.0);
  CHECK(g.index_of(0.375) == 3);
  CHECK_THROWS_AS(g.index_of(0.3), DomainError);
  CHECK(g.complete_intervals(0.3) == 2);
  CHECK(g.complete_intervals(0.375) == 3);
  CHECK_THROWS_AS(DyadicGrid(3, 0.0), DomainError);
}

TEST_CASE("fbm_covariance closed form") {
  CHECK(fbm_covariance(1, 1, HurstParam(0.7)) == doctest::Approx(1.0));
  CHECK(fbm_covariance(0.8, 0, HurstParam(0.3)) == 0.0);
  CHECK(fbm_covariance(1, 2, HurstParam(0.75)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(fbm_covariance(0.3, 1.7, HurstParam(0.6)) == fbm_covariance(1.7, 0.3, HurstParam(0.6)));
  CHECK_THROWS_AS(fbm_covariance(-0.1, 1, HurstParam(0.6)), DomainError);
}

TEST_CASE("generate_path basic contract") {
  const DyadicGrid g(10, 1.0);
  const auto p = generate_path(HurstParam(0.7), g, 3);
  CHECK(p.values.size() == g.points());
  CHECK(p.values[0] == 0.0);
  const auto q = generate_path(HurstParam(0.7), g, 3);
  CHECK(p.values == q.values);
  const auto r = generate_path(HurstParam(0.7), g, 4);
  CHECK(p.values != r.values);
  CHECK_THROWS_AS(generate_path(HurstParam(0.7), DyadicGrid(21, 1.0), 1), CapacityError);
}

TEST_CASE("H = 1/2 increments are uncorrelated at lag one") {
  const auto p = generate_path(HurstParam(0.5), DyadicGrid(10, 1.0), 42);
  const auto inc = p.increments(10);
  const double n = static_cast<double>(inc.size());
  double num = 0.0, den = 0.0;
  const double m = stats::mean(inc);
  for (std::size_t i = 0; i < inc.size(); ++i) {
    den += (inc[i] - m) * (inc[i] - m);
    if (i + 1 < inc.size()) num += (inc[i] - m) * (inc[i + 1] - m);
  }
  CHECK(std::fabs(num / den) < 3.0 / std::sqrt(n));
}

TEST_CASE("ensemble variance of W_1 at H = 0.75") {
  const auto paths = generate_ensemble(HurstParam(0.75), DyadicGrid(12, 1.0), 1000, 10000);
  std::vector<double> w1;
  for (const auto& p : paths) w1.push_back(p.values.back());
  const auto m = product_moment(w1, w1);
  CHECK(std::fabs(m.mean - fbm_covariance(1, 1, HurstParam(0.75))) < 3.0 * m.se);
}

TEST_CASE("covariance consistency on a 5x5 grid (H = 0.75)") {
  const HurstParam h(0.75);
  const DyadicGrid g(10, 2.0);
  const auto paths = generate_ensemble(h, g, 77, 10000);
  // Five evenly spaced points of [0, 2], snapped to the grid.
  std::vector<double> ts;
  for (int i = 1; i <= 5; ++i) ts.push_back(g.time(static_cast<std::size_t>(std::lround(0.4 * i / g.mesh()))));
  for (double s : ts)
    for (double t : ts) {
      std::vector<double> x, y;
      for (const auto& p : paths) {
        x.push_back(p.at(s));
        y.push_back(p.at(t));
      }
      const auto m = product_moment(x, y);
      CHECK(std::fabs(m.mean - fbm_covariance(s, t, h)) < 4.0 * m.se);
    }
}

TEST_CASE("self-similarity in law") {
  const HurstParam h(0.6);
  const auto paths = generate_ensemble(h, DyadicGrid(8, 2.0), 5, 10000);
  std::vector<double> a, b;
  for (const auto& p : paths) {
    a.push_back(p.at(1.0));
    b.push_back(p.at(2.0));
  }
  const double ratio = stats::variance(b) / stats::variance(a);
  CHECK(std::fabs(ratio / std::pow(2.0, 1.2) - 1.0) < 0.05);
}

TEST_CASE("Cholesky fallback reproduces the increment law") {
  const HurstParam h(0.8);
  const DyadicGrid g(5, 1.0);
  GeneratorOptions opt;
  opt.force_cholesky = true;
  const auto paths = generate_ensemble(h, g, 11, 20000, opt);
  const double mesh2h = std::pow(g.mesh(), 1.6);
  for (long lag : {0L, 1L, 4L}) {
    std::vector<double> x, y;
    for (const auto& p : paths) {
      const auto inc = p.increments(5);
      x.push_back(inc[3]);
      y.push_back(inc[3 + lag]);
    }
    const auto m = product_moment(x, y);
    CHECK(std::fabs(m.mean - mesh2h * fgn_autocovariance(lag, h)) < 4.0 * m.se);
  }
  GeneratorOptions tiny = opt;
  tiny.cholesky_max_n = 16;
  CHECK_THROWS_AS(generate_path(h, g, 1, tiny), CapacityError);
}

TEST_CASE("squared increment moments") {
  const HurstParam bm(0.5);
  for (long d : {1L, 2L, 7L}) CHECK(squared_increment_cross_moment(0, d, 8, bm) == doctest::Approx(1.0 / 64).epsilon(1e-15));
  CHECK_THROWS_AS(squared_increment_cross_moment(3, 3, 8, bm), DomainError);

  const HurstParam h(0.75);
  const double expected = std::pow(0.25, 3.0) + std::pow(2.0 - std::pow(2.0, 1.5), 2.0) / (2.0 * 64.0);
  CHECK(squared_increment_cross_moment(1, 0, 4, h) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(squared_increment_fourth_moment(4, h) == doctest::Approx(3.0 * std::pow(0.25, 3.0)));

  // Correction term decreases towards zero with the lag.
  double prev = squared_increment_cross_moment(0, 1, 16, h);
  for (long d = 2; d < 40; ++d) {
    const double v = squared_increment_cross_moment(0, d, 16, h);
    CHECK(v <= prev);
    CHECK(v >= std::pow(16.0, -3.0));
    prev = v;
  }

  // Monte Carlo check of the i - j = 1, n = 4 value.
  const auto paths = generate_ensemble(h, DyadicGrid(2, 1.0), 900, 100000);
  std::vector<double> a, b;
  for (const auto& p : paths) {
    const auto inc = p.increments(2);
    a.push_back(inc[1] * inc[1]);
    b.push_back(inc[0] * inc[0]);
  }
  const auto m = product_moment(a, b);
  CHECK(std::fabs(m.mean - expected) < 3.0 * m.se);
}

TEST_CASE("f_H and c_H") {
  CHECK(f_hurst(1.0, HurstParam(0.7)) == doctest::Approx(std::pow(2.0, 1.4) - 2.0));
  for (double hv : {0.55, 0.75, 0.9}) {
    const double a = 1e-4;
    CHECK(f_hurst(a, hv) / (a * a) == doctest::Approx(2 * hv * (2 * hv - 1)).epsilon(1e-3));
    CHECK(c_hurst(hv) >= 2 * hv * (2 * hv - 1));
  }
  CHECK(std::fabs(c_hurst(1.0) - 2.0) < 1e-6);
  CHECK_THROWS_AS(f_hurst(0.0, 0.7), DomainError);
  CHECK_THROWS_AS(f_hurst(1.5, 0.7), DomainError);
}

TEST_CASE("holder_constant") {
  const DyadicGrid g(6, 1.0);
  FbmPath zero{HurstParam(0.75), g, std::vector<double>(g.points(), 0.0), 0};
  CHECK(holder_constant(zero, 0.6).constant == 0.0);

  FbmPath line = zero;
  for (std::size_t j = 0; j < g.points(); ++j) line.values[j] = g.time(j);
  // Brute force over all pairs.
  double brute = 0.0;
  for (std::size_t i = 0; i < g.points(); ++i)
    for (std::size_t j = i + 1; j < g.points(); ++j)
      brute = std::max(brute, (g.time(j) - g.time(i)) / std::pow(g.time(j) - g.time(i), 0.6));
  const auto est = holder_constant(line, 0.6, HolderUse::estimator);
  CHECK(est.constant == doctest::Approx(brute));
  CHECK(est.constant == doctest::Approx(1.0));
  CHECK_THROWS_AS(holder_constant(line, 0.5, HolderUse::estimator), DomainError);

  const auto bm = generate_path(HurstParam(0.5), DyadicGrid(13, 1.0), 9);
  const auto fine = holder_constant(bm, 0.55);
  CHECK(fine.exponent_at_or_above_hurst);
  CHECK(fine.constant > holder_constant(bm.restricted(7), 0.55).constant);
  CHECK(std::isfinite(holder_constant(bm, 0.45).constant));
  // Refinement never loses pairs, so the constant is nondecreasing.
  double prev = 0.0;
  for (int k = 5; k <= 13; ++k) {
    const double c = holder_constant(bm.restricted(k), 0.45).constant;
    CHECK(c >= prev);
    prev = c;
  }
}

TEST_CASE("FBM1 round trip and CSV") {
  const auto p = generate_path(HurstParam(0.65), DyadicGrid(5, 3.0), 123456789);
  std::stringstream buf;
  write_fbm_binary(buf, p);
  CHECK(buf.str().size() == 4 + 8 + 4 + 8 + 8 + 8 * 33);
  const auto q = read_fbm_binary(buf);
  CHECK(q.values == p.values);
  CHECK(q.seed == p.seed);
  CHECK(q.grid == p.grid);
  CHECK(q.hurst == p.hurst);

  std::stringstream bad("FBM2xxxxxxxx");
  CHECK_THROWS_AS(read_fbm_binary(bad), FormatError);

  std::ostringstream csv;
  write_fbm_csv(csv, p);
  CHECK(csv.str().rfind("t,W\n0,0\n", 0) == 0);
}
