#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "fracvort/errors.hpp"
#include "fracvort/hurst.hpp"
#include "fracvort/stats.hpp"

using namespace fracvort;

TEST_CASE("quadratic variation elementary cases") {
  const DyadicGrid g(10, 1.0);
  const std::vector<double> flat(g.points(), 3.0);
  CHECK(quadratic_variation(flat, g, 7, 1.0) == 0.0);

  std::vector<double> line(g.points());
  for (std::size_t j = 0; j < g.points(); ++j) line[j] = g.time(j);
  for (int k : {0, 3, 10})
    for (double t : {1.0, 0.7, 0.25}) {
      const double expect = std::floor(t * std::ldexp(1.0, k)) * std::ldexp(1.0, -2 * k);
      CHECK(quadratic_variation(line, g, k, t) == doctest::Approx(expect).epsilon(1e-14));
    }
  CHECK_THROWS_AS(quadratic_variation(line, g, 11, 1.0), DomainError);
  CHECK_THROWS_AS(quadratic_variation(line, g, 5, 1.5), DomainError);
  CHECK_THROWS_AS(quadratic_variation(std::vector<double>(5), g, 2, 1.0), DomainError);
}

TEST_CASE("QV affine behaviour and estimator invariance") {
  const DyadicGrid g(12, 1.0);
  const auto p = generate_path(HurstParam(0.7), g, 3);
  std::vector<double> y(p.values.size());
  for (std::size_t j = 0; j < y.size(); ++j) y[j] = -2.5 * p.values[j] + 7.0;
  const double a = quadratic_variation(p.values, g, 9, 1.0);
  CHECK(quadratic_variation(y, g, 9, 1.0) == doctest::Approx(6.25 * a).epsilon(1e-13));
  const auto r1 = hurst_estimate(p.values, g, 6, 10);
  const auto r2 = hurst_estimate(y, g, 6, 10);
  for (std::size_t i = 0; i < r1.h_sequence.size(); ++i)
    CHECK(std::fabs(r1.h_sequence[i] - r2.h_sequence[i]) < 1e-12);
}

TEST_CASE("scaled QV of a single fBm path at k = 14") {
  const DyadicGrid g(14, 1.0);
  const auto p = generate_path(HurstParam(0.75), g, 2024);
  const auto l = qv_ladder(p.values, g, 14, 14, 1.0, 0.75);
  CHECK(l.scaled_qv.front() >= 0.9);
  CHECK(l.scaled_qv.front() <= 1.1);
  CHECK_FALSE(l.target.has_value());
}

TEST_CASE("prop15 Monte Carlo contract") {
  CHECK_THROWS_AS(prop15_monte_carlo(0.6, {64, 128}, 1.0, 999, 1), CapacityError);
  CHECK_THROWS_AS(prop15_monte_carlo(0.6, {64, 100}, 1.0, 1000, 1), DomainError);

  const auto zero = prop15_monte_carlo(0.7, {64, 256}, 0.0, 1000, 1);
  for (const auto& r : zero.rows) CHECK(r.mse == 0.0);
  CHECK(std::isnan(zero.slope));
  CHECK_FALSE(zero.pass);

  // Brownian reference: n^0 QV - t has variance exactly 2t/n.
  const std::vector<long> ns{64, 128, 256, 512, 1024, 2048, 4096};
  const auto bm = prop15_monte_carlo(0.5, ns, 1.0, 2000, 500);
  for (const auto& r : bm.rows) CHECK(std::fabs(r.mse - 2.0 / static_cast<double>(r.n)) < 4.0 * r.standard_error);
  CHECK(bm.slope >= 0.8);
  CHECK(bm.slope <= 1.2);
  CHECK(bm.threshold == doctest::Approx(0.8));
  CHECK(bm.pass);
}

TEST_CASE("scaled QV limit for synthetic Young equations") {
  const DyadicGrid g(15, 1.0);
  const auto w = generate_path(HurstParam(0.75), g, 77);

  // a = 1, x = 2: limit int_0^1 4 ds = 4.
  const auto y = synthetic_young_sde(w, [](double, double) { return 1.0; }, [](double, double) { return 2.0; });
  const std::vector<double> two(g.points(), 2.0);
  const auto c = scaled_qv_limit_check(y, two, g, 0.75, 8, 14, 1.0);
  CHECK(c.target == doctest::Approx(4.0));
  CHECK(c.scaled_qv.back() >= 3.4);
  CHECK(c.scaled_qv.back() <= 4.6);
  CHECK(c.within_band);
  CHECK_FALSE(c.inconclusive);

  // x_s = s: limit 1/3.
  const auto z = synthetic_young_sde(w, [](double, double) { return 0.0; }, [](double s, double) { return s; });
  std::vector<double> s(g.points());
  for (std::size_t j = 0; j < g.points(); ++j) s[j] = g.time(j);
  const auto d = scaled_qv_limit_check(z, s, g, 0.75, 8, 14, 1.0);
  CHECK(d.target == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
  CHECK(std::fabs(d.scaled_qv.back() - 1.0 / 3.0) <= 0.15 / 3.0);

  // No noise channel: target 0, flagged.
  const std::vector<double> none(g.points(), 0.0);
  const auto e = scaled_qv_limit_check(none, none, g, 0.75, 8, 14);
  CHECK(e.inconclusive);
  CHECK(e.gap.back() == 0.0);
}

TEST_CASE("drift-only input: scaled QV vanishes at rate mesh^{2-2H}") {
  for (double h : {0.6, 0.75, 0.9}) {
    const DyadicGrid g(15, 1.0);
    const auto w = generate_path(HurstParam(h), g, 31);
    const auto y = synthetic_young_sde(w, [](double, double v) { return 1.0 + std::sin(3.0 * v); },
                                       [](double, double) { return 0.0; });
    const auto l = qv_ladder(y, g, 6, 15, 1.0, h);
    std::vector<double> k, lq;
    for (int i = 6; i <= 15; ++i) {
      k.push_back(i);
      lq.push_back(std::log2(l.scaled_qv[static_cast<std::size_t>(i - 6)]));
    }
    CHECK(std::fabs(-stats::linear_fit(k, lq).slope - (2.0 - 2.0 * h)) <= 0.2);
  }
}

TEST_CASE("ratio estimator elementary cases") {
  const DyadicGrid g(10, 1.0);
  std::vector<double> line(g.points());
  for (std::size_t j = 0; j < g.points(); ++j) line[j] = 3.0 * g.time(j);
  const auto r = hurst_estimate(line, g, 2, 9);
  for (std::size_t i = 0; i < r.h_sequence.size(); ++i) {
    CHECK(r.ratio_sequence[i] == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(r.h_sequence[i] == doctest::Approx(1.0).epsilon(1e-13));
  }
  CHECK(r.slope_h == doctest::Approx(1.0));
  CHECK_THROWS_AS(hurst_estimate(line, g, 2, 10), DomainError);

  const std::vector<double> flat(g.points(), 1.0);
  const auto f = hurst_estimate(flat, g, 4, 6);
  CHECK(f.undefined.back());
  CHECK_FALSE(f.final_defined);
  CHECK(std::isnan(f.final_h));

  // Fine-scale oscillation makes the coarse QV tiny: H_k far below 0, flagged and kept.
  std::vector<double> zig(g.points());
  for (std::size_t j = 0; j < g.points(); ++j) zig[j] = (j % 2 == 0 ? 0.0 : 1.0) + 1e-3 * g.time(j);
  const auto z = hurst_estimate(zig, g, 9, 9);
  CHECK(z.out_of_range.back());
  CHECK(z.final_h < -1.0);
}

TEST_CASE("ratio estimator on Brownian and fractional paths") {
  const DyadicGrid g(15, 1.0);
  for (double h : {0.5, 0.75}) {
    const auto est = fbm_estimates(HurstParam(h), g, 14, 1000, 20);
    CHECK(std::fabs(stats::median(est) - h) <= 0.05);
    const auto s = summarize(est);
    CHECK(s.q25 <= s.median);
    CHECK(s.median <= s.q75);
    CHECK(s.count == 20);
  }
}

TEST_CASE("estimates from a solver run") {
  auto c = ModelConfig::defaults(32, 0.75);
  c.level = 11;
  const auto w = generate_path(c.hurst, DyadicGrid(c.level, c.horizon), 4);
  const auto s = solve(c, w);
  const auto e = estimate_from_solver(s, c, {1, 0}, 6, 10);
  CHECK_FALSE(e.inconclusive);
  CHECK(e.real.channel == "real");
  CHECK(e.imag.channel == "imag");
  CHECK(e.real.h_sequence.size() == 5);
  CHECK(std::isfinite(e.real.final_h));

  c.xi = xi_preset("zero", 32);
  const auto d = solve(c, w);
  const auto ed = estimate_from_solver(d, c, {1, 0}, 6, 10);
  CHECK(ed.inconclusive);
  // Drift-only observables are smooth and register close to H = 1.
  CHECK(std::fabs(ed.imag.final_h - 1.0) < 0.05);

  c.norm_ceiling = 1e-6;
  const auto aborted = solve(c, w);
  CHECK_THROWS_AS(estimate_from_solver(aborted, c, {1, 0}, 6, 10), DomainError);
}

TEST_CASE("estimator CSV") {
  const DyadicGrid g(8, 1.0);
  const auto p = generate_path(HurstParam(0.6), g, 9);
  const auto r = hurst_estimate(p.values, g, 4, 6);
  std::ostringstream out;
  write_estimator_csv(out, r, g, 0.6);
  const auto text = out.str();
  CHECK(text.rfind("k,qv,scaled_qv,ratio,h_k,channel\n4,", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}
