#include <cmath>
#include <vector>

#include "doctest.h"
#include "fracvort/rng.hpp"
#include "fracvort/stats.hpp"

using namespace fracvort;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::block(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::block(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::block(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("AS241 quantiles") {
  CHECK(inverse_normal_cdf(0.5) == 0.0);
  CHECK(inverse_normal_cdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
  CHECK(inverse_normal_cdf(0.8413447460685429) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(inverse_normal_cdf(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-13));
  // Round trip through erfc away from the tails.
  for (double p = 0.01; p < 1.0; p += 0.0137) {
    const double z = inverse_normal_cdf(p);
    CHECK(0.5 * std::erfc(-z / std::sqrt(2.0)) == doctest::Approx(p).epsilon(1e-13));
    CHECK(inverse_normal_cdf(1.0 - p) == doctest::Approx(-z).epsilon(1e-9));
  }
}

TEST_CASE("Gaussian stream is stateless and roughly standard normal") {
  const GaussianStream a(7), b(7), c(8);
  CHECK(a.normal(12345) == b.normal(12345));
  CHECK(a.normal(0) != c.normal(0));
  std::vector<double> z(200000);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double u = a.uniform(i);
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    z[i] = a.normal(i);
  }
  const double se = 1.0 / std::sqrt(static_cast<double>(z.size()));
  CHECK(std::fabs(stats::mean(z)) < 4.0 * se);
  CHECK(std::fabs(stats::variance(z) - 1.0) < 4.0 * std::sqrt(2.0) * se);
}

TEST_CASE("stats helpers") {
  CHECK(stats::median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(stats::median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK(stats::quantile({0.0, 10.0}, 0.25) == doctest::Approx(2.5));
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{3, 5, 7, 9};
  const auto fit = stats::linear_fit(x, y);
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(fit.intercept == doctest::Approx(1.0));
  const std::vector<double> y2{2, 4, 8, 16};
  CHECK(stats::log2_slope(x, y2) == doctest::Approx(1.0));
}
