#include "fracvort/fbm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <utility>

#include "binary_io.hpp"
#include "fft.hpp"
#include "fracvort/errors.hpp"
#include "fracvort/parallel.hpp"
#include "fracvort/rng.hpp"

namespace fracvort {

HurstParam::HurstParam(double value) : value_(value) {
  if (!(value > 0.0 && value < 1.0)) throw DomainError("Hurst parameter must lie in (0, 1), got " + std::to_string(value));
}

void HurstParam::require_long_memory() const {
  if (!(value_ > 0.5)) throw DomainError("estimation routines require H > 1/2, got " + std::to_string(value_));
}

DyadicGrid::DyadicGrid(int level, double horizon) : level_(level), horizon_(horizon) {
  if (level < 0 || level > 40) throw DomainError("dyadic level out of range: " + std::to_string(level));
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("grid horizon must be positive");
}

bool DyadicGrid::contains(double t) const noexcept {
  if (t < -1e-12 * mesh() || t > horizon_ + 1e-12 * mesh()) return false;
  const double pos = t / mesh();
  return std::fabs(pos - std::round(pos)) <= 1e-9;
}

std::size_t DyadicGrid::index_of(double t) const {
  if (!contains(t)) throw DomainError("time " + std::to_string(t) + " is not a point of the level-" + std::to_string(level_) + " grid");
  return static_cast<std::size_t>(std::llround(t / mesh()));
}

std::size_t DyadicGrid::complete_intervals(double t) const noexcept {
  if (t <= 0.0) return 0;
  const double pos = t / mesh();
  const double r = std::round(pos);
  const double whole = std::fabs(pos - r) <= 1e-9 ? r : std::floor(pos);
  return std::min(intervals(), static_cast<std::size_t>(whole));
}

DyadicGrid DyadicGrid::coarsened(int level) const {
  if (level > level_) throw DomainError("cannot coarsen to a finer level");
  return DyadicGrid(level, horizon_);
}

FbmPath FbmPath::restricted(int level) const {
  const DyadicGrid coarse = grid.coarsened(level);
  const std::size_t stride = std::size_t{1} << (grid.level() - level);
  FbmPath out{hurst, coarse, {}, seed};
  out.values.resize(coarse.points());
  for (std::size_t j = 0; j < coarse.points(); ++j) out.values[j] = values[j * stride];
  return out;
}

std::vector<double> FbmPath::increments(int level) const {
  if (level > grid.level()) throw DomainError("increment level exceeds path level");
  const std::size_t stride = std::size_t{1} << (grid.level() - level);
  const std::size_t n = std::size_t{1} << level;
  std::vector<double> inc(n);
  for (std::size_t j = 0; j < n; ++j) inc[j] = values[(j + 1) * stride] - values[j * stride];
  return inc;
}

double fbm_covariance(double s, double t, HurstParam hurst) {
  if (s < 0.0 || t < 0.0) throw DomainError("fbm_covariance: negative time");
  const double h2 = 2.0 * hurst.value();
  return 0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::fabs(t - s), h2));
}

double fgn_autocovariance(long lag, HurstParam hurst) {
  const double h2 = 2.0 * hurst.value();
  const double k = std::fabs(static_cast<double>(lag));
  return 0.5 * (std::pow(k + 1.0, h2) + std::pow(std::fabs(k - 1.0), h2) - 2.0 * std::pow(k, h2));
}

namespace {

// Eigenvalues of the 2n circulant embedding of unit-mesh fGn, cached per (H, n).
class EmbeddingCache {
 public:
  std::shared_ptr<const std::vector<double>> get(HurstParam hurst, std::size_t n) {
    const auto key = std::make_pair(std::bit_cast<std::uint64_t>(hurst.value()), n);
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const std::size_t m = 2 * n;
    std::vector<std::complex<double>> row(m), eig(m);
    for (std::size_t j = 0; j <= n; ++j) row[j] = fgn_autocovariance(static_cast<long>(j), hurst);
    for (std::size_t j = 1; j < n; ++j) row[m - j] = row[j];
    detail::fft_1d(row, eig, detail::FftDirection::forward);
    auto lambda = std::make_shared<std::vector<double>>(m);
    for (std::size_t j = 0; j < m; ++j) (*lambda)[j] = eig[j].real();
    if (cache_.size() > 64) cache_.clear();
    cache_.emplace(key, lambda);
    return lambda;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::uint64_t, std::size_t>, std::shared_ptr<const std::vector<double>>> cache_;
};

EmbeddingCache& embedding_cache() {
  static EmbeddingCache c;
  return c;
}

// Returns false when the embedding has a materially negative eigenvalue.
bool circulant_increments(HurstParam hurst, std::size_t n, const GaussianStream& gauss, std::vector<double>& out) {
  const auto lambda_ptr = embedding_cache().get(hurst, n);
  const auto& lambda = *lambda_ptr;
  const std::size_t m = 2 * n;
  const double lmax = *std::max_element(lambda.begin(), lambda.end());
  for (double l : lambda)
    if (l < -1e-10 * lmax) return false;
  auto root = [&](std::size_t j, double div) { return std::sqrt(std::max(lambda[j], 0.0) / div); };

  std::vector<std::complex<double>> w(m), x(m);
  const double md = static_cast<double>(m);
  w[0] = root(0, md) * gauss.normal(0);
  w[n] = root(n, md) * gauss.normal(1);
  for (std::size_t j = 1; j < n; ++j) {
    const double s = root(j, 2.0 * md);
    w[j] = {s * gauss.normal(2 * j), s * gauss.normal(2 * j + 1)};
    w[m - j] = std::conj(w[j]);
  }
  detail::fft_1d(w, x, detail::FftDirection::forward);
  out.resize(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = x[j].real();
  return true;
}

void cholesky_increments(HurstParam hurst, std::size_t n, const GaussianStream& gauss, std::vector<double>& out) {
  // Lower-triangular factor of the Toeplitz covariance, packed row-wise.
  std::vector<double> L(n * (n + 1) / 2);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return L[i * (i + 1) / 2 + j]; };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = fgn_autocovariance(static_cast<long>(i - j), hurst);
      for (std::size_t k = 0; k < j; ++k) s -= at(i, k) * at(j, k);
      if (i == j) {
        if (s <= 0.0) throw DomainError("fGn covariance is not positive definite");
        at(i, i) = std::sqrt(s);
      } else {
        at(i, j) = s / at(j, j);
      }
    }
  }
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = gauss.normal(i);
  out.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k <= i; ++k) s += at(i, k) * z[k];
    out[i] = s;
  }
}

}  // namespace

FbmPath generate_path(HurstParam hurst, const DyadicGrid& grid, std::uint64_t seed, const GeneratorOptions& options) {
  if (grid.level() > options.max_level)
    throw CapacityError("grid level " + std::to_string(grid.level()) + " exceeds configured maximum " +
                        std::to_string(options.max_level));
  const std::size_t n = grid.intervals();
  const GaussianStream gauss(seed);
  std::vector<double> inc;
  const bool embedded = !options.force_cholesky && circulant_increments(hurst, n, gauss, inc);
  if (!embedded) {
    if (n > options.cholesky_max_n)
      throw CapacityError("circulant embedding failed and n = " + std::to_string(n) + " exceeds the Cholesky limit");
    cholesky_increments(hurst, n, gauss, inc);
  }
  const double scale = std::pow(grid.mesh(), hurst.value());
  FbmPath path{hurst, grid, std::vector<double>(n + 1, 0.0), seed};
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    acc += scale * inc[j];
    path.values[j + 1] = acc;
  }
  return path;
}

std::vector<FbmPath> generate_ensemble(HurstParam hurst, const DyadicGrid& grid, std::uint64_t seed, std::size_t count,
                                       const GeneratorOptions& options) {
  std::vector<FbmPath> paths(count, FbmPath{hurst, grid, {}, 0});
  parallel_for(count, [&](std::size_t i) { paths[i] = generate_path(hurst, grid, seed + i, options); });
  return paths;
}

double squared_increment_cross_moment(long i, long j, long n, HurstParam hurst) {
  if (i == j) throw DomainError("cross moment needs i != j; use squared_increment_fourth_moment");
  if (n < 1) throw DomainError("mesh count n must be >= 1");
  const double h2 = 2.0 * hurst.value();
  const double d = std::fabs(static_cast<double>(i - j));
  const double nd = static_cast<double>(n);
  const double corr = 2.0 * std::pow(d, h2) - std::pow(std::fabs(d + 1.0), h2) - std::pow(std::fabs(d - 1.0), h2);
  return std::pow(nd, -2.0 * h2) + corr * corr / (2.0 * std::pow(nd, 2.0 * h2));
}

double squared_increment_fourth_moment(long n, HurstParam hurst) {
  if (n < 1) throw DomainError("mesh count n must be >= 1");
  return 3.0 * std::pow(static_cast<double>(n), -4.0 * hurst.value());
}

double f_hurst(double a, double h) {
  if (!(a > 0.0 && a <= 1.0)) throw DomainError("f_H requires a in (0, 1]");
  if (!(h > 0.0 && h <= 1.0)) throw DomainError("f_H requires H in (0, 1]");
  const double h2 = 2.0 * h;
  return std::pow(1.0 - a, h2) + std::pow(1.0 + a, h2) - 2.0;
}

double f_hurst(double a, HurstParam hurst) { return f_hurst(a, hurst.value()); }

double c_hurst(double h, std::size_t scan_points) {
  if (scan_points == 0) throw DomainError("c_H scan needs at least one point");
  if (!(h > 0.0 && h <= 1.0)) throw DomainError("c_H requires H in (0, 1]");
  double sup = 2.0 * h * (2.0 * h - 1.0);
  for (std::size_t j = 1; j <= scan_points; ++j) {
    const double a = static_cast<double>(j) / static_cast<double>(scan_points);
    sup = std::max(sup, f_hurst(a, h) / (a * a));
  }
  return sup;
}

double c_hurst(HurstParam hurst, std::size_t scan_points) { return c_hurst(hurst.value(), scan_points); }

double holder_seminorm(std::span<const double> values, const DyadicGrid& grid, double gamma) {
  if (values.size() != grid.points()) throw DomainError("series length does not match grid");
  const std::size_t n = values.size();
  const double mesh = grid.mesh();
  // |t - s|^{-gamma} depends only on the lag.
  std::vector<double> weight(n);
  for (std::size_t lag = 1; lag < n; ++lag) weight[lag] = std::pow(mesh * static_cast<double>(lag), -gamma);
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) best = std::max(best, std::fabs(values[j] - values[i]) * weight[j - i]);
  return best;
}

HolderEstimate holder_constant(const FbmPath& path, double gamma, HolderUse use) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("Hölder exponent must lie in (0, 1)");
  if (use == HolderUse::estimator && gamma <= 0.5) throw DomainError("estimator use requires gamma > 1/2");
  HolderEstimate est;
  est.exponent = gamma;
  est.grid_level_used = path.grid.level();
  est.exponent_at_or_above_hurst = gamma >= path.hurst.value();
  est.constant = holder_seminorm(path.values, path.grid, gamma);
  return est;
}

void write_fbm_binary(std::ostream& out, const FbmPath& path) {
  detail::put_magic(out, "FBM1");
  detail::put_le<double>(out, path.hurst.value());
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(path.grid.level()));
  detail::put_le<double>(out, path.grid.horizon());
  detail::put_le<std::uint64_t>(out, path.seed);
  for (double v : path.values) detail::put_le<double>(out, v);
}

FbmPath read_fbm_binary(std::istream& in) {
  detail::expect_magic(in, "FBM1");
  const double h = detail::get_le<double>(in);
  const auto level = detail::get_le<std::uint32_t>(in);
  const double horizon = detail::get_le<double>(in);
  const auto seed = detail::get_le<std::uint64_t>(in);
  FbmPath path{HurstParam(h), DyadicGrid(static_cast<int>(level), horizon), {}, seed};
  path.values.resize(path.grid.points());
  for (double& v : path.values) v = detail::get_le<double>(in);
  return path;
}

void write_fbm_csv(std::ostream& out, const FbmPath& path) {
  const auto old = out.precision(17);
  out << "t,W\n";
  for (std::size_t j = 0; j < path.values.size(); ++j) out << path.grid.time(j) << ',' << path.values[j] << '\n';
  out.precision(old);
}

}  // namespace fracvort
