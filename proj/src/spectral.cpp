#include "fracvort/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>
#include <utility>

#include "binary_io.hpp"
#include "fft.hpp"
#include "fracvort/errors.hpp"

namespace fracvort {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_same_grid(const FourierField& a, const FourierField& b, const char* where) {
  if (a.grid_n() != b.grid_n())
    throw ConfigError(std::string(where) + ": grid mismatch (" + std::to_string(a.grid_n()) + " vs " +
                      std::to_string(b.grid_n()) + ")");
}

int wavenumber(int i, int n) noexcept { return i <= n / 2 ? i : i - n; }

// Inverse transform of two Hermitian spectra with a single complex FFT:
// ifft(A + iB) = a + ib when a and b are real.
void inverse_pair(const FourierField& a, const FourierField& b, std::vector<double>& ra, std::vector<double>& rb) {
  const int n = a.grid_n();
  const std::size_t total = a.size();
  std::vector<complex> packed(total), phys(total);
  const auto ca = a.coeffs();
  const auto cb = b.coeffs();
  for (std::size_t i = 0; i < total; ++i) packed[i] = ca[i] + complex(-cb[i].imag(), cb[i].real());
  detail::fft_2d(n, packed, phys, detail::FftDirection::backward);
  ra.resize(total);
  rb.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    ra[i] = phys[i].real();
    rb[i] = phys[i].imag();
  }
}

// Forward transform of two real arrays with one FFT; spectra are separated by
// P_k = (Z_k + conj Z_{-k}) / 2 and Q_k = (Z_k - conj Z_{-k}) / 2i.
void forward_pair(int n, std::span<const double> p, std::span<const double> q, FourierField& fp, FourierField& fq) {
  const std::size_t total = static_cast<std::size_t>(n) * n;
  std::vector<complex> packed(total), spectrum(total);
  for (std::size_t i = 0; i < total; ++i) packed[i] = complex(p[i], q[i]);
  detail::fft_2d(n, packed, spectrum, detail::FftDirection::forward);
  const double scale = 1.0 / static_cast<double>(total);
  fp = FourierField(n);
  fq = FourierField(n);
  auto op = fp.coeffs();
  auto oq = fq.coeffs();
  for (int i1 = 0; i1 < n; ++i1) {
    const int j1 = (n - i1) % n;
    for (int i2 = 0; i2 < n; ++i2) {
      const int j2 = (n - i2) % n;
      const complex z = spectrum[static_cast<std::size_t>(i1) * n + i2];
      const complex zm = std::conj(spectrum[static_cast<std::size_t>(j1) * n + j2]);
      const std::size_t idx = static_cast<std::size_t>(i1) * n + i2;
      op[idx] = 0.5 * scale * (z + zm);
      const complex d = 0.5 * scale * (z - zm);
      oq[idx] = complex(d.imag(), -d.real());
    }
  }
}

FourierField dealiased(const FourierField& f) {
  FourierField g = f;
  dealias(g);
  return g;
}

}  // namespace

SobolevIndex::SobolevIndex(double alpha) : alpha_(alpha) {
  if (!std::isfinite(alpha) || std::fabs(alpha) > 8.0)
    throw DomainError("Sobolev index must satisfy |alpha| <= 8, got " + std::to_string(alpha));
}

FourierField::FourierField(int grid_n) : n_(grid_n) {
  if (grid_n < 8 || grid_n % 2 != 0) throw DomainError("grid size must be even and >= 8, got " + std::to_string(grid_n));
  coeffs_.assign(static_cast<std::size_t>(grid_n) * grid_n, complex{});
}

FourierField FourierField::from_physical(std::span<const double> samples, int grid_n) {
  std::vector<complex> c(samples.begin(), samples.end());
  return from_physical(std::span<const complex>(c), grid_n);
}

FourierField FourierField::from_physical(std::span<const complex> samples, int grid_n) {
  FourierField f(grid_n);
  if (samples.size() != f.size()) throw DomainError("physical sample count does not match N^2");
  detail::fft_2d(grid_n, samples, f.coeffs_, detail::FftDirection::forward);
  const double scale = 1.0 / static_cast<double>(f.size());
  for (auto& c : f.coeffs_) c *= scale;
  return f;
}

FourierField FourierField::from_function(int grid_n, const std::function<double(double, double)>& fn) {
  std::vector<double> samples(static_cast<std::size_t>(grid_n) * grid_n);
  const double h = kTwoPi / grid_n;
  for (int j1 = 0; j1 < grid_n; ++j1)
    for (int j2 = 0; j2 < grid_n; ++j2) samples[static_cast<std::size_t>(j1) * grid_n + j2] = fn(h * j1, h * j2);
  return from_physical(std::span<const double>(samples), grid_n);
}

FourierField FourierField::single_mode(int grid_n, Wavevector k, complex c) {
  FourierField f(grid_n);
  f[k] = c;
  return f;
}

std::vector<complex> FourierField::to_physical_complex() const {
  std::vector<complex> out(coeffs_.size());
  detail::fft_2d(n_, coeffs_, out, detail::FftDirection::backward);
  return out;
}

std::vector<double> FourierField::to_physical() const {
  const auto c = to_physical_complex();
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
  return out;
}

Wavevector FourierField::wavevector(std::size_t index) const noexcept {
  const int i1 = static_cast<int>(index / static_cast<std::size_t>(n_));
  const int i2 = static_cast<int>(index % static_cast<std::size_t>(n_));
  return {wavenumber(i1, n_), wavenumber(i2, n_)};
}

bool FourierField::resolves(Wavevector k) const noexcept {
  const int lo = -n_ / 2 + 1;
  const int hi = n_ / 2;
  return k.k1 >= lo && k.k1 <= hi && k.k2 >= lo && k.k2 <= hi;
}

std::size_t FourierField::index_of(Wavevector k) const {
  if (!resolves(k))
    throw DomainError("wavevector (" + std::to_string(k.k1) + ", " + std::to_string(k.k2) + ") outside the resolved band of N = " +
                      std::to_string(n_));
  const int i1 = k.k1 < 0 ? k.k1 + n_ : k.k1;
  const int i2 = k.k2 < 0 ? k.k2 + n_ : k.k2;
  return static_cast<std::size_t>(i1) * n_ + i2;
}

double FourierField::hermitian_defect() const {
  double worst = 0.0;
  for (int i1 = 0; i1 < n_; ++i1) {
    const int j1 = (n_ - i1) % n_;
    for (int i2 = 0; i2 < n_; ++i2) {
      const int j2 = (n_ - i2) % n_;
      const complex a = coeffs_[static_cast<std::size_t>(i1) * n_ + i2];
      const complex b = coeffs_[static_cast<std::size_t>(j1) * n_ + j2];
      worst = std::max(worst, std::abs(b - std::conj(a)));
    }
  }
  return worst;
}

double FourierField::out_of_band_magnitude() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < coeffs_.size(); ++i)
    if (!in_dealias_band(wavevector(i), n_)) worst = std::max(worst, std::abs(coeffs_[i]));
  return worst;
}

FourierField& FourierField::operator+=(const FourierField& other) {
  require_same_grid(*this, other, "operator+=");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

FourierField& FourierField::operator-=(const FourierField& other) {
  require_same_grid(*this, other, "operator-=");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

FourierField& FourierField::operator*=(complex s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

FourierField& FourierField::operator*=(double s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

FourierField& FourierField::axpy(double s, const FourierField& other) {
  require_same_grid(*this, other, "axpy");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += s * other.coeffs_[i];
  return *this;
}

int dealias_cutoff(int grid_n) noexcept { return grid_n / 3; }

bool in_dealias_band(Wavevector k, int grid_n) noexcept {
  const int c = dealias_cutoff(grid_n);
  return std::abs(k.k1) <= c && std::abs(k.k2) <= c;
}

void dealias(FourierField& f) {
  auto c = f.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i)
    if (!in_dealias_band(f.wavevector(i), f.grid_n())) c[i] = 0.0;
}

double sobolev_norm(const FourierField& f, SobolevIndex alpha) {
  const auto c = f.coeffs();
  const double p = 2.0 * alpha.alpha();
  double sum = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double mag2 = std::norm(c[i]);
    if (mag2 == 0.0) continue;
    sum += std::pow(1.0 + f.wavevector(i).norm_squared(), p) * mag2;
  }
  return std::sqrt(sum);
}

double physical_l2_norm(const FourierField& f) {
  const auto phys = f.to_physical_complex();
  double sum = 0.0;
  for (const auto& v : phys) sum += std::norm(v);
  const double cell = kTwoPi / f.grid_n();
  return std::sqrt(sum * cell * cell);
}

std::vector<double> heat_multipliers(int grid_n, double t) {
  if (!(t >= 0.0)) throw DomainError("heat semigroup requires t >= 0");
  const FourierField probe(grid_n);
  std::vector<double> m(probe.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::exp(-t * probe.wavevector(i).norm_squared());
  return m;
}

void apply_multipliers(FourierField& f, std::span<const double> multipliers) {
  auto c = f.coeffs();
  if (multipliers.size() != c.size()) throw ConfigError("multiplier table does not match grid");
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= multipliers[i];
}

FourierField heat_semigroup(const FourierField& f, double t) {
  if (!(t >= 0.0)) throw DomainError("heat semigroup requires t >= 0, got " + std::to_string(t));
  FourierField g = f;
  if (t == 0.0) return g;
  auto c = g.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= std::exp(-t * g.wavevector(i).norm_squared());
  return g;
}

// The Nyquist component along the differentiated axis is dropped: i k c_k is
// not Hermitian there, and dropping it keeps derivatives of real fields real.
FourierField partial(const FourierField& f, int direction) {
  if (direction != 1 && direction != 2) throw DomainError("partial derivative direction must be 1 or 2");
  FourierField g(f.grid_n());
  const auto src = f.coeffs();
  auto dst = g.coeffs();
  const int nyq = f.grid_n() / 2;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Wavevector k = f.wavevector(i);
    const int kd = direction == 1 ? k.k1 : k.k2;
    dst[i] = kd == nyq ? complex{} : complex(0.0, kd) * src[i];
  }
  return g;
}

FourierField laplacian(const FourierField& f) {
  FourierField g = f;
  auto c = g.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= -static_cast<double>(g.wavevector(i).norm_squared());
  return g;
}

FourierField curl(const VectorField& v) { return partial(v.c2, 1) - partial(v.c1, 2); }

FourierField divergence(const VectorField& v) { return partial(v.c1, 1) + partial(v.c2, 2); }

VectorField biot_savart(const FourierField& omega) {
  const double l2 = sobolev_norm(omega, SobolevIndex(0.0));
  if (std::abs(omega.mean_mode()) > 1e-12 * (1.0 + l2))
    throw DomainError("biot_savart: vorticity must have zero mean");
  const int n = omega.grid_n();
  VectorField u{FourierField(n), FourierField(n)};
  const auto w = omega.coeffs();
  auto u1 = u.c1.coeffs();
  auto u2 = u.c2.coeffs();
  const int nyq = n / 2;
  for (std::size_t i = 1; i < w.size(); ++i) {
    const Wavevector k = omega.wavevector(i);
    const complex psi = -w[i] / static_cast<double>(k.norm_squared());
    u1[i] = k.k2 == nyq ? complex{} : -complex(0.0, k.k2) * psi;
    u2[i] = k.k1 == nyq ? complex{} : complex(0.0, k.k1) * psi;
  }
  return u;
}

FourierField advect(const VectorField& u, const FourierField& omega) {
  require_same_grid(u.c1, omega, "advect");
  require_same_grid(u.c2, omega, "advect");
  const int n = omega.grid_n();
  const FourierField w = dealiased(omega);
  std::vector<double> u1, u2, g1, g2;
  inverse_pair(dealiased(u.c1), dealiased(u.c2), u1, u2);
  inverse_pair(partial(w, 1), partial(w, 2), g1, g2);
  std::vector<double> prod(u1.size());
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = u1[i] * g1[i] + u2[i] * g2[i];
  FourierField out = FourierField::from_physical(std::span<const double>(prod), n);
  dealias(out);
  return out;
}

TransportOperator::TransportOperator(VectorField xi, double divergence_tolerance) : xi_(std::move(xi)) {
  require_same_grid(xi_.c1, xi_.c2, "TransportOperator");
  const FourierField div = divergence(xi_);
  double worst = 0.0;
  for (const auto& c : div.coeffs()) worst = std::max(worst, std::abs(c));
  if (worst > divergence_tolerance)
    throw ConfigError("transport field is not divergence-free (max |div xi_k| = " + std::to_string(worst) + ")");
  zero_ = std::all_of(xi_.c1.coeffs().begin(), xi_.c1.coeffs().end(), [](complex c) { return c == complex{}; }) &&
          std::all_of(xi_.c2.coeffs().begin(), xi_.c2.coeffs().end(), [](complex c) { return c == complex{}; });
  inverse_pair(dealiased(xi_.c1), dealiased(xi_.c2), xi1_phys_, xi2_phys_);
}

FourierField TransportOperator::apply(const FourierField& omega) const {
  require_same_grid(xi_.c1, omega, "transport");
  const int n = omega.grid_n();
  if (zero_) return FourierField(n);
  const FourierField w = dealiased(omega);
  std::vector<double> g1, g2;
  inverse_pair(partial(w, 1), partial(w, 2), g1, g2);
  std::vector<double> prod(g1.size());
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = xi1_phys_[i] * g1[i] + xi2_phys_[i] * g2[i];
  FourierField out = FourierField::from_physical(std::span<const double>(prod), n);
  dealias(out);
  return out;
}

std::pair<FourierField, FourierField> TransportOperator::apply_with_advection(const VectorField& u,
                                                                              const FourierField& omega) const {
  require_same_grid(xi_.c1, omega, "transport");
  require_same_grid(u.c1, omega, "advect");
  const int n = omega.grid_n();
  const FourierField w = dealiased(omega);
  std::vector<double> u1, u2, g1, g2;
  inverse_pair(dealiased(u.c1), dealiased(u.c2), u1, u2);
  inverse_pair(partial(w, 1), partial(w, 2), g1, g2);
  std::vector<double> adv(g1.size()), tr(g1.size());
  for (std::size_t i = 0; i < adv.size(); ++i) {
    adv[i] = u1[i] * g1[i] + u2[i] * g2[i];
    tr[i] = xi1_phys_[i] * g1[i] + xi2_phys_[i] * g2[i];
  }
  std::pair<FourierField, FourierField> out;
  forward_pair(n, adv, tr, out.first, out.second);
  dealias(out.first);
  dealias(out.second);
  return out;
}

FourierField transport(const VectorField& xi, const FourierField& omega) { return TransportOperator(xi).apply(omega); }

complex pair(const FourierField& f, Wavevector k) {
  if (!f.resolves(k))
    throw DomainError("pair: test mode (" + std::to_string(k.k1) + ", " + std::to_string(k.k2) + ") outside the resolved band");
  return kTwoPi * kTwoPi * f[k];
}

double pair_real(const FourierField& f, Wavevector k, Channel channel) {
  const complex z = pair(f, k);
  return channel == Channel::real ? z.real() : z.imag();
}

void write_field_binary(std::ostream& out, const FourierField& f) {
  detail::put_magic(out, "FLD1");
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(f.grid_n()));
  for (const auto& c : f.coeffs()) {
    detail::put_le<double>(out, c.real());
    detail::put_le<double>(out, c.imag());
  }
}

FourierField read_field_binary(std::istream& in) {
  detail::expect_magic(in, "FLD1");
  const auto n = detail::get_le<std::uint32_t>(in);
  if (n < 8 || n % 2 != 0 || n > 8192) throw FormatError("FLD1: invalid grid size " + std::to_string(n));
  FourierField f(static_cast<int>(n));
  for (auto& c : f.coeffs()) {
    const double re = detail::get_le<double>(in);
    const double im = detail::get_le<double>(in);
    c = complex(re, im);
  }
  return f;
}

void write_field_csv(std::ostream& out, const FourierField& f) {
  const int n = f.grid_n();
  const auto phys = f.to_physical();
  const double h = kTwoPi / n;
  out << "x1,x2,value\n" << std::setprecision(17);
  for (int j1 = 0; j1 < n; ++j1)
    for (int j2 = 0; j2 < n; ++j2) out << h * j1 << ',' << h * j2 << ',' << phys[static_cast<std::size_t>(j1) * n + j2] << '\n';
}

}  // namespace fracvort
