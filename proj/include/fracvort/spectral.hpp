#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace fracvort {

using complex = std::complex<double>;

/// Integer wavevector on the torus [0, 2pi)^2.
struct Wavevector {
  int k1 = 0;
  int k2 = 0;

  int norm_squared() const noexcept { return k1 * k1 + k2 * k2; }
  Wavevector operator-() const noexcept { return {-k1, -k2}; }
  friend bool operator==(const Wavevector&, const Wavevector&) = default;
};

/// Order 2*alpha of the scale B_alpha = H^{2 alpha}; |alpha| <= 8.
class SobolevIndex {
 public:
  explicit SobolevIndex(double alpha);
  double alpha() const noexcept { return alpha_; }
  SobolevIndex shifted(double delta) const { return SobolevIndex(alpha_ + delta); }

 private:
  double alpha_;
};

/// Scalar field on [0, 2pi)^2 stored as Fourier coefficients.
///
/// Conventions, used everywhere in the library:
///   f(x) = sum_k c_k exp(i k.x),  c_k = N^{-2} sum_x f(x) exp(-i k.x)
/// Coefficients sit in FFT order: storage index (i1, i2), row-major with i1
/// outer, holds wavevector k_j = i_j for i_j <= N/2 and i_j - N otherwise, so
/// each component ranges over {-N/2+1, ..., N/2}. Physical samples are at
/// x = 2pi (j1, j2) / N, row-major with j1 outer. Real fields have Hermitian
/// coefficients c_{-k} = conj(c_k).
class FourierField {
 public:
  FourierField() = default;
  /// Zero field; N must be even and >= 8.
  explicit FourierField(int grid_n);

  static FourierField from_physical(std::span<const double> samples, int grid_n);
  static FourierField from_physical(std::span<const complex> samples, int grid_n);
  /// Samples f(x1, x2) on the grid and transforms.
  static FourierField from_function(int grid_n, const std::function<double(double, double)>& f);
  /// c * exp(i k.x) (not real unless paired with its conjugate mode).
  static FourierField single_mode(int grid_n, Wavevector k, complex c = 1.0);

  std::vector<double> to_physical() const;
  std::vector<complex> to_physical_complex() const;

  int grid_n() const noexcept { return n_; }
  bool empty() const noexcept { return n_ == 0; }
  std::size_t size() const noexcept { return coeffs_.size(); }
  std::span<complex> coeffs() noexcept { return coeffs_; }
  std::span<const complex> coeffs() const noexcept { return coeffs_; }

  /// Wavevector at a storage index.
  Wavevector wavevector(std::size_t index) const noexcept;
  /// Storage index of k; throws DomainError when k is outside the band.
  std::size_t index_of(Wavevector k) const;
  bool resolves(Wavevector k) const noexcept;

  complex operator[](Wavevector k) const { return coeffs_[index_of(k)]; }
  complex& operator[](Wavevector k) { return coeffs_[index_of(k)]; }
  complex mean_mode() const noexcept { return coeffs_.empty() ? complex{} : coeffs_[0]; }

  /// max_k |c_{-k} - conj(c_k)|.
  double hermitian_defect() const;
  /// Largest |c_k| outside the 2/3 band.
  double out_of_band_magnitude() const;

  FourierField& operator+=(const FourierField& other);
  FourierField& operator-=(const FourierField& other);
  FourierField& operator*=(complex s);
  FourierField& operator*=(double s);
  /// this += s * other
  FourierField& axpy(double s, const FourierField& other);

  friend FourierField operator+(FourierField a, const FourierField& b) { return a += b; }
  friend FourierField operator-(FourierField a, const FourierField& b) { return a -= b; }
  friend FourierField operator*(FourierField a, double s) { return a *= s; }
  friend FourierField operator*(double s, FourierField a) { return a *= s; }

 private:
  int n_ = 0;
  std::vector<complex> coeffs_;
};

/// Velocity (or any planar vector) field as a component pair.
struct VectorField {
  FourierField c1;
  FourierField c2;
};

/// Largest retained wavenumber component under the 2/3 rule: floor(N/3).
int dealias_cutoff(int grid_n) noexcept;
/// True when max(|k1|, |k2|) <= dealias_cutoff(N).
bool in_dealias_band(Wavevector k, int grid_n) noexcept;
/// Zeroes coefficients outside the 2/3 band.
void dealias(FourierField& f);

/// (sum_k (1 + |k|^2)^{2 alpha} |c_k|^2)^{1/2}.
double sobolev_norm(const FourierField& f, SobolevIndex alpha);
/// (integral of |f|^2 dx)^{1/2} by trapezoid quadrature on the sample grid;
/// equals 2 pi times the alpha = 0 Sobolev norm.
double physical_l2_norm(const FourierField& f);

/// S_t f: multiplies c_k by exp(-t |k|^2).
FourierField heat_semigroup(const FourierField& f, double t);
/// Multiplier table exp(-t |k|^2) in storage order, for repeated use.
std::vector<double> heat_multipliers(int grid_n, double t);
void apply_multipliers(FourierField& f, std::span<const double> multipliers);

/// Spectral partial derivative d/dx_j, j in {1, 2}.
FourierField partial(const FourierField& f, int direction);
FourierField laplacian(const FourierField& f);
/// d1 v2 - d2 v1.
FourierField curl(const VectorField& v);
/// d1 v1 + d2 v2.
FourierField divergence(const VectorField& v);

/// Velocity u with curl u = omega and div u = 0, from psi_k = -omega_k/|k|^2,
/// u = (-d2 psi, d1 psi). Rejects a non-zero mean mode (|c_0| > 1e-12 (1 + |omega|_0)).
VectorField biot_savart(const FourierField& omega);

/// Pseudo-spectral u . grad(omega) for real fields: inputs truncated to the 2/3
/// band, products in physical space, output truncated again.
FourierField advect(const VectorField& u, const FourierField& omega);

/// Fixed divergence-free transport field xi with its physical samples cached,
/// applying L_xi omega = xi . grad(omega).
class TransportOperator {
 public:
  /// Throws ConfigError when max_k |(div xi)_k| exceeds tolerance.
  explicit TransportOperator(VectorField xi, double divergence_tolerance = 1e-8);

  FourierField apply(const FourierField& omega) const;
  /// (advect(u, omega), apply(omega)) sharing the gradient transform; three
  /// FFTs instead of five.
  std::pair<FourierField, FourierField> apply_with_advection(const VectorField& u, const FourierField& omega) const;
  const VectorField& field() const noexcept { return xi_; }
  int grid_n() const noexcept { return xi_.c1.grid_n(); }
  bool is_zero() const noexcept { return zero_; }

 private:
  VectorField xi_;
  std::vector<double> xi1_phys_;
  std::vector<double> xi2_phys_;
  bool zero_ = false;
};

/// xi . grad(omega) with a one-off divergence check on xi.
FourierField transport(const VectorField& xi, const FourierField& omega);

/// <f, exp(i k.x)> = integral of f(x) exp(-i k.x) dx = (2 pi)^2 c_k.
complex pair(const FourierField& f, Wavevector k);
enum class Channel { real, imag };
double pair_real(const FourierField& f, Wavevector k, Channel channel = Channel::real);

/// FLD1 snapshot: "FLD1", N (u32), then N^2 coefficients as little-endian
/// (re, im) f64 pairs in storage order.
void write_field_binary(std::ostream& out, const FourierField& f);
FourierField read_field_binary(std::istream& in);
/// CSV "x1,x2,value" of physical samples.
void write_field_csv(std::ostream& out, const FourierField& f);

}  // namespace fracvort
