#pragma once

#include <complex>
#include <span>

namespace fracvort::detail {

/// Cached FFTW plans (FFTW_ESTIMATE | FFTW_UNALIGNED, out-of-place), keyed by
/// shape. Planning is serialised; execution is reentrant. ESTIMATE keeps the
/// chosen algorithm, and therefore every rounding, identical across runs.
enum class FftDirection { forward, backward };

/// Unnormalised 1-D DFT of length n (in and out must not alias).
void fft_1d(std::span<const std::complex<double>> in, std::span<std::complex<double>> out, FftDirection dir);

/// Unnormalised 2-D DFT of an n x n row-major array (in and out must not alias).
void fft_2d(int n, std::span<const std::complex<double>> in, std::span<std::complex<double>> out, FftDirection dir);

}  // namespace fracvort::detail
