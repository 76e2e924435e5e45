#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace fracvort::detail {

namespace {

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using PlanHandle = std::unique_ptr<fftw_plan_s, PlanDeleter>;

// key: (rank, n, direction)
using PlanKey = std::tuple<int, int, int>;

class PlanRegistry {
 public:
  fftw_plan get(int rank, int n, FftDirection dir) {
    const PlanKey key{rank, n, dir == FftDirection::forward ? FFTW_FORWARD : FFTW_BACKWARD};
    {
      std::shared_lock lock(mutex_);
      if (auto it = plans_.find(key); it != plans_.end()) return it->second.get();
    }
    std::unique_lock lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second.get();
    const std::size_t total = rank == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n;
    std::vector<std::complex<double>> a(total), b(total);
    auto* in = reinterpret_cast<fftw_complex*>(a.data());
    auto* out = reinterpret_cast<fftw_complex*>(b.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = rank == 1 ? fftw_plan_dft_1d(n, in, out, std::get<2>(key), flags)
                               : fftw_plan_dft_2d(n, n, in, out, std::get<2>(key), flags);
    if (plan == nullptr) throw std::runtime_error("FFTW planning failed");
    auto [it, inserted] = plans_.emplace(key, PlanHandle(plan));
    return it->second.get();
  }

 private:
  std::shared_mutex mutex_;
  std::map<PlanKey, PlanHandle> plans_;
};

PlanRegistry& registry() {
  static PlanRegistry r;
  return r;
}

void execute(fftw_plan plan, std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
  // FFTW's new-array interface takes non-const input; out-of-place plans
  // created without FFTW_DESTROY_INPUT leave it untouched.
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data()));
  fftw_execute_dft(plan, src, reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace

void fft_1d(std::span<const std::complex<double>> in, std::span<std::complex<double>> out, FftDirection dir) {
  if (in.size() != out.size()) throw std::invalid_argument("fft_1d size mismatch");
  execute(registry().get(1, static_cast<int>(in.size()), dir), in, out);
}

void fft_2d(int n, std::span<const std::complex<double>> in, std::span<std::complex<double>> out, FftDirection dir) {
  const auto total = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  if (in.size() != total || out.size() != total) throw std::invalid_argument("fft_2d size mismatch");
  execute(registry().get(2, n, dir), in, out);
}

}  // namespace fracvort::detail
