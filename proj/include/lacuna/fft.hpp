#pragma once

#include <fftw3.h>

#include <bit>
#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "lacuna/error.hpp"

namespace lacuna::fft {

namespace detail {

// FFTW planning is not thread safe, execution with new-array functions is.
// Plans are created once per (size, direction) and kept for the process.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::pair{n, sign};
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<std::complex<double>> scratch(n);
    auto* data = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), data, data, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    require(plan != nullptr, "fftw: planning failed");
    plans_.emplace(key, plan);
    return plan;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

inline void execute(std::span<std::complex<double>> data, int sign) {
  require(std::has_single_bit(data.size()), "fft: length must be a power of two");
  fftw_plan plan = PlanCache::instance().get(data.size(), sign);
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, p, p);
}

}  // namespace detail

/// In place, unnormalized: X_k = sum_j x_j e^{-2 pi i jk/n}.
inline void forward(std::span<std::complex<double>> data) { detail::execute(data, FFTW_FORWARD); }

/// In place, unnormalized: x_j = sum_k X_k e^{+2 pi i jk/n}.
inline void backward(std::span<std::complex<double>> data) { detail::execute(data, FFTW_BACKWARD); }

}  // namespace lacuna::fft
