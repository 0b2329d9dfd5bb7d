#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <functional>
#include <istream>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "lacuna/error.hpp"
#include "lacuna/fft.hpp"

namespace lacuna {

using cplx = std::complex<double>;

/// Samples f(offset + j T/M), j = 0..M-1, of a T-periodic function; M = 2^J.
struct Signal {
  std::vector<cplx> samples;
  double period = 1.0;
  double offset = 0.0;

  Signal() = default;
  Signal(std::vector<cplx> s, double T, double x0 = 0.0) : samples(std::move(s)), period(T), offset(x0) { validate(); }

  static Signal zeros(int J, double T, double x0 = 0.0) { return Signal(std::vector<cplx>(std::size_t{1} << J), T, x0); }

  template <typename F>
  static Signal sample(int J, double T, double x0, F&& f) {
    Signal s = zeros(J, T, x0);
    for (std::size_t j = 0; j < s.size(); ++j) s.samples[j] = f(s.x(j));
    return s;
  }

  void validate() const {
    require(std::has_single_bit(samples.size()), "Signal: sample count must be a power of two");
    require(period > 0.0 && std::isfinite(period), "Signal: period must be positive");
  }

  std::size_t size() const { return samples.size(); }
  int log2_size() const { return std::countr_zero(samples.size()); }
  double dx() const { return period / static_cast<double>(size()); }
  double x(std::size_t j) const { return offset + static_cast<double>(j) * dx(); }
  /// Frequency of FFT bin k: k/T below M/2, (k - M)/T above.
  double frequency(std::size_t k) const {
    const auto M = static_cast<std::int64_t>(size());
    auto kk = static_cast<std::int64_t>(k);
    if (kk >= M / 2) kk -= M;
    return static_cast<double>(kk) / period;
  }
  /// Bins cover [-nyquist, nyquist).
  double nyquist() const { return static_cast<double>(size()) / (2.0 * period); }

  bool same_grid(const Signal& o) const { return size() == o.size() && period == o.period && offset == o.offset; }

  double l2_norm() const {
    double s = 0.0;
    for (const auto& v : samples) s += std::norm(v);
    return std::sqrt(s * dx());
  }
  double l1_norm() const {
    double s = 0.0;
    for (const auto& v : samples) s += std::abs(v);
    return s * dx();
  }
  double sup_norm() const {
    double s = 0.0;
    for (const auto& v : samples) s = std::max(s, std::abs(v));
    return s;
  }
  std::vector<double> magnitudes() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = std::abs(samples[i]);
    return out;
  }

  Signal& operator+=(const Signal& o) {
    require(same_grid(o), "Signal: grid mismatch");
    for (std::size_t i = 0; i < size(); ++i) samples[i] += o.samples[i];
    return *this;
  }
  Signal& operator-=(const Signal& o) {
    require(same_grid(o), "Signal: grid mismatch");
    for (std::size_t i = 0; i < size(); ++i) samples[i] -= o.samples[i];
    return *this;
  }
  Signal& operator*=(cplx c) {
    for (auto& v : samples) v *= c;
    return *this;
  }
  friend Signal operator+(Signal a, const Signal& b) { return a += b; }
  friend Signal operator-(Signal a, const Signal& b) { return a -= b; }
  friend Signal operator*(cplx c, Signal a) { return a *= c; }
};

/// Riemann-sum transform values fhat(xi_k) = (T/M) sum_j f(x_j) e^{-2 pi i x_j xi_k}, in FFT bin order.
struct Spectrum {
  std::vector<cplx> coeffs;
  double period = 1.0;
  double offset = 0.0;

  std::size_t size() const { return coeffs.size(); }
  double frequency(std::size_t k) const {
    const auto M = static_cast<std::int64_t>(size());
    auto kk = static_cast<std::int64_t>(k);
    if (kk >= M / 2) kk -= M;
    return static_cast<double>(kk) / period;
  }
  /// Bin holding lattice frequency n/T (n taken modulo M).
  std::size_t bin(std::int64_t n) const {
    const auto M = static_cast<std::int64_t>(size());
    return static_cast<std::size_t>(((n % M) + M) % M);
  }
  double l2_norm() const {
    double s = 0.0;
    for (const auto& v : coeffs) s += std::norm(v);
    return std::sqrt(s / period);
  }
};

inline Spectrum transform(const Signal& f) {
  Spectrum S{f.samples, f.period, f.offset};
  fft::forward(S.coeffs);
  const double scale = f.period / static_cast<double>(f.size());
  for (std::size_t k = 0; k < S.size(); ++k) {
    const double phase = -2.0 * std::numbers::pi * f.offset * S.frequency(k);
    S.coeffs[k] *= scale * (f.offset == 0.0 ? cplx(1.0) : std::polar(1.0, phase));
  }
  return S;
}

inline Signal inverse(const Spectrum& S) {
  std::vector<cplx> data = S.coeffs;
  for (std::size_t k = 0; k < S.size(); ++k) {
    const double phase = 2.0 * std::numbers::pi * S.offset * S.frequency(k);
    data[k] *= (S.offset == 0.0 ? cplx(1.0) : std::polar(1.0, phase)) / S.period;
  }
  fft::backward(data);
  return Signal(std::move(data), S.period, S.offset);
}

/// T_m f = (m fhat)^vee with the symbol evaluated at each bin frequency.
/// Offset phases cancel, so the symbol multiplies the raw DFT directly.
inline Signal apply_symbol(const Signal& f, const std::function<cplx(double)>& m) {
  std::vector<cplx> data = f.samples;
  fft::forward(data);
  const double inv = 1.0 / static_cast<double>(f.size());
  for (std::size_t k = 0; k < data.size(); ++k) data[k] *= m(f.frequency(k)) * inv;
  fft::backward(data);
  return Signal(std::move(data), f.period, f.offset);
}

/// Same as apply_symbol with precomputed per-bin symbol values.
inline Signal apply_symbol_bins(const Signal& f, std::span<const cplx> bins) {
  require(bins.size() == f.size(), "apply_symbol_bins: bin count mismatch");
  std::vector<cplx> data = f.samples;
  fft::forward(data);
  const double inv = 1.0 / static_cast<double>(f.size());
  for (std::size_t k = 0; k < data.size(); ++k) data[k] *= bins[k] * inv;
  fft::backward(data);
  return Signal(std::move(data), f.period, f.offset);
}

/// Pointwise e^{2 pi i lambda x} f(x).
inline Signal modulate(const Signal& f, double lambda) {
  Signal g = f;
  for (std::size_t j = 0; j < g.size(); ++j) g.samples[j] *= std::polar(1.0, 2.0 * std::numbers::pi * lambda * g.x(j));
  return g;
}

// Binary format: "LCSG", uint32 J, float64 T, then M interleaved float64
// (re, im) pairs, all little-endian. The offset is not stored.
inline constexpr char kSignalMagic[4] = {'L', 'C', 'S', 'G'};

namespace detail {
template <typename T>
void put_le(std::ostream& os, T v) {
  static_assert(std::endian::native == std::endian::little, "binary signal IO assumes a little-endian host");
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get_le(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  require(static_cast<bool>(is), "read_signal: truncated stream");
  return v;
}
}  // namespace detail

inline void write_signal(std::ostream& os, const Signal& f) {
  os.write(kSignalMagic, 4);
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(f.log2_size()));
  detail::put_le<double>(os, f.period);
  for (const auto& v : f.samples) {
    detail::put_le<double>(os, v.real());
    detail::put_le<double>(os, v.imag());
  }
}

inline Signal read_signal(std::istream& is, double offset = 0.0) {
  char magic[4] = {};
  is.read(magic, 4);
  require(static_cast<bool>(is) && std::memcmp(magic, kSignalMagic, 4) == 0, "read_signal: bad magic");
  const auto J = detail::get_le<std::uint32_t>(is);
  require(J <= 30, "read_signal: grid exponent out of range");
  const auto T = detail::get_le<double>(is);
  std::vector<cplx> s(std::size_t{1} << J);
  for (auto& v : s) {
    const double re = detail::get_le<double>(is);
    const double im = detail::get_le<double>(is);
    v = {re, im};
  }
  return Signal(std::move(s), T, offset);
}

/// "x,value" rows for a real profile (e.g. a square function).
inline void write_profile_csv(std::ostream& os, const Signal& f, const std::string& column = "value") {
  os << "x," << column << '\n';
  os.precision(17);
  for (std::size_t j = 0; j < f.size(); ++j) os << f.x(j) << ',' << f.samples[j].real() << '\n';
}

}  // namespace lacuna
