#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lacuna/bumps.hpp"
#include "lacuna/lacunary.hpp"
#include "lacuna/parallel.hpp"
#include "lacuna/signal.hpp"

namespace lacuna {

/// Per-call aliasing report: set when a requested frequency window (or the
/// support of a smooth symbol) leaves the band [-nyquist, nyquist).
struct AliasingFlag {
  bool aliased = false;
  std::size_t windows_clipped = 0;
  void raise() {
    aliased = true;
    ++windows_clipped;
  }
};

enum class ProjectionMode { Sharp, Smooth };

struct ProjectionFamily {
  std::vector<LacInterval> intervals;
  ProjectionMode mode = ProjectionMode::Sharp;
  BumpProfile profile{};
};

/// phi_L(xi) = eta((xi - c_L) / |L|): 1 on L, supported in (5/4)L.
inline double smooth_symbol(const LacInterval& L, double xi) {
  return eta((xi - L.center().to_double()) / L.length().to_double());
}

namespace detail {

inline bool window_in_band(double lo, double hi, double nyquist) { return lo >= -nyquist && hi <= nyquist; }

inline void check_window(const Signal& f, double lo, double hi, AliasingFlag* flag) {
  if (flag && !window_in_band(lo, hi, f.nyquist())) flag->raise();
}

// Spectrum of f without the offset phase (raw DFT scaled by 1/M), so that
// masking and inverting reproduces f exactly when the mask is 1.
inline std::vector<cplx> raw_spectrum(const Signal& f) {
  std::vector<cplx> data = f.samples;
  fft::forward(data);
  const double inv = 1.0 / static_cast<double>(f.size());
  for (auto& v : data) v *= inv;
  return data;
}

inline Signal from_raw(std::vector<cplx> data, const Signal& like) {
  fft::backward(data);
  return Signal(std::move(data), like.period, like.offset);
}

inline std::vector<cplx> sharp_mask_apply(std::span<const cplx> raw, const Signal& f, const LacInterval& L) {
  const double lo = L.left.to_double(), hi = L.right.to_double();
  std::vector<cplx> out(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const double xi = f.frequency(k);
    if (xi >= lo && xi < hi) out[k] = raw[k];
  }
  return out;
}

inline std::vector<cplx> smooth_mask_apply(std::span<const cplx> raw, const Signal& f, const LacInterval& L,
                                           const BumpProfile& profile) {
  const double c = L.center().to_double(), len = L.length().to_double();
  std::vector<cplx> out(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) out[k] = raw[k] * profile((f.frequency(k) - c) / len);
  return out;
}

}  // namespace detail

/// P_L f = (1_L fhat)^vee with half-open membership on the frequency lattice.
inline Signal project_sharp(const Signal& f, const LacInterval& L, AliasingFlag* flag = nullptr) {
  detail::check_window(f, L.left.to_double(), L.right.to_double(), flag);
  return detail::from_raw(detail::sharp_mask_apply(detail::raw_spectrum(f), f, L), f);
}

/// Delta_L f = (phi_L fhat)^vee.
inline Signal project_smooth(const Signal& f, const LacInterval& L, const BumpProfile& profile = {},
                             AliasingFlag* flag = nullptr) {
  const double c = L.center().to_double(), half = 0.625 * L.length().to_double();
  detail::check_window(f, c - half, c + half, flag);
  return detail::from_raw(detail::smooth_mask_apply(detail::raw_spectrum(f), f, L, profile), f);
}

/// Delta_L f computed as e^{2 pi i lambda x} Delta_{L*}(e^{-2 pi i lambda x} f)
/// with lambda the anchor of L. Requires lambda T to be an integer (the
/// modulation then permutes frequency bins) and both (5/4)L and (5/4)L* in band.
inline Signal modulate_project(const Signal& f, const LacInterval& L, const BumpProfile& profile = {}) {
  const LacInterval Lstar = normalize_to_origin(L);
  const double lambda = L.anchor.to_double();
  const double shift = lambda * f.period;
  require(std::abs(shift - std::round(shift)) < 1e-9, "modulate_project: anchor is not on the frequency lattice");
  const double ny = f.nyquist();
  for (const auto& W : {L, Lstar}) {
    const double c = W.center().to_double(), half = 0.625 * W.length().to_double();
    require(detail::window_in_band(c - half, c + half, ny), "modulate_project: anchor-shifted band exceeds Nyquist");
  }
  return modulate(project_smooth(modulate(f, -lambda), Lstar, profile), lambda);
}

/// Truncation of Lambda_tau to the band of f: largest power of two <= nyquist.
inline DyadicScalar band_limit(const Signal& f) {
  const double ny = f.nyquist();
  require(ny >= 1e-300, "band_limit: empty band");
  auto k = static_cast<std::int32_t>(std::floor(std::log2(ny)));
  while (std::ldexp(1.0, k + 1) <= ny) ++k;
  while (std::ldexp(1.0, k) > ny) --k;
  return DyadicScalar::pow2(k);
}

/// Pointwise (sum_L |P_L f|^2)^{1/2} (sharp) or (sum_L |Delta_L f|^2)^{1/2}
/// (smooth) over the family. The per-interval contributions are reduced by a
/// fixed pairwise tree, so the result does not depend on the thread count.
inline Signal square_function(const Signal& f, const ProjectionFamily& family, AliasingFlag* flag = nullptr) {
  require(!family.intervals.empty(), "square_function: empty family");
  const auto raw = detail::raw_spectrum(f);
  for (const auto& L : family.intervals) {
    if (family.mode == ProjectionMode::Sharp) {
      detail::check_window(f, L.left.to_double(), L.right.to_double(), flag);
    } else {
      const double c = L.center().to_double(), half = 0.625 * L.length().to_double();
      detail::check_window(f, c - half, c + half, flag);
    }
  }
  auto sum = tree_sum(family.intervals.size(), f.size(), [&](std::size_t i, std::vector<double>& out) {
    const auto& L = family.intervals[i];
    auto masked = family.mode == ProjectionMode::Sharp ? detail::sharp_mask_apply(raw, f, L)
                                                       : detail::smooth_mask_apply(raw, f, L, family.profile);
    fft::backward(masked);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::norm(masked[j]);
  });
  Signal S = Signal::zeros(f.log2_size(), f.period, f.offset);
  for (std::size_t j = 0; j < S.size(); ++j) S.samples[j] = std::sqrt(sum[j]);
  return S;
}

/// LP_tau / S_tau over Lambda_tau^{min_scale}, truncated at the band of f
/// (or at max_abs when given).
inline Signal lp_square_function(const Signal& f, int order, ProjectionMode mode, const DyadicScalar& min_scale,
                                 std::optional<DyadicScalar> max_abs = std::nullopt, AliasingFlag* flag = nullptr) {
  ProjectionFamily family{lambda_tau(order, min_scale, max_abs.value_or(band_limit(f))), mode, {}};
  require(!family.intervals.empty(), "lp_square_function: truncation leaves no intervals");
  return square_function(f, family, flag);
}

/// sup_alpha alpha |{|f| > alpha}| over alpha at the sample magnitudes, taking
/// the left limit in alpha, so f = c 1_E yields c |E| exactly.
inline double weak_l1_norm(std::span<const double> magnitudes, double dx) {
  std::vector<double> v(magnitudes.begin(), magnitudes.end());
  std::sort(v.begin(), v.end(), std::greater<>());
  double best = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i + 1 < v.size() && v[i + 1] == v[i]) continue;  // use the full tie group
    best = std::max(best, v[i] * static_cast<double>(i + 1) * dx);
  }
  return best;
}

inline double weak_l1_norm(const Signal& f) {
  const auto m = f.magnitudes();
  return weak_l1_norm(m, f.dx());
}

/// |{|f| > alpha}| on the grid.
inline double superlevel_measure(std::span<const double> magnitudes, double alpha, double dx) {
  std::size_t count = 0;
  for (double v : magnitudes) count += v > alpha;
  return static_cast<double>(count) * dx;
}

}  // namespace lacuna
