#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <vector>

#include "lacuna/dyadic.hpp"
#include "lacuna/error.hpp"
#include "lacuna/fft.hpp"
#include "lacuna/lacunary.hpp"
#include "lacuna/orlicz.hpp"
#include "lacuna/parallel.hpp"
#include "lacuna/signal.hpp"

namespace lacuna {

struct CzConfig {
  // Required distance from supp f to the window edge, in units of the support diameter.
  double margin_factor = 4.0;
  bool enforce_margin = true;
  double support_threshold = 0.0;  // |f| <= threshold counts as outside the support
};

struct AtomDiagnostics {
  double orlicz_avg_f = 0.0;      // <|f|>_{B_{sigma/2},J}
  double orlicz_avg_b = 0.0;      // <|b_J|>_{B_{sigma/2},J}
  double atom_constant = 0.0;     // orlicz_avg_b / alpha
  double lac_l2_avg = 0.0;        // <|b_{J,lac}|>_{2,J}
  double zb_constant = 0.0;       // lac_l2_avg / orlicz_avg_f
  double max_residual = 0.0;      // max |b_J^(lambda)| / ||f_J||_1 over removed lambda (bin route)
  double nudft_residual = 0.0;    // same via direct summation at the frequencies
  std::size_t frequencies = 0;    // distinct removed frequencies
  bool nyquist_merged = false;    // +nu and -nu share one bin
};

struct CzAtom {
  Interval J;
  std::size_t first = 0;  // index of the first grid cell of J
  std::vector<cplx> b;
  std::vector<cplx> b_lac;
  AtomDiagnostics diag;
};

struct CzSummary {
  double reconstruction_error = 0.0;  // max |f - g - sum b_J - b_lac| / ||f||_inf
  double measure_sum = 0.0;           // sum |J|
  double orlicz_mass = 0.0;           // int B_{sigma/2}(|f|/alpha)
  double g_sup_constant = 0.0;        // ||g||_inf / alpha
  double g_l1_constant = 0.0;         // ||g||_1 / ||f||_1
  double blac_atom_constant = 0.0;    // ||b_lac||_2^2 / sum |J| <|b_J|>^2
  double blac_mass_constant = 0.0;    // ||b_lac||_2^2 / (alpha^2 int B(|f|/alpha))
  double max_atom_constant = 0.0;
  double max_zb_constant = 0.0;
  double max_lac_residual = 0.0;
  std::size_t sandwich_failures = 0;
  double support_diameter = 0.0;
  double margin = 0.0;
  bool margin_ok = true;
};

struct CzDecomposition {
  Signal g;
  std::vector<CzAtom> atoms;
  Signal b_lac;
  std::vector<Interval> stopping;
  double alpha = 0.0;
  int sigma = 0;
  CzSummary summary;
};

namespace detail {

struct DyadicGrid {
  DyadicScalar x0;
  std::int32_t cell_log2 = 0;  // dx = 2^cell_log2
  std::size_t n = 0;

  explicit DyadicGrid(const Signal& f) : n(f.size()) {
    const auto dx = DyadicScalar::from_double(f.dx());
    require(dx.is_power_of_two(), "czd: grid spacing must be a power of two");
    cell_log2 = dx.log2();
    x0 = DyadicScalar::from_double(f.offset);
    require(x0.is_zero() || x0.is_multiple_of_pow2(cell_log2), "czd: window offset must lie on the dyadic cell lattice");
  }
  DyadicScalar cell_left(std::size_t j) const {
    return x0 + DyadicScalar(static_cast<std::int64_t>(j), 0).scaled(cell_log2);
  }
  Interval interval(std::size_t first, std::size_t count) const {
    return {cell_left(first), cell_left(first + count)};
  }
  // Largest dyadic block length (in cells) that tiles the window.
  std::size_t top_block() const {
    std::size_t w = n;
    while (w > 1 && !(x0.is_zero() || x0.is_multiple_of_pow2(cell_log2 + std::countr_zero(w)))) w /= 2;
    return w;
  }
};

}  // namespace detail

/// Maximal dyadic intervals J (in the grid's dyadic system) with
/// <|f|>_{B_{sigma/2},J} > alpha, found top-down. The Luxemburg comparison
/// <|f|>_J > alpha is evaluated as avg_J B(|f|/alpha) > 1.
inline std::vector<std::pair<std::size_t, std::size_t>> stopping_cells(std::span<const double> a, std::size_t top, double sigma_half,
                                                                       double alpha) {
  require(alpha > 0.0, "stopping_intervals: alpha must be > 0");
  const YoungFunction B = YoungFunction::blog(sigma_half);
  const double quiet = alpha * young_unit_level(sigma_half);  // |f| <= quiet everywhere => no descendant exceeds
  auto scan = [&](std::size_t start, std::size_t len, double& peak) {
    double mass = 0.0;
    peak = 0.0;
    for (std::size_t i = start; i < start + len; ++i) {
      peak = std::max(peak, a[i]);
      mass += B(a[i] / alpha);
    }
    return mass > static_cast<double>(len);
  };
  std::vector<std::pair<std::size_t, std::size_t>> out, stack;
  for (std::size_t s = a.size(); s >= top; s -= top) {
    double peak = 0.0;
    require(!scan(s - top, top, peak), "stopping_intervals: alpha is below the average over a top-level window interval");
    if (top > 1 && peak > quiet) {
      stack.emplace_back(s - top + top / 2, top / 2);
      stack.emplace_back(s - top, top / 2);
    }
  }
  while (!stack.empty()) {
    auto [start, len] = stack.back();
    stack.pop_back();
    double peak = 0.0;
    if (scan(start, len, peak)) {
      out.emplace_back(start, len);
    } else if (len > 1 && peak > quiet) {
      stack.emplace_back(start + len / 2, len / 2);
      stack.emplace_back(start, len / 2);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<Interval> stopping_intervals(const Signal& f, int sigma, double alpha) {
  require(sigma >= 0, "stopping_intervals: sigma must be >= 0");
  const detail::DyadicGrid grid(f);
  const auto a = f.magnitudes();
  std::vector<Interval> out;
  for (auto [s, len] : stopping_cells(a, grid.top_block(), 0.5 * sigma, alpha)) out.push_back(grid.interval(s, len));
  return out;
}

/// Frequencies {0} u lac_1 u ... u lac_sigma at scale 1/|J|, |lambda| <= 1/(2 dx),
/// as integers k = lambda |J|.
inline std::vector<std::int64_t> lacunary_bins(int sigma, const DyadicScalar& length, const DyadicScalar& nyquist) {
  require(sigma >= 0, "lacunary_bins: sigma must be >= 0");
  const DyadicScalar scale = DyadicScalar::pow2(-length.log2());
  std::vector<std::int64_t> out{0};
  if (sigma > 0 && scale <= nyquist) {
    for (const auto& lam : lac_tau(sigma, scale, nyquist).points) out.push_back(static_cast<std::int64_t>((lam * length).to_double()));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct LacunaryRemoval {
  std::vector<cplx> b;
  std::vector<cplx> b_lac;
  AtomDiagnostics diag;
};

/// Splits f_J (samples on the cells of J, first cell at x_left) into
/// b_J + b_{J,lac}, where b_{J,lac} = sum_lambda fhat_J(lambda) e^{2 pi i lambda y} 1_J / |J|
/// over lambda in the lacunary bins. Coefficients come from a local FFT; the
/// vanishing of b_J's coefficients is checked both on the bins and by direct
/// summation at the frequencies.
inline LacunaryRemoval remove_lacunary(std::span<const cplx> fJ, double x_left, double dx, const std::vector<std::int64_t>& bins) {
  const std::size_t n = fJ.size();
  require(std::has_single_bit(n), "remove_lacunary: cell count must be a power of two");
  const double len = dx * static_cast<double>(n);
  const auto nn = static_cast<std::int64_t>(n);

  std::vector<cplx> spec(fJ.begin(), fJ.end());
  fft::forward(spec);
  std::vector<cplx> kept(n, cplx{});
  LacunaryRemoval out;
  std::vector<char> used(n, 0);
  for (auto k : bins) {
    const auto bin = static_cast<std::size_t>(((k % nn) + nn) % nn);
    if (used[bin]) {
      out.diag.nyquist_merged = true;
      continue;
    }
    used[bin] = 1;
    kept[bin] = spec[bin];
    ++out.diag.frequencies;
  }
  fft::backward(kept);
  out.b_lac.resize(n);
  out.b.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.b_lac[i] = kept[i] / static_cast<double>(n);
    out.b[i] = fJ[i] - out.b_lac[i];
  }

  double l1 = 0.0;
  for (const auto& v : fJ) l1 += std::abs(v) * dx;
  if (l1 == 0.0) return out;

  std::vector<cplx> check(out.b);
  fft::forward(check);
  for (std::size_t bin = 0; bin < n; ++bin)
    if (used[bin]) out.diag.max_residual = std::max(out.diag.max_residual, std::abs(check[bin]) * dx / l1);

  // Direct summation at lambda = k/|J| on the absolute positions x_left + j dx.
  for (auto k : bins) {
    const double lambda = static_cast<double>(k) / len;
    const cplx step = std::polar(1.0, -2.0 * std::numbers::pi * lambda * dx);
    cplx phase = std::polar(1.0, -2.0 * std::numbers::pi * lambda * x_left);
    cplx acc{};
    for (std::size_t j = 0; j < n; ++j) {
      acc += out.b[j] * phase;
      phase *= step;
      if ((j & 255) == 255) phase /= std::abs(phase);
    }
    out.diag.nudft_residual = std::max(out.diag.nudft_residual, std::abs(acc) * dx / l1);
  }
  return out;
}

namespace detail {

inline double luxemburg_of(std::span<const cplx> v, double sigma_half) {
  std::vector<double> a(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) a[i] = std::abs(v[i]);
  return luxemburg_avg(std::span<const double>(a), sigma_half);
}

}  // namespace detail

/// Orlicz Calderon-Zygmund decomposition f = g + sum_J b_J + b_lac on the
/// periodic window of f, with measured constants for every bound.
inline CzDecomposition cz_decompose(const Signal& f, int sigma, double alpha, const CzConfig& cfg = {}) {
  require(sigma >= 0, "cz_decompose: sigma must be >= 0");
  require(alpha > 0.0, "cz_decompose: alpha must be > 0");
  const detail::DyadicGrid grid(f);
  const double sh = 0.5 * sigma;
  const double dx = f.dx();
  const auto a = f.magnitudes();

  CzDecomposition out;
  out.alpha = alpha;
  out.sigma = sigma;
  auto& sum = out.summary;

  // Support margin against the window edges (no periodic wrap assumed).
  std::size_t lo = f.size(), hi = 0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (a[i] > cfg.support_threshold) {
      lo = std::min(lo, i);
      hi = i + 1;
    }
  if (lo < hi) {
    sum.support_diameter = static_cast<double>(hi - lo) * dx;
    sum.margin = static_cast<double>(std::min(lo, f.size() - hi)) * dx;
    sum.margin_ok = sum.margin >= cfg.margin_factor * sum.support_diameter;
    if (cfg.enforce_margin)
      require(sum.margin_ok, "cz_decompose: support margin below margin_factor times the support diameter");
  }

  const auto cells = stopping_cells(a, grid.top_block(), sh, alpha);
  out.g = f;
  out.b_lac = Signal(std::vector<cplx>(f.size()), f.period, f.offset);
  out.atoms.resize(cells.size());

  const DyadicScalar nyquist = DyadicScalar::pow2(-grid.cell_log2 - 1);
  std::map<std::size_t, std::vector<std::int64_t>> bins_by_len;
  for (auto [s, len] : cells) {
    out.stopping.push_back(grid.interval(s, len));
    if (!bins_by_len.count(len)) bins_by_len[len] = lacunary_bins(sigma, out.stopping.back().length(), nyquist);
  }

  parallel_for(cells.size(), [&](std::size_t idx) {
    const auto [s, len] = cells[idx];
    std::span<const cplx> fJ(f.samples.data() + s, len);
    auto rem = remove_lacunary(fJ, f.x(s), dx, bins_by_len.at(len));
    CzAtom& atom = out.atoms[idx];
    atom.J = out.stopping[idx];
    atom.first = s;
    atom.diag = rem.diag;
    atom.diag.orlicz_avg_f = detail::luxemburg_of(fJ, sh);
    atom.diag.orlicz_avg_b = detail::luxemburg_of(rem.b, sh);
    atom.diag.atom_constant = atom.diag.orlicz_avg_b / alpha;
    double l2 = 0.0;
    for (const auto& v : rem.b_lac) l2 += std::norm(v);
    atom.diag.lac_l2_avg = std::sqrt(l2 / static_cast<double>(len));
    atom.diag.zb_constant = atom.diag.orlicz_avg_f > 0.0 ? atom.diag.lac_l2_avg / atom.diag.orlicz_avg_f : 0.0;
    atom.b = std::move(rem.b);
    atom.b_lac = std::move(rem.b_lac);
  });

  double atom_mass = 0.0;
  for (const auto& atom : out.atoms) {
    const std::size_t n = atom.b.size();
    for (std::size_t i = 0; i < n; ++i) {
      out.g.samples[atom.first + i] = 0.0;
      out.b_lac.samples[atom.first + i] = atom.b_lac[i];
    }
    const double Jlen = static_cast<double>(n) * dx;
    sum.measure_sum += Jlen;
    atom_mass += Jlen * atom.diag.orlicz_avg_b * atom.diag.orlicz_avg_b;
    sum.max_atom_constant = std::max(sum.max_atom_constant, atom.diag.atom_constant);
    sum.max_zb_constant = std::max(sum.max_zb_constant, atom.diag.zb_constant);
    sum.max_lac_residual = std::max({sum.max_lac_residual, atom.diag.max_residual, atom.diag.nudft_residual});
    if (!(atom.diag.orlicz_avg_f > alpha && atom.diag.orlicz_avg_f <= 2.0 * alpha * (1 + 1e-12))) ++sum.sandwich_failures;
  }

  sum.orlicz_mass = orlicz_integral(a, sh, alpha, dx);
  const double fsup = f.sup_norm();
  {
    auto rec = out.g + out.b_lac;
    for (const auto& atom : out.atoms)
      for (std::size_t i = 0; i < atom.b.size(); ++i) rec.samples[atom.first + i] += atom.b[i];
    double err = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) err = std::max(err, std::abs(rec.samples[i] - f.samples[i]));
    sum.reconstruction_error = fsup > 0.0 ? err / fsup : err;
  }
  sum.g_sup_constant = out.g.sup_norm() / alpha;
  const double f1 = f.l1_norm();
  sum.g_l1_constant = f1 > 0.0 ? out.g.l1_norm() / f1 : 0.0;
  const double blac2 = std::pow(out.b_lac.l2_norm(), 2);
  sum.blac_atom_constant = atom_mass > 0.0 ? blac2 / atom_mass : 0.0;
  sum.blac_mass_constant = sum.orlicz_mass > 0.0 ? blac2 / (alpha * alpha * sum.orlicz_mass) : 0.0;
  return out;
}

}  // namespace lacuna
