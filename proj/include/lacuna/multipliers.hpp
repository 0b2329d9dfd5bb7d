#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lacuna/bumps.hpp"
#include "lacuna/lacunary.hpp"
#include "lacuna/parallel.hpp"
#include "lacuna/signal.hpp"
#include "lacuna/spectral.hpp"

namespace lacuna {

enum class MultiplierClass { Raw, Marcinkiewicz, Hormander, R2 };

/// A symbol xi -> m(xi) with a class tag. The tag is a claim checked by the
/// diagnostics below, never enforced.
struct SampledMultiplier {
  std::function<cplx(double)> symbol;
  MultiplierClass declared = MultiplierClass::Raw;
  int order = 0;
  // Frequencies beyond this bound are not represented (lattice-backed symbols).
  double band = std::numeric_limits<double>::infinity();

  cplx operator()(double xi) const { return symbol(xi); }

  /// Symbol from values on the lattice n/T (FFT bin order), extended as a
  /// step function constant on [n/T, (n+1)/T).
  static SampledMultiplier from_lattice(std::vector<cplx> bins, double period,
                                        MultiplierClass cls = MultiplierClass::Raw, int order = 0) {
    const auto M = static_cast<std::int64_t>(bins.size());
    require(M > 0 && std::has_single_bit(static_cast<std::uint64_t>(M)), "from_lattice: bin count must be a power of two");
    auto values = std::make_shared<std::vector<cplx>>(std::move(bins));
    SampledMultiplier m;
    m.symbol = [values, period, M](double xi) -> cplx {
      const auto n = static_cast<std::int64_t>(std::floor(xi * period));
      if (n < -M / 2 || n >= M / 2) return 0.0;
      return (*values)[static_cast<std::size_t>((n + M) % M)];
    };
    m.declared = cls;
    m.order = order;
    m.band = static_cast<double>(M) / (2.0 * period);
    return m;
  }
};

struct StepPiece {
  DyadicScalar lo;
  DyadicScalar hi;
  cplx coeff;
  Interval assigned;  // the Littlewood-Paley interval L_I containing [lo, hi)
};

struct StepValidation {
  bool ok = true;
  std::vector<std::string> violations;
  std::size_t max_overlap = 0;
  double max_budget = 0.0;  // max over L of N * sum |c_I|^2 (must be <= 1)
  void fail(std::string msg) {
    ok = false;
    violations.push_back(std::move(msg));
  }
};

/// m = sum_I c_I 1_I with every I inside an order-tau interval L_I, per-L
/// coefficient budget sum |c_I|^2 <= 1/N and overlap at most N.
struct StepMultiplier {
  std::vector<StepPiece> pieces;
  int overlap_bound = 1;
  std::optional<int> order;

  cplx operator()(double xi) const {
    cplx s = 0.0;
    for (const auto& p : pieces)
      if (xi >= p.lo.to_double() && xi < p.hi.to_double()) s += p.coeff;
    return s;
  }

  StepValidation validate(double budget_tolerance = 1e-12) const {
    StepValidation v;
    if (overlap_bound < 1) v.fail("overlap_bound must be >= 1");
    std::map<Interval, double> budget;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      const auto& p = pieces[i];
      const std::string tag = "piece " + std::to_string(i) + " [" + p.lo.to_string() + "," + p.hi.to_string() + ")";
      if (!(p.lo < p.hi)) v.fail(tag + ": empty interval");
      if (!p.assigned.contains(Interval{p.lo, p.hi})) v.fail(tag + ": not contained in its assigned interval " + p.assigned.to_string());
      if (order) {
        if (!find_in_lambda(p.assigned, *order)) v.fail(tag + ": assigned " + p.assigned.to_string() + " is not in Lambda_" + std::to_string(*order));
      }
      budget[p.assigned] += std::norm(p.coeff);
    }
    for (const auto& [L, b] : budget) {
      const double scaled = b * overlap_bound;
      v.max_budget = std::max(v.max_budget, scaled);
      if (scaled > 1.0 + budget_tolerance) v.fail("interval " + L.to_string() + ": sum |c|^2 = " + std::to_string(b) + " exceeds 1/N");
    }
    // Sweep endpoints: +1 at lo, -1 at hi; half-open so closings sort first.
    std::vector<std::pair<DyadicScalar, int>> events;
    for (const auto& p : pieces) {
      events.emplace_back(p.lo, +1);
      events.emplace_back(p.hi, -1);
    }
    std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      return a.second < b.second;
    });
    long depth = 0;
    for (const auto& [x, delta] : events) {
      depth += delta;
      v.max_overlap = std::max(v.max_overlap, static_cast<std::size_t>(std::max(0L, depth)));
    }
    if (v.max_overlap > static_cast<std::size_t>(overlap_bound))
      v.fail("overlap " + std::to_string(v.max_overlap) + " exceeds N = " + std::to_string(overlap_bound));
    return v;
  }

  /// Symbol values on the bins of f with half-open lattice membership.
  std::vector<cplx> rasterize(const Signal& f, AliasingFlag* flag = nullptr) const {
    std::vector<cplx> bins(f.size());
    const double ny = f.nyquist();
    for (const auto& p : pieces) {
      const double lo = p.lo.to_double(), hi = p.hi.to_double();
      if (flag && (lo < -ny || hi > ny)) flag->raise();
      // Bins n/T with lo <= n/T < hi.
      auto n0 = static_cast<std::int64_t>(std::ceil(lo * f.period));
      auto n1 = static_cast<std::int64_t>(std::ceil(hi * f.period));
      while (static_cast<double>(n0 - 1) / f.period >= lo) --n0;
      while (static_cast<double>(n0) / f.period < lo) ++n0;
      while (static_cast<double>(n1 - 1) / f.period >= hi) --n1;
      while (static_cast<double>(n1) / f.period < hi) ++n1;
      const auto M = static_cast<std::int64_t>(f.size());
      for (std::int64_t n = std::max(n0, -M / 2); n < std::min(n1, M / 2); ++n) bins[static_cast<std::size_t>((n + M) % M)] += p.coeff;
    }
    return bins;
  }
};

// ---------------------------------------------------------------------------
// Variation norms

/// V_r of the sampled path F_0, ..., F_{n-1}: the supremum over subsequences
/// of (sum |F_{i_{k+1}} - F_{i_k}|^r)^{1/r}. r = 1 is the full path length,
/// r = inf the largest pairwise difference, and 1 < r < inf an O(n^2)
/// dynamic program over the last chosen index.
inline double variation_norm(std::span<const cplx> F, double r) {
  require(F.size() >= 2, "variation_norm: needs at least two samples");
  require(r >= 1.0, "variation_norm: r must be >= 1");
  const std::size_t n = F.size();
  if (r == 1.0) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) s += std::abs(F[i + 1] - F[i]);
    return s;
  }
  if (std::isinf(r)) {
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) best = std::max(best, std::abs(F[j] - F[i]));
    return best;
  }
  std::vector<double> best(n, 0.0);
  double overall = 0.0;
  for (std::size_t j = 1; j < n; ++j) {
    double b = 0.0;
    for (std::size_t i = 0; i < j; ++i) b = std::max(b, best[i] + std::pow(std::abs(F[j] - F[i]), r));
    best[j] = b;
    overall = std::max(overall, b);
  }
  return std::pow(overall, 1.0 / r);
}

inline double variation_norm(std::span<const double> F, double r) {
  std::vector<cplx> c(F.begin(), F.end());
  return variation_norm(std::span<const cplx>(c), r);
}

// ---------------------------------------------------------------------------
// Rescaled components

inline constexpr int kComponentGrid = 512;

/// Reference grid: `points` equispaced points covering [-5/8, 5/8] inclusive.
inline std::vector<double> component_grid(int points = kComponentGrid) {
  std::vector<double> x(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) x[static_cast<std::size_t>(i)] = -0.625 + 1.25 * i / (points - 1);
  return x;
}

namespace detail {
inline void check_component_window(const SampledMultiplier& m, const LacInterval& L) {
  const double c = L.center().to_double(), h = 0.625 * L.length().to_double();
  require(c - h >= -m.band && c + h <= m.band, "component_extract: window " + L.interval().to_string() + " escapes the symbol's lattice");
}
}  // namespace detail

/// m_L(xi) = eta(xi) m(c_L + xi |L|) on the reference grid.
inline std::vector<cplx> component_extract(const SampledMultiplier& m, const LacInterval& L, int points = kComponentGrid) {
  detail::check_component_window(m, L);
  const double c = L.center().to_double(), len = L.length().to_double();
  std::vector<cplx> out;
  out.reserve(static_cast<std::size_t>(points));
  for (double x : component_grid(points)) out.push_back(eta(x) * m(c + x * len));
  return out;
}

/// The unwindowed pullback m(c_L + x |L|) at the midpoints of `points`
/// equal cells of [-1/2, 1/2), i.e. m on L after affine normalization.
inline std::vector<cplx> component_pullback(const SampledMultiplier& m, const LacInterval& L, int points = kComponentGrid) {
  detail::check_component_window(m, L);
  const double c = L.center().to_double(), len = L.length().to_double();
  std::vector<cplx> out(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) out[static_cast<std::size_t>(i)] = m(c + (-0.5 + (i + 0.5) / points) * len);
  return out;
}

struct ClassNorm {
  double value = 0.0;
  std::optional<LacInterval> worst;
  std::size_t intervals = 0;
};

/// sup_L ||m_L||_inf + V_1(m_L) over Lambda_tau^{min_scale} within max_abs.
inline ClassNorm marcinkiewicz_norm(const SampledMultiplier& m, int order, const DyadicScalar& min_scale,
                                    const DyadicScalar& max_abs, int points = kComponentGrid) {
  const auto family = lambda_tau(order, min_scale, max_abs);
  require(!family.empty(), "marcinkiewicz_norm: empty family");
  std::vector<double> values(family.size());
  parallel_for(family.size(), [&](std::size_t i) {
    const auto comp = component_extract(m, family[i], points);
    double sup = 0.0;
    for (const auto& v : comp) sup = std::max(sup, std::abs(v));
    values[i] = sup + variation_norm(std::span<const cplx>(comp), 1.0);
  });
  ClassNorm out;
  out.intervals = family.size();
  for (std::size_t i = 0; i < family.size(); ++i)
    if (values[i] > out.value) {
      out.value = values[i];
      out.worst = family[i];
    }
  return out;
}

/// sup_L sup_{alpha <= M} ||d^alpha m_L||_inf with centered second-order
/// finite differences on the component grid (interior points only).
inline ClassNorm hormander_norm(const SampledMultiplier& m, int order, int max_derivative, const DyadicScalar& min_scale,
                                const DyadicScalar& max_abs, int points = kComponentGrid) {
  require(max_derivative >= 0 && max_derivative <= 4, "hormander_norm: derivative order must be in 0..4");
  const auto family = lambda_tau(order, min_scale, max_abs);
  require(!family.empty(), "hormander_norm: empty family");
  const double h = 1.25 / (points - 1);
  std::vector<double> values(family.size());
  parallel_for(family.size(), [&](std::size_t idx) {
    const auto comp = component_extract(m, family[idx], points);
    double best = 0.0;
    const auto n = static_cast<std::ptrdiff_t>(comp.size());
    auto at = [&](std::ptrdiff_t i) { return comp[static_cast<std::size_t>(i)]; };
    for (int k = 0; k <= max_derivative; ++k) {
      for (std::ptrdiff_t i = 2; i + 2 < n; ++i) {
        cplx v;
        switch (k) {
          case 0: v = at(i); break;
          case 1: v = (at(i + 1) - at(i - 1)) / (2 * h); break;
          case 2: v = (at(i + 1) - 2.0 * at(i) + at(i - 1)) / (h * h); break;
          case 3: v = (at(i + 2) - 2.0 * at(i + 1) + 2.0 * at(i - 1) - at(i - 2)) / (2 * h * h * h); break;
          default: v = (at(i + 2) - 4.0 * at(i + 1) + 6.0 * at(i) - 4.0 * at(i - 1) + at(i - 2)) / (h * h * h * h); break;
        }
        best = std::max(best, std::abs(v));
      }
    }
    values[idx] = best;
  });
  ClassNorm out;
  out.intervals = family.size();
  for (std::size_t i = 0; i < family.size(); ++i)
    if (values[i] > out.value) {
      out.value = values[i];
      out.worst = family[i];
    }
  return out;
}

// ---------------------------------------------------------------------------
// R_2 atoms

struct AtomCheck {
  bool is_atom = false;
  double defect = 0.0;        // max(0, sum - 1), or the residual when not piecewise constant
  double sum_squares = 0.0;   // sum over nonzero steps of |c_I|^2
  std::size_t steps = 0;
  bool piecewise_constant = true;
};

/// Reads a sampled component as sum_I c_I 1_I over maximal constant runs
/// (consecutive samples differing by more than `tol` start a new run) and
/// tests sum |c_I|^2 <= 1.
inline AtomCheck r2_atom_check(std::span<const cplx> values, double tol = 1e-8) {
  AtomCheck out;
  std::size_t start = 0;
  double residual = 0.0;
  auto close_run = [&](std::size_t end) {
    cplx mean = 0.0;
    for (std::size_t i = start; i < end; ++i) mean += values[i];
    mean /= static_cast<double>(end - start);
    for (std::size_t i = start; i < end; ++i) residual = std::max(residual, std::abs(values[i] - mean));
    if (std::abs(mean) > tol) {
      out.sum_squares += std::norm(mean);
      ++out.steps;
    }
  };
  for (std::size_t i = 1; i <= values.size(); ++i) {
    if (i == values.size() || std::abs(values[i] - values[i - 1]) > tol) {
      close_run(i);
      start = i;
    }
  }
  if (residual > tol) {
    out.piecewise_constant = false;
    out.defect = residual;
    return out;
  }
  out.defect = std::max(0.0, out.sum_squares - 1.0);
  out.is_atom = out.sum_squares <= 1.0 + 1e-12;
  return out;
}

struct GreedyDecomposition {
  double weight = 0.0;       // sum of |coefficients| of the unit atoms used
  double sum_squares = 0.0;  // sum of squared jump sizes
  double defect = 0.0;       // reconstruction error (sup norm)
  std::size_t atoms = 0;
};

/// Layer-cake decomposition F = F_0 1 + sum_j (F_j - F_{j-1}) 1_{[x_j, end)}:
/// every term is a multiple of a single-step atom, so the convex-hull weight
/// is at most |F_0| + V_1(F).
inline GreedyDecomposition greedy_step_decomposition(std::span<const cplx> F) {
  GreedyDecomposition out;
  if (F.empty()) return out;
  out.weight = std::abs(F[0]);
  out.atoms = F[0] != cplx(0.0) ? 1 : 0;
  std::vector<cplx> rebuilt(F.size(), F[0]);
  cplx running = F[0];
  for (std::size_t j = 1; j < F.size(); ++j) {
    const cplx jump = F[j] - F[j - 1];
    if (jump != cplx(0.0)) {
      out.weight += std::abs(jump);
      out.sum_squares += std::norm(jump);
      ++out.atoms;
    }
    running += jump;
    rebuilt[j] = running;
  }
  for (std::size_t j = 0; j < F.size(); ++j) out.defect = std::max(out.defect, std::abs(rebuilt[j] - F[j]));
  return out;
}

// ---------------------------------------------------------------------------
// Application

inline Signal apply_multiplier(const Signal& f, const SampledMultiplier& m, AliasingFlag* flag = nullptr) {
  if (flag && m.band < f.nyquist()) flag->raise();
  return apply_symbol(f, m.symbol);
}

inline Signal apply_multiplier(const Signal& f, const StepMultiplier& m, AliasingFlag* flag = nullptr) {
  const auto bins = m.rasterize(f, flag);
  return apply_symbol_bins(f, bins);
}

/// Random-sign prototype sum_L eps_L 1_L over a truncated Lambda_tau.
inline SampledMultiplier random_sign_multiplier(int order, const DyadicScalar& min_scale, const DyadicScalar& max_abs,
                                                std::span<const int> signs) {
  auto family = std::make_shared<std::vector<LacInterval>>(lambda_tau(order, min_scale, max_abs));
  require(signs.size() >= family->size(), "random_sign_multiplier: not enough signs");
  auto eps = std::make_shared<std::vector<int>>(signs.begin(), signs.begin() + static_cast<std::ptrdiff_t>(family->size()));
  SampledMultiplier m;
  m.symbol = [family, eps](double xi) -> cplx {
    // Intervals are sorted and disjoint: binary search on left endpoints.
    auto it = std::upper_bound(family->begin(), family->end(), xi,
                               [](double x, const LacInterval& L) { return x < L.left.to_double(); });
    if (it == family->begin()) return 0.0;
    --it;
    if (xi < it->right.to_double()) return static_cast<double>((*eps)[static_cast<std::size_t>(it - family->begin())]);
    return 0.0;
  };
  m.declared = MultiplierClass::Marcinkiewicz;
  m.order = order;
  return m;
}

// ---------------------------------------------------------------------------
// The sharpness family

struct SharpnessFamily {
  int N = 0;
  std::vector<std::pair<int, int>> indices;  // (k, l), 1 <= l < k <= N
  Signal f_N;
  Signal g_N;

  /// m_{k,l}(xi) = m_0((xi - 2^k) / 2^{l-1}), m_0(xi) = psi(xi - 1) 1_{[1, inf)}(xi).
  static double symbol(int k, int l, double xi) {
    const double u = (xi - std::ldexp(1.0, k)) / std::ldexp(1.0, l - 1);
    return u >= 1.0 ? psi(u - 1.0) : 0.0;
  }

  /// Pointwise (sum_{k,l} |T_{m_{k,l}} h|^2)^{1/2}, tree-reduced.
  Signal vector_norm(const Signal& h) const {
    std::vector<cplx> raw = h.samples;
    fft::forward(raw);
    const double inv = 1.0 / static_cast<double>(h.size());
    auto sum = tree_sum(indices.size(), h.size(), [&](std::size_t i, std::vector<double>& out) {
      const auto [k, l] = indices[i];
      std::vector<cplx> data(raw.size());
      for (std::size_t b = 0; b < raw.size(); ++b) {
        const double s = symbol(k, l, h.frequency(b));
        if (s != 0.0) data[b] = raw[b] * (s * inv);
      }
      fft::backward(data);
      for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::norm(data[j]);
    });
    Signal S = Signal::zeros(h.log2_size(), h.period, h.offset);
    for (std::size_t j = 0; j < S.size(); ++j) S.samples[j] = std::sqrt(sum[j]);
    return S;
  }

  /// Randomized single multiplier sum_{k,l} eps_{k,l} T_{m_{k,l}} h.
  Signal signed_sum(const Signal& h, std::span<const int> signs) const {
    require(signs.size() >= indices.size(), "signed_sum: not enough signs");
    return apply_symbol(h, [&](double xi) -> cplx {
      double s = 0.0;
      for (std::size_t i = 0; i < indices.size(); ++i) s += signs[i] * symbol(indices[i].first, indices[i].second, xi);
      return s;
    });
  }
};

/// Largest N with 2^{N+2} <= nyquist (the transform of f_N lives in
/// [-2^{N+2}, 2^{N+2}]); 0 when no N >= 1 fits.
inline int max_feasible_sharpness_N(int J, double T) {
  const double ny = std::ldexp(1.0, J) / (2.0 * T);
  int N = 0;
  while (std::ldexp(1.0, N + 3) <= ny) ++N;
  return N;
}

/// Grid on [-T/2, T/2) with 2^J points. f_N(x) = 2^N f(2^N x) with
/// fhat = eta(5 xi / 32) (equal to 1 on [-2, 2], supported in [-4, 4]),
/// built on the frequency lattice; g_N = f_N 1_{[-1/2, 1/2]}.
inline SharpnessFamily build_sharpness_family(int N, int J, double T) {
  require(N >= 1, "build_sharpness_family: N must be >= 1");
  require(T >= 1.0, "build_sharpness_family: period must be >= 1");
  const int feasible = max_feasible_sharpness_N(J, T);
  require(N <= feasible, "build_sharpness_family: N = " + std::to_string(N) + " exceeds Nyquist; max feasible N for this grid is " +
                              std::to_string(feasible));
  SharpnessFamily fam;
  fam.N = N;
  for (int k = 2; k <= N; ++k)
    for (int l = 1; l < k; ++l) fam.indices.emplace_back(k, l);
  Spectrum S{std::vector<cplx>(std::size_t{1} << J), T, -T / 2.0};
  const double scale = std::ldexp(1.0, N);
  for (std::size_t b = 0; b < S.size(); ++b) S.coeffs[b] = eta(5.0 * S.frequency(b) / (32.0 * scale));
  fam.f_N = inverse(S);
  fam.g_N = fam.f_N;
  for (std::size_t j = 0; j < fam.g_N.size(); ++j)
    if (std::abs(fam.g_N.x(j)) > 0.5) fam.g_N.samples[j] = 0.0;
  return fam;
}

}  // namespace lacuna
