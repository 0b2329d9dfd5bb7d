#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lacuna/czd.hpp"
#include "lacuna/harness/config.hpp"
#include "lacuna/harness/ensemble.hpp"
#include "lacuna/harness/report.hpp"
#include "lacuna/martingale.hpp"
#include "lacuna/multipliers.hpp"
#include "lacuna/orlicz.hpp"
#include "lacuna/parallel.hpp"
#include "lacuna/spectral.hpp"

namespace lacuna::harness {

// ---------------------------------------------------------------------------
// Building blocks

namespace detail {

/// Delta_L f from the raw spectrum, touching only the bins inside (5/4)L.
inline Signal smooth_project(std::span<const cplx> raw, const Signal& f, const LacInterval& L) {
  const double c = L.center().to_double(), len = L.length().to_double(), T = f.period;
  const auto M = static_cast<std::int64_t>(f.size());
  const auto lo = std::max<std::int64_t>(static_cast<std::int64_t>(std::ceil((c - 0.625 * len) * T)), -M / 2);
  const auto hi = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor((c + 0.625 * len) * T)), M / 2 - 1);
  std::vector<cplx> out(raw.size());
  for (std::int64_t n = lo; n <= hi; ++n) {
    const auto k = static_cast<std::size_t>((n + M) % M);
    out[k] = raw[k] * eta((static_cast<double>(n) / T - c) / len);
  }
  return lacuna::detail::from_raw(std::move(out), f);
}

/// Cell range [first, first + count) of [a, b) on the grid of f; a, b must be grid points.
inline std::pair<std::size_t, std::size_t> cells(const Signal& f, double a, double b) {
  const double s = (a - f.offset) / f.dx(), e = (b - f.offset) / f.dx();
  require(std::abs(s - std::round(s)) < 1e-9 && std::abs(e - std::round(e)) < 1e-9, "cells: endpoints are not grid points");
  require(s >= -1e-9 && e <= static_cast<double>(f.size()) + 1e-9 && s < e, "cells: interval leaves the window");
  const auto first = static_cast<std::size_t>(std::llround(s));
  return {first, static_cast<std::size_t>(std::llround(e)) - first};
}

inline std::vector<double> abs_slice(const Signal& f, std::size_t first, std::size_t count) {
  std::vector<double> a(count);
  for (std::size_t i = 0; i < count; ++i) a[i] = std::abs(f.samples[first + i]);
  return a;
}

}  // namespace detail

struct LevelRatio {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double alpha = std::numeric_limits<double>::quiet_NaN();
};

/// sup over alpha of |{out >= alpha}| / rhs(alpha), with alpha running over
/// `levels` magnitudes of `out` spaced geometrically in rank (the largest
/// value always included). `out >= alpha` is the left limit of the strict
/// superlevel set. rhs(alpha) = int B_r(|f|/alpha), or with `local` the
/// normalized form alpha^{-1} int |f| log^r(e + |f|/<|f|>), where the average
/// is over `local_length`.
inline LevelRatio weak_orlicz_ratio(std::vector<double> out, std::span<const double> in, double dx, double exponent, int levels,
                                    bool local = false, double local_length = 1.0) {
  require(levels >= 2, "weak_orlicz_ratio: need at least two levels");
  std::sort(out.begin(), out.end(), std::greater<>());
  std::size_t n = 0;
  while (n < out.size() && out[n] > 0.0) ++n;
  LevelRatio best;
  if (n == 0) return best;
  const YoungFunction B = YoungFunction::blog(exponent);
  double local_rhs = 0.0;
  if (local) {
    double mass = 0.0;
    for (double v : in) mass += v;
    const double avg = mass * dx / local_length;
    if (avg > 0)
      for (double v : in) local_rhs += v * std::pow(std::log(std::numbers::e + v / avg), exponent);
    local_rhs *= dx;
  }
  std::size_t last = std::numeric_limits<std::size_t>::max();
  for (int i = 0; i < levels; ++i) {
    auto r = static_cast<std::size_t>(std::floor(std::exp(std::log(static_cast<double>(n)) * i / (levels - 1)))) ;
    r = std::clamp<std::size_t>(r, 1, n) - 1;
    const double alpha = out[r];
    while (r + 1 < n && out[r + 1] == alpha) ++r;
    if (r == last) continue;
    last = r;
    const double lhs = static_cast<double>(r + 1) * dx;
    double rhs = 0.0;
    if (local) {
      rhs = local_rhs / alpha;
    } else {
      for (double v : in) rhs += B(v / alpha);
      rhs *= dx;
    }
    if (rhs <= 0.0) continue;
    if (lhs / rhs > best.ratio) best = {lhs, rhs, lhs / rhs, alpha};
  }
  return best;
}

// ---------------------------------------------------------------------------
// Operators

enum class Source { Identity, Prototype, Step, LpSquare, Hormander, SmoothSquare, Mihlin };

inline const char* source_name(Source s) {
  switch (s) {
    case Source::Identity: return "identity";
    case Source::Prototype: return "prototype";
    case Source::Step: return "step";
    case Source::LpSquare: return "lp-square";
    case Source::Hormander: return "hormander";
    case Source::SmoothSquare: return "smooth-square";
    default: return "mihlin";
  }
}

inline std::optional<Source> parse_source(std::string_view s) {
  for (Source x : {Source::Identity, Source::Prototype, Source::Step, Source::LpSquare, Source::Hormander, Source::SmoothSquare,
                   Source::Mihlin})
    if (s == source_name(x)) return x;
  return std::nullopt;
}

inline bool is_smooth_source(Source s) { return s == Source::Hormander || s == Source::SmoothSquare || s == Source::Mihlin; }

struct EndpointOperator {
  Source source = Source::Identity;
  int tau = 1;
  double exponent = 0.0;  // Orlicz exponent on the right-hand side
  std::string anchor;
  bool class_ok = true;
  nlohmann::json diagnostics = nlohmann::json::object();
  std::function<Signal(const Signal&, AliasingFlag*)> apply;
};

inline std::vector<int> random_signs(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coin(0, 1);
  std::vector<int> s(n);
  for (auto& v : s) v = coin(rng) ? 1 : -1;
  return s;
}

/// Every L in Lambda_tau split into four equal pieces with coefficients
/// e^{i theta} / 2, so sum |c_I|^2 = 1 per L and the overlap is one.
inline StepMultiplier quartered_step_multiplier(int tau, const DyadicScalar& min_scale, const DyadicScalar& max_abs, std::uint64_t seed) {
  StepMultiplier m;
  m.order = tau;
  m.overlap_bound = 1;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 2 * std::numbers::pi);
  for (const auto& L : lambda_tau(tau, min_scale, max_abs)) {
    const DyadicScalar q = L.length().halved().halved();
    for (int i = 0; i < 4; ++i) {
      const DyadicScalar lo = L.left + q * DyadicScalar(i);
      m.pieces.push_back({lo, lo + q, std::polar(0.5, U(rng)), L.interval()});
    }
  }
  return m;
}

/// sum_L eps_L phi_L over Lambda_tau: smooth, singular only on lac_{tau-1}.
inline SampledMultiplier smooth_sign_multiplier(int tau, const DyadicScalar& min_scale, const DyadicScalar& max_abs,
                                                std::span<const int> signs) {
  auto family = std::make_shared<std::vector<LacInterval>>(lambda_tau(tau, min_scale, max_abs));
  require(signs.size() >= family->size(), "smooth_sign_multiplier: not enough signs");
  auto eps = std::make_shared<std::vector<int>>(signs.begin(), signs.begin() + static_cast<std::ptrdiff_t>(family->size()));
  SampledMultiplier m;
  m.symbol = [family, eps](double xi) -> cplx {
    // (5/4)L reaches |L|/8 past each end; Whitney neighbours are within a
    // factor 4 in length, so a few positions either side cover all overlaps.
    auto it = std::upper_bound(family->begin(), family->end(), xi,
                               [](double x, const LacInterval& L) { return x < L.left.to_double(); });
    const auto pos = static_cast<std::ptrdiff_t>(it - family->begin());
    const auto n = static_cast<std::ptrdiff_t>(family->size());
    double s = 0.0;
    for (auto i = std::max<std::ptrdiff_t>(0, pos - 6); i < std::min(n, pos + 6); ++i)
      s += (*eps)[static_cast<std::size_t>(i)] * smooth_symbol((*family)[static_cast<std::size_t>(i)], xi);
    return s;
  };
  m.declared = MultiplierClass::Hormander;
  m.order = tau;
  return m;
}

// Derivative order of the Hormander class diagnostics.
inline constexpr int kHormanderM = 4;

inline EndpointOperator make_operator(Source source, int tau, const ExperimentConfig& cfg) {
  require(tau >= 1, "make_operator: tau must be >= 1");
  EndpointOperator op;
  op.source = source;
  op.tau = tau;
  const auto min_scale = cfg.min_scale, max_abs = cfg.max_abs;
  const std::string t = std::to_string(tau);
  switch (source) {
    case Source::Identity:
      op.exponent = 0.5 * tau;
      op.anchor = "|{|f| > a}| <= int B_{tau/2}(|f|/a), tau=" + t;
      op.apply = [](const Signal& f, AliasingFlag*) { return f; };
      break;
    case Source::Prototype: {
      const auto n = lambda_tau(tau, min_scale, max_abs).size();
      auto m = random_sign_multiplier(tau, min_scale, max_abs, random_signs(n, cfg.seed));
      const auto norm = marcinkiewicz_norm(m, tau, min_scale, max_abs);
      op.exponent = 0.5 * tau;
      op.anchor = "|{|T_m f| > a}| <~ int B_{tau/2}(|f|/a), m = sum eps_L 1_L over Lambda_tau, tau=" + t;
      op.class_ok = std::isfinite(norm.value);
      op.diagnostics = {{"marcinkiewicz_norm", norm.value}, {"intervals", norm.intervals}};
      op.apply = [m](const Signal& f, AliasingFlag* flag) { return apply_multiplier(f, m, flag); };
      break;
    }
    case Source::Step: {
      auto m = quartered_step_multiplier(tau, min_scale, max_abs, cfg.seed);
      const auto v = m.validate();
      op.exponent = 0.5 * tau;
      op.anchor = "|{|T_m f| > a}| <~ int B_{tau/2}(|f|/a), m an R_{2,tau} step multiplier, tau=" + t;
      op.class_ok = v.ok;
      op.diagnostics = {{"pieces", m.pieces.size()}, {"max_overlap", v.max_overlap}, {"max_budget", v.max_budget}, {"violations", v.violations}};
      op.apply = [m](const Signal& f, AliasingFlag* flag) { return apply_multiplier(f, m, flag); };
      break;
    }
    case Source::LpSquare:
      op.exponent = 0.5 * tau;
      op.anchor = "|{LP_tau f > a}| <~ int B_{tau/2}(|f|/a), tau=" + t;
      op.diagnostics = {{"intervals", lambda_tau(tau, min_scale, max_abs).size()}};
      op.apply = [tau, min_scale, max_abs](const Signal& f, AliasingFlag* flag) {
        return lp_square_function(f, tau, ProjectionMode::Sharp, min_scale, max_abs, flag);
      };
      break;
    case Source::Hormander: {
      const auto n = lambda_tau(tau, min_scale, max_abs).size();
      auto m = smooth_sign_multiplier(tau, min_scale, max_abs, random_signs(n, cfg.seed));
      const auto norm = hormander_norm(m, tau, kHormanderM, min_scale, max_abs);
      op.exponent = 0.5 * (tau - 1);
      op.anchor = "|{|T_m f| > a}| <~ int B_{(tau-1)/2}(|f|/a), m = sum eps_L phi_L in H_tau, tau=" + t;
      op.class_ok = std::isfinite(norm.value);
      op.diagnostics = {{"hormander_norm_M4", norm.value}, {"intervals", norm.intervals}};
      op.apply = [m](const Signal& f, AliasingFlag* flag) { return apply_multiplier(f, m, flag); };
      break;
    }
    case Source::SmoothSquare:
      op.exponent = 0.5 * (tau - 1);
      op.anchor = "|{S_tau f > a}| <~ int B_{(tau-1)/2}(|f|/a), tau=" + t;
      op.diagnostics = {{"intervals", lambda_tau(tau, min_scale, max_abs).size()}};
      op.apply = [tau, min_scale, max_abs](const Signal& f, AliasingFlag* flag) {
        return lp_square_function(f, tau, ProjectionMode::Smooth, min_scale, max_abs, flag);
      };
      break;
    case Source::Mihlin: {
      require(tau == 1, "make_operator: the |xi|^i symbol is an order one multiplier");
      SampledMultiplier m;
      m.symbol = [](double xi) -> cplx { return xi == 0.0 ? cplx(0.0) : std::polar(1.0, std::log(std::abs(xi))); };
      m.declared = MultiplierClass::Hormander;
      m.order = 1;
      const auto norm = hormander_norm(m, 1, kHormanderM, min_scale, max_abs);
      op.exponent = 0.0;
      op.anchor = "|{|T_m f| > a}| <~ ||f||_1 / a, m(xi) = |xi|^i";
      op.class_ok = std::isfinite(norm.value);
      op.diagnostics = {{"hormander_norm_M4", norm.value}};
      op.apply = [m](const Signal& f, AliasingFlag* flag) { return apply_multiplier(f, m, flag); };
      break;
    }
  }
  return op;
}

// ---------------------------------------------------------------------------
// Paired runs

/// measure(sample, J) returns one optional sample per report; nullopt skips
/// that (sample, report) pair at this resolution.
template <typename Measure>
std::vector<RatioReport> run_paired(std::vector<RatioReport> reports, const ExperimentConfig& cfg,
                                    const std::vector<TestFunction>& fs, Measure&& measure) {
  const int grids[2] = {cfg.J, cfg.fine_J()};
  for (auto& r : reports) {
    r.config = cfg.to_json();
    r.coarse.J = grids[0];
    r.fine.J = grids[1];
  }
  for (int g = 0; g < 2; ++g) {
    std::vector<std::vector<std::optional<RatioSample>>> got(fs.size());
    parallel_for(fs.size(), [&](std::size_t i) { got[i] = measure(fs[i], grids[g]); });
    for (std::size_t i = 0; i < fs.size(); ++i) {
      require(got[i].size() == reports.size(), "run_paired: measure returned the wrong number of samples");
      for (std::size_t k = 0; k < reports.size(); ++k) {
        auto& run = g == 0 ? reports[k].coarse : reports[k].fine;
        if (got[i][k] && std::isfinite(got[i][k]->ratio)) {
          run.samples.push_back(*got[i][k]);
        } else {
          run.skipped.push_back(fs[i].label);
        }
      }
    }
  }
  for (auto& r : reports) r.finalize();
  return reports;
}

inline EnsembleSpec endpoint_spec(const ExperimentConfig& cfg, int tau) {
  EnsembleSpec s;
  s.left = -0.5;
  s.length = 1.0;
  s.order = tau;
  s.max_freq = cfg.max_abs.halved();
  s.cz_sigma = tau;
  return s;
}

inline EnsembleSpec unit_interval_spec(const ExperimentConfig& cfg, int tau) {
  EnsembleSpec s = endpoint_spec(cfg, tau);
  s.left = 0.0;
  return s;
}

/// Weak-type ratio of T against int B_r(|f|/alpha) on every sample and level.
/// Samples must be supported in [-1/2, 1/2).
inline RatioReport verify_operator(const ExperimentConfig& cfg, const EndpointOperator& op, const std::vector<TestFunction>& fs) {
  require(op.class_ok, std::string("verify: ") + source_name(op.source) + " fails its class diagnostics");
  const auto spec = endpoint_spec(cfg, op.tau);
  RatioReport proto;
  proto.id = std::string("endpoint.") + source_name(op.source) + ".tau" + std::to_string(op.tau);
  proto.anchor = op.anchor;
  proto.extra = {{"operator", op.diagnostics}, {"exponent", op.exponent}};
  auto reports = run_paired({proto}, cfg, fs, [&](const TestFunction& tf, int J) -> std::vector<std::optional<RatioSample>> {
    const Signal f = tf.sample(J, cfg.T);
    AliasingFlag flag;
    const Signal Tf = op.apply(f, &flag);
    if (flag.aliased) return {std::nullopt};
    const auto [first, count] = detail::cells(f, spec.left, spec.left + spec.length);
    LevelRatio r;
    if (cfg.local_normalized) {
      r = weak_orlicz_ratio(detail::abs_slice(Tf, first, count), detail::abs_slice(f, first, count), f.dx(), op.exponent, cfg.levels,
                            true, spec.length);
    } else {
      std::vector<double> in;
      for (const auto& v : f.samples)
        if (v != cplx(0.0)) in.push_back(std::abs(v));
      r = weak_orlicz_ratio(Tf.magnitudes(), in, f.dx(), op.exponent, cfg.levels);
    }
    if (r.rhs <= 0.0) return {std::nullopt};
    return {RatioSample{tf.label, r.lhs, r.rhs, r.ratio, r.alpha}};
  });
  return reports[0];
}

inline std::vector<TestFunction> endpoint_ensemble(const ExperimentConfig& cfg, std::span<const Family> families = kAllFamilies) {
  return make_ensemble(endpoint_spec(cfg, cfg.tau), families, static_cast<std::size_t>(cfg.K), cfg.seed);
}

inline RatioReport verify_endpoint(const ExperimentConfig& cfg, Source source, const std::vector<TestFunction>& fs) {
  require(!is_smooth_source(source), "verify_endpoint: use verify_hormander for smooth symbols");
  return verify_operator(cfg, make_operator(source, cfg.tau, cfg), fs);
}

inline RatioReport verify_endpoint(const ExperimentConfig& cfg, Source source, std::span<const Family> families = kAllFamilies) {
  return verify_endpoint(cfg, source, endpoint_ensemble(cfg, families));
}

inline RatioReport verify_hormander(const ExperimentConfig& cfg, Source source, const std::vector<TestFunction>& fs) {
  require(is_smooth_source(source), "verify_hormander: source must be hormander, smooth-square or mihlin");
  auto r = verify_operator(cfg, make_operator(source, cfg.tau, cfg), fs);
  r.id = std::string("hormander.") + source_name(source) + ".tau" + std::to_string(cfg.tau);
  return r;
}

inline RatioReport verify_hormander(const ExperimentConfig& cfg, Source source = Source::Hormander,
                                    std::span<const Family> families = kAllFamilies) {
  return verify_hormander(cfg, source, endpoint_ensemble(cfg, families));
}

// ---------------------------------------------------------------------------
// Zygmund-Bonami

/// (sum_{lambda in lac_tau^1} |fhat(lambda)|^2)^{1/2} against ||f||_{L log^{tau/2} L}
/// for f supported in [0, 1). Coefficients are read off FFT bins lambda T.
inline std::vector<TestFunction> unit_interval_ensemble(const ExperimentConfig& cfg, std::span<const Family> families = kAllFamilies) {
  return make_ensemble(unit_interval_spec(cfg, cfg.tau), families, static_cast<std::size_t>(cfg.K), cfg.seed);
}

inline RatioReport verify_zygmund_bonami(const ExperimentConfig& cfg, const std::vector<TestFunction>& fs) {
  const int tau = cfg.tau;
  const auto lac = lac_tau(tau, DyadicScalar(1, 0), cfg.max_abs).points;
  RatioReport proto;
  proto.id = "zygmund-bonami.tau" + std::to_string(tau);
  proto.anchor = "(sum_{lambda in lac_tau^1} |fhat(lambda)|^2)^{1/2} <~ ||f||_{L log^{tau/2} L}, supp f in [0,1], tau=" + std::to_string(tau);
  proto.extra = {{"frequencies", lac.size()}};
  auto reports = run_paired({proto}, cfg, fs, [&](const TestFunction& tf, int J) -> std::vector<std::optional<RatioSample>> {
    const Signal f = tf.sample(J, cfg.T);
    require(cfg.max_abs.to_double() <= f.nyquist(), "verify_zygmund_bonami: max_abs exceeds the Nyquist frequency");
    const auto raw = lacuna::detail::raw_spectrum(f);
    const auto M = static_cast<std::int64_t>(f.size());
    double sum = 0.0;
    for (const auto& lam : lac) {
      const auto n = static_cast<std::int64_t>(std::llround(lam.to_double() * f.period));
      sum += std::norm(f.period * raw[static_cast<std::size_t>((n + M) % M)]);
    }
    const auto [first, count] = detail::cells(f, 0.0, 1.0);
    const double rhs = luxemburg_avg(detail::abs_slice(f, first, count), 0.5 * tau);
    if (rhs <= 0.0) return {std::nullopt};
    const double lhs = std::sqrt(sum);
    return {RatioSample{tf.label, lhs, rhs, lhs / rhs}};
  });
  return reports[0];
}

inline RatioReport verify_zygmund_bonami(const ExperimentConfig& cfg, std::span<const Family> families = kAllFamilies) {
  return verify_zygmund_bonami(cfg, unit_interval_ensemble(cfg, families));
}

/// The generalized Zygmund-Bonami family on J = [0, 1) for every sigma in
/// cfg.sigmas and gamma in cfg.gammas. Reports, in order:
///   local(sigma, gamma): (sum_{L in Lambda_tau^1} <|Delta_L f|>_{B_{sigma/2},gamma J}^2)^{1/2} / <|f|>_{B_{(sigma+tau)/2},J}
///   tail(gamma):  (sum_{L in Lambda_tau^1} ||Delta_L f||_{L^2(off gamma J)}^2)^{1/2} / (|J|^{1/2} <|f|>_{B_{(tau-1)/2},J})
///   cancel:       the same over |L| < 1/|J| for f with vanishing lacunary coefficients of order < tau
///   cor(sigma, gamma): the local ratio over all of Lambda_tau for that cancellative f
///   l1:           (sum_{L in Lambda_tau^1} ||Delta_L f||_1^2)^{1/2} / ||f||_{L log^{tau/2} L}
/// The cancellative f is the given sample with its coefficients on
/// {0} u lac_1 u ... u lac_{tau-1} (scale 1/|J|, up to Nyquist) removed; a
/// removal residual above 1e-8 skips the cancel and cor branches.
inline std::vector<RatioReport> verify_gen_zygmund_bonami(const ExperimentConfig& cfg, const std::vector<TestFunction>& fs) {
  const int tau = cfg.tau;
  const auto one = DyadicScalar(1, 0);
  const auto big = lambda_tau(tau, one, cfg.max_abs);
  const auto all = lambda_tau(tau, cfg.min_scale, cfg.max_abs);
  require(!big.empty() && !all.empty(), "verify_gen_zygmund_bonami: empty interval family");
  const auto& S = cfg.sigmas;
  const auto& G = cfg.gammas;
  for (double g : G) require(g > 1.0, "verify_gen_zygmund_bonami: gamma must be > 1");
  const std::string t = std::to_string(tau);
  auto fmt = [](double v) {
    std::string s = std::to_string(v);
    s.erase(s.find_last_not_of('0') + 1);
    if (s.back() == '.') s.pop_back();
    return s;
  };

  std::vector<RatioReport> reports;
  for (double s : S)
    for (double g : G) {
      RatioReport r;
      r.id = "genzb.local.tau" + t + ".sigma" + fmt(s) + ".gamma" + fmt(g);
      r.anchor = "(sum_{L in Lambda_tau^{1/|J|}} <|Delta_L f|>_{B_{sigma/2},gamma J}^2)^{1/2} <~ <|f|>_{B_{(sigma+tau)/2},J}";
      reports.push_back(r);
    }
  for (double g : G) {
    RatioReport r;
    r.id = "genzb.tail.tau" + t + ".gamma" + fmt(g);
    r.anchor = "sum_{L in Lambda_tau^{1/|J|}} ||Delta_L f||_{L^2(R \\ gamma J)}^2 <~ |J| <|f|>_{B_{(tau-1)/2},J}^2";
    reports.push_back(r);
  }
  {
    RatioReport r;
    r.id = "genzb.cancel.tau" + t;
    r.anchor = "sum_{L in Lambda_tau, |L| < 1/|J|} ||Delta_L f||_2^2 <~ |J| <|f|>_{B_{(tau-1)/2},J}^2 when fhat = 0 on lac_0..lac_{tau-1} at scale 1/|J|";
    reports.push_back(r);
  }
  for (double s : S)
    for (double g : G) {
      RatioReport r;
      r.id = "genzb.cor.tau" + t + ".sigma" + fmt(s) + ".gamma" + fmt(g);
      r.anchor = "(sum_{L in Lambda_tau} <|Delta_L f|>_{B_{sigma/2},gamma J}^2)^{1/2} <~ <|f|>_{B_{(sigma+tau)/2},J} when fhat = 0 on lac_0..lac_{tau-1}";
      reports.push_back(r);
    }
  {
    RatioReport r;
    r.id = "genzb.l1.tau" + t;
    r.anchor = "(sum_{L in Lambda_tau^1} ||Delta_L f||_1^2)^{1/2} <~ ||f||_{L log^{tau/2} L}";
    reports.push_back(r);
  }
  const std::size_t nS = S.size(), nG = G.size();
  const std::size_t local0 = 0, tail0 = nS * nG, cancel0 = tail0 + nG, cor0 = cancel0 + 1, l10 = cor0 + nS * nG;
  for (auto& r : reports) r.extra = {{"tau", tau}, {"big_intervals", big.size()}, {"all_intervals", all.size()}};

  return run_paired(std::move(reports), cfg, fs, [&](const TestFunction& tf, int J) {
    std::vector<std::optional<RatioSample>> out(l10 + 1);
    const Signal f = tf.sample(J, cfg.T);
    require(1.25 * cfg.max_abs.to_double() <= f.nyquist(), "verify_gen_zygmund_bonami: smooth windows exceed the Nyquist frequency");
    const double dx = f.dx();
    const auto [j0, n0] = detail::cells(f, 0.0, 1.0);
    std::vector<std::pair<std::size_t, std::size_t>> gcells;
    for (double g : G) gcells.push_back(detail::cells(f, 0.5 - 0.5 * g, 0.5 + 0.5 * g));
    const auto aJ = detail::abs_slice(f, j0, n0);

    auto local_sums = [&](const Signal& d, std::vector<double>& acc) {
      for (std::size_t gi = 0; gi < nG; ++gi) {
        const auto m = detail::abs_slice(d, gcells[gi].first, gcells[gi].second);
        for (std::size_t si = 0; si < nS; ++si) {
          const double v = luxemburg_avg(m, 0.5 * S[si]);
          acc[si * nG + gi] += v * v;
        }
      }
    };
    auto sample = [&](double lhs, double rhs) -> std::optional<RatioSample> {
      if (!(rhs > 0.0)) return std::nullopt;
      return RatioSample{tf.label, lhs, rhs, lhs / rhs};
    };

    // Branches on f itself.
    const auto raw = lacuna::detail::raw_spectrum(f);
    std::vector<double> local(nS * nG, 0.0), tail(nG, 0.0);
    double l1 = 0.0;
    for (const auto& L : big) {
      const Signal d = detail::smooth_project(raw, f, L);
      local_sums(d, local);
      double total = 0.0, mass = 0.0;
      for (const auto& v : d.samples) {
        total += std::norm(v);
        mass += std::abs(v);
      }
      for (std::size_t gi = 0; gi < nG; ++gi) {
        double inside = 0.0;
        for (std::size_t i = 0; i < gcells[gi].second; ++i) inside += std::norm(d.samples[gcells[gi].first + i]);
        tail[gi] += std::max(0.0, total - inside) * dx;
      }
      l1 += (mass * dx) * (mass * dx);
    }
    const double tail_rhs = luxemburg_avg(aJ, 0.5 * (tau - 1));
    for (std::size_t si = 0; si < nS; ++si) {
      const double rhs = luxemburg_avg(aJ, 0.5 * (S[si] + tau));
      for (std::size_t gi = 0; gi < nG; ++gi) out[local0 + si * nG + gi] = sample(std::sqrt(local[si * nG + gi]), rhs);
    }
    for (std::size_t gi = 0; gi < nG; ++gi) out[tail0 + gi] = sample(std::sqrt(tail[gi]), tail_rhs);
    out[l10] = sample(std::sqrt(l1), luxemburg_avg(aJ, 0.5 * tau));

    // Branches on the cancellative part.
    const auto bins = lacunary_bins(tau - 1, one, band_limit(f));
    const auto removal = remove_lacunary(std::span<const cplx>(f.samples).subspan(j0, n0), 0.0, dx, bins);
    if (std::max(removal.diag.max_residual, removal.diag.nudft_residual) > 1e-8) return out;
    Signal fc = Signal::zeros(J, f.period, f.offset);
    std::copy(removal.b.begin(), removal.b.end(), fc.samples.begin() + static_cast<std::ptrdiff_t>(j0));
    const auto ac = detail::abs_slice(fc, j0, n0);
    const auto raw_c = lacuna::detail::raw_spectrum(fc);
    std::vector<double> cor(nS * nG, 0.0);
    double cancel = 0.0;
    for (const auto& L : all) {
      const Signal d = detail::smooth_project(raw_c, fc, L);
      local_sums(d, cor);
      if (L.length() < one) {
        double e = 0.0;
        for (const auto& v : d.samples) e += std::norm(v);
        cancel += e * dx;
      }
    }
    out[cancel0] = sample(std::sqrt(cancel), luxemburg_avg(ac, 0.5 * (tau - 1)));
    for (std::size_t si = 0; si < nS; ++si) {
      const double rhs = luxemburg_avg(ac, 0.5 * (S[si] + tau));
      for (std::size_t gi = 0; gi < nG; ++gi) out[cor0 + si * nG + gi] = sample(std::sqrt(cor[si * nG + gi]), rhs);
    }
    return out;
  });
}

inline std::vector<RatioReport> verify_gen_zygmund_bonami(const ExperimentConfig& cfg, std::span<const Family> families = kAllFamilies) {
  return verify_gen_zygmund_bonami(cfg, unit_interval_ensemble(cfg, families));
}

// ---------------------------------------------------------------------------
// Martingale experiments

struct CwwEnsembleReport {
  std::size_t samples = 0;
  int J = 0;
  std::vector<double> lambdas;
  std::vector<double> worst_measure;  // per lambda, max over samples
  std::vector<double> bound;
  std::size_t unchecked = 0;          // samples whose square function exceeded 1
  std::size_t failures = 0;
  double max_ratio = 0.0;             // ||f - E_0 f||_{exp L^2} / ||S f||_inf
  bool ok() const { return failures == 0 && unchecked == 0 && samples > 0; }

  nlohmann::json to_json() const {
    return {{"id", "cww"},
            {"anchor", "||f - E_0 f||_{exp L^2} <~ ||S f||_inf; |{|f - E_0 f| > l}| <= 2 exp(-l^2/2) when ||S f||_inf <= 1"},
            {"samples", samples},
            {"J", J},
            {"lambdas", lambdas},
            {"worst_measure", worst_measure},
            {"bound", bound},
            {"unchecked", unchecked},
            {"failures", failures},
            {"max_ratio", max_ratio},
            {"ok", ok()}};
  }
};

/// Random +-Haar martingale normalized to ||S f||_inf = 1. Even indices use
/// one weight per level (S constant), odd ones independent magnitudes.
inline DyadicFunction random_haar_martingale(int J, std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(index), 0x4857u};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> G;
  std::vector<std::vector<double>> c(static_cast<std::size_t>(J));
  for (int k = 0; k < J; ++k) {
    const double w = coin(rng) ? U(rng) : 0.0;
    c[static_cast<std::size_t>(k)].resize(std::size_t{1} << k);
    for (auto& v : c[static_cast<std::size_t>(k)]) v = (coin(rng) ? 1.0 : -1.0) * (index % 2 == 0 ? w : U(rng));
  }
  auto f = from_haar(G(rng), c, J);
  const auto S = martingale_square_function(f);
  const double s = *std::max_element(S.samples.begin(), S.samples.end());
  if (s == 0.0) return from_haar(0.0, {{1.0}}, J);
  const double mean = expectation(f, 0).samples[0];
  for (auto& v : f.samples) v = mean + (v - mean) / s;
  return f;
}

inline CwwEnsembleReport verify_cww(std::size_t count, int J, std::uint64_t seed, std::span<const double> lambdas) {
  CwwEnsembleReport rep;
  rep.samples = count;
  rep.J = J;
  rep.lambdas.assign(lambdas.begin(), lambdas.end());
  rep.worst_measure.assign(lambdas.size(), 0.0);
  for (double l : lambdas) rep.bound.push_back(2.0 * std::exp(-0.5 * l * l));
  std::vector<CwwReport> results(count);
  parallel_for(count, [&](std::size_t i) { results[i] = cww_check(random_haar_martingale(J, seed, i), 0.0, lambdas); });
  for (const auto& r : results) {
    if (!r.tail_checked) {
      ++rep.unchecked;
      continue;
    }
    if (!r.tail_ok) ++rep.failures;
    for (std::size_t k = 0; k < r.tails.size(); ++k) rep.worst_measure[k] = std::max(rep.worst_measure[k], r.tails[k].measure);
    rep.max_ratio = std::max(rep.max_ratio, r.ratio);
  }
  return rep;
}

/// Smooth-plus-jumps function on [0, 1): four Gaussians of width
/// 0.01 + 0.1 U with L^1-scaled amplitudes and three jumps.
inline std::function<double(double)> decompose_profile(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(index), 0x5448u};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> G;
  auto p = std::make_shared<std::vector<double>>();
  for (int i = 0; i < 4; ++i) {
    const double c = U(rng), w = 0.01 + 0.1 * U(rng);
    p->insert(p->end(), {c, w, G(rng) / w});
  }
  for (int i = 0; i < 3; ++i) p->insert(p->end(), {U(rng), G(rng)});
  return [p](double x) {
    const auto& q = *p;
    double s = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double t = (x - q[3 * i]) / q[3 * i + 1];
      s += q[3 * i + 2] * std::exp(-t * t);
    }
    for (int i = 0; i < 3; ++i) s += x < q[12 + 2 * i] ? q[13 + 2 * i] : 0.0;
    return s;
  };
}

/// Optimized objective over ||f||_{L log^{(sigma+1)/2} L} on seeded samples,
/// at 2^J and 2^{J+refine} dyadic cells.
inline RatioReport verify_decompose(const ExperimentConfig& cfg, double sigma, std::size_t count) {
  RatioReport rep;
  rep.id = "decompose.sigma" + std::to_string(static_cast<int>(sigma));
  rep.anchor = "min over D_k f_k = D_k f of <(sum_k |f_k|^2)^{1/2}>_{B_{sigma/2}} <~ <|f|>_{B_{(sigma+1)/2}}";
  rep.config = cfg.to_json();
  rep.coarse.J = cfg.J;
  rep.fine.J = cfg.fine_J();
  double residual = 0.0;
  std::size_t above_trivial = 0, unconverged = 0;
  nlohmann::json certs = nlohmann::json::array();
  for (int g = 0; g < 2; ++g) {
    const int J = g == 0 ? cfg.J : cfg.fine_J();
    std::vector<DecompositionCertificate> out(count);
    parallel_for(count, [&](std::size_t i) {
      const auto f = DyadicFunction::sample_midpoints(J, decompose_profile(cfg.seed, i));
      out[i] = decompose_thm_second(f, sigma, cfg.solver).certificate;
    });
    for (std::size_t i = 0; i < count; ++i) {
      const auto& c = out[i];
      residual = std::max(residual, c.max_constraint_residual);
      above_trivial += c.objective > c.trivial_objective;
      unconverged += !c.converged;
      (g == 0 ? rep.coarse : rep.fine).samples.push_back({"seed-" + std::to_string(i), c.objective, c.reference_norm, c.objective / c.reference_norm});
      certs.push_back({{"J", J},
                       {"sample", i},
                       {"objective", c.objective},
                       {"trivial_objective", c.trivial_objective},
                       {"reference_norm", c.reference_norm},
                       {"iterations", c.iterations},
                       {"converged", c.converged},
                       {"max_constraint_residual", c.max_constraint_residual}});
    }
  }
  rep.finalize();
  rep.extra = {{"sigma", sigma},
               {"max_constraint_residual", residual},
               {"above_trivial", above_trivial},
               {"unconverged", unconverged},
               {"certificates", certs}};
  return rep;
}

// ---------------------------------------------------------------------------
// CZ ensemble

struct CzConstant {
  std::string name;
  double coarse = 0.0;
  double fine = 0.0;
  double drift() const { return (coarse > 0 && fine > 0) ? std::max(coarse / fine, fine / coarse) : (coarse == fine ? 1.0 : std::numeric_limits<double>::infinity()); }
};

struct CzEnsembleReport {
  int sigma = 0;
  std::size_t samples = 0;
  int J = 0;
  int fine_J = 0;
  double alpha = 0.0;
  double max_reconstruction = 0.0;
  double max_measure_ratio = 0.0;  // sum |J| / int B_{sigma/2}(|f|/alpha)
  double max_lac_residual = 0.0;
  std::size_t sandwich_failures = 0;
  std::vector<CzConstant> constants;
  double worst_drift = 1.0;

  nlohmann::json to_json() const {
    nlohmann::json c = nlohmann::json::object();
    for (const auto& k : constants) c[k.name] = {{"coarse", k.coarse}, {"fine", k.fine}, {"drift", k.drift()}};
    return {{"id", "czd.sigma" + std::to_string(sigma)},
            {"anchor", "f = g + sum_J b_J + b_lac, sum |J| <= int B_{sigma/2}(|f|/alpha), b_J without lacunary coefficients"},
            {"sigma", sigma},
            {"samples", samples},
            {"J", J},
            {"fine_J", fine_J},
            {"alpha", alpha},
            {"max_reconstruction", max_reconstruction},
            {"max_measure_ratio", max_measure_ratio},
            {"max_lac_residual", max_lac_residual},
            {"sandwich_failures", sandwich_failures},
            {"constants", c},
            {"worst_drift", worst_drift}};
  }
};

/// Rough data on [-1/2, 1/2) inside [-T/2, T/2), decomposed at 2^J and
/// 2^{J + refine} points with alpha = cfg.cz_alpha.
inline CzEnsembleReport verify_cz(const ExperimentConfig& cfg, int sigma, std::size_t count) {
  CzEnsembleReport rep;
  rep.sigma = sigma;
  rep.samples = count;
  rep.J = cfg.J;
  rep.fine_J = cfg.fine_J();
  rep.alpha = cfg.cz_alpha;
  const char* names[] = {"g_sup", "g_l1", "blac_atom", "blac_mass", "atom", "zygmund_bonami"};
  for (const char* n : names) rep.constants.push_back({n});
  for (int g = 0; g < 2; ++g) {
    const int J = g == 0 ? rep.J : rep.fine_J;
    std::vector<CzSummary> sums(count);
    parallel_for(count, [&](std::size_t i) {
      auto rng = seeded(cfg.seed, Family::CzBadPart, i);
      const auto f = sample_on_window(J, cfg.T, rough_profile(rng));
      sums[i] = cz_decompose(f, sigma, cfg.cz_alpha).summary;
    });
    for (const auto& s : sums) {
      rep.max_reconstruction = std::max(rep.max_reconstruction, s.reconstruction_error);
      if (s.orlicz_mass > 0) rep.max_measure_ratio = std::max(rep.max_measure_ratio, s.measure_sum / s.orlicz_mass);
      rep.max_lac_residual = std::max(rep.max_lac_residual, s.max_lac_residual);
      rep.sandwich_failures += s.sandwich_failures;
      const double v[] = {s.g_sup_constant, s.g_l1_constant, s.blac_atom_constant, s.blac_mass_constant, s.max_atom_constant, s.max_zb_constant};
      for (std::size_t k = 0; k < rep.constants.size(); ++k) {
        double& slot = g == 0 ? rep.constants[k].coarse : rep.constants[k].fine;
        slot = std::max(slot, v[k]);
      }
    }
  }
  for (const auto& k : rep.constants) rep.worst_drift = std::max(rep.worst_drift, k.drift());
  return rep;
}

}  // namespace lacuna::harness
