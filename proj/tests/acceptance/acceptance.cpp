// Acceptance run: one [PASS]/[FAIL] line per criterion, nonzero exit on any
// failure. An optional argument names a JSON file for the collected details.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lacuna/lacuna.hpp"

using namespace lacuna;
namespace h = lacuna::harness;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  json data = json::object();
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

DyadicScalar d(std::int64_t m, std::int32_t e = 0) { return DyadicScalar(m, e); }

// ---------------------------------------------------------------------------
// Oracles

// Signed sums +-2^{n_1} +- ... +- 2^{n_tau}, n_1 > ... > n_tau >= lo, modulus
// <= 2^hi, in units of 2^lo.
std::set<std::int64_t> signed_sums(int tau, int lo, int hi) {
  std::set<std::int64_t> out;
  std::vector<int> exps;
  auto rec = [&](auto&& self, int next_max) -> void {
    if (static_cast<int>(exps.size()) == tau) {
      for (int s = 0; s < (1 << tau); ++s) {
        std::int64_t v = 0;
        for (int i = 0; i < tau; ++i) v += ((s >> i) & 1 ? -1 : 1) * (std::int64_t{1} << (exps[i] - lo));
        if (std::llabs(v) <= (std::int64_t{1} << (hi - lo))) out.insert(v);
      }
      return;
    }
    for (int n = next_max; n >= lo; --n) {
      exps.push_back(n);
      self(self, n - 1);
      exps.pop_back();
    }
  };
  rec(rec, hi + tau);
  return out;
}

std::set<std::int64_t> in_units(const LacPointSet& S, int lo) {
  std::set<std::int64_t> out;
  for (const auto& x : S.points) {
    const DyadicScalar u = x.scaled(-lo);
    if (u.exponent() < 0) return {};
    out.insert(u.mantissa() << u.exponent());
  }
  return out;
}

// Maximal dyadic [l, l + len) in [a, b) with dist to the complement = len,
// scanned over every dyadic subinterval in units of the minimal scale.
std::vector<std::pair<std::int64_t, std::int64_t>> whitney_scan(std::int64_t a, std::int64_t b) {
  std::vector<std::pair<std::int64_t, std::int64_t>> cands, out;
  for (std::int64_t len = 1; len <= b - a; len *= 2)
    for (std::int64_t l = (a / len) * len; l + len <= b; l += len)
      if (l >= a && std::min(l - a, b - (l + len)) == len) cands.emplace_back(l, l + len);
  for (auto c : cands) {
    bool maximal = true;
    for (auto o : cands)
      if (o != c && o.first <= c.first && c.second <= o.second) maximal = false;
    if (maximal) out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::int64_t units(const DyadicScalar& x, const DyadicScalar& unit) {
  const DyadicScalar q = x.scaled(-unit.log2());
  return q.mantissa() << q.exponent();
}

double blog(double t, double s) { return t * std::pow(std::log(std::numbers::e + t), s); }

double unit_level_bisection(double s) {
  double lo = 1e-3, hi = 10.0;
  for (int i = 0; i < 300; ++i) {
    const double mid = 0.5 * (lo + hi);
    (blog(mid, s) > 1.0 ? hi : lo) = mid;
  }
  return lo;
}

Signal band_signal(std::mt19937_64& rng, int J, double T, const std::vector<LacInterval>& windows) {
  std::normal_distribution<double> g;
  Spectrum S = transform(Signal::zeros(J, T));
  for (std::size_t k = 0; k < S.size(); ++k)
    for (const auto& L : windows)
      if (S.frequency(k) >= L.left.to_double() && S.frequency(k) < L.right.to_double()) S.coeffs[k] = cplx(g(rng), g(rng));
  return inverse(S);
}

// ---------------------------------------------------------------------------
// Criteria

Outcome lac_enumeration() {
  Outcome o;
  o.pass = true;
  std::size_t points = 0;
  for (int tau = 1; tau <= 3; ++tau) {
    const auto S = lac_tau(tau, DyadicScalar::pow2(-6), DyadicScalar::pow2(6));
    const auto want = signed_sums(tau, -6, 6);
    const bool eq = in_units(S, -6) == want && S.points.size() == want.size();
    o.pass = o.pass && eq;
    points += want.size();
    o.data["tau" + std::to_string(tau)] = {{"points", want.size()}, {"equal", eq}};
  }
  o.detail = fmt("tau 1..3, exponents [-6,6], %zu points", points);
  return o;
}

Outcome whitney_invariants() {
  Outcome o;
  std::size_t checked = 0, bad = 0;
  for (const DyadicScalar ms : {d(1), d(1, -2)}) {
    for (int tau = 1; tau <= 4; ++tau) {
      const auto all = lambda_tau(tau, ms, d(1, 10));
      for (std::size_t i = 0; i + 1 < all.size(); ++i) bad += !(all[i].right <= all[i + 1].left);
      for (const auto& L : all) {
        ++checked;
        bad += !L.interval().is_dyadic() || L.order != tau || abs(L.left) > d(1, 10) || abs(L.right) > d(1, 10);
        if (tau == 1) continue;
        if (!L.parent) {
          ++bad;
          continue;
        }
        bad += !L.parent->contains(L.interval());
        bad += distance_to_complement(L.interval(), *L.parent) != L.length();
        bad += !(L.anchor == L.parent->left || L.anchor == L.parent->right);
        bad += distance(L.interval(), L.anchor) != L.length();
        const auto found = find_in_lambda(L.interval(), tau);
        bad += !found || !(*found == L);
      }
      // Children of every parent against the exhaustive scan.
      if (tau >= 2) {
        for (const auto& P : lambda_tau(tau - 1, ms, d(1, 10))) {
          std::vector<std::pair<std::int64_t, std::int64_t>> got;
          for (const auto& K : children(P, ms)) got.emplace_back(units(K.left, ms), units(K.right, ms));
          bad += got != whitney_scan(units(P.left, ms), units(P.right, ms));
        }
      }
    }
  }
  o.pass = bad == 0 && checked > 0;
  o.detail = fmt("tau 1..4, |xi| <= 2^10, %zu intervals, %zu violations", checked, bad);
  o.data = {{"intervals", checked}, {"violations", bad}};
  return o;
}

Outcome dilation() {
  Outcome o;
  std::size_t bad = 0, cases = 0;
  for (int tau = 1; tau <= 3; ++tau)
    for (int k = -4; k <= 4; ++k) {
      const DyadicScalar a = DyadicScalar::pow2(k);
      ++cases;
      // a^{-1} lac_tau^a = lac_tau^1, checked on the point sets and on Lambda_tau.
      bad += dilate_set(lac_tau(tau, a, a.scaled(8)), a) != lac_tau(tau, d(1), d(1, 8));
      bad += in_units(lac_tau(tau, a, a.scaled(8)), k) != signed_sums(tau, k, k + 8);
      const auto base = lambda_tau(tau, d(1), d(1, 8));
      const auto scaled = lambda_tau(tau, a, a.scaled(8));
      if (base.size() != scaled.size()) {
        ++bad;
        continue;
      }
      for (std::size_t i = 0; i < base.size(); ++i) bad += !(dilate(base[i], a) == scaled[i]);
    }
  o.pass = bad == 0;
  o.detail = fmt("a in 2^{-4..4}, tau 1..3, %zu cases, %zu mismatches", cases, bad);
  o.data = {{"cases", cases}, {"mismatches", bad}};
  return o;
}

Outcome spectral_identities() {
  Outcome o;
  const int J = 14;
  const double T = 16.0;
  std::mt19937_64 rng(2024);
  double parseval = 0.0;
  for (int tau : {1, 2, 3}) {
    const auto fam = lambda_tau(tau, d(1, -2), d(1, 8));
    for (int rep = 0; rep < 3; ++rep) {
      const auto f = band_signal(rng, J, T, fam);
      double sum = 0.0;
      for (const auto& L : fam) sum += std::pow(project_sharp(f, L).l2_norm(), 2);
      parseval = std::max(parseval, std::abs(sum / std::pow(f.l2_norm(), 2) - 1.0));
    }
  }
  h::ExperimentConfig cfg;
  cfg.J = J;
  cfg.T = T;
  cfg.K = 2;
  double modulate = 0.0;
  std::size_t pairs = 0;
  for (const auto& tf : h::endpoint_ensemble(cfg)) {
    const auto f = tf.sample(J, T);
    const double ny = f.nyquist();
    for (int tau : {1, 2, 3})
      for (const auto& L : lambda_tau(tau, d(1, -2), d(1, 8))) {
        const double c = L.center().to_double(), hw = 0.625 * L.length().to_double();
        if (c - hw < -ny || c + hw > ny) continue;
        const auto b = project_smooth(f, L);
        const double nb = b.l2_norm();
        if (nb == 0.0) continue;
        modulate = std::max(modulate, (modulate_project(f, L) - b).l2_norm() / nb);
        ++pairs;
      }
  }
  o.pass = parseval <= 1e-10 && modulate <= 1e-9 && pairs > 0;
  o.detail = fmt("Parseval rel err %.2e (<= 1e-10), modulate vs smooth %.2e over %zu projections (<= 1e-9)", parseval, modulate, pairs);
  o.data = {{"parseval", parseval}, {"modulate", modulate}, {"pairs", pairs}};
  return o;
}

Outcome orlicz_checks() {
  Outcome o;
  std::mt19937_64 rng(99);
  std::lognormal_distribution<double> dist(0.0, 1.5);
  std::vector<double> v(4096);
  for (auto& x : v) x = dist(rng);
  double s = 0.0;
  for (double x : v) s += x;
  const bool mean_exact = luxemburg_avg(v, 0.0) == s / static_cast<double>(v.size());

  double homog = 0.0;
  for (double sigma : {0.0, 0.5, 1.0, 1.5, 2.0}) {
    const double base = luxemburg_avg(v, sigma);
    for (double c : {1e-3, 0.37, 5.0, 1e4}) {
      std::vector<double> w(v);
      for (auto& x : w) x *= c;
      homog = std::max(homog, std::abs(luxemburg_avg(w, sigma) / (c * base) - 1.0));
    }
  }

  double constant = 0.0;
  for (double sigma : {0.5, 1.0, 1.5, 2.0}) {
    const std::vector<double> ones(64, 1.0);
    constant = std::max(constant, std::abs(luxemburg_avg(ones, sigma) - 1.0 / unit_level_bisection(sigma)));
  }

  std::vector<double> grid;
  for (int i = 0; i < 50; ++i) grid.push_back(std::pow(10.0, -4.0 + 8.0 * i / 49.0));
  bool submult = true;
  json sub = json::object();
  for (double sigma : {0.5, 1.0, 1.5}) {
    double direct = 0.0;
    for (double a : grid)
      for (double b : grid) direct = std::max(direct, blog(a * b, sigma) / (blog(a, sigma) * blog(b, sigma)));
    const double lib = submultiplicativity_ratio(sigma, grid, grid);
    const bool ok = lib <= std::pow(2.0, sigma) && std::abs(lib - direct) <= 1e-12 * direct;
    submult = submult && ok;
    sub[fmt("%.1f", sigma)] = {{"ratio", lib}, {"direct", direct}, {"bound", std::pow(2.0, sigma)}};
  }
  o.pass = mean_exact && homog <= 1e-9 && constant <= 1e-8 && submult;
  o.detail = fmt("mean exact %s, homogeneity %.1e, constant vs bisection %.1e, submultiplicative %s", mean_exact ? "yes" : "no", homog,
                 constant, submult ? "yes" : "no");
  o.data = {{"mean_exact", mean_exact}, {"homogeneity", homog}, {"constant", constant}, {"submultiplicativity", sub}};
  return o;
}

Outcome cz(double& seconds_limit) {
  seconds_limit = 120.0;
  Outcome o;
  h::ExperimentConfig cfg;
  cfg.J = 16;
  cfg.seed = 7;
  o.pass = true;
  std::string parts;
  for (int sigma : {0, 1, 2}) {
    const auto r = h::verify_cz(cfg, sigma, 100);
    const bool ok = r.max_reconstruction <= 1e-10 && r.max_measure_ratio <= 1.0 + 1e-3 && r.max_lac_residual <= 1e-9 && r.worst_drift <= 2.0;
    o.pass = o.pass && ok;
    o.data["sigma" + std::to_string(sigma)] = r.to_json();
    parts += fmt(" s%d: rec %.1e meas %.4f lac %.1e drift %.3f;", sigma, r.max_reconstruction, r.max_measure_ratio, r.max_lac_residual,
                 r.worst_drift);
  }
  o.detail = "100 samples, J=16/18," + parts;
  return o;
}

Outcome cww() {
  Outcome o;
  const double lambdas[] = {1.0, 2.0, 3.0};
  const auto r = h::verify_cww(1000, 12, 7, lambdas);
  o.pass = r.ok();
  o.detail = fmt("1000 martingales J=12, worst tails %.4f/%.4f/%.4f vs %.4f/%.4f/%.4f, unchecked %zu", r.worst_measure[0], r.worst_measure[1],
                 r.worst_measure[2], r.bound[0], r.bound[1], r.bound[2], r.unchecked);
  o.data = r.to_json();
  return o;
}

Outcome decompose(double& seconds_limit) {
  seconds_limit = 300.0;
  Outcome o;
  h::ExperimentConfig cfg;
  cfg.J = 10;
  cfg.refine = 2;
  cfg.seed = 7;
  o.pass = true;
  std::string parts;
  for (double sigma : {0.0, 1.0}) {
    const auto r = h::verify_decompose(cfg, sigma, 4);
    const double residual = r.extra["max_constraint_residual"];
    const std::size_t above = r.extra["above_trivial"];
    const bool ok = r.finite && r.paired_drift <= 1.2 && above == 0 && residual <= 1e-12;
    o.pass = o.pass && ok;
    auto j = r.to_json();
    j["extra"].erase("certificates");
    o.data[r.id] = j;
    parts += fmt(" s%g: drift %.3f above %zu res %.1e;", sigma, r.paired_drift, above, residual);
  }
  o.detail = "4 samples, J=10/12," + parts;
  return o;
}

void summarize(const h::RatioReport& r, Outcome& o, std::string& worst_id, double& worst, double bound = 2.0) {
  const bool ok = r.stable(bound);
  o.pass = o.pass && ok;
  if (!(r.drift <= worst)) {
    worst = r.drift;
    worst_id = r.id;
  }
  auto j = r.to_json();
  j.erase("coarse");
  j.erase("fine");
  j["coarse_max"] = r.coarse.max;
  j["fine_max"] = r.fine.max;
  j["skipped"] = r.coarse.skipped.size() + r.fine.skipped.size();
  o.data[r.id] = j;
}

Outcome zygmund_bonami() {
  Outcome o;
  o.pass = true;
  h::ExperimentConfig cfg;
  std::string worst_id;
  double worst = 0.0;
  std::size_t reports = 0;
  for (int tau : {1, 2}) {
    cfg.tau = tau;
    summarize(h::verify_zygmund_bonami(cfg), o, worst_id, worst);
    ++reports;
    for (const auto& r : h::verify_gen_zygmund_bonami(cfg)) {
      summarize(r, o, worst_id, worst);
      ++reports;
    }
  }
  o.detail = fmt("%zu reports, tau 1..2, sigma 0..1, gamma 2,4; worst drift %.4f (%s)", reports, worst, worst_id.c_str());
  return o;
}

Outcome endpoint() {
  Outcome o;
  o.pass = true;
  h::ExperimentConfig cfg;
  cfg.tau = 2;
  std::string worst_id;
  double worst = 0.0;
  summarize(h::verify_endpoint(cfg, h::Source::Prototype), o, worst_id, worst);
  summarize(h::verify_endpoint(cfg, h::Source::Step), o, worst_id, worst);
  summarize(h::verify_hormander(cfg, h::Source::Hormander), o, worst_id, worst);

  // Control: exponent tau/2 - 1/2 against the sharpness family.
  h::SharpnessOptions so;
  so.Ns = {2, 4, 8, 12, 16};
  so.J = 22;
  so.pointwise = false;
  so.control_exponents = {0.5};
  const auto s = h::sharpness_growth(so);
  const double growth = s.control_growth.empty() ? 0.0 : s.control_growth[0];
  const bool grows = s.skipped.empty() && growth >= 3.0;
  o.pass = o.pass && grows;
  o.data["control"] = s.to_json();
  o.detail = fmt("prototype/step/H_2 on 3 families, worst drift %.4f (%s); control growth x%.2f over N=2..16", worst, worst_id.c_str(), growth);
  return o;
}

Outcome sharpness(double& seconds_limit) {
  seconds_limit = 600.0;
  Outcome o;
  h::SharpnessOptions so;
  for (int N = 4; N <= 12; ++N) so.Ns.push_back(N);
  so.J = 20;
  const auto s = h::sharpness_growth(so);
  const double ratio = s.c_max / s.c_min;
  const bool slope_ok = s.skipped.empty() && s.slope >= 0.8;
  // One c for every N: positive everywhere, within a factor 2 across N, and
  // not decaying at any fixed sample point.
  const bool c_ok = s.c_min > 0 && ratio <= 2.0 && s.c_fixed_x_ratio >= 0.95;
  o.pass = slope_ok && c_ok;
  o.detail = fmt("slope %.3f (>= 0.8), c in [%.4f, %.4f] ratio %.2f, fixed-x ratio %.3f, llogl/N <= %.3f", s.slope, s.c_min, s.c_max, ratio,
                 s.c_fixed_x_ratio, s.llogl_constant);
  o.data = s.to_json();
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    const char* name;
    std::function<Outcome(double&)> run;
  };
  auto plain = [](Outcome (*f)(), double limit = 0.0) {
    return [f, limit](double& l) {
      l = limit;
      return f();
    };
  };
  const std::vector<Criterion> criteria = {
      {"lacunary-enumeration", plain(lac_enumeration, 5.0)},
      {"whitney-invariants", plain(whitney_invariants)},
      {"dilation", plain(dilation)},
      {"spectral-identities", plain(spectral_identities)},
      {"orlicz", plain(orlicz_checks)},
      {"cz-decomposition", cz},
      {"chang-wilson-wolff", plain(cww)},
      {"martingale-optimizer", decompose},
      {"zygmund-bonami", plain(zygmund_bonami)},
      {"endpoint", plain(endpoint)},
      {"sharpness-growth", sharpness},
  };

  json summary = json::array();
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    double limit = 0.0;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = c.run(limit);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit > 0 && secs > limit) {
      o.pass = false;
      o.detail += fmt(" [over time limit %.0f s]", limit);
    }
    failed += !o.pass;
    std::printf("[%s] %2zu %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    summary.push_back({{"criterion", i + 1}, {"name", c.name}, {"pass", o.pass}, {"seconds", secs}, {"detail", o.detail}, {"data", o.data}});
  }
  if (argc > 1) std::ofstream(argv[1]) << summary.dump(2) << '\n';
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
