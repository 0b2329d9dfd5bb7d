// lacuna: command line front end for the library and the experiment harness.
// Reports go to stdout as JSON (CSV for sharpness) and to --json/--csv files.
// Exit status: 0 ok, 1 an invariant failed, 2 usage or input error.

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lacuna/lacuna.hpp"

using namespace lacuna;
namespace h = lacuna::harness;
using nlohmann::json;

namespace {

struct Options {
  h::ExperimentConfig cfg;
  std::string min_scale = "1/4";
  std::string max_abs = "256";
  bool quiet = false;
  std::string gnuplot;

  // signal input
  std::string input;
  double offset = std::numeric_limits<double>::quiet_NaN();
  std::string family = "bumps";
  std::size_t index = 0;
  std::string output;

  // lacunary / project / sqfn
  int order = 2;
  bool intervals = false;
  std::string left, right;
  std::string mode = "sharp";

  // czd
  double alpha = 1.0;
  bool no_margin = false;

  // cww / decompose
  std::size_t count = 100;
  std::vector<double> lambdas{1.0, 2.0, 3.0};

  // verify
  std::string experiment;
  std::string source;
  bool strict = false;

  // multiplier
  std::string multiplier;
};

class InvariantFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  os << text;
}

void emit(const Options& o, const json& j) {
  const std::string text = j.dump(2) + "\n";
  if (!o.cfg.output_json.empty()) write_text(o.cfg.output_json, text);
  if (!o.quiet) std::cout << text;
}

h::Family parse_family(const std::string& s) {
  for (h::Family f : h::kAllFamilies)
    if (s == h::family_name(f)) return f;
  throw Error("unknown family '" + s + "' (bumps, lacpoly, czbad)");
}

Signal load_signal(const Options& o) {
  if (o.input.empty()) {
    // A seeded ensemble sample on the configured grid.
    const auto spec = h::endpoint_spec(o.cfg, o.cfg.tau);
    return h::make_sample(parse_family(o.family), spec, o.cfg.seed, o.index).sample(o.cfg.J, o.cfg.T);
  }
  std::ifstream is(o.input, std::ios::binary);
  if (!is) throw Error("cannot open " + o.input);
  Signal f = read_signal(is);
  f.offset = std::isnan(o.offset) ? -f.period / 2 : o.offset;
  return f;
}

void save_signal(const std::string& path, const Signal& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path);
  write_signal(os, f);
}

ProjectionMode parse_mode(const std::string& m) {
  if (m == "sharp") return ProjectionMode::Sharp;
  if (m == "smooth") return ProjectionMode::Smooth;
  throw Error("mode must be sharp or smooth");
}

json signal_stats(const Signal& f) {
  return {{"J", f.log2_size()}, {"T", f.period}, {"offset", f.offset}, {"l1", f.l1_norm()}, {"l2", f.l2_norm()}, {"sup", f.sup_norm()}};
}

// ---------------------------------------------------------------------------

int run_lacunary(const Options& o) {
  const auto ms = o.cfg.min_scale, ma = o.cfg.max_abs;
  json j{{"order", o.order}, {"min_scale", ms.to_string()}, {"max_abs", ma.to_string()}};
  std::size_t violations = 0;
  if (o.intervals) {
    json arr = json::array();
    const auto all = lambda_tau(o.order, ms, ma);
    for (std::size_t i = 0; i < all.size(); ++i) {
      const auto& L = all[i];
      json e{{"left", L.left.to_string()}, {"right", L.right.to_string()}, {"anchor", L.anchor.to_string()}};
      if (L.parent) e["parent"] = {L.parent->left.to_string(), L.parent->right.to_string()};
      arr.push_back(std::move(e));
      if (i + 1 < all.size() && all[i + 1].left < L.right) ++violations;
      if (L.parent && (distance_to_complement(L.interval(), *L.parent) != L.length() || !L.parent->contains(L.interval())))
        ++violations;
    }
    j["intervals"] = arr;
    j["violations"] = violations;
  } else {
    json arr = json::array();
    for (const auto& x : lac_tau(o.order, ms, ma).points) arr.push_back(x.to_string());
    j["points"] = arr;
  }
  emit(o, j);
  if (violations) throw InvariantFailure("Whitney invariants violated");
  return 0;
}

int run_project(const Options& o) {
  const Signal f = load_signal(o);
  if (o.left.empty() || o.right.empty()) throw Error("project needs --left and --right");
  const Interval I{DyadicScalar::parse(o.left), DyadicScalar::parse(o.right)};
  const auto L = find_in_lambda(I, o.order);
  if (!L) throw Error(I.to_string() + " is not in Lambda_" + std::to_string(o.order));
  AliasingFlag flag;
  const Signal P = parse_mode(o.mode) == ProjectionMode::Sharp ? project_sharp(f, *L, &flag) : project_smooth(f, *L, {}, &flag);
  if (!o.output.empty()) save_signal(o.output, P);
  emit(o, {{"interval", {L->left.to_string(), L->right.to_string()}},
           {"order", o.order},
           {"mode", o.mode},
           {"aliased", flag.aliased},
           {"input", signal_stats(f)},
           {"projection", signal_stats(P)}});
  return 0;
}

int run_sqfn(const Options& o) {
  const Signal f = load_signal(o);
  AliasingFlag flag;
  const Signal S = lp_square_function(f, o.order, parse_mode(o.mode), o.cfg.min_scale, o.cfg.max_abs, &flag);
  if (!o.output.empty()) save_signal(o.output, S);
  if (!o.cfg.output_csv.empty()) {
    std::ofstream os(o.cfg.output_csv);
    write_profile_csv(os, S, "square_function");
  }
  if (!o.gnuplot.empty()) {
    std::ofstream os(o.gnuplot);
    os.precision(17);
    os << "# x S(x) |f(x)|\n";
    for (std::size_t i = 0; i < S.size(); ++i) os << S.x(i) << ' ' << S.samples[i].real() << ' ' << std::abs(f.samples[i]) << '\n';
  }
  const auto mags = S.magnitudes();
  emit(o, {{"order", o.order},
           {"mode", o.mode},
           {"aliased", flag.aliased},
           {"input", signal_stats(f)},
           {"l2", S.l2_norm()},
           {"weak_l1", weak_l1_norm(mags, S.dx())}});
  return 0;
}

int run_orlicz(const Options& o) {
  const Signal f = load_signal(o);
  const auto a = f.magnitudes();
  const double s = o.cfg.sigma;
  emit(o, {{"sigma", s},
           {"input", signal_stats(f)},
           {"luxemburg_avg", luxemburg_avg(a, s)},
           {"llogl_equivalent", llogl_avg_equiv(a, s)},
           {"exp_norm", exp_norm(a, s)}});
  return 0;
}

int run_czd(const Options& o) {
  const Signal f = load_signal(o);
  CzConfig cz;
  cz.enforce_margin = !o.no_margin;
  const auto d = cz_decompose(f, static_cast<int>(o.cfg.sigma), o.alpha, cz);
  if (!o.output.empty()) {
    save_signal(o.output + ".g.bin", d.g);
    save_signal(o.output + ".blac.bin", d.b_lac);
  }
  json j = to_json(d);
  j["config"] = o.cfg.to_json();
  emit(o, j);
  const auto& s = d.summary;
  if (s.reconstruction_error > 1e-10) throw InvariantFailure("reconstruction error above 1e-10");
  if (s.measure_sum > s.orlicz_mass * (1 + 1e-3)) throw InvariantFailure("stopping measure exceeds the Orlicz mass");
  if (s.max_lac_residual > 1e-9) throw InvariantFailure("lacunary coefficients of an atom above 1e-9");
  return 0;
}

int run_cww(const Options& o) {
  const auto r = h::verify_cww(o.count, o.cfg.J, o.cfg.seed, o.lambdas);
  json j = r.to_json();
  j["config"] = o.cfg.to_json();
  emit(o, j);
  if (!r.ok()) throw InvariantFailure("tail bound failed");
  return 0;
}

int run_decompose(const Options& o) {
  const auto r = h::verify_decompose(o.cfg, o.cfg.sigma, o.count);
  emit(o, r.to_json());
  if (!o.cfg.output_csv.empty()) {
    std::ofstream os(o.cfg.output_csv);
    r.write_csv(os);
  }
  if (r.extra["above_trivial"].get<std::size_t>() > 0) throw InvariantFailure("optimizer ended above the trivial objective");
  if (r.extra["max_constraint_residual"].get<double>() > 1e-10) throw InvariantFailure("martingale constraints violated");
  return 0;
}

std::vector<h::RatioReport> verify_reports(const Options& o) {
  const auto& cfg = o.cfg;
  auto source = [&](h::Source dflt) {
    if (o.source.empty()) return dflt;
    const auto s = h::parse_source(o.source);
    if (!s) throw Error("unknown source '" + o.source + "'");
    return *s;
  };
  if (o.experiment == "zygmund-bonami") return {h::verify_zygmund_bonami(cfg)};
  if (o.experiment == "gen-zygmund-bonami") return h::verify_gen_zygmund_bonami(cfg);
  if (o.experiment == "endpoint") {
    const auto s = source(h::Source::Prototype);
    if (h::is_smooth_source(s)) throw Error("smooth sources belong to 'verify hormander'");
    return {h::verify_endpoint(cfg, s)};
  }
  if (o.experiment == "hormander") {
    const auto s = source(h::Source::Hormander);
    if (!h::is_smooth_source(s)) throw Error("'verify hormander' takes hormander, smooth-square or mihlin");
    return {h::verify_hormander(cfg, s)};
  }
  throw Error("unknown experiment " + o.experiment);
}

int run_verify(const Options& o) {
  if (o.experiment == "cz") {
    const auto r = h::verify_cz(o.cfg, static_cast<int>(o.cfg.sigma), o.count);
    json j = r.to_json();
    j["config"] = o.cfg.to_json();
    emit(o, j);
    if (r.max_reconstruction > 1e-10 || r.max_measure_ratio > 1 + 1e-3 || r.max_lac_residual > 1e-9)
      throw InvariantFailure("decomposition invariants failed");
    if (o.strict && r.worst_drift > 2.0) throw InvariantFailure("constant drift above 2");
    return 0;
  }
  const auto reports = verify_reports(o);
  json j = json::array();
  for (const auto& r : reports) j.push_back(r.to_json());
  emit(o, reports.size() == 1 ? j[0] : j);
  if (!o.cfg.output_csv.empty()) {
    std::ofstream os(o.cfg.output_csv);
    for (std::size_t i = 0; i < reports.size(); ++i) reports[i].write_csv(os, i == 0);
  }
  for (const auto& r : reports) {
    if (!r.finite)
      throw InvariantFailure(r.id + ": non-finite or unpaired ratios (" + std::to_string(r.coarse.skipped.size() + r.fine.skipped.size()) +
                             " samples skipped, e.g. for aliasing)");
    if (o.strict && !r.stable()) throw InvariantFailure(r.id + ": refinement drift above 2");
  }
  return 0;
}

int run_sharpness(const Options& o) {
  h::SharpnessOptions so;
  for (int N = o.cfg.nmin; N <= o.cfg.nmax; ++N) so.Ns.push_back(N);
  so.J = o.cfg.grid;
  so.T = o.cfg.sharp_T;
  so.levels = o.cfg.levels;
  so.khintchine = o.cfg.khintchine;
  so.seed = o.cfg.seed;
  const auto r = h::sharpness_growth(so);
  for (int N : r.skipped) std::cerr << "sharpness: N = " << N << " skipped, needs 2^(N+2) <= Nyquist (max N = " << r.max_feasible << ")\n";
  std::ostringstream csv;
  r.write_csv(csv);
  if (!o.quiet) std::cout << csv.str();
  if (!o.cfg.output_csv.empty()) write_text(o.cfg.output_csv, csv.str());
  if (!o.cfg.output_json.empty()) {
    json j = r.to_json();
    j["config"] = o.cfg.to_json();
    write_text(o.cfg.output_json, j.dump(2) + "\n");
  }
  if (!o.gnuplot.empty()) {
    std::ofstream os(o.gnuplot);
    os.precision(17);
    os << "# N L(N) c_N\n";
    for (const auto& p : r.points) os << p.N << ' ' << p.weak_norm << ' ' << (std::isfinite(p.c) ? p.c : 0.0) << '\n';
  }
  return 0;
}

json load_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path);
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw Error(path + ": " + e.what());
  }
}

int run_multiplier_validate(const Options& o) {
  const auto m = step_multiplier_from_json(load_json(o.multiplier));
  const auto v = m.validate();
  emit(o, {{"ok", v.ok}, {"pieces", m.pieces.size()}, {"max_overlap", v.max_overlap}, {"max_budget", v.max_budget}, {"violations", v.violations}});
  if (!v.ok) throw InvariantFailure("step multiplier is not admissible");
  return 0;
}

int run_multiplier_apply(const Options& o) {
  const auto m = step_multiplier_from_json(load_json(o.multiplier));
  const auto v = m.validate();
  if (!v.ok) throw InvariantFailure("step multiplier is not admissible: " + v.violations.front());
  const Signal f = load_signal(o);
  AliasingFlag flag;
  const Signal out = apply_multiplier(f, m, &flag);
  if (!o.output.empty()) save_signal(o.output, out);
  emit(o, {{"aliased", flag.aliased}, {"input", signal_stats(f)}, {"output", signal_stats(out)}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  auto& cfg = o.cfg;
  CLI::App app{"Lacunary Littlewood-Paley and Orlicz endpoint experiments"};
  app.set_config("--config", "", "Flat key = value file; keys are the long option names");
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--J", cfg.J, "Grid exponent (2^J points)")->capture_default_str();
  app.add_option("--refine", cfg.refine, "Paired run uses J + refine")->capture_default_str();
  app.add_option("--T", cfg.T, "Window length")->capture_default_str();
  app.add_option("--tau", cfg.tau, "Lacunary order")->capture_default_str();
  app.add_option("--sigma", cfg.sigma, "Orlicz parameter")->capture_default_str();
  app.add_option("--gamma", cfg.gamma, "Dilation of the window")->capture_default_str();
  app.add_option("--sigmas", cfg.sigmas, "Orlicz parameters for gen-zygmund-bonami")->capture_default_str();
  app.add_option("--gammas", cfg.gammas, "Dilations for gen-zygmund-bonami")->capture_default_str();
  app.add_option("--levels", cfg.levels, "Alpha levels per weak-type ratio")->capture_default_str();
  app.add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
  app.add_option("--K", cfg.K, "Samples per generator family")->capture_default_str();
  app.add_option("--min-scale", o.min_scale, "Smallest interval length (dyadic, e.g. 1/4)")->capture_default_str();
  app.add_option("--max-abs", o.max_abs, "Frequency truncation (dyadic)")->capture_default_str();
  app.add_flag("--local-normalized", cfg.local_normalized, "Local-average right-hand side");
  app.add_option("--cz-alpha", cfg.cz_alpha, "Level for the CZ ensemble")->capture_default_str();
  app.add_option("--nmin", cfg.nmin, "Smallest sharpness N")->capture_default_str();
  app.add_option("--nmax", cfg.nmax, "Largest sharpness N")->capture_default_str();
  app.add_option("--grid", cfg.grid, "Sharpness grid exponent")->capture_default_str();
  app.add_option("--sharp-T", cfg.sharp_T, "Sharpness window length")->capture_default_str();
  app.add_option("--khintchine", cfg.khintchine, "Sign draws per N (0 disables)")->capture_default_str();
  app.add_option("--max-iter", cfg.solver.max_iter, "Optimizer iteration cap")->capture_default_str();
  app.add_option("--json", cfg.output_json, "Write the JSON report here");
  app.add_option("--csv", cfg.output_csv, "Write the CSV rows here");
  app.add_option("--gnuplot", o.gnuplot, "Write whitespace-separated columns here (sqfn, sharpness)");
  app.add_flag("-q,--quiet", o.quiet, "Do not print the report");

  auto signal_opts = [&](CLI::App* sub) {
    sub->add_option("--input", o.input, "Binary signal file; default is a seeded ensemble sample");
    sub->add_option("--offset", o.offset, "Grid start of the input (default -T/2)");
    sub->add_option("--family", o.family, "Ensemble family when no input is given")->check(CLI::IsMember({"bumps", "lacpoly", "czbad"}));
    sub->add_option("--index", o.index, "Ensemble index when no input is given");
  };

  auto* lac = app.add_subcommand("lacunary", "lac_tau points or Lambda_tau intervals");
  lac->add_option("--order", o.order)->capture_default_str();
  lac->add_flag("--intervals", o.intervals, "List Lambda_tau instead of lac_tau");

  auto* proj = app.add_subcommand("project", "Frequency projection onto one Lambda_tau interval");
  signal_opts(proj);
  proj->add_option("--order", o.order)->capture_default_str();
  proj->add_option("--left", o.left)->required();
  proj->add_option("--right", o.right)->required();
  proj->add_option("--mode", o.mode)->check(CLI::IsMember({"sharp", "smooth"}))->capture_default_str();
  proj->add_option("--output", o.output, "Binary output signal");

  auto* sq = app.add_subcommand("sqfn", "Littlewood-Paley square function of order tau");
  signal_opts(sq);
  sq->add_option("--order", o.order)->capture_default_str();
  sq->add_option("--mode", o.mode)->check(CLI::IsMember({"sharp", "smooth"}))->capture_default_str();
  sq->add_option("--output", o.output, "Binary output signal");

  auto* orl = app.add_subcommand("orlicz", "Luxemburg averages of |f| over the window");
  signal_opts(orl);

  auto* czd = app.add_subcommand("czd", "Orlicz Calderon-Zygmund decomposition");
  signal_opts(czd);
  czd->add_option("--alpha", o.alpha)->capture_default_str();
  czd->add_flag("--no-margin", o.no_margin, "Do not require the support margin");
  czd->add_option("--output", o.output, "Prefix for g and b_lac binary dumps");

  auto* cww = app.add_subcommand("cww", "Square-function tail bound on random Haar martingales");
  cww->add_option("--count", o.count)->capture_default_str();
  cww->add_option("--lambda", o.lambdas)->capture_default_str();

  auto* dec = app.add_subcommand("decompose", "Martingale-difference optimizer on the seeded ensemble");
  dec->add_option("--count", o.count)->capture_default_str();

  auto* ver = app.add_subcommand("verify", "Inequality ratio experiment at J and J + refine");
  ver->add_option("experiment", o.experiment)
      ->required()
      ->check(CLI::IsMember({"zygmund-bonami", "gen-zygmund-bonami", "endpoint", "hormander", "cz"}));
  ver->add_option("--source", o.source, "identity, prototype, step, lp-square, hormander, smooth-square, mihlin");
  ver->add_option("--count", o.count, "Samples for 'cz'")->capture_default_str();
  ver->add_flag("--strict", o.strict, "Also fail on refinement drift above 2");

  app.add_subcommand("sharpness", "Weak-norm growth along the sharpness family");

  auto* mul = app.add_subcommand("multiplier", "Step multiplier files");
  mul->require_subcommand(1);
  auto* mval = mul->add_subcommand("validate", "Check overlap and coefficient budget");
  mval->add_option("--input", o.multiplier, "Step multiplier JSON")->required();
  auto* mapp = mul->add_subcommand("apply", "Apply to a signal");
  mapp->add_option("--multiplier", o.multiplier, "Step multiplier JSON")->required();
  signal_opts(mapp);
  mapp->add_option("--output", o.output, "Binary output signal");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    cfg.min_scale = DyadicScalar::parse(o.min_scale);
    cfg.max_abs = DyadicScalar::parse(o.max_abs);
    std::map<CLI::App*, int (*)(const Options&)> table{
        {lac, run_lacunary}, {proj, run_project}, {sq, run_sqfn},   {orl, run_orlicz}, {czd, run_czd},
        {cww, run_cww},      {dec, run_decompose}, {ver, run_verify}, {mval, run_multiplier_validate},
        {mapp, run_multiplier_apply}};
    table[app.get_subcommand("sharpness")] = run_sharpness;
    for (auto* sub : app.get_subcommands()) {
      auto* leaf = sub == mul ? mul->get_subcommands().front() : sub;
      return table.at(leaf)(o);
    }
  } catch (const InvariantFailure& e) {
    std::cerr << "invariant failed: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
