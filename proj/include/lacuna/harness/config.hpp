#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "lacuna/dyadic.hpp"
#include "lacuna/martingale.hpp"

namespace lacuna::harness {

/// Flat experiment parameters. Every report echoes to_json() verbatim.
struct ExperimentConfig {
  int J = 14;        // grid exponent of the coarse run
  int refine = 2;    // the paired run uses J + refine
  double T = 16.0;   // window length; the grid starts at -T/2
  int tau = 2;
  double sigma = 0.0;
  double gamma = 2.0;
  std::vector<double> sigmas{0.0, 1.0};
  std::vector<double> gammas{2.0, 4.0};
  int levels = 64;   // alpha levels per weak-type ratio
  std::uint64_t seed = 7;
  int K = 6;         // samples per generator family
  DyadicScalar min_scale = DyadicScalar::pow2(-2);
  DyadicScalar max_abs = DyadicScalar::pow2(8);
  bool local_normalized = false;
  double cz_alpha = 1.5;

  int nmin = 4;
  int nmax = 12;
  int grid = 20;
  double sharp_T = 8.0;
  int khintchine = 0;

  SolverConfig solver{};

  std::string output_json;
  std::string output_csv;

  int fine_J() const { return J + refine; }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["J"] = J;
    j["refine"] = refine;
    j["T"] = T;
    j["tau"] = tau;
    j["sigma"] = sigma;
    j["gamma"] = gamma;
    j["sigmas"] = sigmas;
    j["gammas"] = gammas;
    j["levels"] = levels;
    j["seed"] = seed;
    j["K"] = K;
    j["min_scale"] = min_scale.to_string();
    j["max_abs"] = max_abs.to_string();
    j["local_normalized"] = local_normalized;
    j["cz_alpha"] = cz_alpha;
    j["nmin"] = nmin;
    j["nmax"] = nmax;
    j["grid"] = grid;
    j["sharp_T"] = sharp_T;
    j["khintchine"] = khintchine;
    j["solver"] = {{"max_iter", solver.max_iter},
                   {"epsilon_rel", solver.epsilon_rel},
                   {"rel_decrease", solver.rel_decrease},
                   {"window", solver.window},
                   {"initial_step", solver.initial_step}};
    if (!output_json.empty()) j["output_json"] = output_json;
    if (!output_csv.empty()) j["output_csv"] = output_csv;
    return j;
  }
};

}  // namespace lacuna::harness
