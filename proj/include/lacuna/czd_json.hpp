#pragma once

#include <json.hpp>

#include "lacuna/czd.hpp"

// Intervals as dyadic strings, per-atom diagnostics and the summary. The
// signals themselves (g, b_lac, atoms) go through write_signal.

namespace lacuna {

inline nlohmann::json to_json(const CzSummary& s) {
  return {{"reconstruction_error", s.reconstruction_error},
          {"measure_sum", s.measure_sum},
          {"orlicz_mass", s.orlicz_mass},
          {"g_sup_constant", s.g_sup_constant},
          {"g_l1_constant", s.g_l1_constant},
          {"blac_atom_constant", s.blac_atom_constant},
          {"blac_mass_constant", s.blac_mass_constant},
          {"max_atom_constant", s.max_atom_constant},
          {"max_zb_constant", s.max_zb_constant},
          {"max_lac_residual", s.max_lac_residual},
          {"sandwich_failures", s.sandwich_failures},
          {"support_diameter", s.support_diameter},
          {"margin", s.margin},
          {"margin_ok", s.margin_ok}};
}

inline nlohmann::json to_json(const CzDecomposition& d) {
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& a : d.atoms) {
    const auto& g = a.diag;
    atoms.push_back({{"interval", {a.J.left.to_string(), a.J.right.to_string()}},
                     {"first", a.first},
                     {"cells", a.b.size()},
                     {"orlicz_avg_f", g.orlicz_avg_f},
                     {"orlicz_avg_b", g.orlicz_avg_b},
                     {"atom_constant", g.atom_constant},
                     {"lac_l2_avg", g.lac_l2_avg},
                     {"zb_constant", g.zb_constant},
                     {"max_residual", g.max_residual},
                     {"nudft_residual", g.nudft_residual},
                     {"frequencies", g.frequencies},
                     {"nyquist_merged", g.nyquist_merged}});
  }
  nlohmann::json stopping = nlohmann::json::array();
  for (const auto& I : d.stopping) stopping.push_back({I.left.to_string(), I.right.to_string()});
  return {{"sigma", d.sigma}, {"alpha", d.alpha}, {"stopping", stopping}, {"atoms", atoms}, {"summary", to_json(d.summary)}};
}

}  // namespace lacuna
