#pragma once

#include <json.hpp>

#include <string>

#include "lacuna/multipliers.hpp"

// {"pieces": [{"lo", "hi", "re", "im", "assigned_L": [l, r]}], "overlap_bound": N, "order": tau}
// Endpoints are numbers (converted exactly) or dyadic strings such as "5/4".

namespace lacuna {

namespace detail {

inline DyadicScalar dyadic_from_json(const nlohmann::json& j, const std::string& what) {
  if (j.is_string()) return DyadicScalar::parse(j.get<std::string>());
  require(j.is_number(), "step multiplier JSON: " + what + " must be a number or dyadic string");
  return DyadicScalar::from_double(j.get<double>());
}

inline nlohmann::json dyadic_to_json(const DyadicScalar& x) {
  // Integers and short fractions survive as numbers; keep strings for exactness.
  return x.to_string();
}

}  // namespace detail

inline StepMultiplier step_multiplier_from_json(const nlohmann::json& j) {
  require(j.is_object() && j.contains("pieces") && j.at("pieces").is_array(), "step multiplier JSON: missing 'pieces' array");
  require(j.contains("overlap_bound"), "step multiplier JSON: missing 'overlap_bound'");
  StepMultiplier m;
  m.overlap_bound = j.at("overlap_bound").get<int>();
  if (j.contains("order")) m.order = j.at("order").get<int>();
  for (const auto& p : j.at("pieces")) {
    require(p.contains("lo") && p.contains("hi") && p.contains("assigned_L"), "step multiplier JSON: piece needs lo, hi, assigned_L");
    const auto& L = p.at("assigned_L");
    require(L.is_array() && L.size() == 2, "step multiplier JSON: assigned_L must be [left, right]");
    m.pieces.push_back({detail::dyadic_from_json(p.at("lo"), "lo"), detail::dyadic_from_json(p.at("hi"), "hi"),
                        cplx(p.value("re", 0.0), p.value("im", 0.0)),
                        Interval{detail::dyadic_from_json(L[0], "assigned_L"), detail::dyadic_from_json(L[1], "assigned_L")}});
  }
  return m;
}

inline nlohmann::json to_json(const StepMultiplier& m) {
  nlohmann::json pieces = nlohmann::json::array();
  for (const auto& p : m.pieces) {
    pieces.push_back({{"lo", detail::dyadic_to_json(p.lo)},
                      {"hi", detail::dyadic_to_json(p.hi)},
                      {"re", p.coeff.real()},
                      {"im", p.coeff.imag()},
                      {"assigned_L", {detail::dyadic_to_json(p.assigned.left), detail::dyadic_to_json(p.assigned.right)}}});
  }
  nlohmann::json out{{"pieces", pieces}, {"overlap_bound", m.overlap_bound}};
  if (m.order) out["order"] = *m.order;
  return out;
}

}  // namespace lacuna
