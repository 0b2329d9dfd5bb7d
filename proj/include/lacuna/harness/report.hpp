#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace lacuna::harness {

struct RatioSample {
  std::string label;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double level = std::numeric_limits<double>::quiet_NaN();  // alpha attaining the ratio, if any
};

struct RatioRun {
  int J = 0;
  std::vector<RatioSample> samples;
  std::vector<std::string> skipped;  // labels aborted (aliasing, residuals, degenerate rhs)
  double max = 0.0;
  double median = 0.0;
};

/// Measurements at two grid resolutions. Statistics use only labels that
/// produced a ratio in both runs.
struct RatioReport {
  std::string id;
  std::string anchor;
  nlohmann::json config;
  RatioRun coarse;
  RatioRun fine;
  double drift = std::numeric_limits<double>::quiet_NaN();         // of the max ratio
  double paired_drift = std::numeric_limits<double>::quiet_NaN();  // worst per-sample drift
  std::size_t paired = 0;
  bool finite = false;
  nlohmann::json extra = nlohmann::json::object();

  void finalize() {
    std::map<std::string, double> a, b;
    for (const auto& s : coarse.samples) a[s.label] = s.ratio;
    for (const auto& s : fine.samples) b[s.label] = s.ratio;
    std::vector<double> ra, rb;
    paired_drift = 1.0;
    finite = true;
    for (const auto& [label, r] : a) {
      auto it = b.find(label);
      if (it == b.end()) continue;
      ra.push_back(r);
      rb.push_back(it->second);
      if (!std::isfinite(r) || !std::isfinite(it->second)) finite = false;
      if (r > 0 && it->second > 0) paired_drift = std::max(paired_drift, std::max(r / it->second, it->second / r));
    }
    paired = ra.size();
    if (paired == 0) finite = false;
    auto stats = [](std::vector<double> v, RatioRun& run) {
      if (v.empty()) return;
      std::sort(v.begin(), v.end());
      run.max = v.back();
      const std::size_t n = v.size();
      run.median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    stats(ra, coarse);
    stats(rb, fine);
    drift = (coarse.max > 0 && fine.max > 0) ? std::max(coarse.max / fine.max, fine.max / coarse.max)
                                             : std::numeric_limits<double>::infinity();
    if (!std::isfinite(drift)) finite = false;
  }

  bool stable(double bound = 2.0) const { return finite && drift <= bound; }

  nlohmann::json to_json() const {
    auto run_json = [](const RatioRun& r) {
      nlohmann::json s = nlohmann::json::array();
      for (const auto& x : r.samples) {
        nlohmann::json e{{"label", x.label}, {"lhs", x.lhs}, {"rhs", x.rhs}, {"ratio", x.ratio}};
        if (std::isfinite(x.level)) e["level"] = x.level;
        s.push_back(std::move(e));
      }
      return nlohmann::json{{"J", r.J}, {"samples", s}, {"skipped", r.skipped}, {"max", r.max}, {"median", r.median}};
    };
    return {{"id", id},         {"anchor", anchor}, {"config", config},     {"coarse", run_json(coarse)},
            {"fine", run_json(fine)}, {"drift", drift}, {"paired_drift", paired_drift}, {"paired", paired},
            {"finite", finite}, {"extra", extra}};
  }

  /// One row per sample and resolution.
  void write_csv(std::ostream& os, bool header = true) const {
    if (header) os << "id,J,label,lhs,rhs,ratio,level\n";
    os.precision(17);
    for (const auto* run : {&coarse, &fine})
      for (const auto& s : run->samples)
        os << id << ',' << run->J << ',' << s.label << ',' << s.lhs << ',' << s.rhs << ',' << s.ratio << ','
           << (std::isfinite(s.level) ? s.level : 0.0) << '\n';
  }
};

}  // namespace lacuna::harness
