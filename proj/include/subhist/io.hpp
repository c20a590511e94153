#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "subhist/analysis.hpp"
#include "subhist/common.hpp"
#include "subhist/engine.hpp"

namespace subhist {

// {"policy","T","seed","regret","pulls","herded"} plus provenance. Tapes are
// never serialized; (seed, instance_digest) identify them.
inline nlohmann::json trace_summary_json(const TraceSummary& s, const std::string& config_digest,
                                         const std::string& instance_digest = "") {
  nlohmann::json j;
  j["policy"] = s.policy;
  j["T"] = s.horizon;
  j["seed"] = s.seed;
  j["regret"] = s.regret;
  j["pulls"] = s.pulls;
  j["herded"] = s.herded;
  if (!s.error.empty()) j["error"] = s.error;
  j["config_digest"] = config_digest;
  if (!instance_digest.empty()) j["instance_digest"] = instance_digest;
  j["tool_version"] = kToolVersion;
  return j;
}

struct CsvRow {
  std::string policy;
  Round horizon = 0;
  double delta = 0.0;
  std::uint64_t seed = 0;
  double regret = 0.0;
  std::optional<double> diff_vs_baseline;
};

// Fixed header "policy,T,delta,seed,regret"; '.' decimal, LF endings, no
// locale dependence. The diff column appears only for paired-tape outputs.
inline std::string to_csv(const std::vector<CsvRow>& rows, bool with_diff = false) {
  std::string out = "policy,T,delta,seed,regret";
  if (with_diff) out += ",diff_vs_baseline";
  out += "\n";
  for (const CsvRow& r : rows) {
    out += r.policy + "," + std::to_string(r.horizon) + "," + format_double(r.delta) + "," +
           std::to_string(r.seed) + "," + format_double(r.regret);
    if (with_diff)
      out += "," + (r.diff_vs_baseline ? format_double(*r.diff_vs_baseline) : std::string());
    out += "\n";
  }
  return out;
}

inline nlohmann::json exponent_fit_json(const ExponentFit& fit) {
  nlohmann::json j;
  j["slope"] = fit.slope;
  j["intercept"] = fit.intercept;
  j["residual_rms"] = fit.residual_rms;
  j["points_used"] = fit.points_used;
  j["excluded"] = fit.excluded;
  return j;
}

inline nlohmann::json curve_points_json(const std::vector<CurvePoint>& points) {
  nlohmann::json arr = nlohmann::json::array();
  for (const CurvePoint& p : points) {
    nlohmann::json j;
    j["T"] = p.horizon;
    j["mean_regret"] = p.mean_regret;
    j["se"] = p.se;
    j["reps"] = p.reps;
    arr.push_back(j);
  }
  return arr;
}

}  // namespace subhist
