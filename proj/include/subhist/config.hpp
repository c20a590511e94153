#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "subhist/behavior.hpp"
#include "subhist/common.hpp"
#include "subhist/core.hpp"
#include "subhist/presets.hpp"

namespace subhist {

namespace detail {

inline void expect_object(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

template <typename T>
T get_field(const nlohmann::json& j, const std::string& where, const std::string& name, T fallback,
            bool required = false) {
  if (!j.contains(name)) {
    if (required) throw ConfigError(where + ": missing required field '" + name + "'");
    return fallback;
  }
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + ": field '" + name + "' has the wrong type");
  }
}

}  // namespace detail

// Policy selection as it appears in config files: either an explicit builder
// with parameters or a named preset.
struct PolicyConfig {
  std::string type;  // full_disclosure | two_level | three_level | l_level | preset | preset name
  std::string preset_name;
  Round t1 = 0;
  Round t2 = 0;
  int sigma = 0;
  Round path_len = 0;
  int levels = 0;
  std::vector<Round> group_sizes;
  int gamma_factor = -1;

  static PolicyConfig parse(const nlohmann::json& j) {
    detail::expect_object(j, "policy");
    PolicyConfig p;
    p.type = detail::get_field<std::string>(j, "policy", "type", "", true);
    p.preset_name = detail::get_field<std::string>(j, "policy", "name", "");
    p.t1 = detail::get_field<Round>(j, "policy", "t1", 0);
    p.t2 = detail::get_field<Round>(j, "policy", "t2", 0);
    p.sigma = detail::get_field<int>(j, "policy", "sigma", 0);
    p.path_len = detail::get_field<Round>(j, "policy", "path_len", 0);
    p.levels = detail::get_field<int>(j, "policy", "levels", 0);
    p.group_sizes = detail::get_field<std::vector<Round>>(j, "policy", "group_sizes", {});
    p.gamma_factor = detail::get_field<int>(j, "policy", "gamma_factor", -1);
    if (is_preset_name(p.type)) {
      p.preset_name = p.type;
      p.type = "preset";
    }
    if (p.type != "full_disclosure" && p.type != "two_level" && p.type != "three_level" &&
        p.type != "l_level" && p.type != "preset")
      throw ConfigError("policy: unknown field 'type' value '" + p.type + "'");
    if (p.type == "preset" && !is_preset_name(p.preset_name))
      throw ConfigError("policy: field 'name' must be a known preset name");
    return p;
  }

  // Resolves to concrete build parameters; num_arms/n_est feed the preset
  // path-length rule.
  PolicyParams resolve(Round horizon, int num_arms, int n_est) const {
    if (type == "preset") {
      PresetRequest req;
      req.name = preset_name;
      req.horizon = horizon;
      req.num_arms = num_arms;
      req.n_est = n_est;
      req.sigma = sigma;
      req.levels = levels;
      return make_preset(req);
    }
    PolicyParams p;
    p.path_len = path_len > 0 ? path_len : default_path_len(num_arms, n_est);
    if (type == "full_disclosure") {
      p.type = PolicyType::FullDisclosure;
      p.name = "full_disclosure";
      return p;
    }
    if (type == "two_level") {
      if (t1 < 1) throw ConfigError("policy: two_level requires field 't1' >= 1");
      p.type = PolicyType::TwoLevel;
      p.name = "two_level";
      p.t1 = t1;
      return p;
    }
    if (type == "three_level") {
      if (t1 < 1 || t2 < 1 || sigma < 1)
        throw ConfigError("policy: three_level requires fields 't1', 't2', 'sigma'");
      p.type = PolicyType::ThreeLevel;
      p.name = "three_level";
      p.t1 = t1;
      p.t2 = t2;
      p.sigma = sigma;
      return p;
    }
    // l_level
    if (group_sizes.empty())
      throw ConfigError("policy: l_level requires field 'group_sizes'");
    if (sigma < 1) throw ConfigError("policy: l_level requires field 'sigma' >= 1");
    p.type = PolicyType::LLevel;
    p.name = "l_level";
    p.sigma = sigma;
    p.level_spec.sigma = sigma;
    p.level_spec.num_levels = static_cast<int>(group_sizes.size());
    p.level_spec.group_sizes = group_sizes;
    p.level_spec.path_len = p.path_len;
    p.level_spec.gamma_factor = gamma_factor;
    return p;
  }
};

struct InstanceConfig {
  std::vector<double> means;
  double delta = -1.0;  // alternative to means: (1/2 + d/2, 1/2 - d/2)
  Round horizon = 0;
  bool strict_model = true;

  static InstanceConfig parse(const nlohmann::json& j) {
    detail::expect_object(j, "instance");
    InstanceConfig c;
    c.means = detail::get_field<std::vector<double>>(j, "instance", "means", {});
    c.delta = detail::get_field<double>(j, "instance", "delta", -1.0);
    c.horizon = detail::get_field<Round>(j, "instance", "horizon", 0, true);
    c.strict_model = detail::get_field<bool>(j, "instance", "strict_model", true);
    if (c.means.empty() && c.delta < 0.0)
      throw ConfigError("instance: provide field 'means' or field 'delta'");
    const int num_arms = detail::get_field<int>(j, "instance", "num_arms", 0);
    if (num_arms > 0) {
      const int implied = c.means.empty() ? 2 : static_cast<int>(c.means.size());
      if (num_arms != implied)
        throw ConfigError("instance: field 'num_arms' disagrees with the means");
    }
    return c;
  }

  BanditInstance make(Round horizon_override = 0) const {
    const Round T = horizon_override > 0 ? horizon_override : horizon;
    if (!means.empty()) return BanditInstance(means, T, strict_model);
    return BanditInstance({0.5 + delta / 2.0, 0.5 - delta / 2.0}, T, strict_model);
  }
};

inline BehaviorKind behavior_kind_from_string(const std::string& s) {
  if (s == "empirical_mean") return BehaviorKind::EmpiricalMean;
  if (s == "band_perturbed") return BehaviorKind::BandPerturbed;
  if (s == "optimistic") return BehaviorKind::Optimistic;
  if (s == "pessimistic") return BehaviorKind::Pessimistic;
  if (s == "beta_posterior") return BehaviorKind::BetaPosterior;
  if (s == "adversarial_violator") return BehaviorKind::AdversarialViolator;
  throw ConfigError("behavior: unknown field 'kind' value '" + s + "'");
}

inline BehaviorConfig parse_behavior(const nlohmann::json& j) {
  detail::expect_object(j, "behavior");
  BehaviorConfig cfg;
  cfg.kind = behavior_kind_from_string(
      detail::get_field<std::string>(j, "behavior", "kind", "empirical_mean"));
  cfg.n_est = detail::get_field<int>(j, "behavior", "n_est", 1);
  cfg.c_est = detail::get_field<double>(j, "behavior", "c_est", 1.0 / 16.0);
  cfg.unseen_estimate = detail::get_field<double>(j, "behavior", "unseen_estimate", 1.0);
  cfg.band_fraction = detail::get_field<double>(j, "behavior", "band_fraction", 0.99);
  cfg.projection_mode = detail::get_field<bool>(j, "behavior", "projection_mode", false);
  cfg.seed = detail::get_field<std::uint64_t>(j, "behavior", "seed", 0);
  const std::string below =
      detail::get_field<std::string>(j, "behavior", "below_n_est", "empirical");
  if (below == "empirical")
    cfg.below_n_est = BelowNEst::Empirical;
  else if (below == "unseen")
    cfg.below_n_est = BelowNEst::Unseen;
  else if (below == "band_low")
    cfg.below_n_est = BelowNEst::BandLow;
  else if (below == "band_high")
    cfg.below_n_est = BelowNEst::BandHigh;
  else
    throw ConfigError("behavior: unknown field 'below_n_est' value '" + below + "'");
  if (j.contains("beta_params")) {
    const auto& arr = j.at("beta_params");
    if (!arr.is_array()) throw ConfigError("behavior: field 'beta_params' must be an array");
    for (const auto& e : arr) {
      if (!e.is_array() || e.size() != 2)
        throw ConfigError("behavior: field 'beta_params' entries must be [alpha, beta]");
      cfg.beta_params.push_back({e[0].get<double>(), e[1].get<double>()});
    }
  }
  cfg.validate();
  return cfg;
}

inline nlohmann::json behavior_to_json(const BehaviorConfig& cfg) {
  nlohmann::json j;
  j["kind"] = behavior_kind_name(cfg.kind);
  j["n_est"] = cfg.n_est;
  j["c_est"] = cfg.c_est;
  j["unseen_estimate"] = cfg.unseen_estimate;
  j["band_fraction"] = cfg.band_fraction;
  j["projection_mode"] = cfg.projection_mode;
  j["seed"] = cfg.seed;
  return j;
}

// Top-level experiment description: one or more policies, an instance (or a
// delta family), a behavior model, seeds, outputs, and optional sweep grids.
struct ExperimentConfig {
  std::vector<PolicyConfig> policies;
  InstanceConfig instance;
  BehaviorConfig behavior;
  std::uint64_t seed_base = 1;
  int reps = 1;
  std::string out_dir = "out";
  std::vector<std::string> formats = {"csv", "json"};
  std::vector<Round> t_grid;
  std::vector<double> delta_grid;
  nlohmann::json raw;  // normalized source document (digest input)

  static ExperimentConfig parse(const nlohmann::json& j) {
    detail::expect_object(j, "config");
    ExperimentConfig c;
    if (j.contains("policy") && j.contains("policies"))
      throw ConfigError("config: provide either field 'policy' or field 'policies', not both");
    if (j.contains("policy")) {
      c.policies.push_back(PolicyConfig::parse(j.at("policy")));
    } else if (j.contains("policies")) {
      if (!j.at("policies").is_array() || j.at("policies").empty())
        throw ConfigError("config: field 'policies' must be a non-empty array");
      for (const auto& e : j.at("policies")) c.policies.push_back(PolicyConfig::parse(e));
    } else {
      throw ConfigError("config: missing required field 'policy'");
    }
    if (!j.contains("instance")) throw ConfigError("config: missing required field 'instance'");
    c.instance = InstanceConfig::parse(j.at("instance"));
    c.behavior = j.contains("behavior") ? parse_behavior(j.at("behavior")) : BehaviorConfig{};
    if (j.contains("seeds")) {
      detail::expect_object(j.at("seeds"), "seeds");
      c.seed_base = detail::get_field<std::uint64_t>(j.at("seeds"), "seeds", "base", 1);
      c.reps = detail::get_field<int>(j.at("seeds"), "seeds", "reps", 1);
      if (c.reps < 1) throw ConfigError("seeds: field 'reps' must be >= 1");
    }
    if (j.contains("outputs")) {
      detail::expect_object(j.at("outputs"), "outputs");
      c.out_dir = detail::get_field<std::string>(j.at("outputs"), "outputs", "dir", "out");
      c.formats = detail::get_field<std::vector<std::string>>(j.at("outputs"), "outputs",
                                                              "formats", {"csv", "json"});
    }
    if (j.contains("sweep")) {
      detail::expect_object(j.at("sweep"), "sweep");
      c.t_grid = detail::get_field<std::vector<Round>>(j.at("sweep"), "sweep", "t_grid", {});
      c.delta_grid =
          detail::get_field<std::vector<double>>(j.at("sweep"), "sweep", "delta_grid", {});
    }
    c.raw = j;
    return c;
  }

  static ExperimentConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open file '" + path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config: invalid JSON in '" + path + "': " + e.what());
    }
    return parse(j);
  }

  std::string digest() const { return hex64(fnv1a64(raw.dump())); }
};

}  // namespace subhist
