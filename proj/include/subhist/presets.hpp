#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "subhist/common.hpp"
#include "subhist/info_graph.hpp"

namespace subhist {

enum class PolicyType { FullDisclosure, TwoLevel, ThreeLevel, LLevel };

inline const char* policy_type_name(PolicyType t) {
  switch (t) {
    case PolicyType::FullDisclosure: return "full_disclosure";
    case PolicyType::TwoLevel: return "two_level";
    case PolicyType::ThreeLevel: return "three_level";
    case PolicyType::LLevel: return "l_level";
  }
  return "?";
}

// Resolved construction parameters for one policy at one horizon.
struct PolicyParams {
  PolicyType type = PolicyType::FullDisclosure;
  std::string name = "full_disclosure";
  Round t1 = 0;
  Round t2 = 0;
  int sigma = 0;
  Round path_len = 0;
  LevelSpec level_spec;  // LLevel only

  InfoGraph build(Round T) const {
    switch (type) {
      case PolicyType::FullDisclosure: return build_full_disclosure(T);
      case PolicyType::TwoLevel: return build_two_level(T, t1, path_len);
      case PolicyType::ThreeLevel: return build_three_level(T, t1, t2, sigma, path_len);
      case PolicyType::LLevel: return build_l_level(level_spec, T);
    }
    throw ConfigError("unknown policy type");
  }
};

// Path length that guarantees each arm is sampled at least once with constant
// probability when all realized rewards are zero.
inline Round default_path_len(int num_arms, int n_est) {
  return static_cast<Round>(num_arms - 1) * n_est + 1;
}

struct PresetRequest {
  std::string name;
  Round horizon = 0;
  int num_arms = 2;
  int n_est = 1;
  int sigma = 0;   // 0 = preset default
  int levels = 0;  // 0 = preset default (thm) / auto (cor)
};

namespace detail {

// ceil(T^exponent * ln(T)^log_exp)
inline Round ceil_pow(double T, double exponent, double log_exp) {
  const double v = std::pow(T, exponent) * std::pow(std::log(T), log_exp);
  return static_cast<Round>(std::ceil(v));
}

}  // namespace detail

// Named parameter presets. Exponents follow the policy analyses; constants
// are desk-scale (natural log throughout, sigma as a free knob).
inline PolicyParams make_preset(const PresetRequest& req) {
  const Round T = req.horizon;
  if (T < 2) throw ConfigError("preset: horizon must be >= 2");
  const double Td = static_cast<double>(T);
  const Round path_len = default_path_len(req.num_arms, req.n_est);
  PolicyParams p;
  p.name = req.name;
  p.path_len = path_len;

  if (req.name == "paper-2level") {
    // T1 = ceil(T^{2/3} ln(T)^{1/3}) paths.
    p.type = PolicyType::TwoLevel;
    p.t1 = detail::ceil_pow(Td, 2.0 / 3.0, 1.0 / 3.0);
    if (p.t1 * path_len > T)
      throw ConfigError("preset paper-2level: horizon too small for T1*path_len");
    return p;
  }

  if (req.name == "paper-3level") {
    p.type = PolicyType::ThreeLevel;
    p.sigma = req.sigma > 0 ? req.sigma : 4;
    p.t1 = detail::ceil_pow(Td, 4.0 / 7.0, -1.0 / 7.0);
    p.t2 = detail::ceil_pow(Td, 6.0 / 7.0, -5.0 / 7.0);
    if (p.sigma * (p.t1 * path_len + p.t2) > T)
      throw ConfigError("preset paper-3level: horizon too small for sigma*(T1*path_len+T2)");
    return p;
  }

  if (req.name == "paper-Llevel-thm") {
    // T_l = T^{(2^{L-1}+...+2^{L-l})/(2^L-1)} / sigma^3 for l < L; the top
    // level absorbs the remainder.
    p.type = PolicyType::LLevel;
    const int sig = req.sigma > 0 ? req.sigma : 4;
    const int L = req.levels > 0 ? req.levels : 3;
    if (L < 2) throw ConfigError("preset paper-Llevel-thm: levels must be >= 2");
    LevelSpec spec;
    spec.sigma = sig;
    spec.num_levels = L;
    spec.path_len = path_len;
    const double denom = std::pow(2.0, L) - 1.0;
    const Round s2 = static_cast<Round>(sig) * sig;
    const Round s3 = s2 * sig;
    double num = 0.0;
    Round allocated = 0;
    for (int l = 1; l < L; ++l) {
      num += std::pow(2.0, L - l);
      const double e = num / denom;
      Round Tl = std::max<Round>(1, static_cast<Round>(std::floor(std::pow(Td, e) / (sig * sig * sig))));
      spec.group_sizes.push_back(Tl);
      allocated += l == 1 ? s2 * Tl * path_len : s3 * Tl;
    }
    const Round top = (T - allocated) / s3;
    if (top < 1) throw ConfigError("preset paper-Llevel-thm: horizon too small for top level");
    spec.group_sizes.push_back(top);
    p.level_spec = spec;
    p.sigma = sig;
    return p;
  }

  if (req.name == "paper-Llevel-cor") {
    // Geometric schedule T_l = (sigma^4)^l for the structured levels; the
    // number of levels grows with T (the largest L whose allocation fits),
    // and the top level absorbs the remainder.
    p.type = PolicyType::LLevel;
    const int sig = req.sigma > 0 ? req.sigma : 2;
    const Round s2 = static_cast<Round>(sig) * sig;
    const Round s3 = s2 * sig;
    const Round ratio = s2 * s2;  // sigma^4
    std::vector<Round> sizes;
    Round allocated = 0;
    Round Tl = ratio;
    while (true) {
      const Round cost = sizes.empty() ? s2 * Tl * path_len : s3 * Tl;
      if (allocated + cost + s3 > T) break;  // keep room for a top level
      if (req.levels > 0 && static_cast<int>(sizes.size()) + 1 >= req.levels) break;
      sizes.push_back(Tl);
      allocated += cost;
      if (Tl > T / ratio) break;  // next level cannot fit anyway
      Tl *= ratio;
    }
    if (sizes.empty())
      throw ConfigError("preset paper-Llevel-cor: horizon too small for the first level");
    sizes.push_back(std::max<Round>(1, (T - allocated) / s3));
    LevelSpec spec;
    spec.sigma = sig;
    spec.num_levels = static_cast<int>(sizes.size());
    spec.path_len = path_len;
    spec.group_sizes = sizes;
    if (spec.num_levels < 2)
      throw ConfigError("preset paper-Llevel-cor: horizon too small for two levels");
    p.level_spec = spec;
    p.sigma = sig;
    return p;
  }

  throw ConfigError("unknown preset name: " + req.name);
}

inline bool is_preset_name(const std::string& name) {
  return name == "paper-2level" || name == "paper-3level" || name == "paper-Llevel-thm" ||
         name == "paper-Llevel-cor";
}

}  // namespace subhist
