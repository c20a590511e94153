#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "subhist/common.hpp"
#include "subhist/core.hpp"

namespace subhist {

enum class BehaviorKind {
  EmpiricalMean,
  BandPerturbed,
  Optimistic,
  Pessimistic,
  BetaPosterior,
  AdversarialViolator,
};

inline const char* behavior_kind_name(BehaviorKind k) {
  switch (k) {
    case BehaviorKind::EmpiricalMean: return "empirical_mean";
    case BehaviorKind::BandPerturbed: return "band_perturbed";
    case BehaviorKind::Optimistic: return "optimistic";
    case BehaviorKind::Pessimistic: return "pessimistic";
    case BehaviorKind::BetaPosterior: return "beta_posterior";
    case BehaviorKind::AdversarialViolator: return "adversarial_violator";
  }
  return "?";
}

// What an estimate returns for arms with 1 <= N < n_est, where the model
// makes no assumption.
enum class BelowNEst { Empirical, Unseen, BandLow, BandHigh };

struct BetaParams {
  double alpha = 1.0;
  double beta = 1.0;
};

// Estimate-function family. An agent's estimate function is fixed by
// (config, agent draw); evaluation is pure.
struct BehaviorConfig {
  BehaviorKind kind = BehaviorKind::EmpiricalMean;
  int n_est = 1;
  double c_est = 1.0 / 16.0;
  double unseen_estimate = 1.0;
  double band_fraction = 0.99;       // < 1 keeps the band inequality strict
  bool projection_mode = false;      // clamp estimates to [1/3, 2/3], random ties
  BelowNEst below_n_est = BelowNEst::Empirical;
  std::vector<BetaParams> beta_params;  // per-arm; empty = Beta(1,1) everywhere
  std::uint64_t seed = 0;

  void validate() const {
    if (n_est < 1) throw ConfigError("behavior: n_est must be >= 1");
    if (!(c_est > 0.0 && c_est < 1.0 / 3.0))
      throw ConfigError("behavior: c_est must lie in (0, 1/3)");
    if (!(band_fraction >= 0.0 && band_fraction < 1.0))
      throw ConfigError("behavior: band_fraction must lie in [0, 1)");
    if (!projection_mode && kind != BehaviorKind::AdversarialViolator &&
        !(unseen_estimate >= 1.0 / 3.0 && unseen_estimate <= 1.0))
      throw ConfigError("behavior: unseen_estimate must lie in [1/3, 1]");
    for (const BetaParams& bp : beta_params)
      if (!(bp.alpha > 0.0 && bp.beta > 0.0))
        throw ConfigError("behavior: beta params must be positive");
  }

  BetaParams beta_for(ArmId a) const {
    if (beta_params.empty()) return {};
    if (a < static_cast<ArmId>(beta_params.size())) return beta_params[a];
    return beta_params.back();
  }

  std::uint64_t agent_draw(Round agent) const {
    return hash_combine(seed, static_cast<std::uint64_t>(agent));
  }
};

struct EstimateDiag {
  std::int64_t clamped = 0;  // estimates clipped into [0,1] (or [1/3,2/3])
};

// Reward estimates for all K arms given anonymized per-arm statistics.
// Depends on the subhistory only through (pull count, reward sum) per arm,
// which realizes the anonymity assumption by construction.
inline std::vector<double> estimate(const BehaviorConfig& cfg, std::uint64_t agent_draw,
                                    const ArmStats& stats, EstimateDiag* diag = nullptr) {
  const int K = stats.num_arms();
  std::vector<double> est(static_cast<std::size_t>(K));
  const double lo = cfg.projection_mode ? 1.0 / 3.0 : 0.0;
  const double hi = cfg.projection_mode ? 2.0 / 3.0 : 1.0;
  for (ArmId a = 0; a < K; ++a) {
    const std::int64_t n = stats.pulls[a];
    double v;
    if (cfg.kind == BehaviorKind::BetaPosterior) {
      const BetaParams bp = cfg.beta_for(a);
      v = (static_cast<double>(stats.sums[a]) + bp.alpha) /
          (static_cast<double>(n) + bp.alpha + bp.beta);
    } else if (n == 0) {
      // Deliberately below the 1/3 floor for the violator.
      v = cfg.kind == BehaviorKind::AdversarialViolator ? 0.05 : cfg.unseen_estimate;
    } else {
      const double mu = static_cast<double>(stats.sums[a]) / static_cast<double>(n);
      const double width = cfg.band_fraction * cfg.c_est / std::sqrt(static_cast<double>(n));
      if (cfg.kind == BehaviorKind::AdversarialViolator) {
        v = mu + 2.0 * cfg.c_est / std::sqrt(static_cast<double>(n));
      } else if (n < cfg.n_est) {
        switch (cfg.below_n_est) {
          case BelowNEst::Empirical: v = mu; break;
          case BelowNEst::Unseen: v = cfg.unseen_estimate; break;
          case BelowNEst::BandLow: v = mu - width; break;
          case BelowNEst::BandHigh: v = mu + width; break;
          default: v = mu;
        }
      } else {
        switch (cfg.kind) {
          case BehaviorKind::EmpiricalMean: v = mu; break;
          case BehaviorKind::BandPerturbed:
            v = mu + uniform_pm1(hash_combine(agent_draw, static_cast<std::uint64_t>(a))) * width;
            break;
          case BehaviorKind::Optimistic: v = mu + width; break;
          case BehaviorKind::Pessimistic: v = mu - width; break;
          default: v = mu;
        }
      }
    }
    if (v < lo || v > hi) {
      if (diag) diag->clamped += 1;
      v = std::clamp(v, lo, hi);
    }
    est[a] = v;
  }
  return est;
}

inline std::vector<double> estimate(const BehaviorConfig& cfg, std::uint64_t agent_draw,
                                    const ArmRewardBag& m, int num_arms,
                                    EstimateDiag* diag = nullptr) {
  return estimate(cfg, agent_draw, arm_stats(m, num_arms), diag);
}

// A concrete estimate function f_t: fixed by (config, agent draw).
struct EstimateFunction {
  BehaviorConfig cfg;
  std::uint64_t agent_draw = 0;

  std::vector<double> operator()(const ArmStats& stats) const {
    return estimate(cfg, agent_draw, stats);
  }
  std::vector<double> operator()(const ArmRewardBag& m, int num_arms) const {
    return estimate(cfg, agent_draw, m, num_arms);
  }
};

// Argmax with ties broken toward the lowest index (the same rule for all
// agents).
inline ArmId choose_arm(const std::vector<double>& estimates) {
  if (estimates.empty()) throw ContractError("choose_arm: empty estimate vector");
  ArmId best = 0;
  for (ArmId a = 1; a < static_cast<ArmId>(estimates.size()); ++a)
    if (estimates[a] > estimates[best]) best = a;
  return best;
}

// Argmax with exact ties broken uniformly at random (projection-mode rule);
// `bits` must come from a dedicated stream.
inline ArmId choose_arm_random_tie(const std::vector<double>& estimates, std::uint64_t bits) {
  if (estimates.empty()) throw ContractError("choose_arm: empty estimate vector");
  double best = estimates[0];
  int ties = 1;
  for (std::size_t a = 1; a < estimates.size(); ++a) {
    if (estimates[a] > best) {
      best = estimates[a];
      ties = 1;
    } else if (estimates[a] == best) {
      ++ties;
    }
  }
  int pick = static_cast<int>(bits % static_cast<std::uint64_t>(ties));
  for (std::size_t a = 0; a < estimates.size(); ++a) {
    if (estimates[a] == best && pick-- == 0) return static_cast<ArmId>(a);
  }
  return 0;  // unreachable
}

// --- Assumption compliance -------------------------------------------------

struct ComplianceViolation {
  int case_id = 0;
  ArmId arm = 0;
  std::string type;  // "band" | "unseen_floor" | "anonymity"
  std::int64_t pulls = 0;
  double estimate_value = 0.0;
  double empirical_mean = 0.0;
};

struct ComplianceReport {
  int cases = 0;
  std::int64_t clamp_events = 0;
  std::vector<ComplianceViolation> violations;

  bool compliant() const { return violations.empty(); }
};

// Fuzzes random anonymized subhistories and checks the estimate band, the
// unseen-arm floor, and anonymity under round permutations. Compliant kinds
// must produce no violations; adversarial_violator must produce some.
inline ComplianceReport check_assumption_compliance(const BehaviorConfig& cfg, int fuzz_rounds) {
  cfg.validate();
  ComplianceReport report;
  const std::uint64_t stream = hash_combine(0xf022dULL, cfg.seed);
  for (int c = 0; c < fuzz_rounds; ++c) {
    const std::uint64_t h = hash_combine(stream, static_cast<std::uint64_t>(c));
    const int K = 2 + static_cast<int>(splitmix64(h) % 4);
    ArmStats stats(K);
    for (ArmId a = 0; a < K; ++a) {
      const std::uint64_t ha = hash3(h, 0x11, static_cast<std::uint64_t>(a));
      // Mix small counts (including 0 and the n_est threshold region) with
      // large ones so every regime is exercised.
      std::int64_t n;
      switch (splitmix64(ha) % 4) {
        case 0: n = 0; break;
        case 1: n = static_cast<std::int64_t>(splitmix64(ha ^ 1) % (2 * cfg.n_est + 1)); break;
        case 2: n = cfg.n_est + static_cast<std::int64_t>(splitmix64(ha ^ 2) % 100); break;
        default: n = cfg.n_est + static_cast<std::int64_t>(splitmix64(ha ^ 3) % 10000);
      }
      const std::int64_t sum = n == 0 ? 0 : static_cast<std::int64_t>(splitmix64(ha ^ 5) % (n + 1));
      stats.pulls[a] = n;
      stats.sums[a] = sum;
    }
    EstimateDiag diag;
    const std::uint64_t draw = cfg.agent_draw(static_cast<Round>(c + 1));
    const std::vector<double> est = estimate(cfg, draw, stats, &diag);
    report.clamp_events += diag.clamped;
    for (ArmId a = 0; a < K; ++a) {
      const std::int64_t n = stats.pulls[a];
      if (n == 0) {
        if (est[a] < 1.0 / 3.0)
          report.violations.push_back(
              {c, a, "unseen_floor", n, est[a], 0.0});
      } else if (n >= cfg.n_est && !cfg.projection_mode) {
        const double mu = static_cast<double>(stats.sums[a]) / static_cast<double>(n);
        const double band = cfg.c_est / std::sqrt(static_cast<double>(n));
        if (!(std::abs(est[a] - mu) < band))
          report.violations.push_back({c, a, "band", n, est[a], mu});
      }
    }
    // Anonymity: the same multiset presented through differently-ordered
    // subhistories must give identical estimates.
    if (c % 16 == 0) {
      std::vector<Outcome> fwd, rev;
      Round t = 1;
      for (ArmId a = 0; a < K; ++a) {
        const std::int64_t n = std::min<std::int64_t>(stats.pulls[a], 50);
        const std::int64_t ones = std::min(stats.sums[a], n);
        for (std::int64_t i = 0; i < n; ++i)
          fwd.push_back({t++, a, i < ones ? 1 : 0});
      }
      rev = fwd;
      std::reverse(rev.begin(), rev.end());
      for (std::size_t i = 0; i < rev.size(); ++i) rev[i].round = static_cast<Round>(i + 1);
      const auto e1 = estimate(cfg, draw, anonymize(Subhistory(fwd)), K);
      const auto e2 = estimate(cfg, draw, anonymize(Subhistory(rev)), K);
      if (e1 != e2)
        report.violations.push_back({c, 0, "anonymity", 0, 0.0, 0.0});
    }
    ++report.cases;
  }
  return report;
}

// --- Beta posterior helpers --------------------------------------------------

inline std::vector<double> beta_posterior_means(const std::vector<BetaParams>& params,
                                                const ArmStats& stats) {
  std::vector<double> out(static_cast<std::size_t>(stats.num_arms()));
  for (ArmId a = 0; a < stats.num_arms(); ++a) {
    const BetaParams bp = a < static_cast<ArmId>(params.size()) ? params[a] : BetaParams{};
    out[a] = (static_cast<double>(stats.sums[a]) + bp.alpha) /
             (static_cast<double>(stats.pulls[a]) + bp.alpha + bp.beta);
  }
  return out;
}

// Posterior means computed by sequential conjugate updates in history order.
inline std::vector<double> beta_posterior_means_sequential(const std::vector<BetaParams>& params,
                                                           const Subhistory& h, int num_arms) {
  std::vector<double> alpha(static_cast<std::size_t>(num_arms)),
      beta(static_cast<std::size_t>(num_arms));
  for (ArmId a = 0; a < num_arms; ++a) {
    const BetaParams bp = a < static_cast<ArmId>(params.size()) ? params[a] : BetaParams{};
    alpha[a] = bp.alpha;
    beta[a] = bp.beta;
  }
  for (const Outcome& o : h.entries()) {
    if (o.arm < 0 || o.arm >= num_arms)
      throw std::out_of_range("posterior: arm index >= K");
    if (o.reward)
      alpha[o.arm] += 1.0;
    else
      beta[o.arm] += 1.0;
  }
  std::vector<double> out(static_cast<std::size_t>(num_arms));
  for (ArmId a = 0; a < num_arms; ++a) out[a] = alpha[a] / (alpha[a] + beta[a]);
  return out;
}

// True iff the posterior means of two subhistories with identical per-arm
// (count, sum) agree exactly arm-wise; the precondition models the same
// samples arriving under adaptive vs fixed pull orders.
inline bool posterior_adaptive_invariance(const std::vector<BetaParams>& params,
                                          const Subhistory& h1, const Subhistory& h2,
                                          int num_arms) {
  const ArmStats s1 = arm_stats(h1, num_arms);
  const ArmStats s2 = arm_stats(h2, num_arms);
  if (s1 != s2)
    throw ContractError("posterior_adaptive_invariance: per-arm (count, sum) must match");
  return beta_posterior_means_sequential(params, h1, num_arms) ==
         beta_posterior_means_sequential(params, h2, num_arms);
}

}  // namespace subhist
