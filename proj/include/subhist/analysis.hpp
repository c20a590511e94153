#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "subhist/behavior.hpp"
#include "subhist/common.hpp"
#include "subhist/core.hpp"
#include "subhist/engine.hpp"
#include "subhist/info_graph.hpp"

namespace subhist {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

// Standard error of the sample mean.
inline double se_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1) /
                   static_cast<double>(xs.size()));
}

// --- Gap thresholds ----------------------------------------------------------

// Per-level gap thresholds for an L-level layout: eps_0 = 1,
// eps_1 = 1/(4 sqrt(q1 T1 sigma)) + 1/(4 sqrt(q2 T1 sigma)),
// eps_l = 1/(4 sqrt(T_l sigma)) for l >= 2. q_a are the expected per-path
// pulls of each arm (the first level is made of paths, not plain rounds,
// hence the asymmetric first entry).
struct GapThresholds {
  double delta = 0.0;
  std::vector<double> eps_levels;  // eps_0 .. eps_{L-1}
};

inline GapThresholds compute_gap_thresholds(const BanditInstance& instance,
                                            const LevelSpec& spec,
                                            const std::vector<double>& q_hat) {
  GapThresholds g;
  g.delta = instance.gap();
  g.eps_levels.push_back(1.0);
  if (spec.num_levels >= 2) {
    if (static_cast<int>(q_hat.size()) < 2)
      throw ContractError("gap_thresholds: need q_hat for at least two arms");
    const double T1 = static_cast<double>(spec.group_sizes[0]);
    const double sig = static_cast<double>(spec.sigma);
    double e1 = 0.0;
    for (int a = 0; a < 2; ++a) e1 += 1.0 / (4.0 * std::sqrt(q_hat[a] * T1 * sig));
    g.eps_levels.push_back(e1);
  }
  for (int l = 2; l < spec.num_levels; ++l) {
    const double Tl = static_cast<double>(spec.group_sizes[l - 1]);
    g.eps_levels.push_back(1.0 / (4.0 * std::sqrt(Tl * static_cast<double>(spec.sigma))));
  }
  return g;
}

// --- Full-disclosure-path constants -------------------------------------------

struct FdpEstimate {
  std::vector<double> q_hat;  // expected pulls of each arm per path
  std::vector<double> q_se;
  double p_all_sampled = 0.0;  // probability every arm is sampled at least once
  double p_se = 0.0;
  int trials = 0;
};

// Monte Carlo over independent full-disclosure paths of length path_len.
inline FdpEstimate estimate_fdp_constants(const BanditInstance& instance,
                                          const BehaviorConfig& cfg, Round path_len, int trials,
                                          std::uint64_t base_seed = 1) {
  if (trials < 1) throw ContractError("estimate_fdp_constants: trials must be >= 1");
  const int K = instance.num_arms;
  BanditInstance path_instance(instance.means, path_len, instance.strict_model);
  const InfoGraph path = build_full_disclosure(path_len);
  std::vector<std::vector<double>> pulls(K);
  std::vector<double> all_sampled;
  for (int i = 0; i < trials; ++i) {
    BehaviorConfig trial_cfg = cfg;
    trial_cfg.seed = hash_combine(cfg.seed, static_cast<std::uint64_t>(i));
    SimTrace tr = run(path_instance, path, trial_cfg,
                      hash_combine(base_seed, static_cast<std::uint64_t>(i)));
    bool all = true;
    for (ArmId a = 0; a < K; ++a) {
      pulls[a].push_back(static_cast<double>(tr.pulls_per_arm[a]));
      if (tr.pulls_per_arm[a] == 0) all = false;
    }
    all_sampled.push_back(all ? 1.0 : 0.0);
  }
  FdpEstimate est;
  est.trials = trials;
  for (ArmId a = 0; a < K; ++a) {
    est.q_hat.push_back(mean_of(pulls[a]));
    est.q_se.push_back(se_of(pulls[a]));
  }
  est.p_all_sampled = mean_of(all_sampled);
  est.p_se = std::sqrt(est.p_all_sampled * (1.0 - est.p_all_sampled) /
                       static_cast<double>(trials));
  return est;
}

// --- Event monitors -----------------------------------------------------------

// Empirical frequency of one monitored event; per-trial indicators retained.
struct EventStats {
  std::string event;
  std::int64_t trials = 0;
  std::int64_t holds = 0;
  std::vector<std::uint8_t> indicators;

  void record(bool held) {
    ++trials;
    if (held) ++holds;
    indicators.push_back(held ? 1 : 0);
  }
  double frequency() const {
    return trials == 0 ? 0.0 : static_cast<double>(holds) / static_cast<double>(trials);
  }
  double se() const {
    if (trials == 0) return 0.0;
    const double f = frequency();
    return std::sqrt(f * (1.0 - f) / static_cast<double>(trials));
  }
};

struct PullCountMonitorResult {
  EventStats stats;     // one indicator per (run, first-level group)
  double bound = 0.0;   // path_len * sqrt(T1 * log(2K/delta) / 2)
  double delta = 0.0;
};

// Checks, per run and first-level group, that every arm's pull count stays
// within the stated bound of q_hat * T1. Reports frequencies; never asserts.
inline PullCountMonitorResult pull_count_monitor(const BanditInstance& instance,
                                                 const InfoGraph& graph,
                                                 const BehaviorConfig& cfg,
                                                 const std::vector<double>& q_hat, Round t1_paths,
                                                 Round path_len, double delta, int runs,
                                                 std::uint64_t base_seed,
                                                 double bound_override = 0.0) {
  const int K = instance.num_arms;
  PullCountMonitorResult res;
  res.delta = delta;
  res.bound = bound_override > 0.0
                  ? bound_override
                  : static_cast<double>(path_len) *
                        std::sqrt(static_cast<double>(t1_paths) *
                                  std::log(2.0 * K / delta) / 2.0);
  res.stats.event = "W1";
  // First-level groups keyed by (u, v); each holds its member rounds.
  std::map<std::pair<int, int>, std::vector<RoundInterval>> level1;
  for (const GroupInfo& g : graph.groups())
    if (g.level == 1) level1[{g.u, g.v}].push_back(g.rounds);
  if (level1.empty()) throw ContractError("pull_count_monitor: graph has no first-level groups");

  for (int r = 0; r < runs; ++r) {
    BehaviorConfig run_cfg = cfg;
    run_cfg.seed = hash_combine(cfg.seed, static_cast<std::uint64_t>(r));
    SimTrace tr = run(instance, graph, run_cfg,
                      hash_combine(base_seed, static_cast<std::uint64_t>(r)));
    for (const auto& [key, intervals] : level1) {
      std::vector<std::int64_t> pulls(static_cast<std::size_t>(K), 0);
      for (const RoundInterval& iv : intervals)
        for (Round t = iv.lo; t <= iv.hi; ++t) pulls[tr.outcomes[t - 1].arm] += 1;
      bool held = true;
      for (ArmId a = 0; a < K; ++a) {
        const double expected = q_hat[a] * static_cast<double>(t1_paths);
        if (std::abs(static_cast<double>(pulls[a]) - expected) > res.bound) held = false;
      }
      res.stats.record(held);
    }
  }
  return res;
}

// Segment-mean concentration (W2-style): over random segments [tau1, tau2]
// of a length-T reward tape, the frequency that the segment mean stays
// within sqrt(log_coeff * log(T) / len) of mu. The coefficient defaults to 2
// and is a parameter because different bounds use 2 or 3.
inline EventStats segment_mean_monitor(double mu, Round T, int trials, std::uint64_t seed = 13,
                                       double log_coeff = 2.0) {
  EventStats stats;
  stats.event = "W2";
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t h = hash_combine(seed, static_cast<std::uint64_t>(i));
    Round a = 1 + static_cast<Round>(splitmix64(h ^ 1) % static_cast<std::uint64_t>(T));
    Round b = 1 + static_cast<Round>(splitmix64(h ^ 2) % static_cast<std::uint64_t>(T));
    if (a > b) std::swap(a, b);
    const Round len = b - a + 1;
    Round sum = 0;
    for (Round j = a; j <= b; ++j)
      if (uniform01(hash3(h, 3, static_cast<std::uint64_t>(j))) < mu) ++sum;
    const double dev = std::abs(static_cast<double>(sum) / static_cast<double>(len) - mu);
    const double bound =
        std::sqrt(log_coeff * std::log(static_cast<double>(T)) / static_cast<double>(len));
    stats.record(dev <= bound);
  }
  return stats;
}

// Exact P[S >= k] for S ~ Binomial(n, p), summed from the pmf in log space.
inline double binomial_tail_upper(Round n, double p, Round k) {
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  double total = 0.0;
  for (Round i = k; i <= n; ++i) {
    const double nd = static_cast<double>(n), id = static_cast<double>(i);
    const double logpmf = std::lgamma(nd + 1.0) - std::lgamma(id + 1.0) -
                          std::lgamma(nd - id + 1.0) + id * std::log(p) +
                          (nd - id) * std::log1p(-p);
    total += std::exp(logpmf);
  }
  return total;
}

inline double binomial_tail_lower(Round n, double p, Round k) {
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  return 1.0 - binomial_tail_upper(n, p, k + 1);
}

struct AnticoncentrationResult {
  Round n = 0;
  double mu = 0.0;
  double mc_high = 0.0, mc_low = 0.0;        // Monte Carlo frequencies
  double exact_high = 0.0, exact_low = 0.0;  // binomial tail oracle
  double normal_high = 0.0, normal_low = 0.0;
  double se_high = 0.0, se_low = 0.0;
  int trials = 0;
};

// Frequencies of {mean of n draws >= mu + 1/sqrt(n)} and {<= mu - 1/sqrt(n)},
// with the exact binomial oracle and the normal approximation alongside.
inline AnticoncentrationResult anticoncentration_monitor(double mu, Round n, int trials,
                                                         std::uint64_t seed = 7) {
  if (n < 1) throw ContractError("anticoncentration_monitor: n must be >= 1");
  AnticoncentrationResult res;
  res.n = n;
  res.mu = mu;
  res.trials = trials;
  const double dev = 1.0 / std::sqrt(static_cast<double>(n));
  const double hi_thresh = static_cast<double>(n) * (mu + dev);
  const double lo_thresh = static_cast<double>(n) * (mu - dev);
  const Round k_hi = static_cast<Round>(std::ceil(hi_thresh - 1e-12));
  const Round k_lo = static_cast<Round>(std::floor(lo_thresh + 1e-12));
  std::int64_t highs = 0, lows = 0;
  for (int i = 0; i < trials; ++i) {
    Round s = 0;
    for (Round j = 1; j <= n; ++j) {
      const std::uint64_t bits =
          hash3(seed, static_cast<std::uint64_t>(i) + 1, static_cast<std::uint64_t>(j));
      if (uniform01(bits) < mu) ++s;
    }
    if (s >= k_hi) ++highs;
    if (s <= k_lo) ++lows;
  }
  res.mc_high = static_cast<double>(highs) / trials;
  res.mc_low = static_cast<double>(lows) / trials;
  res.exact_high = binomial_tail_upper(n, mu, k_hi);
  res.exact_low = binomial_tail_lower(n, mu, k_lo);
  const double sd = std::sqrt(mu * (1.0 - mu));
  res.normal_high = 1.0 - normal_cdf(dev * std::sqrt(static_cast<double>(n)) / sd);
  res.normal_low = res.normal_high;
  res.se_high = std::sqrt(res.exact_high * (1.0 - res.exact_high) / trials);
  res.se_low = std::sqrt(res.exact_low * (1.0 - res.exact_low) / trials);
  return res;
}

struct JointDeviationResult {
  double joint = 0.0;         // frequency of (arm a high, arm b low)
  double marginal_high = 0.0;
  double marginal_low = 0.0;
  int trials = 0;
};

// High/low co-deviation across two independent reward streams.
inline JointDeviationResult anticoncentration_joint(double mu_a, double mu_b, Round n, int trials,
                                                    std::uint64_t seed = 11) {
  JointDeviationResult res;
  res.trials = trials;
  const double dev = 1.0 / std::sqrt(static_cast<double>(n));
  const Round k_hi = static_cast<Round>(std::ceil(static_cast<double>(n) * (mu_a + dev) - 1e-12));
  const Round k_lo = static_cast<Round>(std::floor(static_cast<double>(n) * (mu_b - dev) + 1e-12));
  std::int64_t joint = 0, highs = 0, lows = 0;
  for (int i = 0; i < trials; ++i) {
    Round sa = 0, sb = 0;
    for (Round j = 1; j <= n; ++j) {
      if (uniform01(hash3(seed, 2 * static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j))) < mu_a)
        ++sa;
      if (uniform01(hash3(seed, 2 * static_cast<std::uint64_t>(i) + 1, static_cast<std::uint64_t>(j))) < mu_b)
        ++sb;
    }
    const bool high = sa >= k_hi, low = sb <= k_lo;
    if (high) ++highs;
    if (low) ++lows;
    if (high && low) ++joint;
  }
  res.joint = static_cast<double>(joint) / trials;
  res.marginal_high = static_cast<double>(highs) / trials;
  res.marginal_low = static_cast<double>(lows) / trials;
  return res;
}

// --- Regret curves and exponent fits -------------------------------------------

struct CurvePoint {
  Round horizon = 0;
  double mean_regret = 0.0;
  double se = 0.0;
  int reps = 0;
};

struct CurveRow {
  Round horizon = 0;
  std::uint64_t seed = 0;
  double regret = 0.0;
};

struct RegretCurve {
  std::vector<CurvePoint> points;
  std::vector<CurveRow> rows;  // per-seed rows, CSV-ready
};

// Mean regret over a horizon grid; tape seeds are base_seed + rep index, so
// curves computed with the same base seed are paired across policies.
inline RegretCurve regret_curve(const std::function<InfoGraph(Round)>& build_graph,
                                const std::vector<double>& means,
                                const std::vector<Round>& t_grid, const BehaviorConfig& cfg,
                                int reps, std::uint64_t base_seed, int threads = 0,
                                bool strict_model = true) {
  if (!std::is_sorted(t_grid.begin(), t_grid.end()))
    throw ContractError("regret_curve: grid must be sorted");
  RegretCurve curve;
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < reps; ++i) seeds.push_back(base_seed + static_cast<std::uint64_t>(i));
  for (Round T : t_grid) {
    BanditInstance instance(means, T, strict_model);
    InfoGraph graph = build_graph(T);
    BatchOptions opts;
    opts.threads = threads;
    std::vector<TraceSummary> batch = run_batch(instance, graph, cfg, seeds, opts);
    std::vector<double> regrets;
    for (const TraceSummary& s : batch) {
      if (!s.ok()) throw ContractError("regret_curve: run failed: " + s.error);
      curve.rows.push_back({T, s.seed, s.regret});
      regrets.push_back(s.regret);
    }
    curve.points.push_back({T, mean_of(regrets), se_of(regrets), reps});
  }
  return curve;
}

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
  int points_used = 0;
  std::vector<Round> excluded;  // grid points with nonpositive mean regret
};

// OLS of log(mean regret) on log(T). Nonpositive means are excluded and
// flagged.
inline ExponentFit fit_exponent(const std::vector<CurvePoint>& points) {
  ExponentFit fit;
  std::vector<double> xs, ys;
  for (const CurvePoint& p : points) {
    if (p.mean_regret > 0.0) {
      xs.push_back(std::log(static_cast<double>(p.horizon)));
      ys.push_back(std::log(p.mean_regret));
    } else {
      fit.excluded.push_back(p.horizon);
    }
  }
  if (xs.size() < 3) throw ContractError("fit_exponent: need at least 3 usable grid points");
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss += r * r;
  }
  fit.residual_rms = std::sqrt(ss / n);
  fit.points_used = static_cast<int>(xs.size());
  return fit;
}

struct GapPoint {
  double delta = 0.0;
  double mean_regret = 0.0;
  double se = 0.0;
  int reps = 0;
};

struct GapRow {
  double delta = 0.0;
  std::uint64_t seed = 0;
  double regret = 0.0;
};

struct GapSweep {
  std::vector<GapPoint> points;
  std::vector<GapRow> rows;
};

// Mean regret across the gap grid at fixed T with instance means
// (1/2 + delta/2, 1/2 - delta/2); paired tapes across deltas.
inline GapSweep gap_sweep(const std::function<InfoGraph(Round)>& build_graph, Round T,
                          const std::vector<double>& deltas, const BehaviorConfig& cfg, int reps,
                          std::uint64_t base_seed, bool strict_model = true) {
  GapSweep sweep;
  InfoGraph graph = build_graph(T);
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < reps; ++i) seeds.push_back(base_seed + static_cast<std::uint64_t>(i));
  for (double delta : deltas) {
    BanditInstance instance({0.5 + delta / 2.0, 0.5 - delta / 2.0}, T, strict_model);
    std::vector<TraceSummary> batch = run_batch(instance, graph, cfg, seeds);
    std::vector<double> regrets;
    for (const TraceSummary& s : batch) {
      if (!s.ok()) throw ContractError("gap_sweep: run failed: " + s.error);
      sweep.rows.push_back({delta, s.seed, s.regret});
      regrets.push_back(s.regret);
    }
    sweep.points.push_back({delta, mean_of(regrets), se_of(regrets), reps});
  }
  return sweep;
}

}  // namespace subhist
