#pragma once

// Independent reference implementations used as test oracles. These rebuild
// structures directly from their definitions and share no logic with the
// library code they check.

#include <map>
#include <set>
#include <vector>

#include "subhist/behavior.hpp"
#include "subhist/core.hpp"
#include "subhist/info_graph.hpp"

namespace subhist::testing {

using RoundSet = std::set<Round>;

inline std::vector<RoundSet> dense_full_disclosure(Round T) {
  std::vector<RoundSet> sets(static_cast<std::size_t>(T));
  for (Round t = 1; t <= T; ++t)
    for (Round s = 1; s < t; ++s) sets[t - 1].insert(s);
  return sets;
}

inline std::vector<RoundSet> dense_two_level(Round T, Round T1, Round path_len) {
  std::vector<RoundSet> sets(static_cast<std::size_t>(T));
  const Round n = T1 * path_len;
  for (Round p = 0; p < T1; ++p) {
    const Round start = p * path_len + 1;
    for (Round t = start; t < start + path_len; ++t)
      for (Round s = start; s < t; ++s) sets[t - 1].insert(s);
  }
  for (Round t = n + 1; t <= T; ++t)
    for (Round s = 1; s <= n; ++s) sets[t - 1].insert(s);
  return sets;
}

inline std::vector<RoundSet> dense_three_level(Round T, Round T1, Round T2, int sigma,
                                               Round path_len) {
  std::vector<RoundSet> sets(static_cast<std::size_t>(T));
  const Round level1 = sigma * T1 * path_len;
  const Round group_span = T1 * path_len;
  for (Round p = 0; p < sigma * T1; ++p) {
    const Round start = p * path_len + 1;
    for (Round t = start; t < start + path_len; ++t)
      for (Round s = start; s < t; ++s) sets[t - 1].insert(s);
  }
  for (int g = 0; g < sigma; ++g) {
    const Round start = level1 + g * T2 + 1;
    for (Round t = start; t < start + T2; ++t)
      for (Round s = g * group_span + 1; s <= (g + 1) * group_span; ++s) sets[t - 1].insert(s);
  }
  const Round level12 = level1 + sigma * T2;
  for (Round t = level12 + 1; t <= T; ++t)
    for (Round s = 1; s <= level12; ++s) sets[t - 1].insert(s);
  return sets;
}

// Direct construction of the L-level layout: every member round of every
// group is enumerated and the observed set is assembled from the definition
// (levels 1..l-2 in full, G_{l-1,v,*}, Gamma hidden from the next level).
inline std::vector<RoundSet> dense_l_level(const LevelSpec& spec, Round T) {
  struct Block {
    int level;
    int u, v;
    bool gamma;
    Round lo, hi;
  };
  std::vector<Block> blocks;
  const int sig = spec.sigma;
  const int gamma = spec.effective_gamma();
  Round next = 1;
  std::vector<std::vector<Round>> paths;  // chains: start rounds
  for (int u = 1; u <= sig; ++u)
    for (int v = 1; v <= sig; ++v)
      for (Round p = 0; p < spec.group_sizes[0]; ++p) {
        blocks.push_back({1, u, v, false, next, next + spec.path_len - 1});
        next += spec.path_len;
      }
  for (int l = 2; l <= spec.num_levels; ++l) {
    const Round Tl = spec.group_sizes[l - 1];
    for (int u = 1; u <= sig; ++u)
      for (int v = 1; v <= sig; ++v) {
        blocks.push_back({l, u, v, false, next, next + Tl - 1});
        next += Tl;
      }
    if (gamma > 0)
      for (int u = 1; u <= sig; ++u)
        for (int v = 1; v <= sig; ++v) {
          blocks.push_back({l, u, v, true, next, next + Tl * gamma - 1});
          next += Tl * gamma;
        }
  }
  const Round structured_end = next - 1;

  std::vector<RoundSet> sets(static_cast<std::size_t>(T));
  auto add_block = [&](RoundSet& s, const Block& b) {
    for (Round r = b.lo; r <= b.hi; ++r) s.insert(r);
  };
  for (const Block& b : blocks) {
    if (b.level == 1) {
      for (Round t = b.lo; t <= b.hi; ++t)
        for (Round s = b.lo; s < t; ++s) sets[t - 1].insert(s);
      continue;
    }
    RoundSet obs;
    for (const Block& a : blocks) {
      if (a.level <= b.level - 2) add_block(obs, a);
      if (a.level == b.level - 1 && !a.gamma && a.u == b.v) add_block(obs, a);
    }
    for (Round t = b.lo; t <= b.hi; ++t) sets[t - 1] = obs;
  }
  // Overflow rounds: top level, sees levels 1..L-2 plus all G-groups of
  // level L-1.
  if (structured_end < T) {
    RoundSet obs;
    for (const Block& a : blocks) {
      if (a.level <= spec.num_levels - 2) add_block(obs, a);
      if (a.level == spec.num_levels - 1 && !a.gamma) add_block(obs, a);
    }
    for (Round t = structured_end + 1; t <= T; ++t) sets[t - 1] = obs;
  }
  return sets;
}

// Regret recomputed by per-arm counting over an independently derived decimal
// scaling of the means.
inline double brute_regret(const std::vector<ArmId>& arms, const BanditInstance& instance) {
  std::vector<std::int64_t> scaled;
  bool exact = true;
  for (double m : instance.means) {
    const std::int64_t d = std::llround(m * 1e15);
    if (static_cast<double>(d) / 1e15 != m) exact = false;
    scaled.push_back(d);
  }
  std::map<ArmId, std::int64_t> counts;
  for (ArmId a : arms) counts[a] += 1;
  if (exact) {
    std::int64_t best = scaled[0];
    for (std::int64_t d : scaled) best = std::max(best, d);
    __int128 acc = 0;
    for (const auto& [a, n] : counts) acc += static_cast<__int128>(n) * (best - scaled[a]);
    return static_cast<double>(acc) / 1e15;
  }
  double best = instance.means[0];
  for (double m : instance.means) best = std::max(best, m);
  double acc = 0.0;
  for (const auto& [a, n] : counts) acc += static_cast<double>(n) * (best - instance.means[a]);
  return acc;
}

// Exact distribution of a full-disclosure path run for deterministic
// estimate kinds: enumerates the reward tree, weighting branches by the
// Bernoulli probabilities.
struct FdpExact {
  double p_all_sampled = 0.0;
  std::vector<double> q;  // expected pulls per arm
};

inline void enumerate_fdp_rec(const BanditInstance& inst, const BehaviorConfig& cfg, Round t,
                              Round path_len, ArmStats& stats, double prob, FdpExact& out) {
  if (t > path_len) {
    bool all = true;
    for (ArmId a = 0; a < inst.num_arms; ++a) {
      out.q[a] += prob * static_cast<double>(stats.pulls[a]);
      if (stats.pulls[a] == 0) all = false;
    }
    if (all) out.p_all_sampled += prob;
    return;
  }
  const ArmId a = choose_arm(estimate(cfg, 0, stats));
  for (int r = 0; r <= 1; ++r) {
    const double p = r ? inst.means[a] : 1.0 - inst.means[a];
    if (p == 0.0) continue;
    stats.add(a, r);
    enumerate_fdp_rec(inst, cfg, t + 1, path_len, stats, prob * p, out);
    stats.pulls[a] -= 1;
    stats.sums[a] -= r;
  }
}

inline FdpExact enumerate_fdp(const BanditInstance& inst, const BehaviorConfig& cfg,
                              Round path_len) {
  FdpExact out;
  out.q.assign(static_cast<std::size_t>(inst.num_arms), 0.0);
  ArmStats stats(inst.num_arms);
  enumerate_fdp_rec(inst, cfg, 1, path_len, stats, 1.0, out);
  return out;
}

}  // namespace subhist::testing
