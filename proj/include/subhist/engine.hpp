#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "subhist/behavior.hpp"
#include "subhist/common.hpp"
#include "subhist/core.hpp"
#include "subhist/info_graph.hpp"

namespace subhist {

// Means rescaled to integers at 1e15 when every mean is an exact 15-digit
// decimal; lets regret be accumulated in integer arithmetic, exactly.
inline std::optional<std::vector<std::int64_t>> decimal_scaled_means(
    const std::vector<double>& means) {
  constexpr double kScale = 1e15;
  std::vector<std::int64_t> out;
  out.reserve(means.size());
  for (double m : means) {
    const double scaled = m * kScale;
    const std::int64_t d = std::llround(scaled);
    if (std::abs(scaled - static_cast<double>(d)) > 0.499) return std::nullopt;
    if (static_cast<double>(d) / kScale != m) return std::nullopt;
    out.push_back(d);
  }
  return out;
}

// Sum over rounds of (best mean - mean of the chosen arm), from true means.
// Uses exact integer arithmetic over the decimal representation of the means
// whenever they admit one; falls back to compensated double summation.
inline double regret_of(const std::vector<ArmId>& arms, const BanditInstance& instance) {
  for (ArmId a : arms)
    if (a < 0 || a >= instance.num_arms) throw std::out_of_range("regret_of: bad arm index");
  const double best = instance.best_mean();
  if (auto dec = decimal_scaled_means(instance.means)) {
    std::int64_t dbest = 0;
    for (std::int64_t d : *dec) dbest = std::max(dbest, d);
    __int128 acc = 0;
    for (ArmId a : arms) acc += dbest - (*dec)[a];
    return static_cast<double>(acc) / 1e15;
  }
  double acc = 0.0, comp = 0.0;
  for (ArmId a : arms) {
    const double term = best - instance.means[a];
    const double t = acc + term;
    comp += std::abs(acc) >= std::abs(term) ? (acc - t) + term : (term - t) + acc;
    acc = t;
  }
  return acc + comp;
}

// Full record of one run.
struct SimTrace {
  std::vector<Outcome> outcomes;
  std::vector<std::int64_t> pulls_per_arm;
  double regret = 0.0;
  std::uint64_t seed = 0;
  std::string config_digest;
  std::int64_t clamp_events = 0;
};

struct RunOptions {
  bool validate_graph = false;
  // Debug oracle: materialize every agent's subhistory from the recorded
  // outcomes and check it against the incremental statistics. O(T^2); tests
  // only.
  bool check_subhistories = false;
};

// One policy run: iterate rounds in order, assemble each agent's anonymized
// statistics from its observed groups, query the behavior model, consume the
// reward tape. Deterministic given (instance, graph, cfg, tape_seed).
inline SimTrace run(const BanditInstance& instance, const InfoGraph& graph,
                    const BehaviorConfig& cfg, std::uint64_t tape_seed,
                    const RunOptions& opts = {}) {
  if (graph.horizon() != instance.horizon)
    throw ContractError("run: graph horizon != instance horizon");
  if (opts.validate_graph) {
    if (!graph.validate_transitive().empty())
      throw ContractError("run: info graph is not transitive");
  }
  cfg.validate();
  const int K = instance.num_arms;
  RewardTape tape(instance, tape_seed);

  const auto& groups = graph.groups();
  // prefix[i] = combined stats of groups 0..i-1; lets any contiguous group
  // range be aggregated in O(K).
  std::vector<ArmStats> prefix(groups.size() + 1, ArmStats(K));

  SimTrace trace;
  trace.seed = tape_seed;
  trace.outcomes.reserve(static_cast<std::size_t>(instance.horizon));
  trace.pulls_per_arm.assign(static_cast<std::size_t>(K), 0);
  EstimateDiag diag;

  const std::uint64_t tie_stream = hash_combine(0x7e1eb4ea6ULL, cfg.seed);

  for (std::size_t gid = 0; gid < groups.size(); ++gid) {
    const GroupInfo& g = groups[gid];
    ArmStats base(K);
    for (auto [lo, hi] : g.observed_groups) {
      for (ArmId a = 0; a < K; ++a) {
        base.pulls[a] += prefix[hi + 1].pulls[a] - prefix[lo].pulls[a];
        base.sums[a] += prefix[hi + 1].sums[a] - prefix[lo].sums[a];
      }
    }
    ArmStats within(K);  // this group's own outcomes (chain prefix)
    ArmStats scratch(K);
    for (Round t = g.rounds.lo; t <= g.rounds.hi; ++t) {
      const ArmStats* stats = &base;
      if (g.chain && within.total_pulls() > 0) {
        scratch = base;
        scratch.add_all(within);
        stats = &scratch;
      }
      const std::vector<double> est = estimate(cfg, cfg.agent_draw(t), *stats, &diag);
      const ArmId a = cfg.projection_mode
                          ? choose_arm_random_tie(
                                est, hash_combine(tie_stream, static_cast<std::uint64_t>(t)))
                          : choose_arm(est);
      const int r = tape.reward(a, trace.pulls_per_arm[a] + 1);
      trace.pulls_per_arm[a] += 1;
      trace.outcomes.push_back({t, a, r});
      if (g.chain) within.add(a, r);
      prefix[gid + 1].add(a, r);  // accumulate this group's stats in place
    }
    for (ArmId a = 0; a < K; ++a) {
      prefix[gid + 1].pulls[a] += prefix[gid].pulls[a];
      prefix[gid + 1].sums[a] += prefix[gid].sums[a];
    }
  }

  if (opts.check_subhistories) {
    for (Round t = 1; t <= instance.horizon; ++t) {
      ArmStats oracle(K);
      for (Round s : graph.observed_rounds(t)) {
        const Outcome& o = trace.outcomes[s - 1];
        oracle.add(o.arm, o.reward);
      }
      // Recompute what the loop used for agent t.
      const int gid = graph.group_index_of(t);
      const GroupInfo& g = groups[gid];
      ArmStats used(K);
      for (auto [lo, hi] : g.observed_groups)
        for (ArmId a = 0; a < K; ++a) {
          used.pulls[a] += prefix[hi + 1].pulls[a] - prefix[lo].pulls[a];
          used.sums[a] += prefix[hi + 1].sums[a] - prefix[lo].sums[a];
        }
      if (g.chain)
        for (Round s = g.rounds.lo; s < t; ++s)
          used.add(trace.outcomes[s - 1].arm, trace.outcomes[s - 1].reward);
      if (!(used == oracle))
        throw ContractError("run: incremental stats diverge from materialized subhistory");
    }
  }

  std::vector<ArmId> arms;
  arms.reserve(trace.outcomes.size());
  for (const Outcome& o : trace.outcomes) arms.push_back(o.arm);
  trace.regret = regret_of(arms, instance);
  trace.clamp_events = diag.clamped;
  return trace;
}

// True iff every outcome in the final ceil(tail_fraction*T) rounds pulls one
// common suboptimal arm.
inline bool herding_indicator(const SimTrace& trace, const BanditInstance& instance,
                              double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw ContractError("herding_indicator: tail_fraction must be in (0, 1]");
  const Round T = static_cast<Round>(trace.outcomes.size());
  if (T == 0) return false;
  const Round tail = static_cast<Round>(
      std::ceil(tail_fraction * static_cast<double>(T)));
  const ArmId first = trace.outcomes[T - tail].arm;
  if (instance.means[first] >= instance.best_mean()) return false;
  for (Round t = T - tail; t < T; ++t)
    if (trace.outcomes[t].arm != first) return false;
  return true;
}

// Compact per-run record used by batches and sweeps.
struct TraceSummary {
  std::string policy;
  Round horizon = 0;
  std::uint64_t seed = 0;
  double regret = 0.0;
  std::vector<std::int64_t> pulls;
  bool herded = false;
  std::int64_t clamp_events = 0;
  std::string error;  // non-empty when this seed failed

  bool ok() const { return error.empty(); }
};

struct BatchOptions {
  int threads = 0;  // 0 = hardware concurrency
  double herd_tail_fraction = 0.25;
  std::string policy_name = "policy";
};

// Runs one seed per entry of `seeds`; output order matches input order
// regardless of execution order. Per-seed failures are reported in the
// summary and do not abort the batch. Each rep's behavior stream is derived
// from (cfg.seed, rep seed), so two policies batched with the same seed list
// face identical tapes and identical agents.
inline std::vector<TraceSummary> run_batch(const BanditInstance& instance, const InfoGraph& graph,
                                           const BehaviorConfig& cfg,
                                           const std::vector<std::uint64_t>& seeds,
                                           const BatchOptions& opts = {}) {
  std::vector<TraceSummary> out(seeds.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      TraceSummary& s = out[i];
      s.policy = opts.policy_name;
      s.horizon = instance.horizon;
      s.seed = seeds[i];
      try {
        BehaviorConfig rep_cfg = cfg;
        rep_cfg.seed = hash_combine(cfg.seed, seeds[i]);
        SimTrace tr = run(instance, graph, rep_cfg, seeds[i]);
        s.regret = tr.regret;
        s.pulls = tr.pulls_per_arm;
        s.herded = herding_indicator(tr, instance, opts.herd_tail_fraction);
        s.clamp_events = tr.clamp_events;
      } catch (const std::exception& e) {
        s.error = e.what();
      }
    }
  };
  int threads = opts.threads > 0 ? opts.threads
                                 : static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  threads = std::min<int>(threads, static_cast<int>(seeds.size()) > 0
                                       ? static_cast<int>(seeds.size())
                                       : 1);
  if (threads <= 1 || seeds.size() < 2) {
    work(0, seeds.size());
    return out;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (seeds.size() + threads - 1) / threads;
  for (int w = 0; w < threads; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(seeds.size(), b + chunk);
    if (b >= e) break;
    pool.emplace_back(work, b, e);
  }
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace subhist
