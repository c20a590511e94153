#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "subhist/common.hpp"

namespace subhist {

// Ground-truth Bernoulli bandit instance. Immutable after construction.
//
// With strict_model (the default) every mean must lie in [1/3, 2/3]; the
// relaxed mode accepts [0, 1] for stress tests.
struct BanditInstance {
  int num_arms = 0;
  std::vector<double> means;
  Round horizon = 0;
  bool strict_model = true;

  BanditInstance() = default;
  BanditInstance(std::vector<double> mu, Round T, bool strict = true)
      : num_arms(static_cast<int>(mu.size())), means(std::move(mu)), horizon(T), strict_model(strict) {
    validate();
  }

  void validate() const {
    if (num_arms < 2) throw ConfigError("instance: num_arms must be >= 2");
    if (horizon < 1) throw ConfigError("instance: horizon must be >= 1");
    if (static_cast<int>(means.size()) != num_arms)
      throw ConfigError("instance: means size != num_arms");
    const double lo = strict_model ? 1.0 / 3.0 : 0.0;
    const double hi = strict_model ? 2.0 / 3.0 : 1.0;
    for (double m : means) {
      if (!(m >= lo && m <= hi))
        throw ConfigError("instance: mean " + format_double(m) + " outside [" +
                          format_double(lo) + ", " + format_double(hi) + "]");
    }
  }

  double best_mean() const {
    double b = means[0];
    for (double m : means) b = std::max(b, m);
    return b;
  }

  // Gap between the best and second-best mean (0 when several arms are tied
  // at the top).
  double gap() const {
    double best = best_mean();
    double second = -1.0;
    for (double m : means)
      if (m < best) second = std::max(second, m);
    if (second < 0.0) return 0.0;  // all arms share the best mean
    return best - second;
  }

  // Content hash over (K, T, means as 17-significant-digit decimals); stored
  // alongside tapes to guard against tape/instance mismatch.
  std::string digest() const {
    std::string s = std::to_string(num_arms) + "|" + std::to_string(horizon);
    for (double m : means) s += "|" + format_double17(m);
    return hex64(fnv1a64(s));
  }
};

// Pre-drawn K x T reward realizations: cell (a, j) is the reward of the j-th
// pull of arm a in *any* run sharing this tape. Cells are generated lazily by
// a counter-based generator keyed on (seed, arm, pull_index), so a tape never
// materializes K x T storage unless asked to (the materialized mode backs
// exhaustive-enumeration oracles).
class RewardTape {
 public:
  RewardTape(const BanditInstance& instance, std::uint64_t seed)
      : seed_(seed),
        num_arms_(instance.num_arms),
        horizon_(instance.horizon),
        means_(instance.means),
        instance_digest_(instance.digest()) {}

  std::uint64_t seed() const { return seed_; }
  const std::string& instance_digest() const { return instance_digest_; }
  Round horizon() const { return horizon_; }
  int num_arms() const { return num_arms_; }

  // Reward of the j-th pull of `arm` (pull_index is 1-based). Pure.
  int reward(ArmId arm, Round pull_index) const {
    if (arm < 0 || arm >= num_arms_) throw std::out_of_range("tape: arm index out of range");
    if (pull_index < 1 || pull_index > horizon_)
      throw std::out_of_range("tape: pull_index out of range");
    if (!cells_.empty()) return cells_[static_cast<std::size_t>(arm) * horizon_ + (pull_index - 1)];
    return draw(arm, pull_index);
  }

  // Materializes the full matrix; afterwards reward() reads stored cells.
  // Verifies the stored cells agree with the streamed generator.
  void materialize() {
    if (!cells_.empty()) return;
    cells_.resize(static_cast<std::size_t>(num_arms_) * horizon_);
    for (ArmId a = 0; a < num_arms_; ++a)
      for (Round j = 1; j <= horizon_; ++j)
        cells_[static_cast<std::size_t>(a) * horizon_ + (j - 1)] =
            static_cast<std::uint8_t>(draw(a, j));
  }

  bool materialized() const { return !cells_.empty(); }

 private:
  int draw(ArmId arm, Round pull_index) const {
    std::uint64_t bits = hash3(seed_, static_cast<std::uint64_t>(arm) + 1,
                               static_cast<std::uint64_t>(pull_index));
    return uniform01(bits) < means_[arm] ? 1 : 0;
  }

  std::uint64_t seed_;
  int num_arms_;
  Round horizon_;
  std::vector<double> means_;
  std::string instance_digest_;
  std::vector<std::uint8_t> cells_;
};

inline int tape_reward(const RewardTape& tape, ArmId arm, Round pull_index) {
  return tape.reward(arm, pull_index);
}

// Outcome of one round: (t, a_t, r_t).
struct Outcome {
  Round round = 0;
  ArmId arm = 0;
  int reward = 0;

  friend bool operator==(const Outcome&, const Outcome&) = default;
};

// Ordered set of outcomes with strictly increasing rounds.
class Subhistory {
 public:
  Subhistory() = default;
  explicit Subhistory(std::vector<Outcome> entries) : entries_(std::move(entries)) {
    for (std::size_t i = 1; i < entries_.size(); ++i)
      if (entries_[i].round <= entries_[i - 1].round)
        throw ContractError("subhistory: rounds must be strictly increasing");
  }

  void append(Outcome o) {
    if (!entries_.empty() && o.round <= entries_.back().round)
      throw ContractError("subhistory: rounds must be strictly increasing");
    entries_.push_back(o);
  }

  const std::vector<Outcome>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<Outcome> entries_;
};

// Multiset of (arm, reward) pairs: a subhistory with round indices dropped,
// multiplicities preserved.
struct ArmRewardBag {
  std::map<std::pair<ArmId, int>, std::int64_t> counts;

  std::int64_t total() const {
    std::int64_t n = 0;
    for (const auto& [k, c] : counts) n += c;
    return n;
  }

  friend bool operator==(const ArmRewardBag&, const ArmRewardBag&) = default;
};

inline ArmRewardBag anonymize(const Subhistory& h) {
  ArmRewardBag bag;
  for (const Outcome& o : h.entries()) bag.counts[{o.arm, o.reward}] += 1;
  return bag;
}

// Per-arm pull counts and reward sums. The empirical mean of an unseen arm is
// an explicit absent marker, never 0.0.
struct ArmStats {
  std::vector<std::int64_t> pulls;
  std::vector<std::int64_t> sums;

  ArmStats() = default;
  explicit ArmStats(int num_arms)
      : pulls(static_cast<std::size_t>(num_arms), 0), sums(static_cast<std::size_t>(num_arms), 0) {}

  int num_arms() const { return static_cast<int>(pulls.size()); }

  void add(ArmId arm, int reward, std::int64_t multiplicity = 1) {
    pulls[arm] += multiplicity;
    sums[arm] += static_cast<std::int64_t>(reward) * multiplicity;
  }

  void add_all(const ArmStats& other) {
    for (std::size_t a = 0; a < pulls.size(); ++a) {
      pulls[a] += other.pulls[a];
      sums[a] += other.sums[a];
    }
  }

  std::optional<double> mean(ArmId arm) const {
    if (pulls[arm] == 0) return std::nullopt;
    return static_cast<double>(sums[arm]) / static_cast<double>(pulls[arm]);
  }

  std::int64_t total_pulls() const {
    std::int64_t n = 0;
    for (auto p : pulls) n += p;
    return n;
  }

  friend bool operator==(const ArmStats&, const ArmStats&) = default;
};

inline ArmStats arm_stats(const Subhistory& h, int num_arms) {
  ArmStats st(num_arms);
  for (const Outcome& o : h.entries()) {
    if (o.arm < 0 || o.arm >= num_arms) throw std::out_of_range("arm_stats: arm index >= K");
    st.add(o.arm, o.reward);
  }
  return st;
}

inline ArmStats arm_stats(const ArmRewardBag& bag, int num_arms) {
  ArmStats st(num_arms);
  for (const auto& [key, count] : bag.counts) {
    if (key.first < 0 || key.first >= num_arms)
      throw std::out_of_range("arm_stats: arm index >= K");
    st.add(key.first, key.second, count);
  }
  return st;
}

}  // namespace subhist
