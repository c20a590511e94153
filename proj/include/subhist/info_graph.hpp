#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "subhist/common.hpp"

namespace subhist {

// Inclusive interval of rounds [lo, hi]; empty when hi < lo.
struct RoundInterval {
  Round lo = 1;
  Round hi = 0;

  Round length() const { return hi < lo ? 0 : hi - lo + 1; }
  bool contains(Round t) const { return t >= lo && t <= hi; }
  friend bool operator==(const RoundInterval&, const RoundInterval&) = default;
};

enum class GroupKind { Path, G, Gamma, Top };

inline const char* group_kind_name(GroupKind k) {
  switch (k) {
    case GroupKind::Path: return "path";
    case GroupKind::G: return "G";
    case GroupKind::Gamma: return "Gamma";
    case GroupKind::Top: return "top";
  }
  return "?";
}

// One structural group: a contiguous block of rounds whose members share the
// same observed set. Chain groups (full-disclosure paths) additionally let
// member t observe the within-group prefix [rounds.lo, t-1].
struct GroupInfo {
  int level = 1;
  int u = 0;  // group coordinates; 0 = unused
  int v = 0;
  int path = 0;  // path id within a first-level group; 0 = not a path
  GroupKind kind = GroupKind::G;
  bool chain = false;
  RoundInterval rounds;
  // Observed groups as inclusive [first_gid, last_gid] ranges; always whole
  // earlier groups, kept sorted and disjoint.
  std::vector<std::pair<int, int>> observed_groups;
};

struct TransitivityViolation {
  Round inner = 0;    // t  with t in S_outer
  Round outer = 0;    // t'
  Round witness = 0;  // round in S_inner but not in S_outer
};

// Per-round observable sets S_t, stored compactly as group blocks so that
// storage stays proportional to the number of structural groups rather than
// O(T^2). Immutable after build.
class InfoGraph {
 public:
  InfoGraph(Round horizon, std::vector<GroupInfo> groups)
      : horizon_(horizon), groups_(std::move(groups)) {
    Round next = 1;
    for (const GroupInfo& g : groups_) {
      if (g.rounds.lo != next || g.rounds.hi < g.rounds.lo)
        throw ContractError("info_graph: groups must tile [1, T] in order");
      next = g.rounds.hi + 1;
    }
    if (next != horizon_ + 1)
      throw ContractError("info_graph: groups do not cover the horizon");
    for (std::size_t i = 0; i < groups_.size(); ++i) {
      for (auto [lo, hi] : groups_[i].observed_groups) {
        if (lo < 0 || hi < lo || hi >= static_cast<int>(i))
          throw ContractError("info_graph: observed group range must precede the group");
      }
    }
  }

  // Arbitrary per-round sets (one singleton group per round); used for
  // hand-built graphs in tests and for densification oracles. Every observed
  // round must be < t.
  static InfoGraph from_explicit(const std::vector<std::vector<Round>>& sets) {
    const Round T = static_cast<Round>(sets.size());
    std::vector<GroupInfo> gs;
    gs.reserve(sets.size());
    for (Round t = 1; t <= T; ++t) {
      GroupInfo g;
      g.rounds = {t, t};
      for (Round s : sets[t - 1]) {
        if (s < 1 || s >= t) throw ContractError("from_explicit: observed round not in [1, t-1]");
        g.observed_groups.emplace_back(static_cast<int>(s - 1), static_cast<int>(s - 1));
      }
      normalize_ranges(g.observed_groups);
      gs.push_back(std::move(g));
    }
    return InfoGraph(T, std::move(gs));
  }

  Round horizon() const { return horizon_; }
  const std::vector<GroupInfo>& groups() const { return groups_; }

  int group_index_of(Round t) const {
    if (t < 1 || t > horizon_) throw std::out_of_range("info_graph: round out of range");
    auto it = std::upper_bound(groups_.begin(), groups_.end(), t,
                               [](Round x, const GroupInfo& g) { return x < g.rounds.lo; });
    return static_cast<int>(it - groups_.begin()) - 1;
  }

  const GroupInfo& group_of(Round t) const { return groups_[group_index_of(t)]; }

  // Round intervals observed by every member of group gid (the chain prefix
  // of path members is not included here).
  std::vector<RoundInterval> group_observed_intervals(int gid) const {
    std::vector<RoundInterval> out;
    for (auto [lo, hi] : groups_[gid].observed_groups)
      out.push_back({groups_[lo].rounds.lo, groups_[hi].rounds.hi});
    merge_intervals(out);
    return out;
  }

  // S_t as a sorted union of disjoint intervals.
  std::vector<RoundInterval> observed_intervals(Round t) const {
    int gid = group_index_of(t);
    std::vector<RoundInterval> out = group_observed_intervals(gid);
    const GroupInfo& g = groups_[gid];
    if (g.chain && t > g.rounds.lo) out.push_back({g.rounds.lo, t - 1});
    merge_intervals(out);
    return out;
  }

  std::vector<Round> observed_rounds(Round t) const {
    std::vector<Round> out;
    for (const RoundInterval& iv : observed_intervals(t))
      for (Round s = iv.lo; s <= iv.hi; ++s) out.push_back(s);
    return out;
  }

  Round observed_size(Round t) const {
    Round n = 0;
    for (const RoundInterval& iv : observed_intervals(t)) n += iv.length();
    return n;
  }

  // Empty result iff for all t', all t in S_{t'} satisfy S_t subset of S_{t'}.
  // Each violation carries a witness round in S_t \ S_{t'}.
  std::vector<TransitivityViolation> validate_transitive() const {
    std::vector<TransitivityViolation> out;
    std::vector<std::vector<RoundInterval>> obs(groups_.size());
    for (std::size_t b = 0; b < groups_.size(); ++b)
      obs[b] = group_observed_intervals(static_cast<int>(b));
    for (std::size_t b = 0; b < groups_.size(); ++b) {
      const GroupInfo& outer = groups_[b];
      for (auto [lo, hi] : outer.observed_groups) {
        for (int a = lo; a <= hi; ++a) {
          // Members of group a share obs[a]; a chain member's extra prefix
          // lies inside group a's own rounds, which the range fully covers.
          Round w = first_uncovered(obs[a], obs[b]);
          if (w != 0)
            out.push_back({groups_[a].rounds.hi, outer.rounds.lo, w});
        }
      }
    }
    return out;
  }

  // |S_t| / max(t-1, 1) for every round.
  std::vector<double> subhistory_fraction() const {
    std::vector<double> out(static_cast<std::size_t>(horizon_));
    for (const GroupInfo& g : groups_) {
      Round base = 0;
      for (auto [lo, hi] : g.observed_groups)
        base += groups_[hi].rounds.hi - groups_[lo].rounds.lo + 1;
      for (Round t = g.rounds.lo; t <= g.rounds.hi; ++t) {
        Round n = base + (g.chain ? (t - g.rounds.lo) : 0);
        out[t - 1] = static_cast<double>(n) / static_cast<double>(std::max<Round>(t - 1, 1));
      }
    }
    return out;
  }

  // DOT export. Without collapse_groups: one node per round, one edge per
  // (s, t) with s in S_t (or only covering edges with transitive_reduction).
  // With collapse_groups: one node per structural group, paths of one
  // first-level group folded together; edges annotated with the number of
  // observed source rounds.
  std::string export_dot(bool collapse_groups, bool transitive_reduction = false) const {
    std::string dot = "digraph info_graph {\n";
    if (!collapse_groups) {
      for (Round t = 1; t <= horizon_; ++t)
        dot += "  n" + std::to_string(t) + " [label=\"" + std::to_string(t) + "\"];\n";
      std::vector<std::set<Round>> dense(static_cast<std::size_t>(horizon_) + 1);
      for (Round t = 1; t <= horizon_; ++t) {
        auto rs = observed_rounds(t);
        dense[t] = std::set<Round>(rs.begin(), rs.end());
      }
      for (Round t = 1; t <= horizon_; ++t) {
        for (Round s : dense[t]) {
          if (transitive_reduction) {
            bool covered = false;
            for (Round m : dense[t])
              if (m != s && dense[m].count(s)) { covered = true; break; }
            if (covered) continue;
          }
          dot += "  n" + std::to_string(s) + " -> n" + std::to_string(t) + ";\n";
        }
      }
    } else {
      // Fold level-1 paths of one structural group into a single node.
      std::map<std::tuple<int, int, int, int>, std::vector<int>> members;  // key -> gids
      auto key_of = [&](const GroupInfo& g) {
        return std::make_tuple(g.level, static_cast<int>(g.kind == GroupKind::Gamma), g.u, g.v);
      };
      for (std::size_t i = 0; i < groups_.size(); ++i)
        members[key_of(groups_[i])].push_back(static_cast<int>(i));
      std::map<std::tuple<int, int, int, int>, int> node_id;
      int next_id = 0;
      for (const auto& [key, gids] : members) node_id[key] = next_id++;
      std::vector<Round> node_rounds(members.size(), 0);
      for (const auto& [key, gids] : members) {
        Round n = 0;
        for (int gid : gids) n += groups_[gid].rounds.length();
        node_rounds[node_id[key]] = n;
        const GroupInfo& rep = groups_[gids.front()];
        std::string label = "L" + std::to_string(rep.level);
        if (rep.u > 0) label += " (" + std::to_string(rep.u) +
                                (rep.v > 0 ? "," + std::to_string(rep.v) : "") + ")";
        label += " " + std::string(group_kind_name(rep.kind));
        label += " [" + std::to_string(n) + "]";
        dot += "  g" + std::to_string(node_id[key]) + " [label=\"" + label + "\"];\n";
      }
      std::map<std::pair<int, int>, Round> edges;  // (src node, dst node) -> observed rounds
      for (const auto& [key, gids] : members) {
        int dst = node_id[key];
        std::set<int> observed_gids;
        for (auto [lo, hi] : groups_[gids.front()].observed_groups)
          for (int a = lo; a <= hi; ++a) observed_gids.insert(a);
        for (int a : observed_gids) {
          int src = node_id[key_of(groups_[a])];
          edges[{src, dst}] += groups_[a].rounds.length();
        }
      }
      for (const auto& [e, n] : edges)
        dot += "  g" + std::to_string(e.first) + " -> g" + std::to_string(e.second) +
               " [label=\"" + std::to_string(n) + "\"];\n";
    }
    dot += "}\n";
    return dot;
  }

  // {"levels":[{"level":l,"g_rounds":n,"gamma_rounds":m},...],"total":T}
  std::string summary_json() const {
    std::map<int, std::pair<Round, Round>> per_level;  // level -> (g, gamma)
    for (const GroupInfo& g : groups_) {
      auto& slot = per_level[g.level];
      if (g.kind == GroupKind::Gamma)
        slot.second += g.rounds.length();
      else
        slot.first += g.rounds.length();
    }
    std::string s = "{\"levels\":[";
    bool first = true;
    for (const auto& [level, counts] : per_level) {
      if (!first) s += ",";
      first = false;
      s += "{\"level\":" + std::to_string(level) + ",\"g_rounds\":" +
           std::to_string(counts.first) + ",\"gamma_rounds\":" + std::to_string(counts.second) +
           "}";
    }
    s += "],\"total\":" + std::to_string(horizon_) + "}";
    return s;
  }

  static void merge_intervals(std::vector<RoundInterval>& ivs) {
    std::sort(ivs.begin(), ivs.end(),
              [](const RoundInterval& a, const RoundInterval& b) { return a.lo < b.lo; });
    std::vector<RoundInterval> out;
    for (const RoundInterval& iv : ivs) {
      if (iv.length() == 0) continue;
      if (!out.empty() && iv.lo <= out.back().hi + 1)
        out.back().hi = std::max(out.back().hi, iv.hi);
      else
        out.push_back(iv);
    }
    ivs = std::move(out);
  }

 private:
  static void normalize_ranges(std::vector<std::pair<int, int>>& ranges) {
    std::sort(ranges.begin(), ranges.end());
    std::vector<std::pair<int, int>> out;
    for (auto r : ranges) {
      if (!out.empty() && r.first <= out.back().second + 1)
        out.back().second = std::max(out.back().second, r.second);
      else
        out.push_back(r);
    }
    ranges = std::move(out);
  }

  // First round covered by `inner` but not by `outer`; 0 if none. Both are
  // sorted disjoint interval unions.
  static Round first_uncovered(const std::vector<RoundInterval>& inner,
                               const std::vector<RoundInterval>& outer) {
    std::size_t j = 0;
    for (const RoundInterval& iv : inner) {
      Round t = iv.lo;
      while (t <= iv.hi) {
        while (j < outer.size() && outer[j].hi < t) ++j;
        if (j == outer.size() || outer[j].lo > t) return t;
        t = outer[j].hi + 1;
      }
    }
    return 0;
  }

  Round horizon_;
  std::vector<GroupInfo> groups_;
};

// --- Builders ---------------------------------------------------------------

// S_t = [1, t-1] for every round: one chain covering the whole horizon.
inline InfoGraph build_full_disclosure(Round T) {
  if (T < 1) throw ConfigError("full_disclosure: T must be >= 1");
  GroupInfo g;
  g.level = 1;
  g.kind = GroupKind::Path;
  g.chain = true;
  g.path = 1;
  g.rounds = {1, T};
  return InfoGraph(T, {std::move(g)});
}

// T1 disjoint full-disclosure paths of path_len rounds, then all remaining
// rounds observing exactly the first T1*path_len rounds.
inline InfoGraph build_two_level(Round T, Round T1, Round path_len) {
  if (T1 < 1 || path_len < 1) throw ConfigError("two_level: T1 and path_len must be >= 1");
  if (T1 * path_len > T) throw ConfigError("two_level: T1*path_len exceeds T");
  std::vector<GroupInfo> gs;
  Round next = 1;
  for (Round p = 1; p <= T1; ++p) {
    GroupInfo g;
    g.level = 1;
    g.u = 1;
    g.path = static_cast<int>(p);
    g.kind = GroupKind::Path;
    g.chain = true;
    g.rounds = {next, next + path_len - 1};
    next = g.rounds.hi + 1;
    gs.push_back(std::move(g));
  }
  if (next <= T) {
    GroupInfo top;
    top.level = 2;
    top.kind = GroupKind::Top;
    top.rounds = {next, T};
    top.observed_groups = {{0, static_cast<int>(T1) - 1}};
    gs.push_back(std::move(top));
  }
  return InfoGraph(T, std::move(gs));
}

// sigma first-level groups of T1 paths each; sigma second-level groups of T2
// rounds, group s observing exactly the rounds of first-level group s and not
// one another; all remaining rounds observe both exploration levels.
inline InfoGraph build_three_level(Round T, Round T1, Round T2, int sigma, Round path_len) {
  if (sigma < 1) throw ConfigError("three_level: sigma must be >= 1");
  if (T1 < 1 || T2 < 1 || path_len < 1)
    throw ConfigError("three_level: T1, T2, path_len must be >= 1");
  if (sigma * (T1 * path_len + T2) > T)
    throw ConfigError("three_level: sigma*(T1*path_len + T2) exceeds T");
  std::vector<GroupInfo> gs;
  Round next = 1;
  for (int s = 1; s <= sigma; ++s) {
    for (Round p = 1; p <= T1; ++p) {
      GroupInfo g;
      g.level = 1;
      g.u = s;
      g.path = static_cast<int>(p);
      g.kind = GroupKind::Path;
      g.chain = true;
      g.rounds = {next, next + path_len - 1};
      next = g.rounds.hi + 1;
      gs.push_back(std::move(g));
    }
  }
  for (int s = 1; s <= sigma; ++s) {
    GroupInfo g;
    g.level = 2;
    g.u = s;
    g.kind = GroupKind::G;
    g.rounds = {next, next + T2 - 1};
    next = g.rounds.hi + 1;
    g.observed_groups = {{(s - 1) * static_cast<int>(T1), s * static_cast<int>(T1) - 1}};
    gs.push_back(std::move(g));
  }
  if (next <= T) {
    GroupInfo top;
    top.level = 3;
    top.kind = GroupKind::Top;
    top.rounds = {next, T};
    top.observed_groups = {{0, sigma * static_cast<int>(T1) + sigma - 1}};
    gs.push_back(std::move(top));
  }
  return InfoGraph(T, std::move(gs));
}

// L-level policy layout: sizes per level, sigma^2 G-groups per level,
// amplifying Gamma-groups from level 2 up.
struct LevelSpec {
  int num_levels = 2;               // L
  int sigma = 2;                    // groups per axis
  std::vector<Round> group_sizes;   // T_1..T_L; level 1 counts paths per G-group
  Round path_len = 2;               // full-disclosure path length
  int gamma_factor = -1;            // Gamma group size = T_l * gamma_factor; -1 = sigma-1

  int effective_gamma() const { return gamma_factor < 0 ? sigma - 1 : gamma_factor; }

  void validate(Round T) const {
    if (sigma < 1) throw ConfigError("l_level: sigma must be >= 1");
    if (num_levels < 2) throw ConfigError("l_level: num_levels must be >= 2");
    if (path_len < 1) throw ConfigError("l_level: path_len must be >= 1");
    if (static_cast<int>(group_sizes.size()) != num_levels)
      throw ConfigError("l_level: group_sizes must have num_levels entries");
    for (Round sz : group_sizes)
      if (sz < 1) throw ConfigError("l_level: group sizes must be >= 1");
    if (total_rounds() > T) throw ConfigError("l_level: implied rounds exceed T");
  }

  Round total_rounds() const {
    const Round s2 = static_cast<Round>(sigma) * sigma;
    Round total = s2 * group_sizes[0] * path_len;
    for (int l = 2; l <= num_levels; ++l)
      total += s2 * group_sizes[l - 1] * (1 + effective_gamma());
    return total;
  }
};

// Members of G_{l,u,v} (and of Gamma_{l,u,v}) observe all rounds of levels
// 1..l-2, both G and Gamma, plus the rounds of G_{l-1,v,w} for every w.
// Gamma rounds of level l-1 stay hidden from level l. Leftover rounds beyond
// the structured allocation land in the top level, observing everything a
// top-level agent may see: levels 1..L-2 plus all level-(L-1) G-groups.
inline InfoGraph build_l_level(const LevelSpec& spec, Round T) {
  spec.validate(T);
  const int sig = spec.sigma;
  const int L = spec.num_levels;
  const int gamma = spec.effective_gamma();

  std::vector<GroupInfo> gs;
  std::vector<int> level_first_gid(L + 1, 0);  // gid of first group of each level
  std::vector<int> level_last_gid(L + 1, 0);
  Round next = 1;

  // Level 1: sigma^2 G-groups of T1 paths each, laid out (u,v)-lex,
  // path-major inside a group.
  level_first_gid[1] = 0;
  const Round T1 = spec.group_sizes[0];
  for (int u = 1; u <= sig; ++u) {
    for (int v = 1; v <= sig; ++v) {
      for (Round p = 1; p <= T1; ++p) {
        GroupInfo g;
        g.level = 1;
        g.u = u;
        g.v = v;
        g.path = static_cast<int>(p);
        g.kind = GroupKind::Path;
        g.chain = true;
        g.rounds = {next, next + spec.path_len - 1};
        next = g.rounds.hi + 1;
        gs.push_back(std::move(g));
      }
    }
  }
  level_last_gid[1] = static_cast<int>(gs.size()) - 1;

  for (int l = 2; l <= L; ++l) {
    level_first_gid[l] = static_cast<int>(gs.size());
    const Round Tl = spec.group_sizes[l - 1];
    // G-group gid for coordinates (u,v) at level l-1.
    auto prev_slice = [&](int v) -> std::pair<int, int> {
      if (l == 2) {
        // G_{1,v,w} for all w: T1 paths per group, sigma groups with first
        // coordinate v.
        int per_group = static_cast<int>(T1);
        int first = level_first_gid[1] + (v - 1) * sig * per_group;
        return {first, first + sig * per_group - 1};
      }
      int first = level_first_gid[l - 1] + (v - 1) * sig;
      return {first, first + sig - 1};
    };
    for (int pass = 0; pass < 2; ++pass) {  // G-groups first, then Gamma-groups
      const GroupKind kind = pass == 0 ? GroupKind::G : GroupKind::Gamma;
      const Round size = pass == 0 ? Tl : Tl * gamma;
      if (size == 0) continue;
      for (int u = 1; u <= sig; ++u) {
        for (int v = 1; v <= sig; ++v) {
          GroupInfo g;
          g.level = l;
          g.u = u;
          g.v = v;
          g.kind = kind;
          g.rounds = {next, next + size - 1};
          next = g.rounds.hi + 1;
          if (l >= 3) g.observed_groups.push_back({0, level_last_gid[l - 2]});
          g.observed_groups.push_back(prev_slice(v));
          gs.push_back(std::move(g));
        }
      }
    }
    level_last_gid[l] = static_cast<int>(gs.size()) - 1;
  }

  if (next <= T) {
    GroupInfo top;
    top.level = L;
    top.kind = GroupKind::Top;
    top.rounds = {next, T};
    if (L >= 3) top.observed_groups.push_back({0, level_last_gid[L - 2]});
    // All level-(L-1) G-groups (they precede that level's Gamma-groups).
    int first = level_first_gid[L - 1];
    int count = (L - 1 == 1) ? sig * sig * static_cast<int>(T1) : sig * sig;
    top.observed_groups.push_back({first, first + count - 1});
    gs.push_back(std::move(top));
  }
  return InfoGraph(T, std::move(gs));
}

}  // namespace subhist
