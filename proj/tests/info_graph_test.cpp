#include "subhist/info_graph.hpp"

#include <gtest/gtest.h>

#include <random>
#include <regex>
#include <set>

#include "subhist/presets.hpp"
#include "test_support.hpp"

namespace subhist {
namespace {

using testing::RoundSet;

RoundSet as_set(const std::vector<Round>& v) { return RoundSet(v.begin(), v.end()); }

void expect_matches_dense(const InfoGraph& g, const std::vector<RoundSet>& dense,
                          const std::string& what) {
  ASSERT_EQ(g.horizon(), static_cast<Round>(dense.size())) << what;
  for (Round t = 1; t <= g.horizon(); ++t)
    EXPECT_EQ(as_set(g.observed_rounds(t)), dense[t - 1]) << what << " at round " << t;
}

TEST(FullDisclosure, DegenerateAndSmall) {
  InfoGraph g1 = build_full_disclosure(1);
  EXPECT_TRUE(g1.observed_rounds(1).empty());

  InfoGraph g3 = build_full_disclosure(3);
  EXPECT_EQ(as_set(g3.observed_rounds(1)), RoundSet{});
  EXPECT_EQ(as_set(g3.observed_rounds(2)), RoundSet{1});
  EXPECT_EQ(as_set(g3.observed_rounds(3)), (RoundSet{1, 2}));
  EXPECT_TRUE(g3.validate_transitive().empty());
}

TEST(TwoLevel, SpecExample) {
  // T=10, T1=2, path_len=3: rounds 1-3 chain, 4-6 chain, 7-10 see {1..6}.
  InfoGraph g = build_two_level(10, 2, 3);
  EXPECT_EQ(as_set(g.observed_rounds(2)), RoundSet{1});
  EXPECT_EQ(as_set(g.observed_rounds(3)), (RoundSet{1, 2}));
  EXPECT_EQ(as_set(g.observed_rounds(4)), RoundSet{});
  EXPECT_EQ(as_set(g.observed_rounds(6)), (RoundSet{4, 5}));
  for (Round t = 7; t <= 10; ++t)
    EXPECT_EQ(as_set(g.observed_rounds(t)), (RoundSet{1, 2, 3, 4, 5, 6}));
  EXPECT_TRUE(g.validate_transitive().empty());
}

TEST(TwoLevel, PathsPairwiseDisjoint) {
  InfoGraph g = build_two_level(40, 4, 5);
  for (Round t = 1; t <= 20; ++t) {
    const Round path = (t - 1) / 5;
    for (Round s : g.observed_rounds(t)) EXPECT_EQ((s - 1) / 5, path);
  }
  // Level-2 agents see exactly T1*path_len rounds.
  for (Round t = 21; t <= 40; ++t) EXPECT_EQ(g.observed_size(t), 20);
}

TEST(TwoLevel, ConfigErrors) {
  EXPECT_THROW(build_two_level(5, 2, 3), ConfigError);  // 6 > 5
  EXPECT_THROW(build_two_level(5, 0, 3), ConfigError);
}

TEST(ThreeLevel, SpecExample) {
  // sigma=2, T1=1, T2=1, path_len=2, T=8: level-2 round 5 sees {1,2}, round 6
  // sees {3,4}; rounds 7-8 see {1..6}.
  InfoGraph g = build_three_level(8, 1, 1, 2, 2);
  EXPECT_EQ(as_set(g.observed_rounds(5)), (RoundSet{1, 2}));
  EXPECT_EQ(as_set(g.observed_rounds(6)), (RoundSet{3, 4}));
  EXPECT_EQ(as_set(g.observed_rounds(7)), (RoundSet{1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(as_set(g.observed_rounds(8)), (RoundSet{1, 2, 3, 4, 5, 6}));
  EXPECT_TRUE(g.validate_transitive().empty());
}

TEST(ThreeLevel, SecondLevelGroupMembersMutuallyUnobserved) {
  InfoGraph g = build_three_level(60, 2, 5, 2, 3);
  // Second-level groups start after 2*2*3 = 12 first-level rounds.
  for (int grp = 0; grp < 2; ++grp) {
    const Round start = 12 + grp * 5 + 1;
    RoundSet first = as_set(g.observed_rounds(start));
    for (Round t = start; t < start + 5; ++t) {
      RoundSet s = as_set(g.observed_rounds(t));
      EXPECT_EQ(s, first);  // identical S_t
      for (Round other = start; other < start + 5; ++other)
        EXPECT_FALSE(s.count(other));  // not to one another
    }
  }
}

TEST(ThreeLevel, ConfigErrors) {
  EXPECT_THROW(build_three_level(10, 2, 2, 2, 2), ConfigError);
  EXPECT_THROW(build_three_level(10, 1, 1, 0, 2), ConfigError);
}

LevelSpec make_spec(int L, int sigma, std::vector<Round> sizes, Round path_len,
                    int gamma = -1) {
  LevelSpec s;
  s.num_levels = L;
  s.sigma = sigma;
  s.group_sizes = std::move(sizes);
  s.path_len = path_len;
  s.gamma_factor = gamma;
  return s;
}

TEST(LLevel, SpecExampleSigma2) {
  // L=3, sigma=2: an agent in G_{3,1,2} sees all level-1 rounds plus
  // G_{2,2,1} and G_{2,2,2}, and no level-2 Gamma rounds.
  LevelSpec spec = make_spec(3, 2, {1, 2, 2}, 2);
  const Round T = spec.total_rounds();
  InfoGraph g = build_l_level(spec, T);
  EXPECT_TRUE(g.validate_transitive().empty());

  Round level1_end = 0;
  RoundSet g221, g222, gamma2;
  Round g312_round = 0;
  for (const GroupInfo& gr : g.groups()) {
    if (gr.level == 1) level1_end = std::max(level1_end, gr.rounds.hi);
    if (gr.level == 2 && gr.kind == GroupKind::G && gr.u == 2 && gr.v == 1)
      for (Round t = gr.rounds.lo; t <= gr.rounds.hi; ++t) g221.insert(t);
    if (gr.level == 2 && gr.kind == GroupKind::G && gr.u == 2 && gr.v == 2)
      for (Round t = gr.rounds.lo; t <= gr.rounds.hi; ++t) g222.insert(t);
    if (gr.level == 2 && gr.kind == GroupKind::Gamma)
      for (Round t = gr.rounds.lo; t <= gr.rounds.hi; ++t) gamma2.insert(t);
    if (gr.level == 3 && gr.kind == GroupKind::G && gr.u == 1 && gr.v == 2)
      g312_round = gr.rounds.lo;
  }
  ASSERT_GT(g312_round, 0);
  RoundSet expected;
  for (Round t = 1; t <= level1_end; ++t) expected.insert(t);
  expected.insert(g221.begin(), g221.end());
  expected.insert(g222.begin(), g222.end());
  RoundSet actual = as_set(g.observed_rounds(g312_round));
  EXPECT_EQ(actual, expected);
  for (Round t : gamma2) EXPECT_FALSE(actual.count(t));
}

TEST(LLevel, SameLastCoordinateSharesSubhistory) {
  LevelSpec spec = make_spec(3, 2, {1, 2, 2}, 2);
  InfoGraph g = build_l_level(spec, spec.total_rounds());
  // G_{l,1,v} and G_{l,2,v} observe the same subhistory.
  for (int level = 2; level <= 3; ++level) {
    for (int v = 1; v <= 2; ++v) {
      std::vector<RoundSet> sets;
      for (const GroupInfo& gr : g.groups())
        if (gr.level == level && gr.kind == GroupKind::G && gr.v == v)
          sets.push_back(as_set(g.observed_rounds(gr.rounds.lo)));
      ASSERT_EQ(sets.size(), 2u);
      EXPECT_EQ(sets[0], sets[1]);
    }
  }
}

TEST(LLevel, GammaObservesSameAsG) {
  LevelSpec spec = make_spec(3, 2, {1, 2, 2}, 2);
  InfoGraph g = build_l_level(spec, spec.total_rounds());
  for (const GroupInfo& gr : g.groups()) {
    if (gr.kind != GroupKind::Gamma) continue;
    for (const GroupInfo& other : g.groups()) {
      if (other.kind == GroupKind::G && other.level == gr.level && other.u == gr.u &&
          other.v == gr.v) {
        EXPECT_EQ(as_set(g.observed_rounds(gr.rounds.lo)),
                  as_set(g.observed_rounds(other.rounds.lo)));
      }
    }
  }
}

TEST(LLevel, ConfigErrors) {
  LevelSpec spec = make_spec(3, 0, {1, 2, 2}, 2);
  EXPECT_THROW(build_l_level(spec, 1000), ConfigError);  // sigma=0 rejected
  spec = make_spec(3, 2, {1, 2, 2}, 2);
  EXPECT_THROW(build_l_level(spec, spec.total_rounds() - 1), ConfigError);  // overflow
  spec = make_spec(1, 2, {1}, 2);
  EXPECT_THROW(build_l_level(spec, 1000), ConfigError);  // L < 2
}

TEST(LLevel, RoundsPerLevelMatchSpecAndRemainderGoesToTop) {
  LevelSpec spec = make_spec(3, 2, {2, 3, 4}, 2);
  const Round structured = spec.total_rounds();
  const Round T = structured + 13;
  InfoGraph g = build_l_level(spec, T);
  std::map<int, Round> level_rounds;
  Round top_extra = 0;
  for (const GroupInfo& gr : g.groups()) {
    level_rounds[gr.level] += gr.rounds.length();
    if (gr.kind == GroupKind::Top) top_extra += gr.rounds.length();
  }
  // Level 1: sigma^2 groups x T1 paths x path_len.
  EXPECT_EQ(level_rounds[1], 4 * 2 * 2);
  // Level 2: sigma^2 x T2 x (1 + gamma) with gamma = sigma-1 = 1.
  EXPECT_EQ(level_rounds[2], 4 * 3 * 2);
  EXPECT_EQ(level_rounds[3], 4 * 4 * 2 + 13);
  EXPECT_EQ(top_extra, 13);
  EXPECT_TRUE(g.validate_transitive().empty());
}

TEST(Validate, PlantedViolationDetected) {
  // S_2 = {1}, S_3 = {2} but 1 not in S_3: one violation (2, 3, witness 1).
  InfoGraph g = InfoGraph::from_explicit({{}, {1}, {2}});
  auto v = g.validate_transitive();
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].inner, 2);
  EXPECT_EQ(v[0].outer, 3);
  EXPECT_EQ(v[0].witness, 1);
}

TEST(Validate, BuilderGridAllTransitive) {
  int combos = 0;
  for (Round T : {1, 2, 7, 33}) {
    EXPECT_TRUE(build_full_disclosure(T).validate_transitive().empty());
    ++combos;
  }
  for (Round T1 : {1, 2, 5})
    for (Round plen : {1, 2, 4}) {
      const Round T = T1 * plen + 7;
      EXPECT_TRUE(build_two_level(T, T1, plen).validate_transitive().empty());
      ++combos;
    }
  for (int sigma : {1, 2, 3})
    for (Round T1 : {1, 3})
      for (Round T2 : {1, 4})
        for (Round plen : {1, 2, 3}) {
          const Round T = sigma * (T1 * plen + T2) + 5;
          EXPECT_TRUE(
              build_three_level(T, T1, T2, sigma, plen).validate_transitive().empty());
          ++combos;
        }
  for (int L : {2, 3, 4})
    for (int sigma : {1, 2, 3}) {
      std::vector<Round> sizes;
      for (int l = 0; l < L; ++l) sizes.push_back(1 + l);
      LevelSpec spec = make_spec(L, sigma, sizes, 2);
      const Round T = spec.total_rounds() + 3;
      EXPECT_TRUE(build_l_level(spec, T).validate_transitive().empty())
          << "L=" << L << " sigma=" << sigma;
      ++combos;
    }
  // Pseudo-random parameter draws on top of the fixed grid.
  std::mt19937_64 rng(271828);
  for (int i = 0; i < 20; ++i) {
    LevelSpec spec;
    spec.num_levels = 2 + static_cast<int>(rng() % 3);
    spec.sigma = 1 + static_cast<int>(rng() % 3);
    spec.path_len = 1 + static_cast<Round>(rng() % 3);
    spec.gamma_factor = static_cast<int>(rng() % 4) - 1;  // -1 = default
    for (int l = 0; l < spec.num_levels; ++l)
      spec.group_sizes.push_back(1 + static_cast<Round>(rng() % 5));
    const Round T = spec.total_rounds() + static_cast<Round>(rng() % 7);
    EXPECT_TRUE(build_l_level(spec, T).validate_transitive().empty()) << "random combo " << i;
    ++combos;
  }
  EXPECT_GE(combos, 50);
}

TEST(Densification, CompactMatchesDenseOracle) {
  expect_matches_dense(build_full_disclosure(17), testing::dense_full_disclosure(17), "full");
  expect_matches_dense(build_two_level(37, 4, 3), testing::dense_two_level(37, 4, 3),
                       "two_level");
  expect_matches_dense(build_three_level(100, 3, 7, 3, 2),
                       testing::dense_three_level(100, 3, 7, 3, 2), "three_level");
  for (int L : {2, 3, 4}) {
    std::vector<Round> sizes;
    for (int l = 0; l < L; ++l) sizes.push_back(2);
    LevelSpec spec = make_spec(L, 2, sizes, 2);
    const Round T = std::min<Round>(512, spec.total_rounds() + 9);
    ASSERT_LE(spec.total_rounds(), T);
    expect_matches_dense(build_l_level(spec, T), testing::dense_l_level(spec, T),
                         "l_level L=" + std::to_string(L));
  }
  // Non-default gamma factor.
  LevelSpec spec = make_spec(3, 2, {1, 2, 3}, 2, 3);
  const Round T = spec.total_rounds() + 5;
  expect_matches_dense(build_l_level(spec, T), testing::dense_l_level(spec, T),
                       "l_level gamma=3");
}

TEST(TwoLevel, ExactFitWithoutTopRounds) {
  InfoGraph g = build_two_level(6, 2, 3);
  EXPECT_EQ(g.horizon(), 6);
  EXPECT_TRUE(g.validate_transitive().empty());
}

TEST(Storage, GroupCountStaysStructural) {
  // Compact representation: group count scales with the structural layout,
  // not with T^2 (or even T) for the multi-level builders.
  PresetRequest req{"paper-Llevel-cor", 1 << 16, 2, 1};
  PolicyParams p = make_preset(req);
  InfoGraph g = p.build(1 << 16);
  Round paths = p.level_spec.group_sizes[0] * p.sigma * p.sigma;
  // paths + sigma^2 G- and Gamma-groups per level + top overflow
  EXPECT_LE(static_cast<Round>(g.groups().size()),
            paths + 2 * p.sigma * p.sigma * p.level_spec.num_levels + 1);
}

TEST(SubhistoryFraction, FullAndTwoLevel) {
  InfoGraph full = build_full_disclosure(9);
  auto f = full.subhistory_fraction();
  for (Round t = 2; t <= 9; ++t) EXPECT_DOUBLE_EQ(f[t - 1], 1.0);

  const Round T = 50, T1 = 4, plen = 3;
  InfoGraph two = build_two_level(T, T1, plen);
  auto f2 = two.subhistory_fraction();
  EXPECT_DOUBLE_EQ(f2[T - 1], static_cast<double>(T1 * plen) / static_cast<double>(T - 1));
}

TEST(ExportDot, FullClosureSmall) {
  InfoGraph g = build_full_disclosure(3);
  std::string dot = g.export_dot(false);
  EXPECT_NE(dot.find("digraph"), std::string::npos);
  EXPECT_NE(dot.find("n1 -> n2"), std::string::npos);
  EXPECT_NE(dot.find("n1 -> n3"), std::string::npos);
  EXPECT_NE(dot.find("n2 -> n3"), std::string::npos);
  // Transitive reduction keeps only covering edges of the chain.
  std::string reduced = g.export_dot(false, true);
  EXPECT_NE(reduced.find("n1 -> n2"), std::string::npos);
  EXPECT_NE(reduced.find("n2 -> n3"), std::string::npos);
  EXPECT_EQ(reduced.find("n1 -> n3"), std::string::npos);
}

TEST(ExportDot, CollapsedThreeLevelHasFiveNodes) {
  InfoGraph g = build_three_level(30, 2, 3, 2, 2);
  std::string dot = g.export_dot(true);
  // 2 first-level groups + 2 second-level groups + 1 top = 5 nodes.
  int nodes = 0, edges = 0;
  std::size_t pos = 0;
  while (pos < dot.size()) {
    std::size_t nl = dot.find('\n', pos);
    std::string line = dot.substr(pos, nl - pos);
    if (line.find("->") != std::string::npos)
      ++edges;
    else if (line.find("[label=") != std::string::npos)
      ++nodes;
    pos = nl + 1;
  }
  EXPECT_EQ(nodes, 5);
  // Each second-level group observes its own first-level group; the top
  // observes all four structural groups below it.
  EXPECT_EQ(edges, 2 + 4);
}

TEST(ExportDot, ParsesStructurally) {
  // Minimal DOT well-formedness: a digraph block, node statements, and
  // "a -> b" edge statements, every line ';'-terminated.
  for (bool collapse : {false, true}) {
    std::string dot = build_three_level(30, 2, 3, 2, 2).export_dot(collapse);
    ASSERT_TRUE(dot.rfind("digraph", 0) == 0);
    ASSERT_EQ(dot.back(), '\n');
    std::regex line_re(R"(^(digraph \w+ \{|\}|  \w+ \[label=\"[^\"]*\"\];|  \w+ -> \w+( \[label=\"[^\"]*\"\])?;)$)");
    std::size_t pos = 0, checked = 0;
    while (pos < dot.size()) {
      std::size_t nl = dot.find('\n', pos);
      std::string line = dot.substr(pos, nl - pos);
      EXPECT_TRUE(std::regex_match(line, line_re)) << "bad DOT line: " << line;
      pos = nl + 1;
      ++checked;
    }
    EXPECT_GT(checked, 3u);
  }
}

TEST(SummaryJson, ReportsLevels) {
  InfoGraph g = build_three_level(30, 2, 3, 2, 2);
  std::string s = g.summary_json();
  EXPECT_NE(s.find("\"levels\""), std::string::npos);
  EXPECT_NE(s.find("\"total\":30"), std::string::npos);
  EXPECT_NE(s.find("\"level\":1,\"g_rounds\":8,\"gamma_rounds\":0"), std::string::npos);
}

TEST(Presets, TwoLevelShape) {
  PresetRequest req{"paper-2level", 4096, 2, 1};
  PolicyParams p = make_preset(req);
  EXPECT_EQ(p.type, PolicyType::TwoLevel);
  EXPECT_EQ(p.path_len, 2);
  // T1 = ceil(T^{2/3} ln(T)^{1/3})
  const double expect_t1 = std::ceil(std::pow(4096.0, 2.0 / 3.0) * std::pow(std::log(4096.0), 1.0 / 3.0));
  EXPECT_EQ(p.t1, static_cast<Round>(expect_t1));
  InfoGraph g = p.build(4096);
  EXPECT_TRUE(g.validate_transitive().empty());
}

TEST(Presets, ThreeLevelShape) {
  PresetRequest req{"paper-3level", 1 << 14, 2, 1};
  PolicyParams p = make_preset(req);
  EXPECT_EQ(p.type, PolicyType::ThreeLevel);
  EXPECT_EQ(p.sigma, 4);
  InfoGraph g = p.build(1 << 14);
  EXPECT_TRUE(g.validate_transitive().empty());
}

TEST(Presets, LLevelTheoremAndCorollary) {
  for (const char* name : {"paper-Llevel-thm", "paper-Llevel-cor"}) {
    PresetRequest req{name, 1 << 14, 2, 1};
    PolicyParams p = make_preset(req);
    EXPECT_EQ(p.type, PolicyType::LLevel) << name;
    InfoGraph g = p.build(1 << 14);
    EXPECT_TRUE(g.validate_transitive().empty()) << name;
    EXPECT_GE(p.level_spec.num_levels, 2) << name;
  }
  // Corollary schedule is geometric with ratio sigma^4.
  PresetRequest req{"paper-Llevel-cor", 1 << 16, 2, 1};
  PolicyParams p = make_preset(req);
  const auto& sizes = p.level_spec.group_sizes;
  const Round ratio = static_cast<Round>(std::pow(p.sigma, 4));
  EXPECT_EQ(sizes[0], ratio);
  for (std::size_t l = 1; l + 1 < sizes.size(); ++l) EXPECT_EQ(sizes[l], sizes[l - 1] * ratio);
}

TEST(Presets, UnknownNameRejected) {
  PresetRequest req{"paper-9level", 1024, 2, 1};
  EXPECT_THROW(make_preset(req), ConfigError);
}

TEST(Fraction, CorollaryPresetMinFractionAboveLevelThree) {
  // Structural computation, no randomness: levels >= 3 of the corollary
  // preset observe at least a 1/(c*sigma^4) fraction of history.
  PresetRequest req{"paper-Llevel-cor", 1 << 14, 2, 1};
  PolicyParams p = make_preset(req);
  if (p.level_spec.num_levels < 3) GTEST_SKIP() << "horizon too small for three levels";
  InfoGraph g = p.build(1 << 14);
  auto frac = g.subhistory_fraction();
  double min_frac = 1.0;
  for (const GroupInfo& gr : g.groups())
    if (gr.level >= 3)
      for (Round t = gr.rounds.lo; t <= gr.rounds.hi; ++t)
        min_frac = std::min(min_frac, frac[t - 1]);
  ASSERT_LT(min_frac, 1.0);
  ASSERT_GT(min_frac, 0.0);
  const double sigma4 = std::pow(p.sigma, 4);
  const double c = 1.0 / (min_frac * sigma4);
  RecordProperty("measured_c", c);
  EXPECT_GE(min_frac, 1.0 / (std::max(c, 1.0) * 1.0001 * sigma4));
}

}  // namespace
}  // namespace subhist
