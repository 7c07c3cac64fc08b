#include "svclbp/model.hpp"

#include <gtest/gtest.h>

using namespace svclbp;

TEST(Deadline, MatchesAffineFormula) {
  EXPECT_EQ(deadline_of(10, 1, 3, 10), 12);
  EXPECT_EQ(deadline_of(1, 2, 5, 4), 5);
  EXPECT_EQ(deadline_of(3, 2, 5, 4), 9);
}

TEST(Deadline, RejectsOutOfRangeChunk) {
  EXPECT_THROW(deadline_of(0, 1, 3, 10), InvalidInput);
  EXPECT_THROW(deadline_of(11, 1, 3, 10), InvalidInput);
}

TEST(Deadline, StrictlyIncreasingWithSlopeL) {
  for (Slot L = 1; L <= 4; ++L) {
    for (Slot s = 0; s <= 5; ++s) {
      for (ChunkIndex i = 2; i <= 20; ++i) EXPECT_EQ(deadline_of(i, L, s, 20) - deadline_of(i - 1, L, s, 20), L);
    }
  }
}

TEST(VideoSpecTest, ValidatesLayers) {
  EXPECT_THROW(VideoSpec(0, 1, {Kilobits{100}}), InvalidInput);
  EXPECT_THROW(VideoSpec(2, 0, {Kilobits{100}}), InvalidInput);
  EXPECT_THROW(VideoSpec(2, 1, {Kilobits{0}}), InvalidInput);
  EXPECT_THROW(VideoSpec(2, 1, {Kilobits{100}, Kilobits{-1}}), InvalidInput);
  EXPECT_THROW(VideoSpec(3, 1, {std::vector<Kilobits>{100, 100}}), InvalidInput);
  VideoSpec vbr(2, 1, {std::vector<Kilobits>{100, 200}, Kilobits{50}});
  EXPECT_EQ(vbr.cumulative_size(1, 2), 250);
  EXPECT_EQ(vbr.cumulative_size(kSkipped, 1), 0);
  EXPECT_EQ(vbr.complete_level(1, 149), 0);
  EXPECT_EQ(vbr.complete_level(1, 150), 1);
  EXPECT_FALSE(vbr.is_cbr());
}

TEST(Weights, BaseOnlyAlwaysValid) {
  VideoSpec spec(5, 1, {Kilobits{600}});
  StreamConfig c = default_config(spec, Mode::Skip, 2, 4);
  c.gamma = Rational(1, 2);
  auto v = validate_weights(spec, c);
  EXPECT_TRUE(v.valid);
  EXPECT_TRUE(v.layer_conditions.empty());
}

TEST(Weights, TableRatesWithGammaPointNine) {
  // incremental rates 600, 390, 510, 575 kb, C = 5
  VideoSpec spec(5, 1, {Kilobits{600}, Kilobits{390}, Kilobits{510}, Kilobits{575}});
  StreamConfig c;
  c.beta = Rational(1001, 1000);
  c.gamma = Rational(9, 10);
  auto v = validate_weights(spec, c);
  ASSERT_EQ(v.layer_conditions.size(), 3u);
  Rational bsum = 0, b = 1;
  for (int i = 1; i <= 5; ++i) {
    b *= c.beta;
    bsum += b;
  }
  const Rational g = c.gamma;
  Rational rhs0 = (g * 390 + g * g * 510 + g * g * g * 575) * bsum;
  EXPECT_EQ(v.layer_conditions[0].lhs, Rational(600));
  EXPECT_EQ(v.layer_conditions[0].rhs, rhs0);
  EXPECT_FALSE(v.layer_conditions[0].holds);
  EXPECT_FALSE(v.valid);
}

TEST(Weights, DefaultsSatisfyEveryCondition) {
  VideoSpec spec(5, 1, {Kilobits{600}, Kilobits{390}, Kilobits{510}, Kilobits{575}});
  for (Mode m : {Mode::Skip, Mode::NoSkip}) {
    auto v = validate_weights(spec, default_config(spec, m, 2, 4));
    EXPECT_TRUE(v.valid) << v.summary();
  }
}

TEST(Weights, ZeroLambdaInvalidInNoSkip) {
  VideoSpec spec(3, 1, {Kilobits{600}});
  auto c = default_config(spec, Mode::NoSkip, 1, 4);
  c.lambda = 0;
  auto v = validate_weights(spec, c);
  EXPECT_FALSE(v.valid);
  ASSERT_TRUE(v.lambda_condition.has_value());
  EXPECT_FALSE(v.lambda_condition->holds);
}

TEST(Weights, PriorityConditionImpliesLayerDominance) {
  VideoSpec spec(4, 1, {Kilobits{300}, Kilobits{200}, Kilobits{400}});
  auto c = default_config(spec, Mode::Skip, 1, 4);
  // one chunk's base layer beats every enhancement layer of every chunk
  std::vector<Level> one_base{0, kSkipped, kSkipped, kSkipped};
  std::vector<Level> all_but_base_of_first{kSkipped, 2, 2, 2};
  std::vector<Level> rest_base{kSkipped, 0, 0, 0};
  Rational gain_base = objective_value(one_base, 0, spec, c);
  Rational gain_enh = objective_value(all_but_base_of_first, 0, spec, c) - objective_value(rest_base, 0, spec, c);
  EXPECT_GT(gain_base, gain_enh);
}

TEST(Objective, SkippedChunkIsZero) {
  VideoSpec spec(1, 1, {Kilobits{1000}});
  auto c = default_config(spec, Mode::Skip, 1, 4);
  EXPECT_EQ(objective_value({kSkipped}, 0, spec, c), Rational(0));
}

TEST(Objective, TwoChunksExact) {
  VideoSpec spec(2, 1, {Kilobits{1000}});
  StreamConfig c;
  c.beta = Rational(1001, 1000);
  c.gamma = Rational(1, 2);
  EXPECT_EQ(objective_value({0, 0}, 0, spec, c), parse_rational("2003.001"));
  c.mode = Mode::NoSkip;
  c.lambda = 10000;
  EXPECT_EQ(objective_value({0, 0}, 2, spec, c), parse_rational("-17996.999"));
}

TEST(Objective, PlanOverloadRejectsDecoderViolation) {
  VideoSpec spec(2, 1, {Kilobits{1000}, Kilobits{500}});
  auto c = default_config(spec, Mode::Skip, 1, 4);
  LayerPlan p;
  p.level = {1, 0};
  p.size = {1000, 1000};  // level 1 needs 1500
  EXPECT_THROW(objective_value(p, spec, c), InvalidInput);
}

TEST(Objective, AddingALayerStrictlyIncreases) {
  VideoSpec spec(3, 1, {Kilobits{300}, Kilobits{200}, Kilobits{100}});
  auto c = default_config(spec, Mode::Skip, 1, 4);
  std::vector<Level> lv{kSkipped, kSkipped, kSkipped};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int d = 0; d < 4; ++d) {
        std::vector<Level> x{a - 1, b - 1, d - 1};
        Rational base = objective_value(x, 0, spec, c);
        for (std::size_t k = 0; k < 3; ++k) {
          if (x[k] == 2) continue;
          auto y = x;
          ++y[k];
          EXPECT_GT(objective_value(y, 0, spec, c), base);
        }
      }
}

TEST(Objective, BitIdenticalAcrossRuns) {
  VideoSpec spec(6, 2, {Kilobits{1200}, Kilobits{780}});
  auto c = default_config(spec, Mode::NoSkip, 3, 6);
  std::vector<Level> lv{0, 1, 1, 0, 1, 0};
  EXPECT_EQ(format_rational(objective_value(lv, 3, spec, c)), format_rational(objective_value(lv, 3, spec, c)));
}

TEST(AbrMapping, Differences) {
  EXPECT_EQ(abr_rate_mapping({600}, 2), (std::vector<Kilobits>{1200}));
  EXPECT_EQ(abr_rate_mapping({600, 990, 1500, 2075}, 2), (std::vector<Kilobits>{1200, 780, 1020, 1150}));
  EXPECT_THROW(abr_rate_mapping({600, 600}, 2), InvalidInput);
  EXPECT_THROW(abr_rate_mapping({}, 2), InvalidInput);
}

TEST(Rationals, ParseAndFormat) {
  EXPECT_EQ(parse_rational("1001/1000"), Rational(1001, 1000));
  EXPECT_EQ(parse_rational("0.9"), Rational(9, 10));
  EXPECT_EQ(parse_rational("-2.5"), Rational(-5, 2));
  EXPECT_THROW(parse_rational("abc"), InvalidInput);
  EXPECT_THROW(parse_rational("1/0"), InvalidInput);
}
