#include "golden.hpp"
#include "support.hpp"
#include "svclbp/lbp_noskip.hpp"
#include "svclbp/online_engine.hpp"
#include "svclbp/validator.hpp"

#include <gtest/gtest.h>

using namespace svclbp;
namespace fx = svclbp::testing;

TEST(Degrade, Rules) {
  EXPECT_EQ(degrade_for_low_buffer(2, 4, 5), 1);
  EXPECT_EQ(degrade_for_low_buffer(0, 0, 5), 0);
  EXPECT_EQ(degrade_for_low_buffer(3, 10, 5), 3);
  EXPECT_EQ(degrade_for_low_buffer(kSkipped, 0, 5), kSkipped);
}

TEST(OnlineConfigTest, Validation) {
  StreamConfig c;
  c.buffer_capacity = 10;
  OnlineConfig o;
  EXPECT_NO_THROW(validate_online(o, c));
  EXPECT_EQ(o.resolved_buffer_low(c), 5);
  o.period = 30;
  EXPECT_THROW(validate_online(o, c), InvalidInput);
  o = {};
  o.window = 0;
  EXPECT_THROW(validate_online(o, c), InvalidInput);
  o = {};
  o.buffer_low = 11;
  EXPECT_THROW(validate_online(o, c), InvalidInput);
  o = {};
  o.mode = Mode::NoSkip;
  EXPECT_THROW(validate_online(o, c), InvalidInput);
}

TEST(Online, FullWindowOracleMatchesOffline) {
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    auto in = fx::random_instance(seed, Mode::Skip, {8, 2, seed % 3 == 0});
    auto plan = plan_offline_skip(in.spec, in.config, in.trace);
    const Slot dc = deadline_of(in.spec.num_chunks(), in.spec, in.config);
    for (Slot period : {Slot{1}, std::max<Slot>(1, dc / 2), std::max<Slot>(1, dc)}) {
      OnlineConfig oc;
      oc.window = std::max<Slot>(1, dc);
      oc.period = period;
      oc.buffer_low = 0;
      OraclePredictor pred(in.trace);
      auto log = run_online(in.spec, in.config, oc, pred, in.trace);
      EXPECT_EQ(log.levels(), plan.level) << "seed " << seed << " period " << period;
    }
  }
}

TEST(Online, GoldenSkipInstance) {
  auto g = fx::golden_skip_chunk4();
  OnlineConfig oc;
  oc.window = 12;
  oc.period = 3;
  oc.buffer_low = 0;
  OraclePredictor pred(g.trace);
  auto log = run_online(g.spec, g.config, oc, pred, g.trace);
  EXPECT_EQ(log.levels(), fx::golden_skip_chunk4_levels());
  EXPECT_FALSE(log.replans.empty());
  EXPECT_EQ(log.replans.front().slot, 1);
}

TEST(Online, SessionsSatisfyConstraints) {
  for (std::uint64_t seed = 1; seed <= 120; ++seed) {
    for (Mode m : {Mode::Skip, Mode::NoSkip}) {
      auto in = fx::random_instance(seed, m);
      OnlineConfig oc;
      oc.mode = m;
      oc.window = 5;
      oc.period = 2;
      HarmonicMeanPredictor hm(5, 500);
      auto log = run_online(in.spec, in.config, oc, hm, in.trace);
      auto v = validate_session(log, in.spec, in.config);
      EXPECT_TRUE(v.ok()) << seed << " " << to_string(m) << ": " << v.summary();
      if (m == Mode::NoSkip && !log.truncated) {
        EXPECT_EQ(log.skip_count(), 0) << seed;
      }
      for (const auto& r : log.chunks) {
        if (r.abandoned && r.played) {
          EXPECT_GE(r.final_level, 0);
        }
      }
    }
  }
}

TEST(Online, ReplanWindowsMoveForward) {
  auto g = fx::golden_square_wave();
  OnlineConfig oc;
  oc.window = 10;
  oc.period = 4;
  NoisyPredictor pred(g.trace, {0.3}, 9);
  auto log = run_online(g.spec, g.config, oc, pred, g.trace);
  ASSERT_GE(log.replans.size(), 2u);
  for (std::size_t k = 0; k < log.replans.size(); ++k) {
    const auto& r = log.replans[k];
    EXPECT_LE(r.sc, r.ec);
    EXPECT_EQ(r.levels.size(), static_cast<std::size_t>(r.ec - r.sc + 1));
    if (k > 0) {
      EXPECT_GE(r.sc, log.replans[k - 1].sc);
      EXPECT_GT(r.slot, log.replans[k - 1].slot);
    }
  }
  EXPECT_TRUE(validate_session(log, g.spec, g.config).ok());
}

TEST(Online, LowBufferThresholdDegradesDecisions) {
  auto g = fx::golden_square_wave();
  OnlineConfig relaxed, strict;
  relaxed.buffer_low = 0;
  strict.buffer_low = g.config.buffer_capacity;
  OraclePredictor p1(g.trace), p2(g.trace);
  auto a = run_online(g.spec, g.config, relaxed, p1, g.trace);
  auto b = run_online(g.spec, g.config, strict, p2, g.trace);
  // the first replan sees the same empty buffer in both runs
  ASSERT_FALSE(a.replans.empty());
  ASSERT_FALSE(b.replans.empty());
  const auto& ra = a.replans.front();
  const auto& rb = b.replans.front();
  ASSERT_EQ(ra.sc, rb.sc);
  ASSERT_EQ(ra.ec, rb.ec);
  bool some_cut = false;
  for (std::size_t k = 0; k < ra.levels.size(); ++k) {
    EXPECT_EQ(rb.levels[k], degrade_for_low_buffer(ra.levels[k], 0, strict.resolved_buffer_low(g.config)));
    some_cut = some_cut || rb.levels[k] < ra.levels[k];
  }
  EXPECT_TRUE(some_cut);
  EXPECT_TRUE(validate_session(b, g.spec, g.config).ok());
}

TEST(Online, NoSkipGoldenMatchesOfflineStall) {
  auto g = fx::golden_stall_startup();
  OnlineConfig oc;
  oc.mode = Mode::NoSkip;
  oc.window = 14;
  oc.period = 14;
  oc.buffer_low = 0;
  OraclePredictor pred(g.trace);
  auto log = run_online(g.spec, g.config, oc, pred, g.trace);
  EXPECT_EQ(log.stall_duration, base_forward_stalls(g.spec, g.config, g.trace).total);
  EXPECT_EQ(log.skip_count(), 0);
}

TEST(Online, RejectsInvalidWeights) {
  auto g = fx::golden_skip_chunk4();
  auto c = g.config;
  c.gamma = Rational(99, 100);
  OraclePredictor pred(g.trace);
  EXPECT_THROW(run_online(g.spec, c, OnlineConfig{}, pred, g.trace), ValidationError);
}
