#include "golden.hpp"
#include "support.hpp"
#include "svclbp/lbp_noskip.hpp"
#include "svclbp/oracle.hpp"
#include "svclbp/validator.hpp"

#include <gtest/gtest.h>

using namespace svclbp;
namespace fx = svclbp::testing;

TEST(ForwardStalls, TwoSlowChunks) {
  VideoSpec spec(2, 1, {Kilobits{2000}});
  auto c = default_config(spec, Mode::NoSkip, 1, 100);
  auto st = base_forward_stalls(spec, c, BandwidthTrace({1000, 1000, 1000, 1000}));
  EXPECT_EQ(st.d, (std::vector<Slot>{1, 2}));
  EXPECT_EQ(st.total, 2);
}

TEST(ForwardStalls, EverythingInFirstSlot) {
  VideoSpec spec(3, 1, {Kilobits{2000}});
  auto c = default_config(spec, Mode::NoSkip, 1, 3);
  auto st = base_forward_stalls(spec, c, BandwidthTrace({6000}));
  EXPECT_EQ(st.d, (std::vector<Slot>{0, 0, 0}));
}

TEST(ForwardStalls, GoldenTotalFive) {
  auto g = fx::golden_stall_startup();
  auto st = base_forward_stalls(g.spec, g.config, g.trace);
  EXPECT_EQ(st.d, (std::vector<Slot>{0, 0, 1, 1, 2, 3, 5}));
  EXPECT_EQ(st.total, 5);
  EXPECT_EQ(enumerate_optimal_noskip(g.spec, g.config, g.trace).min_stall, 5);
}

TEST(ForwardStalls, UnfetchableVideoIsAnError) {
  VideoSpec spec(2, 1, {Kilobits{2000}});
  auto c = default_config(spec, Mode::NoSkip, 1, 4);
  EXPECT_THROW(base_forward_stalls(spec, c, BandwidthTrace({1000, 1000})), ValidationError);
  EXPECT_THROW(base_forward_stalls(spec, c, BandwidthTrace({0})), ValidationError);
}

TEST(Reposition, GoldenStallsMoveToStartup) {
  auto g = fx::golden_stall_startup();
  auto st = base_backward_reposition(g.spec, g.config, g.trace, base_forward_stalls(g.spec, g.config, g.trace));
  EXPECT_EQ(st.d_f, (std::vector<Slot>(7, 5)));
  EXPECT_EQ(g.config.startup_delay + st.d_f.front(), 6);
}

TEST(Reposition, SmallerBufferKeepsAMidStreamStall) {
  auto g = fx::golden_stall_startup(3);
  auto st = base_backward_reposition(g.spec, g.config, g.trace, base_forward_stalls(g.spec, g.config, g.trace));
  EXPECT_EQ(st.d_f.back(), 5);
  EXPECT_EQ(st.d_f.front(), 4);
  EXPECT_EQ(st.d_f[1] - st.d_f[0], 1);  // between chunks 1 and 2
  EXPECT_EQ(enumerate_optimal_noskip(g.spec, g.config, g.trace).min_stall, 5);
}

TEST(Reposition, ZeroStallStaysZero) {
  VideoSpec spec(3, 1, {Kilobits{1000}});
  auto c = default_config(spec, Mode::NoSkip, 1, 3);
  BandwidthTrace tr({1000, 1000, 1000});
  auto st = base_backward_reposition(spec, c, tr, base_forward_stalls(spec, c, tr));
  EXPECT_EQ(st.d, (std::vector<Slot>{0, 0, 0}));
  EXPECT_EQ(st.d_f, st.d);
}

TEST(Reposition, RejectsMismatchedSchedule) {
  VideoSpec spec(3, 1, {Kilobits{1000}});
  auto c = default_config(spec, Mode::NoSkip, 1, 3);
  StallSchedule bad;
  bad.d = {0, 0};
  EXPECT_THROW(base_backward_reposition(spec, c, BandwidthTrace({1000}), bad), InvalidInput);
}

// Stalls only move earlier and the total is preserved.
TEST(Reposition, PreservesTotalAndMovesEarlier) {
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    auto in = fx::random_instance(seed, Mode::NoSkip);
    if (in.config.buffer_capacity < in.spec.chunk_duration()) continue;
    auto fwd = base_forward_stalls(in.spec, in.config, in.trace);
    auto st = base_backward_reposition(in.spec, in.config, in.trace, fwd);
    ASSERT_EQ(st.d_f.size(), st.d.size());
    EXPECT_EQ(st.d_f.back(), st.d.back()) << seed;
    for (std::size_t k = 0; k < st.d.size(); ++k) {
      EXPECT_GE(st.d_f[k], st.d[k]) << seed;
      if (k > 0) {
        EXPECT_GE(st.d[k], st.d[k - 1]);
        EXPECT_GE(st.d_f[k], st.d_f[k - 1]);
      }
    }
  }
}

TEST(PlanNoSkip, AbundantBandwidth) {
  VideoSpec spec(4, 1, {Kilobits{1000}, Kilobits{500}, Kilobits{250}});
  auto c = default_config(spec, Mode::NoSkip, 1, 4);
  auto p = plan_offline_noskip(spec, c, BandwidthTrace(std::vector<Kilobits>(5, 100000)));
  EXPECT_EQ(p.level, (std::vector<Level>(4, 2)));
  EXPECT_EQ(p.total_stall(), 0);
}

TEST(PlanNoSkip, GoldenBaseOnly) {
  auto g = fx::golden_stall_startup();
  auto p = plan_offline_noskip(g.spec, g.config, g.trace);
  EXPECT_EQ(p.level, (std::vector<Level>(7, 0)));
  EXPECT_EQ(p.stall_before, (std::vector<Slot>(7, 5)));
  EXPECT_EQ(p.deadline_of(7), 12);  // (7-1)L + s + d(7)
  EXPECT_TRUE(validate_plan(p, g.spec, g.config, g.trace).ok());
}

TEST(PlanNoSkip, RejectsSkipConfig) {
  auto g = fx::golden_stall_startup();
  auto c = g.config;
  c.mode = Mode::Skip;
  EXPECT_THROW(plan_offline_noskip(g.spec, c, g.trace), InvalidInput);
}

TEST(PlanNoSkip, RejectsWeakLambda) {
  auto g = fx::golden_stall_startup();
  auto c = g.config;
  c.lambda = 1;
  EXPECT_THROW(plan_offline_noskip(g.spec, c, g.trace), ValidationError);
}

TEST(PlanNoSkip, BaseLayerNeverSkipped) {
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    auto in = fx::random_instance(seed, Mode::NoSkip, {8, 2, seed % 2 == 0});
    auto p = plan_offline_noskip(in.spec, in.config, in.trace);
    for (Level l : p.level) EXPECT_GE(l, 0) << seed;
    EXPECT_EQ(p.total_stall(), base_forward_stalls(in.spec, in.config, in.trace).total);
    EXPECT_TRUE(validate_plan(p, in.spec, in.config, in.trace).ok()) << seed;
  }
}
