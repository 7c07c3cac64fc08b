#include "golden.hpp"
#include "support.hpp"
#include "svclbp/lbp_noskip.hpp"
#include "svclbp/lbp_skip.hpp"
#include "svclbp/oracle.hpp"
#include "svclbp/playback_sim.hpp"

#include <gtest/gtest.h>

using namespace svclbp;
namespace fx = svclbp::testing;

TEST(SkipOracle, AbundantBandwidthFullQuality) {
  VideoSpec spec(1, 1, {Kilobits{1000}, Kilobits{500}});
  auto c = default_config(spec, Mode::Skip, 1, 4);
  auto o = enumerate_optimal_skip(spec, c, BandwidthTrace({100000}));
  ASSERT_EQ(o.optimal.size(), 1u);
  EXPECT_EQ(o.optimal.front(), (std::vector<Level>{1}));
  EXPECT_EQ(o.min_skips, 0);
  EXPECT_EQ(o.feasible_count, 3u);
}

TEST(SkipOracle, SkipsFirstChunk) {
  VideoSpec spec(2, 1, {Kilobits{1000}});
  auto c = default_config(spec, Mode::Skip, 1, 4);
  auto o = enumerate_optimal_skip(spec, c, BandwidthTrace({0, 1000}));
  ASSERT_EQ(o.optimal.size(), 1u);
  EXPECT_EQ(o.optimal.front(), (std::vector<Level>{kSkipped, 0}));
  EXPECT_EQ(o.min_skips, 1);
  EXPECT_EQ(o.best_objective, objective_value({kSkipped, 0}, 0, spec, c));
}

TEST(SkipOracle, RejectsOverLimit) {
  VideoSpec big(11, 1, {Kilobits{100}});
  EXPECT_THROW(enumerate_optimal_skip(big, default_config(big, Mode::Skip, 1, 4), BandwidthTrace({1})), InvalidInput);
  VideoSpec deep(2, 1, {Kilobits{100}, Kilobits{100}, Kilobits{100}, Kilobits{100}});
  EXPECT_THROW(enumerate_optimal_skip(deep, default_config(deep, Mode::Skip, 1, 4), BandwidthTrace({1})),
               InvalidInput);
  VideoSpec ok(12, 1, {Kilobits{100}});
  EXPECT_NO_THROW(
      enumerate_optimal_skip(ok, default_config(ok, Mode::Skip, 1, 4), BandwidthTrace({1}), OracleLimits{12, 2}));
}

TEST(SkipOracle, PlannerObjectiveIsOptimal) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto in = fx::random_instance(seed, Mode::Skip);
    auto o = enumerate_optimal_skip(in.spec, in.config, in.trace);
    auto p = plan_offline_skip(in.spec, in.config, in.trace);
    EXPECT_EQ(objective_value(p, in.spec, in.config), o.best_objective) << seed;
  }
}

// An assignment is oracle-feasible exactly when executing it loses nothing.
TEST(SkipOracle, FeasibilityAgreesWithExecution) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto in = fx::random_instance(seed, Mode::Skip, {5, 1, false});
    const int C = in.spec.num_chunks();
    const int N = in.spec.num_enh_layers();
    std::vector<Level> lv(static_cast<std::size_t>(C), kSkipped);
    for (;;) {
      LayerPlan p = empty_plan(in.spec, in.config);
      p.level = lv;
      for (ChunkIndex i = 1; i <= C; ++i) p.size[static_cast<std::size_t>(i - 1)] = in.spec.cumulative_size(lv[i - 1], i);
      auto log = execute_plan(p, in.spec, in.config, in.trace);
      EXPECT_EQ(oracle_feasible_skip(in.spec, in.config, in.trace, lv), log.levels() == lv) << seed;
      std::size_t k = 0;
      while (k < lv.size() && lv[k] == N) lv[k++] = kSkipped;
      if (k == lv.size()) break;
      ++lv[k];
    }
  }
}

TEST(NoSkipOracle, GoldenMinimumStall) {
  auto g = fx::golden_stall_startup();
  auto o = enumerate_optimal_noskip(g.spec, g.config, g.trace);
  EXPECT_EQ(o.min_stall, 5);
  ASSERT_EQ(o.optimal.size(), 1u);
  EXPECT_EQ(o.optimal.front(), std::vector<Level>(7, 0));
  EXPECT_EQ(oracle_stall(g.spec, g.config, g.trace, std::vector<Level>(7, 0)), std::optional<Slot>(5));
}

TEST(NoSkipOracle, StallEqualsForwardRecurrence) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto in = fx::random_instance(seed, Mode::NoSkip);
    auto o = enumerate_optimal_noskip(in.spec, in.config, in.trace);
    EXPECT_EQ(o.min_stall, base_forward_stalls(in.spec, in.config, in.trace).total) << seed;
    EXPECT_GE(o.feasible_count, 1u);
  }
}
