#include "golden.hpp"
#include "support.hpp"
#include "svclbp/lbp_skip.hpp"
#include "svclbp/oracle.hpp"
#include "svclbp/validator.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace svclbp;
namespace fx = svclbp::testing;

namespace {

LayerPlan layer0(const VideoSpec& spec, const StreamConfig& c, const BandwidthTrace& tr) {
  auto state = make_scan_state(spec, c, tr);
  return backward_scan(0, spec, c, tr, state, empty_plan(spec, c));
}

}  // namespace

TEST(BackwardScan, BothChunksFit) {
  VideoSpec spec(2, 1, {Kilobits{1000}});
  auto c = default_config(spec, Mode::Skip, 1, 4);
  auto p = layer0(spec, c, BandwidthTrace({1000, 1000}));
  EXPECT_EQ(p.layer_set(0), (std::vector<ChunkIndex>{1, 2}));
  EXPECT_EQ(p.size, (std::vector<Kilobits>{1000, 1000}));
}

TEST(BackwardScan, FirstChunkHasNoBandwidth) {
  VideoSpec spec(2, 1, {Kilobits{1000}});
  auto c = default_config(spec, Mode::Skip, 1, 4);
  auto p = layer0(spec, c, BandwidthTrace({0, 1000}));
  EXPECT_EQ(p.layer_set(0), (std::vector<ChunkIndex>{2}));
  EXPECT_EQ(p.level_of(1), kSkipped);
}

TEST(BackwardScan, NoBandwidthAtAll) {
  VideoSpec spec(1, 1, {Kilobits{1000}});
  auto c = default_config(spec, Mode::Skip, 1, 4);
  auto p = layer0(spec, c, BandwidthTrace({0}));
  EXPECT_TRUE(p.layer_set(0).empty());
}

TEST(BackwardScan, BufferForcesSkipOfChunk4) {
  auto g = fx::golden_skip_chunk4();
  auto p = layer0(g.spec, g.config, g.trace);
  EXPECT_EQ(p.level_of(4), kSkipped);
  for (ChunkIndex i : {1, 2, 3, 5, 6, 7, 8, 9, 10}) EXPECT_EQ(p.level_of(i), 0) << i;
}

TEST(BackwardScan, RejectsDecoderViolation) {
  VideoSpec spec(2, 1, {Kilobits{1000}, Kilobits{500}});
  auto c = default_config(spec, Mode::Skip, 1, 4);
  BandwidthTrace tr({1000, 1000});
  auto state = make_scan_state(spec, c, tr);
  auto p = empty_plan(spec, c);
  p.level[0] = 1;
  p.size[0] = 1000;
  EXPECT_THROW(backward_scan(1, spec, c, tr, state, p), InvalidInput);
}

TEST(ForwardScan, OneSlotCarriesBoth) {
  VideoSpec spec(2, 1, {Kilobits{1000}});
  auto c = default_config(spec, Mode::Skip, 1, 4);
  BandwidthTrace tr({2000, 2000});
  auto p = empty_plan(spec, c);
  p.level = {0, 0};
  p.size = {1000, 1000};
  auto f = forward_scan(spec, c, tr, p);
  EXPECT_EQ(f.lower_deadline, (std::vector<Slot>{1, 1}));
  EXPECT_EQ(f.head_fetch, (std::vector<Kilobits>{1000, 1000}));
  EXPECT_EQ(f.residual, (std::vector<Kilobits>{0, 2000}));
}

TEST(ForwardScan, OneChunkPerSlot) {
  VideoSpec spec(2, 1, {Kilobits{1000}});
  auto c = default_config(spec, Mode::Skip, 1, 4);
  auto p = empty_plan(spec, c);
  p.level = {0, 0};
  p.size = {1000, 1000};
  auto f = forward_scan(spec, c, BandwidthTrace({1000, 1000}), p);
  EXPECT_EQ(f.lower_deadline, (std::vector<Slot>{1, 2}));
  EXPECT_EQ(f.residual, (std::vector<Kilobits>{0, 0}));
}

TEST(ForwardScan, SkippedChunkUntouched) {
  VideoSpec spec(1, 1, {Kilobits{1000}});
  auto c = default_config(spec, Mode::Skip, 1, 4);
  auto f = forward_scan(spec, c, BandwidthTrace({700}), empty_plan(spec, c));
  EXPECT_EQ(f.lower_deadline, (std::vector<Slot>{0}));
  EXPECT_EQ(f.head_fetch, (std::vector<Kilobits>{0}));
  EXPECT_EQ(f.residual, (std::vector<Kilobits>{700}));
  EXPECT_TRUE(f.schedule.empty());
}

TEST(PlanSkip, GoldenSkipsChunk4) {
  auto g = fx::golden_skip_chunk4();
  auto p = plan_offline_skip(g.spec, g.config, g.trace);
  EXPECT_EQ(p.level, fx::golden_skip_chunk4_levels());
  EXPECT_EQ(p.skipped(), (std::vector<ChunkIndex>{4}));
  EXPECT_TRUE(validate_plan(p, g.spec, g.config, g.trace).ok());
}

TEST(PlanSkip, GoldenTraceIsOracleCertified) {
  auto g = fx::golden_skip_chunk4();
  auto o = enumerate_optimal_skip(g.spec, g.config, g.trace);
  ASSERT_EQ(o.optimal.size(), 1u);
  EXPECT_EQ(o.optimal.front(), fx::golden_skip_chunk4_levels());
}

TEST(PlanSkip, UnconstrainedSingleChunk) {
  VideoSpec spec(1, 1, {Kilobits{1000}, Kilobits{500}});
  auto c = default_config(spec, Mode::Skip, 1, 4);
  auto p = plan_offline_skip(spec, c, BandwidthTrace({1'000'000}));
  EXPECT_EQ(p.level, (std::vector<Level>{1}));
}

TEST(PlanSkip, RejectsInvalidWeights) {
  VideoSpec spec(3, 1, {Kilobits{600}, Kilobits{600}});
  auto c = default_config(spec, Mode::Skip, 1, 4);
  c.gamma = Rational(99, 100);
  EXPECT_THROW(plan_offline_skip(spec, c, BandwidthTrace({5000, 5000, 5000})), ValidationError);
}

TEST(PlanSkip, ShortTraceIsZeroExtended) {
  VideoSpec spec(3, 1, {Kilobits{1000}});
  auto c = default_config(spec, Mode::Skip, 1, 4);
  auto p = plan_offline_skip(spec, c, BandwidthTrace({3000}));
  EXPECT_EQ(p.level, (std::vector<Level>{0, 0, 0}));
  auto q = plan_offline_skip(spec, c, BandwidthTrace({1000, 1000, 1000, 99999, 99999}));
  EXPECT_EQ(q.level, (std::vector<Level>{0, 0, 0}));
}

TEST(PlanSkip, SizesArePrefixSums) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    auto in = fx::random_instance(seed, Mode::Skip, {8, 2, true});
    auto p = plan_offline_skip(in.spec, in.config, in.trace);
    for (ChunkIndex i = 1; i <= in.spec.num_chunks(); ++i) {
      EXPECT_EQ(p.size_of(i), in.spec.cumulative_size(p.level_of(i), i));
      if (p.size_of(i) > 0) {
        EXPECT_LE(p.lower_deadline[static_cast<std::size_t>(i - 1)], p.deadline_of(i));
      }
    }
    EXPECT_TRUE(validate_plan(p, in.spec, in.config, in.trace).ok()) << seed;
  }
}

TEST(PlanSkip, LoopCountersWithinBound) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto in = fx::random_instance(seed, Mode::Skip);
    auto p = plan_offline_skip(in.spec, in.config, in.trace);
    const int C = in.spec.num_chunks();
    const std::int64_t bound = C + deadline_of(C, in.spec, in.config) + 1;
    ASSERT_EQ(p.backward_iterations.size(), static_cast<std::size_t>(in.spec.num_layers()));
    for (auto v : p.backward_iterations) EXPECT_LE(v, bound);
    for (auto v : p.forward_iterations) EXPECT_LE(v, bound);
  }
}

// Any in-order schedule of the same sizes that meets the constraints starts
// every chunk no earlier than the forward scan does.
TEST(PlanSkip, ForwardScanStartsEarliest) {
  std::mt19937_64 rng(5);
  int compared = 0;
  for (std::uint64_t seed = 1; seed <= 80; ++seed) {
    auto in = fx::random_instance(seed, Mode::Skip);
    auto p = plan_offline_skip(in.spec, in.config, in.trace);
    const auto C = static_cast<std::size_t>(in.spec.num_chunks());
    const Slot L = in.spec.chunk_duration();
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<Slot> start(C, 0);
      std::vector<Kilobits> left(p.size);
      std::size_t cur = 0;
      bool feasible = true;
      for (Slot t = 1; t <= p.deadline.back() && feasible; ++t) {
        Kilobits cap = in.trace.at(t) * std::uniform_int_distribution<Kilobits>(1, 4)(rng) / 4;
        while (cur < C) {
          if (left[cur] == 0) {
            ++cur;
            continue;
          }
          if (t > p.deadline[cur]) {
            feasible = false;
            break;
          }
          if (cap == 0) break;
          if (start[cur] == 0) {
            Slot occ = L;
            for (std::size_t m = 0; m < cur; ++m) occ += (start[m] > 0 && p.deadline[m] > t) ? L : 0;
            if (occ > in.config.buffer_capacity) break;
            start[cur] = t;
          }
          Kilobits take = std::min(cap, left[cur]);
          left[cur] -= take;
          cap -= take;
          if (left[cur] > 0) break;
        }
      }
      for (std::size_t k = 0; k < C; ++k) feasible = feasible && left[k] == 0;
      if (!feasible) continue;
      ++compared;
      for (std::size_t k = 0; k < C; ++k) {
        if (p.size[k] > 0) {
          EXPECT_LE(p.lower_deadline[k], start[k]) << "seed " << seed << " chunk " << k + 1;
        }
      }
    }
  }
  EXPECT_GT(compared, 100);
}
