#pragma once

// Seeded random small instances shared by the property tests and the
// acceptance runner.

#include "svclbp/model.hpp"
#include "svclbp/types.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace svclbp::testing {

struct Instance {
  VideoSpec spec;
  StreamConfig config;
  BandwidthTrace trace;
};

struct InstanceShape {
  int max_chunks = 8;
  int max_enh_layers = 2;
  bool vbr = false;
};

inline Instance random_instance(std::uint64_t seed, Mode mode, InstanceShape shape = {}) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };
  const int C = static_cast<int>(pick(1, shape.max_chunks));
  const int N = static_cast<int>(pick(0, shape.max_enh_layers));
  const Slot L = pick(1, 2);
  std::vector<LayerSizes> layers;
  for (int n = 0; n <= N; ++n) {
    if (shape.vbr) {
      std::vector<Kilobits> per(static_cast<std::size_t>(C));
      for (auto& y : per) y = 100 * pick(3, 12);
      layers.emplace_back(per);
    } else {
      layers.emplace_back(Kilobits{100 * pick(3, 12)});
    }
  }
  VideoSpec spec(C, L, layers);
  const Slot s = pick(mode == Mode::Skip ? 0 : 1, 4);
  const Slot Bm = L * pick(2, 5);
  const Slot horizon = static_cast<Slot>(C - 1) * L + s + (mode == Mode::NoSkip ? 6 : 0);
  std::vector<Kilobits> bw(static_cast<std::size_t>(std::max<Slot>(horizon, 1)));
  for (auto& b : bw) b = pick(0, 4) == 0 ? 0 : 100 * pick(1, 25);
  if (mode == Mode::NoSkip) {
    // guarantee the base layers are eventually fetchable
    Kilobits base = 0;
    for (ChunkIndex i = 1; i <= C; ++i) base += spec.layer_size(0, i);
    bw.push_back(base);
  }
  StreamConfig config = default_config(spec, mode, s, Bm);
  return {std::move(spec), std::move(config), BandwidthTrace(std::move(bw))};
}

}  // namespace svclbp::testing
