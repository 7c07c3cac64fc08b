#pragma once

// Comparison policies. All of them run on the playback simulator, so the
// bandwidth, buffer and deadline rules and the accounting are the same as for
// the planner.
//
// BBA's step map, NMS's estimator and the slope rule are reconstructions from
// short descriptions; their constants are the defaults below.

#include "svclbp/playback_sim.hpp"
#include "svclbp/types.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace svclbp {

namespace detail {

/// First chunk that has not been started and has not played, or 0.
inline ChunkIndex next_unstarted(const SimulatorState& st) {
  for (ChunkIndex i = st.next_to_play(); i <= st.num_chunks(); ++i) {
    if (!st.started(i)) return i;
  }
  return 0;
}

/// Earliest started, unplayed chunk whose base layer is incomplete, or 0.
inline ChunkIndex partial_base(const SimulatorState& st) {
  for (ChunkIndex i = st.next_to_play(); i <= st.num_chunks(); ++i) {
    if (st.started(i) && st.complete_level(i) == kSkipped) return i;
  }
  return 0;
}

/// Earliest buffered chunk at the lowest complete level below the top, with
/// the level it should be raised to; chunks <= `after` are ignored.
inline std::optional<FetchRequest> lowest_backfill(const SimulatorState& st, ChunkIndex after = 0) {
  std::optional<FetchRequest> best;
  for (ChunkIndex i = std::max(st.next_to_play(), after + 1); i <= st.num_chunks(); ++i) {
    if (!st.started(i)) continue;
    Level l = st.complete_level(i);
    if (l < 0 || l >= st.spec().top_level()) continue;
    if (!best || l + 1 < best->target) best = FetchRequest{i, l + 1};
  }
  return best;
}

/// Base layer of the in-flight chunk, else of the next chunk, if the buffer allows.
inline std::optional<FetchRequest> next_base(const SimulatorState& st) {
  if (ChunkIndex p = partial_base(st)) return FetchRequest{p, 0};
  ChunkIndex n = next_unstarted(st);
  if (n != 0 && st.may_start(n)) return FetchRequest{n, 0};
  return std::nullopt;
}

/// Sequential policies fetch one chunk at a time to a level chosen when
/// the chunk starts.
class SequentialPolicy : public FetchPolicy {
 public:
  std::optional<FetchRequest> next_request(SimulatorState& st) override {
    for (ChunkIndex i = std::max(cursor_, st.next_to_play()); i <= st.num_chunks(); ++i) {
      cursor_ = i;
      if (!st.started(i)) {
        if (!st.may_start(i)) return std::nullopt;
        target_ = choose(st, i);
      }
      if (st.delivered(i) >= st.spec().cumulative_size(target_, i)) continue;
      return FetchRequest{i, target_};
    }
    return std::nullopt;
  }

 protected:
  virtual Level choose(const SimulatorState& st, ChunkIndex i) = 0;

 private:
  ChunkIndex cursor_ = 1;
  Level target_ = 0;
};

}  // namespace detail

/// Baseline 1, horizontal: base layers as far ahead as the buffer allows;
/// otherwise raise buffered chunks one layer at a time, lowest layer first.
class HorizontalPolicy : public FetchPolicy {
 public:
  std::string name() const override { return "baseline1"; }
  std::optional<FetchRequest> next_request(SimulatorState& st) override {
    if (auto r = detail::next_base(st)) return r;
    return detail::lowest_backfill(st);
  }
};

/// Baseline 2, vertical: every layer of chunk i before chunk i+1.
class VerticalPolicy : public detail::SequentialPolicy {
 public:
  std::string name() const override { return "baseline2"; }

 protected:
  Level choose(const SimulatorState& st, ChunkIndex) override { return st.spec().top_level(); }
};

/// Baseline 3, hybrid: all layers of the chunk about to play, then base
/// layers of later chunks, then their higher layers.
class HybridPolicy : public FetchPolicy {
 public:
  std::string name() const override { return "baseline3"; }
  std::optional<FetchRequest> next_request(SimulatorState& st) override {
    const ChunkIndex head = st.next_to_play();
    const Level top = st.spec().top_level();
    if (st.complete_level(head) < top || st.delivered(head) < st.spec().cumulative_size(top, head)) {
      if (st.started(head) || st.may_start(head)) return FetchRequest{head, top};
      return std::nullopt;
    }
    if (auto r = detail::next_base(st)) return r;
    return detail::lowest_backfill(st, head);
  }
};

/// Buffer-based: base layer below `lower`, every layer above `upper`, and a
/// linear step map in between.
inline Level bba_level(Slot buffer, Slot lower, Slot upper, int num_enh_layers) {
  if (buffer < lower) return 0;
  if (buffer > upper || upper <= lower) return num_enh_layers;
  Level l = static_cast<Level>(((buffer - lower) * (num_enh_layers + 1)) / (upper - lower));
  return std::clamp<Level>(l, 0, num_enh_layers);
}

class BbaPolicy : public detail::SequentialPolicy {
 public:
  BbaPolicy(Slot lower, Slot upper) : lower_(lower), upper_(upper) {
    detail::require(lower >= 0 && upper >= lower, "BBA thresholds must satisfy 0 <= lower <= upper");
  }
  std::string name() const override { return "bba"; }

 protected:
  Level choose(const SimulatorState& st, ChunkIndex) override {
    return bba_level(st.buffer_level(), lower_, upper_, st.spec().num_enh_layers());
  }

 private:
  Slot lower_, upper_;
};

/// Highest level whose cumulative rate (kbps) does not exceed `estimate`.
inline Level rate_level(const VideoSpec& spec, ChunkIndex i, Kilobits estimate_kbps, int slot_seconds) {
  Level best = 0;
  const Slot secs = spec.chunk_duration() * slot_seconds;
  for (Level n = 0; n <= spec.top_level(); ++n) {
    if (spec.cumulative_size(n, i) <= estimate_kbps * secs) best = n;
  }
  return best;
}

/// Instantaneous estimate from the last fetched chunk's download rate, forced to the base
/// layer when the buffer is below `low_buffer` or nothing was measured yet.
class NmsPolicy : public detail::SequentialPolicy {
 public:
  explicit NmsPolicy(Slot low_buffer) : low_(low_buffer) {}
  std::string name() const override { return "nms"; }

 protected:
  Level choose(const SimulatorState& st, ChunkIndex i) override {
    if (st.buffer_level() < low_) return 0;
    auto est = last_throughput(st, i);
    if (!est) return 0;
    return rate_level(st.spec(), i, *est, st.log().slot_seconds);
  }

 private:
  // Throughput of the previous fetched chunk: its kb over the time its
  // download took, a slot carrying x of its c kb counting as x/c of a slot.
  static std::optional<Kilobits> last_throughput(const SimulatorState& st, ChunkIndex i) {
    for (ChunkIndex k = i - 1; k >= 1; --k) {
      const auto& r = st.record(k);
      if (r.first_slot == 0) continue;
      Rational slots = 0;
      for (const auto& t : st.log().transfers) {
        if (t.chunk != k) continue;
        Kilobits cap = t.slot < st.slot() ? st.observed()[static_cast<std::size_t>(t.slot - 1)] : slot_capacity(st);
        if (cap > 0) slots += Rational(t.kb, cap);
      }
      if (slots == 0) return std::nullopt;
      Rational kbps = Rational(r.delivered) / (slots * st.log().slot_seconds);
      return static_cast<Kilobits>(boost::multiprecision::numerator(kbps) / boost::multiprecision::denominator(kbps));
    }
    return std::nullopt;
  }
  static Kilobits slot_capacity(const SimulatorState& st) {
    Kilobits used = 0;
    for (auto it = st.log().transfers.rbegin(); it != st.log().transfers.rend() && it->slot == st.slot(); ++it) {
      used += it->kb;
    }
    return used + st.budget_left();
  }
  Slot low_;
};

/// Prefetch-or-backfill: backfilling layer n is chosen when the buffer is at
/// least max(B_m * (1 + slope * (N + 1 - n)), 2L), or when no prefetch is
/// possible. A steeper (more negative) slope backfills more.
class SlopePolicy : public FetchPolicy {
 public:
  explicit SlopePolicy(double slope) : slope_(slope) {}
  std::string name() const override { return "slope"; }

  static bool prefer_backfill(Slot buffer, Slot buffer_capacity, Slot chunk_duration, int num_enh_layers, Level n,
                              double slope) {
    double theta = static_cast<double>(buffer_capacity) * (1.0 + slope * (num_enh_layers + 1 - n));
    return static_cast<double>(buffer) >= std::max(theta, static_cast<double>(2 * chunk_duration));
  }

  std::optional<FetchRequest> next_request(SimulatorState& st) override {
    if (ChunkIndex p = detail::partial_base(st)) return FetchRequest{p, 0};
    auto back = detail::lowest_backfill(st);
    ChunkIndex n = detail::next_unstarted(st);
    bool can_prefetch = n != 0 && st.may_start(n);
    if (back && (!can_prefetch || prefer_backfill(st.buffer_level(), st.config().buffer_capacity,
                                                  st.spec().chunk_duration(), st.spec().num_enh_layers(),
                                                  back->target, slope_))) {
      return back;
    }
    if (can_prefetch) return FetchRequest{n, 0};
    return std::nullopt;
  }

 private:
  double slope_;
};

struct BaselineParams {
  Slot bba_lower = 40;
  Slot bba_upper = 80;
  std::optional<Slot> nms_low_buffer;   // B_m / 2 when unset
  double slope = -0.07;
};

inline SessionLog run_baseline1(const VideoSpec& spec, const StreamConfig& config, const BandwidthTrace& truth) {
  HorizontalPolicy p;
  return simulate(spec, config, truth, p);
}
inline SessionLog run_baseline2(const VideoSpec& spec, const StreamConfig& config, const BandwidthTrace& truth) {
  VerticalPolicy p;
  return simulate(spec, config, truth, p);
}
inline SessionLog run_baseline3(const VideoSpec& spec, const StreamConfig& config, const BandwidthTrace& truth) {
  HybridPolicy p;
  return simulate(spec, config, truth, p);
}
inline SessionLog run_bba(const VideoSpec& spec, const StreamConfig& config, const BandwidthTrace& truth,
                          Slot lower = 40, Slot upper = 80) {
  BbaPolicy p(lower, upper);
  return simulate(spec, config, truth, p);
}
inline SessionLog run_nms(const VideoSpec& spec, const StreamConfig& config, const BandwidthTrace& truth,
                          std::optional<Slot> low_buffer = std::nullopt) {
  NmsPolicy p(low_buffer ? *low_buffer : config.buffer_capacity / 2);
  return simulate(spec, config, truth, p);
}
inline SessionLog run_slope(const VideoSpec& spec, const StreamConfig& config, const BandwidthTrace& truth,
                            double slope = -0.07) {
  SlopePolicy p(slope);
  return simulate(spec, config, truth, p);
}

}  // namespace svclbp
