#pragma once

// QoE metrics over delivered chunk sizes and levels.

#include "svclbp/model.hpp"
#include "svclbp/playback_sim.hpp"
#include "svclbp/types.hpp"

#include <cstdlib>
#include <vector>

namespace svclbp {

/// Layer switching rate: sum_{i>=2} |X(i) - X(i-1)| / (C * L). Skipped
/// chunks enter as 0.
inline Rational lsr(const std::vector<Kilobits>& delivered, Slot chunk_duration) {
  detail::require(chunk_duration >= 1, "chunk duration must be positive");
  if (delivered.size() <= 1) return 0;
  Kilobits acc = 0;
  for (std::size_t i = 1; i < delivered.size(); ++i) acc += std::llabs(delivered[i] - delivered[i - 1]);
  return Rational(acc, static_cast<Kilobits>(delivered.size()) * chunk_duration);
}

/// Mean delivered rate in kilobits per second.
inline Rational avg_playback_rate(const std::vector<Kilobits>& delivered, Slot chunk_duration, int slot_seconds = 1) {
  detail::require(!delivered.empty(), "no chunks");
  detail::require(chunk_duration >= 1 && slot_seconds >= 1, "durations must be positive");
  Kilobits total = 0;
  for (Kilobits x : delivered) total += x;
  return Rational(total, static_cast<Kilobits>(delivered.size()) * chunk_duration * slot_seconds);
}

/// Counts per level: index 0 = skipped, 1 = base, 1+n = EL_n.
inline std::vector<int> layer_breakdown(const std::vector<Level>& levels, int num_enh_layers) {
  std::vector<int> h(static_cast<std::size_t>(num_enh_layers + 2), 0);
  for (Level l : levels) {
    detail::require(l >= kSkipped && l <= num_enh_layers, "level out of range");
    ++h[static_cast<std::size_t>(l + 1)];
  }
  return h;
}

inline std::vector<int> layer_breakdown(const SessionLog& session, const VideoSpec& spec) {
  return layer_breakdown(session.levels(), spec.num_enh_layers());
}

inline QoEReport report_from_levels(const std::vector<Level>& levels, Slot stall, const VideoSpec& spec,
                                    const StreamConfig& config, int slot_seconds = 1) {
  QoEReport r;
  std::vector<Kilobits> sizes;
  for (ChunkIndex i = 1; i <= spec.num_chunks(); ++i) {
    sizes.push_back(spec.cumulative_size(levels.at(static_cast<std::size_t>(i - 1)), i));
  }
  for (Level l : levels) r.skip_count += l == kSkipped ? 1 : 0;
  r.skip_duration = r.skip_count * spec.chunk_duration();
  r.stall_duration = stall;
  r.avg_playback_rate = avg_playback_rate(sizes, spec.chunk_duration(), slot_seconds);
  r.lsr = lsr(sizes, spec.chunk_duration());
  r.layer_histogram = layer_breakdown(levels, spec.num_enh_layers());
  r.objective = objective_value(levels, stall, spec, config);
  return r;
}

/// Every metric of a session, plus the objective of what was delivered.
inline QoEReport build_report(const SessionLog& session, const VideoSpec& spec, const StreamConfig& config) {
  detail::require(session.num_chunks() == spec.num_chunks(), "session does not match the video");
  return report_from_levels(session.levels(), session.stall_duration, spec, config, session.slot_seconds);
}

/// Metrics of a plan as if it were delivered exactly.
inline QoEReport plan_report(const LayerPlan& plan, const VideoSpec& spec, const StreamConfig& config,
                             int slot_seconds = 1) {
  return report_from_levels(plan.level, plan.total_stall(), spec, config, slot_seconds);
}

}  // namespace svclbp
