#pragma once

// Offline planner for no-skip streaming: minimum total stall from an in-order
// base-layer pass, stalls moved as early as the buffer allows, then the
// enhancement layers exactly as in skip mode against the stalled deadlines.

#include "svclbp/lbp_skip.hpp"

#include <string>
#include <vector>

namespace svclbp {

struct StallSchedule {
  std::vector<Slot> d;     // forward pass, cumulative stall before chunk i
  std::vector<Slot> d_f;   // after repositioning (empty until repositioned)
  Slot total = 0;          // d(C)
};

namespace detail {

inline Instance noskip_instance(const VideoSpec& spec, const StreamConfig& config, const BandwidthTrace& trace) {
  auto deadlines = nominal_deadlines(spec, config);
  Slot horizon = std::max(deadlines.back(), trace.length());
  return offline_instance(spec, config, trace, horizon, std::move(deadlines));
}

}  // namespace detail

/// Fetches every base layer in order as early as possible; a chunk finishing
/// after its deadline adds its lateness to d(k) for every k >= i.
inline StallSchedule base_forward_stalls(const VideoSpec& spec, const StreamConfig& config,
                                         const BandwidthTrace& trace) {
  auto inst = detail::noskip_instance(spec, config, trace);
  auto r = detail::forward_stalls(inst);
  StallSchedule out;
  out.d = std::move(r.d);
  out.total = out.d.back();
  return out;
}

/// Backward base-layer placement from deadline(C) = (C-1)L + s + d(C); a chunk
/// that would overflow the buffer has its deadline pulled in one slot at a time.
inline StallSchedule base_backward_reposition(const VideoSpec& spec, const StreamConfig& config,
                                              const BandwidthTrace& trace, const StallSchedule& stalls) {
  detail::require(stalls.d.size() == static_cast<std::size_t>(spec.num_chunks()),
                  "stall schedule does not match the video");
  auto inst = detail::noskip_instance(spec, config, trace);
  auto r = detail::reposition_stalls(inst, stalls.d);
  StallSchedule out = stalls;
  out.d_f = std::move(r.d_final);
  return out;
}

/// Minimum-stall plan with optimal enhancement layers; the base layer of every
/// chunk is fetched. stall_before holds the repositioned stalls.
inline LayerPlan plan_offline_noskip(const VideoSpec& spec, const StreamConfig& config, const BandwidthTrace& trace) {
  detail::require(config.mode == Mode::NoSkip, "plan_offline_noskip needs a no-skip configuration");
  require_valid_weights(spec, config);
  auto inst = detail::noskip_instance(spec, config, trace);
  auto ip = detail::plan_noskip_instance(inst);
  return detail::to_layer_plan(spec, inst, ip, Mode::NoSkip);
}

/// Dispatches on config.mode.
inline LayerPlan plan_offline(const VideoSpec& spec, const StreamConfig& config, const BandwidthTrace& trace) {
  return config.mode == Mode::Skip ? plan_offline_skip(spec, config, trace) : plan_offline_noskip(spec, config, trace);
}

}  // namespace svclbp
