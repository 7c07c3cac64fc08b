#pragma once

// Offline planner for skip-based streaming: per layer, a backward pass picks
// the chunks that get the layer, then a forward pass finds the earliest
// in-order schedule and each chunk's lower deadline t(i).

#include "svclbp/detail/scan_engine.hpp"
#include "svclbp/model.hpp"
#include "svclbp/types.hpp"

#include <string>
#include <vector>

namespace svclbp {

/// Working state of the scans for the offline problem.
struct ScanState {
  std::vector<Kilobits> cumulative_bw;    // c(j) for j = 0..H, c(0) = 0
  std::vector<Slot> buffer_occupancy;     // bf(j) for j = 1..H, in slots
  std::vector<Kilobits> remaining_bw;     // B(j) minus what the current schedule uses
};

namespace detail {

/// Offline instance over slots 1..horizon with the given per-chunk deadlines.
inline Instance offline_instance(const VideoSpec& spec, const StreamConfig& config, const BandwidthTrace& trace,
                                 Slot horizon, std::vector<Slot> deadlines) {
  detail::require(config.startup_delay >= 0, "startup delay must be non-negative");
  detail::require(config.buffer_capacity >= 1, "buffer capacity must be positive");
  Instance inst;
  inst.first = 1;
  inst.start = 1;
  inst.q = buffer_chunks(spec, config);
  inst.chunk_duration = spec.chunk_duration();
  inst.deadline = std::move(deadlines);
  const int C = spec.num_chunks();
  inst.need.assign(static_cast<std::size_t>(C), {});
  inst.done_level.assign(static_cast<std::size_t>(C), kSkipped);
  for (ChunkIndex i = 1; i <= C; ++i) {
    auto& row = inst.need[static_cast<std::size_t>(i - 1)];
    for (Level n = 0; n <= spec.top_level(); ++n) row.push_back(spec.cumulative_size(n, i));
  }
  inst.bw = trace.fitted(horizon).capacities();
  return inst;
}

inline std::vector<Slot> nominal_deadlines(const VideoSpec& spec, const StreamConfig& config) {
  std::vector<Slot> out;
  for (ChunkIndex i = 1; i <= spec.num_chunks(); ++i) out.push_back(deadline_of(i, spec, config));
  return out;
}

inline Instance offline_instance(const VideoSpec& spec, const StreamConfig& config, const BandwidthTrace& trace) {
  auto deadlines = nominal_deadlines(spec, config);
  Slot horizon = deadlines.back();
  return offline_instance(spec, config, trace, horizon, std::move(deadlines));
}

inline void check_decoder(const LayerPlan& plan, const VideoSpec& spec) {
  if (plan.num_chunks() != spec.num_chunks() || plan.size.size() != plan.level.size()) {
    throw InvalidInput("plan does not match the video's chunk count");
  }
  for (ChunkIndex i = 1; i <= spec.num_chunks(); ++i) {
    Level l = plan.level_of(i);
    if (l < kSkipped || l > spec.top_level() || plan.size_of(i) != spec.cumulative_size(l, i)) {
      throw InvalidInput("plan violates the decoder constraint at chunk " + std::to_string(i));
    }
  }
}

/// Copies levels and the forward schedule of an offline instance plan into a LayerPlan.
inline LayerPlan to_layer_plan(const VideoSpec& spec, const Instance& inst, const InstancePlan& ip, Mode mode) {
  LayerPlan plan;
  plan.mode = mode;
  plan.level = ip.level;
  plan.deadline = ip.deadline;
  plan.stall_before = ip.d_final;
  const auto C = static_cast<std::size_t>(spec.num_chunks());
  plan.size.resize(C);
  plan.lower_deadline.assign(C, 0);
  plan.head_fetch.assign(C, 0);
  for (std::size_t k = 0; k < C; ++k) {
    auto i = static_cast<ChunkIndex>(k + 1);
    plan.size[k] = spec.cumulative_size(plan.level[k], i);
    if (plan.level[k] != kSkipped) {
      plan.lower_deadline[k] = ip.schedule.first_slot[k];
      plan.head_fetch[k] = ip.schedule.head[k];
    }
  }
  plan.residual = ip.schedule.residual;
  for (const auto& t : ip.schedule.transfers) plan.schedule.push_back({t.slot, inst.first + t.k, t.kb});
  plan.backward_iterations = ip.backward_iterations;
  plan.forward_iterations = ip.forward_iterations;
  return plan;
}

/// Rebuilds the scan-engine view (t, a, prior) of a plan's schedule.
inline ForwardResult forward_view(const LayerPlan& plan, const Instance& inst) {
  ForwardResult f;
  const auto C = static_cast<std::size_t>(plan.num_chunks());
  f.first_slot = plan.lower_deadline;
  f.head = plan.head_fetch;
  f.prior.assign(C, 0);
  f.finish_slot.assign(C, 0);
  for (const auto& t : plan.schedule) {
    if (t.chunk < 1 || static_cast<std::size_t>(t.chunk) > C) throw InvalidInput("schedule names an unknown chunk");
    auto k = static_cast<std::size_t>(t.chunk - 1);
    f.finish_slot[k] = std::max(f.finish_slot[k], t.slot);
  }
  for (const auto& t : plan.schedule) {
    for (std::size_t k = static_cast<std::size_t>(t.chunk); k < C; ++k) {
      if (f.first_slot[k] == t.slot) f.prior[k] += t.kb;
    }
  }
  f.residual = plan.residual.empty() ? inst.bw : plan.residual;
  return f;
}

inline ScanState scan_state_for(const LayerPlan& plan, const Instance& inst, Slot chunk_duration) {
  ScanState s;
  s.cumulative_bw.assign(inst.bw.size() + 1, 0);
  for (std::size_t x = 0; x < inst.bw.size(); ++x) s.cumulative_bw[x + 1] = s.cumulative_bw[x] + inst.bw[x];
  s.remaining_bw = plan.residual.empty() ? inst.bw : plan.residual;
  s.buffer_occupancy.assign(inst.bw.size(), 0);
  for (std::size_t k = 0; k < plan.level.size(); ++k) {
    if (plan.level[k] == kSkipped || plan.size[k] == 0) continue;
    for (Slot j = plan.lower_deadline[k]; j < plan.deadline[k] && j <= inst.horizon(); ++j) {
      s.buffer_occupancy[static_cast<std::size_t>(j - 1)] += chunk_duration;
    }
  }
  return s;
}

}  // namespace detail

/// Scan state for an empty plan: c(j), zero occupancy, full bandwidth.
inline ScanState make_scan_state(const VideoSpec& spec, const StreamConfig& config, const BandwidthTrace& trace) {
  auto inst = detail::offline_instance(spec, config, trace);
  LayerPlan empty;
  return detail::scan_state_for(empty, inst, spec.chunk_duration());
}

/// Plan with every chunk skipped and nominal deadlines; the input of the layer-0 backward scan.
inline LayerPlan empty_plan(const VideoSpec& spec, const StreamConfig& config) {
  LayerPlan p;
  p.mode = config.mode;
  const auto C = static_cast<std::size_t>(spec.num_chunks());
  p.level.assign(C, kSkipped);
  p.size.assign(C, 0);
  p.lower_deadline.assign(C, 0);
  p.head_fetch.assign(C, 0);
  p.stall_before.assign(C, 0);
  p.deadline = detail::nominal_deadlines(spec, config);
  return p;
}

/// Decides layer n: which chunks of layer n-1 (every chunk for n = 0) can be
/// upgraded without disturbing the lower layers. Uses t(i), a(i) and the
/// schedule from the preceding forward scan.
inline LayerPlan backward_scan(int n, const VideoSpec& spec, const StreamConfig& config, const BandwidthTrace& trace,
                               ScanState& state, const LayerPlan& plan) {
  detail::require(n >= 0 && n <= spec.top_level(), "backward_scan: layer out of range");
  detail::check_decoder(plan, spec);
  std::vector<Slot> deadlines = plan.deadline.empty() ? detail::nominal_deadlines(spec, config) : plan.deadline;
  auto inst = detail::offline_instance(spec, config, trace, deadlines.back(), deadlines);
  detail::ForwardResult view;
  if (n >= 1) view = detail::forward_view(plan, inst);
  auto b = detail::backward_layer(inst, n, plan.level, n >= 1 ? &view : nullptr, deadlines);
  LayerPlan out = plan;
  out.deadline = deadlines;
  out.level = b.level;
  for (ChunkIndex i = 1; i <= spec.num_chunks(); ++i) {
    out.size[static_cast<std::size_t>(i - 1)] = spec.cumulative_size(out.level_of(i), i);
  }
  out.backward_iterations.push_back(b.iterations);
  state = detail::scan_state_for(plan, inst, spec.chunk_duration());
  return out;
}

/// Earliest in-order schedule of the plan's sizes: fills t(i), a(i), e(j).
inline LayerPlan forward_scan(const VideoSpec& spec, const StreamConfig& config, const BandwidthTrace& trace,
                              const LayerPlan& plan, ScanState* state = nullptr) {
  detail::check_decoder(plan, spec);
  std::vector<Slot> deadlines = plan.deadline.empty() ? detail::nominal_deadlines(spec, config) : plan.deadline;
  auto inst = detail::offline_instance(spec, config, trace, deadlines.back(), deadlines);
  auto f = detail::forward_fill(inst, plan.level, deadlines);
  LayerPlan out = plan;
  out.deadline = deadlines;
  const auto C = static_cast<std::size_t>(spec.num_chunks());
  out.lower_deadline.assign(C, 0);
  out.head_fetch.assign(C, 0);
  for (std::size_t k = 0; k < C; ++k) {
    if (out.level[k] == kSkipped) continue;
    out.lower_deadline[k] = f.first_slot[k];
    out.head_fetch[k] = f.head[k];
  }
  out.residual = f.residual;
  out.schedule.clear();
  for (const auto& t : f.transfers) out.schedule.push_back({t.slot, t.k + 1, t.kb});
  out.forward_iterations.push_back(f.iterations);
  if (out.stall_before.size() != C) out.stall_before.assign(C, 0);
  if (state) *state = detail::scan_state_for(out, inst, spec.chunk_duration());
  return out;
}

inline void require_valid_weights(const VideoSpec& spec, const StreamConfig& config) {
  auto verdict = validate_weights(spec, config);
  if (!verdict.valid) throw ValidationError("weight validation failed: " + verdict.summary());
}

/// Optimal layer decisions for skip-based streaming over the whole video.
/// The trace is zero-extended or truncated to cover slots 1..deadline(C).
inline LayerPlan plan_offline_skip(const VideoSpec& spec, const StreamConfig& config, const BandwidthTrace& trace) {
  detail::require(config.mode == Mode::Skip, "plan_offline_skip needs a skip-mode configuration");
  require_valid_weights(spec, config);
  auto inst = detail::offline_instance(spec, config, trace);
  auto ip = detail::plan_skip_instance(inst);
  return detail::to_layer_plan(spec, inst, ip, Mode::Skip);
}

}  // namespace svclbp
