#pragma once

// Sliding-window online planner: every `period` slots it forecasts `window`
// slots ahead, replans the chunks whose deadlines fall in that window from
// the current session state, and fetches them in order against the real
// trace.

#include "svclbp/detail/scan_engine.hpp"
#include "svclbp/model.hpp"
#include "svclbp/playback_sim.hpp"
#include "svclbp/prediction.hpp"
#include "svclbp/types.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace svclbp {

struct OnlineConfig {
  Slot window = 20;                       // W
  Slot period = 5;                        // alpha
  std::optional<Slot> buffer_low;         // B_min; B_m / 2 when unset
  Slot deadline_miss_threshold = 1;
  Mode mode = Mode::Skip;

  Slot resolved_buffer_low(const StreamConfig& config) const {
    return buffer_low ? *buffer_low : config.buffer_capacity / 2;
  }
};

inline void validate_online(const OnlineConfig& online, const StreamConfig& config) {
  detail::require(online.window >= 1, "prediction window must be at least one slot");
  detail::require(online.period >= 1 && online.period <= online.window, "replan period must lie in 1..window");
  const Slot low = online.resolved_buffer_low(config);
  detail::require(low >= 0 && low <= config.buffer_capacity, "low-buffer threshold must lie in 0..B_m");
  detail::require(online.deadline_miss_threshold >= 0, "deadline-miss threshold must be non-negative");
  detail::require(online.mode == config.mode, "online mode does not match the stream configuration");
}

/// One level lower when the buffer is below B_min, never below the base layer.
inline Level degrade_for_low_buffer(Level decision, Slot buffer, Slot buffer_low) {
  detail::require(decision >= kSkipped, "layer decision out of range");
  return buffer < buffer_low && decision >= 1 ? decision - 1 : decision;
}

namespace detail {

class OnlinePolicy : public FetchPolicy {
 public:
  OnlinePolicy(const VideoSpec& spec, const StreamConfig& config, const OnlineConfig& online, Predictor& predictor)
      : spec_(spec), config_(config), online_(online), predictor_(predictor),
        target_(static_cast<std::size_t>(spec.num_chunks()), kUnplanned) {}

  std::string name() const override { return "lbp-online"; }

  void on_slot_begin(SimulatorState& st) override {
    const Slot t = st.slot();
    bool due = t >= next_replan_;
    while (next_replan_ <= t) next_replan_ += online_.period;
    if (due || exhausted(st)) replan(st);
  }

  std::optional<FetchRequest> next_request(SimulatorState& st) override {
    for (ChunkIndex i = st.next_to_play(); i <= std::min(ec_, st.num_chunks()); ++i) {
      Level l = target_[static_cast<std::size_t>(i - 1)];
      if (l == kUnplanned) break;
      if (l == kSkipped || st.delivered(i) >= spec_.cumulative_size(l, i)) continue;
      if (should_abandon(st, i, l)) {
        target_[static_cast<std::size_t>(i - 1)] = st.complete_level(i);
        st.mark_abandoned(i);
        continue;
      }
      return FetchRequest{i, l};
    }
    return std::nullopt;
  }

 private:
  static constexpr Level kUnplanned = -2;

  // Nothing left to fetch among the planned chunks while later chunks wait.
  bool exhausted(const SimulatorState& st) const {
    if (ec_ >= st.num_chunks()) return false;
    for (ChunkIndex i = std::max(st.next_to_play(), 1); i <= ec_; ++i) {
      Level l = target_[static_cast<std::size_t>(i - 1)];
      if (l >= 0 && st.delivered(i) < spec_.cumulative_size(l, i)) return false;
    }
    return true;
  }

  bool should_abandon(const SimulatorState& st, ChunkIndex i, Level l) const {
    if (!st.started(i) || st.record(i).base_slot == 0) return false;
    const Slot t = st.slot();
    const Slot play = st.expected_play(i);
    if (play - t >= online_.deadline_miss_threshold) return false;
    Kilobits remaining = spec_.cumulative_size(l, i) - st.delivered(i);
    Kilobits expected = 0;
    for (Slot j = t; j <= play; ++j) expected += forecast_at(j);
    return remaining > expected;
  }

  Kilobits forecast_at(Slot j) const {
    if (j < forecast_from_ || j >= forecast_from_ + static_cast<Slot>(forecast_.size())) return forecast_tail_;
    return forecast_[static_cast<std::size_t>(j - forecast_from_)];
  }

  void replan(SimulatorState& st) {
    const Slot t = st.slot();
    const int C = st.num_chunks();
    ChunkIndex last_started = 0;
    for (ChunkIndex i = C; i >= 1; --i) {
      if (st.started(i)) {
        last_started = i;
        break;
      }
    }
    ChunkIndex sc = std::max<ChunkIndex>(last_started + 1, st.next_to_play());
    bool in_flight = false;
    if (last_started >= st.next_to_play()) {
      Level l = target_[static_cast<std::size_t>(last_started - 1)];
      if (l >= 0 && st.delivered(last_started) < spec_.cumulative_size(l, last_started) &&
          !st.record(last_started).abandoned) {
        sc = last_started;
        in_flight = true;
      }
    }
    if (sc > C) return;

    // Forecast the window; slots beyond it read as the window mean.
    forecast_from_ = t;
    forecast_ = predictor_.predict(t, online_.window, st.observed());
    Kilobits sum = 0;
    for (Kilobits b : forecast_) sum += b;
    forecast_tail_ = std::max<Kilobits>(1, forecast_.empty() ? 1 : sum / static_cast<Kilobits>(forecast_.size()));

    // Deadlines of sc.. as currently expected; no-skip chains from the last
    // played chunk without the stalls planned earlier.
    std::vector<Slot> deadlines;
    Slot prev = sc > 1 ? st.expected_play(sc - 1) : 0;
    if (sc > 1 && config_.mode == Mode::NoSkip && st.record(sc - 1).base_slot > 0) {
      prev = std::max(prev, st.record(sc - 1).base_slot);
    }
    const Slot stall = st.stall();
    ChunkIndex ec = C;
    for (ChunkIndex i = sc; i <= C; ++i) {
      Slot d = st.nominal_deadline(i);
      if (config_.mode == Mode::NoSkip) {
        d += stall;
        if (i > 1) d = std::max(d, prev + spec_.chunk_duration());
        d = std::max(d, t);
      }
      deadlines.push_back(d);
      prev = d;
      if (d >= t + online_.window) {
        ec = i;
        break;
      }
    }

    Instance inst;
    inst.first = sc;
    inst.start = t;
    inst.q = buffer_chunks(spec_, config_);
    inst.chunk_duration = spec_.chunk_duration();
    inst.deadline = deadlines;
    inst.first_started = in_flight;
    Kilobits base_left = 0;
    for (ChunkIndex i = sc; i <= ec; ++i) {
      std::vector<Kilobits> row;
      for (Level n = 0; n <= spec_.top_level(); ++n) {
        row.push_back(std::max<Kilobits>(0, spec_.cumulative_size(n, i) - st.delivered(i)));
      }
      base_left += row[0];
      inst.need.push_back(std::move(row));
      inst.done_level.push_back(st.complete_level(i));
    }
    for (ChunkIndex k = st.next_to_play(); k < sc; ++k) {
      if (!st.started(k)) continue;
      Slot d = st.expected_play(k);
      if (config_.mode == Mode::NoSkip && st.record(k).base_slot > 0) d = std::max(d, st.record(k).base_slot);
      inst.prebuffered.push_back(d);
    }
    if (in_flight) inst.prebuffered.push_back(deadlines.front());
    std::sort(inst.prebuffered.begin(), inst.prebuffered.end());

    Slot horizon = std::max(deadlines.back(), t + online_.window - 1);
    if (config_.mode == Mode::NoSkip) horizon += (base_left + forecast_tail_ - 1) / forecast_tail_;
    inst.bw.resize(static_cast<std::size_t>(horizon - t + 1));
    for (Slot j = t; j <= horizon; ++j) inst.bw[static_cast<std::size_t>(j - t)] = forecast_at(j);

    InstancePlan plan = config_.mode == Mode::Skip ? plan_skip_instance(inst) : plan_noskip_instance(inst);

    const Slot buffer = st.buffer_level();
    const Slot low = online_.resolved_buffer_low(config_);
    ReplanSnapshot snap{t, sc, ec, {}};
    for (int k = 0; k < inst.size(); ++k) {
      const ChunkIndex i = sc + k;
      Level l = degrade_for_low_buffer(plan.level[static_cast<std::size_t>(k)], buffer, low);
      target_[static_cast<std::size_t>(i - 1)] = l;
      st.mutable_log().chunks[static_cast<std::size_t>(i - 1)].decisions.push_back(l);
      snap.levels.push_back(l);
      if (config_.mode == Mode::NoSkip) st.set_min_play(i, plan.deadline[static_cast<std::size_t>(k)]);
    }
    st.mutable_log().replans.push_back(std::move(snap));
    ec_ = ec;
  }

  const VideoSpec& spec_;
  const StreamConfig& config_;
  const OnlineConfig& online_;
  Predictor& predictor_;
  std::vector<Level> target_;
  ChunkIndex ec_ = 0;
  Slot next_replan_ = 1;
  Slot forecast_from_ = 1;
  std::vector<Kilobits> forecast_;
  Kilobits forecast_tail_ = 1;
};

}  // namespace detail

/// Runs the online planner against the true trace.
inline SessionLog run_online(const VideoSpec& spec, const StreamConfig& config, const OnlineConfig& online,
                             Predictor& predictor, const BandwidthTrace& truth) {
  validate_online(online, config);
  auto verdict = validate_weights(spec, config);
  if (!verdict.valid) throw ValidationError("weight validation failed: " + verdict.summary());
  if (config.mode == Mode::NoSkip && buffer_chunks(spec, config) < 1) {
    throw ValidationError("no-skip streaming needs a buffer of at least one chunk duration");
  }
  detail::OnlinePolicy policy(spec, config, online, predictor);
  return simulate(spec, config, truth, policy);
}

}  // namespace svclbp
