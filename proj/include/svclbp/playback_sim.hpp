#pragma once

// Slot-by-slot playback simulator. A FetchPolicy decides what to download;
// the simulator enforces bandwidth, the buffer reservation rule and
// deadlines, plays chunks out and keeps the session log.
//
// Within a slot, fetching happens first and playback second: a chunk whose
// bytes arrive during its deadline slot still plays.

#include "svclbp/lbp_skip.hpp"
#include "svclbp/model.hpp"
#include "svclbp/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace svclbp {

/// Download chunk `chunk` up to cumulative level `target`.
struct FetchRequest {
  ChunkIndex chunk = 0;
  Level target = 0;
};

struct ChunkRecord {
  Kilobits delivered = 0;
  Level final_level = kSkipped;   // highest complete level at play time
  Slot first_slot = 0;            // first slot with bytes, 0 if never started
  Slot last_slot = 0;             // last slot with bytes
  Slot base_slot = 0;             // slot in which the base layer completed
  Slot play_slot = 0;             // effective deadline (valid when played)
  bool played = false;
  Kilobits wasted = 0;            // bytes beyond the complete prefix
  bool abandoned = false;
  std::vector<Level> decisions;   // decided level at every replan (online engine)
};

struct ReplanSnapshot {
  Slot slot = 0;
  ChunkIndex sc = 0, ec = 0;
  std::vector<Level> levels;      // levels for sc..ec after degradation
};

struct SessionLog {
  Mode mode = Mode::Skip;
  std::string policy;
  Slot chunk_duration = 1;
  Slot buffer_capacity = 0;
  int slot_seconds = 1;
  std::vector<ChunkRecord> chunks;
  std::vector<Kilobits> capacity;        // truth, per executed slot
  std::vector<Kilobits> consumed;        // per executed slot
  std::vector<Slot> buffer_occupancy;    // buffered duration at the end of each slot
  std::vector<Transfer> transfers;
  std::vector<ReplanSnapshot> replans;
  Slot stall_duration = 0;
  bool truncated = false;

  int num_chunks() const { return static_cast<int>(chunks.size()); }
  Slot slots() const { return static_cast<Slot>(capacity.size()); }

  std::vector<Level> levels() const {
    std::vector<Level> out;
    for (const auto& c : chunks) out.push_back(c.final_level);
    return out;
  }
  std::vector<Kilobits> delivered_sizes(const VideoSpec& spec) const {
    std::vector<Kilobits> out;
    for (ChunkIndex i = 1; i <= num_chunks(); ++i) {
      out.push_back(spec.cumulative_size(chunks[static_cast<std::size_t>(i - 1)].final_level, i));
    }
    return out;
  }
  int skip_count() const {
    int n = 0;
    for (const auto& c : chunks) n += c.final_level == kSkipped ? 1 : 0;
    return n;
  }
  Kilobits wasted() const {
    Kilobits w = 0;
    for (const auto& c : chunks) w += c.wasted;
    return w;
  }
};

class SimulatorState;

class FetchPolicy {
 public:
  virtual ~FetchPolicy() = default;
  virtual std::string name() const = 0;
  /// Called once per slot before any request; may adjust planned play slots.
  virtual void on_slot_begin(SimulatorState&) {}
  /// Next download, or nothing to idle for the rest of the slot. A request
  /// for a chunk that may not start yet also idles the slot.
  virtual std::optional<FetchRequest> next_request(SimulatorState& state) = 0;
};

class SimulatorState {
 public:
  SimulatorState(const VideoSpec& spec, const StreamConfig& config, int slot_seconds = 1)
      : spec_(spec), config_(config) {
    detail::require(config.startup_delay >= 0, "startup delay must be non-negative");
    detail::require(config.buffer_capacity >= 1, "buffer capacity must be positive");
    const auto C = static_cast<std::size_t>(spec.num_chunks());
    log_.mode = config.mode;
    log_.chunk_duration = spec.chunk_duration();
    log_.buffer_capacity = config.buffer_capacity;
    log_.slot_seconds = slot_seconds;
    log_.chunks.assign(C, {});
    min_play_.resize(C);
    for (ChunkIndex i = 1; i <= spec.num_chunks(); ++i) min_play_[idx(i)] = nominal_deadline(i);
  }

  const VideoSpec& spec() const { return spec_; }
  const StreamConfig& config() const { return config_; }
  Mode mode() const { return config_.mode; }
  int num_chunks() const { return spec_.num_chunks(); }

  /// Slot being executed (during a step) or about to be executed.
  Slot slot() const { return slot_; }
  bool done() const { return next_play_ > spec_.num_chunks(); }
  /// First chunk that has not played yet (C+1 when all have).
  ChunkIndex next_to_play() const { return next_play_; }

  const ChunkRecord& record(ChunkIndex i) const { return log_.chunks[idx(i)]; }
  Kilobits delivered(ChunkIndex i) const { return record(i).delivered; }
  Level complete_level(ChunkIndex i) const { return spec_.complete_level(i, delivered(i)); }
  bool started(ChunkIndex i) const { return record(i).first_slot > 0; }
  bool finalized(ChunkIndex i) const { return i < next_play_; }
  Slot nominal_deadline(ChunkIndex i) const { return deadline_of(i, spec_, config_); }
  Kilobits budget_left() const { return budget_; }
  /// True capacities of the slots already executed.
  const std::vector<Kilobits>& observed() const { return log_.capacity; }
  const SessionLog& log() const { return log_; }
  SessionLog& mutable_log() { return log_; }
  void mark_abandoned(ChunkIndex i) { log_.chunks[idx(i)].abandoned = true; }

  /// No-skip: chunk i plays no earlier than `slot` (planned stall).
  void set_min_play(ChunkIndex i, Slot slot) {
    if (!finalized(i)) min_play_[idx(i)] = std::max(slot, nominal_deadline(i));
  }
  Slot min_play(ChunkIndex i) const { return min_play_[idx(i)]; }

  /// Current estimate of the slot at whose end chunk i plays. Skip mode: its
  /// deadline. No-skip: chained from the last played chunk, assuming every
  /// later base layer arrives in time.
  Slot expected_play(ChunkIndex i) const {
    if (finalized(i)) return record(i).play_slot;
    if (config_.mode == Mode::Skip) return nominal_deadline(i);
    Slot prev = next_play_ > 1 ? record(next_play_ - 1).play_slot : 0;
    Slot e = 0;
    for (ChunkIndex k = next_play_; k <= i; ++k) {
      e = std::max(min_play_[idx(k)], slot_);  // nothing unplayed plays before now
      if (k > 1) e = std::max(e, prev + spec_.chunk_duration());
      if (k < i) {
        const auto& r = record(k);
        e = r.base_slot > 0 ? std::max(e, r.base_slot) : std::max(e, slot_ + 1);
      }
      prev = e;
    }
    return e;
  }

  /// Playout-buffer occupancy (slots) right now: L per started chunk that has
  /// not played and will not play within the current slot.
  Slot buffer_level() const {
    Slot occ = 0;
    for (ChunkIndex k = next_play_; k <= spec_.num_chunks(); ++k) {
      if (started(k) && occupies(k)) occ += spec_.chunk_duration();
    }
    return occ;
  }

  /// Whether chunk i may receive bytes in the current slot.
  bool may_start(ChunkIndex i) const {
    if (finalized(i)) return false;
    if (started(i)) return true;
    Slot occ = expected_play(i) > slot_ ? spec_.chunk_duration() : 0;
    for (ChunkIndex k = next_play_; k <= spec_.num_chunks(); ++k) {
      if (k != i && started(k) && occupies(k)) occ += spec_.chunk_duration();
    }
    return occ <= config_.buffer_capacity;
  }

  /// Cumulative stall so far (no-skip).
  Slot stall() const {
    if (next_play_ <= 1) return 0;
    return record(next_play_ - 1).play_slot - nominal_deadline(next_play_ - 1);
  }

  /// Runs one slot with `capacity` kb available.
  void step(Kilobits capacity, FetchPolicy& policy) {
    detail::require(capacity >= 0, "slot capacity must be non-negative");
    budget_ = capacity;
    if (config_.mode == Mode::Skip) {
      while (!done() && nominal_deadline(next_play_) < slot_) finalize(next_play_, nominal_deadline(next_play_));
    }
    policy.on_slot_begin(*this);
    while (budget_ > 0 && !done()) {
      auto req = policy.next_request(*this);
      if (!req) break;
      const ChunkIndex i = req->chunk;
      if (i < 1 || i > spec_.num_chunks() || req->target < 0 || req->target > spec_.top_level()) {
        throw InternalError(policy.name() + ": request out of range");
      }
      if (finalized(i)) throw InternalError(policy.name() + ": request for chunk " + std::to_string(i) + " after it played");
      const Kilobits need = spec_.cumulative_size(req->target, i) - delivered(i);
      if (need <= 0) throw InternalError(policy.name() + ": request for data already delivered");
      if (!may_start(i)) break;
      const Kilobits take = std::min(budget_, need);
      auto& r = log_.chunks[idx(i)];
      if (r.first_slot == 0) r.first_slot = slot_;
      r.last_slot = slot_;
      r.delivered += take;
      if (r.base_slot == 0 && r.delivered >= spec_.cumulative_size(0, i)) r.base_slot = slot_;
      budget_ -= take;
      if (!log_.transfers.empty() && log_.transfers.back().slot == slot_ && log_.transfers.back().chunk == i) {
        log_.transfers.back().kb += take;
      } else {
        log_.transfers.push_back({slot_, i, take});
      }
    }
    log_.capacity.push_back(capacity);
    log_.consumed.push_back(capacity - budget_);
    play_out();
    log_.buffer_occupancy.push_back(buffer_level_end());
    ++slot_;
    budget_ = 0;
  }

  /// Remaining chunks never play (trace ended while stalled).
  void truncate() {
    log_.truncated = true;
    for (ChunkIndex k = next_play_; k <= spec_.num_chunks(); ++k) {
      auto& r = log_.chunks[idx(k)];
      r.final_level = spec_.complete_level(k, r.delivered);
      r.wasted = r.delivered - spec_.cumulative_size(r.final_level, k);
    }
  }

  SessionLog finish() {
    if (config_.mode == Mode::NoSkip) log_.stall_duration = stall();
    return log_;
  }

 private:
  std::size_t idx(ChunkIndex i) const {
    if (i < 1 || i > spec_.num_chunks()) throw InvalidInput("chunk index out of range: " + std::to_string(i));
    return static_cast<std::size_t>(i - 1);
  }

  // A started, unplayed chunk holds buffer in the current slot unless it is
  // certain to play at the end of it.
  bool occupies(ChunkIndex k) const {
    if (config_.mode == Mode::Skip) return nominal_deadline(k) > slot_;
    const auto& r = record(k);
    Slot e = expected_play(k);
    if (r.base_slot == 0) return true;
    return std::max(e, r.base_slot) > slot_;
  }

  Slot buffer_level_end() const {
    Slot occ = 0;
    for (ChunkIndex k = next_play_; k <= spec_.num_chunks(); ++k) {
      if (started(k)) occ += spec_.chunk_duration();
    }
    return occ;
  }

  void finalize(ChunkIndex i, Slot play) {
    auto& r = log_.chunks[idx(i)];
    r.play_slot = play;
    r.played = true;
    r.final_level = spec_.complete_level(i, r.delivered);
    r.wasted = r.delivered - spec_.cumulative_size(r.final_level, i);
    ++next_play_;
  }

  void play_out() {
    if (config_.mode == Mode::Skip) {
      while (!done() && nominal_deadline(next_play_) <= slot_) finalize(next_play_, nominal_deadline(next_play_));
      return;
    }
    while (!done()) {
      const auto& r = record(next_play_);
      if (r.base_slot == 0) break;
      Slot e = std::max(expected_play(next_play_), r.base_slot);
      if (e > slot_) break;
      finalize(next_play_, e);
    }
  }

  const VideoSpec& spec_;
  const StreamConfig& config_;
  SessionLog log_;
  std::vector<Slot> min_play_;
  Slot slot_ = 1;
  ChunkIndex next_play_ = 1;
  Kilobits budget_ = 0;
};

/// One simulator slot; the free-function form of SimulatorState::step.
inline void step(SimulatorState& state, Kilobits capacity, FetchPolicy& policy) { state.step(capacity, policy); }

/// Runs a whole session against `truth`. Skip mode ends after the last
/// deadline; no-skip mode ends when the last chunk plays, or is truncated
/// once the trace is exhausted with a base layer still missing.
inline SessionLog simulate(const VideoSpec& spec, const StreamConfig& config, const BandwidthTrace& truth,
                           FetchPolicy& policy) {
  SimulatorState state(spec, config, truth.slot_seconds());
  state.mutable_log().policy = policy.name();
  while (!state.done()) {
    const Slot t = state.slot();
    if (config.mode == Mode::NoSkip && t > truth.length()) {
      ChunkIndex nxt = state.next_to_play();
      if (state.record(nxt).base_slot == 0) {
        state.truncate();
        break;
      }
    }
    state.step(truth.at(t), policy);
  }
  return state.finish();
}

// ---------------------------------------------------------------------------
// Plan execution

/// Fetches the plan's chunks in order at their planned sizes as early as the
/// simulator allows; chunks that miss their deadline are left behind.
class PlanFollower : public FetchPolicy {
 public:
  explicit PlanFollower(const LayerPlan& plan) : plan_(plan) {}
  std::string name() const override { return "plan"; }

  void on_slot_begin(SimulatorState& st) override {
    if (primed_ || st.mode() != Mode::NoSkip) return;
    primed_ = true;
    for (ChunkIndex i = 1; i <= st.num_chunks(); ++i) st.set_min_play(i, plan_.deadline_of(i));
  }

  std::optional<FetchRequest> next_request(SimulatorState& st) override {
    for (ChunkIndex i = std::max(cursor_, st.next_to_play()); i <= st.num_chunks(); ++i) {
      cursor_ = i;
      Level l = plan_.level_of(i);
      if (l == kSkipped || st.delivered(i) >= st.spec().cumulative_size(l, i)) continue;
      return FetchRequest{i, l};
    }
    return std::nullopt;
  }

 private:
  const LayerPlan& plan_;
  ChunkIndex cursor_ = 1;
  bool primed_ = false;
};

inline SessionLog execute_plan(const LayerPlan& plan, const VideoSpec& spec, const StreamConfig& config,
                               const BandwidthTrace& truth) {
  detail::check_decoder(plan, spec);
  if (plan.mode != config.mode) throw InvalidInput("plan mode does not match the configuration");
  if (config.mode == Mode::NoSkip && plan.deadline.size() != static_cast<std::size_t>(spec.num_chunks())) {
    throw InvalidInput("no-skip plan needs per-chunk deadlines");
  }
  PlanFollower follower(plan);
  return simulate(spec, config, truth, follower);
}

}  // namespace svclbp
