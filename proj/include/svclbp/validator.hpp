#pragma once

// Independent constraint checks for plans and executed sessions: bandwidth
// per slot, buffer occupancy, decoder prefix property and deadlines.

#include "svclbp/model.hpp"
#include "svclbp/playback_sim.hpp"
#include "svclbp/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace svclbp {

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  std::string summary() const {
    std::string s;
    for (const auto& v : violations) s += (s.empty() ? "" : "; ") + v;
    return s;
  }
};

namespace detail {

// Occupancy L * #{i : start(i) <= t < end(i)} checked for every slot.
inline void check_buffer(const std::vector<std::pair<Slot, Slot>>& spans, Slot chunk_duration, Slot capacity,
                         ValidationReport& rep) {
  std::map<Slot, Slot> delta;
  for (auto [s, e] : spans) {
    if (e <= s) continue;
    delta[s] += 1;
    delta[e] -= 1;
  }
  Slot open = 0;
  for (auto [slot, d] : delta) {
    open += d;
    if (open * chunk_duration > capacity) {
      rep.violations.push_back("buffer holds " + std::to_string(open * chunk_duration) + " slots of video at slot " +
                               std::to_string(slot) + " (capacity " + std::to_string(capacity) + ")");
      return;
    }
  }
}

}  // namespace detail

inline ValidationReport validate_plan(const LayerPlan& plan, const VideoSpec& spec, const StreamConfig& config,
                                      const BandwidthTrace& trace) {
  ValidationReport rep;
  auto fail = [&](std::string s) { rep.violations.push_back(std::move(s)); };
  const int C = spec.num_chunks();
  const auto uC = static_cast<std::size_t>(C);
  if (plan.level.size() != uC || plan.size.size() != uC || plan.deadline.size() != uC) {
    fail("plan vectors do not have one entry per chunk");
    return rep;
  }
  std::vector<Kilobits> got(uC, 0);
  std::vector<Slot> first(uC, 0);
  std::map<Slot, Kilobits> per_slot;
  for (const auto& t : plan.schedule) {
    if (t.chunk < 1 || t.chunk > C) {
      fail("schedule names chunk " + std::to_string(t.chunk));
      continue;
    }
    const auto k = static_cast<std::size_t>(t.chunk - 1);
    if (t.kb <= 0) fail("non-positive transfer for chunk " + std::to_string(t.chunk));
    if (t.slot < 1) fail("transfer before slot 1");
    if (t.slot > plan.deadline[k]) {
      fail("chunk " + std::to_string(t.chunk) + " receives bytes in slot " + std::to_string(t.slot) +
           " after its deadline " + std::to_string(plan.deadline[k]));
    }
    got[k] += t.kb;
    if (first[k] == 0 || t.slot < first[k]) first[k] = t.slot;
    per_slot[t.slot] += t.kb;
  }
  for (auto [slot, kb] : per_slot) {
    if (kb > trace.at(slot)) {
      fail("slot " + std::to_string(slot) + " carries " + std::to_string(kb) + " kb over capacity " +
           std::to_string(trace.at(slot)));
    }
  }
  std::vector<std::pair<Slot, Slot>> spans;
  for (ChunkIndex i = 1; i <= C; ++i) {
    const auto k = static_cast<std::size_t>(i - 1);
    const Level l = plan.level[k];
    if (l < kSkipped || l > spec.top_level()) {
      fail("chunk " + std::to_string(i) + " has level " + std::to_string(l));
      continue;
    }
    if (plan.size[k] != spec.cumulative_size(l, i)) fail("chunk " + std::to_string(i) + " is not a layer prefix");
    if (got[k] != plan.size[k]) {
      fail("chunk " + std::to_string(i) + " scheduled " + std::to_string(got[k]) + " kb for size " +
           std::to_string(plan.size[k]));
    }
    if (config.mode == Mode::NoSkip && l < 0) fail("chunk " + std::to_string(i) + " skipped in no-skip mode");
    const Slot stall = plan.stall_before.size() == uC ? plan.stall_before[k] : 0;
    if (plan.deadline[k] != deadline_of(i, spec, config) + stall) {
      fail("chunk " + std::to_string(i) + " deadline disagrees with its stall");
    }
    if (config.mode == Mode::Skip && stall != 0) fail("stall recorded in skip mode");
    if (k > 0 && plan.stall_before.size() == uC && stall < plan.stall_before[k - 1]) fail("stall decreases");
    if (got[k] > 0) spans.emplace_back(first[k], plan.deadline[k]);
  }
  detail::check_buffer(spans, spec.chunk_duration(), config.buffer_capacity, rep);
  return rep;
}

inline ValidationReport validate_session(const SessionLog& log, const VideoSpec& spec, const StreamConfig& config) {
  ValidationReport rep;
  auto fail = [&](std::string s) { rep.violations.push_back(std::move(s)); };
  const int C = spec.num_chunks();
  if (log.num_chunks() != C) {
    fail("session does not have one record per chunk");
    return rep;
  }
  if (log.consumed.size() != log.capacity.size()) fail("per-slot logs differ in length");
  std::vector<Kilobits> per_slot(log.capacity.size(), 0);
  std::vector<Kilobits> got(static_cast<std::size_t>(C), 0);
  std::vector<Slot> first(static_cast<std::size_t>(C), 0);
  for (const auto& t : log.transfers) {
    if (t.chunk < 1 || t.chunk > C || t.slot < 1 || t.slot > log.slots()) {
      fail("transfer outside the session");
      continue;
    }
    const auto k = static_cast<std::size_t>(t.chunk - 1);
    const auto& r = log.chunks[k];
    if (r.played && t.slot > r.play_slot) {
      fail("chunk " + std::to_string(t.chunk) + " receives bytes after it played");
    }
    got[k] += t.kb;
    if (first[k] == 0) first[k] = t.slot;
    per_slot[static_cast<std::size_t>(t.slot - 1)] += t.kb;
  }
  for (std::size_t j = 0; j < per_slot.size(); ++j) {
    if (per_slot[j] > log.capacity[j]) fail("slot " + std::to_string(j + 1) + " exceeds its bandwidth");
    if (j < log.consumed.size() && per_slot[j] != log.consumed[j]) fail("consumed bandwidth log is inconsistent");
  }
  for (Slot occ : log.buffer_occupancy) {
    if (occ > config.buffer_capacity) {
      fail("logged buffer occupancy " + std::to_string(occ) + " exceeds capacity");
      break;
    }
  }
  std::vector<std::pair<Slot, Slot>> spans;
  Slot prev_play = 0;
  for (ChunkIndex i = 1; i <= C; ++i) {
    const auto k = static_cast<std::size_t>(i - 1);
    const auto& r = log.chunks[k];
    if (got[k] != r.delivered) fail("chunk " + std::to_string(i) + " delivered total disagrees with transfers");
    if (r.final_level != spec.complete_level(i, r.delivered)) {
      fail("chunk " + std::to_string(i) + " level is not its complete prefix");
    }
    if (r.delivered > spec.cumulative_size(spec.top_level(), i)) fail("chunk " + std::to_string(i) + " over-fetched");
    if (r.first_slot != first[k]) fail("chunk " + std::to_string(i) + " first slot disagrees with transfers");
    if (r.played) {
      const Slot nominal = deadline_of(i, spec, config);
      if (config.mode == Mode::Skip && r.play_slot != nominal) fail("chunk " + std::to_string(i) + " played off-deadline");
      if (config.mode == Mode::NoSkip) {
        if (r.play_slot < nominal) fail("chunk " + std::to_string(i) + " played early");
        if (prev_play > 0 && r.play_slot < prev_play + spec.chunk_duration()) {
          fail("chunk " + std::to_string(i) + " overlaps the previous chunk's playback");
        }
        if (r.final_level == kSkipped) fail("chunk " + std::to_string(i) + " skipped in no-skip mode");
      }
      prev_play = r.play_slot;
    }
    if (r.first_slot > 0) spans.emplace_back(r.first_slot, r.played ? r.play_slot : log.slots() + 1);
  }
  if (config.mode == Mode::NoSkip && !log.truncated && C > 0) {
    Slot expect = log.chunks.back().play_slot - deadline_of(C, spec, config);
    if (log.stall_duration != expect) fail("reported stall disagrees with the playback slots");
  }
  detail::check_buffer(spans, spec.chunk_duration(), config.buffer_capacity, rep);
  return rep;
}

}  // namespace svclbp
