#pragma once

// Backward/forward scans over a generic planning instance. The offline
// planners build an instance from (VideoSpec, StreamConfig, trace); the
// online engine builds one from the current session state, so the same code
// handles pre-buffered chunks and a partially fetched head chunk.

#include "svclbp/types.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace svclbp::detail {

/// Chunks first..last of a session seen from slot `start`. Local index k
/// refers to chunk first + k.
struct Instance {
  ChunkIndex first = 1;
  Slot start = 1;
  int q = 0;                                   // floor(B_m / L)
  Slot chunk_duration = 1;
  std::vector<Slot> deadline;                  // per local chunk
  std::vector<std::vector<Kilobits>> need;     // need[k][n]: kb still missing for level n
  std::vector<Level> done_level;               // level already complete before `start`
  std::vector<Kilobits> bw;                    // bw[j - start] for slots start..horizon()
  std::vector<Slot> prebuffered;               // ascending deadlines of started, unplayed chunks
  bool first_started = false;                  // local chunk 0 is already in `prebuffered`

  int size() const { return static_cast<int>(deadline.size()); }
  int top() const { return need.empty() ? 0 : static_cast<int>(need.front().size()) - 1; }
  Slot horizon() const { return start + static_cast<Slot>(bw.size()) - 1; }
  Kilobits cap(Slot j) const {
    if (j < start || j > horizon()) return 0;
    return bw[static_cast<std::size_t>(j - start)];
  }
  Kilobits need_at(int k, Level l) const {
    return l < 0 ? 0 : need[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
  }
  bool inherited(int k) const { return first_started && k == 0; }
};

struct LocalTransfer {
  Slot slot;
  int k;
  Kilobits kb;
};

struct ForwardResult {
  std::vector<Slot> first_slot;      // t(k); 0 when the chunk is not fetched
  std::vector<Kilobits> head;        // a(k)
  std::vector<Kilobits> prior;       // kb of earlier chunks in slot t(k)
  std::vector<Slot> finish_slot;     // last slot with bytes (t(k) for empty fetches)
  std::vector<Kilobits> residual;    // e(j) for j = start..horizon
  std::vector<LocalTransfer> transfers;
  std::int64_t iterations = 0;
};

/// Earliest slot a fetched chunk may begin, given the deadlines of chunks
/// already holding buffer space (ascending).
inline Slot release_slot(const std::vector<Slot>& holders, int q, Slot start, Slot own_deadline) {
  if (q <= 0) return own_deadline;
  const std::size_t m = holders.size();
  if (m < static_cast<std::size_t>(q)) return start;
  return std::max(start, holders[m - static_cast<std::size_t>(q)]);
}

/// In-order earliest fetch of the chunks at levels `lvl` (kSkipped = not fetched)
/// against deadlines `deadline`. Throws InternalError when infeasible.
inline ForwardResult forward_fill(const Instance& inst, const std::vector<Level>& lvl,
                                  const std::vector<Slot>& deadline) {
  const int K = inst.size();
  ForwardResult out;
  out.first_slot.assign(static_cast<std::size_t>(K), 0);
  out.head.assign(static_cast<std::size_t>(K), 0);
  out.prior.assign(static_cast<std::size_t>(K), 0);
  out.finish_slot.assign(static_cast<std::size_t>(K), 0);
  out.residual = inst.bw;
  auto res = [&](Slot j) -> Kilobits& { return out.residual[static_cast<std::size_t>(j - inst.start)]; };

  std::vector<Slot> holders = inst.prebuffered;
  Slot j = inst.start;
  int k = 0;
  bool active = false, touched = false;
  Kilobits remaining = 0;
  while (k < K) {
    ++out.iterations;
    const auto uk = static_cast<std::size_t>(k);
    if (!active) {
      if (lvl[uk] == kSkipped) {
        ++k;
        continue;
      }
      remaining = inst.need_at(k, lvl[uk]);
      Slot r = inst.inherited(k) ? inst.start : release_slot(holders, inst.q, inst.start, deadline[uk]);
      j = std::max(j, r);
      if (remaining == 0) {
        out.first_slot[uk] = out.finish_slot[uk] = j;
        out.prior[uk] = j <= inst.horizon() ? inst.cap(j) - res(j) : 0;
        if (!inst.inherited(k)) holders.push_back(deadline[uk]);
        ++k;
        continue;
      }
      active = true;
      touched = false;
    }
    if (j > deadline[uk] || j > inst.horizon()) {
      throw InternalError("forward scan: chunk " + std::to_string(inst.first + k) + " cannot meet its deadline");
    }
    Kilobits take = std::min(res(j), remaining);
    if (take > 0) {
      if (!touched) {
        touched = true;
        out.first_slot[uk] = j;
        out.prior[uk] = inst.cap(j) - res(j);
        out.head[uk] = take;
      }
      res(j) -= take;
      remaining -= take;
      out.transfers.push_back({j, k, take});
    }
    if (remaining == 0) {
      out.finish_slot[uk] = j;
      if (!inst.inherited(k)) holders.push_back(deadline[uk]);
      active = false;
      ++k;
      continue;
    }
    ++j;
  }
  return out;
}

/// Latest-first placement state shared by the backward scans: slots above the
/// cursor are spent, the cursor slot keeps `res_j_`, slots below are untouched.
class BackwardCursor {
 public:
  BackwardCursor(const Instance& inst, Slot top_slot) : inst_(inst) {
    prefix_.assign(inst.bw.size() + 1, 0);
    for (std::size_t x = 0; x < inst.bw.size(); ++x) prefix_[x + 1] = prefix_[x] + inst.bw[x];
    j_ = std::min(top_slot, inst.horizon());
    res_j_ = inst.cap(j_);
  }

  Slot position() const { return j_; }

  /// kb obtainable in [lo, hi] (hi <= position) with `prior` kb of slot lo reserved.
  Kilobits available(Slot lo, Slot hi, Kilobits prior) const {
    hi = std::min(hi, j_);
    if (hi < lo || hi < inst_.start) return 0;
    lo = std::max(lo, inst_.start);
    Kilobits total = hi == j_ ? res_j_ + untouched(lo, hi - 1) : untouched(lo, hi);
    return total - prior;
  }

  /// First slot an as-late-as-possible placement of `kb` would touch.
  Slot alap_start(Slot lo, Slot hi, Kilobits prior, Kilobits kb) const {
    hi = std::min(hi, j_);
    Slot a = std::max(lo, inst_.start), b = hi;
    while (a < b) {  // largest s in [a, hi] with available(s, hi) >= kb
      Slot mid = a + (b - a + 1) / 2;
      if (available(mid, hi, mid == lo ? prior : 0) >= kb) a = mid;
      else b = mid - 1;
    }
    return a;
  }

  /// Whether a chunk occupying the buffer from `s` until `deadline` fits
  /// alongside the already placed later chunks and the pre-buffered ones.
  bool buffer_ok(Slot s, Slot deadline) const {
    if (s >= deadline) return true;
    if (inst_.q <= 0) return false;
    auto count_ok = [&](Slot x) { return pre_count(x) + placed_count(x) + 1 <= inst_.q; };
    if (!count_ok(deadline - 1)) return false;
    for (Slot b : inst_.prebuffered) {
      if (!count_ok(std::clamp(b - 1, s, deadline - 1))) return false;
    }
    return true;
  }

  void record_start(Slot s) { placed_.push_back(s); }

  /// Commits `kb` as late as possible in [lo, hi]; returns the first slot touched.
  Slot fill(Slot lo, Slot hi, Kilobits prior, Kilobits kb, std::int64_t& iterations) {
    if (kb == 0) return hi;
    if (j_ > hi) {
      j_ = hi;
      res_j_ = inst_.cap(j_);
    }
    Kilobits remaining = kb;
    while (true) {
      Kilobits usable = j_ == lo ? res_j_ - prior : res_j_;
      Kilobits take = std::clamp<Kilobits>(usable, 0, remaining);
      res_j_ -= take;
      remaining -= take;
      if (remaining == 0) return j_;
      if (j_ <= lo || j_ <= inst_.start) throw InternalError("backward scan: placement ran out of bandwidth");
      ++iterations;
      --j_;
      res_j_ = inst_.cap(j_);
    }
  }

 private:
  Kilobits untouched(Slot a, Slot b) const {
    if (b < a) return 0;
    return prefix_[static_cast<std::size_t>(b - inst_.start + 1)] - prefix_[static_cast<std::size_t>(a - inst_.start)];
  }
  int pre_count(Slot x) const {
    auto it = std::upper_bound(inst_.prebuffered.begin(), inst_.prebuffered.end(), x);
    return static_cast<int>(inst_.prebuffered.end() - it);
  }
  // placed_ is non-increasing: later chunks were placed first.
  int placed_count(Slot x) const {
    auto it = std::partition_point(placed_.begin(), placed_.end(), [&](Slot v) { return v > x; });
    return static_cast<int>(placed_.end() - it);
  }

  const Instance& inst_;
  std::vector<Kilobits> prefix_;
  std::vector<Slot> placed_;
  Slot j_ = 0;
  Kilobits res_j_ = 0;
};

struct BackwardResult {
  std::vector<Level> level;
  std::int64_t iterations = 0;
};

/// Layer-n backward pass. For n = 0 every chunk is a candidate and a rejected
/// chunk is skipped; for n >= 1 only chunks at level n-1 are candidates,
/// rejected ones keep their size, and placement is confined to [t(k), deadline]
/// minus what earlier chunks use in slot t(k).
inline BackwardResult backward_layer(const Instance& inst, int n, const std::vector<Level>& lvl,
                                     const ForwardResult* fwd, const std::vector<Slot>& deadline) {
  const int K = inst.size();
  BackwardResult out;
  out.level = lvl;
  if (K == 0) return out;
  BackwardCursor cur(inst, deadline.back());
  for (int k = K - 1; k >= 0; --k) {
    ++out.iterations;
    const auto uk = static_cast<std::size_t>(k);
    const Level now = n == 0 ? kSkipped : lvl[uk];
    if (n >= 1 && now == kSkipped) continue;
    const bool candidate = n == 0 || now == n - 1;
    const Slot lo = n == 0 ? inst.start : fwd->first_slot[uk];
    const Kilobits prior = n == 0 ? 0 : fwd->prior[uk];
    const Slot hi = std::min(deadline[uk], cur.position());

    Level target = candidate ? std::max<Level>(n, inst.done_level[uk]) : now;
    Kilobits kb = inst.need_at(k, target);
    bool ok = cur.available(lo, hi, prior) >= kb;
    Slot s = hi;
    if (ok && kb > 0 && n == 0 && !inst.inherited(k)) {
      s = cur.alap_start(lo, hi, prior, kb);
      ok = cur.buffer_ok(s, deadline[uk]);
    }
    if (!ok) {
      if (n == 0) {
        out.level[uk] = kSkipped;
        continue;
      }
      target = now;
      kb = inst.need_at(k, target);
      if (cur.available(lo, hi, prior) < kb) {
        throw InternalError("backward scan: chunk " + std::to_string(inst.first + k) + " lost its lower layers");
      }
    }
    out.level[uk] = target;
    Slot first = cur.fill(lo, hi, prior, kb, out.iterations);
    if (n == 0 && kb > 0 && !inst.inherited(k)) cur.record_start(first);
  }
  return out;
}

struct StallResult {
  std::vector<Slot> d;          // cumulative stall before each local chunk
  std::int64_t iterations = 0;
};

/// In-order fetch of every chunk at `lvl` (base layer when empty) where a late
/// chunk pushes its own and all later deadlines back by its lateness.
inline StallResult forward_stalls(const Instance& inst, const std::vector<Level>& lvl = {}) {
  if (inst.q < 1) throw ValidationError("no-skip streaming needs a buffer of at least one chunk duration");
  const int K = inst.size();
  StallResult out;
  out.d.assign(static_cast<std::size_t>(K), 0);
  std::vector<Kilobits> res = inst.bw;
  std::vector<Slot> holders = inst.prebuffered;
  Slot j = inst.start, extra = 0;
  int k = 0;
  bool active = false;
  Kilobits remaining = 0;
  Slot due = 0;
  bool touched_any = false;
  while (k < K) {
    ++out.iterations;
    const auto uk = static_cast<std::size_t>(k);
    if (!active) {
      due = inst.deadline[uk] + extra;
      remaining = inst.need_at(k, lvl.empty() ? 0 : std::max<Level>(0, lvl[uk]));
      Slot r = inst.inherited(k) ? inst.start : release_slot(holders, inst.q, inst.start, due);
      j = std::max(j, r);
      active = true;
      touched_any = remaining > 0;
    }
    if (remaining > 0) {
      if (j > inst.horizon()) {
        throw ValidationError("bandwidth trace ends before the base layer of chunk " +
                              std::to_string(inst.first + k) + " can be fetched");
      }
      Kilobits& slot_res = res[static_cast<std::size_t>(j - inst.start)];
      Kilobits take = std::min(slot_res, remaining);
      slot_res -= take;
      remaining -= take;
    }
    if (remaining == 0) {
      if (j > due && touched_any) {
        extra += j - due;
        due = j;
      }
      out.d[uk] = extra;
      if (!inst.inherited(k)) holders.push_back(due);
      active = false;
      ++k;
      continue;
    }
    ++j;
  }
  return out;
}

struct RepositionResult {
  std::vector<Slot> d_final;
  std::int64_t iterations = 0;
};

/// Backward base-layer placement that keeps the total stall and moves every
/// stall as early as the buffer allows.
inline RepositionResult reposition_stalls(const Instance& inst, const std::vector<Slot>& d) {
  const int K = inst.size();
  RepositionResult out;
  out.d_final.assign(static_cast<std::size_t>(K), 0);
  if (K == 0) return out;
  const Slot total = d.back();
  BackwardCursor cur(inst, inst.deadline.back() + total);
  const Slot guard = inst.deadline.front() + total;
  for (int k = K - 1; k >= 0; --k) {
    ++out.iterations;
    const auto uk = static_cast<std::size_t>(k);
    Slot dk = k == K - 1 ? total : out.d_final[uk + 1];
    const Kilobits kb = inst.need_at(k, 0);
    Slot s = 0, due = 0;
    for (Slot tries = 0;; ++tries) {
      if (tries > guard || dk < d[uk]) {
        throw InternalError("stall repositioning: no buffer-feasible deadline for chunk " +
                            std::to_string(inst.first + k));
      }
      due = inst.deadline[uk] + dk;
      const Slot hi = std::min(due, cur.position());
      if (cur.available(inst.start, hi, 0) < kb) {
        throw InternalError("stall repositioning: chunk " + std::to_string(inst.first + k) + " does not fit");
      }
      s = kb > 0 ? cur.alap_start(inst.start, hi, 0, kb) : hi;
      if (kb == 0 || inst.inherited(k) || cur.buffer_ok(s, due)) break;
      --dk;
    }
    out.d_final[uk] = dk;
    Slot first = cur.fill(inst.start, std::min(due, cur.position()), 0, kb, out.iterations);
    if (kb > 0 && !inst.inherited(k)) cur.record_start(first);
  }
  return out;
}

/// Levels plus the final forward schedule for one instance.
struct InstancePlan {
  std::vector<Level> level;
  std::vector<Slot> deadline;     // deadlines the schedule was built against
  std::vector<Slot> d;            // forward stalls (no-skip), zeros otherwise
  std::vector<Slot> d_final;      // repositioned stalls (no-skip), zeros otherwise
  ForwardResult schedule;
  std::vector<std::int64_t> backward_iterations;  // per layer
  std::vector<std::int64_t> forward_iterations;   // per layer
};

inline void enhancement_layers(const Instance& inst, InstancePlan& plan) {
  for (int n = 1; n <= inst.top(); ++n) {
    BackwardResult b = backward_layer(inst, n, plan.level, &plan.schedule, plan.deadline);
    plan.backward_iterations.push_back(b.iterations);
    plan.level = std::move(b.level);
    plan.schedule = forward_fill(inst, plan.level, plan.deadline);
    plan.forward_iterations.push_back(plan.schedule.iterations);
  }
}

inline InstancePlan plan_skip_instance(const Instance& inst) {
  InstancePlan plan;
  plan.deadline = inst.deadline;
  plan.d.assign(inst.deadline.size(), 0);
  plan.d_final = plan.d;
  BackwardResult b = backward_layer(inst, 0, std::vector<Level>(inst.deadline.size(), kSkipped), nullptr,
                                    plan.deadline);
  plan.backward_iterations.push_back(b.iterations);
  plan.level = std::move(b.level);
  plan.schedule = forward_fill(inst, plan.level, plan.deadline);
  plan.forward_iterations.push_back(plan.schedule.iterations);
  enhancement_layers(inst, plan);
  return plan;
}

inline InstancePlan plan_noskip_instance(const Instance& inst) {
  InstancePlan plan;
  StallResult st = forward_stalls(inst);
  RepositionResult rp = reposition_stalls(inst, st.d);
  plan.d = std::move(st.d);
  plan.d_final = std::move(rp.d_final);
  plan.backward_iterations.push_back(rp.iterations);
  plan.deadline.resize(inst.deadline.size());
  for (std::size_t k = 0; k < inst.deadline.size(); ++k) plan.deadline[k] = inst.deadline[k] + plan.d_final[k];
  plan.level.assign(inst.deadline.size(), 0);
  for (std::size_t k = 0; k < plan.level.size(); ++k) plan.level[k] = std::max<Level>(0, inst.done_level[k]);
  plan.schedule = forward_fill(inst, plan.level, plan.deadline);
  plan.forward_iterations.push_back(plan.schedule.iterations);
  enhancement_layers(inst, plan);
  return plan;
}

}  // namespace svclbp::detail
