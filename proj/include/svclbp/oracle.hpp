#pragma once

// Exhaustive optimizer for small instances. It shares no scheduling code with
// the planners: feasibility is a slot-by-slot in-order fetch that checks the
// buffer rule directly, and objective weights come from a precomputed table.

#include "svclbp/model.hpp"
#include "svclbp/types.hpp"

#include <set>
#include <string>
#include <vector>

namespace svclbp {

struct OracleLimits {
  int max_chunks = 10;
  int max_enh_layers = 2;
};

struct SkipOracleResult {
  Rational best_objective;
  std::vector<std::vector<Level>> optimal;                 // every argmax, lexicographic order
  int min_skips = 0;
  std::vector<std::vector<ChunkIndex>> min_skip_sets;      // skip sets of feasible assignments with min_skips
  std::uint64_t feasible_count = 0;
};

struct NoSkipOracleResult {
  Slot min_stall = 0;
  Rational best_objective;                                 // quality - lambda * min_stall
  std::vector<std::vector<Level>> optimal;
  std::uint64_t feasible_count = 0;                        // assignments reaching min_stall
};

namespace oracle_detail {

/// Fetch state after a prefix of chunks: slots before `slot` are spent.
struct FetchState {
  Slot slot = 1;
  Kilobits left = 0;            // unused kb of `slot`
  std::vector<Slot> holders;    // deadlines of fetched chunks
  Slot extra = 0;               // accumulated stall (no-skip)
};

class Fetcher {
 public:
  Fetcher(const VideoSpec& spec, const StreamConfig& config, const BandwidthTrace& trace, Slot horizon)
      : spec_(spec), config_(config) {
    bw_.assign(static_cast<std::size_t>(horizon), 0);
    for (Slot j = 1; j <= horizon; ++j) bw_[static_cast<std::size_t>(j - 1)] = trace.at(j);
  }

  FetchState initial() const { return FetchState{1, cap(1), {}, 0}; }

  /// Appends chunk i at `level`. Skip mode: false when the chunk misses its
  /// deadline. No-skip mode: lateness becomes stall; false when the trace ends.
  bool append(FetchState& st, ChunkIndex i, Level level) const {
    if (level == kSkipped) return true;
    const Slot nominal = static_cast<Slot>(i - 1) * spec_.chunk_duration() + config_.startup_delay;
    Slot due = nominal + st.extra;
    Kilobits remaining = spec_.cumulative_size(level, i);
    bool started = false;
    while (remaining > 0) {
      if (st.slot > horizon()) return false;
      if (config_.mode == Mode::Skip && st.slot > due) return false;
      if (!started) {
        Slot t = st.slot;
        Slot occupied = 0;
        for (Slot h : st.holders) occupied += h > t ? spec_.chunk_duration() : 0;
        if (due > t) occupied += spec_.chunk_duration();
        bool can_start = occupied <= config_.buffer_capacity;
        if (!can_start || st.left == 0) {
          advance(st);
          continue;
        }
        started = true;
      }
      Kilobits take = std::min(st.left, remaining);
      st.left -= take;
      remaining -= take;
      if (remaining > 0) advance(st);
    }
    if (config_.mode == Mode::NoSkip && st.slot > due) {
      st.extra += st.slot - due;
      due = st.slot;
    }
    st.holders.push_back(due);
    return true;
  }

 private:
  Slot horizon() const { return static_cast<Slot>(bw_.size()); }
  Kilobits cap(Slot j) const { return j >= 1 && j <= horizon() ? bw_[static_cast<std::size_t>(j - 1)] : 0; }
  void advance(FetchState& st) const {
    ++st.slot;
    st.left = cap(st.slot);
  }

  const VideoSpec& spec_;
  const StreamConfig& config_;
  std::vector<Kilobits> bw_;
};

/// value[i][l]: objective numerator of chunk i at cumulative level l, over
/// the common denominator h^N * q^C where gamma = g/h and beta = p/q.
struct WeightTable {
  std::vector<std::vector<BigInt>> value;
  BigInt denominator;

  WeightTable(const VideoSpec& spec, const StreamConfig& config) {
    const int C = spec.num_chunks(), N = spec.num_enh_layers();
    BigInt g = boost::multiprecision::numerator(config.gamma), h = boost::multiprecision::denominator(config.gamma);
    BigInt p = boost::multiprecision::numerator(config.beta), q = boost::multiprecision::denominator(config.beta);
    std::vector<BigInt> gpow(static_cast<std::size_t>(N + 1), 1), hpow(gpow), ppow(static_cast<std::size_t>(C + 1), 1),
        qpow(ppow);
    for (int n = 1; n <= N; ++n) {
      gpow[static_cast<std::size_t>(n)] = gpow[static_cast<std::size_t>(n - 1)] * g;
      hpow[static_cast<std::size_t>(n)] = hpow[static_cast<std::size_t>(n - 1)] * h;
    }
    for (int i = 1; i <= C; ++i) {
      ppow[static_cast<std::size_t>(i)] = ppow[static_cast<std::size_t>(i - 1)] * p;
      qpow[static_cast<std::size_t>(i)] = qpow[static_cast<std::size_t>(i - 1)] * q;
    }
    denominator = hpow[static_cast<std::size_t>(N)] * qpow[static_cast<std::size_t>(C)];
    value.assign(static_cast<std::size_t>(C), std::vector<BigInt>(static_cast<std::size_t>(N + 2), 0));
    for (int i = 1; i <= C; ++i) {
      BigInt acc = 0;
      for (int n = 0; n <= N; ++n) {
        acc += gpow[static_cast<std::size_t>(n)] * hpow[static_cast<std::size_t>(N - n)] *
               ppow[static_cast<std::size_t>(i)] * qpow[static_cast<std::size_t>(C - i)] * spec.layer_size(n, i);
        value[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(n + 1)] = acc;  // slot 0 = skipped
      }
    }
  }

  const BigInt& at(ChunkIndex i, Level l) const {
    return value[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(l + 1)];
  }
};

inline void check_limits(const VideoSpec& spec, const OracleLimits& limits) {
  if (spec.num_chunks() > limits.max_chunks || spec.num_enh_layers() > limits.max_enh_layers) {
    throw InvalidInput("instance exceeds oracle limits (C <= " + std::to_string(limits.max_chunks) +
                       ", N <= " + std::to_string(limits.max_enh_layers) + ")");
  }
}

inline Slot skip_horizon(const VideoSpec& spec, const StreamConfig& config) {
  return static_cast<Slot>(spec.num_chunks() - 1) * spec.chunk_duration() + config.startup_delay;
}

}  // namespace oracle_detail

/// Whether the levels admit an in-order schedule meeting every deadline and
/// the buffer limit (skip mode).
inline bool oracle_feasible_skip(const VideoSpec& spec, const StreamConfig& config, const BandwidthTrace& trace,
                                 const std::vector<Level>& levels) {
  StreamConfig c = config;
  c.mode = Mode::Skip;
  oracle_detail::Fetcher f(spec, c, trace, oracle_detail::skip_horizon(spec, c));
  auto st = f.initial();
  for (ChunkIndex i = 1; i <= spec.num_chunks(); ++i) {
    if (!f.append(st, i, levels.at(static_cast<std::size_t>(i - 1)))) return false;
  }
  return true;
}

/// Minimum total stall of an all-fetched assignment (nullopt if the trace
/// ends first).
inline std::optional<Slot> oracle_stall(const VideoSpec& spec, const StreamConfig& config, const BandwidthTrace& trace,
                                        const std::vector<Level>& levels) {
  StreamConfig c = config;
  c.mode = Mode::NoSkip;
  oracle_detail::Fetcher f(spec, c, trace, std::max(trace.length(), oracle_detail::skip_horizon(spec, c)));
  auto st = f.initial();
  for (ChunkIndex i = 1; i <= spec.num_chunks(); ++i) {
    if (!f.append(st, i, levels.at(static_cast<std::size_t>(i - 1)))) return std::nullopt;
  }
  return st.extra;
}

inline SkipOracleResult enumerate_optimal_skip(const VideoSpec& spec, const StreamConfig& config,
                                               const BandwidthTrace& trace, const OracleLimits& limits = {}) {
  oracle_detail::check_limits(spec, limits);
  StreamConfig c = config;
  c.mode = Mode::Skip;
  oracle_detail::Fetcher fetcher(spec, c, trace, oracle_detail::skip_horizon(spec, c));
  oracle_detail::WeightTable weights(spec, c);
  const int C = spec.num_chunks();

  SkipOracleResult out;
  BigInt best = -1;
  int min_skips = C + 1;
  std::set<std::vector<ChunkIndex>> skip_sets;
  std::vector<Level> levels(static_cast<std::size_t>(C), kSkipped);

  auto dfs = [&](auto&& self, ChunkIndex i, const oracle_detail::FetchState& st, const BigInt& value,
                 int skips) -> void {
    if (i > C) {
      ++out.feasible_count;
      if (value > best) {
        best = value;
        out.optimal.clear();
      }
      if (value == best) out.optimal.push_back(levels);
      if (skips < min_skips) {
        min_skips = skips;
        skip_sets.clear();
      }
      if (skips == min_skips) {
        std::vector<ChunkIndex> s;
        for (ChunkIndex k = 1; k <= C; ++k) {
          if (levels[static_cast<std::size_t>(k - 1)] == kSkipped) s.push_back(k);
        }
        skip_sets.insert(std::move(s));
      }
      return;
    }
    for (Level l = kSkipped; l <= spec.top_level(); ++l) {
      auto next = st;
      if (!fetcher.append(next, i, l)) break;  // higher levels need even more
      levels[static_cast<std::size_t>(i - 1)] = l;
      self(self, i + 1, next, value + weights.at(i, l), skips + (l == kSkipped ? 1 : 0));
    }
    levels[static_cast<std::size_t>(i - 1)] = kSkipped;
  };
  dfs(dfs, 1, fetcher.initial(), BigInt(0), 0);

  out.best_objective = Rational(best, weights.denominator);
  out.min_skips = min_skips;
  out.min_skip_sets.assign(skip_sets.begin(), skip_sets.end());
  return out;
}

inline NoSkipOracleResult enumerate_optimal_noskip(const VideoSpec& spec, const StreamConfig& config,
                                                   const BandwidthTrace& trace, const OracleLimits& limits = {}) {
  oracle_detail::check_limits(spec, limits);
  StreamConfig c = config;
  c.mode = Mode::NoSkip;
  if (c.buffer_capacity < spec.chunk_duration()) {
    throw ValidationError("no-skip streaming needs a buffer of at least one chunk duration");
  }
  oracle_detail::Fetcher fetcher(spec, c, trace, std::max(trace.length(), oracle_detail::skip_horizon(spec, c)));
  oracle_detail::WeightTable weights(spec, c);
  const int C = spec.num_chunks();

  NoSkipOracleResult out;
  bool any = false;
  Slot best_stall = 0;
  BigInt best = 0;
  std::vector<Level> levels(static_cast<std::size_t>(C), 0);

  auto dfs = [&](auto&& self, ChunkIndex i, const oracle_detail::FetchState& st, const BigInt& value) -> void {
    if (any && st.extra > best_stall) return;  // stall only grows along a prefix
    if (i > C) {
      if (!any || st.extra < best_stall || (st.extra == best_stall && value > best)) {
        if (!any || st.extra < best_stall) out.feasible_count = 0;
        any = true;
        best_stall = st.extra;
        best = value;
        out.optimal.clear();
      }
      if (st.extra == best_stall) {
        ++out.feasible_count;
        if (value == best) out.optimal.push_back(levels);
      }
      return;
    }
    for (Level l = 0; l <= spec.top_level(); ++l) {
      auto next = st;
      if (!fetcher.append(next, i, l)) break;
      levels[static_cast<std::size_t>(i - 1)] = l;
      self(self, i + 1, next, value + weights.at(i, l));
    }
    levels[static_cast<std::size_t>(i - 1)] = 0;
  };
  dfs(dfs, 1, fetcher.initial(), BigInt(0));
  if (!any) throw ValidationError("bandwidth trace ends before every base layer can be fetched");

  out.min_stall = best_stall;
  out.best_objective = Rational(best, weights.denominator) - c.lambda * best_stall;
  return out;
}

}  // namespace svclbp
