#pragma once

// Domain types shared by every part of the scheduler: video layout, stream
// configuration, bandwidth traces and the plan produced by the planners.
//
// Units are integral throughout: sizes in kilobits, bandwidth in kilobits
// per slot, time in slots. Chunk indices and slot indices are 1-based, the
// same way deadlines are written, so deadline_of(1) == startup delay.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace svclbp {

using Kilobits = std::int64_t;
using Slot = std::int64_t;
using ChunkIndex = int;
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Cumulative quality level of a chunk: kSkipped, 0 (base layer) or n (up to EL_n).
using Level = int;
inline constexpr Level kSkipped = -1;

enum class Mode { Skip, NoSkip };

inline const char* to_string(Mode m) { return m == Mode::Skip ? "skip" : "noskip"; }

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract input (bad file, bad index, bad parameter).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A well-formed input that fails a model condition (weights, feasibility).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Broken internal consistency; indicates a bug rather than bad input.
class InternalError : public Error {
 public:
  using Error::Error;
};

namespace detail {
inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidInput(what);
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Rational helpers

/// Parses "3", "-2/5", "0.9" or "1.001" into an exact rational.
inline Rational parse_rational(const std::string& text) {
  auto fail = [&] { throw InvalidInput("not a rational number: '" + text + "'"); };
  if (text.empty()) fail();
  auto digits_only = [](const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  std::string body = text;
  bool negative = false;
  if (body[0] == '-' || body[0] == '+') {
    negative = body[0] == '-';
    body.erase(0, 1);
  }
  Rational value;
  if (auto slash = body.find('/'); slash != std::string::npos) {
    std::string num = body.substr(0, slash), den = body.substr(slash + 1);
    if (!digits_only(num) || !digits_only(den)) fail();
    BigInt d(den);
    if (d == 0) fail();
    value = Rational(BigInt(num), d);
  } else if (auto dot = body.find('.'); dot != std::string::npos) {
    std::string whole = body.substr(0, dot), frac = body.substr(dot + 1);
    if (whole.empty()) whole = "0";
    if (!digits_only(whole) || (!frac.empty() && !digits_only(frac))) fail();
    BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(frac.size()));
    value = Rational(BigInt(whole) * scale + (frac.empty() ? BigInt(0) : BigInt(frac)), scale);
  } else {
    if (!digits_only(body)) fail();
    value = Rational(BigInt(body));
  }
  return negative ? Rational(-value) : value;
}

/// "num/den" (or "num" for integers); round-trips through parse_rational.
inline std::string format_rational(const Rational& r) {
  const BigInt& n = boost::multiprecision::numerator(r);
  const BigInt& d = boost::multiprecision::denominator(r);
  return d == 1 ? n.str() : n.str() + "/" + d.str();
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

// ---------------------------------------------------------------------------
// Video layout

/// Size of one layer: a nominal CBR size, or one size per chunk (VBR).
using LayerSizes = std::variant<Kilobits, std::vector<Kilobits>>;

class VideoSpec {
 public:
  VideoSpec() = default;

  VideoSpec(int num_chunks, Slot chunk_duration, std::vector<LayerSizes> layers)
      : num_chunks_(num_chunks), chunk_duration_(chunk_duration) {
    detail::require(num_chunks >= 1, "num_chunks must be positive");
    detail::require(chunk_duration >= 1, "chunk_duration must be a positive number of slots");
    detail::require(!layers.empty(), "at least the base layer is required");
    sizes_.resize(layers.size());
    for (std::size_t n = 0; n < layers.size(); ++n) {
      if (const auto* nominal = std::get_if<Kilobits>(&layers[n])) {
        sizes_[n].assign(static_cast<std::size_t>(num_chunks), *nominal);
      } else {
        const auto& per_chunk = std::get<std::vector<Kilobits>>(layers[n]);
        detail::require(per_chunk.size() == static_cast<std::size_t>(num_chunks),
                        "layer " + std::to_string(n) + ": per-chunk size vector must have exactly " +
                            std::to_string(num_chunks) + " entries");
        sizes_[n] = per_chunk;
        cbr_ = false;
      }
      for (Kilobits y : sizes_[n]) {
        detail::require(n == 0 ? y > 0 : y >= 0,
                        n == 0 ? "base layer sizes must be positive"
                               : "enhancement layer sizes must be non-negative");
      }
    }
    cumulative_.assign(sizes_.size(), std::vector<Kilobits>(static_cast<std::size_t>(num_chunks)));
    for (int i = 0; i < num_chunks; ++i) {
      Kilobits acc = 0;
      for (std::size_t n = 0; n < sizes_.size(); ++n) {
        acc += sizes_[n][static_cast<std::size_t>(i)];
        cumulative_[n][static_cast<std::size_t>(i)] = acc;
      }
    }
    layers_ = std::move(layers);
  }

  /// CBR convenience: one nominal size per layer.
  static VideoSpec cbr(int num_chunks, Slot chunk_duration, const std::vector<Kilobits>& layer_kb) {
    std::vector<LayerSizes> layers(layer_kb.begin(), layer_kb.end());
    return VideoSpec(num_chunks, chunk_duration, std::move(layers));
  }

  int num_chunks() const { return num_chunks_; }
  Slot chunk_duration() const { return chunk_duration_; }
  int num_enh_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  int num_layers() const { return static_cast<int>(sizes_.size()); }
  Level top_level() const { return num_enh_layers(); }
  bool is_cbr() const { return cbr_; }
  const std::vector<LayerSizes>& layers() const { return layers_; }

  /// Y_n for chunk i (1-based).
  Kilobits layer_size(int layer, ChunkIndex i) const { return sizes_.at(static_cast<std::size_t>(layer)).at(idx(i)); }

  /// X_n(i) = sum of Y_m(i) for m <= n; zero for kSkipped.
  Kilobits cumulative_size(Level level, ChunkIndex i) const {
    if (level < 0) return 0;
    return cumulative_.at(static_cast<std::size_t>(level)).at(idx(i));
  }

  /// Highest level whose cumulative size is fully covered by `delivered`.
  Level complete_level(ChunkIndex i, Kilobits delivered) const {
    Level best = kSkipped;
    for (Level n = 0; n <= top_level(); ++n) {
      if (cumulative_size(n, i) <= delivered) best = n;
    }
    return best;
  }

 private:
  std::size_t idx(ChunkIndex i) const {
    if (i < 1 || i > num_chunks_) throw InvalidInput("chunk index out of range: " + std::to_string(i));
    return static_cast<std::size_t>(i - 1);
  }

  int num_chunks_ = 0;
  Slot chunk_duration_ = 1;
  bool cbr_ = true;
  std::vector<LayerSizes> layers_;
  std::vector<std::vector<Kilobits>> sizes_;
  std::vector<std::vector<Kilobits>> cumulative_;
};

// ---------------------------------------------------------------------------
// Stream configuration

struct StreamConfig {
  Slot startup_delay = 5;
  Slot buffer_capacity = 10;
  Rational gamma{9, 10};
  Rational beta{1001, 1000};
  Rational lambda{0};
  Mode mode = Mode::Skip;
};

// ---------------------------------------------------------------------------
// Bandwidth

class BandwidthTrace {
 public:
  BandwidthTrace() = default;
  explicit BandwidthTrace(std::vector<Kilobits> capacities, int slot_seconds = 1)
      : capacities_(std::move(capacities)), slot_seconds_(slot_seconds) {
    detail::require(slot_seconds >= 1, "slot duration must be a positive number of seconds");
    for (Kilobits c : capacities_) detail::require(c >= 0, "bandwidth trace entries must be non-negative");
  }

  /// B(j) for 1-based slot j; slots past the end read as zero.
  Kilobits at(Slot j) const {
    if (j < 1 || j > length()) return 0;
    return capacities_[static_cast<std::size_t>(j - 1)];
  }
  Slot length() const { return static_cast<Slot>(capacities_.size()); }
  int slot_seconds() const { return slot_seconds_; }
  const std::vector<Kilobits>& capacities() const { return capacities_; }

  /// Zero-extended or truncated copy covering exactly slots 1..horizon.
  BandwidthTrace fitted(Slot horizon) const {
    std::vector<Kilobits> out(static_cast<std::size_t>(std::max<Slot>(horizon, 0)), 0);
    for (Slot j = 1; j <= std::min(horizon, length()); ++j) out[static_cast<std::size_t>(j - 1)] = at(j);
    return BandwidthTrace(std::move(out), slot_seconds_);
  }

  Kilobits total() const { return std::accumulate(capacities_.begin(), capacities_.end(), Kilobits{0}); }

  friend bool operator==(const BandwidthTrace&, const BandwidthTrace&) = default;

 private:
  std::vector<Kilobits> capacities_;
  int slot_seconds_ = 1;
};

// ---------------------------------------------------------------------------
// Plans

/// `kb` kilobits of chunk `chunk` moved during slot `slot`.
struct Transfer {
  Slot slot = 0;
  ChunkIndex chunk = 0;
  Kilobits kb = 0;
  friend bool operator==(const Transfer&, const Transfer&) = default;
};

/// Per-chunk layer decisions plus the timing metadata of the earliest
/// in-order schedule that realizes them. Vectors indexed by chunk hold
/// entry i-1 for chunk i; slot-indexed vectors hold entry j-1 for slot j.
struct LayerPlan {
  Mode mode = Mode::Skip;
  std::vector<Level> level;
  std::vector<Kilobits> size;            // X(i)
  std::vector<Slot> lower_deadline;      // t(i); 0 when skipped
  std::vector<Slot> deadline;            // upper deadline incl. planned stalls
  std::vector<Kilobits> head_fetch;      // a(i)
  std::vector<Kilobits> residual;        // e(j)
  std::vector<Slot> stall_before;        // d(i); zeros in skip mode
  std::vector<Transfer> schedule;        // earliest in-order realization
  // Loop iterations of each backward / forward pass, one entry per layer.
  std::vector<std::int64_t> backward_iterations;
  std::vector<std::int64_t> forward_iterations;

  int num_chunks() const { return static_cast<int>(level.size()); }
  Level level_of(ChunkIndex i) const { return level.at(static_cast<std::size_t>(i - 1)); }
  Kilobits size_of(ChunkIndex i) const { return size.at(static_cast<std::size_t>(i - 1)); }
  Slot deadline_of(ChunkIndex i) const { return deadline.at(static_cast<std::size_t>(i - 1)); }
  Slot total_stall() const { return stall_before.empty() ? 0 : stall_before.back(); }

  /// I_n: chunks fetched at least up to layer n.
  std::vector<ChunkIndex> layer_set(int n) const {
    std::vector<ChunkIndex> out;
    for (std::size_t i = 0; i < level.size(); ++i) {
      if (level[i] >= n) out.push_back(static_cast<ChunkIndex>(i + 1));
    }
    return out;
  }

  /// Indices of skipped chunks, ascending.
  std::vector<ChunkIndex> skipped() const {
    std::vector<ChunkIndex> out;
    for (std::size_t i = 0; i < level.size(); ++i) {
      if (level[i] == kSkipped) out.push_back(static_cast<ChunkIndex>(i + 1));
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// QoE

struct QoEReport {
  int skip_count = 0;
  Slot skip_duration = 0;
  Slot stall_duration = 0;
  Rational avg_playback_rate;   // kilobits per second
  Rational lsr;                 // layer switching rate
  std::vector<int> layer_histogram;  // [S, BL, EL1..ELN]
  Rational objective;
};

}  // namespace svclbp
