#pragma once

// Bandwidth predictors used by the online engine, plus error injection and
// error statistics for experiments.

#include "svclbp/types.hpp"

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <variant>
#include <vector>

namespace svclbp {

// ---------------------------------------------------------------------------
// Plain functions

/// Exact harmonic mean n / sum(1/h_k); zero entries count as 1 kb/slot.
inline Rational harmonic_mean(const std::vector<Kilobits>& history) {
  detail::require(!history.empty(), "harmonic mean of an empty history");
  Rational inv = 0;
  for (Kilobits h : history) {
    detail::require(h >= 0, "bandwidth history entries must be non-negative");
    inv += Rational(1, std::max<Kilobits>(h, 1));
  }
  return Rational(static_cast<std::int64_t>(history.size())) / inv;
}

/// Nearest integer, halves rounded up.
inline Kilobits round_kb(const Rational& r) {
  Rational shifted = r + Rational(1, 2);
  BigInt q = boost::multiprecision::numerator(shifted) / boost::multiprecision::denominator(shifted);
  if (q * boost::multiprecision::denominator(shifted) > boost::multiprecision::numerator(shifted)) --q;  // floor
  return q.convert_to<Kilobits>();
}

/// Constant forecast at the harmonic mean of `history`, rounded to whole kilobits.
inline std::vector<Kilobits> harmonic_mean_predict(const std::vector<Kilobits>& history, Slot horizon) {
  detail::require(horizon >= 1, "prediction horizon must be positive");
  return std::vector<Kilobits>(static_cast<std::size_t>(horizon), round_kb(harmonic_mean(history)));
}

/// n error terms, independent and uniform on [-pe, pe]. Uses mt19937_64 and
/// maps the top 53 bits of each draw to [0, 1), so the sequence depends only
/// on the seed.
inline std::vector<double> draw_errors(std::size_t n, double pe, std::uint64_t seed) {
  detail::require(pe >= 0 && std::isfinite(pe), "prediction error must be a non-negative number");
  std::mt19937_64 rng(seed);
  std::vector<double> out(n);
  for (auto& e : out) {
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    e = pe == 0 ? 0.0 : -pe + 2 * pe * u;
  }
  return out;
}

/// truth(j) * (1 + e_j), rounded, negatives clamped to zero.
inline BandwidthTrace inject_error(const BandwidthTrace& truth, double pe, std::uint64_t seed) {
  if (pe == 0) return truth;
  auto errors = draw_errors(static_cast<std::size_t>(truth.length()), pe, seed);
  std::vector<Kilobits> out(errors.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    double v = static_cast<double>(truth.capacities()[j]) * (1.0 + errors[j]);
    out[j] = v <= 0 ? 0 : static_cast<Kilobits>(std::llround(v));
  }
  return BandwidthTrace(std::move(out), truth.slot_seconds());
}

/// Per-bin mean over index-aligned traces: each trace is first averaged over
/// `bin_slots` consecutive slots, then bins are averaged across traces.
inline BandwidthTrace crowd_mean_trace(const std::vector<BandwidthTrace>& traces, Slot bin_slots = 1) {
  detail::require(!traces.empty(), "crowd mean of an empty trace set");
  detail::require(bin_slots >= 1, "bin width must be positive");
  const Slot T = traces.front().length();
  for (const auto& t : traces) detail::require(t.length() == T, "crowd traces must be aligned to the same length");
  const Slot bins = (T + bin_slots - 1) / bin_slots;
  std::vector<Kilobits> out(static_cast<std::size_t>(bins));
  for (Slot b = 0; b < bins; ++b) {
    Rational acc = 0;
    const Slot lo = b * bin_slots + 1, hi = std::min(T, (b + 1) * bin_slots);
    for (const auto& t : traces) {
      Kilobits sum = 0;
      for (Slot j = lo; j <= hi; ++j) sum += t.at(j);
      acc += Rational(sum, hi - lo + 1);
    }
    out[static_cast<std::size_t>(b)] = round_kb(acc / static_cast<std::int64_t>(traces.size()));
  }
  return BandwidthTrace(std::move(out), traces.front().slot_seconds());
}

/// sum |B - pred| / B over slots with B > 0, divided by their count.
inline Rational prediction_error_metric(const BandwidthTrace& pred, const BandwidthTrace& truth) {
  detail::require(pred.length() == truth.length(), "prediction and truth differ in length");
  Rational acc = 0;
  std::int64_t n = 0;
  for (Slot j = 1; j <= truth.length(); ++j) {
    if (truth.at(j) == 0) continue;
    acc += Rational(std::abs(truth.at(j) - pred.at(j)), truth.at(j));
    ++n;
  }
  return n == 0 ? Rational(0) : acc / n;
}

// ---------------------------------------------------------------------------
// Predictors for the online engine

struct HarmonicMeanKind {
  Slot history_slots = 5;
  Slot horizon_slots = 20;
};
struct CrowdMeanKind {
  double error_pe = 0;
};
struct OracleKind {};

struct PredictionConfig {
  std::variant<HarmonicMeanKind, CrowdMeanKind, OracleKind> kind = OracleKind{};
  double pe = 0;
  std::vector<double> pe_profile;  // optional per-offset pe; overrides pe when non-empty
  std::uint64_t seed = 1;
};

/// Forecast of slots from..from+count-1 made at slot `from`; `observed`
/// holds the true capacities of slots 1..from-1.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::vector<Kilobits> predict(Slot from, Slot count, const std::vector<Kilobits>& observed) = 0;
};

/// Perfect knowledge of the future.
class OraclePredictor : public Predictor {
 public:
  explicit OraclePredictor(BandwidthTrace truth) : truth_(std::move(truth)) {}
  std::vector<Kilobits> predict(Slot from, Slot count, const std::vector<Kilobits>&) override {
    std::vector<Kilobits> out(static_cast<std::size_t>(std::max<Slot>(count, 0)));
    for (Slot o = 0; o < count; ++o) out[static_cast<std::size_t>(o)] = truth_.at(from + o);
    return out;
  }

 private:
  BandwidthTrace truth_;
};

/// Harmonic mean of the last `history_slots` observations. Before anything
/// has been observed it returns `cold_start` kb/slot.
class HarmonicMeanPredictor : public Predictor {
 public:
  HarmonicMeanPredictor(Slot history_slots, Kilobits cold_start) : history_(history_slots), cold_(cold_start) {
    detail::require(history_slots >= 1, "harmonic-mean history must cover at least one slot");
  }
  std::vector<Kilobits> predict(Slot, Slot count, const std::vector<Kilobits>& observed) override {
    if (count <= 0) return {};
    if (observed.empty()) return std::vector<Kilobits>(static_cast<std::size_t>(count), cold_);
    auto n = std::min<std::size_t>(observed.size(), static_cast<std::size_t>(history_));
    std::vector<Kilobits> tail(observed.end() - static_cast<std::ptrdiff_t>(n), observed.end());
    return harmonic_mean_predict(tail, count);
  }

 private:
  Slot history_;
  Kilobits cold_;
};

/// A reference trace (e.g. a crowd mean, or the truth itself) multiplied by
/// fresh uniform errors at every call. The error bound for offset o is
/// profile[min(o, size-1)]; draws are seeded by (seed, from).
class NoisyPredictor : public Predictor {
 public:
  NoisyPredictor(BandwidthTrace reference, std::vector<double> profile, std::uint64_t seed, Slot bin_slots = 1)
      : ref_(std::move(reference)), profile_(std::move(profile)), seed_(seed), bin_(bin_slots) {
    if (profile_.empty()) profile_.push_back(0);
    for (double p : profile_) detail::require(p >= 0 && std::isfinite(p), "prediction error must be non-negative");
    detail::require(bin_slots >= 1, "bin width must be positive");
  }
  std::vector<Kilobits> predict(Slot from, Slot count, const std::vector<Kilobits>&) override {
    std::vector<Kilobits> out(static_cast<std::size_t>(std::max<Slot>(count, 0)));
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                      static_cast<std::uint32_t>(from)};
    std::uint64_t sub = 0;
    {
      std::uint32_t words[2];
      seq.generate(words, words + 2);
      sub = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
    }
    std::mt19937_64 rng(sub);
    for (Slot o = 0; o < count; ++o) {
      double pe = profile_[std::min<std::size_t>(static_cast<std::size_t>(o), profile_.size() - 1)];
      double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      double e = -pe + 2 * pe * u;
      double base = static_cast<double>(ref_.at((from + o - 1) / bin_ + 1));
      double v = base * (1.0 + e);
      out[static_cast<std::size_t>(o)] = v <= 0 ? 0 : static_cast<Kilobits>(std::llround(v));
    }
    return out;
  }

 private:
  BandwidthTrace ref_;
  std::vector<double> profile_;
  std::uint64_t seed_;
  Slot bin_;
};

/// Builds the predictor described by `cfg`. `reference` is the crowd mean
/// trace for CrowdMeanKind (ignored otherwise).
inline std::unique_ptr<Predictor> make_predictor(const PredictionConfig& cfg, const BandwidthTrace& truth,
                                                 Kilobits cold_start, const BandwidthTrace* reference = nullptr,
                                                 Slot bin_slots = 1) {
  std::vector<double> profile = cfg.pe_profile.empty() ? std::vector<double>{cfg.pe} : cfg.pe_profile;
  if (const auto* hm = std::get_if<HarmonicMeanKind>(&cfg.kind)) {
    return std::make_unique<HarmonicMeanPredictor>(hm->history_slots, cold_start);
  }
  if (const auto* cm = std::get_if<CrowdMeanKind>(&cfg.kind)) {
    detail::require(reference != nullptr, "crowd-mean prediction needs a mean trace");
    if (cfg.pe_profile.empty()) profile = {cm->error_pe};
    return std::make_unique<NoisyPredictor>(*reference, profile, cfg.seed, bin_slots);
  }
  bool exact = std::all_of(profile.begin(), profile.end(), [](double p) { return p == 0; });
  if (exact) return std::make_unique<OraclePredictor>(truth);
  return std::make_unique<NoisyPredictor>(truth, profile, cfg.seed);
}

}  // namespace svclbp
