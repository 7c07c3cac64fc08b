#pragma once

// Deadline arithmetic, weight conditions and the exact objective.

#include "svclbp/types.hpp"

#include <string>
#include <vector>

namespace svclbp {

/// deadline(i) = (i-1)L + s, the last slot in which chunk i's bytes count.
inline Slot deadline_of(ChunkIndex i, Slot chunk_duration, Slot startup_delay, int num_chunks) {
  if (i < 1 || i > num_chunks) {
    throw InvalidInput("deadline_of: chunk index " + std::to_string(i) + " outside 1.." +
                       std::to_string(num_chunks));
  }
  return static_cast<Slot>(i - 1) * chunk_duration + startup_delay;
}

inline Slot deadline_of(ChunkIndex i, const VideoSpec& spec, const StreamConfig& config) {
  return deadline_of(i, spec.chunk_duration(), config.startup_delay, spec.num_chunks());
}

/// How many chunks fit in the playout buffer at once: floor(B_m / L).
inline int buffer_chunks(const VideoSpec& spec, const StreamConfig& config) {
  return static_cast<int>(config.buffer_capacity / spec.chunk_duration());
}

namespace detail {

/// sum_{i=1..C} z_i * p^i * q^(C-i) for beta = p/q, by Horner's rule.
inline BigInt beta_weighted_numerator(const std::vector<Kilobits>& z, const Rational& beta) {
  const BigInt& p = boost::multiprecision::numerator(beta);
  const BigInt& q = boost::multiprecision::denominator(beta);
  BigInt acc = 0, pw = 1;
  for (Kilobits zi : z) {
    pw *= p;
    acc = acc * q + pw * zi;
  }
  return acc;
}

/// sum_{i=1..C} beta^i.
inline Rational beta_sum(int num_chunks, const Rational& beta) {
  std::vector<Kilobits> ones(static_cast<std::size_t>(num_chunks), 1);
  BigInt den = boost::multiprecision::pow(boost::multiprecision::denominator(beta), static_cast<unsigned>(num_chunks));
  return Rational(beta_weighted_numerator(ones, beta), den);
}

inline Kilobits min_layer_size(const VideoSpec& spec, int n) {
  Kilobits m = spec.layer_size(n, 1);
  for (ChunkIndex i = 2; i <= spec.num_chunks(); ++i) m = std::min(m, spec.layer_size(n, i));
  return m;
}

inline Kilobits max_layer_size(const VideoSpec& spec, int n) {
  Kilobits m = spec.layer_size(n, 1);
  for (ChunkIndex i = 2; i <= spec.num_chunks(); ++i) m = std::max(m, spec.layer_size(n, i));
  return m;
}

inline Rational rational_pow(const Rational& base, int exp) {
  Rational out = 1;
  for (int k = 0; k < exp; ++k) out *= base;
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Weight conditions

struct WeightCondition {
  int layer = 0;       // a, or -1 for the stall-penalty condition
  Rational lhs;
  Rational rhs;
  bool holds = false;
};

struct WeightVerdict {
  bool valid = false;
  bool gamma_in_range = false;   // 0 < gamma < 1
  bool beta_above_one = false;   // beta > 1
  std::vector<WeightCondition> layer_conditions;
  std::optional<WeightCondition> lambda_condition;  // NoSkip only

  std::string summary() const {
    std::string out;
    if (!gamma_in_range) out += "gamma must lie in (0,1); ";
    if (!beta_above_one) out += "beta must exceed 1; ";
    for (const auto& c : layer_conditions) {
      if (!c.holds) out += "layer " + std::to_string(c.layer) + " priority condition fails; ";
    }
    if (lambda_condition && !lambda_condition->holds) out += "lambda too small for stall priority; ";
    return out.empty() ? "ok" : out;
  }
};

/// Checks the layer-priority condition for every a < N and, in NoSkip mode,
/// the stall-penalty condition on lambda. For VBR videos the left side uses
/// the smallest size of layer a and the right side the largest sizes.
inline WeightVerdict validate_weights(const VideoSpec& spec, const StreamConfig& config) {
  WeightVerdict v;
  v.gamma_in_range = config.gamma > 0 && config.gamma < 1;
  v.beta_above_one = config.beta > 1;
  const Rational beta_total = detail::beta_sum(spec.num_chunks(), config.beta);
  const int top = spec.num_enh_layers();
  for (int a = 0; a < top; ++a) {
    WeightCondition c;
    c.layer = a;
    c.lhs = detail::rational_pow(config.gamma, a) * detail::min_layer_size(spec, a);
    Rational rhs = 0;
    for (int k = a + 1; k <= top; ++k) rhs += detail::rational_pow(config.gamma, k) * detail::max_layer_size(spec, k);
    c.rhs = rhs * beta_total;
    c.holds = c.lhs > c.rhs;
    v.layer_conditions.push_back(std::move(c));
  }
  if (config.mode == Mode::NoSkip) {
    WeightCondition c;
    c.layer = -1;
    c.lhs = config.lambda;
    Rational rhs = 0;
    for (int n = 0; n <= top; ++n) rhs += detail::rational_pow(config.gamma, n) * detail::max_layer_size(spec, n);
    c.rhs = rhs * beta_total;
    c.holds = c.lhs > c.rhs;
    v.lambda_condition = std::move(c);
  }
  v.valid = v.gamma_in_range && v.beta_above_one;
  for (const auto& c : v.layer_conditions) v.valid = v.valid && c.holds;
  if (v.lambda_condition) v.valid = v.valid && v.lambda_condition->holds;
  return v;
}

/// 0.9 times the largest gamma (to 2^-40 resolution) satisfying every layer
/// priority condition for the given beta.
inline Rational default_gamma(const VideoSpec& spec, const Rational& beta) {
  if (spec.num_enh_layers() == 0) return Rational(9, 10);
  StreamConfig probe;
  probe.beta = beta;
  probe.mode = Mode::Skip;
  Rational lo = 0, hi = 1;
  for (int iter = 0; iter < 40; ++iter) {
    Rational mid = (lo + hi) / 2;
    probe.gamma = mid;
    auto verdict = validate_weights(spec, probe);
    bool ok = std::all_of(verdict.layer_conditions.begin(), verdict.layer_conditions.end(),
                          [](const WeightCondition& c) { return c.holds; });
    (ok ? lo : hi) = mid;
  }
  if (lo == 0) throw ValidationError("no gamma in (0,1) satisfies the layer priority condition");
  return lo * Rational(9, 10);
}

/// Twice the smallest admissible stall penalty.
inline Rational default_lambda(const VideoSpec& spec, const Rational& gamma, const Rational& beta) {
  Rational rhs = 0;
  for (int n = 0; n <= spec.num_enh_layers(); ++n) rhs += detail::rational_pow(gamma, n) * detail::max_layer_size(spec, n);
  return 2 * rhs * detail::beta_sum(spec.num_chunks(), beta);
}

/// Config with beta = 1.001 and gamma/lambda at their defaults for `spec`.
inline StreamConfig default_config(const VideoSpec& spec, Mode mode, Slot startup_delay, Slot buffer_capacity) {
  StreamConfig c;
  c.mode = mode;
  c.startup_delay = startup_delay;
  c.buffer_capacity = buffer_capacity;
  c.beta = Rational(1001, 1000);
  c.gamma = default_gamma(spec, c.beta);
  c.lambda = default_lambda(spec, c.gamma, c.beta);
  return c;
}

// ---------------------------------------------------------------------------
// Objective

/// Weighted quality of per-chunk levels, minus lambda * total_stall in NoSkip mode.
inline Rational objective_value(const std::vector<Level>& levels, Slot total_stall, const VideoSpec& spec,
                                const StreamConfig& config) {
  if (static_cast<int>(levels.size()) != spec.num_chunks()) {
    throw InvalidInput("objective_value: level vector length does not match the video");
  }
  const int top = spec.num_enh_layers();
  const BigInt& g = boost::multiprecision::numerator(config.gamma);
  const BigInt& h = boost::multiprecision::denominator(config.gamma);
  BigInt numerator = 0;
  std::vector<Kilobits> z(levels.size());
  for (int n = 0; n <= top; ++n) {
    for (std::size_t i = 0; i < levels.size(); ++i) {
      z[i] = levels[i] >= n ? spec.layer_size(n, static_cast<ChunkIndex>(i + 1)) : 0;
    }
    BigInt layer_term = detail::beta_weighted_numerator(z, config.beta);
    numerator += layer_term * boost::multiprecision::pow(g, static_cast<unsigned>(n)) *
                 boost::multiprecision::pow(h, static_cast<unsigned>(top - n));
  }
  BigInt den = boost::multiprecision::pow(h, static_cast<unsigned>(top)) *
               boost::multiprecision::pow(boost::multiprecision::denominator(config.beta),
                                          static_cast<unsigned>(spec.num_chunks()));
  Rational value(numerator, den);
  if (config.mode == Mode::NoSkip) value -= config.lambda * total_stall;
  return value;
}

/// Objective of a plan; rejects sizes that are not a layer prefix sum.
inline Rational objective_value(const LayerPlan& plan, const VideoSpec& spec, const StreamConfig& config) {
  if (plan.num_chunks() != spec.num_chunks() || plan.size.size() != plan.level.size()) {
    throw InvalidInput("objective_value: plan does not match the video");
  }
  for (ChunkIndex i = 1; i <= plan.num_chunks(); ++i) {
    Level l = plan.level_of(i);
    if (l < kSkipped || l > spec.top_level() || plan.size_of(i) != spec.cumulative_size(l, i)) {
      throw InvalidInput("objective_value: chunk " + std::to_string(i) + " violates the decoder constraint");
    }
  }
  return objective_value(plan.level, plan.total_stall(), spec, config);
}

// ---------------------------------------------------------------------------
// ABR ladders

/// Treats the differences of an ascending ABR ladder (kbps) as SVC layer rates
/// and returns per-layer chunk sizes for chunks of `chunk_duration` slots.
inline std::vector<Kilobits> abr_rate_mapping(const std::vector<Kilobits>& cumulative_rates, Slot chunk_duration) {
  detail::require(!cumulative_rates.empty(), "abr_rate_mapping: empty rate ladder");
  detail::require(cumulative_rates.front() > 0, "abr_rate_mapping: rates must be positive");
  std::vector<Kilobits> sizes;
  sizes.reserve(cumulative_rates.size());
  for (std::size_t n = 0; n < cumulative_rates.size(); ++n) {
    if (n > 0 && cumulative_rates[n] <= cumulative_rates[n - 1]) {
      throw InvalidInput("abr_rate_mapping: rates must be strictly ascending");
    }
    Kilobits rate = n == 0 ? cumulative_rates[0] : cumulative_rates[n] - cumulative_rates[n - 1];
    sizes.push_back(rate * chunk_duration);
  }
  return sizes;
}

}  // namespace svclbp
