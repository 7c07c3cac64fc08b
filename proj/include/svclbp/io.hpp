#pragma once

// File formats: video description JSON, bandwidth traces, and the JSON / CSV
// documents the command-line tool emits.

#include "svclbp/metrics.hpp"
#include "svclbp/playback_sim.hpp"
#include "svclbp/types.hpp"

#include <json.hpp>

#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace svclbp::io {

using Json = nlohmann::ordered_json;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Video

inline VideoSpec video_from_json(const Json& j) {
  try {
    if (!j.is_object()) throw InvalidInput("video description must be a JSON object");
    for (const char* key : {"chunk_duration_slots", "num_chunks", "layers"}) {
      if (!j.contains(key)) throw InvalidInput(std::string("video description lacks '") + key + "'");
    }
    const auto C = j.at("num_chunks").get<std::int64_t>();
    const auto L = j.at("chunk_duration_slots").get<std::int64_t>();
    if (C < 1 || C > 10'000'000) throw InvalidInput("num_chunks out of range");
    if (!j.at("layers").is_array() || j.at("layers").empty()) throw InvalidInput("'layers' must be a non-empty array");
    std::vector<LayerSizes> layers;
    for (const auto& layer : j.at("layers")) {
      if (layer.contains("nominal_kb") == layer.contains("per_chunk_kb")) {
        throw InvalidInput("each layer needs exactly one of 'nominal_kb' or 'per_chunk_kb'");
      }
      if (layer.contains("nominal_kb")) {
        layers.emplace_back(layer.at("nominal_kb").get<Kilobits>());
      } else {
        layers.emplace_back(layer.at("per_chunk_kb").get<std::vector<Kilobits>>());
      }
    }
    return VideoSpec(static_cast<int>(C), L, std::move(layers));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed video description: ") + e.what());
  }
}

inline Json video_to_json(const VideoSpec& spec) {
  Json j;
  j["chunk_duration_slots"] = spec.chunk_duration();
  j["num_chunks"] = spec.num_chunks();
  Json layers = Json::array();
  for (const auto& l : spec.layers()) {
    if (const auto* n = std::get_if<Kilobits>(&l)) {
      layers.push_back({{"nominal_kb", *n}});
    } else {
      layers.push_back({{"per_chunk_kb", std::get<std::vector<Kilobits>>(l)}});
    }
  }
  j["layers"] = layers;
  return j;
}

inline VideoSpec load_video(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("'" + path + "' is not valid JSON: " + e.what());
  }
  return video_from_json(j);
}

/// Repeats the video until it covers `slots` of playback after the startup
/// delay, then cuts it there; layer sizes cycle with the chunk index.
inline VideoSpec loop_video(const VideoSpec& spec, Slot slots, Slot startup_delay) {
  const Slot L = spec.chunk_duration();
  const Slot want = std::max<Slot>((slots - startup_delay) / L + 1, 1);
  if (want <= spec.num_chunks()) return spec;
  const auto C = static_cast<int>(want);
  std::vector<LayerSizes> layers;
  for (int n = 0; n <= spec.top_level(); ++n) {
    if (spec.is_cbr()) {
      layers.emplace_back(spec.layer_size(n, 1));
      continue;
    }
    std::vector<Kilobits> per(static_cast<std::size_t>(C));
    for (int i = 0; i < C; ++i) per[static_cast<std::size_t>(i)] = spec.layer_size(n, i % spec.num_chunks() + 1);
    layers.emplace_back(std::move(per));
  }
  return VideoSpec(C, L, std::move(layers));
}

// ---------------------------------------------------------------------------
// Traces

/// One line per slot: "KBPS" or "INDEX,KBPS", optionally under a "slot,kbps"
/// header. Indices must be consecutive. Rates become kilobits per slot by
/// multiplying with the slot length in seconds.
inline BandwidthTrace parse_trace(const std::string& text, int slot_seconds = 1) {
  detail::require(slot_seconds >= 1, "slot duration must be a positive number of seconds");
  std::istringstream in(text);
  std::string line;
  std::vector<Kilobits> values;
  std::optional<std::int64_t> last_index;
  bool first_line = true;
  int line_no = 0;
  auto parse_int = [&](std::string s) -> std::int64_t {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) throw InvalidInput("trace line " + std::to_string(line_no) + ": empty field");
    s = s.substr(b, e - b + 1);
    std::size_t pos = 0;
    std::int64_t v = 0;
    try {
      v = std::stoll(s, &pos);
    } catch (const std::exception&) {
      throw InvalidInput("trace line " + std::to_string(line_no) + ": '" + s + "' is not an integer");
    }
    if (pos != s.size()) throw InvalidInput("trace line " + std::to_string(line_no) + ": '" + s + "' is not an integer");
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (first_line) {
      first_line = false;
      std::string h;
      for (char c : line) {
        if (c != ' ' && c != '\t') h += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      }
      if (h == "slot,kbps") continue;
    }
    std::int64_t value = 0;
    if (auto comma = line.find(','); comma != std::string::npos) {
      std::int64_t index = parse_int(line.substr(0, comma));
      value = parse_int(line.substr(comma + 1));
      if (last_index && index != *last_index + 1) {
        throw InvalidInput("trace line " + std::to_string(line_no) + ": slot index " + std::to_string(index) +
                           " does not follow " + std::to_string(*last_index));
      }
      last_index = index;
    } else {
      if (last_index) throw InvalidInput("trace line " + std::to_string(line_no) + ": mixed line formats");
      value = parse_int(line);
    }
    if (value < 0) throw InvalidInput("trace line " + std::to_string(line_no) + ": negative bandwidth");
    values.push_back(value * slot_seconds);
  }
  if (values.empty()) throw InvalidInput("trace has no samples");
  return BandwidthTrace(std::move(values), slot_seconds);
}

inline BandwidthTrace load_trace(const std::string& path, int slot_seconds = 1) {
  try {
    return parse_trace(read_file(path), slot_seconds);
  } catch (const InvalidInput& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Emitters

inline Json rational_json(const Rational& r) {
  return Json{{"exact", format_rational(r)}, {"approx", to_double(r)}};
}

inline Json config_to_json(const StreamConfig& c) {
  return Json{{"mode", to_string(c.mode)},
              {"startup_delay", c.startup_delay},
              {"buffer_capacity", c.buffer_capacity},
              {"gamma", format_rational(c.gamma)},
              {"beta", format_rational(c.beta)},
              {"lambda", format_rational(c.lambda)}};
}

inline Json report_to_json(const QoEReport& r) {
  Json hist = Json::object();
  for (std::size_t k = 0; k < r.layer_histogram.size(); ++k) {
    std::string key = k == 0 ? "S" : k == 1 ? "BL" : "EL" + std::to_string(k - 1);
    hist[key] = r.layer_histogram[k];
  }
  return Json{{"skip_count", r.skip_count},
              {"skip_duration", r.skip_duration},
              {"stall_duration", r.stall_duration},
              {"avg_playback_rate_kbps", rational_json(r.avg_playback_rate)},
              {"lsr", rational_json(r.lsr)},
              {"layer_histogram", hist},
              {"objective", rational_json(r.objective)}};
}

inline Json plan_to_json(const LayerPlan& plan) {
  Json chunks = Json::array();
  for (ChunkIndex i = 1; i <= plan.num_chunks(); ++i) {
    const auto k = static_cast<std::size_t>(i - 1);
    chunks.push_back({{"chunk", i},
                      {"level", plan.level[k]},
                      {"size_kb", plan.size[k]},
                      {"lower_deadline", plan.lower_deadline[k]},
                      {"deadline", plan.deadline[k]},
                      {"head_fetch_kb", plan.head_fetch[k]},
                      {"stall_before", plan.stall_before.empty() ? 0 : plan.stall_before[k]}});
  }
  Json sched = Json::array();
  for (const auto& t : plan.schedule) sched.push_back({t.slot, t.chunk, t.kb});
  return Json{{"mode", to_string(plan.mode)},
              {"chunks", chunks},
              {"skipped", plan.skipped()},
              {"total_stall", plan.total_stall()},
              {"schedule", sched},
              {"residual_kb", plan.residual}};
}

/// Reads back the levels and deadlines of a plan document.
inline LayerPlan plan_from_json(const Json& j, const VideoSpec& spec) {
  try {
    LayerPlan p;
    p.mode = j.at("mode").get<std::string>() == "noskip" ? Mode::NoSkip : Mode::Skip;
    for (const auto& c : j.at("chunks")) {
      ChunkIndex i = static_cast<ChunkIndex>(p.level.size()) + 1;
      Level l = c.at("level").get<Level>();
      p.level.push_back(l);
      p.size.push_back(spec.cumulative_size(l, i));
      p.deadline.push_back(c.at("deadline").get<Slot>());
      p.stall_before.push_back(c.value("stall_before", Slot{0}));
      p.lower_deadline.push_back(c.value("lower_deadline", Slot{0}));
      p.head_fetch.push_back(c.value("head_fetch_kb", Kilobits{0}));
    }
    if (p.num_chunks() != spec.num_chunks()) throw InvalidInput("plan has a different number of chunks than the video");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed plan document: ") + e.what());
  }
}

inline Json session_to_json(const SessionLog& log) {
  Json chunks = Json::array();
  for (std::size_t k = 0; k < log.chunks.size(); ++k) {
    const auto& c = log.chunks[k];
    chunks.push_back({{"chunk", k + 1},
                      {"level", c.final_level},
                      {"delivered_kb", c.delivered},
                      {"first_slot", c.first_slot},
                      {"base_slot", c.base_slot},
                      {"play_slot", c.played ? Json(c.play_slot) : Json(nullptr)},
                      {"wasted_kb", c.wasted},
                      {"abandoned", c.abandoned},
                      {"decisions", c.decisions}});
  }
  Json replans = Json::array();
  for (const auto& r : log.replans) replans.push_back({{"slot", r.slot}, {"sc", r.sc}, {"ec", r.ec}, {"levels", r.levels}});
  return Json{{"policy", log.policy},
              {"mode", to_string(log.mode)},
              {"slots", log.slots()},
              {"stall_duration", log.stall_duration},
              {"truncated", log.truncated},
              {"wasted_kb", log.wasted()},
              {"chunks", chunks},
              {"buffer_occupancy", log.buffer_occupancy},
              {"consumed_kb", log.consumed},
              {"replans", replans}};
}

/// Per-chunk playback series: chunk, play slot, level, delivered kb, rate.
inline std::string playback_csv(const SessionLog& log, const VideoSpec& spec) {
  std::ostringstream out;
  out << "chunk,play_slot,level,delivered_kb,rate_kbps\n";
  const Slot secs = spec.chunk_duration() * log.slot_seconds;
  for (ChunkIndex i = 1; i <= log.num_chunks(); ++i) {
    const auto& c = log.chunks[static_cast<std::size_t>(i - 1)];
    Kilobits x = spec.cumulative_size(c.final_level, i);
    out << i << ',' << (c.played ? std::to_string(c.play_slot) : "") << ',' << c.final_level << ',' << x << ','
        << to_double(Rational(x, secs)) << '\n';
  }
  return out.str();
}

}  // namespace svclbp::io
