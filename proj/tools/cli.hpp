#pragma once

// Command-line front end: plan, simulate, compare, sweep, oracle-check.
// Exit codes: 0 ok, 1 usage, 2 validation failure, 3 oracle mismatch.

#include "svclbp/io.hpp"
#include "svclbp/svclbp.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <future>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace svclbp::cli {

enum ExitCode { kOk = 0, kUsage = 1, kValidation = 2, kMismatch = 3 };

inline const std::vector<std::string>& policy_names() {
  static const std::vector<std::string> names{"lbp-offline", "lbp-online", "baseline1", "baseline2",
                                              "baseline3",   "bba",        "nms",       "slope"};
  return names;
}

struct StreamOptions {
  std::string video;
  std::string mode = "skip";
  Slot startup = 5;
  Slot buffer = 10;
  std::string gamma, beta, lambda;
  int slot_seconds = 1;
  bool loop_video = false;
};

struct OnlineOptions {
  Slot window = 20;
  Slot period = 5;
  std::optional<Slot> bmin;
  Slot threshold = 1;
  std::string predictor = "oracle";
  double pe = 0;
  std::vector<double> pe_profile;
  Slot history = 5;
  std::vector<std::string> crowd_traces;
  Slot bin = 1;
  std::uint64_t seed = 1;
};

struct BaselineOptions {
  Slot bba_lower = 40, bba_upper = 80;
  std::optional<Slot> nms_low;
  double slope = -0.07;
};

inline Mode parse_mode(const std::string& m) {
  if (m == "skip") return Mode::Skip;
  if (m == "noskip") return Mode::NoSkip;
  throw InvalidInput("unknown mode '" + m + "'");
}

/// Video (looped to the trace when asked) and the resolved configuration.
inline std::pair<VideoSpec, StreamConfig> resolve(const StreamOptions& o, const BandwidthTrace& trace) {
  VideoSpec spec = io::load_video(o.video);
  if (o.loop_video) spec = io::loop_video(spec, trace.length(), o.startup);
  Mode mode = parse_mode(o.mode);
  StreamConfig c;
  c.mode = mode;
  c.startup_delay = o.startup;
  c.buffer_capacity = o.buffer;
  detail::require(o.startup >= 0, "startup delay must be non-negative");
  detail::require(o.buffer >= 1, "buffer capacity must be positive");
  c.beta = o.beta.empty() ? Rational(1001, 1000) : parse_rational(o.beta);
  if (c.beta <= 1) throw ValidationError("beta must exceed 1");
  c.gamma = o.gamma.empty() ? default_gamma(spec, c.beta) : parse_rational(o.gamma);
  c.lambda = o.lambda.empty() ? default_lambda(spec, c.gamma, c.beta) : parse_rational(o.lambda);
  return {std::move(spec), std::move(c)};
}

inline std::unique_ptr<Predictor> build_predictor(const OnlineOptions& o, const VideoSpec& spec,
                                                  const BandwidthTrace& truth, BandwidthTrace* crowd_store) {
  PredictionConfig pc;
  pc.pe = o.pe;
  pc.pe_profile = o.pe_profile;
  pc.seed = o.seed;
  const Kilobits cold = std::max<Kilobits>(1, spec.layer_size(0, 1) / spec.chunk_duration());
  if (o.predictor == "oracle") {
    pc.kind = OracleKind{};
    return make_predictor(pc, truth, cold);
  }
  if (o.predictor == "harmonic") {
    pc.kind = HarmonicMeanKind{o.history, o.window};
    return make_predictor(pc, truth, cold);
  }
  if (o.predictor == "crowd") {
    if (o.crowd_traces.empty()) throw InvalidInput("--predictor crowd needs at least one --crowd-trace");
    std::vector<BandwidthTrace> set;
    for (const auto& p : o.crowd_traces) set.push_back(io::load_trace(p, truth.slot_seconds()));
    *crowd_store = crowd_mean_trace(set, o.bin);
    pc.kind = CrowdMeanKind{o.pe};
    return make_predictor(pc, truth, cold, crowd_store, o.bin);
  }
  throw InvalidInput("unknown predictor '" + o.predictor + "'");
}

inline SessionLog run_policy(const std::string& policy, const VideoSpec& spec, const StreamConfig& config,
                             const BandwidthTrace& truth, const OnlineOptions& on, const BaselineOptions& bo) {
  if (policy == "lbp-offline") {
    auto plan = plan_offline(spec, config, truth);
    auto log = execute_plan(plan, spec, config, truth);
    log.policy = policy;
    return log;
  }
  if (policy == "lbp-online") {
    OnlineConfig oc;
    oc.window = on.window;
    oc.period = on.period;
    oc.buffer_low = on.bmin;
    oc.deadline_miss_threshold = on.threshold;
    oc.mode = config.mode;
    BandwidthTrace crowd;
    auto pred = build_predictor(on, spec, truth, &crowd);
    return run_online(spec, config, oc, *pred, truth);
  }
  if (policy == "baseline1") return run_baseline1(spec, config, truth);
  if (policy == "baseline2") return run_baseline2(spec, config, truth);
  if (policy == "baseline3") return run_baseline3(spec, config, truth);
  if (policy == "bba") return run_bba(spec, config, truth, bo.bba_lower, bo.bba_upper);
  if (policy == "nms") return run_nms(spec, config, truth, bo.nms_low);
  if (policy == "slope") return run_slope(spec, config, truth, bo.slope);
  throw InvalidInput("unknown policy '" + policy + "'");
}

inline std::string histogram_header(int num_enh_layers) {
  std::string h = "S,BL";
  for (int n = 1; n <= num_enh_layers; ++n) h += ",EL" + std::to_string(n);
  return h;
}

inline std::string histogram_row(const std::vector<int>& h) {
  std::string s;
  for (std::size_t k = 0; k < h.size(); ++k) s += (k ? "," : "") + std::to_string(h[k]);
  return s;
}

inline std::string fmt(double v) {
  std::ostringstream o;
  o.precision(10);
  o << v;
  return o.str();
}

inline void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot write '" + path + "'");
  f << text;
}

/// Parses and runs one command line; output goes to `out`, diagnostics to `err`.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Layered SVC rate adaptation: planner, simulator and baselines"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "svc-lbp 1.0");

  StreamOptions so;
  OnlineOptions on;
  BaselineOptions bo;
  std::string out_path, csv_path, plan_path, policy = "lbp-offline", policies_arg;
  std::vector<std::string> traces;
  std::uint64_t seed = 1;
  std::optional<Slot> nms_low, bmin;
  std::vector<Slot> g_window{20}, g_period{5}, g_buffer, g_bmin;
  std::vector<double> g_pe{0};
  std::vector<std::uint64_t> g_seeds;

  auto add_stream = [&](CLI::App* c) {
    c->add_option("--video", so.video, "video description JSON")->required();
    c->add_option("--mode", so.mode, "skip or noskip")->check(CLI::IsMember({"skip", "noskip"}));
    c->add_option("--startup", so.startup, "startup delay in slots");
    c->add_option("--buffer", so.buffer, "buffer capacity B_m in slots");
    c->add_option("--gamma", so.gamma, "layer weight (rational, default derived)");
    c->add_option("--beta", so.beta, "chunk weight > 1 (rational, default 1001/1000)");
    c->add_option("--lambda", so.lambda, "stall penalty (rational, default derived)");
    c->add_option("--slot-seconds", so.slot_seconds, "seconds per slot")->check(CLI::PositiveNumber);
    c->add_flag("--loop-video", so.loop_video, "repeat the video to the trace length, cut at the end");
    c->add_option("--out", out_path, "output file (default stdout)");
  };
  auto add_online = [&](CLI::App* c) {
    c->add_option("--window", on.window, "prediction window W in slots");
    c->add_option("--period", on.period, "replan period alpha in slots");
    c->add_option("--bmin", bmin, "low-buffer threshold (default B_m/2)");
    c->add_option("--miss-threshold", on.threshold, "abandon threshold before a deadline, slots");
    c->add_option("--predictor", on.predictor, "oracle, harmonic or crowd")
        ->check(CLI::IsMember({"oracle", "harmonic", "crowd"}));
    c->add_option("--pe", on.pe, "uniform prediction error bound");
    c->add_option("--pe-profile", on.pe_profile, "per-offset error bounds")->delimiter(',');
    c->add_option("--history", on.history, "harmonic-mean history in slots");
    c->add_option("--crowd-trace", on.crowd_traces, "traces for the crowd mean");
    c->add_option("--bin", on.bin, "crowd-mean bin width in slots");
    c->add_option("--seed", seed, "random seed (SVC_LBP_SEED overrides)");
  };
  auto add_baseline = [&](CLI::App* c) {
    c->add_option("--bba-lower", bo.bba_lower, "BBA lower threshold, slots");
    c->add_option("--bba-upper", bo.bba_upper, "BBA upper threshold, slots");
    c->add_option("--nms-low", nms_low, "NMS low-buffer threshold (default B_m/2)");
    c->add_option("--slope", bo.slope, "slope of the backfill threshold");
  };

  auto* plan_cmd = app.add_subcommand("plan", "offline plan for one trace");
  add_stream(plan_cmd);
  plan_cmd->add_option("--trace", traces, "bandwidth trace")->required()->expected(1);

  auto* sim_cmd = app.add_subcommand("simulate", "run one policy or a saved plan against a trace");
  add_stream(sim_cmd);
  add_online(sim_cmd);
  add_baseline(sim_cmd);
  sim_cmd->add_option("--trace", traces, "true bandwidth trace")->required()->expected(1);
  sim_cmd->add_option("--policy", policy, "policy name")->check(CLI::IsMember(policy_names()));
  sim_cmd->add_option("--plan", plan_path, "execute this plan document instead of a policy");
  sim_cmd->add_option("--csv", csv_path, "write the per-chunk playback series here");

  auto* cmp_cmd = app.add_subcommand("compare", "policies x traces comparison table (CSV)");
  add_stream(cmp_cmd);
  add_online(cmp_cmd);
  add_baseline(cmp_cmd);
  cmp_cmd->add_option("--trace", traces, "bandwidth traces")->required();
  cmp_cmd->add_option("--policies", policies_arg, "comma-separated policies (default all)");

  auto* sweep_cmd = app.add_subcommand("sweep", "online planner over a parameter grid (long CSV)");
  add_stream(sweep_cmd);
  sweep_cmd->add_option("--trace", traces, "bandwidth traces")->required();
  sweep_cmd->add_option("--window", g_window, "window sizes")->delimiter(',');
  sweep_cmd->add_option("--period", g_period, "replan periods")->delimiter(',');
  sweep_cmd->add_option("--pe", g_pe, "prediction error bounds")->delimiter(',');
  sweep_cmd->add_option("--buffers", g_buffer, "buffer capacities")->delimiter(',');
  sweep_cmd->add_option("--bmin", g_bmin, "low-buffer thresholds")->delimiter(',');
  sweep_cmd->add_option("--seeds", g_seeds, "seeds")->delimiter(',');
  sweep_cmd->add_option("--predictor", on.predictor, "oracle or harmonic")
      ->check(CLI::IsMember({"oracle", "harmonic"}));
  sweep_cmd->add_option("--history", on.history, "harmonic-mean history in slots");

  auto* oracle_cmd = app.add_subcommand("oracle-check", "compare the planner with exhaustive search");
  add_stream(oracle_cmd);
  oracle_cmd->add_option("--trace", traces, "bandwidth trace")->required()->expected(1);

  std::vector<const char*> argv;
  argv.push_back("svc-lbp");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  if (const char* env = std::getenv("SVC_LBP_SEED"); env && *env) {
    try {
      seed = std::stoull(env);
    } catch (const std::exception&) {
      err << "error: SVC_LBP_SEED is not an unsigned integer\n";
      return kUsage;
    }
  }
  on.seed = seed;
  on.bmin = bmin;
  bo.nms_low = nms_low;

  try {
    if (plan_cmd->parsed()) {
      auto trace = io::load_trace(traces.at(0), so.slot_seconds);
      auto [spec, config] = resolve(so, trace);
      auto plan = plan_offline(spec, config, trace);
      io::Json doc{{"config", io::config_to_json(config)},
                   {"video", io::video_to_json(spec)},
                   {"plan", io::plan_to_json(plan)},
                   {"report", io::report_to_json(plan_report(plan, spec, config, trace.slot_seconds()))}};
      emit(doc.dump(2) + "\n", out_path, out);
      return kOk;
    }

    if (sim_cmd->parsed()) {
      auto trace = io::load_trace(traces.at(0), so.slot_seconds);
      auto [spec, config] = resolve(so, trace);
      SessionLog log;
      if (!plan_path.empty()) {
        io::Json pj = io::Json::parse(io::read_file(plan_path));
        LayerPlan plan = io::plan_from_json(pj.contains("plan") ? pj.at("plan") : pj, spec);
        log = execute_plan(plan, spec, config, trace);
      } else {
        log = run_policy(policy, spec, config, trace, on, bo);
      }
      auto check = validate_session(log, spec, config);
      io::Json doc{{"policy", log.policy},
                   {"config", io::config_to_json(config)},
                   {"seed", seed},
                   {"report", io::report_to_json(build_report(log, spec, config))},
                   {"valid", check.ok()},
                   {"session", io::session_to_json(log)}};
      if (!check.ok()) doc["violations"] = check.violations;
      emit(doc.dump(2) + "\n", out_path, out);
      if (!csv_path.empty()) emit(io::playback_csv(log, spec), csv_path, out);
      return check.ok() ? kOk : kValidation;
    }

    if (cmp_cmd->parsed()) {
      std::vector<std::string> pols;
      if (policies_arg.empty()) {
        pols = policy_names();
      } else {
        std::stringstream ss(policies_arg);
        for (std::string p; std::getline(ss, p, ',');) {
          if (std::find(policy_names().begin(), policy_names().end(), p) == policy_names().end()) {
            throw InvalidInput("unknown policy '" + p + "'");
          }
          pols.push_back(p);
        }
      }
      if (pols.empty()) throw InvalidInput("no policies to compare");
      struct Row {
        std::string trace, policy;
        VideoSpec spec;
        QoEReport report;
      };
      std::vector<std::future<Row>> jobs;
      for (const auto& path : traces) {
        auto trace = io::load_trace(path, so.slot_seconds);
        auto [spec, config] = resolve(so, trace);
        for (const auto& p : pols) {
          jobs.push_back(std::async(std::launch::async, [=] {
            auto log = run_policy(p, spec, config, trace, on, bo);
            return Row{path, p, spec, build_report(log, spec, config)};
          }));
        }
      }
      std::ostringstream csv;
      int header_layers = -1;
      for (auto& j : jobs) {
        Row r = j.get();
        if (header_layers < 0) {
          header_layers = r.spec.num_enh_layers();
          csv << "trace,policy,skips,stall,avg_rate_kbps,lsr," << histogram_header(header_layers) << "\n";
        }
        csv << r.trace << ',' << r.policy << ',' << r.report.skip_count << ',' << r.report.stall_duration << ','
            << fmt(to_double(r.report.avg_playback_rate)) << ',' << fmt(to_double(r.report.lsr)) << ','
            << histogram_row(r.report.layer_histogram) << "\n";
      }
      emit(csv.str(), out_path, out);
      return kOk;
    }

    if (sweep_cmd->parsed()) {
      if (g_seeds.empty()) g_seeds.push_back(seed);
      if (std::getenv("SVC_LBP_SEED")) g_seeds = {seed};
      if (g_buffer.empty()) g_buffer.push_back(so.buffer);
      for (auto* grid : {&g_window, &g_period}) {
        if (grid->empty()) throw InvalidInput("empty parameter grid");
      }
      if (g_pe.empty()) throw InvalidInput("empty parameter grid");
      struct Cell {
        std::string trace;
        Slot w, a, bm;
        double pe;
        std::optional<Slot> bmin;
        std::uint64_t seed;
      };
      std::vector<Cell> cells;
      for (const auto& path : traces) {
        for (Slot w : g_window)
          for (double pe : g_pe)
            for (Slot a : g_period)
              for (Slot bm : g_buffer) {
                std::vector<std::optional<Slot>> lows;
                if (g_bmin.empty()) lows.push_back(std::nullopt);
                for (Slot b : g_bmin) lows.push_back(b);
                for (auto b : lows)
                  for (auto s : g_seeds) {
                    if (w < 1 || a < 1 || a > w) throw InvalidInput("grid point needs 1 <= period <= window");
                    if (pe < 0) throw InvalidInput("grid point has a negative error bound");
                    if (bm < 1) throw InvalidInput("grid point has a non-positive buffer");
                    if (b && (*b < 0 || *b > bm)) throw InvalidInput("grid point needs 0 <= bmin <= buffer");
                    cells.push_back({path, w, a, bm, pe, b, s});
                  }
              }
      }
      std::map<std::string, BandwidthTrace> loaded;
      for (const auto& path : traces) loaded.emplace(path, io::load_trace(path, so.slot_seconds));
      std::vector<std::future<std::string>> jobs;
      for (const auto& c : cells) {
        StreamOptions cso = so;
        cso.buffer = c.bm;
        const BandwidthTrace& trace = loaded.at(c.trace);
        jobs.push_back(std::async(std::launch::async, [cso, c, &trace, on]() {
          auto [spec, config] = resolve(cso, trace);
          OnlineOptions o = on;
          o.window = c.w;
          o.period = c.a;
          o.pe = c.pe;
          o.bmin = c.bmin;
          o.seed = c.seed;
          auto log = run_policy("lbp-online", spec, config, trace, o, {});
          auto r = build_report(log, spec, config);
          std::ostringstream row;
          row << c.trace << ',' << c.w << ',' << fmt(c.pe) << ',' << c.a << ',' << c.bm << ','
              << (c.bmin ? *c.bmin : config.buffer_capacity / 2) << ',' << c.seed << ',' << r.skip_count << ','
              << r.stall_duration << ',' << fmt(to_double(r.avg_playback_rate)) << ',' << fmt(to_double(r.lsr)) << ','
              << fmt(to_double(r.objective)) << "\n";
          return row.str();
        }));
      }
      std::string csv = "trace,window,pe,period,buffer,bmin,seed,skips,stall,avg_rate_kbps,lsr,objective\n";
      for (auto& j : jobs) csv += j.get();
      emit(csv, out_path, out);
      return kOk;
    }

    if (oracle_cmd->parsed()) {
      auto trace = io::load_trace(traces.at(0), so.slot_seconds);
      auto [spec, config] = resolve(so, trace);
      auto plan = plan_offline(spec, config, trace);
      io::Json doc{{"config", io::config_to_json(config)}, {"planner_levels", plan.level}};
      bool match = false;
      Rational planned = objective_value(plan, spec, config);
      if (config.mode == Mode::Skip) {
        auto o = enumerate_optimal_skip(spec, config, trace);
        match = planned == o.best_objective;
        doc["oracle_objective"] = io::rational_json(o.best_objective);
        doc["oracle_optimal"] = o.optimal;
        doc["oracle_min_skips"] = o.min_skips;
        doc["planner_skips"] = plan.skipped().size();
      } else {
        auto o = enumerate_optimal_noskip(spec, config, trace);
        auto st = base_forward_stalls(spec, config, trace);
        match = planned == o.best_objective && st.total == o.min_stall;
        doc["oracle_objective"] = io::rational_json(o.best_objective);
        doc["oracle_optimal"] = o.optimal;
        doc["oracle_min_stall"] = o.min_stall;
        doc["planner_stall"] = st.total;
      }
      doc["planner_objective"] = io::rational_json(planned);
      doc["match"] = match;
      emit(doc.dump(2) + "\n", out_path, out);
      return match ? kOk : kMismatch;
    }
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << "\n";
    return kValidation;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kUsage;
}

}  // namespace svclbp::cli
