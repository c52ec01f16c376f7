#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "wzgame/config.hpp"
#include "wzgame/io.hpp"
#include "wzgame/metrics.hpp"
#include "wzgame/planner.hpp"
#include "wzgame/sim.hpp"
#include "wzgame/stats.hpp"

namespace wzgame {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

enum class ScenarioLabel { BaselineL2, GameL2, BaselineL4, GameL4 };

inline std::string to_string(ScenarioLabel l) {
  switch (l) {
    case ScenarioLabel::BaselineL2: return "baseline_l2";
    case ScenarioLabel::GameL2: return "game_l2";
    case ScenarioLabel::BaselineL4: return "baseline_l4";
    case ScenarioLabel::GameL4: return "game_l4";
  }
  return "?";
}

inline ScenarioLabel parse_label(const std::string& s) {
  for (auto l : {ScenarioLabel::BaselineL2, ScenarioLabel::GameL2, ScenarioLabel::BaselineL4, ScenarioLabel::GameL4})
    if (to_string(l) == s) return l;
  throw std::invalid_argument("unknown scenario label '" + s + "'");
}

/// Mixed fleets are labelled by their majority level.
inline AutomationLevel dominant_level(const ScenarioConfig& c) {
  return c.demand.l4_fraction > c.demand.l2_fraction ? AutomationLevel::L4 : AutomationLevel::L2;
}

inline ScenarioLabel label_for(const ScenarioConfig& c) {
  const bool l4 = dominant_level(c) == AutomationLevel::L4;
  if (c.planner_enabled) return l4 ? ScenarioLabel::GameL4 : ScenarioLabel::GameL2;
  return l4 ? ScenarioLabel::BaselineL4 : ScenarioLabel::BaselineL2;
}

struct RunResult {
  std::uint64_t seed = 0;
  ScenarioLabel label = ScenarioLabel::BaselineL2;
  double conflicts_per_min = 0.0;
  std::optional<double> ttc_p05;
  double share_ttc_below_2s = 0.0;
  std::uint64_t sample_count = 0;
  std::uint64_t conflict_count = 0;
  std::uint64_t lateral_ttc_events = 0;
  std::uint64_t lateral_gap_events = 0;
  double moderate_share = 0.0;
  double safe_share = 0.0;
  double observed_seconds = 0.0;
  std::uint64_t arrivals = 0;
  std::uint64_t inserted = 0;
  std::uint64_t collisions = 0;
  std::uint64_t taper_stops = 0;
  std::uint64_t emergency_warnings = 0;
  std::uint64_t plan_speed_caps = 0;
  std::uint64_t plan_aborts = 0;
  std::uint64_t plan_solves = 0;
  std::uint64_t plan_fallbacks = 0;
  std::uint64_t merges_completed = 0;

  friend bool operator==(const RunResult&, const RunResult&) = default;
};

inline ordered_json to_json(const RunResult& r) {
  return {{"seed", r.seed},
          {"label", to_string(r.label)},
          {"conflicts_per_min", r.conflicts_per_min},
          {"ttc_p05", r.ttc_p05 ? ordered_json(*r.ttc_p05) : ordered_json(nullptr)},
          {"share_ttc_below_2s", r.share_ttc_below_2s},
          {"sample_count", r.sample_count},
          {"conflict_count", r.conflict_count},
          {"lateral_ttc_events", r.lateral_ttc_events},
          {"lateral_gap_events", r.lateral_gap_events},
          {"share_ttc_2_to_3s", r.moderate_share},
          {"share_ttc_above_3s", r.safe_share},
          {"observed_seconds", r.observed_seconds},
          {"arrivals", r.arrivals},
          {"inserted", r.inserted},
          {"collisions", r.collisions},
          {"taper_stops", r.taper_stops},
          {"emergency_warnings", r.emergency_warnings},
          {"plan_speed_caps", r.plan_speed_caps},
          {"plan_aborts", r.plan_aborts},
          {"plan_solves", r.plan_solves},
          {"plan_fallbacks", r.plan_fallbacks},
          {"merges_completed", r.merges_completed}};
}

inline RunResult run_result_from_json(const ordered_json& j) {
  RunResult r;
  r.seed = j.at("seed").get<std::uint64_t>();
  r.label = parse_label(j.at("label").get<std::string>());
  r.conflicts_per_min = j.at("conflicts_per_min").get<double>();
  if (!j.at("ttc_p05").is_null()) r.ttc_p05 = j.at("ttc_p05").get<double>();
  r.share_ttc_below_2s = j.at("share_ttc_below_2s").get<double>();
  r.sample_count = j.at("sample_count").get<std::uint64_t>();
  r.conflict_count = j.at("conflict_count").get<std::uint64_t>();
  r.lateral_ttc_events = j.at("lateral_ttc_events").get<std::uint64_t>();
  r.lateral_gap_events = j.at("lateral_gap_events").get<std::uint64_t>();
  r.moderate_share = j.at("share_ttc_2_to_3s").get<double>();
  r.safe_share = j.at("share_ttc_above_3s").get<double>();
  r.observed_seconds = j.at("observed_seconds").get<double>();
  r.arrivals = j.at("arrivals").get<std::uint64_t>();
  r.inserted = j.at("inserted").get<std::uint64_t>();
  r.collisions = j.at("collisions").get<std::uint64_t>();
  r.taper_stops = j.at("taper_stops").get<std::uint64_t>();
  r.emergency_warnings = j.at("emergency_warnings").get<std::uint64_t>();
  r.plan_speed_caps = j.at("plan_speed_caps").get<std::uint64_t>();
  r.plan_aborts = j.at("plan_aborts").get<std::uint64_t>();
  r.plan_solves = j.at("plan_solves").get<std::uint64_t>();
  r.plan_fallbacks = j.at("plan_fallbacks").get<std::uint64_t>();
  r.merges_completed = j.at("merges_completed").get<std::uint64_t>();
  return r;
}

inline MetricThresholds thresholds_for(const ScenarioConfig& c) {
  return {c.experiment.ttc_threshold, c.experiment.gap_threshold,
          c.network.closure_start - c.experiment.approach_length, c.network.closure_end()};
}

/// Fills the metric fields of `r` from a collector.
inline void summarize_metrics(RunResult& r, const MetricsCollector& m, double observed_seconds) {
  r.observed_seconds = observed_seconds;
  r.conflict_count = m.conflicts().size();
  r.lateral_ttc_events = static_cast<std::uint64_t>(std::count_if(
      m.conflicts().begin(), m.conflicts().end(), [](const ConflictEvent& e) { return e.kind == ConflictKind::LateralTtc; }));
  r.lateral_gap_events = r.conflict_count - r.lateral_ttc_events;
  r.conflicts_per_min = conflicts_per_minute(m.conflicts().size(), observed_seconds);
  const auto& values = m.ttc_values();
  r.sample_count = values.size();
  if (values.empty()) {
    r.ttc_p05.reset();
    r.share_ttc_below_2s = r.moderate_share = r.safe_share = 0.0;
    return;
  }
  r.ttc_p05 = percentile(values, 0.05);
  const auto shares = risk_shares(values);
  r.share_ttc_below_2s = shares.high;
  r.moderate_share = shares.moderate;
  r.safe_share = shares.safe;
}

/// Evenly spaced order statistics; keeps the shape of a large sample.
inline std::vector<double> thin_sample(std::vector<double> values, std::size_t max_points) {
  std::sort(values.begin(), values.end());
  if (values.size() <= max_points || max_points < 2) return values;
  std::vector<double> out(max_points);
  const double step = static_cast<double>(values.size() - 1) / static_cast<double>(max_points - 1);
  for (std::size_t i = 0; i < max_points; ++i)
    out[i] = values[static_cast<std::size_t>(std::llround(step * static_cast<double>(i)))];
  return out;
}

inline constexpr std::size_t kDistributionSample = 20000;
inline constexpr std::size_t kDistributionGrid = 512;

/// grid,pdf,cdf rows; header only when the sample has no spread.
inline void write_distribution(std::ostream& out, const std::vector<double>& sample) {
  out << "grid,pdf,cdf\n";
  if (sample.size() < 2 || *std::min_element(sample.begin(), sample.end()) ==
                               *std::max_element(sample.begin(), sample.end()))
    return;
  const auto grid = kde_grid(sample, kDistributionGrid);
  const auto pdf = kde_pdf(sample, grid);
  const auto cdf = ecdf(sample, grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    out << format_double(grid[i]) << ',' << format_double(pdf[i]) << ',' << format_double(cdf[i]) << '\n';
}

struct RunSinks {
  std::ostream* trajectories = nullptr;
  std::ostream* ttc_samples = nullptr;
  std::ostream* conflicts = nullptr;
  std::ostream* spawns = nullptr;
  std::ostream* plans = nullptr;  // one JSON object per game solve
  std::function<void(const WorldState&)> on_step;
};

struct RunOutput {
  RunResult result;
  std::vector<double> ttc_sample;  // thinned, sorted
};

inline void write_spawns(std::ostream& out, const std::vector<SpawnEvent>& spawns) {
  out << "time,id,lane,speed,desired_speed,level,inserted\n";
  for (const auto& s : spawns)
    out << format_tick_time(s.tick) << ',' << s.id << ',' << s.lane << ',' << format_double(s.speed) << ','
        << format_double(s.desired_speed) << ',' << to_string(s.level) << ',' << (s.inserted ? 1 : 0) << '\n';
}

/// Runs one scenario end to end. Metrics cover snapshots after the warm-up.
inline RunOutput run_scenario(const ScenarioConfig& config, const RunSinks& sinks = {}) {
  config.validate();
  WorldState world(config);
  std::optional<GamePlanner> planner;
  if (config.planner_enabled) {
    planner.emplace(config);
    if (sinks.plans && config.plan_debug_dump)
      planner->on_solve = [&](const GameSolve& s) { *sinks.plans << to_json(s).dump() << '\n'; };
  }
  if (sinks.trajectories) *sinks.trajectories << kTrajectoryHeader << '\n';
  if (sinks.ttc_samples) *sinks.ttc_samples << kTtcHeader << '\n';

  const std::int64_t total = config.total_ticks();
  const std::int64_t warmup = config.warmup_ticks();
  MetricsCollector metrics(thresholds_for(config), warmup + 1, sinks.ttc_samples);
  while (world.tick < total) {
    if (planner) planner->before_step(world);
    step(world);
    const auto records = snapshot_records(world);
    if (sinks.trajectories)
      for (const auto& r : records) write_record(*sinks.trajectories, r);
    metrics.observe(world.tick, records);
    if (sinks.on_step) sinks.on_step(world);
  }

  RunOutput out;
  RunResult& r = out.result;
  r.seed = config.experiment.seed;
  r.label = label_for(config);
  summarize_metrics(r, metrics, static_cast<double>(metrics.observed_ticks()) * kStepLength);
  r.arrivals = world.spawns.size();
  r.inserted = static_cast<std::uint64_t>(
      std::count_if(world.spawns.begin(), world.spawns.end(), [](const SpawnEvent& s) { return s.inserted; }));
  r.collisions = world.collisions.size();
  r.taper_stops = world.taper_stops;
  r.emergency_warnings = world.emergency_warnings;
  r.plan_speed_caps = world.plan_speed_caps;
  r.plan_aborts = world.plan_aborts;
  if (planner) {
    r.plan_solves = planner->solves();
    r.plan_fallbacks = planner->fallbacks();
    r.merges_completed = static_cast<std::uint64_t>(std::count_if(
        planner->finished().begin(), planner->finished().end(), [](const InteractionPair& p) { return p.completed; }));
  }
  if (sinks.conflicts) {
    *sinks.conflicts << kConflictHeader << '\n';
    for (const auto& e : metrics.conflicts()) write_conflict(*sinks.conflicts, e);
  }
  if (sinks.spawns) write_spawns(*sinks.spawns, world.spawns);
  out.ttc_sample = thin_sample(metrics.ttc_values(), kDistributionSample);
  return out;
}

/// Recomputes metrics from a stored trajectory log.
inline RunResult metrics_from_log(const std::string& log_text, const ScenarioConfig& config) {
  MetricsCollector metrics(thresholds_for(config), config.warmup_ticks() + 1);
  const double length = config.network.vehicle_length;
  std::vector<LogRecord> with_length;
  for_each_snapshot(log_text, [&](Snapshot snap) {
    with_length.assign(snap.begin(), snap.end());
    for (auto& r : with_length) r.length = length;
    metrics.observe(with_length.front().tick, with_length);
  });
  RunResult r;
  r.seed = config.experiment.seed;
  r.label = label_for(config);
  summarize_metrics(r, metrics, static_cast<double>(config.total_ticks() - config.warmup_ticks()) * kStepLength);
  return r;
}

inline void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

struct RunFiles {
  bool trajectories = true;
  bool ttc_samples = true;
};

/// Writes every per-run artefact into `dir`.
inline RunOutput run_to_directory(const ScenarioConfig& config, const fs::path& dir, RunFiles files = {}) {
  fs::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };
  write_text_file(dir / "scenario.ini", to_config_text(config));
  std::optional<std::ofstream> traj, ttc_out, plans;
  if (files.trajectories && config.experiment.write_trajectory_log) traj.emplace(open("trajectories.csv"));
  if (files.ttc_samples) ttc_out.emplace(open("ttc_samples.csv"));
  if (config.planner_enabled && config.plan_debug_dump) plans.emplace(open("plans.jsonl"));
  auto conflicts = open("conflicts.csv");
  auto spawns = open("spawns.csv");

  RunSinks sinks;
  sinks.trajectories = traj ? &*traj : nullptr;
  sinks.ttc_samples = ttc_out ? &*ttc_out : nullptr;
  sinks.plans = plans ? &*plans : nullptr;
  sinks.conflicts = &conflicts;
  sinks.spawns = &spawns;
  RunOutput out = run_scenario(config, sinks);

  write_text_file(dir / "summary.json", to_json(out.result).dump(2) + "\n");
  auto dist = open("ttc_distribution.csv");
  write_distribution(dist, out.ttc_sample);
  return out;
}

// Comparisons ---------------------------------------------------------------

inline ScenarioConfig arm_config(const ScenarioConfig& base, AutomationLevel level, bool game, std::uint64_t seed) {
  ScenarioConfig c = base;
  c.demand.l2_fraction = level == AutomationLevel::L2 ? 1.0 : 0.0;
  c.demand.l4_fraction = level == AutomationLevel::L4 ? 1.0 : 0.0;
  c.planner_enabled = game;
  c.experiment.seed = seed;
  return c;
}

/// Shortened profile for quick checks.
inline void apply_quick_profile(ScenarioConfig& c) {
  c.experiment.duration = 600.0;
  c.experiment.warmup = 120.0;
}

inline std::string run_dir_name(ScenarioLabel label, std::uint64_t seed) {
  return to_string(label) + "_seed" + std::to_string(seed);
}

struct ComparisonOptions {
  std::vector<std::uint64_t> seeds;
  std::vector<AutomationLevel> levels{AutomationLevel::L2};
  int jobs = 1;
  RunFiles files{false, false};
};

struct MetricRow {
  std::string level;
  std::string metric;
  PairedTestResult test;  // a = baseline, b = game
  std::optional<double> p_increase;  // one-sided, game above baseline
  std::pair<double, double> baseline_ci{0.0, 0.0};
  std::pair<double, double> game_ci{0.0, 0.0};
  std::size_t pairs = 0;
};

struct ComparisonReport {
  std::vector<RunResult> runs;  // sorted by seed, then label
  std::vector<MetricRow> rows;
};

inline const std::vector<std::string>& report_metrics() {
  static const std::vector<std::string> m{"conflicts_per_min", "ttc_p05", "share_ttc_below_2s"};
  return m;
}

inline std::optional<double> metric_value(const RunResult& r, const std::string& metric) {
  if (metric == "conflicts_per_min") return r.conflicts_per_min;
  if (metric == "share_ttc_below_2s") return r.share_ttc_below_2s;
  if (metric == "ttc_p05") return r.ttc_p05;
  throw std::invalid_argument("unknown metric " + metric);
}

/// Builds the paired comparison from per-run results. Seeds where either arm
/// lacks a value for a metric are left out of that metric's test.
inline ComparisonReport build_report(std::vector<RunResult> runs) {
  std::sort(runs.begin(), runs.end(), [](const RunResult& a, const RunResult& b) {
    return a.seed != b.seed ? a.seed < b.seed : a.label < b.label;
  });
  ComparisonReport report;
  report.runs = runs;
  const std::pair<AutomationLevel, std::pair<ScenarioLabel, ScenarioLabel>> arms[] = {
      {AutomationLevel::L2, {ScenarioLabel::BaselineL2, ScenarioLabel::GameL2}},
      {AutomationLevel::L4, {ScenarioLabel::BaselineL4, ScenarioLabel::GameL4}}};
  for (const auto& [level, labels] : arms) {
    std::map<std::uint64_t, const RunResult*> base, game;
    for (const auto& r : runs) {
      if (r.label == labels.first) base[r.seed] = &r;
      if (r.label == labels.second) game[r.seed] = &r;
    }
    if (base.empty() && game.empty()) continue;
    for (const auto& metric : report_metrics()) {
      std::vector<double> a, b;
      for (const auto& [seed, br] : base) {
        auto it = game.find(seed);
        if (it == game.end()) continue;
        auto va = metric_value(*br, metric);
        auto vb = metric_value(*it->second, metric);
        if (!va || !vb) continue;
        a.push_back(*va);
        b.push_back(*vb);
      }
      MetricRow row;
      row.level = to_string(level);
      row.metric = metric;
      row.pairs = a.size();
      row.test.metric = metric;
      if (a.size() >= 2) {
        row.test = paired_t_test(a, b, metric);
        row.p_increase = one_sided_p_greater(paired_t_test(b, a));
        row.baseline_ci = confidence_interval_95(a);
        row.game_ci = confidence_interval_95(b);
      } else if (a.size() == 1) {
        row.test.mean_a = a[0];
        row.test.mean_b = b[0];
      }
      report.rows.push_back(row);
    }
  }
  return report;
}

inline ordered_json to_json(const ComparisonReport& report) {
  auto opt = [](std::optional<double> v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
  auto finite = [](double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); };
  ordered_json rows = ordered_json::array();
  for (const auto& r : report.rows) {
    const bool tested = r.pairs >= 2;
    rows.push_back({{"level", r.level},
                    {"metric", r.metric},
                    {"pairs", r.pairs},
                    {"baseline_mean", r.pairs ? ordered_json(r.test.mean_a) : ordered_json(nullptr)},
                    {"game_mean", r.pairs ? ordered_json(r.test.mean_b) : ordered_json(nullptr)},
                    {"t", tested ? finite(r.test.t_statistic) : ordered_json(nullptr)},
                    {"df", tested ? ordered_json(r.test.degrees_of_freedom) : ordered_json(nullptr)},
                    {"p_value", tested ? ordered_json(r.test.p_value) : ordered_json(nullptr)},
                    {"p_increase", opt(r.p_increase)},
                    {"baseline_ci95", tested ? ordered_json::array({r.baseline_ci.first, r.baseline_ci.second})
                                             : ordered_json(nullptr)},
                    {"game_ci95", tested ? ordered_json::array({r.game_ci.first, r.game_ci.second})
                                         : ordered_json(nullptr)}});
  }
  ordered_json runs = ordered_json::array();
  for (const auto& r : report.runs) runs.push_back(to_json(r));
  return {{"rows", rows}, {"runs", runs}};
}

inline std::string report_text(const ComparisonReport& report) {
  std::ostringstream out;
  auto num = [](std::optional<double> v, int precision) {
    if (!v || !std::isfinite(*v)) return std::string("-");
    std::ostringstream s;
    s << std::fixed << std::setprecision(precision) << *v;
    return s.str();
  };
  out << std::left << std::setw(7) << "level" << std::setw(22) << "metric" << std::right << std::setw(14)
      << "baseline" << std::setw(14) << "game" << std::setw(10) << "p" << std::setw(12) << "p(incr)"
      << std::setw(7) << "pairs" << '\n';
  for (const auto& r : report.rows) {
    const bool tested = r.pairs >= 2;
    out << std::left << std::setw(7) << r.level << std::setw(22) << r.metric << std::right << std::setw(14)
        << num(r.pairs ? std::optional(r.test.mean_a) : std::nullopt, 4) << std::setw(14)
        << num(r.pairs ? std::optional(r.test.mean_b) : std::nullopt, 4) << std::setw(10)
        << num(tested ? std::optional(r.test.p_value) : std::nullopt, 4) << std::setw(12)
        << num(r.p_increase, 4) << std::setw(7) << r.pairs << '\n';
  }
  return out.str();
}

/// Collects runs/<label>_seed<N>/summary.json under `dir`.
inline std::vector<RunResult> load_run_results(const fs::path& dir) {
  const fs::path runs = dir / "runs";
  if (!fs::is_directory(runs)) throw std::runtime_error("no runs/ directory under " + dir.string());
  std::vector<fs::path> summaries;
  for (const auto& entry : fs::directory_iterator(runs))
    if (fs::is_regular_file(entry.path() / "summary.json")) summaries.push_back(entry.path() / "summary.json");
  std::sort(summaries.begin(), summaries.end());
  std::vector<RunResult> out;
  for (const auto& p : summaries) {
    try {
      out.push_back(run_result_from_json(ordered_json::parse(read_file(p.string()))));
    } catch (const std::exception& e) {
      throw std::runtime_error(p.string() + ": " + e.what());
    }
  }
  return out;
}

/// (Re)writes report.json, report.txt and conflicts_per_seed.csv from the
/// stored per-run summaries.
inline ComparisonReport write_report(const fs::path& dir) {
  ComparisonReport report = build_report(load_run_results(dir));
  write_text_file(dir / "report.json", to_json(report).dump(2) + "\n");
  write_text_file(dir / "report.txt", report_text(report));
  std::ostringstream seeds;
  seeds << "seed,label,conflicts_per_min,ttc_p05,share_ttc_below_2s\n";
  for (const auto& r : report.runs)
    seeds << r.seed << ',' << to_string(r.label) << ',' << format_double(r.conflicts_per_min) << ','
          << (r.ttc_p05 ? format_double(*r.ttc_p05) : std::string()) << ',' << format_double(r.share_ttc_below_2s)
          << '\n';
  write_text_file(dir / "conflicts_per_seed.csv", seeds.str());
  return report;
}

class RunFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Baseline and game arms for every seed and level, then the report. Pooled
/// TTC distributions per arm go to distributions/<label>.csv.
inline ComparisonReport run_comparison(const ScenarioConfig& base, const ComparisonOptions& options,
                                       const fs::path& out_dir,
                                       const std::function<void(const RunResult&)>& progress = {}) {
  if (options.seeds.size() < 2) throw std::invalid_argument("run_comparison: need at least 2 seeds");
  struct Task {
    ScenarioConfig config;
    ScenarioLabel label;
  };
  std::vector<Task> tasks;
  for (auto level : options.levels)
    for (auto seed : options.seeds)
      for (bool game : {false, true}) {
        auto c = arm_config(base, level, game, seed);
        tasks.push_back({c, label_for(c)});
      }

  fs::create_directories(out_dir / "runs");
  write_text_file(out_dir / "scenario.ini", to_config_text(base));
  std::vector<std::optional<RunOutput>> outputs(tasks.size());
  std::vector<std::string> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const auto& t = tasks[i];
      try {
        outputs[i] = run_to_directory(t.config, out_dir / "runs" / run_dir_name(t.label, t.config.experiment.seed),
                                      options.files);
        if (progress) {
          std::lock_guard lock(progress_mutex);
          progress(outputs[i]->result);
        }
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int jobs = std::max(1, options.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < tasks.size(); ++i)
    if (!outputs[i])
      throw RunFailure("run " + to_string(tasks[i].label) + " seed " + std::to_string(tasks[i].config.experiment.seed) +
                       " failed: " + errors[i]);

  fs::create_directories(out_dir / "distributions");
  std::map<ScenarioLabel, std::vector<double>> pooled;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    auto& p = pooled[tasks[i].label];
    p.insert(p.end(), outputs[i]->ttc_sample.begin(), outputs[i]->ttc_sample.end());
  }
  for (auto& [label, values] : pooled) {
    std::ofstream f(out_dir / "distributions" / (to_string(label) + ".csv"), std::ios::binary);
    write_distribution(f, thin_sample(std::move(values), kDistributionSample));
  }
  return write_report(out_dir);
}

}  // namespace wzgame
