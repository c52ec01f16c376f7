#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wzgame/wzgame.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (auto part : wzgame::split(text, ',')) {
    const auto dots = part.find("..");
    if (dots == std::string_view::npos) {
      out.push_back(wzgame::parse_int<std::uint64_t>(part));
      continue;
    }
    const auto lo = wzgame::parse_int<std::uint64_t>(part.substr(0, dots));
    const auto hi = wzgame::parse_int<std::uint64_t>(part.substr(dots + 2));
    if (hi < lo) throw std::invalid_argument("empty seed range '" + std::string(part) + "'");
    for (auto s = lo; s <= hi; ++s) out.push_back(s);
  }
  return out;
}

std::vector<wzgame::AutomationLevel> parse_levels(const std::string& text) {
  std::vector<wzgame::AutomationLevel> out;
  for (auto part : wzgame::split(text, ',')) {
    if (part == "l2") out.push_back(wzgame::AutomationLevel::L2);
    else if (part == "l4") out.push_back(wzgame::AutomationLevel::L4);
    else throw std::invalid_argument("unknown level '" + std::string(part) + "' (expected l2 or l4)");
  }
  return out;
}

void print_result(const wzgame::RunResult& r) {
  std::cout << wzgame::to_string(r.label) << " seed " << r.seed << ": conflicts/min "
            << wzgame::format_double(r.conflicts_per_min) << ", ttc p05 "
            << (r.ttc_p05 ? wzgame::format_double(*r.ttc_p05) : std::string("n/a")) << ", ttc<2s share "
            << wzgame::format_double(r.share_ttc_below_2s) << ", samples " << r.sample_count << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Work-zone lane-change simulator with a game-theoretic merge planner"};
  app.require_subcommand(1);

  std::string config_path, out_dir, log_path, seeds_text = "1..10", levels_text = "l2,l4", report_dir;
  std::uint64_t seed = 1;
  bool quick = false, full_logs = false;
  int jobs = 1;

  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("--config", config_path, "Scenario file")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Random seed (overrides the file)");
  run->add_option("--out", out_dir, "Output directory")->required();

  auto* compare = app.add_subcommand("compare", "Baseline vs game over matched seeds");
  compare->add_option("--config", config_path, "Scenario file")->required();
  compare->add_option("--seeds", seeds_text, "Seeds, e.g. 1..10 or 1,4,7");
  compare->add_option("--levels", levels_text, "Automation levels: l2, l4 or l2,l4");
  compare->add_option("--out", out_dir, "Output directory")->required();
  compare->add_flag("--quick", quick, "3 seeds, 10-minute runs, 2-minute warm-up");
  compare->add_flag("--full-logs", full_logs, "Also write trajectory and TTC sample logs per run");
  compare->add_option("--jobs", jobs, "Parallel runs")->check(CLI::PositiveNumber);

  auto* metrics = app.add_subcommand("metrics", "Recompute run metrics from a trajectory log");
  metrics->add_option("--log", log_path, "trajectories.csv")->required();
  auto* metrics_config = metrics->add_option("--config", config_path, "Scenario file (default: scenario.ini next to the log)");

  auto* report = app.add_subcommand("report", "Rebuild the comparison report from a compare directory");
  report->add_option("--dir", report_dir, "Directory written by compare")->required();

  CLI11_PARSE(app, argc, argv);

  wzgame::ScenarioConfig config;
  std::vector<std::uint64_t> seeds;
  std::vector<wzgame::AutomationLevel> levels;
  try {
    if (*metrics && !*metrics_config)
      config_path = (std::filesystem::path(log_path).parent_path() / "scenario.ini").string();
    if (!config_path.empty()) config = wzgame::load_config(config_path);
    if (*run && *seed_opt) config.experiment.seed = seed;
    if (*compare) {
      seeds = parse_seeds(seeds_text);
      levels = parse_levels(levels_text);
      if (quick) {
        wzgame::apply_quick_profile(config);
        if (compare->count("--seeds") == 0) seeds = {1, 2, 3};
      }
      config.validate();
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (*run) {
      const auto out = wzgame::run_to_directory(config, out_dir);
      print_result(out.result);
    } else if (*compare) {
      wzgame::ComparisonOptions options;
      options.seeds = seeds;
      options.levels = levels;
      options.jobs = jobs;
      options.files = {full_logs, full_logs};
      const auto result = wzgame::run_comparison(config, options, out_dir, print_result);
      std::cout << '\n' << wzgame::report_text(result);
    } else if (*metrics) {
      const auto r = wzgame::metrics_from_log(wzgame::read_file(log_path), config);
      std::cout << wzgame::to_json(r).dump(2) << '\n';
    } else if (*report) {
      std::cout << wzgame::report_text(wzgame::write_report(report_dir));
    }
  } catch (const wzgame::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}
