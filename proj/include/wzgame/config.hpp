#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "wzgame/car_following.hpp"
#include "wzgame/core.hpp"
#include "wzgame/game.hpp"
#include "wzgame/io.hpp"

namespace wzgame {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LaneChangeParams {
  double cooperation = 0.5;
  double politeness = 0.0;  // carried for discretionary changes, which are disabled
  double accept_decel_threshold = 2.0;
  double urgency_distance = 500.0;
};

struct VehicleClass {
  CarFollowingParams car_following;
  LaneChangeParams lane_change;
};

struct PlannerParams {
  double horizon = 6.0;
  double replan_interval = 2.0;
  int samples_per_manoeuvre = 3;
  double merge_completion_epsilon = 0.2;
  double constraint_decel = 3.0;  // braking used to respect stop lines and leaders in sampling
  double merge_clearance_time = 2.0;  // extra merge gap per m/s of closing speed

  int horizon_steps() const { return static_cast<int>(std::lround(horizon / kStepLength)); }
  int replan_steps() const { return static_cast<int>(std::lround(replan_interval / kStepLength)); }
};

struct NetworkConfig {
  double segment_length = 7000.0;
  int lane_count = 4;
  double lane_width = 3.2;
  int closed_lane = 0;
  double closure_start = 3000.0;
  double closure_length = 1000.0;
  double vehicle_length = kDefaultVehicleLength;

  double closure_end() const { return closure_start + closure_length; }
};

struct DemandConfig {
  double per_lane = 1500.0;  // veh/h
  double l2_fraction = 1.0;
  double l4_fraction = 0.0;
};

struct ExperimentConfig {
  double duration = 1800.0;
  double warmup = 300.0;
  double step_length = kStepLength;
  std::uint64_t seed = 1;
  double ttc_threshold = 2.0;
  double gap_threshold = 1.0;
  double approach_length = 2000.0;  // TTC window starts this far upstream of the closure
  bool write_trajectory_log = true;
};

struct ScenarioConfig {
  NetworkConfig network;
  DemandConfig demand;
  VehicleClass l2 = default_l2();
  VehicleClass l4 = default_l4();
  bool planner_enabled = false;
  PlannerParams planner;
  GameParams game;
  bool plan_debug_dump = false;
  ExperimentConfig experiment;

  static VehicleClass default_l2() {
    VehicleClass c;
    c.car_following.model = CarFollowingModel::CthAcc;
    c.car_following.comfortable_decel = 3.0;
    c.car_following.headway = 0.8;
    c.car_following.min_gap = 1.5;
    c.car_following.sigma = 0.05;
    c.car_following.speed_deviation = 0.05;
    c.lane_change.cooperation = 0.5;
    return c;
  }

  static VehicleClass default_l4() {
    VehicleClass c;
    c.car_following.model = CarFollowingModel::Idm;
    c.car_following.comfortable_decel = 2.0;
    c.car_following.headway = 0.6;
    c.car_following.min_gap = 1.0;
    c.car_following.sigma = 0.05;
    c.car_following.speed_deviation = 0.05;
    c.lane_change.cooperation = 1.0;
    return c;
  }

  const VehicleClass& vehicle_class(AutomationLevel level) const {
    return level == AutomationLevel::L2 ? l2 : l4;
  }

  std::int64_t total_ticks() const { return std::llround(experiment.duration / kStepLength); }
  std::int64_t warmup_ticks() const { return std::llround(experiment.warmup / kStepLength); }

  void validate() const;
};

namespace detail {

inline void check(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid config: " + what);
}

inline void validate_class(const VehicleClass& c, const std::string& name) {
  const auto& f = c.car_following;
  check(f.desired_speed > 0 && f.max_accel > 0 && f.comfortable_decel > 0 && f.headway > 0 &&
            f.min_gap > 0,
        name + ": desired_speed, max_accel, comfortable_decel, headway and min_gap must be > 0");
  check(f.sigma >= 0 && f.sigma <= 1, name + ": sigma must be in [0, 1]");
  check(f.speed_deviation >= 0 && f.speed_deviation <= 1, name + ": speed_deviation must be in [0, 1]");
  check(f.accel_exponent > 0, name + ": accel_exponent must be > 0");
  const auto& l = c.lane_change;
  check(l.cooperation >= 0 && l.cooperation <= 1, name + ": cooperation must be in [0, 1]");
  check(l.urgency_distance > 0, name + ": urgency_distance must be > 0");
  check(l.accept_decel_threshold > 0, name + ": accept_decel_threshold must be > 0");
}

}  // namespace detail

inline void ScenarioConfig::validate() const {
  using detail::check;
  const auto& n = network;
  check(n.segment_length > 0, "network.segment_length must be > 0");
  check(n.lane_count >= 2, "network.lane_count must be >= 2");
  check(n.lane_width > 0, "network.lane_width must be > 0");
  check(n.closed_lane >= 0 && n.closed_lane < n.lane_count, "network.closed_lane out of range");
  check(n.closure_start > 0 && n.closure_length > 0 && n.closure_end() <= n.segment_length,
        "network closure must lie within the segment");
  check(n.vehicle_length > 0, "network.vehicle_length must be > 0");
  check(demand.per_lane >= 0, "demand.per_lane must be >= 0");
  check(demand.l2_fraction >= 0 && demand.l4_fraction >= 0 &&
            std::abs(demand.l2_fraction + demand.l4_fraction - 1.0) < 1e-9,
        "demand fractions must be non-negative and sum to 1");
  detail::validate_class(l2, "vehicles.l2");
  detail::validate_class(l4, "vehicles.l4");
  check(planner.horizon > 0 && planner.replan_interval > 0 &&
            planner.replan_interval <= planner.horizon,
        "planner: need 0 < replan_interval <= horizon");
  check(std::abs(planner.horizon / kStepLength - planner.horizon_steps()) < 1e-9 &&
            std::abs(planner.replan_interval / kStepLength - planner.replan_steps()) < 1e-9,
        "planner: horizon and replan_interval must be multiples of 0.1 s");
  check(planner.samples_per_manoeuvre >= 1, "planner.samples_per_manoeuvre must be >= 1");
  check(planner.merge_completion_epsilon > 0, "planner.merge_completion_epsilon must be > 0");
  check(planner.constraint_decel > 0, "planner.constraint_decel must be > 0");
  check(planner.merge_clearance_time >= 0, "planner.merge_clearance_time must be >= 0");
  try {
    game.weights.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid config: planner ") + e.what());
  }
  check(game.safety.d_buffer > 0 && game.safety.d_thr > 0, "planner: d_buffer and d_thr must be > 0");
  check(game.progress.p_thr > 0, "planner.p_thr must be > 0");
  check(game.traffic.speed_thr > 0, "planner.speed_thr must be > 0");
  const auto& e = experiment;
  check(e.step_length == kStepLength, "experiment.step_length must be 0.1");
  check(e.duration > 0 && e.warmup >= 0 && e.warmup < e.duration,
        "experiment: need 0 <= warmup < duration");
  check(e.ttc_threshold > 0 && e.gap_threshold > 0, "experiment thresholds must be > 0");
  check(e.approach_length > 0, "experiment.approach_length must be > 0");
}

namespace detail {

struct ConfigField {
  std::string section;
  std::string key;
  std::function<std::string(const ScenarioConfig&)> get;
  std::function<void(ScenarioConfig&, const std::string&)> set;
};

inline std::string format_bool(bool b) { return b ? "true" : "false"; }

inline bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("not a boolean: '" + s + "'");
}

template <typename Member>
ConfigField number_field(std::string section, std::string key, Member member) {
  return {std::move(section), std::move(key),
          [member](const ScenarioConfig& c) { return format_double(member(const_cast<ScenarioConfig&>(c))); },
          [member](ScenarioConfig& c, const std::string& v) { member(c) = parse_double(v); }};
}

inline void add_class_fields(std::vector<ConfigField>& out, const std::string& section,
                             VehicleClass ScenarioConfig::*cls) {
  auto cf = [cls](auto field) {
    return [cls, field](ScenarioConfig& c) -> double& { return (c.*cls).car_following.*field; };
  };
  auto lc = [cls](auto field) {
    return [cls, field](ScenarioConfig& c) -> double& { return (c.*cls).lane_change.*field; };
  };
  out.push_back({section, "model",
                 [cls](const ScenarioConfig& c) {
                   return std::string((c.*cls).car_following.model == CarFollowingModel::Idm ? "idm" : "cth_acc");
                 },
                 [cls](ScenarioConfig& c, const std::string& v) {
                   if (v == "idm") (c.*cls).car_following.model = CarFollowingModel::Idm;
                   else if (v == "cth_acc") (c.*cls).car_following.model = CarFollowingModel::CthAcc;
                   else throw std::invalid_argument("model must be idm or cth_acc");
                 }});
  out.push_back(number_field(section, "desired_speed", cf(&CarFollowingParams::desired_speed)));
  out.push_back(number_field(section, "max_accel", cf(&CarFollowingParams::max_accel)));
  out.push_back(number_field(section, "comfortable_decel", cf(&CarFollowingParams::comfortable_decel)));
  out.push_back(number_field(section, "headway", cf(&CarFollowingParams::headway)));
  out.push_back(number_field(section, "min_gap", cf(&CarFollowingParams::min_gap)));
  out.push_back(number_field(section, "sigma", cf(&CarFollowingParams::sigma)));
  out.push_back(number_field(section, "speed_deviation", cf(&CarFollowingParams::speed_deviation)));
  out.push_back(number_field(section, "accel_exponent", cf(&CarFollowingParams::accel_exponent)));
  out.push_back(number_field(section, "gap_gain", cf(&CarFollowingParams::gap_gain)));
  out.push_back(number_field(section, "speed_gain", cf(&CarFollowingParams::speed_gain)));
  out.push_back(number_field(section, "free_gain", cf(&CarFollowingParams::free_gain)));
  out.push_back(number_field(section, "cooperation", lc(&LaneChangeParams::cooperation)));
  out.push_back(number_field(section, "politeness", lc(&LaneChangeParams::politeness)));
  out.push_back(number_field(section, "accept_decel_threshold", lc(&LaneChangeParams::accept_decel_threshold)));
  out.push_back(number_field(section, "urgency_distance", lc(&LaneChangeParams::urgency_distance)));
}

inline const std::vector<ConfigField>& config_fields() {
  static const std::vector<ConfigField> fields = [] {
    std::vector<ConfigField> f;
    auto num = [&f](const char* s, const char* k, auto member) { f.push_back(number_field(s, k, member)); };
    num("network", "segment_length", [](ScenarioConfig& c) -> double& { return c.network.segment_length; });
    f.push_back({"network", "lane_count",
                 [](const ScenarioConfig& c) { return std::to_string(c.network.lane_count); },
                 [](ScenarioConfig& c, const std::string& v) { c.network.lane_count = parse_int<int>(v); }});
    num("network", "lane_width", [](ScenarioConfig& c) -> double& { return c.network.lane_width; });
    f.push_back({"network", "closed_lane",
                 [](const ScenarioConfig& c) { return std::to_string(c.network.closed_lane); },
                 [](ScenarioConfig& c, const std::string& v) { c.network.closed_lane = parse_int<int>(v); }});
    num("network", "closure_start", [](ScenarioConfig& c) -> double& { return c.network.closure_start; });
    num("network", "closure_length", [](ScenarioConfig& c) -> double& { return c.network.closure_length; });
    num("network", "vehicle_length", [](ScenarioConfig& c) -> double& { return c.network.vehicle_length; });

    num("demand", "per_lane", [](ScenarioConfig& c) -> double& { return c.demand.per_lane; });
    num("demand", "l2_fraction", [](ScenarioConfig& c) -> double& { return c.demand.l2_fraction; });
    num("demand", "l4_fraction", [](ScenarioConfig& c) -> double& { return c.demand.l4_fraction; });

    add_class_fields(f, "vehicles.l2", &ScenarioConfig::l2);
    add_class_fields(f, "vehicles.l4", &ScenarioConfig::l4);

    f.push_back({"planner", "enabled",
                 [](const ScenarioConfig& c) { return format_bool(c.planner_enabled); },
                 [](ScenarioConfig& c, const std::string& v) { c.planner_enabled = parse_bool(v); }});
    num("planner", "horizon", [](ScenarioConfig& c) -> double& { return c.planner.horizon; });
    num("planner", "replan_interval", [](ScenarioConfig& c) -> double& { return c.planner.replan_interval; });
    f.push_back({"planner", "samples_per_manoeuvre",
                 [](const ScenarioConfig& c) { return std::to_string(c.planner.samples_per_manoeuvre); },
                 [](ScenarioConfig& c, const std::string& v) { c.planner.samples_per_manoeuvre = parse_int<int>(v); }});
    num("planner", "merge_completion_epsilon",
        [](ScenarioConfig& c) -> double& { return c.planner.merge_completion_epsilon; });
    num("planner", "constraint_decel", [](ScenarioConfig& c) -> double& { return c.planner.constraint_decel; });
    num("planner", "merge_clearance_time",
        [](ScenarioConfig& c) -> double& { return c.planner.merge_clearance_time; });
    num("planner", "base", [](ScenarioConfig& c) -> double& { return c.game.weights.base; });
    num("planner", "w_safety", [](ScenarioConfig& c) -> double& { return c.game.weights.safety; });
    num("planner", "w_progress", [](ScenarioConfig& c) -> double& { return c.game.weights.progress; });
    num("planner", "w_traffic", [](ScenarioConfig& c) -> double& { return c.game.weights.traffic; });
    num("planner", "d_buffer", [](ScenarioConfig& c) -> double& { return c.game.safety.d_buffer; });
    num("planner", "d_thr", [](ScenarioConfig& c) -> double& { return c.game.safety.d_thr; });
    num("planner", "p_thr", [](ScenarioConfig& c) -> double& { return c.game.progress.p_thr; });
    num("planner", "speed_thr", [](ScenarioConfig& c) -> double& { return c.game.traffic.speed_thr; });
    f.push_back({"planner", "debug_dump",
                 [](const ScenarioConfig& c) { return format_bool(c.plan_debug_dump); },
                 [](ScenarioConfig& c, const std::string& v) { c.plan_debug_dump = parse_bool(v); }});

    num("experiment", "duration", [](ScenarioConfig& c) -> double& { return c.experiment.duration; });
    num("experiment", "warmup", [](ScenarioConfig& c) -> double& { return c.experiment.warmup; });
    num("experiment", "step_length", [](ScenarioConfig& c) -> double& { return c.experiment.step_length; });
    f.push_back({"experiment", "seed",
                 [](const ScenarioConfig& c) { return std::to_string(c.experiment.seed); },
                 [](ScenarioConfig& c, const std::string& v) { c.experiment.seed = parse_int<std::uint64_t>(v); }});
    num("experiment", "ttc_threshold", [](ScenarioConfig& c) -> double& { return c.experiment.ttc_threshold; });
    num("experiment", "gap_threshold", [](ScenarioConfig& c) -> double& { return c.experiment.gap_threshold; });
    num("experiment", "approach_length", [](ScenarioConfig& c) -> double& { return c.experiment.approach_length; });
    f.push_back({"experiment", "write_trajectory_log",
                 [](const ScenarioConfig& c) { return format_bool(c.experiment.write_trajectory_log); },
                 [](ScenarioConfig& c, const std::string& v) { c.experiment.write_trajectory_log = parse_bool(v); }});
    return f;
  }();
  return fields;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Parses sectioned key/value text. Every section and key must be known;
/// missing keys keep their defaults. The result is validated.
inline ScenarioConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax error: ") + e.what());
  }
  ScenarioConfig config;
  const auto& fields = detail::config_fields();
  for (const auto& [section, entries] : tree) {
    if (entries.empty() && !entries.data().empty())
      throw ConfigError("config key '" + section + "' outside any section");
    for (const auto& [key, value] : entries) {
      auto it = std::find_if(fields.begin(), fields.end(), [&](const detail::ConfigField& f) {
        return f.section == section && f.key == key;
      });
      if (it == fields.end()) throw ConfigError("unknown config key [" + section + "] " + key);
      try {
        it->set(config, detail::trim(value.data()));
      } catch (const std::invalid_argument& e) {
        throw ConfigError("bad value for [" + section + "] " + key + ": " + e.what());
      }
    }
  }
  config.validate();
  return config;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text);
}

/// Canonical text form; parse_config(to_config_text(c)) reproduces c.
inline std::string to_config_text(const ScenarioConfig& config) {
  std::ostringstream out;
  std::string current;
  for (const auto& f : detail::config_fields()) {
    if (f.section != current) {
      if (!current.empty()) out << '\n';
      out << '[' << f.section << "]\n";
      current = f.section;
    }
    out << f.key << " = " << f.get(config) << '\n';
  }
  return out.str();
}

}  // namespace wzgame
