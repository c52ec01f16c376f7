#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wzgame/core.hpp"
#include "wzgame/io.hpp"
#include "wzgame/sim.hpp"

namespace wzgame {

/// Longitudinal time-to-collision. Empty when the follower is not closing or
/// the vehicles overlap.
inline std::optional<double> ttc(double gap, double follower_speed, double leader_speed) {
  if (!(follower_speed > leader_speed) || !(gap > 0.0)) return std::nullopt;
  return gap / (follower_speed - leader_speed);
}

inline std::optional<double> ttc(const VehicleState& leader, const VehicleState& follower,
                                 const LaneGeometry& lane) {
  const double gap = longitudinal_gap(leader, follower, lane);
  return ttc(gap, longitudinal_speed(follower), longitudinal_speed(leader));
}

struct TtcSample {
  std::int64_t tick = 0;
  VehicleId follower_id = 0;
  VehicleId leader_id = 0;
  double ttc = 0.0;
  int lane_index = 0;

  double time() const { return static_cast<double>(tick) * kStepLength; }
  friend bool operator==(const TtcSample&, const TtcSample&) = default;
};

enum class ConflictKind { LateralTtc, LateralGap };

inline std::string to_string(ConflictKind k) { return k == ConflictKind::LateralTtc ? "lateral_ttc" : "lateral_gap"; }

struct ConflictEvent {
  std::int64_t tick = 0;
  VehicleId ego_id = 0;
  VehicleId other_id = 0;
  ConflictKind kind = ConflictKind::LateralTtc;
  double value = 0.0;

  double time() const { return static_cast<double>(tick) * kStepLength; }
  friend bool operator==(const ConflictEvent&, const ConflictEvent&) = default;
};

struct MetricThresholds {
  double ttc = 2.0;
  double gap = 1.0;
  double window_start = 1000.0;  // arc range over which TTC is sampled
  double window_end = 4000.0;
};

/// All records of one tick, any order.
using Snapshot = std::span<const LogRecord>;

namespace detail {

inline std::vector<std::vector<const LogRecord*>> by_lane(Snapshot snapshot) {
  int lanes = 0;
  for (const auto& r : snapshot) lanes = std::max(lanes, r.lane + 1);
  std::vector<std::vector<const LogRecord*>> out(static_cast<std::size_t>(lanes));
  for (const auto& r : snapshot) out[r.lane].push_back(&r);
  for (auto& lane : out)
    std::sort(lane.begin(), lane.end(), [](const LogRecord* a, const LogRecord* b) {
      return a->arc != b->arc ? a->arc < b->arc : a->id < b->id;
    });
  return out;
}

}  // namespace detail

/// Same-lane consecutive pairs inside the approach window.
inline std::vector<TtcSample> ttc_samples(Snapshot snapshot, const MetricThresholds& th) {
  std::vector<TtcSample> out;
  const auto lanes = detail::by_lane(snapshot);
  for (std::size_t lane = 0; lane < lanes.size(); ++lane) {
    const auto& occ = lanes[lane];
    for (std::size_t k = 1; k < occ.size(); ++k) {
      const LogRecord& f = *occ[k - 1];
      const LogRecord& l = *occ[k];
      if (f.arc < th.window_start || f.arc > th.window_end) continue;
      if (auto value = ttc(l.arc - l.length - f.arc, f.speed, l.speed))
        out.push_back({f.tick, f.id, l.id, *value, static_cast<int>(lane)});
    }
  }
  return out;
}

/// Near misses around vehicles that are off their lane centre: checked against
/// the nearest leader and follower assigned to the same lane.
inline std::vector<ConflictEvent> detect_lateral_conflicts(Snapshot snapshot, const MetricThresholds& th) {
  std::vector<ConflictEvent> out;
  const auto lanes = detail::by_lane(snapshot);
  for (const auto& occ : lanes) {
    for (std::size_t k = 0; k < occ.size(); ++k) {
      const LogRecord& ego = *occ[k];
      if (ego.offset == 0.0) continue;
      auto check = [&](const LogRecord& leader, const LogRecord& follower, VehicleId other) {
        const double gap = leader.arc - leader.length - follower.arc;
        if (auto value = ttc(gap, follower.speed, leader.speed); value && *value < th.ttc)
          out.push_back({ego.tick, ego.id, other, ConflictKind::LateralTtc, *value});
        if (gap < th.gap) out.push_back({ego.tick, ego.id, other, ConflictKind::LateralGap, gap});
      };
      if (k + 1 < occ.size()) check(*occ[k + 1], ego, occ[k + 1]->id);
      if (k > 0) check(ego, *occ[k - 1], occ[k - 1]->id);
    }
  }
  return out;
}

inline double conflicts_per_minute(std::size_t events, double duration_seconds) {
  if (!(duration_seconds > 0.0)) throw std::invalid_argument("conflicts_per_minute: duration must be positive");
  return static_cast<double>(events) / (duration_seconds / 60.0);
}

/// Linear-interpolation quantile at index p * (n - 1).
inline double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("percentile: p outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

inline double silverman_bandwidth(std::span<const double> values) {
  const auto n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  std::vector<double> sorted(values.begin(), values.end());
  const double iqr = percentile(sorted, 0.75) - percentile(sorted, 0.25);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  return 0.9 * spread * std::pow(n, -0.2);
}

inline std::vector<double> make_grid(double lo, double hi, std::size_t points) {
  if (points < 2 || !(hi > lo)) throw std::invalid_argument("make_grid: need at least 2 points over a positive span");
  std::vector<double> grid(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) grid[i] = lo + step * static_cast<double>(i);
  grid.back() = hi;
  return grid;
}

/// Grid covering the sample with three bandwidths of margin on each side.
inline std::vector<double> kde_grid(std::span<const double> values, std::size_t points = 512) {
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  const double h = silverman_bandwidth(values);
  return make_grid(*mn - 3.0 * h, *mx + 3.0 * h, points);
}

inline double trapezoid(std::span<const double> grid, std::span<const double> y) {
  double total = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) total += 0.5 * (y[i] + y[i - 1]) * (grid[i] - grid[i - 1]);
  return total;
}

/// Gaussian KDE, rescaled so the trapezoidal integral over `grid` is 1.
inline std::vector<double> kde_pdf(std::span<const double> values, std::span<const double> grid) {
  if (values.size() < 2) throw std::invalid_argument("kde_pdf: need at least 2 values");
  if (grid.size() < 2) throw std::invalid_argument("kde_pdf: grid needs at least 2 points");
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  if (*mn == *mx) throw std::invalid_argument("kde_pdf: zero-variance sample");
  const double h = silverman_bandwidth(values);
  const double norm = 1.0 / (static_cast<double>(values.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> pdf(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double sum = 0.0;
    for (double v : values) {
      const double z = (grid[i] - v) / h;
      sum += std::exp(-0.5 * z * z);
    }
    pdf[i] = sum * norm;
  }
  const double area = trapezoid(grid, pdf);
  if (!(area > 0.0)) throw std::runtime_error("kde_pdf: grid does not cover the sample");
  for (double& p : pdf) p /= area;
  return pdf;
}

inline std::vector<double> ecdf(std::vector<double> values, std::span<const double> grid) {
  if (values.empty()) throw std::invalid_argument("ecdf: empty sample");
  std::sort(values.begin(), values.end());
  std::vector<double> out;
  out.reserve(grid.size());
  for (double g : grid) {
    const auto count = std::upper_bound(values.begin(), values.end(), g) - values.begin();
    out.push_back(static_cast<double>(count) / static_cast<double>(values.size()));
  }
  return out;
}

struct RiskShares {
  double high = 0.0;
  double moderate = 0.0;
  double safe = 0.0;
};

inline RiskShares risk_shares(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("risk_shares: empty sample");
  std::size_t high = 0, moderate = 0;
  for (double v : values) {
    if (v < 2.0) ++high;
    else if (v <= 3.0) ++moderate;
  }
  const auto n = static_cast<double>(values.size());
  RiskShares r;
  r.high = static_cast<double>(high) / n;
  r.moderate = static_cast<double>(moderate) / n;
  r.safe = 1.0 - r.high - r.moderate;
  return r;
}

/// Per-run accumulator fed one snapshot at a time. TTC samples are streamed to
/// `ttc_out` when given; only their values are kept.
class MetricsCollector {
 public:
  MetricsCollector(MetricThresholds th, std::int64_t first_tick, std::ostream* ttc_out = nullptr)
      : th_(th), first_tick_(first_tick), ttc_out_(ttc_out) {}

  /// `tick` is the snapshot's tick; it is passed separately because an empty
  /// road still counts as observed time.
  void observe(std::int64_t tick, Snapshot snapshot);

  const std::vector<double>& ttc_values() const { return ttc_values_; }
  const std::vector<ConflictEvent>& conflicts() const { return conflicts_; }
  std::int64_t observed_ticks() const { return observed_ticks_; }

 private:
  MetricThresholds th_;
  std::int64_t first_tick_;
  std::ostream* ttc_out_;
  std::vector<double> ttc_values_;
  std::vector<ConflictEvent> conflicts_;
  std::int64_t observed_ticks_ = 0;
};

// CSV contracts -------------------------------------------------------------

inline constexpr std::string_view kTrajectoryHeader = "time,id,lane,arc,offset,speed,accel,overridden";
inline constexpr std::string_view kTtcHeader = "time,follower,leader,lane,ttc";
inline constexpr std::string_view kConflictHeader = "time,ego,other,kind,value";

inline void write_record(std::ostream& out, const LogRecord& r) {
  out << format_tick_time(r.tick) << ',' << r.id << ',' << r.lane << ',' << format_double(r.arc) << ','
      << format_double(r.offset) << ',' << format_double(r.speed) << ',' << format_double(r.accel) << ','
      << (r.overridden ? 1 : 0) << '\n';
}

inline void write_ttc(std::ostream& out, const TtcSample& s) {
  out << format_tick_time(s.tick) << ',' << s.follower_id << ',' << s.leader_id << ',' << s.lane_index << ','
      << format_double(s.ttc) << '\n';
}

inline void write_conflict(std::ostream& out, const ConflictEvent& e) {
  out << format_tick_time(e.tick) << ',' << e.ego_id << ',' << e.other_id << ',' << to_string(e.kind) << ','
      << format_double(e.value) << '\n';
}

/// Ticks are recovered from the one-decimal time column.
inline std::int64_t tick_from_time(std::string_view text) {
  return static_cast<std::int64_t>(std::llround(parse_double(text) / kStepLength));
}

inline LogRecord parse_record(std::string_view line) {
  const auto f = split(line, ',');
  if (f.size() != 8) throw std::invalid_argument("trajectory row needs 8 fields: '" + std::string(line) + "'");
  LogRecord r;
  r.tick = tick_from_time(f[0]);
  r.id = parse_int<VehicleId>(f[1]);
  r.lane = parse_int<int>(f[2]);
  r.arc = parse_double(f[3]);
  r.offset = parse_double(f[4]);
  r.speed = parse_double(f[5]);
  r.accel = parse_double(f[6]);
  r.overridden = parse_int<int>(f[7]) != 0;
  return r;
}

/// Reads a trajectory log and hands each tick's records to `sink` in order.
template <typename Sink>
void for_each_snapshot(std::string_view text, Sink&& sink) {
  std::size_t pos = 0;
  bool header = true;
  std::vector<LogRecord> batch;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (header) {
      if (line != kTrajectoryHeader) throw std::invalid_argument("unexpected trajectory header: '" + std::string(line) + "'");
      header = false;
      continue;
    }
    LogRecord r = parse_record(line);
    if (!batch.empty() && batch.front().tick != r.tick) {
      sink(Snapshot(batch));
      batch.clear();
    }
    batch.push_back(r);
  }
  if (!batch.empty()) sink(Snapshot(batch));
}

inline void MetricsCollector::observe(std::int64_t tick, Snapshot snapshot) {
  if (tick < first_tick_) return;
  ++observed_ticks_;
  for (const auto& s : ttc_samples(snapshot, th_)) {
    ttc_values_.push_back(s.ttc);
    if (ttc_out_) write_ttc(*ttc_out_, s);
  }
  auto c = detect_lateral_conflicts(snapshot, th_);
  conflicts_.insert(conflicts_.end(), c.begin(), c.end());
}

}  // namespace wzgame
