#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wzgame {

inline constexpr double kStepLength = 0.1;
inline constexpr double kEmergencyDecel = 9.0;
inline constexpr double kDefaultVehicleLength = 5.0;
inline constexpr double kLaneChangeDuration = 3.0;
inline constexpr double kVehicleWidth = 1.8;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;

  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

enum class AutomationLevel { L2, L4 };

inline const char* to_string(AutomationLevel level) {
  return level == AutomationLevel::L2 ? "l2" : "l4";
}

using VehicleId = std::uint64_t;

/// Kinematic snapshot of one vehicle. `position` is the front bumper in the
/// world frame; `speed` is the magnitude of the planar velocity and `heading`
/// its direction, so lane-keeping vehicles have heading 0.
struct VehicleState {
  VehicleId id = 0;
  Vec2 position;
  double speed = 0.0;
  double heading = 0.0;
  int lane_index = 0;
  double length = kDefaultVehicleLength;
  AutomationLevel automation_level = AutomationLevel::L2;
};

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double angle) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

inline double longitudinal_speed(const VehicleState& s) {
  return s.heading == 0.0 ? s.speed : s.speed * std::cos(s.heading);
}

struct ClosedInterval {
  double start = 0.0;
  double end = 0.0;
};

struct LaneGeometry {
  std::vector<Vec2> centreline;
  double width = 3.2;
  std::optional<ClosedInterval> closed_interval;
};

struct LaneProjection {
  double arc = 0.0;
  double offset = 0.0;  // positive to the left of travel
};

namespace detail {

inline void require_polyline(const LaneGeometry& lane) {
  if (lane.centreline.size() < 2)
    throw std::invalid_argument("lane centreline needs at least two points");
  for (std::size_t i = 1; i < lane.centreline.size(); ++i) {
    if ((lane.centreline[i] - lane.centreline[i - 1]).norm() <= 0.0)
      throw std::invalid_argument("lane centreline has a zero-length segment");
  }
}

}  // namespace detail

inline double lane_length(const LaneGeometry& lane) {
  detail::require_polyline(lane);
  double total = 0.0;
  for (std::size_t i = 1; i < lane.centreline.size(); ++i)
    total += (lane.centreline[i] - lane.centreline[i - 1]).norm();
  return total;
}

/// Closest-point projection onto the centreline. Equidistant candidates
/// resolve to the smaller arc length.
inline LaneProjection project(const LaneGeometry& lane, Vec2 p) {
  detail::require_polyline(lane);
  double best_dist = std::numeric_limits<double>::infinity();
  LaneProjection best;
  double arc_start = 0.0;
  for (std::size_t i = 1; i < lane.centreline.size(); ++i) {
    const Vec2 a = lane.centreline[i - 1];
    const Vec2 seg = lane.centreline[i] - a;
    const double len = seg.norm();
    const double t = std::clamp((p - a).dot(seg) / (len * len), 0.0, 1.0);
    const Vec2 foot = a + t * seg;
    const Vec2 rel = p - foot;
    const double dist = rel.norm();
    if (dist < best_dist) {
      best_dist = dist;
      best.arc = arc_start + t * len;
      const double side = seg.cross(rel);
      best.offset = side > 0.0 ? dist : (side < 0.0 ? -dist : 0.0);
    }
    arc_start += len;
  }
  return best;
}

inline double arc_position(const LaneGeometry& lane, Vec2 p) { return project(lane, p).arc; }

inline double lateral_offset(const LaneGeometry& lane, Vec2 p) { return project(lane, p).offset; }

/// World point at `arc` along the centreline, shifted `offset` to the left.
/// Arc beyond either end extrapolates along the end segment.
inline Vec2 point_at(const LaneGeometry& lane, double arc, double offset = 0.0) {
  detail::require_polyline(lane);
  const auto& pts = lane.centreline;
  double arc_start = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const Vec2 seg = pts[i] - pts[i - 1];
    const double len = seg.norm();
    if (arc <= arc_start + len || i + 1 == pts.size()) {
      const Vec2 dir = (1.0 / len) * seg;
      const Vec2 left{-dir.y, dir.x};
      return pts[i - 1] + (arc - arc_start) * dir + offset * left;
    }
    arc_start += len;
  }
  return pts.back();
}

/// Bumper-to-bumper gap: arc(leader) - arc(follower) - leader.length.
inline double longitudinal_gap(const VehicleState& leader, const VehicleState& follower,
                               const LaneGeometry& lane) {
  return arc_position(lane, leader.position) - arc_position(lane, follower.position) -
         leader.length;
}

inline double smoothstep(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

/// Inverse of smoothstep on [0, 1] by bisection (the cubic is monotone there).
inline double smoothstep_inverse(double value) {
  value = std::clamp(value, 0.0, 1.0);
  if (value == 0.0 || value == 1.0) return value;
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (smoothstep(mid) < value ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Lateral offset from a reference centreline `elapsed` seconds into a lane
/// change that started `initial_offset` away from it. The smoothstep profile
/// spans one full lane width in `duration`; a partially completed change
/// resumes at the phase matching its remaining offset. Offsets beyond one lane
/// width are treated as a full-width change.
inline double lateral_transition(double initial_offset, double lane_width, double elapsed,
                                 double duration = kLaneChangeDuration) {
  if (initial_offset == 0.0) return 0.0;
  const double remaining = std::min(1.0, std::abs(initial_offset) / lane_width);
  const double phase = smoothstep_inverse(1.0 - remaining) + elapsed / duration;
  if (phase >= 1.0) return 0.0;
  return std::copysign(lane_width * (1.0 - smoothstep(phase)), initial_offset);
}

enum class Manoeuvre { Proceed, Wait, Merge };

inline const char* to_string(Manoeuvre m) {
  switch (m) {
    case Manoeuvre::Proceed: return "proceed";
    case Manoeuvre::Wait: return "wait";
    case Manoeuvre::Merge: return "merge";
  }
  return "?";
}

/// Fixed-resolution state sequence; state k is at time t0 + k * dt.
class Trajectory {
 public:
  Trajectory(double t0, std::vector<VehicleState> states, Manoeuvre manoeuvre,
             double dt = kStepLength)
      : t0_(t0), dt_(dt), states_(std::move(states)), manoeuvre_(manoeuvre) {
    validate();
  }

  double t0() const { return t0_; }
  double dt() const { return dt_; }
  Manoeuvre manoeuvre() const { return manoeuvre_; }
  const std::vector<VehicleState>& states() const { return states_; }
  std::size_t size() const { return states_.size(); }
  const VehicleState& operator[](std::size_t k) const { return states_[k]; }
  double time_at(std::size_t k) const { return t0_ + static_cast<double>(k) * dt_; }

  /// First `count` states (at least one).
  Trajectory prefix(std::size_t count) const {
    count = std::clamp<std::size_t>(count, 1, states_.size());
    return Trajectory(t0_, {states_.begin(), states_.begin() + static_cast<long>(count)},
                      manoeuvre_, dt_);
  }

 private:
  void validate() const {
    if (dt_ != kStepLength) throw std::invalid_argument("trajectory dt must be 0.1 s");
    if (states_.empty()) throw std::invalid_argument("trajectory has no states");
    for (std::size_t k = 0; k < states_.size(); ++k) {
      const auto& s = states_[k];
      if (!s.position.finite() || !std::isfinite(s.speed) || s.speed < 0.0)
        throw std::invalid_argument("trajectory state " + std::to_string(k) +
                                    " has an invalid position or speed");
      if (k == 0) continue;
      const auto& prev = states_[k - 1];
      const double step = (s.position - prev.position).norm();
      const double bound = (std::max(prev.speed, s.speed) + 1.0) * dt_ + 1e-9;
      if (step > bound)
        throw std::invalid_argument("trajectory state " + std::to_string(k) +
                                    " moves further than its speed allows");
    }
  }

  double t0_;
  double dt_;
  std::vector<VehicleState> states_;
  Manoeuvre manoeuvre_;
};

}  // namespace wzgame
