#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "wzgame/config.hpp"
#include "wzgame/core.hpp"

namespace wzgame {

/// A forward bound on arc position that moves at constant speed: a predicted
/// leader's rear (minus standstill gap) or, at speed 0, a stop line.
struct LongitudinalLimit {
  double position = 0.0;
  double speed = 0.0;
  bool before_merge_only = false;  // dropped once a merge has started moving sideways
};

/// A target-lane vehicle predicted at constant speed. For the follower the
/// position is its front bumper, for the leader its rear bumper.
struct PredictedNeighbour {
  double position = 0.0;
  double speed = 0.0;
};

/// Gap a merging agent waits for before moving sideways.
struct MergeClearance {
  std::optional<PredictedNeighbour> follower;
  std::optional<PredictedNeighbour> leader;
  double min_gap = 1.5;
  double closing_time = 2.0;  // extra gap per m/s of closing speed
};

struct SamplingContext {
  double t0 = 0.0;
  int reference_lane_index = 0;
  double desired_speed = 33.3;
  double constraint_decel = 3.0;
  std::vector<LongitudinalLimit> limits;
  MergeClearance clearance;
};

/// Acceleration levels per manoeuvre. Merge reuses the Proceed levels.
inline std::vector<double> accel_levels(Manoeuvre m, int samples) {
  const std::vector<double> defaults = m == Manoeuvre::Wait ? std::vector<double>{-1.5, -2.5, -4.0}
                                                            : std::vector<double>{-1.0, 0.0, 1.0};
  if (samples == 3) return defaults;
  if (samples == 1) return {defaults[1]};
  std::vector<double> out(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k)
    out[k] = defaults.front() + (defaults.back() - defaults.front()) * k / (samples - 1);
  return out;
}

namespace detail {

inline bool merge_clear(const MergeClearance& c, double arc, double speed, double length, double t) {
  if (c.follower) {
    const double front = c.follower->position + c.follower->speed * t;
    const double need = c.min_gap + c.closing_time * std::max(0.0, c.follower->speed - speed);
    if (arc - length - front < need) return false;
  }
  if (c.leader) {
    const double rear = c.leader->position + c.leader->speed * t;
    const double need = c.min_gap + c.closing_time * std::max(0.0, speed - c.leader->speed);
    if (rear - arc < need) return false;
  }
  return true;
}

}  // namespace detail

/// One constant-acceleration sample. Speeds stay within [0, desired] and within
/// every limit's stopping envelope, and braking never exceeds 9 m/s^2.
/// Laterally the sample converges on the reference centreline; a Merge holds
/// its offset until the clearance test passes, and is assigned to the
/// reference lane from the step it starts moving sideways.
inline Trajectory sample_trajectory(const VehicleState& agent, Manoeuvre manoeuvre, double accel,
                                    const LaneGeometry& reference_lane, const PlannerParams& params,
                                    const SamplingContext& ctx) {
  constexpr double dt = kStepLength;
  const int steps = params.horizon_steps();
  const LaneProjection start = project(reference_lane, agent.position);
  const bool merging = manoeuvre == Manoeuvre::Merge;

  std::vector<double> arc(steps + 1), speed(steps + 1);
  arc[0] = start.arc;
  speed[0] = longitudinal_speed(agent);
  int lateral_start = merging ? -1 : 0;
  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;
    if (lateral_start < 0 && detail::merge_clear(ctx.clearance, arc[k], speed[k], agent.length, t))
      lateral_start = k;
    const double v = speed[k];
    double next = v + accel * dt;
    if (accel > 0.0) next = std::min(next, std::max(ctx.desired_speed, v));
    for (const auto& lim : ctx.limits) {
      if (lim.before_merge_only && lateral_start >= 0) continue;
      const double room = std::max(0.0, lim.position + lim.speed * t - arc[k]);
      const double allowed = lim.speed + std::min(std::sqrt(2.0 * ctx.constraint_decel * room), room / dt);
      next = std::min(next, allowed);
    }
    next = std::max({next, v - kEmergencyDecel * dt, 0.0});
    if (next < 1e-9) next = 0.0;
    speed[k + 1] = next;
    arc[k + 1] = arc[k] + next * dt;
  }

  auto offset_at = [&](int k) {
    if (lateral_start < 0 || k <= lateral_start) return start.offset;
    return lateral_transition(start.offset, reference_lane.width, (k - lateral_start) * dt);
  };

  std::vector<VehicleState> states;
  states.reserve(steps + 1);
  states.push_back(agent);
  double prev_offset = offset_at(0);
  for (int k = 1; k <= steps; ++k) {
    const double offset = offset_at(k);
    const double lateral_rate = (offset - prev_offset) / dt;
    VehicleState s = agent;
    s.position = point_at(reference_lane, arc[k], offset);
    s.speed = std::hypot(speed[k], lateral_rate);
    s.heading = std::atan2(lateral_rate, speed[k]);
    if (lateral_start >= 0 && k > lateral_start) s.lane_index = ctx.reference_lane_index;
    states.push_back(s);
    prev_offset = offset;
  }
  return Trajectory(ctx.t0, std::move(states), manoeuvre);
}

inline std::vector<Trajectory> sample_trajectories(const VehicleState& agent, Manoeuvre manoeuvre,
                                                   const LaneGeometry& reference_lane,
                                                   const PlannerParams& params,
                                                   const SamplingContext& ctx) {
  std::vector<Trajectory> out;
  for (double a : accel_levels(manoeuvre, params.samples_per_manoeuvre))
    out.push_back(sample_trajectory(agent, manoeuvre, a, reference_lane, params, ctx));
  return out;
}

}  // namespace wzgame
