#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "wzgame/core.hpp"

namespace wzgame {

enum class CarFollowingModel { Idm, CthAcc };

struct CarFollowingParams {
  CarFollowingModel model = CarFollowingModel::Idm;
  double desired_speed = 33.3;    // v0, m/s
  double max_accel = 1.5;         // a, m/s^2
  double comfortable_decel = 3.0; // b, m/s^2
  double headway = 1.0;           // tau, s
  double min_gap = 1.5;           // s0, m
  double sigma = 0.0;             // acceleration noise amplitude as a fraction of a
  double speed_deviation = 0.0;   // std-dev of the desired-speed factor
  double accel_exponent = 4.0;    // delta, IDM only

  // Constant-time-headway gains.
  double gap_gain = 0.23;    // k_g, 1/s^2
  double speed_gain = 0.07;  // k_v, 1/s
  double free_gain = 0.4;    // k_f, 1/s
};

/// What a follower sees of its leader: bumper gap and longitudinal speed.
struct LeaderView {
  double gap = 0.0;
  double speed = 0.0;
};

struct AccelCommand {
  double value = 0.0;
  bool emergency = false;  // non-positive gap to a leader
};

namespace detail {

inline AccelCommand clamp_command(double accel, const CarFollowingParams& p) {
  return {std::clamp(accel, -kEmergencyDecel, p.max_accel), false};
}

}  // namespace detail

inline AccelCommand idm_acceleration(double speed, const CarFollowingParams& p,
                                     std::optional<LeaderView> leader) {
  const double free_term = std::pow(speed / p.desired_speed, p.accel_exponent);
  if (!leader) return detail::clamp_command(p.max_accel * (1.0 - free_term), p);
  if (leader->gap <= 0.0) return {-kEmergencyDecel, true};
  const double dv = speed - leader->speed;
  const double desired_gap =
      p.min_gap + std::max(0.0, speed * p.headway +
                                    speed * dv / (2.0 * std::sqrt(p.max_accel * p.comfortable_decel)));
  const double ratio = desired_gap / leader->gap;
  return detail::clamp_command(p.max_accel * (1.0 - free_term - ratio * ratio), p);
}

/// Constant-time-headway ACC: the smaller of the free-flow speed law and the
/// gap law, with kinematic braking once stopping behind a leader that brakes
/// equally hard needs more than the comfortable deceleration.
inline AccelCommand cth_acc_acceleration(double speed, const CarFollowingParams& p,
                                         std::optional<LeaderView> leader) {
  const double free_law = p.free_gain * (p.desired_speed - speed);
  if (!leader) return detail::clamp_command(free_law, p);
  if (leader->gap <= 0.0) return {-kEmergencyDecel, true};
  const double gap_law = p.gap_gain * (leader->gap - p.min_gap - p.headway * speed) +
                         p.speed_gain * (leader->speed - speed);
  double accel = std::min(free_law, gap_law);
  if (speed > leader->speed) {
    const double room = leader->gap - p.min_gap;
    const double required =
        room > 0.0 ? (speed * speed - leader->speed * leader->speed) / (2.0 * room) : kEmergencyDecel;
    if (required > p.comfortable_decel) accel = std::min(accel, -required);
  }
  return detail::clamp_command(accel, p);
}

inline AccelCommand car_following_acceleration(double speed, const CarFollowingParams& p,
                                               std::optional<LeaderView> leader) {
  return p.model == CarFollowingModel::Idm ? idm_acceleration(speed, p, leader)
                                           : cth_acc_acceleration(speed, p, leader);
}

/// Gap acceptance toward a new leader: the gap exceeds `min_gap` and the
/// follower's model asks for no more than `tolerated` braking.
inline bool gap_acceptable(double speed, const CarFollowingParams& p, LeaderView leader, double min_gap,
                           double tolerated) {
  if (leader.gap <= min_gap) return false;
  const AccelCommand a = car_following_acceleration(speed, p, leader);
  return !a.emergency && -a.value <= tolerated;
}

/// State-level convenience: projects both vehicles onto `lane`.
inline AccelCommand car_following_acceleration(const VehicleState& self,
                                               const CarFollowingParams& p,
                                               const std::optional<VehicleState>& leader,
                                               const LaneGeometry& lane) {
  std::optional<LeaderView> view;
  if (leader) view = LeaderView{longitudinal_gap(*leader, self, lane), longitudinal_speed(*leader)};
  return car_following_acceleration(longitudinal_speed(self), p, view);
}

}  // namespace wzgame
