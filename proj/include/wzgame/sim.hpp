#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wzgame/car_following.hpp"
#include "wzgame/config.hpp"
#include "wzgame/core.hpp"

namespace wzgame {

/// Straight parallel lanes along +x. Lane 0 is leftmost; lane i has its
/// centreline at y = -i * width, so arc position equals x.
struct Network {
  NetworkConfig config;
  std::vector<LaneGeometry> lanes;

  explicit Network(const NetworkConfig& c) : config(c) {
    for (int i = 0; i < c.lane_count; ++i) {
      LaneGeometry lane{{{0.0, centre_y(i)}, {c.segment_length, centre_y(i)}}, c.lane_width, {}};
      if (i == c.closed_lane) lane.closed_interval = ClosedInterval{c.closure_start, c.closure_end()};
      lanes.push_back(std::move(lane));
    }
  }

  int lane_count() const { return config.lane_count; }
  double centre_y(int lane) const { return -static_cast<double>(lane) * config.lane_width; }
  bool valid_lane(int lane) const { return lane >= 0 && lane < config.lane_count; }
  int closed_lane() const { return config.closed_lane; }
  double closure_start() const { return config.closure_start; }

  /// Lane that vehicles leave the closed lane into.
  int merge_target() const {
    return config.closed_lane + 1 < config.lane_count ? config.closed_lane + 1 : config.closed_lane - 1;
  }

  double offset_in_lane(const VehicleState& s) const { return s.position.y - centre_y(s.lane_index); }

  /// True when the vehicle's lateral footprint overlaps the lane.
  bool occupies(const VehicleState& s, int lane) const {
    return std::abs(s.position.y - centre_y(lane)) < 0.5 * (config.lane_width + kVehicleWidth);
  }

  /// Lanes the footprint overlaps, in index order.
  std::vector<int> occupied_lanes(const VehicleState& s) const {
    std::vector<int> out;
    for (int lane = 0; lane < lane_count(); ++lane)
      if (occupies(s, lane)) out.push_back(lane);
    return out;
  }

  /// Lanes whose traffic the vehicle reacts to: those it overlaps plus the one
  /// it is assigned to.
  std::vector<int> relevant_lanes(const VehicleState& s) const {
    auto out = occupied_lanes(s);
    if (valid_lane(s.lane_index) && std::find(out.begin(), out.end(), s.lane_index) == out.end()) {
      out.push_back(s.lane_index);
      std::sort(out.begin(), out.end());
    }
    return out;
  }
};

enum class LaneChangeDecision { Stay, ChangeLeft, ChangeRight };

/// Lateral move between adjacent centrelines on the smoothstep profile.
/// `phase` runs from 0 to 1 over the lane-change duration.
struct LaneChangeProgress {
  bool active = false;
  int origin = 0;
  int target = 0;
  double phase = 0.0;
};

struct SimVehicle {
  VehicleState state;
  VehicleClass params;  // desired speed already includes the individual factor
  double long_speed = 0.0;
  double accel = 0.0;
  LaneChangeProgress lane_change;
  std::deque<VehicleState> override_buffer;
  bool overridden = false;  // moved by the override buffer on the last step
  bool plan_deviated = false;  // buffered arc positions no longer apply, only speeds and offsets
};

struct SpawnEvent {
  std::int64_t tick = 0;
  VehicleId id = 0;
  int lane = 0;
  double speed = 0.0;
  double desired_speed = 0.0;
  AutomationLevel level = AutomationLevel::L2;
  bool inserted = false;
};

struct CollisionEvent {
  std::int64_t tick = 0;
  VehicleId follower = 0;
  VehicleId leader = 0;
  int lane = 0;
  double overlap = 0.0;
};

struct WorldState {
  ScenarioConfig config;
  Network network;
  std::int64_t tick = 0;
  std::vector<SimVehicle> vehicles;  // ascending id
  std::mt19937_64 arrival_rng;
  VehicleId next_id = 1;
  bool baseline_lane_changes = true;
  std::uint64_t emergency_warnings = 0;
  std::uint64_t taper_stops = 0;
  std::uint64_t plan_aborts = 0;  // planned lateral moves refused at lane entry
  std::uint64_t plan_speed_caps = 0;  // planned steps slowed to the car-following safe speed
  std::vector<SpawnEvent> spawns;
  std::vector<CollisionEvent> collisions;
  std::set<std::pair<VehicleId, VehicleId>> overlapping;

  explicit WorldState(const ScenarioConfig& c)
      : config(c),
        network(c.network),
        arrival_rng(c.experiment.seed),
        baseline_lane_changes(!c.planner_enabled) {}

  double time() const { return static_cast<double>(tick) * kStepLength; }

  SimVehicle* find(VehicleId id) {
    auto it = std::lower_bound(vehicles.begin(), vehicles.end(), id,
                               [](const SimVehicle& v, VehicleId x) { return v.state.id < x; });
    return it != vehicles.end() && it->state.id == id ? &*it : nullptr;
  }
  const SimVehicle* find(VehicleId id) const { return const_cast<WorldState*>(this)->find(id); }
};

/// Places a vehicle directly (tests and scripted scenarios). Returns its id.
inline VehicleId add_vehicle(WorldState& world, int lane, double arc, double speed,
                             AutomationLevel level, std::optional<VehicleClass> params = std::nullopt) {
  SimVehicle v;
  v.params = params.value_or(world.config.vehicle_class(level));
  v.state.id = world.next_id++;
  v.state.lane_index = lane;
  v.state.position = {arc, world.network.centre_y(lane)};
  v.state.speed = speed;
  v.state.length = world.config.network.vehicle_length;
  v.state.automation_level = level;
  v.long_speed = speed;
  world.vehicles.push_back(std::move(v));
  return world.vehicles.back().state.id;
}

/// Per-lane occupants (by footprint) sorted by arc position, then id.
struct LaneIndex {
  std::vector<std::vector<std::size_t>> occupants;
};

inline LaneIndex build_lane_index(const WorldState& world) {
  LaneIndex index;
  index.occupants.resize(world.network.lane_count());
  for (std::size_t i = 0; i < world.vehicles.size(); ++i) {
    const auto& s = world.vehicles[i].state;
    for (int lane : world.network.occupied_lanes(s)) index.occupants[lane].push_back(i);
  }
  for (auto& lane : index.occupants) {
    std::sort(lane.begin(), lane.end(), [&](std::size_t a, std::size_t b) {
      const auto& sa = world.vehicles[a].state;
      const auto& sb = world.vehicles[b].state;
      return sa.position.x != sb.position.x ? sa.position.x < sb.position.x : sa.id < sb.id;
    });
  }
  return index;
}

inline void index_insert(LaneIndex& index, const WorldState& world, int lane, std::size_t vi) {
  auto& occ = index.occupants[lane];
  if (std::find(occ.begin(), occ.end(), vi) != occ.end()) return;
  const auto& s = world.vehicles[vi].state;
  auto pos = std::lower_bound(occ.begin(), occ.end(), vi, [&](std::size_t a, std::size_t) {
    const auto& sa = world.vehicles[a].state;
    return sa.position.x != s.position.x ? sa.position.x < s.position.x : sa.id < s.id;
  });
  occ.insert(pos, vi);
}

struct Neighbour {
  std::size_t index = 0;
  double gap = 0.0;  // bumper-to-bumper
};

/// Nearest vehicle strictly ahead in `lane`, skipping `exclude`.
inline std::optional<Neighbour> leader_in_lane(const WorldState& world, const LaneIndex& index, int lane,
                                               double arc, VehicleId self,
                                               std::optional<VehicleId> exclude = std::nullopt) {
  const auto& occ = index.occupants[lane];
  auto it = std::upper_bound(occ.begin(), occ.end(), arc, [&](double x, std::size_t vi) {
    return x < world.vehicles[vi].state.position.x;
  });
  for (; it != occ.end(); ++it) {
    const auto& s = world.vehicles[*it].state;
    if (s.id == self || (exclude && s.id == *exclude)) continue;
    return Neighbour{*it, s.position.x - s.length - arc};
  }
  return std::nullopt;
}

/// Nearest vehicle at or behind `arc` in `lane`, skipping `exclude`.
inline std::optional<Neighbour> follower_in_lane(const WorldState& world, const LaneIndex& index, int lane,
                                                 double arc, double self_length, VehicleId self,
                                                 std::optional<VehicleId> exclude = std::nullopt) {
  const auto& occ = index.occupants[lane];
  auto it = std::upper_bound(occ.begin(), occ.end(), arc, [&](double x, std::size_t vi) {
    return x < world.vehicles[vi].state.position.x;
  });
  while (it != occ.begin()) {
    --it;
    const auto& s = world.vehicles[*it].state;
    if (s.id == self || (exclude && s.id == *exclude)) continue;
    return Neighbour{*it, arc - self_length - s.position.x};
  }
  return std::nullopt;
}

/// Closest leader over every relevant lane, plus the closure
/// taper as a stationary obstacle for vehicles assigned to the closed lane.
inline std::optional<LeaderView> leader_view(const WorldState& world, const LaneIndex& index,
                                             const VehicleState& s,
                                             std::optional<VehicleId> exclude = std::nullopt) {
  std::optional<LeaderView> best;
  auto consider = [&best](LeaderView v) {
    if (!best || v.gap < best->gap) best = v;
  };
  for (int lane : world.network.relevant_lanes(s)) {
    if (auto n = leader_in_lane(world, index, lane, s.position.x, s.id, exclude))
      consider({n->gap, world.vehicles[n->index].long_speed});
  }
  if (s.lane_index == world.network.closed_lane() && s.position.x < world.network.closure_start())
    consider({world.network.closure_start() - s.position.x, 0.0});
  return best;
}

/// Mandatory-only gap acceptance for vehicles on the closed lane. Besides the
/// follower test, the changer must not need more than the threshold itself.
inline LaneChangeDecision baseline_lane_change_decision(const WorldState& world, const LaneIndex& index,
                                                        const SimVehicle& vehicle) {
  const auto& s = vehicle.state;
  const auto& net = world.network;
  const auto& lc = vehicle.params.lane_change;
  if (vehicle.lane_change.active || s.lane_index != net.closed_lane()) return LaneChangeDecision::Stay;
  const double to_closure = net.closure_start() - s.position.x;
  if (to_closure <= 0.0 || to_closure > lc.urgency_distance) return LaneChangeDecision::Stay;

  const int target = net.merge_target();
  const double own_gap = vehicle.params.car_following.min_gap;
  if (auto lead = leader_in_lane(world, index, target, s.position.x, s.id)) {
    const LeaderView view{lead->gap, world.vehicles[lead->index].long_speed};
    if (!gap_acceptable(vehicle.long_speed, vehicle.params.car_following, view, own_gap, lc.accept_decel_threshold))
      return LaneChangeDecision::Stay;
  }
  if (auto back = follower_in_lane(world, index, target, s.position.x, s.length, s.id)) {
    const auto& f = world.vehicles[back->index];
    const double tolerated = lc.accept_decel_threshold * (1.0 + f.params.lane_change.cooperation);
    if (!gap_acceptable(f.long_speed, f.params.car_following, {back->gap, vehicle.long_speed}, own_gap, tolerated))
      return LaneChangeDecision::Stay;
  }
  return target > s.lane_index ? LaneChangeDecision::ChangeRight : LaneChangeDecision::ChangeLeft;
}

/// Loads a planned trajectory; its first state is the current one, the rest
/// are consumed one per step. A later call replaces whatever remains.
inline void apply_external_trajectory(WorldState& world, VehicleId id, const Trajectory& trajectory) {
  SimVehicle* v = world.find(id);
  if (!v) throw std::out_of_range("apply_external_trajectory: no vehicle " + std::to_string(id));
  if (std::abs(trajectory.t0() - world.time()) > 1e-9)
    throw std::invalid_argument("apply_external_trajectory: trajectory starts at " +
                                std::to_string(trajectory.t0()) + " s, world is at " +
                                std::to_string(world.time()) + " s");
  v->override_buffer.assign(trajectory.states().begin() + 1, trajectory.states().end());
  v->lane_change.active = false;
}

inline void clear_override(WorldState& world, VehicleId id) {
  if (SimVehicle* v = world.find(id)) v->override_buffer.clear();
}

/// Starts (or resumes) a lateral move into `target` from the vehicle's current
/// position; a partially displaced vehicle picks up the profile mid-way.
inline void begin_lane_change(WorldState& world, SimVehicle& v, int target) {
  const auto& net = world.network;
  const double dy = v.state.position.y - net.centre_y(target);
  const double w = net.config.lane_width;
  v.state.lane_index = target;
  if (dy == 0.0) {
    v.lane_change.active = false;
    return;
  }
  const int origin = dy > 0.0 ? target - 1 : target + 1;
  v.lane_change = {true, origin, target, smoothstep_inverse(1.0 - std::min(1.0, std::abs(dy) / w))};
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Zero-mean uniform noise in [-1, 1) keyed on (seed, vehicle, tick), so a
/// vehicle sees the same noise sequence whatever else happens in the world.
inline double keyed_noise(std::uint64_t seed, VehicleId id, std::int64_t tick) {
  const std::uint64_t h =
      splitmix64(seed ^ splitmix64(id ^ splitmix64(static_cast<std::uint64_t>(tick) + 0x5bd1e995ULL)));
  return static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

}  // namespace detail

/// Bernoulli arrivals per lane at the segment entry. Random draws do not depend
/// on the traffic state, so two worlds with the same seed see the same arrivals.
inline void spawn_vehicles(WorldState& world) {
  const auto& demand = world.config.demand;
  const double p = std::min(1.0, demand.per_lane * kStepLength / 3600.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int lane = 0; lane < world.network.lane_count(); ++lane) {
    const double u = uniform(world.arrival_rng);
    if (!(u < p)) continue;
    const double level_u = uniform(world.arrival_rng);
    const double z = normal(world.arrival_rng);
    const AutomationLevel level =
        level_u < demand.l2_fraction ? AutomationLevel::L2 : AutomationLevel::L4;
    VehicleClass params = world.config.vehicle_class(level);
    auto& cf = params.car_following;
    const double factor = std::clamp(1.0 + cf.speed_deviation * z, 1.0 - 2.0 * cf.speed_deviation,
                                     1.0 + 2.0 * cf.speed_deviation);
    cf.desired_speed *= factor;

    SpawnEvent ev{world.tick, world.next_id++, lane, cf.desired_speed, cf.desired_speed, level, false};
    const SimVehicle* last = nullptr;
    for (const auto& v : world.vehicles) {
      if (world.network.occupies(v.state, lane) && (!last || v.state.position.x < last->state.position.x))
        last = &v;
    }
    if (last) {
      const double gap = last->state.position.x - last->state.length;
      ev.speed = std::min(ev.speed, last->long_speed);
      if (gap < cf.min_gap + cf.headway * ev.speed) {
        ev.speed = 0.0;
        world.spawns.push_back(ev);
        continue;
      }
    }
    ev.inserted = true;
    world.spawns.push_back(ev);
    SimVehicle v;
    v.params = params;
    v.state.id = ev.id;
    v.state.lane_index = lane;
    v.state.position = {0.0, world.network.centre_y(lane)};
    v.state.speed = ev.speed;
    v.state.length = world.config.network.vehicle_length;
    v.state.automation_level = level;
    v.long_speed = ev.speed;
    world.vehicles.push_back(std::move(v));
  }
}

/// Processing order: lanes in index order, ascending arc position within a lane.
inline std::vector<std::size_t> iteration_order(const WorldState& world) {
  std::vector<std::size_t> order(world.vehicles.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& sa = world.vehicles[a].state;
    const auto& sb = world.vehicles[b].state;
    if (sa.lane_index != sb.lane_index) return sa.lane_index < sb.lane_index;
    if (sa.position.x != sb.position.x) return sa.position.x < sb.position.x;
    return sa.id < sb.id;
  });
  return order;
}

namespace detail {

inline void record_collisions(WorldState& world) {
  const LaneIndex index = build_lane_index(world);
  std::set<std::pair<VehicleId, VehicleId>> now;
  for (int lane = 0; lane < world.network.lane_count(); ++lane) {
    const auto& occ = index.occupants[lane];
    for (std::size_t k = 1; k < occ.size(); ++k) {
      const auto& f = world.vehicles[occ[k - 1]].state;
      const auto& l = world.vehicles[occ[k]].state;
      const double gap = l.position.x - l.length - f.position.x;
      if (gap >= -0.5) continue;
      const auto key = std::make_pair(f.id, l.id);
      if (!now.insert(key).second) continue;
      if (!world.overlapping.count(key))
        world.collisions.push_back({world.tick + 1, f.id, l.id, lane, -gap});
    }
  }
  world.overlapping = std::move(now);
}

}  // namespace detail

/// Advances the world by one 0.1 s step.
namespace detail {

inline int nearest_lane(const Network& net, double y) {
  const int lane = static_cast<int>(std::lround(-y / net.config.lane_width));
  return std::clamp(lane, 0, net.lane_count() - 1);
}

/// A planned step that commits to a lane or moves the footprint into one must
/// find the clearance there that the planner asked for, on current positions.
inline bool entry_blocked(const WorldState& world, const LaneIndex& index, const SimVehicle& v,
                          const VehicleState& next, double speed) {
  const auto& net = world.network;
  const double min_gap = v.params.car_following.min_gap;
  const double closing_time = world.config.planner.merge_clearance_time;
  const auto before = net.relevant_lanes(v.state);
  for (int lane : net.relevant_lanes(next)) {
    if (std::find(before.begin(), before.end(), lane) != before.end()) continue;
    if (auto lead = leader_in_lane(world, index, lane, next.position.x, v.state.id)) {
      const double vl = world.vehicles[lead->index].long_speed;
      if (lead->gap < min_gap + closing_time * std::max(0.0, speed - vl)) return true;
    }
    if (auto back = follower_in_lane(world, index, lane, next.position.x, v.state.length, v.state.id)) {
      const double vf = world.vehicles[back->index].long_speed;
      if (back->gap < min_gap + closing_time * std::max(0.0, vf - speed)) return true;
    }
  }
  return false;
}

}  // namespace detail

inline void step(WorldState& world) {
  constexpr double dt = kStepLength;
  spawn_vehicles(world);
  LaneIndex index = build_lane_index(world);
  const auto& net = world.network;

  if (world.baseline_lane_changes) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < world.vehicles.size(); ++i) {
      const auto& v = world.vehicles[i];
      if (v.override_buffer.empty() && !v.lane_change.active && v.state.lane_index == net.closed_lane())
        candidates.push_back(i);
    }
    std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
      return world.vehicles[a].state.position.x > world.vehicles[b].state.position.x;
    });
    for (std::size_t i : candidates) {
      const auto decision = baseline_lane_change_decision(world, index, world.vehicles[i]);
      if (decision == LaneChangeDecision::Stay) continue;
      const int target = decision == LaneChangeDecision::ChangeRight ? world.vehicles[i].state.lane_index + 1
                                                                     : world.vehicles[i].state.lane_index - 1;
      begin_lane_change(world, world.vehicles[i], target);
      index_insert(index, world, target, i);
    }
  }

  struct Update {
    VehicleState state;
    double long_speed;
    double accel;
    LaneChangeProgress lane_change;
    bool overridden;
    bool plan_deviated;
    bool plan_aborted;
  };
  const auto order = iteration_order(world);
  std::vector<Update> updates(world.vehicles.size());
  for (std::size_t i : order) {
    const SimVehicle& v = world.vehicles[i];
    Update u{v.state, v.long_speed, 0.0, v.lane_change, false, false, false};
    if (!v.override_buffer.empty()) {
      VehicleState next = v.override_buffer.front();
      next.id = v.state.id;
      next.length = v.state.length;
      next.automation_level = v.state.automation_level;
      double speed = longitudinal_speed(next);
      const auto& cf = v.params.car_following;
      const AccelCommand guard = car_following_acceleration(v.long_speed, cf, leader_view(world, index, v.state));
      const bool capped = speed > v.long_speed + guard.value * dt + 1e-9;
      if (capped) {
        speed = std::max(0.0, v.long_speed + guard.value * dt);
        ++world.plan_speed_caps;
      }
      if (capped || v.plan_deviated) {
        const double lateral_rate = (next.position.y - v.state.position.y) / dt;
        next.position.x = v.state.position.x + speed * dt;
        next.speed = std::hypot(speed, lateral_rate);
        next.heading = std::atan2(lateral_rate, speed);
        u.plan_deviated = true;
      }
      if (detail::entry_blocked(world, index, v, next, speed)) {
        next.position.y = v.state.position.y;
        next.lane_index = detail::nearest_lane(net, v.state.position.y);
        next.speed = speed;
        next.heading = 0.0;
        u.plan_aborted = true;
        ++world.plan_aborts;
      }
      u.state = next;
      u.long_speed = speed;
      u.accel = (speed - v.long_speed) / dt;
      u.overridden = true;
    } else {
      const auto& cf = v.params.car_following;
      const AccelCommand cmd = car_following_acceleration(v.long_speed, cf, leader_view(world, index, v.state));
      double accel = cmd.value;
      if (cmd.emergency) {
        ++world.emergency_warnings;
      } else if (cf.sigma > 0.0) {
        accel += cf.sigma * cf.max_accel * detail::keyed_noise(world.config.experiment.seed, v.state.id, world.tick);
      }
      accel = std::clamp(accel, -kEmergencyDecel, cf.max_accel);
      const double new_speed = std::max(0.0, v.long_speed + accel * dt);
      const double x = v.state.position.x + new_speed * dt;

      double offset = net.offset_in_lane(v.state);
      const double old_offset = offset;
      if (u.lane_change.active) {
        u.lane_change.phase += dt / kLaneChangeDuration;
        if (u.lane_change.phase >= 1.0) {
          u.lane_change.active = false;
          offset = 0.0;
        } else {
          offset = (net.centre_y(u.lane_change.origin) - net.centre_y(u.lane_change.target)) *
                   (1.0 - smoothstep(u.lane_change.phase));
        }
      }
      const double lateral_rate = (offset - old_offset) / dt;
      u.state.position = {x, net.centre_y(v.state.lane_index) + offset};
      u.state.speed = std::hypot(new_speed, lateral_rate);
      u.state.heading = std::atan2(lateral_rate, new_speed);
      u.long_speed = new_speed;
      u.accel = (new_speed - v.long_speed) / dt;
    }
    if (u.state.lane_index == net.closed_lane() && u.state.position.x >= net.closure_start()) {
      u.state.position.x = std::max(v.state.position.x, net.closure_start() - 0.01);
      u.accel = -v.long_speed / dt;
      u.long_speed = 0.0;
      u.state.speed = 0.0;
      u.state.heading = 0.0;
      ++world.taper_stops;
    }
    updates[i] = u;
  }

  for (std::size_t i = 0; i < world.vehicles.size(); ++i) {
    SimVehicle& v = world.vehicles[i];
    const Update& u = updates[i];
    v.state = u.state;
    v.long_speed = u.long_speed;
    v.accel = u.accel;
    v.lane_change = u.lane_change;
    v.overridden = u.overridden;
    if (u.overridden) v.override_buffer.pop_front();
    v.plan_deviated = u.plan_deviated && !v.override_buffer.empty();
    if (u.plan_aborted) {
      v.override_buffer.clear();
      v.plan_deviated = false;
      begin_lane_change(world, v, v.state.lane_index);
    }
  }
  const double end = net.config.segment_length;
  std::erase_if(world.vehicles, [end](const SimVehicle& v) { return v.state.position.x > end; });
  detail::record_collisions(world);
  ++world.tick;
}

/// One trajectory-log row.
struct LogRecord {
  std::int64_t tick = 0;
  VehicleId id = 0;
  int lane = 0;
  double arc = 0.0;
  double offset = 0.0;
  double speed = 0.0;  // longitudinal
  double accel = 0.0;
  bool overridden = false;
  double length = kDefaultVehicleLength;  // not serialized; single default length

  double time() const { return static_cast<double>(tick) * kStepLength; }
};

inline std::vector<LogRecord> snapshot_records(const WorldState& world) {
  std::vector<LogRecord> out;
  out.reserve(world.vehicles.size());
  for (std::size_t i : iteration_order(world)) {
    const auto& v = world.vehicles[i];
    out.push_back({world.tick, v.state.id, v.state.lane_index, v.state.position.x,
                   world.network.offset_in_lane(v.state), v.long_speed, v.accel, v.overridden,
                   v.state.length});
  }
  return out;
}

}  // namespace wzgame
