#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "wzgame/config.hpp"
#include "wzgame/core.hpp"
#include "wzgame/game.hpp"
#include "wzgame/sampling.hpp"
#include "wzgame/sim.hpp"

namespace wzgame {

/// Nearest candidate behind the ego: among those whose displacement from the
/// ego points against its heading, the one at the smallest Euclidean distance.
inline std::optional<VehicleId> find_follower(const VehicleState& ego,
                                              std::span<const VehicleState> candidates) {
  const Vec2 heading{std::cos(ego.heading), std::sin(ego.heading)};
  std::optional<VehicleId> best;
  double best_dist = 0.0;
  for (const auto& c : candidates) {
    if (c.id == ego.id) continue;
    const Vec2 delta = c.position - ego.position;
    if (!(delta.dot(heading) < 0.0)) continue;
    const double dist = delta.norm();
    if (!best || dist < best_dist) {
      best = c.id;
      best_dist = dist;
    }
  }
  return best;
}

struct InteractionPair {
  VehicleId ego_id = 0;
  std::optional<VehicleId> follower_id;
  int target_lane_index = 0;
  double created_at = 0.0;
  bool active = true;
  bool completed = false;
  std::int64_t next_plan_tick = 0;
  std::vector<std::int64_t> plan_ticks;
  double final_offset = 0.0;  // ego offset from the target centreline at deactivation
};

/// Everything about one game solve; the debug dump serializes this.
struct GameSolve {
  std::int64_t tick = 0;
  VehicleId ego_id = 0;
  std::optional<VehicleId> follower_id;
  PayoffTable table;
  std::vector<Cell> equilibria;
  Cell selected;
};

inline nlohmann::json to_json(const GameSolve& solve) {
  using nlohmann::json;
  auto trajectories = [](const std::vector<Trajectory>& list) {
    json out = json::array();
    for (const auto& t : list) {
      json states = json::array();
      for (const auto& s : t.states()) states.push_back({s.position.x, s.position.y, s.speed});
      out.push_back({{"manoeuvre", to_string(t.manoeuvre())}, {"states", states}});
    }
    return out;
  };
  auto matrix = [](const PayoffMatrix& m) {
    json out = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
      json row = json::array();
      for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
      out.push_back(row);
    }
    return out;
  };
  json eq = json::array();
  for (const auto& c : solve.equilibria) eq.push_back({c.row, c.col});
  return {{"tick", solve.tick},
          {"ego", solve.ego_id},
          {"follower", solve.follower_id ? json(*solve.follower_id) : json(nullptr)},
          {"ego_trajectories", trajectories(solve.table.ego_trajectories)},
          {"follower_trajectories", trajectories(solve.table.follower_trajectories)},
          {"u_ego", matrix(solve.table.u_ego)},
          {"u_follower", matrix(solve.table.u_follower)},
          {"equilibria", eq},
          {"selected", {solve.selected.row, solve.selected.col}}};
}

namespace detail {

inline void add_leader_limits(const WorldState& world, const LaneIndex& index, const VehicleState& agent,
                              double min_gap, std::span<const int> lanes, std::optional<VehicleId> exclude,
                              bool before_merge_only, std::vector<LongitudinalLimit>& out) {
  for (int lane : lanes) {
    if (auto n = leader_in_lane(world, index, lane, agent.position.x, agent.id, exclude)) {
      const auto& l = world.vehicles[n->index];
      out.push_back({l.state.position.x - l.state.length - min_gap, l.long_speed, before_merge_only});
    }
  }
}

}  // namespace detail

/// Ego manoeuvre set: Merge into the target lane, then Proceed and Wait along
/// its assigned lane. Merge comes first so that ties go to the lane change.
/// Once the ego is assigned to the target lane all three converge on it.
inline std::vector<Trajectory> ego_candidates(const WorldState& world, const LaneIndex& index,
                                              const SimVehicle& ego, int target_lane,
                                              std::optional<VehicleId> follower, const ScenarioConfig& config) {
  const auto& net = world.network;
  const auto& s = ego.state;
  const double min_gap = ego.params.car_following.min_gap;
  const bool committed = s.lane_index == target_lane;
  SamplingContext own{world.time(), s.lane_index, ego.params.car_following.desired_speed,
                      config.planner.constraint_decel, {}, {}};
  SamplingContext merge = own;
  merge.reference_lane_index = target_lane;
  if (s.lane_index == net.closed_lane()) {
    own.limits.push_back({net.closure_start(), 0.0, false});
    merge.limits.push_back({net.closure_start(), 0.0, true});
  }

  const auto lanes = net.relevant_lanes(s);
  detail::add_leader_limits(world, index, s, min_gap, lanes, follower, false, own.limits);
  std::vector<int> other_lanes;
  for (int lane : lanes)
    if (lane != target_lane) other_lanes.push_back(lane);
  detail::add_leader_limits(world, index, s, min_gap, other_lanes, follower, !committed, merge.limits);
  const int target_only[] = {target_lane};
  detail::add_leader_limits(world, index, s, min_gap, target_only, follower, false, merge.limits);

  if (!committed) {
    auto& c = merge.clearance;
    c.min_gap = min_gap;
    c.closing_time = config.planner.merge_clearance_time;
    if (follower) {
      const SimVehicle* f = world.find(*follower);
      c.follower = PredictedNeighbour{f->state.position.x, f->long_speed};
    }
    if (auto lead = leader_in_lane(world, index, target_lane, s.position.x, s.id, follower)) {
      const auto& l = world.vehicles[lead->index];
      c.leader = PredictedNeighbour{l.state.position.x - l.state.length, l.long_speed};
    }
  }

  auto out = sample_trajectories(s, Manoeuvre::Merge, net.lanes[target_lane], config.planner, merge);
  for (Manoeuvre m : {Manoeuvre::Proceed, Manoeuvre::Wait}) {
    auto t = sample_trajectories(s, m, net.lanes[s.lane_index], config.planner, own);
    out.insert(out.end(), t.begin(), t.end());
  }
  return out;
}

/// Follower manoeuvre set: Proceed and Wait in its own lane. The ego counts as
/// a leader once it is assigned to or overlaps that lane.
inline std::vector<Trajectory> follower_candidates(const WorldState& world, const LaneIndex& index,
                                                   const SimVehicle& follower, const SimVehicle& ego,
                                                   const ScenarioConfig& config) {
  const auto& s = follower.state;
  const bool ego_in_lane =
      ego.state.lane_index == s.lane_index || world.network.occupies(ego.state, s.lane_index);
  SamplingContext ctx{world.time(), s.lane_index, follower.params.car_following.desired_speed,
                      config.planner.constraint_decel, {}, {}};
  detail::add_leader_limits(world, index, s, follower.params.car_following.min_gap,
                            world.network.relevant_lanes(s),
                            ego_in_lane ? std::nullopt : std::optional<VehicleId>(ego.state.id), false, ctx.limits);
  std::vector<Trajectory> out;
  for (Manoeuvre m : {Manoeuvre::Proceed, Manoeuvre::Wait}) {
    auto t = sample_trajectories(s, m, world.network.lanes[s.lane_index], config.planner, ctx);
    out.insert(out.end(), t.begin(), t.end());
  }
  return out;
}

/// One receding-horizon cycle for a pair: re-identify the follower, solve the
/// game, load both agents with the first re-plan interval of their equilibrium
/// trajectories. Returns nothing if the ego has left the world.
inline std::optional<GameSolve> plan_and_execute(WorldState& world, const LaneIndex& index,
                                                 InteractionPair& pair, const ScenarioConfig& config,
                                                 const std::set<VehicleId>& unavailable) {
  const SimVehicle* ego = world.find(pair.ego_id);
  if (!ego) {
    pair.active = false;
    if (pair.follower_id) clear_override(world, *pair.follower_id);
    return std::nullopt;
  }

  std::vector<VehicleState> candidates;
  for (const auto& v : world.vehicles) {
    if (v.state.lane_index == pair.target_lane_index && v.state.id != pair.ego_id &&
        !unavailable.count(v.state.id))
      candidates.push_back(v.state);
  }
  const auto follower_id = find_follower(ego->state, candidates);
  if (pair.follower_id && pair.follower_id != follower_id) clear_override(world, *pair.follower_id);
  pair.follower_id = follower_id;
  const SimVehicle* follower = follower_id ? world.find(*follower_id) : nullptr;

  GameSolve solve;
  solve.tick = world.tick;
  solve.ego_id = pair.ego_id;
  solve.follower_id = follower_id;
  auto ego_trajs = ego_candidates(world, index, *ego, pair.target_lane_index, follower_id, config);
  solve.table = follower ? build_payoff_table(std::move(ego_trajs),
                                              follower_candidates(world, index, *follower, *ego, config),
                                              config.game)
                         : build_single_agent_table(std::move(ego_trajs), config.game);
  solve.equilibria = find_pure_nash(solve.table);
  solve.selected = select_equilibrium(solve.equilibria, solve.table);

  const auto keep = static_cast<std::size_t>(config.planner.replan_steps()) + 1;
  apply_external_trajectory(world, pair.ego_id, solve.table.ego_trajectories[solve.selected.row].prefix(keep));
  if (follower)
    apply_external_trajectory(world, *follower_id,
                              solve.table.follower_trajectories[solve.selected.col].prefix(keep));
  pair.plan_ticks.push_back(world.tick);
  pair.next_plan_tick = world.tick + config.planner.replan_steps();
  return solve;
}

/// Receding-horizon controller: pairs every vehicle that needs to leave the
/// closed lane with its nearest available follower and re-plans each pair on
/// a fixed interval until the ego sits on the target centreline.
class GamePlanner {
 public:
  explicit GamePlanner(const ScenarioConfig& config) : config_(config) {}

  /// Called once per tick before `step`.
  void before_step(WorldState& world) {
    retire_pairs(world);
    open_pairs(world);

    std::vector<InteractionPair*> due;
    for (auto& p : active_)
      if (p.next_plan_tick <= world.tick) due.push_back(&p);
    if (due.empty()) return;
    std::sort(due.begin(), due.end(), [&](const InteractionPair* a, const InteractionPair* b) {
      const double xa = world.find(a->ego_id)->state.position.x;
      const double xb = world.find(b->ego_id)->state.position.x;
      return xa != xb ? xa > xb : a->ego_id < b->ego_id;
    });

    const LaneIndex index = build_lane_index(world);
    for (InteractionPair* p : due) {
      std::set<VehicleId> unavailable;
      for (const auto& other : active_) {
        unavailable.insert(other.ego_id);
        if (&other != p && other.follower_id) unavailable.insert(*other.follower_id);
      }
      auto solve = plan_and_execute(world, index, *p, config_, unavailable);
      if (!solve) continue;
      ++solves_;
      if (solve->equilibria.empty()) ++fallbacks_;
      if (on_solve) on_solve(*solve);
    }
  }

  const std::vector<InteractionPair>& active() const { return active_; }
  const std::vector<InteractionPair>& finished() const { return finished_; }
  std::uint64_t solves() const { return solves_; }
  std::uint64_t fallbacks() const { return fallbacks_; }

  std::function<void(const GameSolve&)> on_solve;

 private:
  void retire_pairs(WorldState& world) {
    const auto& net = world.network;
    for (auto& p : active_) {
      SimVehicle* ego = world.find(p.ego_id);
      if (!ego) {
        p.active = false;
        if (p.follower_id) clear_override(world, *p.follower_id);
        continue;
      }
      if (ego->state.lane_index != p.target_lane_index) continue;
      const double offset = lateral_offset(net.lanes[p.target_lane_index], ego->state.position);
      if (std::abs(offset) >= config_.planner.merge_completion_epsilon) continue;
      p.active = false;
      p.completed = true;
      p.final_offset = offset;
      ego->override_buffer.clear();
      if (p.follower_id) clear_override(world, *p.follower_id);
      begin_lane_change(world, *ego, p.target_lane_index);
    }
    for (auto& p : active_)
      if (!p.active) finished_.push_back(p);
    std::erase_if(active_, [](const InteractionPair& p) { return !p.active; });
  }

  void open_pairs(WorldState& world) {
    const auto& net = world.network;
    std::set<VehicleId> engaged;
    for (const auto& p : active_) engaged.insert(p.ego_id);
    for (const auto& v : world.vehicles) {
      const auto& s = v.state;
      if (s.lane_index != net.closed_lane() || v.lane_change.active || engaged.count(s.id)) continue;
      const double to_closure = net.closure_start() - s.position.x;
      if (to_closure <= 0.0 || to_closure > v.params.lane_change.urgency_distance) continue;
      InteractionPair p;
      p.ego_id = s.id;
      p.target_lane_index = net.merge_target();
      p.created_at = world.time();
      p.next_plan_tick = world.tick;
      active_.push_back(p);
    }
  }

  ScenarioConfig config_;
  std::vector<InteractionPair> active_;
  std::vector<InteractionPair> finished_;
  std::uint64_t solves_ = 0;
  std::uint64_t fallbacks_ = 0;
};

}  // namespace wzgame
