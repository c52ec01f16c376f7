#include <gtest/gtest.h>

#include "support.hpp"

using namespace wzgame;
using testing_support::Gen;
using testing_support::quiet_config;

namespace {

VehicleState car(VehicleId id, double x, double y, double heading = 0.0) {
  VehicleState s;
  s.id = id;
  s.position = {x, y};
  s.heading = heading;
  return s;
}

}  // namespace

TEST(FindFollower, AllAheadIsEmpty) {
  const auto ego = car(1, 100, 0);
  const std::vector<VehicleState> c{car(2, 110, -3.2), car(3, 150, -3.2)};
  EXPECT_FALSE(find_follower(ego, c));
}

TEST(FindFollower, NearestBehind) {
  const auto ego = car(1, 100, 0);
  const std::vector<VehicleState> c{car(2, 100 - std::sqrt(400 - 3.2 * 3.2), -3.2),
                                    car(3, 100 - std::sqrt(100 - 3.2 * 3.2), -3.2), car(4, 120, -3.2)};
  EXPECT_EQ(find_follower(ego, c), VehicleId{3});
}

TEST(FindFollower, AbreastExcluded) {
  const auto ego = car(1, 100, 0);
  const std::vector<VehicleState> c{car(2, 100, -3.2)};
  EXPECT_FALSE(find_follower(ego, c));
}

TEST(FindFollower, UsesHeading) {
  // Heading straight down the y axis: "behind" means larger y.
  const auto ego = car(1, 0, 0, -std::numbers::pi / 2);
  const std::vector<VehicleState> c{car(2, 0, 5), car(3, 0, -3)};
  EXPECT_EQ(find_follower(ego, c), VehicleId{2});
}

TEST(FindFollower, MatchesExhaustiveScanProperty) {
  Gen g(31);
  for (int trial = 0; trial < 500; ++trial) {
    const auto ego = car(1, g.uniform(-50, 50), g.uniform(-5, 5), g.uniform(-3, 3));
    std::vector<VehicleState> c;
    for (int i = 0, n = g.integer(0, 8); i < n; ++i) c.push_back(car(10 + i, g.uniform(-100, 100), g.uniform(-10, 10)));
    std::optional<VehicleId> want;
    double best = 1e300;
    for (const auto& v : c) {
      const double dx = v.position.x - ego.position.x, dy = v.position.y - ego.position.y;
      if (dx * std::cos(ego.heading) + dy * std::sin(ego.heading) >= 0.0) continue;
      if (std::hypot(dx, dy) < best) {
        best = std::hypot(dx, dy);
        want = v.id;
      }
    }
    EXPECT_EQ(find_follower(ego, c), want);
  }
}

TEST(Planner, MergesWhenFollowerFarBehind) {
  auto cfg = quiet_config();
  cfg.planner_enabled = true;
  WorldState world(cfg);
  const auto ego = add_vehicle(world, 0, 2800.0, 20.0, AutomationLevel::L2);
  const auto follower = add_vehicle(world, 1, 2700.0, 20.0, AutomationLevel::L2);
  InteractionPair pair;
  pair.ego_id = ego;
  pair.target_lane_index = 1;
  const auto solve = plan_and_execute(world, build_lane_index(world), pair, cfg, {});
  ASSERT_TRUE(solve);
  EXPECT_EQ(solve->follower_id, follower);
  EXPECT_EQ(solve->table.ego_trajectories[solve->selected.row].manoeuvre(), Manoeuvre::Merge);
  EXPECT_EQ(world.find(ego)->override_buffer.size(), 20u);
  EXPECT_EQ(world.find(follower)->override_buffer.size(), 20u);
  EXPECT_EQ(pair.next_plan_tick, 20);
}

TEST(Planner, SelectedCellIsAnEquilibriumWhenOneExists) {
  auto cfg = quiet_config();
  cfg.planner_enabled = true;
  Gen g(2);
  for (int trial = 0; trial < 40; ++trial) {
    WorldState world(cfg);
    const auto ego = add_vehicle(world, 0, g.uniform(2600, 2950), g.uniform(5, 30), AutomationLevel::L2);
    add_vehicle(world, 1, g.uniform(2500, 2950), g.uniform(5, 30), AutomationLevel::L2);
    InteractionPair pair;
    pair.ego_id = ego;
    pair.target_lane_index = 1;
    const auto solve = plan_and_execute(world, build_lane_index(world), pair, cfg, {});
    ASSERT_TRUE(solve);
    if (!solve->equilibria.empty()) {
      EXPECT_NE(std::find(solve->equilibria.begin(), solve->equilibria.end(), solve->selected), solve->equilibria.end());
    }
  }
}

TEST(Planner, CompletesIsolatedMerge) {
  auto cfg = quiet_config();
  cfg.planner_enabled = true;
  WorldState world(cfg);
  GamePlanner planner(cfg);
  const auto ego = add_vehicle(world, 0, 2700.0, 20.0, AutomationLevel::L2);
  for (int k = 0; k < 200; ++k) {
    planner.before_step(world);
    step(world);
  }
  ASSERT_EQ(planner.finished().size(), 1u);
  EXPECT_TRUE(planner.finished()[0].completed);
  EXPECT_LT(std::abs(planner.finished()[0].final_offset), cfg.planner.merge_completion_epsilon);
  EXPECT_EQ(world.find(ego)->state.lane_index, 1);
  EXPECT_TRUE(world.collisions.empty());
}
