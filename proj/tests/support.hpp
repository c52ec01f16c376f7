#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "wzgame/wzgame.hpp"

namespace testing_support {

// Small seeded generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

  std::vector<double> values(std::size_t n, double lo, double hi) {
    std::vector<double> out(n);
    for (auto& v : out) v = uniform(lo, hi);
    return out;
  }

  wzgame::PayoffMatrix matrix(std::size_t rows, std::size_t cols, double lo, double hi) {
    wzgame::PayoffMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) m(i, j) = uniform(lo, hi);
    return m;
  }

  // Payoffs on a coarse lattice so ties (and several equilibria) show up often.
  wzgame::PayoffMatrix lattice_matrix(std::size_t rows, std::size_t cols, int levels) {
    wzgame::PayoffMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) m(i, j) = 10.0 * integer(0, levels) / levels;
    return m;
  }

 private:
  std::mt19937_64 rng_;
};

inline wzgame::LaneGeometry straight_lane(double length = 1000.0, double y = 0.0) {
  return {{{0.0, y}, {length, y}}, 3.2, {}};
}

// Straight constant-speed trajectory along +x.
inline wzgame::Trajectory straight(double x0, double y, double speed, int steps = 60,
                                   wzgame::Manoeuvre m = wzgame::Manoeuvre::Proceed) {
  std::vector<wzgame::VehicleState> states;
  for (int k = 0; k <= steps; ++k) {
    wzgame::VehicleState s;
    s.position = {x0 + speed * 0.1 * k, y};
    s.speed = speed;
    states.push_back(s);
  }
  return wzgame::Trajectory(0.0, std::move(states), m);
}

// Trajectory from a speed profile, position integrated with the new speed.
inline wzgame::Trajectory from_speeds(const std::vector<double>& speeds, double y = 0.0) {
  std::vector<wzgame::VehicleState> states;
  double x = 0.0;
  for (std::size_t k = 0; k < speeds.size(); ++k) {
    if (k > 0) x += speeds[k] * 0.1;
    wzgame::VehicleState s;
    s.position = {x, y};
    s.speed = speeds[k];
    states.push_back(s);
  }
  return wzgame::Trajectory(0.0, std::move(states), wzgame::Manoeuvre::Proceed);
}

// Quiet scenario: no arrivals, no noise, short run.
inline wzgame::ScenarioConfig quiet_config() {
  wzgame::ScenarioConfig c;
  c.demand.per_lane = 0.0;
  c.l2.car_following.sigma = 0.0;
  c.l4.car_following.sigma = 0.0;
  c.l2.car_following.speed_deviation = 0.0;
  c.l4.car_following.speed_deviation = 0.0;
  c.experiment.duration = 60.0;
  c.experiment.warmup = 10.0;
  return c;
}

}  // namespace testing_support
