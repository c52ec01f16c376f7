#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "wzgame/core.hpp"

namespace wzgame {

struct UtilityWeights {
  double base = 10.0;
  double safety = 0.5;
  double progress = 0.2;
  double traffic = 0.3;

  void validate() const {
    if (base < 0.0 || safety < 0.0 || progress < 0.0 || traffic < 0.0)
      throw std::invalid_argument("utility weights must be non-negative");
    if (std::abs(safety + progress + traffic - 1.0) > 1e-12)
      throw std::invalid_argument("utility weights must sum to 1");
  }
};

struct SafetyParams {
  double d_buffer = 5.0;  // vehicle extent, m
  double d_thr = 10.0;    // gap beyond which risk is negligible, m
};

struct ProgressParams {
  double p_thr = std::log(121.0);  // saturates at 120 m of travel
};

struct TrafficParams {
  double speed_thr = 25.0;  // (m/s)^2, full penalty at a 5 m/s drop
};

struct GameParams {
  UtilityWeights weights;
  SafetyParams safety;
  ProgressParams progress;
  TrafficParams traffic;
};

/// Smallest per-step Euclidean separation of two aligned trajectories.
inline double min_distance(const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size() || std::abs(a.t0() - b.t0()) > 1e-9 || a.dt() != b.dt())
    throw std::invalid_argument("min_distance: trajectories are not time-aligned");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < a.size(); ++k)
    best = std::min(best, (a[k].position - b[k].position).norm());
  return best;
}

inline double safety_utility(double min_dist, const SafetyParams& p) {
  if (min_dist <= p.d_buffer) return 0.0;
  return std::min(1.0, std::max(0.0, min_dist - p.d_buffer) / p.d_thr);
}

inline double safety_utility(const Trajectory& a, const Trajectory& b, const SafetyParams& p) {
  return safety_utility(min_distance(a, b), p);
}

inline double path_length(const Trajectory& t) {
  double path = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k) path += (t[k].position - t[k - 1].position).norm();
  return path;
}

inline double progress_utility(double path, const ProgressParams& p) {
  return std::min(1.0, std::log(path + 1.0) / p.p_thr);
}

inline double progress_utility(const Trajectory& t, const ProgressParams& p) {
  return progress_utility(path_length(t), p);
}

/// Largest drop below the initial longitudinal speed over the trajectory.
inline double speed_drop(const Trajectory& t) {
  const double initial = longitudinal_speed(t[0]);
  double lowest = initial;
  for (const auto& s : t.states()) lowest = std::min(lowest, longitudinal_speed(s));
  return std::max(0.0, initial - lowest);
}

inline double traffic_utility(double drop, const TrafficParams& p) {
  return 1.0 - std::min(1.0, drop * drop / p.speed_thr);
}

inline double traffic_utility(const Trajectory& t, const TrafficParams& p) {
  return traffic_utility(speed_drop(t), p);
}

struct UtilityComponents {
  double safety = 0.0;
  double progress = 0.0;
  double traffic = 0.0;
};

inline double total_utility(const UtilityComponents& c, const UtilityWeights& w) {
  for (double v : {c.safety, c.progress, c.traffic}) {
    if (!(v >= 0.0 && v <= 1.0))
      throw std::domain_error("utility component outside [0, 1]");
  }
  return w.base * (w.safety * c.safety + w.progress * c.progress + w.traffic * c.traffic);
}

/// Dense row-major matrix of payoffs.
class PayoffMatrix {
 public:
  PayoffMatrix() = default;
  PayoffMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Bimatrix game over trajectory pairs. A single-agent game has no follower
/// trajectories and a single payoff column.
struct PayoffTable {
  std::vector<Trajectory> ego_trajectories;
  std::vector<Trajectory> follower_trajectories;
  PayoffMatrix u_ego;
  PayoffMatrix u_follower;
};

inline PayoffTable build_payoff_table(std::vector<Trajectory> ego, std::vector<Trajectory> follower,
                                      const GameParams& params) {
  if (ego.empty() || follower.empty())
    throw std::invalid_argument("build_payoff_table: empty trajectory list");
  PayoffTable table{std::move(ego), std::move(follower), {}, {}};
  const auto n = table.ego_trajectories.size();
  const auto m = table.follower_trajectories.size();
  table.u_ego = PayoffMatrix(n, m);
  table.u_follower = PayoffMatrix(n, m);

  std::vector<UtilityComponents> ego_own(n), follower_own(m);
  for (std::size_t i = 0; i < n; ++i) {
    ego_own[i].progress = progress_utility(table.ego_trajectories[i], params.progress);
    ego_own[i].traffic = traffic_utility(table.ego_trajectories[i], params.traffic);
  }
  for (std::size_t j = 0; j < m; ++j) {
    follower_own[j].progress = progress_utility(table.follower_trajectories[j], params.progress);
    follower_own[j].traffic = traffic_utility(table.follower_trajectories[j], params.traffic);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double safety = safety_utility(table.ego_trajectories[i],
                                           table.follower_trajectories[j], params.safety);
      auto e = ego_own[i];
      auto f = follower_own[j];
      e.safety = f.safety = safety;
      table.u_ego(i, j) = total_utility(e, params.weights);
      table.u_follower(i, j) = total_utility(f, params.weights);
    }
  }
  return table;
}

/// Degenerate game for an ego with nobody to interact with: safety is 1.
inline PayoffTable build_single_agent_table(std::vector<Trajectory> ego, const GameParams& params) {
  if (ego.empty()) throw std::invalid_argument("build_single_agent_table: empty trajectory list");
  PayoffTable table{std::move(ego), {}, {}, {}};
  const auto n = table.ego_trajectories.size();
  table.u_ego = PayoffMatrix(n, 1);
  table.u_follower = PayoffMatrix(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const UtilityComponents c{1.0, progress_utility(table.ego_trajectories[i], params.progress),
                              traffic_utility(table.ego_trajectories[i], params.traffic)};
    table.u_ego(i, 0) = total_utility(c, params.weights);
  }
  return table;
}

struct Cell {
  std::size_t row = 0;
  std::size_t col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// All pure-strategy Nash cells in row-major order (weak best responses).
inline std::vector<Cell> find_pure_nash(const PayoffMatrix& u_row, const PayoffMatrix& u_col) {
  if (u_row.rows() != u_col.rows() || u_row.cols() != u_col.cols())
    throw std::invalid_argument("find_pure_nash: payoff matrices differ in shape");
  const auto n = u_row.rows(), m = u_row.cols();
  std::vector<double> col_best(m, -std::numeric_limits<double>::infinity());
  std::vector<double> row_best(n, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      col_best[j] = std::max(col_best[j], u_row(i, j));
      row_best[i] = std::max(row_best[i], u_col(i, j));
    }
  }
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (u_row(i, j) >= col_best[j] && u_col(i, j) >= row_best[i]) cells.push_back({i, j});
  return cells;
}

inline std::vector<Cell> find_pure_nash(const PayoffTable& table) {
  return find_pure_nash(table.u_ego, table.u_follower);
}

namespace detail {

// Ties are judged relative to payoff magnitude so that affine rescaling of a
// table cannot split or merge them through rounding.
inline bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

inline std::size_t argmax_first(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k)
    if (values[k] > values[best] && !nearly_equal(values[k], values[best])) best = k;
  return best;
}

}  // namespace detail

/// Picks one cell: highest joint payoff, then highest row payoff, then the
/// lexicographically smallest cell. With no pure equilibrium each player falls
/// back to its maximin strategy.
inline Cell select_equilibrium(std::span<const Cell> cells, const PayoffMatrix& u_row,
                               const PayoffMatrix& u_col) {
  if (!cells.empty()) {
    std::vector<Cell> sorted(cells.begin(), cells.end());
    std::sort(sorted.begin(), sorted.end());
    Cell best = sorted.front();
    for (const Cell& c : sorted) {
      const double w = u_row(c.row, c.col) + u_col(c.row, c.col);
      const double wb = u_row(best.row, best.col) + u_col(best.row, best.col);
      if (!detail::nearly_equal(w, wb)) {
        if (w > wb) best = c;
        continue;
      }
      const double r = u_row(c.row, c.col), rb = u_row(best.row, best.col);
      if (r > rb && !detail::nearly_equal(r, rb)) best = c;
    }
    return best;
  }
  std::vector<double> row_floor(u_row.rows(), std::numeric_limits<double>::infinity());
  std::vector<double> col_floor(u_row.cols(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < u_row.rows(); ++i) {
    for (std::size_t j = 0; j < u_row.cols(); ++j) {
      row_floor[i] = std::min(row_floor[i], u_row(i, j));
      col_floor[j] = std::min(col_floor[j], u_col(i, j));
    }
  }
  return {detail::argmax_first(row_floor), detail::argmax_first(col_floor)};
}

inline Cell select_equilibrium(std::span<const Cell> cells, const PayoffTable& table) {
  return select_equilibrium(cells, table.u_ego, table.u_follower);
}

}  // namespace wzgame
