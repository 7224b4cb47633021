/*
 * Copyright 2026 The mrnav Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>

namespace mrnav::oracle {

Grid<double> scene_dijkstra(const GridScene& scene, Cell source) {
  const int w = scene.width(), h = scene.height();
  Grid<double> dist(w, h, kUnreachable);
  Grid<std::uint8_t> done(w, h, 0);
  if (!scene.is_free(source)) return dist;
  dist.at(source) = 0.0;
  const double res = scene.resolution();
  while (true) {
    // Linear scan for the nearest unfinished cell.
    Cell best{-1, -1};
    double best_d = kUnreachable;
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c)
        if (!done.at(r, c) && dist.at(r, c) < best_d) {
          best_d = dist.at(r, c);
          best = {r, c};
        }
    if (best.row < 0) break;
    done.at(best) = 1;
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        const Cell n{best.row + dr, best.col + dc};
        if (!scene.is_free(n)) continue;
        const double step = res * ((dr != 0 && dc != 0) ? std::numbers::sqrt2 : 1.0);
        dist.at(n) = std::min(dist.at(n), best_d + step);
      }
    }
  }
  return dist;
}

std::set<Cell> ray_march_visibility(const GridScene& scene, const Pose& pose,
                                    const SensorConfig& sensor) {
  const double res = scene.resolution();
  const double delta = std::atan2(0.5 * res, sensor.range_m);
  const int n = std::max(1, int(std::ceil(sensor.fov_rad / delta)));
  const double march = res / 16.0;

  std::set<Cell> visible;
  for (int i = 0; i < n; ++i) {
    const double angle =
        pose.heading_rad() - sensor.fov_rad / 2.0 + (i + 0.5) * sensor.fov_rad / n;
    const double dx = std::cos(angle), dy = std::sin(angle);
    Cell prev{-1000000, -1000000};
    for (double t = 0.0; t < sensor.range_m; t += march) {
      const Cell c{int(std::floor((pose.y + t * dy) / res)),
                   int(std::floor((pose.x + t * dx) / res))};
      if (c == prev) continue;
      prev = c;
      if (!scene.in_bounds(c)) break;
      visible.insert(c);
      if (scene.state(c) == CellState::Obstacle) break;
    }
  }
  return visible;
}

std::set<Cell> frontier_scan(const LogOddsMap& map) {
  std::set<Cell> out;
  for (int r = map.min_row() - 1; r <= map.min_row() + map.height(); ++r) {
    for (int c = map.min_col() - 1; c <= map.min_col() + map.width(); ++c) {
      const Cell cell{r, c};
      if (map.classify(cell) != CellClass::FreeExplored) continue;
      const Cell nbs[4] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
      for (const Cell& n : nbs) {
        if (map.classify(n) == CellClass::Unknown) {
          out.insert(cell);
          break;
        }
      }
    }
  }
  return out;
}

double map_path_cost(const LogOddsMap& map, Cell from, Cell to, int inflate,
                     const MapParams& params) {
  const int w = map.width(), h = map.height();
  const int r0 = map.min_row(), c0 = map.min_col();

  // Brute-force Chebyshev dilation of occupied cells.
  Grid<std::uint8_t> blocked(w, h, 0);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      bool near_occ = false;
      for (int dr = -inflate; dr <= inflate && !near_occ; ++dr)
        for (int dc = -inflate; dc <= inflate; ++dc)
          if (map.classify({r0 + r + dr, c0 + c + dc}) == CellClass::Occupied) {
            near_occ = true;
            break;
          }
      blocked.at(r, c) = near_occ ? 1 : 0;
    }

  auto idx_ok = [&](Cell s) { return s.row >= 0 && s.row < h && s.col >= 0 && s.col < w; };
  const Cell sf{from.row - r0, from.col - c0}, st{to.row - r0, to.col - c0};
  if (!idx_ok(sf) || !idx_ok(st) || blocked.at(sf) || blocked.at(st))
    return kUnreachable;

  Grid<double> dist(w, h, kUnreachable);
  Grid<std::uint8_t> done(w, h, 0);
  dist.at(sf) = 0.0;
  while (true) {
    Cell best{-1, -1};
    double best_d = kUnreachable;
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c)
        if (!done.at(r, c) && dist.at(r, c) < best_d) {
          best_d = dist.at(r, c);
          best = {r, c};
        }
    if (best.row < 0) break;
    done.at(best) = 1;
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        const Cell s{best.row + dr, best.col + dc};
        if (!idx_ok(s) || blocked.at(s)) continue;
        const Cell cell{r0 + s.row, c0 + s.col};
        double step = map.resolution() * ((dr != 0 && dc != 0) ? std::numbers::sqrt2 : 1.0);
        if (map.classify(cell) == CellClass::Unknown) step *= params.lambda_unknown;
        dist.at(s) = std::min(dist.at(s), best_d + step);
      }
    }
  }
  return dist.at(st);
}

namespace {

/// Recursively enumerate orders + cells for one robot's assigned cluster set.
double best_route_cost(const MakespanInstance& inst, int start_node,
                       std::vector<int>& clusters) {
  std::sort(clusters.begin(), clusters.end());
  double best = clusters.empty() ? 0.0 : kUnreachable;
  do {
    // For a fixed visiting order, choose cells greedily by full enumeration.
    // Cell choices interact through consecutive legs, so enumerate all
    // combinations with a simple odometer.
    std::vector<int> pick(clusters.size(), 0);
    while (true) {
      double cost = 0.0;
      int node = start_node;
      for (std::size_t i = 0; i < clusters.size(); ++i) {
        const int next = inst.cell_node(clusters[i], pick[i]);
        const double d = inst.dist[node][next];
        cost = (d == kUnreachable || cost == kUnreachable) ? kUnreachable : cost + d;
        node = next;
      }
      best = std::min(best, cost);
      std::size_t k = 0;
      for (; k < pick.size(); ++k) {
        if (++pick[k] < int(inst.clusters[clusters[k]].size())) break;
        pick[k] = 0;
      }
      if (k == pick.size()) break;
      if (pick.empty()) break;
    }
    if (clusters.empty()) break;
  } while (std::next_permutation(clusters.begin(), clusters.end()));
  return best;
}

void enumerate_assignments(const MakespanInstance& inst, std::size_t goal,
                           std::vector<std::vector<int>>& per_robot, double& best) {
  const int n = int(inst.starts.size());
  if (goal == inst.clusters.size()) {
    double makespan = 0.0;
    for (int r = 0; r < n; ++r) {
      const double c = best_route_cost(inst, inst.start_node(r), per_robot[r]);
      makespan = std::max(makespan, c);
      if (makespan == kUnreachable) return;
    }
    best = std::min(best, makespan);
    return;
  }
  for (int r = 0; r < n; ++r) {
    per_robot[r].push_back(int(goal));
    enumerate_assignments(inst, goal + 1, per_robot, best);
    per_robot[r].pop_back();
  }
}

}  // namespace

double enumerate_makespan(const MakespanInstance& inst) {
  std::vector<std::vector<int>> per_robot(inst.starts.size());
  double best = inst.clusters.empty() ? 0.0 : kUnreachable;
  enumerate_assignments(inst, 0, per_robot, best);
  return best;
}

double held_karp_single(const MakespanInstance& inst) {
  const int m = int(inst.clusters.size());
  if (m == 0) return 0.0;
  int total_cells = 0;
  for (const auto& cl : inst.clusters) total_cells += int(cl.size());
  const unsigned full = (1u << m) - 1u;

  // dp[mask][node] = min cost reaching `node` (a cluster cell) having
  // satisfied `mask`.
  std::vector<std::vector<double>> dp(full + 1,
                                      std::vector<double>(total_cells, kUnreachable));
  auto flat = [&](int g, int k) { return inst.cell_node(g, k) - int(inst.starts.size()); };
  for (int g = 0; g < m; ++g)
    for (int k = 0; k < int(inst.clusters[g].size()); ++k)
      dp[1u << g][flat(g, k)] = inst.dist[inst.start_node(0)][inst.cell_node(g, k)];

  for (unsigned mask = 1; mask <= full; ++mask) {
    for (int g = 0; g < m; ++g) {
      if (!(mask & (1u << g))) continue;
      for (int k = 0; k < int(inst.clusters[g].size()); ++k) {
        const double cur = dp[mask][flat(g, k)];
        if (cur == kUnreachable) continue;
        for (int g2 = 0; g2 < m; ++g2) {
          if (mask & (1u << g2)) continue;
          for (int k2 = 0; k2 < int(inst.clusters[g2].size()); ++k2) {
            const double d = inst.dist[inst.cell_node(g, k)][inst.cell_node(g2, k2)];
            if (d == kUnreachable) continue;
            double& slot = dp[mask | (1u << g2)][flat(g2, k2)];
            slot = std::min(slot, cur + d);
          }
        }
      }
    }
  }
  double best = kUnreachable;
  for (int node = 0; node < total_cells; ++node)
    best = std::min(best, dp[full][node]);
  return best;
}

std::string fixture(const std::string& name) {
  return std::string(MRNAV_FIXTURE_DIR) + "/" + name;
}

}  // namespace mrnav::oracle
