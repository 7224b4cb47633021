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

#include "mrnav/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace mrnav {

double compute_spl(int success, double d_star, double d) {
  const double denom = std::max(d, d_star);
  if (denom <= 0.0) return double(success);  // zero-length optimum
  return double(success) * d_star / denom;
}

double compute_sr(const std::vector<EpisodeOutcome>& outcomes) {
  long total = 0, found = 0;
  for (const EpisodeOutcome& out : outcomes) {
    total += long(out.goals.size());
    for (const GoalOutcome& g : out.goals)
      if (g.found) ++found;
  }
  if (total == 0) throw EmptySetError("compute_sr: no goals in the episode set");
  return double(found) / double(total);
}

double compute_mspl(double sr, double d_star, double max_dj) {
  const double denom = std::max(d_star, max_dj);
  if (denom <= 0.0) return sr;
  return sr * d_star / denom;
}

// ---------------------------------------------------------------------------
// Instance construction
// ---------------------------------------------------------------------------

MakespanInstance build_makespan_instance(const GridScene& scene,
                                         const std::vector<Cell>& starts,
                                         const std::vector<GoalSpec>& goals,
                                         int k_c) {
  MakespanInstance inst;
  inst.starts = starts;

  std::vector<Grid<double>> start_fields;
  start_fields.reserve(starts.size());
  for (const Cell& s : starts) start_fields.push_back(scene_distance_field(scene, s));

  for (const GoalSpec& goal : goals) {
    // Success region: Free cells within the radius of any valid footprint
    // cell (Euclidean, center to center).
    std::vector<Cell> region;
    for (int r = 0; r < scene.height(); ++r) {
      for (int c = 0; c < scene.width(); ++c) {
        const Cell cell{r, c};
        if (!scene.is_free(cell)) continue;
        bool within = false;
        for (int id : goal.valid_instance_ids) {
          const ObjectInstance* instp = scene.find_instance(id);
          for (const Cell& f : instp->footprint) {
            if (euclidean(scene.cell_center(cell), scene.cell_center(f)) <=
                goal.success_radius_m + 1e-12) {
              within = true;
              break;
            }
          }
          if (within) break;
        }
        if (!within) continue;
        bool reachable = false;
        for (const auto& field : start_fields)
          if (field.at(cell) != kUnreachable) {
            reachable = true;
            break;
          }
        if (reachable) region.push_back(cell);
      }
    }
    if (region.empty()) {
      inst.excluded_goal_ids.push_back(goal.goal_id);
      continue;
    }
    if (int(region.size()) > k_c && k_c > 0) {
      // Representatives spread by distance from the nearest start.
      std::vector<std::pair<double, Cell>> ranked;
      ranked.reserve(region.size());
      for (const Cell& cell : region) {
        double d = kUnreachable;
        for (const auto& field : start_fields) d = std::min(d, field.at(cell));
        ranked.push_back({d, cell});
      }
      std::sort(ranked.begin(), ranked.end());
      std::vector<Cell> picked;
      const std::size_t last = ranked.size() - 1;
      for (int q = 0; q < k_c; ++q) {
        const std::size_t idx =
            k_c > 1 ? (last * std::size_t(q)) / std::size_t(k_c - 1) : 0;
        picked.push_back(ranked[idx].second);
      }
      std::sort(picked.begin(), picked.end());
      picked.erase(std::unique(picked.begin(), picked.end()), picked.end());
      region = std::move(picked);
    }
    inst.clusters.push_back(std::move(region));
    inst.goal_ids.push_back(goal.goal_id);
  }

  // Full node distance matrix: starts then flattened cluster cells.
  std::vector<Cell> nodes = starts;
  for (const auto& cluster : inst.clusters)
    nodes.insert(nodes.end(), cluster.begin(), cluster.end());
  inst.dist.assign(nodes.size(), std::vector<double>(nodes.size(), kUnreachable));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Grid<double> field = scene_distance_field(scene, nodes[i]);
    for (std::size_t j = 0; j < nodes.size(); ++j)
      inst.dist[i][j] = field.at(nodes[j]);
  }
  return inst;
}

// ---------------------------------------------------------------------------
// Exact branch and bound
// ---------------------------------------------------------------------------

namespace {

struct BnB {
  const MakespanInstance& inst;
  int n, m;
  std::vector<double> cost;       // per robot
  std::vector<int> position;      // current node per robot
  std::vector<std::vector<std::pair<int, int>>> routes;  // (cluster, cell idx)
  double best_cost = kUnreachable;
  std::vector<std::vector<std::pair<int, int>>> best_routes;

  explicit BnB(const MakespanInstance& instance)
      : inst(instance), n(int(instance.starts.size())), m(int(instance.clusters.size())) {
    cost.assign(n, 0.0);
    position.resize(n);
    for (int r = 0; r < n; ++r) position[r] = inst.start_node(r);
    routes.assign(n, {});
  }

  /// Admissible bound: the max of current route costs and, for each
  /// unassigned cluster, the cheapest any still-open robot could reach it.
  double lower_bound(int robot, unsigned mask) const {
    double lb = 0.0;
    for (int r = 0; r <= robot && r < n; ++r) lb = std::max(lb, cost[r]);
    for (int g = 0; g < m; ++g) {
      if (mask & (1u << g)) continue;
      double cheapest = kUnreachable;
      for (int r = robot; r < n; ++r) {
        const double base = r == robot ? cost[r] : 0.0;
        const int from = r == robot ? position[r] : inst.start_node(r);
        for (int k = 0; k < int(inst.clusters[g].size()); ++k) {
          const double d = inst.dist[from][inst.cell_node(g, k)];
          if (d == kUnreachable) continue;
          cheapest = std::min(cheapest, base + d);
        }
      }
      if (cheapest == kUnreachable) return kUnreachable;  // dead branch
      lb = std::max(lb, cheapest);
    }
    return lb;
  }

  void record_if_better() {
    double total = 0.0;
    for (int r = 0; r < n; ++r) total = std::max(total, cost[r]);
    if (total < best_cost) {
      best_cost = total;
      best_routes = routes;
    }
  }

  void dfs(int robot, unsigned mask) {
    if (mask == (m == 0 ? 0u : (1u << m) - 1u)) {
      record_if_better();
      return;
    }
    if (lower_bound(robot, mask) >= best_cost) return;

    // Extend the current robot's route.
    for (int g = 0; g < m; ++g) {
      if (mask & (1u << g)) continue;
      for (int k = 0; k < int(inst.clusters[g].size()); ++k) {
        const double d = inst.dist[position[robot]][inst.cell_node(g, k)];
        if (d == kUnreachable) continue;
        const int prev_node = position[robot];
        cost[robot] += d;
        position[robot] = inst.cell_node(g, k);
        routes[robot].push_back({g, k});
        dfs(robot, mask | (1u << g));
        routes[robot].pop_back();
        position[robot] = prev_node;
        cost[robot] -= d;
      }
    }
    // Close this route and hand over to the next robot.
    if (robot + 1 < n) dfs(robot + 1, mask);
  }

  /// Greedy min-max seed: repeatedly take the (robot, cluster, cell) move
  /// with the smallest resulting makespan.
  void seed_greedy() {
    std::vector<double> gcost(n, 0.0);
    std::vector<int> gpos(n);
    for (int r = 0; r < n; ++r) gpos[r] = inst.start_node(r);
    std::vector<std::vector<std::pair<int, int>>> groutes(n);
    unsigned mask = 0;
    const unsigned full = m == 0 ? 0u : (1u << m) - 1u;
    while (mask != full) {
      double best_new_max = kUnreachable;
      int br = -1, bg = -1, bk = -1;
      for (int r = 0; r < n; ++r) {
        for (int g = 0; g < m; ++g) {
          if (mask & (1u << g)) continue;
          for (int k = 0; k < int(inst.clusters[g].size()); ++k) {
            const double d = inst.dist[gpos[r]][inst.cell_node(g, k)];
            if (d == kUnreachable) continue;
            double new_max = gcost[r] + d;
            for (int o = 0; o < n; ++o)
              if (o != r) new_max = std::max(new_max, gcost[o]);
            if (new_max < best_new_max) {
              best_new_max = new_max;
              br = r;
              bg = g;
              bk = k;
            }
          }
        }
      }
      if (br < 0) return;  // leaves best_cost at +inf
      gcost[br] += inst.dist[gpos[br]][inst.cell_node(bg, bk)];
      gpos[br] = inst.cell_node(bg, bk);
      groutes[br].push_back({bg, bk});
      mask |= (1u << bg);
    }
    double total = 0.0;
    for (int r = 0; r < n; ++r) total = std::max(total, gcost[r]);
    best_cost = total;
    best_routes = std::move(groutes);
  }
};

}  // namespace

MakespanSolution optimal_makespan(const MakespanInstance& inst) {
  if (inst.starts.empty()) throw InfeasibleError("optimal_makespan: no robots");
  for (const auto& cluster : inst.clusters)
    if (cluster.empty()) throw InfeasibleError("optimal_makespan: empty cluster");

  BnB solver(inst);
  solver.seed_greedy();
  solver.dfs(0, 0u);
  if (solver.best_cost == kUnreachable)
    throw InfeasibleError("optimal_makespan: some cluster unreachable from every start");

  MakespanSolution sol;
  sol.d_star = solver.best_cost;
  sol.routes.resize(inst.starts.size());
  for (std::size_t r = 0; r < solver.best_routes.size(); ++r) {
    for (const auto& [g, k] : solver.best_routes[r]) {
      sol.assignment[inst.goal_ids[g]] = int(r);
      sol.routes[r].push_back({inst.goal_ids[g], inst.clusters[g][k]});
    }
  }
  return sol;
}

// ---------------------------------------------------------------------------
// Episode evaluation
// ---------------------------------------------------------------------------

EpisodeMetrics evaluate_episode(const GridScene& scene,
                                const std::vector<Cell>& start_cells,
                                const std::vector<GoalSpec>& goals,
                                const EpisodeOutcome& outcome) {
  EpisodeMetrics metrics;
  long found = 0;
  int last_step = -1;
  for (const GoalOutcome& g : outcome.goals) {
    if (g.found) {
      ++found;
      last_step = std::max(last_step, g.step);
    }
  }
  metrics.sr = outcome.goals.empty() ? 0.0 : double(found) / double(outcome.goals.size());
  metrics.max_dj = 0.0;
  for (double d : outcome.distance_m) metrics.max_dj = std::max(metrics.max_dj, d);
  metrics.avg_steps = (found == long(outcome.goals.size()) && last_step >= 0)
                          ? double(last_step)
                          : double(outcome.max_steps);

  const MakespanInstance inst = build_makespan_instance(scene, start_cells, goals);
  metrics.excluded_goals = inst.excluded_goal_ids;
  if (!inst.clusters.empty() || goals.empty()) {
    const MakespanSolution sol = optimal_makespan(inst);
    metrics.d_star_defined = true;
    metrics.d_star = sol.d_star;
    metrics.mspl = compute_mspl(metrics.sr, metrics.d_star, metrics.max_dj);
  } else {
    // Every goal region unreachable: the optimal makespan is undefined and
    // the episode counts as failure.
    metrics.d_star_defined = false;
    metrics.mspl = 0.0;
  }
  return metrics;
}

}  // namespace mrnav
