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

#ifndef MRNAV_METRICS_HPP
#define MRNAV_METRICS_HPP

#include <map>
#include <vector>

#include "mrnav/gridworld.hpp"

namespace mrnav {

struct GoalOutcome {
  int goal_id = -1;
  bool found = false;
  int finder_robot = -1;
  int step = -1;
};

struct EpisodeOutcome {
  std::vector<GoalOutcome> goals;
  std::vector<double> distance_m;  // translation distance per robot (turns cost 0)
  int steps_used = 0;
  int max_steps = 0;
};

/// SPL = S * d_star / max(d, d_star); 0 on failure, 1 when the agent matches
/// or beats the optimum (the max clamps metric-granularity wins).
double compute_spl(int success, double d_star, double d);

/// Proportion of goals found pooled over the episode set ("Progress").
/// Throws EmptySetError when the set holds no goals.
double compute_sr(const std::vector<EpisodeOutcome>& outcomes);

/// MSPL = SR * d_star / max(d_star, max_j d_j); reduces to SPL at n=1, m=1.
double compute_mspl(double sr, double d_star, double max_dj);

// ---------------------------------------------------------------------------
// Min-max open-path generalized-TSP makespan
// ---------------------------------------------------------------------------

/// Goal clusters over scene geodesics. Nodes are the robot starts followed by
/// the flattened cluster cells; dist is the full geodesic matrix in meters.
struct MakespanInstance {
  std::vector<Cell> starts;
  std::vector<std::vector<Cell>> clusters;  // per kept goal, non-empty
  std::vector<int> goal_ids;                // kept goal ids, parallel to clusters
  std::vector<int> excluded_goal_ids;       // unreachable from every start
  std::vector<std::vector<double>> dist;

  int start_node(int robot) const { return robot; }
  int cell_node(int cluster, int cell) const {
    int node = int(starts.size());
    for (int g = 0; g < cluster; ++g) node += int(clusters[g].size());
    return node + cell;
  }
};

/// Success-region clusters: every Free cell within the goal's success radius
/// of a valid instance footprint cell, filtered to cells reachable from at
/// least one start, then downsampled to at most k_c representatives
/// (nearest, farthest, and three spread cells by start distance).
MakespanInstance build_makespan_instance(const GridScene& scene,
                                         const std::vector<Cell>& starts,
                                         const std::vector<GoalSpec>& goals,
                                         int k_c = 5);

struct MakespanSolution {
  double d_star = 0.0;
  std::map<int, int> assignment;  // goal id -> robot
  // Per robot: ordered (goal id, chosen cell) visits.
  std::vector<std::vector<std::pair<int, Cell>>> routes;
};

/// Globally optimal min-max open-path cost over all assignment / order /
/// cell-choice combinations, by exact branch and bound with an admissible
/// bound (so the optimum is preserved). Ties keep the first optimum in the
/// fixed route-major exploration order. Throws InfeasibleError on an empty
/// cluster.
MakespanSolution optimal_makespan(const MakespanInstance& inst);

// ---------------------------------------------------------------------------
// Episode evaluation
// ---------------------------------------------------------------------------

struct EpisodeMetrics {
  double sr = 0.0;
  bool d_star_defined = false;
  double d_star = 0.0;
  double max_dj = 0.0;
  double mspl = 0.0;
  // Step of the last goal event, or max_steps when goals remain.
  double avg_steps = 0.0;
  std::vector<int> excluded_goals;
};

EpisodeMetrics evaluate_episode(const GridScene& scene,
                                const std::vector<Cell>& start_cells,
                                const std::vector<GoalSpec>& goals,
                                const EpisodeOutcome& outcome);

}  // namespace mrnav

#endif  // MRNAV_METRICS_HPP
