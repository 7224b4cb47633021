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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "mrnav/metrics.hpp"
#include "support/oracles.hpp"

using namespace mrnav;

namespace {

/// Direct instance construction for solver tests: clusters are explicit cell
/// sets, distances are scene geodesics.
MakespanInstance make_instance(const GridScene& scene, std::vector<Cell> starts,
                               std::vector<std::vector<Cell>> clusters) {
  MakespanInstance inst;
  inst.starts = std::move(starts);
  inst.clusters = std::move(clusters);
  for (int g = 0; g < int(inst.clusters.size()); ++g) inst.goal_ids.push_back(g);
  std::vector<Cell> nodes = inst.starts;
  for (const auto& cl : inst.clusters) nodes.insert(nodes.end(), cl.begin(), cl.end());
  inst.dist.assign(nodes.size(), std::vector<double>(nodes.size(), kUnreachable));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Grid<double> field = scene_distance_field(scene, nodes[i]);
    for (std::size_t j = 0; j < nodes.size(); ++j) inst.dist[i][j] = field.at(nodes[j]);
  }
  return inst;
}

GridScene random_scene(Rng& rng, int size, int obstacles) {
  GridScene scene(size, size, 1.0, "rand");
  for (int k = 0; k < obstacles; ++k)
    scene.set_state({rng.uniform_int(0, size - 1), rng.uniform_int(0, size - 1)},
                    CellState::Obstacle);
  return scene;
}

std::vector<Cell> random_free_cells(const GridScene& scene, Rng& rng, int count) {
  std::vector<Cell> free;
  for (int r = 0; r < scene.height(); ++r)
    for (int c = 0; c < scene.width(); ++c)
      if (scene.is_free({r, c})) free.push_back({r, c});
  std::vector<Cell> out;
  for (int i = 0; i < count; ++i)
    out.push_back(free[rng.uniform_int(0, int(free.size()) - 1)]);
  return out;
}

}  // namespace

TEST_SUITE("compute_spl") {
  TEST_CASE("direct formula") { CHECK(compute_spl(1, 5.0, 10.0) == 0.5); }
  TEST_CASE("agent beating the optimum clamps to 1") {
    CHECK(compute_spl(1, 5.0, 4.0) == 1.0);
  }
  TEST_CASE("failure is zero") { CHECK(compute_spl(0, 5.0, 2.0) == 0.0); }
  TEST_CASE("zero-length optimum") { CHECK(compute_spl(1, 0.0, 0.0) == 1.0); }
}

TEST_SUITE("compute_sr") {
  TEST_CASE("single-goal pooling") {
    std::vector<EpisodeOutcome> outs(10);
    for (int i = 0; i < 10; ++i) outs[i].goals = {{0, i < 7, 0, 1}};
    CHECK(compute_sr(outs) == 0.7);
  }
  TEST_CASE("multi-object pooling") {
    std::vector<EpisodeOutcome> outs(2);
    for (int e = 0; e < 2; ++e)
      for (int g = 0; g < 5; ++g)
        outs[e].goals.push_back({g, g < (e == 0 ? 3 : 4), 0, 1});
    CHECK(compute_sr(outs) == 0.7);
  }
  TEST_CASE("empty set is an error") {
    CHECK_THROWS_AS(compute_sr({}), EmptySetError);
  }
}

TEST_SUITE("compute_mspl") {
  TEST_CASE("optimal execution") { CHECK(compute_mspl(1.0, 10.0, 10.0) == 1.0); }
  TEST_CASE("direct formula") { CHECK(compute_mspl(0.5, 8.0, 20.0) == 0.2); }
  TEST_CASE("bounded in [0,1] over random inputs") {
    Rng rng(5);
    for (int i = 0; i < 500; ++i) {
      const double v = compute_mspl(rng.uniform(), rng.uniform(0.0, 50.0),
                                    rng.uniform(0.0, 50.0));
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  TEST_CASE("identical to SPL for n=1, m=1 outcomes") {
    Rng rng(6);
    for (int i = 0; i < 200; ++i) {
      const int s = rng.uniform() < 0.5 ? 1 : 0;
      const double d_star = rng.uniform(0.0, 30.0);
      const double d = rng.uniform(0.0, 30.0);
      CHECK(compute_mspl(double(s), d_star, d) == compute_spl(s, d_star, d));
    }
  }
}

TEST_SUITE("optimal_makespan") {
  TEST_CASE("degenerate single robot, single cell") {
    GridScene scene(12, 12, 1.0, "line");
    const auto inst = make_instance(scene, {{0, 0}}, {{{0, 7}}});
    const MakespanSolution sol = optimal_makespan(inst);
    CHECK(sol.d_star == doctest::Approx(7.0));
    REQUIRE(sol.routes.size() == 1);
    CHECK(sol.routes[0].size() == 1);
    CHECK(sol.assignment.at(0) == 0);
  }

  TEST_CASE("two robots on a line split the goals") {
    GridScene scene(11, 1, 1.0, "line");
    const auto inst =
        make_instance(scene, {{0, 0}, {0, 10}}, {{{0, 2}}, {{0, 8}}});
    const MakespanSolution sol = optimal_makespan(inst);
    CHECK(sol.d_star == doctest::Approx(2.0));
    CHECK(sol.d_star == doctest::Approx(oracle::enumerate_makespan(inst)));
    CHECK(sol.assignment.at(0) != sol.assignment.at(1));
  }

  TEST_CASE("empty goal set costs nothing") {
    GridScene scene(5, 5, 1.0, "empty");
    const auto inst = make_instance(scene, {{0, 0}}, {});
    CHECK(optimal_makespan(inst).d_star == 0.0);
  }

  TEST_CASE("empty cluster is infeasible") {
    GridScene scene(5, 5, 1.0, "bad");
    auto inst = make_instance(scene, {{0, 0}}, {std::vector<Cell>{}});
    CHECK_THROWS_AS(optimal_makespan(inst), InfeasibleError);
  }

  TEST_CASE("matches full enumeration on random instances") {
    Rng rng(4242);
    for (int trial = 0; trial < 40; ++trial) {
      GridScene scene = random_scene(rng, 10, 18);
      const int n = rng.uniform_int(1, 3);
      const int m = rng.uniform_int(1, 4);
      const auto starts = random_free_cells(scene, rng, n);
      std::vector<std::vector<Cell>> clusters;
      for (int g = 0; g < m; ++g) {
        auto cells = random_free_cells(scene, rng, rng.uniform_int(1, 3));
        std::sort(cells.begin(), cells.end());
        cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
        clusters.push_back(std::move(cells));
      }
      const auto inst = make_instance(scene, starts, clusters);
      const double expected = oracle::enumerate_makespan(inst);
      if (expected == kUnreachable) {
        CHECK_THROWS_AS(optimal_makespan(inst), InfeasibleError);
      } else {
        CHECK(optimal_makespan(inst).d_star == doctest::Approx(expected).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("single robot equals Held-Karp up to m = 8") {
    Rng rng(95);
    for (int trial = 0; trial < 10; ++trial) {
      GridScene scene = random_scene(rng, 9, 10);
      const auto starts = random_free_cells(scene, rng, 1);
      const int m = rng.uniform_int(5, 8);
      std::vector<std::vector<Cell>> clusters;
      for (int g = 0; g < m; ++g) {
        auto cells = random_free_cells(scene, rng, rng.uniform_int(1, 2));
        std::sort(cells.begin(), cells.end());
        cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
        clusters.push_back(std::move(cells));
      }
      const auto inst = make_instance(scene, starts, clusters);
      const double expected = oracle::held_karp_single(inst);
      if (expected == kUnreachable) {
        CHECK_THROWS_AS(optimal_makespan(inst), InfeasibleError);
      } else {
        CHECK(optimal_makespan(inst).d_star == doctest::Approx(expected).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("never exceeds a nearest-goal greedy schedule") {
    Rng rng(31415);
    for (int trial = 0; trial < 15; ++trial) {
      GridScene scene = random_scene(rng, 10, 15);
      const int n = rng.uniform_int(1, 3);
      const int m = rng.uniform_int(1, 4);
      const auto starts = random_free_cells(scene, rng, n);
      std::vector<std::vector<Cell>> clusters;
      for (int g = 0; g < m; ++g) clusters.push_back(random_free_cells(scene, rng, 1));
      const auto inst = make_instance(scene, starts, clusters);

      // Independent greedy: each step, send the robot with the cheapest
      // nearest-goal move; its cost is an upper bound on the optimum.
      std::vector<double> cost(n, 0.0);
      std::vector<int> node(n);
      for (int r = 0; r < n; ++r) node[r] = inst.start_node(r);
      std::vector<bool> done(m, false);
      bool feasible = true;
      for (int assigned = 0; assigned < m && feasible; ++assigned) {
        double best_new_max = kUnreachable;
        int br = -1, bg = -1;
        for (int r = 0; r < n; ++r) {
          for (int g = 0; g < m; ++g) {
            if (done[g]) continue;
            const double d = inst.dist[node[r]][inst.cell_node(g, 0)];
            if (d == kUnreachable) continue;
            double nm = cost[r] + d;
            for (int o = 0; o < n; ++o)
              if (o != r) nm = std::max(nm, cost[o]);
            if (nm < best_new_max) {
              best_new_max = nm;
              br = r;
              bg = g;
            }
          }
        }
        if (br < 0) {
          feasible = false;
          break;
        }
        cost[br] += inst.dist[node[br]][inst.cell_node(bg, 0)];
        node[br] = inst.cell_node(bg, 0);
        done[bg] = true;
      }
      if (!feasible) continue;
      double greedy = 0.0;
      for (double c : cost) greedy = std::max(greedy, c);
      CHECK(optimal_makespan(inst).d_star <= greedy + 1e-9);
    }
  }

  TEST_CASE("monotone: goals never cheapen, robots never hurt") {
    Rng rng(777);
    for (int trial = 0; trial < 15; ++trial) {
      GridScene scene = random_scene(rng, 9, 12);
      const auto starts = random_free_cells(scene, rng, 3);
      std::vector<std::vector<Cell>> clusters;
      for (int g = 0; g < 3; ++g) clusters.push_back(random_free_cells(scene, rng, 1));
      const auto base = make_instance(
          scene, {starts[0], starts[1]},
          {clusters[0], clusters[1]});
      const auto more_goals = make_instance(
          scene, {starts[0], starts[1]},
          {clusters[0], clusters[1], clusters[2]});
      const auto more_robots = make_instance(
          scene, {starts[0], starts[1], starts[2]},
          {clusters[0], clusters[1]});
      double d_base;
      try {
        d_base = optimal_makespan(base).d_star;
      } catch (const InfeasibleError&) {
        continue;
      }
      try {
        CHECK(optimal_makespan(more_goals).d_star >= d_base - 1e-9);
      } catch (const InfeasibleError&) {
      }
      CHECK(optimal_makespan(more_robots).d_star <= d_base + 1e-9);
    }
  }
}

TEST_SUITE("build_makespan_instance") {
  TEST_CASE("single-cell success region at a small radius") {
    GridScene scene(11, 1, 1.0, "line");
    ObjectInstance a, b;
    a.instance_id = 1;
    a.category = "chair";
    a.footprint = {{0, 2}};
    b.instance_id = 2;
    b.category = "table";
    b.footprint = {{0, 8}};
    scene.add_instance(a);
    scene.add_instance(b);
    GoalSpec g0, g1;
    g0.goal_id = 0;
    g0.valid_instance_ids = {1};
    g0.success_radius_m = 0.4;
    g1.goal_id = 1;
    g1.valid_instance_ids = {2};
    g1.success_radius_m = 0.4;

    const auto inst =
        build_makespan_instance(scene, {{0, 0}, {0, 10}}, {g0, g1});
    REQUIRE(inst.clusters.size() == 2);
    CHECK(inst.clusters[0] == std::vector<Cell>{{0, 2}});
    CHECK(inst.clusters[1] == std::vector<Cell>{{0, 8}});
    CHECK(optimal_makespan(inst).d_star == doctest::Approx(2.0));
  }

  TEST_CASE("unreachable goals are excluded and flagged") {
    GridScene scene(9, 9, 1.0, "walled");
    for (int r = 0; r < 9; ++r) scene.set_state({r, 4}, CellState::Obstacle);
    ObjectInstance far_side;
    far_side.instance_id = 1;
    far_side.category = "chair";
    far_side.footprint = {{4, 7}};
    scene.add_instance(far_side);
    GoalSpec g;
    g.goal_id = 3;
    g.valid_instance_ids = {1};
    g.success_radius_m = 1.0;
    const auto inst = build_makespan_instance(scene, {{4, 1}}, {g});
    CHECK(inst.clusters.empty());
    CHECK(inst.excluded_goal_ids == std::vector<int>{3});
  }

  TEST_CASE("large regions are downsampled to spread representatives") {
    GridScene scene(15, 15, 0.25, "open");
    ObjectInstance inst_obj;
    inst_obj.instance_id = 1;
    inst_obj.category = "chair";
    inst_obj.footprint = {{7, 7}};
    scene.add_instance(inst_obj);
    GoalSpec g;
    g.goal_id = 0;
    g.valid_instance_ids = {1};
    g.success_radius_m = 1.0;  // 4-cell disc: dozens of cells
    const auto inst = build_makespan_instance(scene, {{0, 0}}, {g}, 5);
    REQUIRE(inst.clusters.size() == 1);
    CHECK(inst.clusters[0].size() <= 5);
  }
}

TEST_SUITE("evaluate_episode") {
  TEST_CASE("avg steps uses the last goal event or the budget") {
    GridScene scene(11, 1, 1.0, "line");
    ObjectInstance a;
    a.instance_id = 1;
    a.category = "chair";
    a.footprint = {{0, 5}};
    scene.add_instance(a);
    GoalSpec g;
    g.goal_id = 0;
    g.valid_instance_ids = {1};
    g.success_radius_m = 0.4;

    EpisodeOutcome done;
    done.goals = {{0, true, 0, 17}};
    done.distance_m = {5.0};
    done.steps_used = 20;
    done.max_steps = 100;
    const EpisodeMetrics m1 = evaluate_episode(scene, {{0, 0}}, {g}, done);
    CHECK(m1.avg_steps == 17.0);
    CHECK(m1.sr == 1.0);
    CHECK(m1.d_star == doctest::Approx(5.0));
    CHECK(m1.mspl == doctest::Approx(1.0));

    EpisodeOutcome unfinished = done;
    unfinished.goals[0].found = false;
    const EpisodeMetrics m2 = evaluate_episode(scene, {{0, 0}}, {g}, unfinished);
    CHECK(m2.avg_steps == 100.0);
    CHECK(m2.sr == 0.0);
    CHECK(m2.mspl == 0.0);
  }
}
