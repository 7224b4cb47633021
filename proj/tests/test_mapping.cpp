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
#include <algorithm>

#include "doctest.h"
#include "mrnav/mapping.hpp"
#include "mrnav/snapshot.hpp"
#include "support/oracles.hpp"
#include "support/testmaps.hpp"

using namespace mrnav;
using testmaps::map_from_ascii;

namespace {

Observation single_cell_obs(Cell c, CellState state) {
  Observation obs;
  obs.pose = {(c.col + 0.5) * 0.25, (c.row + 0.5) * 0.25, 0};
  obs.visible = {{c, state}};
  return obs;
}

}  // namespace

TEST_SUITE("integrate_observation") {
  TEST_CASE("single obstacle update") {
    LogOddsMap map;
    InstanceRegistry reg;
    MapParams p;
    integrate_observation(map, reg, single_cell_obs({3, 3}, CellState::Obstacle), p);
    CHECK(map.occupancy({3, 3}) == doctest::Approx(0.9));
    CHECK(map.classify({3, 3}) == CellClass::Occupied);
  }

  TEST_CASE("one false obstacle decays under free observations") {
    LogOddsMap map;
    InstanceRegistry reg;
    MapParams p;
    integrate_observation(map, reg, single_cell_obs({3, 3}, CellState::Obstacle), p);
    for (int i = 0; i < 3; ++i)
      integrate_observation(map, reg, single_cell_obs({3, 3}, CellState::Free), p);
    CHECK(map.occupancy({3, 3}) == doctest::Approx(-0.3));
    CHECK(map.classify({3, 3}) == CellClass::FreeExplored);
  }

  TEST_CASE("clamps at the evidence cap") {
    LogOddsMap map;
    InstanceRegistry reg;
    MapParams p;
    for (int i = 0; i < 100; ++i)
      integrate_observation(map, reg, single_cell_obs({3, 3}, CellState::Obstacle), p);
    CHECK(map.occupancy({3, 3}) == 5.0);
  }

  TEST_CASE("detection feeds the semantic channel and the registry") {
    LogOddsMap map;
    InstanceRegistry reg;
    MapParams p;
    Observation obs = single_cell_obs({2, 2}, CellState::Obstacle);
    obs.detections = {{7, "chair", {{2, 2}}, 0.9}};
    integrate_observation(map, reg, obs, p);
    CHECK(map.semantic("chair", {2, 2}) == doctest::Approx(0.9));
    REQUIRE(reg.size() == 1);
    CHECK(reg[0].category == "chair");
    CHECK(reg[0].best_score == 0.9);
    CHECK(reg[0].source_ids.count(7) == 1);

    // Same category near the same centroid: fused, score keeps the max.
    Observation obs2 = single_cell_obs({2, 3}, CellState::Obstacle);
    obs2.detections = {{7, "chair", {{2, 3}}, 0.7}};
    integrate_observation(map, reg, obs2, p);
    REQUIRE(reg.size() == 1);
    CHECK(reg[0].cells.size() == 2);
    CHECK(reg[0].best_score == 0.9);
    CHECK(reg[0].observation_count == 2);

    // Different category: a fresh record.
    Observation obs3 = single_cell_obs({2, 2}, CellState::Obstacle);
    obs3.detections = {{9, "table", {{2, 2}}, 0.8}};
    integrate_observation(map, reg, obs3, p);
    CHECK(reg.size() == 2);

    // Same category far away (> r_assoc): a fresh record too.
    Observation obs4 = single_cell_obs({20, 20}, CellState::Obstacle);
    obs4.detections = {{11, "chair", {{20, 20}}, 0.5}};
    integrate_observation(map, reg, obs4, p);
    CHECK(reg.size() == 3);
  }

  TEST_CASE("map grows to cover negative cell indices") {
    LogOddsMap map;
    InstanceRegistry reg;
    MapParams p;
    integrate_observation(map, reg, single_cell_obs({-7, -3}, CellState::Free), p);
    CHECK(map.explored({-7, -3}));
    CHECK(map.classify({-7, -3}) == CellClass::FreeExplored);
    CHECK(map.occupancy({-7, -3}) == doctest::Approx(-0.4));
  }

  TEST_CASE("order sensitivity: exact equality without clamping, stable sign with") {
    MapParams p;
    Rng rng(77);
    for (int trial = 0; trial < 40; ++trial) {
      // Counts low enough that no prefix can reach the clamp: exact equality.
      const int n_occ = rng.uniform_int(0, 5);
      const int n_free = rng.uniform_int(0, 12);
      std::vector<CellState> updates(n_occ, CellState::Obstacle);
      updates.insert(updates.end(), n_free, CellState::Free);

      LogOddsMap base;
      InstanceRegistry reg;
      for (CellState s : updates)
        integrate_observation(base, reg, single_cell_obs({0, 0}, s), p);
      for (int perm = 0; perm < 4; ++perm) {
        for (int i = int(updates.size()) - 1; i > 0; --i)
          std::swap(updates[i], updates[rng.uniform_int(0, i)]);
        LogOddsMap map;
        InstanceRegistry reg2;
        for (CellState s : updates)
          integrate_observation(map, reg2, single_cell_obs({0, 0}, s), p);
        // Equal up to summation rounding; no clamp can have triggered.
        CHECK(map.occupancy({0, 0}) ==
              doctest::Approx(base.occupancy({0, 0})).epsilon(1e-12));
      }
    }
    // With clamping reachable the value is order-dependent, but the final
    // sign stays stable as long as the opposing evidence cannot cross the
    // clamp band (n_free * l_free < l_max here).
    for (int trial = 0; trial < 20; ++trial) {
      const int n_occ = rng.uniform_int(7, 30);
      const int n_free = rng.uniform_int(0, 12);
      std::vector<CellState> updates(n_occ, CellState::Obstacle);
      updates.insert(updates.end(), n_free, CellState::Free);
      for (int perm = 0; perm < 4; ++perm) {
        for (int i = int(updates.size()) - 1; i > 0; --i)
          std::swap(updates[i], updates[rng.uniform_int(0, i)]);
        LogOddsMap map;
        InstanceRegistry reg2;
        for (CellState s : updates)
          integrate_observation(map, reg2, single_cell_obs({0, 0}, s), p);
        CHECK(map.occupancy({0, 0}) > 0.0);
      }
    }
  }

  TEST_CASE("no semantic-positive unexplored cells after random integrations") {
    MapParams p;
    Rng rng(31);
    LogOddsMap map;
    InstanceRegistry reg;
    for (int i = 0; i < 60; ++i) {
      const Cell c{rng.uniform_int(0, 9), rng.uniform_int(0, 9)};
      Observation obs = single_cell_obs(
          c, rng.uniform() < 0.5 ? CellState::Obstacle : CellState::Free);
      if (rng.uniform() < 0.4) obs.detections = {{1, "chair", {c}, 1.0}};
      integrate_observation(map, reg, obs, p);
    }
    for (int r = map.min_row() - 2; r < map.min_row() + map.height() + 2; ++r)
      for (int c = map.min_col() - 2; c < map.min_col() + map.width() + 2; ++c)
        if (!map.explored({r, c})) CHECK(map.semantic("chair", {r, c}) <= 0.0);
  }
}

TEST_SUITE("classify") {
  TEST_CASE("threshold at zero") {
    LogOddsMap map;
    map.set_occupancy({0, 0}, 0.1, 5.0);
    map.mark_explored({0, 0});
    CHECK(map.classify({0, 0}) == CellClass::Occupied);
  }

  TEST_CASE("zero log-odds is still free") {
    LogOddsMap map;
    map.set_occupancy({0, 0}, 0.0, 5.0);
    map.mark_explored({0, 0});
    CHECK(map.classify({0, 0}) == CellClass::FreeExplored);
  }

  TEST_CASE("unexplored is unknown whatever the value") {
    LogOddsMap map;
    map.set_occupancy({0, 0}, 3.0, 5.0);
    CHECK(map.classify({0, 0}) == CellClass::Unknown);
    CHECK(map.classify({50, 50}) == CellClass::Unknown);  // outside storage
  }
}

TEST_SUITE("extract_frontiers") {
  TEST_CASE("fully explored map has none") {
    // Closed room, every cell explored: no frontier cells at all.
    std::vector<std::string> rows(8, std::string(8, '.'));
    for (int i = 0; i < 8; ++i) {
      rows[0][i] = rows[7][i] = '#';
      rows[i][0] = rows[i][7] = '#';
    }
    const LogOddsMap map = map_from_ascii(rows);
    CHECK(extract_frontiers(map, MapParams{}).empty());
  }

  TEST_CASE("half-explored room has exactly one frontier along the boundary") {
    // Walled 10x10 room, left half of the interior explored: the only
    // frontier is the straight explored/unknown boundary column.
    std::vector<std::string> rows(12, "#....       ");
    rows[0] = "############";
    rows[11] = "############";
    const LogOddsMap map = map_from_ascii(rows);
    const auto frontiers = extract_frontiers(map, MapParams{});
    REQUIRE(frontiers.size() == 1);
    CHECK(frontiers[0].cells.size() == 10);
    for (const Cell& c : frontiers[0].cells) CHECK(c.col == 4);
  }

  TEST_CASE("tworoom explored in one room matches the exhaustive scan") {
    const GridScene scene = load_scene(oracle::fixture("tworoom.scene"));
    LogOddsMap map;
    testmaps::explore_rect(map, scene, 0, 0, scene.height() - 1, 9);
    const auto frontiers = extract_frontiers(map, MapParams{});
    std::set<Cell> clustered;
    for (const auto& f : frontiers)
      for (const Cell& c : f.cells) clustered.insert(c);

    const std::set<Cell> scanned = oracle::frontier_scan(map);
    // Clusters below f_min are dropped; everything kept must be in the scan,
    // and the scan minus the kept cells must be in small clusters only.
    for (const Cell& c : clustered) CHECK(scanned.count(c) == 1);
    CHECK(clustered.size() >= scanned.size() - 2 * std::size_t(MapParams{}.f_min));
    CHECK(frontiers.size() == 1);  // the doorway column is one cluster
  }

  TEST_CASE("frontier cells are FreeExplored with an Unknown 4-neighbor") {
    const GridScene scene = load_scene(oracle::fixture("tworoom.scene"));
    LogOddsMap map;
    testmaps::explore_rect(map, scene, 2, 1, 8, 6);
    for (const auto& f : extract_frontiers(map, MapParams{})) {
      for (const Cell& c : f.cells) {
        CHECK(map.classify(c) == CellClass::FreeExplored);
        bool has_unknown = false;
        for (const auto& off : kNeighbor4Offsets)
          if (map.classify({c.row + off[0], c.col + off[1]}) == CellClass::Unknown)
            has_unknown = true;
        CHECK(has_unknown);
      }
    }
  }

  TEST_CASE("clusters below f_min are suppressed") {
    // Two isolated frontier cells (cluster size 1 each).
    const LogOddsMap map = map_from_ascii({"#.#", "###", "#.#"});
    CHECK(extract_frontiers(map, MapParams{}).empty());
  }
}

TEST_SUITE("plan_path") {
  TEST_CASE("straight corridor at inflation zero matches the geodesic") {
    std::vector<std::string> rows(3, "..........");
    const LogOddsMap map = map_from_ascii(rows);
    const auto path = plan_path(map, {1, 0}, {1, 9}, 0, MapParams{});
    REQUIRE(path.has_value());
    CHECK(path->cost_m == doctest::Approx(9 * 0.25));
    CHECK(path->cells.size() == 10);
  }

  TEST_CASE("one-cell gap: unreachable at inflate 1, found on retry at 0") {
    const std::vector<std::string> rows = {
        "#########",
        "#...#...#",
        "#...#...#",
        "#...#...#",  // the gap below is the only way through
        "#.......#",
        "#...#...#",
        "#########",
    };
    const LogOddsMap map = map_from_ascii(rows);
    const MapParams p;
    CHECK_FALSE(plan_path(map, {4, 2}, {4, 6}, 1, p).has_value());
    const auto adaptive = plan_path_adaptive(map, {4, 2}, {4, 6}, 1, p);
    REQUIRE(adaptive.has_value());
    CHECK(adaptive->cost_m == doctest::Approx(4 * 0.25));
  }

  TEST_CASE("start swallowed by the dilation still plans") {
    const std::vector<std::string> rows = {
        "#....",
        ".....",
        ".....",
    };
    const LogOddsMap map = map_from_ascii(rows);
    const auto path = plan_path(map, {0, 1}, {2, 4}, 1, MapParams{});
    CHECK(path.has_value());
  }

  TEST_CASE("random maps: cost equals the independent Dijkstra oracle") {
    Rng rng(1234);
    const MapParams p;
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<std::string> rows(20, std::string(20, '.'));
      for (int k = 0; k < 70; ++k)
        rows[rng.uniform_int(0, 19)][rng.uniform_int(0, 19)] = '#';
      for (int k = 0; k < 30; ++k)
        rows[rng.uniform_int(0, 19)][rng.uniform_int(0, 19)] = ' ';
      const LogOddsMap map = map_from_ascii(rows);
      const Cell from{rng.uniform_int(0, 19), rng.uniform_int(0, 19)};
      const Cell to{rng.uniform_int(0, 19), rng.uniform_int(0, 19)};
      const int inflate = rng.uniform_int(0, 1);
      if (map.classify(from) == CellClass::Occupied) continue;

      // The oracle has no start-unblocking rule, so give both sides a start
      // that survives the dilation.
      const double oracle_cost = oracle::map_path_cost(map, from, to, inflate, p);
      if (oracle_cost == kUnreachable) continue;
      const auto path = plan_path(map, from, to, inflate, p);
      REQUIRE(path.has_value());
      CHECK(path->cost_m == doctest::Approx(oracle_cost).epsilon(1e-12));
    }
  }

  TEST_CASE("path never crosses a cell occupied at the inflation used") {
    Rng rng(555);
    const MapParams p;
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<std::string> rows(15, std::string(15, '.'));
      for (int k = 0; k < 40; ++k)
        rows[rng.uniform_int(0, 14)][rng.uniform_int(0, 14)] = '#';
      const LogOddsMap map = map_from_ascii(rows);
      const Cell from{rng.uniform_int(0, 14), rng.uniform_int(0, 14)};
      const Cell to{rng.uniform_int(0, 14), rng.uniform_int(0, 14)};
      const Grid<std::uint8_t> blocked = inflated_occupancy(map, 1);
      // A swallowed start would legitimately lower the effective inflation.
      if (blocked.at({from.row - map.min_row(), from.col - map.min_col()}) != 0)
        continue;
      const auto path = plan_path(map, from, to, 1, p);
      if (!path) continue;
      for (std::size_t i = 1; i < path->cells.size(); ++i) {
        const Cell s{path->cells[i].row - map.min_row(),
                     path->cells[i].col - map.min_col()};
        CHECK(blocked.at(s) == 0);
      }
    }
  }
}

TEST_SUITE("snapshot") {
  TEST_CASE("PGM encoding uses 0/128/255") {
    LogOddsMap map;
    map.reset_bounds(0, 0, 3, 2);
    map.set_occupancy({0, 0}, 2.0, 5.0);
    map.mark_explored({0, 0});
    map.set_occupancy({0, 1}, -2.0, 5.0);
    map.mark_explored({0, 1});
    map.set_occupancy({1, 0}, -2.0, 5.0);
    map.mark_explored({1, 0});
    const std::string pgm = encode_pgm(map);
    REQUIRE(pgm.substr(0, 3) == "P5\n");
    const std::string pixels = pgm.substr(pgm.find("255\n") + 4);
    REQUIRE(pixels.size() == 6);
    CHECK(std::uint8_t(pixels[0]) == 0);    // occupied
    CHECK(std::uint8_t(pixels[1]) == 255);  // free
    CHECK(std::uint8_t(pixels[2]) == 128);  // unknown
  }

  TEST_CASE("snapshot round-trips losslessly") {
    LogOddsMap map = map_from_ascii({"##..  ", "..##  ", "  ...."});
    map.set_robot_id(3);
    map.add_semantic_evidence("chair", {0, 0}, 1.7, 5.0);
    InstanceRegistry reg;
    fuse_instance(reg, "chair", {{0, 0}, {0, 1}}, {0.25, 0.125}, 0.9, {4}, 0.5, 0.25);
    MapSnapshot snap{map, reg, {3, {0.6, 0.4, 2}, {{1, Pose{1.0, 1.0, 0}}}}};
    const MapSnapshot back =
        decode_snapshot(encode_pgm(map), encode_sidecar_json(snap));
    CHECK(back.map == map);
    REQUIRE(back.registry.size() == 1);
    CHECK(back.registry[0].cells == reg[0].cells);
    CHECK(back.registry[0].best_score == reg[0].best_score);
    CHECK(back.registry[0].source_ids == reg[0].source_ids);
    CHECK(back.meta.robot_id == 3);
    CHECK(back.meta.pose == Pose{0.6, 0.4, 2});
    REQUIRE(back.meta.peer_poses.size() == 1);
    CHECK(back.meta.peer_poses[0].first == 1);
  }

  TEST_CASE("base64 round-trip") {
    Rng rng(8);
    for (int len = 0; len < 20; ++len) {
      std::string bytes;
      for (int i = 0; i < len; ++i) bytes += char(rng.uniform_int(0, 255));
      CHECK(base64_decode(base64_encode(bytes)) == bytes);
    }
  }
}
