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

#include "mrnav/scene_gen.hpp"

#include <algorithm>

namespace mrnav {

namespace {

std::size_t flood_count(const GridScene& scene, Cell seed) {
  if (!scene.is_free(seed)) return 0;
  Grid<std::uint8_t> seen(scene.width(), scene.height(), 0);
  std::vector<Cell> stack{seed};
  seen.at(seed) = 1;
  std::size_t count = 0;
  while (!stack.empty()) {
    const Cell c = stack.back();
    stack.pop_back();
    ++count;
    for (const auto& off : kNeighbor4Offsets) {
      const Cell n{c.row + off[0], c.col + off[1]};
      if (scene.is_free(n) && !seen.at(n)) {
        seen.at(n) = 1;
        stack.push_back(n);
      }
    }
  }
  return count;
}

Cell first_free(const GridScene& scene) {
  for (int r = 0; r < scene.height(); ++r)
    for (int c = 0; c < scene.width(); ++c)
      if (scene.is_free({r, c})) return {r, c};
  return {-1, -1};
}

bool connected(const GridScene& scene) {
  const Cell seed = first_free(scene);
  if (seed.row < 0) return false;
  return flood_count(scene, seed) == scene.free_cell_count();
}

void split(GridScene& scene, Rng& rng, int r0, int c0, int r1, int c1,
           const GenParams& p) {
  const int h = r1 - r0 + 1, w = c1 - c0 + 1;
  const bool split_rows = h >= w;
  const int extent = split_rows ? h : w;
  if (extent < 2 * p.min_room + 1) return;

  if (split_rows) {
    const int wall = r0 + p.min_room + rng.uniform_int(0, extent - 2 * p.min_room - 1);
    const int door = c0 + rng.uniform_int(0, w - p.door_width);
    for (int c = c0; c <= c1; ++c)
      if (c < door || c >= door + p.door_width)
        scene.set_state({wall, c}, CellState::Obstacle);
    split(scene, rng, r0, c0, wall - 1, c1, p);
    split(scene, rng, wall + 1, c0, r1, c1, p);
  } else {
    const int wall = c0 + p.min_room + rng.uniform_int(0, extent - 2 * p.min_room - 1);
    const int door = r0 + rng.uniform_int(0, h - p.door_width);
    for (int r = r0; r <= r1; ++r)
      if (r < door || r >= door + p.door_width)
        scene.set_state({r, wall}, CellState::Obstacle);
    split(scene, rng, r0, c0, r1, wall - 1, p);
    split(scene, rng, r0, wall + 1, r1, c1, p);
  }
}

std::vector<Cell> random_free_cells(const GridScene& scene, Rng& rng, int count) {
  std::vector<Cell> free;
  for (int r = 0; r < scene.height(); ++r)
    for (int c = 0; c < scene.width(); ++c)
      if (scene.is_free({r, c})) free.push_back({r, c});
  std::vector<Cell> out;
  std::set<Cell> used;
  int guard = 0;
  while (int(out.size()) < count && guard++ < 10000) {
    const Cell c = free[rng.uniform_int(0, int(free.size()) - 1)];
    if (used.insert(c).second) out.push_back(c);
  }
  return out;
}

}  // namespace

GridScene generate_scene(std::uint64_t seed, const GenParams& p) {
  Rng rng = Rng(seed).fork(0x5CE7EULL);
  GridScene scene(p.width, p.height, p.resolution,
                  "gen_" + std::to_string(seed));
  for (int r = 0; r < p.height; ++r) {
    scene.set_state({r, 0}, CellState::Obstacle);
    scene.set_state({r, p.width - 1}, CellState::Obstacle);
  }
  for (int c = 0; c < p.width; ++c) {
    scene.set_state({0, c}, CellState::Obstacle);
    scene.set_state({p.height - 1, c}, CellState::Obstacle);
  }
  split(scene, rng, 1, 1, p.height - 2, p.width - 2, p);

  // Furniture: 1x1 or 1x2 footprints that keep the free space connected.
  int placed = 0, next_id = 1, guard = 0;
  while (placed < p.n_instances && guard++ < 500) {
    const Cell c{rng.uniform_int(2, p.height - 3), rng.uniform_int(2, p.width - 3)};
    const bool wide = rng.uniform() < 0.5;
    std::vector<Cell> footprint{c};
    if (wide) footprint.push_back({c.row, c.col + 1});
    bool ok = true;
    for (const Cell& f : footprint) {
      for (int dr = -1; dr <= 1 && ok; ++dr)
        for (int dc = -1; dc <= 1; ++dc)
          if (!scene.is_free({f.row + dr, f.col + dc})) {
            ok = false;
            break;
          }
    }
    if (!ok) continue;
    for (const Cell& f : footprint) scene.set_state(f, CellState::Obstacle);
    if (!connected(scene)) {
      for (const Cell& f : footprint) scene.set_state(f, CellState::Free);
      continue;
    }
    ObjectInstance inst;
    inst.instance_id = next_id++;
    inst.category = p.categories[placed % p.categories.size()];
    inst.footprint = footprint;
    scene.add_instance(std::move(inst));
    ++placed;
  }
  scene.validate();
  return scene;
}

Episode generate_episode(const GridScene& scene, std::uint64_t seed,
                         const GenParams& p) {
  Rng rng = Rng(seed).fork(0xEB150DEULL);
  Episode ep;
  ep.scene_id = scene.scene_id();
  ep.max_steps = p.max_steps;
  ep.seed = seed;

  for (const Cell& c : random_free_cells(scene, rng, p.n_starts)) {
    const Vec2 center = scene.cell_center(c);
    ep.start_poses.push_back({center.x, center.y, rng.uniform_int(0, 11)});
  }

  // One goal per distinct category, order shuffled by the seed.
  std::vector<std::string> cats;
  for (const auto& inst : scene.instances())
    if (std::find(cats.begin(), cats.end(), inst.category) == cats.end())
      cats.push_back(inst.category);
  for (int i = int(cats.size()) - 1; i > 0; --i)
    std::swap(cats[i], cats[rng.uniform_int(0, i)]);
  const int n_goals = std::min<int>(p.n_goals, int(cats.size()));
  static constexpr GoalModality kModalities[3] = {
      GoalModality::Category, GoalModality::Language, GoalModality::Image};
  for (int g = 0; g < n_goals; ++g) {
    GoalSpec spec;
    spec.goal_id = g;
    spec.modality = kModalities[g % 3];
    spec.label = cats[g];
    spec.success_radius_m = p.success_radius_m;
    for (const auto& inst : scene.instances())
      if (inst.category == cats[g]) spec.valid_instance_ids.insert(inst.instance_id);
    ep.goals.push_back(std::move(spec));
  }
  ep.validate(scene);
  return ep;
}

}  // namespace mrnav
