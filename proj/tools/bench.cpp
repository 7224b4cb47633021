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

// Serial vs OpenMP timing for the data-parallel kernels. Each pair computes
// the identical result (asserted in tests/test_parallel_consistency.cpp);
// this target only reports throughput.

#include <chrono>
#include <cstdio>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mrnav/alignment.hpp"
#include "mrnav/harness.hpp"
#include "mrnav/scene_gen.hpp"

using namespace mrnav;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-22s serial %8.3f ms   parallel %8.3f ms   speedup %.2fx\n", name,
              serial_ms, parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; both columns run serial code\n");
#endif

  GenParams gp;
  gp.width = 96;
  gp.height = 96;
  gp.n_instances = 16;
  const GridScene scene = generate_scene(7, gp);
  const Vec2 center = scene.cell_center({gp.height / 2, gp.width / 2});
  const Pose pose{center.x, center.y, 0};
  SensorConfig sensor;
  sensor.fov_rad = 2 * kPi;
  sensor.range_m = 10.0;

  report("raycast_visibility",
         time_ms([&] { raycast_visibility_serial(scene, pose, sensor); }, 20),
         time_ms([&] { raycast_visibility(scene, pose, sensor); }, 20));

  // A well-explored map for the frontier and merge kernels.
  LogOddsMap map(scene.resolution());
  InstanceRegistry registry;
  MapParams mp;
  Rng rng(11);
  for (int i = 0; i < 60; ++i) {
    const Cell c{rng.uniform_int(1, gp.height - 2), rng.uniform_int(1, gp.width - 2)};
    if (!scene.is_free(c)) continue;
    const Vec2 p = scene.cell_center(c);
    Rng obs_rng = rng.fork(i);
    const Observation obs =
        observe(scene, {p.x, p.y, 0}, 0, sensor, DetectionNoise{}, obs_rng);
    integrate_observation(map, registry, obs, mp);
  }

  report("frontier_cells",
         time_ms([&] { frontier_cells_serial(map); }, 50),
         time_ms([&] { frontier_cells(map); }, 50));

  LogOddsMap dst_serial = map, dst_parallel = map;
  const RigidTransform2D shift{0.0, 0.5, -0.25};
  report("merge_maps",
         time_ms([&] { merge_maps_serial(dst_serial, map, shift, mp); }, 20),
         time_ms([&] { merge_maps(dst_parallel, map, shift, mp); }, 20));

  // RANSAC on synthetic correspondences with heavy outlier contamination.
  std::vector<PointPair> pairs;
  Rng prng(23);
  const RigidTransform2D truth{kPi / 3, 2.0, -1.0};
  for (int i = 0; i < 200; ++i) {
    const Vec2 b{prng.uniform(0, 20), prng.uniform(0, 20)};
    if (i % 2 == 0)
      pairs.push_back({truth.apply(b), b, 0.0});
    else
      pairs.push_back({{prng.uniform(0, 20), prng.uniform(0, 20)}, b, 0.0});
  }
  AlignParams ap;
  ap.ransac_iters = 2000;
  Rng r1(31), r2(31);
  report("estimate_transform",
         time_ms([&] { estimate_transform_serial(pairs, r1, 0.25, ap); }, 10),
         time_ms([&] { estimate_transform(pairs, r2, 0.25, ap); }, 10));

  // Batch of short episodes, parallel across episodes.
  GenParams ep_gp;
  ep_gp.width = 32;
  ep_gp.height = 32;
  ep_gp.max_steps = 60;
  std::vector<GridScene> scenes;
  std::vector<Episode> episodes;
  for (std::uint64_t s = 1; s <= 8; ++s) {
    scenes.push_back(generate_scene(s, ep_gp));
    episodes.push_back(generate_episode(scenes.back(), s, ep_gp));
  }
  const auto run_all = [&](bool) {
    for (std::size_t i = 0; i < scenes.size(); ++i) {
      RunConfig cfg;
      run_episode(scenes[i], episodes[i], cfg);
    }
  };
  const auto run_parallel = [&] {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < int(scenes.size()); ++i) {
      RunConfig cfg;
      run_episode(scenes[i], episodes[i], cfg);
    }
  };
  report("episode_batch", time_ms([&] { run_all(true); }, 3),
         time_ms(run_parallel, 3));
  return 0;
}
