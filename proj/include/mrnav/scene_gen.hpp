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

#ifndef MRNAV_SCENE_GEN_HPP
#define MRNAV_SCENE_GEN_HPP

#include "mrnav/gridworld.hpp"

namespace mrnav {

/// Seeded rooms-and-corridors generator: BSP wall splits with door gaps keep
/// the free space connected; instance footprints only land where they cannot
/// disconnect it.
struct GenParams {
  int width = 40;
  int height = 40;
  double resolution = kDefaultResolutionM;
  int min_room = 7;    // stop splitting below twice this side length
  int door_width = 3;  // cells; must clear the frontier cluster minimum (f_min)
  int n_instances = 8;
  int n_goals = 5;
  int n_starts = 4;
  double success_radius_m = 1.0;
  int max_steps = 200;
  std::vector<std::string> categories = {"chair", "table",  "plant", "sofa",
                                         "bed",   "toilet", "tv",    "sink"};
};

GridScene generate_scene(std::uint64_t seed, const GenParams& params);
Episode generate_episode(const GridScene& scene, std::uint64_t seed,
                         const GenParams& params);

}  // namespace mrnav

#endif  // MRNAV_SCENE_GEN_HPP
