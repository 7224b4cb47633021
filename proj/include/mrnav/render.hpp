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

#ifndef MRNAV_RENDER_HPP
#define MRNAV_RENDER_HPP

#include <string>

#include "mrnav/alignment.hpp"
#include "mrnav/harness.hpp"
#include "mrnav/snapshot.hpp"

namespace mrnav {

/// Per-robot trajectory polylines with goal-event markers over the scene.
void render_trajectory(const GridScene& scene, const EpisodeTrace& trace,
                       const std::string& out_svg);

/// Map classification with frontier clusters highlighted and their
/// distance-ratio weights annotated (neighbor poses from the snapshot meta).
void render_frontier(const MapSnapshot& snap, const std::string& out_svg,
                     const MapParams& params = {});

/// Four panels: A pre-alignment, B pre-alignment, the aligned overlay
/// (A blue / B red, agreement dark), and the merged map. Files are written as
/// <prefix>_a.svg, <prefix>_b.svg, <prefix>_overlay.svg, <prefix>_merged.svg.
void render_merge_overlay(const MapSnapshot& a, const MapSnapshot& b,
                          const RigidTransform2D& b_to_a,
                          const std::string& out_prefix,
                          const MapParams& params = {});

}  // namespace mrnav

#endif  // MRNAV_RENDER_HPP
