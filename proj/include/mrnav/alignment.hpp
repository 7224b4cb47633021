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

#ifndef MRNAV_ALIGNMENT_HPP
#define MRNAV_ALIGNMENT_HPP

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mrnav/mapping.hpp"
#include "mrnav/rng.hpp"

namespace mrnav {

struct AlignParams {
  // Corner detection (Harris response on the occupied grid, explored region)
  int max_corners = 64;
  double harris_k = 0.04;
  double min_response_rel = 0.01;  // threshold relative to the peak response
  int c_max = 64;                  // candidate pairs kept

  // Radial descriptor: 8 annuli of width 2 cells (radius 16 cells),
  // occupied-cell counts normalized by annulus area.
  static constexpr int kAnnuli = 8;
  static constexpr int kAnnulusWidth = 1;
  double d_max = 0.35;  // landmark descriptor distance gate

  // RANSAC
  int ransac_iters = 500;
  double epsilon_in_factor = 1.5;  // inlier residual <= factor * resolution
  int k_min = 4;                   // minimum consensus

  // IoU validation
  double iou_min = 0.6;
  int a_min = 60;  // minimum overlap-explored cells
};

/// Candidate correspondence: point `a` in the destination map's frame,
/// point `b` in the source map's frame (meters).
struct PointPair {
  Vec2 a;
  Vec2 b;
  double desc_dist = 0.0;
};

struct CornerPoint {
  Cell cell;
  Vec2 position;  // cell center, meters
  double response = 0.0;
};

/// Rotation-invariant occupied-cell histogram over concentric annuli.
struct RadialDescriptor {
  std::array<double, AlignParams::kAnnuli> bins{};
};

double descriptor_distance(const RadialDescriptor& a, const RadialDescriptor& b);
RadialDescriptor radial_descriptor(const LogOddsMap& map, Cell center);

std::vector<CornerPoint> detect_corners(const LogOddsMap& map,
                                        const AlignParams& params);

/// Cross-map corner pairs ranked by descriptor distance; throws
/// NoFeaturesError when either map has fewer than 3 corners.
std::vector<PointPair> corner_candidates(const LogOddsMap& map_dst,
                                         const LogOddsMap& map_src,
                                         const AlignParams& params);

/// Same-category instance centroid pairs whose local obstacle context
/// matches (descriptor distance <= d_max). Empty list allowed.
std::vector<PointPair> landmark_candidates(const InstanceRegistry& reg_dst,
                                           const InstanceRegistry& reg_src,
                                           const LogOddsMap& map_dst,
                                           const LogOddsMap& map_src,
                                           const AlignParams& params);

struct TransformEstimate {
  RigidTransform2D transform;  // maps source-frame points into dst frame
  std::vector<int> inliers;    // indices into the candidate list
};

/// RANSAC over minimal 2-pair samples with a closed-form least-squares refit
/// over the best consensus. nullopt when consensus < k_min. The OpenMP
/// variant evaluates iterations in parallel and returns the identical result.
std::optional<TransformEstimate> estimate_transform_serial(
    const std::vector<PointPair>& candidates, Rng& rng, double resolution,
    const AlignParams& params);
std::optional<TransformEstimate> estimate_transform(
    const std::vector<PointPair>& candidates, Rng& rng, double resolution,
    const AlignParams& params);

struct AlignmentResult {
  RigidTransform2D transform;  // src frame -> dst frame
  int inlier_count = 0;
  double iou = 0.0;
  bool accepted = false;
};

/// IoU of occupied cells over the region explored in both maps, with `t`
/// warping src into dst. Accepted iff iou >= iou_min and the overlap has at
/// least a_min explored cells.
AlignmentResult validate_alignment(const LogOddsMap& map_dst,
                                   const LogOddsMap& map_src,
                                   const RigidTransform2D& t,
                                   const AlignParams& params);

/// Full pipeline: corner + landmark candidates, RANSAC, IoU validation.
/// nullopt when no transform could be estimated at all.
std::optional<AlignmentResult> align_maps(const LogOddsMap& map_dst,
                                          const InstanceRegistry& reg_dst,
                                          const LogOddsMap& map_src,
                                          const InstanceRegistry& reg_src,
                                          Rng& rng, const AlignParams& params);

/// Abs-max log-odds fusion of src into dst under transform `t`
/// (destination wins ties; evidence is never summed).
void merge_maps_serial(LogOddsMap& dst, const LogOddsMap& src,
                       const RigidTransform2D& t, const MapParams& params);
void merge_maps(LogOddsMap& dst, const LogOddsMap& src, const RigidTransform2D& t,
                const MapParams& params);

/// Warps a source-frame registry into dst frame and fuses it record by record.
void merge_registry(InstanceRegistry& dst, const InstanceRegistry& src,
                    const RigidTransform2D& t, double resolution,
                    const MapParams& params);

/// Per-robot cache of accepted alignments keyed by neighbor id.
class TransformCache {
 public:
  void store(int neighbor_id, const AlignmentResult& result);
  const AlignmentResult* find(int neighbor_id) const;
  std::size_t size() const { return entries_.size(); }
  const std::map<int, AlignmentResult>& entries() const { return entries_; }

 private:
  std::map<int, AlignmentResult> entries_;  // accepted only
};

std::string alignment_to_json(const AlignmentResult& result);

/// Process-wide count of estimate_transform invocations. The cached-transform
/// path must never re-estimate; tests audit that through this counter.
long estimate_transform_call_count();
void reset_estimate_transform_call_count();

}  // namespace mrnav

#endif  // MRNAV_ALIGNMENT_HPP
