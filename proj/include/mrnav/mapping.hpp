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

#ifndef MRNAV_MAPPING_HPP
#define MRNAV_MAPPING_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mrnav/gridworld.hpp"

namespace mrnav {

/// Log-odds increments and map tuning. Occupancy is sticky: one obstacle hit
/// survives two free-space observations but is eventually overridden.
struct MapParams {
  double l_occ = 0.9;          // evidence added per Obstacle observation
  double l_free = 0.4;         // evidence removed per Free observation
  double l_sem = 0.9;          // semantic evidence per detection
  double l_max = 5.0;          // clamp magnitude for all channels
  int f_min = 3;               // minimum frontier cluster size, cells
  double r_assoc = 0.5;        // instance association radius, meters
  double lambda_unknown = 2.0; // path-cost multiplier through unknown cells
};

enum class CellClass : std::uint8_t { Occupied, FreeExplored, Unknown };

/// A robot's private multi-channel map in its own local frame. Cell indices
/// may be negative; storage grows on demand.
class LogOddsMap {
 public:
  explicit LogOddsMap(double resolution = kDefaultResolutionM)
      : resolution_(resolution) {}

  double resolution() const { return resolution_; }
  int robot_id() const { return robot_id_; }
  void set_robot_id(int id) { robot_id_ = id; }

  int min_row() const { return min_row_; }
  int min_col() const { return min_col_; }
  int height() const { return height_; }
  int width() const { return width_; }
  bool empty() const { return width_ == 0 || height_ == 0; }

  bool contains(Cell c) const {
    return c.row >= min_row_ && c.row < min_row_ + height_ && c.col >= min_col_ &&
           c.col < min_col_ + width_;
  }

  double occupancy(Cell c) const;
  bool explored(Cell c) const;  // false outside storage
  CellClass classify(Cell c) const;

  double semantic(const std::string& category, Cell c) const;
  const std::map<std::string, std::vector<double>>& semantic_channels() const {
    return semantic_;
  }

  Vec2 cell_center(Cell c) const {
    return {(c.col + 0.5) * resolution_, (c.row + 0.5) * resolution_};
  }
  Cell cell_of(Vec2 p) const {
    return {int(std::floor(p.y / resolution_)), int(std::floor(p.x / resolution_))};
  }
  Cell cell_of(const Pose& p) const { return cell_of(Vec2{p.x, p.y}); }

  /// Grows storage to contain the cell (with slack), preserving content.
  void ensure_contains(Cell c);

  /// Sets exact storage bounds on an empty map (snapshot decode path).
  void reset_bounds(int min_row, int min_col, int width, int height);

  void add_occupancy_evidence(Cell c, double delta, double l_max);
  void add_semantic_evidence(const std::string& category, Cell c, double delta,
                             double l_max);
  void mark_explored(Cell c);

  /// Raw write used by merging; still clamps to l_max.
  void set_occupancy(Cell c, double value, double l_max);
  void set_semantic(const std::string& category, Cell c, double value, double l_max);

  /// Pre-creates a semantic channel so later writes never reshape the
  /// channel table (needed before parallel merging).
  void ensure_semantic_channel(const std::string& category);

  friend bool operator==(const LogOddsMap& a, const LogOddsMap& b) = default;

 private:
  std::size_t index(Cell c) const {
    return std::size_t(c.row - min_row_) * width_ + (c.col - min_col_);
  }

  double resolution_;
  int robot_id_ = -1;
  int min_row_ = 0, min_col_ = 0;
  int width_ = 0, height_ = 0;
  std::vector<double> occupancy_;
  std::vector<std::uint8_t> explored_;
  std::map<std::string, std::vector<double>> semantic_;
};

/// Geometric stand-in for instance memory: per-instance evidence accumulated
/// across observations and merges. source_ids carries the detector's oracle
/// identities (negative = spurious).
struct InstanceRecord {
  int local_id = 0;
  std::string category;
  std::vector<Cell> cells;  // sorted, unique, local frame
  Vec2 centroid;
  double best_score = 0.0;
  int observation_count = 0;
  std::set<int> source_ids;
};

using InstanceRegistry = std::vector<InstanceRecord>;

/// Folds one observation (already expressed in the map's local frame) into
/// the map and the instance registry.
void integrate_observation(LogOddsMap& map, InstanceRegistry& registry,
                           const Observation& obs, const MapParams& params);

/// Fuses one detection-shaped record into the registry (association by
/// category + centroid distance <= r_assoc). Used by both observation
/// integration and registry merging.
void fuse_instance(InstanceRegistry& registry, const std::string& category,
                   const std::vector<Cell>& cells, Vec2 centroid, double score,
                   const std::set<int>& source_ids, double r_assoc,
                   double resolution);

// ---------------------------------------------------------------------------
// Frontiers
// ---------------------------------------------------------------------------

struct Frontier {
  std::vector<Cell> cells;  // FreeExplored, each 4-adjacent to Unknown
  Cell representative;
};

/// Sorted frontier-cell scan; the OpenMP variant parallelizes over rows and
/// returns the identical list.
std::vector<Cell> frontier_cells_serial(const LogOddsMap& map);
std::vector<Cell> frontier_cells(const LogOddsMap& map);

/// Maximal 8-connected clusters of size >= f_min, ordered by
/// (size desc, representative row, col).
std::vector<Frontier> extract_frontiers(const LogOddsMap& map, const MapParams& params);

// ---------------------------------------------------------------------------
// Planning
// ---------------------------------------------------------------------------

struct PathResult {
  std::vector<Cell> cells;  // from .. to inclusive
  double cost_m = 0.0;
};

/// Shortest 8-connected path avoiding cells Occupied after dilation by
/// `inflate` (Chebyshev radius). Unknown cells cost lambda_unknown times
/// more. If `from` itself is swallowed by the dilation the radius is reduced
/// stepwise until it is free. Returns nullopt when unreachable at this level.
std::optional<PathResult> plan_path(const LogOddsMap& map, Cell from, Cell to,
                                    int inflate, const MapParams& params);

/// Retries plan_path from `inflate` down to 0 (adaptive clearance).
std::optional<PathResult> plan_path_adaptive(const LogOddsMap& map, Cell from,
                                             Cell to, int inflate,
                                             const MapParams& params);

/// Dijkstra cost field (meters) from `source` over the map's traversable
/// cells with the same cost model as plan_path at the given inflation.
struct MapDistanceField {
  int min_row = 0, min_col = 0;
  Grid<double> dist;

  double at(Cell c) const {
    const Cell s{c.row - min_row, c.col - min_col};
    if (!dist.in_bounds(s)) return kUnreachable;
    return dist.at(s);
  }
};

MapDistanceField map_distance_field(const LogOddsMap& map, Cell source,
                                    int inflate, const MapParams& params);

/// Multi-source variant: distance to the nearest of `sources` per cell
/// (exactly the min over per-source fields, in one sweep).
MapDistanceField map_distance_field_multi(const LogOddsMap& map,
                                          const std::vector<Cell>& sources,
                                          int inflate, const MapParams& params);

/// Occupied mask after Chebyshev dilation, over map storage bounds.
Grid<std::uint8_t> inflated_occupancy(const LogOddsMap& map, int inflate);

}  // namespace mrnav

#endif  // MRNAV_MAPPING_HPP
