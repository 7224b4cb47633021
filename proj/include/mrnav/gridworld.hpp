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

#ifndef MRNAV_GRIDWORLD_HPP
#define MRNAV_GRIDWORLD_HPP

#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mrnav/errors.hpp"
#include "mrnav/geometry.hpp"
#include "mrnav/grid.hpp"
#include "mrnav/rng.hpp"

namespace mrnav {

enum class CellState : std::uint8_t { Free = 0, Obstacle = 1 };

/// One forward action covers 25 cm; at the default resolution that is exactly
/// one cell along an axis.
inline constexpr double kForwardStepM = 0.25;
inline constexpr double kDefaultResolutionM = 0.25;

struct ObjectInstance {
  int instance_id = 0;
  std::string category;
  std::vector<Cell> footprint;  // sorted, unique
  Vec2 centroid;                // mean of footprint cell centers, meters
};

/// Ground-truth world: static occupancy plus semantic object instances.
class GridScene {
 public:
  GridScene() = default;
  GridScene(int width, int height, double resolution, std::string scene_id);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  const std::string& scene_id() const { return scene_id_; }

  bool in_bounds(Cell c) const {
    return c.row >= 0 && c.row < height_ && c.col >= 0 && c.col < width_;
  }
  CellState state(Cell c) const { return occupancy_.at(c); }
  bool is_free(Cell c) const { return in_bounds(c) && state(c) == CellState::Free; }
  void set_state(Cell c, CellState s) { occupancy_.at(c) = s; }

  Vec2 cell_center(Cell c) const {
    return {(c.col + 0.5) * resolution_, (c.row + 0.5) * resolution_};
  }
  Cell cell_of(Vec2 p) const {
    return {int(std::floor(p.y / resolution_)), int(std::floor(p.x / resolution_))};
  }
  Cell cell_of(const Pose& p) const { return cell_of(Vec2{p.x, p.y}); }

  const std::vector<ObjectInstance>& instances() const { return instances_; }
  void add_instance(ObjectInstance inst);
  const ObjectInstance* find_instance(int instance_id) const;

  std::size_t free_cell_count() const;

  /// Checks every type invariant; throws ValidationError on the first breach.
  void validate() const;

 private:
  int width_ = 0;
  int height_ = 0;
  double resolution_ = kDefaultResolutionM;
  std::string scene_id_;
  Grid<CellState> occupancy_;
  std::vector<ObjectInstance> instances_;
};

enum class GoalModality { Category, Language, Image };

struct GoalSpec {
  int goal_id = 0;
  GoalModality modality = GoalModality::Category;
  std::set<int> valid_instance_ids;
  double success_radius_m = 1.0;
  std::string label;
};

struct Episode {
  std::string scene_id;
  std::vector<Pose> start_poses;
  std::vector<GoalSpec> goals;
  int max_steps = 500;
  std::uint64_t seed = 0;

  void validate(const GridScene& scene) const;
  const GoalSpec* find_goal(int goal_id) const;
};

// ---------------------------------------------------------------------------
// Scene / episode files (UTF-8 JSON, see README for the schema)
// ---------------------------------------------------------------------------

GridScene load_scene(const std::string& path);
GridScene parse_scene_json(const std::string& text);
std::string scene_to_json(const GridScene& scene);

Episode load_episode(const std::string& path);
Episode parse_episode_json(const std::string& text);
std::string episode_to_json(const Episode& ep);

// ---------------------------------------------------------------------------
// Kinematics
// ---------------------------------------------------------------------------

enum class Action : std::uint8_t { Forward = 0, TurnLeft, TurnRight, Stop };

const char* action_name(Action a);

struct StepResult {
  Pose pose;
  bool blocked = false;  // Forward into an obstacle / out of bounds is a no-op
};

StepResult step_agent(const GridScene& scene, const Pose& pose, Action action);

// ---------------------------------------------------------------------------
// Synthetic observation model
// ---------------------------------------------------------------------------

struct SensorConfig {
  double fov_rad = kPi / 2.0;
  double range_m = 4.0;
};

/// Detection-oracle noise. The all-zero default is the ground-truth-semantics
/// regime: every visible instance is reported with score 1.
struct DetectionNoise {
  double p_miss = 0.0;
  double p_fp = 0.0;
  double score_mean = 1.0;
  double score_sd = 0.0;
};

struct Detection {
  int instance_id = 0;  // negative ids mark injected spurious detections
  std::string category;
  std::vector<Cell> observed_cells;  // sorted
  double score = 1.0;

  bool spurious() const { return instance_id < 0; }
};

struct VisibleCell {
  Cell cell;
  CellState state;

  friend bool operator==(const VisibleCell&, const VisibleCell&) = default;
};

struct Observation {
  int robot_id = 0;
  Pose pose;
  std::vector<VisibleCell> visible;  // sorted by (row, col)
  std::vector<Detection> detections;
};

/// Per-instance noise override table keyed by instance id; instances not
/// listed use the default profile.
using NoiseOverrides = std::map<int, DetectionNoise>;

Observation observe(const GridScene& scene, const Pose& pose, int robot_id,
                    const SensorConfig& sensor, const DetectionNoise& noise,
                    Rng& rng, const NoiseOverrides* overrides = nullptr);

/// Serial reference for the raycast kernel; observe() runs the same rays in
/// parallel when built with OpenMP. Both return the identical sorted cell set.
std::vector<VisibleCell> raycast_visibility_serial(const GridScene& scene,
                                                   const Pose& pose,
                                                   const SensorConfig& sensor);
std::vector<VisibleCell> raycast_visibility(const GridScene& scene,
                                            const Pose& pose,
                                            const SensorConfig& sensor);

/// Angular ray spacing that guarantees no cell within range is skipped.
double ray_angular_step(double resolution, double range);

// ---------------------------------------------------------------------------
// Geodesics over the ground-truth free space
// ---------------------------------------------------------------------------

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

/// Shortest-path distance (meters) from `source` to every Free cell,
/// 8-connected with sqrt(2)-weighted diagonals. Unreachable cells hold +inf.
Grid<double> scene_distance_field(const GridScene& scene, Cell source);

/// Meters, or nullopt when unreachable. Throws InvalidCellError when `to` is
/// out of bounds.
std::optional<double> geodesic_distance(const GridScene& scene, Cell from, Cell to);
std::optional<double> geodesic_distance(const GridScene& scene, const Pose& from,
                                        Cell to);

}  // namespace mrnav

#endif  // MRNAV_GRIDWORLD_HPP
