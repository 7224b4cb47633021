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

#ifndef MRNAV_AGENT_HPP
#define MRNAV_AGENT_HPP

#include <optional>
#include <string>
#include <vector>

#include "mrnav/coordination.hpp"

namespace mrnav {

struct AgentParams {
  double s_min = 0.8;                      // goal-match confidence threshold
  int r_goal = 4;                          // goal-region dilation, cells (1 m)
  int r_safe = 1;                          // obstacle inflation for planning
  int r_local = 12;                        // waypoint lookahead radius, cells
  double heading_deadband_rad = kPi / 12;  // 15 degrees
};

/// Each robot maps in a frame anchored at its start cell and rotated by its
/// start heading snapped to a quarter turn, so world cells map to local cells
/// exactly. The world relation exists only in the harness; the robot itself
/// just sees a consistent local coordinate system.
struct LocalFrame {
  Cell anchor;          // world cell of the start pose
  int rot90 = 0;        // quarter turns of the local frame within the world
  double resolution = kDefaultResolutionM;

  static LocalFrame from_start(const Pose& start_world, double resolution);

  Cell to_local(Cell world) const;
  Vec2 to_local(Vec2 world) const;
  Pose to_local(const Pose& world) const;
  Observation to_local(const Observation& world) const;

  RigidTransform2D local_to_world() const;
  RigidTransform2D world_to_local() const;
};

/// Ground-truth transform mapping frame b's coordinates into frame a's.
RigidTransform2D relative_transform(const LocalFrame& a, const LocalFrame& b);

struct Mode {
  enum class Kind : std::uint8_t { Explore, GotoGoal, Done };
  Kind kind = Kind::Explore;
  int goal_id = -1;          // GotoGoal
  int record_local_id = -1;  // GotoGoal: matched registry record
  Cell target{};             // navigation target, local frame

  friend bool operator==(const Mode&, const Mode&) = default;
};

const char* mode_name(Mode::Kind kind);

struct AgentState : RobotCoordState {
  LocalFrame frame;
  std::vector<GoalSpec> goals;  // episode goal table
  Mode mode;
  // Committed turn direction while steering around a blocked heading;
  // cleared on the next forward move. Prevents left/right flip-flops when
  // the desired direction falls between two blocked quantized headings.
  int turn_bias = 0;
  // Committed local waypoint (and the target it serves). Replanning every
  // step can flip between near-equal routes; the commitment carries the
  // robot through such bistable spots.
  std::optional<Cell> waypoint;
  Cell waypoint_target{};
};

struct GoalMatch {
  int goal_id = -1;
  int record_local_id = -1;
  double score = 0.0;
};

/// Highest-score registry record whose oracle identity satisfies a pending
/// goal, subject to score >= s_min. Spurious records never match.
std::optional<GoalMatch> match_goals(const InstanceRegistry& registry,
                                     const std::set<int>& pending_goals,
                                     const std::vector<GoalSpec>& goals,
                                     double s_min);

/// A.2-style goal region selection: dilate the instance footprint, keep
/// FreeExplored cells, cluster them, drop unreachable clusters, take the
/// nearest cluster's cell closest to the instance centroid. nullopt when no
/// reachable free cell exists in the ring.
std::optional<Cell> select_goal_region(const LogOddsMap& map,
                                       const InstanceRecord& record, Cell from,
                                       const MapParams& map_params,
                                       const AgentParams& agent_params);

/// Next local waypoint toward `target`: plan with adaptive obstacle
/// inflation, then take the farthest path cell inside the lookahead radius
/// with a clear straight-line segment, halving the radius when none
/// qualifies. nullopt = Stuck (no path at inflation 0).
std::optional<Cell> next_waypoint(const LogOddsMap& map, const Pose& pose,
                                  Cell target, const MapParams& map_params,
                                  const AgentParams& agent_params);

/// Cells crossed by the straight segment between two cell centers.
std::vector<Cell> segment_cells(Vec2 from, Vec2 to, double resolution);

struct GoalEvent {
  int step = -1;
  int robot_id = -1;
  int goal_id = -1;
  Pose world_pose;
  bool valid = false;  // filled by the harness against ground truth
};

struct DecideResult {
  Action action = Action::Stop;
  std::vector<std::pair<int, Message>> outbox;  // (receiver, message)
  std::optional<int> stop_goal_id;              // Stop-for-goal emitted this step
};

struct DecideContext {
  int step = 0;
  std::vector<int> connected_neighbors;  // ascending robot ids, this step
  MapParams map_params;
  AlignParams align_params;
  CommConfig comm;
  AgentParams agent_params;
};

/// One deterministic decision step: integrate the observation, apply the
/// inbox, re-resolve intents, fire Stop-for-goal when within the success
/// radius with line of sight, otherwise pursue the best goal match or the
/// selected frontier.
DecideResult decide(AgentState& state, const Observation& world_obs,
                    const std::vector<Message>& inbox, const DecideContext& ctx);

}  // namespace mrnav

#endif  // MRNAV_AGENT_HPP
