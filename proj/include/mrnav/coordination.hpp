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

#ifndef MRNAV_COORDINATION_HPP
#define MRNAV_COORDINATION_HPP

#include <optional>
#include <set>
#include <utility>
#include <variant>
#include <vector>

#include "mrnav/alignment.hpp"
#include "mrnav/snapshot.hpp"

namespace mrnav {

struct CommConfig {
  double r_comm_m = 5.0;  // proximity communication range
  int tau = 10;           // full-map cooldown, steps
};

/// Undirected connectivity graph: edge (i, j), i < j, iff the Euclidean
/// distance between the two poses is within r_comm. Euclidean, not geodesic:
/// this models radio, not navigation.
std::vector<std::pair<int, int>> connectivity(const std::vector<Pose>& positions,
                                              const CommConfig& cfg);

// ---------------------------------------------------------------------------
// Messages
// ---------------------------------------------------------------------------

struct IntentTarget {
  enum class Kind : std::uint8_t { Goal, ExploreFrontier };
  Kind kind = Kind::Goal;
  int goal_id = -1;       // Kind::Goal
  Cell frontier_cell{};   // Kind::ExploreFrontier, sender frame

  friend bool operator==(const IntentTarget&, const IntentTarget&) = default;
};

struct FullMapMsg {
  int sender = -1;
  MapSnapshot snapshot;  // map + registry, sender frame
};

struct LocationMsg {
  int sender = -1;
  Pose pose;  // sender frame
};

struct GoalStatusMsg {
  int sender = -1;
  std::set<int> completed;
};

struct IntentMsg {
  int sender = -1;
  IntentTarget target;
  double score = 0.0;  // in [0, 1]
  int priority = 0;    // unique per robot, assigned at init; lower ranks higher
};

using Message = std::variant<FullMapMsg, LocationMsg, GoalStatusMsg, IntentMsg>;

const char* message_kind(const Message& msg);

/// Wire format: JSON with a `kind` tag; FullMap embeds the PGM+sidecar
/// snapshot encoding. Used for trace logging and size accounting.
std::string serialize_message(const Message& msg);

// ---------------------------------------------------------------------------
// Per-neighbor state
// ---------------------------------------------------------------------------

inline constexpr int kNeverSent = std::numeric_limits<int>::min();

struct PeerState {
  int last_fullmap_sent_step = kNeverSent;
  std::optional<AlignmentResult> cached_transform;  // peer frame -> own frame
  std::optional<Pose> last_known_pose;              // own frame, stale until overwritten
  std::optional<IntentMsg> last_known_intent;
};

/// The protocol's view of one robot: everything pairwise exchange reads or
/// writes. The agent decision loop extends this.
struct RobotCoordState {
  int robot_id = 0;
  int priority = 0;
  Pose pose;  // own local frame
  LogOddsMap map;
  InstanceRegistry registry;
  std::set<int> pending_goals;
  std::set<int> completed_goals;  // own finds plus heard
  std::optional<IntentMsg> current_intent;
  std::map<int, PeerState> peers;
  Rng rng{0};
};

/// Messages for one neighbor contact this step: a full map at most every tau
/// steps, lightweight location / goal-status / intent always.
std::vector<Message> plan_exchange(RobotCoordState& self, int neighbor_id, int step,
                                   const CommConfig& cfg);

/// Folds one received message into the robot's state. Map merges happen only
/// under a cached or freshly accepted alignment; every failure path is
/// absorbing.
void apply_message(RobotCoordState& self, const Message& msg,
                   const MapParams& map_params, const AlignParams& align_params);

enum class IntentResolution { Keep, Yield };

/// Yield iff the incoming intent targets the same goal (or the same frontier
/// cell, compared in one frame) with a higher score, or an equal score and a
/// higher-ranked (lower) priority.
IntentResolution resolve_intent(const IntentMsg& self_intent,
                                const IntentMsg& incoming);

// ---------------------------------------------------------------------------
// Frontier weighting (distance-ratio coordination)
// ---------------------------------------------------------------------------

/// w(f) = min over known neighbors of d(f, p_j) / d(f, p_i), distances to the
/// nearest cell of f; with no neighbor information the weight falls back to
/// 1 / d(f, p_i), which reduces to nearest-frontier exploration. Returns
/// -inf when f is unreachable for the robot itself.
double frontier_weight(const Frontier& f, const MapDistanceField& self_field,
                       const std::vector<MapDistanceField>& neighbor_fields);

/// Argmax of frontier_weight; ties break toward the smaller own-distance and
/// then the earlier frontier in the (deterministic) input order. nullopt when
/// no frontier is reachable.
std::optional<std::size_t> select_frontier(
    const std::vector<Frontier>& frontiers, const MapDistanceField& self_field,
    const std::vector<MapDistanceField>& neighbor_fields);

}  // namespace mrnav

#endif  // MRNAV_COORDINATION_HPP
