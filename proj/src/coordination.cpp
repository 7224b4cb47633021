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

#include "mrnav/coordination.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace mrnav {

using nlohmann::json;

std::vector<std::pair<int, int>> connectivity(const std::vector<Pose>& positions,
                                              const CommConfig& cfg) {
  std::vector<std::pair<int, int>> edges;
  for (std::size_t i = 0; i < positions.size(); ++i)
    for (std::size_t j = i + 1; j < positions.size(); ++j)
      if (euclidean(positions[i].position(), positions[j].position()) <=
          cfg.r_comm_m)
        edges.emplace_back(int(i), int(j));
  return edges;
}

const char* message_kind(const Message& msg) {
  switch (msg.index()) {
    case 0: return "FullMap";
    case 1: return "Location";
    case 2: return "GoalStatus";
    case 3: return "Intent";
  }
  return "?";
}

std::string serialize_message(const Message& msg) {
  json j;
  j["kind"] = message_kind(msg);
  if (const auto* fm = std::get_if<FullMapMsg>(&msg)) {
    j["sender"] = fm->sender;
    j["pgm_b64"] = base64_encode(encode_pgm(fm->snapshot.map));
    j["sidecar"] = sidecar_json(fm->snapshot);
  } else if (const auto* loc = std::get_if<LocationMsg>(&msg)) {
    j["sender"] = loc->sender;
    j["pose"] = {loc->pose.x, loc->pose.y, loc->pose.heading_step * 30};
  } else if (const auto* gs = std::get_if<GoalStatusMsg>(&msg)) {
    j["sender"] = gs->sender;
    j["completed"] = gs->completed;
  } else if (const auto* in = std::get_if<IntentMsg>(&msg)) {
    j["sender"] = in->sender;
    if (in->target.kind == IntentTarget::Kind::Goal) {
      j["target"] = {{"goal_id", in->target.goal_id}};
    } else {
      j["target"] = {{"frontier_cell",
                      {in->target.frontier_cell.row, in->target.frontier_cell.col}}};
    }
    j["score"] = in->score;
    j["priority"] = in->priority;
  }
  return j.dump();
}

std::vector<Message> plan_exchange(RobotCoordState& self, int neighbor_id, int step,
                                   const CommConfig& cfg) {
  PeerState& peer = self.peers[neighbor_id];
  std::vector<Message> out;
  const bool never_sent = peer.last_fullmap_sent_step == kNeverSent;
  if (never_sent || step - peer.last_fullmap_sent_step >= cfg.tau) {
    MapSnapshot snap;
    snap.map = self.map;
    snap.registry = self.registry;
    snap.meta.robot_id = self.robot_id;
    snap.meta.pose = self.pose;
    for (const auto& [id, ps] : self.peers)
      if (ps.last_known_pose) snap.meta.peer_poses.emplace_back(id, *ps.last_known_pose);
    out.push_back(FullMapMsg{self.robot_id, std::move(snap)});
    peer.last_fullmap_sent_step = step;
  }
  out.push_back(LocationMsg{self.robot_id, self.pose});
  out.push_back(GoalStatusMsg{self.robot_id, self.completed_goals});
  if (self.current_intent) out.push_back(*self.current_intent);
  return out;
}

void apply_message(RobotCoordState& self, const Message& msg,
                   const MapParams& map_params, const AlignParams& align_params) {
  if (const auto* fm = std::get_if<FullMapMsg>(&msg)) {
    PeerState& peer = self.peers[fm->sender];
    if (!peer.cached_transform) {
      // First usable overlap: estimate, validate, and only then merge. A
      // rejected or failed alignment leaves the robot operating on its own
      // map; later contacts may succeed with more explored overlap.
      const auto result = align_maps(self.map, self.registry, fm->snapshot.map,
                                     fm->snapshot.registry, self.rng, align_params);
      if (!result || !result->accepted) return;
      peer.cached_transform = *result;
    }
    const RigidTransform2D& t = peer.cached_transform->transform;
    merge_maps(self.map, fm->snapshot.map, t, map_params);
    merge_registry(self.registry, fm->snapshot.registry, t, self.map.resolution(),
                   map_params);
    return;
  }
  if (const auto* loc = std::get_if<LocationMsg>(&msg)) {
    PeerState& peer = self.peers[loc->sender];
    if (!peer.cached_transform) return;  // untransformable without an alignment
    const RigidTransform2D& t = peer.cached_transform->transform;
    const Vec2 p = t.apply(loc->pose.position());
    const double heading = loc->pose.heading_rad() + t.theta;
    const int step = wrap_heading_step(int(std::lround(heading / kHeadingStepRad)));
    peer.last_known_pose = Pose{p.x, p.y, step};
    return;
  }
  if (const auto* gs = std::get_if<GoalStatusMsg>(&msg)) {
    for (int goal : gs->completed) {
      self.completed_goals.insert(goal);
      self.pending_goals.erase(goal);
    }
    return;
  }
  if (const auto* in = std::get_if<IntentMsg>(&msg)) {
    self.peers[in->sender].last_known_intent = *in;
    return;
  }
}

IntentResolution resolve_intent(const IntentMsg& self_intent,
                                const IntentMsg& incoming) {
  if (self_intent.target != incoming.target) return IntentResolution::Keep;
  if (incoming.score > self_intent.score) return IntentResolution::Yield;
  if (incoming.score == self_intent.score &&
      incoming.priority < self_intent.priority)
    return IntentResolution::Yield;
  return IntentResolution::Keep;
}

namespace {

double nearest_cell_distance(const Frontier& f, const MapDistanceField& field) {
  double best = kUnreachable;
  for (const Cell& c : f.cells) best = std::min(best, field.at(c));
  return best;
}

}  // namespace

double frontier_weight(const Frontier& f, const MapDistanceField& self_field,
                       const std::vector<MapDistanceField>& neighbor_fields) {
  double d_self = nearest_cell_distance(f, self_field);
  if (d_self == kUnreachable) return -std::numeric_limits<double>::infinity();
  // The robot standing on a frontier cell would make the ratio undefined;
  // clamping keeps that frontier maximally attractive instead.
  d_self = std::max(d_self, 1e-6);
  double d_min = kUnreachable;
  for (const auto& nf : neighbor_fields)
    d_min = std::min(d_min, nearest_cell_distance(f, nf));
  if (d_min == kUnreachable) return 1.0 / d_self;  // no usable neighbor info
  return d_min / d_self;
}

std::optional<std::size_t> select_frontier(
    const std::vector<Frontier>& frontiers, const MapDistanceField& self_field,
    const std::vector<MapDistanceField>& neighbor_fields) {
  std::optional<std::size_t> best;
  double best_w = -std::numeric_limits<double>::infinity();
  double best_d = kUnreachable;
  for (std::size_t i = 0; i < frontiers.size(); ++i) {
    const double w = frontier_weight(frontiers[i], self_field, neighbor_fields);
    if (w == -std::numeric_limits<double>::infinity()) continue;
    const double d = nearest_cell_distance(frontiers[i], self_field);
    if (!best || w > best_w || (w == best_w && d < best_d)) {
      best = i;
      best_w = w;
      best_d = d;
    }
  }
  return best;
}

}  // namespace mrnav
