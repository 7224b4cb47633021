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

#include "mrnav/agent.hpp"

#include <algorithm>
#include <cmath>

namespace mrnav {

// ---------------------------------------------------------------------------
// LocalFrame
// ---------------------------------------------------------------------------

LocalFrame LocalFrame::from_start(const Pose& start_world, double resolution) {
  LocalFrame f;
  f.anchor = {int(std::floor(start_world.y / resolution)),
              int(std::floor(start_world.x / resolution))};
  // Start heading snapped to the nearest quarter turn; keeps world cells on
  // the local lattice exactly.
  f.rot90 = ((start_world.heading_step + 1) / 3) % 4;
  f.resolution = resolution;
  return f;
}

Cell LocalFrame::to_local(Cell world) const {
  const int dr = world.row - anchor.row;
  const int dc = world.col - anchor.col;
  switch (rot90) {
    case 1: return {-dc - 1, dr};
    case 2: return {-dr - 1, -dc - 1};
    case 3: return {dc, -dr - 1};
    default: return {dr, dc};
  }
}

Vec2 LocalFrame::to_local(Vec2 world) const {
  static constexpr double kCos[4] = {1.0, 0.0, -1.0, 0.0};
  static constexpr double kSin[4] = {0.0, 1.0, 0.0, -1.0};
  const Vec2 v{world.x - anchor.col * resolution, world.y - anchor.row * resolution};
  const double c = kCos[rot90], s = kSin[rot90];
  return {c * v.x + s * v.y, -s * v.x + c * v.y};
}

Pose LocalFrame::to_local(const Pose& world) const {
  const Vec2 p = to_local(Vec2{world.x, world.y});
  return {p.x, p.y, wrap_heading_step(world.heading_step - 3 * rot90)};
}

Observation LocalFrame::to_local(const Observation& world) const {
  Observation obs;
  obs.robot_id = world.robot_id;
  obs.pose = to_local(world.pose);
  obs.visible.reserve(world.visible.size());
  for (const VisibleCell& vc : world.visible)
    obs.visible.push_back({to_local(vc.cell), vc.state});
  std::sort(obs.visible.begin(), obs.visible.end(),
            [](const VisibleCell& a, const VisibleCell& b) { return a.cell < b.cell; });
  obs.detections.reserve(world.detections.size());
  for (const Detection& d : world.detections) {
    Detection det = d;
    for (Cell& c : det.observed_cells) c = to_local(c);
    std::sort(det.observed_cells.begin(), det.observed_cells.end());
    obs.detections.push_back(std::move(det));
  }
  return obs;
}

RigidTransform2D LocalFrame::local_to_world() const {
  return {rot90 * (kPi / 2.0), anchor.col * resolution, anchor.row * resolution};
}

RigidTransform2D LocalFrame::world_to_local() const {
  return local_to_world().inverse();
}

RigidTransform2D relative_transform(const LocalFrame& a, const LocalFrame& b) {
  return a.world_to_local().compose(b.local_to_world());
}

const char* mode_name(Mode::Kind kind) {
  switch (kind) {
    case Mode::Kind::Explore: return "Explore";
    case Mode::Kind::GotoGoal: return "GotoGoal";
    case Mode::Kind::Done: return "Done";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Goal matching
// ---------------------------------------------------------------------------

namespace {

struct Candidate {
  double score = 0.0;
  int goal_id = -1;
  int record_local_id = -1;
};

bool record_satisfies(const InstanceRecord& rec, const GoalSpec& goal) {
  for (int id : rec.source_ids)
    if (id >= 0 && goal.valid_instance_ids.count(id)) return true;
  return false;
}

std::vector<Candidate> goal_candidates(const InstanceRegistry& registry,
                                       const std::set<int>& pending_goals,
                                       const std::vector<GoalSpec>& goals,
                                       double s_min) {
  std::vector<Candidate> out;
  for (const GoalSpec& goal : goals) {
    if (pending_goals.find(goal.goal_id) == pending_goals.end()) continue;
    for (const InstanceRecord& rec : registry) {
      if (rec.best_score < s_min) continue;
      if (!record_satisfies(rec, goal)) continue;
      out.push_back({rec.best_score, goal.goal_id, rec.local_id});
    }
  }
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.goal_id != b.goal_id) return a.goal_id < b.goal_id;
    return a.record_local_id < b.record_local_id;
  });
  return out;
}

const InstanceRecord* find_record(const InstanceRegistry& registry, int local_id) {
  for (const InstanceRecord& rec : registry)
    if (rec.local_id == local_id) return &rec;
  return nullptr;
}

}  // namespace

std::optional<GoalMatch> match_goals(const InstanceRegistry& registry,
                                     const std::set<int>& pending_goals,
                                     const std::vector<GoalSpec>& goals,
                                     double s_min) {
  const auto cands = goal_candidates(registry, pending_goals, goals, s_min);
  if (cands.empty()) return std::nullopt;
  return GoalMatch{cands.front().goal_id, cands.front().record_local_id,
                   cands.front().score};
}

// ---------------------------------------------------------------------------
// Goal region selection (A.2 shape: dilate, cluster, nearest reachable)
// ---------------------------------------------------------------------------

namespace {

std::optional<Cell> select_goal_region_with_field(const LogOddsMap& map,
                                                  const InstanceRecord& record,
                                                  const MapDistanceField& field,
                                                  const AgentParams& agent_params);

}  // namespace

std::optional<Cell> select_goal_region(const LogOddsMap& map,
                                       const InstanceRecord& record, Cell from,
                                       const MapParams& map_params,
                                       const AgentParams& agent_params) {
  const MapDistanceField field = map_distance_field(map, from, 0, map_params);
  return select_goal_region_with_field(map, record, field, agent_params);
}

namespace {

std::optional<Cell> select_goal_region_with_field(const LogOddsMap& map,
                                                  const InstanceRecord& record,
                                                  const MapDistanceField& field,
                                                  const AgentParams& agent_params) {
  const std::set<Cell> footprint(record.cells.begin(), record.cells.end());
  std::set<Cell> ring;
  for (const Cell& fc : record.cells) {
    for (int dr = -agent_params.r_goal; dr <= agent_params.r_goal; ++dr) {
      for (int dc = -agent_params.r_goal; dc <= agent_params.r_goal; ++dc) {
        const Cell c{fc.row + dr, fc.col + dc};
        if (footprint.count(c)) continue;
        if (map.classify(c) == CellClass::FreeExplored) ring.insert(c);
      }
    }
  }
  if (ring.empty()) return std::nullopt;

  // 8-connected clusters over the ring, in deterministic seed order.
  std::vector<std::vector<Cell>> clusters;
  std::set<Cell> open = ring;
  for (const Cell& seed : ring) {
    if (!open.count(seed)) continue;
    std::vector<Cell> cluster, stack{seed};
    open.erase(seed);
    while (!stack.empty()) {
      const Cell c = stack.back();
      stack.pop_back();
      cluster.push_back(c);
      for (const auto& off : kNeighborOffsets) {
        const Cell n{c.row + off[0], c.col + off[1]};
        auto it = open.find(n);
        if (it != open.end()) {
          open.erase(it);
          stack.push_back(n);
        }
      }
    }
    std::sort(cluster.begin(), cluster.end());
    clusters.push_back(std::move(cluster));
  }

  const std::vector<Cell>* best_cluster = nullptr;
  double best_d = kUnreachable;
  for (const auto& cluster : clusters) {
    double d = kUnreachable;
    for (const Cell& c : cluster) d = std::min(d, field.at(c));
    if (d < best_d) {
      best_d = d;
      best_cluster = &cluster;
    }
  }
  if (best_cluster == nullptr) return std::nullopt;  // every cluster unreachable

  // Nearest the instance centroid; centroid ties resolve toward the robot.
  Cell best = best_cluster->front();
  double best_e = std::numeric_limits<double>::infinity();
  double best_r = std::numeric_limits<double>::infinity();
  for (const Cell& c : *best_cluster) {
    const double e = euclidean(map.cell_center(c), record.centroid);
    const double r = field.at(c);
    if (e < best_e - 1e-12 || (std::abs(e - best_e) <= 1e-12 && r < best_r)) {
      best_e = e;
      best_r = r;
      best = c;
    }
  }
  return best;
}

}  // namespace

// ---------------------------------------------------------------------------
// Local planning (A.4 shape: inflate, line-of-sight filter, adaptive radius)
// ---------------------------------------------------------------------------

std::vector<Cell> segment_cells(Vec2 from, Vec2 to, double resolution) {
  std::vector<Cell> out;
  const Vec2 d = to - from;
  const double length = norm(d);
  const Cell start{int(std::floor(from.y / resolution)),
                   int(std::floor(from.x / resolution))};
  out.push_back(start);
  if (length <= 0.0) return out;
  const Vec2 dir{d.x / length, d.y / length};

  int col = start.col, row = start.row;
  const int step_col = dir.x > 0 ? 1 : (dir.x < 0 ? -1 : 0);
  const int step_row = dir.y > 0 ? 1 : (dir.y < 0 ? -1 : 0);
  auto boundary_t = [&](double o, double dd, int idx, int step) {
    if (step == 0) return std::numeric_limits<double>::infinity();
    const double edge = (step > 0 ? (idx + 1) : idx) * resolution;
    return (edge - o) / dd;
  };
  double t_max_x = boundary_t(from.x, dir.x, col, step_col);
  double t_max_y = boundary_t(from.y, dir.y, row, step_row);
  const double t_dx = step_col == 0 ? std::numeric_limits<double>::infinity()
                                    : resolution / std::abs(dir.x);
  const double t_dy = step_row == 0 ? std::numeric_limits<double>::infinity()
                                    : resolution / std::abs(dir.y);
  double t = 0.0;
  while (true) {
    if (t_max_x <= t_max_y) {
      t = t_max_x;
      t_max_x += t_dx;
      col += step_col;
    } else {
      t = t_max_y;
      t_max_y += t_dy;
      row += step_row;
    }
    if (t >= length) break;
    out.push_back({row, col});
  }
  const Cell end{int(std::floor(to.y / resolution)), int(std::floor(to.x / resolution))};
  if (out.back() != end) out.push_back(end);
  return out;
}

namespace {

bool line_of_sight(const LogOddsMap& map, Vec2 from, Vec2 to) {
  const auto cells = segment_cells(from, to, map.resolution());
  for (std::size_t i = 0; i + 1 < cells.size(); ++i)
    if (map.classify(cells[i]) == CellClass::Occupied) return false;
  return true;
}

int chebyshev(Cell a, Cell b) {
  return std::max(std::abs(a.row - b.row), std::abs(a.col - b.col));
}

}  // namespace

std::optional<Cell> next_waypoint(const LogOddsMap& map, const Pose& pose,
                                  Cell target, const MapParams& map_params,
                                  const AgentParams& agent_params) {
  const Cell pc = map.cell_of(pose);
  const auto path =
      plan_path_adaptive(map, pc, target, agent_params.r_safe, map_params);
  if (!path) return std::nullopt;
  if (path->cells.size() < 2) return path->cells.front();

  for (int radius = agent_params.r_local; radius >= 1; radius /= 2) {
    int last = 0;
    for (std::size_t i = 1; i < path->cells.size(); ++i) {
      if (chebyshev(path->cells[i], pc) > radius) break;
      last = int(i);
    }
    for (int i = last; i >= 1; --i) {
      if (line_of_sight(map, pose.position(), map.cell_center(path->cells[i])))
        return path->cells[i];
    }
  }
  return path->cells[1];  // adjacent step; the planner vouched for it
}

// ---------------------------------------------------------------------------
// decide
// ---------------------------------------------------------------------------

namespace {

bool yielded_to_peer(const AgentState& state, const IntentTarget& target,
                     double score) {
  const IntentMsg mine{state.robot_id, target, score, state.priority};
  for (const auto& [id, peer] : state.peers) {
    if (!peer.last_known_intent) continue;
    if (resolve_intent(mine, *peer.last_known_intent) == IntentResolution::Yield)
      return true;
  }
  return false;
}

/// Within success radius of the matched record with line of sight to it (the
/// record's own footprint never occludes itself).
bool goal_reached(const AgentState& state, const GoalSpec& goal,
                  const InstanceRecord& rec) {
  double best = std::numeric_limits<double>::infinity();
  Cell best_cell = rec.cells.front();
  for (const Cell& c : rec.cells) {
    const double d = euclidean(state.pose.position(), state.map.cell_center(c));
    if (d < best) {
      best = d;
      best_cell = c;
    }
  }
  if (best > goal.success_radius_m) return false;
  const std::set<Cell> own(rec.cells.begin(), rec.cells.end());
  const auto cells = segment_cells(state.pose.position(),
                                   state.map.cell_center(best_cell),
                                   state.map.resolution());
  for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
    if (own.count(cells[i])) continue;
    if (state.map.classify(cells[i]) == CellClass::Occupied) return false;
  }
  return true;
}

struct ExploreChoice {
  std::optional<Cell> target;
};

ExploreChoice choose_frontier(AgentState& state, const DecideContext& ctx,
                              const MapDistanceField& self_field) {
  const auto frontiers = extract_frontiers(state.map, ctx.map_params);
  if (frontiers.empty()) return {};
  // Eq-style weighting needs min over neighbors of d(f, p_j): one
  // multi-source sweep over every known neighbor pose computes that min.
  std::vector<Cell> neighbor_cells;
  for (const auto& [id, peer] : state.peers)
    if (peer.last_known_pose)
      neighbor_cells.push_back(state.map.cell_of(*peer.last_known_pose));
  std::vector<MapDistanceField> neighbor_fields;
  if (!neighbor_cells.empty())
    neighbor_fields.push_back(
        map_distance_field_multi(state.map, neighbor_cells, 0, ctx.map_params));

  // Exploration intents share the goal-conflict mechanism: a peer intent on a
  // frontier cell we can express in our frame may make us yield that cluster.
  std::set<Cell> excluded;
  for (const auto& [id, peer] : state.peers) {
    if (!peer.last_known_intent || !peer.cached_transform) continue;
    const IntentMsg& in = *peer.last_known_intent;
    if (in.target.kind != IntentTarget::Kind::ExploreFrontier) continue;
    const Vec2 p = peer.cached_transform->transform.apply(
        Vec2{(in.target.frontier_cell.col + 0.5) * state.map.resolution(),
             (in.target.frontier_cell.row + 0.5) * state.map.resolution()});
    const Cell local = state.map.cell_of(p);
    const IntentMsg mine{state.robot_id,
                         {IntentTarget::Kind::ExploreFrontier, -1, local},
                         0.5,
                         state.priority};
    IntentMsg theirs = in;
    theirs.target.frontier_cell = local;  // compare in one frame
    if (resolve_intent(mine, theirs) == IntentResolution::Yield) excluded.insert(local);
  }

  // Switching hysteresis: while the robot already works a frontier, an
  // alternative must beat it by a clear margin, or target flapping between
  // comparable frontiers turns the robot in circles whenever peers update.
  const auto pick = [&](const std::vector<Frontier>& fs) -> std::optional<Cell> {
    const auto idx = select_frontier(fs, self_field, neighbor_fields);
    if (!idx) return std::nullopt;
    if (state.mode.kind == Mode::Kind::Explore) {
      for (const Frontier& f : fs) {
        bool holds_current = false;
        for (const Cell& c : f.cells)
          if (c == state.mode.target) holds_current = true;
        if (!holds_current) continue;
        const double w_cur = frontier_weight(f, self_field, neighbor_fields);
        const double w_new = frontier_weight(fs[*idx], self_field, neighbor_fields);
        if (w_cur > 0.0 && w_new < 1.25 * w_cur) return f.representative;
        break;
      }
    }
    return fs[*idx].representative;
  };
  if (!excluded.empty()) {
    std::vector<Frontier> filtered;
    for (const Frontier& f : frontiers) {
      bool contested = false;
      for (const Cell& c : f.cells)
        if (excluded.count(c)) {
          contested = true;
          break;
        }
      if (!contested) filtered.push_back(f);
    }
    if (!filtered.empty()) {
      if (auto cell = pick(filtered)) return {*cell};
    }
    // Everything contested or unreachable: better to overlap than to stall.
  }
  if (auto cell = pick(frontiers)) return {*cell};
  return {};
}

bool frontier_target_alive(const AgentState& state, Cell target) {
  if (state.map.classify(target) != CellClass::FreeExplored) return false;
  bool borders_unknown = false;
  for (const auto& off : kNeighbor4Offsets)
    if (state.map.classify({target.row + off[0], target.col + off[1]}) ==
        CellClass::Unknown)
      borders_unknown = true;
  if (!borders_unknown) return false;
  // Arrival forces a fresh pick; a target later walled off is caught by the
  // planner and handled in navigate().
  return chebyshev(state.map.cell_of(state.pose), target) > 1;
}

/// Lazily computed traversal-cost field from the robot's cell: goal-region
/// selection and frontier weighting need it, a quiet exploration step does
/// not.
struct LazySelfField {
  const AgentState& state;
  const DecideContext& ctx;
  std::optional<MapDistanceField> field;

  const MapDistanceField& get() {
    if (!field)
      field = map_distance_field(state.map, state.map.cell_of(state.pose), 0,
                                 ctx.map_params);
    return *field;
  }
};

void recompute_mode(AgentState& state, const DecideContext& ctx,
                    bool fresh_peer_info) {
  if (state.pending_goals.empty()) {
    state.mode = {Mode::Kind::Done, -1, -1, {}};
    return;
  }
  LazySelfField self_field{state, ctx, {}};
  for (const Candidate& cand :
       goal_candidates(state.registry, state.pending_goals, state.goals,
                       ctx.agent_params.s_min)) {
    if (yielded_to_peer(state, {IntentTarget::Kind::Goal, cand.goal_id, {}},
                        cand.score))
      continue;
    const InstanceRecord* rec = find_record(state.registry, cand.record_local_id);
    if (rec == nullptr) continue;
    const auto target = select_goal_region_with_field(state.map, *rec,
                                                      self_field.get(),
                                                      ctx.agent_params);
    if (!target) continue;  // infeasible region: keep exploring instead
    state.mode = {Mode::Kind::GotoGoal, cand.goal_id, cand.record_local_id, *target};
    return;
  }
  // Committed frontier targets persist until they die, are reached, or new
  // peer information arrives; re-running the argmax every step makes the
  // robot oscillate between frontiers on opposite sides.
  if (state.mode.kind == Mode::Kind::Explore && !fresh_peer_info &&
      frontier_target_alive(state, state.mode.target))
    return;
  const ExploreChoice choice = choose_frontier(state, ctx, self_field.get());
  if (choice.target) {
    state.mode = {Mode::Kind::Explore, -1, -1, *choice.target};
    return;
  }
  // No selectable cluster yet. If raw frontier cells remain (clusters below
  // the noise threshold, e.g. right after the first observation), scan in
  // place instead of declaring the map exhausted.
  if (!frontier_cells(state.map).empty()) {
    state.mode = {Mode::Kind::Explore, -1, -1, state.map.cell_of(state.pose)};
    return;
  }
  // No reachable frontier and no matched goal.
  state.mode = {Mode::Kind::Done, -1, -1, {}};
}

void update_intent(AgentState& state) {
  switch (state.mode.kind) {
    case Mode::Kind::GotoGoal: {
      const InstanceRecord* rec = find_record(state.registry, state.mode.record_local_id);
      const double score = rec ? rec->best_score : 0.0;
      state.current_intent =
          IntentMsg{state.robot_id,
                    {IntentTarget::Kind::Goal, state.mode.goal_id, {}},
                    score,
                    state.priority};
      break;
    }
    case Mode::Kind::Explore:
      state.current_intent =
          IntentMsg{state.robot_id,
                    {IntentTarget::Kind::ExploreFrontier, -1, state.mode.target},
                    0.5,
                    state.priority};
      break;
    case Mode::Kind::Done:
      state.current_intent.reset();
      break;
  }
}

/// Forward-collision check against the robot's own map. A destination point
/// can land exactly on a cell boundary (headings at 60 degrees move by
/// dyadic fractions), and a rotated frame floors boundary points to the
/// opposite cell than the world does; checking every floor candidate keeps
/// the check aligned with the world's collision rule.
bool forward_blocked_on_map(const LogOddsMap& map, const Pose& pose) {
  const double a = pose.heading_rad();
  const Vec2 next{pose.x + kForwardStepM * std::cos(a),
                  pose.y + kForwardStepM * std::sin(a)};
  const double fx = next.x / map.resolution();
  const double fy = next.y / map.resolution();
  constexpr double kEps = 1e-9;
  std::vector<int> cols{int(std::floor(fx))};
  std::vector<int> rows{int(std::floor(fy))};
  if (std::abs(fx - std::round(fx)) < kEps)
    cols = {int(std::round(fx)) - 1, int(std::round(fx))};
  if (std::abs(fy - std::round(fy)) < kEps)
    rows = {int(std::round(fy)) - 1, int(std::round(fy))};
  for (int r : rows)
    for (int c : cols)
      if (map.classify({r, c}) == CellClass::Occupied) return true;
  return false;
}

Action steer(AgentState& state, Cell waypoint, const AgentParams& agent_params) {
  const bool blocked = forward_blocked_on_map(state.map, state.pose);
  // An active escape rotation keeps its direction until a forward move lands.
  if (state.turn_bias != 0) {
    if (blocked)
      return state.turn_bias > 0 ? Action::TurnRight : Action::TurnLeft;
    state.turn_bias = 0;
    return Action::Forward;
  }
  const Vec2 wc = state.map.cell_center(waypoint);
  const double desired =
      std::atan2(wc.y - state.pose.y, wc.x - state.pose.x);
  const double err = wrap_angle(desired - state.pose.heading_rad());
  if (std::abs(err) > agent_params.heading_deadband_rad)
    return err > 0 ? Action::TurnRight : Action::TurnLeft;
  if (blocked) {
    state.turn_bias = err >= 0 ? 1 : -1;
    return state.turn_bias > 0 ? Action::TurnRight : Action::TurnLeft;
  }
  return Action::Forward;
}

bool committed_waypoint_valid(const AgentState& state, const AgentParams& params) {
  if (!state.waypoint) return false;
  if (state.waypoint_target != state.mode.target) return false;
  const Cell pc = state.map.cell_of(state.pose);
  if (*state.waypoint == pc) return false;  // reached
  if (chebyshev(pc, *state.waypoint) > 2 * params.r_local) return false;
  if (state.map.classify(*state.waypoint) == CellClass::Occupied) return false;
  return line_of_sight(state.map, state.pose.position(),
                       state.map.cell_center(*state.waypoint));
}

Action navigate(AgentState& state, const DecideContext& ctx) {
  if (state.mode.kind == Mode::Kind::Done) return Action::Stop;
  const Cell pc = state.map.cell_of(state.pose);
  if (pc == state.mode.target) {
    state.waypoint.reset();
    return Action::TurnLeft;  // scan in place
  }
  if (committed_waypoint_valid(state, ctx.agent_params))
    return steer(state, *state.waypoint, ctx.agent_params);
  state.waypoint.reset();
  const auto wp = next_waypoint(state.map, state.pose, state.mode.target,
                                ctx.map_params, ctx.agent_params);
  if (!wp) {
    // Target unreachable even at inflation 0; scan, and force a fresh
    // selection next step (a target at the robot's own cell never survives
    // the liveness check).
    state.mode = {Mode::Kind::Explore, -1, -1, pc};
    return Action::TurnLeft;
  }
  if (*wp == pc) return Action::TurnLeft;
  state.waypoint = *wp;
  state.waypoint_target = state.mode.target;
  return steer(state, *wp, ctx.agent_params);
}

}  // namespace

DecideResult decide(AgentState& state, const Observation& world_obs,
                    const std::vector<Message>& inbox, const DecideContext& ctx) {
  DecideResult result;

  const Observation obs = state.frame.to_local(world_obs);
  state.pose = obs.pose;
  integrate_observation(state.map, state.registry, obs, ctx.map_params);

  // A committed exploration target is reconsidered only when the exchange
  // materially changed the picture: a map merge, a peer moving by more than
  // a couple of cells, or a changed peer intent.
  const auto peer_digest = [&] {
    std::map<int, std::pair<std::optional<Cell>, std::optional<IntentTarget>>> d;
    for (const auto& [id, peer] : state.peers) {
      std::optional<Cell> cell;
      if (peer.last_known_pose) cell = state.map.cell_of(*peer.last_known_pose);
      std::optional<IntentTarget> intent;
      if (peer.last_known_intent) intent = peer.last_known_intent->target;
      d[id] = {cell, intent};
    }
    return d;
  };
  const auto before = peer_digest();
  bool merged = false;
  for (const Message& msg : inbox) {
    if (std::holds_alternative<FullMapMsg>(msg)) {
      const int sender = std::get<FullMapMsg>(msg).sender;
      const bool had = state.peers.count(sender) != 0 &&
                       state.peers[sender].cached_transform.has_value();
      apply_message(state, msg, ctx.map_params, ctx.align_params);
      if (state.peers[sender].cached_transform.has_value() || had) merged = true;
    } else {
      apply_message(state, msg, ctx.map_params, ctx.align_params);
    }
  }
  bool fresh_peer_info = merged;
  if (!fresh_peer_info) {
    const auto after = peer_digest();
    for (const auto& [id, entry] : after) {
      auto it = before.find(id);
      if (it == before.end()) {
        if (entry.first || entry.second) fresh_peer_info = true;
      } else {
        const auto& [old_cell, old_intent] = it->second;
        if (entry.second != old_intent) fresh_peer_info = true;
        if (entry.first.has_value() != old_cell.has_value())
          fresh_peer_info = true;
        else if (entry.first && old_cell &&
                 (std::abs(entry.first->row - old_cell->row) > 2 ||
                  std::abs(entry.first->col - old_cell->col) > 2))
          fresh_peer_info = true;
      }
      if (fresh_peer_info) break;
    }
  }
  for (int g : state.completed_goals) state.pending_goals.erase(g);

  bool stopped_for_goal = false;
  if (state.mode.kind == Mode::Kind::GotoGoal) {
    if (state.pending_goals.find(state.mode.goal_id) == state.pending_goals.end()) {
      state.mode = {};  // goal completed elsewhere; replan below
    } else {
      const GoalSpec* goal = nullptr;
      for (const GoalSpec& g : state.goals)
        if (g.goal_id == state.mode.goal_id) goal = &g;
      const InstanceRecord* rec = find_record(state.registry, state.mode.record_local_id);
      if (goal != nullptr && rec != nullptr && !rec->cells.empty() &&
          goal_reached(state, *goal, *rec)) {
        result.stop_goal_id = state.mode.goal_id;
        state.pending_goals.erase(state.mode.goal_id);
        state.completed_goals.insert(state.mode.goal_id);
        stopped_for_goal = true;
      }
    }
  }

  recompute_mode(state, ctx, fresh_peer_info);
  update_intent(state);

  result.action = stopped_for_goal ? Action::Stop : navigate(state, ctx);

  for (int neighbor : ctx.connected_neighbors)
    for (Message& msg : plan_exchange(state, neighbor, ctx.step, ctx.comm))
      result.outbox.emplace_back(neighbor, std::move(msg));
  return result;
}

}  // namespace mrnav
