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

#include "mrnav/gridworld.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <sstream>

#include "json.hpp"

namespace mrnav {

using nlohmann::json;

// ---------------------------------------------------------------------------
// GridScene
// ---------------------------------------------------------------------------

GridScene::GridScene(int width, int height, double resolution, std::string scene_id)
    : width_(width),
      height_(height),
      resolution_(resolution),
      scene_id_(std::move(scene_id)),
      occupancy_(width, height, CellState::Free) {}

void GridScene::add_instance(ObjectInstance inst) {
  std::sort(inst.footprint.begin(), inst.footprint.end());
  inst.footprint.erase(std::unique(inst.footprint.begin(), inst.footprint.end()),
                       inst.footprint.end());
  Vec2 sum{0.0, 0.0};
  for (const Cell& c : inst.footprint) sum = sum + cell_center(c);
  const double n = double(inst.footprint.size());
  inst.centroid = {sum.x / n, sum.y / n};
  instances_.push_back(std::move(inst));
}

const ObjectInstance* GridScene::find_instance(int instance_id) const {
  for (const auto& inst : instances_)
    if (inst.instance_id == instance_id) return &inst;
  return nullptr;
}

std::size_t GridScene::free_cell_count() const {
  std::size_t n = 0;
  for (CellState s : occupancy_.data())
    if (s == CellState::Free) ++n;
  return n;
}

void GridScene::validate() const {
  if (width_ <= 0 || height_ <= 0)
    throw ValidationError("scene '" + scene_id_ + "': empty grid");
  if (resolution_ <= 0.0)
    throw ValidationError("scene '" + scene_id_ + "': resolution must be > 0");
  std::set<int> ids;
  for (const auto& inst : instances_) {
    if (inst.footprint.empty())
      throw ValidationError("instance " + std::to_string(inst.instance_id) +
                            ": empty footprint");
    if (!ids.insert(inst.instance_id).second)
      throw ValidationError("duplicate instance_id " +
                            std::to_string(inst.instance_id));
    for (const Cell& c : inst.footprint)
      if (!in_bounds(c))
        throw ValidationError("instance " + std::to_string(inst.instance_id) +
                              ": footprint cell (" + std::to_string(c.row) + "," +
                              std::to_string(c.col) + ") out of bounds");
  }
}

void Episode::validate(const GridScene& scene) const {
  if (start_poses.empty()) throw ValidationError("episode: no start poses");
  if (goals.empty()) throw ValidationError("episode: no goals");
  for (const Pose& p : start_poses) {
    const Cell c = scene.cell_of(p);
    if (!scene.is_free(c))
      throw ValidationError("episode: start pose not on a Free cell");
    if (p.heading_step < 0 || p.heading_step >= kHeadingSteps)
      throw ValidationError("episode: heading out of range");
  }
  std::set<int> goal_ids;
  for (const GoalSpec& g : goals) {
    if (!goal_ids.insert(g.goal_id).second)
      throw ValidationError("episode: duplicate goal id");
    if (g.valid_instance_ids.empty())
      throw ValidationError("goal " + std::to_string(g.goal_id) +
                            ": no valid instances");
    if (g.success_radius_m <= 0.0)
      throw ValidationError("goal " + std::to_string(g.goal_id) +
                            ": success radius must be > 0");
    for (int id : g.valid_instance_ids)
      if (scene.find_instance(id) == nullptr)
        throw ValidationError("goal " + std::to_string(g.goal_id) +
                              ": unknown instance " + std::to_string(id));
  }
  if (max_steps < 0) throw ValidationError("episode: negative max_steps");
}

const GoalSpec* Episode::find_goal(int goal_id) const {
  for (const GoalSpec& g : goals)
    if (g.goal_id == goal_id) return &g;
  return nullptr;
}

// ---------------------------------------------------------------------------
// JSON I/O
// ---------------------------------------------------------------------------

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_or_throw(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError(std::string("malformed JSON in ") + what);
  return j;
}

GoalModality modality_from_string(const std::string& s) {
  if (s == "category") return GoalModality::Category;
  if (s == "language") return GoalModality::Language;
  if (s == "image") return GoalModality::Image;
  throw ParseError("unknown goal modality '" + s + "'");
}

const char* modality_to_string(GoalModality m) {
  switch (m) {
    case GoalModality::Category: return "category";
    case GoalModality::Language: return "language";
    case GoalModality::Image: return "image";
  }
  return "category";
}

}  // namespace

GridScene parse_scene_json(const std::string& text) {
  const json j = parse_or_throw(text, "scene");
  try {
    const auto rows = j.at("grid").get<std::vector<std::string>>();
    if (rows.empty()) throw ParseError("scene: empty grid");
    const int height = int(rows.size());
    const int width = int(rows.front().size());
    GridScene scene(width, height, j.at("resolution_m").get<double>(),
                    j.at("scene_id").get<std::string>());
    for (int r = 0; r < height; ++r) {
      if (int(rows[r].size()) != width)
        throw ParseError("scene: ragged grid row " + std::to_string(r));
      for (int c = 0; c < width; ++c) {
        const char ch = rows[r][c];
        if (ch == '#')
          scene.set_state({r, c}, CellState::Obstacle);
        else if (ch != '.')
          throw ParseError(std::string("scene: bad grid char '") + ch + "'");
      }
    }
    if (j.contains("instances")) {
      for (const auto& ji : j.at("instances")) {
        ObjectInstance inst;
        inst.instance_id = ji.at("id").get<int>();
        inst.category = ji.at("category").get<std::string>();
        for (const auto& jc : ji.at("cells"))
          inst.footprint.push_back({jc.at(0).get<int>(), jc.at(1).get<int>()});
        if (inst.footprint.empty())
          throw ValidationError("instance " + std::to_string(inst.instance_id) +
                                ": empty footprint");
        for (const Cell& c : inst.footprint)
          if (!scene.in_bounds(c))
            throw ValidationError("instance " + std::to_string(inst.instance_id) +
                                  ": footprint cell out of bounds");
        scene.add_instance(std::move(inst));
      }
    }
    scene.validate();
    return scene;
  } catch (const json::exception& e) {
    throw ParseError(std::string("scene: ") + e.what());
  }
}

GridScene load_scene(const std::string& path) {
  return parse_scene_json(read_file(path));
}

std::string scene_to_json(const GridScene& scene) {
  json j;
  j["scene_id"] = scene.scene_id();
  j["resolution_m"] = scene.resolution();
  std::vector<std::string> rows;
  rows.reserve(scene.height());
  for (int r = 0; r < scene.height(); ++r) {
    std::string row(scene.width(), '.');
    for (int c = 0; c < scene.width(); ++c)
      if (scene.state({r, c}) == CellState::Obstacle) row[c] = '#';
    rows.push_back(std::move(row));
  }
  j["grid"] = rows;
  json ji = json::array();
  for (const auto& inst : scene.instances()) {
    json cells = json::array();
    for (const Cell& c : inst.footprint) cells.push_back({c.row, c.col});
    ji.push_back({{"id", inst.instance_id},
                  {"category", inst.category},
                  {"cells", cells}});
  }
  j["instances"] = ji;
  return j.dump(2);
}

Episode parse_episode_json(const std::string& text) {
  const json j = parse_or_throw(text, "episode");
  try {
    Episode ep;
    ep.scene_id = j.at("scene_id").get<std::string>();
    for (const auto& js : j.at("starts")) {
      const int deg = js.at(2).get<int>();
      if (deg % 30 != 0) throw ParseError("episode: heading not a multiple of 30");
      ep.start_poses.push_back(
          {js.at(0).get<double>(), js.at(1).get<double>(),
           wrap_heading_step(deg / 30)});
    }
    for (const auto& jg : j.at("goals")) {
      GoalSpec g;
      g.goal_id = jg.at("id").get<int>();
      g.modality = modality_from_string(jg.at("modality").get<std::string>());
      for (int id : jg.at("valid_instance_ids")) g.valid_instance_ids.insert(id);
      g.success_radius_m = jg.at("success_radius_m").get<double>();
      g.label = jg.value("label", std::string{});
      ep.goals.push_back(std::move(g));
    }
    ep.max_steps = j.at("max_steps").get<int>();
    ep.seed = j.at("seed").get<std::uint64_t>();
    return ep;
  } catch (const json::exception& e) {
    throw ParseError(std::string("episode: ") + e.what());
  }
}

Episode load_episode(const std::string& path) {
  return parse_episode_json(read_file(path));
}

std::string episode_to_json(const Episode& ep) {
  json j;
  j["scene_id"] = ep.scene_id;
  json starts = json::array();
  for (const Pose& p : ep.start_poses)
    starts.push_back({p.x, p.y, p.heading_step * 30});
  j["starts"] = starts;
  json goals = json::array();
  for (const GoalSpec& g : ep.goals) {
    goals.push_back({{"id", g.goal_id},
                     {"modality", modality_to_string(g.modality)},
                     {"valid_instance_ids", g.valid_instance_ids},
                     {"success_radius_m", g.success_radius_m},
                     {"label", g.label}});
  }
  j["goals"] = goals;
  j["max_steps"] = ep.max_steps;
  j["seed"] = ep.seed;
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Kinematics
// ---------------------------------------------------------------------------

const char* action_name(Action a) {
  switch (a) {
    case Action::Forward: return "Forward";
    case Action::TurnLeft: return "TurnLeft";
    case Action::TurnRight: return "TurnRight";
    case Action::Stop: return "Stop";
  }
  return "Stop";
}

StepResult step_agent(const GridScene& scene, const Pose& pose, Action action) {
  // With +y along grid rows, a clockwise-on-screen right turn increases the
  // heading angle: TurnRight adds pi/6, TurnLeft subtracts it.
  switch (action) {
    case Action::TurnLeft:
      return {{pose.x, pose.y, wrap_heading_step(pose.heading_step - 1)}, false};
    case Action::TurnRight:
      return {{pose.x, pose.y, wrap_heading_step(pose.heading_step + 1)}, false};
    case Action::Stop:
      return {pose, false};
    case Action::Forward: {
      const double a = pose.heading_rad();
      const Pose next{pose.x + kForwardStepM * std::cos(a),
                      pose.y + kForwardStepM * std::sin(a), pose.heading_step};
      const Cell dest = scene.cell_of(next);
      if (!scene.is_free(dest)) return {pose, true};
      return {next, false};
    }
  }
  return {pose, false};
}

// ---------------------------------------------------------------------------
// Raycast visibility
// ---------------------------------------------------------------------------

double ray_angular_step(double resolution, double range) {
  return std::atan2(0.5 * resolution, range);
}

namespace {

/// Amanatides-Woo traversal of the cells crossed by a ray of given length.
/// The visitor returns false to stop (obstacle hit). The starting cell is
/// always visited.
template <typename Visit>
void traverse_ray(Vec2 origin, double angle, double length, double resolution,
                  Visit&& visit) {
  const Vec2 dir{std::cos(angle), std::sin(angle)};
  int col = int(std::floor(origin.x / resolution));
  int row = int(std::floor(origin.y / resolution));
  const int step_col = dir.x > 0 ? 1 : (dir.x < 0 ? -1 : 0);
  const int step_row = dir.y > 0 ? 1 : (dir.y < 0 ? -1 : 0);

  auto boundary_t = [&](double o, double d, int idx, int step) {
    if (step == 0) return std::numeric_limits<double>::infinity();
    const double edge = (step > 0 ? (idx + 1) : idx) * resolution;
    return (edge - o) / d;
  };
  double t_max_x = boundary_t(origin.x, dir.x, col, step_col);
  double t_max_y = boundary_t(origin.y, dir.y, row, step_row);
  const double t_delta_x =
      step_col == 0 ? std::numeric_limits<double>::infinity() : resolution / std::abs(dir.x);
  const double t_delta_y =
      step_row == 0 ? std::numeric_limits<double>::infinity() : resolution / std::abs(dir.y);

  double t = 0.0;
  while (t < length) {
    if (!visit(Cell{row, col})) return;
    if (t_max_x <= t_max_y) {
      t = t_max_x;
      t_max_x += t_delta_x;
      col += step_col;
    } else {
      t = t_max_y;
      t_max_y += t_delta_y;
      row += step_row;
    }
  }
}

/// Cells visited by one ray, in traversal order: stop past range, at the grid
/// edge, or at the first obstacle (which is itself included).
void cast_one_ray(const GridScene& scene, Vec2 origin, double angle, double range,
                  std::vector<Cell>& out) {
  traverse_ray(origin, angle, range, scene.resolution(), [&](Cell c) {
    if (!scene.in_bounds(c)) return false;
    out.push_back(c);
    return scene.state(c) != CellState::Obstacle;
  });
}

std::vector<double> ray_angles(const Pose& pose, const SensorConfig& sensor,
                               double resolution) {
  const double delta = ray_angular_step(resolution, sensor.range_m);
  const int n = std::max(1, int(std::ceil(sensor.fov_rad / delta)));
  std::vector<double> angles(n);
  // Midpoint sampling: no ray sits exactly on the FOV boundary.
  for (int i = 0; i < n; ++i)
    angles[i] = pose.heading_rad() - sensor.fov_rad / 2.0 +
                (i + 0.5) * sensor.fov_rad / n;
  return angles;
}

std::vector<VisibleCell> collect_visible(const GridScene& scene,
                                         const std::vector<std::vector<Cell>>& per_ray) {
  Grid<std::uint8_t> seen(scene.width(), scene.height(), 0);
  for (const auto& ray : per_ray)
    for (const Cell& c : ray) seen.at(c) = 1;
  std::vector<VisibleCell> out;
  for (int r = 0; r < scene.height(); ++r)
    for (int c = 0; c < scene.width(); ++c)
      if (seen.at(r, c)) out.push_back({{r, c}, scene.state({r, c})});
  return out;
}

}  // namespace

std::vector<VisibleCell> raycast_visibility_serial(const GridScene& scene,
                                                   const Pose& pose,
                                                   const SensorConfig& sensor) {
  const auto angles = ray_angles(pose, sensor, scene.resolution());
  std::vector<std::vector<Cell>> per_ray(angles.size());
  for (std::size_t i = 0; i < angles.size(); ++i)
    cast_one_ray(scene, pose.position(), angles[i], sensor.range_m, per_ray[i]);
  return collect_visible(scene, per_ray);
}

std::vector<VisibleCell> raycast_visibility(const GridScene& scene,
                                            const Pose& pose,
                                            const SensorConfig& sensor) {
  const auto angles = ray_angles(pose, sensor, scene.resolution());
  std::vector<std::vector<Cell>> per_ray(angles.size());
  // Threads only pay off once the fan is wide; small fans run serial.
#pragma omp parallel for schedule(static) if (angles.size() >= 256)
  for (int i = 0; i < int(angles.size()); ++i)
    cast_one_ray(scene, pose.position(), angles[i], sensor.range_m, per_ray[i]);
  // The visible set is extracted in sorted cell order, so the result is
  // independent of ray completion order.
  return collect_visible(scene, per_ray);
}

// ---------------------------------------------------------------------------
// Observation
// ---------------------------------------------------------------------------

Observation observe(const GridScene& scene, const Pose& pose, int robot_id,
                    const SensorConfig& sensor, const DetectionNoise& noise,
                    Rng& rng, const NoiseOverrides* overrides) {
  Observation obs;
  obs.robot_id = robot_id;
  obs.pose = pose;
  obs.visible = raycast_visibility(scene, pose, sensor);

  Grid<std::uint8_t> visible_mask(scene.width(), scene.height(), 0);
  for (const VisibleCell& vc : obs.visible) visible_mask.at(vc.cell) = 1;

  // True detections, in instance order so the RNG stream is stable.
  for (const auto& inst : scene.instances()) {
    std::vector<Cell> seen_cells;
    for (const Cell& c : inst.footprint)
      if (visible_mask.at(c)) seen_cells.push_back(c);
    if (seen_cells.empty()) continue;

    DetectionNoise prof = noise;
    if (overrides != nullptr) {
      auto it = overrides->find(inst.instance_id);
      if (it != overrides->end()) prof = it->second;
    }
    if (prof.p_miss > 0.0 && rng.uniform() < prof.p_miss) continue;
    double score = prof.score_mean;
    if (prof.score_sd > 0.0) score = rng.normal(prof.score_mean, prof.score_sd);
    score = std::clamp(score, 0.0, 1.0);
    obs.detections.push_back(
        {inst.instance_id, inst.category, std::move(seen_cells), score});
  }

  // Injected false positive on a random visible Free cell.
  if (noise.p_fp > 0.0 && rng.uniform() < noise.p_fp) {
    std::vector<Cell> free_cells;
    for (const VisibleCell& vc : obs.visible)
      if (vc.state == CellState::Free) free_cells.push_back(vc.cell);
    std::set<std::string> cats;
    for (const auto& inst : scene.instances()) cats.insert(inst.category);
    if (!free_cells.empty() && !cats.empty()) {
      const Cell c = free_cells[rng.uniform_int(0, int(free_cells.size()) - 1)];
      auto it = cats.begin();
      std::advance(it, rng.uniform_int(0, int(cats.size()) - 1));
      const int pseudo_id = -int(1 + (rng.next_u64() % 1000000000ULL));
      double score = noise.score_mean;
      if (noise.score_sd > 0.0) score = rng.normal(noise.score_mean, noise.score_sd);
      obs.detections.push_back({pseudo_id, *it, {c}, std::clamp(score, 0.0, 1.0)});
    }
  }
  return obs;
}

// ---------------------------------------------------------------------------
// Geodesics
// ---------------------------------------------------------------------------

Grid<double> scene_distance_field(const GridScene& scene, Cell source) {
  Grid<double> dist(scene.width(), scene.height(), kUnreachable);
  if (!scene.is_free(source)) return dist;
  const double res = scene.resolution();
  const double diag = res * std::numbers::sqrt2;

  using Entry = std::pair<double, Cell>;
  auto cmp = [](const Entry& a, const Entry& b) {
    return a.first > b.first || (a.first == b.first && a.second > b.second);
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> pq(cmp);
  dist.at(source) = 0.0;
  pq.push({0.0, source});
  while (!pq.empty()) {
    const auto [d, c] = pq.top();
    pq.pop();
    if (d > dist.at(c)) continue;
    for (int k = 0; k < 8; ++k) {
      const Cell n{c.row + kNeighborOffsets[k][0], c.col + kNeighborOffsets[k][1]};
      if (!scene.is_free(n)) continue;
      const double nd = d + (kNeighborDiagonal[k] ? diag : res);
      if (nd < dist.at(n)) {
        dist.at(n) = nd;
        pq.push({nd, n});
      }
    }
  }
  return dist;
}

std::optional<double> geodesic_distance(const GridScene& scene, Cell from, Cell to) {
  if (!scene.in_bounds(to))
    throw InvalidCellError("geodesic_distance: target cell out of bounds");
  const Grid<double> field = scene_distance_field(scene, from);
  const double d = field.at(to);
  if (d == kUnreachable) return std::nullopt;
  return d;
}

std::optional<double> geodesic_distance(const GridScene& scene, const Pose& from,
                                        Cell to) {
  return geodesic_distance(scene, scene.cell_of(from), to);
}

}  // namespace mrnav
