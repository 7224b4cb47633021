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

#include "mrnav/render.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "mrnav/coordination.hpp"

namespace mrnav {

namespace {

constexpr int kCellPx = 12;

const char* kRobotColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                              "#9467bd", "#8c564b"};

struct Svg {
  std::ostringstream body;
  int width_px = 0, height_px = 0;

  void open(int w_cells, int h_cells) {
    width_px = w_cells * kCellPx;
    height_px = h_cells * kCellPx;
  }
  void rect(int col, int row, const char* fill, double opacity = 1.0) {
    body << "<rect x='" << col * kCellPx << "' y='" << row * kCellPx << "' width='"
         << kCellPx << "' height='" << kCellPx << "' fill='" << fill
         << "' fill-opacity='" << opacity << "'/>\n";
  }
  void circle(double cx_cells, double cy_cells, double r_px, const char* fill) {
    body << "<circle cx='" << cx_cells * kCellPx << "' cy='" << cy_cells * kCellPx
         << "' r='" << r_px << "' fill='" << fill << "'/>\n";
  }
  void text(double cx_cells, double cy_cells, const std::string& s) {
    body << "<text x='" << cx_cells * kCellPx << "' y='" << cy_cells * kCellPx
         << "' font-size='" << kCellPx
         << "' font-family='monospace' fill='#111'>" << s << "</text>\n";
  }
  void polyline(const std::vector<std::pair<double, double>>& pts_cells,
                const char* stroke) {
    body << "<polyline fill='none' stroke='" << stroke << "' stroke-width='2' points='";
    for (const auto& [x, y] : pts_cells) body << x * kCellPx << "," << y * kCellPx << " ";
    body << "'/>\n";
  }
  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width_px
        << "' height='" << height_px << "'>\n"
        << "<rect width='100%' height='100%' fill='#fafafa'/>\n"
        << body.str() << "</svg>\n";
  }
};

void draw_map_classification(Svg& svg, const LogOddsMap& map) {
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) {
      const Cell cell{map.min_row() + r, map.min_col() + c};
      switch (map.classify(cell)) {
        case CellClass::Occupied: svg.rect(c, r, "#333333"); break;
        case CellClass::Unknown: svg.rect(c, r, "#c8c8c8"); break;
        case CellClass::FreeExplored: svg.rect(c, r, "#ffffff"); break;
      }
    }
  }
}

}  // namespace

void render_trajectory(const GridScene& scene, const EpisodeTrace& trace,
                       const std::string& out_svg) {
  if (trace.steps.empty()) throw ValidationError("render_trajectory: empty trace");
  Svg svg;
  svg.open(scene.width(), scene.height());
  for (int r = 0; r < scene.height(); ++r)
    for (int c = 0; c < scene.width(); ++c)
      svg.rect(c, r, scene.state({r, c}) == CellState::Obstacle ? "#333333" : "#ffffff");
  for (const auto& inst : scene.instances())
    for (const Cell& c : inst.footprint) svg.rect(c.col, c.row, "#2ca02c", 0.6);

  std::map<int, std::vector<std::pair<double, double>>> paths;
  const double res = scene.resolution();
  for (const TraceStep& ts : trace.steps)
    paths[ts.robot].push_back({ts.pose.x / res, ts.pose.y / res});
  for (const auto& [robot, pts] : paths) {
    const char* color = kRobotColors[robot % 6];
    svg.polyline(pts, color);
    if (!pts.empty()) svg.circle(pts.front().first, pts.front().second, 5, color);
  }
  for (const GoalEvent& ev : trace.goal_events)
    svg.circle(ev.world_pose.x / res, ev.world_pose.y / res, 6,
               ev.valid ? "#ffd700" : "#777777");
  svg.save(out_svg);
}

void render_frontier(const MapSnapshot& snap, const std::string& out_svg,
                     const MapParams& params) {
  const LogOddsMap& map = snap.map;
  if (map.empty()) throw ValidationError("render_frontier: empty map");
  Svg svg;
  svg.open(map.width(), map.height());
  draw_map_classification(svg, map);

  const auto frontiers = extract_frontiers(map, params);
  const Cell pc = map.cell_of(snap.meta.pose);
  const MapDistanceField self_field = map_distance_field(map, pc, 0, params);
  std::vector<MapDistanceField> neighbor_fields;
  for (const auto& [id, pose] : snap.meta.peer_poses)
    neighbor_fields.push_back(map_distance_field(map, map.cell_of(pose), 0, params));

  for (std::size_t i = 0; i < frontiers.size(); ++i) {
    for (const Cell& c : frontiers[i].cells)
      svg.rect(c.col - map.min_col(), c.row - map.min_row(), "#1f77b4", 0.7);
    const double w = frontier_weight(frontiers[i], self_field, neighbor_fields);
    std::ostringstream label;
    label.precision(3);
    label << w;
    const Cell rep = frontiers[i].representative;
    svg.text(rep.col - map.min_col() + 1.2, rep.row - map.min_row() + 0.9, label.str());
  }
  svg.circle(snap.meta.pose.x / map.resolution() - map.min_col(),
             snap.meta.pose.y / map.resolution() - map.min_row(), 5, "#d62728");
  svg.save(out_svg);
}

void render_merge_overlay(const MapSnapshot& a, const MapSnapshot& b,
                          const RigidTransform2D& b_to_a,
                          const std::string& out_prefix, const MapParams& params) {
  if (a.map.empty() || b.map.empty())
    throw ValidationError("render_merge_overlay: empty map");
  {
    Svg svg;
    svg.open(a.map.width(), a.map.height());
    draw_map_classification(svg, a.map);
    svg.save(out_prefix + "_a.svg");
  }
  {
    Svg svg;
    svg.open(b.map.width(), b.map.height());
    draw_map_classification(svg, b.map);
    svg.save(out_prefix + "_b.svg");
  }

  // Overlay in A's frame: A's obstacles blue, B's red, agreement dark.
  LogOddsMap merged = a.map;
  merge_maps(merged, b.map, b_to_a, params);
  {
    Svg svg;
    svg.open(merged.width(), merged.height());
    const RigidTransform2D a_to_b = b_to_a.inverse();
    for (int r = 0; r < merged.height(); ++r) {
      for (int c = 0; c < merged.width(); ++c) {
        const Cell cell{merged.min_row() + r, merged.min_col() + c};
        const bool occ_a = a.map.classify(cell) == CellClass::Occupied;
        const Cell cb = b.map.cell_of(a_to_b.apply(merged.cell_center(cell)));
        const bool occ_b = b.map.classify(cb) == CellClass::Occupied;
        if (occ_a && occ_b) svg.rect(c, r, "#202040");
        else if (occ_a) svg.rect(c, r, "#1f77b4");
        else if (occ_b) svg.rect(c, r, "#d62728");
      }
    }
    svg.save(out_prefix + "_overlay.svg");
  }
  {
    Svg svg;
    svg.open(merged.width(), merged.height());
    draw_map_classification(svg, merged);
    svg.save(out_prefix + "_merged.svg");
  }
}

}  // namespace mrnav
