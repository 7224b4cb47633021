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

#include "mrnav/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace mrnav {

namespace {
constexpr int kGrowMargin = 4;
constexpr double kSqrt2 = std::numbers::sqrt2;
}  // namespace

// ---------------------------------------------------------------------------
// LogOddsMap
// ---------------------------------------------------------------------------

double LogOddsMap::occupancy(Cell c) const {
  return contains(c) ? occupancy_[index(c)] : 0.0;
}

bool LogOddsMap::explored(Cell c) const {
  return contains(c) && explored_[index(c)] != 0;
}

CellClass LogOddsMap::classify(Cell c) const {
  if (!explored(c)) return CellClass::Unknown;
  // Occupied only when accumulated evidence exceeds zero; exactly zero is
  // still free.
  return occupancy_[index(c)] > 0.0 ? CellClass::Occupied : CellClass::FreeExplored;
}

double LogOddsMap::semantic(const std::string& category, Cell c) const {
  if (!contains(c)) return 0.0;
  auto it = semantic_.find(category);
  if (it == semantic_.end()) return 0.0;
  return it->second[index(c)];
}

void LogOddsMap::ensure_contains(Cell c) {
  if (contains(c)) return;
  int new_min_row = min_row_, new_min_col = min_col_;
  int new_max_row = min_row_ + height_ - 1, new_max_col = min_col_ + width_ - 1;
  if (empty()) {
    new_min_row = c.row - kGrowMargin;
    new_min_col = c.col - kGrowMargin;
    new_max_row = c.row + kGrowMargin;
    new_max_col = c.col + kGrowMargin;
  } else {
    new_min_row = std::min(new_min_row, c.row - kGrowMargin);
    new_min_col = std::min(new_min_col, c.col - kGrowMargin);
    new_max_row = std::max(new_max_row, c.row + kGrowMargin);
    new_max_col = std::max(new_max_col, c.col + kGrowMargin);
  }
  const int new_w = new_max_col - new_min_col + 1;
  const int new_h = new_max_row - new_min_row + 1;

  std::vector<double> occ(std::size_t(new_w) * new_h, 0.0);
  std::vector<std::uint8_t> expl(std::size_t(new_w) * new_h, 0);
  std::map<std::string, std::vector<double>> sem;
  for (const auto& [cat, _] : semantic_)
    sem[cat].assign(std::size_t(new_w) * new_h, 0.0);

  for (int r = 0; r < height_; ++r) {
    for (int col = 0; col < width_; ++col) {
      const std::size_t src = std::size_t(r) * width_ + col;
      const std::size_t dst =
          std::size_t(r + min_row_ - new_min_row) * new_w + (col + min_col_ - new_min_col);
      occ[dst] = occupancy_[src];
      expl[dst] = explored_[src];
      for (auto& [cat, grid] : sem) grid[dst] = semantic_.at(cat)[src];
    }
  }
  min_row_ = new_min_row;
  min_col_ = new_min_col;
  width_ = new_w;
  height_ = new_h;
  occupancy_ = std::move(occ);
  explored_ = std::move(expl);
  semantic_ = std::move(sem);
}

void LogOddsMap::reset_bounds(int min_row, int min_col, int width, int height) {
  min_row_ = min_row;
  min_col_ = min_col;
  width_ = width;
  height_ = height;
  occupancy_.assign(std::size_t(width) * height, 0.0);
  explored_.assign(std::size_t(width) * height, 0);
  semantic_.clear();
}

void LogOddsMap::add_occupancy_evidence(Cell c, double delta, double l_max) {
  ensure_contains(c);
  double& v = occupancy_[index(c)];
  v = std::clamp(v + delta, -l_max, l_max);
}

void LogOddsMap::add_semantic_evidence(const std::string& category, Cell c,
                                       double delta, double l_max) {
  ensure_contains(c);
  auto it = semantic_.find(category);
  if (it == semantic_.end()) {
    it = semantic_.emplace(category, std::vector<double>(std::size_t(width_) * height_, 0.0))
             .first;
  }
  double& v = it->second[index(c)];
  v = std::clamp(v + delta, -l_max, l_max);
}

void LogOddsMap::ensure_semantic_channel(const std::string& category) {
  if (semantic_.find(category) == semantic_.end())
    semantic_.emplace(category,
                      std::vector<double>(std::size_t(width_) * height_, 0.0));
}

void LogOddsMap::mark_explored(Cell c) {
  ensure_contains(c);
  explored_[index(c)] = 1;
}

void LogOddsMap::set_occupancy(Cell c, double value, double l_max) {
  ensure_contains(c);
  occupancy_[index(c)] = std::clamp(value, -l_max, l_max);
}

void LogOddsMap::set_semantic(const std::string& category, Cell c, double value,
                              double l_max) {
  ensure_contains(c);
  auto it = semantic_.find(category);
  if (it == semantic_.end()) {
    it = semantic_.emplace(category, std::vector<double>(std::size_t(width_) * height_, 0.0))
             .first;
  }
  it->second[index(c)] = std::clamp(value, -l_max, l_max);
}

// ---------------------------------------------------------------------------
// Integration
// ---------------------------------------------------------------------------

void fuse_instance(InstanceRegistry& registry, const std::string& category,
                   const std::vector<Cell>& cells, Vec2 centroid, double score,
                   const std::set<int>& source_ids, double r_assoc,
                   double resolution) {
  InstanceRecord* best = nullptr;
  double best_d = r_assoc;
  for (auto& rec : registry) {
    if (rec.category != category) continue;
    const double d = euclidean(rec.centroid, centroid);
    if (d <= best_d) {
      best_d = d;
      best = &rec;
    }
  }
  if (best == nullptr) {
    InstanceRecord rec;
    rec.local_id = registry.empty() ? 0 : registry.back().local_id + 1;
    rec.category = category;
    rec.cells = cells;
    std::sort(rec.cells.begin(), rec.cells.end());
    rec.cells.erase(std::unique(rec.cells.begin(), rec.cells.end()), rec.cells.end());
    rec.centroid = centroid;
    rec.best_score = score;
    rec.observation_count = 1;
    rec.source_ids = source_ids;
    registry.push_back(std::move(rec));
    return;
  }
  best->cells.insert(best->cells.end(), cells.begin(), cells.end());
  std::sort(best->cells.begin(), best->cells.end());
  best->cells.erase(std::unique(best->cells.begin(), best->cells.end()),
                    best->cells.end());
  Vec2 sum{0.0, 0.0};
  for (const Cell& c : best->cells)
    sum = sum + Vec2{(c.col + 0.5) * resolution, (c.row + 0.5) * resolution};
  best->centroid = {sum.x / double(best->cells.size()),
                    sum.y / double(best->cells.size())};
  best->best_score = std::max(best->best_score, score);
  best->observation_count += 1;
  best->source_ids.insert(source_ids.begin(), source_ids.end());
}

void integrate_observation(LogOddsMap& map, InstanceRegistry& registry,
                           const Observation& obs, const MapParams& params) {
  for (const VisibleCell& vc : obs.visible) {
    if (vc.state == CellState::Obstacle)
      map.add_occupancy_evidence(vc.cell, params.l_occ, params.l_max);
    else
      map.add_occupancy_evidence(vc.cell, -params.l_free, params.l_max);
    map.mark_explored(vc.cell);
  }
  for (const Detection& det : obs.detections) {
    Vec2 sum{0.0, 0.0};
    for (const Cell& c : det.observed_cells) {
      map.add_semantic_evidence(det.category, c, params.l_sem, params.l_max);
      sum = sum + map.cell_center(c);
    }
    if (det.observed_cells.empty()) continue;
    const double n = double(det.observed_cells.size());
    fuse_instance(registry, det.category, det.observed_cells,
                  {sum.x / n, sum.y / n}, det.score, {det.instance_id},
                  params.r_assoc, map.resolution());
  }
}

// ---------------------------------------------------------------------------
// Frontiers
// ---------------------------------------------------------------------------

namespace {

bool is_frontier_cell(const LogOddsMap& map, Cell c) {
  if (map.classify(c) != CellClass::FreeExplored) return false;
  for (const auto& off : kNeighbor4Offsets) {
    if (map.classify({c.row + off[0], c.col + off[1]}) == CellClass::Unknown)
      return true;
  }
  return false;
}

}  // namespace

std::vector<Cell> frontier_cells_serial(const LogOddsMap& map) {
  std::vector<Cell> out;
  for (int r = map.min_row(); r < map.min_row() + map.height(); ++r)
    for (int c = map.min_col(); c < map.min_col() + map.width(); ++c)
      if (is_frontier_cell(map, {r, c})) out.push_back({r, c});
  return out;
}

std::vector<Cell> frontier_cells(const LogOddsMap& map) {
  const int h = map.height();
  std::vector<std::vector<Cell>> per_row(std::max(h, 0));
#pragma omp parallel for schedule(static) if (h >= 64)
  for (int i = 0; i < h; ++i) {
    const int r = map.min_row() + i;
    for (int c = map.min_col(); c < map.min_col() + map.width(); ++c)
      if (is_frontier_cell(map, {r, c})) per_row[i].push_back({r, c});
  }
  std::vector<Cell> out;
  for (const auto& row : per_row) out.insert(out.end(), row.begin(), row.end());
  return out;
}

std::vector<Frontier> extract_frontiers(const LogOddsMap& map,
                                        const MapParams& params) {
  const std::vector<Cell> cells = frontier_cells(map);
  std::set<Cell> open(cells.begin(), cells.end());

  std::vector<Frontier> frontiers;
  for (const Cell& seed : cells) {
    if (open.find(seed) == open.end()) continue;
    // 8-connected flood fill over frontier cells.
    std::vector<Cell> cluster;
    std::vector<Cell> stack{seed};
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
    if (int(cluster.size()) < params.f_min) continue;
    std::sort(cluster.begin(), cluster.end());
    double mr = 0.0, mc = 0.0;
    for (const Cell& c : cluster) {
      mr += c.row;
      mc += c.col;
    }
    mr /= double(cluster.size());
    mc /= double(cluster.size());
    Cell rep = cluster.front();
    double best = std::numeric_limits<double>::infinity();
    for (const Cell& c : cluster) {
      const double d = (c.row - mr) * (c.row - mr) + (c.col - mc) * (c.col - mc);
      if (d < best) {
        best = d;
        rep = c;
      }
    }
    frontiers.push_back({std::move(cluster), rep});
  }
  std::sort(frontiers.begin(), frontiers.end(),
            [](const Frontier& a, const Frontier& b) {
              if (a.cells.size() != b.cells.size())
                return a.cells.size() > b.cells.size();
              return a.representative < b.representative;
            });
  return frontiers;
}

// ---------------------------------------------------------------------------
// Planning
// ---------------------------------------------------------------------------

Grid<std::uint8_t> inflated_occupancy(const LogOddsMap& map, int inflate) {
  Grid<std::uint8_t> blocked(map.width(), map.height(), 0);
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) {
      const Cell cell{map.min_row() + r, map.min_col() + c};
      if (map.classify(cell) != CellClass::Occupied) continue;
      for (int dr = -inflate; dr <= inflate; ++dr) {
        for (int dc = -inflate; dc <= inflate; ++dc) {
          const Cell n{r + dr, c + dc};
          if (n.row >= 0 && n.row < map.height() && n.col >= 0 && n.col < map.width())
            blocked.at(n) = 1;
        }
      }
    }
  }
  return blocked;
}

namespace {

struct PlanGrid {
  const LogOddsMap& map;
  Grid<std::uint8_t> blocked;

  Cell to_storage(Cell c) const { return {c.row - map.min_row(), c.col - map.min_col()}; }
  bool traversable(Cell c) const {
    const Cell s = to_storage(c);
    return blocked.in_bounds(s) && blocked.at(s) == 0;
  }
};

double enter_cost(const LogOddsMap& map, Cell c, bool diagonal,
                  const MapParams& params) {
  const double base = map.resolution() * (diagonal ? kSqrt2 : 1.0);
  return map.classify(c) == CellClass::Unknown ? base * params.lambda_unknown : base;
}

int unblock_from(const PlanGrid& pg, const LogOddsMap& map, Cell from, int inflate) {
  int eff = inflate;
  while (eff > 0) {
    Grid<std::uint8_t> blocked = inflated_occupancy(map, eff);
    const Cell s = pg.to_storage(from);
    if (blocked.in_bounds(s) && blocked.at(s) == 0) break;
    --eff;
  }
  return eff;
}

}  // namespace

std::optional<PathResult> plan_path(const LogOddsMap& map, Cell from, Cell to,
                                    int inflate, const MapParams& params) {
  if (!map.contains(from) || !map.contains(to)) return std::nullopt;

  PlanGrid pg{map, inflated_occupancy(map, inflate)};
  if (!pg.traversable(from)) {
    // Start swallowed by the dilation: shrink the radius until it is free.
    const int eff = unblock_from(pg, map, from, inflate);
    pg.blocked = inflated_occupancy(map, eff);
    if (!pg.traversable(from)) return std::nullopt;
  }
  if (!pg.traversable(to)) return std::nullopt;

  const int w = map.width(), h = map.height();
  const std::size_t n_cells = std::size_t(w) * h;
  std::vector<double> g(n_cells, kUnreachable);
  std::vector<int> parent(n_cells, -1);
  auto idx = [&](Cell c) {
    return std::size_t(c.row - map.min_row()) * w + (c.col - map.min_col());
  };
  auto octile = [&](Cell c) {
    const double dr = std::abs(c.row - to.row), dc = std::abs(c.col - to.col);
    return map.resolution() *
           (std::max(dr, dc) + (kSqrt2 - 1.0) * std::min(dr, dc));
  };

  using Entry = std::tuple<double, double, int, int>;  // f, h, row, col
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  g[idx(from)] = 0.0;
  pq.push({octile(from), octile(from), from.row, from.col});
  while (!pq.empty()) {
    const auto [f, hh, row, col] = pq.top();
    pq.pop();
    const Cell c{row, col};
    const double gc = g[idx(c)];
    if (f > gc + octile(c) + 1e-12) continue;
    if (c == to) break;
    for (int k = 0; k < 8; ++k) {
      const Cell nb{c.row + kNeighborOffsets[k][0], c.col + kNeighborOffsets[k][1]};
      if (!map.contains(nb) || !pg.traversable(nb)) continue;
      const double nd = gc + enter_cost(map, nb, kNeighborDiagonal[k], params);
      if (nd < g[idx(nb)]) {
        g[idx(nb)] = nd;
        parent[idx(nb)] = int(idx(c));
        pq.push({nd + octile(nb), octile(nb), nb.row, nb.col});
      }
    }
  }
  if (g[idx(to)] == kUnreachable) return std::nullopt;

  PathResult result;
  result.cost_m = g[idx(to)];
  Cell c = to;
  while (true) {
    result.cells.push_back(c);
    if (c == from) break;
    const int p = parent[idx(c)];
    c = {map.min_row() + p / w, map.min_col() + p % w};
  }
  std::reverse(result.cells.begin(), result.cells.end());
  return result;
}

std::optional<PathResult> plan_path_adaptive(const LogOddsMap& map, Cell from,
                                             Cell to, int inflate,
                                             const MapParams& params) {
  for (int level = inflate; level >= 0; --level) {
    if (auto path = plan_path(map, from, to, level, params)) return path;
  }
  return std::nullopt;
}

MapDistanceField map_distance_field_multi(const LogOddsMap& map,
                                          const std::vector<Cell>& sources,
                                          int inflate, const MapParams& params) {
  const int w = map.width(), h = map.height();
  MapDistanceField field{map.min_row(), map.min_col(),
                         Grid<double>(w, h, kUnreachable)};
  if (w == 0 || h == 0) return field;

  // Per-cell entry cost, or <0 for blocked; classification runs once per
  // cell instead of once per relaxation.
  const Grid<std::uint8_t> blocked = inflated_occupancy(map, inflate);
  std::vector<double> cost(std::size_t(w) * h, -1.0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t i = std::size_t(r) * w + c;
      if (blocked.at(r, c)) continue;
      const CellClass cls = map.classify({map.min_row() + r, map.min_col() + c});
      cost[i] = map.resolution() *
                (cls == CellClass::Unknown ? params.lambda_unknown : 1.0);
    }
  }

  std::vector<double>& dist = field.dist.data();
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  for (const Cell& source : sources) {
    if (!map.contains(source)) continue;
    const std::size_t i =
        std::size_t(source.row - map.min_row()) * w + (source.col - map.min_col());
    if (cost[i] < 0.0) continue;
    dist[i] = 0.0;
    pq.push({0.0, int(i)});
  }
  while (!pq.empty()) {
    const auto [d, i] = pq.top();
    pq.pop();
    if (d > dist[i]) continue;
    const int r = i / w, c = i % w;
    for (int k = 0; k < 8; ++k) {
      const int nr = r + kNeighborOffsets[k][0], nc = c + kNeighborOffsets[k][1];
      if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
      const int ni = nr * w + nc;
      if (cost[ni] < 0.0) continue;
      const double nd = d + cost[ni] * (kNeighborDiagonal[k] ? kSqrt2 : 1.0);
      if (nd < dist[ni]) {
        dist[ni] = nd;
        pq.push({nd, ni});
      }
    }
  }
  return field;
}

MapDistanceField map_distance_field(const LogOddsMap& map, Cell source,
                                    int inflate, const MapParams& params) {
  return map_distance_field_multi(map, {source}, inflate, params);
}

}  // namespace mrnav
