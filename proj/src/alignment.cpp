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

#include "mrnav/alignment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "json.hpp"

namespace mrnav {

// ---------------------------------------------------------------------------
// Radial descriptor
// ---------------------------------------------------------------------------

namespace {

constexpr int kDescRadius = AlignParams::kAnnuli * AlignParams::kAnnulusWidth;

}  // namespace

RadialDescriptor radial_descriptor(const LogOddsMap& map, Cell center) {
  // Occupied-cell density per annulus, normalized by the explored cells of
  // the annulus rather than its full area: two robots share only part of the
  // world, and unexplored context would otherwise dilute matching corners.
  // The explored mask rotates with the map, so quarter-turn invariance stays
  // exact.
  RadialDescriptor d;
  std::array<double, AlignParams::kAnnuli> explored_count{};
  for (int dr = -kDescRadius; dr <= kDescRadius; ++dr) {
    for (int dc = -kDescRadius; dc <= kDescRadius; ++dc) {
      const double rad = std::sqrt(double(dr * dr + dc * dc));
      const int ring = int(rad) / AlignParams::kAnnulusWidth;
      if (ring >= AlignParams::kAnnuli) continue;
      const CellClass cls = map.classify({center.row + dr, center.col + dc});
      if (cls == CellClass::Unknown) continue;
      explored_count[ring] += 1.0;
      if (cls == CellClass::Occupied) d.bins[ring] += 1.0;
    }
  }
  for (int i = 0; i < AlignParams::kAnnuli; ++i)
    if (explored_count[i] > 0.0) d.bins[i] /= explored_count[i];
  return d;
}

double descriptor_distance(const RadialDescriptor& a, const RadialDescriptor& b) {
  double sum = 0.0;
  for (int i = 0; i < AlignParams::kAnnuli; ++i) {
    const double diff = a.bins[i] - b.bins[i];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

// ---------------------------------------------------------------------------
// Corner detection
// ---------------------------------------------------------------------------

std::vector<CornerPoint> detect_corners(const LogOddsMap& map,
                                        const AlignParams& params) {
  const int w = map.width(), h = map.height();
  if (w < 3 || h < 3) return {};

  // Binarized occupied image, lightly smoothed before the gradients.
  Grid<double> img(w, h, 0.0);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      if (map.classify({map.min_row() + r, map.min_col() + c}) == CellClass::Occupied)
        img.at(r, c) = 1.0;

  auto box3 = [&](const Grid<double>& src) {
    Grid<double> out(w, h, 0.0);
    for (int r = 1; r < h - 1; ++r)
      for (int c = 1; c < w - 1; ++c) {
        double s = 0.0;
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) s += src.at(r + dr, c + dc);
        out.at(r, c) = s / 9.0;
      }
    return out;
  };
  const Grid<double> smooth = box3(img);

  Grid<double> ix(w, h, 0.0), iy(w, h, 0.0);
  for (int r = 1; r < h - 1; ++r) {
    for (int c = 1; c < w - 1; ++c) {
      ix.at(r, c) = (smooth.at(r - 1, c + 1) + 2.0 * smooth.at(r, c + 1) +
                     smooth.at(r + 1, c + 1) - smooth.at(r - 1, c - 1) -
                     2.0 * smooth.at(r, c - 1) - smooth.at(r + 1, c - 1));
      iy.at(r, c) = (smooth.at(r + 1, c - 1) + 2.0 * smooth.at(r + 1, c) +
                     smooth.at(r + 1, c + 1) - smooth.at(r - 1, c - 1) -
                     2.0 * smooth.at(r - 1, c) - smooth.at(r - 1, c + 1));
    }
  }

  // Structure tensor with a 5x5 binomial window.
  static constexpr double kW[5] = {1.0, 4.0, 6.0, 4.0, 1.0};
  Grid<double> response(w, h, 0.0);
  double max_response = 0.0;
  for (int r = 2; r < h - 2; ++r) {
    for (int c = 2; c < w - 2; ++c) {
      double sxx = 0.0, syy = 0.0, sxy = 0.0;
      for (int dr = -2; dr <= 2; ++dr) {
        for (int dc = -2; dc <= 2; ++dc) {
          const double wgt = kW[dr + 2] * kW[dc + 2];
          const double gx = ix.at(r + dr, c + dc), gy = iy.at(r + dr, c + dc);
          sxx += wgt * gx * gx;
          syy += wgt * gy * gy;
          sxy += wgt * gx * gy;
        }
      }
      const double det = sxx * syy - sxy * sxy;
      const double tr = sxx + syy;
      const double resp = det - params.harris_k * tr * tr;
      response.at(r, c) = resp;
      max_response = std::max(max_response, resp);
    }
  }
  if (max_response <= 0.0) return {};

  const double threshold = params.min_response_rel * max_response;
  std::vector<CornerPoint> corners;
  for (int r = 2; r < h - 2; ++r) {
    for (int c = 2; c < w - 2; ++c) {
      const double resp = response.at(r, c);
      if (resp < threshold) continue;
      bool peak = true;
      for (int dr = -1; dr <= 1 && peak; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          if (response.at(r + dr, c + dc) > resp ||
              (response.at(r + dr, c + dc) == resp && (dr < 0 || (dr == 0 && dc < 0)))) {
            peak = false;
            break;
          }
        }
      if (!peak) continue;
      const Cell cell{map.min_row() + r, map.min_col() + c};
      if (!map.explored(cell)) continue;  // features live in explored space
      corners.push_back({cell, map.cell_center(cell), resp});
    }
  }
  std::sort(corners.begin(), corners.end(), [](const CornerPoint& a, const CornerPoint& b) {
    if (a.response != b.response) return a.response > b.response;
    return a.cell < b.cell;
  });
  if (int(corners.size()) > params.max_corners) corners.resize(params.max_corners);
  return corners;
}

std::vector<PointPair> corner_candidates(const LogOddsMap& map_dst,
                                         const LogOddsMap& map_src,
                                         const AlignParams& params) {
  const auto corners_dst = detect_corners(map_dst, params);
  const auto corners_src = detect_corners(map_src, params);
  if (corners_dst.size() < 3 || corners_src.size() < 3)
    throw NoFeaturesError("corner_candidates: fewer than 3 corners");

  std::vector<RadialDescriptor> desc_dst, desc_src;
  desc_dst.reserve(corners_dst.size());
  desc_src.reserve(corners_src.size());
  for (const auto& cp : corners_dst) desc_dst.push_back(radial_descriptor(map_dst, cp.cell));
  for (const auto& cp : corners_src) desc_src.push_back(radial_descriptor(map_src, cp.cell));

  // Per-corner best matches in both directions. A global top-k can spend the
  // whole budget on one ambiguous cluster; mutual candidates spread across
  // corners give RANSAC usable structure even under partial overlap.
  std::vector<PointPair> pairs;
  const int k_best = 3;
  auto push_best = [&](bool from_dst) {
    const auto& from = from_dst ? corners_dst : corners_src;
    const auto& to = from_dst ? corners_src : corners_dst;
    const auto& dfrom = from_dst ? desc_dst : desc_src;
    const auto& dto = from_dst ? desc_src : desc_dst;
    for (std::size_t i = 0; i < from.size(); ++i) {
      std::vector<std::pair<double, std::size_t>> ranked;
      ranked.reserve(to.size());
      for (std::size_t j = 0; j < to.size(); ++j)
        ranked.push_back({descriptor_distance(dfrom[i], dto[j]), j});
      std::sort(ranked.begin(), ranked.end());
      for (int k = 0; k < k_best && k < int(ranked.size()); ++k) {
        const std::size_t j = ranked[k].second;
        if (from_dst)
          pairs.push_back({from[i].position, to[j].position, ranked[k].first});
        else
          pairs.push_back({to[j].position, from[i].position, ranked[k].first});
      }
    }
  };
  push_best(true);
  push_best(false);

  std::sort(pairs.begin(), pairs.end(), [](const PointPair& x, const PointPair& y) {
    if (x.a.x != y.a.x) return x.a.x < y.a.x;
    if (x.a.y != y.a.y) return x.a.y < y.a.y;
    if (x.b.x != y.b.x) return x.b.x < y.b.x;
    if (x.b.y != y.b.y) return x.b.y < y.b.y;
    return x.desc_dist < y.desc_dist;
  });
  pairs.erase(std::unique(pairs.begin(), pairs.end(),
                          [](const PointPair& x, const PointPair& y) {
                            return x.a == y.a && x.b == y.b;
                          }),
              pairs.end());
  std::sort(pairs.begin(), pairs.end(), [](const PointPair& x, const PointPair& y) {
    if (x.desc_dist != y.desc_dist) return x.desc_dist < y.desc_dist;
    if (x.a.x != y.a.x) return x.a.x < y.a.x;
    if (x.a.y != y.a.y) return x.a.y < y.a.y;
    if (x.b.x != y.b.x) return x.b.x < y.b.x;
    return x.b.y < y.b.y;
  });
  if (int(pairs.size()) > params.c_max) pairs.resize(params.c_max);
  return pairs;
}

std::vector<PointPair> landmark_candidates(const InstanceRegistry& reg_dst,
                                           const InstanceRegistry& reg_src,
                                           const LogOddsMap& map_dst,
                                           const LogOddsMap& map_src,
                                           const AlignParams& params) {
  std::vector<PointPair> pairs;
  for (const InstanceRecord& rd : reg_dst) {
    const RadialDescriptor dd = radial_descriptor(map_dst, map_dst.cell_of(rd.centroid));
    for (const InstanceRecord& rs : reg_src) {
      if (rs.category != rd.category) continue;
      const RadialDescriptor ds =
          radial_descriptor(map_src, map_src.cell_of(rs.centroid));
      const double dist = descriptor_distance(dd, ds);
      if (dist <= params.d_max) pairs.push_back({rd.centroid, rs.centroid, dist});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const PointPair& x, const PointPair& y) {
    if (x.desc_dist != y.desc_dist) return x.desc_dist < y.desc_dist;
    if (x.a.x != y.a.x) return x.a.x < y.a.x;
    return x.b.x < y.b.x;
  });
  return pairs;
}

// ---------------------------------------------------------------------------
// RANSAC
// ---------------------------------------------------------------------------

namespace {

RigidTransform2D fit_from_two(const PointPair& p, const PointPair& q) {
  const Vec2 vb = q.b - p.b, va = q.a - p.a;
  const double theta = std::atan2(cross(vb, va), dot(vb, va));
  const double c = std::cos(theta), s = std::sin(theta);
  const Vec2 bc{0.5 * (p.b.x + q.b.x), 0.5 * (p.b.y + q.b.y)};
  const Vec2 ac{0.5 * (p.a.x + q.a.x), 0.5 * (p.a.y + q.a.y)};
  return {theta, ac.x - (c * bc.x - s * bc.y), ac.y - (s * bc.x + c * bc.y)};
}

/// Closed-form least squares over a candidate subset (rotation + translation,
/// no scale).
RigidTransform2D refit(const std::vector<PointPair>& pairs,
                       const std::vector<int>& subset) {
  Vec2 ca{0, 0}, cb{0, 0};
  for (int i : subset) {
    ca = ca + pairs[i].a;
    cb = cb + pairs[i].b;
  }
  const double n = double(subset.size());
  ca = {ca.x / n, ca.y / n};
  cb = {cb.x / n, cb.y / n};
  double sum_cross = 0.0, sum_dot = 0.0;
  for (int i : subset) {
    const Vec2 da = pairs[i].a - ca, db = pairs[i].b - cb;
    sum_cross += cross(db, da);
    sum_dot += dot(db, da);
  }
  const double theta = std::atan2(sum_cross, sum_dot);
  const double c = std::cos(theta), s = std::sin(theta);
  return {theta, ca.x - (c * cb.x - s * cb.y), ca.y - (s * cb.x + c * cb.y)};
}

struct IterationScore {
  int inliers = -1;
  double residual_sum = std::numeric_limits<double>::infinity();
  int iteration = std::numeric_limits<int>::max();
  RigidTransform2D transform;

  bool better_than(const IterationScore& o) const {
    if (inliers != o.inliers) return inliers > o.inliers;
    if (residual_sum != o.residual_sum) return residual_sum < o.residual_sum;
    return iteration < o.iteration;
  }
};

/// Consensus with one vote per distinct endpoint: several candidate pairs can
/// share a corner (k-best matching), and counting them all lets random
/// agreement outvote the true solution.
std::vector<int> unique_inliers(const std::vector<PointPair>& pairs,
                                const RigidTransform2D& t, double eps,
                                double* residual_sum = nullptr) {
  std::vector<std::pair<double, int>> hits;
  for (int i = 0; i < int(pairs.size()); ++i) {
    const double r = norm(t.apply(pairs[i].b) - pairs[i].a);
    if (r <= eps) hits.push_back({r, i});
  }
  std::sort(hits.begin(), hits.end());
  std::vector<Vec2> used_a, used_b;
  std::vector<int> picked;
  double sum = 0.0;
  for (const auto& [r, i] : hits) {
    const auto same = [](const std::vector<Vec2>& v, Vec2 p) {
      for (const Vec2& q : v)
        if (q == p) return true;
      return false;
    };
    if (same(used_a, pairs[i].a) || same(used_b, pairs[i].b)) continue;
    used_a.push_back(pairs[i].a);
    used_b.push_back(pairs[i].b);
    picked.push_back(i);
    sum += r;
  }
  std::sort(picked.begin(), picked.end());
  if (residual_sum != nullptr) *residual_sum = sum;
  return picked;
}

IterationScore score_iteration(const std::vector<PointPair>& pairs, int iter,
                               Rng base, double eps, double resolution) {
  Rng rng = base.fork(std::uint64_t(iter));
  const int n = int(pairs.size());
  const int i1 = rng.uniform_int(0, n - 1);
  const int i2 = rng.uniform_int(0, n - 1);
  if (i1 == i2) return {};
  const PointPair& p = pairs[i1];
  const PointPair& q = pairs[i2];
  if (norm(q.b - p.b) < 0.5 * resolution || norm(q.a - p.a) < 0.5 * resolution)
    return {};  // degenerate sample
  // Rigid transforms preserve lengths; mismatched segment lengths cannot
  // come from a true correspondence pair.
  if (std::abs(norm(q.b - p.b) - norm(q.a - p.a)) > eps) return {};
  const RigidTransform2D t = fit_from_two(p, q);
  IterationScore sc;
  sc.iteration = iter;
  sc.transform = t;
  sc.inliers = int(unique_inliers(pairs, t, eps, &sc.residual_sum).size());
  return sc;
}

std::optional<TransformEstimate> finish_estimate(const std::vector<PointPair>& pairs,
                                                 const IterationScore& best,
                                                 double eps, const AlignParams& params) {
  if (best.inliers < params.k_min) return std::nullopt;
  // Alternate least-squares refit and reselection at a tightened residual
  // gate; a single refit at the full threshold can keep one marginal
  // correspondence that tilts the whole fit.
  std::vector<int> inliers = unique_inliers(pairs, best.transform, eps);
  RigidTransform2D refined = best.transform;
  for (int round = 0; round < 8; ++round) {
    if (int(inliers.size()) < 2) break;
    refined = refit(pairs, inliers);
    std::vector<int> next = unique_inliers(pairs, refined, 0.5 * eps);
    if (int(next.size()) < params.k_min || next == inliers) break;
    inliers = std::move(next);
  }
  std::vector<int> final_inliers = unique_inliers(pairs, refined, eps);
  if (int(final_inliers.size()) < params.k_min) return std::nullopt;
  return TransformEstimate{refined, std::move(final_inliers)};
}

}  // namespace

namespace {
std::atomic<long> g_estimate_calls{0};
}  // namespace

long estimate_transform_call_count() { return g_estimate_calls.load(); }
void reset_estimate_transform_call_count() { g_estimate_calls.store(0); }

namespace {

/// Top distinct RANSAC hypotheses in consensus order (deterministic under
/// any thread count: scores are keyed by iteration index).
std::vector<IterationScore> ransac_hypotheses(const std::vector<PointPair>& candidates,
                                              Rng& rng, double resolution,
                                              const AlignParams& params,
                                              int max_hypotheses) {
  std::vector<IterationScore> scores(params.ransac_iters);
  const double eps = params.epsilon_in_factor * resolution;
  const Rng base = rng.fork(rng.next_u64());
#pragma omp parallel for schedule(static)
  for (int it = 0; it < params.ransac_iters; ++it)
    scores[it] = score_iteration(candidates, it, base, eps, resolution);

  std::sort(scores.begin(), scores.end(),
            [](const IterationScore& a, const IterationScore& b) {
              return a.better_than(b);
            });
  std::vector<IterationScore> distinct;
  for (const IterationScore& sc : scores) {
    if (sc.inliers < params.k_min) break;
    bool close = false;
    for (const IterationScore& kept : distinct) {
      if (std::abs(wrap_angle(sc.transform.theta - kept.transform.theta)) < 0.05 &&
          std::hypot(sc.transform.tx - kept.transform.tx,
                     sc.transform.ty - kept.transform.ty) < 2.0 * resolution) {
        close = true;
        break;
      }
    }
    if (!close) distinct.push_back(sc);
    if (int(distinct.size()) >= max_hypotheses) break;
  }
  return distinct;
}

}  // namespace

std::optional<TransformEstimate> estimate_transform_serial(
    const std::vector<PointPair>& candidates, Rng& rng, double resolution,
    const AlignParams& params) {
  g_estimate_calls.fetch_add(1);
  if (candidates.size() < 2) return std::nullopt;
  const double eps = params.epsilon_in_factor * resolution;
  const Rng base = rng.fork(rng.next_u64());
  IterationScore best;
  for (int it = 0; it < params.ransac_iters; ++it) {
    const IterationScore sc = score_iteration(candidates, it, base, eps, resolution);
    if (sc.better_than(best)) best = sc;
  }
  return finish_estimate(candidates, best, eps, params);
}

std::optional<TransformEstimate> estimate_transform(
    const std::vector<PointPair>& candidates, Rng& rng, double resolution,
    const AlignParams& params) {
  g_estimate_calls.fetch_add(1);
  if (candidates.size() < 2) return std::nullopt;
  const double eps = params.epsilon_in_factor * resolution;
  // Each iteration derives its own stream from (base, iteration index), so
  // the winner is the same whatever the thread count.
  const Rng base = rng.fork(rng.next_u64());
  IterationScore best;
#pragma omp parallel
  {
    IterationScore local;
#pragma omp for schedule(static) nowait
    for (int it = 0; it < params.ransac_iters; ++it) {
      const IterationScore sc = score_iteration(candidates, it, base, eps, resolution);
      if (sc.better_than(local)) local = sc;
    }
#pragma omp critical
    {
      if (local.better_than(best)) best = local;
    }
  }
  return finish_estimate(candidates, best, eps, params);
}

// ---------------------------------------------------------------------------
// Validation and merging
// ---------------------------------------------------------------------------

AlignmentResult validate_alignment(const LogOddsMap& map_dst,
                                   const LogOddsMap& map_src,
                                   const RigidTransform2D& t,
                                   const AlignParams& params) {
  const RigidTransform2D t_inv = t.inverse();
  long overlap = 0, inter = 0, uni = 0;
  for (int r = 0; r < map_dst.height(); ++r) {
    for (int c = 0; c < map_dst.width(); ++c) {
      const Cell cd{map_dst.min_row() + r, map_dst.min_col() + c};
      if (!map_dst.explored(cd)) continue;
      const Cell cs = map_src.cell_of(t_inv.apply(map_dst.cell_center(cd)));
      if (!map_src.explored(cs)) continue;
      ++overlap;
      const bool occ_d = map_dst.classify(cd) == CellClass::Occupied;
      const bool occ_s = map_src.classify(cs) == CellClass::Occupied;
      if (occ_d && occ_s) ++inter;
      if (occ_d || occ_s) ++uni;
    }
  }
  AlignmentResult result;
  result.transform = t;
  result.iou = uni > 0 ? double(inter) / double(uni) : 0.0;
  result.accepted = result.iou >= params.iou_min && overlap >= params.a_min;
  return result;
}

std::optional<AlignmentResult> align_maps(const LogOddsMap& map_dst,
                                          const InstanceRegistry& reg_dst,
                                          const LogOddsMap& map_src,
                                          const InstanceRegistry& reg_src,
                                          Rng& rng, const AlignParams& params) {
  std::vector<PointPair> candidates;
  try {
    candidates = corner_candidates(map_dst, map_src, params);
  } catch (const NoFeaturesError&) {
    // fall through: landmark pairs may still carry the alignment
  }
  const auto landmarks =
      landmark_candidates(reg_dst, reg_src, map_dst, map_src, params);
  candidates.insert(candidates.end(), landmarks.begin(), landmarks.end());
  if (candidates.size() < 2) return std::nullopt;

  // A handful of distinct consensus hypotheses go through the IoU gate; the
  // gate, not the raw inlier count, picks the survivor. Wrong-but-popular
  // hypotheses score near-zero IoU and fall out here.
  g_estimate_calls.fetch_add(1);
  const double eps = params.epsilon_in_factor * map_dst.resolution();
  const auto hypotheses =
      ransac_hypotheses(candidates, rng, map_dst.resolution(), params, 5);
  std::optional<AlignmentResult> best;
  for (const IterationScore& hyp : hypotheses) {
    const auto est = finish_estimate(candidates, hyp, eps, params);
    if (!est) continue;
    AlignmentResult result =
        validate_alignment(map_dst, map_src, est->transform, params);
    result.inlier_count = int(est->inliers.size());
    if (!best || (result.accepted && !best->accepted) ||
        (result.accepted == best->accepted && result.iou > best->iou))
      best = result;
  }
  return best;
}

namespace {

void premerge_grow(LogOddsMap& dst, const LogOddsMap& src, const RigidTransform2D& t) {
  if (src.empty()) return;
  const double res = src.resolution();
  const double x0 = src.min_col() * res, x1 = (src.min_col() + src.width()) * res;
  const double y0 = src.min_row() * res, y1 = (src.min_row() + src.height()) * res;
  for (const Vec2& corner :
       {Vec2{x0, y0}, Vec2{x1, y0}, Vec2{x0, y1}, Vec2{x1, y1}}) {
    dst.ensure_contains(dst.cell_of(t.apply(corner)));
  }
}

inline double abs_max(double dst_val, double src_val) {
  return std::abs(src_val) > std::abs(dst_val) ? src_val : dst_val;
}

template <bool Parallel>
void merge_impl(LogOddsMap& dst, const LogOddsMap& src, const RigidTransform2D& t,
                const MapParams& params) {
  premerge_grow(dst, src, t);
  for (const auto& [cat, _] : src.semantic_channels()) dst.ensure_semantic_channel(cat);

  const RigidTransform2D t_inv = t.inverse();
  const int h = dst.height();
  const auto merge_row = [&](int r_off) {
    const int row = dst.min_row() + r_off;
    for (int col = dst.min_col(); col < dst.min_col() + dst.width(); ++col) {
      const Cell cd{row, col};
      const Cell cs = src.cell_of(t_inv.apply(dst.cell_center(cd)));
      if (!src.explored(cs)) continue;
      dst.set_occupancy(cd, abs_max(dst.occupancy(cd), src.occupancy(cs)),
                        params.l_max);
      for (const auto& [cat, _] : src.semantic_channels())
        dst.set_semantic(cat, cd, abs_max(dst.semantic(cat, cd), src.semantic(cat, cs)),
                         params.l_max);
      dst.mark_explored(cd);
    }
  };
  if constexpr (Parallel) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < h; ++r) merge_row(r);
  } else {
    for (int r = 0; r < h; ++r) merge_row(r);
  }
}

}  // namespace

void merge_maps_serial(LogOddsMap& dst, const LogOddsMap& src,
                       const RigidTransform2D& t, const MapParams& params) {
  merge_impl<false>(dst, src, t, params);
}

void merge_maps(LogOddsMap& dst, const LogOddsMap& src, const RigidTransform2D& t,
                const MapParams& params) {
  merge_impl<true>(dst, src, t, params);
}

void merge_registry(InstanceRegistry& dst, const InstanceRegistry& src,
                    const RigidTransform2D& t, double resolution,
                    const MapParams& params) {
  for (const InstanceRecord& rec : src) {
    std::vector<Cell> cells;
    cells.reserve(rec.cells.size());
    for (const Cell& c : rec.cells) {
      const Vec2 p = t.apply({(c.col + 0.5) * resolution, (c.row + 0.5) * resolution});
      cells.push_back({int(std::floor(p.y / resolution)),
                       int(std::floor(p.x / resolution))});
    }
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    fuse_instance(dst, rec.category, cells, t.apply(rec.centroid), rec.best_score,
                  rec.source_ids, params.r_assoc, resolution);
  }
}

void TransformCache::store(int neighbor_id, const AlignmentResult& result) {
  if (!result.accepted)
    throw ValidationError("TransformCache: only accepted alignments are cached");
  entries_[neighbor_id] = result;
}

const AlignmentResult* TransformCache::find(int neighbor_id) const {
  auto it = entries_.find(neighbor_id);
  return it == entries_.end() ? nullptr : &it->second;
}

std::string alignment_to_json(const AlignmentResult& result) {
  nlohmann::json j;
  j["theta"] = result.transform.theta;
  j["t"] = {result.transform.tx, result.transform.ty};
  j["iou"] = result.iou;
  j["inliers"] = result.inlier_count;
  j["accepted"] = result.accepted;
  return j.dump();
}

}  // namespace mrnav
