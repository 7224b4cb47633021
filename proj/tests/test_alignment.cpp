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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "mrnav/agent.hpp"
#include "mrnav/alignment.hpp"
#include "support/oracles.hpp"
#include "support/testmaps.hpp"

using namespace mrnav;
using testmaps::explore_rect;
using testmaps::map_from_ascii;

namespace {

/// Copy of `src` re-expressed in a frame rotated by rot90 quarter turns and
/// anchored at `anchor` (same integer mapping the robots use). The true
/// transform mapping the copy's coordinates back into src's frame is
/// frame.local_to_world().
LogOddsMap reframe_map(const LogOddsMap& src, const LocalFrame& frame) {
  LogOddsMap out(src.resolution());
  for (int r = src.min_row(); r < src.min_row() + src.height(); ++r) {
    for (int c = src.min_col(); c < src.min_col() + src.width(); ++c) {
      const Cell cell{r, c};
      if (!src.explored(cell)) continue;
      const Cell mapped = frame.to_local(cell);
      out.set_occupancy(mapped, src.occupancy(cell), 5.0);
      out.mark_explored(mapped);
    }
  }
  return out;
}

LogOddsMap tworoom_map() {
  const GridScene scene = load_scene(oracle::fixture("tworoom.scene"));
  LogOddsMap map;
  explore_rect(map, scene, 0, 0, scene.height() - 1, scene.width() - 1);
  return map;
}

double angle_diff(double a, double b) { return std::abs(wrap_angle(a - b)); }

}  // namespace

TEST_SUITE("radial_descriptor") {
  TEST_CASE("exactly invariant under quarter-turn reframing") {
    const LogOddsMap map = tworoom_map();
    for (int rot = 1; rot < 4; ++rot) {
      const LocalFrame frame{{5, 7}, rot, map.resolution()};
      const LogOddsMap turned = reframe_map(map, frame);
      for (const Cell probe : {Cell{3, 4}, Cell{6, 10}, Cell{2, 15}}) {
        const RadialDescriptor a = radial_descriptor(map, probe);
        const RadialDescriptor b = radial_descriptor(turned, frame.to_local(probe));
        for (int i = 0; i < AlignParams::kAnnuli; ++i)
          CHECK(a.bins[i] == b.bins[i]);
      }
    }
  }
}

TEST_SUITE("corner_candidates") {
  TEST_CASE("identical maps produce exact self-matches") {
    const LogOddsMap map = tworoom_map();
    const auto pairs = corner_candidates(map, map, AlignParams{});
    int exact = 0;
    for (const PointPair& p : pairs)
      if (p.a == p.b) ++exact;
    CHECK(exact >= 3);
  }

  TEST_CASE("quarter-turn reframed map yields enough true pairs") {
    const LogOddsMap map = tworoom_map();
    const LocalFrame frame{{4, 9}, 1, map.resolution()};
    const LogOddsMap turned = reframe_map(map, frame);
    const RigidTransform2D truth = frame.local_to_world();  // turned -> map
    const AlignParams params;
    const auto pairs = corner_candidates(map, turned, params);
    int correct = 0;
    for (const PointPair& p : pairs)
      if (norm(truth.apply(p.b) - p.a) <= params.epsilon_in_factor * map.resolution())
        ++correct;
    CHECK(correct >= params.k_min);
  }

  TEST_CASE("featureless maps raise NoFeatures") {
    std::vector<std::string> rows(12, std::string(12, '.'));
    const LogOddsMap blank = map_from_ascii(rows);
    CHECK_THROWS_AS(corner_candidates(blank, blank, AlignParams{}), NoFeaturesError);
  }
}

TEST_SUITE("landmark_candidates") {
  TEST_CASE("disjoint categories yield nothing") {
    const LogOddsMap map = tworoom_map();
    InstanceRegistry a, b;
    fuse_instance(a, "chair", {{3, 4}}, {1.125, 0.875}, 1.0, {1}, 0.5, 0.25);
    fuse_instance(b, "table", {{8, 15}}, {3.875, 2.125}, 1.0, {2}, 0.5, 0.25);
    CHECK(landmark_candidates(a, b, map, map, AlignParams{}).empty());
  }

  TEST_CASE("corresponding centroids under a known transform pair up") {
    const LogOddsMap map = tworoom_map();
    const LocalFrame frame{{2, 3}, 2, map.resolution()};
    const LogOddsMap turned = reframe_map(map, frame);

    InstanceRegistry reg_a, reg_b;
    const Vec2 chair_a{(4 + 0.5) * 0.25, (3 + 0.5) * 0.25};  // cell (3,4)
    fuse_instance(reg_a, "chair", {{3, 4}}, chair_a, 1.0, {1}, 0.5, 0.25);
    const Cell chair_b_cell = frame.to_local(Cell{3, 4});
    const Vec2 chair_b = frame.to_local(chair_a);
    fuse_instance(reg_b, "chair", {chair_b_cell}, chair_b, 1.0, {1}, 0.5, 0.25);

    const auto pairs = landmark_candidates(reg_a, reg_b, map, turned, AlignParams{});
    REQUIRE(pairs.size() == 1);
    const RigidTransform2D truth = frame.local_to_world();
    CHECK(norm(truth.apply(pairs[0].b) - pairs[0].a) < 0.25);
  }

  TEST_CASE("only the contextually matching duplicate survives the gate") {
    // A chair in a corner context vs a chair in open space: B holds both, A
    // holds only the corner one. The open-space duplicate's descriptor
    // differs and is filtered by d_max.
    const std::vector<std::string> rows = {
        "####################",
        "#..................#",
        "#..................#",
        "#..................#",
        "#..................#",
        "#..................#",
        "#..................#",
        "####################",
    };
    const LogOddsMap map = map_from_ascii(rows);
    InstanceRegistry reg_a, reg_b;
    // Corner chair at (1,1); open chair at (4,10).
    fuse_instance(reg_a, "chair", {{1, 1}}, {0.375, 0.375}, 1.0, {1}, 0.5, 0.25);
    fuse_instance(reg_b, "chair", {{1, 1}}, {0.375, 0.375}, 1.0, {1}, 0.5, 0.25);
    fuse_instance(reg_b, "chair", {{4, 10}}, {2.625, 1.125}, 1.0, {9}, 0.5, 0.25);
    const auto pairs = landmark_candidates(reg_a, reg_b, map, map, AlignParams{});
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].a == pairs[0].b);
  }
}

TEST_SUITE("estimate_transform") {
  TEST_CASE("noiseless exact recovery") {
    const RigidTransform2D truth{kPi / 2, 3.0, -1.0};
    std::vector<PointPair> pairs;
    Rng gen(3);
    for (int i = 0; i < 10; ++i) {
      const Vec2 b{gen.uniform(0.0, 5.0), gen.uniform(0.0, 5.0)};
      pairs.push_back({truth.apply(b), b, 0.0});
    }
    Rng rng(17);
    const auto est = estimate_transform(pairs, rng, 0.25, AlignParams{});
    REQUIRE(est.has_value());
    CHECK(angle_diff(est->transform.theta, truth.theta) < 1e-6);
    CHECK(std::abs(est->transform.tx - truth.tx) < 1e-6);
    CHECK(std::abs(est->transform.ty - truth.ty) < 1e-6);
    CHECK(est->inliers.size() == 10);
  }

  TEST_CASE("outlier rejection recovers the exact inlier set") {
    const RigidTransform2D truth{kPi / 2, 3.0, -1.0};
    std::vector<PointPair> pairs;
    Rng gen(11);
    for (int i = 0; i < 10; ++i) {
      const Vec2 b{gen.uniform(0.0, 5.0), gen.uniform(0.0, 5.0)};
      pairs.push_back({truth.apply(b), b, 0.0});
    }
    for (int i = 0; i < 10; ++i)
      pairs.push_back({{gen.uniform(20.0, 40.0), gen.uniform(20.0, 40.0)},
                       {gen.uniform(0.0, 5.0), gen.uniform(0.0, 5.0)},
                       0.0});
    Rng rng(29);
    const auto est = estimate_transform(pairs, rng, 0.25, AlignParams{});
    REQUIRE(est.has_value());
    CHECK(angle_diff(est->transform.theta, truth.theta) < 1e-6);
    REQUIRE(est->inliers.size() == 10);
    for (int i = 0; i < 10; ++i) CHECK(est->inliers[i] == i);
  }

  TEST_CASE("insufficient consensus fails") {
    // Three mutually inconsistent pairs with k_min = 4.
    std::vector<PointPair> pairs = {
        {{0.0, 0.0}, {5.0, 5.0}, 0.0},
        {{3.0, 0.0}, {9.0, 2.0}, 0.0},
        {{0.0, 4.0}, {1.0, 8.0}, 0.0},
    };
    Rng rng(5);
    CHECK_FALSE(estimate_transform(pairs, rng, 0.25, AlignParams{}).has_value());
  }
}

TEST_SUITE("validate_alignment") {
  TEST_CASE("identity on identical maps") {
    const LogOddsMap map = tworoom_map();
    const AlignmentResult r =
        validate_alignment(map, map, RigidTransform2D::identity(), AlignParams{});
    CHECK(r.iou == 1.0);
    CHECK(r.accepted);
  }

  TEST_CASE("correct transform on half-overlapping maps accepts") {
    const GridScene scene = load_scene(oracle::fixture("tworoom.scene"));
    LogOddsMap a, b;
    explore_rect(a, scene, 0, 0, scene.height() - 1, 13);   // left + doorway
    explore_rect(b, scene, 0, 6, scene.height() - 1, 19);   // right + doorway
    const AlignmentResult r =
        validate_alignment(a, b, RigidTransform2D::identity(), AlignParams{});
    CHECK(r.iou >= 0.8);
    CHECK(r.accepted);
  }

  TEST_CASE("0.5 m translation error rejects on a wall-dense map") {
    const LogOddsMap map = tworoom_map();
    const double t = 0.5 / std::numbers::sqrt2;  // error norm 0.5 m
    const AlignmentResult r =
        validate_alignment(map, map, RigidTransform2D{0.0, t, t}, AlignParams{});
    CHECK(r.iou < AlignParams{}.iou_min);
    CHECK_FALSE(r.accepted);
  }

  TEST_CASE("tiny overlap rejects even when consistent") {
    LogOddsMap a, b;
    a.set_occupancy({0, 0}, 2.0, 5.0);
    a.mark_explored({0, 0});
    b.set_occupancy({0, 0}, 2.0, 5.0);
    b.mark_explored({0, 0});
    const AlignmentResult r =
        validate_alignment(a, b, RigidTransform2D::identity(), AlignParams{});
    CHECK_FALSE(r.accepted);  // overlap below a_min
  }
}

TEST_SUITE("merge_maps") {
  TEST_CASE("abs-max fusion rules") {
    const MapParams p;
    LogOddsMap dst, src;
    dst.set_occupancy({0, 0}, 2.0, p.l_max);
    dst.mark_explored({0, 0});
    src.set_occupancy({0, 0}, -0.5, p.l_max);
    src.mark_explored({0, 0});
    merge_maps(dst, src, RigidTransform2D::identity(), p);
    CHECK(dst.occupancy({0, 0}) == 2.0);

    LogOddsMap dst2, src2;
    dst2.set_occupancy({0, 0}, -0.5, p.l_max);
    dst2.mark_explored({0, 0});
    src2.set_occupancy({0, 0}, 2.0, p.l_max);
    src2.mark_explored({0, 0});
    merge_maps(dst2, src2, RigidTransform2D::identity(), p);
    CHECK(dst2.occupancy({0, 0}) == 2.0);

    LogOddsMap dst3, src3;
    src3.set_occupancy({4, 4}, -3.0, p.l_max);
    src3.mark_explored({4, 4});
    merge_maps(dst3, src3, RigidTransform2D::identity(), p);
    CHECK(dst3.occupancy({4, 4}) == -3.0);
    CHECK(dst3.explored({4, 4}));
  }

  TEST_CASE("destination wins ties") {
    const MapParams p;
    LogOddsMap dst, src;
    dst.set_occupancy({0, 0}, -2.0, p.l_max);
    dst.mark_explored({0, 0});
    src.set_occupancy({0, 0}, 2.0, p.l_max);
    src.mark_explored({0, 0});
    merge_maps(dst, src, RigidTransform2D::identity(), p);
    CHECK(dst.occupancy({0, 0}) == -2.0);
  }

  TEST_CASE("semantic channels merge under the same rule") {
    const MapParams p;
    LogOddsMap dst, src;
    dst.set_occupancy({1, 1}, -1.0, p.l_max);
    dst.mark_explored({1, 1});
    src.set_semantic("chair", {1, 1}, 3.0, p.l_max);
    src.set_occupancy({1, 1}, 1.0, p.l_max);
    src.mark_explored({1, 1});
    merge_maps(dst, src, RigidTransform2D::identity(), p);
    CHECK(dst.semantic("chair", {1, 1}) == 3.0);
  }

  TEST_CASE("idempotent and order-independent off ties (random maps)") {
    const MapParams p;
    Rng rng(2718);
    for (int trial = 0; trial < 10; ++trial) {
      LogOddsMap a, b;
      for (int k = 0; k < 40; ++k) {
        const Cell c{rng.uniform_int(0, 7), rng.uniform_int(0, 7)};
        const double v = rng.uniform(-5.0, 5.0);
        if (rng.uniform() < 0.5) {
          a.set_occupancy(c, v, p.l_max);
          a.mark_explored(c);
        } else {
          b.set_occupancy(c, v, p.l_max);
          b.mark_explored(c);
        }
      }
      LogOddsMap once = a;
      merge_maps(once, b, RigidTransform2D::identity(), p);
      LogOddsMap twice = once;
      merge_maps(twice, b, RigidTransform2D::identity(), p);
      CHECK(once == twice);

      LogOddsMap ba = b;
      merge_maps(ba, a, RigidTransform2D::identity(), p);
      for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c) {
          const Cell cell{r, c};
          if (std::abs(a.occupancy(cell)) == std::abs(b.occupancy(cell))) continue;
          if (!once.explored(cell)) continue;
          CHECK(once.occupancy(cell) == ba.occupancy(cell));
        }
      }
    }
  }
}

TEST_SUITE("align_maps pipeline") {
  TEST_CASE("full pipeline recovers a quarter-turn reframing") {
    const LogOddsMap map = tworoom_map();
    const LocalFrame frame{{6, 11}, 3, map.resolution()};
    const LogOddsMap turned = reframe_map(map, frame);
    const RigidTransform2D truth = frame.local_to_world();
    Rng rng(404);
    const auto result = align_maps(map, {}, turned, {}, rng, AlignParams{});
    REQUIRE(result.has_value());
    CHECK(result->accepted);
    CHECK(angle_diff(result->transform.theta, truth.theta) < 2.0 * kPi / 180.0);
    const double terr = std::hypot(result->transform.tx - truth.tx,
                                   result->transform.ty - truth.ty);
    CHECK(terr <= 0.5);
  }

  TEST_CASE("cache stores accepted results only") {
    TransformCache cache;
    AlignmentResult rejected;
    rejected.accepted = false;
    CHECK_THROWS_AS(cache.store(1, rejected), ValidationError);
    AlignmentResult ok;
    ok.accepted = true;
    ok.iou = 0.9;
    cache.store(1, ok);
    CHECK(cache.find(1) != nullptr);
    CHECK(cache.find(2) == nullptr);
  }

  TEST_CASE("alignment JSON dump carries theta, t, iou, inliers") {
    AlignmentResult r;
    r.transform = {0.5, 1.0, 2.0};
    r.iou = 0.75;
    r.inlier_count = 9;
    r.accepted = true;
    const std::string j = alignment_to_json(r);
    CHECK(j.find("\"iou\":0.75") != std::string::npos);
    CHECK(j.find("\"inliers\":9") != std::string::npos);
  }
}
