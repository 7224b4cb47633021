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

#ifndef MRNAV_GEOMETRY_HPP
#define MRNAV_GEOMETRY_HPP

#include <cmath>
#include <numbers>

#include "mrnav/grid.hpp"

namespace mrnav {

inline constexpr double kPi = std::numbers::pi;

/// Headings are quantized to multiples of 30 degrees (12 steps per turn).
inline constexpr int kHeadingSteps = 12;
inline constexpr double kHeadingStepRad = kPi / 6.0;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend bool operator==(const Vec2& a, const Vec2& b) = default;
};

inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

/// Robot pose. The heading is stored as an integer step count so turn
/// arithmetic stays exact; heading_rad() gives the angle in radians.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  int heading_step = 0;  // in [0, 12), heading = step * pi/6

  double heading_rad() const { return heading_step * kHeadingStepRad; }
  Vec2 position() const { return {x, y}; }

  friend bool operator==(const Pose& a, const Pose& b) = default;
};

inline int wrap_heading_step(int step) {
  int s = step % kHeadingSteps;
  return s < 0 ? s + kHeadingSteps : s;
}

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
  while (a > kPi) a -= 2.0 * kPi;
  while (a <= -kPi) a += 2.0 * kPi;
  return a;
}

/// Rigid 2D transform p' = R(theta) * p + t.
struct RigidTransform2D {
  double theta = 0.0;
  double tx = 0.0;
  double ty = 0.0;

  Vec2 apply(Vec2 p) const {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c * p.x - s * p.y + tx, s * p.x + c * p.y + ty};
  }

  RigidTransform2D inverse() const {
    const double c = std::cos(theta), s = std::sin(theta);
    return {-theta, -(c * tx + s * ty), -(-s * tx + c * ty)};
  }

  /// this after other: result(p) = this(other(p)).
  RigidTransform2D compose(const RigidTransform2D& other) const {
    const double c = std::cos(theta), s = std::sin(theta);
    return {theta + other.theta, c * other.tx - s * other.ty + tx,
            s * other.tx + c * other.ty + ty};
  }

  static RigidTransform2D identity() { return {}; }
};

inline double euclidean(Vec2 a, Vec2 b) { return norm(a - b); }

}  // namespace mrnav

#endif  // MRNAV_GEOMETRY_HPP
