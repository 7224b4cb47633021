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

#ifndef MRNAV_GRID_HPP
#define MRNAV_GRID_HPP

#include <cstdint>
#include <functional>
#include <vector>

namespace mrnav {

/// Integer cell index, row-major. Row grows with +y, column with +x.
struct Cell {
  int row = 0;
  int col = 0;

  friend bool operator==(const Cell& a, const Cell& b) = default;
  friend auto operator<=>(const Cell& a, const Cell& b) = default;
};

struct CellHash {
  std::size_t operator()(const Cell& c) const {
    return std::hash<std::int64_t>{}((std::int64_t(c.row) << 32) ^
                                     std::uint32_t(c.col));
  }
};

/// Dense row-major grid of T with (width, height) in cells.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(std::size_t(width) * height, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }

  bool in_bounds(Cell c) const {
    return c.row >= 0 && c.row < height_ && c.col >= 0 && c.col < width_;
  }

  T& at(Cell c) { return data_[std::size_t(c.row) * width_ + c.col]; }
  const T& at(Cell c) const { return data_[std::size_t(c.row) * width_ + c.col]; }
  T& at(int row, int col) { return data_[std::size_t(row) * width_ + col]; }
  const T& at(int row, int col) const {
    return data_[std::size_t(row) * width_ + col];
  }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  void fill(T value) { data_.assign(data_.size(), value); }

  friend bool operator==(const Grid& a, const Grid& b) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// 8-connected neighbor offsets in fixed order; kNeighborDiagonal marks the
/// sqrt(2)-cost moves.
inline constexpr int kNeighborOffsets[8][2] = {
    {-1, 0}, {-1, 1}, {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}};
inline constexpr bool kNeighborDiagonal[8] = {false, true,  false, true,
                                              false, true,  false, true};

/// 4-connected neighbor offsets.
inline constexpr int kNeighbor4Offsets[4][2] = {{-1, 0}, {0, 1}, {1, 0}, {0, -1}};

}  // namespace mrnav

#endif  // MRNAV_GRID_HPP
