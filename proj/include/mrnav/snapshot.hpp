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

#ifndef MRNAV_SNAPSHOT_HPP
#define MRNAV_SNAPSHOT_HPP

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mrnav/mapping.hpp"

namespace mrnav {

/// Map snapshot = binary PGM of the occupancy classification
/// (0 occupied / 128 unknown / 255 free) plus a JSON sidecar carrying the
/// log-odds channels, the instance registry, and pose metadata. The sidecar
/// keeps full fidelity so a snapshot round-trips losslessly.
struct SnapshotMeta {
  int robot_id = -1;
  Pose pose;                                   // local frame
  std::vector<std::pair<int, Pose>> peer_poses;  // known peers, own frame
};

struct MapSnapshot {
  LogOddsMap map;
  InstanceRegistry registry;
  SnapshotMeta meta;
};

std::string encode_pgm(const LogOddsMap& map);
nlohmann::json sidecar_json(const MapSnapshot& snap);
std::string encode_sidecar_json(const MapSnapshot& snap);

/// Writes <base>.pgm and <base>.json.
void save_snapshot(const MapSnapshot& snap, const std::string& base_path);
MapSnapshot load_snapshot(const std::string& base_path);

MapSnapshot decode_snapshot(const std::string& pgm_bytes,
                            const std::string& sidecar_json);

std::string base64_encode(const std::string& bytes);
std::string base64_decode(const std::string& text);

}  // namespace mrnav

#endif  // MRNAV_SNAPSHOT_HPP
