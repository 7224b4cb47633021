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

#include "mrnav/snapshot.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace mrnav {

using nlohmann::json;

namespace {

constexpr char kB64Chars[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string doubles_to_b64(const std::vector<double>& v) {
  std::string bytes(v.size() * sizeof(double), '\0');
  std::memcpy(bytes.data(), v.data(), bytes.size());
  return base64_encode(bytes);
}

std::vector<double> b64_to_doubles(const std::string& text, std::size_t count) {
  const std::string bytes = base64_decode(text);
  if (bytes.size() != count * sizeof(double))
    throw ParseError("snapshot: channel size mismatch");
  std::vector<double> v(count);
  std::memcpy(v.data(), bytes.data(), bytes.size());
  return v;
}

json pose_to_json(const Pose& p) {
  return json::array({p.x, p.y, p.heading_step * 30});
}

Pose pose_from_json(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(),
          wrap_heading_step(j.at(2).get<int>() / 30)};
}

}  // namespace

std::string base64_encode(const std::string& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 2 < bytes.size()) {
    const unsigned v = (unsigned(std::uint8_t(bytes[i])) << 16) |
                       (unsigned(std::uint8_t(bytes[i + 1])) << 8) |
                       unsigned(std::uint8_t(bytes[i + 2]));
    out += kB64Chars[(v >> 18) & 63];
    out += kB64Chars[(v >> 12) & 63];
    out += kB64Chars[(v >> 6) & 63];
    out += kB64Chars[v & 63];
    i += 3;
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const unsigned v = unsigned(std::uint8_t(bytes[i])) << 16;
    out += kB64Chars[(v >> 18) & 63];
    out += kB64Chars[(v >> 12) & 63];
    out += "==";
  } else if (rest == 2) {
    const unsigned v = (unsigned(std::uint8_t(bytes[i])) << 16) |
                       (unsigned(std::uint8_t(bytes[i + 1])) << 8);
    out += kB64Chars[(v >> 18) & 63];
    out += kB64Chars[(v >> 12) & 63];
    out += kB64Chars[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::string base64_decode(const std::string& text) {
  int table[256];
  std::fill(std::begin(table), std::end(table), -1);
  for (int k = 0; k < 64; ++k) table[int(kB64Chars[k])] = k;
  std::string out;
  unsigned acc = 0;
  int bits = 0;
  for (char ch : text) {
    if (ch == '=' || ch == '\n' || ch == '\r') continue;
    const int v = table[int(std::uint8_t(ch))];
    if (v < 0) throw ParseError("invalid base64");
    acc = (acc << 6) | unsigned(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out += char((acc >> bits) & 0xFF);
    }
  }
  return out;
}

std::string encode_pgm(const LogOddsMap& map) {
  std::ostringstream out;
  out << "P5\n" << map.width() << " " << map.height() << "\n255\n";
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) {
      const Cell cell{map.min_row() + r, map.min_col() + c};
      switch (map.classify(cell)) {
        case CellClass::Occupied: out.put(char(0)); break;
        case CellClass::Unknown: out.put(char(128)); break;
        case CellClass::FreeExplored: out.put(char(255)); break;
      }
    }
  }
  return out.str();
}

std::string encode_sidecar_json(const MapSnapshot& snap) {
  return sidecar_json(snap).dump();
}

nlohmann::json sidecar_json(const MapSnapshot& snap) {
  const LogOddsMap& m = snap.map;
  const std::size_t n = std::size_t(m.width()) * m.height();
  json j;
  j["resolution_m"] = m.resolution();
  j["min_row"] = m.min_row();
  j["min_col"] = m.min_col();
  j["width"] = m.width();
  j["height"] = m.height();
  j["robot_id"] = snap.meta.robot_id;
  j["pose"] = pose_to_json(snap.meta.pose);
  json peers = json::array();
  for (const auto& [id, pose] : snap.meta.peer_poses)
    peers.push_back({{"id", id}, {"pose", pose_to_json(pose)}});
  j["peers"] = peers;

  // Full-fidelity channels: occupancy log-odds as raw doubles, the explored
  // mask bit-packed, and the (mostly empty) semantic channels as sparse
  // cell/value lists.
  std::vector<double> occ(n);
  std::string expl_bits((n + 7) / 8, '\0');
  for (int r = 0; r < m.height(); ++r) {
    for (int c = 0; c < m.width(); ++c) {
      const Cell cell{m.min_row() + r, m.min_col() + c};
      const std::size_t i = std::size_t(r) * m.width() + c;
      occ[i] = m.occupancy(cell);
      if (m.explored(cell)) expl_bits[i / 8] |= char(1u << (i % 8));
    }
  }
  j["occupancy_log_odds_b64"] = doubles_to_b64(occ);
  j["explored_bits_b64"] = base64_encode(expl_bits);

  json channels = json::object();
  for (const auto& [cat, _] : m.semantic_channels()) {
    json cells = json::array();
    json values = json::array();
    for (int r = 0; r < m.height(); ++r) {
      for (int c = 0; c < m.width(); ++c) {
        const Cell cell{m.min_row() + r, m.min_col() + c};
        const double v = m.semantic(cat, cell);
        if (v != 0.0) {
          cells.push_back({cell.row, cell.col});
          values.push_back(v);
        }
      }
    }
    channels[cat] = {{"cells", std::move(cells)}, {"values", std::move(values)}};
  }
  j["semantic_sparse"] = channels;

  json regs = json::array();
  for (const InstanceRecord& rec : snap.registry) {
    json cells = json::array();
    for (const Cell& c : rec.cells) cells.push_back({c.row, c.col});
    regs.push_back({{"local_id", rec.local_id},
                    {"category", rec.category},
                    {"cells", cells},
                    {"centroid", {rec.centroid.x, rec.centroid.y}},
                    {"best_score", rec.best_score},
                    {"observation_count", rec.observation_count},
                    {"source_ids", rec.source_ids}});
  }
  j["registry"] = regs;
  return j;
}

MapSnapshot decode_snapshot(const std::string& pgm_bytes,
                            const std::string& sidecar_json) {
  const json j = json::parse(sidecar_json, nullptr, false);
  if (j.is_discarded()) throw ParseError("snapshot: malformed sidecar JSON");
  (void)pgm_bytes;  // classification is derivable from the sidecar channels

  MapSnapshot snap;
  try {
    const int min_row = j.at("min_row").get<int>();
    const int min_col = j.at("min_col").get<int>();
    const int width = j.at("width").get<int>();
    const int height = j.at("height").get<int>();
    const std::size_t n = std::size_t(width) * height;
    LogOddsMap m(j.at("resolution_m").get<double>());
    m.set_robot_id(j.at("robot_id").get<int>());
    if (width > 0 && height > 0) m.reset_bounds(min_row, min_col, width, height);
    const double big = std::numeric_limits<double>::max();
    const auto occ = b64_to_doubles(j.at("occupancy_log_odds_b64").get<std::string>(), n);
    const std::string expl_bits =
        base64_decode(j.at("explored_bits_b64").get<std::string>());
    if (expl_bits.size() != (n + 7) / 8)
      throw ParseError("snapshot: explored mask size mismatch");
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) {
        const Cell cell{min_row + r, min_col + c};
        const std::size_t k = std::size_t(r) * width + c;
        m.set_occupancy(cell, occ[k], big);
        if (expl_bits[k / 8] & char(1u << (k % 8))) m.mark_explored(cell);
      }
    }
    for (const auto& [cat, sparse] : j.at("semantic_sparse").items()) {
      const auto& cells = sparse.at("cells");
      const auto& values = sparse.at("values");
      m.ensure_semantic_channel(cat);
      for (std::size_t k = 0; k < cells.size(); ++k)
        m.set_semantic(cat, {cells[k].at(0).get<int>(), cells[k].at(1).get<int>()},
                       values[k].get<double>(), big);
    }
    snap.map = std::move(m);
    snap.meta.robot_id = j.at("robot_id").get<int>();
    snap.meta.pose = pose_from_json(j.at("pose"));
    for (const auto& jp : j.at("peers"))
      snap.meta.peer_poses.emplace_back(jp.at("id").get<int>(),
                                        pose_from_json(jp.at("pose")));
    for (const auto& jr : j.at("registry")) {
      InstanceRecord rec;
      rec.local_id = jr.at("local_id").get<int>();
      rec.category = jr.at("category").get<std::string>();
      for (const auto& jc : jr.at("cells"))
        rec.cells.push_back({jc.at(0).get<int>(), jc.at(1).get<int>()});
      rec.centroid = {jr.at("centroid").at(0).get<double>(),
                      jr.at("centroid").at(1).get<double>()};
      rec.best_score = jr.at("best_score").get<double>();
      rec.observation_count = jr.at("observation_count").get<int>();
      for (int id : jr.at("source_ids")) rec.source_ids.insert(id);
      snap.registry.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("snapshot: ") + e.what());
  }
  return snap;
}

void save_snapshot(const MapSnapshot& snap, const std::string& base_path) {
  {
    std::ofstream out(base_path + ".pgm", std::ios::binary);
    if (!out) throw IoError("cannot write " + base_path + ".pgm");
    const std::string pgm = encode_pgm(snap.map);
    out.write(pgm.data(), std::streamsize(pgm.size()));
  }
  std::ofstream out(base_path + ".json");
  if (!out) throw IoError("cannot write " + base_path + ".json");
  out << encode_sidecar_json(snap);
}

MapSnapshot load_snapshot(const std::string& base_path) {
  auto read = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  return decode_snapshot(read(base_path + ".pgm"), read(base_path + ".json"));
}

}  // namespace mrnav
