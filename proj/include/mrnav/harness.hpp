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

#ifndef MRNAV_HARNESS_HPP
#define MRNAV_HARNESS_HPP

#include <optional>
#include <string>
#include <vector>

#include "mrnav/agent.hpp"
#include "mrnav/metrics.hpp"

namespace mrnav {

struct RunConfig {
  std::string episode_path;
  std::string scene_path;  // empty: sibling <scene_id>.scene of the episode
  int n_agents = 0;        // 0 = all episode starts
  CommConfig comm;
  SensorConfig sensor;
  DetectionNoise noise;  // default detection profile
  // Optional per-modality profiles; goals' valid instances inherit them.
  std::map<GoalModality, DetectionNoise> modality_noise;
  std::optional<int> max_steps_override;
  std::optional<std::uint64_t> seed_override;
  std::string out_dir;  // empty = no files written
  bool save_maps = false;
  MapParams map_params;
  AlignParams align_params;
  AgentParams agent_params;
};

struct SentRecord {
  int to = -1;
  std::string kind;
  std::size_t bytes = 0;
};

struct TraceStep {
  int step = 0;
  int robot = 0;
  Pose pose;  // world frame, before the action
  Action action = Action::Stop;
  bool blocked = false;
  Mode::Kind mode = Mode::Kind::Explore;
  std::vector<SentRecord> sent;
};

struct EpisodeTrace {
  std::string scene_id;
  std::string episode_path;
  std::uint64_t seed = 0;
  int n_agents = 0;
  CommConfig comm;
  int max_steps = 0;
  std::vector<TraceStep> steps;
  std::vector<GoalEvent> goal_events;
  std::vector<double> distance_m;
  int steps_used = 0;
  std::uint64_t hash = 0;  // FNV-1a over the serialized step/event lines
};

struct EpisodeResult {
  EpisodeTrace trace;
  EpisodeOutcome outcome;
  EpisodeMetrics metrics;
};

/// Steps the world loop (observe -> decide with a barrier -> act -> deliver)
/// until max_steps, all goals found, or all robots Done. The outcome is
/// validated against ground truth, never against agent belief.
EpisodeResult run_episode(const GridScene& scene, const Episode& episode,
                          const RunConfig& cfg);
EpisodeResult run_episode(const RunConfig& cfg);

std::uint64_t trace_hash(const EpisodeTrace& trace);
std::string trace_to_jsonl(const EpisodeTrace& trace);
EpisodeTrace trace_from_jsonl(const std::string& text);
void save_trace(const EpisodeTrace& trace, const std::string& path);
EpisodeTrace load_trace(const std::string& path);

/// Number of FullMap sends from one robot to the same receiver spaced less
/// than tau steps apart (must be zero).
int audit_fullmap_cooldown(const EpisodeTrace& trace, int tau);

// ---------------------------------------------------------------------------
// Batch evaluation
// ---------------------------------------------------------------------------

struct EpisodeRow {
  std::string episode_id;
  int n = 0;
  int m = 0;
  double sr = 0.0;
  double mspl = 0.0;
  double d_star = 0.0;
  double max_dj = 0.0;
  double steps = 0.0;
  bool ok = true;
  std::string error;
};

struct TeamAggregate {
  int n = 0;
  int episodes = 0;
  double sr = 0.0;        // pooled over goals
  double mean_mspl = 0.0;
  double mean_steps = 0.0;
  double mean_max_dj = 0.0;
};

struct BatchReport {
  std::vector<EpisodeRow> rows;
  std::vector<TeamAggregate> by_team_size;
};

/// Runs every config (episodes are independent; parallel across episodes
/// when built with OpenMP). A failing episode contributes an error row and
/// never aborts the batch.
BatchReport run_batch(const std::vector<RunConfig>& configs);

BatchReport run_batch_serial(const std::vector<RunConfig>& configs);

std::string batch_csv(const BatchReport& report);
std::string batch_summary_json(const BatchReport& report);

/// Recomputes outcome + metrics from a saved trace (no re-simulation).
EpisodeRow evaluate_trace(const EpisodeTrace& trace, const GridScene& scene,
                          const Episode& episode);

}  // namespace mrnav

#endif  // MRNAV_HARNESS_HPP
