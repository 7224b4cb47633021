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

#include "mrnav/harness.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mrnav/snapshot.hpp"

namespace mrnav {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string derive_scene_path(const RunConfig& cfg, const std::string& scene_id) {
  if (!cfg.scene_path.empty()) return cfg.scene_path;
  const fs::path ep(cfg.episode_path);
  return (ep.parent_path() / (scene_id + ".scene")).string();
}

NoiseOverrides build_overrides(const Episode& episode, const RunConfig& cfg) {
  NoiseOverrides overrides;
  for (const GoalSpec& goal : episode.goals) {
    auto it = cfg.modality_noise.find(goal.modality);
    if (it == cfg.modality_noise.end()) continue;
    for (int id : goal.valid_instance_ids) overrides[id] = it->second;
  }
  return overrides;
}

/// Ground-truth success check: Euclidean distance from the stop pose to the
/// nearest footprint cell of any valid instance of the goal.
bool validate_goal_event(const GridScene& scene, const Episode& episode,
                         int goal_id, const Pose& world_pose) {
  const GoalSpec* goal = episode.find_goal(goal_id);
  if (goal == nullptr) return false;
  for (int id : goal->valid_instance_ids) {
    const ObjectInstance* inst = scene.find_instance(id);
    if (inst == nullptr) continue;
    for (const Cell& c : inst->footprint)
      if (euclidean(world_pose.position(), scene.cell_center(c)) <=
          goal->success_radius_m + 1e-12)
        return true;
  }
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------
// Episode runner
// ---------------------------------------------------------------------------

EpisodeResult run_episode(const GridScene& scene, const Episode& episode,
                          const RunConfig& cfg) {
  episode.validate(scene);
  const int n = cfg.n_agents == 0 ? int(episode.start_poses.size()) : cfg.n_agents;
  if (n < 1 || n > int(episode.start_poses.size()))
    throw ConfigError("run_episode: n_agents exceeds the episode start poses");
  const int max_steps =
      cfg.max_steps_override ? *cfg.max_steps_override : episode.max_steps;
  const std::uint64_t seed = cfg.seed_override ? *cfg.seed_override : episode.seed;
  const NoiseOverrides overrides = build_overrides(episode, cfg);

  const Rng root(seed);
  std::vector<AgentState> agents(n);
  std::vector<Pose> world_poses(episode.start_poses.begin(),
                                episode.start_poses.begin() + n);
  std::vector<Rng> obs_rngs;
  for (int i = 0; i < n; ++i) {
    AgentState& a = agents[i];
    a.robot_id = i;
    a.priority = i;  // unique, assigned at init
    a.frame = LocalFrame::from_start(world_poses[i], scene.resolution());
    a.map = LogOddsMap(scene.resolution());
    a.map.set_robot_id(i);
    a.pose = a.frame.to_local(world_poses[i]);
    for (const GoalSpec& g : episode.goals) a.pending_goals.insert(g.goal_id);
    a.goals = episode.goals;
    a.rng = root.fork(0x0A6E57ULL + std::uint64_t(i));
    obs_rngs.push_back(root.fork(0x0B5E67ULL + std::uint64_t(i)));
  }

  EpisodeTrace trace;
  trace.scene_id = scene.scene_id();
  trace.episode_path = cfg.episode_path;
  trace.seed = seed;
  trace.n_agents = n;
  trace.comm = cfg.comm;
  trace.max_steps = max_steps;
  trace.distance_m.assign(n, 0.0);

  std::set<int> goals_found;
  std::vector<std::vector<Message>> inboxes(n);

  int step = 0;
  for (; step < max_steps; ++step) {
    if (int(goals_found.size()) == int(episode.goals.size())) break;
    bool all_done = step > 0;
    for (const AgentState& a : agents)
      if (a.mode.kind != Mode::Kind::Done) all_done = false;
    if (all_done) break;

    const auto edges = connectivity(world_poses, cfg.comm);
    std::vector<std::vector<int>> neighbors(n);
    for (const auto& [i, j] : edges) {
      neighbors[i].push_back(j);
      neighbors[j].push_back(i);
    }

    // Decide phase: every robot sees only last step's messages (barrier).
    std::vector<std::vector<Message>> next_inboxes(n);
    for (int i = 0; i < n; ++i) {
      AgentState& a = agents[i];
      const Observation obs = observe(scene, world_poses[i], i, cfg.sensor,
                                      cfg.noise, obs_rngs[i], &overrides);
      DecideContext ctx;
      ctx.step = step;
      ctx.connected_neighbors = neighbors[i];
      ctx.map_params = cfg.map_params;
      ctx.align_params = cfg.align_params;
      ctx.comm = cfg.comm;
      ctx.agent_params = cfg.agent_params;
      const DecideResult decision = decide(a, obs, inboxes[i], ctx);

      TraceStep ts;
      ts.step = step;
      ts.robot = i;
      ts.pose = world_poses[i];
      ts.action = decision.action;
      ts.mode = a.mode.kind;
      for (const auto& [to, msg] : decision.outbox) {
        ts.sent.push_back({to, message_kind(msg), serialize_message(msg).size()});
        next_inboxes[to].push_back(msg);
      }

      if (decision.stop_goal_id) {
        GoalEvent ev;
        ev.step = step;
        ev.robot_id = i;
        ev.goal_id = *decision.stop_goal_id;
        ev.world_pose = world_poses[i];
        ev.valid = validate_goal_event(scene, episode, ev.goal_id, world_poses[i]);
        if (ev.valid) goals_found.insert(ev.goal_id);
        trace.goal_events.push_back(ev);
      }

      const StepResult moved = step_agent(scene, world_poses[i], decision.action);
      ts.blocked = moved.blocked;
      if (decision.action == Action::Forward && !moved.blocked)
        trace.distance_m[i] += kForwardStepM;
      world_poses[i] = moved.pose;
      trace.steps.push_back(std::move(ts));
    }
    inboxes = std::move(next_inboxes);
  }
  trace.steps_used = step;

  EpisodeOutcome outcome;
  outcome.max_steps = max_steps;
  outcome.steps_used = step;
  outcome.distance_m = trace.distance_m;
  for (const GoalSpec& g : episode.goals) {
    GoalOutcome go;
    go.goal_id = g.goal_id;
    for (const GoalEvent& ev : trace.goal_events) {
      if (ev.goal_id == g.goal_id && ev.valid) {
        go.found = true;
        go.finder_robot = ev.robot_id;
        go.step = ev.step;
        break;  // first valid event wins
      }
    }
    outcome.goals.push_back(go);
  }

  std::vector<Cell> start_cells;
  for (int i = 0; i < n; ++i) start_cells.push_back(scene.cell_of(episode.start_poses[i]));
  EpisodeResult result;
  result.outcome = outcome;
  result.metrics = evaluate_episode(scene, start_cells, episode.goals, outcome);
  trace.hash = trace_hash(trace);
  result.trace = std::move(trace);

  if (!cfg.out_dir.empty()) {
    fs::create_directories(cfg.out_dir);
    save_trace(result.trace, (fs::path(cfg.out_dir) / "trace.jsonl").string());
    if (cfg.save_maps) {
      for (int i = 0; i < n; ++i) {
        MapSnapshot snap;
        snap.map = agents[i].map;
        snap.registry = agents[i].registry;
        snap.meta.robot_id = i;
        snap.meta.pose = agents[i].pose;
        for (const auto& [id, ps] : agents[i].peers)
          if (ps.last_known_pose)
            snap.meta.peer_poses.emplace_back(id, *ps.last_known_pose);
        save_snapshot(snap, (fs::path(cfg.out_dir) / ("map_robot" + std::to_string(i)))
                                .string());
      }
    }
    // Accepted alignments, for the merge-overlay rendering path.
    json aligns = json::array();
    for (int i = 0; i < n; ++i)
      for (const auto& [id, ps] : agents[i].peers)
        if (ps.cached_transform)
          aligns.push_back({{"robot", i},
                            {"neighbor", id},
                            {"result", json::parse(alignment_to_json(*ps.cached_transform))}});
    std::ofstream out(fs::path(cfg.out_dir) / "alignments.json");
    out << aligns.dump(2);
  }
  return result;
}

EpisodeResult run_episode(const RunConfig& cfg) {
  const Episode episode = load_episode(cfg.episode_path);
  const GridScene scene = load_scene(derive_scene_path(cfg, episode.scene_id));
  return run_episode(scene, episode, cfg);
}

// ---------------------------------------------------------------------------
// Trace serialization
// ---------------------------------------------------------------------------

namespace {

json step_to_json(const TraceStep& ts) {
  json sent = json::array();
  for (const SentRecord& s : ts.sent)
    sent.push_back({{"to", s.to}, {"kind", s.kind}, {"bytes", s.bytes}});
  return {{"type", "step"},
          {"t", ts.step},
          {"robot", ts.robot},
          {"pose", {ts.pose.x, ts.pose.y, ts.pose.heading_step * 30}},
          {"action", action_name(ts.action)},
          {"blocked", ts.blocked},
          {"mode", mode_name(ts.mode)},
          {"sent", sent}};
}

json event_to_json(const GoalEvent& ev) {
  return {{"type", "goal_event"},
          {"t", ev.step},
          {"robot", ev.robot_id},
          {"goal", ev.goal_id},
          {"valid", ev.valid},
          {"pose", {ev.world_pose.x, ev.world_pose.y, ev.world_pose.heading_step * 30}}};
}

std::uint64_t fnv1a(std::uint64_t h, const std::string& s) {
  for (char ch : s) {
    h ^= std::uint8_t(ch);
    h *= 0x100000001B3ULL;
  }
  return h;
}

Action action_from_name(const std::string& name) {
  if (name == "Forward") return Action::Forward;
  if (name == "TurnLeft") return Action::TurnLeft;
  if (name == "TurnRight") return Action::TurnRight;
  return Action::Stop;
}

Mode::Kind mode_from_name(const std::string& name) {
  if (name == "GotoGoal") return Mode::Kind::GotoGoal;
  if (name == "Done") return Mode::Kind::Done;
  return Mode::Kind::Explore;
}

}  // namespace

std::uint64_t trace_hash(const EpisodeTrace& trace) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const TraceStep& ts : trace.steps) h = fnv1a(h, step_to_json(ts).dump());
  for (const GoalEvent& ev : trace.goal_events) h = fnv1a(h, event_to_json(ev).dump());
  return h;
}

std::string trace_to_jsonl(const EpisodeTrace& trace) {
  std::ostringstream out;
  json header{{"type", "header"},
              {"scene_id", trace.scene_id},
              {"episode", trace.episode_path},
              {"seed", trace.seed},
              {"n", trace.n_agents},
              {"rcomm", trace.comm.r_comm_m},
              {"tau", trace.comm.tau},
              {"max_steps", trace.max_steps}};
  out << header.dump() << "\n";
  // Step and event lines interleaved in time order (events after the step
  // that produced them).
  std::size_t ei = 0;
  for (const TraceStep& ts : trace.steps) {
    out << step_to_json(ts).dump() << "\n";
    while (ei < trace.goal_events.size() &&
           trace.goal_events[ei].step == ts.step &&
           trace.goal_events[ei].robot_id == ts.robot) {
      out << event_to_json(trace.goal_events[ei]).dump() << "\n";
      ++ei;
    }
  }
  for (; ei < trace.goal_events.size(); ++ei)
    out << event_to_json(trace.goal_events[ei]).dump() << "\n";
  json footer{{"type", "outcome"},
              {"steps_used", trace.steps_used},
              {"distance_m", trace.distance_m},
              {"hash", trace.hash}};
  out << footer.dump() << "\n";
  return out.str();
}

EpisodeTrace trace_from_jsonl(const std::string& text) {
  EpisodeTrace trace;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError("trace: malformed JSONL line");
    const std::string type = j.value("type", "");
    if (type == "header") {
      trace.scene_id = j.at("scene_id").get<std::string>();
      trace.episode_path = j.at("episode").get<std::string>();
      trace.seed = j.at("seed").get<std::uint64_t>();
      trace.n_agents = j.at("n").get<int>();
      trace.comm.r_comm_m = j.at("rcomm").get<double>();
      trace.comm.tau = j.at("tau").get<int>();
      trace.max_steps = j.at("max_steps").get<int>();
    } else if (type == "step") {
      TraceStep ts;
      ts.step = j.at("t").get<int>();
      ts.robot = j.at("robot").get<int>();
      ts.pose = {j.at("pose").at(0).get<double>(), j.at("pose").at(1).get<double>(),
                 wrap_heading_step(j.at("pose").at(2).get<int>() / 30)};
      ts.action = action_from_name(j.at("action").get<std::string>());
      ts.blocked = j.at("blocked").get<bool>();
      ts.mode = mode_from_name(j.at("mode").get<std::string>());
      for (const auto& js : j.at("sent"))
        ts.sent.push_back({js.at("to").get<int>(), js.at("kind").get<std::string>(),
                           js.at("bytes").get<std::size_t>()});
      trace.steps.push_back(std::move(ts));
    } else if (type == "goal_event") {
      GoalEvent ev;
      ev.step = j.at("t").get<int>();
      ev.robot_id = j.at("robot").get<int>();
      ev.goal_id = j.at("goal").get<int>();
      ev.valid = j.at("valid").get<bool>();
      ev.world_pose = {j.at("pose").at(0).get<double>(),
                       j.at("pose").at(1).get<double>(),
                       wrap_heading_step(j.at("pose").at(2).get<int>() / 30)};
      trace.goal_events.push_back(ev);
    } else if (type == "outcome") {
      trace.steps_used = j.at("steps_used").get<int>();
      trace.distance_m = j.at("distance_m").get<std::vector<double>>();
      trace.hash = j.at("hash").get<std::uint64_t>();
    }
  }
  return trace;
}

void save_trace(const EpisodeTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << trace_to_jsonl(trace);
}

EpisodeTrace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return trace_from_jsonl(ss.str());
}

int audit_fullmap_cooldown(const EpisodeTrace& trace, int tau) {
  std::map<std::pair<int, int>, int> last_sent;
  int violations = 0;
  for (const TraceStep& ts : trace.steps) {
    for (const SentRecord& s : ts.sent) {
      if (s.kind != "FullMap") continue;
      const auto key = std::make_pair(ts.robot, s.to);
      auto it = last_sent.find(key);
      if (it != last_sent.end() && ts.step - it->second < tau) ++violations;
      last_sent[key] = ts.step;
    }
  }
  return violations;
}

// ---------------------------------------------------------------------------
// Batch
// ---------------------------------------------------------------------------

namespace {

EpisodeRow row_from_result(const std::string& episode_id, int n, int m,
                           const EpisodeResult& result) {
  EpisodeRow row;
  row.episode_id = episode_id;
  row.n = n;
  row.m = m;
  row.sr = result.metrics.sr;
  row.mspl = result.metrics.mspl;
  row.d_star = result.metrics.d_star_defined ? result.metrics.d_star : -1.0;
  row.max_dj = result.metrics.max_dj;
  row.steps = result.metrics.avg_steps;
  return row;
}

template <bool Parallel>
BatchReport batch_impl(const std::vector<RunConfig>& configs) {
  BatchReport report;
  report.rows.resize(configs.size());
  const int count = int(configs.size());

  const auto run_one = [&](int i) {
    try {
      const Episode episode = load_episode(configs[i].episode_path);
      const GridScene scene =
          load_scene(derive_scene_path(configs[i], episode.scene_id));
      const EpisodeResult result = run_episode(scene, episode, configs[i]);
      const int n = configs[i].n_agents == 0 ? int(episode.start_poses.size())
                                             : configs[i].n_agents;
      report.rows[i] =
          row_from_result(fs::path(configs[i].episode_path).stem().string(), n,
                          int(episode.goals.size()), result);
    } catch (const std::exception& e) {
      report.rows[i].episode_id = fs::path(configs[i].episode_path).stem().string();
      report.rows[i].ok = false;
      report.rows[i].error = e.what();
    }
  };

  if constexpr (Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < count; ++i) run_one(i);
  } else {
    for (int i = 0; i < count; ++i) run_one(i);
  }

  std::map<int, TeamAggregate> agg;
  std::map<int, std::pair<long, long>> goals_found;  // n -> (found, total)
  for (const EpisodeRow& row : report.rows) {
    if (!row.ok) continue;
    TeamAggregate& a = agg[row.n];
    a.n = row.n;
    a.episodes += 1;
    a.mean_mspl += row.mspl;
    a.mean_steps += row.steps;
    a.mean_max_dj += row.max_dj;
    goals_found[row.n].first += std::lround(row.sr * row.m);
    goals_found[row.n].second += row.m;
  }
  for (auto& [n, a] : agg) {
    a.mean_mspl /= a.episodes;
    a.mean_steps /= a.episodes;
    a.mean_max_dj /= a.episodes;
    const auto& [found, total] = goals_found[n];
    a.sr = total > 0 ? double(found) / double(total) : 0.0;
    report.by_team_size.push_back(a);
  }
  return report;
}

}  // namespace

BatchReport run_batch(const std::vector<RunConfig>& configs) {
  return batch_impl<true>(configs);
}

BatchReport run_batch_serial(const std::vector<RunConfig>& configs) {
  return batch_impl<false>(configs);
}

std::string batch_csv(const BatchReport& report) {
  std::ostringstream out;
  out << "episode_id,n,m,SR,MSPL,d_star,max_dj,steps\n";
  for (const EpisodeRow& row : report.rows) {
    if (!row.ok) {
      out << row.episode_id << ",,,,,,,ERROR: " << row.error << "\n";
      continue;
    }
    out << row.episode_id << "," << row.n << "," << row.m << "," << row.sr << ","
        << row.mspl << "," << row.d_star << "," << row.max_dj << "," << row.steps
        << "\n";
  }
  return out.str();
}

std::string batch_summary_json(const BatchReport& report) {
  json j;
  json teams = json::array();
  for (const TeamAggregate& a : report.by_team_size)
    teams.push_back({{"n", a.n},
                     {"episodes", a.episodes},
                     {"sr", a.sr},
                     {"mean_mspl", a.mean_mspl},
                     {"mean_steps", a.mean_steps},
                     {"mean_max_dj", a.mean_max_dj}});
  j["by_team_size"] = teams;
  int errors = 0;
  for (const EpisodeRow& row : report.rows)
    if (!row.ok) ++errors;
  j["episodes"] = report.rows.size();
  j["errors"] = errors;
  return j.dump(2);
}

EpisodeRow evaluate_trace(const EpisodeTrace& trace, const GridScene& scene,
                          const Episode& episode) {
  EpisodeOutcome outcome;
  outcome.max_steps = trace.max_steps;
  outcome.steps_used = trace.steps_used;
  outcome.distance_m = trace.distance_m;
  for (const GoalSpec& g : episode.goals) {
    GoalOutcome go;
    go.goal_id = g.goal_id;
    for (const GoalEvent& ev : trace.goal_events) {
      if (ev.goal_id == g.goal_id && ev.valid) {
        go.found = true;
        go.finder_robot = ev.robot_id;
        go.step = ev.step;
        break;
      }
    }
    outcome.goals.push_back(go);
  }
  std::vector<Cell> start_cells;
  for (int i = 0; i < trace.n_agents; ++i)
    start_cells.push_back(scene.cell_of(episode.start_poses[i]));
  const EpisodeMetrics metrics =
      evaluate_episode(scene, start_cells, episode.goals, outcome);
  EpisodeRow row;
  row.episode_id = trace.episode_path;
  row.n = trace.n_agents;
  row.m = int(episode.goals.size());
  row.sr = metrics.sr;
  row.mspl = metrics.mspl;
  row.d_star = metrics.d_star_defined ? metrics.d_star : -1.0;
  row.max_dj = metrics.max_dj;
  row.steps = metrics.avg_steps;
  return row;
}

}  // namespace mrnav
