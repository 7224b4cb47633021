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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "mrnav/harness.hpp"
#include "mrnav/render.hpp"
#include "mrnav/scene_gen.hpp"

namespace fs = std::filesystem;
using namespace mrnav;

namespace {

bool verbose() {
  const char* v = std::getenv("MRNAV_VERBOSE");
  return v != nullptr && std::string(v) != "0";
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
}

/// "--agents 2" or "--agents 1..4".
std::vector<int> parse_agent_range(const std::string& spec) {
  const auto dots = spec.find("..");
  if (dots == std::string::npos) return {std::stoi(spec)};
  const int lo = std::stoi(spec.substr(0, dots));
  const int hi = std::stoi(spec.substr(dots + 2));
  std::vector<int> out;
  for (int n = lo; n <= hi; ++n) out.push_back(n);
  return out;
}

int cmd_run(const std::string& episode, std::uint64_t seed, bool has_seed,
            const std::string& out_dir, int agents, double rcomm, int tau,
            bool save_maps) {
  RunConfig cfg;
  cfg.episode_path = episode;
  cfg.out_dir = out_dir;
  cfg.n_agents = agents;
  cfg.comm.r_comm_m = rcomm;
  cfg.comm.tau = tau;
  cfg.save_maps = save_maps;
  if (has_seed) cfg.seed_override = seed;
  const EpisodeResult result = run_episode(cfg);
  std::cout << "episode " << episode << "\n"
            << "  goals found: ";
  int found = 0;
  for (const auto& g : result.outcome.goals) found += g.found ? 1 : 0;
  std::cout << found << "/" << result.outcome.goals.size() << "\n"
            << "  steps: " << result.outcome.steps_used << "\n"
            << "  SR: " << result.metrics.sr << "  MSPL: " << result.metrics.mspl
            << "  d*: " << (result.metrics.d_star_defined ? result.metrics.d_star : -1.0)
            << "  max_dj: " << result.metrics.max_dj << "\n"
            << "  trace hash: " << std::hex << result.trace.hash << std::dec << "\n";
  return 0;
}

int cmd_batch(const std::string& suite, const std::string& agents_spec, double rcomm,
              int tau, const std::string& out_dir) {
  std::vector<fs::path> episodes;
  for (const auto& entry : fs::directory_iterator(suite))
    if (entry.path().extension() == ".episode") episodes.push_back(entry.path());
  std::sort(episodes.begin(), episodes.end());
  if (episodes.empty()) throw ConfigError("batch: no .episode files in " + suite);

  std::vector<RunConfig> configs;
  for (int n : parse_agent_range(agents_spec)) {
    for (const auto& ep : episodes) {
      RunConfig cfg;
      cfg.episode_path = ep.string();
      cfg.n_agents = n;
      cfg.comm.r_comm_m = rcomm;
      cfg.comm.tau = tau;
      configs.push_back(std::move(cfg));
    }
  }
  if (verbose())
    std::cerr << "batch: " << configs.size() << " runs over " << episodes.size()
              << " episodes\n";
  const BatchReport report = run_batch(configs);
  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "episodes.csv", batch_csv(report));
  write_file(fs::path(out_dir) / "summary.json", batch_summary_json(report));
  std::cout << batch_summary_json(report) << "\n";
  return 0;
}

int cmd_eval(const std::string& traces_dir, const std::string& out_dir,
             const std::string& scene_dir) {
  BatchReport report;
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(traces_dir))
    if (entry.path().filename() == "trace.jsonl" ||
        entry.path().extension() == ".jsonl")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("eval: no trace files under " + traces_dir);
  for (const auto& f : files) {
    const EpisodeTrace trace = load_trace(f.string());
    fs::path episode_path = trace.episode_path;
    if (!scene_dir.empty())
      episode_path = fs::path(scene_dir) / episode_path.filename();
    const Episode episode = load_episode(episode_path.string());
    const fs::path scene_path =
        episode_path.parent_path() / (episode.scene_id + ".scene");
    const GridScene scene = load_scene(scene_path.string());
    report.rows.push_back(evaluate_trace(trace, scene, episode));
  }
  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "episodes.csv", batch_csv(report));
  std::cout << batch_csv(report);
  return 0;
}

int cmd_render(const std::string& trace_path, const std::string& kind,
               const std::string& snap_a, const std::string& snap_b,
               const std::string& out_dir, const std::string& scene_path) {
  fs::create_directories(out_dir);
  if (kind == "trajectory") {
    const EpisodeTrace trace = load_trace(trace_path);
    fs::path ep_path = trace.episode_path;
    const Episode episode = load_episode(ep_path.string());
    const fs::path sp = scene_path.empty()
                            ? ep_path.parent_path() / (episode.scene_id + ".scene")
                            : fs::path(scene_path);
    const GridScene scene = load_scene(sp.string());
    render_trajectory(scene, trace, (fs::path(out_dir) / "trajectory.svg").string());
    std::cout << "wrote " << (fs::path(out_dir) / "trajectory.svg").string() << "\n";
    return 0;
  }
  if (kind == "frontier") {
    const MapSnapshot snap = load_snapshot(snap_a);
    render_frontier(snap, (fs::path(out_dir) / "frontier.svg").string());
    std::cout << "wrote " << (fs::path(out_dir) / "frontier.svg").string() << "\n";
    return 0;
  }
  if (kind == "merge_overlay") {
    const MapSnapshot a = load_snapshot(snap_a);
    const MapSnapshot b = load_snapshot(snap_b);
    Rng rng(1);
    const auto result =
        align_maps(a.map, a.registry, b.map, b.registry, rng, AlignParams{});
    if (!result || !result->accepted)
      throw ValidationError("render: maps could not be aligned");
    const std::string prefix = (fs::path(out_dir) / "merge").string();
    render_merge_overlay(a, b, result->transform, prefix);
    std::cout << "wrote " << prefix << "_{a,b,overlay,merged}.svg\n";
    return 0;
  }
  throw ConfigError("render: unknown kind '" + kind + "'");
}

int cmd_gen_scenes(int count, std::uint64_t seed, const std::string& out_dir,
                   int width, int height, int goals, int agents, int instances,
                   int max_steps) {
  GenParams params;
  params.width = width;
  params.height = height;
  params.n_goals = goals;
  params.n_starts = agents;
  params.n_instances = instances;
  params.max_steps = max_steps;
  fs::create_directories(out_dir);
  for (int i = 0; i < count; ++i) {
    const std::uint64_t s = seed + std::uint64_t(i);
    const GridScene scene = generate_scene(s, params);
    const Episode episode = generate_episode(scene, s, params);
    write_file(fs::path(out_dir) / (scene.scene_id() + ".scene"), scene_to_json(scene));
    write_file(fs::path(out_dir) / (scene.scene_id() + ".episode"),
               episode_to_json(episode));
  }
  std::cout << "wrote " << count << " scene/episode pairs to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mrnav: decentralized multi-robot semantic navigation simulator"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run one episode");
  std::string episode, out_dir = "out";
  std::uint64_t seed = 0;
  bool has_seed = false;
  int agents = 0, tau = 10;
  double rcomm = 5.0;
  bool save_maps = false;
  run->add_option("--episode", episode, "Episode file")->required();
  run->add_option("--seed", seed, "Seed override")->each([&](const std::string&) {
    has_seed = true;
  });
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--agents", agents, "Team size (0 = all episode starts)");
  run->add_option("--rcomm", rcomm, "Communication range, meters");
  run->add_option("--tau", tau, "Full-map cooldown, steps");
  run->add_flag("--save-maps", save_maps, "Write final per-robot map snapshots");

  // batch
  auto* batch = app.add_subcommand("batch", "Run an episode suite");
  std::string suite, agents_spec = "0", batch_out = "batch_out";
  double brcomm = 5.0;
  int btau = 10;
  batch->add_option("--suite", suite, "Directory of .episode files")->required();
  batch->add_option("--agents", agents_spec, "Team size or range, e.g. 2 or 1..4");
  batch->add_option("--rcomm", brcomm, "Communication range, meters");
  batch->add_option("--tau", btau, "Full-map cooldown, steps");
  batch->add_option("--out", batch_out, "Output directory");

  // eval
  auto* eval = app.add_subcommand("eval", "Recompute metrics from saved traces");
  std::string traces_dir, eval_out = "eval_out", scene_dir;
  eval->add_option("--traces", traces_dir, "Directory of trace.jsonl files")->required();
  eval->add_option("--out", eval_out, "Output directory");
  eval->add_option("--scene-dir", scene_dir, "Override directory for episode/scene files");

  // render
  auto* render = app.add_subcommand("render", "Render a trace or snapshot");
  std::string trace_path, kind = "trajectory", snap_a, snap_b, render_out = "render_out",
              scene_path;
  render->add_option("--trace", trace_path, "Trace file (trajectory)");
  render->add_option("--kind", kind, "trajectory | frontier | merge_overlay");
  render->add_option("--snap-a", snap_a, "Snapshot base path (frontier, merge_overlay)");
  render->add_option("--snap-b", snap_b, "Second snapshot base path (merge_overlay)");
  render->add_option("--scene", scene_path, "Scene file override");
  render->add_option("--out", render_out, "Output directory");

  // gen-scenes
  auto* gen = app.add_subcommand("gen-scenes", "Generate synthetic scenes + episodes");
  int count = 10, width = 40, height = 40, goals = 5, gagents = 4, instances = 8,
      max_steps = 200;
  std::uint64_t gseed = 1;
  std::string gen_out = "scenes";
  gen->add_option("--count", count, "Number of scene/episode pairs");
  gen->add_option("--seed", gseed, "Base seed");
  gen->add_option("--out", gen_out, "Output directory");
  gen->add_option("--width", width, "Grid width, cells");
  gen->add_option("--height", height, "Grid height, cells");
  gen->add_option("--goals", goals, "Goals per episode");
  gen->add_option("--agents", gagents, "Start poses per episode");
  gen->add_option("--instances", instances, "Object instances per scene");
  gen->add_option("--max-steps", max_steps, "Episode step budget");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(episode, seed, has_seed, out_dir, agents, rcomm, tau, save_maps);
    if (batch->parsed()) return cmd_batch(suite, agents_spec, brcomm, btau, batch_out);
    if (eval->parsed()) return cmd_eval(traces_dir, eval_out, scene_dir);
    if (render->parsed())
      return cmd_render(trace_path, kind, snap_a, snap_b, render_out, scene_path);
    if (gen->parsed())
      return cmd_gen_scenes(count, gseed, gen_out, width, height, goals, gagents,
                            instances, max_steps);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
