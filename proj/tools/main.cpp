#include <CLI11.hpp>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <thread>

#include "poseref/datagen.hpp"
#include "poseref/il_dataset.hpp"
#include "poseref/metrics.hpp"
#include "poseref/scene_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace poseref;

namespace {

constexpr const char* kVersion = "0.1.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int log_level() {
  const char* env = std::getenv("POSEREF_LOG");
  if (!env) return 1;
  const std::string v = env;
  if (v == "quiet") return 0;
  if (v == "debug") return 2;
  return 1;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << msg << "\n";
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return base + index * 0x9E3779B97F4A7C15ULL;
}

// Run manifest, written atomically at the end of every command.
class Manifest {
 public:
  Manifest(std::string command, std::string config_dump, std::uint64_t seed)
      : start_(std::chrono::steady_clock::now()) {
    j_["command"] = std::move(command);
    j_["config_hash"] = hex64(fnv1a64(config_dump));
    j_["seed"] = seed;
    j_["tool_version"] = kVersion;
    j_["outputs"] = json::array();
  }

  void stage_done(const std::string& name) {
    const auto now = std::chrono::steady_clock::now();
    j_["timings"][name] = std::chrono::duration<double>(now - start_).count();
    start_ = now;
  }

  void add_output(const std::string& path) { j_["outputs"].push_back(path); }

  void write(const fs::path& dir) const {
    const fs::path path = dir / "manifest.json";
    const fs::path tmp = dir / "manifest.json.tmp";
    {
      std::ofstream out(tmp);
      out << j_.dump(2) << "\n";
    }
    fs::rename(tmp, path);
  }

 private:
  json j_;
  std::chrono::steady_clock::time_point start_;
};

json load_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(std::string(what) + ": cannot open " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(what) + ": invalid JSON in " + path + ": " + e.what());
  }
}

// Runs fn(i) for i in [0,total) over `workers` threads; work is independent
// per index so the schedule does not affect outputs.
void parallel_for(std::size_t total, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || total <= 1) {
    for (std::size_t i = 0; i < total; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next.fetch_add(1); i < total; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<fs::path> list_scene_dirs(const std::string& scenes_dir) {
  if (!fs::is_directory(scenes_dir)) throw DataError("scenes dir not found: " + scenes_dir);
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(scenes_dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "scene.json")) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw DataError("no scene bundles under " + scenes_dir);
  return dirs;
}

// ---------------------------------------------------------------------------
// generate

ScenarioConfig scenario_from_json(const json& j) {
  ScenarioConfig cfg;
  if (j.contains("objects")) {
    const auto& range = j.at("objects");
    if (!range.is_array() || range.size() != 2) throw ConfigError("config field 'objects': expected [min,max]");
    cfg.min_objects = range[0].get<int>();
    cfg.max_objects = range[1].get<int>();
  }
  if (j.contains("primitives")) cfg.primitives = j.at("primitives").get<std::vector<std::string>>();
  if (j.contains("plane_extent")) cfg.plane_extent = j.at("plane_extent").get<double>();
  if (j.contains("depth_noise_sigma")) cfg.depth_noise_sigma = j.at("depth_noise_sigma").get<double>();
  if (j.contains("points_per_object")) cfg.points_per_object = j.at("points_per_object").get<std::size_t>();
  if (j.contains("model_seed")) cfg.model_seed = j.at("model_seed").get<std::uint64_t>();
  if (j.contains("camera_distance")) {
    cfg.camera_distance_min = j.at("camera_distance")[0].get<double>();
    cfg.camera_distance_max = j.at("camera_distance")[1].get<double>();
  }
  if (j.contains("camera_tilt_max_deg")) cfg.camera_tilt_max_deg = j.at("camera_tilt_max_deg").get<double>();
  if (j.contains("stack_probability")) cfg.stack_probability = j.at("stack_probability").get<double>();
  if (j.contains("camera")) {
    const auto& c = j.at("camera");
    cfg.camera.fx = c.at("fx").get<double>();
    cfg.camera.fy = c.at("fy").get<double>();
    cfg.camera.cx = c.at("cx").get<double>();
    cfg.camera.cy = c.at("cy").get<double>();
    cfg.camera.width = c.at("width").get<int>();
    cfg.camera.height = c.at("height").get<int>();
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid scenario config: ") + e.what());
  }
  return cfg;
}

int cmd_generate(const std::string& config_path, const std::string& out_dir, std::uint64_t seed,
                 int count, int workers) {
  const json cfg_json = config_path.empty() ? json::object() : load_json_file(config_path, "config");
  const ScenarioConfig cfg = scenario_from_json(cfg_json);
  if (cfg_json.contains("scenes") && count <= 0) count = cfg_json.at("scenes").get<int>();
  if (count <= 0) count = 10;

  fs::create_directories(out_dir);
  Manifest manifest("generate", cfg_json.dump() + std::to_string(count), seed);

  std::vector<std::string> bundle_dirs(static_cast<std::size_t>(count));
  parallel_for(static_cast<std::size_t>(count), workers, [&](std::size_t i) {
    char name[32];
    std::snprintf(name, sizeof(name), "scene_%04zu", i);
    const fs::path dir = fs::path(out_dir) / name;
    fs::create_directories(dir);

    SceneBundle bundle;
    bundle.sample = generate_scene(cfg, derive_seed(seed, i));
    bundle.observation =
        render_observation(bundle.sample, cfg.depth_noise_sigma, derive_seed(seed, i) ^ 0xA5A5A5A5ULL);
    bundle.points_per_object = cfg.points_per_object;
    bundle.model_seed = cfg.model_seed;
    save_scene_bundle(bundle, dir.string());
    bundle_dirs[i] = dir.string();
  });
  manifest.stage_done("generate");
  for (const auto& d : bundle_dirs) manifest.add_output(d);
  manifest.write(out_dir);
  log_info("generated " + std::to_string(count) + " scene bundles under " + out_dir);
  return 0;
}

// ---------------------------------------------------------------------------
// refine

struct RefineFlags {
  std::string scenes_dir;
  std::string out_dir;
  std::string policy = "expert";
  int iterations = 10;
  double epsilon = 0.01;
  double tau_d = 0.02;
  double tau_n = 0.7;
  std::vector<double> steps = {0.0033, 0.01, 0.03, 0.09, 0.27};
  std::vector<double> rho = {0.6, 0.1, 0.5};
  double rho_p = 0.5;
  double rot_error_deg = 90.0;
  double trans_error_units = 1.0;
  double plane_rot_jitter_deg = 5.0;
  double plane_trans_jitter = 0.02;
  double foreground_min = 0.5;
  double foreground_max = 1.0;
  std::size_t points = 1024;
  std::uint64_t seed = 1;
  int workers = 1;
};

EnvConfig env_config_from_flags(const RefineFlags& f) {
  EnvConfig cfg;
  cfg.action_space.step_sizes = f.steps;
  try {
    cfg.action_space.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid step sizes: ") + e.what());
  }
  if (f.rho.size() != 3) throw ConfigError("--rho expects three values");
  cfg.rho = {f.rho[0], f.rho[1], f.rho[2]};
  cfg.rho_p = f.rho_p;
  cfg.plausibility.epsilon = f.epsilon;
  cfg.iterations = f.iterations;
  return cfg;
}

AugmentationConfig augmentation_from_flags(const RefineFlags& f) {
  AugmentationConfig aug;
  aug.rotation_error_max_deg = f.rot_error_deg;
  aug.translation_error_max_units = f.trans_error_units;
  aug.plane_rotation_jitter_max_deg = f.plane_rot_jitter_deg;
  aug.plane_translation_jitter_max = f.plane_trans_jitter;
  aug.foreground_fraction_min = f.foreground_min;
  aug.foreground_fraction_max = f.foreground_max;
  aug.points_per_object = f.points;
  try {
    aug.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid augmentation flags: ") + e.what());
  }
  return aug;
}

PolicyKind policy_from_name(const std::string& name) {
  if (name == "expert") return PolicyKind::kExpert;
  if (name == "greedy") return PolicyKind::kGreedy;
  throw ConfigError("unknown policy '" + name + "' (expected expert|greedy)");
}

void write_trajectory_csv(const std::string& path, const std::vector<Trajectory>& trajectories) {
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  out.precision(17);
  out << "iteration,object,rot_x,rot_y,rot_z,trans_x,trans_y,trans_z,chamfer,"
         "reward_alignment,reward_plausibility,intersecting,floating,feasible,stable,score\n";
  for (const Trajectory& traj : trajectories) {
    for (const TrajectoryStep& s : traj.steps) {
      out << s.iteration << ',' << traj.object_index << ',' << s.action.rotation[0] << ','
          << s.action.rotation[1] << ',' << s.action.rotation[2] << ',' << s.action.translation[0]
          << ',' << s.action.translation[1] << ',' << s.action.translation[2] << ','
          << s.chamfer_after << ',' << s.alignment_reward << ',' << s.plausibility_reward << ','
          << s.verdict_after.intersecting << ',' << s.verdict_after.floating << ','
          << s.verdict_after.feasible << ',' << s.verdict_after.stable << ',' << s.score << '\n';
    }
  }
}

int cmd_refine(const RefineFlags& flags) {
  const PolicyKind policy = policy_from_name(flags.policy);
  const EnvConfig env_cfg = env_config_from_flags(flags);
  const AugmentationConfig aug = augmentation_from_flags(flags);

  const auto scene_dirs = list_scene_dirs(flags.scenes_dir);
  fs::create_directories(flags.out_dir);

  json cfg_dump;
  cfg_dump["flags"] = {flags.policy, std::to_string(flags.iterations), std::to_string(flags.epsilon)};
  Manifest manifest("refine", cfg_dump.dump(), flags.seed);

  std::vector<json> per_scene(scene_dirs.size());
  std::vector<int> improved(scene_dirs.size(), 0), total(scene_dirs.size(), 0);

  parallel_for(scene_dirs.size(), flags.workers, [&](std::size_t si) {
    const SceneBundle bundle = load_scene_bundle(scene_dirs[si].string());
    EpisodeBuildResult episode = build_episode(bundle.sample, aug, 0.0,
                                               derive_seed(flags.seed, si), &bundle.observation);

    if (bundle.fit_plane_from_background) {
      PointCloud background;
      for (int r = 0; r < bundle.observation.labels.height; ++r) {
        for (int c = 0; c < bundle.observation.labels.width; ++c) {
          const float d = bundle.observation.depth.at(c, r);
          if (d > 0.0f && bundle.observation.labels.at(c, r) == 0) {
            background.points.push_back(bundle.sample.camera.backproject(c, r, d));
          }
        }
      }
      episode.scene.plane = fit_plane_ransac(background, 256, 0.005, derive_seed(flags.seed, si) ^ 0x51ULL);
    }

    RefinementEnv env(episode.scene, env_cfg);
    ScoringContext scoring;
    scoring.cam = bundle.sample.camera;
    scoring.observed_depth = &bundle.observation.depth;
    scoring.observed_normals = &bundle.observation.normals;
    scoring.masks = episode.masks;
    scoring.score.tau_d = flags.tau_d;
    scoring.score.tau_n = flags.tau_n;
    const auto trajectories = env.run(policy, nullptr, &scoring);

    const fs::path scene_out = fs::path(flags.out_dir) / scene_dirs[si].filename();
    fs::create_directories(scene_out);
    write_trajectory_csv((scene_out / "trajectory.csv").string(), trajectories);

    json best = json::array();
    for (std::size_t oi = 0; oi < trajectories.size(); ++oi) {
      const Trajectory& traj = trajectories[oi];
      const auto poses = traj.poses();
      const auto [best_idx, best_pose] = select_best_pose(
          poses, bundle.sample.objects[oi].model->mesh, bundle.sample.camera,
          bundle.observation.depth, bundle.observation.normals, episode.masks[oi], scoring.score);

      const PointCloud& model_cloud = bundle.sample.objects[oi].model->target_cloud;
      const RigidTransform& gt = bundle.sample.objects[oi].gt_pose;
      const double add_init = add_distance(model_cloud, gt, traj.init_pose);
      const double add_best = add_distance(model_cloud, gt, best_pose);
      improved[si] += add_best < add_init ? 1 : 0;
      total[si] += 1;

      json o;
      o["object_index"] = oi;
      o["class_id"] = traj.class_id;
      o["primitive"] = bundle.sample.objects[oi].primitive;
      o["best_iteration"] = best_idx;  // 0 = initial pose
      o["pose"] = transform_to_json(best_pose);
      o["init_pose"] = transform_to_json(traj.init_pose);
      o["gt_pose"] = transform_to_json(gt);
      o["add_init"] = add_init;
      o["add_best"] = add_best;
      o["adi_best"] = adi_distance(model_cloud, gt, best_pose);
      best.push_back(o);
    }
    json scene_json;
    scene_json["scene"] = scene_dirs[si].filename().string();
    scene_json["objects"] = best;
    per_scene[si] = scene_json;

    const fs::path best_path = scene_out / "best_poses.json";
    std::ofstream out(best_path);
    out << scene_json.dump(2) << "\n";
  });
  manifest.stage_done("refine");

  int sum_improved = 0, sum_total = 0;
  for (std::size_t i = 0; i < scene_dirs.size(); ++i) {
    sum_improved += improved[i];
    sum_total += total[i];
  }
  json summary;
  summary["scenes"] = scene_dirs.size();
  summary["objects"] = sum_total;
  summary["improved"] = sum_improved;
  summary["improvement_rate"] =
      sum_total > 0 ? static_cast<double>(sum_improved) / sum_total : 0.0;
  summary["policy"] = flags.policy;
  {
    std::ofstream out(fs::path(flags.out_dir) / "summary.json");
    out << summary.dump(2) << "\n";
  }
  manifest.add_output((fs::path(flags.out_dir) / "summary.json").string());
  manifest.write(flags.out_dir);
  log_info("refined " + std::to_string(scene_dirs.size()) + " scenes; improvement rate " +
           std::to_string(summary["improvement_rate"].get<double>()));
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

int cmd_evaluate(const std::string& estimates_dir, const std::string& scenes_dir,
                 const std::string& out_dir) {
  const auto scene_dirs = list_scene_dirs(scenes_dir);
  fs::create_directories(out_dir);
  Manifest manifest("evaluate", estimates_dir + scenes_dir, 0);

  std::vector<EvalRecord> records;
  std::ofstream csv(fs::path(out_dir) / "metrics.csv");
  csv.precision(17);
  csv << "scene,object,class_id,symmetric,add,adi,ad,diameter\n";

  for (const auto& scene_dir : scene_dirs) {
    const fs::path best_path = fs::path(estimates_dir) / scene_dir.filename() / "best_poses.json";
    if (!fs::exists(best_path)) throw DataError("missing estimates: " + best_path.string());
    const json best = load_json_file(best_path.string(), "estimates");
    const SceneBundle bundle = load_scene_bundle(scene_dir.string());

    for (const json& o : best.at("objects")) {
      const std::size_t oi = o.at("object_index").get<std::size_t>();
      if (oi >= bundle.sample.objects.size()) {
        throw DataError("object index mismatch in " + best_path.string());
      }
      const PlacedObject& placed = bundle.sample.objects[oi];
      if (o.at("class_id").get<int>() != placed.model->class_id) {
        throw DataError("class id mismatch in " + best_path.string());
      }
      const RigidTransform est = transform_from_json(o.at("pose"));

      EvalRecord rec;
      rec.class_id = placed.model->class_id;
      rec.add = add_distance(placed.model->target_cloud, placed.gt_pose, est);
      rec.adi = adi_distance(placed.model->target_cloud, placed.gt_pose, est);
      rec.diameter = placed.model->diameter;
      rec.symmetric = placed.model->symmetry.variant != SymmetryVariant::kNone;
      records.push_back(rec);
      csv << scene_dir.filename().string() << ',' << oi << ',' << rec.class_id << ','
          << rec.symmetric << ',' << rec.add << ',' << rec.adi << ',' << rec.ad() << ','
          << rec.diameter << '\n';
    }
  }
  if (records.empty()) throw DataError("no evaluation records");

  // Per-class and mean summaries, thresholds relative to the diameter plus the
  // absolute-threshold AUC.
  auto summarize = [&](const std::vector<EvalRecord>& recs) {
    json s;
    s["count"] = recs.size();
    s["recall_0.10d"] = recall_at(recs, 0.10);
    s["recall_0.05d"] = recall_at(recs, 0.05);
    s["recall_0.02d"] = recall_at(recs, 0.02);
    s["auc_10cm"] = auc(recs, 0.10, 1000);
    return s;
  };

  json summary;
  summary["mean"] = summarize(records);
  std::map<int, std::vector<EvalRecord>> by_class;
  for (const EvalRecord& r : records) by_class[r.class_id].push_back(r);
  json per_class = json::object();
  for (const auto& [cid, recs] : by_class) per_class[std::to_string(cid)] = summarize(recs);
  summary["per_class"] = per_class;
  {
    std::ofstream out(fs::path(out_dir) / "summary.json");
    out << summary.dump(2) << "\n";
  }
  manifest.stage_done("evaluate");
  manifest.add_output((fs::path(out_dir) / "summary.json").string());
  manifest.write(out_dir);
  log_info("evaluated " + std::to_string(records.size()) + " object estimates");
  return 0;
}

// ---------------------------------------------------------------------------
// export-il

int cmd_export_il(const std::string& scenes_dir, const std::string& out_file, int count,
                  const RefineFlags& flags) {
  const EnvConfig base_cfg = env_config_from_flags(flags);
  const AugmentationConfig aug = augmentation_from_flags(flags);
  const auto scene_dirs = list_scene_dirs(scenes_dir);

  Manifest manifest("export-il", out_file + std::to_string(count), flags.seed);
  std::vector<Trajectory> collected;
  std::uint64_t pass = 0;
  while (static_cast<int>(collected.size()) < count) {
    for (std::size_t si = 0; si < scene_dirs.size() && static_cast<int>(collected.size()) < count;
         ++si) {
      const SceneBundle bundle = load_scene_bundle(scene_dirs[si].string());
      EpisodeBuildResult episode =
          build_episode(bundle.sample, aug, 0.0,
                        derive_seed(flags.seed, pass * scene_dirs.size() + si), &bundle.observation);

      EnvConfig cfg = base_cfg;
      cfg.record_observations = true;
      RefinementEnv env(episode.scene, cfg);
      auto trajectories = env.run(PolicyKind::kExpert);
      for (auto& t : trajectories) {
        if (static_cast<int>(collected.size()) < count) collected.push_back(std::move(t));
      }
    }
    ++pass;
  }
  export_il_dataset(collected, out_file);
  manifest.stage_done("export");
  manifest.add_output(out_file);
  manifest.write(fs::path(out_file).parent_path().empty() ? fs::path(".")
                                                          : fs::path(out_file).parent_path());
  log_info("exported " + std::to_string(collected.size()) + " expert trajectories to " + out_file);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scene-level object pose refinement toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate synthetic ground-truthed scene bundles");
  std::string gen_config, gen_out = "scenes";
  std::uint64_t gen_seed = 1;
  int gen_count = 0, gen_workers = 1;
  gen->add_option("--config", gen_config, "Scenario config JSON");
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--seed", gen_seed, "Base seed");
  gen->add_option("--count", gen_count, "Number of scenes (overrides config)");
  gen->add_option("--workers", gen_workers, "Parallel scene workers");

  // refine
  auto* ref = app.add_subcommand("refine", "Refine perturbed poses over scene bundles");
  RefineFlags rf;
  ref->add_option("--scenes", rf.scenes_dir, "Scene bundle directory")->required();
  ref->add_option("--out", rf.out_dir, "Output directory")->required();
  ref->add_option("--policy", rf.policy, "expert|greedy");
  ref->add_option("--iterations", rf.iterations, "Refinement iterations");
  ref->add_option("--epsilon", rf.epsilon, "Critical-point threshold (m)");
  ref->add_option("--tau-d", rf.tau_d, "Depth score clamp (m)");
  ref->add_option("--tau-n", rf.tau_n, "Normal score clamp");
  ref->add_option("--steps", rf.steps, "Step sizes")->delimiter(',');
  ref->add_option("--rho", rf.rho, "Alignment reward magnitudes (worsen,stagnate,improve)")->delimiter(',');
  ref->add_option("--rho-p", rf.rho_p, "Plausibility reward magnitude");
  ref->add_option("--rot-error", rf.rot_error_deg, "Max init rotation error (deg)");
  ref->add_option("--trans-error", rf.trans_error_units, "Max init translation error (units)");
  ref->add_option("--plane-rot-jitter", rf.plane_rot_jitter_deg, "Plane rotation jitter (deg)");
  ref->add_option("--plane-trans-jitter", rf.plane_trans_jitter, "Plane translation jitter (m)");
  ref->add_option("--foreground-min", rf.foreground_min, "Min foreground fraction");
  ref->add_option("--foreground-max", rf.foreground_max, "Max foreground fraction");
  ref->add_option("--points", rf.points, "Points per object");
  ref->add_option("--seed", rf.seed, "Base seed");
  ref->add_option("--workers", rf.workers, "Parallel scene workers");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "ADD/ADI recalls and AUC for refined poses");
  std::string ev_estimates, ev_scenes, ev_out = "eval";
  ev->add_option("--estimates", ev_estimates, "Refine output directory")->required();
  ev->add_option("--scenes", ev_scenes, "Scene bundle directory")->required();
  ev->add_option("--out", ev_out, "Output directory");

  // export-il
  auto* il = app.add_subcommand("export-il", "Export expert trajectories for imitation learning");
  RefineFlags ilf;
  std::string il_out = "il_dataset.jsonl";
  int il_count = 128;
  il->add_option("--scenes", ilf.scenes_dir, "Scene bundle directory")->required();
  il->add_option("--out", il_out, "Output JSONL file");
  il->add_option("--count", il_count, "Number of object trajectories");
  il->add_option("--iterations", ilf.iterations, "Refinement iterations");
  il->add_option("--points", ilf.points, "Points per object");
  il->add_option("--steps", ilf.steps, "Step sizes")->delimiter(',');
  il->add_option("--epsilon", ilf.epsilon, "Critical-point threshold (m)");
  il->add_option("--rot-error", ilf.rot_error_deg, "Max init rotation error (deg)");
  il->add_option("--trans-error", ilf.trans_error_units, "Max init translation error (units)");
  il->add_option("--seed", ilf.seed, "Base seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return cmd_generate(gen_config, gen_out, gen_seed, gen_count, gen_workers);
    if (ref->parsed()) return cmd_refine(rf);
    if (ev->parsed()) return cmd_evaluate(ev_estimates, ev_scenes, ev_out);
    if (il->parsed()) return cmd_export_il(ilf.scenes_dir, il_out, il_count, ilf);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
