#include "poseref/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "poseref/rng.hpp"

namespace poseref {

namespace {

// Flips all faces when the signed volume is negative so normals point outward.
void ensure_outward(TriangleMesh& mesh) {
  double vol = 0.0;
  for (const auto& f : mesh.faces) {
    vol += mesh.vertices[f[0]].dot(mesh.vertices[f[1]].cross(mesh.vertices[f[2]])) / 6.0;
  }
  if (vol < 0.0) {
    for (auto& f : mesh.faces) std::swap(f[1], f[2]);
  }
  mesh.compute_face_normals();
}

void center_at_volume_centroid(TriangleMesh& mesh) {
  const Vec3 c = mesh.volume_centroid();
  for (Vec3& v : mesh.vertices) v -= c;
  mesh.compute_face_normals();
}

Rotation basis_from_normal(const Vec3& normal) {
  const Vec3 helper = std::abs(normal.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 u = (helper - helper.dot(normal) * normal).normalized();
  const Vec3 v = normal.cross(u);
  Mat3 m;
  m.col(0) = u;
  m.col(1) = v;
  m.col(2) = normal;
  return Rotation::from_matrix(m);
}

Vec3 rng_unit(Rng& rng) {
  const auto v = rng.unit_vector();
  return Vec3(v[0], v[1], v[2]);
}

}  // namespace

TriangleMesh make_box(double width, double depth, double height) {
  if (width <= 0.0 || depth <= 0.0 || height <= 0.0) {
    throw std::invalid_argument("make_box: extents must be positive");
  }
  const double x = width / 2, y = depth / 2, z = height / 2;
  TriangleMesh m;
  m.vertices = {{-x, -y, -z}, {x, -y, -z}, {x, y, -z}, {-x, y, -z},
                {-x, -y, z},  {x, -y, z},  {x, y, z},  {-x, y, z}};
  m.faces = {{0, 2, 1}, {0, 3, 2},   // bottom (z = -z, normal down)
             {4, 5, 6}, {4, 6, 7},   // top
             {0, 1, 5}, {0, 5, 4},   // front (y = -y)
             {1, 2, 6}, {1, 6, 5},   // right
             {2, 3, 7}, {2, 7, 6},   // back
             {3, 0, 4}, {3, 4, 7}};  // left
  ensure_outward(m);
  return m;
}

TriangleMesh make_cylinder(double radius, double height, int segments) {
  if (radius <= 0.0 || height <= 0.0 || segments < 3) {
    throw std::invalid_argument("make_cylinder: bad parameters");
  }
  TriangleMesh m;
  const double z = height / 2;
  for (int i = 0; i < segments; ++i) {
    const double a = 2.0 * M_PI * i / segments;
    m.vertices.emplace_back(radius * std::cos(a), radius * std::sin(a), -z);
    m.vertices.emplace_back(radius * std::cos(a), radius * std::sin(a), z);
  }
  const std::uint32_t bottom_center = static_cast<std::uint32_t>(m.vertices.size());
  m.vertices.emplace_back(0, 0, -z);
  const std::uint32_t top_center = bottom_center + 1;
  m.vertices.emplace_back(0, 0, z);

  for (int i = 0; i < segments; ++i) {
    const std::uint32_t b0 = static_cast<std::uint32_t>(2 * i);
    const std::uint32_t t0 = b0 + 1;
    const std::uint32_t b1 = static_cast<std::uint32_t>(2 * ((i + 1) % segments));
    const std::uint32_t t1 = b1 + 1;
    m.faces.push_back({b0, b1, t1});
    m.faces.push_back({b0, t1, t0});
    m.faces.push_back({bottom_center, b1, b0});
    m.faces.push_back({top_center, t0, t1});
  }
  ensure_outward(m);
  return m;
}

TriangleMesh make_l_shape(double leg_long, double leg_short, double thickness, double depth) {
  if (thickness <= 0.0 || leg_long <= thickness || leg_short <= thickness || depth <= 0.0) {
    throw std::invalid_argument("make_l_shape: bad parameters");
  }
  // L profile in the xz-plane, CCW; vertex 3 is the reflex corner.
  const std::vector<Eigen::Vector2d> profile = {
      {0, 0}, {leg_long, 0}, {leg_long, thickness}, {thickness, thickness},
      {thickness, leg_short}, {0, leg_short}};
  const double y = depth / 2;

  TriangleMesh m;
  for (const auto& p : profile) m.vertices.emplace_back(p.x(), -y, p.y());
  for (const auto& p : profile) m.vertices.emplace_back(p.x(), y, p.y());
  const std::uint32_t n = static_cast<std::uint32_t>(profile.size());

  // End caps: fan from the reflex vertex (index 3) covers the L.
  const std::uint32_t fan[4][3] = {{3, 4, 5}, {3, 5, 0}, {3, 0, 1}, {3, 1, 2}};
  for (const auto& f : fan) {
    m.faces.push_back({f[0], f[2], f[1]});              // -y cap, wound toward -y
    m.faces.push_back({f[0] + n, f[1] + n, f[2] + n});  // +y cap
  }
  // Side walls.
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t j = (i + 1) % n;
    m.faces.push_back({i, j, j + n});
    m.faces.push_back({i, j + n, i + n});
  }
  ensure_outward(m);
  center_at_volume_centroid(m);
  return m;
}

std::vector<PrimitiveSpec> default_primitives() {
  std::vector<PrimitiveSpec> specs;
  specs.push_back({"box", 0, {SymmetryVariant::kBox, 5.0}, make_box(0.10, 0.07, 0.05)});
  specs.push_back({"square_box", 1, {SymmetryVariant::kCuboid, 5.0}, make_box(0.07, 0.07, 0.05)});
  specs.push_back({"cylinder", 2, {SymmetryVariant::kCylindrical, 5.0}, make_cylinder(0.035, 0.09)});
  specs.push_back({"l_shape", 3, {SymmetryVariant::kNone, 5.0}, make_l_shape(0.09, 0.06, 0.025, 0.05)});
  return specs;
}

void ScenarioConfig::validate() const {
  if (min_objects < 1 || max_objects < min_objects) {
    throw std::invalid_argument("ScenarioConfig: bad object count range");
  }
  if (primitives.empty()) throw std::invalid_argument("ScenarioConfig: empty primitive set");
  if (depth_noise_sigma < 0.0) throw std::invalid_argument("ScenarioConfig: negative noise sigma");
  if (points_per_object < 16) throw std::invalid_argument("ScenarioConfig: too few points per object");
  if (plane_extent <= 0.0) throw std::invalid_argument("ScenarioConfig: bad plane extent");
  camera.validate();
  const auto known = default_primitives();
  for (const std::string& name : primitives) {
    const bool ok = std::any_of(known.begin(), known.end(),
                                [&](const PrimitiveSpec& s) { return s.kind == name; });
    if (!ok) throw std::invalid_argument("ScenarioConfig: unknown primitive '" + name + "'");
  }
}

namespace {

// Stable resting orientations (canonical -> plane frame, before yaw).
std::vector<Rotation> base_orientations(const std::string& kind) {
  if (kind == "cylinder") return {Rotation()};
  if (kind == "l_shape") return {Rotation(), Rotation::rot_x(M_PI / 2)};
  return {Rotation(), Rotation::rot_x(M_PI / 2), Rotation::rot_y(M_PI / 2)};
}

// Minimum signed surface distance of the object's cloud at pose height z.
double drop_distance(const PointCloud& canon_cloud, const Rotation& rot, double x, double y,
                     double z, const SceneDistanceIndex& index) {
  const RigidTransform pose(rot, Vec3(x, y, z));
  const PointCloud placed = canon_cloud.transformed(pose);
  const SurfaceDistanceField field = index.query(placed, SceneDistanceIndex::npos);
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& e : field.entries) lowest = std::min(lowest, e.distance);
  return lowest;
}

}  // namespace

SceneSample generate_scene(const ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);

  const auto all_specs = default_primitives();
  std::vector<const PrimitiveSpec*> specs;
  for (const std::string& name : cfg.primitives) {
    for (const auto& s : all_specs) {
      if (s.kind == name) specs.push_back(&s);
    }
  }

  // Models are shared per primitive kind; target clouds resampled per config.
  std::map<std::string, std::shared_ptr<ObjectModel>> models;
  for (const PrimitiveSpec* s : specs) {
    models[s->kind] = std::make_shared<ObjectModel>(build_object_model(
        s->mesh, s->symmetry, s->class_id, cfg.points_per_object,
        cfg.model_seed + static_cast<std::uint64_t>(s->class_id)));
  }

  SceneSample sample;
  sample.camera = cfg.camera;
  sample.plane_extent = cfg.plane_extent;

  // Plane pose: origin in front of the camera, normal tilted toward it.
  const double dist = rng.uniform(cfg.camera_distance_min, cfg.camera_distance_max);
  const double tilt = rng.uniform(0.0, cfg.camera_tilt_max_deg * M_PI / 180.0);
  const double tilt_dir = rng.uniform(0.0, 2.0 * M_PI);
  const Vec3 tilt_axis(std::cos(tilt_dir), std::sin(tilt_dir), 0.0);
  const Vec3 normal = Rotation::axis_angle(tilt_axis, tilt) * Vec3(0, 0, -1);
  const Vec3 origin(rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05), dist);
  const RigidTransform plane_in_cam(basis_from_normal(normal), origin);
  sample.plane.pose = plane_in_cam.inverse();
  sample.plane.inlier_count = 0;

  const int count = cfg.min_objects + static_cast<int>(rng.uniform_index(
                                          static_cast<std::uint64_t>(cfg.max_objects - cfg.min_objects + 1)));

  const PlausibilityConfig pcfg;
  std::vector<PlacedObject> placed;       // camera-frame poses
  std::vector<RigidTransform> placed_plane;  // plane-frame poses

  for (int obj = 0; obj < count; ++obj) {
    bool ok = false;
    for (int attempt = 0; attempt < cfg.max_placement_retries && !ok; ++attempt) {
      const PrimitiveSpec* spec = specs[rng.uniform_index(specs.size())];
      const auto& model = models.at(spec->kind);
      const auto bases = base_orientations(spec->kind);
      const Rotation base = bases[rng.uniform_index(bases.size())];
      const Rotation rot = Rotation::rot_z(rng.uniform(0.0, 2.0 * M_PI)) * base;

      double x = rng.uniform(-0.4, 0.4) * cfg.plane_extent;
      double y = rng.uniform(-0.4, 0.4) * cfg.plane_extent;
      if (!placed.empty() && rng.uniform() < cfg.stack_probability) {
        const std::size_t base_idx = rng.uniform_index(placed.size());
        x = placed_plane[base_idx].translation.x() + rng.uniform(-0.01, 0.01);
        y = placed_plane[base_idx].translation.y() + rng.uniform(-0.01, 0.01);
      }

      // Plane-frame scene of already placed targets for the drop search.
      PlaneFrameScene frame;
      for (std::size_t i = 0; i < placed.size(); ++i) {
        frame.targets.push_back(placed[i].model->target_cloud.transformed(placed_plane[i]));
        frame.sources.emplace_back();
      }
      const SceneDistanceIndex index(frame, Vec3(0, 0, -1), pcfg);

      double z_hi = 0.6;
      double z_lo = -0.3;
      if (drop_distance(model->target_cloud, rot, x, y, z_hi, index) <= 0.0) continue;
      if (drop_distance(model->target_cloud, rot, x, y, z_lo, index) >= 0.0) continue;
      for (int it = 0; it < 60; ++it) {
        const double mid = (z_hi + z_lo) / 2.0;
        if (drop_distance(model->target_cloud, rot, x, y, mid, index) > 0.0) {
          z_hi = mid;
        } else {
          z_lo = mid;
        }
      }
      const RigidTransform pose_plane(rot, Vec3(x, y, (z_hi + z_lo) / 2.0));

      // Verify the grown scene is plausible under ground truth.
      SceneState trial;
      trial.plane = sample.plane;
      for (std::size_t i = 0; i < placed.size(); ++i) {
        trial.objects.push_back({placed[i].model, PointCloud{}, placed[i].gt_pose});
      }
      const RigidTransform pose_cam = compose(plane_in_cam, pose_plane);
      trial.objects.push_back({model, PointCloud{}, pose_cam});
      const auto verdicts = scene_verdicts(trial, pcfg);
      const bool all_stable = std::all_of(verdicts.begin(), verdicts.end(),
                                          [](const PlausibilityVerdict& v) { return v.stable; });
      if (!all_stable) continue;

      placed.push_back({model, pose_cam, spec->kind});
      placed_plane.push_back(pose_plane);
      ok = true;
    }
    if (!ok) {
      throw std::runtime_error("generate_scene: placement failed after bounded retries");
    }
  }

  sample.objects = std::move(placed);
  return sample;
}

RenderedObservation render_observation(const SceneSample& scene, double noise_sigma,
                                       std::uint64_t seed) {
  Rasterizer raster(scene.camera);

  // Plane quad, label 0 (background).
  const double half = scene.plane_extent;
  TriangleMesh plane_mesh;
  plane_mesh.vertices = {{-half, -half, 0}, {half, -half, 0}, {half, half, 0}, {-half, half, 0}};
  plane_mesh.faces = {{0, 1, 2}, {0, 2, 3}};
  plane_mesh.compute_face_normals();
  raster.add_mesh(plane_mesh, scene.plane.pose.inverse(), 0);

  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    raster.add_mesh(scene.objects[i].model->mesh, scene.objects[i].gt_pose,
                    static_cast<std::uint16_t>(i + 1));
  }

  RenderedObservation obs;
  obs.depth_clean = raster.depth();
  obs.normals = raster.normals();
  obs.labels = raster.labels();
  obs.depth = obs.depth_clean;
  if (noise_sigma > 0.0) {
    Rng rng(seed);
    for (float& d : obs.depth.data) {
      if (d > 0.0f) d = std::max(1e-6f, d + static_cast<float>(rng.normal(0.0, noise_sigma)));
    }
  }
  return obs;
}

void AugmentationConfig::validate() const {
  if (foreground_fraction_min < 0.0 || foreground_fraction_max > 1.0 ||
      foreground_fraction_min > foreground_fraction_max) {
    throw std::invalid_argument("AugmentationConfig: bad foreground fraction range");
  }
  if (rotation_error_max_deg < 0.0 || translation_error_max_units < 0.0 ||
      plane_rotation_jitter_max_deg < 0.0 || plane_translation_jitter_max < 0.0) {
    throw std::invalid_argument("AugmentationConfig: negative error magnitude");
  }
  if (points_per_object < 1 || presample < 1) {
    throw std::invalid_argument("AugmentationConfig: bad sample counts");
  }
}

SegmentationSample augment_segmentation(const LabelImage& labels, std::uint16_t object_id,
                                        double foreground_fraction, std::size_t n,
                                        std::size_t presample, std::uint64_t seed) {
  if (foreground_fraction < 0.0 || foreground_fraction > 1.0) {
    throw std::invalid_argument("augment_segmentation: fraction outside [0,1]");
  }
  std::vector<PixelCoord> fg_pool;
  int col_lo = labels.width, col_hi = -1, row_lo = labels.height, row_hi = -1;
  for (int r = 0; r < labels.height; ++r) {
    for (int c = 0; c < labels.width; ++c) {
      if (labels.at(c, r) == object_id) {
        fg_pool.push_back({c, r});
        col_lo = std::min(col_lo, c);
        col_hi = std::max(col_hi, c);
        row_lo = std::min(row_lo, r);
        row_hi = std::max(row_hi, r);
      }
    }
  }
  if (fg_pool.empty()) throw std::invalid_argument("augment_segmentation: empty mask");

  std::vector<PixelCoord> bg_pool;
  for (int r = row_lo; r <= row_hi; ++r) {
    for (int c = col_lo; c <= col_hi; ++c) {
      if (labels.at(c, r) != object_id) bg_pool.push_back({c, r});
    }
  }

  Rng rng(seed);
  auto presample_pool = [&](std::vector<PixelCoord>& pool) {
    if (pool.size() <= presample) return;
    // Partial Fisher-Yates keeps the first `presample` entries.
    for (std::size_t i = 0; i < presample; ++i) {
      const std::size_t j = i + rng.uniform_index(pool.size() - i);
      std::swap(pool[i], pool[j]);
    }
    pool.resize(presample);
  };
  presample_pool(fg_pool);
  presample_pool(bg_pool);

  const PixelCoord center = fg_pool[rng.uniform_index(fg_pool.size())];
  const auto by_distance = [&](const PixelCoord& a, const PixelCoord& b) {
    const long da = static_cast<long>(a.col - center.col) * (a.col - center.col) +
                    static_cast<long>(a.row - center.row) * (a.row - center.row);
    const long db = static_cast<long>(b.col - center.col) * (b.col - center.col) +
                    static_cast<long>(b.row - center.row) * (b.row - center.row);
    if (da != db) return da < db;
    if (a.row != b.row) return a.row < b.row;
    return a.col < b.col;
  };
  std::sort(fg_pool.begin(), fg_pool.end(), by_distance);
  std::sort(bg_pool.begin(), bg_pool.end(), by_distance);

  const std::size_t need_fg =
      static_cast<std::size_t>(std::ceil(foreground_fraction * static_cast<double>(n)));
  const std::size_t need_bg = n - need_fg;
  if (need_fg > fg_pool.size() || need_bg > bg_pool.size()) {
    throw std::runtime_error("augment_segmentation: n exceeds candidates after restriction");
  }

  SegmentationSample out;
  out.foreground.assign(fg_pool.begin(), fg_pool.begin() + static_cast<long>(need_fg));
  out.background.assign(bg_pool.begin(), bg_pool.begin() + static_cast<long>(need_bg));
  return out;
}

RigidTransform perturb_pose(const RigidTransform& gt, double rotation_max_deg,
                            double translation_max_units, double scale_d_y, std::uint64_t seed) {
  Rng rng(seed);
  const Vec3 axis = rng_unit(rng);
  const double angle = rng.uniform(0.0, rotation_max_deg * M_PI / 180.0);
  const Vec3 dir = rng_unit(rng);
  const double mag = rng.uniform(0.0, translation_max_units) * scale_d_y;
  const RigidTransform delta(Rotation::axis_angle(axis, angle), dir * mag);
  return compose(gt, delta);
}

PlaneModel perturb_plane(const PlaneModel& plane, double rotation_max_deg,
                         double translation_max_m, std::uint64_t seed) {
  Rng rng(seed);
  const Vec3 axis = rng_unit(rng);
  const double angle = rng.uniform(0.0, rotation_max_deg * M_PI / 180.0);
  const Vec3 dir = rng_unit(rng);
  const double mag = rng.uniform(0.0, translation_max_m);
  const RigidTransform delta(Rotation::axis_angle(axis, angle), dir * mag);
  PlaneModel out = plane;
  out.pose = compose(plane.pose.inverse(), delta).inverse();
  return out;
}

EpisodeBuildResult build_episode(const SceneSample& sample, const AugmentationConfig& aug,
                                 double depth_noise_sigma, std::uint64_t seed,
                                 const RenderedObservation* prerendered) {
  aug.validate();
  Rng rng(seed);
  EpisodeBuildResult result;
  const std::uint64_t render_seed = rng.next_u64();  // keep the draw order stable
  result.observation =
      prerendered ? *prerendered : render_observation(sample, depth_noise_sigma, render_seed);

  result.scene.plane = perturb_plane(sample.plane, aug.plane_rotation_jitter_max_deg,
                                     aug.plane_translation_jitter_max, rng.next_u64());
  result.scene.gravity = Vec3(0, 0, -1);

  for (std::size_t oi = 0; oi < sample.objects.size(); ++oi) {
    const PlacedObject& placed = sample.objects[oi];
    const std::uint16_t label = static_cast<std::uint16_t>(oi + 1);
    const double p = rng.uniform(aug.foreground_fraction_min, aug.foreground_fraction_max);
    const SegmentationSample seg = augment_segmentation(
        result.observation.labels, label, p, aug.points_per_object, aug.presample, rng.next_u64());

    EpisodeObject obj;
    obj.model = placed.model;
    obj.gt_pose = placed.gt_pose;
    obj.init_pose = perturb_pose(placed.gt_pose, aug.rotation_error_max_deg,
                                 aug.translation_error_max_units, placed.model->scale,
                                 rng.next_u64());

    auto backproject = [&](const PixelCoord& px, int lbl) {
      const float d = result.observation.depth.at(px.col, px.row);
      if (d <= 0.0f) return;
      obj.source_cam.points.push_back(sample.camera.backproject(px.col, px.row, d));
      obj.source_cam.labels.push_back(lbl);
    };
    for (const PixelCoord& px : seg.foreground) backproject(px, 1);
    for (const PixelCoord& px : seg.background) backproject(px, 0);
    if (obj.source_cam.empty()) {
      throw std::runtime_error("build_episode: no valid depth at sampled pixels");
    }

    result.masks.push_back(mask_from_labels(result.observation.labels, label));
    result.scene.objects.push_back(std::move(obj));
  }
  return result;
}

}  // namespace poseref
