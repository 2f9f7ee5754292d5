#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "poseref/environment.hpp"
#include "poseref/plausibility.hpp"
#include "poseref/render.hpp"

namespace poseref {

// Canonical primitive meshes: closed, outward normals, volume centroid at the
// origin, symmetry axis on z.
TriangleMesh make_box(double width, double depth, double height);
TriangleMesh make_cylinder(double radius, double height, int segments = 48);
// L-profile in the xz-plane extruded along y; symmetry class none.
TriangleMesh make_l_shape(double leg_long, double leg_short, double thickness, double depth);

struct PrimitiveSpec {
  std::string kind;  // box | square_box | cylinder | l_shape
  int class_id = 0;
  SymmetryClass symmetry;
  TriangleMesh mesh;
};

// The four built-in object classes (distinct symmetry classes).
std::vector<PrimitiveSpec> default_primitives();

struct ScenarioConfig {
  int min_objects = 1;
  int max_objects = 4;
  std::vector<std::string> primitives = {"box", "square_box", "cylinder", "l_shape"};
  double plane_extent = 0.6;        // meters, square side
  double camera_distance_min = 0.7; // plane origin depth range
  double camera_distance_max = 1.0;
  double camera_tilt_max_deg = 25.0;
  double depth_noise_sigma = 0.0;   // meters
  std::size_t points_per_object = 1024;
  std::uint64_t model_seed = 1;     // target-cloud sampling seed
  CameraIntrinsics camera{280.0, 280.0, 160.0, 120.0, 320, 240};
  double stack_probability = 0.35;
  int max_placement_retries = 40;

  void validate() const;
};

struct PlacedObject {
  std::shared_ptr<const ObjectModel> model;
  RigidTransform gt_pose;  // canonical -> camera
  std::string primitive;
};

struct SceneSample {
  PlaneModel plane;  // true plane, camera -> plane frame
  std::vector<PlacedObject> objects;
  CameraIntrinsics camera;
  double plane_extent = 0.6;
};

// Rejection-sampled static scene: objects rest on the plane or stack,
// verified non-intersecting and stable under the plausibility module.
// Deterministic per seed. Throws std::runtime_error when placement fails
// after the bounded retries.
SceneSample generate_scene(const ScenarioConfig& cfg, std::uint64_t seed);

struct RenderedObservation {
  DepthImage depth;      // with noise
  DepthImage depth_clean;
  NormalImage normals;
  LabelImage labels;  // 0 = plane/background, i+1 = objects[i]
};

// Scene z-buffer over the plane quad and all objects, Gaussian depth noise
// added per hit pixel. Deterministic per seed.
RenderedObservation render_observation(const SceneSample& scene, double noise_sigma,
                                       std::uint64_t seed);

struct AugmentationConfig {
  double foreground_fraction_min = 0.5;
  double foreground_fraction_max = 1.0;
  double rotation_error_max_deg = 90.0;
  double translation_error_max_units = 1.0;  // normalized units
  double plane_rotation_jitter_max_deg = 5.0;
  double plane_translation_jitter_max = 0.02;  // meters
  std::size_t points_per_object = 1024;
  std::size_t presample = 4096;

  void validate() const;
};

struct PixelCoord {
  int col = 0;
  int row = 0;
};

struct SegmentationSample {
  std::vector<PixelCoord> foreground;
  std::vector<PixelCoord> background;
};

// Fig. 8-style segmentation augmentation: a random in-mask center pixel, the
// ceil(p*n) nearest foreground pixels and floor((1-p)*n) nearest background
// pixels, background restricted to the mask's bounding box. Both pools are
// presampled to `presample` pixels (or all, if fewer) before the neighbor
// selection. Throws when a pool cannot supply the requested count.
SegmentationSample augment_segmentation(const LabelImage& labels, std::uint16_t object_id,
                                        double foreground_fraction, std::size_t n,
                                        std::size_t presample, std::uint64_t seed);

// Uniform-axis random pose error: rotation magnitude uniform in [0, max_deg],
// translation direction uniform with magnitude uniform in [0, max_units],
// scaled by the model d_Y; right-composed onto the pose in the canonical frame.
RigidTransform perturb_pose(const RigidTransform& gt, double rotation_max_deg,
                            double translation_max_units, double scale_d_y, std::uint64_t seed);

PlaneModel perturb_plane(const PlaneModel& plane, double rotation_max_deg,
                         double translation_max_m, std::uint64_t seed);

// Assembles a refinement episode from a generated scene: renders the
// observation, augments each object's segmentation, back-projects the sampled
// pixels into labeled source clouds and perturbs the initial poses and plane.
struct EpisodeBuildResult {
  RefineScene scene;
  RenderedObservation observation;
  std::vector<PixelMask> masks;  // per object, from the gt labels
};

// When `prerendered` is given (e.g. the stored bundle observation) it is used
// as-is; otherwise the observation is rendered here with `depth_noise_sigma`.
EpisodeBuildResult build_episode(const SceneSample& sample, const AugmentationConfig& aug,
                                 double depth_noise_sigma, std::uint64_t seed,
                                 const RenderedObservation* prerendered = nullptr);

}  // namespace poseref
