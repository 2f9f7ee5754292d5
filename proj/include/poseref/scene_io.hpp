#pragma once

#include <json.hpp>
#include <string>

#include "poseref/datagen.hpp"

namespace poseref {

// On-disk scene bundle:
//   scene.json  meshes/*.obj  depth.pfm  normals.pfm  labels.png  camera.json
// The target clouds are resampled on load from the stored mesh, seed and
// point count, so a reloaded bundle reproduces the generated models exactly.
struct SceneBundle {
  SceneSample sample;
  RenderedObservation observation;
  std::size_t points_per_object = 1024;
  std::uint64_t model_seed = 1;
  bool fit_plane_from_background = false;
};

void save_scene_bundle(const SceneBundle& bundle, const std::string& dir);
SceneBundle load_scene_bundle(const std::string& dir);

nlohmann::json transform_to_json(const RigidTransform& t);
RigidTransform transform_from_json(const nlohmann::json& j);

void save_camera_json(const CameraIntrinsics& cam, const std::string& path);
CameraIntrinsics load_camera_json(const std::string& path);

}  // namespace poseref
