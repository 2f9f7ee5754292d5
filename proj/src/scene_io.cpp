#include "poseref/scene_io.hpp"

#include <filesystem>
#include <fstream>

#include "poseref/image_io.hpp"
#include "poseref/mesh_io.hpp"

namespace poseref {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error(tmp + ": cannot open for writing");
    out << content;
    if (!out) throw std::runtime_error(tmp + ": write failed");
  }
  fs::rename(tmp, path);
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open");
  json j;
  in >> j;
  return j;
}

}  // namespace

json transform_to_json(const RigidTransform& t) {
  json arr = json::array();
  const Mat4 m = t.matrix();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) arr.push_back(m(r, c));
  }
  return arr;
}

RigidTransform transform_from_json(const json& j) {
  if (!j.is_array() || j.size() != 16) {
    throw std::runtime_error("transform_from_json: expected 16-element array");
  }
  Mat3 rot;
  Vec3 t;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rot(r, c) = j[static_cast<std::size_t>(r * 4 + c)].get<double>();
    t[r] = j[static_cast<std::size_t>(r * 4 + 3)].get<double>();
  }
  return RigidTransform(Rotation::from_matrix(rot), t);
}

void save_camera_json(const CameraIntrinsics& cam, const std::string& path) {
  json j;
  j["fx"] = cam.fx;
  j["fy"] = cam.fy;
  j["cx"] = cam.cx;
  j["cy"] = cam.cy;
  j["width"] = cam.width;
  j["height"] = cam.height;
  write_text_atomic(path, j.dump(2) + "\n");
}

CameraIntrinsics load_camera_json(const std::string& path) {
  const json j = load_json(path);
  CameraIntrinsics cam;
  cam.fx = j.at("fx").get<double>();
  cam.fy = j.at("fy").get<double>();
  cam.cx = j.at("cx").get<double>();
  cam.cy = j.at("cy").get<double>();
  cam.width = j.at("width").get<int>();
  cam.height = j.at("height").get<int>();
  cam.validate();
  return cam;
}

void save_scene_bundle(const SceneBundle& bundle, const std::string& dir) {
  fs::create_directories(fs::path(dir) / "meshes");

  json scene;
  scene["schema_version"] = kSchemaVersion;
  scene["plane"] = {{"pose", transform_to_json(bundle.sample.plane.pose)},
                    {"inlier_count", bundle.sample.plane.inlier_count}};
  scene["fit_plane_from_background"] = bundle.fit_plane_from_background;
  scene["gravity"] = {0.0, 0.0, -1.0};
  scene["plane_extent"] = bundle.sample.plane_extent;
  scene["points_per_object"] = bundle.points_per_object;
  scene["model_seed"] = bundle.model_seed;

  json objects = json::array();
  for (const PlacedObject& obj : bundle.sample.objects) {
    const std::string mesh_rel = "meshes/" + obj.primitive + ".obj";
    const fs::path mesh_path = fs::path(dir) / mesh_rel;
    if (!fs::exists(mesh_path)) save_obj(obj.model->mesh, mesh_path.string());

    json o;
    o["primitive"] = obj.primitive;
    o["mesh"] = mesh_rel;
    o["class_id"] = obj.model->class_id;
    o["symmetry"] = {{"class", to_string(obj.model->symmetry.variant)},
                     {"resolution_deg", obj.model->symmetry.resolution_deg}};
    o["com"] = {obj.model->com.x(), obj.model->com.y(), obj.model->com.z()};
    o["gt_pose"] = transform_to_json(obj.gt_pose);
    objects.push_back(o);
  }
  scene["objects"] = objects;
  write_text_atomic((fs::path(dir) / "scene.json").string(), scene.dump(2) + "\n");

  save_camera_json(bundle.sample.camera, (fs::path(dir) / "camera.json").string());
  save_depth_pfm(bundle.observation.depth, (fs::path(dir) / "depth.pfm").string());
  save_normals_pfm(bundle.observation.normals, (fs::path(dir) / "normals.pfm").string());
  save_labels_png16(bundle.observation.labels, (fs::path(dir) / "labels.png").string());
}

SceneBundle load_scene_bundle(const std::string& dir) {
  const json scene = load_json((fs::path(dir) / "scene.json").string());
  if (scene.at("schema_version").get<int>() != kSchemaVersion) {
    throw std::runtime_error(dir + ": unsupported scene schema version");
  }

  SceneBundle bundle;
  bundle.points_per_object = scene.at("points_per_object").get<std::size_t>();
  bundle.model_seed = scene.at("model_seed").get<std::uint64_t>();
  bundle.fit_plane_from_background = scene.value("fit_plane_from_background", false);
  bundle.sample.plane.pose = transform_from_json(scene.at("plane").at("pose"));
  bundle.sample.plane.inlier_count = scene.at("plane").at("inlier_count").get<std::size_t>();
  bundle.sample.plane_extent = scene.at("plane_extent").get<double>();
  bundle.sample.camera = load_camera_json((fs::path(dir) / "camera.json").string());

  std::map<std::string, std::shared_ptr<ObjectModel>> models;
  for (const json& o : scene.at("objects")) {
    PlacedObject placed;
    placed.primitive = o.at("primitive").get<std::string>();
    if (!models.count(placed.primitive)) {
      TriangleMesh mesh = load_mesh((fs::path(dir) / o.at("mesh").get<std::string>()).string());
      SymmetryClass sym;
      sym.variant = symmetry_variant_from_string(o.at("symmetry").at("class").get<std::string>());
      sym.resolution_deg = o.at("symmetry").at("resolution_deg").get<double>();
      const auto& com_arr = o.at("com");
      const Vec3 com(com_arr[0].get<double>(), com_arr[1].get<double>(), com_arr[2].get<double>());
      const int class_id = o.at("class_id").get<int>();
      models[placed.primitive] = std::make_shared<ObjectModel>(build_object_model(
          std::move(mesh), sym, class_id, bundle.points_per_object,
          bundle.model_seed + static_cast<std::uint64_t>(class_id), &com));
    }
    placed.model = models.at(placed.primitive);
    placed.gt_pose = transform_from_json(o.at("gt_pose"));
    bundle.sample.objects.push_back(std::move(placed));
  }

  bundle.observation.depth = load_depth_pfm((fs::path(dir) / "depth.pfm").string());
  bundle.observation.depth_clean = bundle.observation.depth;
  bundle.observation.normals = load_normals_pfm((fs::path(dir) / "normals.pfm").string());
  bundle.observation.labels = load_labels_png16((fs::path(dir) / "labels.png").string());
  return bundle;
}

}  // namespace poseref
