#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "poseref/mesh.hpp"

namespace poseref {

struct CameraIntrinsics {
  double fx = 0.0, fy = 0.0;
  double cx = 0.0, cy = 0.0;
  int width = 0, height = 0;

  void validate() const;

  // Ray direction through pixel center (col + 0.5, row + 0.5), camera frame.
  Vec3 pixel_ray(int col, int row) const {
    return Vec3((col + 0.5 - cx) / fx, (row + 0.5 - cy) / fy, 1.0);
  }

  Vec3 backproject(int col, int row, double depth) const { return pixel_ray(col, row) * depth; }
};

// Depth in meters; 0 marks no hit.
struct DepthImage {
  int width = 0, height = 0;
  std::vector<float> data;

  DepthImage() = default;
  DepthImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0.0f) {}
  float& at(int col, int row) { return data[static_cast<std::size_t>(row) * width + col]; }
  float at(int col, int row) const { return data[static_cast<std::size_t>(row) * width + col]; }
};

// Unit normals in camera frame; the zero vector marks no hit.
struct NormalImage {
  int width = 0, height = 0;
  std::vector<float> data;  // 3 floats per pixel

  NormalImage() = default;
  NormalImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0.0f) {}
  Vec3 at(int col, int row) const {
    const std::size_t i = (static_cast<std::size_t>(row) * width + col) * 3;
    return Vec3(data[i], data[i + 1], data[i + 2]);
  }
  void set(int col, int row, const Vec3& n) {
    const std::size_t i = (static_cast<std::size_t>(row) * width + col) * 3;
    data[i] = static_cast<float>(n.x());
    data[i + 1] = static_cast<float>(n.y());
    data[i + 2] = static_cast<float>(n.z());
  }
};

// Instance labels per pixel; 0 is background.
struct LabelImage {
  int width = 0, height = 0;
  std::vector<std::uint16_t> data;

  LabelImage() = default;
  LabelImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0) {}
  std::uint16_t& at(int col, int row) { return data[static_cast<std::size_t>(row) * width + col]; }
  std::uint16_t at(int col, int row) const { return data[static_cast<std::size_t>(row) * width + col]; }
};

// Z-buffered software rasterizer. Meshes are added under poses mapping their
// frame into the camera frame; nearest surface wins per pixel. Per-pixel
// normals are flat face normals rotated into camera frame and flipped toward
// the camera so back faces stay visible.
class Rasterizer {
 public:
  explicit Rasterizer(const CameraIntrinsics& cam);

  void add_mesh(const TriangleMesh& mesh, const RigidTransform& pose, std::uint16_t label);

  const DepthImage& depth() const { return depth_; }
  const NormalImage& normals() const { return normals_; }
  const LabelImage& labels() const { return labels_; }

 private:
  CameraIntrinsics cam_;
  DepthImage depth_;
  NormalImage normals_;
  LabelImage labels_;
};

// Renders a single mesh under `pose` (mesh frame -> camera frame).
std::pair<DepthImage, NormalImage> render(const TriangleMesh& mesh, const RigidTransform& pose,
                                          const CameraIntrinsics& cam);

}  // namespace poseref
