#include "poseref/render.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace poseref {

namespace {
constexpr double kNearPlane = 1e-6;
}

void CameraIntrinsics::validate() const {
  if (fx <= 0.0 || fy <= 0.0) throw std::invalid_argument("CameraIntrinsics: fx, fy must be positive");
  if (width <= 0 || height <= 0) throw std::invalid_argument("CameraIntrinsics: empty image");
  if (cx < 0.0 || cx > width || cy < 0.0 || cy > height) {
    throw std::invalid_argument("CameraIntrinsics: principal point outside image");
  }
}

Rasterizer::Rasterizer(const CameraIntrinsics& cam)
    : cam_(cam), depth_(cam.width, cam.height), normals_(cam.width, cam.height),
      labels_(cam.width, cam.height) {
  cam.validate();
}

void Rasterizer::add_mesh(const TriangleMesh& mesh, const RigidTransform& pose,
                          std::uint16_t label) {
  if (mesh.empty()) throw std::invalid_argument("Rasterizer::add_mesh: empty mesh");

  std::vector<Vec3> cam_pts(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) cam_pts[i] = pose.apply(mesh.vertices[i]);

  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const Vec3& a = cam_pts[mesh.faces[f][0]];
    const Vec3& b = cam_pts[mesh.faces[f][1]];
    const Vec3& c = cam_pts[mesh.faces[f][2]];
    if (a.z() <= kNearPlane || b.z() <= kNearPlane || c.z() <= kNearPlane) continue;

    // Screen-space vertices (pixel units).
    const Eigen::Vector2d pa(cam_.fx * a.x() / a.z() + cam_.cx, cam_.fy * a.y() / a.z() + cam_.cy);
    const Eigen::Vector2d pb(cam_.fx * b.x() / b.z() + cam_.cx, cam_.fy * b.y() / b.z() + cam_.cy);
    const Eigen::Vector2d pc(cam_.fx * c.x() / c.z() + cam_.cx, cam_.fy * c.y() / c.z() + cam_.cy);

    const double area = (pb.x() - pa.x()) * (pc.y() - pa.y()) - (pb.y() - pa.y()) * (pc.x() - pa.x());
    if (std::abs(area) < 1e-12) continue;

    const int col_lo = std::max(0, static_cast<int>(std::floor(std::min({pa.x(), pb.x(), pc.x()}) - 0.5)));
    const int col_hi = std::min(cam_.width - 1, static_cast<int>(std::ceil(std::max({pa.x(), pb.x(), pc.x()}))));
    const int row_lo = std::max(0, static_cast<int>(std::floor(std::min({pa.y(), pb.y(), pc.y()}) - 0.5)));
    const int row_hi = std::min(cam_.height - 1, static_cast<int>(std::ceil(std::max({pa.y(), pb.y(), pc.y()}))));

    const double inv_za = 1.0 / a.z();
    const double inv_zb = 1.0 / b.z();
    const double inv_zc = 1.0 / c.z();
    const Vec3 face_normal_cam = pose.rotation * mesh.face_normals[f];

    for (int row = row_lo; row <= row_hi; ++row) {
      for (int col = col_lo; col <= col_hi; ++col) {
        const Eigen::Vector2d p(col + 0.5, row + 0.5);
        // Barycentric weights via edge functions, normalized by the signed area.
        const double w0 = ((pb.x() - p.x()) * (pc.y() - p.y()) - (pb.y() - p.y()) * (pc.x() - p.x())) / area;
        const double w1 = ((pc.x() - p.x()) * (pa.y() - p.y()) - (pc.y() - p.y()) * (pa.x() - p.x())) / area;
        const double w2 = 1.0 - w0 - w1;
        if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;

        // 1/z interpolates linearly in screen space.
        const double inv_z = w0 * inv_za + w1 * inv_zb + w2 * inv_zc;
        if (inv_z <= 0.0) continue;
        const double z = 1.0 / inv_z;

        const float current = depth_.at(col, row);
        if (current > 0.0f && static_cast<double>(current) <= z) continue;

        Vec3 n = face_normal_cam;
        if (n.dot(cam_.pixel_ray(col, row)) > 0.0) n = -n;  // face the camera
        depth_.at(col, row) = static_cast<float>(z);
        normals_.set(col, row, n);
        labels_.at(col, row) = label;
      }
    }
  }
}

std::pair<DepthImage, NormalImage> render(const TriangleMesh& mesh, const RigidTransform& pose,
                                          const CameraIntrinsics& cam) {
  Rasterizer r(cam);
  r.add_mesh(mesh, pose, 1);
  return {r.depth(), r.normals()};
}

}  // namespace poseref
