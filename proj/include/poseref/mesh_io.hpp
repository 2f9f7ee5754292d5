#pragma once

#include <string>

#include "poseref/mesh.hpp"
#include "poseref/point_cloud.hpp"

namespace poseref {

// Loads a triangle mesh from OBJ or PLY (ASCII or binary_little_endian),
// chosen by file extension. Polygons with more than three vertices are
// fan-triangulated. Face normals are computed from the geometry.
TriangleMesh load_mesh(const std::string& path);

TriangleMesh load_obj(const std::string& path);
TriangleMesh load_ply_mesh(const std::string& path);

void save_obj(const TriangleMesh& mesh, const std::string& path);

// ASCII PLY point cloud export. Normals are written when present; `scalars`
// (e.g. critical-point labels) become a per-vertex float property when
// non-empty (must match the cloud size).
void save_ply_cloud(const PointCloud& cloud, const std::string& path,
                    const std::vector<double>& scalars = {},
                    const std::string& scalar_name = "scalar");

}  // namespace poseref
