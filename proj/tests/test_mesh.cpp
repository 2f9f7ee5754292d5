#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "poseref/mesh.hpp"
#include "poseref/mesh_io.hpp"
#include "poseref/model.hpp"
#include "poseref/normals.hpp"
#include "poseref/rng.hpp"
#include "support/test_util.hpp"

using namespace poseref;
using namespace poseref::testutil;

namespace {

TriangleMesh unit_square() {
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  m.faces = {{0, 1, 2}, {0, 2, 3}};
  m.compute_face_normals();
  return m;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

TriangleMesh closed_box(const Vec3& lo, const Vec3& hi) {
  TriangleMesh m;
  m.vertices = {{lo.x(), lo.y(), lo.z()}, {hi.x(), lo.y(), lo.z()}, {hi.x(), hi.y(), lo.z()},
                {lo.x(), hi.y(), lo.z()}, {lo.x(), lo.y(), hi.z()}, {hi.x(), lo.y(), hi.z()},
                {hi.x(), hi.y(), hi.z()}, {lo.x(), hi.y(), hi.z()}};
  m.faces = {{0, 2, 1}, {0, 3, 2}, {4, 5, 6}, {4, 6, 7}, {0, 1, 5}, {0, 5, 4},
             {1, 2, 6}, {1, 6, 5}, {2, 3, 7}, {2, 7, 6}, {3, 0, 4}, {3, 4, 7}};
  m.compute_face_normals();
  return m;
}

}  // namespace

TEST_CASE("surface sampling is area weighted") {
  TriangleMesh m;
  // Two triangles with areas 0.5 and 4.5 (ratio 1:9).
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {10, 0, 0}, {13, 0, 0}, {10, 3, 0}};
  m.faces = {{0, 1, 2}, {3, 4, 5}};
  m.compute_face_normals();

  const std::size_t n = 10000;
  const PointCloud c = sample_mesh_surface(m, n, 42);
  std::size_t in_small = 0;
  for (const Vec3& p : c.points) {
    if (p.x() < 5.0) ++in_small;
  }
  // Expected fraction 0.1; binomial sigma = sqrt(p(1-p)/n).
  const double frac = static_cast<double>(in_small) / n;
  const double sigma = std::sqrt(0.1 * 0.9 / n);
  CHECK(std::abs(frac - 0.1) < 3.0 * sigma);
}

TEST_CASE("single triangle sampling carries face normal, deterministic per seed") {
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.faces = {{0, 1, 2}};
  m.compute_face_normals();
  const PointCloud a = sample_mesh_surface(m, 64, 9);
  const PointCloud b = sample_mesh_surface(m, 64, 9);
  REQUIRE(a.size() == 64);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK((a.normals[i] - Vec3(0, 0, 1)).norm() < 1e-12);
    CHECK((a.points[i] - b.points[i]).norm() == 0.0);
  }
  const PointCloud other = sample_mesh_surface(m, 64, 10);
  CHECK((a.points[0] - other.points[0]).norm() > 0.0);
}

TEST_CASE("degenerate mesh rejected") {
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  m.faces = {{0, 1, 2}};
  m.compute_face_normals();
  CHECK_THROWS(sample_mesh_surface(m, 10, 1));
  CHECK_THROWS(sample_mesh_surface(TriangleMesh{}, 10, 1));
}

TEST_CASE("volume centroid of a shifted box") {
  const Vec3 lo(1, 2, 3), hi(2, 4, 6);
  const TriangleMesh m = closed_box(lo, hi);
  CHECK((m.volume_centroid() - (lo + hi) / 2).norm() < 1e-12);
}

TEST_CASE("obj save/load round trip with fan triangulation") {
  const auto path = temp_file("poseref_test_mesh.obj");
  {
    std::ofstream out(path);
    out << "# comment\n";
    out << "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n";
    out << "f 1 2 3 4\n";  // quad -> two triangles
  }
  const TriangleMesh m = load_obj(path.string());
  CHECK(m.vertices.size() == 4);
  CHECK(m.faces.size() == 2);
  m.validate();

  const auto path2 = temp_file("poseref_test_mesh2.obj");
  save_obj(m, path2.string());
  const TriangleMesh m2 = load_obj(path2.string());
  CHECK(m2.vertices.size() == m.vertices.size());
  CHECK(m2.faces.size() == m.faces.size());
  std::filesystem::remove(path);
  std::filesystem::remove(path2);
}

TEST_CASE("ascii and binary ply loading") {
  const auto apath = temp_file("poseref_test_ascii.ply");
  {
    std::ofstream out(apath);
    out << "ply\nformat ascii 1.0\n";
    out << "element vertex 3\nproperty float x\nproperty float y\nproperty float z\n";
    out << "element face 1\nproperty list uchar int vertex_indices\n";
    out << "end_header\n";
    out << "0 0 0\n1 0 0\n0 1 0\n";
    out << "3 0 1 2\n";
  }
  const TriangleMesh a = load_ply_mesh(apath.string());
  CHECK(a.vertices.size() == 3);
  CHECK(a.faces.size() == 1);
  CHECK((a.face_normals[0] - Vec3(0, 0, 1)).norm() < 1e-12);

  const auto bpath = temp_file("poseref_test_bin.ply");
  {
    std::ofstream out(bpath, std::ios::binary);
    out << "ply\nformat binary_little_endian 1.0\n";
    out << "element vertex 3\nproperty float x\nproperty float y\nproperty float z\n";
    out << "element face 1\nproperty list uchar int vertex_indices\n";
    out << "end_header\n";
    const float verts[9] = {0, 0, 0, 1, 0, 0, 0, 1, 0};
    out.write(reinterpret_cast<const char*>(verts), sizeof(verts));
    const unsigned char count = 3;
    const std::int32_t idx[3] = {0, 1, 2};
    out.write(reinterpret_cast<const char*>(&count), 1);
    out.write(reinterpret_cast<const char*>(idx), sizeof(idx));
  }
  const TriangleMesh b = load_ply_mesh(bpath.string());
  CHECK(b.vertices.size() == 3);
  CHECK(b.faces.size() == 1);
  CHECK((b.vertices[1] - Vec3(1, 0, 0)).norm() < 1e-12);
  std::filesystem::remove(apath);
  std::filesystem::remove(bpath);
}

TEST_CASE("ply cloud export parses back") {
  PointCloud c;
  c.points = {{0, 0, 0}, {1, 2, 3}};
  c.normals = {{0, 0, 1}, {1, 0, 0}};
  const auto path = temp_file("poseref_test_cloud.ply");
  save_ply_cloud(c, path.string(), {0.0, 2.0}, "crit");
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "ply");
  std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(body.find("property double crit") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("normal estimation on a plane") {
  Rng rng(31);
  PointCloud c;
  for (int i = 0; i < 400; ++i) {
    c.points.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), 0.0);
  }
  const PointCloud with_n = estimate_normals(c, 10, Vec3(0, 0, 5));
  for (const Vec3& n : with_n.normals) {
    CHECK((n - Vec3(0, 0, 1)).norm() < 1e-3);
  }
  // Flipping the viewpoint flips every normal.
  const PointCloud flipped = estimate_normals(c, 10, Vec3(0, 0, -5));
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK((with_n.normals[i] + flipped.normals[i]).norm() < 1e-9);
  }
}

TEST_CASE("normal estimation on a sphere is radial") {
  Rng rng(37);
  PointCloud c;
  const double radius = 1.0;
  for (int i = 0; i < 4000; ++i) {
    c.points.push_back(radius * random_unit(rng));
  }
  const PointCloud with_n = estimate_normals(c, 10, Vec3(0, 0, 10));
  std::size_t good = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Vec3 radial = c.points[i].normalized();
    const double cosang = std::abs(with_n.normals[i].dot(radial));
    if (cosang > std::cos(10.0 * M_PI / 180.0)) ++good;
  }
  CHECK(static_cast<double>(good) / c.size() >= 0.95);
}

TEST_CASE("normal estimation error paths") {
  PointCloud tiny;
  tiny.points = {{0, 0, 0}, {1, 0, 0}};
  CHECK_THROWS_AS(estimate_normals(tiny, 3, Vec3(0, 0, 1)), std::invalid_argument);
  CHECK_THROWS_AS(estimate_normals(tiny, 2, Vec3(0, 0, 1)), std::invalid_argument);
}

TEST_CASE("normalize_pair examples") {
  // Two-point target: mu=(0,0,1), d=1.
  TriangleMesh dummy = unit_square();
  ObjectModel model;
  model.target_cloud.points = {{0, 0, 0}, {0, 0, 2}};
  model.centroid = model.target_cloud.centroid();
  model.scale = model.target_cloud.max_radius(model.centroid);
  CHECK((model.centroid - Vec3(0, 0, 1)).norm() < 1e-15);
  CHECK(model.scale == doctest::Approx(1.0));

  PointCloud src;
  src.points = {{0, 0, 3}};
  const auto [s, t] = normalize_pair(src, model);
  CHECK((t.points[0] - Vec3(0, 0, -1)).norm() < 1e-12);
  CHECK((t.points[1] - Vec3(0, 0, 1)).norm() < 1e-12);
  // Source point farther than d_Y from mu maps outside the unit sphere.
  CHECK(s.points[0].norm() > 1.0);

  // Already-normalized target is a fixed point.
  ObjectModel unitm;
  unitm.target_cloud.points = {{0, 0, -1}, {0, 0, 1}};
  unitm.centroid = Vec3::Zero();
  unitm.scale = 1.0;
  const auto [s2, t2] = normalize_pair(src, unitm);
  CHECK((t2.points[0] - Vec3(0, 0, -1)).norm() == 0.0);

  ObjectModel degenerate;
  degenerate.target_cloud.points = {{0, 0, 0}};
  degenerate.centroid = Vec3::Zero();
  degenerate.scale = 0.0;
  CHECK_THROWS_AS(normalize_pair(src, degenerate), std::invalid_argument);
}

TEST_CASE("normalize then denormalize recovers input") {
  Rng rng(41);
  TriangleMesh m = closed_box(Vec3(-0.05, -0.02, -0.03), Vec3(0.05, 0.02, 0.03));
  ObjectModel model = build_object_model(m, SymmetryClass{}, 1, 256, 5);
  const PointCloud src = random_cloud(rng, 50, 2.0);
  const auto [s, t] = normalize_pair(src, model);
  CHECK(t.max_radius(Vec3::Zero()) == doctest::Approx(1.0).epsilon(1e-9));
  const PointCloud back = denormalize(s, model);
  for (std::size_t i = 0; i < src.size(); ++i) {
    CHECK((back.points[i] - src.points[i]).norm() < 1e-12);
  }
}

TEST_CASE("normalization conjugation helpers invert each other") {
  Rng rng(43);
  for (int i = 0; i < 100; ++i) {
    const RigidTransform t = random_transform(rng);
    const Vec3 mu = random_unit(rng) * rng.uniform(0.0, 2.0);
    const double d = rng.uniform(0.1, 3.0);
    const RigidTransform conj = conjugate_by_normalization(t, mu, d);
    const RigidTransform back = conjugate_by_denormalization(conj, mu, d);
    CHECK((back.matrix() - t.matrix()).cwiseAbs().maxCoeff() < 1e-12);
    // Conjugation preserves action: N(t(x)) == conj(N(x))
    const Vec3 x = random_unit(rng) * 2.0;
    const Vec3 lhs = (t.apply(x) - mu) / d;
    const Vec3 rhs = conj.apply((x - mu) / d);
    CHECK((lhs - rhs).norm() < 1e-12);
  }
}

TEST_CASE("build_object_model fills constants") {
  const double w = 0.1, h = 0.04, dpt = 0.06;
  const TriangleMesh box = closed_box(Vec3(-w / 2, -dpt / 2, -h / 2), Vec3(w / 2, dpt / 2, h / 2));
  const ObjectModel m = build_object_model(box, SymmetryClass{SymmetryVariant::kBox, 5.0}, 2, 1024, 3);
  CHECK(m.scale > 0.0);
  CHECK(m.diameter > 0.0);
  CHECK(m.diameter <= std::sqrt(w * w + h * h + dpt * dpt) + 1e-12);
  CHECK(m.com.norm() < 1e-12);  // centered box
  CHECK(m.target_cloud.size() == 1024);
  CHECK(m.class_id == 2);
}
