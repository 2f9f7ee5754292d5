#include "poseref/mesh_io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace poseref {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error(path + ": " + what);
}

std::string lower_ext(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  return ext;
}

void push_fan(std::vector<std::array<std::uint32_t, 3>>& faces,
              const std::vector<std::uint32_t>& poly) {
  for (std::size_t i = 2; i < poly.size(); ++i) {
    faces.push_back({poly[0], poly[i - 1], poly[i]});
  }
}

}  // namespace

TriangleMesh load_mesh(const std::string& path) {
  const std::string ext = lower_ext(path);
  if (ext == "obj") return load_obj(path);
  if (ext == "ply") return load_ply_mesh(path);
  fail(path, "unsupported mesh format (expected .obj or .ply)");
}

TriangleMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open");
  TriangleMesh mesh;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      Vec3 v;
      ss >> v.x() >> v.y() >> v.z();
      if (!ss) fail(path, "bad vertex line: " + line);
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<std::uint32_t> poly;
      std::string tok;
      while (ss >> tok) {
        // "v", "v/vt", "v//vn", "v/vt/vn"
        const long idx = std::strtol(tok.c_str(), nullptr, 10);
        if (idx == 0) fail(path, "bad face token: " + tok);
        const long resolved = idx > 0 ? idx - 1 : static_cast<long>(mesh.vertices.size()) + idx;
        if (resolved < 0 || resolved >= static_cast<long>(mesh.vertices.size())) {
          fail(path, "face index out of range: " + tok);
        }
        poly.push_back(static_cast<std::uint32_t>(resolved));
      }
      if (poly.size() < 3) fail(path, "face with fewer than 3 vertices");
      push_fan(mesh.faces, poly);
    }
  }
  mesh.compute_face_normals();
  return mesh;
}

namespace {

struct PlyProperty {
  std::string type;
  std::string name;
  bool is_list = false;
  std::string count_type;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> props;
};

std::size_t scalar_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" || t == "float32") return 4;
  if (t == "double" || t == "float64") return 8;
  throw std::runtime_error("ply: unknown type " + t);
}

double read_binary_scalar(std::istream& in, const std::string& type) {
  unsigned char buf[8];
  const std::size_t n = scalar_size(type);
  in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n));
  if (!in) throw std::runtime_error("ply: truncated binary data");
  auto as = [&](auto v) {
    std::memcpy(&v, buf, sizeof(v));
    return static_cast<double>(v);
  };
  if (type == "char" || type == "int8") return as(std::int8_t{});
  if (type == "uchar" || type == "uint8") return as(std::uint8_t{});
  if (type == "short" || type == "int16") return as(std::int16_t{});
  if (type == "ushort" || type == "uint16") return as(std::uint16_t{});
  if (type == "int" || type == "int32") return as(std::int32_t{});
  if (type == "uint" || type == "uint32") return as(std::uint32_t{});
  if (type == "float" || type == "float32") return as(float{});
  return as(double{});
}

}  // namespace

TriangleMesh load_ply_mesh(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");

  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) fail(path, "not a PLY file");

  bool binary = false;
  std::vector<PlyElement> elements;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt == "ascii") binary = false;
      else if (fmt == "binary_little_endian") binary = true;
      else fail(path, "unsupported PLY format: " + fmt);
    } else if (tag == "element") {
      PlyElement el;
      ss >> el.name >> el.count;
      elements.push_back(el);
    } else if (tag == "property") {
      if (elements.empty()) fail(path, "property before element");
      PlyProperty prop;
      std::string t;
      ss >> t;
      if (t == "list") {
        prop.is_list = true;
        ss >> prop.count_type >> prop.type >> prop.name;
      } else {
        prop.type = t;
        ss >> prop.name;
      }
      elements.back().props.push_back(prop);
    } else if (tag == "end_header") {
      break;
    }
  }

  TriangleMesh mesh;
  for (const PlyElement& el : elements) {
    const bool is_vertex = el.name == "vertex";
    const bool is_face = el.name == "face";
    for (std::size_t i = 0; i < el.count; ++i) {
      Vec3 v = Vec3::Zero();
      std::vector<std::uint32_t> poly;
      for (const PlyProperty& prop : el.props) {
        if (prop.is_list) {
          double count = 0;
          if (binary) {
            count = read_binary_scalar(in, prop.count_type);
          } else {
            in >> count;
          }
          poly.clear();
          for (std::size_t j = 0; j < static_cast<std::size_t>(count); ++j) {
            double idx = binary ? read_binary_scalar(in, prop.type) : [&] {
              double d;
              in >> d;
              return d;
            }();
            if (is_face && (prop.name == "vertex_indices" || prop.name == "vertex_index")) {
              poly.push_back(static_cast<std::uint32_t>(idx));
            }
          }
        } else {
          const double val = binary ? read_binary_scalar(in, prop.type) : [&] {
            double d;
            in >> d;
            return d;
          }();
          if (is_vertex) {
            if (prop.name == "x") v.x() = val;
            else if (prop.name == "y") v.y() = val;
            else if (prop.name == "z") v.z() = val;
          }
        }
      }
      if (!in) fail(path, "truncated PLY body");
      if (is_vertex) mesh.vertices.push_back(v);
      if (is_face) {
        if (poly.size() < 3) fail(path, "PLY face with fewer than 3 vertices");
        for (std::uint32_t idx : poly) {
          if (idx >= mesh.vertices.size()) fail(path, "PLY face index out of range");
        }
        push_fan(mesh.faces, poly);
      }
    }
  }
  mesh.compute_face_normals();
  return mesh;
}

void save_obj(const TriangleMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(path, "cannot open for writing");
  out.precision(17);
  for (const Vec3& v : mesh.vertices) {
    out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  }
  for (const auto& f : mesh.faces) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
  if (!out) fail(path, "write failed");
}

void save_ply_cloud(const PointCloud& cloud, const std::string& path,
                    const std::vector<double>& scalars, const std::string& scalar_name) {
  if (!scalars.empty() && scalars.size() != cloud.size()) {
    throw std::invalid_argument("save_ply_cloud: scalar length mismatch");
  }
  std::ofstream out(path);
  if (!out) fail(path, "cannot open for writing");
  out.precision(17);
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << cloud.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  if (cloud.has_normals()) {
    out << "property double nx\nproperty double ny\nproperty double nz\n";
  }
  if (!scalars.empty()) out << "property double " << scalar_name << "\n";
  out << "end_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    out << p.x() << ' ' << p.y() << ' ' << p.z();
    if (cloud.has_normals()) {
      const Vec3& n = cloud.normals[i];
      out << ' ' << n.x() << ' ' << n.y() << ' ' << n.z();
    }
    if (!scalars.empty()) out << ' ' << scalars[i];
    out << '\n';
  }
  if (!out) fail(path, "write failed");
}

}  // namespace poseref
