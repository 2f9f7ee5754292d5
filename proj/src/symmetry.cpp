#include "poseref/symmetry.hpp"

#include <cmath>
#include <stdexcept>

namespace poseref {

namespace {

// z-rotations by k*step_deg for k = 0..count-1, optionally crossed with a
// flip about x. Identity comes first (k=0, no flip).
SymmetrySet z_rotations(double step_deg, bool with_flip) {
  if (step_deg <= 0.0) throw std::invalid_argument("symmetry: resolution must be positive");
  const double ratio = 360.0 / step_deg;
  const double count_d = std::round(ratio);
  if (std::abs(ratio - count_d) > 1e-9) {
    throw std::invalid_argument("symmetry: resolution must divide 360 evenly");
  }
  const int count = static_cast<int>(count_d);
  SymmetrySet set;
  const Rotation flip = Rotation::rot_x(M_PI);
  for (int pass = 0; pass < (with_flip ? 2 : 1); ++pass) {
    for (int k = 0; k < count; ++k) {
      const Rotation rz = Rotation::rot_z(k * step_deg * M_PI / 180.0);
      set.rotations.push_back(pass == 0 ? rz : rz * flip);
    }
  }
  return set;
}

}  // namespace

SymmetrySet enumerate_symmetries(const SymmetryClass& cls) {
  switch (cls.variant) {
    case SymmetryVariant::kNone:
      return SymmetrySet{{Rotation()}};
    case SymmetryVariant::kCylindrical:
      return z_rotations(cls.resolution_deg, true);
    case SymmetryVariant::kRotational:
      return z_rotations(cls.resolution_deg, false);
    case SymmetryVariant::kCuboid:
      return z_rotations(90.0, true);
    case SymmetryVariant::kBox:
      return z_rotations(180.0, true);
    case SymmetryVariant::kFrontBack:
      return z_rotations(180.0, false);
  }
  throw std::invalid_argument("enumerate_symmetries: unknown variant");
}

std::pair<std::size_t, RigidTransform> closest_symmetric_pose(
    const RigidTransform& gt, const RigidTransform& estimate, const SymmetrySet& syms) {
  if (syms.rotations.empty()) {
    throw std::invalid_argument("closest_symmetric_pose: empty symmetry set");
  }
  const Mat3 est_t = estimate.rotation.matrix().transpose();
  std::size_t best = 0;
  double best_trace = -4.0;
  for (std::size_t s = 0; s < syms.rotations.size(); ++s) {
    const Mat3 rs = gt.rotation.matrix() * syms.rotations[s].matrix();
    const double tr = (rs * est_t).trace();
    if (tr > best_trace) {
      best_trace = tr;
      best = s;
    }
  }
  return {best, RigidTransform(gt.rotation * syms.rotations[best], gt.translation)};
}

double symmetry_aware_angle(const Rotation& gt, const Rotation& estimate,
                            const SymmetrySet& syms) {
  const auto [idx, pose] =
      closest_symmetric_pose(RigidTransform(gt, Vec3::Zero()), RigidTransform(estimate, Vec3::Zero()), syms);
  return rotation_angle_between(pose.rotation, estimate);
}

const char* to_string(SymmetryVariant v) {
  switch (v) {
    case SymmetryVariant::kNone: return "none";
    case SymmetryVariant::kCylindrical: return "cylindrical";
    case SymmetryVariant::kCuboid: return "cuboid";
    case SymmetryVariant::kBox: return "box";
    case SymmetryVariant::kFrontBack: return "front_back";
    case SymmetryVariant::kRotational: return "rotational";
  }
  return "unknown";
}

SymmetryVariant symmetry_variant_from_string(const std::string& name) {
  if (name == "none") return SymmetryVariant::kNone;
  if (name == "cylindrical") return SymmetryVariant::kCylindrical;
  if (name == "cuboid") return SymmetryVariant::kCuboid;
  if (name == "box") return SymmetryVariant::kBox;
  if (name == "front_back") return SymmetryVariant::kFrontBack;
  if (name == "rotational") return SymmetryVariant::kRotational;
  throw std::invalid_argument("unknown symmetry class: " + name);
}

}  // namespace poseref
