#pragma once

#include <string>
#include <vector>

#include "poseref/geometry.hpp"

namespace poseref {

// Geometric symmetry classes in the canonical frame. The major symmetry axis
// is the z-axis; continuous z-rotations are discretized at `resolution_deg`.
enum class SymmetryVariant {
  kNone,
  kCylindrical,  // Rz(k*delta) x {I, Rx(pi)}
  kCuboid,       // Rz(k*pi/2) x {I, Rx(pi)}
  kBox,          // {I, Rz(pi)} x {I, Rx(pi)}
  kFrontBack,    // {I, Rz(pi)}
  kRotational,   // Rz(k*delta)
};

struct SymmetryClass {
  SymmetryVariant variant = SymmetryVariant::kNone;
  double resolution_deg = 5.0;

  bool is_continuous() const {
    return variant == SymmetryVariant::kCylindrical || variant == SymmetryVariant::kRotational;
  }
};

// Discrete rotation group about the canonical origin; identity is element 0.
struct SymmetrySet {
  std::vector<Rotation> rotations;

  std::size_t size() const { return rotations.size(); }
};

// Builds the discrete symmetry group for a class. For continuous classes the
// resolution must be positive and divide 360 evenly.
SymmetrySet enumerate_symmetries(const SymmetryClass& cls);

// Selects the equivalent ground-truth pose [R * S_s, t] closest to the
// estimate, maximizing trace(R_s * R_est^T). Ties break to the lowest index.
std::pair<std::size_t, RigidTransform> closest_symmetric_pose(
    const RigidTransform& gt, const RigidTransform& estimate, const SymmetrySet& syms);

// Residual rotation angle to the closest symmetric ground truth.
double symmetry_aware_angle(const Rotation& gt, const Rotation& estimate,
                            const SymmetrySet& syms);

const char* to_string(SymmetryVariant v);
SymmetryVariant symmetry_variant_from_string(const std::string& name);

}  // namespace poseref
