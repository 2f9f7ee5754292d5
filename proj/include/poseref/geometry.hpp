#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace poseref {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

// Tolerance for rotation matrix validity (orthonormality, unit determinant).
inline constexpr double kRotationTol = 1e-9;

// Proper rotation in SO(3), stored as a 3x3 matrix. Construction goes through
// the factories below which re-orthonormalize small drift and reject matrices
// that are not close to a rotation.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  // Accepts matrices within `tol` of SO(3) as-is; re-projects matrices with
  // larger drift via SVD. Throws std::invalid_argument if the input is not a
  // rotation at all (det <= 0 or far from orthonormal).
  static Rotation from_matrix(const Mat3& m);

  static Rotation axis_angle(const Vec3& axis, double angle_rad);
  static Rotation rot_x(double angle_rad);
  static Rotation rot_y(double angle_rad);
  static Rotation rot_z(double angle_rad);

  const Mat3& matrix() const { return m_; }

  Rotation operator*(const Rotation& rhs) const;
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  Rotation inverse() const;

  // Rotation angle in [0, pi]: arccos((trace - 1) / 2), argument clamped.
  double angle() const;

  bool is_valid(double tol = kRotationTol) const;

 private:
  struct Unchecked {};
  Rotation(const Mat3& m, Unchecked) : m_(m) {}

  Mat3 m_;
};

// Rigid transform [R, t]; maps x to R * x + t.
struct RigidTransform {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();

  RigidTransform() = default;
  RigidTransform(const Rotation& r, const Vec3& t) : rotation(r), translation(t) {}

  static RigidTransform identity() { return RigidTransform(); }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  RigidTransform inverse() const {
    const Rotation rinv = rotation.inverse();
    return RigidTransform(rinv, -(rinv * translation));
  }

  Mat4 matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = rotation.matrix();
    m.topRightCorner<3, 1>() = translation;
    return m;
  }
};

// Applies b first, then a: compose(a, b)(x) = a(b(x)).
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

inline double rotation_angle(const Rotation& r) { return r.angle(); }

// Angle of the relative rotation a * b^T.
double rotation_angle_between(const Rotation& a, const Rotation& b);

// Intrinsic x-y-z Euler factorization: r = Rx(x) * Ry(y) * Rz(z).
// y is in [-pi/2, pi/2]; x and z in [-pi, pi]. At gimbal lock (|cos y| ~ 0)
// z is set to 0 and the full twist goes into x.
Vec3 euler_xyz(const Rotation& r);

// Inverse of euler_xyz.
Rotation rotation_from_euler_xyz(const Vec3& angles);

// Nearest rotation matrix in Frobenius norm (SVD projection).
Mat3 orthonormalized(const Mat3& m);

}  // namespace poseref
