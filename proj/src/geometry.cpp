#include "poseref/geometry.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace poseref {

Mat3 orthonormalized(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1.0;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return r;
}

static double so3_drift(const Mat3& m) {
  return (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
}

Rotation Rotation::from_matrix(const Mat3& m) {
  const double drift = so3_drift(m);
  if (drift <= kRotationTol && std::abs(m.determinant() - 1.0) <= kRotationTol) {
    return Rotation(m, Unchecked{});
  }
  if (drift > 1e-3 || m.determinant() <= 0.0) {
    throw std::invalid_argument("Rotation::from_matrix: input is not close to SO(3)");
  }
  return Rotation(orthonormalized(m), Unchecked{});
}

Rotation Rotation::axis_angle(const Vec3& axis, double angle_rad) {
  const double n = axis.norm();
  if (n <= 0.0) throw std::invalid_argument("Rotation::axis_angle: zero axis");
  Eigen::AngleAxisd aa(angle_rad, axis / n);
  return Rotation(aa.toRotationMatrix(), Unchecked{});
}

Rotation Rotation::rot_x(double a) { return axis_angle(Vec3::UnitX(), a); }
Rotation Rotation::rot_y(double a) { return axis_angle(Vec3::UnitY(), a); }
Rotation Rotation::rot_z(double a) { return axis_angle(Vec3::UnitZ(), a); }

Rotation Rotation::operator*(const Rotation& rhs) const {
  Mat3 m = m_ * rhs.m_;
  if (so3_drift(m) > kRotationTol) m = orthonormalized(m);
  return Rotation(m, Unchecked{});
}

Rotation Rotation::inverse() const { return Rotation(m_.transpose(), Unchecked{}); }

double Rotation::angle() const {
  const double c = std::clamp((m_.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

bool Rotation::is_valid(double tol) const {
  return so3_drift(m_) <= tol && std::abs(m_.determinant() - 1.0) <= tol;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return RigidTransform(a.rotation * b.rotation, a.rotation * b.translation + a.translation);
}

double rotation_angle_between(const Rotation& a, const Rotation& b) {
  return (a * b.inverse()).angle();
}

Vec3 euler_xyz(const Rotation& r) {
  const Mat3& m = r.matrix();
  const double sy = std::clamp(m(0, 2), -1.0, 1.0);
  const double y = std::asin(sy);
  if (std::abs(sy) > 1.0 - 1e-12) {
    // Gimbal lock: x and z rotate about the same axis; put everything in x.
    return Vec3(std::atan2(m(2, 1), m(1, 1)), y, 0.0);
  }
  const double x = std::atan2(-m(1, 2), m(2, 2));
  const double z = std::atan2(-m(0, 1), m(0, 0));
  return Vec3(x, y, z);
}

Rotation rotation_from_euler_xyz(const Vec3& angles) {
  return Rotation::rot_x(angles.x()) * Rotation::rot_y(angles.y()) *
         Rotation::rot_z(angles.z());
}

}  // namespace poseref
