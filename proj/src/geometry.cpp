#include "reefmap/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace reefmap::geometry {

namespace {

constexpr double kGimbalTol = 1e-9;

void check_pitch(double pitch) {
  if (std::abs(std::abs(pitch) - std::numbers::pi / 2.0) < kGimbalTol) {
    throw std::invalid_argument("rotation pitch at gimbal lock (|pitch| = pi/2)");
  }
}

// Height of a sensor-frame point for an explicit rotation matrix; keeps the
// finite-difference loop free of Pose re-validation.
inline double height_with_matrix(const Mat3& r, const Vec3& t, const Vec3& p) {
  return -(r.row(2).dot(p) + t.z());
}

} // namespace

Mat3 Rotation::matrix() const {
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  const double cr = std::cos(roll), sr = std::sin(roll);
  Mat3 m;
  m << cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
       sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
       -sp,     cp * sr,                cp * cr;
  return m;
}

Rotation Rotation::inverse() const {
  return from_matrix(matrix().transpose());
}

Rotation Rotation::from_matrix(const Mat3& m) {
  if ((m * m.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6) {
    throw std::invalid_argument("rotation matrix is not orthonormal");
  }
  const double sp = -m(2, 0);
  if (std::abs(sp) > 1.0 - kGimbalTol) {
    throw std::invalid_argument("rotation matrix at gimbal lock (|pitch| = pi/2)");
  }
  Rotation r;
  r.pitch = std::asin(sp);
  r.yaw = std::atan2(m(1, 0), m(0, 0));
  r.roll = std::atan2(m(2, 1), m(2, 2));
  return r;
}

Rotation Rotation::compose(const Rotation& a, const Rotation& b) {
  return from_matrix(a.matrix() * b.matrix());
}

Pose::Pose(const Vec3& t, const Rotation& r, const Mat6& cov)
    : translation(t), rotation(r), covariance(cov) {
  check_pitch(r.pitch);
  if (!translation.allFinite() || !covariance.allFinite()) {
    throw std::invalid_argument("pose with non-finite entries");
  }
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw std::invalid_argument("pose covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat6> es(covariance, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10) {
    throw std::invalid_argument("pose covariance is not positive semi-definite");
  }
}

Pose Pose::inverse() const {
  const Mat3 rt = rotation.matrix().transpose();
  Pose inv;
  inv.translation = -(rt * translation);
  inv.rotation = Rotation::from_matrix(rt);
  return inv;
}

Pose compose(const Pose& a, const Pose& b) {
  Pose out;
  const Mat3 ra = a.rotation.matrix();
  out.translation = ra * b.translation + a.translation;
  out.rotation = Rotation::from_matrix(ra * b.rotation.matrix());
  return out;
}

Vec3 transform_point(const Pose& pose, const Vec3& p) {
  return pose.rotation.matrix() * p + pose.translation;
}

double height_measurement(const Vec3& point_s, const Pose& sensor_to_map) {
  return height_with_matrix(sensor_to_map.rotation.matrix(),
                            sensor_to_map.translation, point_s);
}

RowVec3 jacobian_range(const Vec3& /*point_s*/, const Pose& sensor_to_map) {
  return -sensor_to_map.rotation.matrix().row(2);
}

RowVec3 jacobian_rotation(const Vec3& point_s, const Pose& sensor_to_map,
                          double step) {
  const Vec3& t = sensor_to_map.translation;
  RowVec3 j;
  // Entry order [roll pitch yaw] matches the covariance rotation block.
  for (int k = 0; k < 3; ++k) {
    Rotation lo = sensor_to_map.rotation;
    Rotation hi = sensor_to_map.rotation;
    switch (k) {
      case 0: lo.roll -= step; hi.roll += step; break;
      case 1: lo.pitch -= step; hi.pitch += step; break;
      default: lo.yaw -= step; hi.yaw += step; break;
    }
    const double h_lo = height_with_matrix(lo.matrix(), t, point_s);
    const double h_hi = height_with_matrix(hi.matrix(), t, point_s);
    j(k) = (h_hi - h_lo) / (2.0 * step);
  }
  return j;
}

Pose FrameGraph::sensor_in_inertial() const {
  return compose(inertial_to_base, base_to_sensor);
}

Pose FrameGraph::sensor_in_map() const {
  Pose sensor = sensor_in_inertial();
  const Vec3 map_origin = inertial_to_base.translation + base_to_map_offset;
  Pose out;
  out.translation = sensor.translation - map_origin;
  out.rotation = sensor.rotation;
  out.covariance = inertial_to_base.covariance;
  return out;
}

} // namespace reefmap::geometry
