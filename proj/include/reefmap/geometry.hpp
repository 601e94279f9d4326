#pragma once

#include <Eigen/Core>

// Coordinate frames and variance-propagation Jacobians.
//
// Conventions used throughout:
//  - The inertial frame is NED (z down). Map frames are NED-aligned.
//  - Stored elevations are up-positive: h = -z_ned. The sign flip lives in
//    exactly one place, height_measurement().
//  - Rotations are intrinsic Z-Y'-X'' (yaw-pitch-roll). A Pose carries a
//    point from its child frame into its parent frame: p' = R p + t.
//  - Pose covariance is 6x6 ordered [tx ty tz, roll pitch yaw].
namespace reefmap::geometry {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using RowVec3 = Eigen::RowVector3d;

struct Rotation {
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;

  Rotation() = default;
  Rotation(double yaw_, double pitch_, double roll_)
      : yaw(yaw_), pitch(pitch_), roll(roll_) {}

  /// R = Rz(yaw) * Ry(pitch) * Rx(roll), child -> parent.
  Mat3 matrix() const;

  Rotation inverse() const;

  /// Euler extraction; throws std::invalid_argument within 1e-9 of
  /// gimbal lock (|pitch| = pi/2) or for a non-orthonormal input.
  static Rotation from_matrix(const Mat3& m);

  static Rotation compose(const Rotation& a, const Rotation& b);
};

struct Pose {
  Vec3 translation = Vec3::Zero();
  Rotation rotation;
  Mat6 covariance = Mat6::Zero();

  Pose() = default;
  /// Validates the rotation (gimbal lock rejected) and the covariance
  /// (symmetric, eigenvalues >= -1e-10); throws std::invalid_argument.
  Pose(const Vec3& t, const Rotation& r, const Mat6& cov = Mat6::Zero());

  /// Inverse transform. Covariance is not propagated (set to zero).
  Pose inverse() const;
};

Pose compose(const Pose& a, const Pose& b);

Vec3 transform_point(const Pose& pose, const Vec3& p);

/// Up-positive elevation of a sensor-frame point expressed in the map frame.
/// `sensor_to_map` carries sensor-frame points into the (NED-aligned) map
/// frame; the result is -z of the transformed point.
double height_measurement(const Vec3& point_s, const Pose& sensor_to_map);

/// d(height)/d(point_s): minus the third row of the sensor-to-map rotation.
RowVec3 jacobian_range(const Vec3& point_s, const Pose& sensor_to_map);

/// d(height)/d(roll, pitch, yaw) of the sensor-to-map rotation, by central
/// finite differences. Ordering matches the covariance rotation block.
RowVec3 jacobian_rotation(const Vec3& point_s, const Pose& sensor_to_map,
                          double step = 1e-6);

struct FrameGraph {
  Pose inertial_to_base;
  Pose base_to_sensor;          // static extrinsic
  Vec3 base_to_map_offset = Vec3::Zero();

  Pose sensor_in_inertial() const;
  /// Sensor pose in the NED-aligned map frame whose origin sits at the base
  /// position plus the configured offset. Carries the base pose covariance.
  Pose sensor_in_map() const;
};

} // namespace reefmap::geometry
