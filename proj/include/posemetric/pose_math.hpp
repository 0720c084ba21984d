// Copyright 2026 The posemetric Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <numbers>

namespace posemetric {

inline constexpr double kPi = std::numbers::pi;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle into [0, 2*pi).
double wrap_two_pi(double rad);

/// Viewpoint of an object: azimuth, elevation and in-plane rotation, radians.
/// Azimuth is kept wrapped into [0, 2*pi).
struct EulerPose {
  double azimuth = 0.0;
  double elevation = 0.0;
  double inplane = 0.0;

  static EulerPose from_degrees(double az, double el, double ip);

  /// Copy with azimuth wrapped into [0, 2*pi).
  EulerPose normalized() const;

  friend bool operator==(const EulerPose&, const EulerPose&) = default;
};

/// Unit quaternion (w, x, y, z). q and -q denote the same rotation.
class Quat {
 public:
  Quat() = default;
  /// Normalizes the input; throws std::invalid_argument for a zero vector.
  Quat(double w, double x, double y, double z);

  double w() const { return w_; }
  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }

  Quat operator-() const { return raw(-w_, -x_, -y_, -z_); }
  Quat operator*(const Quat& rhs) const;
  double dot(const Quat& rhs) const { return w_ * rhs.w_ + x_ * rhs.x_ + y_ * rhs.y_ + z_ * rhs.z_; }

  /// Row-major 3x3 rotation matrix.
  std::array<double, 9> to_matrix() const;

  static Quat axis_angle(double ax, double ay, double az, double angle);

 private:
  static Quat raw(double w, double x, double y, double z) {
    Quat q;
    q.w_ = w;
    q.x_ = x;
    q.y_ = y;
    q.z_ = z;
    return q;
  }

  double w_ = 1.0, x_ = 0.0, y_ = 0.0, z_ = 0.0;
};

// Rotation convention: R = Rz(inplane) * Rx(elevation) * Ry(azimuth),
// composed right to left (azimuth applied first). Every distance in the
// library is convention invariant, so only internal consistency matters.
Quat euler_to_quat(const EulerPose& pose);

/// Inverse of euler_to_quat for elevation in (-pi/2, pi/2).
EulerPose quat_to_euler(const Quat& q);

/// Geodesic angle 2*acos(|q1 . q2|) in [0, pi].
double geodesic_distance(const Quat& q1, const Quat& q2);

/// Geodesic angle between two Euler poses, radians.
double pose_distance(const EulerPose& a, const EulerPose& b);

}  // namespace posemetric
