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

#include "posemetric/pose_math.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace posemetric {

double wrap_two_pi(double rad) {
  double r = std::fmod(rad, 2.0 * kPi);
  if (r < 0.0) r += 2.0 * kPi;
  // fmod of a tiny negative value can round up to exactly 2*pi.
  if (r >= 2.0 * kPi) r = 0.0;
  return r;
}

EulerPose EulerPose::from_degrees(double az, double el, double ip) {
  return EulerPose{deg2rad(az), deg2rad(el), deg2rad(ip)}.normalized();
}

EulerPose EulerPose::normalized() const {
  return EulerPose{wrap_two_pi(azimuth), elevation, inplane};
}

Quat::Quat(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("Quat: cannot normalize a zero or non-finite vector");
  }
  w_ = w / n;
  x_ = x / n;
  y_ = y / n;
  z_ = z / n;
}

Quat Quat::operator*(const Quat& r) const {
  return raw(w_ * r.w_ - x_ * r.x_ - y_ * r.y_ - z_ * r.z_,
             w_ * r.x_ + x_ * r.w_ + y_ * r.z_ - z_ * r.y_,
             w_ * r.y_ - x_ * r.z_ + y_ * r.w_ + z_ * r.x_,
             w_ * r.z_ + x_ * r.y_ - y_ * r.x_ + z_ * r.w_);
}

std::array<double, 9> Quat::to_matrix() const {
  const double w = w_, x = x_, y = y_, z = z_;
  return {1 - 2 * (y * y + z * z), 2 * (x * y - w * z),     2 * (x * z + w * y),
          2 * (x * y + w * z),     1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
          2 * (x * z - w * y),     2 * (y * z + w * x),     1 - 2 * (x * x + y * y)};
}

Quat Quat::axis_angle(double ax, double ay, double az, double angle) {
  const double n = std::sqrt(ax * ax + ay * ay + az * az);
  if (!(n > 0.0)) throw std::invalid_argument("Quat::axis_angle: zero axis");
  const double s = std::sin(angle / 2.0) / n;
  return raw(std::cos(angle / 2.0), ax * s, ay * s, az * s);
}

Quat euler_to_quat(const EulerPose& pose) {
  const Quat qy = Quat::axis_angle(0, 1, 0, pose.azimuth);
  const Quat qx = Quat::axis_angle(1, 0, 0, pose.elevation);
  const Quat qz = Quat::axis_angle(0, 0, 1, pose.inplane);
  return qz * (qx * qy);
}

EulerPose quat_to_euler(const Quat& q) {
  const auto m = q.to_matrix();
  // Third row of Rz*Rx*Ry is (-cos(el) sin(az), sin(el), cos(el) cos(az)).
  const double el = std::asin(std::clamp(m[7], -1.0, 1.0));
  const double az = std::atan2(-m[6], m[8]);
  // Middle column: (-sin(ip) cos(el), cos(ip) cos(el), sin(el)).
  const double ip = std::atan2(-m[1], m[4]);
  return EulerPose{wrap_two_pi(az), el, ip};
}

double geodesic_distance(const Quat& q1, const Quat& q2) {
  // 2*acos(|q1.q2|) evaluated as 4*atan2(|q1 - q2|, |q1 + q2|) on the same
  // hemisphere: equal poses give exactly zero and small angles keep full
  // precision.
  const double s = q1.dot(q2) < 0.0 ? -1.0 : 1.0;
  const double dw = q1.w() - s * q2.w(), dx = q1.x() - s * q2.x(), dy = q1.y() - s * q2.y(), dz = q1.z() - s * q2.z();
  const double pw = q1.w() + s * q2.w(), px = q1.x() + s * q2.x(), py = q1.y() + s * q2.y(), pz = q1.z() + s * q2.z();
  const double diff = std::sqrt(dw * dw + dx * dx + dy * dy + dz * dz);
  const double sum = std::sqrt(pw * pw + px * px + py * py + pz * pz);
  return std::clamp(4.0 * std::atan2(diff, sum), 0.0, kPi);
}

double pose_distance(const EulerPose& a, const EulerPose& b) {
  return geodesic_distance(euler_to_quat(a), euler_to_quat(b));
}

}  // namespace posemetric
