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


// Independent reference implementations used as test oracles. None of them
// call into the library code they check.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <tuple>
#include <vector>

namespace oracle {

using Mat3 = std::array<std::array<double, 3>, 3>;

inline Mat3 mul(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline Mat3 transpose(const Mat3& a) {
  Mat3 t{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t[i][j] = a[j][i];
  return t;
}

inline Mat3 rot_x(double t) { return {{{1, 0, 0}, {0, std::cos(t), -std::sin(t)}, {0, std::sin(t), std::cos(t)}}}; }
inline Mat3 rot_y(double t) { return {{{std::cos(t), 0, std::sin(t)}, {0, 1, 0}, {-std::sin(t), 0, std::cos(t)}}}; }
inline Mat3 rot_z(double t) { return {{{std::cos(t), -std::sin(t), 0}, {std::sin(t), std::cos(t), 0}, {0, 0, 1}}}; }

/// R = Rz(inplane) Rx(elevation) Ry(azimuth), built from elementary rotations.
inline Mat3 euler_matrix(double az, double el, double ip) { return mul(rot_z(ip), mul(rot_x(el), rot_y(az))); }

/// Rotation matrix of a (not necessarily normalized) quaternion (w, x, y, z).
inline Mat3 quat_matrix(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  w /= n, x /= n, y /= n, z /= n;
  return {{{w * w + x * x - y * y - z * z, 2 * (x * y - w * z), 2 * (x * z + w * y)},
           {2 * (x * y + w * z), w * w - x * x + y * y - z * z, 2 * (y * z - w * x)},
           {2 * (x * z - w * y), 2 * (y * z + w * x), w * w - x * x - y * y + z * z}}};
}

/// Rotation angle of Ra^T Rb, from trace and skew part (stable at 0 and pi).
inline double relative_angle(const Mat3& ra, const Mat3& rb) {
  const Mat3 r = mul(transpose(ra), rb);
  const double c = (r[0][0] + r[1][1] + r[2][2] - 1.0) / 2.0;
  const double sx = r[2][1] - r[1][2], sy = r[0][2] - r[2][0], sz = r[1][0] - r[0][1];
  const double s = std::sqrt(sx * sx + sy * sy + sz * sz) / 2.0;
  return std::atan2(s, c);
}

/// Exact area of the union of axis-aligned rectangles on a raster grid of
/// `res` x `res` cell centres over the unit square.
inline double raster_union(const std::vector<std::array<double, 4>>& rects, int res) {
  long hit = 0;
  for (int iy = 0; iy < res; ++iy) {
    const double y = (iy + 0.5) / res;
    for (int ix = 0; ix < res; ++ix) {
      const double x = (ix + 0.5) / res;
      for (const auto& r : rects) {
        if (x >= r[0] && x < r[2] && y >= r[1] && y < r[3]) {
          ++hit;
          break;
        }
      }
    }
  }
  return static_cast<double>(hit) / (static_cast<double>(res) * res);
}

struct Metrics {
  double acc_pi6, acc_pi18, med;
};

inline Metrics metrics(std::vector<double> errs) {
  double a6 = 0, a18 = 0;
  for (double e : errs) {
    if (e < 30.0) a6 += 1;
    if (e < 10.0) a18 += 1;
  }
  std::sort(errs.begin(), errs.end());
  const std::size_t n = errs.size();
  const double med = n % 2 ? errs[n / 2] : 0.5 * (errs[n / 2 - 1] + errs[n / 2]);
  return {a6 / n, a18 / n, med};
}

/// Axis-aligned IoU of boxes given as (x, y, w, h).
inline double box_iou(double ax, double ay, double aw, double ah, double bx, double by, double bw, double bh) {
  const double ix = std::max(0.0, std::min(ax + aw, bx + bw) - std::max(ax, bx));
  const double iy = std::max(0.0, std::min(ay + ah, by + bh) - std::max(ay, by));
  const double inter = ix * iy;
  return inter / (aw * ah + bw * bh - inter);
}

}  // namespace oracle
