// SPDX-License-Identifier: Apache-2.0
//
// thzmap - monostatic terahertz sensing toolkit: channel simulation, SAGE
// multipath estimation, indoor geometry mapping and material identification
// Copyright (C) 2026 thzmap contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef THZMAP_GEOMETRY_HPP
#define THZMAP_GEOMETRY_HPP

#include <cmath>
#include <optional>

namespace thzmap
{

/// Speed of light in vacuum [m/s].
inline constexpr double SPEED_OF_LIGHT = 299792458.0;

inline constexpr double PI = 3.14159265358979323846;

/// 2-D point / vector in the azimuth plane, meters.
struct Point2
{
    double x = 0.0;
    double y = 0.0;

    Point2 operator+(const Point2 &o) const { return {x + o.x, y + o.y}; }
    Point2 operator-(const Point2 &o) const { return {x - o.x, y - o.y}; }
    Point2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Point2 &o) const { return x * o.x + y * o.y; }
    double cross(const Point2 &o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }

    Point2 normalized() const
    {
        double n = norm();
        return n > 0.0 ? Point2{x / n, y / n} : Point2{0.0, 0.0};
    }

    bool is_finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline double deg2rad(double d) { return d * PI / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / PI; }

/// Wrap an angle to [0, 2*pi).
inline double wrap_2pi(double a)
{
    a = std::fmod(a, 2.0 * PI);
    if (a < 0.0)
        a += 2.0 * PI;
    return a;
}

/// Wrap an angle to [-pi, pi).
inline double wrap_pi(double a)
{
    a = wrap_2pi(a + PI);
    return a - PI;
}

/// Azimuth of `to` as seen from `from`, in [0, 2*pi).
inline double azimuth(const Point2 &from, const Point2 &to)
{
    return wrap_2pi(std::atan2(to.y - from.y, to.x - from.x));
}

/// Euclidean distance from point p to the segment [a, b].
double point_segment_distance(const Point2 &p, const Point2 &a, const Point2 &b);

/// Intersection point of segments [a1,b1] and [a2,b2], endpoints inclusive.
/// Returns nothing for parallel, disjoint or (collinear-)overlapping pairs.
std::optional<Point2> segment_intersection(const Point2 &a1, const Point2 &b1,
                                           const Point2 &a2, const Point2 &b2,
                                           double tol = 1e-9);

/// True if the collinear overlap of two segments has positive length.
bool segments_overlap(const Point2 &a1, const Point2 &b1,
                      const Point2 &a2, const Point2 &b2, double tol = 1e-9);

} // namespace thzmap

#endif
