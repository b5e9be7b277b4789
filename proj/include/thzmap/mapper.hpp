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

#ifndef THZMAP_MAPPER_HPP
#define THZMAP_MAPPER_HPP

#include "thzmap/estimator.hpp"
#include "thzmap/scene.hpp"

#include <string>
#include <vector>

namespace thzmap
{

/// A reconstructed scatter position: r = r_trx + (c*tau/2) * [cos theta, sin theta].
struct MapPoint
{
    Point2 position;
    MpcEstimate source;
    bool spurious = false;
    double distance_d_e = 0.0; ///< c*tau/2 [m]
};

struct MapCloud
{
    std::vector<MapPoint> points;
    Point2 trx_position;
};

/// TRx-centered circular arc traced by a corner's second-order reflection.
struct ArcModel
{
    Point2 center;
    double radius_m = 0.0;
    double span_start_deg = 0.0;
    double span_stop_deg = 0.0;
    int support_count = 0;

    double span_width_deg() const { return span_stop_deg - span_start_deg; }
};

struct RangingReport
{
    double mde_cm = 0.0;
    double rmse_cm = 0.0;
    int n_points = 0;
    int n_removed = 0;
};

/// Converts estimates to map points, dropping those below min_power_db
/// (compared against MpcEstimate.power_db; pass -infinity to keep all).
MapCloud mpcs_to_points(const std::vector<MpcEstimate> &estimates, const TrxConfig &trx,
                        double min_power_db = -1e300);

/// Blind arc search: radial histogram (bin + two neighbors) clusters that span
/// at least max(min_span_deg, 2*HPBW) of azimuth and fit a TRx-centered circle
/// better than a straight line. Radius = mean radius of the supporting points.
std::vector<ArcModel> detect_spurious_arcs(const MapCloud &cloud, const TrxConfig &trx,
                                           double min_span_deg = 15.0,
                                           double radial_bin_cm = 1.5);

/// Known-corner mode: one arc per corner with radius d - R (half the
/// second-order path length), spanning apex azimuth +/- 2*HPBW.
std::vector<ArcModel> arcs_from_corners(const Scene &scene, double min_span_deg = 15.0);

/// Flags points whose radius is within tolerance of an arc and whose azimuth
/// falls inside the arc span padded by HPBW/2. Points backed by >= 3 retained
/// neighbors within 2*tolerance are exempted (surface consensus). Flags are
/// recomputed from scratch, so the operation is idempotent.
MapCloud remove_spurious(const MapCloud &cloud, const std::vector<ArcModel> &arcs,
                         const TrxConfig &trx, double tolerance_cm = 3.0);

/// MDE/RMSE of retained (or all) points against the nearest scene surface, in cm.
RangingReport ranging_error(const MapCloud &cloud, const Scene &scene, bool include_spurious);

void write_map_csv(const MapCloud &cloud, const std::string &path);

/// Deterministic SVG: 1 m grid, ground-truth walls, TRx marker, points
/// (spurious styled as crosses).
void write_map_svg(const MapCloud &cloud, const Scene &scene, const std::string &path);

} // namespace thzmap

#endif
