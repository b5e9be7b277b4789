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

#ifndef THZMAP_SCENE_HPP
#define THZMAP_SCENE_HPP

#include "thzmap/geometry.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace thzmap
{

/// A flat wall piece with a surface material.
struct WallSegment
{
    Point2 a;
    Point2 b;
    std::string material_name;
    double backscatter_db = 0.0; ///< diffuse backscatter strength relative to the specular budget [dB]

    double length() const { return (b - a).norm(); }
    Point2 unit_dir() const { return (b - a).normalized(); }

    /// Unit normal oriented toward the given side.
    Point2 normal_toward(const Point2 &p) const;
};

/// A concave wall junction that acts as a retroreflector.
struct CornerFeature
{
    Point2 apex;
    int wall_i = -1;
    int wall_j = -1;
    double direct_distance_d = 0.0; ///< TRx-to-apex distance [m]
};

/// Transceiver: co-located Tx/Rx rotating on a circle of radius uca_radius.
struct TrxConfig
{
    Point2 position;
    double uca_radius = 0.23;     ///< m
    double antenna_gain_dbi = 26.0;
    double hpbw_deg = 8.0;
    double scan_start_deg = 0.0;
    double scan_step_deg = 1.0;
    double scan_stop_deg = 180.0;
    double height_m = 2.0;        ///< metadata only; all processing is planar

    std::vector<double> scan_angles_deg() const;
};

/// Uniform frequency sweep. Samples are f_k = f_start + k*B/n_points,
/// k = 0..n_points-1, so the IDFT delay bin spacing is exactly 1/B and the
/// unambiguous delay window is n_points/B.
struct FrequencyGrid
{
    double f_start_hz = 290e9;
    double f_stop_hz = 310e9;
    int n_points = 2001;

    double bandwidth_hz() const { return f_stop_hz - f_start_hz; }
    double df_hz() const { return bandwidth_hz() / n_points; }
    double freq_hz(int k) const { return f_start_hz + k * df_hz(); }
    double center_hz() const { return 0.5 * (f_start_hz + f_stop_hz); }
    double delay_bin_s() const { return 1.0 / bandwidth_hz(); }
    double unambiguous_delay_s() const { return n_points / bandwidth_hz(); }

    /// One-way range bin c/B. The companion round-trip figure is half of it.
    double distance_resolution_m() const { return SPEED_OF_LIGHT * delay_bin_s(); }

    void validate() const;
};

/// 2-D world: walls, derived retroreflecting corners, transceiver.
struct Scene
{
    std::vector<WallSegment> walls;
    std::vector<CornerFeature> corners;
    TrxConfig trx;
};

/// Manual corner declaration (overrides geometric derivation).
struct CornerOverride
{
    Point2 apex;
    int wall_i = -1;
    int wall_j = -1;
};

/// Validates walls/trx and derives corners: every wall-pair intersection
/// whose interior angle opens toward the TRx, sorted by apex azimuth.
/// Pass explicit overrides to declare corners manually instead.
Scene build_scene(const std::vector<WallSegment> &walls, const TrxConfig &trx,
                  const std::vector<CornerOverride> *manual_corners = nullptr);

/// Distance from p to the nearest wall surface of the scene.
double nearest_surface_distance(const Point2 &p, const Scene &scene);

/// Scene file payload: geometry plus the frequency sweep to simulate.
struct SceneSpec
{
    Scene scene;
    FrequencyGrid grid;
};

SceneSpec load_scene_json(const std::string &path);
SceneSpec parse_scene_json(const std::string &json_text);
std::string scene_to_json(const SceneSpec &spec);

/// FNV-1a hash of the canonical JSON serialization, for provenance sidecars.
std::uint64_t scene_hash(const SceneSpec &spec);

} // namespace thzmap

#endif
