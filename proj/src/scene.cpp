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

#include "thzmap/scene.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace thzmap
{

double point_segment_distance(const Point2 &p, const Point2 &a, const Point2 &b)
{
    const Point2 ab = b - a;
    const double len2 = ab.dot(ab);
    if (len2 <= 0.0)
        return (p - a).norm();
    double t = (p - a).dot(ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + ab * t)).norm();
}

std::optional<Point2> segment_intersection(const Point2 &a1, const Point2 &b1,
                                           const Point2 &a2, const Point2 &b2, double tol)
{
    const Point2 d1 = b1 - a1;
    const Point2 d2 = b2 - a2;
    const double denom = d1.cross(d2);
    const double scale = std::max({d1.norm(), d2.norm(), 1.0});

    if (std::abs(denom) < tol * scale * scale)
        return std::nullopt; // parallel or collinear

    const Point2 r = a2 - a1;
    const double t = r.cross(d2) / denom;
    const double u = r.cross(d1) / denom;
    const double tol_t = tol / std::max(d1.norm(), tol);
    const double tol_u = tol / std::max(d2.norm(), tol);
    if (t < -tol_t || t > 1.0 + tol_t || u < -tol_u || u > 1.0 + tol_u)
        return std::nullopt;
    return a1 + d1 * t;
}

bool segments_overlap(const Point2 &a1, const Point2 &b1,
                      const Point2 &a2, const Point2 &b2, double tol)
{
    const Point2 d1 = b1 - a1;
    const Point2 d2 = b2 - a2;
    if (std::abs(d1.cross(d2)) > tol * std::max(d1.norm() * d2.norm(), 1.0))
        return false; // not parallel
    if (std::abs((a2 - a1).cross(d1)) > tol * std::max(d1.norm(), 1.0))
        return false; // parallel but not collinear

    // Project the second segment onto the first; positive-length overlap only.
    const double len = d1.norm();
    if (len <= tol)
        return false;
    const Point2 u = d1 * (1.0 / len);
    double s0 = (a2 - a1).dot(u);
    double s1 = (b2 - a1).dot(u);
    if (s0 > s1)
        std::swap(s0, s1);
    const double lo = std::max(0.0, s0);
    const double hi = std::min(len, s1);
    return hi - lo > tol;
}

Point2 WallSegment::normal_toward(const Point2 &p) const
{
    const Point2 d = unit_dir();
    Point2 n{-d.y, d.x};
    if (n.dot(p - a) < 0.0)
        n = n * -1.0;
    return n;
}

std::vector<double> TrxConfig::scan_angles_deg() const
{
    if (scan_step_deg <= 0.0)
        throw std::invalid_argument("scan_step_deg must be positive");
    if (scan_stop_deg < scan_start_deg)
        throw std::invalid_argument("scan range is empty");
    const int n = static_cast<int>(std::floor((scan_stop_deg - scan_start_deg) / scan_step_deg + 1e-9)) + 1;
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i)
        out[i] = scan_start_deg + i * scan_step_deg;
    return out;
}

void FrequencyGrid::validate() const
{
    if (!(f_stop_hz > f_start_hz))
        throw std::invalid_argument("frequency grid requires f_stop > f_start");
    if (n_points < 2)
        throw std::invalid_argument("frequency grid requires n_points >= 2");
    if (!(f_start_hz > 0.0))
        throw std::invalid_argument("frequency grid requires f_start > 0");
}

namespace
{

// Directions pointing away from p along the segment, for arms longer than tol.
std::vector<Point2> arms_at(const WallSegment &w, const Point2 &p, double tol)
{
    std::vector<Point2> arms;
    if ((w.a - p).norm() > tol)
        arms.push_back((w.a - p).normalized());
    if ((w.b - p).norm() > tol)
        arms.push_back((w.b - p).normalized());
    return arms;
}

// True if v lies strictly inside the cone spanned by u1, u2 (angle < pi).
bool inside_cone(const Point2 &v, const Point2 &u1, const Point2 &u2)
{
    const double denom = u1.cross(u2);
    if (std::abs(denom) < 1e-12)
        return false; // collinear arms, no interior
    const double a = v.cross(u2) / denom;
    const double b = u1.cross(v) / denom;
    return a > 1e-9 && b > 1e-9;
}

void validate_walls(const std::vector<WallSegment> &walls, const TrxConfig &trx)
{
    if (trx.uca_radius <= 0.0)
        throw std::invalid_argument("uca_radius must be positive");
    for (size_t i = 0; i < walls.size(); ++i)
    {
        const auto &w = walls[i];
        if (!w.a.is_finite() || !w.b.is_finite())
            throw std::invalid_argument("wall " + std::to_string(i) + " has non-finite coordinates");
        if (w.length() <= 1e-12)
            throw std::invalid_argument("wall " + std::to_string(i) + " is degenerate (zero length)");
        if (point_segment_distance(trx.position, w.a, w.b) <= trx.uca_radius)
            throw std::invalid_argument("wall " + std::to_string(i) + " intersects the TRx array disc");
        for (size_t j = i + 1; j < walls.size(); ++j)
            if (segments_overlap(w.a, w.b, walls[j].a, walls[j].b))
                throw std::invalid_argument("walls " + std::to_string(i) + " and " + std::to_string(j) +
                                            " overlap");
    }
}

} // namespace

Scene build_scene(const std::vector<WallSegment> &walls, const TrxConfig &trx,
                  const std::vector<CornerOverride> *manual_corners)
{
    validate_walls(walls, trx);
    (void)trx.scan_angles_deg(); // validates the scan list

    Scene scene;
    scene.walls = walls;
    scene.trx = trx;

    const double apex_tol = 1e-9;
    if (manual_corners)
    {
        for (const auto &mc : *manual_corners)
        {
            CornerFeature c;
            c.apex = mc.apex;
            c.wall_i = mc.wall_i;
            c.wall_j = mc.wall_j;
            c.direct_distance_d = (mc.apex - trx.position).norm();
            if (c.direct_distance_d <= trx.uca_radius)
                throw std::invalid_argument("declared corner lies inside the TRx array disc");
            scene.corners.push_back(c);
        }
    }
    else
    {
        for (size_t i = 0; i < walls.size(); ++i)
            for (size_t j = i + 1; j < walls.size(); ++j)
            {
                auto p = segment_intersection(walls[i].a, walls[i].b, walls[j].a, walls[j].b);
                if (!p)
                    continue;
                const Point2 v = (trx.position - *p).normalized();
                bool opens = false;
                for (const auto &u1 : arms_at(walls[i], *p, apex_tol))
                {
                    for (const auto &u2 : arms_at(walls[j], *p, apex_tol))
                        if (inside_cone(v, u1, u2))
                        {
                            opens = true;
                            break;
                        }
                    if (opens)
                        break;
                }
                if (!opens)
                    continue;
                CornerFeature c;
                c.apex = *p;
                c.wall_i = static_cast<int>(i);
                c.wall_j = static_cast<int>(j);
                c.direct_distance_d = (*p - trx.position).norm();
                if (c.direct_distance_d <= trx.uca_radius)
                    throw std::invalid_argument("derived corner lies inside the TRx array disc");
                scene.corners.push_back(c);
            }
    }

    std::sort(scene.corners.begin(), scene.corners.end(),
              [&](const CornerFeature &a, const CornerFeature &b)
              {
                  const double aa = azimuth(trx.position, a.apex);
                  const double ab = azimuth(trx.position, b.apex);
                  if (aa != ab)
                      return aa < ab;
                  return a.direct_distance_d < b.direct_distance_d;
              });
    return scene;
}

double nearest_surface_distance(const Point2 &p, const Scene &scene)
{
    if (scene.walls.empty())
        throw std::invalid_argument("scene has no walls");
    double best = std::numeric_limits<double>::infinity();
    for (const auto &w : scene.walls)
        best = std::min(best, point_segment_distance(p, w.a, w.b));
    return best;
}

// ---------------------------------------------------------------------------
// JSON scene files
// ---------------------------------------------------------------------------

using nlohmann::json;

namespace
{

Point2 point_from_json(const json &j)
{
    if (!j.is_array() || j.size() != 2)
        throw std::invalid_argument("expected [x, y] coordinate pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

} // namespace

SceneSpec parse_scene_json(const std::string &json_text)
{
    json j;
    try
    {
        j = json::parse(json_text);
    }
    catch (const json::exception &e)
    {
        throw std::invalid_argument(std::string("scene JSON parse error: ") + e.what());
    }

    std::vector<WallSegment> walls;
    for (const auto &jw : j.at("walls"))
    {
        WallSegment w;
        w.a = point_from_json(jw.at("a"));
        w.b = point_from_json(jw.at("b"));
        w.material_name = jw.at("material").get<std::string>();
        w.backscatter_db = jw.value("backscatter_db", 0.0);
        walls.push_back(w);
    }

    const auto &jt = j.at("trx");
    TrxConfig trx;
    trx.position = point_from_json(jt.at("position"));
    trx.uca_radius = jt.value("uca_radius", 0.23);
    trx.antenna_gain_dbi = jt.value("antenna_gain_dbi", 26.0);
    trx.hpbw_deg = jt.value("hpbw_deg", 8.0);
    trx.height_m = jt.value("height_m", 2.0);
    if (jt.contains("scan"))
    {
        const auto &js = jt.at("scan");
        if (!js.is_array() || js.size() != 3)
            throw std::invalid_argument("trx.scan must be [start, step, stop]");
        trx.scan_start_deg = js[0].get<double>();
        trx.scan_step_deg = js[1].get<double>();
        trx.scan_stop_deg = js[2].get<double>();
    }

    FrequencyGrid grid;
    if (j.contains("frequency"))
    {
        const auto &jf = j.at("frequency");
        grid.f_start_hz = jf.value("start_hz", 290e9);
        grid.f_stop_hz = jf.value("stop_hz", 310e9);
        grid.n_points = jf.value("n_points", 2001);
    }
    grid.validate();

    std::vector<CornerOverride> overrides;
    bool has_overrides = false;
    if (j.contains("corners"))
    {
        has_overrides = true;
        for (const auto &jc : j.at("corners"))
        {
            CornerOverride c;
            c.apex = point_from_json(jc.at("apex"));
            if (jc.contains("walls"))
            {
                c.wall_i = jc.at("walls")[0].get<int>();
                c.wall_j = jc.at("walls")[1].get<int>();
            }
            overrides.push_back(c);
        }
    }

    SceneSpec spec;
    spec.scene = build_scene(walls, trx, has_overrides ? &overrides : nullptr);
    spec.grid = grid;
    return spec;
}

SceneSpec load_scene_json(const std::string &path)
{
    std::ifstream f(path);
    if (!f)
        throw std::invalid_argument("cannot open scene file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_scene_json(ss.str());
}

std::string scene_to_json(const SceneSpec &spec)
{
    json j;
    j["walls"] = json::array();
    for (const auto &w : spec.scene.walls)
    {
        json jw;
        jw["a"] = {w.a.x, w.a.y};
        jw["b"] = {w.b.x, w.b.y};
        jw["material"] = w.material_name;
        jw["backscatter_db"] = w.backscatter_db;
        j["walls"].push_back(jw);
    }
    const auto &t = spec.scene.trx;
    j["trx"] = {{"position", {t.position.x, t.position.y}},
                {"uca_radius", t.uca_radius},
                {"antenna_gain_dbi", t.antenna_gain_dbi},
                {"hpbw_deg", t.hpbw_deg},
                {"height_m", t.height_m},
                {"scan", {t.scan_start_deg, t.scan_step_deg, t.scan_stop_deg}}};
    j["frequency"] = {{"start_hz", spec.grid.f_start_hz},
                      {"stop_hz", spec.grid.f_stop_hz},
                      {"n_points", spec.grid.n_points}};
    return j.dump(2);
}

std::uint64_t scene_hash(const SceneSpec &spec)
{
    const std::string s = scene_to_json(spec);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s)
    {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace thzmap
