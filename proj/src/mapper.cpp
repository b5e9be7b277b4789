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

#include "thzmap/mapper.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

namespace thzmap
{

MapCloud mpcs_to_points(const std::vector<MpcEstimate> &estimates, const TrxConfig &trx,
                        double min_power_db)
{
    MapCloud cloud;
    cloud.trx_position = trx.position;
    for (const auto &e : estimates)
    {
        if (e.power_db < min_power_db)
            continue;
        MapPoint p;
        p.source = e;
        p.distance_d_e = SPEED_OF_LIGHT * e.tau_s / 2.0;
        p.position = trx.position +
                     Point2{std::cos(e.theta_rad), std::sin(e.theta_rad)} * p.distance_d_e;
        cloud.points.push_back(p);
    }
    return cloud;
}

namespace
{

struct Polar
{
    double r = 0.0;
    double az_deg = 0.0;
};

std::vector<Polar> to_polar(const MapCloud &cloud)
{
    std::vector<Polar> out(cloud.points.size());
    for (size_t i = 0; i < cloud.points.size(); ++i)
    {
        out[i].r = (cloud.points[i].position - cloud.trx_position).norm();
        out[i].az_deg = rad2deg(azimuth(cloud.trx_position, cloud.points[i].position));
    }
    return out;
}

// Perpendicular RMS of the best-fit straight line (total least squares).
double line_fit_rms(const std::vector<Point2> &pts)
{
    const size_t n = pts.size();
    Point2 mean{0.0, 0.0};
    for (const auto &p : pts)
        mean = mean + p;
    mean = mean * (1.0 / static_cast<double>(n));
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto &p : pts)
    {
        const Point2 d = p - mean;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    const double tr = sxx + syy;
    const double det = sxx * syy - sxy * sxy;
    const double disc = std::sqrt(std::max(0.25 * tr * tr - det, 0.0));
    const double lam_min = std::max(0.5 * tr - disc, 0.0);
    return std::sqrt(lam_min / static_cast<double>(n));
}

double radius_rms(const std::vector<double> &radii, double mean_r)
{
    double acc = 0.0;
    for (double r : radii)
        acc += (r - mean_r) * (r - mean_r);
    return std::sqrt(acc / static_cast<double>(radii.size()));
}

} // namespace

std::vector<ArcModel> detect_spurious_arcs(const MapCloud &cloud, const TrxConfig &trx,
                                           double min_span_deg, double radial_bin_cm)
{
    std::vector<ArcModel> arcs;
    if (cloud.points.empty())
        return arcs;
    const auto polar = to_polar(cloud);
    const double bin_w = radial_bin_cm / 100.0;
    const double need_span = std::max(min_span_deg, 2.0 * trx.hpbw_deg);
    constexpr int MIN_SUPPORT = 5;

    std::map<long, std::vector<size_t>> bins;
    for (size_t i = 0; i < polar.size(); ++i)
        bins[static_cast<long>(std::floor(polar[i].r / bin_w))].push_back(i);

    // Candidate bins by support (bin plus both neighbors), strongest first.
    std::vector<std::pair<size_t, long>> order;
    for (const auto &[b, idx] : bins)
    {
        size_t support = idx.size();
        auto it = bins.find(b - 1);
        if (it != bins.end())
            support += it->second.size();
        it = bins.find(b + 1);
        if (it != bins.end())
            support += it->second.size();
        order.push_back({support, b});
    }
    std::sort(order.begin(), order.end(),
              [](const auto &a, const auto &b)
              {
                  if (a.first != b.first)
                      return a.first > b.first;
                  return a.second < b.second;
              });

    std::vector<bool> consumed(cloud.points.size(), false);
    for (const auto &[support_hint, b] : order)
    {
        (void)support_hint;
        std::vector<size_t> members;
        for (long bb = b - 1; bb <= b + 1; ++bb)
        {
            auto it = bins.find(bb);
            if (it == bins.end())
                continue;
            for (size_t i : it->second)
                if (!consumed[i])
                    members.push_back(i);
        }
        if (members.size() < MIN_SUPPORT)
            continue;

        double az_lo = 1e300, az_hi = -1e300, r_sum = 0.0;
        std::vector<double> radii;
        std::vector<Point2> pts;
        for (size_t i : members)
        {
            az_lo = std::min(az_lo, polar[i].az_deg);
            az_hi = std::max(az_hi, polar[i].az_deg);
            r_sum += polar[i].r;
            radii.push_back(polar[i].r);
            pts.push_back(cloud.points[i].position);
        }
        if (az_hi - az_lo < need_span)
            continue;

        // A true corner artifact is a TRx-centered circle; a straight wall
        // grazing the same radial band fits a line better.
        const double mean_r = r_sum / static_cast<double>(members.size());
        if (radius_rms(radii, mean_r) >= line_fit_rms(pts))
            continue;

        ArcModel arc;
        arc.center = cloud.trx_position;
        arc.radius_m = mean_r;
        arc.span_start_deg = az_lo;
        arc.span_stop_deg = az_hi;
        arc.support_count = static_cast<int>(members.size());
        arcs.push_back(arc);
        for (size_t i : members)
            consumed[i] = true;
    }
    return arcs;
}

std::vector<ArcModel> arcs_from_corners(const Scene &scene, double min_span_deg)
{
    std::vector<ArcModel> arcs;
    const double half = 0.5 * std::max(4.0 * scene.trx.hpbw_deg, min_span_deg);
    for (const auto &c : scene.corners)
    {
        ArcModel arc;
        arc.center = scene.trx.position;
        arc.radius_m = c.direct_distance_d - scene.trx.uca_radius;
        const double az = rad2deg(azimuth(scene.trx.position, c.apex));
        arc.span_start_deg = az - half;
        arc.span_stop_deg = az + half;
        arc.support_count = 0;
        arcs.push_back(arc);
    }
    return arcs;
}

MapCloud remove_spurious(const MapCloud &cloud, const std::vector<ArcModel> &arcs,
                         const TrxConfig &trx, double tolerance_cm)
{
    MapCloud out = cloud;
    if (arcs.empty() || cloud.points.empty())
    {
        for (auto &p : out.points)
            p.spurious = false;
        return out;
    }
    const double tol = tolerance_cm / 100.0;
    const double pad = 0.5 * trx.hpbw_deg;
    const auto polar = to_polar(cloud);

    auto inside_arc = [&](size_t i)
    {
        for (const auto &arc : arcs)
        {
            if (std::abs(polar[i].r - arc.radius_m) > tol)
                continue;
            double a = polar[i].az_deg;
            const double lo = arc.span_start_deg - pad;
            const double hi = arc.span_stop_deg + pad;
            while (a < lo)
                a += 360.0;
            while (a - 360.0 >= lo)
                a -= 360.0;
            if (a <= hi)
                return true;
        }
        return false;
    };

    std::vector<bool> candidate(cloud.points.size());
    for (size_t i = 0; i < cloud.points.size(); ++i)
        candidate[i] = inside_arc(i);

    // Surface consensus: a candidate backed by >= 3 retained neighbors within
    // 2*tolerance belongs to a real wall crossing the arc band.
    for (size_t i = 0; i < cloud.points.size(); ++i)
    {
        if (!candidate[i])
        {
            out.points[i].spurious = false;
            continue;
        }
        int neighbors = 0;
        for (size_t j = 0; j < cloud.points.size() && neighbors < 3; ++j)
        {
            if (j == i || candidate[j])
                continue;
            if ((cloud.points[i].position - cloud.points[j].position).norm() <= 2.0 * tol)
                ++neighbors;
        }
        out.points[i].spurious = neighbors < 3;
    }
    return out;
}

RangingReport ranging_error(const MapCloud &cloud, const Scene &scene, bool include_spurious)
{
    if (scene.walls.empty())
        throw std::invalid_argument("ranging_error: scene has no walls");
    RangingReport rep;
    double acc = 0.0, acc2 = 0.0;
    for (const auto &p : cloud.points)
    {
        if (p.spurious)
        {
            ++rep.n_removed;
            if (!include_spurious)
                continue;
        }
        const double d = nearest_surface_distance(p.position, scene);
        acc += d;
        acc2 += d * d;
        ++rep.n_points;
    }
    if (rep.n_points == 0)
        throw std::runtime_error("ranging_error: no retained map points");
    rep.mde_cm = 100.0 * acc / rep.n_points;
    rep.rmse_cm = 100.0 * std::sqrt(acc2 / rep.n_points);
    return rep;
}

void write_map_csv(const MapCloud &cloud, const std::string &path)
{
    std::ofstream f(path);
    if (!f)
        throw std::invalid_argument("cannot write map CSV: " + path);
    f << "x_m,y_m,power_db,tau_ns,theta_deg,spurious\n";
    char buf[256];
    for (const auto &p : cloud.points)
    {
        std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g,%.10g,%.10g,%d\n", p.position.x,
                      p.position.y, p.source.power_db, p.source.tau_s * 1e9,
                      rad2deg(p.source.theta_rad), p.spurious ? 1 : 0);
        f << buf;
    }
}

void write_map_svg(const MapCloud &cloud, const Scene &scene, const std::string &path)
{
    double x0 = cloud.trx_position.x, x1 = x0, y0 = cloud.trx_position.y, y1 = y0;
    auto grow = [&](const Point2 &p)
    {
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    };
    for (const auto &w : scene.walls)
    {
        grow(w.a);
        grow(w.b);
    }
    for (const auto &p : cloud.points)
        grow(p.position);
    const double margin = 0.5;
    x0 -= margin;
    y0 -= margin;
    x1 += margin;
    y1 += margin;

    const double scale = 100.0; // px per meter
    const double wpx = (x1 - x0) * scale;
    const double hpx = (y1 - y0) * scale;
    auto px = [&](double x) { return (x - x0) * scale; };
    auto py = [&](double y) { return (y1 - y) * scale; };

    std::ofstream f(path);
    if (!f)
        throw std::invalid_argument("cannot write map SVG: " + path);
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                  "viewBox=\"0 0 %.0f %.0f\">\n",
                  wpx, hpx, wpx, hpx);
    f << buf;
    f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // 1 m grid
    for (double gx = std::ceil(x0); gx <= x1; gx += 1.0)
    {
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.2f\" y1=\"0\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#e0e0e0\" "
                      "stroke-width=\"1\"/>\n",
                      px(gx), px(gx), hpx);
        f << buf;
    }
    for (double gy = std::ceil(y0); gy <= y1; gy += 1.0)
    {
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"0\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#e0e0e0\" "
                      "stroke-width=\"1\"/>\n",
                      py(gy), wpx, py(gy));
        f << buf;
    }

    for (const auto &w : scene.walls)
    {
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#444444\" "
                      "stroke-width=\"3\"/>\n",
                      px(w.a.x), py(w.a.y), px(w.b.x), py(w.b.y));
        f << buf;
    }

    for (const auto &p : cloud.points)
    {
        if (p.spurious)
        {
            const double cx = px(p.position.x), cy = py(p.position.y), s = 3.0;
            std::snprintf(buf, sizeof(buf),
                          "<path d=\"M %.2f %.2f L %.2f %.2f M %.2f %.2f L %.2f %.2f\" "
                          "stroke=\"#d62728\" stroke-width=\"1.5\"/>\n",
                          cx - s, cy - s, cx + s, cy + s, cx - s, cy + s, cx + s, cy - s);
        }
        else
        {
            std::snprintf(buf, sizeof(buf),
                          "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2\" fill=\"#1f77b4\"/>\n",
                          px(p.position.x), py(p.position.y));
        }
        f << buf;
    }

    // TRx marker
    const double tx = px(cloud.trx_position.x), ty = py(cloud.trx_position.y);
    std::snprintf(buf, sizeof(buf),
                  "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"5\" fill=\"none\" stroke=\"#2ca02c\" "
                  "stroke-width=\"2\"/>\n<path d=\"M %.2f %.2f L %.2f %.2f M %.2f %.2f L %.2f %.2f\" "
                  "stroke=\"#2ca02c\" stroke-width=\"2\"/>\n",
                  tx, ty, tx - 7.0, ty, tx + 7.0, ty, tx, ty - 7.0, tx, ty + 7.0);
    f << buf;
    f << "</svg>\n";
}

} // namespace thzmap
