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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "thzmap/scene.hpp"

#include <algorithm>
#include <random>

using namespace thzmap;

namespace
{

WallSegment wall(double ax, double ay, double bx, double by, const char *mat = "Cement")
{
    return WallSegment{{ax, ay}, {bx, by}, mat, 0.0};
}

TrxConfig trx_at(double x, double y)
{
    TrxConfig t;
    t.position = {x, y};
    return t;
}

// Independent oracle: all pairwise segment intersections by brute force over
// a fine parameter grid, keeping points where the segments come closer than eps.
std::vector<Point2> brute_force_intersections(const std::vector<WallSegment> &walls, double eps)
{
    std::vector<Point2> out;
    const int steps = 2000;
    for (size_t i = 0; i < walls.size(); ++i)
        for (size_t j = i + 1; j < walls.size(); ++j)
        {
            double best = 1e300;
            Point2 best_p;
            for (int s = 0; s <= steps; ++s)
            {
                const double t = static_cast<double>(s) / steps;
                const Point2 p = walls[i].a + (walls[i].b - walls[i].a) * t;
                const double d = point_segment_distance(p, walls[j].a, walls[j].b);
                if (d < best)
                {
                    best = d;
                    best_p = p;
                }
            }
            if (best < eps)
                out.push_back(best_p);
        }
    return out;
}

} // namespace

TEST_CASE("two perpendicular walls meeting at (4,0) give one corner with d = 4")
{
    auto scene = build_scene({wall(4.0, 0.0, 4.0, 3.0), wall(4.0, 0.0, 1.0, 0.0)}, trx_at(0.0, 1.0));
    // interior opens toward +x... TRx at (0,1) sees into the corner
    REQUIRE(scene.corners.size() == 1);
    CHECK(scene.corners[0].apex.x == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(scene.corners[0].apex.y == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(scene.corners[0].direct_distance_d ==
          doctest::Approx(std::hypot(4.0, 1.0)).epsilon(1e-12));
}

TEST_CASE("corner example: walls meeting at (4,0) seen from the origin, d = 4.0")
{
    auto scene = build_scene({wall(4.0, -1.0, 4.0, 1.0), wall(4.0, 0.0, 3.0, 2.0)}, trx_at(0.0, 0.0));
    REQUIRE(scene.corners.size() == 1);
    CHECK(scene.corners[0].direct_distance_d == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("single wall yields zero corners")
{
    auto scene = build_scene({wall(-1.0, 2.0, 1.0, 2.0)}, trx_at(0.0, 0.0));
    CHECK(scene.corners.empty());
}

TEST_CASE("L-shaped room: corners match brute-force intersections, deterministic order")
{
    // three walls around the TRx forming two concave corners
    std::vector<WallSegment> walls = {
        wall(3.0, -1.0, 3.0, 2.0),  // right wall
        wall(3.0, 2.0, -1.0, 2.0),  // top wall
        wall(-1.0, 2.0, -1.0, -1.0) // left wall
    };
    auto scene = build_scene(walls, trx_at(0.5, 0.5));
    const auto oracle = brute_force_intersections(walls, 5e-3);
    REQUIRE(scene.corners.size() == oracle.size());
    REQUIRE(scene.corners.size() == 2);

    // sorted by apex azimuth from the TRx
    const double az0 = azimuth(scene.trx.position, scene.corners[0].apex);
    const double az1 = azimuth(scene.trx.position, scene.corners[1].apex);
    CHECK(az0 < az1);

    for (const auto &c : scene.corners)
    {
        const double d0 = (c.apex - oracle[0]).norm();
        const double d1 = (c.apex - oracle[1]).norm();
        CHECK(std::min(d0, d1) < 5e-3);
    }
}

TEST_CASE("corner derivation is symmetric under wall permutation")
{
    std::vector<WallSegment> walls = {
        wall(3.0, -1.0, 3.0, 2.0),
        wall(3.0, 2.0, -1.0, 2.0),
        wall(-1.0, 2.0, -1.0, -1.0),
    };
    auto base = build_scene(walls, trx_at(0.5, 0.5));
    std::vector<WallSegment> perm = {walls[2], walls[0], walls[1]};
    auto scene2 = build_scene(perm, trx_at(0.5, 0.5));
    REQUIRE(base.corners.size() == scene2.corners.size());
    for (size_t i = 0; i < base.corners.size(); ++i)
        CHECK((base.corners[i].apex - scene2.corners[i].apex).norm() < 1e-9);
}

TEST_CASE("convex junction (opens away from TRx) is not a corner")
{
    // Same junction, TRx on the far side
    auto scene = build_scene({wall(3.0, -1.0, 3.0, 2.0), wall(3.0, 2.0, 5.0, 2.0)}, trx_at(0.0, 0.0));
    CHECK(scene.corners.empty());
}

TEST_CASE("validation failures")
{
    CHECK_THROWS_AS(build_scene({wall(1.0, 1.0, 1.0, 1.0)}, trx_at(0.0, 0.0)), std::invalid_argument);
    // overlapping collinear walls
    CHECK_THROWS_AS(
        build_scene({wall(0.0, 2.0, 2.0, 2.0), wall(1.0, 2.0, 3.0, 2.0)}, trx_at(0.0, 0.0)),
        std::invalid_argument);
    // wall through the TRx array disc
    CHECK_THROWS_AS(build_scene({wall(-1.0, 0.1, 1.0, 0.1)}, trx_at(0.0, 0.0)),
                    std::invalid_argument);
}

TEST_CASE("nearest_surface_distance basics")
{
    auto scene = build_scene({wall(-5.0, 3.0, 5.0, 3.0)}, trx_at(0.0, 0.0));
    CHECK(nearest_surface_distance({1.0, 3.0}, scene) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(nearest_surface_distance({0.0, 2.9}, scene) == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("distance beyond a segment endpoint matches a dense-sampling oracle")
{
    auto scene = build_scene({wall(1.0, 2.0, 4.0, 5.0)}, trx_at(0.0, 0.0));
    const Point2 q{6.0, 5.0};
    const double got = nearest_surface_distance(q, scene);

    double oracle = 1e300;
    const auto &w = scene.walls[0];
    for (int s = 0; s <= 200000; ++s)
    {
        const double t = static_cast<double>(s) / 200000;
        const Point2 p = w.a + (w.b - w.a) * t;
        oracle = std::min(oracle, (q - p).norm());
    }
    CHECK(got == doctest::Approx(oracle).epsilon(1e-8));
    CHECK(got == doctest::Approx((q - w.b).norm()).epsilon(1e-12));
}

TEST_CASE("nearest_surface_distance properties: on-wall zero and translation invariance")
{
    std::vector<WallSegment> walls = {wall(3.0, -1.0, 3.0, 2.0), wall(3.0, 2.0, -1.0, 2.0)};
    auto scene = build_scene(walls, trx_at(0.5, 0.5));

    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial)
    {
        const auto &w = scene.walls[trial % walls.size()];
        const double t = uni(rng);
        const Point2 on_wall = w.a + (w.b - w.a) * t;
        CHECK(nearest_surface_distance(on_wall, scene) < 1e-9);

        const Point2 q{uni(rng) * 6.0 - 1.0, uni(rng) * 6.0 - 1.0};
        const Point2 shift{uni(rng) * 10.0 - 5.0, uni(rng) * 10.0 - 5.0};
        std::vector<WallSegment> shifted = walls;
        for (auto &sw : shifted)
        {
            sw.a = sw.a + shift;
            sw.b = sw.b + shift;
        }
        auto scene2 = build_scene(shifted, trx_at(0.5 + shift.x, 0.5 + shift.y));
        CHECK(std::abs(nearest_surface_distance(q, scene) -
                       nearest_surface_distance(q + shift, scene2)) < 1e-9);
    }
}

TEST_CASE("scan angle list and frequency grid defaults")
{
    TrxConfig t;
    const auto scan = t.scan_angles_deg();
    REQUIRE(scan.size() == 181);
    CHECK(scan.front() == 0.0);
    CHECK(scan.back() == 180.0);

    FrequencyGrid g;
    CHECK(g.bandwidth_hz() == doctest::Approx(20e9));
    CHECK(g.n_points == 2001);
    CHECK(g.delay_bin_s() == doctest::Approx(0.05e-9).epsilon(1e-15));
    CHECK(g.distance_resolution_m() == doctest::Approx(0.015).epsilon(1e-3));
}

TEST_CASE("scene JSON round trip and hash stability")
{
    const std::string text = R"({
      "walls": [
        {"a": [-2.0, 3.0], "b": [2.5, 3.0], "material": "Cement", "backscatter_db": 0.0},
        {"a": [2.5, 3.0], "b": [2.5, -0.5], "material": "Cement"}
      ],
      "trx": {"position": [0.0, 0.0], "uca_radius": 0.23, "antenna_gain_dbi": 26.0,
              "hpbw_deg": 8.0, "scan": [0.0, 1.0, 180.0]},
      "frequency": {"start_hz": 290e9, "stop_hz": 310e9, "n_points": 2001}
    })";
    auto spec = parse_scene_json(text);
    REQUIRE(spec.scene.walls.size() == 2);
    REQUIRE(spec.scene.corners.size() == 1);
    CHECK(spec.scene.corners[0].apex.x == doctest::Approx(2.5));
    CHECK(spec.scene.corners[0].apex.y == doctest::Approx(3.0));
    CHECK(spec.grid.n_points == 2001);

    auto spec2 = parse_scene_json(scene_to_json(spec));
    CHECK(scene_hash(spec) == scene_hash(spec2));

    // manual corner override
    const std::string text2 = R"({
      "walls": [{"a": [-2.0, 3.0], "b": [2.5, 3.0], "material": "Cement"}],
      "corners": [{"apex": [2.5, 3.0], "walls": [0, 0]}],
      "trx": {"position": [0.0, 0.0]}
    })";
    auto spec3 = parse_scene_json(text2);
    REQUIRE(spec3.scene.corners.size() == 1);
}
