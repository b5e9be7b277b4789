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

#include "thzmap/channel.hpp"
#include "thzmap/estimator.hpp"

#include <cmath>
#include <filesystem>

using namespace thzmap;

namespace
{

TrxConfig isotropic_trx()
{
    TrxConfig t;
    t.uca_radius = 0.0; // scene validation requires R > 0, the synthesizer does not
    t.antenna_gain_dbi = 0.0;
    t.scan_start_deg = 0.0;
    t.scan_step_deg = 1.0;
    t.scan_stop_deg = 0.0;
    return t;
}

FrequencyGrid small_grid()
{
    FrequencyGrid g;
    g.f_start_hz = 290e9;
    g.f_stop_hz = 310e9;
    g.n_points = 401;
    return g;
}

} // namespace

TEST_CASE("antenna gain: boresight, half-power point and sidelobe floor")
{
    TrxConfig trx;
    CHECK(antenna_gain(0.0, trx) == doctest::Approx(std::pow(10.0, 2.6)).epsilon(1e-12));
    const double g0 = antenna_gain(0.0, trx);
    CHECK(antenna_gain(deg2rad(4.0), trx) == doctest::Approx(0.5 * g0).epsilon(1e-12));
    CHECK(antenna_gain(deg2rad(-4.0), trx) == doctest::Approx(0.5 * g0).epsilon(1e-12));
    CHECK(antenna_gain(deg2rad(90.0), trx) == doctest::Approx(1e-3 * g0).epsilon(1e-12));
    // symmetric and wrap-safe
    CHECK(antenna_gain(deg2rad(350.0), trx) == doctest::Approx(antenna_gain(deg2rad(-10.0), trx)));
}

TEST_CASE("corner retro delay follows 2(d - R)/c")
{
    std::vector<WallSegment> walls = {{{3.0, -1.0}, {3.0, 1.5}, "Cement", 0.0},
                                      {{3.0, 1.5}, {1.0, 1.5}, "Cement", 0.0}};
    TrxConfig trx;
    trx.position = {0.0, 0.0};
    auto scene = build_scene(walls, trx);
    REQUIRE(scene.corners.size() == 1);
    const double d = scene.corners[0].direct_distance_d;
    CHECK(d == doctest::Approx(std::hypot(3.0, 1.5)).epsilon(1e-12));

    auto paths = enumerate_paths(scene, MaterialDb::seed_300ghz(), small_grid());
    const GroundTruthPath *corner = nullptr;
    for (const auto &p : paths)
        if (p.kind == PathKind::corner_retro)
            corner = &p;
    REQUIRE(corner != nullptr);
    CHECK(corner->tau_s == doctest::Approx(2.0 * (d - 0.23) / SPEED_OF_LIGHT).epsilon(1e-12));

    // d = 3.0 m, R = 0.23 m -> tau = 2 * 2.77 / c
    TrxConfig trx2;
    trx2.position = {0.0, 0.0};
    auto scene2 = build_scene({{{3.0, -1.0}, {3.0, 0.5}, "Cement", 0.0},
                               {{3.0, 0.5}, {2.0, 0.5}, "Cement", 0.0}},
                              trx2);
    // move the corner apex to exactly 3 m by construction
    auto scene3 = build_scene({{{2.0, 2.2360679774997896}, {0.0, 2.2360679774997896}, "Cement", 0.0},
                               {{2.0, 2.2360679774997896}, {2.0, 1.0}, "Cement", 0.0}},
                              trx2);
    REQUIRE(scene3.corners.size() == 1);
    CHECK(scene3.corners[0].direct_distance_d == doctest::Approx(3.0).epsilon(1e-12));
    auto paths3 = enumerate_paths(scene3, MaterialDb::seed_300ghz(), small_grid());
    for (const auto &p : paths3)
        if (p.kind == PathKind::corner_retro)
            CHECK(p.tau_s == doctest::Approx(2.0 * 2.77 / SPEED_OF_LIGHT).epsilon(1e-12));
    (void)scene2;
}

TEST_CASE("a 2 m wall at 2 cm spacing discretizes into 101 scatter paths")
{
    TrxConfig trx;
    trx.position = {0.0, 0.0};
    auto scene = build_scene({{{-1.0, 3.0}, {1.0, 3.0}, "Cement", 0.0}}, trx);
    auto paths = enumerate_paths(scene, MaterialDb::seed_300ghz(), small_grid());
    int n_wall = 0;
    for (const auto &p : paths)
        if (p.kind == PathKind::wall_scatter)
            ++n_wall;
    CHECK(n_wall == 101);
    CHECK(paths.size() == 101); // no corners in this scene
}

TEST_CASE("broadside wall point carries center-referenced delay and wall-normal azimuth")
{
    TrxConfig trx;
    trx.position = {0.0, 0.0};
    auto scene = build_scene({{{0.0, 3.0}, {0.015, 3.0}, "Cement", 0.0}}, trx);
    auto paths = enumerate_paths(scene, MaterialDb::seed_300ghz(), small_grid());
    REQUIRE(paths.size() == 1); // shorter than the 2 cm spacing -> single point
    CHECK(paths[0].tau_s == doctest::Approx(2.0 * 3.0 / SPEED_OF_LIGHT).epsilon(1e-12));
    CHECK(paths[0].theta_rad == doctest::Approx(PI / 2.0).epsilon(1e-12));

    // link budget at the specular point: falloff 0, Fresnel factor 1
    const double f_c = small_grid().center_hz();
    const double expect_db = 2.0 * trx.antenna_gain_dbi - fspl_db(6.0, f_c) - 11.84;
    CHECK(20.0 * std::log10(std::abs(paths[0].alpha)) == doctest::Approx(expect_db).epsilon(1e-9));
}

TEST_CASE("corner amplitude sits corner_rel_db below the strongest wall return")
{
    TrxConfig trx;
    trx.position = {0.5, 0.0};
    // two short walls meeting at (0,3); the first is near-broadside, the second edge-on
    auto scene = build_scene({{{0.0, 3.0}, {0.015, 3.0}, "Cement", 0.0},
                              {{0.0, 3.0}, {0.0, 2.985}, "Cement", 0.0}},
                             trx);
    REQUIRE(scene.corners.size() == 1);
    auto paths = enumerate_paths(scene, MaterialDb::seed_300ghz(), small_grid());
    const GroundTruthPath *w0 = nullptr, *corner = nullptr;
    double strongest_wall = 0.0;
    for (const auto &p : paths)
    {
        if (p.kind == PathKind::wall_scatter)
        {
            strongest_wall = std::max(strongest_wall, std::abs(p.alpha));
            if (p.source_feature == 0)
                w0 = &p;
        }
        else
            corner = &p;
    }
    REQUIRE(w0 != nullptr);
    REQUIRE(corner != nullptr);
    CHECK(std::abs(corner->alpha) ==
          doctest::Approx(strongest_wall * std::pow(10.0, -6.0 / 20.0)).epsilon(1e-9));
}

TEST_CASE("missing material and empty scene raise")
{
    TrxConfig trx;
    trx.position = {0.0, 0.0};
    auto scene = build_scene({{{-1.0, 3.0}, {1.0, 3.0}, "Unobtainium", 0.0}}, trx);
    CHECK_THROWS_AS(enumerate_paths(scene, MaterialDb::seed_300ghz(), small_grid()),
                    std::invalid_argument);
    Scene empty;
    empty.trx = trx;
    CHECK_THROWS_AS(enumerate_paths(empty, MaterialDb::seed_300ghz(), small_grid()),
                    std::invalid_argument);
}

TEST_CASE("synthesize identity case: unit path at zero delay gives all-ones")
{
    auto trx = isotropic_trx();
    std::vector<GroundTruthPath> paths = {{1.0, 0.0, 0.0, PathKind::wall_scatter, 0}};
    auto r = synthesize_response(paths, small_grid(), trx);
    REQUIRE(r.h.rows() == 401);
    REQUIRE(r.h.cols() == 1);
    for (int k = 0; k < 401; ++k)
    {
        CHECK(r.h(k, 0).real() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(std::abs(r.h(k, 0).imag()) < 1e-9);
    }
}

TEST_CASE("synthesize single path: constant magnitude and -2*pi*tau phase slope")
{
    auto trx = isotropic_trx();
    const double tau = 1e-9;
    std::vector<GroundTruthPath> paths = {{1.0, tau, 0.0, PathKind::wall_scatter, 0}};
    auto grid = small_grid();
    auto r = synthesize_response(paths, grid, trx);
    for (int k = 0; k < grid.n_points; ++k)
        CHECK(std::abs(r.h(k, 0)) == doctest::Approx(1.0).epsilon(1e-9));
    for (int k = 0; k + 1 < grid.n_points; ++k)
    {
        double dphi = std::arg(r.h(k + 1, 0) / r.h(k, 0));
        const double expect = -2.0 * PI * grid.df_hz() * tau;
        // expected slope is ~ -0.314 rad per 50 MHz step here
        CHECK(dphi == doctest::Approx(std::remainder(expect, 2.0 * PI)).epsilon(1e-9));
    }
}

TEST_CASE("synthesis is linear in the path set")
{
    TrxConfig trx;
    trx.position = {0.0, 0.0};
    trx.scan_stop_deg = 30.0;
    std::vector<GroundTruthPath> a = {{{0.5, 0.25}, 9e-9, deg2rad(10.0), PathKind::wall_scatter, 0},
                                      {{-0.2, 0.1}, 14e-9, deg2rad(25.0), PathKind::wall_scatter, 0}};
    std::vector<GroundTruthPath> b = {{{0.1, -0.7}, 11e-9, deg2rad(5.0), PathKind::corner_retro, 0}};
    std::vector<GroundTruthPath> both = a;
    both.insert(both.end(), b.begin(), b.end());

    auto grid = small_grid();
    auto ra = synthesize_response(a, grid, trx);
    auto rb = synthesize_response(b, grid, trx);
    auto rboth = synthesize_response(both, grid, trx);
    const double scale = rboth.h.norm();
    CHECK((rboth.h - ra.h - rb.h).norm() < 1e-9 * scale);
}

TEST_CASE("adding 2*pi to a path angle changes nothing")
{
    TrxConfig trx;
    trx.position = {0.0, 0.0};
    trx.scan_stop_deg = 20.0;
    auto grid = small_grid();
    std::vector<GroundTruthPath> p1 = {{1.0, 10e-9, deg2rad(12.0), PathKind::wall_scatter, 0}};
    std::vector<GroundTruthPath> p2 = {{1.0, 10e-9, deg2rad(12.0) + 2.0 * PI, PathKind::wall_scatter, 0}};
    auto r1 = synthesize_response(p1, grid, trx);
    auto r2 = synthesize_response(p2, grid, trx);
    CHECK((r1.h - r2.h).cwiseAbs().maxCoeff() < 1e-12 * r1.h.cwiseAbs().maxCoeff());
}

TEST_CASE("noise is deterministic per seed and scales with the configured floor")
{
    TrxConfig trx;
    trx.position = {0.0, 0.0};
    trx.scan_stop_deg = 120.0; // 121 columns x 401 bins, well over 1e4 samples
    auto grid = small_grid();
    std::vector<GroundTruthPath> quiet = {{1e-30, 10e-9, 0.0, PathKind::wall_scatter, 0}};

    SimNoiseConfig n1{-120.0, 42};
    auto ra = synthesize_response(quiet, grid, trx, n1);
    auto rb = synthesize_response(quiet, grid, trx, n1);
    CHECK(ra.h == rb.h); // bitwise

    SimNoiseConfig n2{-110.0, 42};
    auto rc = synthesize_response(quiet, grid, trx, n2);
    const double e1 = ra.h.squaredNorm() / (ra.h.rows() * ra.h.cols());
    const double e2 = rc.h.squaredNorm() / (rc.h.rows() * rc.h.cols());
    CHECK(e2 / e1 == doctest::Approx(10.0).epsilon(0.05));

    // configured floor is the expected delay-domain level: E|W|^2 = n * 10^(F/10)
    const double expect = grid.n_points * std::pow(10.0, -120.0 / 10.0);
    CHECK(e1 == doctest::Approx(expect).epsilon(0.05));

    SimNoiseConfig n3{-120.0, 43};
    auto rd = synthesize_response(quiet, grid, trx, n3);
    CHECK(ra.h != rd.h);
}

TEST_CASE("oversized grids are rejected")
{
    auto trx = isotropic_trx();
    trx.scan_stop_deg = 180.0;
    trx.scan_step_deg = 0.001;
    FrequencyGrid g;
    g.n_points = 2001;
    std::vector<GroundTruthPath> p = {{1.0, 1e-9, 0.0, PathKind::wall_scatter, 0}};
    CHECK_THROWS_AS(synthesize_response(p, g, trx), std::invalid_argument);
}

TEST_CASE("response binary round trip preserves payload and metadata")
{
    TrxConfig trx;
    trx.position = {0.0, 0.0};
    trx.scan_stop_deg = 10.0;
    auto grid = small_grid();
    std::vector<GroundTruthPath> p = {{{0.3, 0.4}, 12e-9, deg2rad(5.0), PathKind::wall_scatter, 0}};
    auto r = synthesize_response(p, grid, trx, {-110.0, 9});

    const auto path = (std::filesystem::temp_directory_path() / "thzmap_resp.bin").string();
    save_response(r, path, 9, 0xabcdef);
    auto r2 = load_response(path);
    CHECK(r2.h.rows() == r.h.rows());
    CHECK(r2.h.cols() == r.h.cols());
    CHECK(r2.grid.f_start_hz == r.grid.f_start_hz);
    CHECK(r2.scan_angles_deg == r.scan_angles_deg);
    CHECK((r2.h - r.h).cwiseAbs().maxCoeff() == 0.0); // f64 pass-through
}

TEST_CASE("wall PADP peak matches the specular link budget after normalization")
{
    TrxConfig trx;
    trx.position = {0.0, 0.0};
    trx.scan_start_deg = 70.0;
    trx.scan_stop_deg = 110.0;
    auto scene = build_scene({{{-2.0, 3.0}, {2.0, 3.0}, "Cement", 0.0}}, trx);
    auto grid = small_grid();
    auto paths = enumerate_paths(scene, MaterialDb::seed_300ghz(), grid);
    auto resp = synthesize_response(paths, grid, scene.trx);
    auto padp = compute_padp(to_cir(resp));

    const double f_c = grid.center_hz();
    const double budget_db = 2.0 * trx.antenna_gain_dbi - fspl_db(6.0, f_c) - 11.84 +
                             20.0 * std::log10(antenna_gain(0.0, trx));
    CHECK(std::abs(padp.p_db.maxCoeff() - budget_db) < 0.5); // dB
}
