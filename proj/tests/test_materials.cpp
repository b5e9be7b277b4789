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

#include "thzmap/estimator.hpp"
#include "thzmap/fft.hpp"
#include "thzmap/materials.hpp"
#include "thzmap/scene.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <random>

using namespace thzmap;

namespace
{

std::string tmp_file(const char *name)
{
    return (std::filesystem::temp_directory_path() / name).string();
}

TdsTrace gaussian_pulse(int n, double dt, double t0, double width, double amp)
{
    TdsTrace tr;
    tr.dt_s = dt;
    tr.e_field.resize(n);
    for (int i = 0; i < n; ++i)
    {
        const double t = i * dt - t0;
        tr.e_field[i] = amp * std::exp(-t * t / (2.0 * width * width));
    }
    return tr;
}

// Forward-constructs a sample trace whose spectrum is the reference spectrum
// multiplied by a known attenuation profile (circular convolution).
TdsTrace apply_attenuation(const TdsTrace &ref, double rl_at_dc_db, double slope_db_per_thz)
{
    const int n = static_cast<int>(ref.e_field.size());
    std::vector<std::complex<double>> x(n);
    for (int i = 0; i < n; ++i)
        x[i] = ref.e_field[i];
    auto spec = detail::idft(x.data(), n, n); // unnormalized inverse kernel

    const double df = 1.0 / (n * ref.dt_s);
    for (int k = 0; k < n; ++k)
    {
        const double f = (k <= n / 2 ? k : k - n) * df; // signed frequency, keeps conjugate symmetry
        const double rl_db = rl_at_dc_db + slope_db_per_thz * std::abs(f) / 1e12;
        spec[k] *= std::pow(10.0, -rl_db / 20.0);
    }
    // invert: forward transform of the inverse kernel undoes it up to 1/n and index reversal
    auto back = detail::idft(spec.data(), n, n);
    TdsTrace out;
    out.dt_s = ref.dt_s;
    out.e_field.resize(n);
    out.e_field[0] = back[0].real() / n;
    for (int i = 1; i < n; ++i)
        out.e_field[i] = back[n - i].real() / n;
    return out;
}

} // namespace

TEST_CASE("tds_reflection_loss identities")
{
    auto ref = gaussian_pulse(512, 0.05e-12, 10e-12, 0.8e-12, 1.0);
    CHECK(tds_reflection_loss(ref, ref, 300e9) == doctest::Approx(0.0).epsilon(1e-12));

    auto half = ref;
    for (auto &v : half.e_field)
        v *= 0.5;
    CHECK(tds_reflection_loss(half, ref, 300e9) == doctest::Approx(6.0206).epsilon(1e-4));
    CHECK(tds_reflection_loss(half, ref, 1e12) == doctest::Approx(6.0206).epsilon(1e-4));
}

TEST_CASE("tds_reflection_loss recovers a constructed attenuation spectrum")
{
    auto ref = gaussian_pulse(1024, 0.05e-12, 15e-12, 0.6e-12, 1.0);
    const double rl0 = 4.0, slope = 8.0; // dB at DC, dB per THz
    auto sample = apply_attenuation(ref, rl0, slope);
    for (double f : {0.2e12, 0.3e12, 0.5e12, 1.0e12})
    {
        const double expected = rl0 + slope * f / 1e12;
        CHECK(tds_reflection_loss(sample, ref, f) == doctest::Approx(expected).epsilon(2e-3));
    }
}

TEST_CASE("tds_reflection_loss is scale invariant and validates inputs")
{
    auto ref = gaussian_pulse(256, 0.1e-12, 5e-12, 0.7e-12, 1.0);
    auto sample = gaussian_pulse(256, 0.1e-12, 5e-12, 0.9e-12, 0.4);
    const double base = tds_reflection_loss(sample, ref, 300e9);
    auto ref2 = ref;
    auto sample2 = sample;
    for (auto &v : ref2.e_field)
        v *= 7.25;
    for (auto &v : sample2.e_field)
        v *= 7.25;
    CHECK(tds_reflection_loss(sample2, ref2, 300e9) == doctest::Approx(base).epsilon(1e-12));

    auto short_ref = gaussian_pulse(128, 0.1e-12, 5e-12, 0.7e-12, 1.0);
    CHECK_THROWS_AS(tds_reflection_loss(sample, short_ref, 300e9), std::invalid_argument);
    CHECK_THROWS_AS(tds_reflection_loss(sample, ref, 6e12), std::invalid_argument); // above Nyquist
}

TEST_CASE("seed database carries the curated records")
{
    auto db = MaterialDb::seed_300ghz();
    REQUIRE(db.records.size() == 8);
    const auto *ti = db.find("Ti");
    REQUIRE(ti != nullptr);
    CHECK(ti->rl_at(300e9) == doctest::Approx(0.84).epsilon(1e-12));
    CHECK(db.find("Cement")->rl_at(300e9) == doctest::Approx(11.84).epsilon(1e-12));
    CHECK(db.find("Steel")->rl_at(300e9) == doctest::Approx(2.42).epsilon(1e-12));
}

TEST_CASE("db save/load round trip on the seed database")
{
    const std::string path = tmp_file("thzmap_seed_db.csv");
    auto db = MaterialDb::seed_300ghz();
    db_save(db, path);
    auto loaded = db_load(path);
    REQUIRE(loaded.records.size() == db.records.size());
    for (size_t i = 0; i < db.records.size(); ++i)
    {
        CHECK(loaded.records[i].name == db.records[i].name);
        CHECK(loaded.records[i].category == db.records[i].category);
        REQUIRE(loaded.records[i].rl_db_at.size() == db.records[i].rl_db_at.size());
        for (size_t k = 0; k < db.records[i].rl_db_at.size(); ++k)
        {
            CHECK(loaded.records[i].rl_db_at[k].first ==
                  doctest::Approx(db.records[i].rl_db_at[k].first));
            CHECK(loaded.records[i].rl_db_at[k].second ==
                  doctest::Approx(db.records[i].rl_db_at[k].second));
        }
    }
}

TEST_CASE("db round trip identity on a randomized 200-record database")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    MaterialDb db;
    for (int i = 0; i < 200; ++i)
    {
        MaterialRecord r;
        char name[32];
        std::snprintf(name, sizeof(name), "mat_%03d", i);
        r.name = name;
        r.category = static_cast<MaterialCategory>(i % 4);
        const int n_f = 1 + static_cast<int>(uni(rng) * 5);
        double f = 100e9 * (1.0 + uni(rng));
        for (int k = 0; k < n_f; ++k)
        {
            r.rl_db_at.push_back({f, uni(rng) * 40.0});
            f += 10e9 * (1.0 + uni(rng));
        }
        db.records.push_back(r);
    }
    const std::string path = tmp_file("thzmap_rand_db.csv");
    db_save(db, path);
    auto loaded = db_load(path);
    REQUIRE(loaded.records.size() == db.records.size());
    for (size_t i = 0; i < db.records.size(); ++i)
    {
        CHECK(loaded.records[i].name == db.records[i].name);
        for (size_t k = 0; k < db.records[i].rl_db_at.size(); ++k)
        {
            CHECK(loaded.records[i].rl_db_at[k].first ==
                  doctest::Approx(db.records[i].rl_db_at[k].first).epsilon(1e-9));
            CHECK(loaded.records[i].rl_db_at[k].second ==
                  doctest::Approx(db.records[i].rl_db_at[k].second).epsilon(1e-9));
        }
    }
}

TEST_CASE("db_load rejects duplicates, bad categories and non-monotone frequencies")
{
    const std::string path = tmp_file("thzmap_bad_db.csv");
    {
        std::ofstream f(path);
        f << "name,category,frequency_hz,rl_db\nA,metal,3e11,1.0\nB,metal,3e11,2.0\nA,metal,2e11,1.5\n";
    }
    CHECK_THROWS_AS(db_load(path), std::invalid_argument);
    {
        std::ofstream f(path);
        f << "name,category,frequency_hz,rl_db\nA,urban,3e11,1.0\n";
    }
    CHECK_THROWS_AS(db_load(path), std::invalid_argument);
    {
        std::ofstream f(path);
        f << "name,category,frequency_hz,rl_db\nA,metal,not_a_number,1.0\n";
    }
    CHECK_THROWS_AS(db_load(path), std::invalid_argument);
}

TEST_CASE("empty database file loads as an empty, valid db")
{
    const std::string path = tmp_file("thzmap_empty_db.csv");
    {
        std::ofstream f(path);
    }
    auto db = db_load(path);
    CHECK(db.records.empty());
    {
        std::ofstream f(path);
        f << "name,category,frequency_hz,rl_db\n";
    }
    CHECK(db_load(path).records.empty());
}

TEST_CASE("FSPL value at 6 m / 300 GHz")
{
    CHECK(fspl_db(6.0, 300e9) == doctest::Approx(97.55).epsilon(1e-4));
}

TEST_CASE("extract_reflection_loss inverts the link budget exactly")
{
    TrxConfig trx;
    const double f_c = 300e9;

    MpcEstimate e;
    e.tau_s = 6.0 / SPEED_OF_LIGHT; // 6 m round-trip path
    const double rl = 10.38;
    const double amp_db = 2.0 * trx.antenna_gain_dbi - fspl_db(6.0, f_c) - rl;
    e.alpha = std::pow(10.0, amp_db / 20.0);
    e.power_db = amp_db;
    CHECK(extract_reflection_loss(e, trx, f_c) == doctest::Approx(10.38).epsilon(1e-10));

    // perfect mirror round trip
    const double amp0 = 2.0 * trx.antenna_gain_dbi - fspl_db(6.0, f_c);
    e.alpha = std::pow(10.0, amp0 / 20.0);
    CHECK(extract_reflection_loss(e, trx, f_c) == doctest::Approx(0.0).epsilon(1e-10));

    e.alpha = 0.0;
    CHECK_THROWS_AS(extract_reflection_loss(e, trx, f_c), std::invalid_argument);
    e.alpha = 1.0;
    e.tau_s = 0.0;
    CHECK_THROWS_AS(extract_reflection_loss(e, trx, f_c), std::invalid_argument);
}

TEST_CASE("link-budget inversion identity over RL in [0,40] dB and tau in (0,100ns]")
{
    TrxConfig trx;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int i = 0; i < 500; ++i)
    {
        const double rl = 40.0 * uni(rng);
        const double tau = 1e-9 + 99e-9 * uni(rng);
        const double f_c = 250e9 + 100e9 * uni(rng);
        MpcEstimate e;
        e.tau_s = tau;
        const double amp_db =
            2.0 * trx.antenna_gain_dbi - fspl_db(SPEED_OF_LIGHT * tau, f_c) - rl;
        e.alpha = std::polar(std::pow(10.0, amp_db / 20.0), 2.0 * PI * uni(rng));
        CHECK(std::abs(extract_reflection_loss(e, trx, f_c) - rl) < 1e-9);
    }
}

TEST_CASE("identify_material fixtures from the seed database")
{
    auto db = MaterialDb::seed_300ghz();

    auto m1 = identify_material(10.38, db, 300e9);
    REQUIRE(!m1.ranked.empty());
    CHECK(m1.ranked[0].first == "Cement");
    CHECK(m1.ranked[0].second == doctest::Approx(1.46).epsilon(1e-9));
    CHECK(m1.ranked[1].first == "Ceramic");
    CHECK(m1.confidence_margin_db == doctest::Approx(1.72 - 1.46).epsilon(1e-9));

    auto m2 = identify_material(3.81, db, 300e9);
    CHECK(m2.ranked[0].first == "Steel");
    CHECK(m2.ranked[0].second == doctest::Approx(1.39).epsilon(1e-9));

    auto m3 = identify_material(2.42, db, 300e9);
    CHECK(m3.ranked[0].first == "Steel");
    CHECK(m3.ranked[0].second == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("identify_material is argmin-stable under far-away additions")
{
    auto db = MaterialDb::seed_300ghz();
    auto base = identify_material(10.0, db, 300e9);
    MaterialRecord far;
    far.name = "ZZZ far away";
    far.category = MaterialCategory::functional;
    far.rl_db_at = {{300e9, 90.0}};
    db.records.push_back(far);
    auto with_far = identify_material(10.0, db, 300e9);
    CHECK(with_far.ranked[0].first == base.ranked[0].first);
    CHECK(with_far.ranked[0].second == doctest::Approx(base.ranked[0].second).epsilon(1e-12));
}

TEST_CASE("identify_material breaks exact ties alphabetically")
{
    MaterialDb db;
    db.records.push_back({"Beta", MaterialCategory::metal, {{300e9, 12.0}}});
    db.records.push_back({"Alpha", MaterialCategory::metal, {{300e9, 8.0}}});
    auto m = identify_material(10.0, db, 300e9);
    CHECK(m.ranked[0].first == "Alpha");
    CHECK(m.ranked[1].first == "Beta");
    CHECK(m.confidence_margin_db == doctest::Approx(0.0));
}
