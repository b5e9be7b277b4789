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

#include "thzmap/materials.hpp"

#include "thzmap/estimator.hpp"
#include "thzmap/fft.hpp"
#include "thzmap/geometry.hpp"
#include "thzmap/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace thzmap
{

MaterialCategory material_category_from_string(const std::string &s)
{
    if (s == "metal")
        return MaterialCategory::metal;
    if (s == "biological")
        return MaterialCategory::biological;
    if (s == "building")
        return MaterialCategory::building;
    if (s == "functional")
        return MaterialCategory::functional;
    throw std::invalid_argument("unknown material category: " + s);
}

std::string to_string(MaterialCategory c)
{
    switch (c)
    {
    case MaterialCategory::metal: return "metal";
    case MaterialCategory::biological: return "biological";
    case MaterialCategory::building: return "building";
    case MaterialCategory::functional: return "functional";
    }
    return "building";
}

bool MaterialRecord::interpolable_at(double f_hz) const
{
    if (rl_db_at.empty())
        return false;
    const double lo = rl_db_at.front().first;
    const double hi = rl_db_at.back().first;
    const double tol = 1e-6 * std::max(lo, 1.0);
    return f_hz >= lo - tol && f_hz <= hi + tol;
}

double MaterialRecord::rl_at(double f_hz) const
{
    if (!interpolable_at(f_hz))
        throw std::invalid_argument("material '" + name + "' has no reflection-loss sample at the query frequency");
    if (rl_db_at.size() == 1)
        return rl_db_at.front().second;
    if (f_hz <= rl_db_at.front().first)
        return rl_db_at.front().second;
    if (f_hz >= rl_db_at.back().first)
        return rl_db_at.back().second;
    for (size_t i = 1; i < rl_db_at.size(); ++i)
        if (f_hz <= rl_db_at[i].first)
        {
            const auto [f0, v0] = rl_db_at[i - 1];
            const auto [f1, v1] = rl_db_at[i];
            const double t = (f_hz - f0) / (f1 - f0);
            return v0 + t * (v1 - v0);
        }
    return rl_db_at.back().second;
}

const MaterialRecord *MaterialDb::find(const std::string &name) const
{
    for (const auto &r : records)
        if (r.name == name)
            return &r;
    return nullptr;
}

void MaterialDb::validate() const
{
    for (size_t i = 0; i < records.size(); ++i)
    {
        const auto &r = records[i];
        for (size_t j = i + 1; j < records.size(); ++j)
            if (records[j].name == r.name)
                throw std::invalid_argument("duplicate material name: " + r.name);
        for (size_t k = 1; k < r.rl_db_at.size(); ++k)
            if (!(r.rl_db_at[k].first > r.rl_db_at[k - 1].first))
                throw std::invalid_argument("non-monotone frequencies for material: " + r.name);
        for (const auto &[f, rl] : r.rl_db_at)
        {
            if (!(f > 0.0) || !std::isfinite(rl))
                throw std::invalid_argument("invalid sample for material: " + r.name);
            if (rl < 0.0)
                throw std::invalid_argument("negative reflection loss for material: " + r.name);
        }
    }
}

MaterialDb MaterialDb::seed_300ghz()
{
    const double f = 300e9;
    MaterialDb db;
    auto add = [&](const char *name, MaterialCategory cat, double rl)
    { db.records.push_back({name, cat, {{f, rl}}}); };
    add("Ti", MaterialCategory::metal, 0.84);
    add("Sn", MaterialCategory::metal, 1.72);
    add("Steel", MaterialCategory::metal, 2.42);
    add("Cement", MaterialCategory::building, 11.84);
    add("Ceramic", MaterialCategory::building, 12.10);
    add("Fiber cement", MaterialCategory::building, 13.09);
    add("Cardboard", MaterialCategory::functional, 16.86);
    add("Wood", MaterialCategory::building, 20.42);
    return db;
}

// ---------------------------------------------------------------------------
// TDS trace processing
// ---------------------------------------------------------------------------

double tds_reflection_loss(const TdsTrace &sample, const TdsTrace &reference, double f_query_hz)
{
    if (sample.e_field.size() < 16 || reference.e_field.size() < 16)
        throw std::invalid_argument("TDS traces need at least 16 samples");
    if (sample.e_field.size() != reference.e_field.size())
        throw std::invalid_argument("TDS traces must have identical length");
    if (!(sample.dt_s > 0.0) || std::abs(sample.dt_s - reference.dt_s) > 1e-15 * sample.dt_s + 1e-30)
        throw std::invalid_argument("TDS traces must share the sample interval");
    const double nyquist = 0.5 / sample.dt_s;
    if (!(f_query_hz > 0.0) || f_query_hz >= nyquist)
        throw std::invalid_argument("query frequency must lie below the Nyquist limit");

    const int n = static_cast<int>(sample.e_field.size());
    std::vector<std::complex<double>> s(n), r(n);
    for (int i = 0; i < n; ++i)
    {
        s[i] = sample.e_field[i];
        r[i] = reference.e_field[i];
    }
    // Magnitude spectra are conjugation-invariant, so the inverse kernel serves.
    const auto S = detail::idft(s.data(), n, n);
    const auto R = detail::idft(r.data(), n, n);

    const double df = 1.0 / (n * sample.dt_s);
    const double pos = f_query_hz / df;
    const int k0 = static_cast<int>(pos);
    const double t = pos - k0;
    auto mag_at = [&](const std::vector<std::complex<double>> &X)
    { return (1.0 - t) * std::abs(X[k0]) + t * std::abs(X[k0 + 1]); };

    const double ms = mag_at(S);
    const double mr = mag_at(R);
    if (ms < 1e-12 * mr)
        throw std::runtime_error("sample spectrum below dynamic range at the query frequency");
    return 20.0 * std::log10(mr / ms);
}

TdsTrace load_tds_trace_csv(const std::string &path, const std::string &label)
{
    std::ifstream f(path);
    if (!f)
        throw std::invalid_argument("cannot open TDS trace: " + path);
    TdsTrace tr;
    tr.label = label.empty() ? path : label;
    std::string line;
    std::vector<double> times;
    int lineno = 0;
    while (std::getline(f, line))
    {
        ++lineno;
        if (line.empty() || line == "t_s,e_field")
            continue;
        std::stringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ','))
            throw std::invalid_argument("TDS trace line " + std::to_string(lineno) + ": expected t_s,e_field");
        times.push_back(std::stod(a));
        tr.e_field.push_back(std::stod(b));
    }
    if (times.size() < 2)
        throw std::invalid_argument("TDS trace too short");
    tr.dt_s = times[1] - times[0];
    for (size_t i = 1; i < times.size(); ++i)
        if (std::abs(times[i] - times[i - 1] - tr.dt_s) > 1e-6 * tr.dt_s)
            throw std::invalid_argument("TDS trace is not uniformly sampled");
    return tr;
}

// ---------------------------------------------------------------------------
// Database CSV: name,category,frequency_hz,rl_db
// ---------------------------------------------------------------------------

MaterialDb db_load(const std::string &path)
{
    std::ifstream f(path);
    if (!f)
        throw std::invalid_argument("cannot open material database: " + path);
    MaterialDb db;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line))
    {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (line == "name,category,frequency_hz,rl_db")
            continue;
        std::stringstream ss(line);
        std::string name, cat, fs, rs;
        if (!std::getline(ss, name, ',') || !std::getline(ss, cat, ',') ||
            !std::getline(ss, fs, ',') || !std::getline(ss, rs, ','))
            throw std::invalid_argument("db line " + std::to_string(lineno) +
                                        ": expected name,category,frequency_hz,rl_db");
        double fv = 0.0, rv = 0.0;
        try
        {
            fv = std::stod(fs);
            rv = std::stod(rs);
        }
        catch (const std::exception &)
        {
            throw std::invalid_argument("db line " + std::to_string(lineno) + ": numeric parse failure");
        }

        MaterialRecord *rec = nullptr;
        for (auto &r : db.records)
            if (r.name == name)
                rec = &r;
        if (!rec)
        {
            db.records.push_back({name, material_category_from_string(cat), {}});
            rec = &db.records.back();
        }
        else if (rec->category != material_category_from_string(cat))
            throw std::invalid_argument("db line " + std::to_string(lineno) +
                                        ": category conflict for material " + name);
        if (!rec->rl_db_at.empty() && !(fv > rec->rl_db_at.back().first))
            throw std::invalid_argument("db line " + std::to_string(lineno) +
                                        ": non-monotone frequency for material " + name);
        rec->rl_db_at.push_back({fv, rv});
    }
    db.validate();
    return db;
}

void db_save(const MaterialDb &db, const std::string &path)
{
    db.validate();
    std::ofstream f(path);
    if (!f)
        throw std::invalid_argument("cannot write material database: " + path);
    f << "name,category,frequency_hz,rl_db\n";
    char buf[128];
    for (const auto &r : db.records)
        for (const auto &[fv, rv] : r.rl_db_at)
        {
            std::snprintf(buf, sizeof(buf), "%s,%s,%.10g,%.10g\n", r.name.c_str(),
                          to_string(r.category).c_str(), fv, rv);
            f << buf;
        }
}

// ---------------------------------------------------------------------------
// Link-budget inversion and identification
// ---------------------------------------------------------------------------

double fspl_db(double distance_m, double f_hz)
{
    if (!(distance_m > 0.0) || !(f_hz > 0.0))
        throw std::invalid_argument("FSPL requires positive distance and frequency");
    return 20.0 * std::log10(4.0 * PI * distance_m * f_hz / SPEED_OF_LIGHT);
}

double extract_reflection_loss(const MpcEstimate &est, const TrxConfig &trx, double f_c_hz)
{
    if (!(est.tau_s > 0.0))
        throw std::invalid_argument("extract_reflection_loss requires tau > 0");
    const double a = std::abs(est.alpha);
    if (a <= 0.0)
        throw std::invalid_argument("extract_reflection_loss requires alpha != 0");
    const double path_len = SPEED_OF_LIGHT * est.tau_s;
    return 2.0 * trx.antenna_gain_dbi - fspl_db(path_len, f_c_hz) - 20.0 * std::log10(a);
}

MatchResult identify_material(double rl_db, const MaterialDb &db, double f_query_hz)
{
    if (db.records.empty())
        throw std::invalid_argument("material database is empty");
    MatchResult res;
    for (const auto &r : db.records)
        res.ranked.push_back({r.name, std::abs(rl_db - r.rl_at(f_query_hz))});
    std::sort(res.ranked.begin(), res.ranked.end(),
              [](const auto &a, const auto &b)
              {
                  if (a.second != b.second)
                      return a.second < b.second;
                  return a.first < b.first;
              });
    res.confidence_margin_db = res.ranked.size() > 1
                                   ? res.ranked[1].second - res.ranked[0].second
                                   : std::numeric_limits<double>::infinity();
    return res;
}

} // namespace thzmap
