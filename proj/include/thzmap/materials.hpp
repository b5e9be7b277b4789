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

#ifndef THZMAP_MATERIALS_HPP
#define THZMAP_MATERIALS_HPP

#include <string>
#include <utility>
#include <vector>

namespace thzmap
{

struct TrxConfig;
struct MpcEstimate;

/// Time-domain spectroscopy trace: sampled E-field pulse.
struct TdsTrace
{
    std::vector<double> e_field;
    double dt_s = 0.0;
    std::string label;
};

enum class MaterialCategory
{
    metal,
    biological,
    building,
    functional
};

MaterialCategory material_category_from_string(const std::string &s);
std::string to_string(MaterialCategory c);

/// Reflection loss of one material, sampled over frequency.
struct MaterialRecord
{
    std::string name;
    MaterialCategory category = MaterialCategory::building;
    std::vector<std::pair<double, double>> rl_db_at; ///< (frequency Hz, loss dB), strictly increasing f

    bool interpolable_at(double f_hz) const;
    double rl_at(double f_hz) const; ///< linear interpolation; throws outside the sampled range
};

struct MaterialDb
{
    std::vector<MaterialRecord> records;

    const MaterialRecord *find(const std::string &name) const;
    void validate() const;

    /// The eight curated records at 300 GHz that ship with the toolkit.
    static MaterialDb seed_300ghz();
};

/// Ranked identification outcome; ranked ascending by |delta RL|.
struct MatchResult
{
    std::vector<std::pair<std::string, double>> ranked; ///< (name, |delta| dB)
    double confidence_margin_db = 0.0;                  ///< second-best minus best distance
};

/// Mirror-referenced reflection loss from a pair of TDS pulse traces:
/// RL(f) = 20*log10(|E_ref(f)| / |E_sample(f)|), interpolated to f_query.
double tds_reflection_loss(const TdsTrace &sample, const TdsTrace &reference, double f_query_hz);

TdsTrace load_tds_trace_csv(const std::string &path, const std::string &label = "");

MaterialDb db_load(const std::string &path);
void db_save(const MaterialDb &db, const std::string &path);

/// Free-space path loss 20*log10(4*pi*d*f/c) [dB].
double fspl_db(double distance_m, double f_hz);

/// Inverts the simulator link budget for a broadside echo:
/// RL = G_t + G_r - FSPL(c*tau, f_c) - 20*log10|alpha|.
double extract_reflection_loss(const MpcEstimate &est, const TrxConfig &trx, double f_c_hz);

/// Ranks database records by |rl_db - RL_record(f_query)|; ties break alphabetically.
MatchResult identify_material(double rl_db, const MaterialDb &db, double f_query_hz);

} // namespace thzmap

#endif
