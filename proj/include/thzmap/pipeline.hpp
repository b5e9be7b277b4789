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

#ifndef THZMAP_PIPELINE_HPP
#define THZMAP_PIPELINE_HPP

#include "thzmap/channel.hpp"
#include "thzmap/mapper.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace thzmap
{

enum class Method
{
    max_search,
    sage,
    sage_plus_removal
};

Method method_from_string(const std::string &s);
std::string to_string(Method m);

struct PipelineConfig
{
    std::string scene_path;
    std::string output_dir = ".";
    std::vector<Method> methods = {Method::sage_plus_removal};
    SageConfig sage;
    SimNoiseConfig noise;
    SimOptions sim;
    std::string db_path;               ///< empty = built-in seed database
    std::string response_path;         ///< optional pre-recorded input for estimate/map
    std::string reference_path;        ///< optional calibration reference response
    std::uint64_t seed = 0;
    double map_cutoff_margin_db = 6.0; ///< mapping power cutoff above the noise floor
    CirWindow window = CirWindow::rectangular;

    static PipelineConfig from_json_file(const std::string &path);
    std::string to_canonical_json() const;
    std::uint64_t hash() const;
};

struct MethodArtifacts
{
    RangingReport ranging;
    std::string map_csv;
    std::string map_svg;
    std::string mpcs_csv;
    int n_estimates = 0;
};

struct Identification
{
    int wall_index = -1;
    std::string wall_material;
    double query_rl_db = 0.0;
    MatchResult match;
};

struct RunReport
{
    std::map<std::string, MethodArtifacts> methods;
    std::vector<Identification> identifications;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::uint64_t scene_hash = 0;
    std::string version;

    std::string to_json() const;
};

/// simulate: scene file -> response binary + sidecar. Returns the file path.
std::string cmd_simulate(const PipelineConfig &cfg);

/// estimate: response (from file or fresh simulation) -> MPC CSV + PADP CSV.
std::string cmd_estimate(const PipelineConfig &cfg);

/// full pipeline: simulate/load -> estimate per method -> map -> score -> identify.
RunReport cmd_pipeline(const PipelineConfig &cfg);

/// db import: validate a CSV against the schema and re-save canonically.
void cmd_db_import(const std::string &csv_in, const std::string &csv_out);

/// db/identify query: ranked matches as a JSON string.
std::string cmd_db_query(double rl_db, double f_hz, const std::string &db_path = "");

std::string version_string();

} // namespace thzmap

#endif
