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

#include "thzmap/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace
{

struct CommonFlags
{
    std::string config;
    std::string scene;
    std::string output;
    std::string method;
    std::string input;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

thzmap::PipelineConfig resolve_config(const CommonFlags &fl)
{
    thzmap::PipelineConfig cfg;
    if (!fl.config.empty())
        cfg = thzmap::PipelineConfig::from_json_file(fl.config);
    if (!fl.scene.empty())
        cfg.scene_path = fl.scene;
    if (!fl.output.empty())
        cfg.output_dir = fl.output;
    if (!fl.method.empty())
    {
        if (fl.method == "all")
            cfg.methods = {thzmap::Method::max_search, thzmap::Method::sage,
                           thzmap::Method::sage_plus_removal};
        else
            cfg.methods = {thzmap::method_from_string(fl.method)};
    }
    if (!fl.input.empty())
        cfg.response_path = fl.input;
    if (fl.seed_set)
        cfg.seed = fl.seed;
    if (cfg.scene_path.empty())
        throw std::invalid_argument("no scene file given (--scene or config scene_path)");
    return cfg;
}

void add_common(CLI::App *cmd, CommonFlags &fl)
{
    cmd->add_option("--config", fl.config, "pipeline config JSON");
    cmd->add_option("--scene", fl.scene, "scene description JSON (overrides config)");
    cmd->add_option("--output", fl.output, "output directory (overrides config)");
    cmd->add_option("--seed", fl.seed, "noise/provenance seed (overrides config)")
        ->each([&fl](const std::string &) { fl.seed_set = true; });
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"thzmap: monostatic THz sensing toolkit"};
    app.require_subcommand(1);

    CommonFlags fl;

    auto *sim = app.add_subcommand("simulate", "synthesize a channel response from a scene file");
    add_common(sim, fl);

    auto *est = app.add_subcommand("estimate", "extract multipath components (SAGE)");
    add_common(est, fl);
    est->add_option("--input", fl.input, "pre-recorded response binary");

    auto *map = app.add_subcommand("map", "reconstruct geometry and score against the scene");
    add_common(map, fl);
    map->add_option("--input", fl.input, "pre-recorded response binary");
    map->add_option("--method", fl.method, "max_search | sage | sage_plus_removal | all");

    auto *pipe = app.add_subcommand("pipeline", "simulate, estimate, map, score and identify");
    add_common(pipe, fl);
    pipe->add_option("--input", fl.input, "pre-recorded response binary");
    pipe->add_option("--method", fl.method, "max_search | sage | sage_plus_removal | all");

    auto *ident = app.add_subcommand("identify", "match a reflection loss against the database");
    double rl_db = 0.0;
    double f_hz = 300e9;
    std::string db_path;
    ident->add_option("--rl", rl_db, "measured reflection loss [dB]")->required();
    ident->add_option("--f", f_hz, "query frequency [Hz]");
    ident->add_option("--db", db_path, "database CSV (default: built-in seed)");

    auto *dbc = app.add_subcommand("db", "material database utilities");
    auto *db_import = dbc->add_subcommand("import", "validate and canonicalize a database CSV");
    std::string import_in, import_out;
    db_import->add_option("--csv", import_in, "input CSV")->required();
    db_import->add_option("--out", import_out, "output CSV")->required();
    auto *db_query = dbc->add_subcommand("query", "rank database records against a reflection loss");
    double q_rl = 0.0, q_f = 300e9;
    std::string q_db;
    db_query->add_option("--rl", q_rl, "reflection loss [dB]")->required();
    db_query->add_option("--f", q_f, "query frequency [Hz]");
    db_query->add_option("--db", q_db, "database CSV (default: built-in seed)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try
    {
        if (sim->parsed())
            thzmap::cmd_simulate(resolve_config(fl));
        else if (est->parsed())
            thzmap::cmd_estimate(resolve_config(fl));
        else if (map->parsed() || pipe->parsed())
        {
            const thzmap::RunReport report = thzmap::cmd_pipeline(resolve_config(fl));
            std::cout << report.to_json() << "\n";
        }
        else if (ident->parsed())
            std::cout << thzmap::cmd_db_query(rl_db, f_hz, db_path) << "\n";
        else if (dbc->parsed())
        {
            if (db_import->parsed())
                thzmap::cmd_db_import(import_in, import_out);
            else if (db_query->parsed())
                std::cout << thzmap::cmd_db_query(q_rl, q_f, q_db) << "\n";
            else
            {
                std::cerr << "db requires a subcommand (import | query)\n";
                return 2;
            }
        }
    }
    catch (const std::invalid_argument &e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
