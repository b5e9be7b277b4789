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

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

namespace thzmap
{

using nlohmann::json;
namespace fs = std::filesystem;

std::string version_string() { return "thzmap 0.1.0"; }

Method method_from_string(const std::string &s)
{
    if (s == "max_search")
        return Method::max_search;
    if (s == "sage")
        return Method::sage;
    if (s == "sage_plus_removal")
        return Method::sage_plus_removal;
    throw std::invalid_argument("unknown method: " + s);
}

std::string to_string(Method m)
{
    switch (m)
    {
    case Method::max_search: return "max_search";
    case Method::sage: return "sage";
    case Method::sage_plus_removal: return "sage_plus_removal";
    }
    return "sage_plus_removal";
}

PipelineConfig PipelineConfig::from_json_file(const std::string &path)
{
    std::ifstream f(path);
    if (!f)
        throw std::invalid_argument("cannot open config file: " + path);
    json j;
    try
    {
        j = json::parse(f);
    }
    catch (const json::exception &e)
    {
        throw std::invalid_argument(std::string("config JSON parse error: ") + e.what());
    }

    PipelineConfig cfg;
    cfg.scene_path = j.value("scene_path", std::string());
    cfg.output_dir = j.value("output_dir", std::string("."));
    cfg.db_path = j.value("db_path", std::string());
    cfg.response_path = j.value("response_path", std::string());
    cfg.reference_path = j.value("reference_path", std::string());
    cfg.seed = j.value("seed", 0ull);
    cfg.map_cutoff_margin_db = j.value("map_cutoff_margin_db", 6.0);
    if (j.contains("window"))
        cfg.window = j.at("window").get<std::string>() == "hann" ? CirWindow::hann
                                                                 : CirWindow::rectangular;

    if (j.contains("method"))
    {
        const std::string m = j.at("method").get<std::string>();
        if (m == "all")
            cfg.methods = {Method::max_search, Method::sage, Method::sage_plus_removal};
        else
            cfg.methods = {method_from_string(m)};
    }
    if (j.contains("noise"))
    {
        const auto &jn = j.at("noise");
        cfg.noise.noise_floor_db = jn.value("noise_floor_db", -1000.0);
        cfg.noise.seed = jn.value("seed", 0ull);
    }
    if (j.contains("sim"))
    {
        const auto &js = j.at("sim");
        cfg.sim.scatter_spacing_m = js.value("scatter_spacing_m", 0.02);
        cfg.sim.lambert_exponent = js.value("lambert_exponent", 40.0);
        cfg.sim.corner_rel_db = js.value("corner_rel_db", -6.0);
    }
    if (j.contains("sage"))
    {
        const auto &js = j.at("sage");
        cfg.sage.max_paths = js.value("max_paths", 200);
        cfg.sage.max_em_iterations = js.value("max_em_iterations", 30);
        cfg.sage.tau_grid_oversampling = js.value("tau_grid_oversampling", 8);
        cfg.sage.theta_grid_step_deg = js.value("theta_grid_step_deg", 0.25);
        cfg.sage.convergence_eps = js.value("convergence_eps", 1e-4);
        cfg.sage.stop_margin_db = js.value("stop_margin_db", 6.0);
        cfg.sage.residual_energy_stop = js.value("residual_energy_stop", 1e-10);
    }
    return cfg;
}

std::string PipelineConfig::to_canonical_json() const
{
    json j;
    j["scene_path"] = scene_path;
    j["output_dir"] = output_dir;
    json jm = json::array();
    for (auto m : methods)
        jm.push_back(to_string(m));
    j["methods"] = jm;
    j["db_path"] = db_path;
    j["response_path"] = response_path;
    j["reference_path"] = reference_path;
    j["seed"] = seed;
    j["map_cutoff_margin_db"] = map_cutoff_margin_db;
    j["window"] = window == CirWindow::hann ? "hann" : "rectangular";
    j["noise"] = {{"noise_floor_db", noise.noise_floor_db}};
    j["sim"] = {{"scatter_spacing_m", sim.scatter_spacing_m},
                {"lambert_exponent", sim.lambert_exponent},
                {"corner_rel_db", sim.corner_rel_db}};
    j["sage"] = {{"max_paths", sage.max_paths},
                 {"max_em_iterations", sage.max_em_iterations},
                 {"tau_grid_oversampling", sage.tau_grid_oversampling},
                 {"theta_grid_step_deg", sage.theta_grid_step_deg},
                 {"convergence_eps", sage.convergence_eps},
                 {"stop_margin_db", sage.stop_margin_db},
                 {"residual_energy_stop", sage.residual_energy_stop}};
    return j.dump();
}

std::uint64_t PipelineConfig::hash() const
{
    const std::string s = to_canonical_json();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s)
    {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace
{

MaterialDb load_db(const PipelineConfig &cfg)
{
    return cfg.db_path.empty() ? MaterialDb::seed_300ghz() : db_load(cfg.db_path);
}

std::string hex64(std::uint64_t v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

ChannelResponse obtain_response(const PipelineConfig &cfg, const SceneSpec &spec,
                                const MaterialDb &db,
                                std::vector<GroundTruthPath> *paths_out = nullptr)
{
    if (!cfg.response_path.empty())
        return load_response(cfg.response_path);
    auto paths = enumerate_paths(spec.scene, db, spec.grid, cfg.sim);
    SimNoiseConfig noise = cfg.noise;
    noise.seed = cfg.seed;
    auto resp = synthesize_response(paths, spec.grid, spec.scene.trx, noise);
    if (paths_out)
        *paths_out = std::move(paths);
    return resp;
}

json match_to_json(double rl, double f_hz, const MatchResult &m)
{
    json jr = json::array();
    for (const auto &[name, delta] : m.ranked)
        jr.push_back({{"name", name}, {"delta_db", delta}});
    json j;
    j["query_rl_db"] = rl;
    j["f_hz"] = f_hz;
    j["ranked"] = jr;
    if (std::isfinite(m.confidence_margin_db))
        j["confidence_margin_db"] = m.confidence_margin_db;
    else
        j["confidence_margin_db"] = nullptr;
    return j;
}

} // namespace

std::string cmd_simulate(const PipelineConfig &cfg)
{
    SceneSpec spec = load_scene_json(cfg.scene_path);
    MaterialDb db = load_db(cfg);
    auto paths = enumerate_paths(spec.scene, db, spec.grid, cfg.sim);
    SimNoiseConfig noise = cfg.noise;
    noise.seed = cfg.seed;
    ChannelResponse resp = synthesize_response(paths, spec.grid, spec.scene.trx, noise);

    fs::create_directories(cfg.output_dir);
    const std::string out = (fs::path(cfg.output_dir) / "response.bin").string();
    save_response(resp, out, cfg.seed, scene_hash(spec));

    int n_wall = 0, n_corner = 0;
    for (const auto &p : paths)
        (p.kind == PathKind::wall_scatter ? n_wall : n_corner)++;
    std::cout << "simulated " << resp.h.rows() << " x " << resp.h.cols() << " response, "
              << n_wall << " wall_scatter + " << n_corner << " corner_retro paths -> " << out
              << "\n";
    return out;
}

std::string cmd_estimate(const PipelineConfig &cfg)
{
    SceneSpec spec = load_scene_json(cfg.scene_path);
    MaterialDb db = load_db(cfg);
    ChannelResponse resp = obtain_response(cfg, spec, db);
    if (!cfg.reference_path.empty())
        resp = calibrate(resp, load_response(cfg.reference_path));

    fs::create_directories(cfg.output_dir);
    const Padp padp = compute_padp(to_cir(resp, cfg.window, 1));
    write_padp_csv(padp, (fs::path(cfg.output_dir) / "padp.csv").string());

    auto ests = sage_estimate(resp, spec.scene.trx, cfg.sage);
    const std::string out = (fs::path(cfg.output_dir) / "mpcs.csv").string();
    write_mpcs_csv(ests, out);
    std::cout << "estimated " << ests.size() << " paths -> " << out << "\n";
    return out;
}

RunReport cmd_pipeline(const PipelineConfig &cfg)
{
    SceneSpec spec = load_scene_json(cfg.scene_path);
    const Scene &scene = spec.scene;
    MaterialDb db = load_db(cfg);
    ChannelResponse resp = obtain_response(cfg, spec, db);
    if (!cfg.reference_path.empty())
        resp = calibrate(resp, load_response(cfg.reference_path));

    fs::create_directories(cfg.output_dir);
    const fs::path out_dir(cfg.output_dir);

    const Padp padp = compute_padp(to_cir(resp, cfg.window, 1));
    write_padp_csv(padp, (out_dir / "padp.csv").string());
    const double floor_db = estimate_noise_floor(padp);
    const double g0_db = 20.0 * std::log10(antenna_gain(0.0, scene.trx));

    RunReport report;
    report.config_hash = cfg.hash();
    report.seed = cfg.seed;
    report.scene_hash = scene_hash(spec);
    report.version = version_string();

    std::vector<MpcEstimate> sage_cache;
    bool sage_cached = false;
    auto get_sage = [&]() -> const std::vector<MpcEstimate> &
    {
        if (!sage_cached)
        {
            sage_cache = sage_estimate(resp, scene.trx, cfg.sage);
            sage_cached = true;
        }
        return sage_cache;
    };

    MapCloud identify_cloud;
    bool have_identify_cloud = false;

    for (Method method : cfg.methods)
    {
        const std::string name = to_string(method);
        std::vector<MpcEstimate> ests;
        MapCloud cloud;
        if (method == Method::max_search)
        {
            ests = max_search_baseline(padp, scene.trx);
            // each baseline estimate is the max of n_delay bins, so pure-noise
            // columns sit ~10*log10(ln n) above the floor; lift the cutoff
            const double cutoff = floor_db + cfg.map_cutoff_margin_db +
                                  10.0 * std::log10(std::log(std::max<double>(padp.p_db.rows(), 3.0)));
            cloud = mpcs_to_points(ests, scene.trx, cutoff);
        }
        else
        {
            ests = get_sage();
            const double cutoff = floor_db + cfg.map_cutoff_margin_db - g0_db;
            cloud = mpcs_to_points(ests, scene.trx, cutoff);
            if (method == Method::sage_plus_removal)
            {
                auto arcs = arcs_from_corners(scene);
                for (const auto &a : detect_spurious_arcs(cloud, scene.trx))
                    arcs.push_back(a);
                cloud = remove_spurious(cloud, arcs, scene.trx);
            }
        }
        if (cloud.points.empty())
            throw std::runtime_error("no estimates above the mapping threshold for method '" + name +
                                     "' (PADP dumped to " + (out_dir / "padp.csv").string() + ")");

        MethodArtifacts art;
        art.n_estimates = static_cast<int>(ests.size());
        art.mpcs_csv = (out_dir / ("mpcs_" + name + ".csv")).string();
        art.map_csv = (out_dir / ("map_" + name + ".csv")).string();
        art.map_svg = (out_dir / ("map_" + name + ".svg")).string();
        write_mpcs_csv(ests, art.mpcs_csv);
        write_map_csv(cloud, art.map_csv);
        write_map_svg(cloud, scene, art.map_svg);
        art.ranging = ranging_error(cloud, scene, false);
        report.methods[name] = art;

        if (method != Method::max_search && (!have_identify_cloud || method == Method::sage_plus_removal))
        {
            identify_cloud = cloud;
            have_identify_cloud = true;
        }
    }

    // Material identification: strongest retained echo per wall, gated to
    // points that actually lie on that wall.
    if (have_identify_cloud)
    {
        const double gate_m = 0.05;
        const double f_c = spec.grid.center_hz();
        for (size_t wi = 0; wi < scene.walls.size(); ++wi)
        {
            const auto &w = scene.walls[wi];
            const MapPoint *best = nullptr;
            for (const auto &p : identify_cloud.points)
            {
                if (p.spurious)
                    continue;
                if (point_segment_distance(p.position, w.a, w.b) > gate_m)
                    continue;
                if (!best || p.source.power_db > best->source.power_db)
                    best = &p;
            }
            if (!best)
                continue;
            Identification id;
            id.wall_index = static_cast<int>(wi);
            id.wall_material = w.material_name;
            id.query_rl_db = extract_reflection_loss(best->source, scene.trx, f_c);
            id.match = identify_material(id.query_rl_db, db, f_c);
            report.identifications.push_back(id);
        }
        json jids = json::array();
        for (const auto &id : report.identifications)
        {
            json je = match_to_json(id.query_rl_db, f_c, id.match);
            je["wall_index"] = id.wall_index;
            je["material_tag"] = id.wall_material;
            jids.push_back(je);
        }
        std::ofstream f((out_dir / "identification.json").string());
        f << jids.dump(2) << "\n";
    }

    std::ofstream rf((out_dir / "report.json").string());
    rf << report.to_json() << "\n";
    return report;
}

std::string RunReport::to_json() const
{
    json j;
    j["provenance"] = {{"config_hash", hex64(config_hash)},
                       {"seed", seed},
                       {"scene_hash", hex64(scene_hash)},
                       {"version", version}};
    json jm;
    for (const auto &[name, art] : methods)
    {
        jm[name] = {{"ranging",
                     {{"mde_cm", art.ranging.mde_cm},
                      {"rmse_cm", art.ranging.rmse_cm},
                      {"n_points", art.ranging.n_points},
                      {"n_removed", art.ranging.n_removed}}},
                    {"n_estimates", art.n_estimates},
                    {"artifacts", {{"map_csv", art.map_csv}, {"map_svg", art.map_svg}, {"mpcs_csv", art.mpcs_csv}}}};
    }
    j["methods"] = jm;
    json jids = json::array();
    for (const auto &id : identifications)
    {
        json je;
        je["wall_index"] = id.wall_index;
        je["material_tag"] = id.wall_material;
        je["query_rl_db"] = id.query_rl_db;
        je["best"] = id.match.ranked.empty() ? "" : id.match.ranked.front().first;
        jids.push_back(je);
    }
    j["identifications"] = jids;
    return j.dump(2);
}

void cmd_db_import(const std::string &csv_in, const std::string &csv_out)
{
    db_save(db_load(csv_in), csv_out);
}

std::string cmd_db_query(double rl_db, double f_hz, const std::string &db_path)
{
    MaterialDb db = db_path.empty() ? MaterialDb::seed_300ghz() : db_load(db_path);
    const MatchResult m = identify_material(rl_db, db, f_hz);
    return match_to_json(rl_db, f_hz, m).dump(2);
}

} // namespace thzmap
