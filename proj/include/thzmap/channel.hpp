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

#ifndef THZMAP_CHANNEL_HPP
#define THZMAP_CHANNEL_HPP

#include "thzmap/materials.hpp"
#include "thzmap/scene.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace thzmap
{

enum class PathKind
{
    wall_scatter,
    corner_retro
};

/// One multipath component of the forward model
///   H(f, phi) = sum_l alpha_l * exp(-j*2*pi*f*tau_l)
///               * exp(+j*4*pi*f*R*cos(theta_l - phi)/c) * G(theta_l - phi) + W.
/// tau is referenced to the rotation center; the UCA phase term shifts it to
/// the physically observed rim delay 2*(rho - R*cos(theta-phi))/c per scan angle.
struct GroundTruthPath
{
    std::complex<double> alpha;
    double tau_s = 0.0;
    double theta_rad = 0.0;
    PathKind kind = PathKind::wall_scatter;
    int source_feature = -1; ///< wall index or corner index
};

/// Measured/simulated observable H(f, phi): rows = frequency, cols = scan angle.
struct ChannelResponse
{
    Eigen::MatrixXcd h;
    FrequencyGrid grid;
    std::vector<double> scan_angles_deg;

    void validate() const;
};

struct SimNoiseConfig
{
    /// Expected delay-domain (PADP) noise level in dB; -1000 disables noise.
    double noise_floor_db = -1000.0;
    std::uint64_t seed = 0;

    bool enabled() const { return noise_floor_db > -999.0; }
};

/// Simulator knobs that are not part of the signal model contract.
struct SimOptions
{
    double scatter_spacing_m = 0.02;  ///< wall discretization delta
    double lambert_exponent = 40.0;   ///< cos^n backscatter lobe
    double corner_rel_db = -6.0;      ///< corner amplitude below strongest wall return
};

/// Two-way total antenna gain (linear power value, applied to amplitude):
/// Gaussian mainlobe G0*exp(-4*ln2*(dtheta/HPBW)^2), floored at G0 - 30 dB.
double antenna_gain(double delta_theta_rad, const TrxConfig &trx);

/// Discretizes walls into Lambertian-weighted scatterers and adds one
/// retro path per corner at tau = 2*(d - R)/c. Amplitudes follow
/// 20*log10|a| = G_t + G_r - FSPL(c*tau, f_c) - RL - falloff + backscatter,
/// with each wall rescaled so its coherent broadside aggregate matches the
/// link budget of its specular point.
std::vector<GroundTruthPath> enumerate_paths(const Scene &scene, const MaterialDb &db,
                                             const FrequencyGrid &grid,
                                             const SimOptions &opt = {});

/// Evaluates the forward model on the full (frequency x scan-angle) grid.
/// Noise is complex white Gaussian, indexed by (freq, angle) so the result
/// is independent of evaluation order and bitwise reproducible per seed.
ChannelResponse synthesize_response(const std::vector<GroundTruthPath> &paths,
                                    const FrequencyGrid &grid, const TrxConfig &trx,
                                    const SimNoiseConfig &noise = {});

/// Binary layout: header {n_freq u32, n_scan u32, f_start f64, f_stop f64},
/// then row-major (re, im) f64 pairs. A JSON sidecar at path + ".json" carries
/// the scan angles and provenance.
void save_response(const ChannelResponse &r, const std::string &path,
                   std::uint64_t seed = 0, std::uint64_t scene_hash_value = 0);
ChannelResponse load_response(const std::string &path);

} // namespace thzmap

#endif
