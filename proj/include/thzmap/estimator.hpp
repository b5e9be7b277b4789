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

#ifndef THZMAP_ESTIMATOR_HPP
#define THZMAP_ESTIMATOR_HPP

#include "thzmap/channel.hpp"

#include <functional>
#include <string>
#include <vector>

namespace thzmap
{

/// Delay-domain response h(tau, phi); bin spacing 1/(oversample*B).
struct Cir
{
    Eigen::MatrixXcd g;
    std::vector<double> delay_axis_s;
    std::vector<double> scan_angles_deg;
};

/// Power-angle-delay profile, 20*log10|h| with a -200 dB zero floor.
struct Padp
{
    Eigen::MatrixXd p_db;
    std::vector<double> delay_axis_s;
    std::vector<double> scan_angles_deg;
};

/// One extracted multipath component.
struct MpcEstimate
{
    std::complex<double> alpha;
    double tau_s = 0.0;
    double theta_rad = 0.0;
    double power_db = 0.0; ///< 20*log10|alpha|
};

enum class CirWindow
{
    rectangular,
    hann
};

/// Measured antenna pattern hook: two-way total gain (linear power value
/// applied to amplitude) as a function of the angular offset in radians.
using PatternFn = std::function<double(double)>;

struct SageConfig
{
    int max_paths = 200;
    int max_em_iterations = 30;
    int tau_grid_oversampling = 8;
    double theta_grid_step_deg = 0.25;
    double convergence_eps = 1e-4;   ///< relative log-likelihood change
    double stop_margin_db = 6.0;     ///< keep hunting while candidates clear floor + margin
    double residual_energy_stop = 1e-10; ///< stop when ||res||^2/||H||^2 drops below (noiseless exit)
    PatternFn pattern;               ///< optional measured pattern; default = Gaussian model
};

/// Per-step diagnostics for invariant checks; filled when attached to sage_estimate.
struct SageTrace
{
    std::vector<double> sic_residual_energy;   ///< ||residual||^2 after each extraction
    std::vector<double> em_objective_deltas;   ///< exact Eq.-4 objective change per path update
    std::vector<double> em_residual_energy;    ///< ||residual||^2 after each EM cycle
};

/// Removes the system response: element-wise h_meas / h_ref.
ChannelResponse calibrate(const ChannelResponse &h_meas, const ChannelResponse &h_ref);

/// Per scan angle: window over frequency, then inverse DFT to delay bins
/// tau_i = i/(oversample*B), i = 0..oversample*n_freq-1.
Cir to_cir(const ChannelResponse &h, CirWindow window = CirWindow::rectangular,
           int oversample = 1);

Padp compute_padp(const Cir &cir);

/// Noise level from the lowest-decile delay bins (median per angle, averaged),
/// bias-corrected so it is unbiased for complex white Gaussian noise.
double estimate_noise_floor(const Padp &padp);

/// Joint delay-angle SAGE: successive interference cancellation with
/// coordinate-wise EM refinement (tau -> theta -> alpha) against the
/// UCA-plus-pattern signature. Output sorted by descending power.
std::vector<MpcEstimate> sage_estimate(const ChannelResponse &h, const TrxConfig &trx,
                                       const SageConfig &cfg = {}, SageTrace *trace = nullptr);

/// Strongest-bin baseline: one estimate per scan angle, theta = phi,
/// tau = argmax bin + 2R/c (boresight UCA correction to the center reference).
std::vector<MpcEstimate> max_search_baseline(const Padp &padp, const TrxConfig &trx);

/// PADP-comparable peak level of an estimate: power_db plus the two-way
/// boresight pattern gain. Used for noise-floor threshold comparisons.
double padp_peak_db(const MpcEstimate &est, const TrxConfig &trx);

void write_mpcs_csv(const std::vector<MpcEstimate> &ests, const std::string &path);
std::vector<MpcEstimate> read_mpcs_csv(const std::string &path);
void write_padp_csv(const Padp &padp, const std::string &path);

} // namespace thzmap

#endif
