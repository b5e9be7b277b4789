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

#include "thzmap/estimator.hpp"

#include "thzmap/fft.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace thzmap
{

ChannelResponse calibrate(const ChannelResponse &h_meas, const ChannelResponse &h_ref)
{
    h_meas.validate();
    h_ref.validate();
    if (h_meas.grid.f_start_hz != h_ref.grid.f_start_hz ||
        h_meas.grid.f_stop_hz != h_ref.grid.f_stop_hz ||
        h_meas.grid.n_points != h_ref.grid.n_points ||
        h_meas.scan_angles_deg != h_ref.scan_angles_deg)
        throw std::invalid_argument("calibrate: measurement and reference grids differ");

    ChannelResponse out = h_meas;
    for (Eigen::Index m = 0; m < out.h.cols(); ++m)
        for (Eigen::Index k = 0; k < out.h.rows(); ++k)
        {
            const std::complex<double> ref = h_ref.h(k, m);
            if (std::abs(ref) < 1e-15)
                throw std::runtime_error("calibrate: reference magnitude below 1e-15");
            out.h(k, m) /= ref;
        }
    return out;
}

Cir to_cir(const ChannelResponse &h, CirWindow window, int oversample)
{
    h.validate();
    if (oversample < 1)
        throw std::invalid_argument("to_cir: oversample must be >= 1");

    const int n = h.grid.n_points;
    const int n_out = n * oversample;
    const int n_scan = static_cast<int>(h.scan_angles_deg.size());
    const double bw = h.grid.bandwidth_hz();
    const double f0 = h.grid.freq_hz(0);

    Cir cir;
    cir.scan_angles_deg = h.scan_angles_deg;
    cir.delay_axis_s.resize(n_out);
    for (int i = 0; i < n_out; ++i)
        cir.delay_axis_s[i] = static_cast<double>(i) / (oversample * bw);
    cir.g.resize(n_out, n_scan);

    std::vector<std::complex<double>> col(n);
    for (int m = 0; m < n_scan; ++m)
    {
        for (int k = 0; k < n; ++k)
        {
            double w = 1.0;
            if (window == CirWindow::hann)
                w = 0.5 * (1.0 - std::cos(2.0 * PI * k / (n - 1)));
            col[k] = w * h.h(k, m);
        }
        const auto bb = detail::idft(col.data(), n, n_out);
        // The FFT supplies the baseband kernel; re-apply the carrier phase of
        // the first frequency sample so g is the true IDFT at tau_i.
        for (int i = 0; i < n_out; ++i)
        {
            const double tau = cir.delay_axis_s[i];
            const std::complex<double> carrier =
                std::exp(std::complex<double>(0.0, 2.0 * PI * f0 * tau));
            cir.g(i, m) = bb[i] * carrier / static_cast<double>(n);
        }
    }
    return cir;
}

Padp compute_padp(const Cir &cir)
{
    Padp p;
    p.delay_axis_s = cir.delay_axis_s;
    p.scan_angles_deg = cir.scan_angles_deg;
    p.p_db.resize(cir.g.rows(), cir.g.cols());
    for (Eigen::Index m = 0; m < cir.g.cols(); ++m)
        for (Eigen::Index i = 0; i < cir.g.rows(); ++i)
        {
            const double mag = std::abs(cir.g(i, m));
            p.p_db(i, m) = mag > 1e-10 ? 20.0 * std::log10(mag) : -200.0;
        }
    return p;
}

double estimate_noise_floor(const Padp &padp)
{
    const Eigen::Index n_delay = padp.p_db.rows();
    const Eigen::Index n_scan = padp.p_db.cols();
    if (n_delay == 0 || n_scan == 0)
        throw std::invalid_argument("estimate_noise_floor: empty profile");

    const Eigen::Index n_low = std::max<Eigen::Index>(1, n_delay / 10);
    std::vector<double> col(n_delay);
    double acc = 0.0;
    for (Eigen::Index m = 0; m < n_scan; ++m)
    {
        for (Eigen::Index i = 0; i < n_delay; ++i)
            col[i] = padp.p_db(i, m);
        std::nth_element(col.begin(), col.begin() + (n_low / 2), col.end());
        acc += col[n_low / 2];
    }
    const double raw = acc / static_cast<double>(n_scan);
    if (raw <= -199.999)
        return -200.0; // all-zero input
    // The 5th percentile of exponential bin powers sits -10*log10(-ln 0.95) dB
    // below their mean; shift so pure noise reads back at its true level.
    return raw - 10.0 * std::log10(-std::log(0.95));
}

std::vector<MpcEstimate> max_search_baseline(const Padp &padp, const TrxConfig &trx)
{
    const Eigen::Index n_delay = padp.p_db.rows();
    const Eigen::Index n_scan = padp.p_db.cols();
    std::vector<MpcEstimate> out;
    out.reserve(n_scan);
    const double rim_shift = 2.0 * trx.uca_radius / SPEED_OF_LIGHT;
    for (Eigen::Index m = 0; m < n_scan; ++m)
    {
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < n_delay; ++i)
            if (padp.p_db(i, m) > padp.p_db(best, m))
                best = i;
        MpcEstimate e;
        e.power_db = padp.p_db(best, m);
        e.alpha = std::pow(10.0, e.power_db / 20.0);
        e.tau_s = padp.delay_axis_s[best] + rim_shift;
        e.theta_rad = wrap_2pi(deg2rad(padp.scan_angles_deg[m]));
        out.push_back(e);
    }
    return out;
}

double padp_peak_db(const MpcEstimate &est, const TrxConfig &trx)
{
    return est.power_db + 20.0 * std::log10(antenna_gain(0.0, trx));
}

// ---------------------------------------------------------------------------
// CSV exports
// ---------------------------------------------------------------------------

void write_mpcs_csv(const std::vector<MpcEstimate> &ests, const std::string &path)
{
    std::ofstream f(path);
    if (!f)
        throw std::invalid_argument("cannot write estimates CSV: " + path);
    f << "alpha_re,alpha_im,tau_s,theta_rad,power_db\n";
    char buf[256];
    for (const auto &e : ests)
    {
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g,%.12g\n", e.alpha.real(),
                      e.alpha.imag(), e.tau_s, e.theta_rad, e.power_db);
        f << buf;
    }
}

std::vector<MpcEstimate> read_mpcs_csv(const std::string &path)
{
    std::ifstream f(path);
    if (!f)
        throw std::invalid_argument("cannot open estimates CSV: " + path);
    std::vector<MpcEstimate> out;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line))
    {
        ++lineno;
        if (line.empty() || line == "alpha_re,alpha_im,tau_s,theta_rad,power_db")
            continue;
        std::stringstream ss(line);
        std::string tok;
        double v[5];
        for (int i = 0; i < 5; ++i)
        {
            if (!std::getline(ss, tok, ','))
                throw std::invalid_argument("estimates CSV line " + std::to_string(lineno) +
                                            ": expected 5 columns");
            v[i] = std::stod(tok);
        }
        MpcEstimate e;
        e.alpha = {v[0], v[1]};
        e.tau_s = v[2];
        e.theta_rad = v[3];
        e.power_db = v[4];
        out.push_back(e);
    }
    return out;
}

void write_padp_csv(const Padp &padp, const std::string &path)
{
    std::ofstream f(path);
    if (!f)
        throw std::invalid_argument("cannot write PADP CSV: " + path);
    char buf[64];
    f << "delay_ns";
    for (double a : padp.scan_angles_deg)
    {
        std::snprintf(buf, sizeof(buf), ",%.10g", a);
        f << buf;
    }
    f << "\n";
    for (Eigen::Index i = 0; i < padp.p_db.rows(); ++i)
    {
        std::snprintf(buf, sizeof(buf), "%.10g", padp.delay_axis_s[i] * 1e9);
        f << buf;
        for (Eigen::Index m = 0; m < padp.p_db.cols(); ++m)
        {
            std::snprintf(buf, sizeof(buf), ",%.6g", padp.p_db(i, m));
            f << buf;
        }
        f << "\n";
    }
}

} // namespace thzmap
