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
//
// Joint delay-angle SAGE estimator. The signal signature of one path is
//   u(f_k, phi_m; tau, theta) = G(theta - phi_m)
//                               * exp(-j*2*pi*f_k*(tau - (2R/c)*cos(theta - phi_m)))
// i.e. per scan angle a pure effective delay. All searches therefore run on
// per-column oversampled baseband CIRs (interpolated), while alpha updates
// and accept/reject decisions use exact frequency-domain inner products.

#include "thzmap/estimator.hpp"

#include "thzmap/fft.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace thzmap
{

namespace
{

using cd = std::complex<double>;

int next_fast_len(int n)
{
    for (int len = n;; ++len)
    {
        int k = len;
        while (k % 2 == 0) k /= 2;
        while (k % 3 == 0) k /= 3;
        while (k % 5 == 0) k /= 5;
        if (k == 1)
            return len;
    }
}

struct Candidate
{
    double tau = 0.0;
    double theta = 0.0;
    double score = -1.0;
};

class SageEngine
{
  public:
    SageEngine(const ChannelResponse &h, const TrxConfig &trx, const SageConfig &cfg,
               SageTrace *trace)
        : h_(h), trx_(trx), cfg_(cfg), trace_(trace)
    {
        n_freq_ = h.grid.n_points;
        n_scan_ = static_cast<int>(h.scan_angles_deg.size());
        f0_ = h.grid.freq_hz(0);
        df_ = h.grid.df_hz();
        window_s_ = 1.0 / df_; // unambiguous delay span, n_freq/B
        bb_len_ = next_fast_len(n_freq_ * std::max(1, cfg.tau_grid_oversampling));
        tau_step_ = window_s_ / bb_len_;
        two_r_c_ = 2.0 * trx.uca_radius / SPEED_OF_LIGHT;

        scan_rad_.resize(n_scan_);
        for (int m = 0; m < n_scan_; ++m)
            scan_rad_[m] = deg2rad(h.scan_angles_deg[m]);

        g0_ = pattern(0.0);
        if (!(g0_ > 0.0))
            throw std::invalid_argument("antenna pattern peak must be positive");
        floor_gain_ = pattern(PI);

        // Columns beyond this offset carry only the pattern floor.
        win_span_ = PI;
        for (double d = 0.0; d <= PI; d += deg2rad(0.05))
            if (pattern(d) <= 2.0e-3 * g0_)
            {
                win_span_ = d + deg2rad(2.0);
                break;
            }

        residual_ = h.h;
        x_work_.resize(n_freq_, n_scan_);
        sig_.resize(n_freq_, n_scan_);
        bb_.resize(bb_len_, n_scan_);
        h_energy_ = h.h.squaredNorm();
    }

    std::vector<MpcEstimate> run()
    {
        std::vector<MpcEstimate> out;
        if (h_energy_ <= 0.0)
            return out;

        noise_floor_db_ = estimate_noise_floor(compute_padp(to_cir(h_, CirWindow::rectangular, 1)));

        sic_initialization();
        em_refinement();

        for (const auto &p : paths_)
        {
            if (std::abs(p.alpha) <= 0.0)
                continue;
            MpcEstimate e;
            e.alpha = p.alpha;
            e.tau_s = wrap_delay(p.tau);
            e.theta_rad = wrap_2pi(p.theta);
            e.power_db = 20.0 * std::log10(std::abs(p.alpha));
            out.push_back(e);
        }
        std::sort(out.begin(), out.end(),
                  [](const MpcEstimate &a, const MpcEstimate &b) { return a.power_db > b.power_db; });
        return out;
    }

  private:
    struct Path
    {
        cd alpha;
        double tau = 0.0;
        double theta = 0.0;
    };

    double pattern(double d) const
    {
        return cfg_.pattern ? cfg_.pattern(wrap_pi(d)) : antenna_gain(d, trx_);
    }

    double wrap_delay(double tau) const
    {
        tau = std::fmod(tau, window_s_);
        if (tau < 0.0)
            tau += window_s_;
        return tau;
    }

    // ||u||^2 = n_freq * sum_m G(theta - phi_m)^2; the out-of-window columns
    // sit exactly at the pattern floor.
    double signature_norm2(double theta) const
    {
        double acc = 0.0;
        int n_win = 0;
        for (int m = 0; m < n_scan_; ++m)
        {
            const double d = wrap_pi(theta - scan_rad_[m]);
            if (std::abs(d) <= win_span_)
            {
                const double w = pattern(d);
                acc += w * w;
                ++n_win;
            }
        }
        acc += (n_scan_ - n_win) * floor_gain_ * floor_gain_;
        return acc * n_freq_;
    }

    // Exact <X, u(tau, theta)> over all columns; optionally stores u in sig_.
    std::pair<cd, double> exact_corr(const Eigen::MatrixXcd &x, double tau, double theta, bool store)
    {
        cd corr = 0.0;
        double w_sq = 0.0;
        for (int m = 0; m < n_scan_; ++m)
        {
            const double d = wrap_pi(theta - scan_rad_[m]);
            const double w = pattern(d);
            w_sq += w * w;
            const double tau_eff = tau - two_r_c_ * std::cos(d);
            cd base = std::polar(1.0, -2.0 * PI * f0_ * tau_eff);
            const cd ratio = std::polar(1.0, -2.0 * PI * df_ * tau_eff);
            cd col_corr = 0.0;
            const cd *xm = x.col(m).data();
            cd *sm = store ? sig_.col(m).data() : nullptr;
            for (int k = 0; k < n_freq_; ++k)
            {
                if (store)
                    sm[k] = w * base;
                col_corr += xm[k] * std::conj(base);
                if ((k & 511) == 511)
                    base = std::polar(1.0, -2.0 * PI * (f0_ + (k + 1) * df_) * tau_eff);
                else
                    base *= ratio;
            }
            corr += w * col_corr;
        }
        return {corr, w_sq * n_freq_};
    }

    // x += alpha * u(tau, theta); returns <x_after, u> and ||u||^2.
    std::pair<cd, double> add_path_and_corr(Eigen::MatrixXcd &x, const Path &p)
    {
        for (int m = 0; m < n_scan_; ++m)
        {
            const double d = wrap_pi(p.theta - scan_rad_[m]);
            const double w = pattern(d);
            const double tau_eff = p.tau - two_r_c_ * std::cos(d);
            cd base = std::polar(1.0, -2.0 * PI * f0_ * tau_eff);
            const cd ratio = std::polar(1.0, -2.0 * PI * df_ * tau_eff);
            cd *xm = x.col(m).data();
            for (int k = 0; k < n_freq_; ++k)
            {
                xm[k] += p.alpha * w * base;
                if ((k & 511) == 511)
                    base = std::polar(1.0, -2.0 * PI * (f0_ + (k + 1) * df_) * tau_eff);
                else
                    base *= ratio;
            }
        }
        return exact_corr(x, p.tau, p.theta, false);
    }

    // Refresh the oversampled baseband CIR cache from x; returns the PADP
    // argmax (bin, column) while passing through the data.
    std::pair<int, int> refresh_bb(const Eigen::MatrixXcd &x)
    {
        int best_i = 0, best_m = 0;
        double best = -1.0;
        for (int m = 0; m < n_scan_; ++m)
        {
            const auto col = detail::idft(x.col(m).data(), n_freq_, bb_len_);
            for (int i = 0; i < bb_len_; ++i)
            {
                bb_(i, m) = col[i];
                const double a = std::norm(col[i]);
                if (a > best)
                {
                    best = a;
                    best_i = i;
                    best_m = m;
                }
            }
        }
        return {best_i, best_m};
    }

    // Linear interpolation of the baseband CIR of column m at delay tau
    // (periodic in the unambiguous window).
    cd bb_at(int m, double tau) const
    {
        double pos = tau / tau_step_;
        pos -= std::floor(pos / bb_len_) * bb_len_;
        int i0 = static_cast<int>(pos);
        double frac = pos - i0;
        if (i0 >= bb_len_)
        {
            i0 = 0;
            frac = 0.0;
        }
        const int i1 = (i0 + 1 == bb_len_) ? 0 : i0 + 1;
        return bb_(i0, m) * (1.0 - frac) + bb_(i1, m) * frac;
    }

    // Matched-filter score |<x,u>|^2/||u||^2 from the CIR cache (windowed columns).
    double cached_score(double tau, double theta, double u_norm2) const
    {
        cd corr = 0.0;
        for (int m = 0; m < n_scan_; ++m)
        {
            const double d = wrap_pi(theta - scan_rad_[m]);
            if (std::abs(d) > win_span_)
                continue;
            const double w = pattern(d);
            const double tau_eff = tau - two_r_c_ * std::cos(d);
            corr += w * bb_at(m, tau_eff) * std::polar(1.0, 2.0 * PI * f0_ * tau_eff);
        }
        return std::norm(corr) / u_norm2;
    }

    // Best theta on a grid at fixed tau, with one parabolic refinement.
    Candidate sweep_theta(double tau, double theta_lo, double theta_hi) const
    {
        const double step = deg2rad(cfg_.theta_grid_step_deg);
        const int n = std::max(1, static_cast<int>(std::round((theta_hi - theta_lo) / step)));
        std::vector<double> score(n);
        int best = 0;
        for (int t = 0; t < n; ++t)
        {
            const double theta = theta_lo + t * step;
            score[t] = cached_score(tau, theta, signature_norm2(theta));
            if (score[t] > score[best])
                best = t;
        }
        Candidate c;
        c.tau = tau;
        c.theta = theta_lo + best * step;
        c.score = score[best];
        if (best > 0 && best < n - 1)
        {
            const double denom = score[best - 1] - 2.0 * score[best] + score[best + 1];
            if (denom < 0.0)
            {
                const double delta = 0.5 * (score[best - 1] - score[best + 1]) / denom;
                if (std::abs(delta) <= 1.0)
                    c.theta += delta * step;
            }
        }
        return c;
    }

    // Best tau over the full oversampled delay grid at fixed theta, with one
    // parabolic refinement.
    Candidate sweep_tau(double theta) const
    {
        const double u_norm2 = signature_norm2(theta);
        std::vector<cd> acc(bb_len_, cd(0.0, 0.0));
        for (int m = 0; m < n_scan_; ++m)
        {
            const double d = wrap_pi(theta - scan_rad_[m]);
            if (std::abs(d) > win_span_)
                continue;
            const double w = pattern(d);
            const double dtau = two_r_c_ * std::cos(d);
            double shift = dtau / tau_step_;
            const int si = static_cast<int>(std::floor(shift));
            const double frac = shift - si;
            // tau' at bin i is (i - shift)*tau_step
            cd carrier = std::polar(1.0, 2.0 * PI * f0_ * (0.0 - dtau));
            const cd carrier_step = std::polar(1.0, 2.0 * PI * f0_ * tau_step_);
            for (int i = 0; i < bb_len_; ++i)
            {
                int ia = i - si;
                ia -= bb_len_ * static_cast<int>(std::floor(static_cast<double>(ia) / bb_len_));
                if (ia >= bb_len_)
                    ia -= bb_len_;
                const int ib = (ia == 0) ? bb_len_ - 1 : ia - 1;
                const cd val = bb_(ia, m) * (1.0 - frac) + bb_(ib, m) * frac;
                acc[i] += w * val * carrier;
                if ((i & 511) == 511)
                    carrier = std::polar(1.0, 2.0 * PI * f0_ * ((i + 1) * tau_step_ - dtau));
                else
                    carrier *= carrier_step;
            }
        }
        int best = 0;
        double best_v = -1.0;
        std::vector<double> sc(bb_len_);
        for (int i = 0; i < bb_len_; ++i)
        {
            sc[i] = std::norm(acc[i]);
            if (sc[i] > best_v)
            {
                best_v = sc[i];
                best = i;
            }
        }
        Candidate c;
        c.theta = theta;
        c.tau = best * tau_step_;
        c.score = best_v / u_norm2;
        const double ym = sc[(best + bb_len_ - 1) % bb_len_];
        const double yp = sc[(best + 1) % bb_len_];
        const double denom = ym - 2.0 * sc[best] + yp;
        if (denom < 0.0)
        {
            const double delta = 0.5 * (ym - yp) / denom;
            if (std::abs(delta) <= 1.0)
                c.tau += delta * tau_step_;
        }
        return c;
    }

    // Search around a fresh CIR cache of x: global theta sweep, full tau
    // sweep, local theta polish.
    Candidate search(const Eigen::MatrixXcd &x, bool global_theta, double theta_hint)
    {
        const auto [bin, col] = refresh_bb(x);
        double tau0;
        double theta0;
        if (global_theta)
        {
            theta0 = scan_rad_[col];
            tau0 = wrap_delay(bin * tau_step_ + two_r_c_);
            Candidate ct = sweep_theta(tau0, 0.0, 2.0 * PI);
            theta0 = ct.theta;
        }
        else
        {
            theta0 = theta_hint;
        }
        Candidate c = sweep_tau(theta0);
        const double local = deg2rad(std::max(trx_.hpbw_deg, 8.0 * cfg_.theta_grid_step_deg));
        Candidate ct = sweep_theta(c.tau, theta0 - local, theta0 + local);
        ct.tau = c.tau;
        return ct;
    }

    void sic_initialization()
    {
        double res_energy = residual_.squaredNorm();
        while (static_cast<int>(paths_.size()) < cfg_.max_paths)
        {
            if (res_energy / h_energy_ < cfg_.residual_energy_stop)
                break;
            Candidate c = search(residual_, true, 0.0);
            auto [corr, u_norm2] = exact_corr(residual_, c.tau, c.theta, true);
            const cd alpha = corr / u_norm2;
            const double peak_db = 20.0 * std::log10(std::max(std::abs(alpha) * g0_, 1e-300));
            if (peak_db < noise_floor_db_ + cfg_.stop_margin_db)
                break;
            residual_ -= alpha * sig_;
            paths_.push_back({alpha, c.tau, c.theta});
            res_energy = residual_.squaredNorm();
            if (trace_)
                trace_->sic_residual_energy.push_back(res_energy);
        }
    }

    void em_refinement()
    {
        if (paths_.empty())
            return;
        double prev_energy = residual_.squaredNorm();
        for (int it = 0; it < cfg_.max_em_iterations; ++it)
        {
            for (auto &p : paths_)
            {
                x_work_ = residual_;
                auto [corr_old, u_old] = add_path_and_corr(x_work_, p);
                // Eq. 4 objective of the stored parameters against X_l
                const double obj_stored = 2.0 * (std::conj(p.alpha) * corr_old).real() -
                                          std::norm(p.alpha) * u_old;
                const double obj_old = std::norm(corr_old) / u_old; // alpha re-solved

                Candidate c = search(x_work_, false, p.theta);
                auto [corr_new, u_new] = exact_corr(x_work_, c.tau, c.theta, false);
                const double obj_new = std::norm(corr_new) / u_new;

                cd corr_used;
                double u_used;
                if (obj_new >= obj_old)
                {
                    p.tau = c.tau;
                    p.theta = c.theta;
                    corr_used = corr_new;
                    u_used = u_new;
                }
                else
                {
                    corr_used = corr_old;
                    u_used = u_old;
                }
                std::tie(corr_used, u_used) = exact_corr(x_work_, p.tau, p.theta, true);
                p.alpha = corr_used / u_used;
                residual_ = x_work_ - p.alpha * sig_;
                if (trace_)
                    trace_->em_objective_deltas.push_back(std::norm(corr_used) / u_used - obj_stored);
            }
            const double cur = residual_.squaredNorm();
            if (trace_)
                trace_->em_residual_energy.push_back(cur);
            if (std::abs(prev_energy - cur) < cfg_.convergence_eps * std::max(prev_energy, 1e-300))
                break;
            prev_energy = cur;
        }
    }

    const ChannelResponse &h_;
    const TrxConfig &trx_;
    SageConfig cfg_;
    SageTrace *trace_;

    int n_freq_ = 0, n_scan_ = 0, bb_len_ = 0;
    double f0_ = 0.0, df_ = 0.0, window_s_ = 0.0, tau_step_ = 0.0;
    double two_r_c_ = 0.0, g0_ = 0.0, floor_gain_ = 0.0, win_span_ = 0.0;
    double h_energy_ = 0.0, noise_floor_db_ = -200.0;
    std::vector<double> scan_rad_;
    Eigen::MatrixXcd residual_, x_work_, sig_, bb_;
    std::vector<Path> paths_;
};

} // namespace

std::vector<MpcEstimate> sage_estimate(const ChannelResponse &h, const TrxConfig &trx,
                                       const SageConfig &cfg, SageTrace *trace)
{
    h.validate();
    if (h.scan_angles_deg.empty())
        throw std::invalid_argument("sage_estimate: empty scan list");
    if (cfg.max_paths <= 0 || cfg.max_em_iterations < 0 || cfg.tau_grid_oversampling <= 0 ||
        !(cfg.theta_grid_step_deg > 0.0) || !(cfg.convergence_eps > 0.0))
        throw std::invalid_argument("sage_estimate: invalid configuration");
    SageEngine engine(h, trx, cfg, trace);
    return engine.run();
}

} // namespace thzmap
