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

#include "thzmap/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

namespace thzmap::detail
{

namespace
{

struct PlanSlot
{
    fftw_plan plan = nullptr;
    fftw_complex *buf_in = nullptr;
    fftw_complex *buf_out = nullptr;
    int len = 0;

    ~PlanSlot()
    {
        if (plan)
            fftw_destroy_plan(plan);
        if (buf_in)
            fftw_free(buf_in);
        if (buf_out)
            fftw_free(buf_out);
    }
};

std::mutex g_mutex;
std::map<int, PlanSlot> g_plans;

PlanSlot &slot_for(int len)
{
    auto it = g_plans.find(len);
    if (it != g_plans.end())
        return it->second;
    PlanSlot &s = g_plans[len];
    s.len = len;
    s.buf_in = fftw_alloc_complex(len);
    s.buf_out = fftw_alloc_complex(len);
    // FFTW_ESTIMATE keeps planning deterministic and cheap.
    s.plan = fftw_plan_dft_1d(len, s.buf_in, s.buf_out, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!s.plan)
        throw std::runtime_error("fftw plan creation failed");
    return s;
}

} // namespace

std::vector<std::complex<double>> idft(const std::complex<double> *in, int in_len, int out_len)
{
    if (in_len <= 0 || out_len <= 0)
        throw std::invalid_argument("idft requires positive lengths");

    std::lock_guard<std::mutex> lock(g_mutex);
    PlanSlot &s = slot_for(out_len);

    std::memset(s.buf_in, 0, sizeof(fftw_complex) * out_len);
    for (int k = 0; k < in_len; ++k)
    {
        const int slot = k % out_len; // folds when out_len < in_len
        s.buf_in[slot][0] += in[k].real();
        s.buf_in[slot][1] += in[k].imag();
    }
    fftw_execute(s.plan);

    std::vector<std::complex<double>> out(out_len);
    for (int i = 0; i < out_len; ++i)
        out[i] = {s.buf_out[i][0], s.buf_out[i][1]};
    return out;
}

} // namespace thzmap::detail
