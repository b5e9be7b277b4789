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

#ifndef THZMAP_FFT_HPP
#define THZMAP_FFT_HPP

#include <complex>
#include <vector>

namespace thzmap::detail
{

/// Unnormalized inverse DFT, out[i] = sum_k in[k] * exp(+j*2*pi*k*i/out_len),
/// with the input zero-padded (or index-folded when out_len < in_len) to
/// out_len. Plans are cached per length; calls are serialized internally,
/// so the function is thread-safe.
std::vector<std::complex<double>> idft(const std::complex<double> *in, int in_len, int out_len);

} // namespace thzmap::detail

#endif
