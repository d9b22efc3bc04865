// SPDX-License-Identifier: Apache-2.0
//
// cfmimo: uplink spectral-efficiency simulator for cell-free massive MIMO
// Copyright (C) 2026 The cfmimo authors
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

#ifndef CFMIMO_PRECODING_HPP
#define CFMIMO_PRECODING_HPP

#include "cfmimo/channel.hpp"
#include "cfmimo/linalg.hpp"

#include <span>
#include <vector>

namespace cfmimo
{

enum class PrecoderKind
{
    kStatistical, // eigenbasis precoder built from the UE-side bases of all APs
    kUniform,     // sqrt(p / N) I, i.e. no precoding
};

struct Precoder
{
    CMatrix f;     // N x N
    CMatrix f_hat; // F F^H
    double power_budget = 0.0;

    int n() const { return static_cast<int>(f.rows()); }

    // F~ = F^T kron I_L, acting on column-stacked L x N channels: vec(H F) = F~ vec(H).
    CMatrix f_tilde(int l) const;
};

Precoder make_precoder(CMatrix f, double power_budget);

// F = sqrt(p) * S / ||S||_F with S = sum_m U_mk,t. Falls back to the uniform precoder with a
// warning when S is numerically zero.
Precoder statistical_precoder(std::span<const CMatrix> u_t, double power_budget);

Precoder uniform_precoder(int n, double power_budget);

// One precoder per UE, from the statistics of every AP.
std::vector<Precoder> build_precoders(const NetworkStatistics &stats, PrecoderKind kind, double power_budget);

} // namespace cfmimo

#endif
