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

#include "cfmimo/precoding.hpp"

#include <cmath>
#include <stdexcept>

namespace cfmimo
{

CMatrix Precoder::f_tilde(int l) const
{
    return kron(f.transpose(), CMatrix::Identity(l, l));
}

Precoder make_precoder(CMatrix f, double power_budget)
{
    Precoder p;
    p.f_hat = f * f.adjoint();
    p.f = std::move(f);
    p.power_budget = power_budget;
    return p;
}

Precoder statistical_precoder(std::span<const CMatrix> u_t, double power_budget)
{
    if (u_t.empty())
        throw std::invalid_argument("statistical_precoder: no UE-side bases");
    const Eigen::Index n = u_t.front().rows();
    CMatrix sum = CMatrix::Zero(n, n);
    for (const CMatrix &u : u_t)
    {
        if (u.rows() != n || u.cols() != n)
            throw std::invalid_argument("statistical_precoder: bases must all be N x N");
        sum += u;
    }
    const double norm = sum.norm();
    if (norm < 1e-12 * std::sqrt(static_cast<double>(n * u_t.size())))
    {
        log_warning("statistical_precoder", "sum of UE-side bases vanishes, using uniform precoder");
        return uniform_precoder(static_cast<int>(n), power_budget);
    }
    return make_precoder(std::sqrt(power_budget) / norm * sum, power_budget);
}

Precoder uniform_precoder(int n, double power_budget)
{
    if (n < 1)
        throw std::invalid_argument("uniform_precoder: n must be >= 1");
    return make_precoder(std::sqrt(power_budget / n) * CMatrix::Identity(n, n), power_budget);
}

std::vector<Precoder> build_precoders(const NetworkStatistics &stats, PrecoderKind kind, double power_budget)
{
    std::vector<Precoder> out;
    out.reserve(static_cast<std::size_t>(stats.k_ues));
    for (int k = 0; k < stats.k_ues; ++k)
    {
        if (kind == PrecoderKind::kUniform)
        {
            out.push_back(uniform_precoder(stats.n_ant, power_budget));
            continue;
        }
        std::vector<CMatrix> bases;
        bases.reserve(static_cast<std::size_t>(stats.m_aps));
        for (int m = 0; m < stats.m_aps; ++m)
            bases.push_back(stats.link(m, k).u_t);
        out.push_back(statistical_precoder(bases, power_budget));
    }
    return out;
}

} // namespace cfmimo
