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

#include "cfmimo/centralized.hpp"

#include "cfmimo/parallel.hpp"
#include "cfmimo/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace cfmimo
{

CMatrix weighted_error_cov(const CMatrix &c_full, const CMatrix &f_hat, int l)
{
    const int n = static_cast<int>(f_hat.rows());
    if (c_full.rows() != l * n || c_full.cols() != l * n)
        throw std::invalid_argument("weighted_error_cov: dimension mismatch");
    CMatrix out = CMatrix::Zero(l, l);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            out += f_hat(b, a) * c_full.block(b * l, a * l, l, l);
    return out;
}

CMatrix ErrorCovariances::aggregate(int l) const
{
    CMatrix out = CMatrix::Zero(m_aps * l_ant, m_aps * l_ant);
    for (int m = 0; m < m_aps; ++m)
        out.block(m * l_ant, m * l_ant, l_ant, l_ant) = at(m, l);
    return out;
}

CMatrix ErrorCovariances::total() const
{
    CMatrix out = CMatrix::Zero(m_aps * l_ant, m_aps * l_ant);
    for (int m = 0; m < m_aps; ++m)
        out.block(m * l_ant, m * l_ant, l_ant, l_ant) = per_ap[static_cast<std::size_t>(m)];
    return out;
}

ErrorCovariances build_error_covariances(const EstimatorBank &bank, std::span<const Precoder> precoders)
{
    ErrorCovariances out;
    out.m_aps = bank.m_aps;
    out.k_ues = bank.k_ues;
    out.l_ant = bank.l_ant;
    for (int m = 0; m < bank.m_aps; ++m)
    {
        CMatrix sum = CMatrix::Zero(bank.l_ant, bank.l_ant);
        for (int l = 0; l < bank.k_ues; ++l)
        {
            out.blocks.push_back(weighted_error_cov(bank.at(m, l).c, precoders[l].f_hat, bank.l_ant));
            sum += out.blocks.back();
        }
        out.per_ap.push_back(sum);
    }
    return out;
}

CollectiveEstimate collect(const ChannelRealization &channel, const ErrorCovariances &cprime, int l_ant,
                           int n_ant)
{
    CollectiveEstimate est;
    est.hhat.reserve(static_cast<std::size_t>(channel.k_ues));
    for (int k = 0; k < channel.k_ues; ++k)
    {
        CMatrix stacked(channel.m_aps * l_ant, n_ant);
        for (int m = 0; m < channel.m_aps; ++m)
            stacked.block(m * l_ant, 0, l_ant, n_ant) = channel.hhat[channel.index(m, k)];
        est.hhat.push_back(std::move(stacked));
    }
    est.cprime_total = cprime.total();
    return est;
}

CMatrix mr_combiner(const CollectiveEstimate &est, int k)
{
    return est.hhat.at(static_cast<std::size_t>(k));
}

CMatrix received_covariance(const CollectiveEstimate &est, std::span<const Precoder> precoders, double sigma2)
{
    CMatrix omega = est.cprime_total;
    omega.diagonal().array() += sigma2;
    for (std::size_t l = 0; l < est.hhat.size(); ++l)
    {
        const CMatrix hf = est.hhat[l] * precoders[l].f;
        omega.noalias() += hf * hf.adjoint();
    }
    return hermitian_part(omega);
}

std::vector<CMatrix> mmse_combiners(const CollectiveEstimate &est, std::span<const Precoder> precoders,
                                    double sigma2)
{
    const CMatrix omega = received_covariance(est, precoders, sigma2);
    Eigen::LLT<CMatrix> llt(omega);
    std::vector<CMatrix> out;
    out.reserve(est.hhat.size());
    for (std::size_t k = 0; k < est.hhat.size(); ++k)
    {
        const CMatrix rhs = est.hhat[k] * precoders[k].f;
        out.push_back(llt.info() == Eigen::Success ? CMatrix(llt.solve(rhs))
                                                   : hermitian_solve(omega, rhs, "mmse_combiner"));
    }
    return out;
}

double se_instantaneous(const CMatrix &v, const CMatrix &omega, const CMatrix &hhat_k, const CMatrix &f_k)
{
    const CMatrix d = v.adjoint() * hhat_k * f_k;
    const CMatrix sigma = hermitian_part(v.adjoint() * omega * v - d * d.adjoint());
    return log2det_bound(d, sigma);
}

double se_instantaneous_optimal(const CMatrix &omega, const CMatrix &hhat_k, const CMatrix &f_k)
{
    const CMatrix d = hhat_k * f_k;
    const CMatrix sigma = hermitian_part(omega - d * d.adjoint());
    return log2det_bound(d, sigma);
}

SeEstimate se_centralized(const NetworkStatistics &stats, const EstimatorBank &bank, const ErrorCovariances &cprime,
                          std::span<const Precoder> precoders, CentralCombiner combiner, int blocks,
                          std::uint64_t seed, double prelog)
{
    if (blocks < 1)
        throw std::invalid_argument("se_centralized: blocks must be >= 1");
    const int k_ues = stats.k_ues;
    std::vector<double> per_block(static_cast<std::size_t>(blocks) * k_ues);

    parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t j) {
        Rng rng(derive_seed(seed, Stream::kBlock, {j}));
        const ChannelRealization channel = draw_block(stats, bank, rng);
        const CollectiveEstimate est = collect(channel, cprime, stats.l_ant, stats.n_ant);
        const CMatrix omega = received_covariance(est, precoders, bank.sigma2);
        std::vector<CMatrix> v;
        if (combiner == CentralCombiner::kMMSE)
            v = mmse_combiners(est, precoders, bank.sigma2);
        for (int k = 0; k < k_ues; ++k)
        {
            const CMatrix &vk = combiner == CentralCombiner::kMMSE ? v[static_cast<std::size_t>(k)] : est.hhat[k];
            per_block[j * k_ues + k] = se_instantaneous(vk, omega, est.hhat[k], precoders[k].f);
        }
    });

    SeEstimate out;
    for (int k = 0; k < k_ues; ++k)
    {
        double sum = 0.0, sum_sq = 0.0;
        for (int j = 0; j < blocks; ++j)
        {
            const double x = per_block[static_cast<std::size_t>(j) * k_ues + k];
            sum += x;
            sum_sq += x * x;
        }
        const double mean = sum / blocks;
        const double var = blocks > 1 ? std::max(0.0, (sum_sq - blocks * mean * mean) / (blocks - 1)) : 0.0;
        out.se.push_back(prelog * mean);
        out.std_error.push_back(prelog * std::sqrt(var / blocks));
    }
    return out;
}

} // namespace cfmimo
