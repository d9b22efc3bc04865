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

#include "cfmimo/estimation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cfmimo
{

PilotPlan assign_pilots(int k_ues, int n_ant, int tau_p, int tau_c)
{
    if (k_ues < 1 || n_ant < 1)
        throw std::invalid_argument("assign_pilots: K and N must be >= 1");
    if (tau_p < n_ant || tau_p % n_ant != 0)
        throw std::invalid_argument("assign_pilots: tau_p must be a positive multiple of N");
    if (tau_p > tau_c)
        throw std::invalid_argument("assign_pilots: tau_p exceeds tau_c");
    if (tau_p > k_ues * n_ant)
        throw std::invalid_argument("assign_pilots: tau_p exceeds K * N");

    PilotPlan plan;
    plan.tau_p = tau_p;
    plan.n_ant = n_ant;
    const int groups = tau_p / n_ant;
    plan.group_of.resize(static_cast<std::size_t>(k_ues));
    plan.peers.resize(static_cast<std::size_t>(k_ues));
    for (int k = 0; k < k_ues; ++k)
        plan.group_of[k] = k % groups;
    for (int k = 0; k < k_ues; ++k)
        for (int l = 0; l < k_ues; ++l)
            if (plan.group_of[l] == plan.group_of[k])
                plan.peers[k].push_back(l);
    return plan;
}

CMatrix compute_psi(std::span<const CMatrix> r_peers, std::span<const CMatrix> f_tilde_peers, double sigma2,
                    int tau_p)
{
    if (r_peers.size() != f_tilde_peers.size() || r_peers.empty())
        throw std::invalid_argument("compute_psi: need one covariance and one F~ per peer");
    const Eigen::Index dim = r_peers.front().rows();
    CMatrix psi = sigma2 * CMatrix::Identity(dim, dim);
    for (std::size_t i = 0; i < r_peers.size(); ++i)
        psi += static_cast<double>(tau_p) * f_tilde_peers[i] * r_peers[i] * f_tilde_peers[i].adjoint();
    psi = hermitian_part(psi);
    if (sigma2 <= 0.0)
    {
        const double scale = std::max(std::abs(psi.trace().real()), 1e-300);
        if (min_eigenvalue(psi) <= 1e-12 * scale)
            throw std::domain_error("compute_psi: singular Psi (zero noise and rank-deficient covariance)");
    }
    return psi;
}

EstimatorState compute_phi_c(const CMatrix &r_full, const CMatrix &f_tilde, const CMatrix &psi, int tau_p)
{
    if (r_full.rows() != psi.rows() || f_tilde.rows() != psi.rows())
        throw std::invalid_argument("compute_phi_c: dimension mismatch");

    EstimatorState s;
    s.psi = psi;
    const CMatrix fr = f_tilde * r_full;              // F~ R
    const CMatrix x = hermitian_solve(psi, fr, "psi"); // Psi^-1 F~ R
    s.gain = x.adjoint();                             // R F~^H Psi^-1
    s.phi = hermitian_part(static_cast<double>(tau_p) * fr.adjoint() * x);
    s.c = r_full - s.phi;

    const double scale = std::max(std::abs(r_full.trace().real()), 1e-300);
    if (min_eigenvalue(s.phi) < -1e-9 * scale || min_eigenvalue(s.c) < -1e-9 * scale)
        throw std::logic_error("compute_phi_c: estimate or error covariance is not PSD");

    s.phi_sqrt = psd_sqrt(s.phi);
    s.phi_factor = std::sqrt(static_cast<double>(tau_p)) * fr.adjoint() * pd_inverse_sqrt(psi);
    return s;
}

EstimatorBank build_estimators(const NetworkStatistics &stats, std::span<const Precoder> precoders,
                               const PilotPlan &plan, double sigma2)
{
    if (static_cast<int>(precoders.size()) != stats.k_ues || static_cast<int>(plan.group_of.size()) != stats.k_ues)
        throw std::invalid_argument("build_estimators: need one precoder and one pilot per UE");

    EstimatorBank bank;
    bank.m_aps = stats.m_aps;
    bank.k_ues = stats.k_ues;
    bank.l_ant = stats.l_ant;
    bank.n_ant = stats.n_ant;
    bank.sigma2 = sigma2;
    bank.plan = plan;
    for (const Precoder &p : precoders)
    {
        bank.f.push_back(p.f);
        bank.f_tilde.push_back(p.f_tilde(stats.l_ant));
    }

    bank.states.reserve(stats.links.size());
    for (int m = 0; m < stats.m_aps; ++m)
    {
        for (int k = 0; k < stats.k_ues; ++k)
        {
            std::vector<CMatrix> r_peers;
            std::vector<CMatrix> f_peers;
            for (int l : plan.peers[k])
            {
                r_peers.push_back(stats.link(m, l).r_full);
                f_peers.push_back(bank.f_tilde[l]);
            }
            const CMatrix psi = compute_psi(r_peers, f_peers, sigma2, plan.tau_p);
            bank.states.push_back(compute_phi_c(stats.link(m, k).r_full, bank.f_tilde[k], psi, plan.tau_p));
        }
    }
    return bank;
}

std::vector<CVector> despread_pilots(const NetworkStatistics &stats, const EstimatorBank &bank,
                                     const ChannelRealization &channel, Rng &rng)
{
    const int groups = bank.plan.groups();
    const Eigen::Index dim = stats.l_ant * stats.n_ant;
    const double tau_p = bank.plan.tau_p;
    const double noise_std = std::sqrt(tau_p * bank.sigma2);

    std::vector<CVector> y(static_cast<std::size_t>(stats.m_aps * groups), CVector::Zero(dim));
    for (int m = 0; m < stats.m_aps; ++m)
    {
        for (int k = 0; k < stats.k_ues; ++k)
        {
            const CMatrix hf = channel.h[channel.index(m, k)] * bank.f[k];
            y[static_cast<std::size_t>(m * groups + bank.plan.group_of[k])] += tau_p * vec(hf);
        }
        for (int g = 0; g < groups; ++g)
            for (Eigen::Index i = 0; i < dim; ++i)
                y[static_cast<std::size_t>(m * groups + g)](i) += noise_std * rng.complex_normal();
    }
    return y;
}

void mmse_estimate(const NetworkStatistics &stats, const EstimatorBank &bank,
                   std::span<const CVector> observations, ChannelRealization &channel)
{
    const int groups = bank.plan.groups();
    const double tau_p = bank.plan.tau_p;
    const int l = stats.l_ant;
    const int n = stats.n_ant;
    channel.hhat.assign(stats.links.size(), CMatrix());
    channel.err.assign(stats.links.size(), CMatrix());

    for (int m = 0; m < stats.m_aps; ++m)
    {
        // LoS contribution of every pilot group at this AP, with the known phases.
        std::vector<CVector> los(static_cast<std::size_t>(groups), CVector::Zero(l * n));
        for (int k = 0; k < stats.k_ues; ++k)
        {
            const CMatrix mean_hf = stats.link(m, k).hbar * bank.f[k] * channel.phase[channel.index(m, k)];
            los[static_cast<std::size_t>(bank.plan.group_of[k])] += tau_p * vec(mean_hf);
        }
        for (int k = 0; k < stats.k_ues; ++k)
        {
            const std::size_t idx = channel.index(m, k);
            const int g = bank.plan.group_of[k];
            const CVector innovation = observations[static_cast<std::size_t>(m * groups + g)] - los[static_cast<std::size_t>(g)];
            const CVector est = vec(stats.link(m, k).hbar) * channel.phase[idx] + bank.at(m, k).gain * innovation;
            channel.hhat[idx] = unvec(est, l, n);
            channel.err[idx] = channel.h[idx] - channel.hhat[idx];
        }
    }
}

ChannelRealization draw_block(const NetworkStatistics &stats, const EstimatorBank &bank, Rng &rng)
{
    ChannelRealization channel = sample_network(stats, rng);
    const std::vector<CVector> y = despread_pilots(stats, bank, channel, rng);
    mmse_estimate(stats, bank, y, channel);
    return channel;
}

} // namespace cfmimo
