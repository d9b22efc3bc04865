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

#ifndef CFMIMO_ESTIMATION_HPP
#define CFMIMO_ESTIMATION_HPP

#include "cfmimo/channel.hpp"
#include "cfmimo/linalg.hpp"
#include "cfmimo/precoding.hpp"
#include "cfmimo/rng.hpp"

#include <span>
#include <vector>

namespace cfmimo
{

// UEs sharing a pilot matrix form a group; peers[k] lists the group of UE k in increasing
// order, including k itself.
struct PilotPlan
{
    int tau_p = 0;
    int n_ant = 0;
    std::vector<int> group_of;
    std::vector<std::vector<int>> peers;

    int groups() const { return tau_p / n_ant; }
    bool shares_pilot(int k, int l) const { return group_of.at(k) == group_of.at(l); }
};

// Round-robin assignment of K UEs to tau_p / N mutually orthogonal pilot matrices.
PilotPlan assign_pilots(int k_ues, int n_ant, int tau_p, int tau_c);

// Psi = sum_l tau_p F~_l R_l F~_l^H + sigma2 I over the UEs of one pilot group. With this
// normalization the despread observation has covariance tau_p * Psi.
CMatrix compute_psi(std::span<const CMatrix> r_peers, std::span<const CMatrix> f_tilde_peers, double sigma2,
                    int tau_p);

// Phase-aware MMSE estimator of one link, computed from statistics only.
struct EstimatorState
{
    CMatrix psi;        // LN x LN
    CMatrix gain;       // R F~^H Psi^-1, applied to the LoS-compensated observation
    CMatrix phi;        // covariance of the estimate given the phases
    CMatrix c;          // error covariance, r_full - phi
    CMatrix phi_sqrt;   // Hermitian principal square root of phi
    CMatrix phi_factor; // sqrt(tau_p) R F~^H Psi^{-1/2}; phi_factor phi_factor^H = phi

    // L x L block (i, u) of the given root, zero-based.
    static CMatrix root_block(const CMatrix &root, int i, int u, int l) { return block_of(root, i, u, l); }
};

EstimatorState compute_phi_c(const CMatrix &r_full, const CMatrix &f_tilde, const CMatrix &psi, int tau_p);

struct EstimatorBank
{
    int m_aps = 0;
    int k_ues = 0;
    int l_ant = 0;
    int n_ant = 0;
    double sigma2 = 0.0;
    PilotPlan plan;
    std::vector<CMatrix> f;       // precoders F_k
    std::vector<CMatrix> f_tilde; // F~_k
    std::vector<EstimatorState> states; // index m * k_ues + k

    const EstimatorState &at(int m, int k) const { return states.at(static_cast<std::size_t>(m * k_ues + k)); }
};

EstimatorBank build_estimators(const NetworkStatistics &stats, std::span<const Precoder> precoders,
                               const PilotPlan &plan, double sigma2);

// Despread pilot observations vec(Y_m P_k^H), one per (AP, pilot group), index m * groups + g.
// Empty groups yield pure noise.
std::vector<CVector> despread_pilots(const NetworkStatistics &stats, const EstimatorBank &bank,
                                     const ChannelRealization &channel, Rng &rng);

// Fills channel.hhat and channel.err from the observations. The pilot-sharing UEs' LoS
// means (with their known phases) are removed before the gain is applied.
void mmse_estimate(const NetworkStatistics &stats, const EstimatorBank &bank,
                   std::span<const CVector> observations, ChannelRealization &channel);

// Channels, pilots and estimates of one coherence block.
ChannelRealization draw_block(const NetworkStatistics &stats, const EstimatorBank &bank, Rng &rng);

} // namespace cfmimo

#endif
