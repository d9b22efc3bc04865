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

#ifndef CFMIMO_LSFD_HPP
#define CFMIMO_LSFD_HPP

#include "cfmimo/centralized.hpp"
#include "cfmimo/channel.hpp"
#include "cfmimo/estimation.hpp"
#include "cfmimo/linalg.hpp"
#include "cfmimo/precoding.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace cfmimo
{

enum class LocalCombiner
{
    kMR,
    kLMMSE,
};

// V_mk = Hhat_mk.
CMatrix local_mr(const CMatrix &hhat_mk);

// V_mk = (sum_l (Hhat_ml F_hat_l Hhat_ml^H + C'_ml) + sigma2 I_L)^-1 Hhat_mk F_k for every UE at AP m.
std::vector<CMatrix> local_lmmse(const ChannelRealization &channel, int m, const ErrorCovariances &cprime,
                                 std::span<const Precoder> precoders, double sigma2);

// Local combiners of every link of a block, index m * K + k.
std::vector<CMatrix> local_combiners(const ChannelRealization &channel, LocalCombiner combiner,
                                     const ErrorCovariances &cprime, std::span<const Precoder> precoders,
                                     double sigma2);

// Second-layer statistics for every UE. For UE k, with G_kl stacking V_mk^H H_ml over APs:
//   e_gkk[k]        = E{G_kk}                       (MN x N)
//   theta[k * K + l] = E{G_kl F_hat_l G_kl^H}        (MN x MN)
//   s[k]            = blockdiag_m E{V_mk^H V_mk}    (MN x MN)
// The *_se members hold per-entry standard errors of Monte Carlo estimates: the real part of each
// entry is the standard error of the real part, likewise for the imaginary part. They are empty
// for closed-form statistics.
struct LsfdStatistics
{
    int m_aps = 0;
    int k_ues = 0;
    int n_ant = 0;
    long blocks = 0;
    std::vector<CMatrix> e_gkk;
    std::vector<CMatrix> theta;
    std::vector<CMatrix> s;
    std::vector<CMatrix> e_gkk_se;
    std::vector<CMatrix> theta_se;
    std::vector<CMatrix> s_se;

    const CMatrix &theta_at(int k, int l) const { return theta.at(static_cast<std::size_t>(k * k_ues + l)); }
    CMatrix theta_sum(int k) const;
};

// Sample means over independent coherence blocks; block j draws from the stream derived from
// (seed, j), and partial sums are merged in a fixed order.
LsfdStatistics lsfd_expectations_mc(const NetworkStatistics &stats, const EstimatorBank &bank,
                                    const ErrorCovariances &cprime, std::span<const Precoder> precoders,
                                    LocalCombiner combiner, long blocks, std::uint64_t seed);

// A_k = (sum_l Theta_kl + sigma2 S_k)^-1 E{G_kk} F_k, returned as the MN x N stack of A_mk.
CMatrix optimal_lsfd_weights(const LsfdStatistics &stats, int k, const CMatrix &f_k, double sigma2);

// Equal weights (1/M) I_N per AP: the CPU averages the local estimates.
CMatrix csd_weights(int m_aps, int n_ant);

// Use-and-then-forget bound for weights `a` (MN x N): prelog * log2|I + D^H Sigma^-1 D| with
// D = a^H E{G_kk} F_k and Sigma = a^H (sum_l Theta_kl + sigma2 S_k) a - D D^H.
double se_lsfd(const LsfdStatistics &stats, int k, const CMatrix &a, const CMatrix &f_k, double sigma2,
               double prelog);

// The same bound at the optimal weights, written without the weights:
// D' = E{G_kk} F_k and Sigma' = sum_l Theta_kl + sigma2 S_k - D' D'^H.
double se_lsfd_optimal(const LsfdStatistics &stats, int k, const CMatrix &f_k, double sigma2, double prelog);

// Square root of Phi_mk used to expand the MR closed form.
enum class RootConvention
{
    // sqrt(tau_p) R F~^H Psi^{-1/2}: estimates of UEs sharing a pilot are driven by one common
    // whitened observation, so cross-UE moments are reproduced exactly.
    kPilotWhitened,
    // Hermitian principal root of each Phi_mk on its own. Exact without pilot sharing only.
    kHermitian,
};

// [Z_mk]_ij = tr(Phi_mk^{ji} + hbar_mkj hbar_mki^H) = E{Hhat_mk^H Hhat_mk}, index m * K + k.
std::vector<CMatrix> closed_form_z(const NetworkStatistics &stats, const EstimatorBank &bank);

// Theta_kl for MR combining, index k * K + l. Off-diagonal AP blocks are Gamma_kl^{mn}, diagonal
// blocks Gamma_kl^{mm} + T_kl^m, with the case split on l (no pilot sharing, sharing UE, l = k).
std::vector<CMatrix> closed_form_theta(const NetworkStatistics &stats, const EstimatorBank &bank,
                                       std::span<const Precoder> precoders,
                                       RootConvention root = RootConvention::kPilotWhitened);

// Closed-form LSFD statistics for MR combining: e_gkk stacks Z_mk, s is blockdiag(Z_1k..Z_Mk).
LsfdStatistics closed_form_statistics(const NetworkStatistics &stats, const EstimatorBank &bank,
                                      std::span<const Precoder> precoders,
                                      RootConvention root = RootConvention::kPilotWhitened);

struct LsfdSeResult
{
    std::vector<double> se;       // per UE
    std::vector<CMatrix> weights; // per UE, MN x N
};

// SE of every UE with optimal weights, computed from closed-form statistics. Only MR combining
// admits a closed form; other combiners are rejected.
LsfdSeResult se_lsfd_closed_form(LocalCombiner combiner, const LsfdStatistics &closed, std::span<const Precoder> precoders,
                                 double sigma2, double prelog);

} // namespace cfmimo

#endif
