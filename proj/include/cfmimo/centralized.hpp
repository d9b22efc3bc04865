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

#ifndef CFMIMO_CENTRALIZED_HPP
#define CFMIMO_CENTRALIZED_HPP

#include "cfmimo/channel.hpp"
#include "cfmimo/estimation.hpp"
#include "cfmimo/linalg.hpp"
#include "cfmimo/precoding.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace cfmimo
{

// [C']_ij = sum_a sum_b [F_hat]_ba [C^{ba}]_ij, i.e. E{E F_hat E^H} for an error matrix E whose
// column-stacked covariance is c_full.
CMatrix weighted_error_cov(const CMatrix &c_full, const CMatrix &f_hat, int l);

// C'_ml for every (AP, UE) pair. These depend on statistics only.
struct ErrorCovariances
{
    int m_aps = 0;
    int k_ues = 0;
    int l_ant = 0;
    std::vector<CMatrix> blocks; // index m * k_ues + l, L x L
    std::vector<CMatrix> per_ap; // sum over l of C'_ml, one per AP

    const CMatrix &at(int m, int l) const { return blocks.at(static_cast<std::size_t>(m * k_ues + l)); }
    // ML x ML block diagonal C'_l.
    CMatrix aggregate(int l) const;
    // ML x ML block diagonal sum_l C'_l.
    CMatrix total() const;
};

ErrorCovariances build_error_covariances(const EstimatorBank &bank, std::span<const Precoder> precoders);

// Per-block collective channel estimates: hhat[k] stacks Hhat_1k, ..., Hhat_Mk into ML x N.
struct CollectiveEstimate
{
    std::vector<CMatrix> hhat;
    CMatrix cprime_total; // sum_l C'_l
};

CollectiveEstimate collect(const ChannelRealization &channel, const ErrorCovariances &cprime, int l_ant,
                           int n_ant);

enum class CentralCombiner
{
    kMR,
    kMMSE,
};

CMatrix mr_combiner(const CollectiveEstimate &est, int k);

// sum_l (Hhat_l F_hat_l Hhat_l^H) + sum_l C'_l + sigma2 I.
CMatrix received_covariance(const CollectiveEstimate &est, std::span<const Precoder> precoders, double sigma2);

// V_k = (sum_l Hhat_l F_hat_l Hhat_l^H + sum_l C'_l + sigma2 I)^-1 Hhat_k F_k for every k.
std::vector<CMatrix> mmse_combiners(const CollectiveEstimate &est, std::span<const Precoder> precoders,
                                    double sigma2);

// log2 |I + D^H Sigma^-1 D| with D = V^H Hhat_k F_k and Sigma = V^H Omega V - D D^H, where
// omega is received_covariance(). No pre-log factor.
double se_instantaneous(const CMatrix &v, const CMatrix &omega, const CMatrix &hhat_k, const CMatrix &f_k);

// Same bound evaluated at the optimal combiner: log2 |I + D'^H Sigma'^-1 D'| with D' = Hhat_k F_k
// and Sigma' = omega - D' D'^H.
double se_instantaneous_optimal(const CMatrix &omega, const CMatrix &hhat_k, const CMatrix &f_k);

struct SeEstimate
{
    std::vector<double> se;     // per UE, bits/s/Hz, pre-log applied
    std::vector<double> std_error; // standard error of each mean
};

// Monte Carlo average of the instantaneous bound over `blocks` coherence blocks. Block j draws
// from its own stream derived from (seed, j).
SeEstimate se_centralized(const NetworkStatistics &stats, const EstimatorBank &bank, const ErrorCovariances &cprime,
                          std::span<const Precoder> precoders, CentralCombiner combiner, int blocks,
                          std::uint64_t seed, double prelog);

} // namespace cfmimo

#endif
