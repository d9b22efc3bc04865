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

#ifndef CFMIMO_CHANNEL_HPP
#define CFMIMO_CHANNEL_HPP

#include "cfmimo/geometry.hpp"
#include "cfmimo/linalg.hpp"
#include "cfmimo/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace cfmimo
{

// Second-order statistics of one AP-UE link under Weichselberger Rician fading.
// Immutable once built; r_full follows the column-stacking vec convention, so its
// (i, j) L x L block is E{h_i h_j^H} - hbar_i hbar_j^H for UE antennas i and j.
struct LinkStatistics
{
    double beta = 0.0;
    double kappa = 0.0;
    CMatrix hbar;   // L x N LoS matrix
    CMatrix u_r;    // L x L unitary
    CMatrix u_t;    // N x N unitary
    RMatrix w;      // L x N coupling matrix, nonnegative
    RMatrix w_sqrt; // elementwise square root of w
    CMatrix r_full; // LN x LN

    int l() const { return static_cast<int>(hbar.rows()); }
    int n() const { return static_cast<int>(hbar.cols()); }
};

struct NetworkStatistics
{
    int m_aps = 0;
    int k_ues = 0;
    int l_ant = 0;
    int n_ant = 0;
    std::vector<LinkStatistics> links; // index m * k_ues + k

    const LinkStatistics &link(int m, int k) const { return links.at(static_cast<std::size_t>(m * k_ues + k)); }
};

// Half-wavelength ULA response with unit-modulus entries exp(j pi n sin(angle)).
CVector ula_response(int elements, double angle);

// Rank-one LoS matrix sqrt(kappa beta / (kappa + 1)) a_L(aod_ap) b_N(aod_ue)^H.
CMatrix build_hbar(const LinkGeometry &geom, double beta, double kappa, int l, int n);

// Haar-distributed unitary matrix from the QR factorization of an i.i.d. CN(0,1) matrix with
// the phases of R's diagonal moved into Q.
CMatrix gen_eigenbasis(int dim, Rng &rng);
CMatrix gen_eigenbasis(int dim, std::uint64_t seed);

// I.i.d. U(0,1) entries; one uniformly chosen column carries a fraction `eta` of the total and
// the whole matrix sums to total_power. With a single column, that column carries everything.
RMatrix gen_coupling_matrix(int l, int n, double total_power, double eta, Rng &rng);
RMatrix gen_coupling_matrix(int l, int n, double total_power, double eta, std::uint64_t seed);

// R = (U_t^* kron U_r) diag(vec(W)) (U_t^* kron U_r)^H.
CMatrix assemble_full_covariance(const CMatrix &u_r, const CMatrix &u_t, const RMatrix &w);

// Block (i, j) of r_full, zero-based UE-antenna indices.
CMatrix covariance_block(const CMatrix &r_full, int i, int j, int l);

LinkStatistics make_link_statistics(double beta, double kappa, CMatrix hbar, CMatrix u_r, CMatrix u_t, RMatrix w);

struct StatisticsOptions
{
    int l_ant = 1;
    int n_ant = 1;
    FadingMode fading = FadingMode::kRician;
    PathlossModel pathloss{};
    double eta = 0.7;
};

// Draws the statistics of every link of a layout. Link (m, k) uses its own random stream
// derived from (seed, m, k), so changing M or K does not reshuffle the other links.
NetworkStatistics build_network_statistics(const Layout &layout, const StatisticsOptions &options,
                                           std::uint64_t seed);

struct LinkSample
{
    CMatrix h;
    cd phase;
};

// One coherence block: H = hbar e^{j phi} + U_r (W_sqrt .* H_iid) U_t^H, phi ~ U[-pi, pi).
LinkSample sample_channel(const LinkStatistics &stats, Rng &rng);

// All links of one coherence block. hhat and err are filled by the estimator; the invariant
// hhat + err == h holds exactly because err is computed as h - hhat.
struct ChannelRealization
{
    int m_aps = 0;
    int k_ues = 0;
    std::vector<CMatrix> h;    // index m * k_ues + k, L x N
    std::vector<cd> phase;     // e^{j phi_mk}
    std::vector<CMatrix> hhat; // L x N estimates
    std::vector<CMatrix> err;  // h - hhat

    std::size_t index(int m, int k) const { return static_cast<std::size_t>(m * k_ues + k); }
};

// Draws H_mk and e^{j phi_mk} for every link; hhat and err are left empty.
ChannelRealization sample_network(const NetworkStatistics &stats, Rng &rng);

// Plain-text dump: header, L N, beta, kappa, then hbar, u_r, u_t (complex, row-major, "re im"
// pairs) and w (row-major). Values are written with 17 significant digits.
void write_link_statistics(std::ostream &os, const LinkStatistics &stats);
LinkStatistics read_link_statistics(std::istream &is);

} // namespace cfmimo

#endif
