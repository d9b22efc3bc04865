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

#include "cfmimo/lsfd.hpp"

#include "cfmimo/parallel.hpp"
#include "cfmimo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cfmimo
{

CMatrix local_mr(const CMatrix &hhat_mk)
{
    return hhat_mk;
}

std::vector<CMatrix> local_lmmse(const ChannelRealization &channel, int m, const ErrorCovariances &cprime,
                                 std::span<const Precoder> precoders, double sigma2)
{
    if (!(sigma2 > 0.0))
        throw std::invalid_argument("local_lmmse: sigma2 must be > 0");
    CMatrix omega = cprime.per_ap.at(static_cast<std::size_t>(m));
    omega.diagonal().array() += sigma2;
    for (int l = 0; l < channel.k_ues; ++l)
    {
        const CMatrix hf = channel.hhat[channel.index(m, l)] * precoders[l].f;
        omega.noalias() += hf * hf.adjoint();
    }
    omega = hermitian_part(omega);
    Eigen::LLT<CMatrix> llt(omega);
    std::vector<CMatrix> out;
    out.reserve(static_cast<std::size_t>(channel.k_ues));
    for (int k = 0; k < channel.k_ues; ++k)
    {
        const CMatrix rhs = channel.hhat[channel.index(m, k)] * precoders[k].f;
        out.push_back(llt.info() == Eigen::Success ? CMatrix(llt.solve(rhs))
                                                   : hermitian_solve(omega, rhs, "local_lmmse"));
    }
    return out;
}

std::vector<CMatrix> local_combiners(const ChannelRealization &channel, LocalCombiner combiner,
                                     const ErrorCovariances &cprime, std::span<const Precoder> precoders,
                                     double sigma2)
{
    if (combiner == LocalCombiner::kMR)
    {
        std::vector<CMatrix> out;
        out.reserve(channel.hhat.size());
        for (const CMatrix &h : channel.hhat)
            out.push_back(local_mr(h));
        return out;
    }
    std::vector<CMatrix> out(channel.hhat.size());
    for (int m = 0; m < channel.m_aps; ++m)
    {
        std::vector<CMatrix> v = local_lmmse(channel, m, cprime, precoders, sigma2);
        for (int k = 0; k < channel.k_ues; ++k)
            out[channel.index(m, k)] = std::move(v[static_cast<std::size_t>(k)]);
    }
    return out;
}

CMatrix LsfdStatistics::theta_sum(int k) const
{
    CMatrix sum = theta_at(k, 0);
    for (int l = 1; l < k_ues; ++l)
        sum += theta_at(k, l);
    return sum;
}

namespace
{

// Running sums of a set of matrices and of their component-wise squares.
struct MomentSums
{
    std::vector<CMatrix> sum;
    std::vector<CMatrix> sq;

    void init(std::size_t count, Eigen::Index rows, Eigen::Index cols)
    {
        sum.assign(count, CMatrix::Zero(rows, cols));
        sq.assign(count, CMatrix::Zero(rows, cols));
    }

    void add(std::size_t i, const CMatrix &x)
    {
        sum[i] += x;
        sq[i].real() += x.real().cwiseAbs2();
        sq[i].imag() += x.imag().cwiseAbs2();
    }

    void merge(const MomentSums &other)
    {
        for (std::size_t i = 0; i < sum.size(); ++i)
        {
            sum[i] += other.sum[i];
            sq[i] += other.sq[i];
        }
    }

    void finish(long n, std::vector<CMatrix> &mean, std::vector<CMatrix> &se) const
    {
        mean.clear();
        se.clear();
        const double dn = static_cast<double>(n);
        for (std::size_t i = 0; i < sum.size(); ++i)
        {
            const CMatrix mu = sum[i] / dn;
            CMatrix err(mu.rows(), mu.cols());
            auto component_se = [&](double s, double q) {
                if (n < 2)
                    return 0.0;
                const double var = std::max(0.0, (q - dn * (s / dn) * (s / dn)) / (dn - 1.0));
                return std::sqrt(var / dn);
            };
            for (Eigen::Index r = 0; r < mu.rows(); ++r)
                for (Eigen::Index c = 0; c < mu.cols(); ++c)
                    err(r, c) = {component_se(sum[i](r, c).real(), sq[i](r, c).real()),
                                 component_se(sum[i](r, c).imag(), sq[i](r, c).imag())};
            mean.push_back(mu);
            se.push_back(err);
        }
    }
};

struct LsfdSums
{
    MomentSums gkk;
    MomentSums theta;
    MomentSums s;
};

constexpr long kChunkBlocks = 256;

} // namespace

LsfdStatistics lsfd_expectations_mc(const NetworkStatistics &stats, const EstimatorBank &bank,
                                    const ErrorCovariances &cprime, std::span<const Precoder> precoders,
                                    LocalCombiner combiner, long blocks, std::uint64_t seed)
{
    if (blocks < 1)
        throw std::invalid_argument("lsfd_expectations_mc: blocks must be >= 1");
    const int m_aps = stats.m_aps;
    const int k_ues = stats.k_ues;
    const int n = stats.n_ant;
    const int mn = m_aps * n;

    auto fresh = [&] {
        LsfdSums sums;
        sums.gkk.init(static_cast<std::size_t>(k_ues), mn, n);
        sums.theta.init(static_cast<std::size_t>(k_ues * k_ues), mn, mn);
        sums.s.init(static_cast<std::size_t>(k_ues), mn, mn);
        return sums;
    };

    auto run_chunk = [&](long chunk, LsfdSums &sums) {
        const long first = chunk * kChunkBlocks;
        const long last = std::min(blocks, first + kChunkBlocks);
        std::vector<CMatrix> g(static_cast<std::size_t>(m_aps * k_ues * k_ues));
        CMatrix stacked(mn, n);
        CMatrix s_block = CMatrix::Zero(mn, mn);
        for (long j = first; j < last; ++j)
        {
            Rng rng(derive_seed(seed, Stream::kLsfdBlock, {static_cast<std::uint64_t>(j)}));
            const ChannelRealization channel = draw_block(stats, bank, rng);
            const std::vector<CMatrix> v = local_combiners(channel, combiner, cprime, precoders, bank.sigma2);

            for (int m = 0; m < m_aps; ++m)
                for (int k = 0; k < k_ues; ++k)
                    for (int l = 0; l < k_ues; ++l)
                        g[static_cast<std::size_t>((m * k_ues + k) * k_ues + l)] =
                            v[channel.index(m, k)].adjoint() * channel.h[channel.index(m, l)];

            for (int k = 0; k < k_ues; ++k)
            {
                for (int l = 0; l < k_ues; ++l)
                {
                    for (int m = 0; m < m_aps; ++m)
                        stacked.block(m * n, 0, n, n) = g[static_cast<std::size_t>((m * k_ues + k) * k_ues + l)];
                    if (l == k)
                        sums.gkk.add(static_cast<std::size_t>(k), stacked);
                    sums.theta.add(static_cast<std::size_t>(k * k_ues + l),
                                   stacked * precoders[l].f_hat * stacked.adjoint());
                }
                for (int m = 0; m < m_aps; ++m)
                {
                    const CMatrix &vk = v[channel.index(m, k)];
                    s_block.block(m * n, m * n, n, n) = vk.adjoint() * vk;
                }
                sums.s.add(static_cast<std::size_t>(k), s_block);
            }
        }
    };

    const long chunks = (blocks + kChunkBlocks - 1) / kChunkBlocks;
    const long wave = std::max(1, worker_count());
    LsfdSums total = fresh();
    for (long start = 0; start < chunks; start += wave)
    {
        const long count = std::min(wave, chunks - start);
        std::vector<LsfdSums> partial(static_cast<std::size_t>(count));
        parallel_for(static_cast<std::size_t>(count), [&](std::size_t i) {
            partial[i] = fresh();
            run_chunk(start + static_cast<long>(i), partial[i]);
        });
        for (const LsfdSums &p : partial)
        {
            total.gkk.merge(p.gkk);
            total.theta.merge(p.theta);
            total.s.merge(p.s);
        }
    }

    LsfdStatistics out;
    out.m_aps = m_aps;
    out.k_ues = k_ues;
    out.n_ant = n;
    out.blocks = blocks;
    total.gkk.finish(blocks, out.e_gkk, out.e_gkk_se);
    total.theta.finish(blocks, out.theta, out.theta_se);
    total.s.finish(blocks, out.s, out.s_se);
    for (CMatrix &t : out.theta)
        t = hermitian_part(t);
    for (CMatrix &t : out.s)
        t = hermitian_part(t);
    return out;
}

CMatrix optimal_lsfd_weights(const LsfdStatistics &stats, int k, const CMatrix &f_k, double sigma2)
{
    CMatrix omega = stats.theta_sum(k) + sigma2 * stats.s.at(static_cast<std::size_t>(k));
    return hermitian_solve(hermitian_part(omega), stats.e_gkk.at(static_cast<std::size_t>(k)) * f_k, "lsfd_weights");
}

CMatrix csd_weights(int m_aps, int n_ant)
{
    CMatrix a(m_aps * n_ant, n_ant);
    for (int m = 0; m < m_aps; ++m)
        a.block(m * n_ant, 0, n_ant, n_ant) = CMatrix::Identity(n_ant, n_ant) / static_cast<double>(m_aps);
    return a;
}

double se_lsfd(const LsfdStatistics &stats, int k, const CMatrix &a, const CMatrix &f_k, double sigma2,
               double prelog)
{
    const CMatrix omega = stats.theta_sum(k) + sigma2 * stats.s.at(static_cast<std::size_t>(k));
    const CMatrix d = a.adjoint() * stats.e_gkk.at(static_cast<std::size_t>(k)) * f_k;
    const CMatrix sigma = hermitian_part(a.adjoint() * omega * a - d * d.adjoint());
    return prelog * log2det_bound(d, sigma);
}

double se_lsfd_optimal(const LsfdStatistics &stats, int k, const CMatrix &f_k, double sigma2, double prelog)
{
    const CMatrix omega = stats.theta_sum(k) + sigma2 * stats.s.at(static_cast<std::size_t>(k));
    const CMatrix d = stats.e_gkk.at(static_cast<std::size_t>(k)) * f_k;
    const CMatrix sigma = hermitian_part(omega - d * d.adjoint());
    return prelog * log2det_bound(d, sigma);
}

std::vector<CMatrix> closed_form_z(const NetworkStatistics &stats, const EstimatorBank &bank)
{
    const int l_ant = stats.l_ant;
    const int n = stats.n_ant;
    std::vector<CMatrix> out;
    out.reserve(stats.links.size());
    for (int m = 0; m < stats.m_aps; ++m)
    {
        for (int k = 0; k < stats.k_ues; ++k)
        {
            const CMatrix &hbar = stats.link(m, k).hbar;
            const CMatrix &phi = bank.at(m, k).phi;
            CMatrix z(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    z(i, j) = phi.block(j * l_ant, i * l_ant, l_ant, l_ant).trace() +
                              hbar.col(i).dot(hbar.col(j));
            out.push_back(z);
        }
    }
    return out;
}

namespace
{

const CMatrix &root_of(const EstimatorState &s, RootConvention root)
{
    return root == RootConvention::kPilotWhitened ? s.phi_factor : s.phi_sqrt;
}

// N x N matrix of block traces: out(p, q) = tr(X^{pq}) for an LN x LN matrix X.
CMatrix block_traces(const CMatrix &x, int l_ant, int n)
{
    CMatrix out(n, n);
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
            out(p, q) = x.block(p * l_ant, q * l_ant, l_ant, l_ant).trace();
    return out;
}

} // namespace

// The expansion writes each estimate as hbar e^{j phi} + sum_u root^{iu} x^u, and the block with
// swapped upper indices, root^{ui}, stands for (root^{iu})^H. Sums over u of products of root
// blocks are therefore blocks of root products:
//   sum_u tr(root_k^{ui} root_l^{bu})          = tr([root_l root_k^H]^{bi})
//   sum_u root_l^{bu} root_l^{ua}              = [root_l root_l^H]^{ba}
//   sum_u root_k^{ju} root_k^{ui}              = [root_k root_k^H]^{ji}
std::vector<CMatrix> closed_form_theta(const NetworkStatistics &stats, const EstimatorBank &bank,
                                       std::span<const Precoder> precoders, RootConvention root)
{
    const int m_aps = stats.m_aps;
    const int k_ues = stats.k_ues;
    const int l_ant = stats.l_ant;
    const int n = stats.n_ant;
    const PilotPlan &plan = bank.plan;

    std::vector<CMatrix> out;
    out.reserve(static_cast<std::size_t>(k_ues * k_ues));
    for (int k = 0; k < k_ues; ++k)
    {
        for (int l = 0; l < k_ues; ++l)
        {
            const bool same_ue = l == k;
            const bool shares = plan.shares_pilot(k, l);
            const CMatrix &f_hat = precoders[l].f_hat;

            // Per-AP factors of gamma: left(i, b) pairs the estimate of UE k with the channel of
            // UE l at AP m, right(a, j) the channel of UE l with the estimate of UE k at AP n.
            std::vector<CMatrix> left(static_cast<std::size_t>(m_aps), CMatrix::Zero(n, n));
            std::vector<CMatrix> right(static_cast<std::size_t>(m_aps), CMatrix::Zero(n, n));
            if (shares)
            {
                for (int m = 0; m < m_aps; ++m)
                {
                    const CMatrix &root_k = root_of(bank.at(m, k), root);
                    const CMatrix &root_l = root_of(bank.at(m, l), root);
                    const CMatrix nlos_left = block_traces(root_l * root_k.adjoint(), l_ant, n).transpose();
                    const CMatrix nlos_right = block_traces(root_k * root_l.adjoint(), l_ant, n).transpose();
                    left[m] = nlos_left;   // (i, b)
                    right[m] = nlos_right; // (a, j)
                    if (same_ue)
                    {
                        const CMatrix &hbar_k = stats.link(m, k).hbar;
                        left[m] += hbar_k.adjoint() * stats.link(m, l).hbar; // hbar_ki^H hbar_lb
                        right[m] += stats.link(m, l).hbar.adjoint() * hbar_k; // hbar_la^H hbar_kj
                    }
                }
            }

            CMatrix theta = CMatrix::Zero(m_aps * n, m_aps * n);
            for (int m = 0; m < m_aps; ++m)
                for (int nn = 0; nn < m_aps; ++nn)
                    if (shares)
                        theta.block(m * n, nn * n, n, n) = left[m] * f_hat * right[nn];

            for (int m = 0; m < m_aps; ++m)
            {
                const LinkStatistics &lk = stats.link(m, k);
                const LinkStatistics &ll = stats.link(m, l);
                const CMatrix &root_k = root_of(bank.at(m, k), root);
                const CMatrix &root_l = root_of(bank.at(m, l), root);
                const CMatrix gram_k = root_k * root_k.adjoint();
                const CMatrix gram_l = root_l * root_l.adjoint();
                const CMatrix &phi_k = bank.at(m, k).phi;
                const CMatrix &c_l = bank.at(m, l).c;
                const CMatrix los_kl = lk.hbar.adjoint() * ll.hbar; // (i, b) -> hbar_ki^H hbar_lb

                CMatrix t_block = CMatrix::Zero(n, n);
                for (int i = 0; i < n; ++i)
                {
                    for (int j = 0; j < n; ++j)
                    {
                        cd acc = 0.0;
                        const CMatrix phi_ji = phi_k.block(j * l_ant, i * l_ant, l_ant, l_ant);
                        const CMatrix gram_k_ji = gram_k.block(j * l_ant, i * l_ant, l_ant, l_ant);
                        const CMatrix los_k_ji = lk.hbar.col(j) * lk.hbar.col(i).adjoint();
                        for (int a = 0; a < n; ++a)
                        {
                            for (int b = 0; b < n; ++b)
                            {
                                const CMatrix c_ba = c_l.block(b * l_ant, a * l_ant, l_ant, l_ant);
                                const CMatrix gram_l_ba = gram_l.block(b * l_ant, a * l_ant, l_ant, l_ant);
                                const cd los4 = los_kl(i, b) * std::conj(los_kl(j, a));

                                cd t = ((los_k_ji + phi_ji) * c_ba).trace();
                                t += lk.hbar.col(i).dot(gram_l_ba * lk.hbar.col(j));
                                t += ll.hbar.col(a).dot(gram_k_ji * ll.hbar.col(b));
                                if (!shares)
                                    t += (phi_ji * gram_l_ba).trace() + los4;
                                else if (!same_ue)
                                    t += (gram_k_ji * gram_l_ba).trace() + los4;
                                else
                                    t += (gram_k_ji * gram_l_ba).trace();
                                acc += f_hat(b, a) * t;
                            }
                        }
                        t_block(i, j) = acc;
                    }
                }
                theta.block(m * n, m * n, n, n) += t_block;
            }
            out.push_back(theta);
        }
    }
    return out;
}

LsfdStatistics closed_form_statistics(const NetworkStatistics &stats, const EstimatorBank &bank,
                                      std::span<const Precoder> precoders, RootConvention root)
{
    const int m_aps = stats.m_aps;
    const int n = stats.n_ant;
    const std::vector<CMatrix> z = closed_form_z(stats, bank);

    LsfdStatistics out;
    out.m_aps = m_aps;
    out.k_ues = stats.k_ues;
    out.n_ant = n;
    for (int k = 0; k < stats.k_ues; ++k)
    {
        CMatrix stacked(m_aps * n, n);
        CMatrix s = CMatrix::Zero(m_aps * n, m_aps * n);
        for (int m = 0; m < m_aps; ++m)
        {
            const CMatrix &zmk = z[static_cast<std::size_t>(m * stats.k_ues + k)];
            stacked.block(m * n, 0, n, n) = zmk;
            s.block(m * n, m * n, n, n) = zmk;
        }
        out.e_gkk.push_back(stacked);
        out.s.push_back(s);
    }
    out.theta = closed_form_theta(stats, bank, precoders, root);
    return out;
}

LsfdSeResult se_lsfd_closed_form(LocalCombiner combiner, const LsfdStatistics &closed,
                                 std::span<const Precoder> precoders, double sigma2, double prelog)
{
    if (combiner != LocalCombiner::kMR)
        throw std::invalid_argument("se_lsfd_closed_form: closed-form SE exists for MR combining only");
    LsfdSeResult out;
    for (int k = 0; k < closed.k_ues; ++k)
    {
        const CMatrix &f_k = precoders[k].f;
        CMatrix a = optimal_lsfd_weights(closed, k, f_k, sigma2);
        out.se.push_back(se_lsfd(closed, k, a, f_k, sigma2, prelog));
        out.weights.push_back(std::move(a));
    }
    return out;
}

} // namespace cfmimo
