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

#include "cfmimo/channel.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

namespace cfmimo
{

CVector ula_response(int elements, double angle)
{
    CVector a(elements);
    const double step = std::numbers::pi * std::sin(angle);
    for (int i = 0; i < elements; ++i)
        a(i) = std::polar(1.0, step * i);
    return a;
}

CMatrix build_hbar(const LinkGeometry &geom, double beta, double kappa, int l, int n)
{
    if (l < 1 || n < 1)
        throw std::invalid_argument("build_hbar: antenna counts must be >= 1");
    const double amplitude = std::sqrt(kappa * beta / (kappa + 1.0));
    return amplitude * ula_response(l, geom.aod_ap) * ula_response(n, geom.aod_ue).adjoint();
}

CMatrix gen_eigenbasis(int dim, Rng &rng)
{
    if (dim < 1)
        throw std::invalid_argument("gen_eigenbasis: dim must be >= 1");
    const CMatrix g = rng.complex_normal(dim, dim);
    Eigen::HouseholderQR<CMatrix> qr(g);
    CMatrix q = qr.householderQ() * CMatrix::Identity(dim, dim);
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < dim; ++i)
    {
        const double mag = std::abs(r(i, i));
        if (mag > 0.0)
            q.col(i) *= r(i, i) / mag;
    }
    return q;
}

CMatrix gen_eigenbasis(int dim, std::uint64_t seed)
{
    Rng rng(seed);
    return gen_eigenbasis(dim, rng);
}

RMatrix gen_coupling_matrix(int l, int n, double total_power, double eta, Rng &rng)
{
    if (l < 1 || n < 1)
        throw std::invalid_argument("gen_coupling_matrix: dimensions must be >= 1");
    if (!(total_power > 0.0))
        throw std::invalid_argument("gen_coupling_matrix: total_power must be > 0");
    if (!(eta > 0.0 && eta <= 1.0))
        throw std::invalid_argument("gen_coupling_matrix: eta must lie in (0, 1]");

    RMatrix w(l, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < l; ++i)
            w(i, j) = rng.uniform();
    const int dominant = rng.uniform_int(0, n - 1);

    if (n == 1)
        return w * (total_power / w.sum());

    const double dominant_sum = w.col(dominant).sum();
    const double rest_sum = w.sum() - dominant_sum;
    for (int j = 0; j < n; ++j)
    {
        if (j == dominant)
            w.col(j) *= eta * total_power / dominant_sum;
        else
            w.col(j) *= (1.0 - eta) * total_power / rest_sum;
    }
    return w;
}

RMatrix gen_coupling_matrix(int l, int n, double total_power, double eta, std::uint64_t seed)
{
    Rng rng(seed);
    return gen_coupling_matrix(l, n, total_power, eta, rng);
}

CMatrix assemble_full_covariance(const CMatrix &u_r, const CMatrix &u_t, const RMatrix &w)
{
    if (u_r.rows() != u_r.cols() || u_t.rows() != u_t.cols() || w.rows() != u_r.rows() ||
        w.cols() != u_t.rows())
        throw std::invalid_argument("assemble_full_covariance: dimension mismatch");
    const CMatrix basis = kron(u_t.conjugate(), u_r);
    const Eigen::Map<const RVector> weights(w.data(), w.size());
    return basis * weights.cast<cd>().asDiagonal() * basis.adjoint();
}

CMatrix covariance_block(const CMatrix &r_full, int i, int j, int l)
{
    return block_of(r_full, i, j, l);
}

LinkStatistics make_link_statistics(double beta, double kappa, CMatrix hbar, CMatrix u_r, CMatrix u_t, RMatrix w)
{
    LinkStatistics s;
    s.beta = beta;
    s.kappa = kappa;
    s.r_full = assemble_full_covariance(u_r, u_t, w);
    s.hbar = std::move(hbar);
    s.u_r = std::move(u_r);
    s.u_t = std::move(u_t);
    s.w_sqrt = w.cwiseSqrt();
    s.w = std::move(w);
    return s;
}

NetworkStatistics build_network_statistics(const Layout &layout, const StatisticsOptions &options,
                                           std::uint64_t seed)
{
    NetworkStatistics net;
    net.m_aps = static_cast<int>(layout.ap_positions.size());
    net.k_ues = static_cast<int>(layout.ue_positions.size());
    net.l_ant = options.l_ant;
    net.n_ant = options.n_ant;
    net.links.reserve(static_cast<std::size_t>(net.m_aps * net.k_ues));

    const int l = options.l_ant;
    const int n = options.n_ant;
    for (int m = 0; m < net.m_aps; ++m)
    {
        for (int k = 0; k < net.k_ues; ++k)
        {
            Rng rng(derive_seed(seed, Stream::kLinkStatistics,
                                {static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(k)}));
            const LinkGeometry geom = link_geometry(layout, m, k);
            const double d = effective_distance(geom.distance, options.pathloss);
            double beta = large_scale_gain(d, options.pathloss);
            const double shadow_db = options.pathloss.shadow_std_db * rng.normal();
            if (options.pathloss.shadow_std_db > 0.0)
                beta *= std::pow(10.0, shadow_db / 10.0);
            const double kappa = rician_factor(d, options.fading);

            CMatrix u_r = gen_eigenbasis(l, rng);
            CMatrix u_t = gen_eigenbasis(n, rng);
            RMatrix w = gen_coupling_matrix(l, n, l * n * beta / (kappa + 1.0), options.eta, rng);
            CMatrix hbar = build_hbar(geom, beta, kappa, l, n);
            net.links.push_back(make_link_statistics(beta, kappa, std::move(hbar), std::move(u_r),
                                                     std::move(u_t), std::move(w)));
        }
    }
    return net;
}

LinkSample sample_channel(const LinkStatistics &stats, Rng &rng)
{
    const cd phase = rng.unit_phase();
    const CMatrix iid = rng.complex_normal(stats.l(), stats.n());
    CMatrix h = stats.u_r * (stats.w_sqrt.cast<cd>().cwiseProduct(iid)) * stats.u_t.adjoint();
    h += stats.hbar * phase;
    return {std::move(h), phase};
}

ChannelRealization sample_network(const NetworkStatistics &stats, Rng &rng)
{
    ChannelRealization out;
    out.m_aps = stats.m_aps;
    out.k_ues = stats.k_ues;
    out.h.reserve(stats.links.size());
    out.phase.reserve(stats.links.size());
    for (const LinkStatistics &link : stats.links)
    {
        LinkSample sample = sample_channel(link, rng);
        out.h.push_back(std::move(sample.h));
        out.phase.push_back(sample.phase);
    }
    return out;
}

namespace
{

void write_complex(std::ostream &os, const CMatrix &x)
{
    for (Eigen::Index r = 0; r < x.rows(); ++r)
    {
        for (Eigen::Index c = 0; c < x.cols(); ++c)
            os << (c ? " " : "") << x(r, c).real() << ' ' << x(r, c).imag();
        os << '\n';
    }
}

CMatrix read_complex(std::istream &is, int rows, int cols)
{
    CMatrix x(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
        {
            double re = 0.0, im = 0.0;
            is >> re >> im;
            x(r, c) = {re, im};
        }
    return x;
}

constexpr const char *kDumpHeader = "cfmimo-link-statistics-v1";

} // namespace

void write_link_statistics(std::ostream &os, const LinkStatistics &stats)
{
    const auto old_precision = os.precision(17);
    os << kDumpHeader << '\n' << stats.l() << ' ' << stats.n() << '\n';
    os << stats.beta << '\n' << stats.kappa << '\n';
    write_complex(os, stats.hbar);
    write_complex(os, stats.u_r);
    write_complex(os, stats.u_t);
    for (Eigen::Index r = 0; r < stats.w.rows(); ++r)
    {
        for (Eigen::Index c = 0; c < stats.w.cols(); ++c)
            os << (c ? " " : "") << stats.w(r, c);
        os << '\n';
    }
    os.precision(old_precision);
}

LinkStatistics read_link_statistics(std::istream &is)
{
    std::string header;
    is >> header;
    if (header != kDumpHeader)
        throw std::runtime_error("read_link_statistics: unrecognized header '" + header + "'");
    int l = 0, n = 0;
    double beta = 0.0, kappa = 0.0;
    is >> l >> n >> beta >> kappa;
    if (!is || l < 1 || n < 1)
        throw std::runtime_error("read_link_statistics: malformed dimensions");
    CMatrix hbar = read_complex(is, l, n);
    CMatrix u_r = read_complex(is, l, l);
    CMatrix u_t = read_complex(is, n, n);
    RMatrix w(l, n);
    for (int r = 0; r < l; ++r)
        for (int c = 0; c < n; ++c)
            is >> w(r, c);
    if (!is)
        throw std::runtime_error("read_link_statistics: truncated input");
    return make_link_statistics(beta, kappa, std::move(hbar), std::move(u_r), std::move(u_t), std::move(w));
}

} // namespace cfmimo
