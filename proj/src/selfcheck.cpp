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

#include "cfmimo/selfcheck.hpp"

#include "cfmimo/centralized.hpp"
#include "cfmimo/estimation.hpp"
#include "cfmimo/lsfd.hpp"
#include "cfmimo/precoding.hpp"
#include "cfmimo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace cfmimo
{

NetworkStatistics random_statistics(int m_aps, int k_ues, int l_ant, int n_ant, FadingMode fading,
                                    std::uint64_t seed, CovarianceShape shape)
{
    NetworkStatistics net;
    net.m_aps = m_aps;
    net.k_ues = k_ues;
    net.l_ant = l_ant;
    net.n_ant = n_ant;
    for (int m = 0; m < m_aps; ++m)
    {
        for (int k = 0; k < k_ues; ++k)
        {
            Rng rng(derive_seed(seed, Stream::kTest, {static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(k)}));
            const double beta = std::pow(10.0, rng.uniform(-1.0, 0.0));
            const double kappa = fading == FadingMode::kRician ? rng.uniform(0.5, 5.0) : 0.0;
            LinkGeometry geom;
            geom.aod_ap = rng.uniform(-std::numbers::pi, std::numbers::pi);
            geom.aod_ue = rng.uniform(-std::numbers::pi, std::numbers::pi);
            const double nlos_power = l_ant * n_ant * beta / (kappa + 1.0);

            CMatrix u_r = CMatrix::Identity(l_ant, l_ant);
            CMatrix u_t = CMatrix::Identity(n_ant, n_ant);
            RMatrix w;
            switch (shape)
            {
            case CovarianceShape::kWeichselberger:
                u_r = gen_eigenbasis(l_ant, rng);
                u_t = gen_eigenbasis(n_ant, rng);
                w = gen_coupling_matrix(l_ant, n_ant, nlos_power, 0.7, rng);
                break;
            case CovarianceShape::kDiagonal:
                w = gen_coupling_matrix(l_ant, n_ant, nlos_power, 0.7, rng);
                break;
            case CovarianceShape::kKronecker:
            {
                u_r = gen_eigenbasis(l_ant, rng);
                u_t = gen_eigenbasis(n_ant, rng);
                RVector a(l_ant), b(n_ant);
                for (int i = 0; i < l_ant; ++i)
                    a(i) = rng.uniform(0.1, 1.0);
                for (int j = 0; j < n_ant; ++j)
                    b(j) = rng.uniform(0.1, 1.0);
                w = a * b.transpose();
                w *= nlos_power / w.sum();
                break;
            }
            }
            net.links.push_back(make_link_statistics(beta, kappa, build_hbar(geom, beta, kappa, l_ant, n_ant),
                                                     std::move(u_r), std::move(u_t), std::move(w)));
        }
    }
    return net;
}

namespace
{

// Entrywise running moments of a matrix-valued sample.
struct EntryMoments
{
    CMatrix sum;
    CMatrix sq;
    long n = 0;

    void add(const CMatrix &x)
    {
        if (n == 0)
        {
            sum = CMatrix::Zero(x.rows(), x.cols());
            sq = CMatrix::Zero(x.rows(), x.cols());
        }
        sum += x;
        sq.real() += x.real().cwiseAbs2();
        sq.imag() += x.imag().cwiseAbs2();
        ++n;
    }

    CMatrix mean() const { return sum / static_cast<double>(n); }

    CMatrix std_error() const
    {
        const double dn = static_cast<double>(n);
        const CMatrix mu = mean();
        CMatrix out(mu.rows(), mu.cols());
        for (Eigen::Index i = 0; i < mu.size(); ++i)
        {
            const double vr = std::max(0.0, (sq(i).real() - dn * mu(i).real() * mu(i).real()) / (dn - 1.0));
            const double vi = std::max(0.0, (sq(i).imag() - dn * mu(i).imag() * mu(i).imag()) / (dn - 1.0));
            out(i) = {std::sqrt(vr / dn), std::sqrt(vi / dn)};
        }
        return out;
    }
};

// Largest |estimate - target| / standard error over real and imaginary parts of every entry.
// Deviations below `floor` count as zero so that entries with no sampling noise, such as the
// imaginary parts of Hermitian diagonals, are compared up to rounding.
double worst_score(const CMatrix &estimate, const CMatrix &se, const CMatrix &target, double floor)
{
    double worst = 0.0;
    auto score = [&](double diff, double s) {
        const double excess = std::abs(diff) - floor;
        if (excess <= 0.0)
            return 0.0;
        return s > 0.0 ? excess / s : std::numeric_limits<double>::infinity();
    };
    for (Eigen::Index i = 0; i < estimate.size(); ++i)
    {
        const cd d = estimate(i) - target(i);
        worst = std::max({worst, score(d.real(), se(i).real()), score(d.imag(), se(i).imag())});
    }
    return worst;
}

std::string format(double x)
{
    std::ostringstream os;
    os.precision(4);
    os << x;
    return os.str();
}

// Statistics, precoders, pilots and estimators of one self-check instance.
struct Instance
{
    NetworkStatistics stats;
    std::vector<Precoder> precoders;
    EstimatorBank bank;
    ErrorCovariances cprime;
};

Instance make_instance(NetworkStatistics stats, double power, int tau_p, double sigma2)
{
    Instance in;
    in.stats = std::move(stats);
    in.precoders = build_precoders(in.stats, PrecoderKind::kStatistical, power);
    const PilotPlan plan = assign_pilots(in.stats.k_ues, in.stats.n_ant, tau_p, 200);
    in.bank = build_estimators(in.stats, in.precoders, plan, sigma2);
    in.cprime = build_error_covariances(in.bank, in.precoders);
    return in;
}

} // namespace

CheckResult check_estimator_moments(long trials, std::uint64_t seed)
{
    CheckResult result{"estimator moment identities", true, {}};
    // Three UEs on two pilots: UEs 0 and 2 share one.
    const Instance in = make_instance(random_statistics(2, 3, 2, 2, FadingMode::kRician, seed), 1.0, 4, 0.2);
    const NetworkStatistics &stats = in.stats;
    const EstimatorBank &bank = in.bank;
    const int l = stats.l_ant;
    const int n = stats.n_ant;
    const int links = stats.m_aps * stats.k_ues;
    const int groups = bank.plan.groups();
    const double tau_p = bank.plan.tau_p;

    double identity_error = 0.0;
    for (int m = 0; m < stats.m_aps; ++m)
        for (int k = 0; k < stats.k_ues; ++k)
        {
            const CMatrix &r = stats.link(m, k).r_full;
            identity_error = std::max(identity_error, max_abs(bank.at(m, k).phi + bank.at(m, k).c - r) / max_abs(r));
        }

    // Alternative linear estimators applied to the same LoS-compensated observation.
    Rng aux(derive_seed(seed, Stream::kTest, {1000}));
    std::vector<std::vector<CMatrix>> competitors(static_cast<std::size_t>(links));
    for (int m = 0; m < stats.m_aps; ++m)
    {
        for (int k = 0; k < stats.k_ues; ++k)
        {
            const CMatrix &gain = bank.at(m, k).gain;
            std::vector<CMatrix> &alt = competitors[static_cast<std::size_t>(m * stats.k_ues + k)];
            alt.push_back(0.9 * gain);
            alt.push_back(1.1 * gain);
            const CMatrix noise = aux.complex_normal(gain.rows(), gain.cols());
            alt.push_back(gain + 0.05 * gain.norm() / noise.norm() * noise);

            // Same structure with spatial correlation ignored.
            std::vector<CMatrix> r_diag, f_peers;
            for (int peer : bank.plan.peers[static_cast<std::size_t>(bank.plan.group_of[k])])
            {
                r_diag.push_back(stats.link(m, peer).r_full.diagonal().asDiagonal());
                f_peers.push_back(bank.f_tilde[static_cast<std::size_t>(peer)]);
            }
            const CMatrix psi_diag = compute_psi(r_diag, f_peers, bank.sigma2, bank.plan.tau_p);
            const CMatrix r_own = stats.link(m, k).r_full.diagonal().asDiagonal();
            alt.push_back(r_own * bank.f_tilde[static_cast<std::size_t>(k)].adjoint() * psi_diag.inverse());

            // Least squares: invert the pilot operator of UE k.
            alt.push_back((tau_p * bank.f_tilde[static_cast<std::size_t>(k)]).completeOrthogonalDecomposition().pseudoInverse());
        }
    }

    std::vector<cd> fixed_phase(static_cast<std::size_t>(links));
    for (cd &p : fixed_phase)
        p = aux.unit_phase();

    std::vector<EntryMoments> cov(static_cast<std::size_t>(links)), cross(static_cast<std::size_t>(links));
    std::vector<double> mse(static_cast<std::size_t>(links), 0.0);
    std::vector<std::vector<double>> alt_mse(static_cast<std::size_t>(links));
    for (int i = 0; i < links; ++i)
        alt_mse[static_cast<std::size_t>(i)].assign(competitors[static_cast<std::size_t>(i)].size(), 0.0);

    for (long t = 0; t < trials; ++t)
    {
        Rng rng(derive_seed(seed, Stream::kTest, {2000, static_cast<std::uint64_t>(t)}));
        ChannelRealization ch = sample_network(stats, rng);
        for (std::size_t i = 0; i < ch.h.size(); ++i)
        {
            ch.h[i] += stats.links[i].hbar * (fixed_phase[i] - ch.phase[i]);
            ch.phase[i] = fixed_phase[i];
        }
        const std::vector<CVector> y = despread_pilots(stats, bank, ch, rng);
        mmse_estimate(stats, bank, y, ch);

        for (int m = 0; m < stats.m_aps; ++m)
        {
            std::vector<CVector> los(static_cast<std::size_t>(groups), CVector::Zero(l * n));
            for (int k = 0; k < stats.k_ues; ++k)
                los[static_cast<std::size_t>(bank.plan.group_of[k])] +=
                    tau_p * vec(stats.link(m, k).hbar * bank.f[static_cast<std::size_t>(k)] * ch.phase[ch.index(m, k)]);
            for (int k = 0; k < stats.k_ues; ++k)
            {
                const std::size_t idx = ch.index(m, k);
                const int g = bank.plan.group_of[k];
                const CVector mean = vec(stats.link(m, k).hbar) * ch.phase[idx];
                const CVector a = vec(ch.hhat[idx]) - mean;
                const CVector e = vec(ch.err[idx]);
                cov[idx].add(a * a.adjoint());
                cross[idx].add(a * e.adjoint());
                mse[idx] += e.squaredNorm();
                const CVector innovation = y[static_cast<std::size_t>(m * groups + g)] - los[static_cast<std::size_t>(g)];
                const CVector h = vec(ch.h[idx]);
                for (std::size_t c = 0; c < competitors[idx].size(); ++c)
                    alt_mse[idx][c] += (h - mean - competitors[idx][c] * innovation).squaredNorm();
            }
        }
    }

    double worst_cov = 0.0, worst_cross = 0.0, worst_margin = std::numeric_limits<double>::infinity();
    for (int m = 0; m < stats.m_aps; ++m)
    {
        for (int k = 0; k < stats.k_ues; ++k)
        {
            const std::size_t idx = static_cast<std::size_t>(m * stats.k_ues + k);
            const CMatrix &phi = bank.at(m, k).phi;
            const double floor = 1e-12 * max_abs(phi);
            worst_cov = std::max(worst_cov, worst_score(cov[idx].mean(), cov[idx].std_error(), phi, floor));
            worst_cross = std::max(worst_cross, worst_score(cross[idx].mean(), cross[idx].std_error(),
                                                            CMatrix::Zero(l * n, l * n), floor));
            for (double alt : alt_mse[idx])
                worst_margin = std::min(worst_margin, (alt - mse[idx]) / mse[idx]);
        }
    }

    result.passed = identity_error <= 1e-12 && worst_cov <= 5.0 && worst_cross <= 5.0 && worst_margin >= 0.0;
    result.detail = "max rel |Phi + C - R| = " + format(identity_error) + " (<= 1e-12), worst Cov{hhat|phi} z = " +
                    format(worst_cov) + " (<= 5), worst E{hhat e^H} z = " + format(worst_cross) +
                    " (<= 5), min relative MSE margin over alternatives = " + format(worst_margin) + " (>= 0), trials = " +
                    std::to_string(trials);
    return result;
}

CheckResult check_combiner_optimality(int blocks, std::uint64_t seed)
{
    CheckResult result{"centralized MMSE combiner optimality", true, {}};
    const Instance in = make_instance(random_statistics(3, 4, 2, 2, FadingMode::kRician, seed), 1.0, 4, 0.1);
    const int ml = in.stats.m_aps * in.stats.l_ant;
    const int n = in.stats.n_ant;

    double worst_mr = std::numeric_limits<double>::infinity();
    double worst_random = std::numeric_limits<double>::infinity();
    double worst_equiv = 0.0;
    for (int j = 0; j < blocks; ++j)
    {
        Rng rng(derive_seed(seed, Stream::kTest, {3000, static_cast<std::uint64_t>(j)}));
        const ChannelRealization ch = draw_block(in.stats, in.bank, rng);
        const CollectiveEstimate est = collect(ch, in.cprime, in.stats.l_ant, n);
        const CMatrix omega = received_covariance(est, in.precoders, in.bank.sigma2);
        const std::vector<CMatrix> v = mmse_combiners(est, in.precoders, in.bank.sigma2);
        for (int k = 0; k < in.stats.k_ues; ++k)
        {
            const CMatrix &f_k = in.precoders[static_cast<std::size_t>(k)].f;
            const CMatrix &h_k = est.hhat[static_cast<std::size_t>(k)];
            const double se_mmse = se_instantaneous(v[static_cast<std::size_t>(k)], omega, h_k, f_k);
            const double se_mr = se_instantaneous(mr_combiner(est, k), omega, h_k, f_k);
            const double se_random = se_instantaneous(rng.complex_normal(ml, n), omega, h_k, f_k);
            const double se_opt = se_instantaneous_optimal(omega, h_k, f_k);
            const double slack = 1e-9 * std::max(1.0, se_mmse);
            worst_mr = std::min(worst_mr, se_mmse - se_mr + slack);
            worst_random = std::min(worst_random, se_mmse - se_random + slack);
            worst_equiv = std::max(worst_equiv, std::abs(se_mmse - se_opt) / std::max(se_opt, 1e-300));
        }
    }
    result.passed = worst_mr >= 0.0 && worst_random >= 0.0 && worst_equiv <= 1e-8;
    result.detail = "min SE(MMSE) - SE(MR) = " + format(worst_mr) + ", min SE(MMSE) - SE(random) = " +
                    format(worst_random) + " (>= 0), max rel |bound(MMSE) - optimal| = " + format(worst_equiv) +
                    " (<= 1e-8), blocks = " + std::to_string(blocks);
    return result;
}

CheckResult check_right_invariance(int trials, std::uint64_t seed)
{
    CheckResult result{"right-invariance of the log-det bound", true, {}};
    const Instance in = make_instance(random_statistics(2, 3, 2, 2, FadingMode::kRician, seed), 1.0, 4, 0.1);
    const int ml = in.stats.m_aps * in.stats.l_ant;
    const int n = in.stats.n_ant;

    double worst = 0.0;
    for (int t = 0; t < trials; ++t)
    {
        Rng rng(derive_seed(seed, Stream::kTest, {4000, static_cast<std::uint64_t>(t)}));
        const ChannelRealization ch = draw_block(in.stats, in.bank, rng);
        const CollectiveEstimate est = collect(ch, in.cprime, in.stats.l_ant, n);
        const CMatrix omega = received_covariance(est, in.precoders, in.bank.sigma2);
        const int k = t % in.stats.k_ues;
        const CMatrix &f_k = in.precoders[static_cast<std::size_t>(k)].f;
        const CMatrix &h_k = est.hhat[static_cast<std::size_t>(k)];

        CMatrix v;
        switch (t % 3)
        {
        case 0:
            v = mr_combiner(est, k);
            break;
        case 1:
            v = mmse_combiners(est, in.precoders, in.bank.sigma2)[static_cast<std::size_t>(k)];
            break;
        default:
            v = rng.complex_normal(ml, n);
            break;
        }
        CMatrix tr = rng.complex_normal(n, n);
        Eigen::JacobiSVD<CMatrix> svd(tr);
        while (svd.singularValues()(n - 1) < 1e-3 * svd.singularValues()(0))
        {
            tr = rng.complex_normal(n, n);
            svd.compute(tr);
        }
        const double base = se_instantaneous(v, omega, h_k, f_k);
        const double rotated = se_instantaneous(v * tr, omega, h_k, f_k);
        worst = std::max(worst, std::abs(rotated - base) / std::max(std::abs(base), 1e-300));
    }
    result.passed = worst <= 1e-8;
    result.detail = "max rel |SE(V T) - SE(V)| = " + format(worst) + " (<= 1e-8), trials = " + std::to_string(trials);
    return result;
}

CheckResult check_closed_form_fidelity(long blocks, std::uint64_t seed)
{
    CheckResult result{"closed-form LSFD statistics", true, {}};
    const Layout layout = place_network(2, 2, 1000.0, seed);
    StatisticsOptions options;
    options.l_ant = 2;
    options.n_ant = 2;
    options.fading = FadingMode::kRician;
    const double sigma2 = std::pow(10.0, (-91.99 - 30.0) / 10.0);
    const double prelog = 1.0 - 2.0 / 200.0;
    const Instance in = make_instance(build_network_statistics(layout, options, seed), 0.2, 2, sigma2);

    const LsfdStatistics mc =
        lsfd_expectations_mc(in.stats, in.bank, in.cprime, in.precoders, LocalCombiner::kMR, blocks, seed);
    const LsfdStatistics cf = closed_form_statistics(in.stats, in.bank, in.precoders);

    auto worst_over = [](const std::vector<CMatrix> &est, const std::vector<CMatrix> &se,
                         const std::vector<CMatrix> &target) {
        double worst = 0.0;
        for (std::size_t i = 0; i < est.size(); ++i)
            worst = std::max(worst, worst_score(est[i], se[i], target[i], 1e-10 * max_abs(target[i])));
        return worst;
    };
    const double z_score = worst_over(mc.e_gkk, mc.e_gkk_se, cf.e_gkk);
    const double s_score = worst_over(mc.s, mc.s_se, cf.s);
    const double theta_score = worst_over(mc.theta, mc.theta_se, cf.theta);

    const LsfdSeResult closed = se_lsfd_closed_form(LocalCombiner::kMR, cf, in.precoders, sigma2, prelog);
    double worst_se = 0.0;
    std::ostringstream ses;
    for (int k = 0; k < in.stats.k_ues; ++k)
    {
        const CMatrix &f_k = in.precoders[static_cast<std::size_t>(k)].f;
        const double se_mc = se_lsfd(mc, k, optimal_lsfd_weights(mc, k, f_k, sigma2), f_k, sigma2, prelog);
        const double se_cf = closed.se[static_cast<std::size_t>(k)];
        worst_se = std::max(worst_se, std::abs(se_cf - se_mc) / se_mc);
        ses << (k ? ", " : "") << "UE" << k << " closed " << format(se_cf) << " vs MC " << format(se_mc);
    }
    result.passed = z_score <= 5.0 && s_score <= 5.0 && theta_score <= 5.0 && worst_se <= 0.01;
    result.detail = "worst z: Z " + format(z_score) + ", S " + format(s_score) + ", Theta " + format(theta_score) +
                    " (<= 5); max rel SE gap " + format(worst_se) + " (<= 0.01) [" + ses.str() +
                    "], blocks = " + std::to_string(blocks);
    return result;
}

} // namespace cfmimo
