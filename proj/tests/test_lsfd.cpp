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
#include "cfmimo/selfcheck.hpp"
#include "test_support.hpp"

#include <cstdlib>
#include <stdexcept>

using namespace cfmimo;
using cfmimo::test::random_matrix;
using cfmimo::test::rel_diff;

namespace
{

struct Setup
{
    NetworkStatistics stats;
    std::vector<Precoder> precoders;
    EstimatorBank bank;
    ErrorCovariances cprime;
};

Setup finish(NetworkStatistics stats, int tau_p, double sigma2)
{
    Setup s;
    s.stats = std::move(stats);
    s.precoders = build_precoders(s.stats, PrecoderKind::kStatistical, 1.0);
    s.bank = build_estimators(s.stats, s.precoders, assign_pilots(s.stats.k_ues, s.stats.n_ant, tau_p, 200), sigma2);
    s.cprime = build_error_covariances(s.bank, s.precoders);
    return s;
}

Setup make_setup(int m, int k, int l, int n, int tau_p, double sigma2, std::uint64_t seed,
                 CovarianceShape shape = CovarianceShape::kWeichselberger, FadingMode fading = FadingMode::kRician)
{
    return finish(random_statistics(m, k, l, n, fading, seed, shape), tau_p, sigma2);
}

// Largest deviation of a Monte Carlo mean from `target` in units of its standard error; deviations
// below `floor` count as agreement.
double worst_z(const CMatrix &mean, const CMatrix &se, const CMatrix &target, double floor)
{
    double worst = 0.0;
    auto one = [&](double m, double s, double t) {
        const double excess = std::abs(m - t) - floor;
        if (excess <= 0.0)
            return 0.0;
        return s > 0.0 ? excess / s : std::numeric_limits<double>::infinity();
    };
    for (Eigen::Index i = 0; i < mean.size(); ++i)
    {
        worst = std::max(worst, one(mean(i).real(), se(i).real(), target(i).real()));
        worst = std::max(worst, one(mean(i).imag(), se(i).imag(), target(i).imag()));
    }
    return worst;
}

double worst_z_all(const LsfdStatistics &mc, const LsfdStatistics &cf)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < mc.e_gkk.size(); ++i)
    {
        worst = std::max(worst, worst_z(mc.e_gkk[i], mc.e_gkk_se[i], cf.e_gkk[i], 1e-10 * max_abs(cf.e_gkk[i])));
        worst = std::max(worst, worst_z(mc.s[i], mc.s_se[i], cf.s[i], 1e-10 * max_abs(cf.s[i])));
    }
    for (std::size_t i = 0; i < mc.theta.size(); ++i)
        worst = std::max(worst, worst_z(mc.theta[i], mc.theta_se[i], cf.theta[i], 1e-10 * max_abs(cf.theta[i])));
    return worst;
}

void zero_nlos(NetworkStatistics &stats)
{
    for (LinkStatistics &link : stats.links)
        link = make_link_statistics(link.beta, link.kappa, link.hbar, link.u_r, link.u_t,
                                    RMatrix::Zero(link.l(), link.n()));
}

} // namespace

TEST_CASE("local MR returns the estimate")
{
    const CMatrix h = random_matrix(3, 2, 5);
    CHECK(local_mr(h) == h);
}

TEST_CASE("local LMMSE with one AP equals centralized MMSE")
{
    const Setup s = make_setup(1, 3, 3, 2, 2, 0.1, 7);
    Rng rng(11);
    const ChannelRealization ch = draw_block(s.stats, s.bank, rng);
    const auto local = local_lmmse(ch, 0, s.cprime, s.precoders, 0.1);
    const auto central = mmse_combiners(collect(ch, s.cprime, 3, 2), s.precoders, 0.1);
    CMatrix omega = s.cprime.per_ap[0];
    for (int l = 0; l < 3; ++l)
        omega += ch.hhat[l] * s.precoders[l].f_hat * ch.hhat[l].adjoint();
    omega.diagonal().array() += 0.1;
    for (int k = 0; k < 3; ++k)
    {
        CHECK(rel_diff(local[k], central[k]) < 1e-10);
        CHECK(rel_diff(local[k], omega.fullPivLu().solve(ch.hhat[k] * s.precoders[k].f)) < 1e-9);
    }
}

TEST_CASE("local combiners use each AP's own estimates")
{
    const Setup s = make_setup(3, 2, 2, 2, 4, 0.1, 13);
    Rng rng(17);
    const ChannelRealization ch = draw_block(s.stats, s.bank, rng);
    const auto mr = local_combiners(ch, LocalCombiner::kMR, s.cprime, s.precoders, 0.1);
    const auto mmse = local_combiners(ch, LocalCombiner::kLMMSE, s.cprime, s.precoders, 0.1);
    REQUIRE(mr.size() == 6);
    for (int m = 0; m < 3; ++m)
    {
        const auto per_ap = local_lmmse(ch, m, s.cprime, s.precoders, 0.1);
        for (int k = 0; k < 2; ++k)
        {
            CHECK(mr[ch.index(m, k)] == ch.hhat[ch.index(m, k)]);
            CHECK(mmse[ch.index(m, k)] == per_ap[k]);
        }
    }
}

TEST_CASE("zero channels give zero second-layer statistics")
{
    NetworkStatistics stats = random_statistics(2, 2, 2, 2, FadingMode::kRician, 19);
    for (LinkStatistics &link : stats.links)
        link = make_link_statistics(link.beta, 0.0, CMatrix::Zero(2, 2), link.u_r, link.u_t, RMatrix::Zero(2, 2));
    const Setup s = finish(stats, 2, 0.1);
    const LsfdStatistics mc =
        lsfd_expectations_mc(s.stats, s.bank, s.cprime, s.precoders, LocalCombiner::kMR, 100, 23);
    for (int k = 0; k < 2; ++k)
    {
        CHECK(max_abs(mc.e_gkk[k]) == 0.0);
        CHECK(max_abs(mc.s[k]) == 0.0);
        CHECK(max_abs(mc.theta_sum(k)) == 0.0);
        CHECK(se_lsfd_optimal(mc, k, s.precoders[k].f, 0.1, 1.0) == 0.0);
    }
}

TEST_CASE("pure line of sight with one UE")
{
    NetworkStatistics stats = random_statistics(3, 1, 2, 2, FadingMode::kRician, 29);
    zero_nlos(stats);
    const Setup s = finish(stats, 2, 0.1);
    const LsfdStatistics mc =
        lsfd_expectations_mc(s.stats, s.bank, s.cprime, s.precoders, LocalCombiner::kMR, 50, 31);
    const auto z = closed_form_z(s.stats, s.bank);
    for (int m = 0; m < 3; ++m)
    {
        const CMatrix &hbar = s.stats.link(m, 0).hbar;
        const CMatrix expected = hbar.adjoint() * hbar;
        CHECK(rel_diff(mc.e_gkk[0].block(2 * m, 0, 2, 2), expected) < 1e-12);
        CHECK(rel_diff(z[static_cast<std::size_t>(m)], expected) < 1e-12);
    }
}

TEST_CASE("Monte Carlo statistics do not depend on the worker count")
{
    const Setup s = make_setup(2, 3, 2, 2, 2, 0.1, 37);
    auto run = [&](const char *workers) {
        setenv("CFMIMO_WORKERS", workers, 1);
        return lsfd_expectations_mc(s.stats, s.bank, s.cprime, s.precoders, LocalCombiner::kLMMSE, 1000, 41);
    };
    const LsfdStatistics a = run("1");
    const LsfdStatistics b = run("4");
    unsetenv("CFMIMO_WORKERS");
    CHECK(a.e_gkk == b.e_gkk);
    CHECK(a.theta == b.theta);
    CHECK(a.s == b.s);
    CHECK(a.theta_se == b.theta_se);
}

TEST_CASE("optimal LSFD weights dominate other weights")
{
    const Setup s = make_setup(3, 3, 2, 2, 2, 0.1, 43);
    for (LocalCombiner comb : {LocalCombiner::kMR, LocalCombiner::kLMMSE})
    {
        const LsfdStatistics mc = lsfd_expectations_mc(s.stats, s.bank, s.cprime, s.precoders, comb, 2000, 47);
        for (int k = 0; k < 3; ++k)
        {
            const CMatrix &f = s.precoders[k].f;
            const CMatrix a = optimal_lsfd_weights(mc, k, f, 0.1);
            const double best = se_lsfd(mc, k, a, f, 0.1, 1.0);
            CHECK(best == doctest::Approx(se_lsfd_optimal(mc, k, f, 0.1, 1.0)).epsilon(1e-8));
            CHECK(best >= se_lsfd(mc, k, csd_weights(3, 2), f, 0.1, 1.0) - 1e-9);
            for (int t = 0; t < 100; ++t)
            {
                const CMatrix r = random_matrix(6, 2, derive_seed(53, {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(t)}));
                CHECK(best >= se_lsfd(mc, k, r, f, 0.1, 1.0) - 1e-9);
            }
            CHECK(se_lsfd(mc, k, a, f, 0.1, 0.5) == doctest::Approx(0.5 * best).epsilon(1e-12));
        }
    }
}

TEST_CASE("CSD weights average the APs")
{
    const CMatrix a = csd_weights(4, 2);
    REQUIRE(a.rows() == 8);
    for (int m = 0; m < 4; ++m)
        CHECK(rel_diff(a.block(2 * m, 0, 2, 2), 0.25 * CMatrix::Identity(2, 2)) == 0.0);
}

TEST_CASE("LSFD weights vanish as the noise grows and zero precoders give zero SE")
{
    const Setup s = make_setup(2, 2, 2, 2, 4, 0.1, 59);
    const LsfdStatistics mc =
        lsfd_expectations_mc(s.stats, s.bank, s.cprime, s.precoders, LocalCombiner::kMR, 500, 61);
    const CMatrix &f = s.precoders[0].f;
    CHECK(max_abs(optimal_lsfd_weights(mc, 0, f, 1e12)) < 1e-6 * max_abs(optimal_lsfd_weights(mc, 0, f, 1.0)));
    CHECK(se_lsfd_optimal(mc, 0, CMatrix::Zero(2, 2), 0.1, 1.0) == 0.0);
    CHECK(se_lsfd(mc, 0, csd_weights(2, 2), CMatrix::Zero(2, 2), 0.1, 1.0) == 0.0);
}

TEST_CASE("single-antenna single-AP SE ignores the scalar weight")
{
    const Setup s = make_setup(1, 2, 2, 1, 1, 0.1, 67);
    const LsfdStatistics mc =
        lsfd_expectations_mc(s.stats, s.bank, s.cprime, s.precoders, LocalCombiner::kMR, 500, 71);
    const CMatrix &f = s.precoders[0].f;
    const double a = se_lsfd(mc, 0, CMatrix::Constant(1, 1, 1.0), f, 0.1, 1.0);
    const double b = se_lsfd(mc, 0, CMatrix::Constant(1, 1, cd(2.0, -3.0)), f, 0.1, 1.0);
    CHECK(a == doctest::Approx(b).epsilon(1e-10));
    CHECK(a == doctest::Approx(se_lsfd_optimal(mc, 0, f, 0.1, 1.0)).epsilon(1e-10));
}

TEST_CASE("closed-form Z edge cases")
{
    NetworkStatistics stats = random_statistics(2, 2, 2, 2, FadingMode::kRician, 73);
    zero_nlos(stats);
    const Setup los = finish(stats, 4, 0.1);
    const auto z = closed_form_z(los.stats, los.bank);
    for (std::size_t i = 0; i < z.size(); ++i)
        CHECK(rel_diff(z[i], los.stats.links[i].hbar.adjoint() * los.stats.links[i].hbar) < 1e-14);

    // Rayleigh fading with a vanishing noise: Z_ij collapses to tr R^{ji}.
    const Setup ray = make_setup(2, 2, 2, 2, 4, 1e-12, 79, CovarianceShape::kWeichselberger, FadingMode::kRayleigh);
    const auto zr = closed_form_z(ray.stats, ray.bank);
    for (std::size_t i = 0; i < zr.size(); ++i)
    {
        const CMatrix &r = ray.stats.links[i].r_full;
        CMatrix expected(2, 2);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                expected(a, b) = r.block(2 * b, 2 * a, 2, 2).trace();
        CHECK(rel_diff(zr[i], expected) < 1e-6);
    }
}

TEST_CASE("closed-form Theta collapses to a product for scalar channels")
{
    const Setup s = make_setup(1, 2, 1, 1, 2, 0.1, 83, CovarianceShape::kWeichselberger, FadingMode::kRayleigh);
    const auto theta = closed_form_theta(s.stats, s.bank, s.precoders);
    const double phi0 = s.bank.at(0, 0).phi(0, 0).real();
    const double r1 = s.stats.link(0, 1).r_full(0, 0).real();
    const double fhat1 = s.precoders[1].f_hat(0, 0).real();
    CHECK(std::abs(theta[1](0, 0) - cd(fhat1 * phi0 * r1, 0.0)) <= 1e-12 * fhat1 * phi0 * r1);
}

TEST_CASE("closed-form statistics match Monte Carlo with shared pilots")
{
    const long blocks = 200000;
    for (CovarianceShape shape :
         {CovarianceShape::kDiagonal, CovarianceShape::kKronecker, CovarianceShape::kWeichselberger})
    {
        const Setup s = make_setup(2, 2, 2, 2, 2, 0.2, 89, shape);
        const LsfdStatistics mc =
            lsfd_expectations_mc(s.stats, s.bank, s.cprime, s.precoders, LocalCombiner::kMR, blocks, 97);
        const LsfdStatistics cf = closed_form_statistics(s.stats, s.bank, s.precoders);
        CHECK(worst_z_all(mc, cf) <= 5.0);
    }
}

TEST_CASE("closed-form statistics match Monte Carlo on a mixed pilot plan")
{
    // Four UEs, two pilots: each UE has one pilot-sharing peer and two orthogonal ones.
    const Setup s = make_setup(2, 4, 2, 1, 2, 0.2, 101);
    const LsfdStatistics mc =
        lsfd_expectations_mc(s.stats, s.bank, s.cprime, s.precoders, LocalCombiner::kMR, 200000, 103);
    const LsfdStatistics cf = closed_form_statistics(s.stats, s.bank, s.precoders);
    CHECK(worst_z_all(mc, cf) <= 5.0);
}

TEST_CASE("both square-root conventions agree with orthogonal pilots")
{
    const Setup s = make_setup(2, 3, 2, 2, 6, 0.1, 107);
    const auto a = closed_form_theta(s.stats, s.bank, s.precoders, RootConvention::kPilotWhitened);
    const auto b = closed_form_theta(s.stats, s.bank, s.precoders, RootConvention::kHermitian);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(rel_diff(a[i], b[i]) < 1e-9);
}

TEST_CASE("closed-form Theta is Hermitian positive semidefinite")
{
    const Setup s = make_setup(3, 4, 2, 2, 4, 0.1, 109);
    for (const CMatrix &t : closed_form_theta(s.stats, s.bank, s.precoders))
    {
        CHECK(max_abs(t - t.adjoint()) <= 1e-12 * max_abs(t));
        CHECK(min_eigenvalue(t) >= -1e-10 * max_abs(t));
    }
}

TEST_CASE("without NLoS the cross-AP blocks of a pilot-sharing interferer vanish")
{
    NetworkStatistics stats = random_statistics(2, 2, 2, 2, FadingMode::kRician, 113);
    zero_nlos(stats);
    const Setup s = finish(stats, 2, 0.1);
    const auto theta = closed_form_theta(s.stats, s.bank, s.precoders);
    const CMatrix &t01 = theta[1];
    CHECK(max_abs(t01.block(0, 2, 2, 2)) <= 1e-14 * max_abs(t01));
    CHECK(max_abs(t01.block(2, 0, 2, 2)) <= 1e-14 * max_abs(t01));
    CHECK(max_abs(t01.block(0, 0, 2, 2)) > 0.0);
    CHECK(max_abs(theta[0].block(0, 2, 2, 2)) > 0.0);
}

TEST_CASE("closed-form SE")
{
    const NetworkStatistics stats = random_statistics(3, 4, 2, 2, FadingMode::kRician, 127);
    const Setup shared = finish(stats, 4, 0.1);
    const Setup orth = finish(stats, 8, 0.1);
    const LsfdStatistics cf_shared = closed_form_statistics(shared.stats, shared.bank, shared.precoders);
    const LsfdStatistics cf_orth = closed_form_statistics(orth.stats, orth.bank, orth.precoders);
    CHECK_THROWS_AS(se_lsfd_closed_form(LocalCombiner::kLMMSE, cf_shared, shared.precoders, 0.1, 1.0),
                    std::invalid_argument);
    const LsfdSeResult a = se_lsfd_closed_form(LocalCombiner::kMR, cf_shared, shared.precoders, 0.1, 1.0);
    const LsfdSeResult b = se_lsfd_closed_form(LocalCombiner::kMR, cf_orth, orth.precoders, 0.1, 1.0);
    for (int k = 0; k < 4; ++k)
    {
        CHECK(a.se[k] > 0.0);
        CHECK(a.se[k] <= b.se[k]);
        CHECK(a.se[k] == doctest::Approx(se_lsfd_optimal(cf_shared, k, shared.precoders[k].f, 0.1, 1.0)));
        CHECK(rel_diff(a.weights[k], optimal_lsfd_weights(cf_shared, k, shared.precoders[k].f, 0.1)) < 1e-12);
    }
}

TEST_CASE("closed-form fidelity self-check")
{
    const CheckResult r = check_closed_form_fidelity(100000, 131);
    INFO(r.detail);
    CHECK(r.passed);
}
