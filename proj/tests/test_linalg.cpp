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

#include "cfmimo/linalg.hpp"
#include "test_support.hpp"

#include <stdexcept>

using namespace cfmimo;
using cfmimo::test::random_matrix;
using cfmimo::test::rel_diff;

TEST_CASE("vec stacks columns and unvec inverts it")
{
    const CMatrix x = random_matrix(3, 2, 1);
    const CVector v = vec(x);
    REQUIRE(v.size() == 6);
    for (int c = 0; c < 2; ++c)
        for (int r = 0; r < 3; ++r)
            CHECK(v(c * 3 + r) == x(r, c));
    CHECK(unvec(v, 3, 2) == x);
    CHECK_THROWS_AS(unvec(v, 4, 2), std::invalid_argument);
}

TEST_CASE("vec(A X B) equals (B^T kron A) vec(X)")
{
    for (std::uint64_t s = 0; s < 20; ++s)
    {
        const CMatrix a = random_matrix(3, 4, 100 + s);
        const CMatrix x = random_matrix(4, 2, 200 + s);
        const CMatrix b = random_matrix(2, 5, 300 + s);
        const CVector lhs = vec(a * x * b);
        const CVector rhs = kron(b.transpose(), a) * vec(x);
        CHECK(rel_diff(lhs, rhs) < 1e-10);
    }
}

TEST_CASE("kron matches the entrywise definition")
{
    const CMatrix a = random_matrix(2, 3, 4);
    const CMatrix b = random_matrix(3, 2, 5);
    const CMatrix k = kron(a, b);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            CHECK(k(i, j) == a(i / 3, j / 2) * b(i % 3, j % 2));
}

TEST_CASE("block_of on a diagonal matrix")
{
    CMatrix r = CMatrix::Zero(4, 4);
    r.diagonal() << 1.0, 2.0, 3.0, 4.0;
    CHECK(block_of(r, 0, 1, 2) == CMatrix::Zero(2, 2));
    CMatrix expected = CMatrix::Zero(2, 2);
    expected.diagonal() << 3.0, 4.0;
    CHECK(block_of(r, 1, 1, 2) == expected);
    CHECK_THROWS_AS(block_of(r, 2, 0, 2), std::out_of_range);
    CHECK_THROWS_AS(block_of(r, -1, 0, 2), std::out_of_range);
}

TEST_CASE("psd_sqrt squares back and clips negative eigenvalues")
{
    const CMatrix g = random_matrix(5, 5, 7);
    const CMatrix a = g * g.adjoint();
    const CMatrix s = psd_sqrt(a);
    CHECK(rel_diff(s * s, a) < 1e-10);
    CHECK(rel_diff(s, s.adjoint()) < 1e-14);
    CHECK(min_eigenvalue(s) > -1e-12);

    CMatrix indefinite = CMatrix::Zero(2, 2);
    indefinite.diagonal() << 4.0, -1.0;
    const CMatrix clipped = psd_sqrt(indefinite);
    CHECK(std::abs(clipped(0, 0) - cd(2.0)) < 1e-14);
    CHECK(std::abs(clipped(1, 1)) < 1e-14);
}

TEST_CASE("pd_inverse_sqrt whitens a positive-definite matrix")
{
    const CMatrix g = random_matrix(4, 4, 9);
    CMatrix a = g * g.adjoint();
    a.diagonal().array() += 0.1;
    const CMatrix w = pd_inverse_sqrt(a);
    CHECK(rel_diff(w * a * w, CMatrix::Identity(4, 4)) < 1e-10);
    CHECK_THROWS_AS(pd_inverse_sqrt(CMatrix::Zero(2, 2)), std::domain_error);
}

TEST_CASE("hermitian_solve solves and survives a singular PSD system")
{
    const CMatrix g = random_matrix(4, 4, 11);
    CMatrix a = g * g.adjoint();
    a.diagonal().array() += 1.0;
    const CMatrix b = random_matrix(4, 2, 12);
    const CMatrix x = hermitian_solve(a, b);
    CHECK(rel_diff(a * x, b) < 1e-12);

    const CVector u = random_matrix(3, 1, 13);
    const CMatrix rank_one = u * u.adjoint();
    const CMatrix x1 = hermitian_solve(rank_one, u);
    CHECK(x1.allFinite());
}

TEST_CASE("log2det_hpd matches the eigenvalue sum")
{
    const CMatrix g = random_matrix(4, 4, 15);
    CMatrix a = g * g.adjoint();
    a.diagonal().array() += 0.5;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(a);
    const double expected = es.eigenvalues().array().log().sum() / std::log(2.0);
    CHECK(log2det_hpd(a) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("log2det_bound scalar value and zero signal")
{
    CMatrix d(1, 1), s(1, 1);
    d(0, 0) = cd(1.0, 2.0);
    s(0, 0) = 0.5;
    CHECK(log2det_bound(d, s) == doctest::Approx(std::log2(1.0 + 5.0 / 0.5)).epsilon(1e-14));
    CHECK(log2det_bound(CMatrix::Zero(2, 2), CMatrix::Identity(2, 2)) == 0.0);
}

TEST_CASE("hermitian_part and max_abs")
{
    const CMatrix a = random_matrix(3, 3, 17);
    const CMatrix h = hermitian_part(a);
    CHECK(h == h.adjoint());
    CHECK(max_abs(CMatrix()) == 0.0);
    CMatrix z = CMatrix::Zero(2, 2);
    z(1, 0) = cd(3.0, 4.0);
    CHECK(max_abs(z) == 5.0);
}
