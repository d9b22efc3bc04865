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

#include <cmath>
#include <iostream>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string>

namespace cfmimo
{

CVector vec(const CMatrix &x)
{
    return Eigen::Map<const CVector>(x.data(), x.size());
}

CMatrix unvec(const CVector &v, Eigen::Index rows, Eigen::Index cols)
{
    if (rows * cols != v.size())
        throw std::invalid_argument("unvec: size mismatch");
    return Eigen::Map<const CMatrix>(v.data(), rows, cols);
}

CMatrix kron(const CMatrix &a, const CMatrix &b)
{
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

CMatrix block_of(const CMatrix &full, int i, int j, int block_size)
{
    const int blocks = static_cast<int>(full.rows()) / block_size;
    if (i < 0 || j < 0 || i >= blocks || j >= blocks || full.rows() != full.cols() ||
        full.rows() % block_size != 0)
        throw std::out_of_range("block_of: block index out of range");
    return full.block(i * block_size, j * block_size, block_size, block_size);
}

CMatrix hermitian_part(const CMatrix &a)
{
    return 0.5 * (a + a.adjoint());
}

CMatrix psd_sqrt(const CMatrix &a)
{
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a));
    const RVector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const CMatrix &q = es.eigenvectors();
    return q * root.cast<cd>().asDiagonal() * q.adjoint();
}

CMatrix pd_inverse_sqrt(const CMatrix &a)
{
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a));
    const RVector &ev = es.eigenvalues();
    if (ev.minCoeff() <= 0.0)
        throw std::domain_error("pd_inverse_sqrt: matrix is not positive definite");
    const RVector inv_root = ev.cwiseSqrt().cwiseInverse();
    const CMatrix &q = es.eigenvectors();
    return q * inv_root.cast<cd>().asDiagonal() * q.adjoint();
}

double min_eigenvalue(const CMatrix &hermitian)
{
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(hermitian), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

void log_warning(std::string_view tag, std::string_view message)
{
    static std::mutex mtx;
    static std::set<std::string> seen;
    std::lock_guard<std::mutex> lock(mtx);
    if (seen.insert(std::string(tag)).second)
        std::cerr << "warning [" << tag << "]: " << message << '\n';
}

CMatrix hermitian_solve(const CMatrix &a, const CMatrix &b, std::string_view tag)
{
    Eigen::LLT<CMatrix> llt(a);
    if (llt.info() == Eigen::Success)
        return llt.solve(b);

    const double jitter = 1e-12 * std::abs(a.trace().real());
    log_warning(tag, "numerically singular system, adding relative jitter 1e-12 * trace");
    CMatrix shifted = hermitian_part(a);
    shifted.diagonal().array() += jitter;
    llt.compute(shifted);
    if (llt.info() != Eigen::Success)
        throw std::domain_error(std::string(tag) + ": singular system");
    return llt.solve(b);
}

double log2det_hpd(const CMatrix &a)
{
    Eigen::LLT<CMatrix> llt(hermitian_part(a));
    if (llt.info() == Eigen::Success)
    {
        const auto diag = llt.matrixLLT().diagonal().real();
        return 2.0 * diag.array().log().sum() / std::log(2.0);
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a), Eigen::EigenvaluesOnly);
    const RVector &ev = es.eigenvalues();
    if (ev.minCoeff() <= 0.0)
        throw std::domain_error("log2det_hpd: matrix is not positive definite");
    return ev.array().log().sum() / std::log(2.0);
}

double log2det_bound(const CMatrix &d, const CMatrix &sigma)
{
    if (max_abs(d) == 0.0)
        return 0.0;
    const CMatrix x = hermitian_solve(sigma, d, "log2det_bound");
    CMatrix m = d.adjoint() * x;
    m.diagonal().array() += 1.0;
    const double value = log2det_hpd(m);
    if (value < 0.0)
    {
        log_warning("log2det_bound", "negative log-det clamped at zero");
        return 0.0;
    }
    return value;
}

double max_abs(const CMatrix &a)
{
    return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

} // namespace cfmimo
