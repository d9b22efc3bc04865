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

#ifndef CFMIMO_LINALG_HPP
#define CFMIMO_LINALG_HPP

#include <Eigen/Dense>

#include <complex>
#include <string_view>

namespace cfmimo
{

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

// Column-stacking vectorization. This is the only vec convention used in the library:
// entry (r, c) of an L x N matrix lands at position c * L + r.
CVector vec(const CMatrix &x);
CMatrix unvec(const CVector &v, Eigen::Index rows, Eigen::Index cols);

CMatrix kron(const CMatrix &a, const CMatrix &b);

// L x L block (i, j) of an LN x LN matrix, zero-based block indices.
CMatrix block_of(const CMatrix &full, int i, int j, int block_size);

CMatrix hermitian_part(const CMatrix &a);

// Principal (Hermitian PSD) square root; eigenvalues below zero are clipped.
CMatrix psd_sqrt(const CMatrix &a);

// Hermitian inverse square root of a positive-definite matrix.
CMatrix pd_inverse_sqrt(const CMatrix &a);

double min_eigenvalue(const CMatrix &hermitian);

// Solves A X = B for Hermitian positive-definite A. If the Cholesky factorization fails a
// relative jitter of 1e-12 * trace(A) is added and a warning is logged once per call site tag.
CMatrix hermitian_solve(const CMatrix &a, const CMatrix &b, std::string_view tag = "hermitian_solve");

// log2 det(A) for Hermitian positive-definite A.
double log2det_hpd(const CMatrix &a);

// log2 det(I + D^H Sigma^-1 D), clamped at zero.
double log2det_bound(const CMatrix &d, const CMatrix &sigma);

// Max-abs entry, used for tolerance checks in tests and self-checks.
double max_abs(const CMatrix &a);

void log_warning(std::string_view tag, std::string_view message);

} // namespace cfmimo

#endif
