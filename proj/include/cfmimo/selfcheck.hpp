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

#ifndef CFMIMO_SELFCHECK_HPP
#define CFMIMO_SELFCHECK_HPP

#include "cfmimo/channel.hpp"
#include "cfmimo/geometry.hpp"

#include <cstdint>
#include <string>

namespace cfmimo
{

enum class CovarianceShape
{
    kWeichselberger, // random eigenbases and coupling matrix
    kDiagonal,       // identity eigenbases: R is diagonal
    kKronecker,      // rank-one coupling matrix: R = R_t^T (x) R_r
};

// Geometry-free statistics for invariant checks: beta_mk log-uniform on [0.1, 1], kappa_mk uniform on
// [0.5, 5] in Rician mode (0 in Rayleigh mode), LoS directions uniform, NLoS power L N beta / (kappa + 1).
NetworkStatistics random_statistics(int m_aps, int k_ues, int l_ant, int n_ant, FadingMode fading,
                                    std::uint64_t seed, CovarianceShape shape = CovarianceShape::kWeichselberger);

struct CheckResult
{
    std::string name;
    bool passed = false;
    std::string detail;
};

// Phi + C = R; sample covariance of the estimate given the phases equals Phi and the estimate is
// uncorrelated with its error, entrywise within 5 standard errors; no alternative linear estimator
// reaches a smaller sample MSE on the same draws.
CheckResult check_estimator_moments(long trials, std::uint64_t seed);

// Per block: SE of the centralized MMSE combiner >= SE of MR and of a random combiner, and its
// bound equals the combiner-free optimal expression to 1e-8 relative.
CheckResult check_combiner_optimality(int blocks, std::uint64_t seed);

// |SE(V T) - SE(V)| <= 1e-8 relative for random invertible T.
CheckResult check_right_invariance(int trials, std::uint64_t seed);

// Closed-form Z, S and Theta against Monte Carlo on M = 2, K = 2, L = 2, N = 2 with one shared
// pilot: every entry within 5 standard errors, and the LSFD SE of both paths within 1% relative.
CheckResult check_closed_form_fidelity(long blocks, std::uint64_t seed);

} // namespace cfmimo

#endif
