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

#ifndef CFMIMO_RNG_HPP
#define CFMIMO_RNG_HPP

#include "cfmimo/linalg.hpp"

#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace cfmimo
{

// Stream tags used when deriving seeds; keeping them distinct decorrelates the draws.
enum class Stream : std::uint64_t
{
    kLayout = 1,
    kLinkStatistics = 2,
    kBlock = 3,
    kLsfdBlock = 4,
    kTest = 99,
};

// Counter-based seed derivation: the master seed and each counter are folded through the
// splitmix64 finalizer in order. derive_seed(s, {a, b}) depends on every argument and on
// their order, and never on how many other seeds were derived before it.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> counters);

inline std::uint64_t derive_seed(std::uint64_t master, Stream stream,
                                 std::initializer_list<std::uint64_t> counters)
{
    std::uint64_t s = derive_seed(master, {static_cast<std::uint64_t>(stream)});
    return derive_seed(s, counters);
}

class Rng
{
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo = 0.0, double hi = 1.0)
    {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }

    int uniform_int(int lo, int hi_inclusive)
    {
        return std::uniform_int_distribution<int>(lo, hi_inclusive)(engine_);
    }

    double normal() { return normal_(engine_); }

    // CN(0, 1): independent real and imaginary parts with variance 1/2 each.
    cd complex_normal()
    {
        const double re = normal_(engine_);
        const double im = normal_(engine_);
        return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
    }

    CMatrix complex_normal(Eigen::Index rows, Eigen::Index cols)
    {
        CMatrix out(rows, cols);
        for (Eigen::Index c = 0; c < cols; ++c)
            for (Eigen::Index r = 0; r < rows; ++r)
                out(r, c) = complex_normal();
        return out;
    }

    // Uniform phase on [-pi, pi), returned as a unit-modulus scalar.
    cd unit_phase()
    {
        const double phi = uniform(-std::numbers::pi, std::numbers::pi);
        return std::polar(1.0, phi);
    }

    std::mt19937_64 &engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace cfmimo

#endif
