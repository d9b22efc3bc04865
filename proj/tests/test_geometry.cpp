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

#include "cfmimo/geometry.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>

using namespace cfmimo;

TEST_CASE("place_network is deterministic and stays inside the square")
{
    const Layout a = place_network(1, 1, 1000.0, 77);
    const Layout b = place_network(1, 1, 1000.0, 77);
    CHECK(a.ap_positions[0].x == b.ap_positions[0].x);
    CHECK(a.ue_positions[0].y == b.ue_positions[0].y);
    CHECK(a.ue_orientation[0] == b.ue_orientation[0]);

    const Layout big = place_network(50, 50, 250.0, 3);
    CHECK(big.ap_positions.size() == 50);
    CHECK(big.ue_positions.size() == 50);
    for (const auto *points : {&big.ap_positions, &big.ue_positions})
        for (const Point &p : *points)
        {
            CHECK(p.x >= 0.0);
            CHECK(p.x < 250.0);
            CHECK(p.y >= 0.0);
            CHECK(p.y < 250.0);
        }
}

TEST_CASE("place_network rejects invalid dimensions")
{
    CHECK_THROWS_AS(place_network(0, 1, 1000.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(place_network(1, 0, 1000.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(place_network(1, 1, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(place_network(1, 1, -5.0, 1), std::invalid_argument);
}

TEST_CASE("positions pass a Kolmogorov-Smirnov test against the uniform law")
{
    const int n = 10000;
    const Layout layout = place_network(1, n, 1000.0, 2024);
    std::vector<double> x;
    for (const Point &p : layout.ue_positions)
        x.push_back(p.x / 1000.0);
    std::sort(x.begin(), x.end());
    double d = 0.0;
    for (int i = 0; i < n; ++i)
        d = std::max({d, (i + 1.0) / n - x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(i)] - static_cast<double>(i) / n});
    // Asymptotic 1% critical value of the KS statistic.
    CHECK(d < 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("wrap-around distance across the corner")
{
    CHECK(wrap_distance({0.0, 0.0}, {999.0, 999.0}, 1000.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(wrap_distance({10.0, 20.0}, {10.0, 20.0}, 1000.0) == 0.0);
    CHECK(wrap_distance({0.0, 0.0}, {300.0, 400.0}, 1000.0) == doctest::Approx(500.0));
}

TEST_CASE("wrap-around distance is a bounded metric on the torus")
{
    Rng rng(5);
    const double side = 1000.0;
    for (int t = 0; t < 2000; ++t)
    {
        const Point a{rng.uniform(0, side), rng.uniform(0, side)};
        const Point b{rng.uniform(0, side), rng.uniform(0, side)};
        const Point c{rng.uniform(0, side), rng.uniform(0, side)};
        const double ab = wrap_distance(a, b, side);
        CHECK(ab == doctest::Approx(wrap_distance(b, a, side)).epsilon(1e-12));
        CHECK(ab <= side * std::numbers::sqrt2 / 2.0 + 1e-9);
        CHECK(ab <= wrap_distance(a, c, side) + wrap_distance(c, b, side) + 1e-9);
    }
}

TEST_CASE("wrap_angle maps to [-pi, pi)")
{
    CHECK(wrap_angle(std::numbers::pi) == doctest::Approx(-std::numbers::pi));
    CHECK(wrap_angle(3.0 * std::numbers::pi / 2.0) == doctest::Approx(-std::numbers::pi / 2.0));
    CHECK(wrap_angle(-7.0) == doctest::Approx(-7.0 + 2.0 * std::numbers::pi));
    CHECK(wrap_angle(0.25) == doctest::Approx(0.25));
}

TEST_CASE("link geometry angles and distance")
{
    const Layout layout = place_network(4, 6, 1000.0, 8);
    for (int m = 0; m < 4; ++m)
        for (int k = 0; k < 6; ++k)
        {
            const LinkGeometry g = link_geometry(layout, m, k);
            CHECK(g.distance == doctest::Approx(wrap_distance(layout.ap_positions[m], layout.ue_positions[k], 1000.0)));
            CHECK(g.aod_ap >= -std::numbers::pi);
            CHECK(g.aod_ap < std::numbers::pi);
            CHECK(g.aod_ue >= -std::numbers::pi);
            CHECK(g.aod_ue < std::numbers::pi);
        }
}

TEST_CASE("pathloss values at reference distances")
{
    auto db = [](double g) { return 10.0 * std::log10(g); };
    CHECK(db(large_scale_gain(1.0)) == doctest::Approx(-30.18).epsilon(1e-12));
    CHECK(db(large_scale_gain(10.0)) == doctest::Approx(-56.18).epsilon(1e-12));
    CHECK(db(large_scale_gain(100.0)) == doctest::Approx(-82.18).epsilon(1e-12));
    CHECK_THROWS_AS(large_scale_gain(0.0), std::invalid_argument);
    CHECK_THROWS_AS(large_scale_gain(-3.0), std::invalid_argument);
    for (double d = 1.0; d < 2000.0; d *= 1.3)
        CHECK(large_scale_gain(d * 1.01) < large_scale_gain(d));
}

TEST_CASE("minimum distance clamp")
{
    CHECK(effective_distance(0.0) == 10.0);
    CHECK(effective_distance(3.0) == 10.0);
    CHECK(effective_distance(50.0) == 50.0);
    PathlossModel model;
    model.min_distance = 25.0;
    CHECK(effective_distance(20.0, model) == 25.0);
}

TEST_CASE("Rician factor model")
{
    CHECK(rician_factor(100.0) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(rician_factor(1300.0 / 3.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rician_factor(100.0, FadingMode::kRayleigh) == 0.0);
    CHECK(rician_factor(0.0, FadingMode::kRayleigh) == 0.0);
    for (double d = 0.0; d < 2000.0; d += 37.0)
        CHECK(rician_factor(d + 1.0) < rician_factor(d));
}
