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

#include "cfmimo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cfmimo
{

Layout place_network(int m_aps, int k_ues, double area_side, std::uint64_t seed)
{
    if (m_aps < 1)
        throw std::invalid_argument("place_network: m_aps must be >= 1");
    if (k_ues < 1)
        throw std::invalid_argument("place_network: k_ues must be >= 1");
    if (!(area_side > 0.0))
        throw std::invalid_argument("place_network: area_side must be > 0");

    Rng rng(seed);
    Layout layout;
    layout.area_side = area_side;
    auto draw = [&] {
        const double x = rng.uniform(0.0, area_side);
        const double y = rng.uniform(0.0, area_side);
        return Point{x, y};
    };
    for (int m = 0; m < m_aps; ++m)
        layout.ap_positions.push_back(draw());
    for (int k = 0; k < k_ues; ++k)
        layout.ue_positions.push_back(draw());
    for (int k = 0; k < k_ues; ++k)
        layout.ue_orientation.push_back(rng.uniform(-std::numbers::pi, std::numbers::pi));
    return layout;
}

Point wrap_displacement(const Point &a, const Point &b, double side)
{
    auto wrap = [side](double d) {
        d = std::fmod(d, side);
        if (d > side / 2.0)
            d -= side;
        else if (d < -side / 2.0)
            d += side;
        return d;
    };
    return {wrap(b.x - a.x), wrap(b.y - a.y)};
}

double wrap_distance(const Point &a, const Point &b, double side)
{
    const Point d = wrap_displacement(a, b, side);
    return std::hypot(d.x, d.y);
}

double wrap_angle(double angle)
{
    double w = std::fmod(angle + std::numbers::pi, 2.0 * std::numbers::pi);
    if (w < 0.0)
        w += 2.0 * std::numbers::pi;
    w -= std::numbers::pi;
    return w >= std::numbers::pi ? -std::numbers::pi : w;
}

LinkGeometry link_geometry(const Layout &layout, int m, int k)
{
    const Point &ap = layout.ap_positions.at(m);
    const Point &ue = layout.ue_positions.at(k);
    const Point d = wrap_displacement(ap, ue, layout.area_side);
    LinkGeometry g;
    g.distance = std::hypot(d.x, d.y);
    g.aod_ap = wrap_angle(std::atan2(d.y, d.x));
    g.aod_ue = wrap_angle(std::atan2(-d.y, -d.x) + layout.ue_orientation.at(k));
    return g;
}

double effective_distance(double distance, const PathlossModel &model)
{
    return std::max(distance, model.min_distance);
}

double large_scale_gain(double distance, const PathlossModel &model)
{
    if (!(distance > 0.0))
        throw std::invalid_argument("large_scale_gain: distance must be > 0");
    return std::pow(10.0, (model.intercept_db - model.slope * std::log10(distance)) / 10.0);
}

double rician_factor(double distance, FadingMode mode)
{
    if (mode == FadingMode::kRayleigh)
        return 0.0;
    return std::pow(10.0, 1.3 - 0.003 * distance);
}

} // namespace cfmimo
