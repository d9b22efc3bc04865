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

#ifndef CFMIMO_GEOMETRY_HPP
#define CFMIMO_GEOMETRY_HPP

#include <cstdint>
#include <vector>

namespace cfmimo
{

struct Point
{
    double x = 0.0;
    double y = 0.0;
};

// Random network drop on a square torus. UE arrays carry a random orientation that is added
// to the geometric angle of every AP seen from that UE.
struct Layout
{
    std::vector<Point> ap_positions;
    std::vector<Point> ue_positions;
    std::vector<double> ue_orientation; // radians, one per UE
    double area_side = 0.0;
};

struct LinkGeometry
{
    double distance = 0.0; // wrap-around distance in meters
    double aod_ap = 0.0;   // angle of the UE seen from the AP array, [-pi, pi)
    double aod_ue = 0.0;   // angle of the AP seen from the UE array, [-pi, pi)
};

enum class FadingMode
{
    kRician,
    kRayleigh,
};

// COST 321 Walfish-Ikegami style pathloss with a floor on the distance.
struct PathlossModel
{
    double intercept_db = -30.18;
    double slope = 26.0;
    double min_distance = 10.0;
    double shadow_std_db = 0.0; // log-normal shadowing, off by default
};

Layout place_network(int m_aps, int k_ues, double area_side, std::uint64_t seed);

// Shortest displacement b - a on the torus of side `side`; each component in [-side/2, side/2].
Point wrap_displacement(const Point &a, const Point &b, double side);
double wrap_distance(const Point &a, const Point &b, double side);

// Wraps an angle to [-pi, pi).
double wrap_angle(double angle);

LinkGeometry link_geometry(const Layout &layout, int m, int k);

// Distance fed to the pathloss and Rician-factor models: max(d, min_distance).
double effective_distance(double distance, const PathlossModel &model = {});

// Linear gain 10^((intercept - slope * log10(d)) / 10), d in meters. Throws for d <= 0; callers
// clamp with effective_distance first.
double large_scale_gain(double distance, const PathlossModel &model = {});

// kappa = 10^(1.3 - 0.003 d); zero in Rayleigh mode.
double rician_factor(double distance, FadingMode mode = FadingMode::kRician);

} // namespace cfmimo

#endif
