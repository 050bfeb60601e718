// SPDX-License-Identifier: Apache-2.0
//
// aachan - air-to-air propagation channel toolkit for built-up areas
// Copyright (C) 2026 aachan contributors
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

#ifndef AACHAN_CITY_HPP
#define AACHAN_CITY_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aachan/environment.hpp"
#include "aachan/geometry.hpp"
#include "aachan/rng.hpp"

#include <json.hpp>

namespace aachan {

// Inverse-CDF sample of the Rayleigh building-height distribution.
// gamma is the scale in meters, u a uniform variate strictly inside (0,1).
inline double sample_building_height(double gamma, double u) {
    if (!(gamma > 0.0))
        throw std::invalid_argument("sample_building_height: gamma must be positive");
    if (!(u > 0.0 && u < 1.0))
        throw std::invalid_argument("sample_building_height: u must lie strictly in (0,1)");
    return gamma * std::sqrt(-2.0 * std::log1p(-u));
}

inline double rayleigh_cdf(double h, double gamma) {
    if (h <= 0.0) return 0.0;
    return 1.0 - std::exp(-h * h / (2.0 * gamma * gamma));
}

inline double mean_building_height(const EnvironmentParams &env) {
    return env.gamma * std::sqrt(std::acos(-1.0) / 2.0);
}

// Mean of the Rayleigh height law truncated to [0, h_max): the expected
// height of the buildings below a platform. Converges to the plain mean for
// h_max >> gamma; keeps the reflector below the platform when it does not.
inline double effective_building_height(const EnvironmentParams &env, double h_max) {
    if (!(h_max > 0.0))
        throw std::invalid_argument("effective_building_height: h_max must be positive");
    const double g = env.gamma;
    const double a = h_max / (g * std::sqrt(2.0));
    const double cdf = -std::expm1(-a * a);
    if (cdf <= 0.0)
        return 0.5 * h_max; // vanishing mass below the platform
    const double num =
        g * std::sqrt(std::acos(-1.0) / 2.0) * std::erf(a) - h_max * std::exp(-a * a);
    return num / cdf;
}

struct GridDimensions {
    double plot_width_m; // W
    double spacing_m;    // S
};

// Manhattan-grid cell geometry implied by the (alpha, beta) statistics:
// W = 1000*sqrt(alpha/beta), S = 1000/sqrt(beta) - W.
inline GridDimensions grid_dimensions(const EnvironmentParams &env) {
    env.validate();
    const double w = 1000.0 * std::sqrt(env.alpha / env.beta);
    const double s = 1000.0 / std::sqrt(env.beta) - w;
    return {w, s};
}

// A generated Manhattan-grid scene. Immutable after construction and safe
// to share across threads.
struct CityMap {
    double side_d_km = 0.0;
    double plot_width_m = 0.0;
    double spacing_m = 0.0;
    std::uint64_t seed = 0;
    std::vector<Building> buildings;

    double side_m() const { return side_d_km * 1000.0; }
};

namespace detail {

// Grid origin uses a half-spacing margin so the pattern is translation
// symmetric. Cells are laid until the map edge; a cell starting beyond the
// edge is dropped, a cell crossing it is clipped.
inline std::vector<double> plot_starts(double side_m, double w, double s) {
    std::vector<double> starts;
    const double period = w + s;
    const int n = static_cast<int>(std::ceil(side_m / period));
    for (int i = 0; i < n; ++i) {
        const double x0 = s / 2.0 + i * period;
        if (x0 >= side_m)
            break;
        if (std::min(x0 + w, side_m) - x0 > 1e-12)
            starts.push_back(x0);
    }
    return starts;
}

} // namespace detail

inline CityMap generate_city(const EnvironmentParams &env, double side_d_km, std::uint64_t seed) {
    env.validate();
    if (!(side_d_km > 0.0))
        throw std::invalid_argument("generate_city: side_d_km must be positive");

    const auto [w, s] = grid_dimensions(env);
    CityMap city;
    city.side_d_km = side_d_km;
    city.plot_width_m = w;
    city.spacing_m = s;
    city.seed = seed;

    if (env.alpha == 0.0)
        return city; // no built area: a legitimate open-field scene

    const double side = side_d_km * 1000.0;
    const auto starts = detail::plot_starts(side, w, s);
    if (starts.empty())
        throw std::invalid_argument("generate_city: map side " + std::to_string(side_d_km) +
                                    " km fits zero buildings for this environment");

    city.buildings.reserve(starts.size() * starts.size());
    std::uint64_t index = 0;
    for (double x0 : starts) {
        for (double y0 : starts) {
            Building b;
            b.x0 = x0;
            b.y0 = y0;
            b.x1 = std::min(x0 + w, side);
            b.y1 = std::min(y0 + w, side);
            // one RNG substream per building index keeps parallel or partial
            // generation deterministic
            Rng r(substream_seed(seed, index++));
            b.height = sample_building_height(env.gamma, r.uniform_open01());
            city.buildings.push_back(b);
        }
    }
    return city;
}

struct OcclusionHit {
    std::size_t building_index;
    double t_enter; // entry parameter along p1->p2 in [0,1)
};

// First building whose interior the open segment p1->p2 crosses, ordered by
// entry point. Grazing contact with a face does not occlude.
inline std::optional<OcclusionHit> first_occluder(const CityMap &city, Vec3 p1, Vec3 p2) {
    if (p1 == p2)
        throw std::invalid_argument("first_occluder: segment endpoints coincide");
    std::optional<OcclusionHit> best;
    const double zmin = std::min(p1.z, p2.z);
    for (std::size_t i = 0; i < city.buildings.size(); ++i) {
        const Building &b = city.buildings[i];
        if (b.height <= zmin)
            continue; // segment never dips below this roof
        if (auto t = detail::segment_box_entry(b, p1, p2)) {
            if (!best || *t < best->t_enter)
                best = OcclusionHit{i, *t};
        }
    }
    return best;
}

inline bool segment_occluded(const CityMap &city, Vec3 p1, Vec3 p2) {
    if (p1 == p2)
        throw std::invalid_argument("segment_occluded: segment endpoints coincide");
    const double zmin = std::min(p1.z, p2.z);
    for (const Building &b : city.buildings) {
        if (b.height <= zmin)
            continue;
        if (detail::segment_box_entry(b, p1, p2))
            return true;
    }
    return false;
}

// Index of the building whose footprint contains (x, y), if any. Footprints
// are half-open so a point on a shared edge belongs to at most one building;
// a point exactly on a trailing edge counts as open ground.
inline std::optional<std::size_t> footprint_at(const CityMap &city, double x, double y) {
    for (std::size_t i = 0; i < city.buildings.size(); ++i)
        if (city.buildings[i].footprint_contains(x, y))
            return i;
    return std::nullopt;
}

inline nlohmann::json to_json(const CityMap &city) {
    nlohmann::json j;
    j["seed"] = city.seed;
    j["side_d_km"] = city.side_d_km;
    j["w_m"] = city.plot_width_m;
    j["s_m"] = city.spacing_m;
    auto &arr = j["buildings"] = nlohmann::json::array();
    for (const Building &b : city.buildings)
        arr.push_back({{"x0", b.x0}, {"y0", b.y0}, {"x1", b.x1}, {"y1", b.y1}, {"h", b.height}});
    return j;
}

inline CityMap city_from_json(const nlohmann::json &j) {
    CityMap city;
    city.seed = j.at("seed").get<std::uint64_t>();
    city.side_d_km = j.at("side_d_km").get<double>();
    city.plot_width_m = j.at("w_m").get<double>();
    city.spacing_m = j.at("s_m").get<double>();
    for (const auto &e : j.at("buildings")) {
        Building b;
        b.x0 = e.at("x0").get<double>();
        b.y0 = e.at("y0").get<double>();
        b.x1 = e.at("x1").get<double>();
        b.y1 = e.at("y1").get<double>();
        b.height = e.at("h").get<double>();
        b.validate();
        city.buildings.push_back(b);
    }
    return city;
}

} // namespace aachan

#endif // AACHAN_CITY_HPP
