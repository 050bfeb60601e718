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

#ifndef AACHAN_PROPAGATION_HPP
#define AACHAN_PROPAGATION_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "aachan/environment.hpp"
#include "aachan/geometry.hpp"

namespace aachan {

inline constexpr double speed_of_light = 299792458.0;
inline constexpr double pi = 3.141592653589793238462643383279502884;

inline double deg_to_rad(double deg) { return deg * pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / pi; }

enum class Polarization { horizontal, vertical };

inline Polarization polarization_from_string(std::string_view s) {
    if (s == "horizontal" || s == "h") return Polarization::horizontal;
    if (s == "vertical" || s == "v") return Polarization::vertical;
    throw std::invalid_argument("unknown polarization: " + std::string(s));
}

inline const char *to_string(Polarization p) {
    return p == Polarization::horizontal ? "horizontal" : "vertical";
}

// One transmitter/receiver pair. Positions in meters, frequency in Hz,
// permittivities are the real parts of the relative permittivity.
struct Link {
    Vec3 tx;
    Vec3 rx;
    double frequency_hz = 0.0;
    Polarization polarization = Polarization::horizontal;
    double eps_building = 4.44;
    double eps_ground = 3.0;

    void validate() const {
        if (!(frequency_hz > 0.0))
            throw std::invalid_argument("Link: frequency must be positive");
        if (!(eps_building > 1.0))
            throw std::invalid_argument("Link: eps_building must exceed 1");
        if (!(eps_ground > 1.0))
            throw std::invalid_argument("Link: eps_ground must exceed 1");
        if (tx == rx)
            throw std::invalid_argument("Link: tx and rx coincide");
    }

    double wavelength_m() const { return speed_of_light / frequency_hz; }
};

// Free-space path loss with the km/MHz convention:
// 32.45 + 20 log10(d_km) + 20 log10(f_MHz).
inline double fspl_db(double distance_km, double frequency_mhz) {
    if (!(distance_km > 0.0))
        throw std::invalid_argument("fspl_db: distance must be positive");
    if (!(frequency_mhz > 0.0))
        throw std::invalid_argument("fspl_db: frequency must be positive");
    return 32.45 + 20.0 * std::log10(distance_km) + 20.0 * std::log10(frequency_mhz);
}

// Exact single-ray loss 20 log10(4*pi*d/lambda), SI units.
inline double los_path_loss_db(double distance_m, double frequency_hz) {
    if (!(distance_m > 0.0))
        throw std::invalid_argument("los_path_loss_db: distance must be positive");
    if (!(frequency_hz > 0.0))
        throw std::invalid_argument("los_path_loss_db: frequency must be positive");
    const double lambda = speed_of_light / frequency_hz;
    return 20.0 * std::log10(4.0 * pi * distance_m / lambda);
}

// Fresnel reflection coefficient at grazing/elevation angle theta (degrees).
// `paper_literal` switches the radicand sign to +cos^2(theta), replicating a
// published variant of the formula; the default is the standard form.
inline double reflection_coefficient(double theta_deg, double eps_r, Polarization pol,
                                     bool paper_literal = false) {
    if (!(theta_deg > 0.0 && theta_deg <= 90.0))
        throw std::invalid_argument("reflection_coefficient: theta must be in (0, 90] degrees");
    if (!(eps_r > 1.0))
        throw std::invalid_argument("reflection_coefficient: eps_r must exceed 1");
    const double th = deg_to_rad(theta_deg);
    const double s = std::sin(th);
    const double c2 = std::cos(th) * std::cos(th);
    if (paper_literal) {
        const double root = (pol == Polarization::horizontal)
                                ? std::sqrt(eps_r + c2)
                                : std::sqrt(eps_r + c2 / eps_r);
        return (s - root) / (s + root);
    }
    const double root = std::sqrt(eps_r - c2);
    if (pol == Polarization::horizontal)
        return (s - root) / (s + root);
    return (eps_r * s - root) / (eps_r * s + root);
}

struct TwoRayGeometry {
    double d_los_m;
    double d_ref_m;
    double theta_deg; // grazing angle at the specular point
};

// Specular two-ray geometry for equal-altitude endpoints at height h above
// a horizontal reflector at height h_b (ground: h_b = 0), separated by
// horizontal distance d.
inline TwoRayGeometry two_ray_geometry(double h, double h_b, double d) {
    if (!(h_b >= 0.0))
        throw std::invalid_argument("two_ray_geometry: reflector height must be non-negative");
    if (!(h > h_b))
        throw std::invalid_argument("two_ray_geometry: altitude must exceed reflector height");
    if (!(d > 0.0))
        throw std::invalid_argument("two_ray_geometry: horizontal distance must be positive");
    const double dz = 2.0 * (h - h_b);
    return {d, std::sqrt(d * d + dz * dz), rad_to_deg(std::atan2(dz, d))};
}

// Probability that the ground specular reflection of an equal-altitude link
// exists, as a function of the grazing angle. The underlying air-to-ground
// LOS sigmoid evaluates in percent and can exceed 100 by construction of its
// constants, so it is clamped to [0,1] before squaring.
inline double ground_reflection_probability(double theta_deg, const EnvironmentParams &env) {
    if (!(theta_deg >= 0.0 && theta_deg <= 90.0))
        throw std::invalid_argument("ground_reflection_probability: theta must be in [0, 90] degrees");
    env.validate();
    const GrLogistic &g = env.gr_logistic;
    const double x = (theta_deg - g.c) / g.d;
    if (x < 0.0)
        throw std::invalid_argument("ground_reflection_probability: theta below the sigmoid "
                                    "offset c is outside the model's domain");
    const double p_los_percent = g.a - (g.a - g.b) / (1.0 + std::pow(x, g.e));
    const double p = std::clamp(p_los_percent / 100.0, 0.0, 1.0);
    return p * p;
}

enum class PgSource { explicit_value, derived_from_theta };

// Per-link decomposition of the probabilistic two-ray evaluation.
struct TwoRayBreakdown {
    double d_los_m = 0.0;
    double d_ref_building_m = 0.0;
    double d_ref_ground_m = 0.0;
    double theta_b_deg = 0.0;
    double theta_g_deg = 0.0;
    double gamma_b = 0.0;
    double gamma_g = 0.0;
    double dphi_b_rad = 0.0;
    double dphi_g_rad = 0.0;
    double path_loss_db = 0.0;
    double p_g = 0.0;
    PgSource p_g_source = PgSource::derived_from_theta;
    bool deep_fade = false;
};

struct PtrOptions {
    bool paper_literal_fresnel = false;
    // Multiply each reflected term by d_los/d_ref. Off by default: the
    // closed-form model treats reflected amplitudes as unit ratio.
    bool exact_amplitude = false;
};

namespace detail {

inline double equal_altitude_of(const Link &link) {
    const double scale = std::max({1.0, std::abs(link.tx.z), std::abs(link.rx.z)});
    if (std::abs(link.tx.z - link.rx.z) > 1e-9 * scale)
        throw std::invalid_argument("ptr_path_loss: endpoints must share one altitude");
    return link.tx.z;
}

} // namespace detail

// Probabilistic two-ray path loss: coherent LOS field plus the building-roof
// reflection weighted by the built-area ratio and the ground reflection
// weighted by (1-alpha) and the ground-reflection probability.
// h_b is the effective roof height entering the building term; pass
// effective_building_height(env, h) for the deterministic default or a
// sampled truncated height for stochastic evaluation. p_g may be forced;
// by default it is derived from the ground grazing angle.
inline TwoRayBreakdown ptr_path_loss(const Link &link, const EnvironmentParams &env, double h_b,
                                     std::optional<double> p_g = std::nullopt,
                                     const PtrOptions &opt = {}) {
    link.validate();
    env.validate();
    const double h = detail::equal_altitude_of(link);
    if (!(h > h_b))
        throw std::invalid_argument("ptr_path_loss: altitude must exceed the effective building height");
    if (p_g && !(*p_g >= 0.0 && *p_g <= 1.0))
        throw std::invalid_argument("ptr_path_loss: p_g must lie in [0,1]");

    const double d = horizontal_distance(link.tx, link.rx);
    if (!(d > 0.0))
        throw std::invalid_argument("ptr_path_loss: zero horizontal separation");

    const double lambda = link.wavelength_m();
    const TwoRayGeometry gb = two_ray_geometry(h, h_b, d);
    const TwoRayGeometry gg = two_ray_geometry(h, 0.0, d);

    TwoRayBreakdown out;
    out.d_los_m = d;
    out.d_ref_building_m = gb.d_ref_m;
    out.d_ref_ground_m = gg.d_ref_m;
    out.theta_b_deg = gb.theta_deg;
    out.theta_g_deg = gg.theta_deg;
    out.gamma_b = reflection_coefficient(gb.theta_deg, link.eps_building, link.polarization,
                                         opt.paper_literal_fresnel);
    out.gamma_g = reflection_coefficient(gg.theta_deg, link.eps_ground, link.polarization,
                                         opt.paper_literal_fresnel);
    // phase lag of each reflected path relative to LOS; non-positive since
    // the reflected path is never shorter
    out.dphi_b_rad = 2.0 * pi / lambda * (d - gb.d_ref_m);
    out.dphi_g_rad = 2.0 * pi / lambda * (d - gg.d_ref_m);
    if (p_g) {
        out.p_g = *p_g;
        out.p_g_source = PgSource::explicit_value;
    } else {
        out.p_g = ground_reflection_probability(gg.theta_deg, env);
        out.p_g_source = PgSource::derived_from_theta;
    }

    const double amp_b = opt.exact_amplitude ? d / gb.d_ref_m : 1.0;
    const double amp_g = opt.exact_amplitude ? d / gg.d_ref_m : 1.0;
    const std::complex<double> bracket =
        1.0 +
        out.gamma_b * amp_b * env.alpha * std::polar(1.0, out.dphi_b_rad) +
        out.gamma_g * amp_g * (1.0 - env.alpha) * out.p_g * std::polar(1.0, out.dphi_g_rad);

    const double mag = std::abs(bracket);
    if (mag == 0.0) {
        out.deep_fade = true;
        out.path_loss_db = std::numeric_limits<double>::infinity();
        return out;
    }
    out.path_loss_db = los_path_loss_db(d, link.frequency_hz) - 20.0 * std::log10(mag);
    return out;
}

} // namespace aachan

#endif // AACHAN_PROPAGATION_HPP
