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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "aachan/propagation.hpp"
#include "aachan/rng.hpp"

using namespace aachan;
using Catch::Matchers::WithinAbs;

namespace {

Link make_link(double h, double d, double f_hz, Polarization pol = Polarization::horizontal,
               double eps_b = 4.44, double eps_g = 3.0) {
    Link link;
    link.tx = {0.0, 0.0, h};
    link.rx = {d, 0.0, h};
    link.frequency_hz = f_hz;
    link.polarization = pol;
    link.eps_building = eps_b;
    link.eps_ground = eps_g;
    return link;
}

EnvironmentParams zero_alpha_env() {
    EnvironmentParams env = urban_env();
    env.name = "open";
    env.alpha = 0.0;
    return env;
}

// independent phasor oracle: accumulate the three field terms in rectangular
// form, never reusing the complex-exponential path of the implementation
double rectangular_phasor_pl_db(const Link &link, const EnvironmentParams &env, double h_b,
                                double p_g) {
    const double h = link.tx.z;
    const double d = horizontal_distance(link.tx, link.rx);
    const double lambda = speed_of_light / link.frequency_hz;
    const double drb = std::sqrt(d * d + 4.0 * (h - h_b) * (h - h_b));
    const double drg = std::sqrt(d * d + 4.0 * h * h);
    const double thb = rad_to_deg(std::atan2(2.0 * (h - h_b), d));
    const double thg = rad_to_deg(std::atan2(2.0 * h, d));
    const double gb = reflection_coefficient(thb, link.eps_building, link.polarization);
    const double gg = reflection_coefficient(thg, link.eps_ground, link.polarization);
    const double phb = 2.0 * pi / lambda * (d - drb);
    const double phg = 2.0 * pi / lambda * (d - drg);
    const double re = 1.0 + gb * env.alpha * std::cos(phb) + gg * (1.0 - env.alpha) * p_g * std::cos(phg);
    const double im = gb * env.alpha * std::sin(phb) + gg * (1.0 - env.alpha) * p_g * std::sin(phg);
    const double mag = std::sqrt(re * re + im * im);
    return 20.0 * std::log10(4.0 * pi * d / lambda) - 20.0 * std::log10(mag);
}

} // namespace

TEST_CASE("free-space loss in the km/MHz convention") {
    CHECK_THAT(fspl_db(1.0, 1000.0), WithinAbs(92.45, 1e-9));
    CHECK_THAT(fspl_db(0.3, 4000.0), WithinAbs(94.03, 0.01));
    CHECK_THAT(fspl_db(0.001, 1.0), WithinAbs(-27.55, 1e-9));

    CHECK_THROWS_AS(fspl_db(0.0, 1000.0), std::invalid_argument);
    CHECK_THROWS_AS(fspl_db(1.0, -5.0), std::invalid_argument);
}

TEST_CASE("reflection coefficient") {
    SECTION("grazing limit is -1 for both polarizations") {
        for (auto pol : {Polarization::horizontal, Polarization::vertical}) {
            CHECK_THAT(reflection_coefficient(1e-7, 4.0, pol), WithinAbs(-1.0, 1e-6));
            CHECK_THAT(reflection_coefficient(1e-7, 4.0, pol, true), WithinAbs(-1.0, 1e-6));
        }
    }

    SECTION("normal incidence, HP, eps 4") {
        CHECK_THAT(reflection_coefficient(90.0, 4.0, Polarization::horizontal),
                   WithinAbs(-1.0 / 3.0, 1e-12));
    }

    SECTION("VP crosses zero exactly once, at the polarizing angle") {
        const double eps = 3.0;
        auto vp = [&](double th) { return reflection_coefficient(th, eps, Polarization::vertical); };

        int sign_changes = 0;
        double prev = vp(0.01);
        for (double th = 0.1; th <= 90.0; th += 0.1) {
            const double v = vp(th);
            if (prev < 0.0 && v >= 0.0)
                ++sign_changes;
            if (prev > 0.0 && v <= 0.0)
                ++sign_changes;
            prev = v;
        }
        CHECK(sign_changes == 1);

        // bisection on the VP numerator locates the zero
        double lo = 1.0, hi = 89.0;
        REQUIRE(vp(lo) < 0.0);
        REQUIRE(vp(hi) > 0.0);
        for (int i = 0; i < 80; ++i) {
            const double mid = 0.5 * (lo + hi);
            (vp(mid) < 0.0 ? lo : hi) = mid;
        }
        // eps*sin(th) = sqrt(eps - cos^2 th) has the closed-form solution
        // sin^2(th) = 1/(eps+1), i.e. 30 degrees for eps = 3
        CHECK_THAT(0.5 * (lo + hi), WithinAbs(30.0, 1e-6));
    }

    SECTION("magnitude bounded by one across the domain") {
        Rng rng(44);
        for (int i = 0; i < 2000; ++i) {
            const double th = rng.uniform(1e-6, 90.0);
            const double eps = rng.uniform(1.0 + 1e-6, 30.0);
            for (auto pol : {Polarization::horizontal, Polarization::vertical}) {
                const double g = reflection_coefficient(th, eps, pol);
                CHECK(std::abs(g) <= 1.0 + 1e-12);
            }
        }
    }

    SECTION("literal radicand variant differs away from grazing") {
        const double std_form = reflection_coefficient(45.0, 4.44, Polarization::horizontal);
        const double lit_form = reflection_coefficient(45.0, 4.44, Polarization::horizontal, true);
        CHECK(std::abs(std_form - lit_form) > 1e-3);
    }

    SECTION("domain errors") {
        CHECK_THROWS_AS(reflection_coefficient(0.0, 4.0, Polarization::horizontal),
                        std::invalid_argument);
        CHECK_THROWS_AS(reflection_coefficient(91.0, 4.0, Polarization::horizontal),
                        std::invalid_argument);
        CHECK_THROWS_AS(reflection_coefficient(45.0, 1.0, Polarization::horizontal),
                        std::invalid_argument);
    }
}

TEST_CASE("two-ray specular geometry") {
    SECTION("symmetric right triangle") {
        const auto g = two_ray_geometry(100.0, 0.0, 200.0);
        CHECK_THAT(g.d_los_m, WithinAbs(200.0, 1e-12));
        CHECK_THAT(g.d_ref_m, WithinAbs(282.84, 0.01));
        CHECK_THAT(g.theta_deg, WithinAbs(45.0, 1e-12));
    }
    SECTION("elevated reflector") {
        const auto g = two_ray_geometry(50.0, 20.0, 300.0);
        CHECK_THAT(g.d_ref_m, WithinAbs(305.94, 0.01));
        CHECK_THAT(g.theta_deg, WithinAbs(11.31, 0.01));
    }
    SECTION("reflector approaching platform altitude") {
        const auto g = two_ray_geometry(100.0, 100.0 - 1e-9, 150.0);
        CHECK_THAT(g.d_ref_m, WithinAbs(150.0, 1e-9));
        CHECK_THAT(g.theta_deg, WithinAbs(0.0, 1e-9));
    }
    SECTION("reflected path never shorter than LOS") {
        Rng rng(5);
        for (int i = 0; i < 1000; ++i) {
            const double h = rng.uniform(1.0, 500.0);
            const double hb = rng.uniform(0.0, h * 0.999);
            const double d = rng.uniform(0.1, 2000.0);
            const auto g = two_ray_geometry(h, hb, d);
            CHECK(g.d_ref_m >= g.d_los_m);
        }
    }
    SECTION("domain errors") {
        CHECK_THROWS_AS(two_ray_geometry(10.0, 10.0, 100.0), std::invalid_argument);
        CHECK_THROWS_AS(two_ray_geometry(10.0, 20.0, 100.0), std::invalid_argument);
        CHECK_THROWS_AS(two_ray_geometry(10.0, 0.0, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(two_ray_geometry(10.0, -1.0, 100.0), std::invalid_argument);
    }
}

TEST_CASE("ground-reflection probability") {
    SECTION("reference points") {
        CHECK_THAT(ground_reflection_probability(90.0, urban_env()), WithinAbs(1.0, 1e-3));
        CHECK_THAT(ground_reflection_probability(0.0, suburban_env()), WithinAbs(0.0, 1e-12));
        CHECK_THAT(ground_reflection_probability(10.0, suburban_env()), WithinAbs(0.663, 0.005));
    }

    SECTION("monotone non-decreasing over the full angle range") {
        for (const auto &env : all_presets()) {
            double prev = ground_reflection_probability(0.0, env);
            for (int t = 1; t <= 90; ++t) {
                const double p = ground_reflection_probability(static_cast<double>(t), env);
                CHECK(p >= prev - 1e-12);
                prev = p;
            }
        }
    }

    SECTION("sparser environments reflect more") {
        const auto sub = suburban_env(), urb = urban_env(), den = dense_urban_env(),
                   hr = high_rise_env();
        for (int t = 20; t <= 70; ++t) {
            const double th = static_cast<double>(t);
            const double ps = ground_reflection_probability(th, sub);
            const double pu = ground_reflection_probability(th, urb);
            const double pd = ground_reflection_probability(th, den);
            const double ph = ground_reflection_probability(th, hr);
            CHECK(ps >= pu);
            CHECK(pu >= pd);
            CHECK(pd >= ph);
        }
    }

    SECTION("saturates near one at vertical incidence") {
        for (const auto &env : all_presets())
            CHECK(ground_reflection_probability(90.0, env) >= 0.995);
    }

    SECTION("domain errors") {
        CHECK_THROWS_AS(ground_reflection_probability(-1.0, urban_env()), std::invalid_argument);
        CHECK_THROWS_AS(ground_reflection_probability(90.5, urban_env()), std::invalid_argument);
    }
}

TEST_CASE("probabilistic two-ray path loss") {
    SECTION("reduces to free space when both reflections vanish") {
        const auto env = zero_alpha_env();
        for (double f_ghz : {1.0, 4.0, 6.0}) {
            for (double d = 1.0; d <= 1000.0; d += 7.3) {
                const auto link = make_link(100.0, d, f_ghz * 1e9);
                const auto br = ptr_path_loss(link, env, 18.8, 0.0);
                const double fs = fspl_db(d / 1000.0, f_ghz * 1000.0);
                CHECK_THAT(br.path_loss_db, WithinAbs(fs, 0.01));
            }
        }
    }

    SECTION("matches an independent rectangular phasor sum") {
        Rng rng(2024);
        for (int i = 0; i < 10000; ++i) {
            EnvironmentParams env = urban_env();
            env.alpha = rng.uniform(0.0, 1.0);
            const double h = rng.uniform(30.0, 500.0);
            const double hb = rng.uniform(0.0, h * 0.95);
            const double d = rng.uniform(1.0, 1500.0);
            const double f = rng.uniform(0.5e9, 8e9);
            const double pg = rng.uniform(0.0, 1.0);
            const auto pol = rng.uniform01() < 0.5 ? Polarization::horizontal : Polarization::vertical;
            const auto link = make_link(h, d, f, pol, rng.uniform(2.0, 8.0), rng.uniform(2.0, 8.0));
            const auto br = ptr_path_loss(link, env, hb, pg);
            const double oracle = rectangular_phasor_pl_db(link, env, hb, pg);
            REQUIRE_THAT(br.path_loss_db, WithinAbs(oracle, 1e-9));
        }
    }

    SECTION("never more than 6.03 dB below free space") {
        Rng rng(77);
        for (int i = 0; i < 5000; ++i) {
            const double h = rng.uniform(25.0, 300.0);
            const double d = rng.uniform(1.0, 1000.0);
            const auto link = make_link(h, d, 4e9);
            const auto br = ptr_path_loss(link, urban_env(), rng.uniform(0.0, 20.0));
            const double fs = fspl_db(d / 1000.0, 4000.0);
            CHECK(br.path_loss_db >= fs - 6.03);
        }
    }

    SECTION("breakdown invariants") {
        Rng rng(78);
        for (int i = 0; i < 2000; ++i) {
            const double h = rng.uniform(25.0, 300.0);
            const double d = rng.uniform(1.0, 1000.0);
            const auto link = make_link(h, d, 4e9);
            const auto br = ptr_path_loss(link, urban_env(), rng.uniform(0.0, 20.0));
            CHECK(br.d_ref_building_m >= br.d_los_m);
            CHECK(br.d_ref_ground_m >= br.d_los_m);
            CHECK(std::abs(br.gamma_b) <= 1.0);
            CHECK(std::abs(br.gamma_g) <= 1.0);
            CHECK(br.dphi_b_rad <= 0.0);
            CHECK(br.dphi_g_rad <= 0.0);
        }
    }

    SECTION("derived ground probability is recorded in the breakdown") {
        const auto link = make_link(100.0, 200.0, 4e9);
        const auto br = ptr_path_loss(link, urban_env(), 18.8);
        CHECK(br.p_g_source == PgSource::derived_from_theta);
        CHECK_THAT(br.p_g, WithinAbs(ground_reflection_probability(br.theta_g_deg, urban_env()), 1e-12));

        const auto forced = ptr_path_loss(link, urban_env(), 18.8, 0.25);
        CHECK(forced.p_g_source == PgSource::explicit_value);
        CHECK_THAT(forced.p_g, WithinAbs(0.25, 1e-12));
    }

    SECTION("domain errors") {
        const auto env = urban_env();
        auto link = make_link(100.0, 200.0, 4e9);
        CHECK_THROWS_AS(ptr_path_loss(link, env, 150.0), std::invalid_argument);
        CHECK_THROWS_AS(ptr_path_loss(link, env, 18.8, 1.5), std::invalid_argument);

        link.rx.z = 101.0; // unequal altitudes
        CHECK_THROWS_AS(ptr_path_loss(link, env, 18.8), std::invalid_argument);

        auto zero_d = make_link(100.0, 0.0, 4e9);
        zero_d.rx = {0.0, 0.0, 100.0 + 1e-12};
        CHECK_THROWS_AS(ptr_path_loss(zero_d, env, 18.8), std::invalid_argument);
    }

    SECTION("literal-radicand option changes the result") {
        const auto link = make_link(100.0, 150.0, 4e9);
        PtrOptions lit;
        lit.paper_literal_fresnel = true;
        const double a = ptr_path_loss(link, urban_env(), 18.8).path_loss_db;
        const double b = ptr_path_loss(link, urban_env(), 18.8, std::nullopt, lit).path_loss_db;
        CHECK(std::abs(a - b) > 1e-6);
    }

    SECTION("exact amplitude ratio damps the reflected terms") {
        const auto link = make_link(100.0, 150.0, 4e9);
        PtrOptions ex;
        ex.exact_amplitude = true;
        const double base = ptr_path_loss(link, urban_env(), 18.8).path_loss_db;
        const double exact = ptr_path_loss(link, urban_env(), 18.8, std::nullopt, ex).path_loss_db;
        CHECK(std::abs(base - exact) > 1e-9);
        const double fs = fspl_db(0.15, 4000.0);
        CHECK(std::abs(exact - fs) <= std::abs(base - fs) + 1.0);
    }
}
