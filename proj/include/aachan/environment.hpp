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

#ifndef AACHAN_ENVIRONMENT_HPP
#define AACHAN_ENVIRONMENT_HPP

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

namespace aachan {

// Constants of the sigmoid that models the air-to-ground LOS probability
// as a function of elevation angle. The sigmoid evaluates in percent
// (a and b are percentages, c and d are degrees, e is dimensionless).
struct GrLogistic {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 1.0;
    double e = 1.0;
};

// One built-up environment class as parameterized by ITU-R Rec. P.1410:
// alpha = ratio of built area to total area, beta = buildings per km^2,
// gamma = Rayleigh scale of the building-height distribution in meters.
struct EnvironmentParams {
    std::string name;
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    GrLogistic gr_logistic;

    void validate() const {
        if (!(alpha >= 0.0 && alpha <= 1.0))
            throw std::invalid_argument("EnvironmentParams: alpha must be in [0,1], got " + std::to_string(alpha));
        if (!(beta > 0.0))
            throw std::invalid_argument("EnvironmentParams: beta must be positive, got " + std::to_string(beta));
        if (!(gamma > 0.0))
            throw std::invalid_argument("EnvironmentParams: gamma must be positive, got " + std::to_string(gamma));
        if (!(gr_logistic.d > 0.0))
            throw std::invalid_argument("EnvironmentParams: gr_logistic.d must be positive");
        if (!(gr_logistic.e > 0.0))
            throw std::invalid_argument("EnvironmentParams: gr_logistic.e must be positive");
    }
};

inline EnvironmentParams suburban_env() {
    return {"suburban", 0.1, 750.0, 8.0, {101.6, 0.0, 0.0, 3.25, 1.241}};
}

inline EnvironmentParams urban_env() {
    return {"urban", 0.3, 500.0, 15.0, {120.0, 0.0, 0.0, 24.30, 1.229}};
}

inline EnvironmentParams dense_urban_env() {
    return {"dense-urban", 0.5, 300.0, 20.0, {187.3, 0.0, 0.0, 82.10, 1.478}};
}

inline EnvironmentParams high_rise_env() {
    return {"high-rise", 0.5, 300.0, 50.0, {352.0, -1.37, -53.0, 173.80, 4.670}};
}

inline std::array<EnvironmentParams, 4> all_presets() {
    return {suburban_env(), urban_env(), dense_urban_env(), high_rise_env()};
}

inline EnvironmentParams preset_by_name(std::string_view name) {
    for (const auto &env : all_presets())
        if (env.name == name)
            return env;
    throw std::invalid_argument("unknown environment preset: " + std::string(name) +
                                " (expected suburban|urban|dense-urban|high-rise)");
}

// Reference coefficients of the altitude-dependent shadowing law
// sigma(h) = p*exp(-q*h) + r, per environment class. Used for side-by-side
// reporting next to freshly fitted values.
struct ShadowReference {
    double p2;
    double q2;
    double r2;
};

inline ShadowReference shadow_reference(std::string_view env_name) {
    if (env_name == "suburban") return {2.013, 0.0167, 1.608};
    if (env_name == "urban") return {1.002, 0.0250, 1.369};
    if (env_name == "dense-urban") return {3.936, 0.0286, 1.405};
    if (env_name == "high-rise") return {11.001, 0.0222, 1.286};
    throw std::invalid_argument("no shadow reference for environment: " + std::string(env_name));
}

} // namespace aachan

#endif // AACHAN_ENVIRONMENT_HPP
