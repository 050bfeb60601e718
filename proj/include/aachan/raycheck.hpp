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

#ifndef AACHAN_RAYCHECK_HPP
#define AACHAN_RAYCHECK_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "aachan/city.hpp"
#include "aachan/environment.hpp"
#include "aachan/propagation.hpp"
#include "aachan/rng.hpp"

namespace aachan {

enum class LinkCondition {
    los_and_building_reflection,
    los_and_ground_reflection,
    los_only,
    los_blocked,
};

inline const char *to_string(LinkCondition c) {
    switch (c) {
    case LinkCondition::los_and_building_reflection: return "los_and_building_reflection";
    case LinkCondition::los_and_ground_reflection: return "los_and_ground_reflection";
    case LinkCondition::los_only: return "los_only";
    case LinkCondition::los_blocked: return "los_blocked";
    }
    return "?";
}

struct LinkSample {
    Link link;
    LinkCondition condition = LinkCondition::los_only;
    std::optional<TwoRayBreakdown> breakdown; // absent for los_blocked
    std::uint64_t city_seed = 0;
};

// Classify one equal-altitude link against a city. The specular point sits
// at the horizontal midpoint: over a footprint the reflector is that roof,
// over open ground it is the ground plane. A reflection exists only when
// both half-segments to the specular point are unobstructed.
inline LinkSample classify_link(const CityMap &city, const Link &link) {
    link.validate();
    const double h = detail::equal_altitude_of(link);
    const double d = horizontal_distance(link.tx, link.rx);
    if (!(d > 0.0))
        throw std::invalid_argument("classify_link: zero horizontal separation");

    LinkSample sample;
    sample.link = link;
    sample.city_seed = city.seed;

    if (segment_occluded(city, link.tx, link.rx)) {
        sample.condition = LinkCondition::los_blocked;
        return sample;
    }

    TwoRayBreakdown br;
    br.d_los_m = d;
    // the ground geometry is always defined for h > 0
    const TwoRayGeometry gg = two_ray_geometry(h, 0.0, d);
    br.d_ref_ground_m = gg.d_ref_m;
    br.theta_g_deg = gg.theta_deg;
    br.gamma_g = reflection_coefficient(gg.theta_deg, link.eps_ground, link.polarization);
    br.dphi_g_rad = 2.0 * pi / link.wavelength_m() * (d - gg.d_ref_m);
    // neutral building fields until a roof reflector is established
    br.d_ref_building_m = d;
    br.path_loss_db = std::numeric_limits<double>::quiet_NaN();

    const double mx = 0.5 * (link.tx.x + link.rx.x);
    const double my = 0.5 * (link.tx.y + link.rx.y);

    const auto roof = footprint_at(city, mx, my);
    if (roof && city.buildings[*roof].height < h) {
        const double h_b = city.buildings[*roof].height;
        const Vec3 spec{mx, my, h_b};
        if (!segment_occluded(city, link.tx, spec) && !segment_occluded(city, spec, link.rx)) {
            const TwoRayGeometry gb = two_ray_geometry(h, h_b, d);
            br.d_ref_building_m = gb.d_ref_m;
            br.theta_b_deg = gb.theta_deg;
            br.gamma_b = reflection_coefficient(gb.theta_deg, link.eps_building, link.polarization);
            br.dphi_b_rad = 2.0 * pi / link.wavelength_m() * (d - gb.d_ref_m);
            sample.condition = LinkCondition::los_and_building_reflection;
        } else {
            sample.condition = LinkCondition::los_only;
        }
    } else if (!roof) {
        const Vec3 spec{mx, my, 0.0};
        if (!segment_occluded(city, link.tx, spec) && !segment_occluded(city, spec, link.rx)) {
            sample.condition = LinkCondition::los_and_ground_reflection;
        } else {
            sample.condition = LinkCondition::los_only;
        }
    } else {
        // midpoint roof at or above platform altitude cannot host a specular
        // reflection; the direct ray already passed the occlusion test
        sample.condition = LinkCondition::los_only;
    }

    sample.breakdown = br;
    return sample;
}

struct DeterministicPathLoss {
    double path_loss_db;
    bool deep_fade;
};

// Coherent sum of the LOS field and, when present, the single reflected
// field. The reflected amplitude carries the exact d_los/d_ref ratio.
inline DeterministicPathLoss deterministic_path_loss(const LinkSample &sample) {
    if (sample.condition == LinkCondition::los_blocked || !sample.breakdown)
        throw std::invalid_argument("deterministic_path_loss: link has no LOS path");
    const TwoRayBreakdown &br = *sample.breakdown;
    const double base = los_path_loss_db(br.d_los_m, sample.link.frequency_hz);

    std::complex<double> bracket = 1.0;
    if (sample.condition == LinkCondition::los_and_building_reflection)
        bracket += br.gamma_b * (br.d_los_m / br.d_ref_building_m) * std::polar(1.0, br.dphi_b_rad);
    else if (sample.condition == LinkCondition::los_and_ground_reflection)
        bracket += br.gamma_g * (br.d_los_m / br.d_ref_ground_m) * std::polar(1.0, br.dphi_g_rad);

    const double mag = std::abs(bracket);
    if (mag == 0.0)
        return {std::numeric_limits<double>::infinity(), true};
    return {base - 20.0 * std::log10(mag), false};
}

struct GrEstimate {
    double theta_deg;
    double p_gr;
    double std_err;
    std::uint64_t n_links;
};

// Monte Carlo estimate of the ground-reflection probability at a fixed
// grazing angle. Links are placed uniformly over the open ground of fresh
// city realizations with uniform azimuth; the platform altitude is drawn
// just above the 99th-percentile building height and d = 2h/tan(theta).
//
// Each air-to-ground half of the specular pair is tested with the standard
// statistical building-crossing rule for built-up areas: the expected number
// of buildings crossed over a horizontal run r is r*sqrt(alpha*beta)/1000,
// stochastically rounded; the crossings sit at even fractions of the climb
// and compare the ray height against heights drawn from the realized city.
// A wall-exact test against the plot grid would measure the street-canyon
// geometry instead of the crossing statistics the sigmoid model describes,
// and sits far below it at mid angles.
inline GrEstimate estimate_gr_probability(const EnvironmentParams &env, double theta_deg,
                                          std::uint64_t realizations, std::uint64_t links_per_city,
                                          std::uint64_t seed, double side_d_km = 0.0,
                                          unsigned threads = 0);

struct SweepRow {
    double distance_m;
    double path_loss_db;
    std::uint64_t n_cond1 = 0;
    std::uint64_t n_cond2 = 0;
    std::uint64_t n_cond3 = 0;
    std::uint64_t n_blocked = 0;
};

struct SweepResult {
    std::string environment;
    double altitude_m = 0.0;
    double frequency_hz = 0.0;
    std::uint64_t realizations = 0;
    std::vector<SweepRow> rows;
};

struct SweepOptions {
    Polarization polarization = Polarization::horizontal;
    double eps_building = 4.44;
    double eps_ground = 3.0;
    bool linear_power_averaging = false;
    unsigned threads = 0;     // 0 = hardware concurrency
    double side_d_km = 0.0;   // 0 = auto-size to fit the longest link
};

namespace detail {

// Static partition of [0, count) across worker threads. Each item writes its
// own slot, so the result is identical for any thread count.
template <typename Fn>
inline void parallel_over(std::uint64_t count, unsigned threads, Fn &&fn) {
    unsigned n_threads = threads == 0 ? std::thread::hardware_concurrency() : threads;
    if (n_threads == 0)
        n_threads = 1;
    n_threads = static_cast<unsigned>(
        std::min<std::uint64_t>(n_threads, std::max<std::uint64_t>(count, 1)));
    if (n_threads <= 1) {
        for (std::uint64_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::uint64_t i = t; i < count; i += n_threads)
                fn(i);
        });
    }
    for (auto &th : pool)
        th.join();
}

} // namespace detail

inline GrEstimate estimate_gr_probability(const EnvironmentParams &env, double theta_deg,
                                          std::uint64_t realizations, std::uint64_t links_per_city,
                                          std::uint64_t seed, double side_d_km, unsigned threads) {
    env.validate();
    if (!(theta_deg > 0.0 && theta_deg < 90.0))
        throw std::invalid_argument("estimate_gr_probability: theta must lie strictly in (0, 90) degrees");
    if (realizations < 1 || links_per_city < 1)
        throw std::invalid_argument("estimate_gr_probability: need at least one realization and one link");

    const double p99 = env.gamma * std::sqrt(-2.0 * std::log(0.01));
    const double h_max = 1.25 * p99;
    const double tan_theta = std::tan(deg_to_rad(theta_deg));
    const double d_max = 2.0 * h_max / tan_theta;

    double side_m;
    if (side_d_km > 0.0) {
        side_m = side_d_km * 1000.0;
        if (side_m < d_max + 20.0)
            throw std::invalid_argument("estimate_gr_probability: map side " +
                                        std::to_string(side_d_km) + " km cannot contain links of d=" +
                                        std::to_string(d_max) + " m at theta=" + std::to_string(theta_deg));
    } else {
        side_m = std::max(500.0, d_max + 100.0);
    }

    const double crossing_rate = std::sqrt(env.alpha * env.beta) / 1000.0;

    struct Slot {
        std::uint64_t clear = 0;
        std::uint64_t total = 0;
        bool placement_failed = false;
    };
    std::vector<Slot> slots(realizations);

    detail::parallel_over(realizations, threads, [&](std::uint64_t rz) {
        const CityMap city = generate_city(env, side_m / 1000.0, substream_seed(seed, 2 * rz));
        Rng rng(substream_seed(seed, 2 * rz + 1));
        Slot &slot = slots[rz];

        for (std::uint64_t li = 0; li < links_per_city; ++li) {
            bool placed = false;
            for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
                const double gx = rng.uniform(0.0, side_m);
                const double gy = rng.uniform(0.0, side_m);
                if (footprint_at(city, gx, gy))
                    continue; // specular point must sit on open ground
                const double h = rng.uniform(p99, h_max);
                const double d = 2.0 * h / tan_theta;
                const double phi = rng.uniform(0.0, 2.0 * pi);
                const double ux = std::cos(phi), uy = std::sin(phi);
                const double txx = gx - 0.5 * d * ux, txy = gy - 0.5 * d * uy;
                const double rxx = gx + 0.5 * d * ux, rxy = gy + 0.5 * d * uy;
                if (txx < 0.0 || txx > side_m || txy < 0.0 || txy > side_m ||
                    rxx < 0.0 || rxx > side_m || rxy < 0.0 || rxy > side_m)
                    continue;
                placed = true;

                bool clear = true;
                const double run = 0.5 * d; // horizontal run of each half-path
                const double expected = run * crossing_rate;
                for (int half = 0; half < 2 && clear; ++half) {
                    const double fl = std::floor(expected);
                    std::uint64_t crossings = static_cast<std::uint64_t>(fl);
                    if (rng.uniform01() < expected - fl)
                        ++crossings;
                    for (std::uint64_t j = 0; j < crossings; ++j) {
                        const double ray_h =
                            h * (static_cast<double>(j) + 0.5) / static_cast<double>(crossings);
                        const std::size_t bi =
                            static_cast<std::size_t>(rng.uniform_index(city.buildings.size()));
                        if (city.buildings[bi].height > ray_h) {
                            clear = false;
                            break;
                        }
                    }
                }
                slot.clear += clear ? 1 : 0;
                ++slot.total;
            }
            if (!placed) {
                slot.placement_failed = true;
                return;
            }
        }
    });

    std::uint64_t clear_count = 0;
    std::uint64_t total = 0;
    for (const Slot &slot : slots) {
        if (slot.placement_failed)
            throw std::invalid_argument("estimate_gr_probability: could not place a link; "
                                        "map too small or fully built over");
        clear_count += slot.clear;
        total += slot.total;
    }

    const double p = static_cast<double>(clear_count) / static_cast<double>(total);
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(total));
    return {theta_deg, p, se, total};
}

// Average deterministic path loss across city realizations on a distance
// grid. Each realization flies a straight trajectory: tx fixed at a random
// in-map position, rx moving outward along a random azimuth, both at the
// given altitude. Blocked links are excluded from the average and tallied.
inline SweepResult distance_sweep(const EnvironmentParams &env, double altitude_m,
                                  double frequency_hz, double d_min_m, double d_max_m,
                                  double step_m, std::uint64_t realizations, std::uint64_t seed,
                                  const SweepOptions &opt = {}) {
    env.validate();
    if (!(d_min_m > 0.0))
        throw std::invalid_argument("distance_sweep: minimum distance must be positive");
    if (!(d_max_m >= d_min_m))
        throw std::invalid_argument("distance_sweep: empty distance range");
    if (!(step_m > 0.0))
        throw std::invalid_argument("distance_sweep: step must be positive");
    if (!(altitude_m > 0.0))
        throw std::invalid_argument("distance_sweep: altitude must be positive");
    if (!(frequency_hz > 0.0))
        throw std::invalid_argument("distance_sweep: frequency must be positive");
    if (realizations < 1)
        throw std::invalid_argument("distance_sweep: need at least one realization");

    std::vector<double> grid;
    for (double d = d_min_m; d <= d_max_m + 1e-9; d += step_m)
        grid.push_back(d);

    const double margin = 10.0;
    const double side_m = opt.side_d_km > 0.0
                              ? opt.side_d_km * 1000.0
                              : std::max(472.0, d_max_m + 2.0 * margin + 20.0);
    if (side_m < d_max_m + 2.0 * margin)
        throw std::invalid_argument("distance_sweep: map side too small for the distance range");

    struct Cell {
        double pl = std::numeric_limits<double>::quiet_NaN();
        LinkCondition cond = LinkCondition::los_blocked;
    };
    std::vector<Cell> cells(grid.size() * realizations);

    detail::parallel_over(realizations, opt.threads, [&](std::uint64_t rz) {
        const CityMap city = generate_city(env, side_m / 1000.0, substream_seed(seed, 2 * rz));
        Rng rng(substream_seed(seed, 2 * rz + 1));

        const double phi = rng.uniform(0.0, 2.0 * pi);
        const double ux = std::cos(phi), uy = std::sin(phi);
        // keep the whole trajectory inside the map with a margin
        const double ax = ux >= 0.0 ? margin : margin - ux * d_max_m;
        const double bx = ux >= 0.0 ? side_m - margin - ux * d_max_m : side_m - margin;
        const double ay = uy >= 0.0 ? margin : margin - uy * d_max_m;
        const double by = uy >= 0.0 ? side_m - margin - uy * d_max_m : side_m - margin;
        const double tx_x = rng.uniform(ax, bx);
        const double tx_y = rng.uniform(ay, by);

        Link link;
        link.frequency_hz = frequency_hz;
        link.polarization = opt.polarization;
        link.eps_building = opt.eps_building;
        link.eps_ground = opt.eps_ground;
        link.tx = {tx_x, tx_y, altitude_m};

        for (std::size_t di = 0; di < grid.size(); ++di) {
            link.rx = {tx_x + ux * grid[di], tx_y + uy * grid[di], altitude_m};
            const LinkSample sample = classify_link(city, link);
            Cell &cell = cells[di * realizations + rz];
            cell.cond = sample.condition;
            if (sample.condition != LinkCondition::los_blocked) {
                const auto det = deterministic_path_loss(sample);
                if (!det.deep_fade)
                    cell.pl = det.path_loss_db;
            }
        }
    });

    SweepResult result;
    result.environment = env.name;
    result.altitude_m = altitude_m;
    result.frequency_hz = frequency_hz;
    result.realizations = realizations;
    result.rows.reserve(grid.size());

    for (std::size_t di = 0; di < grid.size(); ++di) {
        SweepRow row;
        row.distance_m = grid[di];
        double acc = 0.0;
        std::uint64_t n_valid = 0;
        for (std::uint64_t rz = 0; rz < realizations; ++rz) {
            const Cell &cell = cells[di * realizations + rz];
            switch (cell.cond) {
            case LinkCondition::los_and_building_reflection: ++row.n_cond1; break;
            case LinkCondition::los_and_ground_reflection: ++row.n_cond2; break;
            case LinkCondition::los_only: ++row.n_cond3; break;
            case LinkCondition::los_blocked: ++row.n_blocked; break;
            }
            if (!std::isnan(cell.pl)) {
                acc += opt.linear_power_averaging ? std::pow(10.0, -cell.pl / 10.0) : cell.pl;
                ++n_valid;
            }
        }
        if (n_valid == 0) {
            row.path_loss_db = std::numeric_limits<double>::quiet_NaN();
        } else if (opt.linear_power_averaging) {
            row.path_loss_db = -10.0 * std::log10(acc / static_cast<double>(n_valid));
        } else {
            row.path_loss_db = acc / static_cast<double>(n_valid);
        }
        result.rows.push_back(row);
    }
    return result;
}

} // namespace aachan

#endif // AACHAN_RAYCHECK_HPP
