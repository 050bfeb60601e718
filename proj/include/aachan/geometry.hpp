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

#ifndef AACHAN_GEOMETRY_HPP
#define AACHAN_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace aachan {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
    friend bool operator==(const Vec3 &a, const Vec3 &b) {
        return a.x == b.x && a.y == b.y && a.z == b.z;
    }
};

inline double horizontal_distance(Vec3 a, Vec3 b) {
    return std::hypot(b.x - a.x, b.y - a.y);
}

inline double distance(Vec3 a, Vec3 b) {
    return std::hypot(b.x - a.x, b.y - a.y, b.z - a.z);
}

// One rectangular building: axis-aligned footprint extruded from the ground
// plane to `height` meters.
struct Building {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;
    double height = 0.0;

    void validate() const {
        if (!(x1 > x0) || !(y1 > y0))
            throw std::invalid_argument("Building: footprint must have positive width and depth");
        if (!(height >= 0.0))
            throw std::invalid_argument("Building: height must be non-negative");
    }

    bool footprint_contains(double px, double py) const {
        return px >= x0 && px < x1 && py >= y0 && py < y1;
    }
};

namespace detail {

// Slab test of the open segment p1->p2 against the open box interior.
// Touching a face, edge or corner does not count as an intersection.
// Returns the entry parameter t in (0,1) on hit.
inline std::optional<double> segment_box_entry(const Building &b, Vec3 p1, Vec3 p2) {
    const double lo[3] = {b.x0, b.y0, 0.0};
    const double hi[3] = {b.x1, b.y1, b.height};
    const double o[3] = {p1.x, p1.y, p1.z};
    const double d[3] = {p2.x - p1.x, p2.y - p1.y, p2.z - p1.z};

    double tmin = 0.0;
    double tmax = 1.0;
    for (int ax = 0; ax < 3; ++ax) {
        if (d[ax] == 0.0) {
            if (!(o[ax] > lo[ax] && o[ax] < hi[ax]))
                return std::nullopt;
        } else {
            double inv = 1.0 / d[ax];
            double t1 = (lo[ax] - o[ax]) * inv;
            double t2 = (hi[ax] - o[ax]) * inv;
            if (t1 > t2) std::swap(t1, t2);
            tmin = std::max(tmin, t1);
            tmax = std::min(tmax, t2);
            if (tmin >= tmax)
                return std::nullopt;
        }
    }
    return tmin;
}

} // namespace detail

inline bool segment_intersects_interior(const Building &b, Vec3 p1, Vec3 p2) {
    return detail::segment_box_entry(b, p1, p2).has_value();
}

} // namespace aachan

#endif // AACHAN_GEOMETRY_HPP
