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

#ifndef AACHAN_IO_HPP
#define AACHAN_IO_HPP

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

#include "aachan/raycheck.hpp"

namespace aachan {

// Fixed 6-decimal formatting with '.' separator; the one numeric format used
// in every CSV cell so emitted files are byte-stable.
inline std::string format_f6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

// FNV-1a 64-bit; used to stamp outputs with a hash of the resolved config.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline void write_provenance_comment(std::ostream &os, std::string_view resolved_config_json) {
    os << "# config_fnv1a64=" << hex64(fnv1a64(resolved_config_json))
       << " config=" << resolved_config_json << "\n";
}

inline void sweep_to_csv(std::ostream &os, const SweepResult &sweep,
                         std::string_view resolved_config_json = {}) {
    if (!resolved_config_json.empty())
        write_provenance_comment(os, resolved_config_json);
    os << "distance_m,pl_db,n_cond1,n_cond2,n_cond3,n_blocked\n";
    for (const SweepRow &row : sweep.rows) {
        os << format_f6(row.distance_m) << ',' << format_f6(row.path_loss_db) << ','
           << row.n_cond1 << ',' << row.n_cond2 << ',' << row.n_cond3 << ',' << row.n_blocked
           << '\n';
    }
}

inline void gr_curve_to_csv(std::ostream &os, std::span<const GrEstimate> curve,
                            std::string_view resolved_config_json = {}) {
    if (!resolved_config_json.empty())
        write_provenance_comment(os, resolved_config_json);
    os << "theta_deg,p_gr,stderr,n\n";
    for (const GrEstimate &e : curve) {
        os << format_f6(e.theta_deg) << ',' << format_f6(e.p_gr) << ',' << format_f6(e.std_err)
           << ',' << e.n_links << '\n';
    }
}

} // namespace aachan

#endif // AACHAN_IO_HPP
