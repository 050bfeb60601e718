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

#ifndef AACHAN_RNG_HPP
#define AACHAN_RNG_HPP

#include <cstdint>
#include <random>

namespace aachan {

// Stateless 64-bit mixer (splitmix64 finalizer). Used to derive substream
// seeds so that parallel work items get independent, reproducible streams.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Substream rule: stream k of master seed s is seeded with mix64(s ^ mix64(k)).
// Every parallel unit of work (building index, realization index, ...) gets
// its own substream so results do not depend on execution order.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream) {
    return mix64(master ^ mix64(stream + 1));
}

// Thin wrapper around std::mt19937_64 that only ever consumes raw engine
// words and applies explicit transforms. std::uniform_real_distribution is
// implementation-defined, so it is avoided; this keeps byte-identical output
// across standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0,1), 53-bit resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform strictly inside (0,1); safe for inverse-CDF transforms with
    // log() at either endpoint.
    double uniform_open01() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        // 64-bit multiply-shift; bias is negligible for n << 2^64
        unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
        return static_cast<std::uint64_t>(m >> 64);
    }

  private:
    std::mt19937_64 engine_;
};

} // namespace aachan

#endif // AACHAN_RNG_HPP
