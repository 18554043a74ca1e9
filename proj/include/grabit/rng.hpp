// Copyright 2026 The Grabit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace grabit {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace detail

/// Counter-based random stream. A draw is a pure function of
/// (seed, realization, gate, draw), so any partition of the realizations
/// over workers sees the same numbers.
class RngStream {
   public:
    /// Gate counter reserved for sampling the initial ensemble.
    static constexpr std::uint64_t kInitGate = std::numeric_limits<std::uint64_t>::max();

    constexpr RngStream() = default;
    constexpr explicit RngStream(std::uint64_t seed) : seed_(seed) {}

    constexpr std::uint64_t seed() const { return seed_; }

    constexpr std::uint64_t bits(std::uint64_t realization, std::uint64_t gate, std::uint64_t draw) const {
        std::uint64_t h = detail::splitmix64(seed_ ^ 0x5EED5EED5EED5EEDULL);
        h = detail::splitmix64(h ^ realization);
        h = detail::splitmix64(h ^ (gate * 0xD1B54A32D192ED03ULL));
        h = detail::splitmix64(h ^ (draw * 0x8CB92BA72F3D8DD7ULL));
        return h;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    constexpr double uniform(std::uint64_t realization, std::uint64_t gate, std::uint64_t draw) const {
        return static_cast<double>(bits(realization, gate, draw) >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; consumes draws 2*draw and 2*draw+1.
    double normal(std::uint64_t realization, std::uint64_t gate, std::uint64_t draw) const {
        const double u1 = 1.0 - uniform(realization, gate, 2 * draw);
        const double u2 = uniform(realization, gate, 2 * draw + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    /// Independent child stream, e.g. one per trial of an experiment.
    constexpr RngStream derive(std::uint64_t a, std::uint64_t b = 0) const {
        return RngStream(bits(a, b, 0xC0FFEEULL));
    }

   private:
    std::uint64_t seed_ = 0;
};

}  // namespace grabit
