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

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace grabit {

/// Joint byte4 index of an N-grabit configuration. Grabit 0 occupies the two
/// most significant bits of the low 2N bits, so the packed word doubles as the
/// integer encoding of the b4v string. Within a grabit the high bit is the
/// logical value and the low bit the gradient value (I = 2i + sigma).
using Key = std::uint64_t;

inline constexpr int kMaxGrabits = 32;

/// One grabit's bin: value = 2 * blv + gradient.
class Byte4 {
   public:
    constexpr Byte4() = default;
    constexpr explicit Byte4(unsigned value) : value_(static_cast<std::uint8_t>(value)) {
        if (value > 3) {
            throw std::out_of_range("byte4 value must lie in [0,3], got " + std::to_string(value));
        }
    }
    static constexpr Byte4 from_parts(unsigned blv, unsigned gradient) {
        return Byte4((blv << 1) | gradient);
    }

    constexpr unsigned value() const { return value_; }
    constexpr unsigned blv() const { return value_ >> 1; }
    constexpr unsigned gradient() const { return value_ & 1u; }

    friend constexpr bool operator==(Byte4, Byte4) = default;

   private:
    std::uint8_t value_ = 0;
};

inline void check_grabit_count(int n) {
    if (n < 1 || n > kMaxGrabits) {
        throw std::out_of_range(
            "grabit count must lie in [1," + std::to_string(kMaxGrabits) + "], got " + std::to_string(n));
    }
}

constexpr int grabit_shift(int n, int g) { return 2 * (n - 1 - g); }

constexpr unsigned b4v_at(Key key, int n, int g) {
    return static_cast<unsigned>((key >> grabit_shift(n, g)) & 3u);
}

constexpr Key with_b4v(Key key, int n, int g, unsigned value) {
    const int s = grabit_shift(n, g);
    return (key & ~(Key{3} << s)) | (Key{value & 3u} << s);
}

namespace detail {

// Gathers the even-position bits of x into the low half.
constexpr std::uint64_t compact_even_bits(std::uint64_t x) {
    x &= 0x5555555555555555ULL;
    x = (x | (x >> 1)) & 0x3333333333333333ULL;
    x = (x | (x >> 2)) & 0x0F0F0F0F0F0F0F0FULL;
    x = (x | (x >> 4)) & 0x00FF00FF00FF00FFULL;
    x = (x | (x >> 8)) & 0x0000FFFF0000FFFFULL;
    x = (x | (x >> 16)) & 0x00000000FFFFFFFFULL;
    return x;
}

constexpr std::uint64_t spread_to_even_bits(std::uint64_t x) {
    x &= 0x00000000FFFFFFFFULL;
    x = (x | (x << 16)) & 0x0000FFFF0000FFFFULL;
    x = (x | (x << 8)) & 0x00FF00FF00FF00FFULL;
    x = (x | (x << 4)) & 0x0F0F0F0F0F0F0F0FULL;
    x = (x | (x << 2)) & 0x3333333333333333ULL;
    x = (x | (x << 1)) & 0x5555555555555555ULL;
    return x;
}

}  // namespace detail

/// Logical-value string i of a joint key, grabit 0 most significant.
constexpr std::uint64_t blv_of(Key key) { return detail::compact_even_bits(key >> 1); }

/// Gradient string sigma of a joint key, grabit 0 most significant.
constexpr std::uint64_t gradient_of(Key key) { return detail::compact_even_bits(key); }

/// Parity of the gradient string; odd parity carries a minus sign.
constexpr bool gradient_parity(Key key) {
    return (std::popcount(key & 0x5555555555555555ULL) & 1) != 0;
}

/// Joint key 2*i + sigma from logical and gradient strings.
constexpr Key compose_key(std::uint64_t blv, std::uint64_t gradient) {
    return (detail::spread_to_even_bits(blv) << 1) | detail::spread_to_even_bits(gradient);
}

/// Canonical key of a logical value after sign concentration: the sign sits
/// on the gradient of the last grabit.
constexpr Key canonical_key(std::uint64_t blv, bool negative) {
    return compose_key(blv, negative ? 1u : 0u);
}

inline std::string to_binary(std::uint64_t value, int width) {
    std::string s(static_cast<std::size_t>(width), '0');
    for (int b = 0; b < width; ++b) {
        if ((value >> (width - 1 - b)) & 1u) {
            s[static_cast<std::size_t>(b)] = '1';
        }
    }
    return s;
}

}  // namespace grabit
