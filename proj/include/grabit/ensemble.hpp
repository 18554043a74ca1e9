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

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "grabit/byte4.hpp"

namespace grabit {

/// N_ball realizations of N grabits. Each realization is one packed word
/// holding 2 bits per grabit (see Key).
class RealizationEnsemble {
   public:
    RealizationEnsemble() = default;

    RealizationEnsemble(int n_grabits, std::vector<Key> realizations, std::size_t capacity = 0)
        : n_grabits_(n_grabits), realizations_(std::move(realizations)) {
        check_grabit_count(n_grabits);
        capacity_ = capacity == 0 ? std::max<std::size_t>(realizations_.size(), 1) : capacity;
        if (realizations_.size() > capacity_) {
            throw std::invalid_argument("ensemble holds more realizations than its capacity");
        }
        const Key mask = n_grabits == 32 ? ~Key{0} : ((Key{1} << (2 * n_grabits)) - 1);
        for (Key k : realizations_) {
            if ((k & ~mask) != 0) {
                throw std::invalid_argument("realization has bits beyond its grabit count");
            }
        }
    }

    /// n_ball copies of the same configuration.
    static RealizationEnsemble filled(int n_grabits, std::size_t n_ball, Key key) {
        return RealizationEnsemble(n_grabits, std::vector<Key>(n_ball, key));
    }

    int n_grabits() const { return n_grabits_; }
    std::size_t size() const { return realizations_.size(); }
    bool empty() const { return realizations_.empty(); }
    std::size_t capacity() const { return capacity_; }

    Key operator[](std::size_t r) const { return realizations_[r]; }
    Key &operator[](std::size_t r) { return realizations_[r]; }
    Byte4 b4v(std::size_t r, int g) const { return Byte4(b4v_at(realizations_[r], n_grabits_, g)); }

    std::span<const Key> realizations() const { return realizations_; }
    std::span<Key> realizations() { return realizations_; }

    /// Replaces the realization set; grows capacity when asked to.
    void assign(std::vector<Key> realizations, std::size_t capacity = 0) {
        realizations_ = std::move(realizations);
        capacity_ = std::max({capacity, capacity_, realizations_.size()});
    }

    friend bool operator==(const RealizationEnsemble &a, const RealizationEnsemble &b) {
        return a.n_grabits_ == b.n_grabits_ && a.realizations_ == b.realizations_;
    }

   private:
    int n_grabits_ = 1;
    std::size_t capacity_ = 1;
    std::vector<Key> realizations_;
};

/// Sparse histogram over realized joint keys, sorted by key.
struct Histogram {
    int n_grabits = 1;
    std::size_t n_ball = 0;
    std::vector<std::pair<Key, std::uint64_t>> bins;
};

inline Histogram histogram(const RealizationEnsemble &e) {
    Histogram h{e.n_grabits(), e.size(), {}};
    if (2 * e.n_grabits() <= 20) {
        std::vector<std::uint64_t> dense(std::size_t{1} << (2 * e.n_grabits()), 0);
        for (Key k : e.realizations()) {
            ++dense[k];
        }
        for (std::size_t k = 0; k < dense.size(); ++k) {
            if (dense[k] != 0) {
                h.bins.emplace_back(k, dense[k]);
            }
        }
        return h;
    }
    std::unordered_map<Key, std::uint64_t> counts;
    for (Key k : e.realizations()) {
        ++counts[k];
    }
    h.bins.assign(counts.begin(), counts.end());
    std::sort(h.bins.begin(), h.bins.end());
    return h;
}

/// Per logical value: realizations with even and odd gradient parity.
struct BlvTally {
    std::uint64_t blv = 0;
    std::uint64_t even = 0;
    std::uint64_t odd = 0;

    std::int64_t signed_count() const { return static_cast<std::int64_t>(even) - static_cast<std::int64_t>(odd); }
    std::uint64_t socket_pairs() const { return std::min(even, odd); }
};

inline std::vector<BlvTally> tally(const Histogram &h) {
    std::vector<BlvTally> out;
    std::vector<std::pair<std::uint64_t, std::pair<std::uint64_t, bool>>> items;
    items.reserve(h.bins.size());
    for (const auto &[key, count] : h.bins) {
        items.push_back({blv_of(key), {count, gradient_parity(key)}});
    }
    std::sort(items.begin(), items.end(), [](const auto &a, const auto &b) { return a.first < b.first; });
    for (const auto &[blv, cp] : items) {
        if (out.empty() || out.back().blv != blv) {
            out.push_back({blv, 0, 0});
        }
        (cp.second ? out.back().odd : out.back().even) += cp.first;
    }
    return out;
}

inline std::vector<BlvTally> tally(const RealizationEnsemble &e) { return tally(histogram(e)); }

/// Sum over logical values of |n_even - n_odd|: the number of balls that
/// survive sign concentration and pair annihilation.
inline std::uint64_t effective_ball_count(const RealizationEnsemble &e) {
    if (e.empty()) {
        throw std::invalid_argument("no realizations");
    }
    std::uint64_t total = 0;
    for (const auto &t : tally(e)) {
        total += static_cast<std::uint64_t>(std::llabs(t.signed_count()));
    }
    return total;
}

// Snapshot format: "GRB1", n_grabits (u32 LE), n_ball (u64 LE), then the b4vs
// of realization 0 grabit 0, realization 0 grabit 1, ... packed four per byte
// starting at the low bits of each byte.

namespace detail {

inline void put_le(std::ostream &os, std::uint64_t v, int bytes) {
    for (int b = 0; b < bytes; ++b) {
        os.put(static_cast<char>((v >> (8 * b)) & 0xFF));
    }
}

inline std::uint64_t get_le(std::istream &is, int bytes) {
    std::uint64_t v = 0;
    for (int b = 0; b < bytes; ++b) {
        const int c = is.get();
        if (c == std::char_traits<char>::eof()) {
            throw std::runtime_error("snapshot truncated");
        }
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * b);
    }
    return v;
}

}  // namespace detail

inline void write_snapshot(std::ostream &os, const RealizationEnsemble &e) {
    os.write("GRB1", 4);
    detail::put_le(os, static_cast<std::uint32_t>(e.n_grabits()), 4);
    detail::put_le(os, e.size(), 8);
    const int n = e.n_grabits();
    unsigned char byte = 0;
    int slot = 0;
    for (Key k : e.realizations()) {
        for (int g = 0; g < n; ++g) {
            byte |= static_cast<unsigned char>(b4v_at(k, n, g) << (2 * slot));
            if (++slot == 4) {
                os.put(static_cast<char>(byte));
                byte = 0;
                slot = 0;
            }
        }
    }
    if (slot != 0) {
        os.put(static_cast<char>(byte));
    }
}

inline RealizationEnsemble read_snapshot(std::istream &is) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "GRB1", 4) != 0) {
        throw std::runtime_error("not a GRB1 snapshot");
    }
    const auto n = static_cast<int>(detail::get_le(is, 4));
    check_grabit_count(n);
    const std::uint64_t n_ball = detail::get_le(is, 8);
    std::vector<Key> realizations(n_ball, 0);
    int slot = 4;
    unsigned byte = 0;
    for (std::uint64_t r = 0; r < n_ball; ++r) {
        Key k = 0;
        for (int g = 0; g < n; ++g) {
            if (slot == 4) {
                byte = static_cast<unsigned>(detail::get_le(is, 1));
                slot = 0;
            }
            k = with_b4v(k, n, g, (byte >> (2 * slot)) & 3u);
            ++slot;
        }
        realizations[r] = k;
    }
    return RealizationEnsemble(n, std::move(realizations));
}

}  // namespace grabit
