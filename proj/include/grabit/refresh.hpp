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
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "grabit/byte4.hpp"
#include "grabit/ensemble.hpp"
#include "grabit/rng.hpp"
#include "grabit/scalar.hpp"
#include "json.hpp"

namespace grabit {

enum class RefreshVariant {
    Rf1,
    Rf2,
    Rf3,
};

inline std::string_view variant_name(RefreshVariant v) {
    switch (v) {
        case RefreshVariant::Rf1:
            return "rf1";
        case RefreshVariant::Rf2:
            return "rf2";
        case RefreshVariant::Rf3:
            return "rf3";
    }
    return "?";
}

inline RefreshVariant parse_variant(std::string_view s) {
    if (s == "rf1") {
        return RefreshVariant::Rf1;
    }
    if (s == "rf2") {
        return RefreshVariant::Rf2;
    }
    if (s == "rf3") {
        return RefreshVariant::Rf3;
    }
    throw std::invalid_argument("unknown refresh variant '" + std::string(s) + "'");
}

/// How rf1 picks which surplus balls go where. Deterministic is the default;
/// MonteCarlo draws donors and acceptors at random and is not used by the
/// acceptance suite.
enum class RoarMode {
    Deterministic,
    MonteCarlo,
};

struct RefreshReport {
    std::string variant;
    std::uint64_t n_before = 0;
    std::uint64_t n_after = 0;
    std::uint64_t socket_removed = 0;
    double one_norm_before = 0;
    double one_norm_after = 0;
    std::uint64_t roar_moves = 0;
};

inline nlohmann::json to_json(const RefreshReport &r) {
    return {{"variant", r.variant},
            {"n_before", r.n_before},
            {"n_after", r.n_after},
            {"socket_removed", r.socket_removed},
            {"one_norm_before", r.one_norm_before},
            {"one_norm_after", r.one_norm_after},
            {"roar_moves", r.roar_moves}};
}

namespace detail {

struct SignedBlv {
    std::uint64_t blv;
    std::uint64_t count;      // all realizations at this blv
    std::uint64_t magnitude;  // |n_even - n_odd|
    bool negative;
};

inline std::vector<SignedBlv> signed_blvs(const RealizationEnsemble &e, std::uint64_t &sum_magnitude) {
    if (e.empty()) {
        throw std::invalid_argument("no realizations");
    }
    std::vector<SignedBlv> out;
    sum_magnitude = 0;
    for (const auto &t : tally(e)) {
        const auto s = t.signed_count();
        const auto m = static_cast<std::uint64_t>(s < 0 ? -s : s);
        out.push_back({t.blv, t.even + t.odd, m, s < 0});
        sum_magnitude += m;
    }
    if (sum_magnitude == 0) {
        throw AnnihilationError("state annihilated; increase N_ball");
    }
    return out;
}

/// Integer allocation of `total` proportional to the magnitudes: floors
/// first, then one extra ball each to the largest remainders (ties go to the
/// smaller blv, i.e. the earlier entry).
inline std::vector<std::uint64_t> largest_remainder(const std::vector<SignedBlv> &v, std::uint64_t sum,
                                                    std::uint64_t total) {
    std::vector<std::uint64_t> t(v.size());
    std::vector<std::uint64_t> rem(v.size());
    std::uint64_t assigned = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const unsigned __int128 num = static_cast<unsigned __int128>(total) * v[i].magnitude;
        t[i] = static_cast<std::uint64_t>(num / sum);
        rem[i] = static_cast<std::uint64_t>(num % sum);
        assigned += t[i];
    }
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
    for (std::size_t k = 0; assigned < total; ++k) {
        ++t[order[k]];
        ++assigned;
    }
    return t;
}

inline std::size_t find_blv(const std::vector<SignedBlv> &v, std::uint64_t blv) {
    auto it = std::lower_bound(v.begin(), v.end(), blv, [](const SignedBlv &s, std::uint64_t b) { return s.blv < b; });
    return static_cast<std::size_t>(it - v.begin());
}

}  // namespace detail

/// Minority relocation with sign concentration, then restoration of the
/// amplitude ratios. N_ball is conserved.
inline RefreshReport rf1(RealizationEnsemble &e, RoarMode mode = RoarMode::Deterministic, const RngStream &rng = {},
                         std::uint64_t counter = 0) {
    std::uint64_t sum = 0;
    const auto blvs = detail::signed_blvs(e, sum);
    const std::uint64_t n = e.size();
    const auto target = detail::largest_remainder(blvs, sum, n);

    // Deviation table: positive entries are donors, negative ones acceptors.
    std::vector<std::int64_t> dev(blvs.size());
    for (std::size_t i = 0; i < blvs.size(); ++i) {
        dev[i] = static_cast<std::int64_t>(blvs[i].count) - static_cast<std::int64_t>(target[i]);
    }
    auto by_magnitude = [&](bool donors) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < dev.size(); ++i) {
            if (donors ? dev[i] > 0 : dev[i] < 0) {
                idx.push_back(i);
            }
        }
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return std::llabs(dev[a]) > std::llabs(dev[b]); });
        return idx;
    };
    const auto donors = by_magnitude(true);
    const auto acceptors = by_magnitude(false);

    // Per donor, the ordered list of (acceptor, count) transfers.
    std::vector<std::vector<std::pair<std::size_t, std::uint64_t>>> plan(blvs.size());
    std::vector<std::int64_t> need(dev.size());
    for (std::size_t i = 0; i < dev.size(); ++i) {
        need[i] = dev[i] < 0 ? -dev[i] : 0;
    }
    std::uint64_t moves = 0;
    std::size_t a = 0;
    for (std::size_t d : donors) {
        std::int64_t surplus = dev[d];
        while (surplus > 0) {
            while (need[acceptors[a]] == 0) {
                ++a;
            }
            const std::int64_t m = std::min(surplus, need[acceptors[a]]);
            plan[d].push_back({acceptors[a], static_cast<std::uint64_t>(m)});
            surplus -= m;
            need[acceptors[a]] -= m;
            moves += static_cast<std::uint64_t>(m);
        }
    }

    auto keys = e.realizations();
    if (mode == RoarMode::Deterministic) {
        // The first surplus realizations of each donor, in index order, move.
        std::vector<std::size_t> cursor(blvs.size(), 0);
        for (auto &k : keys) {
            const std::size_t i = detail::find_blv(blvs, blv_of(k));
            std::size_t dst = i;
            auto &steps = plan[i];
            if (cursor[i] < steps.size()) {
                dst = steps[cursor[i]].first;
                if (--steps[cursor[i]].second == 0) {
                    ++cursor[i];
                }
            }
            k = canonical_key(blvs[dst].blv, blvs[dst].negative);
        }
    } else {
        // Each realization of a donor leaves with probability surplus/remaining
        // and lands on an acceptor drawn in proportion to its remaining need.
        std::vector<std::uint64_t> remaining(blvs.size());
        std::vector<std::uint64_t> surplus(blvs.size(), 0);
        for (std::size_t i = 0; i < blvs.size(); ++i) {
            remaining[i] = blvs[i].count;
            surplus[i] = dev[i] > 0 ? static_cast<std::uint64_t>(dev[i]) : 0;
        }
        std::vector<std::uint64_t> open(dev.size());
        std::uint64_t open_total = 0;
        for (std::size_t i = 0; i < dev.size(); ++i) {
            open[i] = dev[i] < 0 ? static_cast<std::uint64_t>(-dev[i]) : 0;
            open_total += open[i];
        }
        for (std::size_t r = 0; r < keys.size(); ++r) {
            const std::size_t i = detail::find_blv(blvs, blv_of(keys[r]));
            std::size_t dst = i;
            if (surplus[i] > 0) {
                const double u = rng.uniform(r, counter, 0);
                if (u * static_cast<double>(remaining[i]) < static_cast<double>(surplus[i])) {
                    auto pick = static_cast<std::uint64_t>(rng.uniform(r, counter, 1) * static_cast<double>(open_total));
                    pick = std::min(pick, open_total - 1);
                    std::size_t j = 0;
                    while (pick >= open[j]) {
                        pick -= open[j++];
                    }
                    dst = j;
                    --open[j];
                    --open_total;
                    --surplus[i];
                }
            }
            --remaining[i];
            keys[r] = canonical_key(blvs[dst].blv, blvs[dst].negative);
        }
    }

    RefreshReport rep;
    rep.variant = "rf1";
    rep.n_before = n;
    rep.n_after = n;
    rep.one_norm_before = static_cast<double>(sum) / static_cast<double>(n);
    rep.one_norm_after = 1.0;
    rep.roar_moves = moves;
    return rep;
}

/// Removal of socket: opposite-parity pairs per blv annihilate, survivors
/// sit at their canonical b4v, and the set is replicated up to n_target.
inline RefreshReport rf2(RealizationEnsemble &e, std::uint64_t n_target) {
    if (n_target == 0) {
        throw std::invalid_argument("rf2 needs n_target >= 1");
    }
    std::uint64_t sum = 0;
    const auto blvs = detail::signed_blvs(e, sum);
    const std::uint64_t n = e.size();

    std::vector<std::uint64_t> kept(blvs.size(), 0);
    std::vector<Key> survivors;
    survivors.reserve(sum);
    for (Key k : e.realizations()) {
        const std::size_t i = detail::find_blv(blvs, blv_of(k));
        if (blvs[i].magnitude > 0 && gradient_parity(k) == blvs[i].negative && kept[i] < blvs[i].magnitude) {
            ++kept[i];
            survivors.push_back(canonical_key(blvs[i].blv, blvs[i].negative));
        }
    }
    const std::uint64_t copies = sum >= n_target ? 1 : (n_target + sum - 1) / sum;
    std::vector<Key> out;
    out.reserve(survivors.size() * copies);
    for (std::uint64_t c = 0; c < copies; ++c) {
        out.insert(out.end(), survivors.begin(), survivors.end());
    }
    e.assign(std::move(out), std::max<std::uint64_t>(e.capacity(), 2 * n_target));

    RefreshReport rep;
    rep.variant = "rf2";
    rep.n_before = n;
    rep.n_after = e.size();
    rep.socket_removed = (n - sum) / 2;
    rep.one_norm_before = static_cast<double>(sum) / static_cast<double>(n);
    rep.one_norm_after = 1.0;
    return rep;
}

/// Fixed-memory refresh: socket removal followed by a largest-remainder
/// allocation of exactly `capacity` balls to the canonical b4vs.
inline RefreshReport rf3(RealizationEnsemble &e, std::uint64_t capacity) {
    if (capacity < e.size()) {
        throw std::invalid_argument("rf3 capacity " + std::to_string(capacity) + " is below N_ball " +
                                    std::to_string(e.size()));
    }
    std::uint64_t sum = 0;
    const auto blvs = detail::signed_blvs(e, sum);
    const std::uint64_t n = e.size();
    const auto target = detail::largest_remainder(blvs, sum, capacity);

    std::vector<Key> out;
    out.reserve(capacity);
    for (std::size_t i = 0; i < blvs.size(); ++i) {
        out.insert(out.end(), target[i], canonical_key(blvs[i].blv, blvs[i].negative));
    }
    e.assign(std::move(out), capacity);

    RefreshReport rep;
    rep.variant = "rf3";
    rep.n_before = n;
    rep.n_after = capacity;
    rep.socket_removed = (n - sum) / 2;
    rep.one_norm_before = static_cast<double>(sum) / static_cast<double>(n);
    rep.one_norm_after = 1.0;
    return rep;
}

}  // namespace grabit
