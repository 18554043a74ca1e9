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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "support.hpp"

using namespace grabit;
namespace gt = grabit::testing;

namespace {

RealizationEnsemble from_counts(int n, const std::vector<std::pair<Key, int>> &counts) {
    std::vector<Key> keys;
    for (const auto &[k, c] : counts) {
        keys.insert(keys.end(), static_cast<std::size_t>(c), k);
    }
    return RealizationEnsemble(n, keys);
}

std::map<Key, std::uint64_t> counts_of(const RealizationEnsemble &e) {
    std::map<Key, std::uint64_t> m;
    for (Key k : e.realizations()) {
        ++m[k];
    }
    return m;
}

// One b4v per realized blv.
bool interference_free(const RealizationEnsemble &e) {
    std::map<std::uint64_t, Key> seen;
    for (Key k : e.realizations()) {
        auto [it, inserted] = seen.emplace(blv_of(k), k);
        if (!inserted && it->second != k) {
            return false;
        }
    }
    return true;
}

std::vector<double> normalized2(std::vector<double> v) {
    double s = 0;
    for (double x : v) {
        s += x * x;
    }
    for (auto &x : v) {
        x /= std::sqrt(s);
    }
    return v;
}

// Exhaustive minimum of || w/|w|_1 - t/total ||_1 over integer allocations t
// summing to total.
double brute_min_l1(const std::vector<double> &w, int total) {
    double sum = 0;
    for (double x : w) {
        sum += x;
    }
    double best = 1e300;
    std::vector<int> t(w.size(), 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
        if (i + 1 == w.size()) {
            t[i] = left;
            double d = 0;
            for (std::size_t k = 0; k < w.size(); ++k) {
                d += std::abs(w[k] / sum - static_cast<double>(t[k]) / total);
            }
            best = std::min(best, d);
            return;
        }
        for (int c = 0; c <= left; ++c) {
            t[i] = c;
            rec(i + 1, left - c);
        }
    };
    rec(0, total);
    return best;
}

}  // namespace

TEST(Rf1, WorkedExampleElevenBalls) {
    auto e = from_counts(1, {{0, 4}, {2, 4}, {3, 3}});
    const auto rep = rf1(e);
    const auto c = counts_of(e);
    EXPECT_EQ(c, (std::map<Key, std::uint64_t>{{0, 9}, {2, 2}}));
    EXPECT_EQ(rep.n_before, 11u);
    EXPECT_EQ(rep.n_after, 11u);
    EXPECT_NEAR(rep.one_norm_before, 5.0 / 11, 1e-15);
    EXPECT_EQ(rep.roar_moves, 5u);
}

TEST(Rf1, InterferenceFreeBornOneInputOnlyRelabels) {
    // Blv 10 negative with its sign on grabit 0's gradient: (3,0) -> (2,1).
    auto e = from_counts(2, {{gt::from_digits4({0, 0}), 3}, {gt::from_digits4({3, 0}), 5}, {gt::from_digits4({2, 3}), 2}});
    const auto rep = rf1(e);
    EXPECT_EQ(rep.roar_moves, 0u);
    EXPECT_EQ(counts_of(e), (std::map<Key, std::uint64_t>{{gt::from_digits4({0, 0}), 3},
                                                          {gt::from_digits4({2, 1}), 5},
                                                          {gt::from_digits4({2, 3}), 2}}));
}

TEST(Rf1, HadamardSquaredRefreshesToBasisState) {
    const auto p = ProbabilityVector<double>::from_dense(std::vector<double>{0.5, 0, 0.25, 0.25});
    auto e = sample_ensemble(p, 400000, RngStream(31));
    rf1(e);
    const auto pt = physical_distribution(e).dense();
    EXPECT_LT(std::hypot(pt[0] - 1, pt[1]), 0.01);
}

TEST(Rf1, AnnihilationIsAnError) {
    auto e = from_counts(1, {{0, 2}, {1, 2}});
    try {
        rf1(e);
        FAIL();
    } catch (const AnnihilationError &err) {
        EXPECT_STREQ(err.what(), "state annihilated; increase N_ball");
    }
    RealizationEnsemble empty(1, {});
    EXPECT_THROW(rf1(empty), std::invalid_argument);
}

TEST(Rf1, TargetsAreLargestRemainderOfSignedCounts) {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 4);
        std::vector<Key> keys(1 + rng() % 200);
        for (auto &k : keys) {
            k = rng() % (Key{1} << (2 * n));
        }
        RealizationEnsemble e(n, keys);
        const auto psi = extract_state<Rational>(e);
        if (psi.is_zero()) {
            EXPECT_THROW(rf1(e), AnnihilationError);
            continue;
        }
        const auto N = static_cast<long long>(keys.size());
        rf1(e);
        ASSERT_EQ(e.size(), keys.size());
        EXPECT_TRUE(interference_free(e));
        const auto after = extract_state<Rational>(e);
        const Rational norm = psi.one_norm();
        long long total = 0;
        for (const auto &[blv, v] : psi.entries()) {
            // Signs survive and each count is within one ball of N |psi| / |psi|_1.
            const Rational ideal = Rational(N) * scalar_abs(v) / norm;
            const Rational got = scalar_abs(after.at(blv)) * N;
            EXPECT_TRUE(scalar_abs(Rational(got - ideal)) < 1) << trial;
            if (after.at(blv) != 0) {
                EXPECT_EQ(after.at(blv) > 0, v > 0);
            }
            total += got.convert_to<long long>();
        }
        EXPECT_EQ(total, N);
        EXPECT_EQ(after.one_norm(), 1);
    }
}

TEST(Rf1, RefreshConditionsOnLargeEnsembles) {
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 3;
        const auto p = ProbabilityVector<double>::from_dense(gt::random_distribution(rng, n));
        const std::size_t N = 100000;
        auto e = sample_ensemble(p, N, RngStream(40 + static_cast<std::uint64_t>(trial)));
        const auto before = normalized2(extract_state(e).dense());
        rf1(e);
        const auto after = normalized2(extract_state(e).dense());
        double d = 0;
        for (std::size_t i = 0; i < before.size(); ++i) {
            d += (after[i] - before[i]) * (after[i] - before[i]);
        }
        EXPECT_LE(std::sqrt(d), 10 / std::sqrt(static_cast<double>(N)));
        EXPECT_TRUE(interference_free(e));
        const auto psi = extract_state(e);
        const auto pt = physical_distribution(e);
        for (const auto &[i, v] : pt.entries()) {
            EXPECT_EQ(v, std::abs(psi.at(i)));
        }
    }
}

TEST(Rf1, IdempotentUpToOneBall) {
    std::mt19937_64 rng(34);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Key> keys(50 + rng() % 500);
        for (auto &k : keys) {
            k = rng() % 64;
        }
        RealizationEnsemble e(3, keys);
        if (extract_state(e).is_zero()) {
            continue;
        }
        rf1(e);
        auto once = tally(e);
        rf1(e);
        auto twice = tally(e);
        std::map<std::uint64_t, long long> diff;
        for (const auto &t : once) {
            diff[t.blv] += t.signed_count();
        }
        for (const auto &t : twice) {
            diff[t.blv] -= t.signed_count();
        }
        for (const auto &[blv, d] : diff) {
            EXPECT_LE(std::llabs(d), 1) << blv;
        }
    }
}

TEST(Rf1, SingleGrabitMaximizesContrast) {
    std::mt19937_64 rng(35);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Key> keys(1 + rng() % 400);
        for (auto &k : keys) {
            k = rng() % 4;
        }
        RealizationEnsemble e(1, keys);
        const auto psi = extract_state(e);
        if (psi.is_zero()) {
            continue;
        }
        const double N = static_cast<double>(keys.size());
        rf1(e);
        const auto pt = physical_distribution(e);
        for (std::uint64_t i = 0; i < 2; ++i) {
            EXPECT_LE(std::abs(pt.at(i) - std::abs(psi.at(i)) / psi.one_norm()) * N, 1.0 + 1e-9);
        }
    }
}

TEST(Rf1, MonteCarloModeMeetsTheSameTargets) {
    std::mt19937_64 rng(36);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Key> keys(100 + rng() % 300);
        for (auto &k : keys) {
            k = rng() % 16;
        }
        RealizationEnsemble a(2, keys);
        if (extract_state(a).is_zero()) {
            continue;
        }
        RealizationEnsemble b = a;
        rf1(a);
        rf1(b, RoarMode::MonteCarlo, RngStream(7), 3);
        EXPECT_TRUE(interference_free(b));
        EXPECT_EQ(extract_state<Rational>(a), extract_state<Rational>(b));
    }
}

TEST(Rf2, ReplicatesSurvivors) {
    RealizationEnsemble e(1, {0, 1, 0});
    const auto rep = rf2(e, 3);
    EXPECT_EQ(std::vector<Key>(e.realizations().begin(), e.realizations().end()), (std::vector<Key>{0, 0, 0}));
    EXPECT_EQ(rep.socket_removed, 1u);
    EXPECT_EQ(rep.n_after, 3u);
}

TEST(Rf2, InterferenceFreeInputIsUnchanged) {
    RealizationEnsemble e(2, {0, 2, 9, 0, 2});
    const auto before = e;
    rf2(e, 5);
    EXPECT_EQ(e, before);
}

TEST(Rf2, CompleteCancellationIsAnError) {
    RealizationEnsemble e(1, {0, 1});
    EXPECT_THROW(rf2(e, 2), AnnihilationError);
}

TEST(Rf2, OutputSizeWithinTargetAndTwiceTarget) {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Key> keys(1 + rng() % 200);
        for (auto &k : keys) {
            k = rng() % 16;
        }
        RealizationEnsemble e(2, keys);
        const auto psi = extract_state<Rational>(e);
        if (psi.is_zero()) {
            continue;
        }
        const std::uint64_t target = keys.size();
        rf2(e, target);
        EXPECT_GE(e.size(), target);
        EXPECT_LE(e.size(), 2 * target);
        EXPECT_TRUE(interference_free(e));
        // Ratios are exact: every survivor is replicated the same number of times.
        const auto after = extract_state<Rational>(e);
        EXPECT_EQ(after.entries().size(), psi.entries().size());
        for (const auto &[blv, v] : psi.entries()) {
            EXPECT_EQ(after.at(blv) / after.one_norm(), v / psi.one_norm());
        }
    }
}

TEST(Rf3, SocketOnlyLeavesBasisState) {
    RealizationEnsemble e(1, {0, 0, 2, 3});
    const auto rep = rf3(e, 8);
    EXPECT_EQ(counts_of(e), (std::map<Key, std::uint64_t>{{0, 8}}));
    EXPECT_EQ(rep.socket_removed, 1u);
}

TEST(Rf3, ExactDivision) {
    auto e = from_counts(1, {{0, 3}, {2, 1}});
    rf3(e, 8);
    EXPECT_EQ(counts_of(e), (std::map<Key, std::uint64_t>{{0, 6}, {2, 2}}));
}

TEST(Rf3, LargestRemainderAllocation) {
    auto e = from_counts(1, {{0, 2}, {2, 1}});
    rf3(e, 8);
    EXPECT_EQ(counts_of(e), (std::map<Key, std::uint64_t>{{0, 5}, {2, 3}}));
    EXPECT_NEAR(std::abs(5.0 / 8 - 2.0 / 3) + std::abs(3.0 / 8 - 1.0 / 3), brute_min_l1({2, 1}, 8), 1e-15);
}

TEST(Rf3, AllocationMinimizesL1Error) {
    std::mt19937_64 rng(38);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Key> keys(1 + rng() % 40);
        for (auto &k : keys) {
            k = rng() % 16;
        }
        RealizationEnsemble e(2, keys);
        const auto psi = extract_state(e);
        if (psi.is_zero()) {
            continue;
        }
        const int capacity = static_cast<int>(keys.size()) + static_cast<int>(rng() % 12);
        std::vector<double> w;
        for (const auto &[blv, v] : psi.entries()) {
            w.push_back(std::abs(v));
        }
        rf3(e, static_cast<std::uint64_t>(capacity));
        ASSERT_EQ(e.size(), static_cast<std::size_t>(capacity));
        EXPECT_TRUE(interference_free(e));
        const auto after = extract_state(e);
        double d = 0;
        for (const auto &[blv, v] : psi.entries()) {
            d += std::abs(std::abs(v) / psi.one_norm() - std::abs(after.at(blv)));
        }
        EXPECT_NEAR(d, brute_min_l1(w, capacity), 1e-12);
    }
}

TEST(Rf3, CapacityBelowSizeIsRejected) {
    RealizationEnsemble e(1, {0, 0, 0});
    EXPECT_THROW(rf3(e, 2), std::invalid_argument);
}

TEST(RefreshReport, SerializesToJson) {
    RealizationEnsemble e(1, {0, 2, 3, 2});
    const auto j = to_json(rf1(e));
    EXPECT_EQ(j["variant"], "rf1");
    EXPECT_EQ(j["n_before"], 4);
    EXPECT_EQ(j["n_after"], 4);
    EXPECT_EQ(j["roar_moves"], 1);
    EXPECT_EQ(parse_variant("rf3"), RefreshVariant::Rf3);
    EXPECT_THROW(parse_variant("rf4"), std::invalid_argument);
}
