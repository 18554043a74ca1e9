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
#include <cmath>
#include <complex>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "grabit/byte4.hpp"
#include "grabit/ensemble.hpp"
#include "grabit/rng.hpp"
#include "grabit/scalar.hpp"

namespace grabit {

/// Sorted sparse vector keyed by an integer index. Zero entries are dropped.
template <class T>
using SparseEntries = std::vector<std::pair<std::uint64_t, T>>;

namespace detail {

template <class T>
void sort_and_merge(SparseEntries<T> &entries) {
    std::sort(entries.begin(), entries.end(), [](const auto &a, const auto &b) { return a.first < b.first; });
    std::size_t w = 0;
    for (std::size_t r = 0; r < entries.size(); ++r) {
        if (w > 0 && entries[w - 1].first == entries[r].first) {
            entries[w - 1].second += entries[r].second;
        } else {
            entries[w++] = std::move(entries[r]);
        }
    }
    entries.resize(w);
    std::erase_if(entries, [](const auto &e) { return e.second == T(0); });
}

template <class T>
T lookup(const SparseEntries<T> &entries, std::uint64_t index) {
    auto it = std::lower_bound(entries.begin(), entries.end(), index,
                               [](const auto &e, std::uint64_t i) { return e.first < i; });
    return (it != entries.end() && it->first == index) ? it->second : T(0);
}

inline void check_dense_limit(int n_bits, int limit) {
    if (n_bits > limit) {
        throw LimitError("dense view of " + std::to_string(n_bits) + " bits exceeds limit " + std::to_string(limit));
    }
}

}  // namespace detail

/// Probability vector over the 4^N joint byte4 values, stored on its support.
template <class T = double>
class ProbabilityVector {
   public:
    ProbabilityVector() = default;

    /// Entries are merged and sorted; the result must be a distribution.
    ProbabilityVector(int n_grabits, SparseEntries<T> entries) : n_grabits_(n_grabits), entries_(std::move(entries)) {
        check_grabit_count(n_grabits);
        detail::sort_and_merge(entries_);
        validate();
    }

    static ProbabilityVector point_mass(int n_grabits, Key key) { return ProbabilityVector(n_grabits, {{key, T(1)}}); }

    static ProbabilityVector from_dense(std::span<const T> probabilities) {
        int n = 0;
        while ((std::size_t{1} << (2 * n)) < probabilities.size()) {
            ++n;
        }
        if (n == 0 || (std::size_t{1} << (2 * n)) != probabilities.size()) {
            throw std::invalid_argument("dense probability vector length must be 4^N with N >= 1");
        }
        SparseEntries<T> entries;
        for (std::size_t k = 0; k < probabilities.size(); ++k) {
            entries.emplace_back(k, probabilities[k]);
        }
        return ProbabilityVector(n, std::move(entries));
    }

    /// Histogram-derived relative frequencies of an ensemble.
    static ProbabilityVector from_histogram(const Histogram &h) {
        if (h.n_ball == 0) {
            throw std::invalid_argument("no realizations");
        }
        SparseEntries<T> entries;
        for (const auto &[key, count] : h.bins) {
            entries.emplace_back(key, T(static_cast<long long>(count)) / T(static_cast<long long>(h.n_ball)));
        }
        return ProbabilityVector(h.n_grabits, std::move(entries));
    }

    int n_grabits() const { return n_grabits_; }
    const SparseEntries<T> &entries() const { return entries_; }
    std::size_t support_size() const { return entries_.size(); }
    T at(Key key) const { return detail::lookup(entries_, key); }

    T total() const {
        T s(0);
        for (const auto &e : entries_) {
            s += e.second;
        }
        return s;
    }

    std::vector<T> dense() const {
        detail::check_dense_limit(2 * n_grabits_, 24);
        std::vector<T> out(std::size_t{1} << (2 * n_grabits_), T(0));
        for (const auto &[k, p] : entries_) {
            out[k] = p;
        }
        return out;
    }

    friend bool operator==(const ProbabilityVector &, const ProbabilityVector &) = default;

   private:
    void validate() const {
        for (const auto &[k, p] : entries_) {
            if (p < T(0)) {
                throw std::invalid_argument("negative probability at b4v index " + std::to_string(k));
            }
            if (n_grabits_ < 32 && (k >> (2 * n_grabits_)) != 0) {
                throw std::invalid_argument("b4v index out of range");
            }
        }
        if (std::abs(to_double(total()) - 1.0) > 1e-12) {
            throw std::invalid_argument("probabilities must sum to 1");
        }
    }

    int n_grabits_ = 1;
    SparseEntries<T> entries_;
};

/// Signed amplitude per logical value: the discretized N-th derivative of the
/// b4v distribution. Only nonzero entries are stored.
template <class T = double>
class StateEstimate {
   public:
    StateEstimate() = default;
    StateEstimate(int n_grabits, SparseEntries<T> amplitudes, std::uint64_t n_ball = 0)
        : n_grabits_(n_grabits), n_ball_(n_ball), amplitudes_(std::move(amplitudes)) {
        detail::sort_and_merge(amplitudes_);
    }

    int n_grabits() const { return n_grabits_; }
    /// Ball count behind a sampled estimate, 0 for exact ones.
    std::uint64_t n_ball() const { return n_ball_; }
    const SparseEntries<T> &entries() const { return amplitudes_; }
    T at(std::uint64_t blv) const { return detail::lookup(amplitudes_, blv); }
    bool is_zero() const { return amplitudes_.empty(); }

    T one_norm() const {
        T s(0);
        for (const auto &e : amplitudes_) {
            s += scalar_abs(e.second);
        }
        return s;
    }

    double two_norm() const {
        double s = 0;
        for (const auto &e : amplitudes_) {
            const double v = to_double(e.second);
            s += v * v;
        }
        return std::sqrt(s);
    }

    /// Below one ball of signal nothing is estimable.
    bool annihilated() const {
        const double n1 = to_double(one_norm());
        return n_ball_ > 0 ? n1 < 1.0 / static_cast<double>(n_ball_) : n1 == 0.0;
    }

    std::vector<double> dense() const {
        detail::check_dense_limit(n_grabits_, 26);
        std::vector<double> out(std::size_t{1} << n_grabits_, 0.0);
        for (const auto &[i, v] : amplitudes_) {
            out[i] = to_double(v);
        }
        return out;
    }

    /// Logical value with the largest |amplitude|; ties go to the smaller index.
    std::uint64_t argmax_abs() const {
        std::uint64_t best = 0;
        T best_v(-1);
        for (const auto &[i, v] : amplitudes_) {
            if (scalar_abs(v) > best_v) {
                best_v = scalar_abs(v);
                best = i;
            }
        }
        return best;
    }

    friend bool operator==(const StateEstimate &a, const StateEstimate &b) {
        return a.n_grabits_ == b.n_grabits_ && a.amplitudes_ == b.amplitudes_;
    }

   private:
    int n_grabits_ = 1;
    std::uint64_t n_ball_ = 0;
    SparseEntries<T> amplitudes_;
};

/// Distribution over logical values with the gradient marginalized out.
template <class T = double>
class PhysicalDistribution {
   public:
    PhysicalDistribution() = default;
    PhysicalDistribution(int n_bits, SparseEntries<T> probabilities)
        : n_bits_(n_bits), probabilities_(std::move(probabilities)) {
        detail::sort_and_merge(probabilities_);
    }

    int n_bits() const { return n_bits_; }
    const SparseEntries<T> &entries() const { return probabilities_; }
    T at(std::uint64_t blv) const { return detail::lookup(probabilities_, blv); }

    std::vector<double> dense() const {
        detail::check_dense_limit(n_bits_, 26);
        std::vector<double> out(std::size_t{1} << n_bits_, 0.0);
        for (const auto &[i, v] : probabilities_) {
            out[i] = to_double(v);
        }
        return out;
    }

    std::uint64_t argmax() const {
        std::uint64_t best = 0;
        T best_v(-1);
        for (const auto &[i, v] : probabilities_) {
            if (v > best_v) {
                best_v = v;
                best = i;
            }
        }
        return best;
    }

   private:
    int n_bits_ = 1;
    SparseEntries<T> probabilities_;
};

/// Interleaved real/imaginary parts of an n-qubit state; component 2*i + nu
/// holds Re (nu = 0) or Im (nu = 1) of amplitude i.
struct RealifiedState {
    int n_qubits = 0;
    std::vector<double> components;

    int n_grabits() const { return n_qubits + 1; }
};

inline RealifiedState realify(std::span<const std::complex<double>> psi) {
    int n = 0;
    while ((std::size_t{1} << n) < psi.size()) {
        ++n;
    }
    if ((std::size_t{1} << n) != psi.size()) {
        throw std::invalid_argument("amplitude vector length must be a power of two");
    }
    RealifiedState phi{n, std::vector<double>(2 * psi.size())};
    for (std::size_t i = 0; i < psi.size(); ++i) {
        phi.components[2 * i] = psi[i].real();
        phi.components[2 * i + 1] = psi[i].imag();
    }
    return phi;
}

inline std::vector<std::complex<double>> complexify(std::span<const double> phi) {
    if (phi.size() % 2 != 0) {
        throw std::invalid_argument("realified state must have an even number of components");
    }
    std::vector<std::complex<double>> psi(phi.size() / 2);
    for (std::size_t i = 0; i < psi.size(); ++i) {
        psi[i] = {phi[2 * i], phi[2 * i + 1]};
    }
    return psi;
}

inline std::vector<std::complex<double>> complexify(const RealifiedState &phi) { return complexify(phi.components); }

template <class T = double>
StateEstimate<T> extract_state(const ProbabilityVector<T> &p) {
    SparseEntries<T> amps;
    amps.reserve(p.support_size());
    for (const auto &[key, prob] : p.entries()) {
        amps.emplace_back(blv_of(key), gradient_parity(key) ? T(-prob) : prob);
    }
    return StateEstimate<T>(p.n_grabits(), std::move(amps));
}

/// Signed integer count per realized logical value.
inline SparseEntries<std::int64_t> signed_counts(const RealizationEnsemble &e) {
    if (e.empty()) {
        throw std::invalid_argument("no realizations");
    }
    SparseEntries<std::int64_t> out;
    for (const auto &t : tally(e)) {
        out.emplace_back(t.blv, t.signed_count());
    }
    return out;
}

/// Estimate from relative frequencies; counts are exact integers and the
/// division by N_ball happens once per entry.
template <class T = double>
StateEstimate<T> extract_state(const RealizationEnsemble &e) {
    const auto counts = signed_counts(e);
    SparseEntries<T> amps;
    const T n_ball(static_cast<long long>(e.size()));
    for (const auto &[blv, c] : counts) {
        if (c != 0) {
            amps.emplace_back(blv, T(static_cast<long long>(c)) / n_ball);
        }
    }
    return StateEstimate<T>(e.n_grabits(), std::move(amps), e.size());
}

template <class T = double>
PhysicalDistribution<T> physical_distribution(const ProbabilityVector<T> &p) {
    SparseEntries<T> probs;
    for (const auto &[key, prob] : p.entries()) {
        probs.emplace_back(blv_of(key), prob);
    }
    return PhysicalDistribution<T>(p.n_grabits(), std::move(probs));
}

template <class T = double>
PhysicalDistribution<T> physical_distribution(const RealizationEnsemble &e) {
    if (e.empty()) {
        throw std::invalid_argument("no realizations");
    }
    SparseEntries<T> probs;
    const T n_ball(static_cast<long long>(e.size()));
    for (const auto &t : tally(e)) {
        probs.emplace_back(t.blv, T(static_cast<long long>(t.even + t.odd)) / n_ball);
    }
    return PhysicalDistribution<T>(e.n_grabits(), std::move(probs));
}

enum class Gauge {
    Trivial,
    MaxContrast,
};

/// Interference-free encoding of a real amplitude vector of length 2^N:
/// |Phi_i| / ||Phi||_1 placed on the canonical b4v whose gradient parity
/// carries the sign. Both gauges produce this assignment; MaxContrast names
/// the property, Trivial the construction.
template <class T = double>
ProbabilityVector<T> encode_state(std::span<const double> phi, Gauge gauge = Gauge::MaxContrast) {
    (void)gauge;
    int n = 0;
    while ((std::size_t{1} << n) < phi.size()) {
        ++n;
    }
    if (n == 0 || (std::size_t{1} << n) != phi.size()) {
        throw std::invalid_argument("state length must be 2^N with N >= 1");
    }
    T norm(0);
    for (double v : phi) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("state has non-finite component");
        }
        norm += scalar_abs(scalar_cast<T>(v));
    }
    if (norm == T(0)) {
        throw std::invalid_argument("unencodable null state");
    }
    SparseEntries<T> entries;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        if (phi[i] != 0.0) {
            entries.emplace_back(canonical_key(i, phi[i] < 0.0), scalar_abs(scalar_cast<T>(phi[i])) / norm);
        }
    }
    return ProbabilityVector<T>(n, std::move(entries));
}

template <class T = double>
ProbabilityVector<T> encode_state(const RealifiedState &phi, Gauge gauge = Gauge::MaxContrast) {
    return encode_state<T>(std::span<const double>(phi.components), gauge);
}

/// n independent draws from P by inverse CDF over the sorted support.
inline RealizationEnsemble sample_ensemble(const ProbabilityVector<double> &p, std::size_t n, const RngStream &rng,
                                           std::uint64_t gate_counter = RngStream::kInitGate) {
    if (n == 0) {
        throw std::invalid_argument("sample_ensemble needs n >= 1");
    }
    const auto &entries = p.entries();
    std::vector<double> cdf(entries.size());
    double acc = 0;
    for (std::size_t k = 0; k < entries.size(); ++k) {
        acc += entries[k].second;
        cdf[k] = acc;
    }
    std::vector<Key> out(n);
    for (std::size_t r = 0; r < n; ++r) {
        const double u = rng.uniform(r, gate_counter, 0) * acc;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), entries.size() - 1);
        out[r] = entries[k].first;
    }
    return RealizationEnsemble(p.n_grabits(), std::move(out));
}

/// CSV rows (blv_integer, blv_binary, value) for estimates and distributions.
template <class Sparse>
void write_blv_csv(std::ostream &os, const Sparse &values, int n_bits) {
    os << "blv_integer,blv_binary,value\n";
    std::ostringstream line;
    for (const auto &[i, v] : values.entries()) {
        os << i << ',' << to_binary(i, n_bits) << ',' << std::setprecision(17) << to_double(v) << '\n';
    }
}

}  // namespace grabit
