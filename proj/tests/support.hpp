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

// Shared test helpers: small generators and brute-force reference
// computations written independently of the library's bit tricks.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "grabit/grabit.hpp"

namespace grabit::testing {

/// Base-4 digits of a joint b4v index, digit 0 = grabit 0 (most significant).
inline std::vector<int> digits4(std::uint64_t index, int n) {
    std::vector<int> d(static_cast<std::size_t>(n));
    for (int g = n - 1; g >= 0; --g) {
        d[static_cast<std::size_t>(g)] = static_cast<int>(index % 4);
        index /= 4;
    }
    return d;
}

inline std::uint64_t from_digits4(const std::vector<int> &d) {
    std::uint64_t v = 0;
    for (int x : d) {
        v = v * 4 + static_cast<std::uint64_t>(x);
    }
    return v;
}

/// psi_i = sum over sigma of (-1)^{sum sigma} P(2i + sigma), by enumeration.
template <class T>
std::vector<T> brute_state(const std::vector<T> &dense, int n) {
    std::vector<T> psi(std::size_t{1} << n, T(0));
    for (std::uint64_t I = 0; I < dense.size(); ++I) {
        const auto d = digits4(I, n);
        std::uint64_t blv = 0;
        int parity = 0;
        for (int x : d) {
            blv = blv * 2 + static_cast<std::uint64_t>(x / 2);
            parity += x % 2;
        }
        if (parity % 2) {
            psi[blv] -= dense[I];
        } else {
            psi[blv] += dense[I];
        }
    }
    return psi;
}

template <class T>
std::vector<T> brute_marginal(const std::vector<T> &dense, int n) {
    std::vector<T> p(std::size_t{1} << n, T(0));
    for (std::uint64_t I = 0; I < dense.size(); ++I) {
        const auto d = digits4(I, n);
        std::uint64_t blv = 0;
        for (int x : d) {
            blv = blv * 2 + static_cast<std::uint64_t>(x / 2);
        }
        p[blv] += dense[I];
    }
    return p;
}

/// Random probability vector with the given number of nonzero entries.
inline std::vector<double> random_distribution(std::mt19937_64 &rng, int n, int support = -1) {
    const std::size_t dim = std::size_t{1} << (2 * n);
    std::vector<double> p(dim, 0.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (support < 0 || static_cast<std::size_t>(support) >= dim) {
        for (auto &x : p) {
            x = u(rng);
        }
    } else {
        std::uniform_int_distribution<std::size_t> pick(0, dim - 1);
        for (int k = 0; k < support; ++k) {
            p[pick(rng)] += u(rng) + 0.01;
        }
    }
    double s = 0;
    for (double x : p) {
        s += x;
    }
    for (auto &x : p) {
        x /= s;
    }
    return p;
}

inline std::vector<double> random_real_state(std::mt19937_64 &rng, std::size_t dim) {
    std::normal_distribution<double> g;
    std::vector<double> v(dim);
    for (auto &x : v) {
        x = g(rng);
    }
    return v;
}

/// Random circuit from {H, T, CNOT, PHASE, CPHASE} over n logical qubits.
inline Circuit random_circuit(std::mt19937_64 &rng, int n, int gates) {
    Circuit c(n);
    std::uniform_int_distribution<int> kind(0, n >= 2 ? 4 : 2);
    std::uniform_int_distribution<int> qubit(0, n - 1);
    std::uniform_real_distribution<double> angle(-4.0, 4.0);
    for (int k = 0; k < gates; ++k) {
        const int q = qubit(rng);
        int r = qubit(rng);
        while (n >= 2 && r == q) {
            r = qubit(rng);
        }
        switch (kind(rng)) {
            case 0:
                c.h(q);
                break;
            case 1:
                c.phase(std::numbers::pi / 4, q);
                break;
            case 2:
                c.phase(angle(rng), q);
                break;
            case 3:
                c.cnot(q, r);
                break;
            default:
                c.cphase(angle(rng), q, r);
                break;
        }
    }
    return c;
}

inline double cosine(const std::vector<double> &a, const std::vector<double> &b) {
    double na = 0, nb = 0, d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        na += a[i] * a[i];
        nb += b[i] * b[i];
        d += a[i] * b[i];
    }
    return d / std::sqrt(na * nb);
}

/// Least-squares slope of y against x.
inline double slope(const std::vector<double> &x, const std::vector<double> &y) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace grabit::testing
