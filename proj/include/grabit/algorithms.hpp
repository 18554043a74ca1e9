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
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "grabit/circuit.hpp"

namespace grabit {

/// Deutsch-Jozsa / Bernstein-Vazirani circuit on n input qubits plus one
/// ancilla (the last qubit): prepare |0..0>|1>, H on everything, the oracle,
/// H on the inputs and optionally on the ancilla. Stays real, so no ReIm.
inline Circuit build_dj_bv(int n, const std::string &oracle, bool final_hadamard_on_ancilla = false) {
    if (n < 1) {
        throw std::invalid_argument("DJ/BV needs at least one input qubit");
    }
    Circuit c(n + 1);
    c.init().bits = std::string(static_cast<std::size_t>(n), '0') + "1";
    for (int q = 0; q <= n; ++q) {
        c.h(q);
    }
    std::vector<int> qubits(static_cast<std::size_t>(n) + 1);
    for (int q = 0; q <= n; ++q) {
        qubits[static_cast<std::size_t>(q)] = q;
    }
    c.oracle(oracle, std::move(qubits));
    for (int q = 0; q < n; ++q) {
        c.h(q);
    }
    if (final_hadamard_on_ancilla) {
        c.h(n);
    }
    return c;
}

/// BV for the hidden string a (first input qubit = most significant bit).
inline Circuit build_bv(int n, std::uint64_t a, bool final_hadamard_on_ancilla = true) {
    if (n >= 64 || a >= (std::uint64_t{1} << n)) {
        throw std::invalid_argument("hidden string does not fit in " + std::to_string(n) + " bits");
    }
    return build_dj_bv(n, bv_name(a, n), final_hadamard_on_ancilla);
}

/// Standard QFT ladder: for each qubit j, H(j) then controlled R_k with
/// phi_k = 2 pi / 2^k from qubit j + k - 1 onto j, then the optional swap
/// network. The inverse is the reversed sequence with negated angles.
inline Circuit build_qft(int n, bool inverse = false, bool with_swaps = true) {
    Circuit c(n);
    std::vector<GateOp> ops;
    for (int j = 0; j < n; ++j) {
        ops.push_back({GateKind::H, {j}, 0, {}});
        for (int k = 2; j + k - 1 < n; ++k) {
            ops.push_back({GateKind::CPhase, {j + k - 1, j}, 2 * std::numbers::pi / std::ldexp(1.0, k), {}});
        }
    }
    if (with_swaps) {
        for (int j = 0; j < n / 2; ++j) {
            ops.push_back({GateKind::SWAP, {j, n - 1 - j}, 0, {}});
        }
    }
    if (inverse) {
        std::reverse(ops.begin(), ops.end());
        for (auto &op : ops) {
            op.angle = -op.angle;
        }
    }
    for (auto &op : ops) {
        c.gate(op.kind, std::move(op.qubits), op.angle);
    }
    return c;
}

/// Fourier-basis input |k~>; an inverse QFT without swaps maps it to |k>.
inline InitState fourier_basis_state(int n, std::uint64_t k) {
    if (n < 1 || n >= 63 || k >= (std::uint64_t{1} << n)) {
        throw std::out_of_range("fourier index " + std::to_string(k) + " out of range for " + std::to_string(n) +
                                " qubits");
    }
    InitState s;
    s.kind = InitState::Kind::Fourier;
    s.k = k;
    return s;
}

/// Equal superposition of |offset + m * period>, m = 0, 1, ...
inline InitState periodic_state(int n, std::uint64_t period, std::uint64_t offset = 0) {
    if (n < 1 || n > 26) {
        throw std::out_of_range("periodic state needs 1 <= n <= 26");
    }
    const std::uint64_t dim = std::uint64_t{1} << n;
    if (period == 0 || offset >= period || period > dim) {
        throw std::invalid_argument("periodic state needs 0 <= offset < period <= 2^n");
    }
    InitState s;
    s.kind = InitState::Kind::Amplitudes;
    s.amplitudes.assign(dim, 0);
    std::uint64_t count = 0;
    for (std::uint64_t x = offset; x < dim; x += period) {
        ++count;
    }
    const double a = 1 / std::sqrt(static_cast<double>(count));
    for (std::uint64_t x = offset; x < dim; x += period) {
        s.amplitudes[x] = a;
    }
    return s;
}

inline Circuit with_init(Circuit c, InitState init) {
    c.init() = std::move(init);
    return c;
}

/// Inverse QFT applied to |k~>; success means argmax p~ = k.
inline Circuit build_fourier_decoder(int n, std::uint64_t k) {
    return with_init(build_qft(n, true, false), fourier_basis_state(n, k));
}

}  // namespace grabit
