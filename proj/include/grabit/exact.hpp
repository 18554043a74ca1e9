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
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "grabit/circuit.hpp"
#include "grabit/scalar.hpp"
#include "grabit/state.hpp"
#include "json.hpp"

namespace grabit {

using Amplitudes = std::vector<std::complex<double>>;

/// Dense statevector, qubit 0 most significant.
struct QuantumState {
    int n_qubits = 0;
    Amplitudes amplitudes;

    double norm() const {
        double s = 0;
        for (const auto &a : amplitudes) {
            s += std::norm(a);
        }
        return std::sqrt(s);
    }
};

inline constexpr int kUnitaryLimit = 20;

namespace detail {

inline std::uint64_t qubit_bit(int n, int q) { return std::uint64_t{1} << (n - 1 - q); }

inline std::uint64_t oracle_input(std::uint64_t i, int n, const std::vector<int> &qubits) {
    std::uint64_t x = 0;
    for (std::size_t j = 0; j + 1 < qubits.size(); ++j) {
        x = (x << 1) | ((i & qubit_bit(n, qubits[j])) ? 1u : 0u);
    }
    return x;
}

inline void apply_unitary_gate(const GateOp &op, Amplitudes &psi, int n, const OracleFunction &f) {
    const std::size_t dim = psi.size();
    const double h = 1.0 / std::numbers::sqrt2;
    switch (op.kind) {
        case GateKind::X: {
            const auto b = qubit_bit(n, op.qubits[0]);
            for (std::size_t i = 0; i < dim; ++i) {
                if (!(i & b)) {
                    std::swap(psi[i], psi[i | b]);
                }
            }
            break;
        }
        case GateKind::Z: {
            const auto b = qubit_bit(n, op.qubits[0]);
            for (std::size_t i = 0; i < dim; ++i) {
                if (i & b) {
                    psi[i] = -psi[i];
                }
            }
            break;
        }
        case GateKind::H: {
            const auto b = qubit_bit(n, op.qubits[0]);
            for (std::size_t i = 0; i < dim; ++i) {
                if (!(i & b)) {
                    const auto a0 = psi[i];
                    const auto a1 = psi[i | b];
                    psi[i] = h * (a0 + a1);
                    psi[i | b] = h * (a0 - a1);
                }
            }
            break;
        }
        case GateKind::CNOT: {
            const auto bc = qubit_bit(n, op.qubits[0]);
            const auto bt = qubit_bit(n, op.qubits[1]);
            for (std::size_t i = 0; i < dim; ++i) {
                if ((i & bc) && !(i & bt)) {
                    std::swap(psi[i], psi[i | bt]);
                }
            }
            break;
        }
        case GateKind::SWAP: {
            const auto ba = qubit_bit(n, op.qubits[0]);
            const auto bb = qubit_bit(n, op.qubits[1]);
            for (std::size_t i = 0; i < dim; ++i) {
                if ((i & ba) && !(i & bb)) {
                    std::swap(psi[i], psi[(i & ~ba) | bb]);
                }
            }
            break;
        }
        case GateKind::Phase:
        case GateKind::CPhase: {
            std::uint64_t mask = 0;
            for (int q : op.qubits) {
                mask |= qubit_bit(n, q);
            }
            const auto w = std::polar(1.0, op.angle);
            for (std::size_t i = 0; i < dim; ++i) {
                if ((i & mask) == mask) {
                    psi[i] *= w;
                }
            }
            break;
        }
        case GateKind::Oracle: {
            const auto bo = qubit_bit(n, op.qubits.back());
            for (std::size_t i = 0; i < dim; ++i) {
                if (!(i & bo) && f(oracle_input(i, n, op.qubits))) {
                    std::swap(psi[i], psi[i | bo]);
                }
            }
            break;
        }
    }
}

}  // namespace detail

/// Applies each gate's complex unitary; REFRESH is ignored.
inline QuantumState run_unitary(const Circuit &c, std::optional<Amplitudes> psi0 = std::nullopt,
                                const OracleRegistry &oracles = {}) {
    const int n = c.n_logical();
    if (n > kUnitaryLimit) {
        throw LimitError("unitary simulation supports at most " + std::to_string(kUnitaryLimit) + " qubits");
    }
    QuantumState s{n, psi0 ? std::move(*psi0) : initial_amplitudes(c)};
    if (s.amplitudes.size() != (std::size_t{1} << n)) {
        throw std::invalid_argument("input state has wrong dimension");
    }
    for (const auto &ins : c.instructions()) {
        if (auto *g = std::get_if<GateOp>(&ins)) {
            OracleFunction f;
            if (g->kind == GateKind::Oracle) {
                f = oracles.resolve(g->oracle, static_cast<int>(g->qubits.size()) - 1);
            }
            detail::apply_unitary_gate(*g, s.amplitudes, n, f);
        }
    }
    return s;
}

/// Propagation of the realified vector with real arithmetic only; component
/// 2 i + nu holds Re (nu = 0) or Im (nu = 1) of amplitude i.
inline RealifiedState realified_propagate(const Circuit &c, RealifiedState phi, const OracleRegistry &oracles = {}) {
    const int n = c.n_logical();
    if (n > kUnitaryLimit) {
        throw LimitError("realified propagation supports at most " + std::to_string(kUnitaryLimit) + " qubits");
    }
    if (phi.components.size() != (std::size_t{2} << n)) {
        throw std::invalid_argument("realified state has wrong dimension");
    }
    auto &v = phi.components;
    const std::size_t dim = std::size_t{1} << n;
    const double h = 1.0 / std::numbers::sqrt2;
    auto swap_amp = [&](std::size_t i, std::size_t j) {
        std::swap(v[2 * i], v[2 * j]);
        std::swap(v[2 * i + 1], v[2 * j + 1]);
    };
    for (const auto &ins : c.instructions()) {
        const auto *g = std::get_if<GateOp>(&ins);
        if (!g) {
            continue;
        }
        const auto &q = g->qubits;
        switch (g->kind) {
            case GateKind::X: {
                const auto b = detail::qubit_bit(n, q[0]);
                for (std::size_t i = 0; i < dim; ++i) {
                    if (!(i & b)) {
                        swap_amp(i, i | b);
                    }
                }
                break;
            }
            case GateKind::Z: {
                const auto b = detail::qubit_bit(n, q[0]);
                for (std::size_t i = 0; i < dim; ++i) {
                    if (i & b) {
                        v[2 * i] = -v[2 * i];
                        v[2 * i + 1] = -v[2 * i + 1];
                    }
                }
                break;
            }
            case GateKind::H: {
                const auto b = detail::qubit_bit(n, q[0]);
                for (std::size_t i = 0; i < dim; ++i) {
                    if (i & b) {
                        continue;
                    }
                    for (std::size_t nu = 0; nu < 2; ++nu) {
                        const double a0 = v[2 * i + nu];
                        const double a1 = v[2 * (i | b) + nu];
                        v[2 * i + nu] = h * (a0 + a1);
                        v[2 * (i | b) + nu] = h * (a0 - a1);
                    }
                }
                break;
            }
            case GateKind::CNOT: {
                const auto bc = detail::qubit_bit(n, q[0]);
                const auto bt = detail::qubit_bit(n, q[1]);
                for (std::size_t i = 0; i < dim; ++i) {
                    if ((i & bc) && !(i & bt)) {
                        swap_amp(i, i | bt);
                    }
                }
                break;
            }
            case GateKind::SWAP: {
                const auto ba = detail::qubit_bit(n, q[0]);
                const auto bb = detail::qubit_bit(n, q[1]);
                for (std::size_t i = 0; i < dim; ++i) {
                    if ((i & ba) && !(i & bb)) {
                        swap_amp(i, (i & ~ba) | bb);
                    }
                }
                break;
            }
            case GateKind::Phase:
            case GateKind::CPhase: {
                std::uint64_t mask = 0;
                for (int k : q) {
                    mask |= detail::qubit_bit(n, k);
                }
                const double cs = std::cos(g->angle);
                const double sn = std::sin(g->angle);
                for (std::size_t i = 0; i < dim; ++i) {
                    if ((i & mask) == mask) {
                        const double re = v[2 * i];
                        const double im = v[2 * i + 1];
                        v[2 * i] = cs * re - sn * im;
                        v[2 * i + 1] = sn * re + cs * im;
                    }
                }
                break;
            }
            case GateKind::Oracle: {
                const auto f = oracles.resolve(g->oracle, static_cast<int>(q.size()) - 1);
                const auto bo = detail::qubit_bit(n, q.back());
                for (std::size_t i = 0; i < dim; ++i) {
                    if (!(i & bo) && f(detail::oracle_input(i, n, q))) {
                        swap_amp(i, i | bo);
                    }
                }
                break;
            }
        }
    }
    return phi;
}

/// The vector the grabit estimate of `c` should be parallel to: the
/// realified output when the circuit carries a ReIm grabit, else the real
/// part of the output amplitudes.
inline std::vector<double> reference_vector(const Circuit &c, const OracleRegistry &oracles = {}) {
    const auto out = run_unitary(c, std::nullopt, oracles);
    if (c.has_reim()) {
        return realify(out.amplitudes).components;
    }
    std::vector<double> re(out.amplitudes.size());
    for (std::size_t i = 0; i < re.size(); ++i) {
        re[i] = out.amplitudes[i].real();
    }
    return re;
}

/// Full unitary of a circuit, built column by column (column j = U |j>).
inline std::vector<Amplitudes> circuit_unitary(const Circuit &c, const OracleRegistry &oracles = {}) {
    const int n = c.n_logical();
    if (n > 12) {
        throw LimitError("circuit_unitary supports at most 12 qubits");
    }
    const std::size_t dim = std::size_t{1} << n;
    std::vector<Amplitudes> cols(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        Amplitudes e(dim);
        e[j] = 1;
        cols[j] = run_unitary(c, std::move(e), oracles).amplitudes;
    }
    return cols;
}

/// Squared amplitudes (|Psi_0|^2, ...).
inline std::vector<double> born2(std::span<const std::complex<double>> psi) {
    std::vector<double> p(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) {
        p[i] = std::norm(psi[i]);
    }
    return p;
}

struct Comparison {
    double cosine = 0;
    /// +1 when a aligns with b, -1 when it aligns with -b.
    int sign = 1;
    /// min over the global sign of || a/|a|_2 -/+ b/|b|_2 ||_2.
    double l2 = 0;
};

inline Comparison compare_up_to_scale(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("compare_up_to_scale: dimension mismatch " + std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()));
    }
    double na = 0, nb = 0, dot = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        na += a[i] * a[i];
        nb += b[i] * b[i];
        dot += a[i] * b[i];
    }
    if (na == 0 || nb == 0) {
        throw std::invalid_argument("compare_up_to_scale: zero vector");
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    Comparison c;
    c.cosine = dot / (na * nb);
    c.sign = c.cosine < 0 ? -1 : 1;
    double d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a[i] / na - c.sign * b[i] / nb;
        d += x * x;
    }
    c.l2 = std::sqrt(d);
    return c;
}

inline Comparison compare_up_to_scale(const StateEstimate<double> &a, const RealifiedState &b) {
    const auto dense = a.dense();
    return compare_up_to_scale(dense, b.components);
}

inline nlohmann::json to_json(const Comparison &c) {
    return {{"cosine", c.cosine}, {"sign", c.sign}, {"l2_after_normalization", c.l2}};
}

}  // namespace grabit
