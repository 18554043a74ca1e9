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

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"

using namespace grabit;
namespace gt = grabit::testing;
using C = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;
const double kR = 1 / std::sqrt(2.0);

Amplitudes random_amplitudes(std::mt19937_64 &rng, std::size_t dim) {
    std::normal_distribution<double> g;
    Amplitudes a(dim);
    double s = 0;
    for (auto &x : a) {
        x = {g(rng), g(rng)};
        s += std::norm(x);
    }
    for (auto &x : a) {
        x /= std::sqrt(s);
    }
    return a;
}

// Single-gate circuit with the same register width as `like`.
Circuit single(const Circuit &like, const GateOp &op) {
    Circuit c(like.n_logical());
    if (op.kind == GateKind::Oracle) {
        c.oracle(op.oracle, op.qubits);
    } else {
        c.gate(op.kind, op.qubits, op.angle);
    }
    return c;
}

}  // namespace

TEST(Unitary, HadamardOnZero) {
    auto s = run_unitary(Circuit(1).h(0));
    EXPECT_NEAR(s.amplitudes[0].real(), kR, 1e-16);
    EXPECT_NEAR(s.amplitudes[1].real(), kR, 1e-16);
    EXPECT_EQ(s.amplitudes[0].imag(), 0.0);
}

TEST(Unitary, TwoQubitQftOfZeroIsUniform) {
    Circuit c(2);
    c.h(0).cphase(kPi / 2, 1, 0).h(1).swap(0, 1);
    for (const auto &a : run_unitary(c).amplitudes) {
        EXPECT_NEAR(a.real(), 0.5, 1e-15);
        EXPECT_NEAR(a.imag(), 0.0, 1e-15);
    }
}

TEST(Unitary, DeutschJozsaBalancedAnswer) {
    Circuit c(2);
    c.init().bits = "01";
    c.h(0).h(1).oracle("parity", {0, 1}).h(0);
    auto s = run_unitary(c);
    EXPECT_NEAR(std::norm(s.amplitudes[2]) + std::norm(s.amplitudes[3]), 1.0, 1e-15);
}

TEST(Unitary, GateMatricesOnBasisStates) {
    // Columns written out by hand, qubit 0 most significant.
    auto col = [](const Circuit &c, std::size_t j) { return circuit_unitary(c)[j]; };
    EXPECT_EQ(col(Circuit(2).cnot(0, 1), 2), (Amplitudes{0, 0, 0, 1}));
    EXPECT_EQ(col(Circuit(2).cnot(1, 0), 1), (Amplitudes{0, 0, 0, 1}));
    EXPECT_EQ(col(Circuit(2).swap(0, 1), 1), (Amplitudes{0, 0, 1, 0}));
    EXPECT_EQ(col(Circuit(1).x(0), 0), (Amplitudes{0, 1}));
    EXPECT_EQ(col(Circuit(1).z(0), 1), (Amplitudes{0, -1}));
    const auto p = col(Circuit(1).phase(0.3, 0), 1);
    EXPECT_NEAR(std::abs(p[1] - std::polar(1.0, 0.3)), 0, 1e-16);
    const auto cp = circuit_unitary(Circuit(2).cphase(0.3, 0, 1));
    for (std::size_t j = 0; j < 3; ++j) {
        EXPECT_EQ(cp[j][j], C(1));
    }
    EXPECT_NEAR(std::abs(cp[3][3] - std::polar(1.0, 0.3)), 0, 1e-16);
    OracleRegistry o;
    EXPECT_EQ(circuit_unitary(Circuit(3).oracle("bv:11", {0, 1, 2}), o)[0b100], (Amplitudes{0, 0, 0, 0, 0, 1, 0, 0}));
}

TEST(Unitary, NormPreservedOverLongRandomCircuits) {
    std::mt19937_64 rng(41);
    const Circuit c = gt::random_circuit(rng, 5, 1000);
    Amplitudes psi = random_amplitudes(rng, 32);
    for (const auto &ins : c.instructions()) {
        psi = run_unitary(single(c, std::get<GateOp>(ins)), psi).amplitudes;
        double s = 0;
        for (const auto &a : psi) {
            s += std::norm(a);
        }
        ASSERT_NEAR(std::sqrt(s), 1.0, 1e-10);
    }
}

TEST(Unitary, CircuitUnitaryIsUnitary) {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 10; ++trial) {
        const auto cols = circuit_unitary(gt::random_circuit(rng, 4, 30));
        for (std::size_t i = 0; i < cols.size(); ++i) {
            for (std::size_t j = 0; j < cols.size(); ++j) {
                C dot = 0;
                for (std::size_t k = 0; k < cols.size(); ++k) {
                    dot += std::conj(cols[i][k]) * cols[j][k];
                }
                EXPECT_NEAR(std::abs(dot - C(i == j ? 1.0 : 0.0)), 0.0, 1e-12);
            }
        }
    }
}

TEST(Unitary, LimitsAndShapes) {
    EXPECT_THROW(run_unitary(Circuit(21)), LimitError);
    EXPECT_THROW(run_unitary(Circuit(2), Amplitudes{1, 0}), std::invalid_argument);
    EXPECT_THROW(circuit_unitary(Circuit(13)), LimitError);
}

TEST(Realified, Examples) {
    RealifiedState id{1, {0.6, 0, 0, 0.8}};
    EXPECT_EQ(realified_propagate(Circuit(1), id).components, id.components);

    Circuit s(1);
    s.phase(kPi / 2, 0);
    auto out = realified_propagate(s, RealifiedState{1, {0, 0, 1, 0}}).components;
    EXPECT_NEAR(out[0], 0, 1e-16);
    EXPECT_NEAR(out[1], 0, 1e-16);
    EXPECT_NEAR(out[2], 0, 1e-16);
    EXPECT_NEAR(out[3], 1, 1e-16);

    Circuit t(1);
    t.phase(kPi / 4, 0);
    auto tt = realified_propagate(t, RealifiedState{1, {kR, 0, kR, 0}}).components;
    EXPECT_NEAR(tt[0], kR, 1e-15);
    EXPECT_NEAR(tt[1], 0, 1e-15);
    EXPECT_NEAR(tt[2], 0.5, 1e-15);
    EXPECT_NEAR(tt[3], 0.5, 1e-15);
}

TEST(Realified, AgreesWithComplexPropagation) {
    std::mt19937_64 rng(43);
    OracleRegistry o;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 5);
        Circuit c = gt::random_circuit(rng, n, 40);
        c.x(0).z(n - 1);
        if (n >= 2) {
            c.swap(0, n - 1).oracle("parity", {0, n - 1});
        }
        const auto psi0 = random_amplitudes(rng, std::size_t{1} << n);
        const auto want = realify(run_unitary(c, psi0, o).amplitudes).components;
        const auto got = realified_propagate(c, realify(psi0), o).components;
        ASSERT_EQ(got.size(), want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            EXPECT_NEAR(got[i], want[i], 1e-12);
        }
    }
}

TEST(Realified, ReferenceVectorShape) {
    EXPECT_EQ(reference_vector(Circuit(2).h(0)).size(), 4u);
    EXPECT_EQ(reference_vector(Circuit(2).phase(1.0, 0)).size(), 8u);
}

TEST(Compare, Examples) {
    const std::vector<double> b{0.6, 0, -0.8, 0};
    std::vector<double> a2{1.2, 0, -1.6, 0};
    auto c = compare_up_to_scale(a2, b);
    EXPECT_NEAR(c.cosine, 1, 1e-15);
    EXPECT_NEAR(c.l2, 0, 1e-15);
    EXPECT_EQ(c.sign, 1);

    std::vector<double> neg{-0.6, 0, 0.8, 0};
    c = compare_up_to_scale(neg, b);
    EXPECT_NEAR(c.cosine, -1, 1e-15);
    EXPECT_NEAR(c.l2, 0, 1e-15);
    EXPECT_EQ(c.sign, -1);

    std::vector<double> perp{0, 1, 0, 0};
    c = compare_up_to_scale(perp, b);
    EXPECT_EQ(c.cosine, 0);
    EXPECT_NEAR(c.l2, std::sqrt(2.0), 1e-15);

    std::vector<double> zero(4, 0.0), short_v(3, 1.0);
    EXPECT_THROW(compare_up_to_scale(zero, b), std::invalid_argument);
    EXPECT_THROW(compare_up_to_scale(short_v, b), std::invalid_argument);

    StateEstimate<double> est(2, {{0, 0.3}, {2, -0.4}});
    EXPECT_NEAR(compare_up_to_scale(est, RealifiedState{1, b}).cosine, 1, 1e-15);
    const auto j = to_json(compare_up_to_scale(a2, b));
    EXPECT_TRUE(j.contains("l2_after_normalization"));
}

TEST(Born2, SquaredMagnitudes) {
    EXPECT_NEAR(born2(Amplitudes{C(0.6, 0), C(0, -0.8)})[0], 0.36, 1e-16);
    EXPECT_NEAR(born2(Amplitudes{C(0.6, 0), C(0, -0.8)})[1], 0.64, 1e-15);
}
