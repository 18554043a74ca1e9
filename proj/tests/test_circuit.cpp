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
#include <filesystem>
#include <fstream>
#include <numeric>
#include <numbers>
#include <random>

#include "support.hpp"

using namespace grabit;
namespace gt = grabit::testing;

namespace {

RunOptions opts(std::uint64_t n_ball, std::uint64_t seed, int workers = 1, bool trace = true) {
    RunOptions o;
    o.n_ball = n_ball;
    o.seed = seed;
    o.workers = workers;
    o.trace = trace;
    return o;
}

constexpr double kPi = std::numbers::pi;

std::vector<std::string> mnemonics_of(const Circuit &c) {
    std::vector<std::string> out;
    for (const auto &ins : c.instructions()) {
        if (std::holds_alternative<RefreshOp>(ins)) {
            out.emplace_back("R");
        } else {
            out.emplace_back(gate_name(std::get<GateOp>(ins).kind));
        }
    }
    return out;
}

ParseError parse_error(std::string_view text) {
    try {
        parse_circuit(text);
    } catch (const ParseError &e) {
        return e;
    }
    ADD_FAILURE() << "no error for: " << text;
    return ParseError(0, 0, "");
}

// Two-grabit DJ circuit with f(x) = x.
Circuit dj_identity() {
    Circuit c(2);
    c.init().bits = "01";
    c.h(0).h(1).oracle("parity", {0, 1}).h(0);
    return c;
}

}  // namespace

TEST(Parser, BellCircuit) {
    auto c = parse_circuit("nbit 2\nH 0\nCNOT 0 1");
    EXPECT_EQ(c.n_logical(), 2);
    EXPECT_FALSE(c.has_reim());
    EXPECT_EQ(c.n_grabits(), 2);
    EXPECT_EQ(c.instructions().size(), 2u);
    EXPECT_EQ(c, Circuit(2).h(0).cnot(0, 1));
}

TEST(Parser, PhaseAddsReImGrabit) {
    auto c = parse_circuit("nbit 1\nPHASE 0.7853981633974483 0");
    EXPECT_TRUE(c.has_reim());
    EXPECT_EQ(c.n_grabits(), 2);
    EXPECT_EQ(std::get<GateOp>(c.instructions()[0]).angle, kPi / 4);
}

TEST(Parser, OutOfRangeTargetReportsLocation) {
    auto e = parse_error("nbit 2\nH 7");
    EXPECT_EQ(e.line(), 2);
    EXPECT_EQ(e.column(), 3);
    EXPECT_EQ(e.message(), "target 7 out of range [0,2)");
    EXPECT_STREQ(e.what(), "line 2, col 3: target 7 out of range [0,2)");
}

TEST(Parser, Diagnostics) {
    EXPECT_EQ(parse_error("nbit 2\n\n  FOO 1").line(), 3);
    EXPECT_EQ(parse_error("nbit 2\n\n  FOO 1").column(), 3);
    EXPECT_EQ(parse_error("nbit 2\n\n  FOO 1").message(), "unknown mnemonic 'FOO'");
    EXPECT_EQ(parse_error("nbit 2\nCNOT 0").line(), 2);
    EXPECT_EQ(parse_error("nbit 2\nH 0 1").column(), 5);
    EXPECT_EQ(parse_error("nbit 1\nPHASE inf 0").message(), "non-finite angle");
    EXPECT_EQ(parse_error("nbit 1\nPHASE nan 0").message(), "non-finite angle");
    EXPECT_EQ(parse_error("nbit 1\nPHASE abc 0").message(), "bad angle 'abc'");
    EXPECT_EQ(parse_error("H 0").message(), "expected 'nbit K' before 'H'");
    EXPECT_EQ(parse_error("nbit 2\nCNOT 1 1").message(), "duplicate target 1");
    EXPECT_EQ(parse_error("nbit 2\nREFRESH rf9").line(), 2);
    EXPECT_EQ(parse_error("nbit 2\nORACLE nosuch 0 1").message(), "unknown oracle 'nosuch'");
    EXPECT_EQ(parse_error("nbit 3\nORACLE bv:1 0 1 2").line(), 2);
    EXPECT_EQ(parse_error("nbit 2\ninit basis 012").column(), 12);
    EXPECT_EQ(parse_error("# only a comment\n").message(), "missing 'nbit K' directive");
}

TEST(Parser, CommentsInitAndRefresh) {
    auto c = parse_circuit(
        "# header\n"
        "nbit 3   # three qubits\n"
        "init basis 101\n"
        "X 2\n"
        "ORACLE bv:11 0 1 2\n"
        "REFRESH rf3\n");
    EXPECT_EQ(c.init().bits, "101");
    ASSERT_EQ(c.instructions().size(), 3u);
    EXPECT_EQ(std::get<RefreshOp>(c.instructions()[2]).variant, RefreshVariant::Rf3);
    EXPECT_EQ(std::get<GateOp>(c.instructions()[1]).oracle, "bv:11");
    EXPECT_EQ(c.gate_count(), 2u);

    auto f = parse_circuit("nbit 2\ninit fourier 3\nH 0\n");
    EXPECT_EQ(f.init().kind, InitState::Kind::Fourier);
    EXPECT_EQ(f.init().k, 3u);
    EXPECT_TRUE(f.has_reim());
    EXPECT_EQ(parse_error("nbit 2\ninit fourier 4").message(), "fourier index must lie in [0,2^2)");
}

TEST(Parser, StateFileIsResolvedAgainstCircuitDirectory) {
    const auto dir = std::filesystem::temp_directory_path() / "grabit_parser_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream s(dir / "psi.csv");
        s << "index,re,im\n0,0.6,0\n1,0,0.8\n";
        std::ofstream g(dir / "c.gc");
        g << "nbit 1\ninit file psi.csv\nH 0\n";
    }
    auto c = load_circuit(dir / "c.gc");
    EXPECT_EQ(c.init().path, (dir / "psi.csv").string());
    const auto psi = initial_amplitudes(c);
    ASSERT_EQ(psi.size(), 2u);
    EXPECT_EQ(psi[0], std::complex<double>(0.6, 0));
    EXPECT_EQ(psi[1], std::complex<double>(0, 0.8));
    std::filesystem::remove_all(dir);
}

TEST(Parser, PrintParseRoundTrip) {
    std::mt19937_64 rng(31);
    OracleRegistry oracles;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 4);
        Circuit c = gt::random_circuit(rng, n, static_cast<int>(rng() % 25));
        switch (trial % 4) {
            case 0:
                c.init().bits = to_binary(rng() % (1u << n), n);
                break;
            case 1:
                c.init().kind = InitState::Kind::Fourier;
                c.init().k = rng() % (1u << n);
                break;
            case 2:
                c.init().kind = InitState::Kind::Amplitudes;
                c.init().amplitudes.assign(std::size_t{1} << n, {0.1, -1.0 / 3});
                break;
            default:
                break;
        }
        c.x(0).z(n - 1).swap(0, 1).oracle(bv_name(rng() % (1u << (n - 1)), n - 1), [&] {
            std::vector<int> q(static_cast<std::size_t>(n));
            std::iota(q.begin(), q.end(), 0);
            return q;
        }());
        c.refresh(RefreshVariant::Rf2);
        c = insert_refresh(c, RefreshPolicy{RefreshPolicy::Kind::EveryK, 3}, RefreshVariant::Rf1);
        const auto text = print_circuit(c);
        EXPECT_EQ(parse_circuit(text, oracles), c) << text;
        EXPECT_EQ(print_circuit(parse_circuit(text, oracles)), text);
    }
}

TEST(InsertRefresh, AfterInterference) {
    Circuit c(2);
    c.h(0).cnot(0, 1).h(1);
    auto r = insert_refresh(c, parse_policy("after_interference"));
    EXPECT_EQ(mnemonics_of(r), (std::vector<std::string>{"H", "R", "CNOT", "H", "R"}));
    // Permutation phases are not in the interference set.
    Circuit p(1);
    p.phase(kPi, 0).phase(kPi / 4, 0).phase(0, 0);
    EXPECT_EQ(mnemonics_of(insert_refresh(p, parse_policy("after_interference"))),
              (std::vector<std::string>{"PHASE", "PHASE", "R", "PHASE"}));
}

TEST(InsertRefresh, NoneEndOnlyAndEveryK) {
    Circuit c(1);
    c.h(0).h(0).h(0).h(0);
    EXPECT_EQ(insert_refresh(c, parse_policy("none")), c);
    EXPECT_EQ(mnemonics_of(insert_refresh(c, parse_policy("every:2"))),
              (std::vector<std::string>{"H", "H", "R", "H", "H", "R"}));
    EXPECT_EQ(mnemonics_of(insert_refresh(c, parse_policy("end_only"))),
              (std::vector<std::string>{"H", "H", "H", "H", "R"}));
    auto r3 = insert_refresh(c, parse_policy("end_only"), RefreshVariant::Rf3);
    EXPECT_EQ(std::get<RefreshOp>(r3.instructions().back()).variant, RefreshVariant::Rf3);
    EXPECT_THROW(parse_policy("every:0"), std::invalid_argument);
    EXPECT_THROW(parse_policy("sometimes"), std::invalid_argument);
    EXPECT_EQ(policy_name(parse_policy("every:5")), "every:5");
}

TEST(ExactEngine, DeutschJozsaTraceInRationals) {
    const auto run = run_exact_stochastic<Rational>(dj_identity());
    ASSERT_EQ(run.trace.size(), 5u);
    const Rational q(1, 4);
    using E = SparseEntries<Rational>;
    const auto key = [](int a, int b) { return gt::from_digits4({a, b}); };
    EXPECT_EQ(run.trace[0].entries(), (E{{key(0, 2), 1}}));
    auto p1 = E{{key(0, 0), q}, {key(0, 3), q}, {key(2, 0), q}, {key(2, 3), q}};
    EXPECT_EQ(run.trace[2].entries(), p1);
    auto p2 = E{{key(0, 0), q}, {key(0, 3), q}, {key(2, 1), q}, {key(2, 2), q}};
    EXPECT_EQ(run.trace[3].entries(), p2);
    const Rational e(1, 8);
    EXPECT_EQ(run.psi.entries(), (E{{2, Rational(2 * e)}, {3, Rational(-2 * e)}}));
    EXPECT_EQ(run.p_tilde.entries(), (E{{0, q}, {1, q}, {2, q}, {3, q}}));
}

TEST(ExactEngine, HadamardPowersMatchClosedForm) {
    for (int n = 1; n <= 8; ++n) {
        Circuit c(1);
        for (int k = 0; k < 2 * n; ++k) {
            c.h(0);
        }
        const auto p = run_exact_stochastic(c, {}, 10, false).final_distribution().dense();
        const double d = std::pow(2.0, -(n + 1));
        EXPECT_NEAR(p[0], 0.25 + d, 1e-14);
        EXPECT_NEAR(p[1], 0.25 - d, 1e-14);
        EXPECT_NEAR(p[2], 0.25, 1e-14);
        EXPECT_NEAR(p[3], 0.25, 1e-14);
    }
}

TEST(ExactEngine, RefreshSkippedAndLimitEnforced) {
    Circuit c(1);
    c.h(0).refresh(RefreshVariant::Rf1).h(0);
    const auto run = run_exact_stochastic(c);
    ASSERT_EQ(run.warnings.size(), 1u);
    EXPECT_NE(run.warnings[0].find("REFRESH skipped"), std::string::npos);
    EXPECT_EQ(run.trace.size(), 3u);
    EXPECT_THROW(run_exact_stochastic(Circuit(11)), LimitError);
    EXPECT_NO_THROW(run_exact_stochastic(Circuit(11), {}, 11));
}

TEST(ExactEngine, TheoremOneOnRandomCircuits) {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 4);
        const Circuit c = gt::random_circuit(rng, n, static_cast<int>(rng() % 21));
        ASSERT_LE(c.n_grabits(), 5);
        const auto psi = run_exact_stochastic(c).psi.dense();
        const auto ref = reference_vector(c);
        EXPECT_GE(gt::cosine(psi, ref), 1 - 1e-9) << print_circuit(c);
    }
}

TEST(ExactEngine, RationalAndDoubleAgree) {
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 20; ++trial) {
        Circuit c(3);
        for (int k = 0; k < 8; ++k) {
            const int q = static_cast<int>(rng() % 3);
            switch (rng() % 3) {
                case 0:
                    c.h(q);
                    break;
                case 1:
                    c.cnot(q, (q + 1) % 3);
                    break;
                default:
                    c.x(q);
                    break;
            }
        }
        const auto exact = run_exact_stochastic<Rational>(c).psi.dense();
        const auto approx = run_exact_stochastic<double>(c).psi.dense();
        for (std::size_t i = 0; i < exact.size(); ++i) {
            EXPECT_NEAR(to_double(exact[i]), approx[i], 1e-14);
        }
    }
}

TEST(SampledEngine, EmptyCircuitReturnsInput) {
    Circuit c(3);
    c.init().bits = "110";
    auto r = run_sampled(c, opts(17, 1));
    EXPECT_EQ(r.psi_hat.entries(), (SparseEntries<double>{{6, 1.0}}));
    EXPECT_EQ(r.peak_blv, 6u);
    EXPECT_EQ(r.n_ball_final, 17u);

    // Interference-free encodings reproduce the input exactly for a point mass.
    Circuit m(1);
    m.init().kind = InitState::Kind::Amplitudes;
    m.init().amplitudes = {0, -1};
    auto rm = run_sampled(m, opts(9, 2));
    EXPECT_EQ(rm.psi_hat.entries(), (SparseEntries<double>{{1, -1.0}}));
}

TEST(SampledEngine, HadamardSquaredWithRefresh) {
    Circuit c(1);
    c.h(0).h(0);
    const auto r = insert_refresh(c, parse_policy("after_interference"));
    const std::uint64_t n = 10000;
    double mean = 0;
    const int reps = 20;
    for (int s = 0; s < reps; ++s) {
        auto res = run_sampled(r, opts(n, static_cast<std::uint64_t>(s)));
        const double d = std::hypot(res.p_tilde.at(0) - 1, res.p_tilde.at(1));
        EXPECT_LE(d, 3 * 1.6 / std::sqrt(static_cast<double>(n)));
        mean += d / reps;
    }
    EXPECT_LE(mean, 1.6 / std::sqrt(static_cast<double>(n)) * 1.5);
}

TEST(SampledEngine, BitIdenticalAcrossRunsAndWorkers) {
    std::mt19937_64 rng(34);
    for (int trial = 0; trial < 5; ++trial) {
        Circuit c = insert_refresh(gt::random_circuit(rng, 3, 15), parse_policy("after_interference"),
                                   static_cast<RefreshVariant>(trial % 3));
        std::string first;
        for (int workers : {1, 2, 3, 8}) {
            auto res = run_sampled(c, opts(5000, 99, workers));
            const auto dump = to_json(res).dump();
            if (first.empty()) {
                first = dump;
            }
            EXPECT_EQ(dump, first) << "workers " << workers;
        }
    }
}

TEST(SampledEngine, ConvergesToBornOneOnDeutschJozsa) {
    const Circuit c = insert_refresh(dj_identity(), parse_policy("after_interference"));
    // Exact state (0,0,1,-1)/sqrt 2, Born-1 probabilities (0,0,1/2,1/2).
    const std::vector<double> born1{0, 0, 0.5, 0.5};
    std::vector<double> lx, ly;
    for (std::uint64_t n : {1000u, 10000u, 100000u, 1000000u}) {
        const int reps = n >= 1000000u ? 6 : 20;
        double mean = 0;
        for (int s = 0; s < reps; ++s) {
            auto res = run_sampled(c, opts(n, 500 + static_cast<std::uint64_t>(s), 1, false));
            double d = 0;
            for (std::uint64_t i = 0; i < 4; ++i) {
                d += std::abs(res.p_tilde.at(i) - born1[i]);
            }
            mean += d / reps;
        }
        lx.push_back(std::log(static_cast<double>(n)));
        ly.push_back(std::log(mean));
    }
    EXPECT_NEAR(gt::slope(lx, ly), -0.5, 0.1);
}

TEST(SampledEngine, PropagatesAnnihilation) {
    // Two balls, H then H: some seeds cancel everything, rf1 must then throw.
    Circuit c(1);
    c.h(0).h(0).refresh(RefreshVariant::Rf1);
    int thrown = 0;
    for (std::uint64_t s = 0; s < 64; ++s) {
        try {
            run_sampled(c, opts(2, s));
        } catch (const AnnihilationError &) {
            ++thrown;
        }
    }
    EXPECT_GT(thrown, 0);
}

TEST(SampledEngine, RunResultJson) {
    Circuit c(2);
    c.h(0).cnot(0, 1);
    auto res = run_sampled(insert_refresh(c, parse_policy("end_only")), opts(100, 3));
    const auto j = to_json(res);
    EXPECT_EQ(j["engine"], "sampled");
    EXPECT_EQ(j["seed"], 3);
    EXPECT_EQ(j["refreshes"].size(), 1u);
    EXPECT_EQ(j["effective_ball_trace"].size(), 4u);
    EXPECT_FALSE(j.contains("wall_seconds"));
}
