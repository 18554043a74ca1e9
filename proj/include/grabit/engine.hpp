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

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "grabit/circuit.hpp"
#include "grabit/ensemble.hpp"
#include "grabit/gates.hpp"
#include "grabit/refresh.hpp"
#include "grabit/rng.hpp"
#include "grabit/state.hpp"
#include "json.hpp"

namespace grabit {

struct RunOptions {
    std::uint64_t n_ball = 10000;
    std::uint64_t seed = 0;
    int workers = 1;
    RoarMode roar = RoarMode::Deterministic;
    /// Record effective_ball_count after every instruction.
    bool trace = true;
    /// Keep the final ensemble in the result.
    bool keep_ensemble = false;
    /// Called after every instruction with its index and the ensemble.
    std::function<void(std::size_t, const RealizationEnsemble &)> observer;
};

struct RunResult {
    int n_logical = 0;
    bool has_reim = false;
    std::uint64_t seed = 0;
    std::uint64_t n_ball_initial = 0;
    std::uint64_t n_ball_final = 0;
    StateEstimate<double> psi_hat;
    PhysicalDistribution<double> p_tilde;
    /// Born-1 distribution over logical values (ReIm summed out).
    SparseEntries<double> logical_p;
    std::uint64_t peak_blv = 0;
    bool annihilated = false;
    std::vector<RefreshReport> refreshes;
    std::vector<std::uint64_t> effective_trace;
    std::vector<std::string> warnings;
    std::optional<RealizationEnsemble> ensemble;
    double wall_seconds = 0;
};

/// Logical-qubit view of a grabit-level physical distribution.
inline SparseEntries<double> logical_marginal(const PhysicalDistribution<double> &p, bool has_reim) {
    SparseEntries<double> out;
    for (const auto &[i, v] : p.entries()) {
        out.emplace_back(has_reim ? i >> 1 : i, v);
    }
    detail::sort_and_merge(out);
    return out;
}

/// Born-2 comparison view of an estimate: |Psi_i|^2 normalized, where the
/// ReIm pair (i, 0), (i, 1) forms Psi_i.
inline SparseEntries<double> born2_logical(const StateEstimate<double> &psi, bool has_reim) {
    SparseEntries<double> out;
    double total = 0;
    for (const auto &[i, v] : psi.entries()) {
        out.emplace_back(has_reim ? i >> 1 : i, v * v);
        total += v * v;
    }
    detail::sort_and_merge(out);
    if (total > 0) {
        for (auto &e : out) {
            e.second /= total;
        }
    }
    return out;
}

inline std::uint64_t argmax_entry(const SparseEntries<double> &v) {
    std::uint64_t best = 0;
    double best_v = -1;
    for (const auto &[i, x] : v) {
        if (x > best_v) {
            best_v = x;
            best = i;
        }
    }
    return best;
}

namespace detail {

using CompiledOp = std::variant<StochasticGate, RefreshVariant>;

inline std::vector<CompiledOp> compile(const Circuit &c, const OracleRegistry &oracles) {
    std::vector<CompiledOp> out;
    out.reserve(c.instructions().size());
    for (const auto &ins : c.instructions()) {
        if (auto *g = std::get_if<GateOp>(&ins)) {
            out.emplace_back(compile_gate(*g, c, oracles));
        } else {
            out.emplace_back(std::get<RefreshOp>(ins).variant);
        }
    }
    return out;
}

}  // namespace detail

/// Samples the input state into n_ball realizations, pushes them through the
/// circuit and applies REFRESH instructions as they come. rf2 replicates up
/// to the initial N_ball; rf3 holds twice the initial N_ball.
inline RunResult run_sampled(const Circuit &c, const RunOptions &opt, const OracleRegistry &oracles = {}) {
    if (opt.n_ball == 0) {
        throw std::invalid_argument("n_ball must be >= 1");
    }
    const auto t0 = std::chrono::steady_clock::now();
    const auto ops = detail::compile(c, oracles);
    const RngStream rng(opt.seed);

    RealizationEnsemble e;
    const int n = c.n_grabits();
    if (c.init().kind == InitState::Kind::Basis) {
        e = RealizationEnsemble::filled(n, opt.n_ball, initial_distribution(c).entries().front().first);
    } else {
        e = sample_ensemble(initial_distribution(c), opt.n_ball, rng);
    }

    RunResult res;
    res.n_logical = c.n_logical();
    res.has_reim = c.has_reim();
    res.seed = opt.seed;
    res.n_ball_initial = opt.n_ball;
    if (opt.trace) {
        res.effective_trace.push_back(effective_ball_count(e));
    }
    for (std::size_t g = 0; g < ops.size(); ++g) {
        if (auto *gate = std::get_if<StochasticGate>(&ops[g])) {
            apply_sampled(*gate, e, rng, g, opt.workers);
        } else {
            switch (std::get<RefreshVariant>(ops[g])) {
                case RefreshVariant::Rf1:
                    res.refreshes.push_back(rf1(e, opt.roar, rng, g));
                    break;
                case RefreshVariant::Rf2:
                    res.refreshes.push_back(rf2(e, opt.n_ball));
                    break;
                case RefreshVariant::Rf3:
                    res.refreshes.push_back(rf3(e, 2 * opt.n_ball));
                    break;
            }
        }
        if (opt.trace) {
            res.effective_trace.push_back(effective_ball_count(e));
        }
        if (opt.observer) {
            opt.observer(g, e);
        }
    }

    res.n_ball_final = e.size();
    res.psi_hat = extract_state(e);
    res.p_tilde = physical_distribution(e);
    res.logical_p = logical_marginal(res.p_tilde, res.has_reim);
    res.peak_blv = argmax_entry(res.logical_p);
    res.annihilated = res.psi_hat.annihilated();
    if (res.annihilated) {
        res.warnings.push_back("estimate annihilated");
    }
    if (opt.keep_ensemble) {
        res.ensemble = std::move(e);
    }
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

template <class T>
struct ExactRun {
    int n_logical = 0;
    bool has_reim = false;
    /// Distribution before the first instruction and after every gate.
    std::vector<ProbabilityVector<T>> trace;
    StateEstimate<T> psi;
    PhysicalDistribution<T> p_tilde;
    std::vector<std::string> warnings;

    const ProbabilityVector<T> &final_distribution() const { return trace.back(); }
};

inline constexpr int kDefaultExactLimit = 10;

/// Exact propagation P <- S P through every gate. REFRESH instructions are
/// skipped with a warning.
template <class T = double>
ExactRun<T> run_exact_stochastic(const Circuit &c, const OracleRegistry &oracles = {},
                                 int max_grabits = kDefaultExactLimit, bool keep_trace = true) {
    if (c.n_grabits() > max_grabits) {
        throw LimitError("exact stochastic propagation supports at most " + std::to_string(max_grabits) +
                         " grabits, circuit has " + std::to_string(c.n_grabits()));
    }
    ExactRun<T> run;
    run.n_logical = c.n_logical();
    run.has_reim = c.has_reim();
    run.trace.push_back(initial_distribution<T>(c));
    std::size_t index = 0;
    for (const auto &ins : c.instructions()) {
        if (auto *g = std::get_if<GateOp>(&ins)) {
            auto next = apply_exact(compile_gate(*g, c, oracles), run.trace.back());
            if (keep_trace) {
                run.trace.push_back(std::move(next));
            } else {
                run.trace.back() = std::move(next);
            }
        } else {
            run.warnings.push_back("instruction " + std::to_string(index) +
                                   ": REFRESH skipped in exact propagation");
        }
        ++index;
    }
    run.psi = extract_state(run.trace.back());
    run.p_tilde = physical_distribution(run.trace.back());
    return run;
}

namespace detail {

template <class Sparse>
nlohmann::json entries_json(const Sparse &entries) {
    auto arr = nlohmann::json::array();
    for (const auto &[i, v] : entries) {
        arr.push_back({i, to_double(v)});
    }
    return arr;
}

}  // namespace detail

/// Deterministic summary; wall time is left out so repeated runs compare
/// byte for byte.
inline nlohmann::json to_json(const RunResult &r) {
    nlohmann::json j;
    j["engine"] = "sampled";
    j["n_logical"] = r.n_logical;
    j["has_reim"] = r.has_reim;
    j["seed"] = r.seed;
    j["n_ball_initial"] = r.n_ball_initial;
    j["n_ball_final"] = r.n_ball_final;
    j["psi_hat"] = detail::entries_json(r.psi_hat.entries());
    j["p_tilde"] = detail::entries_json(r.p_tilde.entries());
    j["logical_p"] = detail::entries_json(r.logical_p);
    j["peak_blv"] = r.peak_blv;
    j["peak_binary"] = to_binary(r.peak_blv, r.n_logical);
    j["annihilated"] = r.annihilated;
    auto &refs = j["refreshes"] = nlohmann::json::array();
    for (const auto &rep : r.refreshes) {
        refs.push_back(to_json(rep));
    }
    j["effective_ball_trace"] = r.effective_trace;
    j["warnings"] = r.warnings;
    return j;
}

template <class T>
nlohmann::json to_json(const ExactRun<T> &r) {
    nlohmann::json j;
    j["engine"] = "exact_stochastic";
    j["n_logical"] = r.n_logical;
    j["has_reim"] = r.has_reim;
    j["psi"] = detail::entries_json(r.psi.entries());
    j["p_tilde"] = detail::entries_json(r.p_tilde.entries());
    j["final_support"] = r.final_distribution().support_size();
    j["warnings"] = r.warnings;
    return j;
}

}  // namespace grabit
