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
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "grabit/algorithms.hpp"
#include "grabit/engine.hpp"
#include "grabit/exact.hpp"
#include "grabit/parallel.hpp"
#include "grabit/rng.hpp"
#include "json.hpp"

namespace grabit {

// ---------------------------------------------------------------------------
// Fits.

struct LinearFit {
    double slope = 0;
    double intercept = 0;
    double residual_rms = 0;
    std::size_t points = 0;
};

/// Ordinary least squares y = intercept + slope x.
inline LinearFit fit_line(const std::vector<double> &x, const std::vector<double> &y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("fit needs at least two points");
    }
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0) {
        throw std::invalid_argument("fit needs distinct x values");
    }
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        ss += r * r;
    }
    f.residual_rms = std::sqrt(ss / n);
    f.points = x.size();
    return f;
}

/// N = a exp(b n), fitted on log N.
struct ExponentialFit {
    double a = 0;
    double b = 0;
    double residual_rms = 0;
    std::size_t points = 0;
};

inline ExponentialFit fit_exponential(const std::vector<double> &n, const std::vector<double> &values) {
    std::vector<double> logs;
    for (double v : values) {
        logs.push_back(std::log(v));
    }
    const auto f = fit_line(n, logs);
    return {std::exp(f.intercept), f.slope, f.residual_rms, f.points};
}

inline nlohmann::json to_json(const LinearFit &f) {
    return {{"slope", f.slope}, {"intercept", f.intercept}, {"residual_rms", f.residual_rms}, {"points", f.points}};
}

inline nlohmann::json to_json(const ExponentialFit &f) {
    return {{"a", f.a}, {"b", f.b}, {"residual_rms", f.residual_rms}, {"points", f.points}};
}

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline RefreshPolicy policy_from_json(const nlohmann::json &j, const char *key, RefreshPolicy fallback) {
    return j.contains(key) ? parse_policy(j.at(key).get<std::string>()) : fallback;
}

inline RefreshVariant variant_from_json(const nlohmann::json &j, RefreshVariant fallback) {
    return j.contains("variant") ? parse_variant(j.at("variant").get<std::string>()) : fallback;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Minimal N_ball scan.

struct MinNballConfig {
    /// "inverse_qft" (|k~> decoded by an inverse QFT) or "identity".
    std::string family = "inverse_qft";
    int n_min = 3;
    int n_max = 7;
    int trials = 50;
    double threshold = 0.1;
    /// Refresh after every gate by default.
    RefreshPolicy policy{RefreshPolicy::Kind::EveryK, 1};
    RefreshVariant variant = RefreshVariant::Rf3;
    /// Draw k from (2^(n-1), 2^n) instead of [0, 2^n).
    bool k_upper_half = true;
    /// "p_tilde": argmax of the Born-1 marginal. "psi_hat": argmax of
    /// |psi-hat_l|^2, the only readout that carries signal when no refresh
    /// runs (p~ of the decoder is exactly uniform then).
    std::string readout = "p_tilde";
    std::uint64_t seed = 1;
    std::uint64_t n_start = 1;
    std::uint64_t n_budget = std::uint64_t{1} << 22;
    /// Bisection stops once hi - lo <= rel_precision * hi.
    double rel_precision = 0.125;
    int workers = 1;
};

struct MinNballRow {
    int n_bit = 0;
    std::uint64_t min_nball = 0;
    double ratio_at_min = 0;
    /// min_nball / 2 and its success ratio (below threshold by construction).
    std::uint64_t half = 0;
    double ratio_at_half = 0;
    bool budget_exhausted = false;
    std::size_t evaluations = 0;
};

struct MinNballResult {
    std::vector<MinNballRow> rows;
    std::optional<ExponentialFit> fit;
    bool partial = false;
};

inline Circuit scan_circuit(const MinNballConfig &cfg, int n, std::uint64_t k) {
    Circuit c(n);
    if (cfg.family == "inverse_qft") {
        c = build_fourier_decoder(n, k);
    } else if (cfg.family == "identity") {
        c.init().bits = to_binary(k, n);
    } else {
        throw std::invalid_argument("unknown scan family '" + cfg.family + "'");
    }
    return insert_refresh(c, cfg.policy, cfg.variant);
}

/// Fraction of trials whose readout peak over the logical qubits equals the
/// encoded k. Trial t draws k and its seed from (seed, n, t) only, so every
/// N_ball sees the same inputs.
inline double success_ratio(const MinNballConfig &cfg, int n, std::uint64_t n_ball) {
    if (cfg.readout != "p_tilde" && cfg.readout != "psi_hat") {
        throw std::invalid_argument("readout must be p_tilde or psi_hat");
    }
    const bool psi_readout = cfg.readout == "psi_hat";
    std::vector<char> ok(static_cast<std::size_t>(cfg.trials), 0);
    const RngStream base(cfg.seed);
    parallel_for(ok.size(), cfg.workers, [&](std::size_t b, std::size_t e) {
        for (std::size_t t = b; t < e; ++t) {
            const RngStream trial = base.derive(static_cast<std::uint64_t>(n), t);
            const std::uint64_t half = std::uint64_t{1} << (n - 1);
            const std::uint64_t k = cfg.k_upper_half && n >= 2 ? half + 1 + trial.bits(0, 0, 0) % (half - 1)
                                                               : trial.bits(0, 0, 0) % (2 * half);
            RunOptions ro;
            ro.n_ball = n_ball;
            ro.seed = trial.seed();
            ro.trace = false;
            try {
                const auto res = run_sampled(scan_circuit(cfg, n, k), ro);
                if (psi_readout) {
                    ok[t] = !res.psi_hat.is_zero() &&
                            argmax_entry(born2_logical(res.psi_hat, res.has_reim)) == k;
                } else {
                    ok[t] = res.peak_blv == k;
                }
            } catch (const AnnihilationError &) {
                ok[t] = 0;
            }
        }
    });
    return static_cast<double>(std::count(ok.begin(), ok.end(), 1)) / static_cast<double>(ok.size());
}

/// Doubling search upward, bisection, then halving until N/2 fails, so the
/// reported minimum passes and its half does not.
inline MinNballRow min_nball_for(const MinNballConfig &cfg, int n) {
    std::map<std::uint64_t, double> memo;
    auto ratio = [&](std::uint64_t nb) {
        auto it = memo.find(nb);
        if (it == memo.end()) {
            it = memo.emplace(nb, success_ratio(cfg, n, nb)).first;
        }
        return it->second;
    };
    MinNballRow row;
    row.n_bit = n;
    std::uint64_t hi = std::max<std::uint64_t>(cfg.n_start, 1);
    while (ratio(hi) < cfg.threshold) {
        if (2 * hi > cfg.n_budget) {
            row.budget_exhausted = true;
            row.min_nball = hi;
            row.ratio_at_min = ratio(hi);
            row.evaluations = memo.size();
            return row;
        }
        hi *= 2;
    }
    std::uint64_t lo = hi == std::max<std::uint64_t>(cfg.n_start, 1) ? 0 : hi / 2;
    while (hi - lo > std::max<std::uint64_t>(1, static_cast<std::uint64_t>(cfg.rel_precision * static_cast<double>(hi)))) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (ratio(mid) >= cfg.threshold) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    while (hi > 1 && ratio(hi / 2) >= cfg.threshold) {
        hi /= 2;
    }
    row.min_nball = hi;
    row.ratio_at_min = ratio(hi);
    row.half = hi / 2;
    row.ratio_at_half = hi > 1 ? ratio(hi / 2) : 0;
    row.evaluations = memo.size();
    return row;
}

inline MinNballResult min_nball_scan(const MinNballConfig &cfg) {
    if (cfg.trials < 1 || !(cfg.threshold > 0 && cfg.threshold <= 1) || cfg.n_min < 1 || cfg.n_max < cfg.n_min) {
        throw std::invalid_argument("bad min_nball scan configuration");
    }
    MinNballResult out;
    std::vector<double> xs, ys;
    for (int n = cfg.n_min; n <= cfg.n_max; ++n) {
        auto row = min_nball_for(cfg, n);
        if (row.budget_exhausted) {
            out.partial = true;
        } else {
            xs.push_back(n);
            ys.push_back(static_cast<double>(row.min_nball));
        }
        out.rows.push_back(row);
    }
    if (xs.size() >= 2) {
        out.fit = fit_exponential(xs, ys);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Error of H^n on one qubit versus the number of gates.

struct ErrorVsGatesConfig {
    std::vector<int> n_h{1, 2, 4, 8, 16, 32};
    std::vector<std::uint64_t> n_ball{10000};
    int runs = 50;
    bool refresh = true;
    RefreshVariant variant = RefreshVariant::Rf1;
    std::uint64_t seed = 1;
    int workers = 1;
};

struct ErrorRow {
    int n_h = 0;
    /// Gates counted as in the log-log plot: refreshes included.
    int n_gates = 0;
    std::uint64_t n_ball = 0;
    double mean_error = 0;
    double sdev = 0;
    int valid = 0;
    int annihilated = 0;
};

struct ErrorVsGatesResult {
    std::vector<ErrorRow> rows;
    /// Per N_ball: log error against log n_gates (refresh) or n_h (none).
    std::vector<std::pair<std::uint64_t, LinearFit>> fits;
};

inline ErrorVsGatesResult error_vs_gates(const ErrorVsGatesConfig &cfg) {
    if (cfg.n_h.empty() || cfg.n_ball.empty() || cfg.runs < 1) {
        throw std::invalid_argument("bad error_vs_gates configuration");
    }
    const int max_h = *std::max_element(cfg.n_h.begin(), cfg.n_h.end());
    Circuit c(1);
    for (int k = 0; k < max_h; ++k) {
        c.h(0);
        if (cfg.refresh) {
            c.refresh(cfg.variant);
        }
    }
    const int stride = cfg.refresh ? 2 : 1;
    // Exact state after j Hadamards: |0> for even j, |+> for odd j.
    const double r = 1 / std::sqrt(2.0);
    auto exact = [&](int j) { return j % 2 ? std::vector<double>{r, r} : std::vector<double>{1, 0}; };

    ErrorVsGatesResult out;
    const RngStream base(cfg.seed);
    for (std::size_t bi = 0; bi < cfg.n_ball.size(); ++bi) {
        const std::uint64_t nb = cfg.n_ball[bi];
        // errors[run][checkpoint]; NaN marks an annihilated estimate.
        std::vector<std::vector<double>> errors(static_cast<std::size_t>(cfg.runs),
                                                std::vector<double>(cfg.n_h.size(), std::nan("")));
        parallel_for(errors.size(), cfg.workers, [&](std::size_t b, std::size_t e) {
            for (std::size_t run = b; run < e; ++run) {
                auto &err = errors[run];
                auto record = [&](int applied, const RealizationEnsemble &ens) {
                    for (std::size_t i = 0; i < cfg.n_h.size(); ++i) {
                        if (cfg.n_h[i] != applied) {
                            continue;
                        }
                        const auto est = extract_state(ens);
                        if (!est.is_zero()) {
                            const auto dense = est.dense();
                            err[i] = compare_up_to_scale(dense, exact(applied)).l2;
                        }
                    }
                };
                RunOptions ro;
                ro.n_ball = nb;
                ro.seed = base.derive(bi, run).seed();
                ro.trace = false;
                ro.observer = [&](std::size_t index, const RealizationEnsemble &ens) {
                    if ((index + 1) % static_cast<std::size_t>(stride) == 0) {
                        record(static_cast<int>((index + 1) / static_cast<std::size_t>(stride)), ens);
                    }
                };
                record(0, RealizationEnsemble::filled(1, nb, 0));
                try {
                    run_sampled(c, ro);
                } catch (const AnnihilationError &) {
                    // Remaining checkpoints stay NaN.
                }
            }
        });
        std::vector<double> fx, fy;
        for (std::size_t i = 0; i < cfg.n_h.size(); ++i) {
            ErrorRow row;
            row.n_h = cfg.n_h[i];
            row.n_gates = cfg.n_h[i] * stride;
            row.n_ball = nb;
            double s = 0, s2 = 0;
            for (const auto &err : errors) {
                if (std::isnan(err[i])) {
                    ++row.annihilated;
                } else {
                    ++row.valid;
                    s += err[i];
                    s2 += err[i] * err[i];
                }
            }
            if (row.valid > 0) {
                row.mean_error = s / row.valid;
                row.sdev = std::sqrt(std::max(0.0, s2 / row.valid - row.mean_error * row.mean_error));
            }
            if (row.n_h >= 1 && row.valid > 0 && row.mean_error > 0) {
                fx.push_back(cfg.refresh ? std::log(static_cast<double>(row.n_gates)) : row.n_h);
                fy.push_back(std::log(row.mean_error));
            }
            out.rows.push_back(row);
        }
        if (fx.size() >= 2) {
            out.fits.emplace_back(nb, fit_line(fx, fy));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// H^2 followed by a refresh: error of p~ against (1, 0).

struct H2LawConfig {
    std::vector<std::uint64_t> n_ball{50, 100, 200, 500, 1000, 2000, 5000};
    int runs = 100;
    RefreshVariant variant = RefreshVariant::Rf1;
    std::uint64_t seed = 1;
    int workers = 1;
};

struct H2LawRow {
    std::uint64_t n_ball = 0;
    double mean_error = 0;
    int annihilated = 0;
};

struct H2LawResult {
    std::vector<H2LawRow> rows;
    /// log error = intercept + slope log N.
    LinearFit fit;
    /// Prefactor with the slope pinned to -1/2 (geometric mean of err sqrt N).
    double prefactor = 0;
};

inline H2LawResult h2_law(const H2LawConfig &cfg) {
    Circuit c(1);
    c.h(0).h(0).refresh(cfg.variant);
    H2LawResult out;
    const RngStream base(cfg.seed);
    std::vector<double> lx, ly;
    for (std::size_t bi = 0; bi < cfg.n_ball.size(); ++bi) {
        const std::uint64_t nb = cfg.n_ball[bi];
        std::vector<double> err(static_cast<std::size_t>(cfg.runs), std::nan(""));
        parallel_for(err.size(), cfg.workers, [&](std::size_t b, std::size_t e) {
            for (std::size_t run = b; run < e; ++run) {
                RunOptions ro;
                ro.n_ball = nb;
                ro.seed = base.derive(bi, run).seed();
                ro.trace = false;
                try {
                    const auto res = run_sampled(c, ro);
                    err[run] = std::hypot(res.p_tilde.at(0) - 1, res.p_tilde.at(1));
                } catch (const AnnihilationError &) {
                }
            }
        });
        H2LawRow row{nb, 0, 0};
        int valid = 0;
        for (double x : err) {
            if (std::isnan(x)) {
                ++row.annihilated;
            } else {
                row.mean_error += x;
                ++valid;
            }
        }
        row.mean_error /= std::max(valid, 1);
        out.rows.push_back(row);
        if (row.mean_error > 0) {
            lx.push_back(std::log(static_cast<double>(nb)));
            ly.push_back(std::log(row.mean_error));
        }
    }
    out.fit = fit_line(lx, ly);
    double s = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        s += ly[i] + 0.5 * lx[i];
    }
    out.prefactor = std::exp(s / static_cast<double>(lx.size()));
    return out;
}

// ---------------------------------------------------------------------------
// Destructive interference measure.

struct InterferenceResult {
    double d = 0;
    /// The maximizing input state (1-norm normalized).
    std::vector<double> state;
    std::size_t evaluations = 0;
};

namespace detail {

/// Sum of |v| in ascending order, so equal multisets give equal sums.
inline double sorted_one_norm(std::vector<double> v) {
    for (auto &x : v) {
        x = std::abs(x);
    }
    std::sort(v.begin(), v.end());
    double s = 0;
    for (double x : v) {
        s += x;
    }
    return s;
}

}  // namespace detail

/// 1 - |psi'|_1 / |psi|_1 for one max-contrast encoded input.
inline double interference_loss(const StochasticGate &g, std::span<const double> psi) {
    const auto p = encode_state<double>(psi);
    const double before = detail::sorted_one_norm(extract_state(p).dense());
    const auto out = apply_exact(g, p);
    return 1 - detail::sorted_one_norm(extract_state(out).dense()) / before;
}

/// Maximizes the loss over random states (dense and two-sparse) with a
/// coordinate hill climb from each start.
inline InterferenceResult interference_measure(const StochasticGate &g, int n_grabits, int n_states = 64,
                                               std::uint64_t seed = 1, int climb_steps = 200) {
    const std::size_t dim = std::size_t{1} << n_grabits;
    const RngStream rng(seed);
    InterferenceResult best;
    best.d = -1;
    for (int s = 0; s < n_states; ++s) {
        const auto us = static_cast<std::uint64_t>(s);
        std::vector<double> psi(dim, 0.0);
        if (s % 2 == 0 || dim == 2) {
            for (std::size_t i = 0; i < dim; ++i) {
                psi[i] = rng.normal(us, 0, i);
            }
        } else {
            const std::size_t a = rng.bits(us, 1, 0) % dim;
            const std::size_t b = (a + 1 + rng.bits(us, 1, 1) % (dim - 1)) % dim;
            psi[a] = rng.normal(us, 1, 2);
            psi[b] = rng.normal(us, 1, 3);
        }
        if (detail::sorted_one_norm(psi) == 0) {
            psi[0] = 1;
        }
        double cur = interference_loss(g, psi);
        ++best.evaluations;
        double step = 0.5;
        for (int t = 0; t < climb_steps; ++t) {
            const auto ut = static_cast<std::uint64_t>(t);
            auto cand = psi;
            const std::size_t i = rng.bits(us, 2 + ut, 0) % dim;
            cand[i] += step * rng.normal(us, 2 + ut, 1) * (std::abs(cand[i]) + 0.1);
            if (detail::sorted_one_norm(cand) == 0) {
                continue;
            }
            const double v = interference_loss(g, cand);
            ++best.evaluations;
            if (v > cur) {
                cur = v;
                psi = std::move(cand);
            } else if (t % 20 == 19) {
                step *= 0.7;
            }
        }
        if (cur > best.d) {
            best.d = cur;
            const double norm = detail::sorted_one_norm(psi);
            best.state = psi;
            for (auto &x : best.state) {
                x /= norm;
            }
        }
    }
    return best;
}

/// Measure for a named gate on its minimal register (PHASE/CPHASE include
/// the ReIm grabit as their last target).
inline InterferenceResult interference_measure(GateKind kind, double angle = 0, int n_states = 64,
                                               std::uint64_t seed = 1) {
    switch (kind) {
        case GateKind::X:
        case GateKind::Z:
        case GateKind::H:
            return interference_measure(build_gate(kind, {0}), 1, n_states, seed);
        case GateKind::CNOT:
        case GateKind::SWAP:
            return interference_measure(build_gate(kind, {0, 1}), 2, n_states, seed);
        case GateKind::Phase:
            return interference_measure(build_gate(kind, {0, 1}, angle), 2, n_states, seed);
        case GateKind::CPhase:
            return interference_measure(build_gate(kind, {0, 1, 2}, angle), 3, n_states, seed);
        case GateKind::Oracle:
            break;
    }
    throw std::invalid_argument("interference measure needs a concrete gate");
}

/// Closed form 1 - (1 + q^2) / (1 + q)^2 with q = |tan phi|.
inline double phase_interference_closed_form(double phi) {
    const double q = std::abs(std::tan(phi));
    return 1 - (1 + q * q) / ((1 + q) * (1 + q));
}

// ---------------------------------------------------------------------------
// Cramer-Rao diagnostic.

struct CrbEntry {
    std::uint64_t blv = 0;
    /// Mass on even / odd gradient parity at this blv.
    double p_even = 0;
    double p_odd = 0;
    /// Lower bound on sdv(psi-hat_i); empty when one parity carries no mass.
    std::optional<double> bound;
};

inline std::vector<CrbEntry> crb_diagnostic(const ProbabilityVector<double> &p, std::uint64_t n_ball) {
    if (n_ball == 0) {
        throw std::invalid_argument("n_ball must be >= 1");
    }
    std::map<std::uint64_t, CrbEntry> by_blv;
    for (const auto &[key, w] : p.entries()) {
        if (w == 0) {
            continue;
        }
        auto &e = by_blv[blv_of(key)];
        e.blv = blv_of(key);
        (gradient_parity(key) ? e.p_odd : e.p_even) += w;
    }
    std::vector<CrbEntry> out;
    for (auto &[blv, e] : by_blv) {
        if (e.p_even > 0 && e.p_odd > 0) {
            e.bound = 2 / std::sqrt(static_cast<double>(n_ball) * (1 / e.p_even + 1 / e.p_odd));
        }
        out.push_back(e);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Bernstein-Vazirani error probability.

struct BvScanConfig {
    /// Total grabits (inputs plus ancilla).
    std::vector<int> n_bits{2, 3};
    std::vector<std::uint64_t> n_ball{1, 10, 100, 1000, 10000};
    int runs = 100;
    RefreshPolicy policy{RefreshPolicy::Kind::None, 1};
    RefreshVariant variant = RefreshVariant::Rf1;
    std::uint64_t seed = 1;
    int workers = 1;
};

struct BvRow {
    int n_bit = 0;
    std::uint64_t n_ball = 0;
    int runs = 0;
    int errors = 0;
    double error_rate = 0;
};

/// A run errs when argmax |psi-hat| differs from the expected peak 2a + 1.
inline std::vector<BvRow> bv_error_scan(const BvScanConfig &cfg) {
    std::vector<BvRow> rows;
    const RngStream base(cfg.seed);
    for (int n : cfg.n_bits) {
        if (n < 2) {
            throw std::invalid_argument("BV needs at least 2 grabits");
        }
        for (std::size_t bi = 0; bi < cfg.n_ball.size(); ++bi) {
            std::vector<char> err(static_cast<std::size_t>(cfg.runs), 0);
            parallel_for(err.size(), cfg.workers, [&](std::size_t b, std::size_t e) {
                for (std::size_t run = b; run < e; ++run) {
                    const RngStream r = base.derive(static_cast<std::uint64_t>(n) * 1000003 + bi, run);
                    const std::uint64_t a = r.bits(0, 0, 0) % (std::uint64_t{1} << (n - 1));
                    RunOptions ro;
                    ro.n_ball = cfg.n_ball[bi];
                    ro.seed = r.seed();
                    ro.trace = false;
                    try {
                        const auto res = run_sampled(insert_refresh(build_bv(n - 1, a), cfg.policy, cfg.variant), ro);
                        err[run] = res.psi_hat.is_zero() || res.psi_hat.argmax_abs() != 2 * a + 1;
                    } catch (const AnnihilationError &) {
                        err[run] = 1;
                    }
                }
            });
            BvRow row{n, cfg.n_ball[bi], cfg.runs, static_cast<int>(std::count(err.begin(), err.end(), 1)), 0};
            row.error_rate = static_cast<double>(row.errors) / row.runs;
            rows.push_back(row);
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Effective ball count along a circuit.

/// Mean effective_ball_count after every instruction over `runs` seeds.
inline std::vector<double> effective_decay(const Circuit &c, std::uint64_t n_ball, int runs, std::uint64_t seed = 1) {
    std::vector<double> mean;
    const RngStream base(seed);
    for (int r = 0; r < runs; ++r) {
        RunOptions ro;
        ro.n_ball = n_ball;
        ro.seed = base.derive(static_cast<std::uint64_t>(r)).seed();
        const auto res = run_sampled(c, ro);
        mean.resize(res.effective_trace.size(), 0.0);
        for (std::size_t i = 0; i < mean.size(); ++i) {
            mean[i] += static_cast<double>(res.effective_trace[i]) / runs;
        }
    }
    return mean;
}

// ---------------------------------------------------------------------------
// Config-driven dispatch.

struct ScanOutput {
    std::string csv;
    nlohmann::json summary;
};

inline MinNballConfig min_nball_config(const nlohmann::json &j) {
    MinNballConfig c;
    c.family = j.value("family", c.family);
    c.n_min = j.value("n_min", c.n_min);
    c.n_max = j.value("n_max", c.n_max);
    c.trials = j.value("trials", c.trials);
    c.threshold = j.value("threshold", c.threshold);
    c.policy = detail::policy_from_json(j, "policy", c.policy);
    c.variant = detail::variant_from_json(j, c.variant);
    c.k_upper_half = j.value("k_upper_half", c.k_upper_half);
    c.readout = j.value("readout", c.readout);
    c.seed = j.value("seed", c.seed);
    c.n_start = j.value("n_start", c.n_start);
    c.n_budget = j.value("n_budget", c.n_budget);
    c.rel_precision = j.value("rel_precision", c.rel_precision);
    return c;
}

inline ErrorVsGatesConfig error_vs_gates_config(const nlohmann::json &j) {
    ErrorVsGatesConfig c;
    c.n_h = j.value("n_h", c.n_h);
    c.n_ball = j.value("n_ball", c.n_ball);
    c.runs = j.value("runs", c.runs);
    c.refresh = j.value("refresh", c.refresh);
    c.variant = detail::variant_from_json(j, c.variant);
    c.seed = j.value("seed", c.seed);
    return c;
}

inline H2LawConfig h2_law_config(const nlohmann::json &j) {
    H2LawConfig c;
    c.n_ball = j.value("n_ball", c.n_ball);
    c.runs = j.value("runs", c.runs);
    c.variant = detail::variant_from_json(j, c.variant);
    c.seed = j.value("seed", c.seed);
    return c;
}

inline BvScanConfig bv_scan_config(const nlohmann::json &j) {
    BvScanConfig c;
    c.n_bits = j.value("n_bits", c.n_bits);
    c.n_ball = j.value("n_ball", c.n_ball);
    c.runs = j.value("runs", c.runs);
    c.policy = detail::policy_from_json(j, "policy", c.policy);
    c.variant = detail::variant_from_json(j, c.variant);
    c.seed = j.value("seed", c.seed);
    return c;
}

/// Runs the scan named by cfg["kind"]: min_nball, error_vs_gates, h2_law,
/// bv_error, interference or crb. `workers` overrides any config value.
inline ScanOutput run_scan(const nlohmann::json &cfg, int workers = 1) {
    const std::string kind = cfg.at("kind").get<std::string>();
    ScanOutput out;
    std::ostringstream csv;
    out.summary["kind"] = kind;
    if (kind == "min_nball") {
        auto c = min_nball_config(cfg);
        c.workers = workers;
        const auto r = min_nball_scan(c);
        csv << "n_bit,min_nball,ratio_at_min,half,ratio_at_half,budget_exhausted\n";
        for (const auto &row : r.rows) {
            csv << row.n_bit << ',' << row.min_nball << ',' << detail::fmt(row.ratio_at_min) << ',' << row.half << ','
                << detail::fmt(row.ratio_at_half) << ',' << (row.budget_exhausted ? 1 : 0) << '\n';
        }
        out.summary["partial"] = r.partial;
        out.summary["fit"] = r.fit ? to_json(*r.fit) : nlohmann::json();
    } else if (kind == "error_vs_gates") {
        auto c = error_vs_gates_config(cfg);
        c.workers = workers;
        const auto r = error_vs_gates(c);
        csv << "n_h,n_gates,n_ball,mean_error,sdev,valid,annihilated\n";
        for (const auto &row : r.rows) {
            csv << row.n_h << ',' << row.n_gates << ',' << row.n_ball << ',' << detail::fmt(row.mean_error) << ','
                << detail::fmt(row.sdev) << ',' << row.valid << ',' << row.annihilated << '\n';
        }
        auto &fits = out.summary["fits"] = nlohmann::json::array();
        for (const auto &[nb, f] : r.fits) {
            auto j = to_json(f);
            j["n_ball"] = nb;
            fits.push_back(j);
        }
        out.summary["fit_axis"] = c.refresh ? "log_n_gates" : "n_h";
    } else if (kind == "h2_law") {
        auto c = h2_law_config(cfg);
        c.workers = workers;
        const auto r = h2_law(c);
        csv << "n_ball,mean_error,annihilated\n";
        for (const auto &row : r.rows) {
            csv << row.n_ball << ',' << detail::fmt(row.mean_error) << ',' << row.annihilated << '\n';
        }
        out.summary["fit"] = to_json(r.fit);
        out.summary["prefactor"] = r.prefactor;
    } else if (kind == "bv_error") {
        auto c = bv_scan_config(cfg);
        c.workers = workers;
        csv << "n_bit,n_ball,runs,errors,error_rate\n";
        for (const auto &row : bv_error_scan(c)) {
            csv << row.n_bit << ',' << row.n_ball << ',' << row.runs << ',' << row.errors << ','
                << detail::fmt(row.error_rate) << '\n';
        }
    } else if (kind == "interference") {
        csv << "gate,angle,d\n";
        const int n_states = cfg.value("n_states", 64);
        const std::uint64_t seed = cfg.value("seed", std::uint64_t{1});
        for (const auto &g : cfg.at("gates")) {
            const std::string name = g.at("gate").get<std::string>();
            const double angle = g.value("angle", 0.0);
            std::optional<GateKind> kind_g;
            for (GateKind k : {GateKind::X, GateKind::Z, GateKind::H, GateKind::CNOT, GateKind::SWAP,
                               GateKind::Phase, GateKind::CPhase}) {
                if (name == gate_name(k)) {
                    kind_g = k;
                }
            }
            if (!kind_g) {
                throw std::invalid_argument("unknown gate '" + name + "' in interference config");
            }
            const auto r = interference_measure(*kind_g, angle, n_states, seed);
            csv << name << ',' << detail::fmt(angle) << ',' << detail::fmt(r.d) << '\n';
        }
    } else if (kind == "crb") {
        const auto probs = cfg.at("p").get<std::vector<double>>();
        const std::uint64_t nb = cfg.at("n_ball").get<std::uint64_t>();
        csv << "blv,p_even,p_odd,bound\n";
        for (const auto &e : crb_diagnostic(ProbabilityVector<double>::from_dense(probs), nb)) {
            csv << e.blv << ',' << detail::fmt(e.p_even) << ',' << detail::fmt(e.p_odd) << ','
                << (e.bound ? detail::fmt(*e.bound) : std::string("excluded")) << '\n';
        }
    } else {
        throw std::invalid_argument("unknown scan kind '" + kind + "'");
    }
    out.csv = csv.str();
    return out;
}

}  // namespace grabit
