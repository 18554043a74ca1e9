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
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "grabit/engine.hpp"
#include "grabit/exact.hpp"
#include "grabit/parallel.hpp"
#include "grabit/rng.hpp"
#include "json.hpp"

namespace grabit {

// ---------------------------------------------------------------------------
// Prices.

/// Daily closing prices, most recent first: prices[a][0] is the latest
/// price of asset a. With this order r_k = (p_k - p_{k+1}) / p_k.
struct PriceTable {
    std::vector<std::string> assets;
    std::vector<std::vector<double>> prices;
};

/// CSV with header `asset,day,price`. Day 0 is the most recent; every asset
/// must list days 0, 1, 2, ... in that order.
inline PriceTable read_prices_csv(std::istream &is) {
    std::string line;
    if (!std::getline(is, line)) {
        throw std::invalid_argument("price csv: empty input");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != "asset,day,price") {
        throw std::invalid_argument("price csv: expected header 'asset,day,price'");
    }
    PriceTable t;
    std::map<std::string, std::size_t> index;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::stringstream ss(line);
        std::string asset, day_s, price_s;
        if (!std::getline(ss, asset, ',') || !std::getline(ss, day_s, ',') || !std::getline(ss, price_s) ||
            asset.empty()) {
            throw std::invalid_argument("price csv line " + std::to_string(lineno) + ": expected asset,day,price");
        }
        std::size_t used = 0;
        long long day = 0;
        double price = 0;
        try {
            day = std::stoll(day_s, &used);
            if (used != day_s.size()) {
                throw std::invalid_argument("day");
            }
            price = std::stod(price_s, &used);
            if (used != price_s.size()) {
                throw std::invalid_argument("price");
            }
        } catch (const std::exception &) {
            throw std::invalid_argument("price csv line " + std::to_string(lineno) + ": bad number");
        }
        if (!(price > 0) || !std::isfinite(price)) {
            throw std::invalid_argument("price csv line " + std::to_string(lineno) + ": price must be positive");
        }
        auto [it, fresh] = index.emplace(asset, t.assets.size());
        if (fresh) {
            t.assets.push_back(asset);
            t.prices.emplace_back();
        }
        auto &series = t.prices[it->second];
        if (day != static_cast<long long>(series.size())) {
            throw std::invalid_argument("price csv line " + std::to_string(lineno) + ": asset " + asset +
                                        " expects day " + std::to_string(series.size()) +
                                        " (days run most-recent-first from 0)");
        }
        series.push_back(price);
    }
    return t;
}

inline void write_prices_csv(std::ostream &os, const PriceTable &t) {
    os << "asset,day,price\n";
    char buf[40];
    for (std::size_t a = 0; a < t.assets.size(); ++a) {
        for (std::size_t d = 0; d < t.prices[a].size(); ++d) {
            std::snprintf(buf, sizeof buf, "%.17g", t.prices[a][d]);
            os << t.assets[a] << ',' << d << ',' << buf << '\n';
        }
    }
}

/// Seeded geometric random walk, generated oldest day first and stored most
/// recent first.
inline PriceTable synthetic_prices(int n_assets, int days, std::uint64_t seed, double drift = 3e-4,
                                   double volatility = 0.015) {
    if (n_assets < 1 || days < 2) {
        throw std::invalid_argument("synthetic prices need >= 1 asset and >= 2 days");
    }
    const RngStream rng(seed);
    PriceTable t;
    for (int a = 0; a < n_assets; ++a) {
        t.assets.push_back("S" + std::to_string(a));
        const auto ua = static_cast<std::uint64_t>(a);
        // Per-asset drift and volatility spread so the instance is not symmetric.
        const double mu = drift * (0.5 + rng.uniform(ua, 0, 0));
        const double vol = volatility * (0.5 + rng.uniform(ua, 0, 1));
        std::vector<double> chrono(static_cast<std::size_t>(days));
        double p = 50 + 100 * rng.uniform(ua, 0, 2);
        for (int d = 0; d < days; ++d) {
            chrono[static_cast<std::size_t>(d)] = p;
            p *= std::exp(mu + vol * rng.normal(ua, 1, static_cast<std::uint64_t>(d)));
        }
        t.prices.emplace_back(chrono.rbegin(), chrono.rend());
    }
    return t;
}

struct PortfolioData {
    std::vector<std::string> assets;
    int days = 0;
    /// returns[i][k] = (p_k - p_{k+1}) / p_k.
    std::vector<std::vector<double>> returns;
    /// Annualized growth (prod (1 + r_k))^{252 / (M - 1)}.
    std::vector<double> mu;
    /// Annualized covariance 252 / (M - 1) sum_k (r_k^i - rbar^i)(r_k^j - rbar^j).
    std::vector<std::vector<double>> sigma;
};

inline constexpr double kTradingDays = 252;

inline PortfolioData portfolio_statistics(const PriceTable &t) {
    if (t.prices.empty()) {
        throw std::invalid_argument("no assets");
    }
    const std::size_t m = t.prices[0].size();
    if (m < 2) {
        throw std::invalid_argument("need at least 2 prices per asset");
    }
    PortfolioData d;
    d.assets = t.assets;
    d.days = static_cast<int>(m);
    const std::size_t n = t.prices.size();
    const double scale = kTradingDays / static_cast<double>(m - 1);
    std::vector<double> mean(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto &p = t.prices[i];
        if (p.size() != m) {
            throw std::invalid_argument("price series length mismatch for asset " + t.assets[i]);
        }
        std::vector<double> r(m - 1);
        double log_growth = 0;
        for (std::size_t k = 0; k + 1 < m; ++k) {
            if (!(p[k] > 0) || !(p[k + 1] > 0)) {
                throw std::invalid_argument("nonpositive price for asset " + t.assets[i]);
            }
            r[k] = (p[k] - p[k + 1]) / p[k];
            log_growth += std::log1p(r[k]);
            mean[i] += r[k];
        }
        mean[i] /= static_cast<double>(m - 1);
        d.mu.push_back(std::exp(scale * log_growth));
        d.returns.push_back(std::move(r));
    }
    d.sigma.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0;
            for (std::size_t k = 0; k + 1 < m; ++k) {
                s += (d.returns[i][k] - mean[i]) * (d.returns[j][k] - mean[j]);
            }
            d.sigma[i][j] = d.sigma[j][i] = scale * s;
        }
    }
    return d;
}

// ---------------------------------------------------------------------------
// Cost Hamiltonian.

/// H = sum_{i>j} J_ij Z_i Z_j + sum_i h_i Z_i + offset, with x_i = (1 - Z_i)/2,
/// so the energy of |x> is the classical cost of selection x.
template <class T = double>
struct CostHamiltonian {
    int n = 0;
    /// (i, j, J_ij) with i > j.
    std::vector<std::tuple<int, int, T>> couplings;
    std::vector<T> fields;
    T offset = 0;

    /// Energy of basis state x (qubit 0 = most significant bit).
    T energy(std::uint64_t x) const {
        auto z = [&](int q) { return ((x >> (n - 1 - q)) & 1) ? -1 : 1; };
        T e = offset;
        for (const auto &[i, j, J] : couplings) {
            e += J * (z(i) * z(j));
        }
        for (int i = 0; i < n; ++i) {
            e += fields[static_cast<std::size_t>(i)] * z(i);
        }
        return e;
    }
};

/// Classical objective q sum_ij x_i x_j sigma_ij - (1-q) sum_i x_i mu_i
/// + lambda (sum_i x_i - B)^2, the penalty present only with a budget.
/// The default lambda is max|J| + max|h| of the unpenalized Hamiltonian.
template <class T = double>
CostHamiltonian<T> build_cost_hamiltonian(const std::vector<T> &mu, const std::vector<std::vector<T>> &sigma, T q,
                                          std::optional<int> budget = std::nullopt,
                                          std::optional<T> lambda = std::nullopt) {
    const int n = static_cast<int>(mu.size());
    if (n < 1 || sigma.size() != mu.size()) {
        throw std::invalid_argument("mu and sigma sizes disagree");
    }
    if (q < 0 || q > 1) {
        throw std::invalid_argument("q weight must lie in [0,1]");
    }
    // f = sum_i a_i x_i + sum_{i>j} b_ij x_i x_j + c0, using x_i^2 = x_i.
    auto assemble = [&](T lam, T bud) {
        std::vector<T> a(static_cast<std::size_t>(n));
        std::vector<std::vector<T>> b(static_cast<std::size_t>(n), std::vector<T>(static_cast<std::size_t>(n), T(0)));
        for (int i = 0; i < n; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            a[ui] = q * sigma[ui][ui] - (1 - q) * mu[ui] + lam * (1 - 2 * bud);
            for (int j = 0; j < i; ++j) {
                const auto uj = static_cast<std::size_t>(j);
                b[ui][uj] = q * (sigma[ui][uj] + sigma[uj][ui]) + 2 * lam;
            }
        }
        CostHamiltonian<T> h;
        h.n = n;
        h.fields.assign(static_cast<std::size_t>(n), T(0));
        h.offset = lam * bud * bud;
        for (int i = 0; i < n; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            h.fields[ui] -= a[ui] / 2;
            h.offset += a[ui] / 2;
            for (int j = 0; j < i; ++j) {
                const auto uj = static_cast<std::size_t>(j);
                const T quarter = b[ui][uj] / 4;
                h.couplings.emplace_back(i, j, quarter);
                h.fields[ui] -= quarter;
                h.fields[uj] -= quarter;
                h.offset += quarter;
            }
        }
        return h;
    };
    if (!budget) {
        return assemble(T(0), T(0));
    }
    T lam;
    if (lambda) {
        lam = *lambda;
    } else {
        const auto base = assemble(T(0), T(0));
        T mj = 0, mh = 0;
        for (const auto &c : base.couplings) {
            mj = std::max<T>(mj, scalar_abs(std::get<2>(c)));
        }
        for (const auto &f : base.fields) {
            mh = std::max<T>(mh, scalar_abs(f));
        }
        lam = mj + mh;
    }
    return assemble(lam, T(*budget));
}

inline CostHamiltonian<double> build_cost_hamiltonian(const PortfolioData &d, double q,
                                                      std::optional<int> budget = std::nullopt,
                                                      std::optional<double> lambda = std::nullopt) {
    return build_cost_hamiltonian<double>(d.mu, d.sigma, q, budget, lambda);
}

template <class T>
struct ClassicalMinimum {
    std::uint64_t bits = 0;
    T value = 0;
    /// All minimizers, ascending.
    std::vector<std::uint64_t> minimizers;
};

/// Exhaustive search over all 2^n selections.
template <class T>
ClassicalMinimum<T> classical_minimum(const CostHamiltonian<T> &h) {
    if (h.n < 1 || h.n > 24) {
        throw LimitError("classical_minimum supports 1..24 assets");
    }
    ClassicalMinimum<T> best;
    const std::uint64_t dim = std::uint64_t{1} << h.n;
    for (std::uint64_t x = 0; x < dim; ++x) {
        const T e = h.energy(x);
        if (x == 0 || e < best.value) {
            best.value = e;
            best.minimizers.clear();
        }
        if (e == best.value) {
            best.minimizers.push_back(x);
        }
    }
    best.bits = best.minimizers.front();
    return best;
}

template <class T>
nlohmann::json to_json(const CostHamiltonian<T> &h) {
    nlohmann::json j;
    j["n"] = h.n;
    auto &c = j["couplings"] = nlohmann::json::array();
    for (const auto &[a, b, v] : h.couplings) {
        c.push_back({a, b, to_double(v)});
    }
    auto &f = j["fields"] = nlohmann::json::array();
    for (const auto &v : h.fields) {
        f.push_back(to_double(v));
    }
    j["offset"] = to_double(h.offset);
    return j;
}

// ---------------------------------------------------------------------------
// QAOA.

/// |+>^n, then per layer exp(-i gamma H_C) as CNOT-PHASE-CNOT ladders plus
/// single-qubit phases, and the mixer exp(-i beta H_B) with H_B = -sum X
/// as H PHASE(-2 beta) H. Global phases are dropped.
inline Circuit build_qaoa(const CostHamiltonian<double> &h, const std::vector<double> &gammas,
                          const std::vector<double> &betas) {
    if (gammas.empty() || gammas.size() != betas.size()) {
        throw std::invalid_argument("QAOA needs p >= 1 and matching gamma/beta counts");
    }
    Circuit c(h.n);
    for (int q = 0; q < h.n; ++q) {
        c.h(q);
    }
    for (std::size_t l = 0; l < gammas.size(); ++l) {
        const double g = gammas[l];
        for (const auto &[i, j, J] : h.couplings) {
            if (J != 0) {
                c.cnot(j, i).phase(2 * g * J, i).cnot(j, i);
            }
        }
        for (int q = 0; q < h.n; ++q) {
            if (const double f = h.fields[static_cast<std::size_t>(q)]; f != 0) {
                c.phase(2 * g * f, q);
            }
        }
        for (int q = 0; q < h.n; ++q) {
            c.h(q).phase(-2 * betas[l], q).h(q);
        }
    }
    return c;
}

enum class QaoaEngine {
    Exact,
    Sampled,
};

struct QaoaOptions {
    int p = 1;
    QaoaEngine engine = QaoaEngine::Exact;
    std::uint64_t n_ball = 100000;
    std::uint64_t seed = 0;
    RefreshVariant variant = RefreshVariant::Rf1;
    /// Grid points per axis for the initial (gamma, beta) scan.
    int grid = 16;
    int max_rounds = 40;
    double min_step = 1e-4;
    int workers = 1;
};

struct QaoaPoint {
    std::vector<double> gammas;
    std::vector<double> betas;
    /// Expected energy: Born-2 for the exact engine, Born-1 for sampled.
    double cost = 0;
    /// Ground-state probability |Psi_gs|^2 (sampled: from psi-hat squared).
    double p_gs = 0;
    /// Sampled engine only: Born-1 weight on the ground states.
    double p_gs_born1 = 0;
};

/// Evaluates one parameter point. `seed` keys the sampled run.
inline QaoaPoint evaluate_qaoa(const CostHamiltonian<double> &h, const std::vector<double> &gammas,
                               const std::vector<double> &betas, const QaoaOptions &opt, std::uint64_t seed,
                               const std::vector<std::uint64_t> &ground_states) {
    QaoaPoint pt{gammas, betas, 0, 0, 0};
    const Circuit c = build_qaoa(h, gammas, betas);
    auto is_ground = [&](std::uint64_t x) {
        return std::binary_search(ground_states.begin(), ground_states.end(), x);
    };
    if (opt.engine == QaoaEngine::Exact) {
        const auto probs = born2(run_unitary(c).amplitudes);
        for (std::uint64_t x = 0; x < probs.size(); ++x) {
            pt.cost += probs[x] * h.energy(x);
            if (is_ground(x)) {
                pt.p_gs += probs[x];
            }
        }
        pt.p_gs_born1 = pt.p_gs;
        return pt;
    }
    RunOptions ro;
    ro.n_ball = opt.n_ball;
    ro.seed = seed;
    ro.trace = false;
    const auto res = run_sampled(insert_refresh(c, parse_policy("after_interference"), opt.variant), ro);
    for (const auto &[x, p] : res.logical_p) {
        pt.cost += p * h.energy(x);
        if (is_ground(x)) {
            pt.p_gs_born1 += p;
        }
    }
    for (const auto &[x, p] : born2_logical(res.psi_hat, res.has_reim)) {
        if (is_ground(x)) {
            pt.p_gs += p;
        }
    }
    return pt;
}

struct QaoaResult {
    QaoaPoint best;
    std::vector<QaoaPoint> trace;
    std::uint64_t ground_state = 0;
    double ground_energy = 0;
    std::uint64_t evaluations = 0;
    /// Total realizations consumed (sampled engine).
    std::uint64_t shots = 0;
};

/// Deterministic search: a (gamma, beta) grid with all layers sharing the
/// same angles, then coordinate search with step halving.
inline QaoaResult optimize_qaoa(const CostHamiltonian<double> &h, const QaoaOptions &opt) {
    if (opt.p < 1 || opt.grid < 2) {
        throw std::invalid_argument("QAOA needs p >= 1 and grid >= 2");
    }
    const auto cm = classical_minimum(h);
    QaoaResult out;
    out.ground_state = cm.bits;
    out.ground_energy = cm.value;
    const RngStream seeds(opt.seed);
    auto eval_seed = [&](std::uint64_t index) { return seeds.derive(index).seed(); };

    double scale = 0;
    for (const auto &c : h.couplings) {
        scale = std::max(scale, std::abs(std::get<2>(c)));
    }
    for (double f : h.fields) {
        scale = std::max(scale, std::abs(f));
    }
    const double gamma_max = scale > 0 ? std::numbers::pi / scale : std::numbers::pi;
    const double beta_max = std::numbers::pi / 2;
    const auto p = static_cast<std::size_t>(opt.p);
    const auto g = static_cast<std::size_t>(opt.grid);

    std::vector<QaoaPoint> grid(g * g);
    parallel_for(grid.size(), opt.workers, [&](std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k) {
            const double ga = -gamma_max + 2 * gamma_max * static_cast<double>(k / g) / static_cast<double>(g - 1);
            const double be = -beta_max + 2 * beta_max * static_cast<double>(k % g) / static_cast<double>(g - 1);
            grid[k] = evaluate_qaoa(h, std::vector<double>(p, ga), std::vector<double>(p, be), opt, eval_seed(k),
                                    cm.minimizers);
        }
    });
    out.evaluations = grid.size();
    std::size_t arg = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        out.trace.push_back(grid[k]);
        if (grid[k].cost < grid[arg].cost) {
            arg = k;
        }
    }
    QaoaPoint best = grid[arg];
    double step_g = 2 * gamma_max / static_cast<double>(g - 1);
    double step_b = 2 * beta_max / static_cast<double>(g - 1);
    for (int round = 0; round < opt.max_rounds && std::max(step_g / gamma_max, step_b / beta_max) > opt.min_step;
         ++round) {
        bool improved = false;
        for (std::size_t coord = 0; coord < 2 * p; ++coord) {
            for (double dir : {1.0, -1.0}) {
                QaoaPoint cand = best;
                if (coord < p) {
                    cand.gammas[coord] += dir * step_g;
                } else {
                    cand.betas[coord - p] += dir * step_b;
                }
                cand = evaluate_qaoa(h, cand.gammas, cand.betas, opt, eval_seed(out.evaluations), cm.minimizers);
                ++out.evaluations;
                out.trace.push_back(cand);
                if (cand.cost < best.cost) {
                    best = cand;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) {
            step_g /= 2;
            step_b /= 2;
        }
    }
    out.best = best;
    if (opt.engine == QaoaEngine::Sampled) {
        out.shots = out.evaluations * opt.n_ball;
    }
    return out;
}

inline nlohmann::json to_json(const QaoaPoint &pt) {
    return {{"gammas", pt.gammas}, {"betas", pt.betas}, {"cost", pt.cost}, {"p_gs", pt.p_gs},
            {"p_gs_born1", pt.p_gs_born1}};
}

inline nlohmann::json to_json(const QaoaResult &r, int n_qubits) {
    nlohmann::json j;
    j["best"] = to_json(r.best);
    j["ground_state"] = r.ground_state;
    j["ground_state_binary"] = to_binary(r.ground_state, n_qubits);
    j["ground_energy"] = r.ground_energy;
    j["evaluations"] = r.evaluations;
    j["shots"] = r.shots;
    auto &params = j["parameter_trace"] = nlohmann::json::array();
    auto &costs = j["cost_trace"] = nlohmann::json::array();
    for (const auto &pt : r.trace) {
        params.push_back({{"gammas", pt.gammas}, {"betas", pt.betas}});
        costs.push_back(pt.cost);
    }
    return j;
}

}  // namespace grabit
