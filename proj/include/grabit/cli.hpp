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


// Command-line front end. Every subcommand writes JSON to the output stream
// and a short human summary to the error stream. Exit codes: 0 success,
// 1 usage error, 2 runtime failure.

#pragma once

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "grabit/algorithms.hpp"
#include "grabit/circuit.hpp"
#include "grabit/engine.hpp"
#include "grabit/exact.hpp"
#include "grabit/experiments.hpp"
#include "grabit/portfolio.hpp"
#include "grabit/refresh.hpp"
#include "json.hpp"

namespace grabit::cli {

/// A flag value that parsed but makes no sense.
class UsageError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {

inline std::uint64_t parse_u64(const std::string &s, const char *what) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
        throw UsageError(std::string(what) + ": expected a non-negative integer, got '" + s + "'");
    }
    return v;
}

struct Seed {
    std::uint64_t value = 0;
    std::string source = "default";
};

inline Seed resolve_seed(const CLI::Option *flag, const std::string &text) {
    if (flag != nullptr && flag->count() > 0) {
        return {parse_u64(text, "--seed"), "flag"};
    }
    if (const char *env = std::getenv("GRABIT_SEED"); env != nullptr && *env != '\0') {
        return {parse_u64(env, "GRABIT_SEED"), "GRABIT_SEED"};
    }
    return {0, "default"};
}

struct EngineFlags {
    std::uint64_t n_ball = 10000;
    std::string seed_text;
    CLI::Option *seed_opt = nullptr;
    int workers = 1;
    std::string refresh = "none";
    std::string policy = "after_interference";
    std::string roar = "deterministic";
    std::string csv;
    std::string snapshot;
    bool dry_run = false;
};

inline void add_engine_flags(CLI::App *app, EngineFlags &f) {
    app->add_option("--nball", f.n_ball, "initial realization count")->check(CLI::PositiveNumber);
    f.seed_opt = app->add_option("--seed", f.seed_text, "RNG seed (falls back to GRABIT_SEED, then 0)");
    app->add_option("--workers", f.workers, "partition count; results do not depend on it")
        ->check(CLI::Range(1, 1024));
    app->add_option("--refresh", f.refresh, "rf1|rf2|rf3|none");
    app->add_option("--policy", f.policy, "none|after_interference|end_only|every:K");
    app->add_option("--roar", f.roar, "deterministic|montecarlo");
    app->add_option("--csv", f.csv, "write the state estimate as CSV");
    app->add_option("--snapshot", f.snapshot, "write the final ensemble in GRB1 format");
    app->add_flag("--dry-run", f.dry_run, "print the resolved plan and exit");
}

struct ResolvedEngine {
    RunOptions options;
    std::optional<RefreshVariant> variant;
    RefreshPolicy policy;
    Seed seed;
};

inline ResolvedEngine resolve_engine(const EngineFlags &f) {
    ResolvedEngine r;
    r.seed = resolve_seed(f.seed_opt, f.seed_text);
    r.options.n_ball = f.n_ball;
    r.options.seed = r.seed.value;
    r.options.workers = f.workers;
    try {
        if (f.refresh != "none") {
            r.variant = parse_variant(f.refresh);
        }
        r.policy = parse_policy(f.policy);
    } catch (const std::invalid_argument &e) {
        throw UsageError(e.what());
    }
    if (f.roar == "deterministic") {
        r.options.roar = RoarMode::Deterministic;
    } else if (f.roar == "montecarlo") {
        r.options.roar = RoarMode::MonteCarlo;
    } else {
        throw UsageError("--roar must be deterministic or montecarlo");
    }
    r.options.keep_ensemble = !f.snapshot.empty();
    return r;
}

inline Circuit apply_refresh(const Circuit &c, const ResolvedEngine &r) {
    return r.variant ? insert_refresh(c, r.policy, *r.variant) : c;
}

inline nlohmann::json circuit_summary(const Circuit &c) {
    std::size_t refreshes = c.instructions().size() - c.gate_count();
    return {{"n_logical", c.n_logical()},
            {"n_grabits", c.n_grabits()},
            {"has_reim", c.has_reim()},
            {"gates", c.gate_count()},
            {"refreshes", refreshes}};
}

inline nlohmann::json engine_plan(const ResolvedEngine &r) {
    return {{"n_ball", r.options.n_ball},
            {"seed", r.seed.value},
            {"seed_source", r.seed.source},
            {"workers", r.options.workers},
            {"refresh", r.variant ? std::string(variant_name(*r.variant)) : std::string("none")},
            {"policy", policy_name(r.policy)},
            {"roar", r.options.roar == RoarMode::Deterministic ? "deterministic" : "montecarlo"}};
}

inline void write_file(const std::string &path, const std::string &bytes, bool binary = false) {
    std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
    if (!os) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    os << bytes;
    if (!os) {
        throw std::runtime_error("write to '" + path + "' failed");
    }
}

inline std::string read_file(const std::string &path) {
    std::ifstream is(path);
    if (!is) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

/// Sampled run plus exports; returns the RunResult JSON.
inline nlohmann::json sampled_run(const Circuit &c, const ResolvedEngine &r, const EngineFlags &f, std::ostream &err,
                                  const OracleRegistry &oracles = {}) {
    auto res = run_sampled(c, r.options, oracles);
    auto j = to_json(res);
    j["refresh"] = r.variant ? std::string(variant_name(*r.variant)) : std::string("none");
    j["policy"] = policy_name(r.policy);
    if (!f.csv.empty()) {
        std::ostringstream os;
        write_blv_csv(os, res.psi_hat, c.n_grabits());
        write_file(f.csv, os.str());
    }
    if (!f.snapshot.empty() && res.ensemble) {
        std::ostringstream os;
        write_snapshot(os, *res.ensemble);
        write_file(f.snapshot, os.str(), true);
    }
    err << "sampled run: " << c.gate_count() << " gates, N_ball " << res.n_ball_initial << " -> " << res.n_ball_final
        << ", peak " << to_binary(res.peak_blv, res.n_logical) << (res.annihilated ? " (annihilated)" : "") << ", "
        << res.wall_seconds << " s\n";
    return j;
}

inline nlohmann::json exact_run(const Circuit &c, bool rational, bool compare, std::ostream &err,
                                const OracleRegistry &oracles = {}) {
    nlohmann::json j;
    std::vector<double> psi;
    if (rational) {
        const auto run = run_exact_stochastic<Rational>(c, oracles, kDefaultExactLimit, false);
        j = to_json(run);
        auto &exact = j["psi_rational"] = nlohmann::json::array();
        for (const auto &[i, v] : run.psi.entries()) {
            exact.push_back({i, v.str()});
        }
        psi = run.psi.dense();
    } else {
        const auto run = run_exact_stochastic<double>(c, oracles, kDefaultExactLimit, false);
        j = to_json(run);
        psi = run.psi.dense();
    }
    if (compare) {
        const auto ref = reference_vector(c, oracles);
        j["comparison"] = to_json(compare_up_to_scale(psi, ref));
        err << "cosine to unitary output: " << j["comparison"]["cosine"].get<double>() << '\n';
    }
    err << "exact propagation: " << c.gate_count() << " gates on " << c.n_grabits() << " grabits\n";
    return j;
}

inline std::vector<std::uint64_t> parse_counts(const std::string &s) {
    std::vector<std::uint64_t> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        v.push_back(parse_u64(item, "--histogram"));
    }
    return v;
}

inline nlohmann::json ensemble_view(const RealizationEnsemble &e) {
    nlohmann::json counts = nlohmann::json::array();
    for (const auto &[k, c] : histogram(e).bins) {
        counts.push_back({k, c});
    }
    return {{"n_ball", e.size()},
            {"histogram", counts},
            {"psi_hat", grabit::detail::entries_json(extract_state(e).entries())},
            {"effective_ball_count", effective_ball_count(e)}};
}

/// Initial state for `algo qft`: basis:<bits>, fourier:<k> or periodic:<period>[:<offset>].
inline InitState parse_init(const std::string &s, int n) {
    const auto colon = s.find(':');
    const std::string head = s.substr(0, colon);
    const std::string tail = colon == std::string::npos ? "" : s.substr(colon + 1);
    try {
        if (head == "basis") {
            InitState init;
            init.bits = tail.empty() ? std::string(static_cast<std::size_t>(n), '0') : tail;
            if (static_cast<int>(init.bits.size()) != n || init.bits.find_first_not_of("01") != std::string::npos) {
                throw UsageError("--init basis needs " + std::to_string(n) + " bits");
            }
            return init;
        }
        if (head == "fourier") {
            return fourier_basis_state(n, parse_u64(tail, "--init fourier"));
        }
        if (head == "periodic") {
            const auto c2 = tail.find(':');
            const auto period = parse_u64(tail.substr(0, c2), "--init periodic");
            const auto offset = c2 == std::string::npos ? 0 : parse_u64(tail.substr(c2 + 1), "--init periodic");
            return periodic_state(n, period, offset);
        }
    } catch (const std::logic_error &e) {
        throw UsageError(e.what());
    }
    throw UsageError("--init must be basis:<bits>, fourier:<k> or periodic:<p>[:<offset>]");
}

}  // namespace detail

/// Runs the CLI; `argv[0]` is the program name.
inline int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"Stochastic grabit emulator of quantum circuits"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    // run
    std::string run_circuit, run_out;
    detail::EngineFlags run_flags;
    auto *run_cmd = app.add_subcommand("run", "sample a circuit file with the ensemble engine");
    run_cmd->add_option("--circuit", run_circuit, ".gc circuit file")->required();
    run_cmd->add_option("--out", run_out, "write the JSON here instead of stdout");
    detail::add_engine_flags(run_cmd, run_flags);

    // exact
    std::string exact_circuit;
    bool exact_compare = false, exact_rational = false, exact_dry = false;
    auto *exact_cmd = app.add_subcommand("exact", "propagate the full probability vector");
    exact_cmd->add_option("--circuit", exact_circuit, ".gc circuit file")->required();
    exact_cmd->add_flag("--compare-unitary", exact_compare, "compare against the unitary simulation");
    exact_cmd->add_flag("--rational", exact_rational, "exact rational arithmetic");
    exact_cmd->add_flag("--dry-run", exact_dry, "print the resolved plan and exit");

    // algo
    auto *algo_cmd = app.add_subcommand("algo", "build and run a standard algorithm");
    algo_cmd->require_subcommand(1);
    int algo_n = 2;
    std::string algo_engine = "sampled";
    bool algo_emit = false, algo_compare = false;
    detail::EngineFlags algo_flags;
    auto add_algo_common = [&](CLI::App *sub) {
        sub->add_option("--n", algo_n, "number of input qubits")->check(CLI::Range(1, 40));
        sub->add_option("--engine", algo_engine, "sampled|exact");
        sub->add_flag("--emit", algo_emit, "print the circuit text instead of running it");
        sub->add_flag("--compare-unitary", algo_compare, "exact engine: compare against the unitary simulation");
        detail::add_engine_flags(sub, algo_flags);
    };
    std::string dj_oracle = "parity";
    auto *dj_cmd = algo_cmd->add_subcommand("dj", "Deutsch-Jozsa");
    dj_cmd->add_option("--oracle", dj_oracle, "const0|const1|parity|bv:<bits>");
    add_algo_common(dj_cmd);
    std::string bv_a;
    bool bv_no_final = false;
    auto *bv_cmd = algo_cmd->add_subcommand("bv", "Bernstein-Vazirani");
    bv_cmd->add_option("--a", bv_a, "hidden bitstring, first character weights qubit 0")->required();
    bv_cmd->add_flag("--no-ancilla-h", bv_no_final, "skip the final H on the ancilla");
    add_algo_common(bv_cmd);
    bool qft_inverse = false, qft_no_swaps = false;
    std::string qft_init = "basis";
    auto *qft_cmd = algo_cmd->add_subcommand("qft", "quantum Fourier transform");
    qft_cmd->add_flag("--inverse", qft_inverse, "inverse transform");
    qft_cmd->add_flag("--no-swaps", qft_no_swaps, "omit the final swap layer");
    qft_cmd->add_option("--init", qft_init, "basis[:bits] | fourier:<k> | periodic:<p>[:<offset>]");
    add_algo_common(qft_cmd);
    std::string qaoa_prices, qaoa_engine = "exact";
    int qaoa_assets = 5, qaoa_days = 1260, qaoa_p = 1, qaoa_grid = 16;
    std::uint64_t qaoa_price_seed = 1, qaoa_nball = 100000;
    double qaoa_q = 0.5;
    std::optional<int> qaoa_budget;
    std::optional<double> qaoa_lambda;
    std::string qaoa_seed_text, qaoa_refresh = "rf1";
    int qaoa_workers = 1;
    bool qaoa_dry = false;
    auto *qaoa_cmd = algo_cmd->add_subcommand("qaoa", "portfolio optimization with QAOA");
    qaoa_cmd->add_option("--prices", qaoa_prices, "CSV with header asset,day,price (day 0 = most recent)");
    qaoa_cmd->add_option("--assets", qaoa_assets, "synthetic instance: asset count")->check(CLI::Range(1, 20));
    qaoa_cmd->add_option("--days", qaoa_days, "synthetic instance: trading days")->check(CLI::Range(3, 100000));
    qaoa_cmd->add_option("--price-seed", qaoa_price_seed, "synthetic instance: generator seed");
    qaoa_cmd->add_option("--q", qaoa_q, "risk weight q in [0, 1]")->check(CLI::Range(0.0, 1.0));
    qaoa_cmd->add_option("--budget", qaoa_budget, "number of assets to pick");
    qaoa_cmd->add_option("--lambda", qaoa_lambda, "budget penalty weight");
    qaoa_cmd->add_option("--p", qaoa_p, "QAOA depth")->check(CLI::Range(1, 8));
    qaoa_cmd->add_option("--grid", qaoa_grid, "grid points per axis")->check(CLI::Range(2, 256));
    qaoa_cmd->add_option("--engine", qaoa_engine, "exact|sampled");
    qaoa_cmd->add_option("--nball", qaoa_nball, "sampled engine: realizations")->check(CLI::PositiveNumber);
    qaoa_cmd->add_option("--refresh", qaoa_refresh, "sampled engine: rf1|rf2|rf3");
    auto *qaoa_seed_opt = qaoa_cmd->add_option("--seed", qaoa_seed_text, "RNG seed");
    qaoa_cmd->add_option("--workers", qaoa_workers, "partition count")->check(CLI::Range(1, 1024));
    qaoa_cmd->add_flag("--dry-run", qaoa_dry, "print the resolved plan and exit");

    // scan
    std::string scan_config, scan_csv, scan_seed_text;
    int scan_workers = 1;
    bool scan_dry = false;
    auto *scan_cmd = app.add_subcommand("scan", "run a parameter scan from a JSON config");
    scan_cmd->add_option("--config", scan_config, "scan configuration")->required();
    scan_cmd->add_option("--csv", scan_csv, "write the table here; stdout then carries the JSON summary");
    auto *scan_seed_opt = scan_cmd->add_option("--seed", scan_seed_text, "override the config seed");
    scan_cmd->add_option("--workers", scan_workers, "partition count")->check(CLI::Range(1, 1024));
    scan_cmd->add_flag("--dry-run", scan_dry, "print the resolved plan and exit");

    // refresh-demo
    std::string demo_variant = "rf1", demo_hist = "4,0,4,3", demo_roar = "deterministic", demo_seed_text;
    int demo_grabits = 1;
    std::optional<std::uint64_t> demo_target;
    bool demo_dry = false;
    auto *demo_cmd = app.add_subcommand("refresh-demo", "apply one refreshment to a histogram");
    demo_cmd->add_option("--variant", demo_variant, "rf1|rf2|rf3");
    demo_cmd->add_option("--histogram", demo_hist, "comma-separated counts per joint b4v");
    demo_cmd->add_option("--grabits", demo_grabits, "grabit count")->check(CLI::Range(1, 12));
    demo_cmd->add_option("--target", demo_target, "rf2 target / rf3 capacity (default N / 2N)");
    demo_cmd->add_option("--roar", demo_roar, "deterministic|montecarlo");
    auto *demo_seed_opt = demo_cmd->add_option("--seed", demo_seed_text, "RNG seed for montecarlo ROAR");
    demo_cmd->add_flag("--dry-run", demo_dry, "print the resolved plan and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    auto emit = [&](const nlohmann::json &j) { out << j.dump(2) << '\n'; };
    auto note_seed = [&](const detail::Seed &s) { err << "seed: " << s.value << " (" << s.source << ")\n"; };

    try {
        if (*run_cmd) {
            const auto r = detail::resolve_engine(run_flags);
            note_seed(r.seed);
            const auto c = detail::apply_refresh(load_circuit(run_circuit), r);
            if (run_flags.dry_run) {
                emit({{"command", "run"},
                      {"dry_run", true},
                      {"circuit", run_circuit},
                      {"circuit_summary", detail::circuit_summary(c)},
                      {"engine", detail::engine_plan(r)}});
                return 0;
            }
            const auto j = detail::sampled_run(c, r, run_flags, err);
            if (run_out.empty()) {
                emit(j);
            } else {
                detail::write_file(run_out, j.dump(2) + "\n");
            }
            return 0;
        }
        if (*exact_cmd) {
            const auto c = load_circuit(exact_circuit);
            if (exact_dry) {
                emit({{"command", "exact"},
                      {"dry_run", true},
                      {"circuit", exact_circuit},
                      {"circuit_summary", detail::circuit_summary(c)},
                      {"rational", exact_rational},
                      {"compare_unitary", exact_compare}});
                return 0;
            }
            emit(detail::exact_run(c, exact_rational, exact_compare, err));
            return 0;
        }
        if (*algo_cmd) {
            if (*qaoa_cmd) {
                const auto seed = detail::resolve_seed(qaoa_seed_opt, qaoa_seed_text);
                note_seed(seed);
                QaoaOptions opt;
                opt.p = qaoa_p;
                opt.grid = qaoa_grid;
                opt.n_ball = qaoa_nball;
                opt.seed = seed.value;
                opt.workers = qaoa_workers;
                if (qaoa_engine == "exact") {
                    opt.engine = QaoaEngine::Exact;
                } else if (qaoa_engine == "sampled") {
                    opt.engine = QaoaEngine::Sampled;
                } else {
                    throw UsageError("--engine must be exact or sampled");
                }
                try {
                    opt.variant = parse_variant(qaoa_refresh);
                } catch (const std::invalid_argument &e) {
                    throw UsageError(e.what());
                }
                nlohmann::json source = qaoa_prices.empty()
                                            ? nlohmann::json{{"synthetic", {{"assets", qaoa_assets},
                                                                            {"days", qaoa_days},
                                                                            {"seed", qaoa_price_seed}}}}
                                            : nlohmann::json{{"prices", qaoa_prices}};
                if (qaoa_dry) {
                    emit({{"command", "algo qaoa"},
                          {"dry_run", true},
                          {"source", source},
                          {"q", qaoa_q},
                          {"budget", qaoa_budget ? nlohmann::json(*qaoa_budget) : nlohmann::json()},
                          {"p", opt.p},
                          {"grid", opt.grid},
                          {"engine", qaoa_engine},
                          {"n_ball", opt.n_ball},
                          {"seed", opt.seed}});
                    return 0;
                }
                PriceTable prices;
                if (qaoa_prices.empty()) {
                    prices = synthetic_prices(qaoa_assets, qaoa_days, qaoa_price_seed);
                } else {
                    std::istringstream is(detail::read_file(qaoa_prices));
                    prices = read_prices_csv(is);
                }
                const auto data = portfolio_statistics(prices);
                const auto h = build_cost_hamiltonian(data, qaoa_q, qaoa_budget, qaoa_lambda);
                const auto result = optimize_qaoa(h, opt);
                auto j = to_json(result, h.n);
                j["source"] = source;
                j["assets"] = data.assets;
                j["mu"] = data.mu;
                j["hamiltonian"] = to_json(h);
                emit(j);
                err << "qaoa: ground state " << to_binary(result.ground_state, h.n) << ", best cost "
                    << result.best.cost << ", P_gs " << result.best.p_gs << " after " << result.evaluations
                    << " evaluations\n";
                return 0;
            }
            const auto r = detail::resolve_engine(algo_flags);
            Circuit c;
            std::string name;
            if (*dj_cmd) {
                name = "dj";
                c = build_dj_bv(algo_n, dj_oracle);
            } else if (*bv_cmd) {
                name = "bv";
                if (static_cast<int>(bv_a.size()) != algo_n || bv_a.find_first_not_of("01") != std::string::npos) {
                    throw UsageError("--a needs " + std::to_string(algo_n) + " characters of 0/1");
                }
                c = build_bv(algo_n, std::stoull(bv_a, nullptr, 2), !bv_no_final);
            } else {
                name = "qft";
                c = with_init(build_qft(algo_n, qft_inverse, !qft_no_swaps), detail::parse_init(qft_init, algo_n));
            }
            if (algo_engine != "sampled" && algo_engine != "exact") {
                throw UsageError("--engine must be sampled or exact");
            }
            const bool sampled = algo_engine == "sampled";
            if (sampled) {
                c = detail::apply_refresh(c, r);
            }
            if (algo_emit) {
                out << print_circuit(c);
                return 0;
            }
            if (algo_flags.dry_run) {
                auto plan = nlohmann::json{{"command", "algo " + name},
                                           {"dry_run", true},
                                           {"engine_kind", algo_engine},
                                           {"circuit_summary", detail::circuit_summary(c)}};
                if (sampled) {
                    plan["engine"] = detail::engine_plan(r);
                }
                emit(plan);
                return 0;
            }
            nlohmann::json j;
            if (sampled) {
                note_seed(r.seed);
                j = detail::sampled_run(c, r, algo_flags, err);
            } else {
                j = detail::exact_run(c, false, algo_compare, err);
            }
            j["algorithm"] = name;
            j["circuit"] = print_circuit(c);
            emit(j);
            return 0;
        }
        if (*scan_cmd) {
            nlohmann::json cfg;
            try {
                cfg = nlohmann::json::parse(detail::read_file(scan_config));
            } catch (const nlohmann::json::parse_error &e) {
                throw std::runtime_error(scan_config + ": " + e.what());
            }
            if (scan_seed_opt->count() > 0) {
                cfg["seed"] = detail::parse_u64(scan_seed_text, "--seed");
            }
            if (scan_dry) {
                emit({{"command", "scan"}, {"dry_run", true}, {"config", cfg}, {"workers", scan_workers}});
                return 0;
            }
            const auto result = run_scan(cfg, scan_workers);
            if (scan_csv.empty()) {
                out << result.csv;
                err << result.summary.dump() << '\n';
            } else {
                detail::write_file(scan_csv, result.csv);
                emit(result.summary);
            }
            return 0;
        }
        if (*demo_cmd) {
            RefreshVariant v;
            try {
                v = parse_variant(demo_variant);
            } catch (const std::invalid_argument &e) {
                throw UsageError(e.what());
            }
            const auto counts = detail::parse_counts(demo_hist);
            const std::size_t dim = std::size_t{1} << (2 * demo_grabits);
            if (counts.size() != dim) {
                throw UsageError("--histogram needs " + std::to_string(dim) + " counts for " +
                                 std::to_string(demo_grabits) + " grabits");
            }
            std::vector<Key> keys;
            for (std::size_t i = 0; i < dim; ++i) {
                keys.insert(keys.end(), counts[i], static_cast<Key>(i));
            }
            if (keys.empty()) {
                throw UsageError("--histogram is empty");
            }
            const auto seed = detail::resolve_seed(demo_seed_opt, demo_seed_text);
            const RoarMode mode = demo_roar == "montecarlo" ? RoarMode::MonteCarlo : RoarMode::Deterministic;
            if (demo_roar != "montecarlo" && demo_roar != "deterministic") {
                throw UsageError("--roar must be deterministic or montecarlo");
            }
            const std::uint64_t n = keys.size();
            const std::uint64_t target = demo_target.value_or(v == RefreshVariant::Rf3 ? 2 * n : n);
            if (demo_dry) {
                emit({{"command", "refresh-demo"},
                      {"dry_run", true},
                      {"variant", variant_name(v)},
                      {"grabits", demo_grabits},
                      {"counts", counts},
                      {"target", target},
                      {"seed", seed.value}});
                return 0;
            }
            RealizationEnsemble e(demo_grabits, std::move(keys), std::max<std::size_t>(2 * n, target));
            auto before = detail::ensemble_view(e);
            RefreshReport rep;
            switch (v) {
                case RefreshVariant::Rf1:
                    rep = rf1(e, mode, RngStream(seed.value));
                    break;
                case RefreshVariant::Rf2:
                    rep = rf2(e, target);
                    break;
                case RefreshVariant::Rf3:
                    rep = rf3(e, target);
                    break;
            }
            std::vector<std::uint64_t> dense_after(dim, 0);
            for (const auto &[k, c] : histogram(e).bins) {
                dense_after[k] = c;
            }
            emit({{"variant", variant_name(v)},
                  {"before", before},
                  {"after", detail::ensemble_view(e)},
                  {"counts_after", dense_after},
                  {"report", to_json(rep)}});
            err << variant_name(v) << ": " << rep.n_before << " -> " << rep.n_after << " balls\n";
            return 0;
        }
    } catch (const UsageError &e) {
        err << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

}  // namespace grabit::cli
