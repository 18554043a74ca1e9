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

#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "grabit/gates.hpp"
#include "grabit/refresh.hpp"
#include "grabit/state.hpp"

namespace grabit {

/// A gate on logical qubits. PHASE takes [q], CPHASE [c, t], ORACLE
/// [inputs..., output]; the ReIm grabit is implicit.
struct GateOp {
    GateKind kind = GateKind::X;
    std::vector<int> qubits;
    double angle = 0;
    std::string oracle;

    friend bool operator==(const GateOp &, const GateOp &) = default;
};

struct RefreshOp {
    RefreshVariant variant = RefreshVariant::Rf1;

    friend bool operator==(const RefreshOp &, const RefreshOp &) = default;
};

using Instruction = std::variant<GateOp, RefreshOp>;

struct InitState {
    enum class Kind {
        Basis,
        Fourier,
        File,
        Amplitudes,
    };
    Kind kind = Kind::Basis;
    /// Basis: one character per logical qubit, qubit 0 first. Empty = all zeros.
    std::string bits;
    std::uint64_t k = 0;
    std::string path;
    std::vector<std::complex<double>> amplitudes;

    friend bool operator==(const InitState &, const InitState &) = default;
};

struct RefreshPolicy {
    enum class Kind {
        None,
        AfterInterference,
        EndOnly,
        EveryK,
    };
    Kind kind = Kind::None;
    int k = 1;

    friend bool operator==(const RefreshPolicy &, const RefreshPolicy &) = default;
};

inline RefreshPolicy parse_policy(std::string_view s) {
    if (s == "none") {
        return {RefreshPolicy::Kind::None, 1};
    }
    if (s == "after_interference") {
        return {RefreshPolicy::Kind::AfterInterference, 1};
    }
    if (s == "end_only") {
        return {RefreshPolicy::Kind::EndOnly, 1};
    }
    if (s.starts_with("every:")) {
        int k = 0;
        auto tail = s.substr(6);
        auto [p, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), k);
        if (ec == std::errc() && p == tail.data() + tail.size() && k >= 1) {
            return {RefreshPolicy::Kind::EveryK, k};
        }
    }
    throw std::invalid_argument("unknown refresh policy '" + std::string(s) + "'");
}

inline std::string policy_name(const RefreshPolicy &p) {
    switch (p.kind) {
        case RefreshPolicy::Kind::None:
            return "none";
        case RefreshPolicy::Kind::AfterInterference:
            return "after_interference";
        case RefreshPolicy::Kind::EndOnly:
            return "end_only";
        case RefreshPolicy::Kind::EveryK:
            return "every:" + std::to_string(p.k);
    }
    return "?";
}

class Circuit {
   public:
    Circuit() = default;
    explicit Circuit(int n_logical) : n_logical_(n_logical) {
        if (n_logical < 1 || n_logical >= kMaxGrabits) {
            throw std::out_of_range("nbit must lie in [1," + std::to_string(kMaxGrabits - 1) + "]");
        }
    }

    int n_logical() const { return n_logical_; }
    /// True when a phase gate or a complex initial state needs the ReIm grabit.
    bool has_reim() const {
        if (init_.kind == InitState::Kind::Fourier || init_.kind == InitState::Kind::File) {
            return true;
        }
        if (init_.kind == InitState::Kind::Amplitudes) {
            for (const auto &a : init_.amplitudes) {
                if (a.imag() != 0) {
                    return true;
                }
            }
        }
        for (const auto &ins : ops_) {
            if (auto *g = std::get_if<GateOp>(&ins)) {
                if (g->kind == GateKind::Phase || g->kind == GateKind::CPhase) {
                    return true;
                }
            }
        }
        return false;
    }
    int n_grabits() const { return n_logical_ + (has_reim() ? 1 : 0); }
    /// Index of the ReIm grabit; always the last one.
    int reim_index() const { return n_logical_; }

    const std::vector<Instruction> &instructions() const { return ops_; }
    std::vector<Instruction> &instructions() { return ops_; }
    const InitState &init() const { return init_; }
    InitState &init() { return init_; }

    std::size_t gate_count() const {
        std::size_t n = 0;
        for (const auto &ins : ops_) {
            n += std::holds_alternative<GateOp>(ins) ? 1 : 0;
        }
        return n;
    }

    Circuit &gate(GateKind kind, std::vector<int> qubits, double angle = 0) {
        check_gate(GateOp{kind, qubits, angle, {}});
        ops_.emplace_back(GateOp{kind, std::move(qubits), angle, {}});
        return *this;
    }
    Circuit &h(int q) { return gate(GateKind::H, {q}); }
    Circuit &x(int q) { return gate(GateKind::X, {q}); }
    Circuit &z(int q) { return gate(GateKind::Z, {q}); }
    Circuit &cnot(int c, int t) { return gate(GateKind::CNOT, {c, t}); }
    Circuit &swap(int a, int b) { return gate(GateKind::SWAP, {a, b}); }
    Circuit &phase(double phi, int q) { return gate(GateKind::Phase, {q}, phi); }
    Circuit &cphase(double phi, int c, int t) { return gate(GateKind::CPhase, {c, t}, phi); }
    Circuit &oracle(std::string name, std::vector<int> qubits) {
        GateOp op{GateKind::Oracle, std::move(qubits), 0, std::move(name)};
        check_gate(op);
        ops_.emplace_back(std::move(op));
        return *this;
    }
    Circuit &refresh(RefreshVariant v) {
        ops_.emplace_back(RefreshOp{v});
        return *this;
    }

    void check_gate(const GateOp &op) const {
        std::size_t arity = 0;
        switch (op.kind) {
            case GateKind::X:
            case GateKind::Z:
            case GateKind::H:
            case GateKind::Phase:
                arity = 1;
                break;
            case GateKind::CNOT:
            case GateKind::SWAP:
            case GateKind::CPhase:
                arity = 2;
                break;
            case GateKind::Oracle:
                arity = op.qubits.size() < 2 ? 2 : op.qubits.size();
                break;
        }
        if (op.qubits.size() != arity) {
            throw std::invalid_argument(std::string(gate_name(op.kind)) + " expects " + std::to_string(arity) +
                                        " qubits, got " + std::to_string(op.qubits.size()));
        }
        for (std::size_t i = 0; i < op.qubits.size(); ++i) {
            const int q = op.qubits[i];
            if (q < 0 || q >= n_logical_) {
                throw std::out_of_range("target " + std::to_string(q) + " out of range [0," +
                                        std::to_string(n_logical_) + ")");
            }
            for (std::size_t j = 0; j < i; ++j) {
                if (op.qubits[j] == q) {
                    throw std::invalid_argument("duplicate target " + std::to_string(q));
                }
            }
        }
        if (!std::isfinite(op.angle)) {
            throw std::invalid_argument("non-finite angle");
        }
    }

    friend bool operator==(const Circuit &, const Circuit &) = default;

   private:
    int n_logical_ = 1;
    InitState init_;
    std::vector<Instruction> ops_;
};

/// Named boolean functions for ORACLE instructions. `bv:<bits>` is always
/// available and computes a.x mod 2 with the first character of <bits>
/// weighting the first input.
class OracleRegistry {
   public:
    OracleRegistry() {
        add("const0", [](std::uint64_t) { return false; });
        add("const1", [](std::uint64_t) { return true; });
        add("parity", [](std::uint64_t x) { return (std::popcount(x) & 1) != 0; });
    }

    void add(std::string name, OracleFunction f) { table_[std::move(name)] = std::move(f); }

    bool contains(std::string_view name) const {
        return name.starts_with("bv:") ? valid_bits(name.substr(3)) : table_.contains(std::string(name));
    }

    OracleFunction resolve(const std::string &name, int n_inputs) const {
        if (name.starts_with("bv:")) {
            const std::string bits = name.substr(3);
            if (!valid_bits(bits) || static_cast<int>(bits.size()) != n_inputs) {
                throw std::invalid_argument("oracle '" + name + "' needs " + std::to_string(n_inputs) +
                                            " bits of 0/1");
            }
            const std::uint64_t a = std::stoull(bits, nullptr, 2);
            return [a](std::uint64_t x) { return (std::popcount(a & x) & 1) != 0; };
        }
        auto it = table_.find(name);
        if (it == table_.end()) {
            throw std::invalid_argument("unknown oracle '" + name + "'");
        }
        return it->second;
    }

   private:
    static bool valid_bits(std::string_view s) {
        return !s.empty() && s.size() <= 63 && s.find_first_not_of("01") == std::string_view::npos;
    }

    std::map<std::string, OracleFunction, std::less<>> table_;
};

/// Bitstring of a value with `n` characters, first character most significant.
inline std::string bv_name(std::uint64_t a, int n) { return "bv:" + to_binary(a, n); }

/// Stochastic gate of a gate instruction on the circuit's grabit indices.
inline StochasticGate compile_gate(const GateOp &op, const Circuit &c, const OracleRegistry &oracles) {
    const int reim = c.reim_index();
    switch (op.kind) {
        case GateKind::Phase:
            return build_gate(op.kind, {op.qubits[0], reim}, op.angle);
        case GateKind::CPhase:
            return build_gate(op.kind, {op.qubits[0], op.qubits[1], reim}, op.angle);
        case GateKind::Oracle: {
            std::vector<int> inputs(op.qubits.begin(), op.qubits.end() - 1);
            const int n_inputs = static_cast<int>(inputs.size());
            return oracle_gate(op.oracle, oracles.resolve(op.oracle, n_inputs), std::move(inputs), op.qubits.back());
        }
        default:
            return build_gate(op.kind, op.qubits, op.angle);
    }
}

inline bool is_interference_generating(const GateOp &op) {
    switch (op.kind) {
        case GateKind::H:
            return true;
        case GateKind::Phase:
        case GateKind::CPhase:
            return std::abs(std::sin(normalize_angle(op.angle))) >= 1e-14;
        default:
            return false;
    }
}

/// Copy of `c` with REFRESH instructions placed per the policy.
inline Circuit insert_refresh(const Circuit &c, RefreshPolicy policy, RefreshVariant variant = RefreshVariant::Rf1) {
    Circuit out = c;
    if (policy.kind == RefreshPolicy::Kind::None) {
        return out;
    }
    auto &ops = out.instructions();
    ops.clear();
    std::size_t count = 0;
    for (const auto &ins : c.instructions()) {
        ops.push_back(ins);
        ++count;
        if (policy.kind == RefreshPolicy::Kind::AfterInterference) {
            if (auto *g = std::get_if<GateOp>(&ins); g && is_interference_generating(*g)) {
                ops.emplace_back(RefreshOp{variant});
            }
        } else if (policy.kind == RefreshPolicy::Kind::EveryK && count % static_cast<std::size_t>(policy.k) == 0) {
            ops.emplace_back(RefreshOp{variant});
        }
    }
    if (policy.kind == RefreshPolicy::Kind::EndOnly) {
        ops.emplace_back(RefreshOp{variant});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Text format.

class ParseError : public std::runtime_error {
   public:
    ParseError(int line, int column, const std::string &message)
        : std::runtime_error("line " + std::to_string(line) + ", col " + std::to_string(column) + ": " + message),
          line_(line),
          column_(column),
          message_(message) {}

    int line() const { return line_; }
    int column() const { return column_; }
    const std::string &message() const { return message_; }

   private:
    int line_;
    int column_;
    std::string message_;
};

namespace detail {

struct Token {
    std::string_view text;
    int column;
};

inline std::vector<Token> tokenize(std::string_view line) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        if (line[i] == '#') {
            break;
        }
        if (std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) && line[i] != '#') {
            ++i;
        }
        out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
    }
    return out;
}

inline std::optional<long long> to_int(std::string_view s) {
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        return std::nullopt;
    }
    return v;
}

inline std::optional<double> to_real(std::string_view s) {
    // strtod accepts inf/nan spellings, which are rejected separately.
    std::string tmp(s);
    char *end = nullptr;
    const double v = std::strtod(tmp.c_str(), &end);
    if (tmp.empty() || end != tmp.c_str() + tmp.size()) {
        return std::nullopt;
    }
    return v;
}

inline const std::map<std::string_view, GateKind, std::less<>> &mnemonics() {
    static const std::map<std::string_view, GateKind, std::less<>> m = {
        {"X", GateKind::X},         {"Z", GateKind::Z},       {"H", GateKind::H},
        {"CNOT", GateKind::CNOT},   {"SWAP", GateKind::SWAP}, {"PHASE", GateKind::Phase},
        {"CPHASE", GateKind::CPhase}, {"ORACLE", GateKind::Oracle},
    };
    return m;
}

}  // namespace detail

/// Reads a state file of `index,re,im` rows (optional header).
inline std::vector<std::complex<double>> read_state_csv(std::istream &is) {
    std::vector<std::pair<std::uint64_t, std::complex<double>>> rows;
    std::string line;
    int lineno = 0;
    std::uint64_t max_index = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::stringstream ss(line);
        std::string a, b, c;
        std::getline(ss, a, ',');
        std::getline(ss, b, ',');
        std::getline(ss, c, ',');
        auto idx = detail::to_int(a);
        auto re = detail::to_real(b);
        auto im = detail::to_real(c);
        if (!idx || !re || !im) {
            if (lineno == 1) {
                continue;
            }
            throw std::invalid_argument("state file line " + std::to_string(lineno) + ": expected index,re,im");
        }
        if (*idx < 0) {
            throw std::invalid_argument("state file line " + std::to_string(lineno) + ": negative index");
        }
        rows.push_back({static_cast<std::uint64_t>(*idx), {*re, *im}});
        max_index = std::max<std::uint64_t>(max_index, static_cast<std::uint64_t>(*idx));
    }
    std::size_t dim = 1;
    while (dim <= max_index) {
        dim <<= 1;
    }
    std::vector<std::complex<double>> psi(dim);
    for (const auto &[i, v] : rows) {
        psi[i] = v;
    }
    return psi;
}

inline void write_state_csv(std::ostream &os, std::span<const std::complex<double>> psi) {
    os << "index,re,im\n";
    char buf[96];
    for (std::size_t i = 0; i < psi.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i, psi[i].real(), psi[i].imag());
        os << buf;
    }
}

/// Parses the line-oriented circuit language. Relative `init file` paths are
/// resolved against `base_dir`.
inline Circuit parse_circuit(std::string_view text, const OracleRegistry &oracles = {},
                             const std::filesystem::path &base_dir = {}) {
    std::optional<Circuit> c;
    int lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            nl = text.size();
        }
        std::string_view line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        pos = nl + 1;
        ++lineno;
        const auto tok = detail::tokenize(line);
        if (tok.empty()) {
            continue;
        }
        auto fail = [&](std::size_t t, const std::string &msg) -> ParseError {
            const int col = t < tok.size() ? tok[t].column : static_cast<int>(line.size()) + 1;
            return ParseError(lineno, col, msg);
        };
        const std::string_view head = tok[0].text;

        if (head == "nbit") {
            if (c) {
                throw fail(0, "duplicate nbit directive");
            }
            if (tok.size() != 2) {
                throw fail(tok.size() < 2 ? 1 : 2, "nbit expects one count");
            }
            auto n = detail::to_int(tok[1].text);
            if (!n || *n < 1 || *n >= kMaxGrabits) {
                throw fail(1, "nbit must be an integer in [1," + std::to_string(kMaxGrabits - 1) + "]");
            }
            c.emplace(static_cast<int>(*n));
            continue;
        }
        if (!c) {
            throw fail(0, "expected 'nbit K' before '" + std::string(head) + "'");
        }
        const int n = c->n_logical();

        if (head == "init") {
            if (tok.size() < 3) {
                throw fail(tok.size(), "init expects a kind and a value");
            }
            const std::string_view kind = tok[1].text;
            InitState init;
            if (kind == "basis") {
                if (tok.size() != 3) {
                    throw fail(3, "init basis expects one bitstring");
                }
                const std::string_view bits = tok[2].text;
                if (static_cast<int>(bits.size()) != n || bits.find_first_not_of("01") != std::string_view::npos) {
                    throw fail(2, "basis bitstring must have " + std::to_string(n) + " characters of 0/1");
                }
                init.kind = InitState::Kind::Basis;
                init.bits = std::string(bits);
            } else if (kind == "fourier") {
                if (tok.size() != 3) {
                    throw fail(3, "init fourier expects one integer");
                }
                auto k = detail::to_int(tok[2].text);
                if (!k || *k < 0 || (n < 63 && static_cast<unsigned long long>(*k) >= (1ULL << n))) {
                    throw fail(2, "fourier index must lie in [0,2^" + std::to_string(n) + ")");
                }
                init.kind = InitState::Kind::Fourier;
                init.k = static_cast<std::uint64_t>(*k);
            } else if (kind == "file") {
                if (tok.size() != 3) {
                    throw fail(3, "init file expects one path");
                }
                std::filesystem::path p(std::string(tok[2].text));
                if (p.is_relative() && !base_dir.empty()) {
                    p = base_dir / p;
                }
                init.kind = InitState::Kind::File;
                init.path = p.string();
            } else if (kind == "amplitudes") {
                const std::size_t dim = std::size_t{1} << n;
                if (tok.size() != 2 + 2 * dim) {
                    throw fail(2, "init amplitudes expects " + std::to_string(2 * dim) + " reals (re im pairs)");
                }
                init.kind = InitState::Kind::Amplitudes;
                for (std::size_t i = 0; i < dim; ++i) {
                    auto re = detail::to_real(tok[2 + 2 * i].text);
                    auto im = detail::to_real(tok[3 + 2 * i].text);
                    if (!re || !std::isfinite(*re)) {
                        throw fail(2 + 2 * i, "bad amplitude");
                    }
                    if (!im || !std::isfinite(*im)) {
                        throw fail(3 + 2 * i, "bad amplitude");
                    }
                    init.amplitudes.emplace_back(*re, *im);
                }
            } else {
                throw fail(1, "unknown init kind '" + std::string(kind) + "'");
            }
            c->init() = std::move(init);
            continue;
        }
        if (head == "REFRESH") {
            if (tok.size() != 2) {
                throw fail(tok.size() < 2 ? 1 : 2, "REFRESH expects rf1|rf2|rf3");
            }
            try {
                c->refresh(parse_variant(tok[1].text));
            } catch (const std::invalid_argument &e) {
                throw fail(1, e.what());
            }
            continue;
        }

        auto it = detail::mnemonics().find(head);
        if (it == detail::mnemonics().end()) {
            throw fail(0, "unknown mnemonic '" + std::string(head) + "'");
        }
        GateOp op;
        op.kind = it->second;
        std::size_t first_qubit = 1;
        std::size_t want = 0;
        switch (op.kind) {
            case GateKind::X:
            case GateKind::Z:
            case GateKind::H:
                want = 1;
                break;
            case GateKind::CNOT:
            case GateKind::SWAP:
                want = 2;
                break;
            case GateKind::Phase:
                want = 1;
                first_qubit = 2;
                break;
            case GateKind::CPhase:
                want = 2;
                first_qubit = 2;
                break;
            case GateKind::Oracle:
                first_qubit = 2;
                want = tok.size() >= 4 ? tok.size() - 2 : 2;
                break;
        }
        if (tok.size() != first_qubit + want) {
            throw fail(std::min(tok.size(), first_qubit + want),
                       std::string(head) + " expects " + std::to_string(want) + " qubit argument(s)" +
                           (first_qubit == 2 ? " after its parameter" : ""));
        }
        if (op.kind == GateKind::Phase || op.kind == GateKind::CPhase) {
            auto phi = detail::to_real(tok[1].text);
            if (!phi) {
                throw fail(1, "bad angle '" + std::string(tok[1].text) + "'");
            }
            if (!std::isfinite(*phi)) {
                throw fail(1, "non-finite angle");
            }
            op.angle = *phi;
        } else if (op.kind == GateKind::Oracle) {
            op.oracle = std::string(tok[1].text);
            if (!oracles.contains(op.oracle)) {
                throw fail(1, "unknown oracle '" + op.oracle + "'");
            }
            if (op.oracle.starts_with("bv:") && op.oracle.size() - 3 != want - 1) {
                throw fail(1, "oracle '" + op.oracle + "' needs " + std::to_string(op.oracle.size() - 3) + " inputs");
            }
        }
        for (std::size_t t = first_qubit; t < tok.size(); ++t) {
            auto q = detail::to_int(tok[t].text);
            if (!q) {
                throw fail(t, "bad qubit index '" + std::string(tok[t].text) + "'");
            }
            if (*q < 0 || *q >= n) {
                throw fail(t, "target " + std::string(tok[t].text) + " out of range [0," + std::to_string(n) + ")");
            }
            for (int prev : op.qubits) {
                if (prev == *q) {
                    throw fail(t, "duplicate target " + std::string(tok[t].text));
                }
            }
            op.qubits.push_back(static_cast<int>(*q));
        }
        c->instructions().emplace_back(std::move(op));
    }
    if (!c) {
        throw ParseError(lineno, 1, "missing 'nbit K' directive");
    }
    return *c;
}

inline Circuit load_circuit(const std::filesystem::path &path, const OracleRegistry &oracles = {}) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open circuit file " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_circuit(ss.str(), oracles, path.parent_path());
}

inline std::string format_angle(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string print_circuit(const Circuit &c) {
    std::ostringstream os;
    os << "nbit " << c.n_logical() << '\n';
    const auto &init = c.init();
    switch (init.kind) {
        case InitState::Kind::Basis:
            if (!init.bits.empty()) {
                os << "init basis " << init.bits << '\n';
            }
            break;
        case InitState::Kind::Fourier:
            os << "init fourier " << init.k << '\n';
            break;
        case InitState::Kind::File:
            os << "init file " << init.path << '\n';
            break;
        case InitState::Kind::Amplitudes:
            os << "init amplitudes";
            for (const auto &a : init.amplitudes) {
                os << ' ' << format_angle(a.real()) << ' ' << format_angle(a.imag());
            }
            os << '\n';
            break;
    }
    for (const auto &ins : c.instructions()) {
        if (auto *r = std::get_if<RefreshOp>(&ins)) {
            os << "REFRESH " << variant_name(r->variant) << '\n';
            continue;
        }
        const auto &g = std::get<GateOp>(ins);
        os << gate_name(g.kind);
        if (g.kind == GateKind::Phase || g.kind == GateKind::CPhase) {
            os << ' ' << format_angle(g.angle);
        } else if (g.kind == GateKind::Oracle) {
            os << ' ' << g.oracle;
        }
        for (int q : g.qubits) {
            os << ' ' << q;
        }
        os << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Initial states.

/// Amplitudes of |k~> = prod_m (|0> + e^{2 pi i k / 2^(n-m)} |1>) / sqrt(2)
/// with qubit m = 0 most significant. An inverse QFT without the final
/// swaps maps it to |k>.
inline std::vector<std::complex<double>> fourier_amplitudes(int n, std::uint64_t k) {
    if (n < 1 || n > 26) {
        throw LimitError("fourier state needs 1 <= n <= 26");
    }
    if (k >= (std::uint64_t{1} << n)) {
        throw std::out_of_range("fourier index out of range");
    }
    const std::size_t dim = std::size_t{1} << n;
    std::vector<std::complex<double>> psi(dim);
    const double norm = std::pow(2.0, -0.5 * n);
    for (std::size_t x = 0; x < dim; ++x) {
        // Phase 2 pi k sum_m x_m 2^-(n-m), reduced mod 1 in integers.
        std::uint64_t num = 0;
        for (int m = 0; m < n; ++m) {
            if ((x >> (n - 1 - m)) & 1u) {
                num += (k << m) & ((std::uint64_t{1} << n) - 1);
            }
        }
        num &= (std::uint64_t{1} << n) - 1;
        const double turn = static_cast<double>(num) / static_cast<double>(std::uint64_t{1} << n);
        psi[x] = std::polar(norm, 2 * std::numbers::pi * turn);
    }
    return psi;
}

inline std::uint64_t basis_index(const InitState &init) {
    return init.bits.empty() ? 0 : std::stoull(init.bits, nullptr, 2);
}

/// Dense complex input amplitudes over the logical qubits.
inline std::vector<std::complex<double>> initial_amplitudes(const Circuit &c) {
    const int n = c.n_logical();
    const auto &init = c.init();
    switch (init.kind) {
        case InitState::Kind::Basis: {
            if (n > 26) {
                throw LimitError("dense input state beyond 26 qubits");
            }
            std::vector<std::complex<double>> psi(std::size_t{1} << n);
            psi[basis_index(init)] = 1;
            return psi;
        }
        case InitState::Kind::Fourier:
            return fourier_amplitudes(n, init.k);
        case InitState::Kind::File: {
            std::ifstream in(init.path);
            if (!in) {
                throw std::runtime_error("cannot open state file " + init.path);
            }
            auto psi = read_state_csv(in);
            if (psi.size() > (std::size_t{1} << n)) {
                throw std::invalid_argument("state file has more than 2^nbit entries");
            }
            psi.resize(std::size_t{1} << n);
            return psi;
        }
        case InitState::Kind::Amplitudes:
            if (init.amplitudes.size() != (std::size_t{1} << n)) {
                throw std::invalid_argument("amplitude count must be 2^nbit");
            }
            return init.amplitudes;
    }
    return {};
}

/// Encoded b4v distribution of the circuit's input state over all grabits.
template <class T = double>
ProbabilityVector<T> initial_distribution(const Circuit &c) {
    if (c.init().kind == InitState::Kind::Basis) {
        std::uint64_t blv = basis_index(c.init());
        if (c.has_reim()) {
            blv <<= 1;
        }
        return ProbabilityVector<T>::point_mass(c.n_grabits(), compose_key(blv, 0));
    }
    const auto psi = initial_amplitudes(c);
    if (c.has_reim()) {
        return encode_state<T>(realify(psi));
    }
    std::vector<double> re(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) {
        re[i] = psi[i].real();
    }
    return encode_state<T>(std::span<const double>(re));
}

}  // namespace grabit
