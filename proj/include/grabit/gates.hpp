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

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "grabit/byte4.hpp"
#include "grabit/ensemble.hpp"
#include "grabit/parallel.hpp"
#include "grabit/rng.hpp"
#include "grabit/scalar.hpp"
#include "grabit/state.hpp"
#include "json.hpp"

namespace grabit {

enum class GateKind {
    X,
    Z,
    H,
    CNOT,
    SWAP,
    Phase,
    CPhase,
    Oracle,
};

inline std::string_view gate_name(GateKind k) {
    switch (k) {
        case GateKind::X:
            return "X";
        case GateKind::Z:
            return "Z";
        case GateKind::H:
            return "H";
        case GateKind::CNOT:
            return "CNOT";
        case GateKind::SWAP:
            return "SWAP";
        case GateKind::Phase:
            return "PHASE";
        case GateKind::CPhase:
            return "CPHASE";
        case GateKind::Oracle:
            return "ORACLE";
    }
    return "?";
}

/// Boolean function on a bitstring; bit 0 of the argument is the last input.
using OracleFunction = std::function<bool(std::uint64_t)>;

struct Branch {
    std::uint32_t output;
    double probability;
};

/// Angle reduced to (-pi, pi].
inline double normalize_angle(double phi) {
    if (!std::isfinite(phi)) {
        throw std::invalid_argument("phase angle must be finite");
    }
    double r = std::remainder(phi, 2 * std::numbers::pi);
    if (r <= -std::numbers::pi) {
        r += 2 * std::numbers::pi;
    }
    return r;
}

/// Rotation parameters of a real phase rotation by phi.
struct PhaseQuadrant {
    int index = 1;
    /// Weights |cos| / (|cos| + |sin|) and |sin| / (|cos| + |sin|).
    double a = 1;
    double b = 0;
    /// Gradient-flip probability outside the rotation subspace,
    /// (1 - 1 / (|cos| + |sin|)) / 2.
    double r0 = 0;

    /// |cot phi|; infinite when sin vanishes.
    double q() const { return b == 0 ? std::numeric_limits<double>::infinity() : a / b; }
};

inline PhaseQuadrant phase_quadrant(double phi) {
    const double x = normalize_angle(phi);
    constexpr double pi = std::numbers::pi;
    PhaseQuadrant pq;
    if (x > 0 && x <= pi / 2) {
        pq.index = 1;
    } else if (x > pi / 2) {
        pq.index = 2;
    } else if (x <= -pi / 2) {
        pq.index = 3;
    } else {
        pq.index = 4;
    }
    double c = std::abs(std::cos(x));
    double s = std::abs(std::sin(x));
    if (c < 1e-14) {
        c = 0;
    }
    if (s < 1e-14) {
        s = 0;
    }
    pq.a = c / (c + s);
    pq.b = s / (c + s);
    pq.r0 = (s == 0 || c == 0) ? 0.0 : 0.5 * (1.0 - 1.0 / (c + s));
    return pq;
}

namespace detail {

// Output rows (weight a, weight b) for each input column of the rotation
// block, indexed [quadrant - 1][column].
inline constexpr std::array<std::array<std::array<std::uint32_t, 2>, 4>, 4> kRotationRows = {{
    {{{0, 2}, {1, 3}, {2, 1}, {3, 0}}},
    {{{1, 2}, {0, 3}, {3, 1}, {2, 0}}},
    {{{1, 3}, {0, 2}, {3, 0}, {2, 1}}},
    {{{0, 3}, {1, 2}, {2, 0}, {3, 1}}},
}};

inline void add_branch(std::vector<Branch> &out, std::uint32_t output, double p) {
    if (p == 0) {
        return;
    }
    for (auto &b : out) {
        if (b.output == output) {
            b.probability += p;
            return;
        }
    }
    out.push_back({output, p});
}

inline std::vector<Branch> rotation_branches(const PhaseQuadrant &pq, std::uint32_t hi, std::uint32_t m) {
    std::vector<Branch> out;
    const auto &rows = kRotationRows[static_cast<std::size_t>(pq.index - 1)][m];
    add_branch(out, hi | rows[0], pq.a);
    add_branch(out, hi | rows[1], pq.b);
    return out;
}

// Flips the gradient of the local b4v at `shift` with probability r0.
inline std::vector<Branch> reduction_branches(double r0, std::uint32_t in, int shift) {
    std::vector<Branch> out;
    add_branch(out, in, 1.0 - r0);
    add_branch(out, in ^ (1u << shift), r0);
    return out;
}

}  // namespace detail

/// A gate acting on byte4 values of its target grabits. For tabled gates the
/// local input index packs the target b4vs with the first target most
/// significant; `table[input]` lists the output branches.
class StochasticGate {
   public:
    GateKind kind() const { return kind_; }
    const std::vector<int> &targets() const { return targets_; }
    double angle() const { return angle_; }
    const std::string &oracle_name() const { return oracle_name_; }
    /// Amplitude-reduction probability outside the rotation subspace.
    double r0() const { return r0_; }

    bool is_oracle() const { return kind_ == GateKind::Oracle; }
    const std::vector<std::vector<Branch>> &table() const { return table_; }

    bool is_permutation() const {
        if (is_oracle()) {
            return true;
        }
        for (const auto &col : table_) {
            if (col.size() != 1) {
                return false;
            }
        }
        return true;
    }

    std::uint32_t local_index(Key key, int n) const {
        std::uint32_t local = 0;
        for (int t : targets_) {
            local = (local << 2) | b4v_at(key, n, t);
        }
        return local;
    }

    Key with_local(Key key, int n, std::uint32_t local) const {
        const int k = static_cast<int>(targets_.size());
        for (int j = 0; j < k; ++j) {
            key = with_b4v(key, n, targets_[static_cast<std::size_t>(j)], (local >> (2 * (k - 1 - j))) & 3u);
        }
        return key;
    }

    /// Oracle action: flip the output blv iff f(input blvs).
    Key apply_oracle(Key key, int n) const {
        std::uint64_t x = 0;
        for (std::size_t j = 0; j + 1 < targets_.size(); ++j) {
            x = (x << 1) | (b4v_at(key, n, targets_[j]) >> 1);
        }
        if (oracle_(x)) {
            const int out = targets_.back();
            key = with_b4v(key, n, out, b4v_at(key, n, out) ^ 2u);
        }
        return key;
    }

    void check_width(int n) const {
        for (int t : targets_) {
            if (t < 0 || t >= n) {
                throw std::out_of_range("gate target " + std::to_string(t) + " out of range [0," + std::to_string(n) +
                                        ")");
            }
        }
    }

   private:
    friend StochasticGate build_gate(GateKind, std::vector<int>, double);
    friend StochasticGate oracle_gate(std::string, OracleFunction, std::vector<int>, int);

    GateKind kind_ = GateKind::X;
    std::vector<int> targets_;
    double angle_ = 0;
    double r0_ = 0;
    std::string oracle_name_;
    OracleFunction oracle_;
    std::vector<std::vector<Branch>> table_;
};

namespace detail {

inline void check_targets(const std::vector<int> &targets, std::size_t arity, GateKind kind) {
    if (targets.size() != arity) {
        throw std::invalid_argument(std::string(gate_name(kind)) + " takes " + std::to_string(arity) + " targets");
    }
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i] < 0) {
            throw std::invalid_argument("negative target index");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (targets[i] == targets[j]) {
                throw std::invalid_argument("duplicate target " + std::to_string(targets[i]));
            }
        }
    }
}

}  // namespace detail

/// Builds a tabled gate on grabit indices. PHASE targets are
/// (control, ReIm); CPHASE targets are (control, control, ReIm).
inline StochasticGate build_gate(GateKind kind, std::vector<int> targets, double angle = 0) {
    if (kind == GateKind::Oracle) {
        throw std::invalid_argument("use oracle_gate for ORACLE");
    }
    StochasticGate g;
    g.kind_ = kind;
    auto &t = g.table_;
    switch (kind) {
        case GateKind::X:
            detail::check_targets(targets, 1, kind);
            t = {{{2, 1}}, {{3, 1}}, {{0, 1}}, {{1, 1}}};
            break;
        case GateKind::Z:
            detail::check_targets(targets, 1, kind);
            t = {{{0, 1}}, {{1, 1}}, {{3, 1}}, {{2, 1}}};
            break;
        case GateKind::H:
            detail::check_targets(targets, 1, kind);
            t = {{{0, 0.5}, {2, 0.5}}, {{1, 0.5}, {3, 0.5}}, {{0, 0.5}, {3, 0.5}}, {{1, 0.5}, {2, 0.5}}};
            break;
        case GateKind::CNOT:
            detail::check_targets(targets, 2, kind);
            t.resize(16);
            for (std::uint32_t in = 0; in < 16; ++in) {
                const std::uint32_t c = in >> 2;
                t[in] = {{(c >> 1) ? (in ^ 2u) : in, 1.0}};
            }
            break;
        case GateKind::SWAP:
            detail::check_targets(targets, 2, kind);
            t.resize(16);
            for (std::uint32_t in = 0; in < 16; ++in) {
                t[in] = {{((in & 3u) << 2) | (in >> 2), 1.0}};
            }
            break;
        case GateKind::Phase: {
            detail::check_targets(targets, 2, kind);
            g.angle_ = normalize_angle(angle);
            const auto pq = phase_quadrant(g.angle_);
            g.r0_ = pq.r0;
            t.resize(16);
            for (std::uint32_t in = 0; in < 16; ++in) {
                const std::uint32_t c = in >> 2;
                if (g.angle_ == 0) {
                    t[in] = {{in, 1.0}};
                } else if (c >> 1) {
                    t[in] = detail::rotation_branches(pq, in & ~3u, in & 3u);
                } else {
                    t[in] = detail::reduction_branches(pq.r0, in, 2);
                }
            }
            break;
        }
        case GateKind::CPhase: {
            detail::check_targets(targets, 3, kind);
            g.angle_ = normalize_angle(angle);
            const auto pq = phase_quadrant(g.angle_);
            g.r0_ = pq.r0;
            t.resize(64);
            for (std::uint32_t in = 0; in < 64; ++in) {
                const std::uint32_t c1 = (in >> 4) >> 1;
                const std::uint32_t c2 = ((in >> 2) & 3u) >> 1;
                if (g.angle_ == 0) {
                    t[in] = {{in, 1.0}};
                } else if (c1 && c2) {
                    t[in] = detail::rotation_branches(pq, in & ~3u, in & 3u);
                } else if (!c1) {
                    t[in] = detail::reduction_branches(pq.r0, in, 4);
                } else {
                    t[in] = detail::reduction_branches(pq.r0, in, 2);
                }
            }
            break;
        }
        case GateKind::Oracle:
            break;
    }
    g.targets_ = std::move(targets);
    return g;
}

/// Permutation x, y -> x, y xor f(x) on the logical values; every gradient
/// bit is preserved.
inline StochasticGate oracle_gate(std::string name, OracleFunction f, std::vector<int> inputs, int output) {
    if (!f) {
        throw std::invalid_argument("oracle function is empty");
    }
    if (inputs.size() > 63) {
        throw std::invalid_argument("oracle has too many inputs");
    }
    StochasticGate g;
    g.kind_ = GateKind::Oracle;
    g.oracle_name_ = std::move(name);
    g.oracle_ = std::move(f);
    inputs.push_back(output);
    detail::check_targets(inputs, inputs.size(), GateKind::Oracle);
    g.targets_ = std::move(inputs);
    return g;
}

/// Membership in the interference-generating set: H always, phase gates
/// unless the angle is a multiple of pi.
inline bool is_interference_generating(const StochasticGate &g) {
    switch (g.kind()) {
        case GateKind::H:
            return true;
        case GateKind::Phase:
        case GateKind::CPhase:
            return std::abs(std::sin(g.angle())) >= 1e-14;
        default:
            return false;
    }
}

/// Transforms every realization in place. Realizations whose input column is
/// probabilistic consume draw 0 of counter (r, gate_index).
inline void apply_sampled(const StochasticGate &g, RealizationEnsemble &e, const RngStream &rng,
                          std::uint64_t gate_index, int workers = 1) {
    const int n = e.n_grabits();
    g.check_width(n);
    auto keys = e.realizations();
    if (g.is_oracle()) {
        parallel_for(keys.size(), workers, [&](std::size_t begin, std::size_t end) {
            for (std::size_t r = begin; r < end; ++r) {
                keys[r] = g.apply_oracle(keys[r], n);
            }
        });
        return;
    }
    const auto &table = g.table();
    parallel_for(keys.size(), workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            const auto &col = table[g.local_index(keys[r], n)];
            std::uint32_t out = col[0].output;
            if (col.size() > 1) {
                double u = rng.uniform(r, gate_index, 0);
                for (const auto &b : col) {
                    out = b.output;
                    if (u < b.probability) {
                        break;
                    }
                    u -= b.probability;
                }
            }
            keys[r] = g.with_local(keys[r], n, out);
        }
    });
}

/// Exact transition-matrix action on a sparse probability vector.
template <class T>
ProbabilityVector<T> apply_exact(const StochasticGate &g, const ProbabilityVector<T> &p) {
    const int n = p.n_grabits();
    g.check_width(n);
    SparseEntries<T> out;
    out.reserve(p.support_size() * 2);
    for (const auto &[key, prob] : p.entries()) {
        if (g.is_oracle()) {
            out.emplace_back(g.apply_oracle(key, n), prob);
            continue;
        }
        for (const auto &b : g.table()[g.local_index(key, n)]) {
            out.emplace_back(g.with_local(key, n, b.output), prob * scalar_cast<T>(b.probability));
        }
    }
    return ProbabilityVector<T>(n, std::move(out));
}

/// Transition table as JSON {input, output, probability} entries.
inline nlohmann::json dump_gate(const StochasticGate &g) {
    nlohmann::json j;
    j["kind"] = std::string(gate_name(g.kind()));
    j["targets"] = g.targets();
    if (g.kind() == GateKind::Phase || g.kind() == GateKind::CPhase) {
        j["angle"] = g.angle();
        j["r0"] = g.r0();
    }
    if (g.is_oracle()) {
        j["oracle"] = g.oracle_name();
        return j;
    }
    auto &entries = j["entries"] = nlohmann::json::array();
    for (std::size_t in = 0; in < g.table().size(); ++in) {
        for (const auto &b : g.table()[in]) {
            entries.push_back({{"input", in}, {"output", b.output}, {"probability", b.probability}});
        }
    }
    return j;
}

}  // namespace grabit
