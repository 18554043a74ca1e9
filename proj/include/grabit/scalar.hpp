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
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace grabit {

/// Exact rational scalar. Every finite double converts to it without loss,
/// so probability tables built from dyadic values (0, 1/2, 1) propagate
/// exactly.
using Rational = boost::multiprecision::cpp_rational;

template <class T>
inline T scalar_cast(double v) {
    return T(v);
}

inline double to_double(double v) { return v; }
inline double to_double(const Rational &v) { return v.convert_to<double>(); }

template <class T>
inline T scalar_abs(const T &v) {
    return v < T(0) ? T(-v) : v;
}

/// Raised when an ensemble no longer carries any amplitude.
class AnnihilationError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Raised when a dense or exact path is asked for more grabits than it admits.
class LimitError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

}  // namespace grabit
