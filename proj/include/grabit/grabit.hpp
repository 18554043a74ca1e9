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

#include "grabit/algorithms.hpp"
#include "grabit/byte4.hpp"
#include "grabit/circuit.hpp"
#include "grabit/engine.hpp"
#include "grabit/ensemble.hpp"
#include "grabit/experiments.hpp"
#include "grabit/exact.hpp"
#include "grabit/gates.hpp"
#include "grabit/parallel.hpp"
#include "grabit/portfolio.hpp"
#include "grabit/refresh.hpp"
#include "grabit/rng.hpp"
#include "grabit/scalar.hpp"
#include "grabit/state.hpp"
