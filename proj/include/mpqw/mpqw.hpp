// Copyright 2026 The mpqw Authors
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

#include "mpqw/combinatorics.hpp"
#include "mpqw/core.hpp"
#include "mpqw/correlator.hpp"
#include "mpqw/counting.hpp"
#include "mpqw/distinguishable.hpp"
#include "mpqw/distributions.hpp"
#include "mpqw/fock_oracle.hpp"
#include "mpqw/lattice.hpp"
#include "mpqw/scenario.hpp"
