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

#include <numeric>
#include <utility>

#include "mpqw/core.hpp"

namespace mpqw {

/// Occupation numbers of the input modes. Mode labels are 1-based
/// everywhere in the API; storage is 0-based.
struct OccupationVector {
    std::vector<int> occupations;

    OccupationVector() = default;
    explicit OccupationVector(std::vector<int> occ) : occupations(std::move(occ)) {}

    int mode_count() const { return static_cast<int>(occupations.size()); }

    /// Total particle number N.
    int total() const { return std::accumulate(occupations.begin(), occupations.end(), 0); }

    int at_mode(int mode) const {
        if (mode < 1 || mode > mode_count()) {
            throw std::invalid_argument("OccupationVector: mode index out of range");
        }
        return occupations[mode - 1];
    }

    /// N singly occupied adjacent modes centered on the lattice: for 2L modes
    /// the block starts at mode L - N/2 + 1.
    static OccupationVector central_block(int mode_count, int particles) {
        if (mode_count < 2 || mode_count % 2 != 0) {
            throw std::invalid_argument("central_block: mode count must be even and >= 2");
        }
        if (particles < 1 || particles > mode_count) {
            throw std::invalid_argument("central_block: particle number must be in [1, mode count]");
        }
        const int half = mode_count / 2;
        const int first = half - particles / 2 + 1;
        std::vector<int> occ(mode_count, 0);
        for (int mode = first; mode < first + particles; ++mode) {
            occ[mode - 1] = 1;
        }
        return OccupationVector(std::move(occ));
    }
};

/// Checks basic sanity plus the Pauli constraint for fermions.
inline void validate_occupations(const OccupationVector& r, Species species) {
    for (int mode = 1; mode <= r.mode_count(); ++mode) {
        const int occ = r.occupations[mode - 1];
        if (occ < 0) {
            throw std::invalid_argument("occupations: negative count at mode " + std::to_string(mode));
        }
        if (species == Species::Fermion && occ > 1) {
            throw std::invalid_argument("Pauli violation at mode " + std::to_string(mode));
        }
    }
    if (r.total() < 1) {
        throw std::invalid_argument("occupations: need at least one particle");
    }
}

/// Non-decreasing tuple of candidate source modes (1-based); never draws
/// more particles from a mode than the occupation provides.
struct SourceMultiset {
    std::vector<int> modes;

    int size() const { return static_cast<int>(modes.size()); }
};

/// Visits every non-decreasing m-tuple of source modes with per-mode
/// multiplicity bounded by the occupation, in lexicographic order. Tuples
/// that would overdraw a mode are never produced. The visitor receives a
/// const SourceMultiset& that is only valid during the call.
template <typename Visitor>
inline void for_each_source(const OccupationVector& r, int m, Visitor&& visit) {
    const int n_total = r.total();
    if (m < 1 || m > n_total) {
        throw std::invalid_argument("for_each_source: tuple length must satisfy 1 <= m <= N");
    }
    SourceMultiset q;
    q.modes.reserve(static_cast<std::size_t>(m));
    std::vector<int> capacity = r.occupations;
    const int modes = r.mode_count();

    auto descend = [&](auto&& self, int first_index) -> void {
        if (static_cast<int>(q.modes.size()) == m) {
            visit(static_cast<const SourceMultiset&>(q));
            return;
        }
        for (int index = first_index; index < modes; ++index) {
            if (capacity[index] == 0) {
                continue;
            }
            --capacity[index];
            q.modes.push_back(index + 1);
            self(self, index);
            q.modes.pop_back();
            ++capacity[index];
        }
    };
    descend(descend, 0);
}

/// Materialized variant of for_each_source, mainly for inspection and tests.
inline std::vector<SourceMultiset> enumerate_sources(const OccupationVector& r, int m) {
    std::vector<SourceMultiset> out;
    for_each_source(r, m, [&](const SourceMultiset& q) { out.push_back(q); });
    return out;
}

/// prod_l r_l! / (r_l - mu_l)! for the tuple's multiplicities mu: the number
/// of ordered ways to draw the tuple from the occupied modes. Always an
/// exact integer.
inline std::uint64_t multiplicity_prefactor(const OccupationVector& r, const SourceMultiset& q) {
    std::uint64_t prefactor = 1;
    std::size_t a = 0;
    while (a < q.modes.size()) {
        const int mode = q.modes[a];
        std::size_t b = a;
        while (b < q.modes.size() && q.modes[b] == mode) {
            ++b;
        }
        const int multiplicity = static_cast<int>(b - a);
        const int available = r.at_mode(mode);
        if (multiplicity > available) {
            throw std::invalid_argument("multiplicity_prefactor: tuple draws " + std::to_string(multiplicity) +
                                        " particles from mode " + std::to_string(mode) + " which holds " +
                                        std::to_string(available));
        }
        prefactor *= falling_factorial(available, multiplicity);
        a = b;
    }
    return prefactor;
}

/// S(q) = m! / prod_l mu_l!: the number of distinct permutations of the tuple.
inline std::uint64_t multiset_permutation_count(const SourceMultiset& q) {
    std::uint64_t denominator = 1;
    std::size_t a = 0;
    while (a < q.modes.size()) {
        std::size_t b = a;
        while (b < q.modes.size() && q.modes[b] == q.modes[a]) {
            ++b;
        }
        denominator *= factorial(static_cast<int>(b - a));
        a = b;
    }
    return factorial(q.size()) / denominator;
}

}  // namespace mpqw
