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

#include <map>

#include "mpqw/correlator.hpp"
#include "mpqw/distributions.hpp"

namespace mpqw {

// The expansion grows exponentially with particle number; past these caps it
// refuses instead of grinding.
inline constexpr int kOracleMaxParticles = 6;
inline constexpr int kOracleMaxModes = 8;

/// Full expansion of the evolved many-particle state over the occupation
/// basis. Ground truth for small systems; every observable follows by direct
/// summation.
struct FockExpansion {
    Species species = Species::Boson;
    int mode_count = 0;
    int particle_total = 0;
    std::vector<std::pair<std::vector<int>, Complex>> terms;  // occupation vector -> amplitude

    double norm() const {
        double total = 0.0;
        for (const auto& [basis, amplitude] : terms) {
            total += std::norm(amplitude);
        }
        return total;
    }
};

namespace detail {

// Applies sum_q W_{jq} a+_q to every term of the expansion. Bosonic ladder
// factor sqrt(n_q + 1); fermionic sign (-1)^(number of occupied modes below
// q), with basis states referenced to creation operators in ascending mode
// order.
inline std::map<std::vector<int>, Complex> apply_spread_creation(const std::map<std::vector<int>, Complex>& state,
                                                                 const Matrix& w, int source_mode,
                                                                 Species species) {
    const int dim = static_cast<int>(w.rows());
    std::map<std::vector<int>, Complex> next;
    for (const auto& [basis, amplitude] : state) {
        for (int q = 0; q < dim; ++q) {
            const Complex coupling = w(source_mode - 1, q);
            if (coupling == Complex(0.0, 0.0)) {
                continue;
            }
            if (species == Species::Fermion) {
                if (basis[q] == 1) {
                    continue;
                }
                int occupied_below = 0;
                for (int p = 0; p < q; ++p) {
                    occupied_below += basis[p];
                }
                const double sign = occupied_below % 2 == 0 ? 1.0 : -1.0;
                std::vector<int> raised = basis;
                raised[q] = 1;
                next[std::move(raised)] += amplitude * coupling * sign;
            } else {
                std::vector<int> raised = basis;
                raised[q] += 1;
                const double ladder = std::sqrt(static_cast<double>(raised[q]));
                next[std::move(raised)] += amplitude * coupling * ladder;
            }
        }
    }
    return next;
}

}  // namespace detail

/// Expands the final state term by term: each initially occupied mode
/// contributes its spread-out creation operators, applied right to left, and
/// the product-state normalization 1/sqrt(r_j!) per mode.
inline FockExpansion expand_final_state(const Matrix& w, const OccupationVector& r, Species species) {
    const int dim = static_cast<int>(w.rows());
    if (r.mode_count() != dim) {
        throw std::invalid_argument("expand_final_state: occupation length does not match the matrix");
    }
    if (species == Species::Distinguishable) {
        throw std::invalid_argument("expand_final_state: the Fock expansion covers bosons and fermions");
    }
    validate_occupations(r, species);
    const int n_total = r.total();
    if (n_total > kOracleMaxParticles || dim > kOracleMaxModes) {
        throw CapError("expand_final_state: refusing N = " + std::to_string(n_total) + ", modes = " +
                       std::to_string(dim) + " (caps: N <= " + std::to_string(kOracleMaxParticles) +
                       ", modes <= " + std::to_string(kOracleMaxModes) + ")");
    }

    std::map<std::vector<int>, Complex> state;
    state[std::vector<int>(static_cast<std::size_t>(dim), 0)] = Complex(1.0, 0.0);
    double normalization = 1.0;
    for (int mode = dim; mode >= 1; --mode) {
        const int occ = r.at_mode(mode);
        for (int repeat = 0; repeat < occ; ++repeat) {
            state = detail::apply_spread_creation(state, w, mode, species);
        }
        normalization *= std::sqrt(static_cast<double>(factorial(occ)));
    }

    FockExpansion expansion;
    expansion.species = species;
    expansion.mode_count = dim;
    expansion.particle_total = n_total;
    expansion.terms.reserve(state.size());
    for (auto& [basis, amplitude] : state) {
        expansion.terms.emplace_back(basis, amplitude / normalization);
    }
    return expansion;
}

/// Expectation of the m-mode number correlator, evaluated diagonally in the
/// occupation basis: sum over terms of |amplitude|^2 times the product of
/// falling factorials of the occupations against the output multiplicities.
inline double oracle_correlator(const FockExpansion& expansion, const ModeTuple& outs) {
    if (outs.size() < 1) {
        throw std::invalid_argument("oracle_correlator: empty output tuple");
    }
    // outs is sorted; collapse to (mode, multiplicity) runs.
    std::vector<std::pair<int, int>> powers;
    for (int mode : outs.modes) {
        if (mode < 1 || mode > expansion.mode_count) {
            throw std::invalid_argument("oracle_correlator: output mode index out of range");
        }
        if (!powers.empty() && powers.back().first == mode) {
            ++powers.back().second;
        } else {
            powers.emplace_back(mode, 1);
        }
    }
    double value = 0.0;
    for (const auto& [basis, amplitude] : expansion.terms) {
        double weight = 1.0;
        for (const auto& [mode, multiplicity] : powers) {
            weight *= static_cast<double>(falling_factorial(basis[mode - 1], multiplicity));
            if (weight == 0.0) {
                break;
            }
        }
        value += std::norm(amplitude) * weight;
    }
    return value;
}

/// Counting statistics over one or two watched modes, read off directly by
/// marginalizing |amplitude|^2 over the occupation patterns.
inline CountingDistribution oracle_counting(const FockExpansion& expansion, const std::vector<int>& watched_modes) {
    const int watched = static_cast<int>(watched_modes.size());
    if (watched < 1 || watched > 2) {
        throw std::invalid_argument("oracle_counting: watch one or two modes");
    }
    for (int mode : watched_modes) {
        if (mode < 1 || mode > expansion.mode_count) {
            throw std::invalid_argument("oracle_counting: mode index out of range");
        }
    }
    if (watched == 2 && watched_modes[0] == watched_modes[1]) {
        throw std::invalid_argument("oracle_counting: watched modes must be distinct");
    }
    const int n = expansion.particle_total;
    CountingDistribution dist;
    dist.arity = watched;
    double sum = 0.0;
    if (watched == 1) {
        dist.single.assign(static_cast<std::size_t>(n) + 1, 0.0);
        for (const auto& [basis, amplitude] : expansion.terms) {
            const double p = std::norm(amplitude);
            dist.single[basis[watched_modes[0] - 1]] += p;
            sum += p;
        }
    } else {
        dist.joint.assign(static_cast<std::size_t>(n) + 1,
                          std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0));
        for (const auto& [basis, amplitude] : expansion.terms) {
            const double p = std::norm(amplitude);
            dist.joint[basis[watched_modes[0] - 1]][basis[watched_modes[1] - 1]] += p;
            sum += p;
        }
    }
    dist.normalization_defect = std::abs(sum - 1.0);
    return dist;
}

}  // namespace mpqw
