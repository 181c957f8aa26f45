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

#include <algorithm>
#include <bit>

#include "mpqw/combinatorics.hpp"

namespace mpqw {

/// Output-mode tuple (i_1, ..., i_m), 1-based, repetitions allowed. Stored in
/// non-decreasing order; the correlator value does not depend on the order.
struct ModeTuple {
    std::vector<int> modes;

    ModeTuple() = default;
    explicit ModeTuple(std::vector<int> m) : modes(std::move(m)) { std::sort(modes.begin(), modes.end()); }

    /// The tuple (mode, mode, ..., mode) with `count` repetitions.
    static ModeTuple repeated(int mode, int count) {
        return ModeTuple(std::vector<int>(static_cast<std::size_t>(count), mode));
    }

    /// Tuple with mode_i repeated count_i times and mode_j repeated count_j times.
    static ModeTuple pair_powers(int mode_i, int count_i, int mode_j, int count_j) {
        std::vector<int> m;
        m.reserve(static_cast<std::size_t>(count_i + count_j));
        m.insert(m.end(), static_cast<std::size_t>(count_i), mode_i);
        m.insert(m.end(), static_cast<std::size_t>(count_j), mode_j);
        return ModeTuple(std::move(m));
    }

    int size() const { return static_cast<int>(modes.size()); }
};

struct CorrelatorResult {
    double value = 0.0;           // expectation value of the m-mode number correlator
    std::int64_t term_count = 0;  // incoherent summands evaluated
};

/// Mean occupation of one output mode: sum_k |W_ki|^2 r_k. The same for
/// bosons, fermions and distinguishable particles.
inline double mean_occupation(const Matrix& w, const OccupationVector& r, int mode) {
    const int dim = static_cast<int>(w.rows());
    if (r.mode_count() != dim) {
        throw std::invalid_argument("mean_occupation: occupation length does not match the matrix");
    }
    if (mode < 1 || mode > dim) {
        throw std::invalid_argument("mean_occupation: mode index out of range");
    }
    double mean = 0.0;
    for (int k = 0; k < dim; ++k) {
        mean += std::norm(w(k, mode - 1)) * r.occupations[k];
    }
    return mean;
}

/// Two-mode number correlator for distinct output modes i != j, evaluated as
/// the pair sum with the exchange term (+ for bosons, - for fermions) plus
/// the same-origin sum, which carries no exchange.
inline double two_mode_correlator(const Matrix& w, const OccupationVector& r, Species species, int mode_i,
                                  int mode_j) {
    const int dim = static_cast<int>(w.rows());
    if (r.mode_count() != dim) {
        throw std::invalid_argument("two_mode_correlator: occupation length does not match the matrix");
    }
    if (mode_i < 1 || mode_i > dim || mode_j < 1 || mode_j > dim) {
        throw std::invalid_argument("two_mode_correlator: mode index out of range");
    }
    if (mode_i == mode_j) {
        throw std::invalid_argument("two_mode_correlator: output modes must differ (use general_correlator "
                                    "with a repeated mode for same-mode moments)");
    }
    if (species == Species::Distinguishable) {
        throw std::invalid_argument("two_mode_correlator: defined for bosons and fermions");
    }
    validate_occupations(r, species);
    const double exchange_sign = species == Species::Fermion ? -1.0 : 1.0;
    const int ci = mode_i - 1;
    const int cj = mode_j - 1;
    double value = 0.0;
    for (int k = 0; k < dim; ++k) {
        if (r.occupations[k] == 0) {
            continue;
        }
        for (int l = k + 1; l < dim; ++l) {
            if (r.occupations[l] == 0) {
                continue;
            }
            const Complex amp = w(k, ci) * w(l, cj) + exchange_sign * w(k, cj) * w(l, ci);
            value += std::norm(amp) * r.occupations[k] * r.occupations[l];
        }
        value += std::norm(w(k, ci) * w(k, cj)) * r.occupations[k] * (r.occupations[k] - 1);
    }
    return value;
}

/// Permanent of a square complex matrix by Ryser's inclusion-exclusion with
/// Gray-code column updates, O(2^m m). Exponentially cheaper than the m!-term
/// definition but identical in exact arithmetic.
inline Complex ryser_permanent(const Matrix& a) {
    if (a.rows() != a.cols()) {
        throw std::invalid_argument("ryser_permanent: matrix must be square");
    }
    const int m = static_cast<int>(a.rows());
    if (m == 0) {
        return Complex(1.0, 0.0);
    }
    if (m > 30) {
        throw CapError("ryser_permanent: dimension " + std::to_string(m) + " exceeds the 2^m budget");
    }
    std::vector<Complex> row_sum(static_cast<std::size_t>(m), Complex(0.0, 0.0));
    Complex total(0.0, 0.0);
    int active_columns = 0;
    const std::uint64_t subsets = std::uint64_t(1) << m;
    for (std::uint64_t counter = 1; counter < subsets; ++counter) {
        // Gray code: exactly one column enters or leaves per iteration.
        const int column = std::countr_zero(counter);
        const std::uint64_t gray = counter ^ (counter >> 1);
        const bool entered = (gray >> column) & 1u;
        if (entered) {
            for (int row = 0; row < m; ++row) {
                row_sum[row] += a(row, column);
            }
            ++active_columns;
        } else {
            for (int row = 0; row < m; ++row) {
                row_sum[row] -= a(row, column);
            }
            --active_columns;
        }
        Complex product(1.0, 0.0);
        for (int row = 0; row < m; ++row) {
            product *= row_sum[row];
        }
        total += (active_columns % 2 == 0 ? 1.0 : -1.0) * product;
    }
    return (m % 2 == 0 ? 1.0 : -1.0) * total;
}

/// Coherent sum over all distinct permutations sigma of the source tuple q of
/// f(sigma) * prod_j W[sigma_j][outs_j], with f = 1 for bosons and the sign
/// of sigma for fermions. Bosons: permanent of the row-repeated amplitude
/// matrix divided by prod_l mu_l!, since permuting identical rows repeats
/// each distinct permutation that many times. Fermions: determinant, which is
/// automatically zero for a repeated output column.
inline Complex coherent_sum_kernel(const SourceMultiset& q, const ModeTuple& outs, const Matrix& w,
                                   Species species) {
    const int m = q.size();
    if (m != outs.size()) {
        throw std::invalid_argument("coherent_sum_kernel: source tuple and output tuple differ in length");
    }
    if (m < 1) {
        throw std::invalid_argument("coherent_sum_kernel: empty tuple");
    }
    if (species == Species::Distinguishable) {
        throw std::invalid_argument("coherent_sum_kernel: no coherent amplitudes for distinguishable particles");
    }
    if (species == Species::Fermion) {
        // Pauli exclusion: a repeated output column nulls the determinant;
        // return the exact zero rather than LU round-off.
        for (int col = 1; col < m; ++col) {
            if (outs.modes[col] == outs.modes[col - 1]) {
                return Complex(0.0, 0.0);
            }
        }
    }
    Matrix amp(m, m);
    for (int row = 0; row < m; ++row) {
        for (int col = 0; col < m; ++col) {
            amp(row, col) = w(q.modes[row] - 1, outs.modes[col] - 1);
        }
    }
    if (species == Species::Fermion) {
        return amp.determinant();
    }
    std::uint64_t repeats = 1;
    std::size_t a = 0;
    while (a < q.modes.size()) {
        std::size_t b = a;
        while (b < q.modes.size() && q.modes[b] == q.modes[a]) {
            ++b;
        }
        repeats *= factorial(static_cast<int>(b - a));
        a = b;
    }
    return ryser_permanent(amp) / static_cast<double>(repeats);
}

/// General m-mode number correlator: incoherent sum over all source
/// multisets q of prefactor(q) * |coherent sum|^2, accumulated in the fixed
/// lexicographic enumeration order so results are reproducible bit for bit.
inline CorrelatorResult general_correlator(const Matrix& w, const OccupationVector& r, Species species,
                                           const ModeTuple& outs) {
    const int dim = static_cast<int>(w.rows());
    if (r.mode_count() != dim) {
        throw std::invalid_argument("general_correlator: occupation length does not match the matrix");
    }
    if (species == Species::Distinguishable) {
        throw std::invalid_argument("general_correlator: defined for bosons and fermions");
    }
    validate_occupations(r, species);
    const int n_total = r.total();
    if (n_total > kMaxExactFactorial) {
        throw CapError("general_correlator: more than " + std::to_string(kMaxExactFactorial) +
                       " particles exceeds the exact-factorial range");
    }
    const int m = outs.size();
    if (m < 1 || m > n_total) {
        throw std::invalid_argument("general_correlator: tuple length must satisfy 1 <= m <= N");
    }
    for (int mode : outs.modes) {
        if (mode < 1 || mode > dim) {
            throw std::invalid_argument("general_correlator: output mode index out of range");
        }
    }

    CorrelatorResult result;
    for_each_source(r, m, [&](const SourceMultiset& q) {
        const double prefactor = static_cast<double>(multiplicity_prefactor(r, q));
        const Complex amplitude = coherent_sum_kernel(q, outs, w, species);
        result.value += prefactor * std::norm(amplitude);
        ++result.term_count;
    });
    return result;
}

}  // namespace mpqw
