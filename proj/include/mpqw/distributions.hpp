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

#include <cmath>
#include <map>
#include <optional>

#include "mpqw/core.hpp"

namespace mpqw {

// Inversion refuses to proceed when |sum P - 1| exceeds this; such a defect
// signals numerical trouble upstream, not harmless rounding.
inline constexpr double kNormalizationGate = 1e-6;

/// Falling-factorial moments: Q_m = <k!/(k-m)!> for one mode, or the grid
/// Q_{mi,mj} for a mode pair, with m = 0..N. Q_0 (and Q_{0,0}) is the state
/// norm, 1.
struct MomentTable {
    int arity = 1;
    int particle_total = 0;                 // N
    std::vector<double> single;             // arity 1: index m
    std::vector<std::vector<double>> joint; // arity 2: index [mi][mj]
};

/// Counting probabilities P(k) or P(k_i, k_j) for k = 0..N. Entries below
/// zero by floating-point cancellation are clamped to 0 once the
/// normalization gate has passed; min_entry keeps the most negative raw
/// value for health checks.
struct CountingDistribution {
    int arity = 1;
    std::vector<double> single;
    std::vector<std::vector<double>> joint;
    double normalization_defect = 0.0;
    double min_entry = 0.0;

    int particle_total() const {
        return arity == 1 ? static_cast<int>(single.size()) - 1 : static_cast<int>(joint.size()) - 1;
    }
};

namespace detail {

inline double parity_sign(int exponent) { return exponent % 2 == 0 ? 1.0 : -1.0; }

}  // namespace detail

/// Inverts the single-mode falling-factorial relation:
///   P(k) = sum_{m>=k} (-1)^(m-k) Q_m / (k! (m-k)!).
/// The linear system behind it is triangular; this closed form is its exact
/// solution (covered by tests against direct substitution).
inline CountingDistribution invert_single(const MomentTable& moments) {
    if (moments.arity != 1) {
        throw std::invalid_argument("invert_single: expected single-mode moments");
    }
    const int n = moments.particle_total;
    if (static_cast<int>(moments.single.size()) != n + 1) {
        throw std::invalid_argument("invert_single: need all moments m = 0..N");
    }
    CountingDistribution dist;
    dist.arity = 1;
    dist.single.assign(static_cast<std::size_t>(n) + 1, 0.0);
    for (int k = 0; k <= n; ++k) {
        double acc = 0.0;
        for (int m = k; m <= n; ++m) {
            acc += detail::parity_sign(m - k) * moments.single[m] /
                   (static_cast<double>(factorial(k)) * static_cast<double>(factorial(m - k)));
        }
        dist.single[k] = acc;
    }
    double sum = 0.0;
    double min_entry = 0.0;
    for (double p : dist.single) {
        sum += p;
        min_entry = std::min(min_entry, p);
    }
    dist.normalization_defect = std::abs(sum - 1.0);
    dist.min_entry = min_entry;
    if (dist.normalization_defect > kNormalizationGate) {
        throw NumericalHealthError("invert_single: normalization defect " +
                                   std::to_string(dist.normalization_defect) + " exceeds the gate");
    }
    for (double& p : dist.single) {
        p = std::max(p, 0.0);
    }
    return dist;
}

/// Separable double inversion of the two-mode moment grid.
inline CountingDistribution invert_two(const MomentTable& moments) {
    if (moments.arity != 2) {
        throw std::invalid_argument("invert_two: expected two-mode moments");
    }
    const int n = moments.particle_total;
    if (static_cast<int>(moments.joint.size()) != n + 1) {
        throw std::invalid_argument("invert_two: need the full grid m_i, m_j = 0..N");
    }
    CountingDistribution dist;
    dist.arity = 2;
    dist.joint.assign(static_cast<std::size_t>(n) + 1, std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0));
    for (int ki = 0; ki <= n; ++ki) {
        for (int kj = 0; kj <= n; ++kj) {
            double acc = 0.0;
            for (int mi = ki; mi <= n; ++mi) {
                for (int mj = kj; mj <= n; ++mj) {
                    acc += detail::parity_sign(mi - ki + mj - kj) * moments.joint[mi][mj] /
                           (static_cast<double>(factorial(ki)) * static_cast<double>(factorial(mi - ki)) *
                            static_cast<double>(factorial(kj)) * static_cast<double>(factorial(mj - kj)));
                }
            }
            dist.joint[ki][kj] = acc;
        }
    }
    double sum = 0.0;
    double min_entry = 0.0;
    for (const auto& row : dist.joint) {
        for (double p : row) {
            sum += p;
            min_entry = std::min(min_entry, p);
        }
    }
    dist.normalization_defect = std::abs(sum - 1.0);
    dist.min_entry = min_entry;
    if (dist.normalization_defect > kNormalizationGate) {
        throw NumericalHealthError("invert_two: normalization defect " +
                                   std::to_string(dist.normalization_defect) + " exceeds the gate");
    }
    for (auto& row : dist.joint) {
        for (double& p : row) {
            p = std::max(p, 0.0);
        }
    }
    return dist;
}

/// Forward map from a counting distribution back to falling-factorial
/// moments: Q_m = sum_k P(k) k!/(k-m)! (and the separable two-mode analogue).
inline MomentTable moments_from_distribution(const CountingDistribution& dist) {
    MomentTable moments;
    moments.arity = dist.arity;
    const int n = dist.particle_total();
    moments.particle_total = n;
    if (dist.arity == 1) {
        moments.single.assign(static_cast<std::size_t>(n) + 1, 0.0);
        for (int m = 0; m <= n; ++m) {
            double acc = 0.0;
            for (int k = m; k <= n; ++k) {
                acc += dist.single[k] * static_cast<double>(falling_factorial(k, m));
            }
            moments.single[m] = acc;
        }
        return moments;
    }
    if (dist.arity != 2) {
        throw std::invalid_argument("moments_from_distribution: arity must be 1 or 2");
    }
    moments.joint.assign(static_cast<std::size_t>(n) + 1, std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0));
    for (int mi = 0; mi <= n; ++mi) {
        for (int mj = 0; mj <= n; ++mj) {
            double acc = 0.0;
            for (int ki = mi; ki <= n; ++ki) {
                for (int kj = mj; kj <= n; ++kj) {
                    acc += dist.joint[ki][kj] * static_cast<double>(falling_factorial(ki, mi)) *
                           static_cast<double>(falling_factorial(kj, mj));
                }
            }
            moments.joint[mi][mj] = acc;
        }
    }
    return moments;
}

/// Conditional distribution of the particle imbalance dk = k_i - k_j given
/// k_i + k_j = m: the diagonal slice of the joint distribution, renormalized.
/// Returns nothing when the conditioning event has zero probability.
inline std::optional<std::map<int, double>> try_conditional_imbalance(const CountingDistribution& dist, int m) {
    if (dist.arity != 2) {
        throw std::invalid_argument("conditional_imbalance: need a two-mode distribution");
    }
    const int n = dist.particle_total();
    if (m < 0 || m > n) {
        throw std::invalid_argument("conditional_imbalance: need 0 <= m <= N");
    }
    std::map<int, double> slice;
    double total = 0.0;
    for (int ki = std::max(0, m - n); ki <= std::min(m, n); ++ki) {
        const int kj = m - ki;
        const double p = std::max(dist.joint[ki][kj], 0.0);
        slice[ki - kj] = p;
        total += p;
    }
    if (!(total > 0.0)) {
        return std::nullopt;
    }
    for (auto& [dk, p] : slice) {
        p /= total;
    }
    return slice;
}

/// Throwing variant of try_conditional_imbalance.
inline std::map<int, double> conditional_imbalance(const CountingDistribution& dist, int m) {
    auto slice = try_conditional_imbalance(dist, m);
    if (!slice) {
        throw NumericalHealthError("conditional_imbalance: conditioning on " + std::to_string(m) +
                                   " particles in the watched modes has zero probability");
    }
    return *slice;
}

}  // namespace mpqw
