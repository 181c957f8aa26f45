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

#include "mpqw/correlator.hpp"
#include "mpqw/distinguishable.hpp"
#include "mpqw/distributions.hpp"

namespace mpqw {

/// Single-mode falling-factorial moments Q_m, m = 0..N, with Q_0 = 1.
inline MomentTable single_mode_moments(const Matrix& w, const OccupationVector& r, Species species, int mode) {
    MomentTable moments;
    moments.arity = 1;
    moments.particle_total = r.total();
    moments.single.assign(static_cast<std::size_t>(moments.particle_total) + 1, 0.0);
    moments.single[0] = 1.0;
    for (int m = 1; m <= moments.particle_total; ++m) {
        moments.single[m] = general_correlator(w, r, species, ModeTuple::repeated(mode, m)).value;
    }
    return moments;
}

/// Two-mode moment grid Q_{mi,mj}, 0..N x 0..N. Cells with mi + mj > N
/// annihilate more particles than exist and are exactly zero; the correlator
/// is never invoked for them.
inline MomentTable two_mode_moments(const Matrix& w, const OccupationVector& r, Species species, int mode_i,
                                    int mode_j) {
    if (mode_i == mode_j) {
        throw std::invalid_argument("two_mode_moments: modes must differ");
    }
    MomentTable moments;
    moments.arity = 2;
    moments.particle_total = r.total();
    const int n = moments.particle_total;
    moments.joint.assign(static_cast<std::size_t>(n) + 1, std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0));
    moments.joint[0][0] = 1.0;
    for (int mi = 0; mi <= n; ++mi) {
        for (int mj = 0; mj <= n; ++mj) {
            if (mi + mj == 0 || mi + mj > n) {
                continue;
            }
            moments.joint[mi][mj] =
                general_correlator(w, r, species, ModeTuple::pair_powers(mode_i, mi, mode_j, mj)).value;
        }
    }
    return moments;
}

/// Single-mode counting statistics for any species: moment inversion for
/// bosons and fermions, exact convolution for distinguishable particles.
inline CountingDistribution single_mode_counting(const Matrix& w, const OccupationVector& r, Species species,
                                                 int mode) {
    if (species == Species::Distinguishable) {
        return single_mode_statistics(ParticleRoster::from_occupations(r), w, mode);
    }
    return invert_single(single_mode_moments(w, r, species, mode));
}

/// Two-mode joint counting statistics for any species.
inline CountingDistribution two_mode_counting(const Matrix& w, const OccupationVector& r, Species species,
                                              int mode_i, int mode_j) {
    if (species == Species::Distinguishable) {
        return joint_counting_distribution(ParticleRoster::from_occupations(r), w, {mode_i, mode_j});
    }
    return invert_two(two_mode_moments(w, r, species, mode_i, mode_j));
}

/// Conditional imbalance distribution averaged over every unordered mode
/// pair (i < j) whose conditioning event has nonzero probability; pairs with
/// an impossible condition are left out and the average renormalized to the
/// included count.
inline std::map<int, double> pair_averaged_statistics(const Matrix& w, const OccupationVector& r, Species species,
                                                      int m) {
    const int dim = static_cast<int>(w.rows());
    const int n = r.total();
    if (m < 0 || m > n) {
        throw std::invalid_argument("pair_averaged_statistics: need 0 <= m <= N");
    }
    std::map<int, double> average;
    for (int dk = -m; dk <= m; dk += 2) {
        average[dk] = 0.0;
    }
    int included = 0;
    for (int mode_i = 1; mode_i <= dim; ++mode_i) {
        for (int mode_j = mode_i + 1; mode_j <= dim; ++mode_j) {
            const CountingDistribution joint = two_mode_counting(w, r, species, mode_i, mode_j);
            const auto slice = try_conditional_imbalance(joint, m);
            if (!slice) {
                continue;
            }
            for (const auto& [dk, p] : *slice) {
                average[dk] += p;
            }
            ++included;
        }
    }
    if (included == 0) {
        throw NumericalHealthError("pair_averaged_statistics: conditioning on " + std::to_string(m) +
                                   " particles is impossible for every mode pair");
    }
    for (auto& [dk, p] : average) {
        p /= included;
    }
    return average;
}

}  // namespace mpqw
