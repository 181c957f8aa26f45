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
#include "mpqw/distributions.hpp"

namespace mpqw {

/// Distinguishable particles as labeled, independent walkers: one start mode
/// per particle.
struct ParticleRoster {
    std::vector<int> start_modes;  // 1-based

    static ParticleRoster from_occupations(const OccupationVector& r) {
        ParticleRoster roster;
        roster.start_modes.reserve(static_cast<std::size_t>(r.total()));
        for (int mode = 1; mode <= r.mode_count(); ++mode) {
            for (int c = 0; c < r.at_mode(mode); ++c) {
                roster.start_modes.push_back(mode);
            }
        }
        return roster;
    }

    int size() const { return static_cast<int>(start_modes.size()); }
};

/// Output-mode distribution of one walker started in `start_mode`:
/// p(i) = |W_si|^2. Sums to one by unitarity.
inline std::vector<double> single_particle_distribution(const Matrix& w, int start_mode) {
    const int dim = static_cast<int>(w.rows());
    if (start_mode < 1 || start_mode > dim) {
        throw std::invalid_argument("single_particle_distribution: mode index out of range");
    }
    std::vector<double> p(static_cast<std::size_t>(dim), 0.0);
    for (int i = 0; i < dim; ++i) {
        p[i] = std::norm(w(start_mode - 1, i));
    }
    return p;
}

/// Exact counting distribution over one or two watched output modes, by
/// sequential convolution of the per-particle categorical distributions
/// (p_watched..., 1 - sum). O(N * N^w) and exactly normalized.
inline CountingDistribution joint_counting_distribution(const ParticleRoster& roster, const Matrix& w,
                                                        const std::vector<int>& watched_modes) {
    const int dim = static_cast<int>(w.rows());
    const int watched = static_cast<int>(watched_modes.size());
    if (watched < 1 || watched > 2) {
        throw std::invalid_argument("joint_counting_distribution: watch one or two modes");
    }
    for (int mode : watched_modes) {
        if (mode < 1 || mode > dim) {
            throw std::invalid_argument("joint_counting_distribution: mode index out of range");
        }
    }
    if (watched == 2 && watched_modes[0] == watched_modes[1]) {
        throw std::invalid_argument("joint_counting_distribution: watched modes must be distinct");
    }
    const int n = roster.size();
    if (n < 1) {
        throw std::invalid_argument("joint_counting_distribution: empty roster");
    }

    CountingDistribution dist;
    dist.arity = watched;
    if (watched == 1) {
        std::vector<double> p(static_cast<std::size_t>(n) + 1, 0.0);
        p[0] = 1.0;
        for (int particle = 0; particle < n; ++particle) {
            const double hit = std::norm(w(roster.start_modes[particle] - 1, watched_modes[0] - 1));
            const double miss = std::max(1.0 - hit, 0.0);
            for (int k = particle + 1; k >= 1; --k) {
                p[k] = p[k] * miss + p[k - 1] * hit;
            }
            p[0] *= miss;
        }
        dist.single = std::move(p);
        double sum = 0.0;
        for (double v : dist.single) {
            sum += v;
        }
        dist.normalization_defect = std::abs(sum - 1.0);
        return dist;
    }

    std::vector<std::vector<double>> p(static_cast<std::size_t>(n) + 1,
                                       std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0));
    p[0][0] = 1.0;
    for (int particle = 0; particle < n; ++particle) {
        const int s = roster.start_modes[particle] - 1;
        const double hit_i = std::norm(w(s, watched_modes[0] - 1));
        const double hit_j = std::norm(w(s, watched_modes[1] - 1));
        const double miss = std::max(1.0 - hit_i - hit_j, 0.0);
        for (int ki = particle + 1; ki >= 0; --ki) {
            for (int kj = particle + 1 - ki; kj >= 0; --kj) {
                double v = p[ki][kj] * miss;
                if (ki > 0) {
                    v += p[ki - 1][kj] * hit_i;
                }
                if (kj > 0) {
                    v += p[ki][kj - 1] * hit_j;
                }
                p[ki][kj] = v;
            }
        }
    }
    dist.joint = std::move(p);
    double sum = 0.0;
    for (const auto& row : dist.joint) {
        for (double v : row) {
            sum += v;
        }
    }
    dist.normalization_defect = std::abs(sum - 1.0);
    return dist;
}

/// Counting statistics of a single watched mode (the Poisson-binomial law of
/// the per-particle hit probabilities).
inline CountingDistribution single_mode_statistics(const ParticleRoster& roster, const Matrix& w, int mode) {
    return joint_counting_distribution(roster, w, {mode});
}

}  // namespace mpqw
