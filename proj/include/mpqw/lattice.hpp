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

#include "mpqw/core.hpp"

namespace mpqw {

/// Geometry of the beam-splitter array: L splitters per row acting on 2L
/// modes, applied for a given number of time steps.
struct LatticeConfig {
    int half_modes = 1;  // L; the lattice has 2L modes
    int steps = 0;       // n; number of beam-splitter rows traversed

    int mode_count() const { return 2 * half_modes; }

    void validate() const {
        if (half_modes < 1) {
            throw std::invalid_argument("LatticeConfig: need at least one beam splitter per row");
        }
        if (steps < 0) {
            throw std::invalid_argument("LatticeConfig: negative step count");
        }
    }
};

/// The unbiased 50/50 beam splitter acting on two modes:
/// (1/sqrt(2)) [[1, i], [i, 1]].
inline Matrix beam_splitter() {
    const double s = 1.0 / std::sqrt(2.0);
    Matrix u(2, 2);
    u(0, 0) = Complex(s, 0.0);
    u(0, 1) = Complex(0.0, s);
    u(1, 0) = Complex(0.0, s);
    u(1, 1) = Complex(s, 0.0);
    return u;
}

/// Odd-step matrix V1: direct sum of L beam splitters, coupling mode pairs
/// (1,2), (3,4), ..., (2L-1, 2L).
inline Matrix odd_step(int half_modes) {
    if (half_modes < 1) {
        throw std::invalid_argument("odd_step: need at least one beam splitter per row");
    }
    const int dim = 2 * half_modes;
    Matrix v = Matrix::Zero(dim, dim);
    const Matrix u = beam_splitter();
    for (int block = 0; block < half_modes; ++block) {
        v.block<2, 2>(2 * block, 2 * block) = u;
    }
    return v;
}

/// Cyclic mode shift: entry (i, j) is 1 exactly when i = j + direction
/// modulo the mode count. direction +1 shifts down, -1 shifts up.
inline Matrix cyclic_shift(int dim, int direction) {
    Matrix s = Matrix::Zero(dim, dim);
    for (int j = 0; j < dim; ++j) {
        const int i = ((j + direction) % dim + dim) % dim;
        s(i, j) = Complex(1.0, 0.0);
    }
    return s;
}

/// Even-step matrix V2 = S- V1 S+ with S+/- the cyclic shifts. Couples mode
/// pairs (2,3), (4,5), ..., and periodically (2L, 1).
inline Matrix even_step(int half_modes) {
    if (half_modes < 1) {
        throw std::invalid_argument("even_step: need at least one beam splitter per row");
    }
    const int dim = 2 * half_modes;
    return cyclic_shift(dim, -1) * odd_step(half_modes) * cyclic_shift(dim, +1);
}

/// Transition-amplitude matrix W(n) after n steps. Row index = input mode,
/// column index = output mode, so an amplitude row vector evolves by right
/// multiplication. The first step applies V1, the second V2, and so on;
/// W(0) is the identity. Powers are accumulated by repeated multiplication
/// so repeated runs are bit-identical.
inline Matrix evolution(const LatticeConfig& cfg) {
    cfg.validate();
    const int dim = cfg.mode_count();
    Matrix w = Matrix::Identity(dim, dim);
    if (cfg.steps == 0) {
        return w;
    }
    const Matrix v1 = odd_step(cfg.half_modes);
    const Matrix v2 = even_step(cfg.half_modes);
    for (int step = 1; step <= cfg.steps; ++step) {
        w = w * (step % 2 == 1 ? v1 : v2);
    }
    return w;
}

/// Max-norm of W† W - I.
inline double unitarity_defect(const Matrix& w) {
    const Matrix gram = w.adjoint() * w;
    return (gram - Matrix::Identity(w.rows(), w.cols())).cwiseAbs().maxCoeff();
}

}  // namespace mpqw
