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

#include "mpqw/fock_oracle.hpp"

#include <random>

#include "gtest/gtest.h"
#include "mpqw/counting.hpp"
#include "mpqw/lattice.hpp"
#include "test_support.hpp"

using namespace mpqw;

namespace {

Complex amplitude_of(const FockExpansion& expansion, const std::vector<int>& basis) {
    for (const auto& [occ, amp] : expansion.terms) {
        if (occ == basis) {
            return amp;
        }
    }
    return Complex(0.0, 0.0);
}

}  // namespace

TEST(FockOracle, IdentityEvolutionKeepsTheInputState) {
    const Matrix id = Matrix::Identity(4, 4);
    const OccupationVector r({2, 0, 1, 0});
    const FockExpansion expansion = expand_final_state(id, r, Species::Boson);
    EXPECT_NEAR(expansion.norm(), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(amplitude_of(expansion, {2, 0, 1, 0}) - Complex(1.0, 0.0)), 0.0, 1e-12);
}

TEST(FockOracle, HongOuMandelExpansion) {
    const Matrix u = beam_splitter();
    const OccupationVector r({1, 1});

    const FockExpansion boson = expand_final_state(u, r, Species::Boson);
    EXPECT_NEAR(std::norm(amplitude_of(boson, {2, 0})), 0.5, 1e-12);
    EXPECT_NEAR(std::norm(amplitude_of(boson, {0, 2})), 0.5, 1e-12);
    EXPECT_NEAR(std::norm(amplitude_of(boson, {1, 1})), 0.0, 1e-12);

    const FockExpansion fermion = expand_final_state(u, r, Species::Fermion);
    EXPECT_NEAR(std::norm(amplitude_of(fermion, {1, 1})), 1.0, 1e-12);

    const CountingDistribution joint = oracle_counting(boson, {1, 2});
    EXPECT_NEAR(joint.joint[2][0], 0.5, 1e-12);
    EXPECT_NEAR(joint.joint[0][2], 0.5, 1e-12);
    EXPECT_NEAR(joint.joint[1][1], 0.0, 1e-12);
    const CountingDistribution fermion_joint = oracle_counting(fermion, {1, 2});
    EXPECT_NEAR(fermion_joint.joint[1][1], 1.0, 1e-12);
}

TEST(FockOracle, ExpansionIsNormalized) {
    std::mt19937 rng(5001);
    for (int round = 0; round < 50; ++round) {
        const int dim = 2 + static_cast<int>(rng() % 5);
        const Matrix w = testutil::random_unitary(dim, rng);
        const Species species = round % 2 == 0 ? Species::Boson : Species::Fermion;
        int particles = 1 + static_cast<int>(rng() % 4);
        if (species == Species::Fermion) {
            particles = std::min(particles, dim);
        }
        const OccupationVector r = testutil::random_occupations(dim, particles, species, rng);
        const FockExpansion expansion = expand_final_state(w, r, species);
        EXPECT_NEAR(expansion.norm(), 1.0, 1e-10);
    }
}

TEST(FockOracle, DiagonalCorrelatorValues) {
    const Matrix id = Matrix::Identity(2, 2);
    const FockExpansion expansion = expand_final_state(id, OccupationVector({2, 0}), Species::Boson);
    EXPECT_NEAR(oracle_correlator(expansion, ModeTuple::repeated(1, 1)), 2.0, 1e-12);
    EXPECT_NEAR(oracle_correlator(expansion, ModeTuple::repeated(1, 2)), 2.0, 1e-12);
    EXPECT_NEAR(oracle_correlator(expansion, ModeTuple::repeated(2, 1)), 0.0, 1e-12);
}

TEST(FockOracle, MomentsAgreeWithOwnCountingDistribution) {
    // Internal self-check: pushing the oracle's counting distribution through
    // the forward moment map reproduces the oracle's correlator values.
    std::mt19937 rng(5002);
    for (int round = 0; round < 20; ++round) {
        const int dim = 4;
        const Matrix w = testutil::random_unitary(dim, rng);
        const Species species = round % 2 == 0 ? Species::Boson : Species::Fermion;
        const int particles = 3;
        const OccupationVector r = testutil::random_occupations(dim, particles, species, rng);
        const FockExpansion expansion = expand_final_state(w, r, species);

        const int mode_i = 1 + static_cast<int>(rng() % dim);
        const CountingDistribution single = oracle_counting(expansion, {mode_i});
        const MomentTable single_moments = moments_from_distribution(single);
        for (int m = 1; m <= particles; ++m) {
            EXPECT_NEAR(single_moments.single[m], oracle_correlator(expansion, ModeTuple::repeated(mode_i, m)),
                        1e-12);
        }

        const int mode_j = mode_i % dim + 1;
        const CountingDistribution joint = oracle_counting(expansion, {mode_i, mode_j});
        const MomentTable joint_moments = moments_from_distribution(joint);
        for (int mi = 0; mi <= particles; ++mi) {
            for (int mj = 0; mj <= particles; ++mj) {
                if (mi + mj == 0 || mi + mj > particles) {
                    continue;
                }
                EXPECT_NEAR(joint_moments.joint[mi][mj],
                            oracle_correlator(expansion, ModeTuple::pair_powers(mode_i, mi, mode_j, mj)), 1e-12);
            }
        }
    }
}

TEST(FockOracle, SingleParticleIsSpeciesBlind) {
    std::mt19937 rng(5003);
    const Matrix w = testutil::random_unitary(4, rng);
    const OccupationVector r({0, 1, 0, 0});
    const CountingDistribution boson = oracle_counting(expand_final_state(w, r, Species::Boson), {3});
    const CountingDistribution fermion = oracle_counting(expand_final_state(w, r, Species::Fermion), {3});
    const CountingDistribution classical =
        single_mode_statistics(ParticleRoster::from_occupations(r), w, 3);
    for (int k = 0; k <= 1; ++k) {
        EXPECT_NEAR(boson.single[k], fermion.single[k], 1e-12);
        EXPECT_NEAR(boson.single[k], classical.single[k], 1e-12);
    }
}

TEST(FockOracle, RefusesOversizedRequests) {
    const Matrix big = Matrix::Identity(10, 10);
    EXPECT_THROW(expand_final_state(big, OccupationVector({1, 1, 0, 0, 0, 0, 0, 0, 0, 0}), Species::Boson),
                 CapError);
    const Matrix small = Matrix::Identity(2, 2);
    EXPECT_THROW(expand_final_state(small, OccupationVector({4, 3}), Species::Boson), CapError);
}

TEST(FockOracle, AgreesWithGeneralCorrelator) {
    std::mt19937 rng(5004);
    for (int round = 0; round < 10; ++round) {
        const int dim = 4;
        const LatticeConfig cfg{.half_modes = dim / 2, .steps = 1 + static_cast<int>(rng() % 4)};
        const Matrix w = evolution(cfg);
        const Species species = round % 2 == 0 ? Species::Boson : Species::Fermion;
        const OccupationVector r = testutil::random_occupations(dim, 3, species, rng);
        const FockExpansion expansion = expand_final_state(w, r, species);
        for (int m = 1; m <= 3; ++m) {
            for (int mode = 1; mode <= dim; ++mode) {
                const ModeTuple outs = ModeTuple::repeated(mode, m);
                EXPECT_NEAR(general_correlator(w, r, species, outs).value, oracle_correlator(expansion, outs),
                            1e-10);
            }
        }
    }
}
