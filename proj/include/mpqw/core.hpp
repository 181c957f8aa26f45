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

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpqw {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

enum class Species { Boson, Fermion, Distinguishable };

inline const char* species_name(Species s) {
    switch (s) {
        case Species::Boson: return "boson";
        case Species::Fermion: return "fermion";
        case Species::Distinguishable: return "distinguishable";
    }
    return "unknown";
}

/// Raised when a request exceeds a hard size cap (exact 64-bit factorials,
/// full Fock-space expansion).
class CapError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Raised when a numerical health gate trips: normalization defect beyond
/// tolerance, or conditioning on an event of zero probability.
class NumericalHealthError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Raised by configuration validation; carries every violation found, not
/// just the first one.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(std::vector<std::string> messages)
        : std::runtime_error(join(messages)), messages_(std::move(messages)) {}
    explicit ConfigError(const std::string& message) : ConfigError(std::vector<std::string>{message}) {}

    const std::vector<std::string>& messages() const { return messages_; }

  private:
    static std::string join(const std::vector<std::string>& messages) {
        std::string all;
        for (const auto& m : messages) {
            if (!all.empty()) all += "\n";
            all += m;
        }
        return all;
    }
    std::vector<std::string> messages_;
};

// 20! is the largest factorial that fits in 64 bits.
inline constexpr int kMaxExactFactorial = 20;

/// Exact n! as a 64-bit integer. Refuses n > 20 instead of overflowing.
inline std::uint64_t factorial(int n) {
    static constexpr std::uint64_t table[kMaxExactFactorial + 1] = {
        1ull,
        1ull,
        2ull,
        6ull,
        24ull,
        120ull,
        720ull,
        5040ull,
        40320ull,
        362880ull,
        3628800ull,
        39916800ull,
        479001600ull,
        6227020800ull,
        87178291200ull,
        1307674368000ull,
        20922789888000ull,
        355687428096000ull,
        6402373705728000ull,
        121645100408832000ull,
        2432902008176640000ull,
    };
    if (n < 0) {
        throw std::invalid_argument("factorial: negative argument");
    }
    if (n > kMaxExactFactorial) {
        throw CapError("factorial(" + std::to_string(n) + ") exceeds the exact 64-bit range (cap " +
                       std::to_string(kMaxExactFactorial) + "!)");
    }
    return table[n];
}

/// n! / (n - m)!, i.e. the number of ordered m-draws from n items.
/// Zero when m > n, one when m == 0.
inline std::uint64_t falling_factorial(int n, int m) {
    if (m < 0) {
        throw std::invalid_argument("falling_factorial: negative order");
    }
    if (m > n) {
        return 0;
    }
    return factorial(n) / factorial(n - m);
}

}  // namespace mpqw
