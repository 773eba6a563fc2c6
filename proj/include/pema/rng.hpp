// Copyright 2026 The pema Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>

namespace pema {

/**
 * Seeded random source used by every simulation in the library.
 *
 * The engine is std::mt19937_64, whose output sequence is fixed by the
 * standard. Distributions are implemented here rather than taken from
 * <random>, because the standard leaves their algorithms to the vendor and
 * results must be bit-identical across toolchains. Independent replications
 * use derive_seed(base, index) = base + index.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01();
    /// Uniform on the open interval (0, 1).
    double uniform_open01();
    /// Uniform on [lo, hi]; returns lo when lo == hi.
    double uniform(double lo, double hi);
    /// Standard normal via the Marsaglia polar method.
    double normal();
    bool bernoulli(double prob) { return uniform01() < prob; }
    /// +1 or -1 with equal probability.
    double sign() { return (next_u64() >> 63) != 0 ? 1.0 : -1.0; }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept { return base + index; }

}  // namespace pema
