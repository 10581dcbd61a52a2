/*
 * Copyright 2026 The depca authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef DEPCA_RNG_HPP_
#define DEPCA_RNG_HPP_

#include <cstdint>
#include <random>

namespace depca
{

std::uint64_t splitmix64(std::uint64_t& state);

/// Seeded RNG handle. Named sub-streams derived with derive() are
/// statistically independent and reproducible, which lets stages and
/// restarts draw in parallel without sharing state.
class Rng
{
public:
    explicit Rng(std::uint64_t seed);

    /// Independent stream keyed by (seed, stream id).
    Rng derive(std::uint64_t stream) const;

    double uniform();            // [0, 1)
    double normal();             // N(0, 1)
    double gamma(double shape);  // Gamma(shape, 1), shape > 0
    std::uint64_t next_u64();

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace depca

#endif  // DEPCA_RNG_HPP_
