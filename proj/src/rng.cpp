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

#include "depca/rng.hpp"

#include <iostream>
#include <mutex>
#include <string>

#include "depca/errors.hpp"

namespace depca
{

std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed)
{
    // Expand the seed through splitmix64 so that nearby seeds give
    // unrelated engine states.
    std::uint64_t s = seed;
    engine_.seed(splitmix64(s));
}

Rng Rng::derive(std::uint64_t stream) const
{
    std::uint64_t s = seed_ ^ (0xD1B54A32D192ED03ULL * (stream + 1));
    return Rng(splitmix64(s));
}

double Rng::uniform()
{
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

double Rng::normal()
{
    return normal_(engine_);
}

double Rng::gamma(double shape)
{
    if (!(shape > 0.0))
    {
        throw parameter_error("gamma shape must be positive");
    }
    return std::gamma_distribution<double>(shape, 1.0)(engine_);
}

std::uint64_t Rng::next_u64()
{
    return engine_();
}

void warn(const std::string& message)
{
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    std::cerr << "[depca] warning: " << message << "\n";
}

}  // namespace depca
