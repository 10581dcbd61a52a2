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

#ifndef DEPCA_TRIANGULAR_HPP_
#define DEPCA_TRIANGULAR_HPP_

#include <utility>
#include <vector>

#include "depca/errors.hpp"

namespace depca
{

/// Row-major upper-triangular vector ordering
///   m = (m_11..m_1d, m_22..m_2d, ..., m_dd).
/// Every module maps (i, j) pairs through this one class so the flat
/// layout cannot drift between the objective, the QP and the evaluation.
class TriIndex
{
public:
    explicit TriIndex(int d) : d_(d)
    {
        if (d < 1)
        {
            throw dimension_error("TriIndex: dimension must be >= 1");
        }
        pairs_.reserve(static_cast<std::size_t>(size()));
        for (int i = 0; i < d; ++i)
        {
            for (int j = i; j < d; ++j)
            {
                pairs_.emplace_back(i, j);
            }
        }
    }

    int dim() const { return d_; }

    /// Number of upper-triangular entries, d(d+1)/2.
    int size() const { return d_ * (d_ + 1) / 2; }

    /// Flat index of (i, j); arguments in either order.
    int flat(int i, int j) const
    {
        if (i > j)
        {
            std::swap(i, j);
        }
        return i * d_ - i * (i - 1) / 2 + (j - i);
    }

    /// The (i, j) pair (i <= j) stored at flat index k.
    std::pair<int, int> unflat(int k) const { return pairs_.at(static_cast<std::size_t>(k)); }

private:
    int d_;
    std::vector<std::pair<int, int>> pairs_;
};

}  // namespace depca

#endif  // DEPCA_TRIANGULAR_HPP_
