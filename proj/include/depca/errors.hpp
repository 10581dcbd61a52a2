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

#ifndef DEPCA_ERRORS_HPP_
#define DEPCA_ERRORS_HPP_

#include <stdexcept>

namespace depca
{

// Error taxonomy shared across the library. The CLI maps these onto exit
// codes: config/parameter/dimension -> 2, numerical -> 3, io -> 4.

struct parameter_error : std::invalid_argument
{
    using std::invalid_argument::invalid_argument;
};

struct dimension_error : std::invalid_argument
{
    using std::invalid_argument::invalid_argument;
};

struct config_error : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct numerical_error : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

// Non-fatal diagnostics (whitening tolerance, degenerate rows, ...) go to
// stderr so they never mix with result tables on stdout.
void warn(const std::string& message);

}  // namespace depca

#endif  // DEPCA_ERRORS_HPP_
