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

#ifndef DEPCA_IO_HPP_
#define DEPCA_IO_HPP_

#include <string>

#include <Eigen/Dense>

namespace depca::io
{

enum class MatrixFormat
{
    csv,
    bin,
};

struct NamedMatrix
{
    std::string name;
    Eigen::MatrixXd values;
};

/// CSV: header line `# name rows cols`, comma-separated rows with 17
/// significant digits. BIN: 32-byte header (magic "DPCA", version u16,
/// dtype u16 = 1 for float64, rows u32, cols u32, name in the remainder),
/// then a little-endian row-major float64 payload.
void write_matrix(const std::string& path, const Eigen::MatrixXd& matrix, const std::string& name,
                  MatrixFormat format);

/// Reads either format (sniffed from the leading bytes). NaN payloads are
/// rejected unless allow_nan is set.
NamedMatrix read_matrix(const std::string& path, bool allow_nan = false);

}  // namespace depca::io

#endif  // DEPCA_IO_HPP_
