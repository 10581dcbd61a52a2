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

#include "depca/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "depca/errors.hpp"

namespace depca::io
{
namespace
{

constexpr char kMagic[4] = {'D', 'P', 'C', 'A'};
constexpr std::uint16_t kVersion = 1;
constexpr std::uint16_t kDtypeFloat64 = 1;
constexpr std::size_t kHeaderBytes = 32;
constexpr std::size_t kNameBytes = kHeaderBytes - 4 - 2 - 2 - 4 - 4;

static_assert(sizeof(double) == 8, "float64 payload assumes 8-byte double");

void check_nan(const Eigen::MatrixXd& m, bool allow_nan, const std::string& path)
{
    if (!allow_nan && m.hasNaN())
    {
        throw io_error("read_matrix: NaN values in '" + path + "' (pass --allow-nan to accept)");
    }
}

void write_csv(const std::string& path, const Eigen::MatrixXd& m, const std::string& name)
{
    std::ofstream out(path);
    if (!out)
    {
        throw io_error("write_matrix: cannot open '" + path + "' for writing");
    }
    out << "# " << name << " " << m.rows() << " " << m.cols() << "\n";
    char buf[64];
    for (long i = 0; i < m.rows(); ++i)
    {
        for (long j = 0; j < m.cols(); ++j)
        {
            std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            out << buf;
            out << (j + 1 < m.cols() ? ',' : '\n');
        }
    }
    if (!out)
    {
        throw io_error("write_matrix: write to '" + path + "' failed");
    }
}

void write_bin(const std::string& path, const Eigen::MatrixXd& m, const std::string& name)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
    {
        throw io_error("write_matrix: cannot open '" + path + "' for writing");
    }
    char header[kHeaderBytes] = {};
    std::memcpy(header, kMagic, 4);
    std::uint16_t version = kVersion;
    std::uint16_t dtype = kDtypeFloat64;
    std::uint32_t rows = static_cast<std::uint32_t>(m.rows());
    std::uint32_t cols = static_cast<std::uint32_t>(m.cols());
    std::memcpy(header + 4, &version, 2);
    std::memcpy(header + 6, &dtype, 2);
    std::memcpy(header + 8, &rows, 4);
    std::memcpy(header + 12, &cols, 4);
    std::strncpy(header + 16, name.c_str(), kNameBytes - 1);
    out.write(header, kHeaderBytes);

    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (long i = 0; i < m.rows(); ++i)
    {
        for (long j = 0; j < m.cols(); ++j)
        {
            row[static_cast<std::size_t>(j)] = m(i, j);
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(double)));
    }
    if (!out)
    {
        throw io_error("write_matrix: write to '" + path + "' failed");
    }
}

NamedMatrix read_csv(std::istream& in, const std::string& path)
{
    std::string header;
    if (!std::getline(in, header))
    {
        throw io_error("read_matrix: empty file '" + path + "'");
    }
    std::istringstream hs(header);
    std::string hash, name;
    long rows = -1, cols = -1;
    hs >> hash >> name >> rows >> cols;
    if (hash != "#" || rows < 0 || cols < 0 || hs.fail())
    {
        throw io_error("read_matrix: malformed CSV header in '" + path +
                       "' (expected '# name rows cols')");
    }
    NamedMatrix out;
    out.name = name;
    out.values.resize(rows, cols);
    std::string line;
    for (long i = 0; i < rows; ++i)
    {
        if (!std::getline(in, line))
        {
            throw io_error("read_matrix: '" + path + "' truncated at row " + std::to_string(i));
        }
        std::istringstream ls(line);
        std::string cell;
        for (long j = 0; j < cols; ++j)
        {
            if (!std::getline(ls, cell, ','))
            {
                throw io_error("read_matrix: row " + std::to_string(i) + " of '" + path +
                               "' has fewer than " + std::to_string(cols) + " columns");
            }
            try
            {
                out.values(i, j) = std::stod(cell);
            }
            catch (const std::exception&)
            {
                throw io_error("read_matrix: cannot parse '" + cell + "' at (" +
                               std::to_string(i) + ", " + std::to_string(j) + ") in '" + path + "'");
            }
        }
    }
    return out;
}

NamedMatrix read_bin(std::istream& in, const std::string& path)
{
    char header[kHeaderBytes];
    in.read(header, kHeaderBytes);
    if (in.gcount() != static_cast<std::streamsize>(kHeaderBytes))
    {
        throw io_error("read_matrix: '" + path + "' shorter than the 32-byte header");
    }
    std::uint16_t version, dtype;
    std::uint32_t rows, cols;
    std::memcpy(&version, header + 4, 2);
    std::memcpy(&dtype, header + 6, 2);
    std::memcpy(&rows, header + 8, 4);
    std::memcpy(&cols, header + 12, 4);
    if (version != kVersion)
    {
        throw io_error("read_matrix: unsupported version " + std::to_string(version));
    }
    if (dtype != kDtypeFloat64)
    {
        throw io_error("read_matrix: unsupported dtype tag " + std::to_string(dtype));
    }
    NamedMatrix out;
    char name[kNameBytes] = {};
    std::memcpy(name, header + 16, kNameBytes - 1);
    out.name = name;
    out.values.resize(rows, cols);

    const std::size_t expected = static_cast<std::size_t>(rows) * cols * sizeof(double);
    std::vector<double> payload(static_cast<std::size_t>(rows) * cols);
    in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(expected));
    if (in.gcount() != static_cast<std::streamsize>(expected))
    {
        throw io_error("read_matrix: truncated payload in '" + path + "': expected " +
                       std::to_string(expected) + " bytes, got " + std::to_string(in.gcount()));
    }
    for (std::uint32_t i = 0; i < rows; ++i)
    {
        for (std::uint32_t j = 0; j < cols; ++j)
        {
            out.values(i, j) = payload[static_cast<std::size_t>(i) * cols + j];
        }
    }
    return out;
}

}  // namespace

void write_matrix(const std::string& path, const Eigen::MatrixXd& matrix, const std::string& name,
                  MatrixFormat format)
{
    if (format == MatrixFormat::csv)
    {
        write_csv(path, matrix, name);
    }
    else
    {
        write_bin(path, matrix, name);
    }
}

NamedMatrix read_matrix(const std::string& path, bool allow_nan)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw io_error("read_matrix: cannot open '" + path + "'");
    }
    char probe[4] = {};
    in.read(probe, 4);
    in.seekg(0);
    NamedMatrix out;
    if (std::memcmp(probe, kMagic, 4) == 0)
    {
        out = read_bin(in, path);
    }
    else
    {
        out = read_csv(in, path);
    }
    check_nan(out.values, allow_nan, path);
    return out;
}

}  // namespace depca::io
