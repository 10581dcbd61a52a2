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

#ifndef DEPCA_CONFIG_HPP_
#define DEPCA_CONFIG_HPP_

#include <map>
#include <string>

#include "depca/estimator.hpp"
#include "depca/genmodel.hpp"
#include "depca/io.hpp"

namespace depca::cli
{

enum class Mode
{
    generate,
    estimate,
    evaluate,
    approx_check,
    mds,
    pipeline,
};

Mode parse_mode(const std::string& name);
std::string mode_name(Mode mode);

/// Flat key-value view of a config file: sections of `key = value` lines,
/// '#' comments. Keys are addressed as "section.key".
class ConfigFile
{
public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_text(const std::string& text, const std::string& origin);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    /// Canonical "key = value" dump (sorted) used for the manifest hash.
    std::string canonical_text() const;

private:
    std::map<std::string, std::string> values_;
    std::map<std::string, int> lines_;
    std::string origin_;

    [[noreturn]] void fail(const std::string& key, const std::string& what) const;
};

/// Fully resolved experiment description; file values first, CLI flag
/// overrides applied on top by the front-end.
struct ExperimentConfig
{
    Mode mode = Mode::pipeline;
    std::uint64_t seed = 0;
    std::string output_dir = ".";
    io::MatrixFormat format = io::MatrixFormat::csv;
    bool allow_nan = false;

    genmodel::GenerationSpec generation;
    estimator::EstimatorOptions estimation;

    // evaluation / approx-check knobs
    int bins = 100;
    double quantile = 0.001;
    double m11 = 1.0;
    double m22 = 1.0;
    double m12 = 0.95;
    long approx_T = 100000;

    // input paths for file-driven modes
    std::string input_path;
    std::string w_path;
    std::string m_path;
    std::string a_path;
    std::string s_path;
    int dims = 0;  // retained PCA dimensions; 0 = keep the input dimension
    bool dc_normalize = false;

    std::string config_hash;  // FNV-1a of the canonical config text

    static ExperimentConfig from_file(const std::string& path);
    static ExperimentConfig from_config(const ConfigFile& file);

    void validate() const;
};

/// 1-based "i-j,i-j,..." pair list (as in config files) to 0-based pairs.
std::vector<std::pair<int, int>> parse_pattern(const std::string& text);

std::string fnv1a_hex(const std::string& text);

}  // namespace depca::cli

#endif  // DEPCA_CONFIG_HPP_
