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

#include "depca/config.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "depca/errors.hpp"

namespace depca::cli
{
namespace
{

std::string trim(const std::string& s)
{
    auto begin = s.find_first_not_of(" \t\r");
    auto end = s.find_last_not_of(" \t\r");
    if (begin == std::string::npos)
    {
        return "";
    }
    return s.substr(begin, end - begin + 1);
}

}  // namespace

Mode parse_mode(const std::string& name)
{
    if (name == "generate") return Mode::generate;
    if (name == "estimate") return Mode::estimate;
    if (name == "evaluate") return Mode::evaluate;
    if (name == "approx-check") return Mode::approx_check;
    if (name == "mds") return Mode::mds;
    if (name == "pipeline") return Mode::pipeline;
    throw config_error("unknown mode '" + name + "'");
}

std::string mode_name(Mode mode)
{
    switch (mode)
    {
        case Mode::generate: return "generate";
        case Mode::estimate: return "estimate";
        case Mode::evaluate: return "evaluate";
        case Mode::approx_check: return "approx-check";
        case Mode::mds: return "mds";
        case Mode::pipeline: return "pipeline";
    }
    return "?";
}

ConfigFile ConfigFile::parse_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw config_error("cannot open config file '" + path + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str(), path);
}

ConfigFile ConfigFile::parse_text(const std::string& text, const std::string& origin)
{
    ConfigFile cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        auto comment = line.find('#');
        if (comment != std::string::npos)
        {
            line = line.substr(0, comment);
        }
        line = trim(line);
        if (line.empty())
        {
            continue;
        }
        if (line.front() == '[')
        {
            if (line.back() != ']' || line.size() < 3)
            {
                throw config_error(origin + ":" + std::to_string(line_no) +
                                   ": malformed section header '" + line + "'");
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
        {
            throw config_error(origin + ":" + std::to_string(line_no) +
                               ": expected 'key = value', got '" + line + "'");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
        {
            throw config_error(origin + ":" + std::to_string(line_no) + ": empty key");
        }
        std::string full = section.empty() ? key : section + "." + key;
        if (cfg.values_.count(full))
        {
            throw config_error(origin + ":" + std::to_string(line_no) + ": duplicate key '" +
                               full + "'");
        }
        cfg.values_[full] = value;
        cfg.lines_[full] = line_no;
    }
    return cfg;
}

bool ConfigFile::has(const std::string& key) const
{
    return values_.count(key) > 0;
}

void ConfigFile::fail(const std::string& key, const std::string& what) const
{
    auto it = lines_.find(key);
    std::string where = origin_;
    if (it != lines_.end())
    {
        where += ":" + std::to_string(it->second);
    }
    throw config_error(where + ": field '" + key + "': " + what);
}

std::string ConfigFile::get_string(const std::string& key, const std::string& fallback) const
{
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double ConfigFile::get_double(const std::string& key, double fallback) const
{
    auto it = values_.find(key);
    if (it == values_.end())
    {
        return fallback;
    }
    try
    {
        std::size_t used = 0;
        double v = std::stod(it->second, &used);
        if (used != it->second.size())
        {
            fail(key, "trailing characters after number '" + it->second + "'");
        }
        return v;
    }
    catch (const config_error&)
    {
        throw;
    }
    catch (const std::exception&)
    {
        fail(key, "expected a number, got '" + it->second + "'");
    }
}

long ConfigFile::get_long(const std::string& key, long fallback) const
{
    auto it = values_.find(key);
    if (it == values_.end())
    {
        return fallback;
    }
    try
    {
        std::size_t used = 0;
        long v = std::stol(it->second, &used);
        if (used != it->second.size())
        {
            fail(key, "trailing characters after integer '" + it->second + "'");
        }
        return v;
    }
    catch (const config_error&)
    {
        throw;
    }
    catch (const std::exception&)
    {
        fail(key, "expected an integer, got '" + it->second + "'");
    }
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) const
{
    auto it = values_.find(key);
    if (it == values_.end())
    {
        return fallback;
    }
    if (it->second == "true" || it->second == "1")
    {
        return true;
    }
    if (it->second == "false" || it->second == "0")
    {
        return false;
    }
    fail(key, "expected true/false, got '" + it->second + "'");
}

std::string ConfigFile::canonical_text() const
{
    std::string out;
    for (const auto& [key, value] : values_)
    {
        out += key + " = " + value + "\n";
    }
    return out;
}

std::vector<std::pair<int, int>> parse_pattern(const std::string& text)
{
    std::vector<std::pair<int, int>> pairs;
    std::istringstream in(text);
    std::string token;
    while (std::getline(in, token, ','))
    {
        token = trim(token);
        if (token.empty())
        {
            continue;
        }
        auto dash = token.find('-');
        if (dash == std::string::npos)
        {
            throw config_error("pattern entry '" + token + "' is not of the form i-j");
        }
        int i = 0, j = 0;
        try
        {
            i = std::stoi(token.substr(0, dash));
            j = std::stoi(token.substr(dash + 1));
        }
        catch (const std::exception&)
        {
            throw config_error("pattern entry '" + token + "' is not of the form i-j");
        }
        if (i < 1 || j < 1 || i >= j)
        {
            throw config_error("pattern entry '" + token + "' must satisfy 1 <= i < j");
        }
        pairs.emplace_back(i - 1, j - 1);
    }
    return pairs;
}

std::string fnv1a_hex(const std::string& text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text)
    {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path)
{
    return from_config(ConfigFile::parse_file(path));
}

ExperimentConfig ExperimentConfig::from_config(const ConfigFile& file)
{
    ExperimentConfig cfg;
    cfg.mode = parse_mode(file.get_string("experiment.mode", "pipeline"));
    cfg.seed = static_cast<std::uint64_t>(file.get_long("experiment.seed", 0));
    cfg.output_dir = file.get_string("experiment.output_dir", ".");
    std::string fmt = file.get_string("experiment.format", "csv");
    if (fmt == "csv")
    {
        cfg.format = io::MatrixFormat::csv;
    }
    else if (fmt == "bin")
    {
        cfg.format = io::MatrixFormat::bin;
    }
    else
    {
        throw config_error("experiment.format must be csv or bin, got '" + fmt + "'");
    }
    cfg.allow_nan = file.get_bool("experiment.allow_nan", false);
    cfg.estimation.threads =
        static_cast<int>(file.get_long("experiment.threads", cfg.estimation.threads));

    auto& gen = cfg.generation;
    gen.d = static_cast<int>(file.get_long("generation.d", gen.d));
    gen.T = file.get_long("generation.T", gen.T);
    gen.shape_diag = file.get_double("generation.shape_diag", gen.shape_diag);
    gen.scale_diag = file.get_double("generation.scale_diag", gen.scale_diag);
    gen.shape_off = file.get_double("generation.shape_off", gen.shape_off);
    gen.scale_off = file.get_double("generation.scale_off", gen.scale_off);
    long block = file.get_long("generation.block", 0);
    std::string pattern = file.get_string("generation.pattern", "");
    if (block > 0 && !pattern.empty())
    {
        throw config_error("generation.block and generation.pattern are mutually exclusive");
    }
    if (block > 0)
    {
        gen.pattern = genmodel::GenerationSpec::block_spec(gen.d, gen.T, static_cast<int>(block)).pattern;
    }
    else if (!pattern.empty())
    {
        gen.pattern = parse_pattern(pattern);
    }

    auto& est = cfg.estimation;
    est.restarts = static_cast<int>(file.get_long("estimator.restarts", est.restarts));
    est.max_outer_iters =
        static_cast<int>(file.get_long("estimator.max_outer_iters", est.max_outer_iters));
    est.convergence_tol = file.get_double("estimator.convergence_tol", est.convergence_tol);
    est.initial_step = file.get_double("estimator.initial_step", est.initial_step);
    est.minibatch_size = file.get_long("estimator.minibatch", est.minibatch_size);
    est.lambda_sparsity = file.get_double("estimator.lambda", est.lambda_sparsity);
    est.ica_max_iters = static_cast<int>(file.get_long("estimator.ica_max_iters", est.ica_max_iters));
    est.ica_tol = file.get_double("estimator.ica_tol", est.ica_tol);
    est.qp_kkt_tol = file.get_double("estimator.qp_kkt_tol", est.qp_kkt_tol);

    cfg.bins = static_cast<int>(file.get_long("eval.bins", cfg.bins));
    cfg.quantile = file.get_double("eval.quantile", cfg.quantile);
    cfg.m11 = file.get_double("eval.m11", cfg.m11);
    cfg.m22 = file.get_double("eval.m22", cfg.m22);
    cfg.m12 = file.get_double("eval.m12", cfg.m12);
    cfg.approx_T = file.get_long("eval.approx_T", cfg.approx_T);

    cfg.input_path = file.get_string("io.input", "");
    cfg.w_path = file.get_string("io.w", "");
    cfg.m_path = file.get_string("io.m", "");
    cfg.a_path = file.get_string("io.a", "");
    cfg.s_path = file.get_string("io.s", "");
    cfg.dims = static_cast<int>(file.get_long("io.dims", 0));
    cfg.dc_normalize = file.get_bool("io.dc_normalize", false);

    cfg.config_hash = fnv1a_hex(file.canonical_text());
    return cfg;
}

void ExperimentConfig::validate() const
{
    if (bins < 2)
    {
        throw config_error("eval.bins must be >= 2");
    }
    if (!(quantile >= 0.0) || quantile >= 0.5)
    {
        throw config_error("eval.quantile must be in [0, 0.5)");
    }
    estimation.validate();
    switch (mode)
    {
        case Mode::generate:
        case Mode::pipeline:
            generation.validate();
            break;
        case Mode::estimate:
            if (input_path.empty())
            {
                throw config_error("estimate mode needs io.input (or --input)");
            }
            break;
        case Mode::evaluate:
            if (input_path.empty() || w_path.empty() || m_path.empty() || a_path.empty())
            {
                throw config_error("evaluate mode needs io.input, io.w, io.m and io.a");
            }
            generation.validate();
            break;
        case Mode::approx_check:
            if (!(m11 > 0.0) || !(m22 > 0.0) || m12 < 0.0)
            {
                throw config_error("approx-check needs m11, m22 > 0 and m12 >= 0");
            }
            if (approx_T < 10)
            {
                throw config_error("approx-check needs approx_T >= 10");
            }
            break;
        case Mode::mds:
            if (m_path.empty())
            {
                throw config_error("mds mode needs io.m (or --input)");
            }
            break;
    }
}

}  // namespace depca::cli
