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

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "depca/errors.hpp"
#include "depca/pipeline.hpp"

namespace
{

struct CommonFlags
{
    std::string config_path;
    std::int64_t seed = -1;
    int threads = 0;
    int dims = -1;
    int restarts = 0;
    double lambda = -1.0;
    int bins = 0;
    std::string output_dir;
    std::string format;
    bool allow_nan = false;
};

void add_common(CLI::App* cmd, CommonFlags& f)
{
    cmd->add_option("--config", f.config_path, "config file (key = value sections)");
    cmd->add_option("--seed", f.seed, "master seed; overrides the config");
    cmd->add_option("--threads", f.threads, "restart-level parallelism");
    cmd->add_option("--dims", f.dims, "retained PCA dimensions (0 = keep all)");
    cmd->add_option("--restarts", f.restarts, "estimator restarts");
    cmd->add_option("--lambda", f.lambda, "sparsity penalty on m");
    cmd->add_option("--bins", f.bins, "histogram bins per axis");
    cmd->add_option("--output-dir", f.output_dir, "artifact directory");
    cmd->add_option("--format", f.format, "matrix file format: csv or bin")
        ->check(CLI::IsMember({"csv", "bin"}));
    cmd->add_flag("--allow-nan", f.allow_nan, "accept NaN values when reading matrices");
}

depca::cli::ExperimentConfig build_config(const CommonFlags& f, depca::cli::Mode mode)
{
    using depca::cli::ConfigFile;
    using depca::cli::ExperimentConfig;
    ExperimentConfig cfg = f.config_path.empty()
                               ? ExperimentConfig::from_config(ConfigFile::parse_text("", "<args>"))
                               : ExperimentConfig::from_file(f.config_path);
    cfg.mode = mode;
    if (f.seed >= 0)
    {
        cfg.seed = static_cast<std::uint64_t>(f.seed);
    }
    if (f.threads > 0)
    {
        cfg.estimation.threads = f.threads;
    }
    if (f.dims >= 0)
    {
        cfg.dims = f.dims;
    }
    if (f.restarts > 0)
    {
        cfg.estimation.restarts = f.restarts;
    }
    if (f.lambda >= 0.0)
    {
        cfg.estimation.lambda_sparsity = f.lambda;
    }
    if (f.bins > 0)
    {
        cfg.bins = f.bins;
    }
    if (!f.output_dir.empty())
    {
        cfg.output_dir = f.output_dir;
    }
    if (!f.format.empty())
    {
        cfg.format = f.format == "bin" ? depca::io::MatrixFormat::bin : depca::io::MatrixFormat::csv;
    }
    if (f.allow_nan)
    {
        cfg.allow_nan = true;
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"depca: linear non-Gaussian components and their dependency structure"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string input, w_path, m_path, a_path, s_path;
    double m11 = -1.0, m22 = -1.0, m12 = -1.0;
    long approx_T = 0;

    auto* generate = app.add_subcommand("generate", "draw a synthetic dataset");
    add_common(generate, flags);

    auto* estimate = app.add_subcommand("estimate", "whiten and fit W, M");
    add_common(estimate, flags);
    estimate->add_option("--input", input, "data matrix (rows = samples)");

    auto* evaluate = app.add_subcommand("evaluate", "score an estimate against ground truth");
    add_common(evaluate, flags);
    evaluate->add_option("--input", input, "data matrix used for estimation");
    evaluate->add_option("--w", w_path, "estimated unmixing matrix");
    evaluate->add_option("--m", m_path, "estimated dependency matrix");
    evaluate->add_option("--a", a_path, "true mixing matrix");
    evaluate->add_option("--s", s_path, "true sources (optional)");

    auto* approx = app.add_subcommand("approx-check", "2-D density approximation measures");
    add_common(approx, flags);
    approx->add_option("--m11", m11, "diagonal dependency m11");
    approx->add_option("--m22", m22, "diagonal dependency m22");
    approx->add_option("--m12", m12, "pair dependency m12");
    approx->add_option("--T", approx_T, "sample count");

    auto* mds = app.add_subcommand("mds", "distance matrix and 2-D embedding of M");
    add_common(mds, flags);
    mds->add_option("--input", m_path, "dependency matrix");

    auto* pipeline = app.add_subcommand("pipeline", "generate + estimate + evaluate");
    add_common(pipeline, flags);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try
    {
        depca::cli::Mode mode = depca::cli::Mode::pipeline;
        if (generate->parsed()) mode = depca::cli::Mode::generate;
        if (estimate->parsed()) mode = depca::cli::Mode::estimate;
        if (evaluate->parsed()) mode = depca::cli::Mode::evaluate;
        if (approx->parsed()) mode = depca::cli::Mode::approx_check;
        if (mds->parsed()) mode = depca::cli::Mode::mds;

        depca::cli::ExperimentConfig cfg = build_config(flags, mode);
        if (!input.empty()) cfg.input_path = input;
        if (!w_path.empty()) cfg.w_path = w_path;
        if (!m_path.empty()) cfg.m_path = m_path;
        if (!a_path.empty()) cfg.a_path = a_path;
        if (!s_path.empty()) cfg.s_path = s_path;
        if (m11 > 0.0) cfg.m11 = m11;
        if (m22 > 0.0) cfg.m22 = m22;
        if (m12 >= 0.0) cfg.m12 = m12;
        if (approx_T > 0) cfg.approx_T = approx_T;

        depca::cli::run(cfg);
        return 0;
    }
    catch (const depca::config_error& e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    catch (const depca::parameter_error& e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    catch (const depca::dimension_error& e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    catch (const depca::io_error& e)
    {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    }
    catch (const depca::numerical_error& e)
    {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
