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

#include "depca/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "depca/errors.hpp"
#include "depca/eval.hpp"
#include "depca/preprocess.hpp"

namespace depca::cli
{
namespace
{

constexpr const char* kVersion = "0.1.0";

// Stage ids for deterministic sub-seed derivation.
constexpr std::uint64_t kStageGenerate = 1;
constexpr std::uint64_t kStageEstimate = 2;
constexpr std::uint64_t kStageApprox = 4;

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct RunContext
{
    const ExperimentConfig& cfg;
    fs::path out;
    nlohmann::json stages = nlohmann::json::array();
    std::vector<std::string> outputs;
    Clock::time_point stage_start = Clock::now();

    explicit RunContext(const ExperimentConfig& config) : cfg(config), out(config.output_dir) {}

    void begin_stage() { stage_start = Clock::now(); }

    void end_stage(const std::string& name)
    {
        double seconds = std::chrono::duration<double>(Clock::now() - stage_start).count();
        stages.push_back({{"name", name}, {"seconds", seconds}});
    }

    std::string ext() const { return cfg.format == io::MatrixFormat::csv ? ".csv" : ".bin"; }

    void write(const std::string& name, const Eigen::MatrixXd& matrix)
    {
        std::string file = name + ext();
        io::write_matrix((out / file).string(), matrix, name, cfg.format);
        outputs.push_back(file);
    }

    void write_table(const std::string& file, const std::string& text)
    {
        std::ofstream s(out / file);
        if (!s || !(s << text))
        {
            throw io_error("cannot write '" + (out / file).string() + "'");
        }
        outputs.push_back(file);
    }

    void write_manifest()
    {
        nlohmann::json manifest;
        manifest["tool"] = "depca";
        manifest["version"] = kVersion;
        manifest["mode"] = mode_name(cfg.mode);
        manifest["seed"] = cfg.seed;
        manifest["config_hash"] = cfg.config_hash;
        manifest["stages"] = stages;
        manifest["outputs"] = outputs;
        std::ofstream s(out / "manifest.json");
        if (!s || !(s << manifest.dump(2) << "\n"))
        {
            throw io_error("cannot write '" + (out / "manifest.json").string() + "'");
        }
    }
};

Eigen::MatrixXd column_vector(const std::vector<double>& values)
{
    Eigen::MatrixXd m(static_cast<long>(values.size()), 1);
    for (std::size_t i = 0; i < values.size(); ++i)
    {
        m(static_cast<long>(i), 0) = values[i];
    }
    return m;
}

std::string format_value(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int effective_dims(const ExperimentConfig& cfg, int input_dim)
{
    if (cfg.dims <= 0)
    {
        return input_dim;
    }
    if (cfg.dims > input_dim)
    {
        throw config_error("io.dims exceeds the input dimension");
    }
    return cfg.dims;
}

struct EvalArtifacts
{
    Eigen::MatrixXd P;
    Eigen::MatrixXd M_norm;
    double amari = 0.0;
    double errM = 0.0;
    eval::CorrelationMatrices corr_est;
    eval::MdsEmbedding mds;
};

// Shared by pipeline and evaluate: metrics against the ground truth plus
// permutation-aligned correlation matrices of the estimated sources.
EvalArtifacts evaluate_against_truth(const Eigen::MatrixXd& Z,
                                     const Eigen::MatrixXd& What,
                                     const Eigen::MatrixXd& Mhat,
                                     const Eigen::MatrixXd& A,
                                     const preprocess::WhiteningTransform& wh,
                                     const genmodel::GenerationSpec& spec)
{
    EvalArtifacts ev;
    eval::PerformanceMatrix P = eval::performance_matrix(What, A, &wh);
    ev.P = P.p;
    eval::PermutationMatch match = eval::match_permutation(P);
    ev.amari = eval::amari_index(P);
    ev.M_norm = eval::normalize_dependency(Mhat);
    ev.errM = eval::error_M(Mhat, eval::reference_matrix(spec), &match);

    Eigen::MatrixXd S_est = Z * What.transpose();
    Eigen::MatrixXd S_aligned(S_est.rows(), S_est.cols());
    for (int i = 0; i < What.rows(); ++i)
    {
        S_aligned.col(match.perm[i]) = match.signs[i] * S_est.col(i);
    }
    ev.corr_est = eval::correlation_matrices(S_aligned);
    ev.mds = eval::mds_embedding(Mhat);
    return ev;
}

void write_eval_artifacts(RunContext& ctx, const EvalArtifacts& ev, double objective,
                          bool converged)
{
    ctx.write("P", ev.P);
    ctx.write("Mhat_norm", ev.M_norm);
    ctx.write("corr_linear_est", ev.corr_est.linear);
    ctx.write("corr_energy_est", ev.corr_est.energy);
    ctx.write("mds_distance", ev.mds.distance);
    ctx.write("mds_coords", ev.mds.coords);
    std::string metrics = "metric,value\n";
    metrics += "amari_index," + format_value(ev.amari) + "\n";
    metrics += "error_M," + format_value(ev.errM) + "\n";
    metrics += "objective," + format_value(objective) + "\n";
    metrics += "converged," + std::string(converged ? "1" : "0") + "\n";
    ctx.write_table("metrics.csv", metrics);
}

void run_generate(RunContext& ctx, Rng& master)
{
    ctx.begin_stage();
    Rng rng = master.derive(kStageGenerate);
    genmodel::Dataset ds = genmodel::generate_dataset(ctx.cfg.generation, rng);
    ctx.end_stage("generate");
    ctx.write("X", ds.X);
    ctx.write("A", ds.A);
    ctx.write("S", ds.S);
}

void run_estimate(RunContext& ctx, Rng& master)
{
    Eigen::MatrixXd X = io::read_matrix(ctx.cfg.input_path, ctx.cfg.allow_nan).values;
    if (ctx.cfg.dc_normalize)
    {
        X = preprocess::remove_dc_and_normalize(X);
    }
    ctx.begin_stage();
    auto wh = preprocess::fit_whitening(X, effective_dims(ctx.cfg, static_cast<int>(X.cols())));
    Eigen::MatrixXd Z = preprocess::apply_whitening(wh, X);
    ctx.end_stage("preprocess");

    ctx.begin_stage();
    Rng rng = master.derive(kStageEstimate);
    estimator::EstimationResult res = estimator::estimate(Z, ctx.cfg.estimation, rng);
    ctx.end_stage("estimate");

    ctx.write("whitening", wh.to_matrix());
    ctx.write("What", res.W_hat.w);
    ctx.write("Mhat", res.M_hat.m);
    ctx.write("Mhat_norm", eval::normalize_dependency(res.M_hat.m));
    ctx.write("features", preprocess::unmix_to_original(wh, res.W_hat.w));
    ctx.write("trace", column_vector(res.objective_trace));
    ctx.write("restart_objectives", column_vector(res.restart_objectives));
}

void run_evaluate(RunContext& ctx)
{
    Eigen::MatrixXd X = io::read_matrix(ctx.cfg.input_path, ctx.cfg.allow_nan).values;
    Eigen::MatrixXd What = io::read_matrix(ctx.cfg.w_path, ctx.cfg.allow_nan).values;
    Eigen::MatrixXd Mhat = io::read_matrix(ctx.cfg.m_path, ctx.cfg.allow_nan).values;
    Eigen::MatrixXd A = io::read_matrix(ctx.cfg.a_path, ctx.cfg.allow_nan).values;

    ctx.begin_stage();
    auto wh = preprocess::fit_whitening(X, static_cast<int>(What.cols()));
    Eigen::MatrixXd Z = preprocess::apply_whitening(wh, X);
    EvalArtifacts ev = evaluate_against_truth(Z, What, Mhat, A, wh, ctx.cfg.generation);
    ctx.end_stage("evaluate");

    write_eval_artifacts(ctx, ev, 0.0, true);
    if (!ctx.cfg.s_path.empty())
    {
        Eigen::MatrixXd S = io::read_matrix(ctx.cfg.s_path, ctx.cfg.allow_nan).values;
        eval::CorrelationMatrices corr = eval::correlation_matrices(S);
        ctx.write("corr_linear_true", corr.linear);
        ctx.write("corr_energy_true", corr.energy);
    }
}

void run_approx_check(RunContext& ctx, Rng& master)
{
    ctx.begin_stage();
    Rng rng = master.derive(kStageApprox);
    Eigen::MatrixXd S2 =
        sample_model_sources_2d(ctx.cfg.m11, ctx.cfg.m22, ctx.cfg.m12, ctx.cfg.approx_T, rng);
    density::DependencyMatrix M;
    M.m.resize(2, 2);
    M.m << ctx.cfg.m11, ctx.cfg.m12, ctx.cfg.m12, ctx.cfg.m22;
    eval::DensityComparison cmp =
        eval::density_comparison(S2, M, ctx.cfg.bins, ctx.cfg.quantile);
    ctx.end_stage("approx-check");

    std::string table = "density,ang,kl,sq\n";
    auto row = [&](const char* name, const eval::DensityMeasures& m)
    {
        table += std::string(name) + "," + format_value(m.ang) + "," + format_value(m.kl) + "," +
                 format_value(m.sq) + "\n";
    };
    row("approx", cmp.model);
    row("gauss", cmp.gauss);
    row("laplace", cmp.laplace);
    ctx.write_table("approx_check.csv", table);
    ctx.write("approx_hist", cmp.hist.mass);
    Eigen::MatrixXd edges(2, cmp.hist.xedges.size());
    edges.row(0) = cmp.hist.xedges.transpose();
    edges.row(1) = cmp.hist.yedges.transpose();
    ctx.write("approx_edges", edges);
}

void run_mds(RunContext& ctx)
{
    Eigen::MatrixXd Mhat = io::read_matrix(ctx.cfg.m_path, ctx.cfg.allow_nan).values;
    ctx.begin_stage();
    eval::MdsEmbedding mds = eval::mds_embedding(Mhat);
    ctx.end_stage("mds");
    ctx.write("mds_distance", mds.distance);
    ctx.write("mds_coords", mds.coords);
}

void run_pipeline(RunContext& ctx, Rng& master)
{
    const auto& spec = ctx.cfg.generation;

    ctx.begin_stage();
    Rng gen_rng = master.derive(kStageGenerate);
    genmodel::Dataset ds = genmodel::generate_dataset(spec, gen_rng);
    ctx.end_stage("generate");
    ctx.write("X", ds.X);
    ctx.write("A", ds.A);
    ctx.write("S", ds.S);

    ctx.begin_stage();
    auto wh = preprocess::fit_whitening(ds.X, effective_dims(ctx.cfg, spec.d));
    Eigen::MatrixXd Z = preprocess::apply_whitening(wh, ds.X);
    ctx.end_stage("preprocess");
    ctx.write("whitening", wh.to_matrix());

    ctx.begin_stage();
    Rng est_rng = master.derive(kStageEstimate);
    estimator::EstimationResult res = estimator::estimate(Z, ctx.cfg.estimation, est_rng);
    ctx.end_stage("estimate");
    ctx.write("What", res.W_hat.w);
    ctx.write("Mhat", res.M_hat.m);
    ctx.write("features", preprocess::unmix_to_original(wh, res.W_hat.w));
    ctx.write("trace", column_vector(res.objective_trace));
    ctx.write("restart_objectives", column_vector(res.restart_objectives));

    ctx.begin_stage();
    EvalArtifacts ev = evaluate_against_truth(Z, res.W_hat.w, res.M_hat.m, ds.A, wh, spec);
    eval::CorrelationMatrices corr_true = eval::correlation_matrices(ds.S);
    ctx.end_stage("evaluate");

    double final_objective =
        res.objective_trace.empty() ? 0.0 : res.objective_trace.back();
    write_eval_artifacts(ctx, ev, final_objective, res.converged);
    ctx.write("corr_linear_true", corr_true.linear);
    ctx.write("corr_energy_true", corr_true.energy);
}

void check_inputs_exist(const ExperimentConfig& cfg)
{
    std::vector<std::string> paths;
    switch (cfg.mode)
    {
        case Mode::estimate:
            paths = {cfg.input_path};
            break;
        case Mode::evaluate:
            paths = {cfg.input_path, cfg.w_path, cfg.m_path, cfg.a_path};
            if (!cfg.s_path.empty())
            {
                paths.push_back(cfg.s_path);
            }
            break;
        case Mode::mds:
            paths = {cfg.m_path};
            break;
        default:
            break;
    }
    for (const auto& p : paths)
    {
        if (!fs::exists(p))
        {
            throw config_error("input path '" + p + "' does not exist");
        }
    }
}

}  // namespace

Eigen::MatrixXd sample_model_sources_2d(double m11, double m22, double m12, long T, Rng& rng)
{
    if (!(m11 > 0.0) || !(m22 > 0.0) || m12 < 0.0)
    {
        throw parameter_error("sample_model_sources_2d: need m11, m22 > 0 and m12 >= 0");
    }
    // Weight laws matched to the model density: diagonal weights
    // inverse-Gamma(1, m_ii^2 / 2), pair weight inverse-Gamma(1/2, m12^2 / 2).
    Eigen::MatrixXd S(T, 2);
    genmodel::WeightMatrix w;
    w.u = Eigen::MatrixXd::Zero(2, 2);
    for (long t = 0; t < T; ++t)
    {
        w.u(0, 0) = genmodel::sample_inverse_gamma(1.0, 0.5 * m11 * m11, 1, rng)[0];
        w.u(1, 1) = genmodel::sample_inverse_gamma(1.0, 0.5 * m22 * m22, 1, rng)[0];
        if (m12 > 0.0)
        {
            double u12 = genmodel::sample_inverse_gamma(0.5, 0.5 * m12 * m12, 1, rng)[0];
            w.u(0, 1) = u12;
            w.u(1, 0) = u12;
        }
        S.row(t) = genmodel::sample_sources(genmodel::build_precision(w), 1, rng);
    }
    return S;
}

void run(const ExperimentConfig& config)
{
    config.validate();
    check_inputs_exist(config);

    RunContext ctx(config);
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec)
    {
        throw io_error("cannot create output directory '" + ctx.out.string() + "'");
    }

    Rng master(config.seed);
    switch (config.mode)
    {
        case Mode::generate:
            run_generate(ctx, master);
            break;
        case Mode::estimate:
            run_estimate(ctx, master);
            break;
        case Mode::evaluate:
            run_evaluate(ctx);
            break;
        case Mode::approx_check:
            run_approx_check(ctx, master);
            break;
        case Mode::mds:
            run_mds(ctx);
            break;
        case Mode::pipeline:
            run_pipeline(ctx, master);
            break;
    }
    ctx.write_manifest();
}

}  // namespace depca::cli
