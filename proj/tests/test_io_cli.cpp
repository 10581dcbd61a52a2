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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include <doctest.h>

#include "depca/config.hpp"
#include "depca/errors.hpp"
#include "depca/io.hpp"
#include "depca/pipeline.hpp"
#include "test_util.hpp"

using namespace depca;
namespace fs = std::filesystem;

namespace
{

struct TempDir
{
    fs::path path;
    explicit TempDir(const std::string& tag)
    {
        path = fs::temp_directory_path() / ("depca_test_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_SUITE("io_cli")
{
    TEST_CASE("binary matrices round trip bit-exactly")
    {
        TempDir dir("bin");
        Rng rng(91);
        Eigen::MatrixXd m = testutil::random_matrix(7, 3, rng);
        m(0, 0) = 1e-300;
        m(1, 1) = -1e300;
        io::write_matrix(dir.file("m.bin"), m, "weights", io::MatrixFormat::bin);
        io::NamedMatrix back = io::read_matrix(dir.file("m.bin"));
        CHECK(back.name == "weights");
        CHECK(back.values == m);
    }

    TEST_CASE("csv matrices round trip to full double precision")
    {
        TempDir dir("csv");
        Rng rng(92);
        Eigen::MatrixXd m = testutil::random_matrix(5, 4, rng);
        io::write_matrix(dir.file("m.csv"), m, "data", io::MatrixFormat::csv);
        io::NamedMatrix back = io::read_matrix(dir.file("m.csv"));
        CHECK(back.name == "data");
        // 17 significant digits round-trip doubles exactly.
        CHECK(back.values == m);
    }

    TEST_CASE("truncated binary payload names the missing bytes")
    {
        TempDir dir("trunc");
        Rng rng(93);
        Eigen::MatrixXd m = testutil::random_matrix(4, 4, rng);
        io::write_matrix(dir.file("m.bin"), m, "m", io::MatrixFormat::bin);
        std::string bytes = slurp(dir.file("m.bin"));
        std::ofstream out(dir.file("cut.bin"), std::ios::binary);
        out.write(bytes.data(), static_cast<long>(bytes.size()) - 24);
        out.close();
        try
        {
            io::read_matrix(dir.file("cut.bin"));
            FAIL("expected io_error");
        }
        catch (const io_error& e)
        {
            std::string msg = e.what();
            CHECK(msg.find("128") != std::string::npos);  // expected payload bytes
            CHECK(msg.find("104") != std::string::npos);  // actual payload bytes
        }
    }

    TEST_CASE("NaN policy on read")
    {
        TempDir dir("nan");
        Eigen::MatrixXd m(1, 2);
        m << 1.0, std::numeric_limits<double>::quiet_NaN();
        io::write_matrix(dir.file("m.csv"), m, "m", io::MatrixFormat::csv);
        CHECK_THROWS_AS(io::read_matrix(dir.file("m.csv")), io_error);
        io::NamedMatrix ok = io::read_matrix(dir.file("m.csv"), true);
        CHECK(std::isnan(ok.values(0, 1)));
    }

    TEST_CASE("malformed csv headers are rejected")
    {
        TempDir dir("bad");
        {
            std::ofstream out(dir.file("a.csv"));
            out << "1.0,2.0\n";
        }
        CHECK_THROWS_AS(io::read_matrix(dir.file("a.csv")), io_error);
        {
            std::ofstream out(dir.file("b.csv"));
            out << "# m 2 2\n1.0,2.0\n";
        }
        CHECK_THROWS_AS(io::read_matrix(dir.file("b.csv")), io_error);
        CHECK_THROWS_AS(io::read_matrix(dir.file("missing.csv")), io_error);
    }

    TEST_CASE("config parsing with sections, comments and diagnostics")
    {
        auto cfg = cli::ConfigFile::parse_text("[experiment]\n"
                                               "seed = 7  # master seed\n"
                                               "\n"
                                               "[generation]\n"
                                               "d = 6\n"
                                               "T = 1000\n",
                                               "inline");
        CHECK(cfg.get_long("experiment.seed", 0) == 7);
        CHECK(cfg.get_long("generation.d", 0) == 6);
        CHECK(cfg.get_long("missing.key", 42) == 42);

        CHECK_THROWS_AS(cli::ConfigFile::parse_text("novalue\n", "x"), config_error);
        auto bad = cli::ConfigFile::parse_text("[a]\nk = notanumber\n", "x");
        try
        {
            bad.get_double("a.k", 0.0);
            FAIL("expected config_error");
        }
        catch (const config_error& e)
        {
            std::string msg = e.what();
            CHECK(msg.find("a.k") != std::string::npos);
            CHECK(msg.find("x:2") != std::string::npos);
        }
    }

    TEST_CASE("pattern strings are 1-based pairs")
    {
        auto pairs = cli::parse_pattern("1-2, 1-3,2-3");
        REQUIRE(pairs.size() == 3);
        CHECK(pairs[0] == std::pair<int, int>{0, 1});
        CHECK(pairs[2] == std::pair<int, int>{1, 2});
        CHECK_THROWS_AS(cli::parse_pattern("2-1"), config_error);
        CHECK_THROWS_AS(cli::parse_pattern("1:2"), config_error);
    }

    TEST_CASE("experiment config resolves generation and estimator sections")
    {
        auto file = cli::ConfigFile::parse_text("[experiment]\n"
                                                "mode = pipeline\n"
                                                "seed = 3\n"
                                                "[generation]\n"
                                                "d = 6\n"
                                                "T = 500\n"
                                                "block = 3\n"
                                                "scale_off = 0.3333333333333333\n"
                                                "[estimator]\n"
                                                "restarts = 2\n"
                                                "max_outer_iters = 5\n",
                                                "inline");
        cli::ExperimentConfig cfg = cli::ExperimentConfig::from_config(file);
        CHECK(cfg.mode == cli::Mode::pipeline);
        CHECK(cfg.generation.pattern.size() == 3);
        CHECK(cfg.estimation.restarts == 2);
        CHECK(cfg.config_hash.size() == 16);
        CHECK_NOTHROW(cfg.validate());

        auto conflict = cli::ConfigFile::parse_text("[generation]\nblock = 2\npattern = 1-2\n", "y");
        CHECK_THROWS_AS(cli::ExperimentConfig::from_config(conflict), config_error);
    }

    TEST_CASE("missing inputs are validated up front")
    {
        cli::ExperimentConfig cfg;
        cfg.mode = cli::Mode::mds;
        cfg.m_path = "/nonexistent/m.csv";
        cfg.output_dir = (fs::temp_directory_path() / "depca_missing").string();
        CHECK_THROWS_AS(cli::run(cfg), config_error);
    }

    TEST_CASE("mds mode writes distance and coordinates")
    {
        TempDir dir("mds");
        Eigen::MatrixXd M(3, 3);
        M << 1.0, 0.5, 0.0,
            0.5, 1.0, 0.0,
            0.0, 0.0, 1.0;
        io::write_matrix(dir.file("Mhat.csv"), M, "Mhat", io::MatrixFormat::csv);

        cli::ExperimentConfig cfg;
        cfg.mode = cli::Mode::mds;
        cfg.m_path = dir.file("Mhat.csv");
        cfg.output_dir = dir.file("out");
        cli::run(cfg);
        CHECK(fs::exists(dir.file("out/mds_distance.csv")));
        CHECK(fs::exists(dir.file("out/mds_coords.csv")));
        CHECK(fs::exists(dir.file("out/manifest.json")));
        io::NamedMatrix coords = io::read_matrix(dir.file("out/mds_coords.csv"));
        CHECK(coords.values.rows() == 3);
        CHECK(coords.values.cols() == 2);
    }

    TEST_CASE("pipeline artifacts are seed-deterministic")
    {
        TempDir dir("pipe");
        auto file = cli::ConfigFile::parse_text("[experiment]\n"
                                                "mode = pipeline\n"
                                                "seed = 11\n"
                                                "[generation]\n"
                                                "d = 4\n"
                                                "T = 1200\n"
                                                "block = 2\n"
                                                "[estimator]\n"
                                                "restarts = 2\n"
                                                "max_outer_iters = 8\n"
                                                "ica_max_iters = 60\n",
                                                "inline");
        cli::ExperimentConfig cfg = cli::ExperimentConfig::from_config(file);
        cfg.output_dir = dir.file("run1");
        cli::run(cfg);
        cfg.output_dir = dir.file("run2");
        cli::run(cfg);

        const char* files[] = {"X.csv",     "A.csv",        "S.csv",          "What.csv",
                               "Mhat.csv",  "Mhat_norm.csv", "P.csv",          "trace.csv",
                               "metrics.csv", "mds_coords.csv", "whitening.csv"};
        for (const char* f : files)
        {
            INFO(f);
            CHECK(fs::exists(dir.file(std::string("run1/") + f)));
            CHECK(slurp(dir.file(std::string("run1/") + f)) ==
                  slurp(dir.file(std::string("run2/") + f)));
        }
    }

    TEST_CASE("approx-check emits the three-way table")
    {
        TempDir dir("approx");
        cli::ExperimentConfig cfg;
        cfg.mode = cli::Mode::approx_check;
        cfg.seed = 4;
        cfg.m12 = 0.5;
        cfg.approx_T = 20000;
        cfg.bins = 40;
        cfg.output_dir = dir.file("out");
        cli::run(cfg);
        std::string table = slurp(dir.file("out/approx_check.csv"));
        CHECK(table.find("density,ang,kl,sq") != std::string::npos);
        CHECK(table.find("approx,") != std::string::npos);
        CHECK(table.find("gauss,") != std::string::npos);
        CHECK(table.find("laplace,") != std::string::npos);
    }
}
