// SPDX-License-Identifier: Apache-2.0
//
// cfmimo: uplink spectral-efficiency simulator for cell-free massive MIMO
// Copyright (C) 2026 The cfmimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "cfmimo/harness.hpp"
#include "test_support.hpp"

#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>

using namespace cfmimo;

namespace
{

ExperimentConfig small_config()
{
    ExperimentConfig cfg;
    cfg.m_aps = 4;
    cfg.k_ues = 3;
    cfg.l_ant = 2;
    cfg.n_ant = 2;
    cfg.tau_p = 2;
    cfg.layouts = 3;
    cfg.blocks_per_layout = 60;
    cfg.master_seed = 5;
    return cfg;
}

std::string error_of(const ExperimentConfig &cfg)
{
    try
    {
        validate(cfg);
    }
    catch (const ConfigError &e)
    {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("scheme names round-trip")
{
    for (Scheme s : {Scheme::kFcpMmse, Scheme::kFcpMr, Scheme::kLsfdLmmse, Scheme::kLsfdMr, Scheme::kLsfdMrClosed,
                     Scheme::kCsdMr})
        CHECK(parse_scheme(scheme_name(s)) == s);
    CHECK_THROWS_AS(parse_scheme("fcp-zf"), ConfigError);
}

TEST_CASE("config parsing")
{
    std::istringstream in("# comment\n\nm_aps = 12   # trailing\nschemes = fcp-mr, lsfd-mr\nkappa_mode = rayleigh\n"
                          "precoder = uniform\nmaster_seed = 77\nsigma2_dbm = -90.5\n");
    const ExperimentConfig cfg = parse_config(in);
    CHECK(cfg.m_aps == 12);
    CHECK(cfg.schemes == std::vector<Scheme>{Scheme::kFcpMr, Scheme::kLsfdMr});
    CHECK(cfg.fading == FadingMode::kRayleigh);
    CHECK(cfg.precoder == PrecoderKind::kUniform);
    CHECK(cfg.master_seed == 77);
    CHECK(cfg.sigma2_dbm == -90.5);
    CHECK(cfg.k_ues == 10);

    std::istringstream again(format_config(cfg));
    const ExperimentConfig back = parse_config(again);
    CHECK(format_config(back) == format_config(cfg));
}

TEST_CASE("config errors name the offending field")
{
    std::istringstream bad_value("m_aps = twelve\n");
    CHECK_THROWS_WITH_AS(parse_config(bad_value), doctest::Contains("m_aps"), ConfigError);
    std::istringstream unknown("antennas = 4\n");
    CHECK_THROWS_WITH_AS(parse_config(unknown), doctest::Contains("antennas"), ConfigError);
    std::istringstream malformed("m_aps 4\n");
    CHECK_THROWS_WITH_AS(parse_config(malformed), doctest::Contains("line 1"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/cfmimo.cfg"), std::exception);
}

TEST_CASE("power conversions")
{
    ExperimentConfig cfg;
    CHECK(cfg.power_w() == doctest::Approx(0.2).epsilon(1e-5));
    cfg.power_dbm = 30.0;
    CHECK(cfg.power_w() == doctest::Approx(1.0));
    cfg.sigma2_dbm = 0.0;
    CHECK(cfg.sigma2_w() == doctest::Approx(1e-3));
    cfg.tau_p = 20;
    CHECK(cfg.prelog() == doctest::Approx(0.9));
}

TEST_CASE("validation rules")
{
    CHECK(validation_errors(ExperimentConfig{}).empty());

    ExperimentConfig cfg;
    cfg.tau_p = 3;
    CHECK(error_of(cfg).find("tau_p") != std::string::npos);
    cfg.tau_p = 200;
    CHECK(error_of(cfg).find("tau_p") != std::string::npos);
    cfg.tau_p = 22;
    CHECK(error_of(cfg).find("tau_p") != std::string::npos);

    cfg = ExperimentConfig{};
    cfg.m_aps = 0;
    cfg.eta = 0.0;
    cfg.layouts = 0;
    const std::string all = error_of(cfg);
    CHECK(all.find("m_aps") != std::string::npos);
    CHECK(all.find("eta") != std::string::npos);
    CHECK(all.find("layouts") != std::string::npos);

    cfg = ExperimentConfig{};
    cfg.blocks_per_layout = 0;
    CHECK(error_of(cfg).find("blocks_per_layout") != std::string::npos);
    cfg.schemes = {Scheme::kLsfdMrClosed};
    CHECK(error_of(cfg).empty());

    cfg = ExperimentConfig{};
    cfg.sweep = "eta";
    cfg.sweep_values = {1};
    CHECK(error_of(cfg).find("sweep") != std::string::npos);
}

TEST_CASE("aggregate statistics")
{
    const std::vector<double> one{2.0};
    const Aggregate a = aggregate(one);
    CHECK(a.average == 2.0);
    CHECK(a.likely95 == 2.0);

    std::vector<double> ramp;
    for (int i = 0; i <= 100; ++i)
        ramp.push_back(100 - i);
    const Aggregate b = aggregate(ramp);
    CHECK(b.likely95 == doctest::Approx(5.0));
    CHECK(b.average == doctest::Approx(50.0));

    std::mt19937_64 eng(3);
    std::normal_distribution<double> nd(10.0, 1.0);
    std::vector<double> gauss(1000000);
    for (double &x : gauss)
        x = nd(eng);
    // Normal 5th percentile: 10 - 1.6449.
    CHECK(aggregate(gauss).likely95 == doctest::Approx(10.0 - 1.644854).epsilon(0.02));

    CHECK_THROWS_AS(aggregate(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("CSV output")
{
    CHECK(format_csv({}) == csv_header() + "\n");
    const std::vector<CsvRow> rows{{"m_aps", 10, "fcp-mr", 3.14159265, 1.23456789e-3, 2.5e-4, 50, 1000, 42}};
    const std::string text = format_csv(rows);
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);

    std::istringstream in(text);
    const std::vector<CsvRow> back = parse_csv(in);
    REQUIRE(back.size() == 1);
    CHECK(back[0].sweep_name == "m_aps");
    CHECK(back[0].scheme == "fcp-mr");
    CHECK(back[0].average_se == doctest::Approx(3.14159265).epsilon(1e-6));
    CHECK(back[0].likely95_se == doctest::Approx(1.23456789e-3).epsilon(1e-6));
    CHECK(back[0].layouts == 50);
    CHECK(back[0].seed == 42);

    const std::string bad = "/nonexistent-dir/out.csv";
    CHECK_THROWS_WITH(emit_csv(rows, bad), doctest::Contains(bad.c_str()));

    const auto path = std::filesystem::temp_directory_path() / "cfmimo_test_rows.csv";
    emit_csv(rows, path.string());
    CHECK(read_csv(path.string()).size() == 1);
    std::filesystem::remove(path);
}

TEST_CASE("presets")
{
    for (std::string_view name : preset_names())
    {
        const Preset p = preset(name);
        CHECK(p.name == name);
        REQUIRE(!p.series.empty());
        for (const SweepSeries &s : p.series)
        {
            CHECK(!s.values.empty());
            for (int v : s.values)
                CHECK(validation_errors(with_sweep_value(s.base, s.sweep, v)).empty());
        }
    }
    CHECK(preset("fig4").series.front().base.schemes ==
          std::vector<Scheme>{Scheme::kFcpMr, Scheme::kLsfdMr, Scheme::kCsdMr});
    CHECK(preset("fig3").series.size() == 4);
    CHECK_THROWS_AS(preset("fig9"), std::invalid_argument);
}

TEST_CASE("layout draws depend only on the seed and the layout index")
{
    ExperimentConfig a = small_config();
    ExperimentConfig b = a;
    b.blocks_per_layout = 7;
    b.schemes = {Scheme::kLsfdMr, Scheme::kCsdMr};
    const NetworkStatistics sa = layout_statistics(a, 1);
    const NetworkStatistics sb = layout_statistics(b, 1);
    for (std::size_t i = 0; i < sa.links.size(); ++i)
        CHECK(sa.links[i].r_full == sb.links[i].r_full);
    CHECK(layout_seed(a, 0) != layout_seed(a, 1));
}

TEST_CASE("experiments are reproducible across runs and worker counts")
{
    ExperimentConfig cfg = small_config();
    cfg.schemes = {Scheme::kFcpMmse, Scheme::kFcpMr, Scheme::kLsfdMr, Scheme::kLsfdMrClosed, Scheme::kCsdMr};
    setenv("CFMIMO_WORKERS", "1", 1);
    const std::string first = format_csv(run_config(cfg));
    setenv("CFMIMO_WORKERS", "3", 1);
    const std::string second = format_csv(run_config(cfg));
    unsetenv("CFMIMO_WORKERS");
    CHECK(first == second);
    CHECK(std::count(first.begin(), first.end(), '\n') == 6);
}

TEST_CASE("MMSE combining dominates MR on every layout")
{
    ExperimentConfig cfg = small_config();
    cfg.schemes = {Scheme::kFcpMmse, Scheme::kFcpMr};
    for (int i = 0; i < cfg.layouts; ++i)
    {
        const auto se = run_layout(cfg, i);
        double mmse = 0.0, mr = 0.0;
        for (int k = 0; k < cfg.k_ues; ++k)
        {
            mmse += se[0][k];
            mr += se[1][k];
        }
        CHECK(mmse >= mr);
    }
}

TEST_CASE("Monte Carlo and closed-form LSFD agree")
{
    ExperimentConfig cfg = small_config();
    cfg.layouts = 2;
    cfg.blocks_per_layout = 20000;
    cfg.schemes = {Scheme::kLsfdMr, Scheme::kLsfdMrClosed};
    const auto results = run_experiment(cfg);
    const double diff = std::abs(results[0].average_se - results[1].average_se);
    CHECK(diff <= 0.01 * results[1].average_se);
}

TEST_CASE("sweeps produce one row per value and scheme")
{
    ExperimentConfig cfg = small_config();
    cfg.layouts = 1;
    cfg.blocks_per_layout = 20;
    cfg.schemes = {Scheme::kFcpMr, Scheme::kLsfdMrClosed};
    cfg.sweep = "m_aps";
    cfg.sweep_values = {2, 3};
    const auto rows = run_config(cfg);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].sweep_name == "m_aps");
    CHECK(rows[0].sweep_value == 2.0);
    CHECK(rows[3].sweep_value == 3.0);
    CHECK(rows[1].scheme == "lsfd-mr-closed");
}
