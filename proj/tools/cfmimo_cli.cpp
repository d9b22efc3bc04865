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

#include "cfmimo/channel.hpp"
#include "cfmimo/harness.hpp"
#include "cfmimo/selfcheck.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

namespace
{

using namespace cfmimo;

// Failures are reported on stderr as one JSON object per line so that scripts can parse them.
int fail(const std::string &kind, const std::string &message, int code)
{
    nlohmann::json line{{"status", "error"}, {"kind", kind}, {"message", message}};
    std::cerr << line.dump() << '\n';
    return code;
}

// One --<key> option per config key; values are applied after the config file is read.
void add_overrides(CLI::App &cmd, std::map<std::string, std::string> &overrides)
{
    for (std::string_view key : config_keys())
    {
        const std::string k(key);
        cmd.add_option_function<std::string>(
            "--" + k, [&overrides, k](const std::string &v) { overrides[k] = v; }, "override config key " + k);
    }
}

ExperimentConfig resolve(const std::string &path, const std::map<std::string, std::string> &overrides)
{
    ExperimentConfig cfg = path.empty() ? ExperimentConfig{} : load_config(path);
    for (const auto &[key, value] : overrides)
        apply_setting(cfg, key, value);
    return cfg;
}

void dump_statistics(const ExperimentConfig &cfg, const std::string &dir)
{
    std::filesystem::create_directories(dir);
    const NetworkStatistics stats = layout_statistics(cfg, 0);
    for (int m = 0; m < stats.m_aps; ++m)
    {
        for (int k = 0; k < stats.k_ues; ++k)
        {
            const std::string path = dir + "/link_" + std::to_string(m) + "_" + std::to_string(k) + ".txt";
            std::ofstream out(path);
            if (!out)
                throw std::runtime_error(path + ": cannot open for writing");
            write_link_statistics(out, stats.link(m, k));
        }
    }
}

int run_selftest(std::uint64_t seed)
{
    const auto start = std::chrono::steady_clock::now();
    const CheckResult checks[] = {
        check_estimator_moments(100000, seed),
        check_combiner_optimality(1000, seed),
        check_right_invariance(1000, seed),
    };
    bool ok = true;
    for (const CheckResult &c : checks)
    {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
        ok = ok && c.passed;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "selftest " << (ok ? "passed" : "failed") << " in " << seconds << " s\n";
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"cfmimo: uplink spectral-efficiency simulator for cell-free massive MIMO"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string dump_dir;
    std::map<std::string, std::string> overrides;
    CLI::App *run = app.add_subcommand("run", "run one experiment (or its sweep) and write a CSV");
    run->add_option("config", config_path, "config file (key = value lines)")->required();
    run->add_option("--out", out_path, "CSV output path (default: stdout)");
    run->add_option("--dump-stats", dump_dir, "write the link statistics of layout 0 to this directory");
    add_overrides(*run, overrides);

    std::string preset_name;
    std::string preset_dir = ".";
    std::uint64_t preset_seed = 1;
    int preset_layouts = 0;
    long preset_blocks = -1;
    CLI::App *pre = app.add_subcommand("preset", "run a figure preset, one CSV per curve family");
    pre->add_option("name", preset_name, "fig2, fig3, fig4 or fig5")->required();
    pre->add_option("--out", preset_dir, "output directory");
    pre->add_option("--seed", preset_seed, "master seed");
    pre->add_option("--layouts", preset_layouts, "override the number of layouts");
    pre->add_option("--blocks", preset_blocks, "override blocks per layout");

    std::string validate_path;
    CLI::App *val = app.add_subcommand("validate", "check a config file and print the resolved settings");
    val->add_option("config", validate_path, "config file")->required();
    add_overrides(*val, overrides);

    std::uint64_t selftest_seed = 2024;
    CLI::App *self = app.add_subcommand("selftest", "run the invariant checks on a tiny instance");
    self->add_option("--seed", selftest_seed, "seed of the check instances");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        if (e.get_exit_code() == 0)
            return app.exit(e);
        return fail("usage", e.what(), 2);
    }

    try
    {
        if (*run)
        {
            const ExperimentConfig cfg = resolve(config_path, overrides);
            validate(cfg);
            if (!dump_dir.empty())
                dump_statistics(cfg, dump_dir);
            const std::vector<CsvRow> rows = run_config(cfg);
            if (out_path.empty())
                std::cout << format_csv(rows);
            else
                emit_csv(rows, out_path);
            return 0;
        }
        if (*pre)
        {
            Preset p = preset(preset_name);
            std::filesystem::create_directories(preset_dir);
            for (SweepSeries &series : p.series)
            {
                series.base.master_seed = preset_seed;
                if (preset_layouts > 0)
                    series.base.layouts = preset_layouts;
                if (preset_blocks >= 0)
                    series.base.blocks_per_layout = preset_blocks;
                const std::string path = preset_dir + "/" + series.file_stem + ".csv";
                emit_csv(run_sweep(series), path);
                std::cout << path << '\n';
            }
            return 0;
        }
        if (*val)
        {
            const ExperimentConfig cfg = resolve(validate_path, overrides);
            validate(cfg);
            std::cout << format_config(cfg);
            return 0;
        }
        if (*self)
            return run_selftest(selftest_seed);
    }
    catch (const ConfigError &e)
    {
        return fail("config", e.what(), 2);
    }
    catch (const std::exception &e)
    {
        return fail("runtime", e.what(), 1);
    }
    return 0;
}
