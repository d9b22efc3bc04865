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

#ifndef CFMIMO_HARNESS_HPP
#define CFMIMO_HARNESS_HPP

#include "cfmimo/channel.hpp"
#include "cfmimo/geometry.hpp"
#include "cfmimo/precoding.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cfmimo
{

enum class Scheme
{
    kFcpMmse,
    kFcpMr,
    kLsfdLmmse,
    kLsfdMr,
    kLsfdMrClosed,
    kCsdMr,
};

std::string_view scheme_name(Scheme scheme);
Scheme parse_scheme(std::string_view name);

// Invalid configuration. what() lists every offending field as "field: reason", one per line.
class ConfigError : public std::invalid_argument
{
public:
    explicit ConfigError(const std::string &what) : std::invalid_argument(what) {}
};

struct ExperimentConfig
{
    int m_aps = 20;
    int k_ues = 10;
    int l_ant = 2;
    int n_ant = 2;
    int tau_c = 200;
    int tau_p = 0; // 0 selects K * N
    double power_dbm = 23.0103;
    double sigma2_dbm = -91.99;
    double area_m = 1000.0;
    FadingMode fading = FadingMode::kRician;
    PrecoderKind precoder = PrecoderKind::kStatistical;
    std::vector<Scheme> schemes{Scheme::kFcpMmse};
    int layouts = 50;
    long blocks_per_layout = 1000;
    std::uint64_t master_seed = 1;
    double eta = 0.7;
    double shadow_fading_db = 0.0;
    double min_distance_m = 10.0;
    // Optional sweep for `run`: an integer-valued key and the values it takes.
    std::string sweep;
    std::vector<int> sweep_values;

    int pilot_length() const { return tau_p == 0 ? k_ues * n_ant : tau_p; }
    double power_w() const;
    double sigma2_w() const;
    double prelog() const;
};

// Keys accepted by the config file and as CLI overrides, in documentation order.
std::span<const std::string_view> config_keys();

// Sets one key from its text value; throws ConfigError naming the key on bad input.
void apply_setting(ExperimentConfig &cfg, std::string_view key, std::string_view value);

// `key = value` lines, `#` starts a comment, blank lines are ignored. Settings are applied on
// top of `base`; unknown keys and malformed lines are errors.
ExperimentConfig parse_config(std::istream &is, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string &path, ExperimentConfig base = {});
std::string format_config(const ExperimentConfig &cfg);

// Every violated constraint as "field: reason". Empty means valid.
std::vector<std::string> validation_errors(const ExperimentConfig &cfg);
void validate(const ExperimentConfig &cfg); // throws ConfigError with all violations

struct Aggregate
{
    double average = 0.0;
    double likely95 = 0.0; // empirical 5th percentile, linear interpolation at (n - 1) * 0.05
    double std_error = 0.0;
};

Aggregate aggregate(std::span<const double> samples);

struct SchemeResult
{
    Scheme scheme = Scheme::kFcpMmse;
    std::vector<double> samples; // per-UE SE pooled over layouts, layout-major
    double average_se = 0.0;
    double likely95_se = 0.0;
    double mc_stderr = 0.0;
};

// Layout i draws its geometry and link statistics from derive_seed(master_seed, kLayout, {i});
// block j of layout i then draws from derive_seed(that seed, kBlock or kLsfdBlock, {j}).
// Layout draws therefore do not depend on blocks_per_layout, the schemes, or the worker count.
std::vector<SchemeResult> run_experiment(const ExperimentConfig &cfg);

std::uint64_t layout_seed(const ExperimentConfig &cfg, int layout_index);

// Link statistics of layout `layout_index`, exactly as run_experiment draws them.
NetworkStatistics layout_statistics(const ExperimentConfig &cfg, int layout_index);

// Per-UE SE of every requested scheme on one layout, in cfg.schemes order.
std::vector<std::vector<double>> run_layout(const ExperimentConfig &cfg, int layout_index);

struct CsvRow
{
    std::string sweep_name;
    double sweep_value = 0.0;
    std::string scheme;
    double average_se = 0.0;
    double likely95_se = 0.0;
    double mc_stderr = 0.0;
    long layouts = 0;
    long blocks = 0;
    std::uint64_t seed = 0;
};

std::string csv_header();
std::string format_csv(std::span<const CsvRow> rows);
void emit_csv(std::span<const CsvRow> rows, const std::string &path);
std::vector<CsvRow> parse_csv(std::istream &is);
std::vector<CsvRow> read_csv(const std::string &path);

// One curve family: `sweep` is set to each value in turn on top of `base`.
struct SweepSeries
{
    std::string file_stem;
    std::string sweep;
    std::vector<int> values;
    ExperimentConfig base;
};

struct Preset
{
    std::string name;
    std::vector<SweepSeries> series;
};

std::span<const std::string_view> preset_names();
Preset preset(std::string_view name); // throws std::invalid_argument on unknown names

ExperimentConfig with_sweep_value(const ExperimentConfig &base, const std::string &sweep, int value);
std::vector<CsvRow> run_sweep(const SweepSeries &series);

// Runs cfg once, or over cfg.sweep_values when cfg.sweep is set.
std::vector<CsvRow> run_config(const ExperimentConfig &cfg);

} // namespace cfmimo

#endif
