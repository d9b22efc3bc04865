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

#include "cfmimo/centralized.hpp"
#include "cfmimo/channel.hpp"
#include "cfmimo/estimation.hpp"
#include "cfmimo/lsfd.hpp"
#include "cfmimo/parallel.hpp"
#include "cfmimo/rng.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace cfmimo
{

namespace
{

constexpr std::array<std::string_view, 6> kSchemeNames{"fcp-mmse", "fcp-mr", "lsfd-lmmse",
                                                       "lsfd-mr",  "lsfd-mr-closed", "csd-mr"};

constexpr std::array<std::string_view, 20> kConfigKeys{
    "m_aps",   "k_ues",       "l_ant",  "n_ant",   "tau_c",   "tau_p",
    "power_dbm", "sigma2_dbm", "area_m", "kappa_mode", "precoder", "schemes",
    "layouts", "blocks_per_layout", "master_seed", "eta", "shadow_fading_db", "min_distance_m",
    "sweep",   "sweep_values"};

constexpr std::array<std::string_view, 4> kPresetNames{"fig2", "fig3", "fig4", "fig5"};

std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true)
    {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected)
{
    throw ConfigError(std::string(key) + ": invalid value '" + std::string(value) + "', expected " +
                      std::string(expected));
}

template <typename T>
T parse_number(std::string_view key, std::string_view text, std::string_view expected)
{
    const std::string v = trim(text);
    T out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
        bad_value(key, text, expected);
    return out;
}

std::string format_double(double x, int digits)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

// Shortest text that parses back to exactly x.
std::string format_exact(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

} // namespace

std::string_view scheme_name(Scheme scheme)
{
    return kSchemeNames.at(static_cast<std::size_t>(scheme));
}

Scheme parse_scheme(std::string_view name)
{
    for (std::size_t i = 0; i < kSchemeNames.size(); ++i)
        if (kSchemeNames[i] == name)
            return static_cast<Scheme>(i);
    throw ConfigError("schemes: unknown scheme '" + std::string(name) + "'");
}

double ExperimentConfig::power_w() const
{
    return std::pow(10.0, (power_dbm - 30.0) / 10.0);
}

double ExperimentConfig::sigma2_w() const
{
    return std::pow(10.0, (sigma2_dbm - 30.0) / 10.0);
}

double ExperimentConfig::prelog() const
{
    return 1.0 - static_cast<double>(pilot_length()) / static_cast<double>(tau_c);
}

std::span<const std::string_view> config_keys()
{
    return kConfigKeys;
}

void apply_setting(ExperimentConfig &cfg, std::string_view key, std::string_view value)
{
    const std::string v = trim(value);
    if (key == "m_aps")
        cfg.m_aps = parse_number<int>(key, v, "an integer");
    else if (key == "k_ues")
        cfg.k_ues = parse_number<int>(key, v, "an integer");
    else if (key == "l_ant")
        cfg.l_ant = parse_number<int>(key, v, "an integer");
    else if (key == "n_ant")
        cfg.n_ant = parse_number<int>(key, v, "an integer");
    else if (key == "tau_c")
        cfg.tau_c = parse_number<int>(key, v, "an integer");
    else if (key == "tau_p")
        cfg.tau_p = parse_number<int>(key, v, "an integer");
    else if (key == "power_dbm")
        cfg.power_dbm = parse_number<double>(key, v, "a number");
    else if (key == "sigma2_dbm")
        cfg.sigma2_dbm = parse_number<double>(key, v, "a number");
    else if (key == "area_m")
        cfg.area_m = parse_number<double>(key, v, "a number");
    else if (key == "kappa_mode")
    {
        if (v == "rician")
            cfg.fading = FadingMode::kRician;
        else if (v == "rayleigh")
            cfg.fading = FadingMode::kRayleigh;
        else
            bad_value(key, v, "rician or rayleigh");
    }
    else if (key == "precoder")
    {
        if (v == "eq17" || v == "statistical")
            cfg.precoder = PrecoderKind::kStatistical;
        else if (v == "uniform")
            cfg.precoder = PrecoderKind::kUniform;
        else
            bad_value(key, v, "eq17 or uniform");
    }
    else if (key == "schemes")
    {
        std::vector<Scheme> schemes;
        for (const std::string &name : split(v, ','))
        {
            if (name.empty())
                continue;
            const Scheme s = parse_scheme(name);
            if (std::find(schemes.begin(), schemes.end(), s) == schemes.end())
                schemes.push_back(s);
        }
        cfg.schemes = std::move(schemes);
    }
    else if (key == "layouts")
        cfg.layouts = parse_number<int>(key, v, "an integer");
    else if (key == "blocks_per_layout")
        cfg.blocks_per_layout = parse_number<long>(key, v, "an integer");
    else if (key == "master_seed")
        cfg.master_seed = parse_number<std::uint64_t>(key, v, "an unsigned integer");
    else if (key == "eta")
        cfg.eta = parse_number<double>(key, v, "a number");
    else if (key == "shadow_fading_db")
        cfg.shadow_fading_db = parse_number<double>(key, v, "a number");
    else if (key == "min_distance_m")
        cfg.min_distance_m = parse_number<double>(key, v, "a number");
    else if (key == "sweep")
        cfg.sweep = v;
    else if (key == "sweep_values")
    {
        std::vector<int> values;
        for (const std::string &item : split(v, ','))
            if (!item.empty())
                values.push_back(parse_number<int>(key, item, "a comma-separated list of integers"));
        cfg.sweep_values = std::move(values);
    }
    else
        throw ConfigError(std::string(key) + ": unknown key");
}

ExperimentConfig parse_config(std::istream &is, ExperimentConfig base)
{
    std::string line;
    int line_no = 0;
    while (std::getline(is, line))
    {
        ++line_no;
        const auto hash = line.find('#');
        const std::string body = trim(std::string_view(line).substr(0, hash));
        if (body.empty())
            continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        apply_setting(base, trim(std::string_view(body).substr(0, eq)), std::string_view(body).substr(eq + 1));
    }
    return base;
}

ExperimentConfig load_config(const std::string &path, ExperimentConfig base)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error(path + ": cannot open config file");
    return parse_config(in, std::move(base));
}

std::string format_config(const ExperimentConfig &cfg)
{
    std::ostringstream os;
    std::string schemes;
    for (Scheme s : cfg.schemes)
        schemes += (schemes.empty() ? "" : ",") + std::string(scheme_name(s));
    std::string values;
    for (int v : cfg.sweep_values)
        values += (values.empty() ? "" : ",") + std::to_string(v);
    os << "m_aps = " << cfg.m_aps << '\n'
       << "k_ues = " << cfg.k_ues << '\n'
       << "l_ant = " << cfg.l_ant << '\n'
       << "n_ant = " << cfg.n_ant << '\n'
       << "tau_c = " << cfg.tau_c << '\n'
       << "tau_p = " << cfg.tau_p << '\n'
       << "power_dbm = " << format_exact(cfg.power_dbm) << '\n'
       << "sigma2_dbm = " << format_exact(cfg.sigma2_dbm) << '\n'
       << "area_m = " << format_exact(cfg.area_m) << '\n'
       << "kappa_mode = " << (cfg.fading == FadingMode::kRician ? "rician" : "rayleigh") << '\n'
       << "precoder = " << (cfg.precoder == PrecoderKind::kStatistical ? "eq17" : "uniform") << '\n'
       << "schemes = " << schemes << '\n'
       << "layouts = " << cfg.layouts << '\n'
       << "blocks_per_layout = " << cfg.blocks_per_layout << '\n'
       << "master_seed = " << cfg.master_seed << '\n'
       << "eta = " << format_exact(cfg.eta) << '\n'
       << "shadow_fading_db = " << format_exact(cfg.shadow_fading_db) << '\n'
       << "min_distance_m = " << format_exact(cfg.min_distance_m) << '\n';
    if (!cfg.sweep.empty())
        os << "sweep = " << cfg.sweep << '\n' << "sweep_values = " << values << '\n';
    return os.str();
}

std::vector<std::string> validation_errors(const ExperimentConfig &cfg)
{
    std::vector<std::string> errors;
    auto require = [&](bool ok, const char *field, const std::string &reason) {
        if (!ok)
            errors.push_back(std::string(field) + ": " + reason);
    };
    require(cfg.m_aps >= 1, "m_aps", "must be >= 1");
    require(cfg.k_ues >= 1, "k_ues", "must be >= 1");
    require(cfg.l_ant >= 1, "l_ant", "must be >= 1");
    require(cfg.n_ant >= 1, "n_ant", "must be >= 1");
    require(cfg.tau_c >= 1, "tau_c", "must be >= 1");
    require(cfg.tau_p >= 0, "tau_p", "must be >= 1, or 0 for K * N");
    if (cfg.n_ant >= 1 && cfg.tau_p >= 0 && cfg.k_ues >= 1)
    {
        const int tau_p = cfg.pilot_length();
        require(tau_p % cfg.n_ant == 0, "tau_p", "must be a multiple of n_ant");
        require(tau_p < cfg.tau_c, "tau_p", "must be smaller than tau_c");
        require(tau_p <= cfg.k_ues * cfg.n_ant, "tau_p", "must not exceed k_ues * n_ant");
    }
    require(std::isfinite(cfg.power_dbm), "power_dbm", "must be finite");
    require(std::isfinite(cfg.sigma2_dbm), "sigma2_dbm", "must be finite");
    require(cfg.area_m > 0.0 && std::isfinite(cfg.area_m), "area_m", "must be > 0");
    require(!cfg.schemes.empty(), "schemes", "at least one scheme is required");
    require(cfg.layouts >= 1, "layouts", "must be >= 1");
    require(cfg.blocks_per_layout >= 0, "blocks_per_layout", "must be >= 0");
    const bool needs_blocks = std::any_of(cfg.schemes.begin(), cfg.schemes.end(),
                                          [](Scheme s) { return s != Scheme::kLsfdMrClosed; });
    if (cfg.blocks_per_layout == 0 && needs_blocks)
        errors.emplace_back("blocks_per_layout: must be >= 1 unless the only scheme is lsfd-mr-closed");
    if (cfg.blocks_per_layout > std::numeric_limits<int>::max())
        errors.emplace_back("blocks_per_layout: too large");
    require(cfg.eta > 0.0 && cfg.eta <= 1.0, "eta", "must lie in (0, 1]");
    require(cfg.shadow_fading_db >= 0.0, "shadow_fading_db", "must be >= 0");
    require(cfg.min_distance_m > 0.0, "min_distance_m", "must be > 0");
    if (!cfg.sweep.empty())
    {
        static constexpr std::array<std::string_view, 8> sweepable{
            "m_aps", "k_ues", "l_ant", "n_ant", "tau_c", "tau_p", "layouts", "blocks_per_layout"};
        require(std::find(sweepable.begin(), sweepable.end(), cfg.sweep) != sweepable.end(), "sweep",
                "must name an integer key (m_aps, k_ues, l_ant, n_ant, tau_c, tau_p, layouts, blocks_per_layout)");
        require(!cfg.sweep_values.empty(), "sweep_values", "required when sweep is set");
        if (errors.empty())
            for (int value : cfg.sweep_values)
                for (const std::string &e : validation_errors(with_sweep_value(cfg, cfg.sweep, value)))
                    errors.push_back(e + " (" + cfg.sweep + " = " + std::to_string(value) + ")");
    }
    return errors;
}

void validate(const ExperimentConfig &cfg)
{
    const std::vector<std::string> errors = validation_errors(cfg);
    if (errors.empty())
        return;
    std::string what;
    for (const std::string &e : errors)
        what += (what.empty() ? "" : "\n") + e;
    throw ConfigError(what);
}

Aggregate aggregate(std::span<const double> samples)
{
    if (samples.empty())
        throw std::invalid_argument("aggregate: empty sample set");
    const std::size_t n = samples.size();
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());

    double sum = 0.0;
    for (double x : samples)
        sum += x;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double x : samples)
        ss += (x - mean) * (x - mean);

    const double pos = 0.05 * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = pos - static_cast<double>(lo);

    Aggregate out;
    out.average = mean;
    out.likely95 = sorted[lo] + frac * (sorted[hi] - sorted[lo]);
    out.std_error = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
    return out;
}

std::uint64_t layout_seed(const ExperimentConfig &cfg, int layout_index)
{
    return derive_seed(cfg.master_seed, Stream::kLayout, {static_cast<std::uint64_t>(layout_index)});
}

NetworkStatistics layout_statistics(const ExperimentConfig &cfg, int layout_index)
{
    const std::uint64_t seed = layout_seed(cfg, layout_index);
    const Layout layout = place_network(cfg.m_aps, cfg.k_ues, cfg.area_m, seed);
    StatisticsOptions options;
    options.l_ant = cfg.l_ant;
    options.n_ant = cfg.n_ant;
    options.fading = cfg.fading;
    options.pathloss.min_distance = cfg.min_distance_m;
    options.pathloss.shadow_std_db = cfg.shadow_fading_db;
    options.eta = cfg.eta;
    return build_network_statistics(layout, options, seed);
}

std::vector<std::vector<double>> run_layout(const ExperimentConfig &cfg, int layout_index)
{
    const std::uint64_t seed = layout_seed(cfg, layout_index);
    const NetworkStatistics stats = layout_statistics(cfg, layout_index);

    const std::vector<Precoder> precoders = build_precoders(stats, cfg.precoder, cfg.power_w());
    const PilotPlan plan = assign_pilots(cfg.k_ues, cfg.n_ant, cfg.pilot_length(), cfg.tau_c);
    const double sigma2 = cfg.sigma2_w();
    const EstimatorBank bank = build_estimators(stats, precoders, plan, sigma2);
    const ErrorCovariances cprime = build_error_covariances(bank, precoders);
    const double prelog = cfg.prelog();
    const int blocks = static_cast<int>(cfg.blocks_per_layout);

    std::map<LocalCombiner, LsfdStatistics> lsfd_cache;
    auto lsfd_stats = [&](LocalCombiner combiner) -> const LsfdStatistics & {
        auto it = lsfd_cache.find(combiner);
        if (it == lsfd_cache.end())
            it = lsfd_cache
                     .emplace(combiner, lsfd_expectations_mc(stats, bank, cprime, precoders, combiner,
                                                             cfg.blocks_per_layout, seed))
                     .first;
        return it->second;
    };
    auto lsfd_se = [&](const LsfdStatistics &ls, bool csd) {
        std::vector<double> se;
        for (int k = 0; k < cfg.k_ues; ++k)
        {
            const CMatrix &f_k = precoders[static_cast<std::size_t>(k)].f;
            se.push_back(csd ? se_lsfd(ls, k, csd_weights(cfg.m_aps, cfg.n_ant), f_k, sigma2, prelog)
                             : se_lsfd_optimal(ls, k, f_k, sigma2, prelog));
        }
        return se;
    };

    std::vector<std::vector<double>> out;
    for (Scheme scheme : cfg.schemes)
    {
        switch (scheme)
        {
        case Scheme::kFcpMmse:
            out.push_back(se_centralized(stats, bank, cprime, precoders, CentralCombiner::kMMSE, blocks, seed, prelog).se);
            break;
        case Scheme::kFcpMr:
            out.push_back(se_centralized(stats, bank, cprime, precoders, CentralCombiner::kMR, blocks, seed, prelog).se);
            break;
        case Scheme::kLsfdLmmse:
            out.push_back(lsfd_se(lsfd_stats(LocalCombiner::kLMMSE), false));
            break;
        case Scheme::kLsfdMr:
            out.push_back(lsfd_se(lsfd_stats(LocalCombiner::kMR), false));
            break;
        case Scheme::kCsdMr:
            out.push_back(lsfd_se(lsfd_stats(LocalCombiner::kMR), true));
            break;
        case Scheme::kLsfdMrClosed:
            out.push_back(se_lsfd_closed_form(LocalCombiner::kMR, closed_form_statistics(stats, bank, precoders),
                                              precoders, sigma2, prelog)
                              .se);
            break;
        }
    }
    return out;
}

std::vector<SchemeResult> run_experiment(const ExperimentConfig &cfg)
{
    validate(cfg);
    std::vector<std::vector<std::vector<double>>> per_layout(static_cast<std::size_t>(cfg.layouts));
    parallel_for(per_layout.size(), [&](std::size_t i) { per_layout[i] = run_layout(cfg, static_cast<int>(i)); });

    std::vector<SchemeResult> results;
    for (std::size_t s = 0; s < cfg.schemes.size(); ++s)
    {
        SchemeResult r;
        r.scheme = cfg.schemes[s];
        for (const auto &layout : per_layout)
            r.samples.insert(r.samples.end(), layout[s].begin(), layout[s].end());
        const Aggregate agg = aggregate(r.samples);
        r.average_se = agg.average;
        r.likely95_se = agg.likely95;
        r.mc_stderr = agg.std_error;
        results.push_back(std::move(r));
    }
    return results;
}

std::string csv_header()
{
    return "sweep_name,sweep_value,scheme,average_se,likely95_se,mc_stderr,layouts,blocks,seed";
}

std::string format_csv(std::span<const CsvRow> rows)
{
    std::string out = csv_header() + "\n";
    for (const CsvRow &r : rows)
    {
        out += r.sweep_name + ',' + format_double(r.sweep_value, 6) + ',' + r.scheme + ',' +
               format_double(r.average_se, 6) + ',' + format_double(r.likely95_se, 6) + ',' +
               format_double(r.mc_stderr, 6) + ',' + std::to_string(r.layouts) + ',' + std::to_string(r.blocks) +
               ',' + std::to_string(r.seed) + '\n';
    }
    return out;
}

void emit_csv(std::span<const CsvRow> rows, const std::string &path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error(path + ": cannot open for writing");
    out << format_csv(rows);
    out.flush();
    if (!out)
        throw std::runtime_error(path + ": write failed");
}

std::vector<CsvRow> parse_csv(std::istream &is)
{
    std::string line;
    if (!std::getline(is, line) || trim(line) != csv_header())
        throw std::runtime_error("csv: missing or unexpected header");
    std::vector<CsvRow> rows;
    int line_no = 1;
    while (std::getline(is, line))
    {
        ++line_no;
        if (trim(line).empty())
            continue;
        const std::vector<std::string> f = split(line, ',');
        if (f.size() != 9)
            throw std::runtime_error("csv: line " + std::to_string(line_no) + ": expected 9 fields");
        CsvRow r;
        r.sweep_name = f[0];
        r.sweep_value = parse_number<double>("sweep_value", f[1], "a number");
        r.scheme = f[2];
        r.average_se = parse_number<double>("average_se", f[3], "a number");
        r.likely95_se = parse_number<double>("likely95_se", f[4], "a number");
        r.mc_stderr = parse_number<double>("mc_stderr", f[5], "a number");
        r.layouts = parse_number<long>("layouts", f[6], "an integer");
        r.blocks = parse_number<long>("blocks", f[7], "an integer");
        r.seed = parse_number<std::uint64_t>("seed", f[8], "an integer");
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<CsvRow> read_csv(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error(path + ": cannot open for reading");
    return parse_csv(in);
}

std::span<const std::string_view> preset_names()
{
    return kPresetNames;
}

Preset preset(std::string_view name)
{
    ExperimentConfig base;
    base.k_ues = 10;
    base.tau_c = 200;
    base.power_dbm = 23.0103;
    base.layouts = 50;
    base.blocks_per_layout = 1000;

    Preset p;
    p.name = std::string(name);
    if (name == "fig2")
    {
        base.l_ant = 2;
        base.n_ant = 2;
        base.tau_p = base.k_ues * base.n_ant / 2;
        base.schemes = {Scheme::kFcpMmse, Scheme::kFcpMr, Scheme::kLsfdLmmse, Scheme::kLsfdMr, Scheme::kLsfdMrClosed};
        p.series.push_back({"fig2", "m_aps", {10, 20, 30, 40, 50}, base});
    }
    else if (name == "fig3")
    {
        base.m_aps = 10;
        base.n_ant = 4;
        base.schemes = {Scheme::kFcpMr};
        for (FadingMode fading : {FadingMode::kRician, FadingMode::kRayleigh})
        {
            for (PrecoderKind kind : {PrecoderKind::kStatistical, PrecoderKind::kUniform})
            {
                ExperimentConfig cfg = base;
                cfg.fading = fading;
                cfg.precoder = kind;
                const std::string stem = std::string("fig3_") + (fading == FadingMode::kRician ? "rician" : "rayleigh") +
                                         (kind == PrecoderKind::kStatistical ? "_eq17" : "_uniform");
                p.series.push_back({stem, "l_ant", {1, 2, 3, 4, 5, 6}, cfg});
            }
        }
    }
    else if (name == "fig4")
    {
        base.m_aps = 20;
        base.n_ant = 2;
        base.schemes = {Scheme::kFcpMr, Scheme::kLsfdMr, Scheme::kCsdMr};
        p.series.push_back({"fig4", "l_ant", {1, 2, 3, 4}, base});
    }
    else if (name == "fig5")
    {
        base.l_ant = 4;
        base.schemes = {Scheme::kFcpMmse};
        for (int m : {10, 20})
        {
            ExperimentConfig cfg = base;
            cfg.m_aps = m;
            p.series.push_back({"fig5_m" + std::to_string(m), "n_ant", {1, 2, 3, 4, 5, 6, 7, 8}, cfg});
        }
    }
    else
        throw std::invalid_argument("preset: unknown name '" + std::string(name) + "' (expected fig2, fig3, fig4 or fig5)");
    return p;
}

ExperimentConfig with_sweep_value(const ExperimentConfig &base, const std::string &sweep, int value)
{
    ExperimentConfig cfg = base;
    cfg.sweep.clear();
    cfg.sweep_values.clear();
    apply_setting(cfg, sweep, std::to_string(value));
    return cfg;
}

std::vector<CsvRow> run_sweep(const SweepSeries &series)
{
    std::vector<CsvRow> rows;
    for (int value : series.values)
    {
        const ExperimentConfig cfg = with_sweep_value(series.base, series.sweep, value);
        for (const SchemeResult &r : run_experiment(cfg))
            rows.push_back({series.sweep, static_cast<double>(value), std::string(scheme_name(r.scheme)), r.average_se,
                            r.likely95_se, r.mc_stderr, cfg.layouts, cfg.blocks_per_layout, cfg.master_seed});
    }
    return rows;
}

std::vector<CsvRow> run_config(const ExperimentConfig &cfg)
{
    validate(cfg);
    if (!cfg.sweep.empty())
        return run_sweep({"run", cfg.sweep, cfg.sweep_values, cfg});
    std::vector<CsvRow> rows;
    for (const SchemeResult &r : run_experiment(cfg))
        rows.push_back({"none", 0.0, std::string(scheme_name(r.scheme)), r.average_se, r.likely95_se, r.mc_stderr,
                        cfg.layouts, cfg.blocks_per_layout, cfg.master_seed});
    return rows;
}

} // namespace cfmimo
