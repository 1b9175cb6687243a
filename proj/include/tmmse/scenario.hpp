// SPDX-License-Identifier: Apache-2.0
//
// tmmse-stripes: distributed team MMSE precoding for radio-stripe networks
// Copyright (C) 2026 The tmmse-stripes authors
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

#ifndef TMMSE_SCENARIO_HPP
#define TMMSE_SCENARIO_HPP

// Scenario configuration and the Monte Carlo experiment runner:
// drops x schemes x power modes, with deterministic seeding and CSV/JSON output.

#include "tmmse/channel.hpp"
#include "tmmse/evaluation.hpp"
#include "tmmse/io.hpp"
#include "tmmse/precoding.hpp"
#include "tmmse/topology.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace tmmse
{

inline constexpr int schema_version = 1;
inline constexpr const char *library_version = "1.0.0";

struct ScenarioConfig
{
    // geometry
    int stripes = 5;
    int per_stripe = 20;
    int antennas = 1;
    int users = 10;
    double width_m = 100.0;
    double depth_m = 50.0;
    double height_m = 7.0;
    // channel
    ChannelParams channel;
    // association
    int serving_stripes = 2;
    // weights on the simplex; empty means uniform 1/K
    std::vector<double> weights;
    // per-TX budgets in mW: one value for a symmetric budget or one per TX
    std::vector<double> per_tx_power_mw = {1.0};
    // sum budget in mW; unset means the sum of the per-TX budgets
    std::optional<double> sum_power_mw;
    // Monte Carlo
    int drops = 100;
    int stats_samples = 1000;
    int eval_samples = 1000;
    std::uint64_t seed = 1;
    std::vector<Scheme> schemes = {Scheme::local_mmse, Scheme::no_sharing, Scheme::unidirectional,
                                   Scheme::bidirectional, Scheme::centralized};
    std::vector<PowerMode> power_modes = {PowerMode::sum, PowerMode::per_tx};
    LogBase log_base = LogBase::bits;
    // run control and outputs
    std::string out_dir = "out";
    bool emit_cdf = false;
    bool strict = false;
    bool clamp_negative_powers = false;
    bool dump_gains = false;
    bool dump_statistics = false;
    int threads = 1;

    int tx_count() const { return stripes * per_stripe; }

    RVec weight_vector() const
    {
        if (weights.empty())
            return uniform_weights(users);
        return Eigen::Map<const RVec>(weights.data(), static_cast<Eigen::Index>(weights.size()));
    }

    RVec budgets() const
    {
        if (per_tx_power_mw.size() == 1)
            return RVec::Constant(tx_count(), per_tx_power_mw.front());
        return Eigen::Map<const RVec>(per_tx_power_mw.data(), static_cast<Eigen::Index>(per_tx_power_mw.size()));
    }

    double sum_power() const { return sum_power_mw ? *sum_power_mw : budgets().sum(); }

    void validate() const
    {
        if (stripes < 1 || per_stripe < 1 || antennas < 1 || users < 1)
            throw std::invalid_argument("geometry counts must be positive");
        if (!(width_m > 0.0) || !(depth_m > 0.0) || !(height_m >= 0.0))
            throw std::invalid_argument("service area must be positive and height nonnegative");
        if (!(channel.ricean >= 0.0) || !(channel.shadow_sigma_db >= 0.0) || !(channel.bandwidth_hz > 0.0) ||
            !(channel.carrier_ghz > 0.0))
            throw std::invalid_argument("invalid channel parameters");
        if (serving_stripes < 1 || serving_stripes > stripes)
            throw std::invalid_argument("serving stripe count must lie in [1, stripes]");
        if (!weights.empty())
        {
            if (static_cast<int>(weights.size()) != users)
                throw std::invalid_argument("need one weight per user");
            check_simplex(weight_vector());
        }
        if (per_tx_power_mw.size() != 1 && static_cast<int>(per_tx_power_mw.size()) != tx_count())
            throw std::invalid_argument("per-TX power must be a single value or one value per TX");
        for (double p : per_tx_power_mw)
            if (!(p > 0.0))
                throw std::invalid_argument("per-TX power budgets must be positive");
        if (sum_power_mw && !(*sum_power_mw > 0.0))
            throw std::invalid_argument("sum power must be positive");
        if (drops < 1 || stats_samples < 1 || eval_samples < 1)
            throw std::invalid_argument("drops and sample counts must be positive");
        if (schemes.empty() || power_modes.empty())
            throw std::invalid_argument("at least one scheme and one power mode are required");
        if (threads < 1)
            throw std::invalid_argument("thread count must be positive");
    }
};

// ---------- CONFIG SERIALIZATION ----------

inline json config_to_json(const ScenarioConfig &c)
{
    json j;
    j["schema_version"] = schema_version;
    j["geometry"] = {{"stripes", c.stripes},   {"tx_per_stripe", c.per_stripe}, {"antennas", c.antennas},
                     {"users", c.users},       {"width_m", c.width_m},          {"depth_m", c.depth_m},
                     {"height_m", c.height_m}};
    j["channel"] = {{"ricean_factor", c.channel.ricean},
                    {"carrier_ghz", c.channel.carrier_ghz},
                    {"bandwidth_hz", c.channel.bandwidth_hz},
                    {"noise_figure_db", c.channel.noise_figure_db},
                    {"shadow_sigma_db", c.channel.shadow_sigma_db}};
    j["association"] = {{"serving_stripes", c.serving_stripes}};
    j["weights"] = c.weights.empty() ? json(nullptr) : json(c.weights);
    j["power"] = {{"per_tx_mw", c.per_tx_power_mw},
                  {"sum_mw", c.sum_power_mw ? json(*c.sum_power_mw) : json(nullptr)}};
    j["monte_carlo"] = {{"drops", c.drops},
                        {"stats_samples", c.stats_samples},
                        {"eval_samples", c.eval_samples},
                        {"seed", c.seed}};
    json schemes = json::array();
    for (auto s : c.schemes)
        schemes.push_back(to_string(s));
    j["schemes"] = schemes;
    json modes = json::array();
    for (auto m : c.power_modes)
        modes.push_back(to_string(m));
    j["power_modes"] = modes;
    j["rate_log_base"] = c.log_base == LogBase::bits ? "2" : "e";
    j["output"] = {{"dir", c.out_dir},
                   {"emit_cdf", c.emit_cdf},
                   {"dump_gains", c.dump_gains},
                   {"dump_statistics", c.dump_statistics}};
    j["run"] = {{"strict", c.strict}, {"clamp_negative_powers", c.clamp_negative_powers}, {"threads", c.threads}};
    return j;
}

// Missing keys keep their defaults.
inline ScenarioConfig config_from_json(const json &j)
{
    ScenarioConfig c;
    if (j.contains("schema_version") && j["schema_version"].get<int>() != schema_version)
        throw std::invalid_argument("unsupported config schema_version");
    if (auto g = j.find("geometry"); g != j.end())
    {
        c.stripes = g->value("stripes", c.stripes);
        c.per_stripe = g->value("tx_per_stripe", c.per_stripe);
        c.antennas = g->value("antennas", c.antennas);
        c.users = g->value("users", c.users);
        c.width_m = g->value("width_m", c.width_m);
        c.depth_m = g->value("depth_m", c.depth_m);
        c.height_m = g->value("height_m", c.height_m);
    }
    if (auto ch = j.find("channel"); ch != j.end())
    {
        c.channel.ricean = ch->value("ricean_factor", c.channel.ricean);
        c.channel.carrier_ghz = ch->value("carrier_ghz", c.channel.carrier_ghz);
        c.channel.bandwidth_hz = ch->value("bandwidth_hz", c.channel.bandwidth_hz);
        c.channel.noise_figure_db = ch->value("noise_figure_db", c.channel.noise_figure_db);
        c.channel.shadow_sigma_db = ch->value("shadow_sigma_db", c.channel.shadow_sigma_db);
    }
    if (auto a = j.find("association"); a != j.end())
        c.serving_stripes = a->value("serving_stripes", c.serving_stripes);
    if (auto w = j.find("weights"); w != j.end() && !w->is_null())
        c.weights = w->get<std::vector<double>>();
    if (auto p = j.find("power"); p != j.end())
    {
        if (auto t = p->find("per_tx_mw"); t != p->end())
            c.per_tx_power_mw = t->is_array() ? t->get<std::vector<double>>() : std::vector<double>{t->get<double>()};
        if (auto s = p->find("sum_mw"); s != p->end() && !s->is_null())
            c.sum_power_mw = s->get<double>();
    }
    if (auto mc = j.find("monte_carlo"); mc != j.end())
    {
        c.drops = mc->value("drops", c.drops);
        c.stats_samples = mc->value("stats_samples", c.stats_samples);
        c.eval_samples = mc->value("eval_samples", c.eval_samples);
        c.seed = mc->value("seed", c.seed);
    }
    if (auto s = j.find("schemes"); s != j.end())
    {
        c.schemes.clear();
        for (const auto &v : *s)
            c.schemes.push_back(parse_scheme(v.get<std::string>()));
    }
    if (auto m = j.find("power_modes"); m != j.end())
    {
        c.power_modes.clear();
        for (const auto &v : *m)
            c.power_modes.push_back(parse_power_mode(v.get<std::string>()));
    }
    if (auto b = j.find("rate_log_base"); b != j.end())
    {
        const auto s = b->is_string() ? b->get<std::string>() : std::to_string(b->get<int>());
        if (s == "2")
            c.log_base = LogBase::bits;
        else if (s == "e")
            c.log_base = LogBase::nats;
        else
            throw std::invalid_argument("rate_log_base must be \"2\" or \"e\"");
    }
    if (auto o = j.find("output"); o != j.end())
    {
        c.out_dir = o->value("dir", c.out_dir);
        c.emit_cdf = o->value("emit_cdf", c.emit_cdf);
        c.dump_gains = o->value("dump_gains", c.dump_gains);
        c.dump_statistics = o->value("dump_statistics", c.dump_statistics);
    }
    if (auto r = j.find("run"); r != j.end())
    {
        c.strict = r->value("strict", c.strict);
        c.clamp_negative_powers = r->value("clamp_negative_powers", c.clamp_negative_powers);
        c.threads = r->value("threads", c.threads);
    }
    return c;
}

inline ScenarioConfig load_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config " + path);
    return config_from_json(json::parse(in));
}

// ---------- RESULTS ----------

struct RateRecord
{
    int drop = 0;
    int user = 0;
    Scheme scheme = Scheme::no_sharing;
    PowerMode mode = PowerMode::sum;
    double rate = 0.0;
};

struct DropResult
{
    int drop = 0;
    bool ok = true;
    std::string error;
    std::vector<Point3> receivers;
    std::vector<SchemeReport> schemes;
    std::vector<std::string> warnings;
    std::vector<std::pair<Scheme, NamedMatrices>> statistics;
    ChannelStatistics channel;
    double statistics_seconds = 0.0;
    double evaluation_seconds = 0.0;
};

struct RunResult
{
    std::vector<DropResult> drops;
    double wall_seconds = 0.0;

    int failed() const
    {
        return static_cast<int>(std::count_if(drops.begin(), drops.end(), [](const DropResult &d) { return !d.ok; }));
    }

    std::vector<RateRecord> records() const
    {
        std::vector<RateRecord> out;
        for (const auto &d : drops)
        {
            if (!d.ok)
                continue;
            for (const auto &s : d.schemes)
                for (const auto &m : s.modes)
                    for (Eigen::Index k = 0; k < m.rates.size(); ++k)
                        out.push_back({d.drop, static_cast<int>(k), s.scheme, m.mode, m.rates[k]});
        }
        return out;
    }
};

// Everything for one user drop: positions, association, statistics, then each scheme's
// statistics phase and evaluation phase. Throws on any module error.
inline DropResult run_drop(const ScenarioConfig &cfg, int drop)
{
    using clock = std::chrono::steady_clock;
    DropResult out;
    out.drop = drop;
    const auto d = static_cast<std::uint64_t>(drop);

    Deployment dep = build_grid_deployment(cfg.stripes, cfg.per_stripe, {cfg.width_m, cfg.depth_m}, cfg.height_m,
                                           cfg.antennas);
    auto geo = make_stream(cfg.seed, d, Phase::geometry, 0);
    dep.set_receivers(draw_uniform_receivers(dep.area, cfg.users, geo));
    out.receivers = dep.rx;
    const AssociationMap assoc = assign_serving_stripes(dep, cfg.serving_stripes);
    out.channel = build_statistics(dep, assoc, cfg.channel, geo);

    PrecodingSetup setup;
    setup.layout = dep.layout;
    setup.antennas = cfg.antennas;
    setup.users = cfg.users;
    setup.weights = cfg.weight_vector();
    setup.power = cfg.sum_power();
    setup.psi = out.channel.error_covariances(setup.weights);
    setup.assoc = assoc;

    const WeightedPool stats_pool =
        monte_carlo_pool(sample_pool(out.channel, cfg.seed, d, Phase::statistics, cfg.stats_samples));
    const WeightedPool eval_pool =
        monte_carlo_pool(sample_pool(out.channel, cfg.seed, d, Phase::evaluation, cfg.eval_samples));
    const RVec budgets = cfg.budgets();
    const EvaluationOptions opt{cfg.clamp_negative_powers, cfg.log_base};

    for (Scheme scheme : cfg.schemes)
    {
        const auto t0 = clock::now();
        const auto precoder = design_precoder(scheme, setup, stats_pool);
        const auto t1 = clock::now();
        out.schemes.push_back(evaluate_scheme(*precoder, eval_pool, budgets, cfg.power_modes, opt));
        const auto t2 = clock::now();
        out.statistics_seconds += std::chrono::duration<double>(t1 - t0).count();
        out.evaluation_seconds += std::chrono::duration<double>(t2 - t1).count();
        for (const auto &w : out.schemes.back().warnings)
            out.warnings.push_back(to_string(scheme) + ": " + w);
        if (cfg.dump_statistics)
            out.statistics.emplace_back(scheme, precoder->statistics_dump());
    }
    return out;
}

class RunAborted : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Runs every drop, in parallel when cfg.threads > 1. Results are stored by drop index, so the
// output order does not depend on scheduling. A failed drop is recorded and skipped; with
// cfg.strict the first failure aborts the run.
inline RunResult run_scenario(const ScenarioConfig &cfg)
{
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    RunResult res;
    res.drops.resize(cfg.drops);
    std::atomic<int> next{0};
    std::atomic<bool> abort{false};
    auto worker = [&]
    {
        for (int d = next++; d < cfg.drops && !abort; d = next++)
        {
            try
            {
                res.drops[d] = run_drop(cfg, d);
            }
            catch (const std::exception &e)
            {
                res.drops[d] = DropResult{};
                res.drops[d].drop = d;
                res.drops[d].ok = false;
                res.drops[d].error = e.what();
                if (cfg.strict)
                    abort = true;
            }
        }
    };
    const int workers = std::min(cfg.threads, cfg.drops);
    if (workers <= 1)
        worker();
    else
    {
        std::vector<std::thread> pool;
        for (int i = 0; i < workers; ++i)
            pool.emplace_back(worker);
        for (auto &t : pool)
            t.join();
    }
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (cfg.strict)
        for (const auto &d : res.drops)
            if (!d.ok && !d.error.empty())
                throw RunAborted("drop " + std::to_string(d.drop) + " failed: " + d.error);
    return res;
}

// ---------- OUTPUTS ----------

inline void write_rates_csv(std::ostream &os, const std::vector<RateRecord> &records)
{
    os << "drop,user,scheme,power_mode,rate_bpcu\n";
    for (const auto &r : records)
        os << r.drop << ',' << r.user << ',' << to_string(r.scheme) << ',' << to_string(r.mode) << ','
           << format_double(r.rate) << '\n';
}

inline std::vector<RateRecord> read_rates_csv(std::istream &is)
{
    std::string line;
    if (!std::getline(is, line) || line.rfind("drop,user,scheme,power_mode,rate", 0) != 0)
        throw std::runtime_error("rates CSV header missing");
    std::vector<RateRecord> out;
    while (std::getline(is, line))
    {
        if (line.empty())
            continue;
        std::stringstream ss(line);
        std::string drop, user, scheme, mode, rate;
        if (!std::getline(ss, drop, ',') || !std::getline(ss, user, ',') || !std::getline(ss, scheme, ',') ||
            !std::getline(ss, mode, ',') || !std::getline(ss, rate))
            throw std::runtime_error("malformed rates CSV line: " + line);
        out.push_back({std::stoi(drop), std::stoi(user), parse_scheme(scheme), parse_power_mode(mode), std::stod(rate)});
    }
    return out;
}

struct CdfPoint
{
    Scheme scheme;
    PowerMode mode;
    double rate;
    double cdf;
};

// Empirical CDF per (scheme, power mode): sorted rates with value i/n.
inline std::vector<CdfPoint> emit_cdf(const std::vector<RateRecord> &records)
{
    if (records.empty())
        throw std::invalid_argument("no rate records to build a CDF from");
    std::map<std::pair<int, int>, std::vector<double>> groups;
    for (const auto &r : records)
        groups[{static_cast<int>(r.scheme), static_cast<int>(r.mode)}].push_back(r.rate);
    std::vector<CdfPoint> out;
    for (auto &[key, rates] : groups)
    {
        std::sort(rates.begin(), rates.end());
        const double n = static_cast<double>(rates.size());
        for (std::size_t i = 0; i < rates.size(); ++i)
            out.push_back({static_cast<Scheme>(key.first), static_cast<PowerMode>(key.second), rates[i],
                           static_cast<double>(i + 1) / n});
    }
    return out;
}

inline void write_cdf_csv(std::ostream &os, const std::vector<CdfPoint> &points)
{
    os << "scheme,power_mode,rate_bpcu,cdf\n";
    for (const auto &p : points)
        os << to_string(p.scheme) << ',' << to_string(p.mode) << ',' << format_double(p.rate) << ','
           << format_double(p.cdf) << '\n';
}

inline json report_to_json(const ScenarioConfig &cfg, const RunResult &res)
{
    json j;
    j["schema_version"] = schema_version;
    j["rate_unit"] = cfg.log_base == LogBase::bits ? "bit/channel-use" : "nat/channel-use";
    json drops = json::array();
    for (const auto &d : res.drops)
    {
        json jd;
        jd["drop"] = d.drop;
        jd["ok"] = d.ok;
        if (!d.ok)
        {
            jd["error"] = d.error;
            drops.push_back(std::move(jd));
            continue;
        }
        json rx = json::array();
        for (const auto &p : d.receivers)
            rx.push_back({p.x, p.y});
        jd["receivers"] = rx;
        jd["warnings"] = d.warnings;
        json schemes = json::object();
        for (const auto &s : d.schemes)
        {
            json js;
            js["mse"] = to_json(s.moments.mse);
            js["mse_stderr"] = to_json(s.moments.mse_stderr);
            js["gamma"] = to_json(s.gamma);
            json modes = json::object();
            for (const auto &m : s.modes)
                modes[to_string(m.mode)] = {{"p", to_json(m.p)},
                                            {"nu2", m.nu2},
                                            {"rates", to_json(m.rates)},
                                            {"tx_power_mw", to_json(m.tx_power)}};
            js["modes"] = std::move(modes);
            schemes[to_string(s.scheme)] = std::move(js);
        }
        jd["schemes"] = std::move(schemes);
        drops.push_back(std::move(jd));
    }
    j["drops"] = std::move(drops);
    return j;
}

inline json manifest_to_json(const ScenarioConfig &cfg, const RunResult *res)
{
    json j;
    j["schema_version"] = schema_version;
    j["code_version"] = library_version;
    j["config"] = config_to_json(cfg);
    j["seed_derivation"] = {
        {"rule", "splitmix64 chain: seed -> drop -> phase -> realization; mt19937_64 per substream"},
        {"phases", {{"geometry", static_cast<int>(Phase::geometry)},
                    {"statistics", static_cast<int>(Phase::statistics)},
                    {"evaluation", static_cast<int>(Phase::evaluation)}}},
        {"base_seed", cfg.seed}};
    json drops = json::array();
    for (int d = 0; d < cfg.drops; ++d)
        drops.push_back({{"drop", d},
                         {"geometry_seed", stream_seed(cfg.seed, d, Phase::geometry, 0)},
                         {"statistics_seed0", stream_seed(cfg.seed, d, Phase::statistics, 0)},
                         {"evaluation_seed0", stream_seed(cfg.seed, d, Phase::evaluation, 0)}});
    j["seed_derivation"]["drops"] = std::move(drops);
    if (!res)
    {
        j["status"] = "running";
        return j;
    }
    double stats = 0.0, eval = 0.0;
    json failures = json::array();
    for (const auto &d : res->drops)
    {
        stats += d.statistics_seconds;
        eval += d.evaluation_seconds;
        if (!d.ok)
            failures.push_back({{"drop", d.drop}, {"error", d.error}});
    }
    j["status"] = "finished";
    j["failed_drops"] = res->failed();
    j["failures"] = std::move(failures);
    j["wall_clock_seconds"] = {{"total", res->wall_seconds}, {"statistics_phase", stats}, {"evaluation_phase", eval}};
    return j;
}

// run(config): writes manifest.json first, runs, then rates.csv, report.json, the final
// manifest and optionally cdf.csv and per-drop dumps.
inline RunResult run_and_write(const ScenarioConfig &cfg)
{
    cfg.validate();
    namespace fs = std::filesystem;
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    auto write = [&](const std::string &name, auto &&fn)
    {
        std::ofstream os(dir / name, std::ios::binary);
        if (!os)
            throw std::runtime_error("cannot write " + (dir / name).string());
        fn(os);
    };
    write("manifest.json", [&](std::ostream &os) { os << manifest_to_json(cfg, nullptr).dump(2) << '\n'; });

    RunResult res;
    try
    {
        res = run_scenario(cfg);
    }
    catch (const RunAborted &)
    {
        write("manifest.json",
              [&](std::ostream &os)
              {
                  auto m = manifest_to_json(cfg, nullptr);
                  m["status"] = "aborted";
                  os << m.dump(2) << '\n';
              });
        throw;
    }

    const auto records = res.records();
    write("rates.csv", [&](std::ostream &os) { write_rates_csv(os, records); });
    write("report.json", [&](std::ostream &os) { os << report_to_json(cfg, res).dump(2) << '\n'; });
    if (cfg.emit_cdf && !records.empty())
        write("cdf.csv", [&](std::ostream &os) { write_cdf_csv(os, emit_cdf(records)); });
    for (const auto &d : res.drops)
    {
        if (!d.ok)
            continue;
        if (cfg.dump_gains)
            write("gains_drop" + std::to_string(d.drop) + ".csv", [&](std::ostream &os) { write_gains_csv(os, d.channel); });
        for (const auto &[scheme, mats] : d.statistics)
            write("stats_drop" + std::to_string(d.drop) + "_" + to_string(scheme) + ".bin",
                  [&](std::ostream &os) { write_matrix_dump(os, mats); });
    }
    write("manifest.json", [&](std::ostream &os) { os << manifest_to_json(cfg, &res).dump(2) << '\n'; });
    return res;
}

} // namespace tmmse

#endif
