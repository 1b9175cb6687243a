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

// tmmse_sim: Monte Carlo rate experiments, CDF tables and oracle checks.
//
// Every run flag can also be set through an environment variable named TMMSE_<FLAG>,
// e.g. TMMSE_SEED=7 or TMMSE_POWER_MODE=sum. Command-line values win.

#include "CLI11.hpp"

#include "tmmse/io.hpp"
#include "tmmse/oracle.hpp"
#include "tmmse/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace
{

std::vector<std::string> split_list(const std::string &s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty())
            out.push_back(item);
    return out;
}

struct RunFlags
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> drops, samples_stats, samples_eval, threads;
    std::optional<std::string> schemes, power_mode, out;
    bool strict = false, clamp = false, emit_cdf = false, dump_gains = false, dump_stats = false;
};

tmmse::ScenarioConfig resolve(const RunFlags &f)
{
    using namespace tmmse;
    ScenarioConfig c = f.config.empty() ? ScenarioConfig{} : load_config(f.config);
    if (f.seed)
        c.seed = *f.seed;
    if (f.drops)
        c.drops = *f.drops;
    if (f.samples_stats)
        c.stats_samples = *f.samples_stats;
    if (f.samples_eval)
        c.eval_samples = *f.samples_eval;
    if (f.threads)
        c.threads = *f.threads;
    if (f.out)
        c.out_dir = *f.out;
    if (f.schemes)
    {
        c.schemes.clear();
        for (const auto &s : split_list(*f.schemes))
            c.schemes.push_back(parse_scheme(s));
    }
    if (f.power_mode)
    {
        if (*f.power_mode == "both")
            c.power_modes = {PowerMode::sum, PowerMode::per_tx};
        else
            c.power_modes = {parse_power_mode(*f.power_mode)};
    }
    c.strict = c.strict || f.strict;
    c.clamp_negative_powers = c.clamp_negative_powers || f.clamp;
    c.emit_cdf = c.emit_cdf || f.emit_cdf;
    c.dump_gains = c.dump_gains || f.dump_gains;
    c.dump_statistics = c.dump_statistics || f.dump_stats;
    c.validate();
    return c;
}

int run_command(const RunFlags &flags, bool print_config)
{
    const auto cfg = resolve(flags);
    if (print_config)
    {
        std::cout << tmmse::config_to_json(cfg).dump(2) << '\n';
        return 0;
    }
    std::cerr << "tmmse_sim: " << cfg.drops << " drops, " << cfg.schemes.size() << " schemes -> " << cfg.out_dir
              << '\n';
    const auto res = tmmse::run_and_write(cfg);
    for (const auto &d : res.drops)
    {
        if (!d.ok)
            std::cerr << "drop " << d.drop << " failed: " << d.error << '\n';
        for (const auto &w : d.warnings)
            std::cerr << "drop " << d.drop << " warning: " << w << '\n';
    }
    std::cerr << "done in " << res.wall_seconds << " s, " << res.failed() << " failed drops\n";
    return res.failed() == 0 ? 0 : 2;
}

int cdf_command(const std::string &in, const std::string &out)
{
    std::ifstream is(in);
    if (!is)
        throw std::runtime_error("cannot open " + in);
    const auto points = tmmse::emit_cdf(tmmse::read_rates_csv(is));
    if (out.empty() || out == "-")
        tmmse::write_cdf_csv(std::cout, points);
    else
    {
        std::ofstream os(out);
        if (!os)
            throw std::runtime_error("cannot write " + out);
        tmmse::write_cdf_csv(os, points);
    }
    return 0;
}

// Designs the closed form for the fixture's information structure on its exact support and
// compares it with the oracle user by user.
int oracle_command(const std::string &path, double tol)
{
    using namespace tmmse;
    std::ifstream is(path);
    if (!is)
        throw std::runtime_error("cannot open " + path);
    const json j = json::parse(is);
    const auto problem = problem_from_json(j);
    if (!j.contains("information"))
        throw std::invalid_argument("oracle check needs a named \"information\" structure");
    const auto info = parse_information_structure(j.at("information").get<std::string>());
    const Scheme scheme = info == InformationStructure::no_sharing       ? Scheme::no_sharing
                          : info == InformationStructure::unidirectional ? Scheme::unidirectional
                          : info == InformationStructure::bidirectional  ? Scheme::bidirectional
                                                                         : Scheme::centralized;
    const auto precoder = design_precoder(scheme, problem.setup(), problem.model.pool());
    bool ok = true;
    std::printf("%-6s %-14s %-14s %-14s %-14s %-14s\n", "user", "max_diff", "stationarity", "gap", "mse_closed",
                "mse_oracle");
    for (int k = 0; k < problem.users(); ++k)
    {
        double gap = 0.0;
        const auto exact = solve_team_exact(problem, k);
        const auto closed = solution_from_precoder(problem, *precoder, k, &gap);
        const double diff = max_difference(exact, closed);
        const double res = verify_stationarity(problem, closed, k);
        std::printf("%-6d %-14.3e %-14.3e %-14.3e %-14.10f %-14.10f\n", k, diff, res, gap,
                    mse_exact(problem, closed, k), mse_exact(problem, exact, k));
        ok = ok && diff <= tol && res <= tol && gap <= tol;
    }
    std::printf("%s\n", ok ? "MATCH" : "MISMATCH");
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Team MMSE precoding simulator for radio-stripe networks"};
    app.require_subcommand(0, 1);

    RunFlags f;
    bool print_config = false;
    app.add_option("--config", f.config, "scenario JSON")->envname("TMMSE_CONFIG")->check(CLI::ExistingFile);
    app.add_option("--seed", f.seed, "base seed")->envname("TMMSE_SEED");
    app.add_option("--drops", f.drops, "number of RX drops")->envname("TMMSE_DROPS");
    app.add_option("--samples-stats", f.samples_stats, "statistics-phase samples per drop")
        ->envname("TMMSE_SAMPLES_STATS");
    app.add_option("--samples-eval", f.samples_eval, "evaluation-phase samples per drop")
        ->envname("TMMSE_SAMPLES_EVAL");
    app.add_option("--schemes", f.schemes, "comma list of local-mmse,no-share,uni,bi,centralized")
        ->envname("TMMSE_SCHEMES");
    app.add_option("--power-mode", f.power_mode, "sum|per-tx|both")
        ->envname("TMMSE_POWER_MODE")
        ->check(CLI::IsMember({"sum", "per-tx", "both"}));
    app.add_option("--out", f.out, "output directory")->envname("TMMSE_OUT");
    app.add_option("--threads", f.threads, "worker threads over drops")->envname("TMMSE_THREADS");
    app.add_flag("--strict", f.strict, "abort the run on the first failed drop")->envname("TMMSE_STRICT");
    app.add_flag("--clamp-negative-powers", f.clamp, "clamp negative duality powers instead of failing")
        ->envname("TMMSE_CLAMP_NEGATIVE_POWERS");
    app.add_flag("--emit-cdf", f.emit_cdf, "also write cdf.csv")->envname("TMMSE_EMIT_CDF");
    app.add_flag("--dump-gains", f.dump_gains, "write per-drop gains CSV")->envname("TMMSE_DUMP_GAINS");
    app.add_flag("--dump-stats", f.dump_stats, "write per-drop binary statistics")->envname("TMMSE_DUMP_STATS");
    app.add_flag("--print-config", print_config, "print the resolved config and exit");

    auto *cdf = app.add_subcommand("cdf", "empirical CDF table from a rates CSV");
    std::string cdf_in, cdf_out;
    cdf->add_option("rates", cdf_in, "rates.csv")->required()->check(CLI::ExistingFile);
    cdf->add_option("-o,--output", cdf_out, "output CSV (default stdout)");

    auto *oracle = app.add_subcommand("oracle", "compare a closed-form precoder with the exact team solution");
    std::string fixture;
    double tol = 1e-8;
    oracle->add_option("--fixture", fixture, "finite-support problem JSON")->required()->check(CLI::ExistingFile);
    oracle->add_option("--tol", tol, "pass tolerance");

    CLI11_PARSE(app, argc, argv);
    try
    {
        if (*cdf)
            return cdf_command(cdf_in, cdf_out);
        if (*oracle)
            return oracle_command(fixture, tol);
        return run_command(f, print_config);
    }
    catch (const std::exception &e)
    {
        std::cerr << "tmmse_sim: error: " << e.what() << '\n';
        return 1;
    }
}
