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

// Acceptance criteria 1-9. Prints one PASS/FAIL line per criterion and exits nonzero if any
// criterion fails. All tolerances are fixed below.

#include "random_problems.hpp"

#include "tmmse/evaluation.hpp"
#include "tmmse/oracle.hpp"
#include "tmmse/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

using namespace tmmse;
using namespace tmmse::testing;

namespace
{

// ---------- PINNED TOLERANCES ----------
constexpr int oracle_problems = 60;           // at least 50
constexpr std::size_t oracle_max_points = 729;
constexpr double oracle_tol = 1e-8;
constexpr double oracle_seconds = 60.0;
constexpr double telescoping_tol = 1e-9;
constexpr int reduction_instances = 20;
constexpr double reduction_tol = 1e-8;
constexpr double ordering_slack = 1e-10;      // exact ordering up to rounding
constexpr double ordering_se = 2.0;           // Monte Carlo: standard errors
constexpr double local_mmse_rel_tol = 1e-6;
constexpr double duality_exact_rel_tol = 1e-6;
constexpr double duality_mc_rel_tol = 0.02;
constexpr int duality_mc_samples = 1000;
constexpr double desk_seconds = 600.0;
constexpr int forward_instances = 20;
constexpr double forward_tol = 1e-10;
constexpr int bootstrap_resamples = 1000;

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0)
{
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

double max_abs(const CMat &m)
{
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

std::string fmt(const char *f, double a)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

int failures = 0;

void report(int id, bool pass, const std::string &detail)
{
    std::printf("criterion %d %s: %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass)
        ++failures;
}

Scheme scheme_for(InformationStructure s)
{
    switch (s)
    {
    case InformationStructure::no_sharing:
        return Scheme::no_sharing;
    case InformationStructure::unidirectional:
        return Scheme::unidirectional;
    case InformationStructure::bidirectional:
        return Scheme::bidirectional;
    case InformationStructure::centralized:
        return Scheme::centralized;
    }
    return Scheme::centralized;
}

// One random model shared by every information structure.
struct ProblemFamily
{
    FiniteChannelModel model;
    AssociationMap assoc;
    RVec weights;
    double power = 1.0;

    FiniteTeamProblem with(InformationStructure s) const { return make_team_problem(model, s, weights, power, assoc); }
};

std::vector<ProblemFamily> oracle_problem_set()
{
    std::mt19937_64 rng(20260001);
    std::vector<ProblemFamily> out;
    std::uniform_real_distribution<double> pw(0.5, 5.0);
    for (int i = 0; i < oracle_problems; ++i)
    {
        const auto shape = random_shape(rng, oracle_max_points);
        ProblemFamily f;
        f.model = random_model(rng, shape, oracle_max_points);
        f.assoc = random_stripe_association(rng, f.model.layout(), shape.users);
        f.weights = random_simplex(rng, shape.users);
        f.power = pw(rng);
        out.push_back(std::move(f));
    }
    return out;
}

// ---------- 1 ----------

void criterion_oracle(const std::vector<ProblemFamily> &set)
{
    const auto t0 = clock_type::now();
    double worst_diff = 0.0, worst_res = 0.0, worst_gap = 0.0;
    int checks = 0;
    for (const auto &f : set)
        for (auto info : {InformationStructure::no_sharing, InformationStructure::unidirectional,
                          InformationStructure::bidirectional})
        {
            const auto prob = f.with(info);
            const auto pre = design_precoder(scheme_for(info), prob.setup(), prob.model.pool());
            for (int k = 0; k < prob.users(); ++k)
            {
                double gap = 0.0;
                const auto closed = solution_from_precoder(prob, *pre, k, &gap);
                worst_diff = std::max(worst_diff, max_difference(solve_team_exact(prob, k), closed));
                worst_res = std::max(worst_res, verify_stationarity(prob, closed, k));
                worst_gap = std::max(worst_gap, gap);
                ++checks;
            }
        }
    const double secs = seconds_since(t0);
    const bool pass = worst_diff <= oracle_tol && worst_res <= oracle_tol && worst_gap <= oracle_tol &&
                      secs <= oracle_seconds && static_cast<int>(set.size()) >= 50;
    report(1, pass,
           std::to_string(set.size()) + " problems, " + std::to_string(checks) +
               " (structure, user) checks; max |closed - oracle| " + fmt("%.2e", worst_diff) + ", stationarity " +
               fmt("%.2e", worst_res) + ", measurability " + fmt("%.2e", worst_gap) + ", " + fmt("%.1f s", secs) +
               " (limits " + fmt("%.0e", oracle_tol) + ", " + fmt("%.0f s", oracle_seconds) + ")");
}

// ---------- 2 ----------

// For every position m: V_m B_m + sum_{l != m} E[P_l V_l B_l | S_m] = I with
// B_l = Vbar_{l-1} ... Vbar_0, under the stripe's own information structure.
double telescoping_residual(const FiniteTeamProblem &prob, const StripePrecoderBase &pre)
{
    const auto &layout = prob.model.layout();
    const int users = prob.users(), mcount = layout.per_stripe();
    const CMat id = CMat::Identity(users, users);
    double worst = 0.0;
    for (int q = 0; q < layout.stripes(); ++q)
    {
        // terms[m][s] = P_m V_m B_m, lead[m][s] = V_m B_m
        std::vector<std::vector<CMat>> terms(mcount), lead(mcount);
        for (std::size_t s = 0; s < prob.model.size(); ++s)
        {
            const auto sw = pre.sweep(q, prob.model.point(s).h_hat);
            CMat b = id;
            for (int m = 0; m < mcount; ++m)
            {
                lead[m].push_back(sw.v[m] * b);
                terms[m].push_back(sw.response[m] * sw.v[m] * b);
                b = sw.vbar[m] * b;
            }
        }
        for (int m = 0; m < mcount; ++m)
        {
            const int l = layout.to_linear({q, m});
            std::vector<CMat> others(prob.model.size(), CMat::Zero(users, users));
            for (std::size_t s = 0; s < prob.model.size(); ++s)
                for (int n = 0; n < mcount; ++n)
                    if (n != m)
                        others[s] += terms[n][s];
            const auto cond = conditional_mean(prob.model, prob.partition, l, others);
            for (std::size_t s = 0; s < prob.model.size(); ++s)
                worst = std::max(worst, max_abs(lead[m][s] + cond[prob.partition.label[l][s]] - id));
        }
    }
    return worst;
}

void criterion_telescoping(const std::vector<ProblemFamily> &set)
{
    double worst = 0.0;
    for (const auto &f : set)
        for (auto info : {InformationStructure::unidirectional, InformationStructure::bidirectional})
        {
            const auto prob = f.with(info);
            const auto pre = design_precoder(scheme_for(info), prob.setup(), prob.model.pool());
            worst = std::max(worst, telescoping_residual(prob, dynamic_cast<const StripePrecoderBase &>(*pre)));
        }
    report(2, worst <= telescoping_tol,
           "max residual " + fmt("%.2e", worst) + " over " + std::to_string(set.size()) +
               " problems, unidirectional and bidirectional (limit " + fmt("%.0e", telescoping_tol) + ")");
}

// ---------- 3 ----------

double max_precoder_difference(const FiniteTeamProblem &prob, const Precoder &a, const Precoder &b)
{
    double worst = 0.0;
    for (const auto &pt : prob.model.points())
        worst = std::max(worst, max_abs(a.precode(pt.h_hat) - b.precode(pt.h_hat)));
    return worst;
}

void criterion_reductions()
{
    std::mt19937_64 rng(20260003);
    double a = 0.0, b = 0.0, c = 0.0;
    std::uniform_int_distribution<int> qd(1, 3), kd(1, 3), md(2, 4), ed(1, 3), errd(1, 2);
    for (int i = 0; i < reduction_instances; ++i)
    {
        // (a) one TX per stripe
        {
            const ProblemShape shape{qd(rng), 1, kd(rng), 1, ed(rng), errd(rng), false};
            const auto prob = random_problem(rng, shape, InformationStructure::unidirectional);
            const auto pool = prob.model.pool();
            a = std::max(a, max_precoder_difference(prob, UnidirectionalPrecoder(prob.setup(), pool),
                                                    NoSharingPrecoder(prob.setup(), pool)));
        }
        // (b) deterministic channel
        {
            const ProblemShape shape{qd(rng) % 2 + 1, md(rng), kd(rng), 1, 1, 1, false};
            const auto prob = random_problem(rng, shape, InformationStructure::unidirectional);
            const auto pool = prob.model.pool();
            b = std::max(b, max_precoder_difference(prob, UnidirectionalPrecoder(prob.setup(), pool),
                                                    BidirectionalPrecoder(prob.setup(), pool)));
        }
        // (c) one stripe, perfect CSI, every user served by it
        {
            const ProblemShape shape{1, md(rng), kd(rng), 1, 2, 1, false};
            auto model = random_model(rng, shape);
            auto assoc = association_from_stripes(model.layout(), std::vector<std::vector<int>>(shape.users, {0}));
            const auto prob = make_team_problem(std::move(model), InformationStructure::bidirectional,
                                                random_simplex(rng, shape.users), 2.0, std::move(assoc));
            const auto pool = prob.model.pool();
            c = std::max(c, max_precoder_difference(prob, BidirectionalPrecoder(prob.setup(), pool),
                                                    CentralizedPrecoder(prob.setup())));
        }
    }
    report(3, a <= reduction_tol && b <= reduction_tol && c <= reduction_tol,
           "(a) M=1 uni vs no-share " + fmt("%.2e", a) + ", (b) deterministic uni vs bi " + fmt("%.2e", b) +
               ", (c) single stripe bi vs centralized " + fmt("%.2e", c) + " over " +
               std::to_string(reduction_instances) + " instances each (limit " + fmt("%.0e", reduction_tol) + ")");
}

// ---------- DESK-SCALE RUNS (4, 5, 6, 7, 9) ----------

ScenarioConfig desk_config(double per_tx_mw, const std::string &dir)
{
    ScenarioConfig c;
    c.stripes = 3;
    c.per_stripe = 8;
    c.users = 6;
    c.channel.ricean = 6.0;
    c.drops = 50;
    c.stats_samples = 500;
    c.eval_samples = 500;
    c.seed = 2026;
    c.per_tx_power_mw = {per_tx_mw};
    c.out_dir = dir;
    return c;
}

const std::vector<Scheme> ordering_chain{Scheme::centralized, Scheme::bidirectional, Scheme::unidirectional,
                                         Scheme::no_sharing, Scheme::local_mmse};

// Sign-symmetric zero-mean local supports: every cross-user entry of E[P_l] vanishes, which is
// the finite-support version of zero-mean (kappa = 0) channels without cross-user coupling.
FiniteTeamProblem zero_mean_problem(std::mt19937_64 &rng, int txs, int users, bool with_error)
{
    std::vector<LocalSupport> local(txs);
    for (auto &ls : local)
    {
        const CMat base = random_cmat(rng, users, 1);
        for (int mask = 0; mask < (1 << users); ++mask)
        {
            CMat e = base;
            for (int k = 0; k < users; ++k)
                if (mask & (1 << k))
                    e.row(k) *= -1.0;
            ls.estimates.push_back(e);
            ls.estimate_probs.push_back(1.0 / (1 << users));
        }
        if (with_error)
        {
            const CMat d = random_cmat(rng, users, 1, 0.4);
            ls.errors = {d, -d};
            ls.error_probs = {0.5, 0.5};
        }
        else
        {
            ls.errors = {CMat::Zero(users, 1)};
            ls.error_probs = {1.0};
        }
    }
    auto model = make_product_model(StripeLayout(1, txs), 1, users, local);
    std::vector<std::vector<int>> stripes(users, std::vector<int>{0});
    auto assoc = association_from_stripes(model.layout(), stripes);
    return make_team_problem(std::move(model), InformationStructure::no_sharing, random_simplex(rng, users), 2.0,
                             std::move(assoc));
}

void criterion_ordering(const std::vector<ProblemFamily> &set, const RunResult &desk)
{
    // exact, finite support
    double worst_exact = 0.0;
    for (const auto &f : set)
    {
        const auto prob = f.with(InformationStructure::unidirectional);
        const auto pool = prob.model.pool();
        std::vector<RVec> mse;
        for (Scheme s : ordering_chain)
            mse.push_back(estimate_moments(*design_precoder(s, prob.setup(), pool), pool).mse);
        for (std::size_t i = 1; i < mse.size(); ++i)
            worst_exact = std::max(worst_exact, (mse[i - 1] - mse[i]).maxCoeff());
    }

    // Monte Carlo: each consecutive pair within 2 combined standard errors
    double worst_z = -1e300;
    int mc_checks = 0;
    for (const auto &d : desk.drops)
    {
        if (!d.ok)
            continue;
        std::map<Scheme, const SchemeReport *> by;
        for (const auto &r : d.schemes)
            by[r.scheme] = &r;
        for (std::size_t i = 1; i < ordering_chain.size(); ++i)
        {
            const auto &lo = by.at(ordering_chain[i - 1])->moments, &hi = by.at(ordering_chain[i])->moments;
            for (int k = 0; k < lo.users(); ++k)
            {
                const double se = std::hypot(lo.mse_stderr[k], hi.mse_stderr[k]);
                worst_z = std::max(worst_z, (lo.mse[k] - hi.mse[k]) / se);
                ++mc_checks;
            }
        }
    }

    // zero-mean channels: no-sharing and local MMSE coincide
    std::mt19937_64 rng(20260004);
    double worst_rel = 0.0;
    for (int i = 0; i < 10; ++i)
    {
        const auto prob = zero_mean_problem(rng, 3, 2 + i % 2, i % 2 == 1);
        const auto pool = prob.model.pool();
        const RVec a = estimate_moments(NoSharingPrecoder(prob.setup(), pool), pool).mse;
        const RVec b = estimate_moments(LocalMmsePrecoder(prob.setup(), pool), pool).mse;
        worst_rel = std::max(worst_rel, ((a - b).cwiseAbs().array() / a.array()).maxCoeff());
    }

    const bool pass = worst_exact <= ordering_slack && worst_z <= ordering_se && worst_rel <= local_mmse_rel_tol;
    report(4, pass,
           "exact chain centralized<=bi<=uni<=no-share<=local-mmse worst violation " + fmt("%.2e", worst_exact) +
               " on " + std::to_string(set.size()) + " problems; Monte Carlo worst z " + fmt("%.2f", worst_z) + " over " +
               std::to_string(mc_checks) + " pairs (limit " + fmt("%.0f", ordering_se) +
               "); zero-mean no-share vs local-mmse rel diff " + fmt("%.2e", worst_rel) + " (limit " +
               fmt("%.0e", local_mmse_rel_tol) + ")");
}

// Sum-power duality: sum_k p_k E||t_k||^2 = P and R_k = log2(1 / MSE_k).
std::pair<double, double> duality_errors(const SchemeReport &r, double power)
{
    const auto &sum = r.modes.front();
    const double total = r.moments.precoder_power.dot(sum.p);
    double rate = 0.0;
    for (int k = 0; k < r.moments.users(); ++k)
    {
        const double target = std::log2(1.0 / r.moments.mse[k]);
        rate = std::max(rate, std::abs(sum.rates[k] - target) / std::max(target, 1e-300));
    }
    return {std::abs(total - power) / power, rate};
}

void criterion_duality(const std::vector<ProblemFamily> &set)
{
    const std::vector<Scheme> tmmse{Scheme::no_sharing, Scheme::unidirectional, Scheme::bidirectional,
                                    Scheme::centralized};
    double exact_p = 0.0, exact_r = 0.0;
    for (const auto &f : set)
    {
        const auto prob = f.with(InformationStructure::unidirectional);
        const auto pool = prob.model.pool();
        const RVec budgets = RVec::Constant(prob.tx_count(), prob.power / prob.tx_count());
        for (Scheme s : tmmse)
        {
            const auto r = evaluate_scheme(*design_precoder(s, prob.setup(), pool), pool, budgets, {PowerMode::sum});
            const auto [e1, e2] = duality_errors(r, prob.power);
            exact_p = std::max(exact_p, e1);
            exact_r = std::max(exact_r, e2);
        }
    }

    ScenarioConfig c = desk_config(1.0, "");
    c.drops = 5;
    c.stats_samples = duality_mc_samples;
    c.eval_samples = duality_mc_samples;
    c.schemes = tmmse;
    c.power_modes = {PowerMode::sum};
    const auto run = run_scenario(c);
    double mc_p = 0.0, mc_r = 0.0;
    for (const auto &d : run.drops)
        for (const auto &r : d.schemes)
        {
            const auto [e1, e2] = duality_errors(r, c.sum_power());
            mc_p = std::max(mc_p, e1);
            mc_r = std::max(mc_r, e2);
        }
    const bool pass = exact_p <= duality_exact_rel_tol && exact_r <= duality_exact_rel_tol &&
                      mc_p <= duality_mc_rel_tol && mc_r <= duality_mc_rel_tol && run.failed() == 0;
    report(5, pass,
           "finite support: power rel err " + fmt("%.2e", exact_p) + ", rate-MSE rel err " + fmt("%.2e", exact_r) +
               " (limit " + fmt("%.0e", duality_exact_rel_tol) + "); Monte Carlo " + std::to_string(c.drops) +
               " drops x " + std::to_string(duality_mc_samples) + " samples: power " + fmt("%.2e", mc_p) +
               ", rate-MSE " + fmt("%.2e", mc_r) + " (limit " + fmt("%.0e", duality_mc_rel_tol) + ")");
}

std::vector<double> rates_of(const RunResult &r, Scheme s, PowerMode m)
{
    std::vector<double> out;
    for (const auto &rec : r.records())
        if (rec.scheme == s && rec.mode == m)
            out.push_back(rec.rate);
    return out;
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Standard error of the median, bootstrapping whole drops since users of one drop share geometry.
double median_stderr(const RunResult &r, Scheme s, PowerMode m, std::uint64_t seed)
{
    std::map<int, std::vector<double>> by_drop;
    for (const auto &rec : r.records())
        if (rec.scheme == s && rec.mode == m)
            by_drop[rec.drop].push_back(rec.rate);
    std::vector<std::vector<double>> drops;
    for (auto &[d, v] : by_drop)
        drops.push_back(v);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, drops.size() - 1);
    double sum = 0.0, sum2 = 0.0;
    for (int b = 0; b < bootstrap_resamples; ++b)
    {
        std::vector<double> sample;
        for (std::size_t i = 0; i < drops.size(); ++i)
        {
            const auto &d = drops[pick(rng)];
            sample.insert(sample.end(), d.begin(), d.end());
        }
        const double med = median(sample);
        sum += med;
        sum2 += med * med;
    }
    const double mean = sum / bootstrap_resamples;
    return std::sqrt(std::max(0.0, sum2 / bootstrap_resamples - mean * mean));
}

const std::vector<Scheme> figure_schemes{Scheme::local_mmse, Scheme::no_sharing, Scheme::unidirectional,
                                         Scheme::bidirectional};

void criterion_per_tx(const RunResult &low, const RunResult &high, double secs)
{
    // nu^2 = 1 exactly when every per-TX budget is met, and per-TX rates never exceed sum rates
    bool nu_ok = true, rate_ok = true;
    for (const RunResult *r : {&low, &high})
        for (const auto &d : r->drops)
            for (const auto &s : d.schemes)
            {
                const auto &sum = s.modes[0], &tx = s.modes[1];
                const double budget = r == &low ? 1.0 : 10.0;
                const bool met = sum.tx_power.maxCoeff() <= budget;
                nu_ok = nu_ok && (met ? tx.nu2 == 1.0 : tx.nu2 > 1.0);
                rate_ok = rate_ok && (tx.rates.array() <= sum.rates.array()).all();
            }
    std::string detail;
    bool gap_ok = true;
    for (Scheme s : figure_schemes)
    {
        const double g1 = median(rates_of(low, s, PowerMode::sum)) - median(rates_of(low, s, PowerMode::per_tx));
        const double g10 = median(rates_of(high, s, PowerMode::sum)) - median(rates_of(high, s, PowerMode::per_tx));
        gap_ok = gap_ok && g10 < g1;
        detail += " " + to_string(s) + " " + fmt("%.3f", g1) + "->" + fmt("%.3f", g10) + (g10 < g1 ? "" : " (grows)");
    }
    report(6, nu_ok && rate_ok && gap_ok && secs <= desk_seconds,
           std::string("nu2 rule ") + (nu_ok ? "holds" : "violated") + ", per-TX <= sum rates " +
               (rate_ok ? "holds" : "violated") + "; median gap sum minus per-TX at 1 mW -> 10 mW [bit]:" + detail +
               "; desk runs " + fmt("%.0f s", secs) + " (limit " + fmt("%.0f s", desk_seconds) + ")");
}

void criterion_figure(const RunResult &low, const RunResult &high)
{
    bool pass = true;
    std::string detail;
    int idx = 0;
    for (const RunResult *r : {&low, &high})
        for (PowerMode m : {PowerMode::sum, PowerMode::per_tx})
        {
            detail += std::string(idx ? "; " : "") + (r == &low ? "1 mW " : "10 mW ") + to_string(m) + ":";
            double prev_med = 0.0, prev_se = 0.0;
            for (std::size_t i = 0; i < figure_schemes.size(); ++i)
            {
                const Scheme s = figure_schemes[i];
                const double med = median(rates_of(*r, s, m));
                const double se = median_stderr(*r, s, m, 7000 + 10 * idx + i);
                detail += " " + to_string(s) + " " + fmt("%.2f", med) + "+-" + fmt("%.2f", se);
                if (i > 0 && !(med - prev_med > std::hypot(se, prev_se)))
                {
                    pass = false;
                    detail += " (gap too small)";
                }
                prev_med = med;
                prev_se = se;
            }
            ++idx;
        }
    report(7, pass, "median rates [bit] with bootstrap SE:" + detail.substr(0));
}

// ---------- 8 ----------

void criterion_forward_pass()
{
    std::mt19937_64 rng(20260008);
    double worst = 0.0;
    bool payload_ok = true;
    std::uniform_int_distribution<int> qd(1, 2), md(1, 4), kd(1, 4);
    for (int i = 0; i < forward_instances; ++i)
    {
        const ProblemShape shape{qd(rng), md(rng), kd(rng), 1, 2, 1, false};
        const auto prob = random_problem(rng, shape, InformationStructure::unidirectional, 4096);
        const UnidirectionalPrecoder pre(prob.setup(), prob.model.pool());
        const CMat &h = prob.model.point(static_cast<std::size_t>(i) % prob.model.size()).h_hat;
        const CVec u = random_cmat(rng, shape.users, 1);
        const RVec p = random_simplex(rng, shape.users) * 3.0;
        const CMat t = pre.precode(h);
        for (int q = 0; q < shape.stripes; ++q)
        {
            const auto fp = stripe_forward_pass(pre, q, h, u, p);
            for (int m = 0; m < shape.per_stripe; ++m)
            {
                const int l = prob.model.layout().to_linear({q, m});
                cdouble x = 0.0;
                for (int k = 0; k < shape.users; ++k)
                    x += std::sqrt(p[k]) * t(l, k) * u[k];
                worst = std::max(worst, std::abs(fp.transmit[m](0) - x));
                payload_ok = payload_ok && fp.payload[m] == static_cast<std::size_t>(shape.users);
            }
        }
    }
    report(8, worst <= forward_tol && payload_ok,
           "max |forward pass - superposition| " + fmt("%.2e", worst) + " over " + std::to_string(forward_instances) +
               " instances (limit " + fmt("%.0e", forward_tol) + "); payload per hop " +
               (payload_ok ? "equals K" : "differs from K"));
}

// ---------- 9 ----------

std::string slurp(const std::filesystem::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_determinism(const ScenarioConfig &first)
{
    ScenarioConfig again = first;
    again.out_dir = first.out_dir + "_repeat";
    again.threads = 2;
    run_and_write(again);
    const auto a = slurp(std::filesystem::path(first.out_dir) / "rates.csv");
    const auto b = slurp(std::filesystem::path(again.out_dir) / "rates.csv");
    report(9, !a.empty() && a == b,
           "rates.csv " + std::to_string(a.size()) + " bytes, repeat run (2 threads) " +
               (a == b ? "byte-identical" : "differs"));
}

} // namespace

int main()
{
    try
    {
        const auto set = oracle_problem_set();
        criterion_oracle(set);
        criterion_telescoping(set);
        criterion_reductions();

        const auto t0 = clock_type::now();
        const auto low_cfg = desk_config(1.0, "acceptance_desk_1mw");
        const auto low = run_and_write(low_cfg);
        const auto high = run_and_write(desk_config(10.0, "acceptance_desk_10mw"));
        const double desk_secs = seconds_since(t0);
        if (low.failed() || high.failed())
            std::printf("note: %d + %d desk drops failed\n", low.failed(), high.failed());

        criterion_ordering(set, low);
        criterion_duality(set);
        criterion_per_tx(low, high, desk_secs);
        criterion_figure(low, high);
        criterion_forward_pass();
        criterion_determinism(low_cfg);
    }
    catch (const std::exception &e)
    {
        std::printf("acceptance aborted: %s\n", e.what());
        return 2;
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
