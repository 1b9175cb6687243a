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

#ifndef TMMSE_EVALUATION_HPP
#define TMMSE_EVALUATION_HPP

#include "tmmse/channel.hpp"
#include "tmmse/precoding.hpp"
#include "tmmse/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace tmmse
{

// Moments of the effective channels g_k^H t_j over a weighted pool.
struct MomentEstimates
{
    RVec signal;          // a_k = |E[g_k^H t_k]|^2
    RVec hardening;       // v_k = Var[g_k^H t_k]
    RMat interference;    // b_kj = E[|g_k^H t_j|^2]
    RMat tx_power;        // L x K, E[||t_{l,k}||^2]
    RVec precoder_power;  // E[||t_k||^2]
    RVec mse;             // MSE_k
    RVec mse_stderr;      // zero for exact pools
    std::size_t samples = 0;
    bool exact = false;

    int users() const { return static_cast<int>(signal.size()); }
};

// Per-realization MSE contributions ||W^{1/2} H t_k - e_k||^2 + ||t_k||^2 / P, one row per sample.
inline RMat per_sample_mse(const Precoder &precoder, const WeightedPool &pool)
{
    if (pool.empty())
        throw std::invalid_argument("evaluation pool is empty");
    const auto &setup = precoder.setup();
    const RVec sw = setup.weights.cwiseSqrt();
    RMat out(pool.size(), setup.users);
    for (std::size_t s = 0; s < pool.size(); ++s)
    {
        const CMat t = precoder.precode(pool.samples[s].h_hat);
        CMat g = sw.cast<cdouble>().asDiagonal() * (pool.samples[s].h * t);
        g -= CMat::Identity(setup.users, setup.users);
        for (int k = 0; k < setup.users; ++k)
            out(s, k) = g.col(k).squaredNorm() + t.col(k).squaredNorm() / setup.power;
    }
    return out;
}

// MSE of precoder realizations paired with their channels, for user k.
inline double compute_mse(const std::vector<CVec> &precoders, const WeightedPool &pool, const RVec &w, double power,
                          int k)
{
    if (pool.empty() || precoders.size() != pool.size())
        throw std::invalid_argument("compute_mse needs one precoder per pool sample");
    double acc = 0.0;
    for (std::size_t s = 0; s < pool.size(); ++s)
    {
        CVec r = w.cwiseSqrt().cast<cdouble>().asDiagonal() * (pool.samples[s].h * precoders[s]);
        r(k) -= 1.0;
        acc += pool.weights[s] * (r.squaredNorm() + precoders[s].squaredNorm() / power);
    }
    return acc;
}

inline MomentEstimates estimate_moments(const Precoder &precoder, const WeightedPool &pool)
{
    if (pool.empty())
        throw std::invalid_argument("evaluation pool is empty");
    const auto &setup = precoder.setup();
    const int users = setup.users;
    const int n = setup.antennas;
    const RVec sw = setup.weights.cwiseSqrt();

    CVec mean_signal = CVec::Zero(users);
    RMat b = RMat::Zero(users, users);
    RMat txp = RMat::Zero(setup.tx_count(), users);
    RVec mse = RVec::Zero(users), mse_sq = RVec::Zero(users);
    for (std::size_t s = 0; s < pool.size(); ++s)
    {
        const double wt = pool.weights[s];
        const CMat t = precoder.precode(pool.samples[s].h_hat);
        const CMat g = pool.samples[s].h * t; // g(k, j) = g_k^H t_j
        mean_signal += wt * g.diagonal();
        b += wt * g.cwiseAbs2();
        for (int l = 0; l < setup.tx_count(); ++l)
            txp.row(l) += wt * t.middleRows(static_cast<Eigen::Index>(l) * n, n).colwise().squaredNorm();
        CMat r = sw.cast<cdouble>().asDiagonal() * g;
        r -= CMat::Identity(users, users);
        for (int k = 0; k < users; ++k)
        {
            const double e = r.col(k).squaredNorm() + t.col(k).squaredNorm() / setup.power;
            mse[k] += wt * e;
            mse_sq[k] += wt * e * e;
        }
    }

    MomentEstimates m;
    m.samples = pool.size();
    m.exact = pool.exact;
    m.signal = mean_signal.cwiseAbs2();
    m.interference = b;
    m.hardening = (b.diagonal() - m.signal).cwiseMax(0.0);
    m.tx_power = txp;
    m.precoder_power = txp.colwise().sum().transpose();
    m.mse = mse;
    m.mse_stderr = RVec::Zero(users);
    if (!pool.exact && pool.size() > 1)
    {
        const double count = static_cast<double>(pool.size());
        for (int k = 0; k < users; ++k)
        {
            const double var = std::max(0.0, mse_sq[k] - mse[k] * mse[k]) * count / (count - 1.0);
            m.mse_stderr[k] = std::sqrt(var / count);
        }
    }
    return m;
}

// gamma_k = max(0, 1 / MSE_k - 1).
inline RVec dual_sinr_targets(const RVec &mse)
{
    RVec g(mse.size());
    for (Eigen::Index k = 0; k < mse.size(); ++k)
    {
        if (!(mse[k] > 0.0))
            throw std::invalid_argument("MSE must be positive");
        g[k] = std::max(0.0, 1.0 / mse[k] - 1.0);
    }
    return g;
}

class InfeasiblePowerError : public std::runtime_error
{
public:
    InfeasiblePowerError(const std::string &what, std::vector<int> users)
        : std::runtime_error(what), users_(std::move(users))
    {
    }
    const std::vector<int> &users() const noexcept { return users_; }

private:
    std::vector<int> users_;
};

// Downlink powers meeting SINR_k = gamma_k exactly, from
//   p_k a_k - gamma_k p_k v_k - gamma_k sum_{j != k} p_j b_kj = gamma_k.
// Users with gamma_k = 0 get p_k = 0. With clamp_negative, users with negative power are
// switched off and the reduced system is solved again.
inline RVec duality_power_allocation(const MomentEstimates &m, const RVec &gamma, bool clamp_negative = false,
                                     std::vector<std::string> *warnings = nullptr)
{
    const int users = m.users();
    if (gamma.size() != users)
        throw std::invalid_argument("one SINR target per user expected");
    std::vector<int> active;
    for (int k = 0; k < users; ++k)
    {
        if (!(gamma[k] >= 0.0) || !std::isfinite(gamma[k]))
            throw std::invalid_argument("SINR targets must be finite and nonnegative");
        if (gamma[k] > 0.0)
            active.push_back(k);
    }
    RVec p = RVec::Zero(users);
    while (!active.empty())
    {
        const Eigen::Index r = static_cast<Eigen::Index>(active.size());
        CMat a(r, r);
        CVec rhs(r);
        for (Eigen::Index i = 0; i < r; ++i)
        {
            const int k = active[i];
            rhs(i) = gamma[k];
            for (Eigen::Index j = 0; j < r; ++j)
            {
                const int jj = active[j];
                a(i, j) = i == j ? m.signal[k] - gamma[k] * m.hardening[k] : -gamma[k] * m.interference(k, jj);
            }
        }
        CVec sol;
        try
        {
            sol = guarded_solve(a, rhs, "downlink power allocation");
        }
        catch (const SingularSystemError &e)
        {
            throw InfeasiblePowerError(e.what(), active);
        }
        const double scale = std::max(1.0, sol.cwiseAbs().maxCoeff());
        std::vector<int> negative;
        for (Eigen::Index i = 0; i < r; ++i)
            if (sol(i).real() < -1e-12 * scale)
                negative.push_back(active[i]);
        if (negative.empty())
        {
            for (Eigen::Index i = 0; i < r; ++i)
                p[active[i]] = std::max(0.0, sol(i).real());
            break;
        }
        if (!clamp_negative)
        {
            std::string who;
            for (int k : negative)
                who += (who.empty() ? "" : ",") + std::to_string(k);
            throw InfeasiblePowerError("infeasible SINR targets: negative power for users " + who, negative);
        }
        if (warnings)
            warnings->push_back("clamped negative downlink powers to zero for " + std::to_string(negative.size()) +
                                " user(s)");
        std::vector<int> keep;
        for (int k : active)
            if (std::find(negative.begin(), negative.end(), k) == negative.end())
                keep.push_back(k);
        active = std::move(keep);
    }
    return p;
}

// E[||x_l||^2] = sum_k p_k E[||t_{l,k}||^2]; messages are i.i.d. unit power.
inline RVec per_tx_powers(const MomentEstimates &m, const RVec &p)
{
    return m.tx_power * p;
}

// nu^2 = max(1, E[||x_l||^2] / P_l over all l).
inline double per_tx_scaling(const RVec &tx_power, const RVec &budgets)
{
    if (tx_power.size() != budgets.size())
        throw std::invalid_argument("one budget per TX expected");
    double nu2 = 1.0;
    for (Eigen::Index l = 0; l < budgets.size(); ++l)
    {
        if (!(budgets[l] > 0.0))
            throw std::invalid_argument("per-TX power budgets must be positive");
        nu2 = std::max(nu2, tx_power[l] / budgets[l]);
    }
    return nu2;
}

enum class LogBase
{
    bits,
    nats,
};

// Hardening-bound rates with the per-TX scaling loss nu^2 in the denominator.
inline RVec hardening_rates(const MomentEstimates &m, const RVec &p, double nu2, LogBase base = LogBase::bits)
{
    if (!(nu2 >= 1.0))
        throw std::invalid_argument("nu^2 must be at least one");
    const int users = m.users();
    RVec r(users);
    for (int k = 0; k < users; ++k)
    {
        if (!(p[k] >= 0.0))
            throw std::invalid_argument("powers must be nonnegative");
        double denom = p[k] * m.hardening[k] + nu2;
        for (int j = 0; j < users; ++j)
            if (j != k)
                denom += p[j] * m.interference(k, j);
        const double sinr = p[k] * m.signal[k] / denom;
        r[k] = base == LogBase::bits ? std::log2(1.0 + sinr) : std::log1p(sinr);
    }
    return r;
}

enum class PowerMode
{
    sum,
    per_tx,
};

inline std::string to_string(PowerMode m)
{
    return m == PowerMode::sum ? "sum" : "per-tx";
}

inline PowerMode parse_power_mode(const std::string &s)
{
    if (s == "sum")
        return PowerMode::sum;
    if (s == "per-tx")
        return PowerMode::per_tx;
    throw std::invalid_argument("unknown power mode '" + s + "' (expected sum|per-tx)");
}

struct PowerSolution
{
    PowerMode mode = PowerMode::sum;
    RVec p;        // duality allocation, before any scaling
    double nu2 = 1.0;
    RVec tx_power; // expected per-TX power actually radiated, after scaling
    RVec rates;
};

struct SchemeReport
{
    Scheme scheme = Scheme::no_sharing;
    MomentEstimates moments;
    RVec gamma;
    std::vector<PowerSolution> modes;
    std::vector<std::string> warnings;
};

struct EvaluationOptions
{
    bool clamp_negative_powers = false;
    LogBase log_base = LogBase::bits;
};

// Moments, duality powers and rates of one designed scheme. `budgets` are the per-TX power
// limits used by the per-TX mode; the precoder's sum budget should equal their sum.
inline SchemeReport evaluate_scheme(const Precoder &precoder, const WeightedPool &pool, const RVec &budgets,
                                    const std::vector<PowerMode> &modes, const EvaluationOptions &opt = {})
{
    SchemeReport rep;
    rep.scheme = precoder.scheme();
    rep.warnings = precoder.warnings();
    rep.moments = estimate_moments(precoder, pool);
    rep.gamma = dual_sinr_targets(rep.moments.mse);
    const RVec p = duality_power_allocation(rep.moments, rep.gamma, opt.clamp_negative_powers, &rep.warnings);
    const RVec txp = per_tx_powers(rep.moments, p);
    for (PowerMode mode : modes)
    {
        PowerSolution sol;
        sol.mode = mode;
        sol.p = p;
        sol.nu2 = mode == PowerMode::sum ? 1.0 : per_tx_scaling(txp, budgets);
        sol.tx_power = txp / sol.nu2;
        sol.rates = hardening_rates(rep.moments, p, sol.nu2, opt.log_base);
        rep.modes.push_back(std::move(sol));
    }
    return rep;
}

} // namespace tmmse

#endif
