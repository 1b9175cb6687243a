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

#ifndef TMMSE_PRECODING_HPP
#define TMMSE_PRECODING_HPP

#include "tmmse/channel.hpp"
#include "tmmse/topology.hpp"
#include "tmmse/types.hpp"

#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tmmse
{

enum class Scheme
{
    no_sharing,
    unidirectional,
    bidirectional,
    centralized,
    local_mmse,
};

inline std::string to_string(Scheme s)
{
    switch (s)
    {
    case Scheme::no_sharing:
        return "no-share";
    case Scheme::unidirectional:
        return "uni";
    case Scheme::bidirectional:
        return "bi";
    case Scheme::centralized:
        return "centralized";
    case Scheme::local_mmse:
        return "local-mmse";
    }
    return "?";
}

inline Scheme parse_scheme(const std::string &name)
{
    for (Scheme s : {Scheme::no_sharing, Scheme::unidirectional, Scheme::bidirectional, Scheme::centralized,
                     Scheme::local_mmse})
        if (to_string(s) == name)
            return s;
    throw std::invalid_argument("unknown scheme '" + name + "' (expected no-share|uni|bi|centralized|local-mmse)");
}

// Everything a precoder design needs besides the channel realizations themselves.
struct PrecodingSetup
{
    StripeLayout layout;
    int antennas = 1;
    int users = 1;
    RVec weights;
    double power = 1.0;     // sum power budget P in mW
    std::vector<CMat> psi;  // per-TX error covariance
    AssociationMap assoc;

    int tx_count() const { return layout.tx_count(); }
    Eigen::Index stacked_dim() const { return static_cast<Eigen::Index>(tx_count()) * antennas; }

    void validate() const
    {
        if (antennas < 1 || users < 1)
            throw std::invalid_argument("precoding setup needs positive dimensions");
        if (weights.size() != users)
            throw std::invalid_argument("weight vector length must equal the number of users");
        check_simplex(weights);
        if (!(power > 0.0))
            throw std::invalid_argument("sum power must be positive");
        if (static_cast<int>(psi.size()) != tx_count())
            throw std::invalid_argument("need one error covariance per TX");
        for (const auto &p : psi)
        {
            if (p.rows() != antennas || p.cols() != antennas)
                throw std::invalid_argument("error covariance has wrong dimensions");
            check_psd(p);
        }
        if (assoc.users() != users || static_cast<int>(assoc.served_users.size()) != tx_count())
            throw std::invalid_argument("association does not match setup dimensions");
    }

    static void check_psd(const CMat &p)
    {
        const double scale = std::max(1.0, p.norm());
        if ((p - p.adjoint()).norm() > 1e-10 * scale)
            throw std::invalid_argument("error covariance must be Hermitian");
        Eigen::SelfAdjointEigenSolver<CMat> es(p, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-10 * scale)
            throw std::invalid_argument("error covariance must be positive semidefinite");
    }
};

namespace detail
{

inline CMat local_filter(const CMat &h_hat, const CMat &psi, const RVec &w, double power)
{
    const Eigen::Index n = h_hat.cols();
    const CMat wh = w.cast<cdouble>().asDiagonal() * h_hat;
    CMat a = h_hat.adjoint() * wh + psi;
    a.diagonal().array() += 1.0 / power;
    const CMat rhs = h_hat.adjoint() * w.cwiseSqrt().cast<cdouble>().asDiagonal();
    if (n == 1)
        return rhs / a(0, 0).real();
    return hermitian_solve(a, rhs, "local filter");
}

inline CMat response(const CMat &h_hat, const CMat &filter, const RVec &w)
{
    return w.cwiseSqrt().cast<cdouble>().asDiagonal() * (h_hat * filter);
}

} // namespace detail

// T_l = (H_l^H W H_l + Psi_l + I/P)^{-1} H_l^H W^{1/2}, an N x K matrix.
inline CMat local_filter(const CMat &h_hat, const CMat &psi, const RVec &w, double power)
{
    if (h_hat.rows() != w.size())
        throw std::invalid_argument("local filter: channel rows must equal the number of weights");
    if (psi.rows() != h_hat.cols() || psi.cols() != h_hat.cols())
        throw std::invalid_argument("local filter: error covariance must be N x N");
    if (!(power > 0.0))
        throw std::invalid_argument("local filter: power must be positive");
    PrecodingSetup::check_psd(psi);
    return detail::local_filter(h_hat, psi, w, power);
}

// ---------- NO CSIT SHARING STATISTICS ----------

// Pi_l = E[W^{1/2} H_l T_l] for every TX.
struct LocalStatistics
{
    std::vector<CMat> pi;
    std::size_t samples = 0;
};

inline LocalStatistics estimate_local_statistics(const PrecodingSetup &setup, const WeightedPool &pool)
{
    if (pool.empty())
        throw std::invalid_argument("statistics pool is empty");
    LocalStatistics st;
    st.samples = pool.size();
    st.pi.assign(setup.tx_count(), CMat::Zero(setup.users, setup.users));
    for (std::size_t s = 0; s < pool.size(); ++s)
        for (int l = 0; l < setup.tx_count(); ++l)
        {
            const CMat h = tx_block(pool.samples[s].h_hat, l, setup.antennas);
            const CMat t = detail::local_filter(h, setup.psi[l], setup.weights, setup.power);
            st.pi[l] += pool.weights[s] * detail::response(h, t, setup.weights);
        }
    return st;
}

// ---------- STRIPE RECURSIONS ----------

// Statistical state of one stripe. Positions are zero-based; downstream[m] is the
// interference-response statistic of all TXs after position m (zero for the last TX) and
// head is the same statistic seen from the master unit, i.e. of the whole stripe.
struct StripeStatistics
{
    std::vector<CMat> downstream;
    CMat head;
    std::vector<CMat> mean_pv;   // E[P_m V_m]
    std::vector<CMat> mean_vbar; // E[I - P_m V_m]
    CMat head_bidirectional;     // E of the realization-level head under full stripe sharing
    std::size_t samples = 0;
};

// Per-realization quantities along one stripe.
struct StripeSweep
{
    std::vector<CMat> filter;     // T_m, N x K
    std::vector<CMat> response;   // P_m = W^{1/2} H_m T_m
    std::vector<CMat> v;          // V_m = (I - D_m P_m)^{-1} (I - D_m)
    std::vector<CMat> vbar;       // I - P_m V_m
    std::vector<CMat> downstream; // D_m used in V_m
    CMat head;                    // P_0 V_0 + D_0 Vbar_0
};

namespace detail
{

inline void stripe_position(const CMat &resp, const CMat &down, int k, CMat &v, CMat &vbar, const std::string &where)
{
    const CMat id = CMat::Identity(k, k);
    v = guarded_solve(id - down * resp, id - down, where);
    vbar = id - resp * v;
}

inline std::string coord(int q, int m)
{
    return "stripe " + std::to_string(q) + " position " + std::to_string(m);
}

} // namespace detail

// Backward sweep over the stripe, estimating E[P V] and E[Vbar] position by position from
// the weighted pool. With bidirectional_head the mean of the realization-level head is
// also accumulated.
inline StripeStatistics estimate_stripe_statistics(const PrecodingSetup &setup, int q, const WeightedPool &pool,
                                                   bool bidirectional_head = false);

inline StripeSweep sweep_bidirectional(const PrecodingSetup &setup, int q, const CMat &h_hat)
{
    const int mcount = setup.layout.per_stripe();
    const int k = setup.users;
    StripeSweep sw;
    sw.filter.resize(mcount);
    sw.response.resize(mcount);
    sw.v.resize(mcount);
    sw.vbar.resize(mcount);
    sw.downstream.resize(mcount);
    for (int m = 0; m < mcount; ++m)
    {
        const int l = setup.layout.to_linear({q, m});
        const CMat h = tx_block(h_hat, l, setup.antennas);
        sw.filter[m] = detail::local_filter(h, setup.psi[l], setup.weights, setup.power);
        sw.response[m] = detail::response(h, sw.filter[m], setup.weights);
    }
    CMat down = CMat::Zero(k, k);
    for (int m = mcount - 1; m >= 0; --m)
    {
        sw.downstream[m] = down;
        detail::stripe_position(sw.response[m], down, k, sw.v[m], sw.vbar[m], detail::coord(q, m));
        down = sw.response[m] * sw.v[m] + down * sw.vbar[m];
    }
    sw.head = down;
    return sw;
}

inline StripeSweep sweep_unidirectional(const PrecodingSetup &setup, int q, const CMat &h_hat,
                                        const StripeStatistics &stats)
{
    const int mcount = setup.layout.per_stripe();
    StripeSweep sw;
    sw.filter.resize(mcount);
    sw.response.resize(mcount);
    sw.v.resize(mcount);
    sw.vbar.resize(mcount);
    sw.downstream = stats.downstream;
    sw.head = stats.head;
    for (int m = 0; m < mcount; ++m)
    {
        const int l = setup.layout.to_linear({q, m});
        const CMat h = tx_block(h_hat, l, setup.antennas);
        sw.filter[m] = detail::local_filter(h, setup.psi[l], setup.weights, setup.power);
        sw.response[m] = detail::response(h, sw.filter[m], setup.weights);
        detail::stripe_position(sw.response[m], stats.downstream[m], setup.users, sw.v[m], sw.vbar[m],
                                detail::coord(q, m));
    }
    return sw;
}

inline StripeStatistics estimate_stripe_statistics(const PrecodingSetup &setup, int q, const WeightedPool &pool,
                                                   bool bidirectional_head)
{
    if (pool.empty())
        throw std::invalid_argument("statistics pool is empty");
    const int mcount = setup.layout.per_stripe();
    const int k = setup.users;
    StripeStatistics st;
    st.samples = pool.size();
    st.downstream.assign(mcount, CMat::Zero(k, k));
    st.mean_pv.assign(mcount, CMat::Zero(k, k));
    st.mean_vbar.assign(mcount, CMat::Zero(k, k));
    CMat down = CMat::Zero(k, k);
    CMat v, vbar;
    for (int m = mcount - 1; m >= 0; --m)
    {
        st.downstream[m] = down;
        const int l = setup.layout.to_linear({q, m});
        for (std::size_t s = 0; s < pool.size(); ++s)
        {
            const CMat h = tx_block(pool.samples[s].h_hat, l, setup.antennas);
            const CMat t = detail::local_filter(h, setup.psi[l], setup.weights, setup.power);
            const CMat p = detail::response(h, t, setup.weights);
            detail::stripe_position(p, down, k, v, vbar, detail::coord(q, m) + " sample " + std::to_string(s));
            st.mean_pv[m] += pool.weights[s] * (p * v);
            st.mean_vbar[m] += pool.weights[s] * vbar;
        }
        down = st.mean_pv[m] + down * st.mean_vbar[m];
    }
    st.head = down;
    if (bidirectional_head)
    {
        st.head_bidirectional = CMat::Zero(k, k);
        for (std::size_t s = 0; s < pool.size(); ++s)
            st.head_bidirectional += pool.weights[s] * sweep_bidirectional(setup, q, pool.samples[s].h_hat).head;
    }
    return st;
}

// ---------- STATISTICAL PRECODERS ----------

// Solves c_a + sum_{b != a} coupling[b] c_b = e_k over the members a of `members`. Returns a
// K x count matrix whose column j is c_{j,k}; columns outside `members` are zero.
inline CMat solve_coupled_coefficients(const std::vector<int> &members, const std::vector<CMat> &coupling, int users,
                                       int k, const std::string &what)
{
    const int count = static_cast<int>(coupling.size());
    CMat out = CMat::Zero(users, count);
    const Eigen::Index r = static_cast<Eigen::Index>(members.size());
    if (r == 0)
        return out;
    CMat a = CMat::Identity(r * users, r * users);
    CVec rhs = CVec::Zero(r * users);
    for (Eigen::Index i = 0; i < r; ++i)
    {
        rhs(i * users + k) = 1.0;
        for (Eigen::Index j = 0; j < r; ++j)
            if (i != j)
                a.block(i * users, j * users, users, users) = coupling[members[j]];
    }
    const CVec c = guarded_solve(a, rhs, what + " coefficients of user " + std::to_string(k));
    for (Eigen::Index i = 0; i < r; ++i)
        out.col(members[i]) = c.segment(i * users, users);
    return out;
}

inline CMat solve_statistical_precoders_stripes(const AssociationMap &assoc, const std::vector<CMat> &heads, int k)
{
    const int users = static_cast<int>(heads.front().rows());
    if (assoc.serving_stripes[k].empty())
        throw std::invalid_argument("user " + std::to_string(k) + " is not served by whole stripes");
    return solve_coupled_coefficients(assoc.serving_stripes[k], heads, users, k, "stripe");
}

inline CMat solve_statistical_precoders_local(const AssociationMap &assoc, const std::vector<CMat> &pi, int k)
{
    const int users = static_cast<int>(pi.front().rows());
    return solve_coupled_coefficients(assoc.serving_txs[k], pi, users, k, "per-TX");
}

// ---------- PRECODERS ----------

// A designed precoding scheme: statistics are frozen at construction, precode() maps one
// realization of the local estimates to the stacked precoders (N L x K, column k is t_k).
class Precoder
{
public:
    explicit Precoder(PrecodingSetup setup) : setup_(std::move(setup)) { setup_.validate(); }
    virtual ~Precoder() = default;

    virtual Scheme scheme() const = 0;
    virtual CMat precode(const CMat &h_hat) const = 0;

    // Named statistical matrices (Pi and coefficient blocks) for inspection.
    virtual std::vector<std::pair<std::string, CMat>> statistics_dump() const { return {}; }

    const PrecodingSetup &setup() const { return setup_; }
    const std::vector<std::string> &warnings() const { return warnings_; }

protected:
    PrecodingSetup setup_;
    std::vector<std::string> warnings_;

    CMat zero_output() const { return CMat::Zero(setup_.stacked_dim(), setup_.users); }
};

// No CSIT sharing: t_{l,k} = T_l c_{l,k}.
class NoSharingPrecoder : public Precoder
{
public:
    NoSharingPrecoder(PrecodingSetup setup, const WeightedPool &stats_pool) : Precoder(std::move(setup))
    {
        stats_ = estimate_local_statistics(setup_, stats_pool);
        build_coefficients();
    }
    NoSharingPrecoder(PrecodingSetup setup, LocalStatistics stats) : Precoder(std::move(setup)), stats_(std::move(stats))
    {
        build_coefficients();
    }

    Scheme scheme() const override { return Scheme::no_sharing; }

    CMat precode(const CMat &h_hat) const override
    {
        CMat out = zero_output();
        const int n = setup_.antennas;
        for (int l = 0; l < setup_.tx_count(); ++l)
        {
            if (setup_.assoc.served_users[l].empty())
                continue;
            const CMat t = detail::local_filter(tx_block(h_hat, l, n), setup_.psi[l], setup_.weights, setup_.power);
            for (int k : setup_.assoc.served_users[l])
                out.block(static_cast<Eigen::Index>(l) * n, k, n, 1) = t * coef_[k].col(l);
        }
        return out;
    }

    const LocalStatistics &statistics() const { return stats_; }
    const CMat &coefficients(int k) const { return coef_[k]; }

    std::vector<std::pair<std::string, CMat>> statistics_dump() const override
    {
        std::vector<std::pair<std::string, CMat>> out;
        for (std::size_t l = 0; l < stats_.pi.size(); ++l)
            out.emplace_back("pi/tx" + std::to_string(l), stats_.pi[l]);
        for (std::size_t k = 0; k < coef_.size(); ++k)
            out.emplace_back("c/user" + std::to_string(k), coef_[k]);
        return out;
    }

private:
    void build_coefficients()
    {
        for (int k = 0; k < setup_.users; ++k)
            coef_.push_back(solve_statistical_precoders_local(setup_.assoc, stats_.pi, k));
    }

    LocalStatistics stats_;
    std::vector<CMat> coef_; // per user, K x L
};

// Shared machinery of the two stripe-based schemes.
class StripePrecoderBase : public Precoder
{
public:
    const StripeStatistics &statistics(int q) const { return stats_[q]; }
    const CMat &coefficients(int k) const { return coef_[k]; }

    std::vector<std::pair<std::string, CMat>> statistics_dump() const override
    {
        std::vector<std::pair<std::string, CMat>> out;
        for (std::size_t q = 0; q < stats_.size(); ++q)
        {
            for (std::size_t m = 0; m < stats_[q].downstream.size(); ++m)
                out.emplace_back("pi/stripe" + std::to_string(q) + "/pos" + std::to_string(m), stats_[q].downstream[m]);
            out.emplace_back("pi/stripe" + std::to_string(q) + "/head", head(static_cast<int>(q)));
        }
        for (std::size_t k = 0; k < coef_.size(); ++k)
            out.emplace_back("c/user" + std::to_string(k), coef_[k]);
        return out;
    }

    // K x K matrix whose column k is c_{q,k}.
    CMat stripe_coefficients(int q) const
    {
        CMat c(setup_.users, setup_.users);
        for (int k = 0; k < setup_.users; ++k)
            c.col(k) = coef_[k].col(q);
        return c;
    }

    virtual StripeSweep sweep(int q, const CMat &h_hat) const = 0;

    CMat precode(const CMat &h_hat) const override
    {
        CMat out = zero_output();
        const int n = setup_.antennas;
        const int users = setup_.users;
        for (int q = 0; q < setup_.layout.stripes(); ++q)
        {
            const CMat c = stripe_coefficients(q);
            if (c.isZero(0.0))
                continue;
            const StripeSweep sw = sweep(q, h_hat);
            CMat chain = CMat::Identity(users, users);
            for (int m = 0; m < setup_.layout.per_stripe(); ++m)
            {
                const int l = setup_.layout.to_linear({q, m});
                out.middleRows(static_cast<Eigen::Index>(l) * n, n) = sw.filter[m] * sw.v[m] * chain * c;
                chain = sw.vbar[m] * chain;
            }
        }
        for (int k = 0; k < users; ++k)
            for (int l = 0; l < setup_.tx_count(); ++l)
                if (!setup_.assoc.serves(l, k))
                    out.block(static_cast<Eigen::Index>(l) * n, k, n, 1).setZero();
        return out;
    }

protected:
    StripePrecoderBase(PrecodingSetup setup, const WeightedPool &pool, bool bidirectional) : Precoder(std::move(setup))
    {
        for (int k = 0; k < setup_.users; ++k)
            if (setup_.assoc.serving_stripes[k].empty())
                throw std::invalid_argument("stripe precoding needs every user served by whole stripes");
        for (int q = 0; q < setup_.layout.stripes(); ++q)
            stats_.push_back(estimate_stripe_statistics(setup_, q, pool, bidirectional));
        bidirectional_ = bidirectional;
        std::vector<CMat> heads;
        for (int q = 0; q < setup_.layout.stripes(); ++q)
            heads.push_back(head(q));
        for (int k = 0; k < setup_.users; ++k)
            coef_.push_back(solve_statistical_precoders_stripes(setup_.assoc, heads, k));
    }

    const CMat &head(int q) const { return bidirectional_ ? stats_[q].head_bidirectional : stats_[q].head; }

    std::vector<StripeStatistics> stats_;
    std::vector<CMat> coef_; // per user, K x Q
    bool bidirectional_ = false;
};

// Unidirectional sharing along each stripe: TX (q, m) knows the estimates of positions 0..m.
class UnidirectionalPrecoder : public StripePrecoderBase
{
public:
    UnidirectionalPrecoder(PrecodingSetup setup, const WeightedPool &pool) : StripePrecoderBase(std::move(setup), pool, false)
    {
    }
    Scheme scheme() const override { return Scheme::unidirectional; }
    StripeSweep sweep(int q, const CMat &h_hat) const override
    {
        return sweep_unidirectional(setup_, q, h_hat, stats_[q]);
    }
};

// Bidirectional sharing: every TX knows the estimates of its whole stripe. The downstream
// statistic is replaced by its per-realization value, and the coupling between stripes uses
// the mean of the realization-level head.
class BidirectionalPrecoder : public StripePrecoderBase
{
public:
    BidirectionalPrecoder(PrecodingSetup setup, const WeightedPool &pool) : StripePrecoderBase(std::move(setup), pool, true)
    {
    }
    Scheme scheme() const override { return Scheme::bidirectional; }
    StripeSweep sweep(int q, const CMat &h_hat) const override { return sweep_bidirectional(setup_, q, h_hat); }
};

// Full CSIT and message sharing over the whole network. With user_centric the entries
// outside each serving set are zeroed afterwards.
class CentralizedPrecoder : public Precoder
{
public:
    explicit CentralizedPrecoder(PrecodingSetup setup, bool user_centric = false)
        : Precoder(std::move(setup)), user_centric_(user_centric)
    {
        const int n = setup_.antennas;
        psi_ = CMat::Zero(setup_.stacked_dim(), setup_.stacked_dim());
        for (int l = 0; l < setup_.tx_count(); ++l)
            psi_.block(static_cast<Eigen::Index>(l) * n, static_cast<Eigen::Index>(l) * n, n, n) = setup_.psi[l];
    }

    Scheme scheme() const override { return Scheme::centralized; }

    CMat precode(const CMat &h_hat) const override
    {
        CMat out = detail::local_filter(h_hat, psi_, setup_.weights, setup_.power);
        if (user_centric_)
        {
            const int n = setup_.antennas;
            for (int k = 0; k < setup_.users; ++k)
                for (int l = 0; l < setup_.tx_count(); ++l)
                    if (!setup_.assoc.serves(l, k))
                        out.block(static_cast<Eigen::Index>(l) * n, k, n, 1).setZero();
        }
        return out;
    }

private:
    bool user_centric_;
    CMat psi_;
};

// Local MMSE baseline: t_{l,k} = c_{l,k} T_l e_k with scalar coefficients minimizing MSE_k
// over that restricted class. The normal equations only involve Pi_l:
//   G_ll = [Pi_l]_kk,  G_lj = (Pi_l e_k)^H (Pi_j e_k),  r_l = conj([Pi_l]_kk).
class LocalMmsePrecoder : public Precoder
{
public:
    LocalMmsePrecoder(PrecodingSetup setup, const WeightedPool &stats_pool) : Precoder(std::move(setup))
    {
        stats_ = estimate_local_statistics(setup_, stats_pool);
        build_coefficients();
    }
    LocalMmsePrecoder(PrecodingSetup setup, LocalStatistics stats) : Precoder(std::move(setup)), stats_(std::move(stats))
    {
        build_coefficients();
    }

    Scheme scheme() const override { return Scheme::local_mmse; }

    CMat precode(const CMat &h_hat) const override
    {
        CMat out = zero_output();
        const int n = setup_.antennas;
        for (int l = 0; l < setup_.tx_count(); ++l)
        {
            if (setup_.assoc.served_users[l].empty())
                continue;
            const CMat t = detail::local_filter(tx_block(h_hat, l, n), setup_.psi[l], setup_.weights, setup_.power);
            for (int k : setup_.assoc.served_users[l])
                out.block(static_cast<Eigen::Index>(l) * n, k, n, 1) = coef_(l, k) * t.col(k);
        }
        return out;
    }

    // L x K matrix of scalar coefficients.
    const CMat &coefficients() const { return coef_; }

    std::vector<std::pair<std::string, CMat>> statistics_dump() const override
    {
        std::vector<std::pair<std::string, CMat>> out;
        for (std::size_t l = 0; l < stats_.pi.size(); ++l)
            out.emplace_back("pi/tx" + std::to_string(l), stats_.pi[l]);
        out.emplace_back("c/scalar", coef_);
        return out;
    }

private:
    void build_coefficients()
    {
        coef_ = CMat::Zero(setup_.tx_count(), setup_.users);
        for (int k = 0; k < setup_.users; ++k)
        {
            const auto &serving = setup_.assoc.serving_txs[k];
            const Eigen::Index r = static_cast<Eigen::Index>(serving.size());
            CMat g(r, r);
            CVec rhs(r);
            for (Eigen::Index i = 0; i < r; ++i)
            {
                const CVec mi = stats_.pi[serving[i]].col(k);
                rhs(i) = std::conj(mi(k));
                for (Eigen::Index j = 0; j < r; ++j)
                    g(i, j) = i == j ? cdouble(mi(k).real(), 0.0) : mi.dot(stats_.pi[serving[j]].col(k));
            }
            try
            {
                const CVec c = guarded_solve(g, rhs, "local MMSE normal equations");
                for (Eigen::Index i = 0; i < r; ++i)
                    coef_(serving[i], k) = c(i);
            }
            catch (const SingularSystemError &e)
            {
                warnings_.push_back(std::string(e.what()) + "; falling back to unit coefficients for user " +
                                    std::to_string(k));
                for (int l : serving)
                    coef_(l, k) = 1.0;
            }
        }
    }

    LocalStatistics stats_;
    CMat coef_;
};

inline std::unique_ptr<Precoder> design_precoder(Scheme scheme, const PrecodingSetup &setup, const WeightedPool &pool)
{
    switch (scheme)
    {
    case Scheme::no_sharing:
        return std::make_unique<NoSharingPrecoder>(setup, pool);
    case Scheme::unidirectional:
        return std::make_unique<UnidirectionalPrecoder>(setup, pool);
    case Scheme::bidirectional:
        return std::make_unique<BidirectionalPrecoder>(setup, pool);
    case Scheme::centralized:
        return std::make_unique<CentralizedPrecoder>(setup);
    case Scheme::local_mmse:
        return std::make_unique<LocalMmsePrecoder>(setup, pool);
    }
    throw std::invalid_argument("unknown scheme");
}

// ---------- SEQUENTIAL FRONTHAUL IMPLEMENTATION ----------

struct ForwardPassResult
{
    std::vector<CVec> transmit;       // x_{q,m}, one N-vector per position
    std::vector<std::size_t> payload; // complex values forwarded on each hop towards position m
};

// Master unit forms u = sum_k sqrt(p_k) c_{q,k} U_k over the users it serves; each TX
// transmits T V u and forwards Vbar u to the next position.
inline ForwardPassResult stripe_forward_pass(const StripePrecoderBase &precoder, int q, const CMat &h_hat,
                                             const CVec &messages, const RVec &powers)
{
    const auto &setup = precoder.setup();
    if (messages.size() != setup.users || powers.size() != setup.users)
        throw std::invalid_argument("forward pass needs one message and one power per user");
    CVec u = CVec::Zero(setup.users);
    for (int k = 0; k < setup.users; ++k)
        if (setup.assoc.stripe_serves(q, k))
            u += std::sqrt(powers[k]) * messages[k] * precoder.coefficients(k).col(q);
    const StripeSweep sw = precoder.sweep(q, h_hat);
    ForwardPassResult out;
    for (int m = 0; m < setup.layout.per_stripe(); ++m)
    {
        out.payload.push_back(static_cast<std::size_t>(u.size()));
        out.transmit.push_back(sw.filter[m] * (sw.v[m] * u));
        u = sw.vbar[m] * u;
    }
    return out;
}

} // namespace tmmse

#endif
