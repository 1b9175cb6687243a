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

#ifndef TMMSE_ORACLE_HPP
#define TMMSE_ORACLE_HPP

// Exact solution of the team optimality conditions on finite-support channel models.
//
// With a finite support every conditional expectation E[. | S_l] is a probability-weighted
// sum over the realizations of one information class, so the stationarity conditions
//
//   E[H_l^H W H_l + I/P | S_l] t_l(S_l) + sum_{j != l} E[H_l^H W H_j t_j | S_l] = sqrt(w_k) E[H_l^H e_k | S_l]
//
// become a square linear system with one N-vector unknown per (serving TX, class).

#include "tmmse/finite_model.hpp"
#include "tmmse/precoding.hpp"
#include "tmmse/types.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace tmmse
{

struct FiniteTeamProblem
{
    FiniteChannelModel model;
    InformationPartition partition;
    RVec weights;
    double power = 1.0;
    AssociationMap assoc;

    int users() const { return model.users(); }
    int antennas() const { return model.antennas(); }
    int tx_count() const { return model.tx_count(); }

    void validate() const
    {
        if (partition.tx_count() != model.tx_count())
            throw std::invalid_argument("partition must cover every TX");
        for (const auto &row : partition.label)
            if (row.size() != model.size())
                throw std::invalid_argument("partition does not cover the support");
        if (weights.size() != model.users())
            throw std::invalid_argument("weights must have one entry per user");
        check_simplex(weights);
        if (!(power > 0.0))
            throw std::invalid_argument("power must be positive");
        if (assoc.users() != model.users() || static_cast<int>(assoc.served_users.size()) != model.tx_count())
            throw std::invalid_argument("association does not match the model");
    }

    // Setup for the closed-form precoders, with exact error covariances.
    PrecodingSetup setup() const
    {
        PrecodingSetup s;
        s.layout = model.layout();
        s.antennas = model.antennas();
        s.users = model.users();
        s.weights = weights;
        s.power = power;
        s.psi = model.error_covariances(weights);
        s.assoc = assoc;
        return s;
    }
};

inline FiniteTeamProblem make_team_problem(FiniteChannelModel model, InformationStructure structure, RVec weights,
                                           double power, AssociationMap assoc)
{
    FiniteTeamProblem p;
    p.partition = partition_by(model, structure);
    p.model = std::move(model);
    p.weights = std::move(weights);
    p.power = power;
    p.assoc = std::move(assoc);
    p.validate();
    return p;
}

// Precoder of one user as a function of the information class: value[l][class] is t_{l,k}.
struct TeamSolution
{
    std::vector<std::vector<CVec>> value;

    const CVec &at(const FiniteTeamProblem &p, int l, std::size_t s) const { return value[l][p.partition.label[l][s]]; }

    // Stacked t_k at realization s.
    CVec stacked(const FiniteTeamProblem &p, std::size_t s) const
    {
        const int n = p.antennas();
        CVec t(static_cast<Eigen::Index>(p.tx_count()) * n);
        for (int l = 0; l < p.tx_count(); ++l)
            t.segment(static_cast<Eigen::Index>(l) * n, n) = at(p, l, s);
        return t;
    }
};

inline TeamSolution zero_solution(const FiniteTeamProblem &p)
{
    TeamSolution sol;
    for (int l = 0; l < p.tx_count(); ++l)
        sol.value.emplace_back(p.partition.classes[l], CVec::Zero(p.antennas()));
    return sol;
}

// Solves the stationarity system for user k. `order`, when given, permutes the unknown
// blocks; the solution must not depend on it.
inline TeamSolution solve_team_exact(const FiniteTeamProblem &p, int k, const std::vector<int> *order = nullptr)
{
    p.validate();
    if (k < 0 || k >= p.users())
        throw std::out_of_range("user index out of range");
    const int n = p.antennas();
    const auto &serving = p.assoc.serving_txs[k];

    // Unknown blocks in natural order: (l, class) for l in L_k.
    std::vector<std::vector<int>> block(p.tx_count());
    int blocks = 0;
    for (int l : serving)
    {
        block[l].resize(p.partition.classes[l]);
        for (int c = 0; c < p.partition.classes[l]; ++c)
            block[l][c] = blocks++;
    }
    std::vector<int> slot(blocks);
    std::iota(slot.begin(), slot.end(), 0);
    if (order)
    {
        if (static_cast<int>(order->size()) != blocks)
            throw std::invalid_argument("unknown permutation has the wrong length");
        for (int b = 0; b < blocks; ++b)
            slot[b] = (*order)[b];
    }

    const Eigen::Index dim = static_cast<Eigen::Index>(blocks) * n;
    CMat a = CMat::Zero(dim, dim);
    CVec rhs = CVec::Zero(dim);
    const CMat wd = p.weights.cast<cdouble>().asDiagonal();
    const double sqrt_wk = std::sqrt(p.weights[k]);
    for (std::size_t s = 0; s < p.model.size(); ++s)
    {
        const auto &pt = p.model.point(s);
        for (int l : serving)
        {
            const Eigen::Index row = static_cast<Eigen::Index>(slot[block[l][p.partition.label[l][s]]]) * n;
            const CMat hl = tx_block(pt.h, l, n);
            const CMat hlw = hl.adjoint() * wd;
            for (int j : serving)
            {
                const Eigen::Index col = static_cast<Eigen::Index>(slot[block[j][p.partition.label[j][s]]]) * n;
                CMat o = hlw * tx_block(pt.h, j, n);
                if (j == l)
                    o.diagonal().array() += 1.0 / p.power;
                a.block(row, col, n, n) += pt.prob * o;
            }
            rhs.segment(row, n) += pt.prob * sqrt_wk * hl.row(k).adjoint();
        }
    }
    const CVec x = guarded_solve(a, rhs, "team stationarity system");

    TeamSolution sol = zero_solution(p);
    for (int l : serving)
        for (int c = 0; c < p.partition.classes[l]; ++c)
            sol.value[l][c] = x.segment(static_cast<Eigen::Index>(slot[block[l][c]]) * n, n);
    return sol;
}

// Collects a closed-form precoder into per-class values. `gap` receives the largest
// difference between realizations of the same class, i.e. the measurability defect.
inline TeamSolution solution_from_precoder(const FiniteTeamProblem &p, const Precoder &precoder, int k,
                                           double *gap = nullptr)
{
    const int n = p.antennas();
    TeamSolution sol;
    std::vector<std::vector<bool>> seen(p.tx_count());
    for (int l = 0; l < p.tx_count(); ++l)
    {
        sol.value.emplace_back(p.partition.classes[l], CVec::Zero(n));
        seen[l].assign(p.partition.classes[l], false);
    }
    double worst = 0.0;
    for (std::size_t s = 0; s < p.model.size(); ++s)
    {
        const CMat t = precoder.precode(p.model.point(s).h_hat);
        for (int l = 0; l < p.tx_count(); ++l)
        {
            const int c = p.partition.label[l][s];
            const CVec v = t.block(static_cast<Eigen::Index>(l) * n, k, n, 1);
            if (!seen[l][c])
            {
                sol.value[l][c] = v;
                seen[l][c] = true;
            }
            else
                worst = std::max(worst, (sol.value[l][c] - v).cwiseAbs().maxCoeff());
        }
    }
    if (gap)
        *gap = worst;
    return sol;
}

// Largest residual of t_l(S_l) = T_l (e_k - sum_{j != l} W^{1/2} E[H_j t_j | S_l]) over all
// serving TXs and classes. Non-serving TXs contribute the norm of their (required zero) value.
// Needs the local estimate of TX l to be measurable with respect to its partition.
inline double verify_stationarity(const FiniteTeamProblem &p, const TeamSolution &cand, int k)
{
    const int n = p.antennas();
    const int users = p.users();
    const auto &serving = p.assoc.serving_txs[k];
    const RVec &w = p.weights;
    const CMat sqrt_w = w.cwiseSqrt().cast<cdouble>().asDiagonal();
    double worst = 0.0;
    for (int l = 0; l < p.tx_count(); ++l)
    {
        if (!p.assoc.serves(l, k))
        {
            for (const auto &v : cand.value[l])
                worst = std::max(worst, v.norm());
            continue;
        }
        const CMat psi = p.model.error_covariance(l, w);
        // Sum of the other serving TXs' estimated contributions per realization.
        std::vector<CMat> others(p.model.size());
        std::vector<int> representative(p.partition.classes[l], -1);
        for (std::size_t s = 0; s < p.model.size(); ++s)
        {
            CVec acc = CVec::Zero(users);
            for (int j : serving)
                if (j != l)
                    acc += tx_block(p.model.point(s).h_hat, j, n) * cand.at(p, j, s);
            others[s] = acc;
            int &rep = representative[p.partition.label[l][s]];
            if (rep < 0)
                rep = static_cast<int>(s);
            else if (p.model.estimate_id(l, s) != p.model.estimate_id(l, static_cast<std::size_t>(rep)))
                throw std::invalid_argument("local estimate is not measurable with respect to the partition");
        }
        const auto cond = conditional_mean(p.model, p.partition, l, others);
        for (int c = 0; c < p.partition.classes[l]; ++c)
        {
            const CMat hl = tx_block(p.model.point(representative[c]).h_hat, l, n);
            const CMat t = detail::local_filter(hl, psi, w, p.power);
            CVec target = -(sqrt_w * cond[c]);
            target(k) += 1.0;
            worst = std::max(worst, (cand.value[l][c] - t * target).norm());
        }
    }
    return worst;
}

// Exact MSE_k of a candidate.
inline double mse_exact(const FiniteTeamProblem &p, const TeamSolution &cand, int k)
{
    const CMat sqrt_w = p.weights.cwiseSqrt().cast<cdouble>().asDiagonal();
    double acc = 0.0;
    for (std::size_t s = 0; s < p.model.size(); ++s)
    {
        const CVec t = cand.stacked(p, s);
        CVec r = sqrt_w * (p.model.point(s).h * t);
        r(k) -= 1.0;
        acc += p.model.point(s).prob * (r.squaredNorm() + t.squaredNorm() / p.power);
    }
    return acc;
}

// Largest elementwise difference between two solutions on the same partition.
inline double max_difference(const TeamSolution &a, const TeamSolution &b)
{
    double worst = 0.0;
    for (std::size_t l = 0; l < a.value.size(); ++l)
        for (std::size_t c = 0; c < a.value[l].size(); ++c)
            worst = std::max(worst, (a.value[l][c] - b.value[l][c]).cwiseAbs().maxCoeff());
    return worst;
}

} // namespace tmmse

#endif
