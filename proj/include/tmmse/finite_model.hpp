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

#ifndef TMMSE_FINITE_MODEL_HPP
#define TMMSE_FINITE_MODEL_HPP

#include "tmmse/channel.hpp"
#include "tmmse/topology.hpp"
#include "tmmse/types.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace tmmse
{

// One joint realization of a discrete channel model.
struct SupportPoint
{
    CMat h;     // K x (N L)
    CMat h_hat; // K x (N L)
    double prob = 0.0;
};

// Discrete channel model on which every expectation is an exact finite sum.
class FiniteChannelModel
{
public:
    FiniteChannelModel() = default;
    FiniteChannelModel(StripeLayout layout, int antennas, int users, std::vector<SupportPoint> points)
        : layout_(layout), antennas_(antennas), users_(users), points_(std::move(points))
    {
        if (antennas < 1 || users < 1)
            throw std::invalid_argument("finite model needs positive dimensions");
        if (points_.empty())
            throw std::invalid_argument("finite model needs at least one support point");
        double total = 0.0;
        const Eigen::Index cols = static_cast<Eigen::Index>(layout_.tx_count()) * antennas_;
        for (const auto &p : points_)
        {
            if (!(p.prob >= 0.0) || !std::isfinite(p.prob))
                throw std::invalid_argument("support probabilities must be finite and nonnegative");
            if (p.h.rows() != users || p.h.cols() != cols || p.h_hat.rows() != users || p.h_hat.cols() != cols)
                throw std::invalid_argument("support point has inconsistent dimensions");
            total += p.prob;
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw std::invalid_argument("support probabilities must sum to one");
        index_estimates();
    }

    const StripeLayout &layout() const { return layout_; }
    int antennas() const { return antennas_; }
    int users() const { return users_; }
    int tx_count() const { return layout_.tx_count(); }
    std::size_t size() const { return points_.size(); }
    const std::vector<SupportPoint> &points() const { return points_; }
    const SupportPoint &point(std::size_t s) const { return points_[s]; }

    // Id of the distinct value taken by the local estimate of TX l at realization s.
    int estimate_id(int l, std::size_t s) const { return estimate_ids_[l][s]; }
    int estimate_count(int l) const { return estimate_counts_[l]; }

    // Exact Psi_l = E[E_l^H W E_l].
    CMat error_covariance(int l, const RVec &w) const
    {
        CMat psi = CMat::Zero(antennas_, antennas_);
        for (const auto &p : points_)
        {
            const CMat e = tx_block(p.h, l, antennas_) - tx_block(p.h_hat, l, antennas_);
            psi += p.prob * (e.adjoint() * w.cast<cdouble>().asDiagonal() * e);
        }
        return psi;
    }

    std::vector<CMat> error_covariances(const RVec &w) const
    {
        std::vector<CMat> out;
        for (int l = 0; l < tx_count(); ++l)
            out.push_back(error_covariance(l, w));
        return out;
    }

    WeightedPool pool() const
    {
        WeightedPool p;
        p.exact = true;
        for (std::size_t s = 0; s < points_.size(); ++s)
        {
            p.samples.push_back({points_[s].h, points_[s].h_hat, 0, s});
            p.weights.push_back(points_[s].prob);
        }
        return p;
    }

private:
    void index_estimates()
    {
        estimate_ids_.assign(tx_count(), std::vector<int>(points_.size()));
        estimate_counts_.assign(tx_count(), 0);
        for (int l = 0; l < tx_count(); ++l)
        {
            std::map<std::vector<double>, int> seen;
            for (std::size_t s = 0; s < points_.size(); ++s)
            {
                const CMat block = tx_block(points_[s].h_hat, l, antennas_);
                std::vector<double> key;
                key.reserve(2 * block.size());
                for (Eigen::Index i = 0; i < block.size(); ++i)
                {
                    key.push_back(block(i).real());
                    key.push_back(block(i).imag());
                }
                auto [it, inserted] = seen.emplace(std::move(key), static_cast<int>(seen.size()));
                estimate_ids_[l][s] = it->second;
            }
            estimate_counts_[l] = static_cast<int>(seen.size());
        }
    }

    StripeLayout layout_;
    int antennas_ = 1;
    int users_ = 1;
    std::vector<SupportPoint> points_;
    std::vector<std::vector<int>> estimate_ids_;
    std::vector<int> estimate_counts_;
};

// Per-TX partition of the support into information classes: realizations in the same class
// are indistinguishable at that TX.
struct InformationPartition
{
    std::vector<std::vector<int>> label; // [tx][realization] -> class
    std::vector<int> classes;            // [tx] -> class count

    int tx_count() const { return static_cast<int>(label.size()); }
};

// Validates that labels are 0..C-1 with no gaps and that every class is nonempty.
inline InformationPartition partition_from_labels(std::vector<std::vector<int>> labels, std::size_t support)
{
    InformationPartition p;
    for (auto &row : labels)
    {
        if (row.size() != support)
            throw std::invalid_argument("partition row length does not match the support size");
        std::map<int, int> remap;
        for (int v : row)
        {
            if (v < 0)
                throw std::invalid_argument("partition labels must be nonnegative");
            remap.emplace(v, 0);
        }
        int next = 0;
        for (auto &[k, v] : remap)
            v = next++;
        for (int &v : row)
            v = remap[v];
        p.classes.push_back(next);
    }
    p.label = std::move(labels);
    return p;
}

// Partition induced by a stripe CSIT sharing pattern: S_l is the tuple of local estimates of
// the TXs visible to l.
inline InformationPartition partition_by(const FiniteChannelModel &model, InformationStructure structure)
{
    std::vector<std::vector<int>> labels(model.tx_count(), std::vector<int>(model.size()));
    for (int l = 0; l < model.tx_count(); ++l)
    {
        const auto visible = visible_txs(model.layout(), structure, l);
        std::map<std::vector<int>, int> seen;
        for (std::size_t s = 0; s < model.size(); ++s)
        {
            std::vector<int> key;
            for (int j : visible)
                key.push_back(model.estimate_id(j, s));
            auto [it, inserted] = seen.emplace(std::move(key), static_cast<int>(seen.size()));
            labels[l][s] = it->second;
        }
    }
    return partition_from_labels(std::move(labels), model.size());
}

// E[X | S_l] for every class of TX l, given per-realization values X(s).
inline std::vector<CMat> conditional_mean(const FiniteChannelModel &model, const InformationPartition &part, int l,
                                          const std::vector<CMat> &values)
{
    std::vector<CMat> sum(part.classes[l]);
    std::vector<double> mass(part.classes[l], 0.0);
    for (std::size_t s = 0; s < model.size(); ++s)
    {
        const int c = part.label[l][s];
        const double p = model.point(s).prob;
        if (sum[c].size() == 0)
            sum[c] = CMat::Zero(values[s].rows(), values[s].cols());
        sum[c] += p * values[s];
        mass[c] += p;
    }
    for (int c = 0; c < part.classes[l]; ++c)
        if (mass[c] > 0.0)
            sum[c] /= mass[c];
    return sum;
}

// Per-TX marginal support: independent local estimate and zero-mean estimation error.
struct LocalSupport
{
    std::vector<CMat> estimates; // K x N each
    std::vector<double> estimate_probs;
    std::vector<CMat> errors; // K x N each, probability-weighted mean must be zero
    std::vector<double> error_probs;
};

// Joint support of independent TXs, each with independent estimate and error. This is the
// setting in which local estimation and the stripe sharing patterns satisfy the closed-form
// optimality conditions exactly.
inline FiniteChannelModel make_product_model(const StripeLayout &layout, int antennas, int users,
                                             const std::vector<LocalSupport> &local, std::size_t max_points = 4096)
{
    if (static_cast<int>(local.size()) != layout.tx_count())
        throw std::invalid_argument("need one local support per TX");
    std::size_t total = 1;
    for (const auto &ls : local)
    {
        if (ls.estimates.empty() || ls.errors.empty() || ls.estimates.size() != ls.estimate_probs.size() ||
            ls.errors.size() != ls.error_probs.size())
            throw std::invalid_argument("malformed local support");
        CMat mean = CMat::Zero(users, antennas);
        for (std::size_t i = 0; i < ls.errors.size(); ++i)
            mean += ls.error_probs[i] * ls.errors[i];
        if (mean.norm() > 1e-12)
            throw std::invalid_argument("local estimation error must have zero mean");
        total *= ls.estimates.size() * ls.errors.size();
        if (total > max_points)
            throw std::invalid_argument("joint support exceeds " + std::to_string(max_points) + " points");
    }

    const int txs = layout.tx_count();
    const Eigen::Index cols = static_cast<Eigen::Index>(txs) * antennas;
    std::vector<SupportPoint> points;
    points.reserve(total);
    // Mixed-radix counter over (estimate, error) choices of every TX; TX 0 varies slowest.
    std::vector<std::size_t> digit(2 * txs, 0);
    for (std::size_t n = 0; n < total; ++n)
    {
        SupportPoint pt;
        pt.h.resize(users, cols);
        pt.h_hat.resize(users, cols);
        pt.prob = 1.0;
        for (int l = 0; l < txs; ++l)
        {
            const auto &ls = local[l];
            const std::size_t a = digit[2 * l], b = digit[2 * l + 1];
            tx_block(pt.h_hat, l, antennas) = ls.estimates[a];
            tx_block(pt.h, l, antennas) = ls.estimates[a] + ls.errors[b];
            pt.prob *= ls.estimate_probs[a] * ls.error_probs[b];
        }
        points.push_back(std::move(pt));
        for (int d = 2 * txs - 1; d >= 0; --d)
        {
            const auto &ls = local[d / 2];
            const std::size_t radix = (d % 2 == 0) ? ls.estimates.size() : ls.errors.size();
            if (++digit[d] < radix)
                break;
            digit[d] = 0;
        }
    }
    return FiniteChannelModel(layout, antennas, users, std::move(points));
}

} // namespace tmmse

#endif
