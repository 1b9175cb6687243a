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

#ifndef TMMSE_TOPOLOGY_HPP
#define TMMSE_TOPOLOGY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace tmmse
{

// Position in meters. Receivers sit at z = 0, transmitters at the ceiling height.
struct Point3
{
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

inline double distance(const Point3 &a, const Point3 &b)
{
    return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

// Rectangular service area: x in [0, width], y in [0, depth].
struct ServiceArea
{
    double width = 0.0;
    double depth = 0.0;

    bool contains(const Point3 &p) const
    {
        return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= depth;
    }
};

// Zero-based (stripe, position) pair. Position 0 is next to the stripe's master unit.
struct StripeIndex
{
    int stripe = 0;
    int position = 0;

    friend bool operator==(const StripeIndex &, const StripeIndex &) = default;
};

// Row-major mapping l = stripe * per_stripe + position between linear TX indices and
// stripe coordinates. All indices are zero-based.
class StripeLayout
{
public:
    StripeLayout() = default;
    StripeLayout(int stripes, int per_stripe) : stripes_(stripes), per_stripe_(per_stripe)
    {
        if (stripes < 1 || per_stripe < 1)
            throw std::invalid_argument("stripe layout needs at least one stripe and one TX per stripe");
    }

    int stripes() const { return stripes_; }
    int per_stripe() const { return per_stripe_; }
    int tx_count() const { return stripes_ * per_stripe_; }

    StripeIndex to_pair(int l) const
    {
        if (l < 0 || l >= tx_count())
            throw std::out_of_range("TX index " + std::to_string(l) + " outside [0, " + std::to_string(tx_count()) + ")");
        return {l / per_stripe_, l % per_stripe_};
    }

    int to_linear(StripeIndex idx) const
    {
        if (idx.stripe < 0 || idx.stripe >= stripes_ || idx.position < 0 || idx.position >= per_stripe_)
            throw std::out_of_range("stripe index (" + std::to_string(idx.stripe) + ", " +
                                    std::to_string(idx.position) + ") outside layout");
        return idx.stripe * per_stripe_ + idx.position;
    }

    int stripe_of(int l) const { return to_pair(l).stripe; }

private:
    int stripes_ = 1;
    int per_stripe_ = 1;
};

struct Deployment
{
    StripeLayout layout;
    int antennas = 1;
    ServiceArea area;
    double height = 0.0; // TX-RX height difference
    std::vector<Point3> tx;
    std::vector<double> stripe_depth; // y coordinate of each stripe line
    std::vector<Point3> rx;

    int tx_count() const { return layout.tx_count(); }
    int users() const { return static_cast<int>(rx.size()); }

    void set_receivers(std::vector<Point3> positions)
    {
        if (positions.empty())
            throw std::invalid_argument("deployment needs at least one receiver");
        for (const auto &p : positions)
            if (!area.contains(p))
                throw std::invalid_argument("receiver outside the service area");
        rx = std::move(positions);
    }
};

// Parallel stripes spread evenly over the depth, TXs spread evenly along each stripe,
// both on a centered grid: stripe q at (q + 1/2) depth / Q, TX m at (m + 1/2) width / M.
inline Deployment build_grid_deployment(int stripes, int per_stripe, ServiceArea area, double height, int antennas = 1)
{
    if (!(area.width > 0.0) || !(area.depth > 0.0))
        throw std::invalid_argument("service area dimensions must be positive");
    if (!(height >= 0.0))
        throw std::invalid_argument("height difference must be nonnegative");
    if (antennas < 1)
        throw std::invalid_argument("each TX needs at least one antenna");

    Deployment d;
    d.layout = StripeLayout(stripes, per_stripe);
    d.antennas = antennas;
    d.area = area;
    d.height = height;
    d.tx.reserve(d.layout.tx_count());
    for (int q = 0; q < stripes; ++q)
    {
        const double y = (q + 0.5) * area.depth / stripes;
        d.stripe_depth.push_back(y);
        for (int m = 0; m < per_stripe; ++m)
            d.tx.push_back({(m + 0.5) * area.width / per_stripe, y, height});
    }
    return d;
}

template <class Rng>
std::vector<Point3> draw_uniform_receivers(const ServiceArea &area, int count, Rng &rng)
{
    std::uniform_real_distribution<double> ux(0.0, area.width), uy(0.0, area.depth);
    std::vector<Point3> out(count);
    for (auto &p : out)
    {
        p.x = ux(rng);
        p.y = uy(rng);
    }
    return out;
}

// Who serves whom. serving_txs[k] is L_k, served_users[l] is K_l, serving_stripes[k] is Q_k.
// Every set is kept sorted.
struct AssociationMap
{
    std::vector<std::vector<int>> serving_stripes;
    std::vector<std::vector<int>> serving_txs;
    std::vector<std::vector<int>> served_users;

    int users() const { return static_cast<int>(serving_txs.size()); }

    bool serves(int l, int k) const
    {
        const auto &s = serving_txs[k];
        return std::binary_search(s.begin(), s.end(), l);
    }

    bool stripe_serves(int q, int k) const
    {
        const auto &s = serving_stripes[k];
        return std::binary_search(s.begin(), s.end(), q);
    }
};

// Builds K_l from L_k. Stripe sets are filled when every L_k is a union of whole stripes,
// left empty otherwise.
inline AssociationMap association_from_serving_txs(const StripeLayout &layout, std::vector<std::vector<int>> serving)
{
    AssociationMap a;
    const int users = static_cast<int>(serving.size());
    a.served_users.assign(layout.tx_count(), {});
    a.serving_stripes.assign(users, {});
    bool granular = true;
    for (int k = 0; k < users; ++k)
    {
        auto &s = serving[k];
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
        if (s.empty())
            throw std::invalid_argument("user " + std::to_string(k) + " has an empty serving set");
        for (int l : s)
        {
            if (l < 0 || l >= layout.tx_count())
                throw std::out_of_range("serving TX index out of range");
            a.served_users[l].push_back(k);
        }
        std::vector<int> count(layout.stripes(), 0);
        for (int l : s)
            ++count[layout.stripe_of(l)];
        for (int q = 0; q < layout.stripes(); ++q)
        {
            if (count[q] == layout.per_stripe())
                a.serving_stripes[k].push_back(q);
            else if (count[q] != 0)
                granular = false;
        }
    }
    if (!granular)
        for (auto &s : a.serving_stripes)
            s.clear();
    a.serving_txs = std::move(serving);
    return a;
}

inline AssociationMap association_from_stripes(const StripeLayout &layout, const std::vector<std::vector<int>> &stripes)
{
    std::vector<std::vector<int>> serving(stripes.size());
    for (std::size_t k = 0; k < stripes.size(); ++k)
        for (int q : stripes[k])
        {
            if (q < 0 || q >= layout.stripes())
                throw std::out_of_range("serving stripe index out of range");
            for (int m = 0; m < layout.per_stripe(); ++m)
                serving[k].push_back(layout.to_linear({q, m}));
        }
    return association_from_serving_txs(layout, std::move(serving));
}

// Each receiver is served by the `per_user` stripes closest in planar perpendicular
// distance; equidistant stripes resolve to the lower index.
inline AssociationMap assign_serving_stripes(const Deployment &d, int per_user)
{
    const int stripes = d.layout.stripes();
    if (per_user < 1 || per_user > stripes)
        throw std::invalid_argument("serving stripe count must lie in [1, stripes]");
    if (d.rx.empty())
        throw std::invalid_argument("deployment has no receivers");
    std::vector<std::vector<int>> chosen(d.rx.size());
    std::vector<int> order(stripes);
    for (std::size_t k = 0; k < d.rx.size(); ++k)
    {
        std::iota(order.begin(), order.end(), 0);
        const double y = d.rx[k].y;
        std::stable_sort(order.begin(), order.end(), [&](int a, int b)
                         { return std::abs(y - d.stripe_depth[a]) < std::abs(y - d.stripe_depth[b]); });
        chosen[k].assign(order.begin(), order.begin() + per_user);
        std::sort(chosen[k].begin(), chosen[k].end());
    }
    return association_from_stripes(d.layout, chosen);
}

} // namespace tmmse

#endif
