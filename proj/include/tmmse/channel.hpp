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

#ifndef TMMSE_CHANNEL_HPP
#define TMMSE_CHANNEL_HPP

#include "tmmse/topology.hpp"
#include "tmmse/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace tmmse
{

// ---------- LARGE-SCALE MODEL ----------

// Indoor-factory dense-high NLoS path loss in dB. Distances below 1 m are clamped to 1 m.
inline double path_loss_db(double distance_m, double carrier_ghz, double shadow_db = 0.0)
{
    if (!std::isfinite(distance_m) || !std::isfinite(carrier_ghz) || !std::isfinite(shadow_db))
        throw std::invalid_argument("path loss inputs must be finite");
    if (!(carrier_ghz > 0.0))
        throw std::invalid_argument("carrier frequency must be positive");
    const double d = std::max(distance_m, 1.0);
    return 21.9 * std::log10(d) + 33.6 + 20.0 * std::log10(carrier_ghz) + shadow_db;
}

// Thermal noise power in dBm over `bandwidth_hz`.
inline double noise_power_dbm(double bandwidth_hz, double noise_figure_db)
{
    if (!(bandwidth_hz > 0.0))
        throw std::invalid_argument("bandwidth must be positive");
    return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

// Noise-normalized linear gain in 1/mW. Once gains are folded this way the noise is
// unit-variance and TX powers are in mW.
inline double channel_gain(double path_loss, double noise_dbm)
{
    return std::pow(10.0, -(path_loss + noise_dbm) / 10.0);
}

struct ChannelParams
{
    double ricean = 6.0;
    double carrier_ghz = 4.9;
    double bandwidth_hz = 100e6;
    double noise_figure_db = 7.0;
    double shadow_sigma_db = 4.0;
};

// ---------- RANDOM STREAMS ----------

enum class Phase : std::uint64_t
{
    geometry = 1,
    statistics = 2,
    evaluation = 3,
};

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed of the substream identified by (base seed, drop, phase, realization).
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t drop, Phase phase, std::uint64_t index)
{
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ drop);
    h = splitmix64(h ^ static_cast<std::uint64_t>(phase));
    return splitmix64(h ^ index);
}

inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t drop, Phase phase, std::uint64_t index)
{
    return std::mt19937_64(stream_seed(seed, drop, phase, index));
}

// ---------- STATISTICS ----------

// Per (TX, RX) pair statistics of i.i.d. Ricean entries
// H_{l,k,n} ~ CN(sqrt(kappa/(kappa+1) rho2), rho2/(kappa+1)), plus the local CSI rule:
// a KNOWN pair is estimated perfectly, an UNKNOWN pair is replaced by its mean and its full
// scatter variance ends up in the error covariance.
class ChannelStatistics
{
public:
    ChannelStatistics() = default;
    ChannelStatistics(int txs, int users, int antennas, double ricean)
        : txs_(txs), users_(users), antennas_(antennas), ricean_(ricean), gain_(RMat::Ones(txs, users)),
          distance_(RMat::Zero(txs, users)), path_loss_(RMat::Zero(txs, users)), known_(txs * users, 1)
    {
        if (txs < 1 || users < 1 || antennas < 1)
            throw std::invalid_argument("channel statistics need positive dimensions");
        if (!(ricean >= 0.0) || !std::isfinite(ricean))
            throw std::invalid_argument("Ricean factor must be finite and nonnegative");
    }

    int txs() const { return txs_; }
    int users() const { return users_; }
    int antennas() const { return antennas_; }
    double ricean() const { return ricean_; }

    double gain(int l, int k) const { return gain_(l, k); }
    double distance(int l, int k) const { return distance_(l, k); }
    double path_loss(int l, int k) const { return path_loss_(l, k); }
    bool known(int l, int k) const { return known_[l * users_ + k] != 0; }

    double mean(int l, int k) const { return std::sqrt(ricean_ / (ricean_ + 1.0) * gain_(l, k)); }
    double scatter_variance(int l, int k) const { return gain_(l, k) / (ricean_ + 1.0); }

    void set_pair(int l, int k, double distance_m, double path_loss, double gain)
    {
        if (!(gain > 0.0) || !std::isfinite(gain))
            throw std::invalid_argument("channel gain must be finite and positive");
        distance_(l, k) = distance_m;
        path_loss_(l, k) = path_loss;
        gain_(l, k) = gain;
    }
    void set_known(int l, int k, bool v) { known_[l * users_ + k] = v ? 1 : 0; }

    // Psi_l = E[E_l^H W E_l]. Entries are independent across antennas, so it is a scaled identity.
    CMat error_covariance(int l, const RVec &w) const
    {
        double s = 0.0;
        for (int k = 0; k < users_; ++k)
            if (!known(l, k))
                s += w[k] * scatter_variance(l, k);
        return CMat::Identity(antennas_, antennas_) * s;
    }

    std::vector<CMat> error_covariances(const RVec &w) const
    {
        std::vector<CMat> out;
        out.reserve(txs_);
        for (int l = 0; l < txs_; ++l)
            out.push_back(error_covariance(l, w));
        return out;
    }

private:
    int txs_ = 0;
    int users_ = 0;
    int antennas_ = 1;
    double ricean_ = 0.0;
    RMat gain_;
    RMat distance_;
    RMat path_loss_;
    std::vector<std::uint8_t> known_;
};

// Geometry to statistics. Shadowing is a real Gaussian in dB drawn once per pair.
// A pair is KNOWN iff the TX belongs to one of the user's serving stripes.
template <class Rng>
ChannelStatistics build_statistics(const Deployment &d, const AssociationMap &assoc, const ChannelParams &p, Rng &rng)
{
    if (!(p.shadow_sigma_db >= 0.0))
        throw std::invalid_argument("shadow fading deviation must be nonnegative");
    if (assoc.users() != d.users())
        throw std::invalid_argument("association and deployment disagree on the number of users");
    ChannelStatistics s(d.tx_count(), d.users(), d.antennas, p.ricean);
    const double noise = noise_power_dbm(p.bandwidth_hz, p.noise_figure_db);
    std::normal_distribution<double> shadow(0.0, 1.0);
    for (int l = 0; l < d.tx_count(); ++l)
        for (int k = 0; k < d.users(); ++k)
        {
            const double dist = distance(d.tx[l], d.rx[k]);
            const double z = p.shadow_sigma_db > 0.0 ? p.shadow_sigma_db * shadow(rng) : 0.0;
            const double pl = path_loss_db(dist, p.carrier_ghz, z);
            s.set_pair(l, k, dist, pl, channel_gain(pl, noise));
            s.set_known(l, k, assoc.stripe_serves(d.layout.stripe_of(l), k));
        }
    return s;
}

// ---------- SMALL-SCALE SAMPLING ----------

// One joint realization. Both matrices are K x (N L); TX l owns columns [l N, (l + 1) N).
struct ChannelSample
{
    CMat h;
    CMat h_hat;
    std::uint64_t drop = 0;
    std::uint64_t index = 0;
};

inline auto tx_block(const CMat &m, int l, int antennas)
{
    return m.middleCols(static_cast<Eigen::Index>(l) * antennas, antennas);
}

inline auto tx_block(CMat &m, int l, int antennas)
{
    return m.middleCols(static_cast<Eigen::Index>(l) * antennas, antennas);
}

template <class Rng>
ChannelSample sample_channel(const ChannelStatistics &s, Rng &rng)
{
    const int n = s.antennas();
    ChannelSample out;
    out.h.resize(s.users(), static_cast<Eigen::Index>(s.txs()) * n);
    out.h_hat.resize(out.h.rows(), out.h.cols());
    std::normal_distribution<double> g(0.0, 1.0);
    for (int l = 0; l < s.txs(); ++l)
        for (int k = 0; k < s.users(); ++k)
        {
            const double mu = s.mean(l, k);
            const double sd = std::sqrt(s.scatter_variance(l, k) / 2.0);
            const bool known = s.known(l, k);
            for (int a = 0; a < n; ++a)
            {
                const double re = g(rng);
                const double im = g(rng);
                const cdouble v(mu + sd * re, sd * im);
                out.h(k, l * n + a) = v;
                out.h_hat(k, l * n + a) = known ? v : cdouble(mu, 0.0);
            }
        }
    return out;
}

// Realization `index` of the given phase, independent of how many other samples are drawn.
inline ChannelSample sample_channel_at(const ChannelStatistics &s, std::uint64_t seed, std::uint64_t drop, Phase phase,
                                       std::uint64_t index)
{
    auto rng = make_stream(seed, drop, phase, index);
    auto out = sample_channel(s, rng);
    out.drop = drop;
    out.index = index;
    return out;
}

inline std::vector<ChannelSample> sample_pool(const ChannelStatistics &s, std::uint64_t seed, std::uint64_t drop,
                                              Phase phase, int count)
{
    std::vector<ChannelSample> pool;
    pool.reserve(count);
    for (int i = 0; i < count; ++i)
        pool.push_back(sample_channel_at(s, seed, drop, phase, static_cast<std::uint64_t>(i)));
    return pool;
}

// Realizations with probability weights. Monte Carlo pools carry weights 1/S; finite-support
// models carry their exact probabilities, which turns every average into an exact expectation.
struct WeightedPool
{
    std::vector<ChannelSample> samples;
    std::vector<double> weights;
    bool exact = false;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
};

inline WeightedPool monte_carlo_pool(std::vector<ChannelSample> samples)
{
    WeightedPool p;
    p.weights.assign(samples.size(), samples.empty() ? 0.0 : 1.0 / static_cast<double>(samples.size()));
    p.samples = std::move(samples);
    return p;
}

// ---------- INFORMATION STRUCTURES ----------

enum class InformationStructure
{
    no_sharing,
    unidirectional,
    bidirectional,
    centralized,
};

inline std::string to_string(InformationStructure s)
{
    switch (s)
    {
    case InformationStructure::no_sharing:
        return "no-sharing";
    case InformationStructure::unidirectional:
        return "unidirectional";
    case InformationStructure::bidirectional:
        return "bidirectional";
    case InformationStructure::centralized:
        return "centralized";
    }
    return "?";
}

// TXs whose local estimates are part of S_l.
inline std::vector<int> visible_txs(const StripeLayout &layout, InformationStructure s, int l)
{
    std::vector<int> out;
    const auto [q, m] = layout.to_pair(l);
    switch (s)
    {
    case InformationStructure::no_sharing:
        out.push_back(l);
        break;
    case InformationStructure::unidirectional:
        for (int n = 0; n <= m; ++n)
            out.push_back(layout.to_linear({q, n}));
        break;
    case InformationStructure::bidirectional:
        for (int n = 0; n < layout.per_stripe(); ++n)
            out.push_back(layout.to_linear({q, n}));
        break;
    case InformationStructure::centralized:
        for (int j = 0; j < layout.tx_count(); ++j)
            out.push_back(j);
        break;
    }
    return out;
}

} // namespace tmmse

#endif
