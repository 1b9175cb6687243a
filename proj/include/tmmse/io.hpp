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

#ifndef TMMSE_IO_HPP
#define TMMSE_IO_HPP

#include "json.hpp"

#include "tmmse/channel.hpp"
#include "tmmse/oracle.hpp"
#include "tmmse/types.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tmmse
{

using json = nlohmann::json;

// ---------- NUMBERS ----------

// Shortest round-trip representation, so CSV output is byte-stable for identical inputs.
inline std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline json to_json(const RVec &v)
{
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

inline RVec rvec_from_json(const json &j)
{
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const RVec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Complex matrix as rows of [re, im] pairs.
inline json cmat_to_json(const CMat &m)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
    {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

inline CMat cmat_from_json(const json &j)
{
    if (!j.is_array() || j.empty())
        throw std::invalid_argument("complex matrix must be a nonempty array of rows");
    const std::size_t rows = j.size(), cols = j[0].size();
    CMat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i)
    {
        if (j[i].size() != cols)
            throw std::invalid_argument("complex matrix rows differ in length");
        for (std::size_t c = 0; c < cols; ++c)
        {
            const auto &e = j[i][c];
            if (!e.is_array() || e.size() != 2)
                throw std::invalid_argument("complex entries are [re, im] pairs");
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = cdouble(e[0].get<double>(), e[1].get<double>());
        }
    }
    return m;
}

// ---------- FINITE PROBLEM FIXTURES ----------

inline InformationStructure parse_information_structure(const std::string &s)
{
    for (auto v : {InformationStructure::no_sharing, InformationStructure::unidirectional,
                   InformationStructure::bidirectional, InformationStructure::centralized})
        if (to_string(v) == s)
            return v;
    throw std::invalid_argument("unknown information structure '" + s + "'");
}

// Fixture layout:
//   { "stripes", "per_stripe", "antennas", "users", "power_mw", "weights": [...],
//     "serving_txs": [[l, ...], ...]  or  "serving_stripes": [[q, ...], ...],
//     "information": "no-sharing|unidirectional|bidirectional|centralized"  or
//     "partitions": [[class per realization], ...one row per TX],
//     "support": [{"prob": p, "h": [[[re, im], ...], ...], "h_hat": ...}, ...] }
// All indices are zero-based.
inline FiniteTeamProblem problem_from_json(const json &j)
{
    const StripeLayout layout(j.at("stripes").get<int>(), j.at("per_stripe").get<int>());
    const int antennas = j.value("antennas", 1);
    const int users = j.at("users").get<int>();
    std::vector<SupportPoint> points;
    for (const auto &s : j.at("support"))
        points.push_back({cmat_from_json(s.at("h")), cmat_from_json(s.at("h_hat")), s.at("prob").get<double>()});
    FiniteChannelModel model(layout, antennas, users, std::move(points));

    FiniteTeamProblem p;
    if (j.contains("partitions"))
        p.partition = partition_from_labels(j.at("partitions").get<std::vector<std::vector<int>>>(), model.size());
    else
        p.partition = partition_by(model, parse_information_structure(j.at("information").get<std::string>()));
    if (j.contains("serving_txs"))
        p.assoc = association_from_serving_txs(layout, j.at("serving_txs").get<std::vector<std::vector<int>>>());
    else
        p.assoc = association_from_stripes(layout, j.at("serving_stripes").get<std::vector<std::vector<int>>>());
    p.weights = j.contains("weights") ? rvec_from_json(j.at("weights")) : uniform_weights(users);
    p.power = j.at("power_mw").get<double>();
    p.model = std::move(model);
    p.validate();
    return p;
}

inline json problem_to_json(const FiniteTeamProblem &p)
{
    json j;
    j["stripes"] = p.model.layout().stripes();
    j["per_stripe"] = p.model.layout().per_stripe();
    j["antennas"] = p.antennas();
    j["users"] = p.users();
    j["power_mw"] = p.power;
    j["weights"] = to_json(p.weights);
    j["serving_txs"] = p.assoc.serving_txs;
    j["partitions"] = p.partition.label;
    json support = json::array();
    for (const auto &pt : p.model.points())
        support.push_back({{"prob", pt.prob}, {"h", cmat_to_json(pt.h)}, {"h_hat", cmat_to_json(pt.h_hat)}});
    j["support"] = std::move(support);
    return j;
}

// ---------- BINARY STATISTICS DUMP ----------
//
// Little-endian layout:
//   "TMSD"  u32 version (=1)  u32 entry count
//   per entry: u32 name length, name bytes, u32 rows, u32 cols,
//              rows * cols pairs of f64 (re, im) in row-major order

namespace detail
{

inline void put_u32(std::ostream &os, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        os.put(static_cast<char>((v >> (8 * i)) & 0xffu));
}

inline void put_f64(std::ostream &os, double d)
{
    std::uint64_t v;
    static_assert(sizeof v == sizeof d);
    std::memcpy(&v, &d, sizeof v);
    for (int i = 0; i < 8; ++i)
        os.put(static_cast<char>((v >> (8 * i)) & 0xffu));
}

inline std::uint64_t get_bytes(std::istream &is, int n)
{
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i)
    {
        const int c = is.get();
        if (c == std::char_traits<char>::eof())
            throw std::runtime_error("truncated statistics dump");
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return v;
}

} // namespace detail

using NamedMatrices = std::vector<std::pair<std::string, CMat>>;

inline void write_matrix_dump(std::ostream &os, const NamedMatrices &entries)
{
    os.write("TMSD", 4);
    detail::put_u32(os, 1);
    detail::put_u32(os, static_cast<std::uint32_t>(entries.size()));
    for (const auto &[name, m] : entries)
    {
        detail::put_u32(os, static_cast<std::uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        detail::put_u32(os, static_cast<std::uint32_t>(m.rows()));
        detail::put_u32(os, static_cast<std::uint32_t>(m.cols()));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index c = 0; c < m.cols(); ++c)
            {
                detail::put_f64(os, m(i, c).real());
                detail::put_f64(os, m(i, c).imag());
            }
    }
}

inline NamedMatrices read_matrix_dump(std::istream &is)
{
    char magic[4];
    if (!is.read(magic, 4) || std::string(magic, 4) != "TMSD")
        throw std::runtime_error("not a statistics dump");
    if (detail::get_bytes(is, 4) != 1)
        throw std::runtime_error("unsupported statistics dump version");
    const auto count = detail::get_bytes(is, 4);
    NamedMatrices out;
    for (std::uint64_t e = 0; e < count; ++e)
    {
        std::string name(detail::get_bytes(is, 4), '\0');
        if (!is.read(name.data(), static_cast<std::streamsize>(name.size())))
            throw std::runtime_error("truncated statistics dump");
        const auto rows = static_cast<Eigen::Index>(detail::get_bytes(is, 4));
        const auto cols = static_cast<Eigen::Index>(detail::get_bytes(is, 4));
        CMat m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index c = 0; c < cols; ++c)
            {
                const std::uint64_t re = detail::get_bytes(is, 8), im = detail::get_bytes(is, 8);
                double dr, di;
                std::memcpy(&dr, &re, sizeof dr);
                std::memcpy(&di, &im, sizeof di);
                m(i, c) = cdouble(dr, di);
            }
        out.emplace_back(std::move(name), std::move(m));
    }
    return out;
}

// ---------- GAIN DUMP ----------

inline void write_gains_csv(std::ostream &os, const ChannelStatistics &s)
{
    os << "l,k,distance_m,PL_dB,rho2\n";
    for (int l = 0; l < s.txs(); ++l)
        for (int k = 0; k < s.users(); ++k)
            os << l << ',' << k << ',' << format_double(s.distance(l, k)) << ',' << format_double(s.path_loss(l, k))
               << ',' << format_double(s.gain(l, k)) << '\n';
}

} // namespace tmmse

#endif
