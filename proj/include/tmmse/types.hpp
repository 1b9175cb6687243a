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

#ifndef TMMSE_TYPES_HPP
#define TMMSE_TYPES_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tmmse
{

using cdouble = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

// Reciprocal condition estimate below which a linear system is treated as singular.
inline constexpr double singular_rcond = 1e-12;

// Raised when a linear system that should be uniquely solvable is numerically singular.
class SingularSystemError : public std::runtime_error
{
public:
    SingularSystemError(const std::string &what, double rcond)
        : std::runtime_error(what + " (rcond=" + std::to_string(rcond) + ")"), rcond_(rcond)
    {
    }
    double rcond() const noexcept { return rcond_; }

private:
    double rcond_;
};

// Dense complex solve A X = B with a singularity guard.
inline CMat guarded_solve(const CMat &a, const CMat &b, const std::string &context)
{
    Eigen::PartialPivLU<CMat> lu(a);
    const double rc = lu.rcond();
    if (!(rc >= singular_rcond))
        throw SingularSystemError(context + ": singular system", rc);
    return lu.solve(b);
}

// Hermitian positive definite solve, used for the regularized local filters.
inline CMat hermitian_solve(const CMat &a, const CMat &b, const std::string &context)
{
    Eigen::LLT<CMat> llt(a);
    if (llt.info() != Eigen::Success)
        throw SingularSystemError(context + ": matrix not positive definite", 0.0);
    return llt.solve(b);
}

// Weight vector on the probability simplex.
inline void check_simplex(const RVec &w, double tol = 1e-9)
{
    if (w.size() == 0)
        throw std::invalid_argument("weights must not be empty");
    for (Eigen::Index k = 0; k < w.size(); ++k)
        if (!(w[k] >= 0.0))
            throw std::invalid_argument("weights must be nonnegative");
    if (std::abs(w.sum() - 1.0) > tol)
        throw std::invalid_argument("weights must sum to one");
}

inline RVec uniform_weights(int users)
{
    return RVec::Constant(users, 1.0 / users);
}

} // namespace tmmse

#endif
