/*
 Copyright 2026 The smpc Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "smpc/distributions.hpp"

#include "smpc/linalg.hpp"

#include <cmath>
#include <string>

namespace smpc
{
    MarginalDistribution MarginalDistribution::gaussian(double mean, double variance)
    {
        if (!std::isfinite(mean) || !std::isfinite(variance) || variance < 0.0)
            throw ParameterError("Gaussian marginal needs finite mean and variance >= 0");
        return MarginalDistribution(Family::Gaussian, mean, variance);
    }

    MarginalDistribution MarginalDistribution::uniform(double a, double b)
    {
        if (!std::isfinite(a) || !std::isfinite(b) || !(a < b))
            throw ParameterError("Uniform marginal needs finite bounds a < b");
        return MarginalDistribution(Family::Uniform, a, b);
    }

    double MarginalDistribution::mean() const noexcept
    {
        return family_ == Family::Gaussian ? p0_ : 0.5 * (p0_ + p1_);
    }

    double MarginalDistribution::variance() const noexcept
    {
        if (family_ == Family::Gaussian)
            return p1_;
        const double w = p1_ - p0_;
        return w * w / 12.0;
    }

    double MarginalDistribution::draw(double u, double z) const noexcept
    {
        if (family_ == Family::Gaussian)
            return p0_ + std::sqrt(p1_) * z;
        return p0_ + (p1_ - p0_) * u;
    }

    double MarginalDistribution::cdf(double x) const
    {
        if (family_ == Family::Gaussian)
        {
            if (p1_ == 0.0)
                return x < p0_ ? 0.0 : 1.0;
            return 0.5 * std::erfc(-(x - p0_) / std::sqrt(2.0 * p1_));
        }
        if (x <= p0_)
            return 0.0;
        if (x >= p1_)
            return 1.0;
        return (x - p0_) / (p1_ - p0_);
    }

    JointDistribution::JointDistribution(Vector mean, Matrix covariance)
        : mean_(std::move(mean)), cov_(std::move(covariance))
    {
        const Index n = mean_.size();
        if (cov_.rows() != n || cov_.cols() != n)
            throw ParameterError("JointDistribution: covariance must be " + std::to_string(n) + "x" + std::to_string(n));
        if (!mean_.allFinite() || !cov_.allFinite())
            throw ParameterError("JointDistribution: non-finite moments");
        const double scale = std::max(cov_.cwiseAbs().maxCoeff(), 1e-300);
        if (n > 0 && (cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
            throw ParameterError("JointDistribution: covariance is not symmetric");
        symmetrize(cov_);
        if (n > 0)
        {
            Eigen::SelfAdjointEigenSolver<Matrix> es(cov_, Eigen::EigenvaluesOnly);
            const double tr = std::abs(cov_.trace());
            if (es.eigenvalues().minCoeff() < -1e-10 * tr)
                throw IndefiniteCovarianceError("JointDistribution: covariance has negative eigenvalues",
                                                es.eigenvalues().minCoeff());
        }
    }

    bool JointDistribution::isGaussian() const noexcept
    {
        for (const auto &m : marginals_)
            if (m.family() != Family::Gaussian)
                return false;
        return true;
    }

    bool JointDistribution::isUniform() const noexcept
    {
        if (marginals_.empty())
            return false;
        for (const auto &m : marginals_)
            if (m.family() != Family::Uniform)
                return false;
        return true;
    }

    JointDistribution joint_from_marginals(const std::vector<MarginalDistribution> &marginals)
    {
        if (marginals.empty())
            throw ParameterError("joint_from_marginals: empty marginal list");
        const Index n = static_cast<Index>(marginals.size());
        Vector mu(n);
        Matrix cov = Matrix::Zero(n, n);
        for (Index i = 0; i < n; ++i)
        {
            mu(i) = marginals[i].mean();
            cov(i, i) = marginals[i].variance();
        }
        JointDistribution d(std::move(mu), std::move(cov));
        d.marginals_ = marginals;
        return d;
    }

    JointDistribution dirac(const Vector &point)
    {
        std::vector<MarginalDistribution> m;
        for (Index i = 0; i < point.size(); ++i)
            m.push_back(MarginalDistribution::gaussian(point(i), 0.0));
        if (m.empty())
            return JointDistribution(Vector(), Matrix());
        return joint_from_marginals(m);
    }

    JointDistribution stack(const JointDistribution &a, const JointDistribution &b, const Matrix &cross)
    {
        const Index na = a.dim(), nb = b.dim();
        const bool has_cross = cross.size() > 0 && cross.cwiseAbs().maxCoeff() > 0.0;
        if (cross.size() > 0 && (cross.rows() != na || cross.cols() != nb))
            throw ParameterError("stack: cross-covariance has wrong shape");
        if (!has_cross && a.hasMarginals() && (b.hasMarginals() || nb == 0) && (na > 0 || nb > 0))
        {
            std::vector<MarginalDistribution> m = a.marginals();
            m.insert(m.end(), b.marginals().begin(), b.marginals().end());
            return joint_from_marginals(m);
        }
        if (!has_cross && na == 0 && b.hasMarginals())
            return joint_from_marginals(b.marginals());
        Vector mu(na + nb);
        mu << a.mean(), b.mean();
        Matrix cov = Matrix::Zero(na + nb, na + nb);
        cov.topLeftCorner(na, na) = a.covariance();
        cov.bottomRightCorner(nb, nb) = b.covariance();
        if (has_cross)
        {
            cov.topRightCorner(na, nb) = cross;
            cov.bottomLeftCorner(nb, na) = cross.transpose();
        }
        return JointDistribution(std::move(mu), std::move(cov));
    }

    Matrix sample(const JointDistribution &dist, Index n, const RngStream &rng, bool allow_gaussian_fallback)
    {
        if (n < 1)
            throw ParameterError("sample: n must be >= 1");
        const Index d = dist.dim();
        Matrix out(d, n);
        if (dist.hasMarginals())
        {
            const auto &m = dist.marginals();
            for (Index i = 0; i < n; ++i)
                for (Index j = 0; j < d; ++j)
                {
                    const auto &mj = m[static_cast<std::size_t>(j)];
                    const auto ui = static_cast<std::uint64_t>(i), uj = static_cast<std::uint64_t>(j);
                    out(j, i) = mj.family() == Family::Gaussian ? mj.draw(0.0, rng.normal(ui, uj))
                                                                : mj.draw(rng.uniform(ui, uj), 0.0);
                }
            return out;
        }
        if (!allow_gaussian_fallback)
            throw UnsupportedError("sample: distribution has no marginal family and the Gaussian fallback is disabled");
        const Matrix l = cholesky_psd(dist.covariance());
        Vector z(d);
        for (Index i = 0; i < n; ++i)
        {
            for (Index j = 0; j < d; ++j)
                z(j) = rng.normal(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j));
            out.col(i).noalias() = dist.mean() + l * z;
        }
        return out;
    }
} // namespace smpc
