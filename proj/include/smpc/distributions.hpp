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

#ifndef SMPC_DISTRIBUTIONS_HPP_
#define SMPC_DISTRIBUTIONS_HPP_

#include "smpc/rng.hpp"
#include "smpc/types.hpp"

#include <vector>

namespace smpc
{
    enum class Family
    {
        Gaussian,
        Uniform
    };

    /// Univariate marginal: Gaussian(mean, variance) or Uniform(a, b).
    class MarginalDistribution
    {
    public:
        static MarginalDistribution gaussian(double mean, double variance);
        static MarginalDistribution uniform(double a, double b);

        Family family() const noexcept { return family_; }
        double mean() const noexcept;
        double variance() const noexcept;
        double lower() const noexcept { return p0_; } ///< uniform a
        double upper() const noexcept { return p1_; } ///< uniform b

        /// Map a uniform variate u in (0,1) and a standard normal z to a draw (each family uses one).
        double draw(double u, double z) const noexcept;
        double cdf(double x) const;

    private:
        MarginalDistribution(Family f, double p0, double p1) : family_(f), p0_(p0), p1_(p1) {}
        Family family_;
        double p0_, p1_;
    };

    /**
     * Mean + covariance, with optional per-dimension marginals. Moment-only distributions
     * are valid; sampling them assumes a Gaussian.
     */
    class JointDistribution
    {
    public:
        JointDistribution() = default;
        /// Moment-only distribution; covariance checked for symmetry and PSD-ness.
        JointDistribution(Vector mean, Matrix covariance);

        Index dim() const noexcept { return mean_.size(); }
        const Vector &mean() const noexcept { return mean_; }
        const Matrix &covariance() const noexcept { return cov_; }
        const std::vector<MarginalDistribution> &marginals() const noexcept { return marginals_; }
        bool hasMarginals() const noexcept { return !marginals_.empty(); }
        /// Every marginal known and Gaussian, or moment-only (treated as Gaussian).
        bool isGaussian() const noexcept;
        /// Every marginal known and uniform.
        bool isUniform() const noexcept;

        friend JointDistribution joint_from_marginals(const std::vector<MarginalDistribution> &marginals);

    private:
        Vector mean_;
        Matrix cov_;
        std::vector<MarginalDistribution> marginals_;
    };

    JointDistribution joint_from_marginals(const std::vector<MarginalDistribution> &marginals);

    /// Deterministic (zero-covariance) distribution at a point.
    JointDistribution dirac(const Vector &point);

    /**
     * Stack two independent-or-correlated blocks into one joint distribution [a; b].
     * Marginals are kept when both blocks have them and the cross term is zero.
     */
    JointDistribution stack(const JointDistribution &a, const JointDistribution &b, const Matrix &cross = Matrix());

    /**
     * n i.i.d. draws as columns. Column i only consumes counter index i (dimension j uses
     * sub-counter j), so the result is independent of any parallel schedule.
     * Marginal-backed independent distributions draw per family; moment-only ones use the
     * Gaussian fallback through the Cholesky factor unless allow_gaussian_fallback is false.
     */
    Matrix sample(const JointDistribution &dist, Index n, const RngStream &rng, bool allow_gaussian_fallback = true);
} // namespace smpc

#endif // SMPC_DISTRIBUTIONS_HPP_
