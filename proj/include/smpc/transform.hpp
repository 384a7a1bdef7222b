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

#ifndef SMPC_TRANSFORM_HPP_
#define SMPC_TRANSFORM_HPP_

#include "smpc/distributions.hpp"
#include "smpc/linalg.hpp"
#include "smpc/polyquad.hpp"
#include "smpc/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace smpc
{
    enum class MethodKind
    {
        Taylor1,
        Stirling1,
        Stirling2,
        Unscented,
        GaussQuadrature,
        MonteCarlo,
        PCE
    };

    /// Propagation method with its parameters. Defaults: UT(1, 2, 3-N), h = sqrt(3), d = 3.
    struct PropagationMethod
    {
        MethodKind kind = MethodKind::Unscented;
        double alpha = 1.0;
        double beta = 2.0;
        std::optional<double> kappa; ///< unset: 3 - N
        double h = 1.7320508075688772;
        int order = 3;      ///< quadrature order d (also PCE projection order)
        int pce_order = 2;  ///< M, basis of total degree <= M-1
        long samples = 1000; ///< Monte-Carlo Np
        std::uint64_t seed = 0;
        /// Force one quadrature family for every dimension (mismatch with a marginal throws).
        std::optional<PolyFamily> family;

        static PropagationMethod taylor();
        static PropagationMethod stirling1(double h = 1.7320508075688772);
        static PropagationMethod stirling2(double h = 1.7320508075688772);
        static PropagationMethod unscented(double alpha = 1.0, double beta = 2.0, std::optional<double> kappa = {});
        static PropagationMethod quadrature(int d = 3);
        static PropagationMethod monte_carlo(long np, std::uint64_t seed = 0);
        static PropagationMethod pce(int m, int d);

        std::string name() const;
        /// Throws ParameterError for out-of-range parameters.
        void validate() const;
    };

    /// How the covariance of propagated points is estimated.
    enum class Estimator
    {
        WeightedScatter, ///< sum w_cov (y - mu)(y - mu)^T  (UT, quadrature, Monte-Carlo)
        StirlingFirst,
        StirlingSecond,
        Chaos ///< coefficient outer products
    };

    struct PointSet
    {
        Matrix points;   ///< Nxi x Ns
        Vector w_mean;   ///< Ns
        Vector w_cov;    ///< Ns (used for cross-covariances and the scatter estimator)
        Estimator estimator = Estimator::WeightedScatter;
        double h = 0.0;  ///< Stirling step
        Vector center;   ///< mu_xi
        // PCE only
        Matrix projection;  ///< Nbasis x Ns: w_k phi_i(zeta_k) / <phi_i, phi_i>
        Vector basis_norms; ///< <phi_i, phi_i>
        std::vector<std::vector<int>> multi_indices;

        Index dim() const noexcept { return points.rows(); }
        Index size() const noexcept { return points.cols(); }
    };

    /// Map input to output: y = psi(xi).
    using VectorMap = std::function<void(const ConstVectorRef &xi, VectorRef y)>;
    /// Jacobian of a VectorMap: J = d psi / d xi (Ny x Nxi).
    using JacobianMap = std::function<void(const ConstVectorRef &xi, MatrixRef jac)>;

    struct PropagationResult
    {
        Vector mean;
        Matrix cov;
        Matrix cross; ///< Cov[y, xi], Ny x Nxi
    };

    /**
     * Points in standardized coordinates for the sigma-point methods (UT / Stirling):
     * xi = mu + S * zeta with S the Cholesky factor of the covariance.
     */
    PointSet standard_sigma_points(const PropagationMethod &method, Index n);

    PointSet generate_points(const PropagationMethod &method, const JointDistribution &dist);

    /// Weighted mean of the columns of y.
    Vector estimate_mean(const PointSet &ps, const ConstMatrixRef &y);
    /// Covariance of y with the point set's estimator (symmetrized).
    Matrix estimate_cov(const PointSet &ps, const ConstMatrixRef &y, const ConstVectorRef &mean);
    /// Cov[y, xi] = sum w_cov (y - mean)(xi - center)^T.
    Matrix estimate_cross(const PointSet &ps, const ConstMatrixRef &y, const ConstVectorRef &mean);

    /// Variance of a scalar output sampled at the points (y has Ns entries).
    double estimate_var1(const PointSet &ps, const ConstVectorRef &y, double mean);
    /// d var / d y_k including the dependence through the mean; g has Ns entries.
    void estimate_var1_gradient(const PointSet &ps, const ConstVectorRef &y, double mean, VectorRef g);

    PropagationResult propagate(const PropagationMethod &method, const VectorMap &psi, Index ny,
                                const JointDistribution &dist, const JacobianMap &jac = nullptr);

    /// Graded multi-indices of total degree <= max_degree in n dimensions (index 0 is constant).
    std::vector<std::vector<int>> total_degree_indices(Index n, int max_degree);

    /**
     * PCE coefficients a_i = <psi, phi_i>/<phi_i, phi_i> by tensor quadrature of order d,
     * basis of total degree <= M-1 (Hermite for Gaussian, Legendre for uniform dimensions).
     */
    Matrix pce_coefficients(const VectorMap &psi, Index ny, const JointDistribution &dist, int m, int d);

    /// Polynomial family used per dimension by quadrature and PCE for this distribution.
    std::vector<PolyFamily> native_families(const JointDistribution &dist, std::optional<PolyFamily> forced = {});
} // namespace smpc

#endif // SMPC_TRANSFORM_HPP_
