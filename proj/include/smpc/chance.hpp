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

#ifndef SMPC_CHANCE_HPP_
#define SMPC_CHANCE_HPP_

#include <cmath>

namespace smpc
{
    /// Distributional assumption behind the tightening coefficient z(alpha).
    enum class ConstraintApprox
    {
        Chebyshev,
        Symmetric,
        Gaussian
    };

    /// Standard normal CDF (erfc based).
    double normal_cdf(double x);

    /// Standard normal quantile: rational approximation + one Halley step.
    double normal_quantile(double p);

    /// Tightening coefficient; alpha must lie in (0,1).
    double z_coeff(ConstraintApprox approx, double alpha);

    /// mu + z * sqrt(max(var, 0)); the chance constraint holds when this is <= 0.
    inline double tighten(double mu, double var, double z)
    {
        return mu + z * (var > 0.0 ? std::sqrt(var) : 0.0);
    }

    /**
     * Confidence that Ns samples all satisfying a constraint imply probability >= alpha,
     * Phi(sqrt(Ns (1-alpha)/alpha)). With check set, Ns*alpha >= 10 and Ns*(1-alpha) >= 10
     * are enforced (ApproximationInvalidError otherwise).
     */
    double mc_confidence(long ns, double alpha, bool check = true);
} // namespace smpc

#endif // SMPC_CHANCE_HPP_
