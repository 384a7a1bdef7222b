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

#include "smpc/chance.hpp"

#include "smpc/types.hpp"

#include <cmath>
#include <string>

namespace smpc
{
    double normal_cdf(double x)
    {
        return 0.5 * std::erfc(-x / std::sqrt(2.0));
    }

    double normal_quantile(double p)
    {
        if (!(p > 0.0 && p < 1.0))
            throw ParameterError("normal_quantile: p must lie in (0,1)");
        // Acklam's rational approximation
        static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00};
        static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01, -1.328068155288572e+01};
        static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00};
        static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
        constexpr double plow = 0.02425;
        double x;
        if (p < plow)
        {
            const double q = std::sqrt(-2.0 * std::log(p));
            x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
                ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
        }
        else if (p <= 1.0 - plow)
        {
            const double q = p - 0.5, r = q * q;
            x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
                (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
        }
        else
        {
            const double q = std::sqrt(-2.0 * std::log1p(-p));
            x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
                ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
        }
        // one Halley step; use the upper tail for p > 1/2 to keep precision
        const double e = p > 0.5 ? -(0.5 * std::erfc(x / std::sqrt(2.0)) - (1.0 - p)) : normal_cdf(x) - p;
        const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
        x -= u / (1.0 + 0.5 * x * u);
        return x;
    }

    double z_coeff(ConstraintApprox approx, double alpha)
    {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw ParameterError("z_coeff: alpha must lie in (0,1), got " + std::to_string(alpha));
        switch (approx)
        {
        case ConstraintApprox::Chebyshev:
            return std::sqrt(alpha / (1.0 - alpha));
        case ConstraintApprox::Symmetric:
            return std::sqrt(1.0 / (2.0 * (1.0 - alpha)));
        case ConstraintApprox::Gaussian:
            return normal_quantile(alpha);
        }
        throw ParameterError("z_coeff: unknown approximation");
    }

    double mc_confidence(long ns, double alpha, bool check)
    {
        if (!(alpha > 0.0 && alpha < 1.0) || ns < 1)
            throw ParameterError("mc_confidence: need Ns >= 1 and alpha in (0,1)");
        const double n = static_cast<double>(ns);
        if (check && (n * alpha < 10.0 || n * (1.0 - alpha) < 10.0))
            throw ApproximationInvalidError("mc_confidence: normal approximation invalid (Ns*alpha = " +
                                            std::to_string(n * alpha) + ", Ns*(1-alpha) = " +
                                            std::to_string(n * (1.0 - alpha)) + ", both must be >= 10)");
        return normal_cdf(std::sqrt(n * (1.0 - alpha) / alpha));
    }
} // namespace smpc
