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

#include "smpc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace smpc
{
    namespace
    {
        // One attempt; returns true on success, otherwise stores the offending pivot.
        bool tryFactor(const ConstMatrixRef &a, double jitter, double scale, MatrixRef l, double &bad_pivot)
        {
            const Index n = a.rows();
            const double tol = 64.0 * std::numeric_limits<double>::epsilon() * scale * static_cast<double>(n);
            l.setZero();
            for (Index j = 0; j < n; ++j)
            {
                double d = a(j, j) + jitter;
                for (Index k = 0; k < j; ++k)
                    d -= l(j, k) * l(j, k);
                if (d > tol)
                {
                    const double ljj = std::sqrt(d);
                    l(j, j) = ljj;
                    for (Index i = j + 1; i < n; ++i)
                    {
                        double r = a(i, j);
                        for (Index k = 0; k < j; ++k)
                            r -= l(i, k) * l(j, k);
                        l(i, j) = r / ljj;
                    }
                    continue;
                }
                if (d < -tol)
                {
                    bad_pivot = d;
                    return false;
                }
                // numerically zero pivot: the remaining column must vanish too
                const double ctol = std::sqrt(tol * std::max(scale, tol));
                for (Index i = j + 1; i < n; ++i)
                {
                    double r = a(i, j);
                    for (Index k = 0; k < j; ++k)
                        r -= l(i, k) * l(j, k);
                    if (std::abs(r) > ctol)
                    {
                        bad_pivot = d - std::abs(r);
                        return false;
                    }
                }
            }
            return true;
        }
    } // namespace

    double cholesky_psd_into(const ConstMatrixRef &a, MatrixRef l)
    {
        const Index n = a.rows();
        if (a.cols() != n || l.rows() != n || l.cols() != n)
            throw ParameterError("cholesky_psd: matrix must be square");
        if (n == 0)
            return 0.0;
        double scale = 0.0;
        for (Index i = 0; i < n; ++i)
            scale = std::max(scale, std::abs(a(i, i)));
        const double mean_diag = a.trace() / static_cast<double>(n);
        const double levels[] = {0.0, 1e-12, 1e-9, 1e-6};
        double worst = 0.0;
        for (double lv : levels)
        {
            const double jitter = lv * std::abs(mean_diag);
            if (lv > 0.0 && jitter == 0.0)
                break;
            double pivot = 0.0;
            if (tryFactor(a, jitter, scale, l, pivot))
                return jitter;
            worst = pivot;
        }
        throw IndefiniteCovarianceError("cholesky_psd: matrix is not positive semi-definite (pivot " +
                                            std::to_string(worst) + ")",
                                        worst);
    }

    Matrix cholesky_psd(const ConstMatrixRef &a)
    {
        Matrix l(a.rows(), a.cols());
        cholesky_psd_into(a, l);
        return l;
    }

    void cholesky_reverse(const ConstMatrixRef &l, MatrixRef lbar, MatrixRef abar)
    {
        const Index n = l.rows();
        abar.setZero();
        for (Index j = n - 1; j >= 0; --j)
        {
            const double ljj = l(j, j);
            if (ljj == 0.0)
                continue;
            for (Index i = n - 1; i > j; --i)
            {
                const double rbar = lbar(i, j) / ljj;
                abar(i, j) += rbar;
                lbar(j, j) -= rbar * l(i, j);
                for (Index k = 0; k < j; ++k)
                {
                    lbar(i, k) -= rbar * l(j, k);
                    lbar(j, k) -= rbar * l(i, k);
                }
            }
            const double dbar = lbar(j, j) / (2.0 * ljj);
            abar(j, j) += dbar;
            for (Index k = 0; k < j; ++k)
                lbar(j, k) -= 2.0 * dbar * l(j, k);
        }
    }
} // namespace smpc
