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

#ifndef SMPC_POLYQUAD_HPP_
#define SMPC_POLYQUAD_HPP_

#include "smpc/types.hpp"

#include <vector>

namespace smpc
{
    /// Probabilists' Hermite (standard normal weight) or Legendre (uniform density 1/2 on [-1,1]).
    enum class PolyFamily
    {
        HermiteProbabilists,
        Legendre
    };

    /// Value of the degree-n polynomial by three-term recurrence.
    double poly_eval(PolyFamily family, int n, double x);

    /// Evaluate degrees 0..n at x into out (size n+1).
    void poly_eval_all(PolyFamily family, int n, double x, double *out);

    /// <phi_n, phi_n> under the normalized family density: n! (Hermite), 1/(2n+1) (Legendre).
    double norm_squared(PolyFamily family, int n);

    struct QuadratureRule
    {
        PolyFamily family;
        int order = 0;
        Vector nodes;   ///< strictly increasing
        Vector weights; ///< sum to 1
    };

    /// Gauss rule of order d (1 <= d <= 64) by Golub-Welsch.
    QuadratureRule gauss_rule(PolyFamily family, int d);

    /// Closed-form rules for d <= 5, kept as fixtures for the Golub-Welsch construction.
    QuadratureRule gauss_rule_table(PolyFamily family, int d);

    struct TensorRule
    {
        std::vector<QuadratureRule> rules;
        Matrix points;  ///< Nxi x Np, standardized coordinates
        Vector weights; ///< Np
    };

    /// Full tensor grid; lexicographic ordering with the last dimension running fastest.
    TensorRule tensor_rule(const std::vector<PolyFamily> &families, const std::vector<int> &orders);

    /**
     * Eigen-decomposition of a symmetric tridiagonal matrix (diag, offdiag) by implicit QL with
     * Wilkinson shifts. On return diag holds eigenvalues (unsorted) and z the eigenvectors
     * (columns). z must be passed in as the identity (or any basis to rotate).
     */
    void tridiagonal_ql(Vector &diag, Vector &offdiag, Matrix &z);
} // namespace smpc

#endif // SMPC_POLYQUAD_HPP_
