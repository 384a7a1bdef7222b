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

#ifndef SMPC_LINALG_HPP_
#define SMPC_LINALG_HPP_

#include "smpc/types.hpp"

namespace smpc
{
    /**
     * Lower Cholesky factor of a symmetric positive semi-definite matrix.
     * Tries jitter in {0, 1e-12, 1e-9, 1e-6} * tr(A)/N and returns the first success.
     * Zero pivots with a vanishing remaining column produce a zero column, so exactly
     * semi-definite inputs (e.g. deterministic dimensions) factor without jitter.
     * Throws IndefiniteCovarianceError with the most negative pivot otherwise.
     */
    Matrix cholesky_psd(const ConstMatrixRef &a);

    /// Allocation-free variant; writes into l (n x n). Returns the jitter used.
    double cholesky_psd_into(const ConstMatrixRef &a, MatrixRef l);

    /**
     * Reverse-mode of the unblocked Cholesky: given L = chol(A) and the adjoint lbar of L
     * (lower triangle read; lbar is overwritten as workspace), write the adjoint with respect
     * to the lower triangle of A into abar (upper triangle zeroed). Zero pivots propagate nothing.
     */
    void cholesky_reverse(const ConstMatrixRef &l, MatrixRef lbar, MatrixRef abar);
} // namespace smpc

#endif // SMPC_LINALG_HPP_
