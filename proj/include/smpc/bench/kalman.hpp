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

#ifndef SMPC_BENCH_KALMAN_HPP_
#define SMPC_BENCH_KALMAN_HPP_

#include "smpc/distributions.hpp"
#include "smpc/types.hpp"

namespace smpc::bench
{
    /// x_{k+1} = a x_k + b u_k  with process noise covariance q.
    struct DiscreteLinearSystem
    {
        Matrix a, b, q;
    };

    /**
     * Zero-order-hold discretization of x' = A x + B u with white noise of intensity Qc
     * (Van Loan's block exponential for the noise term).
     */
    DiscreteLinearSystem discretize(const Matrix &ac, const Matrix &bc, const Matrix &qc, double dt);

    /**
     * Linear Kalman filter at a fixed linearization point. Measurements y = C x + v,
     * v ~ N(0, R). Components of y whose R diagonal is infinite are ignored.
     */
    class KalmanFilter
    {
    public:
        KalmanFilter(DiscreteLinearSystem sys, Matrix c, Matrix r, Vector mean, Matrix cov);

        void predict(const Vector &u);
        /// Throws FilterError when the innovation covariance is not positive definite.
        void update(const Vector &y);

        const Vector &mean() const { return mean_; }
        const Matrix &cov() const { return cov_; }
        JointDistribution estimate() const { return JointDistribution(mean_, cov_); }
        void reset(Vector mean, Matrix cov);

    private:
        DiscreteLinearSystem sys_;
        Matrix c_, r_;
        Vector mean_;
        Matrix cov_;
    };
} // namespace smpc::bench

#endif // SMPC_BENCH_KALMAN_HPP_
