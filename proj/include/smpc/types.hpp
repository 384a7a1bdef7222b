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

#ifndef SMPC_TYPES_HPP_
#define SMPC_TYPES_HPP_

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace smpc
{
    using Index = Eigen::Index;
    using Vector = Eigen::VectorXd;
    using Matrix = Eigen::MatrixXd;
    using VectorRef = Eigen::Ref<Vector>;
    using ConstVectorRef = Eigen::Ref<const Vector>;
    using MatrixRef = Eigen::Ref<Matrix>;
    using ConstMatrixRef = Eigen::Ref<const Matrix>;

    /// Invalid argument or configuration value (out-of-range order, probability, dimension...).
    class ParameterError : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    /// A requested combination of features is not supported (e.g. Wiener diffusion under sampling-based representation).
    class UnsupportedError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// User model lacks derivatives required by the selected method.
    class MissingDerivativeError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// Covariance (or Gram) matrix could not be factorized even after jitter.
    class IndefiniteCovarianceError : public std::runtime_error
    {
    public:
        IndefiniteCovarianceError(const std::string &what, double most_negative_pivot)
            : std::runtime_error(what), most_negative_pivot_(most_negative_pivot) {}

        double mostNegativePivot() const noexcept { return most_negative_pivot_; }

    private:
        double most_negative_pivot_;
    };

    /// Non-finite output while propagating a point through a user function.
    class PropagationError : public std::runtime_error
    {
    public:
        PropagationError(const std::string &what, Vector point)
            : std::runtime_error(what), point_(std::move(point)) {}

        const Vector &point() const noexcept { return point_; }

    private:
        Vector point_;
    };

    /// Non-finite state derivative during forward integration.
    class IntegrationError : public std::runtime_error
    {
    public:
        IntegrationError(const std::string &what, double time)
            : std::runtime_error(what), time_(time) {}

        double time() const noexcept { return time_; }

    private:
        double time_;
    };

    /// Statistical approximation used outside its validity conditions.
    class ApproximationInvalidError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// Requested quadrature/basis family does not match a marginal family.
    class FamilyMismatchError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// Kalman-filter failure (singular innovation covariance).
    class FilterError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// Symmetrize in place: A <- (A + A^T) / 2.
    inline void symmetrize(MatrixRef a)
    {
        const Index n = a.rows();
        for (Index j = 0; j < n; ++j)
        {
            for (Index i = j + 1; i < n; ++i)
            {
                const double v = 0.5 * (a(i, j) + a(j, i));
                a(i, j) = v;
                a(j, i) = v;
            }
        }
    }
} // namespace smpc

#endif // SMPC_TYPES_HPP_
