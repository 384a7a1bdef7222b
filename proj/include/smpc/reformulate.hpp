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

#ifndef SMPC_REFORMULATE_HPP_
#define SMPC_REFORMULATE_HPP_

#include "smpc/problem.hpp"
#include "smpc/transform.hpp"

#include <memory>
#include <string>

namespace smpc
{
    enum class Representation
    {
        SR,         ///< sampling-based: one state copy per point
        MRTaylor,   ///< moments, linearized propagation
        MRSampling  ///< moments, sigma-point propagation resampled at every call
    };

    std::string to_string(Representation r);
    Representation parse_representation(const std::string &s);

    /**
     * Sampling-based representation. Points of the stacked (x0, p) distribution are drawn once;
     * x~ is the column-major flattening of the nx x Ns sample matrix.
     * Throws UnsupportedError for diffusion or an attached GP.
     */
    std::unique_ptr<DeterministicProblem> build_sr(const StochasticProblem &problem, const PropagationMethod &method,
                                                   ConstraintApprox approx, ConstraintMode mode);

    /// Moment representation with Taylor linearization; x~ = [mu; vec(Sigma); vec(Sigma_xp)].
    std::unique_ptr<DeterministicProblem> build_mr_taylor(const StochasticProblem &problem);

    /// Moment representation with UT / Stirling propagation; same state layout as build_mr_taylor.
    std::unique_ptr<DeterministicProblem> build_mr_sampling(const StochasticProblem &problem,
                                                            const PropagationMethod &method);

    struct ReformulationConfig
    {
        Representation repr = Representation::SR;
        PropagationMethod method = PropagationMethod::unscented();
        ConstraintMode mode = ConstraintMode::MomentTightened;
    };

    /// Dispatch on the representation; tightening rule taken from problem.approx.
    std::unique_ptr<DeterministicProblem> reformulate(const StochasticProblem &problem, const ReformulationConfig &cfg);

    /// Layout helpers for the moment state.
    Index moment_state_dim(Index nx, Index np);
    Vector pack_moments(const Vector &mean, const Matrix &cov, const Matrix &cov_xp);
} // namespace smpc

#endif // SMPC_REFORMULATE_HPP_
