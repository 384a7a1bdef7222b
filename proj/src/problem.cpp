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

#include "smpc/problem.hpp"

#include <string>

namespace smpc
{
    void SystemModel::dynamics_jacobians(const ConstVectorRef &, const ConstVectorRef &, const ConstVectorRef &,
                                         double, MatrixRef, MatrixRef, MatrixRef) const
    {
        throw MissingDerivativeError("model '" + name() + "' provides no dynamics Jacobians");
    }

    bool SystemModel::dynamics_vjp(const ConstVectorRef &, const ConstVectorRef &, const ConstVectorRef &, double,
                                   const ConstVectorRef &, VectorRef, VectorRef, VectorRef) const
    {
        return false;
    }

    Matrix StochasticProblem::diffusion_cov() const
    {
        const Index nx = model ? model->nx() : 0;
        if (sigma_w.size() == 0)
            return Matrix::Zero(nx, nx);
        return sigma_w * sigma_w.transpose();
    }

    bool StochasticProblem::has_diffusion() const
    {
        return sigma_w.size() > 0 && sigma_w.cwiseAbs().maxCoeff() > 0.0;
    }

    void StochasticProblem::validate() const
    {
        if (!model)
            throw ParameterError("StochasticProblem: no model");
        const Index nx = model->nx(), nu = model->nu(), np = model->np();
        if (!(horizon > 0.0))
            throw ParameterError("StochasticProblem: horizon must be > 0");
        if (x0.dim() != nx)
            throw ParameterError("StochasticProblem: x0 distribution has dimension " + std::to_string(x0.dim()) +
                                 ", model expects " + std::to_string(nx));
        if (p.dim() != np)
            throw ParameterError("StochasticProblem: parameter distribution has dimension " +
                                 std::to_string(p.dim()) + ", model expects " + std::to_string(np));
        if (u_min.size() != nu || u_max.size() != nu || (u_min.array() > u_max.array()).any())
            throw ParameterError("StochasticProblem: input box must have nu entries with u_min <= u_max");
        if (alpha_path.size() != model->num_path() || alpha_terminal.size() != model->num_terminal())
            throw ParameterError("StochasticProblem: one chance level per constraint required");
        for (Index j = 0; j < alpha_path.size(); ++j)
            if (!(alpha_path(j) > 0.0 && alpha_path(j) < 1.0))
                throw ParameterError("StochasticProblem: chance levels must lie in (0,1)");
        for (Index j = 0; j < alpha_terminal.size(); ++j)
            if (!(alpha_terminal(j) > 0.0 && alpha_terminal(j) < 1.0))
                throw ParameterError("StochasticProblem: chance levels must lie in (0,1)");
        if (sigma_w.size() > 0 && (sigma_w.rows() != nx || sigma_w.cols() != nx))
            throw ParameterError("StochasticProblem: sigma_w must be nx x nx");
        if (cov_x0p.size() > 0 && (cov_x0p.rows() != nx || cov_x0p.cols() != np))
            throw ParameterError("StochasticProblem: cov_x0p must be nx x np");
        if (gp && (gp->output_dim() != nx || gp->input_dim() != nx + nu))
            throw ParameterError("StochasticProblem: GP must map [x; u] to nx outputs");
    }

    StochasticProblem attach_gp(StochasticProblem problem, std::shared_ptr<const GPModel> gp)
    {
        problem.gp = std::move(gp);
        problem.validate();
        return problem;
    }
} // namespace smpc
