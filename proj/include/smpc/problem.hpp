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

#ifndef SMPC_PROBLEM_HPP_
#define SMPC_PROBLEM_HPP_

#include "smpc/chance.hpp"
#include "smpc/distributions.hpp"
#include "smpc/gp.hpp"
#include "smpc/types.hpp"

#include <memory>
#include <string>
#include <vector>

namespace smpc
{
    /**
     * User system: dynamics f(x,u,p,t), costs, path constraints h(x,u,p,t) <= 0 and terminal
     * constraints hT(x,p) <= 0, with first derivatives. Implementations must be stateless
     * (const methods, no hidden scratch), so one model can be shared by many problems.
     */
    class SystemModel
    {
    public:
        virtual ~SystemModel() = default;

        virtual Index nx() const = 0;
        virtual Index nu() const = 0;
        virtual Index np() const { return 0; }
        virtual Index num_path() const { return 0; }
        virtual Index num_terminal() const { return 0; }
        virtual std::string name() const { return "model"; }

        virtual void dynamics(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p, double t,
                              VectorRef out) const = 0;

        virtual bool has_jacobians() const { return true; }
        /// jx: nx x nx, ju: nx x nu, jp: nx x np.
        virtual void dynamics_jacobians(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p,
                                        double t, MatrixRef jx, MatrixRef ju, MatrixRef jp) const;
        /**
         * Optional fast vector-Jacobian product: gx = jx^T lam, gu = ju^T lam, gp = jp^T lam
         * (overwritten). Return false to fall back on dynamics_jacobians.
         */
        virtual bool dynamics_vjp(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p,
                                  double t, const ConstVectorRef &lam, VectorRef gx, VectorRef gu,
                                  VectorRef gp) const;

        virtual double stage_cost(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p,
                                  double t) const = 0;
        virtual void stage_cost_gradient(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p,
                                         double t, VectorRef gx, VectorRef gu, VectorRef gp) const = 0;

        virtual double terminal_cost(const ConstVectorRef &, const ConstVectorRef &, double) const { return 0.0; }
        virtual void terminal_cost_gradient(const ConstVectorRef &, const ConstVectorRef &, double, VectorRef gx,
                                            VectorRef gp) const
        {
            gx.setZero();
            gp.setZero();
        }

        virtual void path_constraints(const ConstVectorRef &, const ConstVectorRef &, const ConstVectorRef &, double,
                                      VectorRef) const {}
        /// hx: nh x nx, hu: nh x nu, hp: nh x np.
        virtual void path_constraints_jacobians(const ConstVectorRef &, const ConstVectorRef &,
                                                const ConstVectorRef &, double, MatrixRef hx, MatrixRef hu,
                                                MatrixRef hp) const
        {
            hx.setZero();
            hu.setZero();
            hp.setZero();
        }

        virtual void terminal_constraints(const ConstVectorRef &, const ConstVectorRef &, double, VectorRef) const {}
        virtual void terminal_constraints_jacobians(const ConstVectorRef &, const ConstVectorRef &, double,
                                                    MatrixRef hx, MatrixRef hp) const
        {
            hx.setZero();
            hp.setZero();
        }
    };

    /// Stochastic OCP: model + horizon + chance levels + input box + diffusion + uncertainty.
    struct StochasticProblem
    {
        std::shared_ptr<const SystemModel> model;
        double horizon = 1.0;
        double t0 = 0.0;
        Vector alpha_path;     ///< per path constraint, in (0,1)
        Vector alpha_terminal; ///< per terminal constraint
        Vector u_min, u_max;
        Matrix sigma_w;       ///< nx x nx diffusion (empty = none)
        JointDistribution x0;
        JointDistribution p;  ///< may have dimension 0
        Matrix cov_x0p;       ///< optional initial state/parameter cross-covariance (empty = 0)
        std::shared_ptr<const GPModel> gp;
        ConstraintApprox approx = ConstraintApprox::Gaussian;

        /// Diffusion covariance sigma_w sigma_w^T (zero matrix if no diffusion).
        Matrix diffusion_cov() const;
        bool has_diffusion() const;
        /// Dimensional and range checks; throws ParameterError.
        void validate() const;
    };

    /// Attach a GP residual model (dynamics become f + mu_d(x,u)); only moment-based builders accept it.
    StochasticProblem attach_gp(StochasticProblem problem, std::shared_ptr<const GPModel> gp);

    enum class ConstraintMode
    {
        MomentTightened,
        PerSample
    };

    struct StateMoments
    {
        Vector mean;
        Vector var;
    };

    /**
     * Deterministic OCP on a flattened state. Instances keep scratch workspaces and are
     * therefore not safe to call concurrently; build one per thread.
     * Times passed to every method are absolute (t0 + tau).
     */
    class DeterministicProblem
    {
    public:
        virtual ~DeterministicProblem() = default;

        virtual Index state_dim() const = 0;
        Index control_dim() const { return u_min_.size(); }
        virtual Index num_path() const = 0;
        virtual Index num_terminal() const = 0;

        const Vector &initial_state() const { return x0_; }
        const Vector &u_min() const { return u_min_; }
        const Vector &u_max() const { return u_max_; }
        double horizon() const { return horizon_; }
        double t0() const { return t0_; }
        const std::vector<std::string> &warnings() const { return warnings_; }

        virtual void dynamics(const ConstVectorRef &x, const ConstVectorRef &u, double t, VectorRef out) = 0;
        /// gx = (df/dx)^T lam, gu = (df/du)^T lam (overwritten).
        virtual void dynamics_vjp(const ConstVectorRef &x, const ConstVectorRef &u, double t,
                                  const ConstVectorRef &lam, VectorRef gx, VectorRef gu) = 0;

        virtual double stage_cost(const ConstVectorRef &x, const ConstVectorRef &u, double t) = 0;
        virtual void stage_cost_gradient(const ConstVectorRef &x, const ConstVectorRef &u, double t, VectorRef gx,
                                         VectorRef gu) = 0;
        virtual double terminal_cost(const ConstVectorRef &x, double t) = 0;
        virtual void terminal_cost_gradient(const ConstVectorRef &x, double t, VectorRef gx) = 0;

        virtual void path_constraints(const ConstVectorRef &x, const ConstVectorRef &u, double t, VectorRef h) = 0;
        /// gx = sum_j w_j dh_j/dx, gu likewise (overwritten).
        virtual void path_constraints_vjp(const ConstVectorRef &x, const ConstVectorRef &u, double t,
                                          const ConstVectorRef &w, VectorRef gx, VectorRef gu) = 0;
        virtual void terminal_constraints(const ConstVectorRef &x, double t, VectorRef h) = 0;
        virtual void terminal_constraints_vjp(const ConstVectorRef &x, double t, const ConstVectorRef &w,
                                              VectorRef gx) = 0;

        /// Mean and variance of the physical state encoded in x (for logging).
        virtual StateMoments moments(const ConstVectorRef &x) = 0;

    protected:
        Vector x0_, u_min_, u_max_;
        double horizon_ = 1.0, t0_ = 0.0;
        std::vector<std::string> warnings_;
    };
} // namespace smpc

#endif // SMPC_PROBLEM_HPP_
