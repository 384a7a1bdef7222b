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

// Small models and derivative checks shared by the reformulation and solver tests.

#ifndef SMPC_TEST_MODELS_HPP_
#define SMPC_TEST_MODELS_HPP_

#include "smpc/problem.hpp"
#include "smpc/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <memory>

namespace smpc::testing
{
    /// Damped pendulum-like system with an uncertain stiffness p: nx = 2, nu = 1, np = 1.
    class ToyModel : public SystemModel
    {
    public:
        Index nx() const override { return 2; }
        Index nu() const override { return 1; }
        Index np() const override { return 1; }
        Index num_path() const override { return 2; }
        Index num_terminal() const override { return 1; }
        std::string name() const override { return "toy"; }

        void dynamics(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p, double t,
                      VectorRef out) const override
        {
            out(0) = x(1);
            out(1) = -p(0) * std::sin(x(0)) - 0.3 * x(1) + u(0) + 0.1 * std::cos(t);
        }
        void dynamics_jacobians(const ConstVectorRef &x, const ConstVectorRef &, const ConstVectorRef &p, double,
                                MatrixRef jx, MatrixRef ju, MatrixRef jp) const override
        {
            jx << 0.0, 1.0, -p(0) * std::cos(x(0)), -0.3;
            ju << 0.0, 1.0;
            jp << 0.0, -std::sin(x(0));
        }
        double stage_cost(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p,
                          double) const override
        {
            return (x(0) - 1.0) * (x(0) - 1.0) + 0.1 * x(1) * x(1) + 0.01 * u(0) * u(0) + 0.1 * p(0) * x(0);
        }
        void stage_cost_gradient(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p, double,
                                 VectorRef gx, VectorRef gu, VectorRef gp) const override
        {
            gx << 2.0 * (x(0) - 1.0) + 0.1 * p(0), 0.2 * x(1);
            gu << 0.02 * u(0);
            gp << 0.1 * x(0);
        }
        double terminal_cost(const ConstVectorRef &x, const ConstVectorRef &p, double) const override
        {
            return x(0) * x(0) + p(0) * x(1) * x(1);
        }
        void terminal_cost_gradient(const ConstVectorRef &x, const ConstVectorRef &p, double, VectorRef gx,
                                    VectorRef gp) const override
        {
            gx << 2.0 * x(0), 2.0 * p(0) * x(1);
            gp << x(1) * x(1);
        }
        void path_constraints(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p, double,
                              VectorRef h) const override
        {
            h << x(0) + 0.2 * u(0) - 0.5 * p(0) - 1.0, x(1) * x(1) - 2.0;
        }
        void path_constraints_jacobians(const ConstVectorRef &x, const ConstVectorRef &, const ConstVectorRef &,
                                        double, MatrixRef hx, MatrixRef hu, MatrixRef hp) const override
        {
            hx << 1.0, 0.0, 0.0, 2.0 * x(1);
            hu << 0.2, 0.0;
            hp << -0.5, 0.0;
        }
        void terminal_constraints(const ConstVectorRef &x, const ConstVectorRef &p, double, VectorRef h) const override
        {
            h << x(0) - 1.5 + 0.1 * p(0) * x(1);
        }
        void terminal_constraints_jacobians(const ConstVectorRef &x, const ConstVectorRef &p, double, MatrixRef hx,
                                            MatrixRef hp) const override
        {
            hx << 1.0, 0.1 * p(0);
            hp << 0.1 * x(1);
        }
    };

    /// x' = A x + B u + E p, quadratic cost, linear constraints.
    class LinearModel : public SystemModel
    {
    public:
        LinearModel()
        {
            a.resize(2, 2);
            a << -0.5, 1.0, -0.2, -0.8;
            b.resize(2, 1);
            b << 0.0, 1.0;
            e.resize(2, 1);
            e << 0.3, -0.1;
        }
        Index nx() const override { return 2; }
        Index nu() const override { return 1; }
        Index np() const override { return 1; }
        Index num_path() const override { return 1; }
        std::string name() const override { return "linear"; }

        void dynamics(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p, double,
                      VectorRef out) const override
        {
            out = a * x + b * u + e * p;
        }
        void dynamics_jacobians(const ConstVectorRef &, const ConstVectorRef &, const ConstVectorRef &, double,
                                MatrixRef jx, MatrixRef ju, MatrixRef jp) const override
        {
            jx = a;
            ju = b;
            jp = e;
        }
        double stage_cost(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &, double) const override
        {
            return (x(0) - 1.0) * (x(0) - 1.0) + x(1) * x(1) + 0.1 * u(0) * u(0);
        }
        void stage_cost_gradient(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &, double,
                                 VectorRef gx, VectorRef gu, VectorRef gp) const override
        {
            gx << 2.0 * (x(0) - 1.0), 2.0 * x(1);
            gu << 0.2 * u(0);
            gp.setZero();
        }
        void path_constraints(const ConstVectorRef &x, const ConstVectorRef &, const ConstVectorRef &p, double,
                              VectorRef h) const override
        {
            h(0) = x(0) - 0.8 + 0.2 * p(0);
        }
        void path_constraints_jacobians(const ConstVectorRef &, const ConstVectorRef &, const ConstVectorRef &,
                                        double, MatrixRef hx, MatrixRef hu, MatrixRef hp) const override
        {
            hx << 1.0, 0.0;
            hu.setZero();
            hp << 0.2;
        }
        Matrix a, b, e;
    };

    /// Toy model that only offers function values.
    class NoJacobianModel : public ToyModel
    {
    public:
        bool has_jacobians() const override { return false; }
        void dynamics_jacobians(const ConstVectorRef &, const ConstVectorRef &, const ConstVectorRef &, double,
                                MatrixRef, MatrixRef, MatrixRef) const override
        {
            throw MissingDerivativeError("no Jacobians");
        }
    };

    inline StochasticProblem toy_problem(std::shared_ptr<const SystemModel> model = std::make_shared<ToyModel>())
    {
        StochasticProblem p;
        p.model = std::move(model);
        p.horizon = 1.0;
        p.t0 = 0.2;
        p.alpha_path = Vector::Constant(p.model->num_path(), 0.9);
        p.alpha_terminal = Vector::Constant(p.model->num_terminal(), 0.95);
        p.u_min = Vector::Constant(1, -2.0);
        p.u_max = Vector::Constant(1, 2.0);
        Matrix c(2, 2);
        c << 0.04, 0.01, 0.01, 0.09;
        Vector m(2);
        m << 0.3, -0.2;
        p.x0 = JointDistribution(m, c);
        p.p = joint_from_marginals({MarginalDistribution::uniform(0.8, 1.2)});
        return p;
    }

    /// A moment state with a well-conditioned joint covariance for the toy problem.
    inline Vector random_moment_state(std::uint64_t seed, double sigma_p2)
    {
        RngStream r(seed);
        Vector mu(2);
        mu << 0.4 + 0.2 * r.normal(0, 0), -0.1 + 0.2 * r.normal(0, 1);
        Matrix l(2, 2);
        l << 0.2, 0.0, 0.05 * r.normal(1, 0), 0.25;
        const Matrix s = l * l.transpose() + 0.01 * Matrix::Identity(2, 2);
        Matrix sxp(2, 1);
        sxp << 0.2 * std::sqrt(s(0, 0) * sigma_p2), -0.1 * std::sqrt(s(1, 1) * sigma_p2);
        Vector x(8);
        x.head(2) = mu;
        x.segment(2, 4) = Eigen::Map<const Vector>(s.data(), 4);
        x.tail(2) = Eigen::Map<const Vector>(sxp.data(), 2);
        return x;
    }

    /// Random direction; for a moment state the covariance block is made symmetric.
    inline Vector random_direction(Index n, std::uint64_t seed, Index moment_nx = 0)
    {
        RngStream r(seed);
        Vector d(n);
        for (Index i = 0; i < n; ++i)
            d(i) = r.normal(0, static_cast<std::uint64_t>(i));
        if (moment_nx > 0)
        {
            Eigen::Map<Matrix> s(d.data() + moment_nx, moment_nx, moment_nx);
            s = (0.5 * (s + s.transpose())).eval();
            d.segment(moment_nx, moment_nx * moment_nx) *= 0.01;
            d.tail(n - moment_nx - moment_nx * moment_nx) *= 0.01;
        }
        return d;
    }

    inline double directional_fd(const std::function<double(const Vector &)> &f, const Vector &x, const Vector &d,
                                 double h = 1e-6)
    {
        return (f(x + h * d) - f(x - h * d)) / (2.0 * h);
    }

    /**
     * Check every vector-Jacobian product of a deterministic problem against central differences
     * along random directions (symmetric covariance directions for moment states).
     */
    inline void check_problem_derivatives(DeterministicProblem &prob, const Vector &x, const Vector &u, double t,
                                          Index moment_nx, double rtol)
    {
        const Index n = prob.state_dim(), nu = u.size();
        const Vector dx = random_direction(n, 101, moment_nx);
        const Vector du = random_direction(nu, 202);
        auto near = [&](double a, double b, const char *what) {
            EXPECT_NEAR(a, b, rtol * (1.0 + std::abs(b))) << what;
        };
        // dynamics: <lam, f>
        {
            const Vector lam = random_direction(n, 303);
            auto fx = [&](const Vector &xx) {
                Vector o(n);
                prob.dynamics(xx, u, t, o);
                return lam.dot(o);
            };
            auto fu = [&](const Vector &uu) {
                Vector o(n);
                prob.dynamics(x, uu, t, o);
                return lam.dot(o);
            };
            Vector gx(n), gu(nu);
            prob.dynamics_vjp(x, u, t, lam, gx, gu);
            near(gx.dot(dx), directional_fd(fx, x, dx), "dynamics / x");
            near(gu.dot(du), directional_fd(fu, u, du), "dynamics / u");
        }
        {
            Vector gx(n), gu(nu);
            prob.stage_cost_gradient(x, u, t, gx, gu);
            near(gx.dot(dx), directional_fd([&](const Vector &xx) { return prob.stage_cost(xx, u, t); }, x, dx),
                 "stage cost / x");
            near(gu.dot(du), directional_fd([&](const Vector &uu) { return prob.stage_cost(x, uu, t); }, u, du),
                 "stage cost / u");
            Vector gt(n);
            prob.terminal_cost_gradient(x, t, gt);
            near(gt.dot(dx), directional_fd([&](const Vector &xx) { return prob.terminal_cost(xx, t); }, x, dx),
                 "terminal cost / x");
        }
        if (prob.num_path() > 0)
        {
            const Index nh = prob.num_path();
            const Vector w = random_direction(nh, 404);
            auto hx = [&](const Vector &xx) {
                Vector h(nh);
                prob.path_constraints(xx, u, t, h);
                return w.dot(h);
            };
            auto hu = [&](const Vector &uu) {
                Vector h(nh);
                prob.path_constraints(x, uu, t, h);
                return w.dot(h);
            };
            Vector gx(n), gu(nu);
            prob.path_constraints_vjp(x, u, t, w, gx, gu);
            near(gx.dot(dx), directional_fd(hx, x, dx), "path constraints / x");
            near(gu.dot(du), directional_fd(hu, u, du), "path constraints / u");
        }
        if (prob.num_terminal() > 0)
        {
            const Index nt = prob.num_terminal();
            const Vector w = random_direction(nt, 505);
            auto hx = [&](const Vector &xx) {
                Vector h(nt);
                prob.terminal_constraints(xx, t, h);
                return w.dot(h);
            };
            Vector gx(n);
            prob.terminal_constraints_vjp(x, t, w, gx);
            near(gx.dot(dx), directional_fd(hx, x, dx), "terminal constraints / x");
        }
    }
} // namespace smpc::testing

#endif // SMPC_TEST_MODELS_HPP_
