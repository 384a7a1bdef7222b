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

#ifndef SMPC_BENCH_MODELS_HPP_
#define SMPC_BENCH_MODELS_HPP_

#include "smpc/distributions.hpp"
#include "smpc/gp.hpp"
#include "smpc/problem.hpp"

#include <cstdint>

namespace smpc::bench
{
    // ---------------------------------------------------------------- reactor

    /**
     * Normalized stirred-tank reactor, x = [c_A, c_B], u = flow rate, p = [p1, p2, p3].
     * Time unit is hours. Path constraint c_B - cb_max <= 0.
     */
    class CstrModel : public SystemModel
    {
    public:
        CstrModel(Vector x_des, double u_des, double cb_max = 0.14);

        Index nx() const override { return 2; }
        Index nu() const override { return 1; }
        Index np() const override { return 3; }
        Index num_path() const override { return 1; }
        std::string name() const override { return "cstr"; }

        void dynamics(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p, double t,
                      VectorRef out) const override;
        void dynamics_jacobians(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p, double t,
                                MatrixRef jx, MatrixRef ju, MatrixRef jp) const override;
        bool dynamics_vjp(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p, double t,
                          const ConstVectorRef &lam, VectorRef gx, VectorRef gu, VectorRef gp) const override;
        double stage_cost(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p,
                          double t) const override;
        void stage_cost_gradient(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p, double t,
                                 VectorRef gx, VectorRef gu, VectorRef gp) const override;
        void path_constraints(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p, double t,
                              VectorRef h) const override;
        void path_constraints_jacobians(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p,
                                        double t, MatrixRef hx, MatrixRef hu, MatrixRef hp) const override;

        const Vector &x_des() const { return x_des_; }
        double u_des() const { return u_des_; }

        static constexpr double kStateWeight = 100.0;
        static constexpr double kInputWeight = 0.1;

    private:
        Vector x_des_;
        double u_des_, cb_max_;
    };

    /// p1 ~ U(48, 52), p2 ~ U(95, 105), p3 ~ U(95, 105)  [1/h].
    JointDistribution cstr_parameters();

    struct CstrSetpoint
    {
        Vector x;
        double u = 0.0;
        int iterations = 0;
    };

    /// Steady state with c_B = cb_des at parameters p (damped Newton in (c_A, u)).
    CstrSetpoint cstr_setpoint(double cb_des, const Vector &p);

    // ---------------------------------------------------------------- chain

    struct ChainConstants
    {
        double mass = 0.033;
        double stiffness = 1.0;
        double rest_length = 0.033;
        double damping = 0.1;
        double gravity = 9.81;
        double wall = -0.2; ///< z_i >= wall for every free mass
    };

    /**
     * Spring-damper chain with n+1 masses in 3-D: mass 0 fixed at the origin, masses 1..n-1
     * free, mass n moved by the velocity input u (3). State layout
     * [p_1..p_{n-1}, v_1..v_{n-1}, p_n], i.e. 6n - 3 states.
     */
    class ChainModel : public SystemModel
    {
    public:
        ChainModel(int n, ChainConstants c, Vector end_ref);

        Index nx() const override { return 6 * n_ - 3; }
        Index nu() const override { return 3; }
        Index num_path() const override { return n_ - 1; }
        std::string name() const override { return "chain"; }

        void dynamics(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p, double t,
                      VectorRef out) const override;
        void dynamics_jacobians(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p, double t,
                                MatrixRef jx, MatrixRef ju, MatrixRef jp) const override;
        bool dynamics_vjp(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p, double t,
                          const ConstVectorRef &lam, VectorRef gx, VectorRef gu, VectorRef gp) const override;
        double stage_cost(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p,
                          double t) const override;
        void stage_cost_gradient(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p, double t,
                                 VectorRef gx, VectorRef gu, VectorRef gp) const override;
        void path_constraints(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p, double t,
                              VectorRef h) const override;
        void path_constraints_jacobians(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p,
                                        double t, MatrixRef hx, MatrixRef hu, MatrixRef hp) const override;

        int elements() const { return n_; }
        /// Masses on a straight line from the origin to end_ref, at rest.
        Vector straight_state() const;

        static constexpr double kEndWeight = 25.0;
        static constexpr double kVelocityWeight = 1.0;
        static constexpr double kInputWeight = 0.01;

    private:
        Index pos(int i) const { return i == n_ ? 6 * (n_ - 1) : 3 * (i - 1); } ///< i in 1..n
        Index vel(int i) const { return 3 * (n_ - 1) + 3 * (i - 1); }           ///< i in 1..n-1
        Eigen::Vector3d position(const ConstVectorRef &x, int i) const;

        int n_;
        ChainConstants c_;
        Eigen::Vector3d end_ref_;
    };

    // ---------------------------------------------------------------- water tank

    struct TankConstants
    {
        double area = 1.0;         ///< A
        double drain = 1.0 / 30.0; ///< a
        double gravity = 9.81;
        double h_max = 1.0;
    };

    /// Torricelli outflow g(h) = -(a/A) sqrt(2 g h) (h clamped at 0).
    double torricelli(double h, const TankConstants &c = {});

    /**
     * Controller-side tank model x = [q, h]: q' = u, h' = q/A. The outflow is not part of it;
     * it enters through an attached GP over z = [q, h, u].
     */
    class WaterTankModel : public SystemModel
    {
    public:
        explicit WaterTankModel(TankConstants c = {}) : c_(c) {}

        Index nx() const override { return 2; }
        Index nu() const override { return 1; }
        Index num_path() const override { return 1; }
        std::string name() const override { return "watertank"; }

        void dynamics(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p, double t,
                      VectorRef out) const override;
        void dynamics_jacobians(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p, double t,
                                MatrixRef jx, MatrixRef ju, MatrixRef jp) const override;
        double stage_cost(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p,
                          double t) const override;
        void stage_cost_gradient(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p, double t,
                                 VectorRef gx, VectorRef gu, VectorRef gp) const override;
        void path_constraints(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p, double t,
                              VectorRef h) const override;
        void path_constraints_jacobians(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p,
                                        double t, MatrixRef hx, MatrixRef hu, MatrixRef hp) const override;

        const TankConstants &constants() const { return c_; }

    private:
        TankConstants c_;
    };

    struct TankGPOptions
    {
        double h_lo = 0.0, h_hi = 1.2; ///< training grid
        double sf2 = 0.02;             ///< signal variance of the outflow GP
        double lengthscale = 0.4;      ///< in h
    };

    /// Noisy outflow observations on an evenly spaced h grid; z = [q, h, u] with q = u = 0.
    GPData tank_gp_data(int points, double noise_var, std::uint64_t seed, const TankConstants &c = {},
                        const TankGPOptions &o = {});
    /// GP over z = [q, h, u]: output q not modeled, output h uses SE on h only.
    GPModel tank_gp(const GPData &data, double noise_var, const TankGPOptions &o = {});

    // ---------------------------------------------------------------- pendulum

    struct PendulumConstants
    {
        double damping = 2.4e-3; ///< d
        double length = 0.356;   ///< l_p
        double mass = 0.127;     ///< m_p
        double inertia = 1.198e-3;
        double gravity = 9.81;
        double x_max = 0.65;
    };

    /**
     * Cart with pendulum, x = [x_c, v_c, alpha, omega], u = cart acceleration. The cart
     * setpoint steps from x_des0 to x_des1 at t_switch.
     */
    class PendulumModel : public SystemModel
    {
    public:
        PendulumModel(double x_des0, double x_des1, double t_switch, PendulumConstants c = {});

        Index nx() const override { return 4; }
        Index nu() const override { return 1; }
        Index num_path() const override { return 1; }
        std::string name() const override { return "pendulum"; }

        void dynamics(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p, double t,
                      VectorRef out) const override;
        void dynamics_jacobians(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p, double t,
                                MatrixRef jx, MatrixRef ju, MatrixRef jp) const override;
        double stage_cost(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p,
                          double t) const override;
        void stage_cost_gradient(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p, double t,
                                 VectorRef gx, VectorRef gu, VectorRef gp) const override;
        void path_constraints(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p, double t,
                              VectorRef h) const override;
        void path_constraints_jacobians(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p,
                                        double t, MatrixRef hx, MatrixRef hu, MatrixRef hp) const override;

        double setpoint(double t) const { return t < t_switch_ ? x_des0_ : x_des1_; }
        const PendulumConstants &constants() const { return c_; }

        /// Continuous-time linearization at the origin: x' = A x + B u.
        void linearization(Matrix &a, Matrix &b) const;

        static constexpr double kPositionWeight = 100.0;
        static constexpr double kInputWeight = 1e-9;

    private:
        double x_des0_, x_des1_, t_switch_;
        PendulumConstants c_;
    };
} // namespace smpc::bench

#endif // SMPC_BENCH_MODELS_HPP_
