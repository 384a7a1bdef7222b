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

#include "smpc/bench/models.hpp"

#include <cmath>

namespace smpc::bench
{
    CstrModel::CstrModel(Vector x_des, double u_des, double cb_max)
        : x_des_(std::move(x_des)), u_des_(u_des), cb_max_(cb_max)
    {
        if (x_des_.size() != 2)
            throw ParameterError("CstrModel: x_des must have 2 entries");
    }

    void CstrModel::dynamics(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p, double,
                             VectorRef out) const
    {
        const double ca = x(0), cb = x(1), v = u(0);
        out(0) = -p(0) * ca - p(2) * ca * ca + (1.0 - ca) * v;
        out(1) = p(0) * ca - p(1) * cb - cb * v;
    }

    void CstrModel::dynamics_jacobians(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p,
                                       double, MatrixRef jx, MatrixRef ju, MatrixRef jp) const
    {
        const double ca = x(0), cb = x(1), v = u(0);
        jx << -p(0) - 2.0 * p(2) * ca - v, 0.0, p(0), -p(1) - v;
        ju << 1.0 - ca, -cb;
        jp << -ca, 0.0, -ca * ca, ca, -cb, 0.0;
    }

    bool CstrModel::dynamics_vjp(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p, double,
                                 const ConstVectorRef &lam, VectorRef gx, VectorRef gu, VectorRef gp) const
    {
        const double ca = x(0), cb = x(1), v = u(0), l0 = lam(0), l1 = lam(1);
        gx(0) = (-p(0) - 2.0 * p(2) * ca - v) * l0 + p(0) * l1;
        gx(1) = (-p(1) - v) * l1;
        gu(0) = (1.0 - ca) * l0 - cb * l1;
        if (gp.size() == 3)
        {
            gp(0) = ca * (l1 - l0);
            gp(1) = -cb * l1;
            gp(2) = -ca * ca * l0;
        }
        return true;
    }

    double CstrModel::stage_cost(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &,
                                 double) const
    {
        const double du = u(0) - u_des_;
        return kStateWeight * (x - x_des_).squaredNorm() + kInputWeight * du * du;
    }

    void CstrModel::stage_cost_gradient(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &,
                                        double, VectorRef gx, VectorRef gu, VectorRef gp) const
    {
        gx = 2.0 * kStateWeight * (x - x_des_);
        gu(0) = 2.0 * kInputWeight * (u(0) - u_des_);
        gp.setZero();
    }

    void CstrModel::path_constraints(const ConstVectorRef &x, const ConstVectorRef &, const ConstVectorRef &, double,
                                     VectorRef h) const
    {
        h(0) = x(1) - cb_max_;
    }

    void CstrModel::path_constraints_jacobians(const ConstVectorRef &, const ConstVectorRef &, const ConstVectorRef &,
                                               double, MatrixRef hx, MatrixRef hu, MatrixRef hp) const
    {
        hx << 0.0, 1.0;
        hu.setZero();
        hp.setZero();
    }

    JointDistribution cstr_parameters()
    {
        return joint_from_marginals({MarginalDistribution::uniform(48.0, 52.0),
                                     MarginalDistribution::uniform(95.0, 105.0),
                                     MarginalDistribution::uniform(95.0, 105.0)});
    }

    CstrSetpoint cstr_setpoint(double cb_des, const Vector &p)
    {
        if (p.size() != 3)
            throw ParameterError("cstr_setpoint: p must have 3 entries");
        if (!(cb_des > 0.0 && cb_des < 1.0))
            throw ParameterError("cstr_setpoint: cb_des must lie in (0, 1)");
        // unknowns (c_A, u) with c_B fixed
        auto residual = [&](double ca, double u) {
            Eigen::Vector2d r;
            r << -p(0) * ca - p(2) * ca * ca + (1.0 - ca) * u, p(0) * ca - p(1) * cb_des - cb_des * u;
            return r;
        };
        double ca = 0.5, u = 50.0;
        CstrSetpoint sp;
        for (int it = 1; it <= 100; ++it)
        {
            const Eigen::Vector2d r = residual(ca, u);
            sp.iterations = it;
            if (r.norm() < 1e-13)
                break;
            Eigen::Matrix2d j;
            j << -p(0) - 2.0 * p(2) * ca - u, 1.0 - ca, p(0), -cb_des;
            const Eigen::Vector2d step = j.fullPivLu().solve(-r);
            double damp = 1.0;
            while (damp > 1e-6 && residual(ca + damp * step(0), u + damp * step(1)).norm() >= r.norm())
                damp *= 0.5;
            ca += damp * step(0);
            u += damp * step(1);
        }
        if (residual(ca, u).norm() > 1e-9 || !(ca > 0.0 && ca < 1.0))
            throw ParameterError("cstr_setpoint: no steady state found for this c_B target");
        sp.x = Vector(2);
        sp.x << ca, cb_des;
        sp.u = u;
        return sp;
    }
} // namespace smpc::bench
