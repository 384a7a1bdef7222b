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
    PendulumModel::PendulumModel(double x_des0, double x_des1, double t_switch, PendulumConstants c)
        : x_des0_(x_des0), x_des1_(x_des1), t_switch_(t_switch), c_(c)
    {
        if (!(c.length > 0.0 && c.mass > 0.0 && c.inertia > 0.0 && c.damping >= 0.0))
            throw ParameterError("PendulumModel: constants must be positive");
    }

    void PendulumModel::dynamics(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &, double,
                                 VectorRef out) const
    {
        const double den = 0.25 * c_.mass * c_.length * c_.length + c_.inertia;
        const double a = x(2), w = x(3);
        out(0) = x(1);
        out(1) = u(0);
        out(2) = w;
        out(3) = -(c_.damping * w +
                   0.5 * c_.length * (c_.mass * u(0) * std::cos(a) + c_.gravity * c_.mass * std::sin(a))) /
                 den;
    }

    void PendulumModel::dynamics_jacobians(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &,
                                           double, MatrixRef jx, MatrixRef ju, MatrixRef) const
    {
        const double den = 0.25 * c_.mass * c_.length * c_.length + c_.inertia;
        const double a = x(2);
        jx.setZero();
        jx(0, 1) = 1.0;
        jx(2, 3) = 1.0;
        jx(3, 2) = -0.5 * c_.length * c_.mass * (-u(0) * std::sin(a) + c_.gravity * std::cos(a)) / den;
        jx(3, 3) = -c_.damping / den;
        ju << 0.0, 1.0, 0.0, -0.5 * c_.length * c_.mass * std::cos(a) / den;
    }

    double PendulumModel::stage_cost(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &,
                                     double t) const
    {
        const double e = x(0) - setpoint(t);
        return kPositionWeight * e * e + x.tail<3>().squaredNorm() + kInputWeight * u(0) * u(0);
    }

    void PendulumModel::stage_cost_gradient(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &,
                                            double t, VectorRef gx, VectorRef gu, VectorRef gp) const
    {
        gx(0) = 2.0 * kPositionWeight * (x(0) - setpoint(t));
        gx.tail<3>() = 2.0 * x.tail<3>();
        gu(0) = 2.0 * kInputWeight * u(0);
        gp.setZero();
    }

    void PendulumModel::path_constraints(const ConstVectorRef &x, const ConstVectorRef &, const ConstVectorRef &,
                                         double, VectorRef h) const
    {
        h(0) = x(0) - c_.x_max;
    }

    void PendulumModel::path_constraints_jacobians(const ConstVectorRef &, const ConstVectorRef &,
                                                   const ConstVectorRef &, double, MatrixRef hx, MatrixRef hu,
                                                   MatrixRef hp) const
    {
        hx << 1.0, 0.0, 0.0, 0.0;
        hu.setZero();
        hp.setZero();
    }

    void PendulumModel::linearization(Matrix &a, Matrix &b) const
    {
        a = Matrix::Zero(4, 4);
        b = Matrix::Zero(4, 1);
        Matrix jp(4, 0);
        const Vector x = Vector::Zero(4), u = Vector::Zero(1), p(0);
        dynamics_jacobians(x, u, p, 0.0, a, b, jp);
    }
} // namespace smpc::bench
