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
    namespace
    {
        using V3 = Eigen::Vector3d;
        using M3 = Eigen::Matrix3d;

        V3 spring_force(const ChainConstants &c, const V3 &d)
        {
            const double r = d.norm();
            return c.stiffness * (1.0 - c.rest_length / r) * d;
        }

        // dF/dd, symmetric
        M3 spring_jacobian(const ChainConstants &c, const V3 &d)
        {
            const double r = d.norm();
            return c.stiffness * ((1.0 - c.rest_length / r) * M3::Identity() +
                                  (c.rest_length / (r * r * r)) * d * d.transpose());
        }
    } // namespace

    ChainModel::ChainModel(int n, ChainConstants c, Vector end_ref) : n_(n), c_(c)
    {
        if (n < 2 || n > 14)
            throw ParameterError("ChainModel: n must lie in [2, 14]");
        if (!(c.mass > 0.0 && c.stiffness > 0.0 && c.rest_length > 0.0 && c.damping >= 0.0))
            throw ParameterError("ChainModel: constants must be positive");
        if (end_ref.size() != 3)
            throw ParameterError("ChainModel: end_ref must have 3 entries");
        end_ref_ = end_ref;
    }

    Eigen::Vector3d ChainModel::position(const ConstVectorRef &x, int i) const
    {
        if (i == 0)
            return V3::Zero();
        return x.segment<3>(pos(i));
    }

    void ChainModel::dynamics(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &, double,
                              VectorRef out) const
    {
        const V3 g(0.0, 0.0, -c_.gravity);
        V3 f_prev = spring_force(c_, position(x, 1));
        for (int i = 1; i < n_; ++i)
        {
            const V3 f_next = spring_force(c_, position(x, i + 1) - position(x, i));
            out.segment<3>(pos(i)) = x.segment<3>(vel(i));
            out.segment<3>(vel(i)) = (f_next - f_prev - c_.damping * x.segment<3>(vel(i))) / c_.mass + g;
            f_prev = f_next;
        }
        out.segment<3>(pos(n_)) = u.head<3>();
    }

    void ChainModel::dynamics_jacobians(const ConstVectorRef &x, const ConstVectorRef &, const ConstVectorRef &,
                                        double, MatrixRef jx, MatrixRef ju, MatrixRef) const
    {
        jx.setZero();
        ju.setZero();
        const double im = 1.0 / c_.mass;
        M3 k_prev = spring_jacobian(c_, position(x, 1));
        for (int i = 1; i < n_; ++i)
        {
            const M3 k_next = spring_jacobian(c_, position(x, i + 1) - position(x, i));
            jx.block<3, 3>(pos(i), vel(i)).setIdentity();
            jx.block<3, 3>(vel(i), pos(i + 1)) += im * k_next;
            jx.block<3, 3>(vel(i), pos(i)) -= im * (k_next + k_prev);
            if (i > 1)
                jx.block<3, 3>(vel(i), pos(i - 1)) += im * k_prev;
            jx.block<3, 3>(vel(i), vel(i)) = -c_.damping * im * M3::Identity();
            k_prev = k_next;
        }
        ju.block<3, 3>(pos(n_), 0).setIdentity();
    }

    bool ChainModel::dynamics_vjp(const ConstVectorRef &x, const ConstVectorRef &, const ConstVectorRef &, double,
                                  const ConstVectorRef &lam, VectorRef gx, VectorRef gu, VectorRef) const
    {
        // spring s joins masses s and s+1; its Jacobian K_s acts once on lv_s - lv_{s+1} (lv_0 = lv_n = 0)
        gx.setZero();
        const double im = 1.0 / c_.mass;
        V3 lv_prev = V3::Zero();
        for (int s = 0; s < n_; ++s)
        {
            const V3 lv = s + 1 < n_ ? V3(im * lam.segment<3>(vel(s + 1))) : V3::Zero();
            const V3 d = position(x, s + 1) - position(x, s);
            const V3 w = lv_prev - lv;
            const double r = d.norm();
            const V3 kw = c_.stiffness * ((1.0 - c_.rest_length / r) * w + (c_.rest_length * d.dot(w) / (r * r * r)) * d);
            gx.segment<3>(pos(s + 1)) += kw;
            if (s > 0)
                gx.segment<3>(pos(s)) -= kw;
            if (s + 1 < n_)
                gx.segment<3>(vel(s + 1)) += lam.segment<3>(pos(s + 1)) - c_.damping * lv;
            lv_prev = lv;
        }
        gu = lam.segment<3>(pos(n_));
        return true;
    }

    double ChainModel::stage_cost(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &,
                                  double) const
    {
        const Index nv = 3 * (n_ - 1);
        return kEndWeight * (x.segment<3>(pos(n_)) - end_ref_).squaredNorm() +
               kVelocityWeight * x.segment(nv, nv).squaredNorm() + kInputWeight * u.squaredNorm();
    }

    void ChainModel::stage_cost_gradient(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &,
                                         double, VectorRef gx, VectorRef gu, VectorRef gp) const
    {
        const Index nv = 3 * (n_ - 1);
        gx.setZero();
        gx.segment(nv, nv) = 2.0 * kVelocityWeight * x.segment(nv, nv);
        gx.segment<3>(pos(n_)) = 2.0 * kEndWeight * (x.segment<3>(pos(n_)) - end_ref_);
        gu = 2.0 * kInputWeight * u;
        gp.setZero();
    }

    void ChainModel::path_constraints(const ConstVectorRef &x, const ConstVectorRef &, const ConstVectorRef &,
                                      double, VectorRef h) const
    {
        for (int i = 1; i < n_; ++i)
            h(i - 1) = c_.wall - x(pos(i) + 2);
    }

    void ChainModel::path_constraints_jacobians(const ConstVectorRef &, const ConstVectorRef &,
                                                const ConstVectorRef &, double, MatrixRef hx, MatrixRef hu,
                                                MatrixRef hp) const
    {
        hx.setZero();
        hu.setZero();
        hp.setZero();
        for (int i = 1; i < n_; ++i)
            hx(i - 1, pos(i) + 2) = -1.0;
    }

    Vector ChainModel::straight_state() const
    {
        Vector x = Vector::Zero(nx());
        for (int i = 1; i <= n_; ++i)
            x.segment<3>(pos(i)) = (static_cast<double>(i) / n_) * end_ref_;
        return x;
    }
} // namespace smpc::bench
