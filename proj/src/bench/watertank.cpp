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
#include <limits>

namespace smpc::bench
{
    double torricelli(double h, const TankConstants &c)
    {
        return -(c.drain / c.area) * std::sqrt(2.0 * c.gravity * std::max(h, 0.0));
    }

    void WaterTankModel::dynamics(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &, double,
                                  VectorRef out) const
    {
        out(0) = u(0);
        out(1) = x(0) / c_.area;
    }

    void WaterTankModel::dynamics_jacobians(const ConstVectorRef &, const ConstVectorRef &, const ConstVectorRef &,
                                            double, MatrixRef jx, MatrixRef ju, MatrixRef) const
    {
        jx << 0.0, 0.0, 1.0 / c_.area, 0.0;
        ju << 1.0, 0.0;
    }

    double WaterTankModel::stage_cost(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &,
                                      double) const
    {
        const double e = x(1) - 1.0;
        return e * e + u(0) * u(0);
    }

    void WaterTankModel::stage_cost_gradient(const ConstVectorRef &x, const ConstVectorRef &u,
                                             const ConstVectorRef &, double, VectorRef gx, VectorRef gu,
                                             VectorRef gp) const
    {
        gx << 0.0, 2.0 * (x(1) - 1.0);
        gu(0) = 2.0 * u(0);
        gp.setZero();
    }

    void WaterTankModel::path_constraints(const ConstVectorRef &x, const ConstVectorRef &, const ConstVectorRef &,
                                          double, VectorRef h) const
    {
        h(0) = x(1) - c_.h_max;
    }

    void WaterTankModel::path_constraints_jacobians(const ConstVectorRef &, const ConstVectorRef &,
                                                    const ConstVectorRef &, double, MatrixRef hx, MatrixRef hu,
                                                    MatrixRef hp) const
    {
        hx << 0.0, 1.0;
        hu.setZero();
        hp.setZero();
    }

    GPData tank_gp_data(int points, double noise_var, std::uint64_t seed, const TankConstants &c,
                        const TankGPOptions &o)
    {
        if (points < 1)
            throw ParameterError("tank_gp_data: need at least one data point");
        if (!(noise_var >= 0.0))
            throw ParameterError("tank_gp_data: noise variance must be >= 0");
        const RngStream rng(seed);
        const double sd = std::sqrt(noise_var);
        GPData d;
        d.zin = Matrix::Zero(points, 3);
        d.zout = Matrix::Zero(points, 2);
        for (int k = 0; k < points; ++k)
        {
            const double h = points == 1 ? 0.5 * (o.h_lo + o.h_hi) : o.h_lo + (o.h_hi - o.h_lo) * k / (points - 1);
            d.zin(k, 1) = h;
            d.zout(k, 1) = torricelli(h, c) + sd * rng.normal(static_cast<std::uint64_t>(k), 0);
        }
        return d;
    }

    GPModel tank_gp(const GPData &data, double noise_var, const TankGPOptions &o)
    {
        const double inf = std::numeric_limits<double>::infinity();
        Vector ell(3);
        ell << inf, o.lengthscale, inf;
        Vector noise(2);
        noise << 0.0, noise_var;
        return gp_fit({Kernel::none(), Kernel::squared_exponential(o.sf2, ell)}, data.zin, data.zout, noise);
    }
} // namespace smpc::bench
