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

#include "smpc/bench/plant.hpp"

#include <cmath>

namespace smpc::bench
{
    void TruthPlant::validate() const
    {
        if (!drift)
            throw ParameterError("TruthPlant: drift is not set");
        if (substeps < 10)
            throw ParameterError("TruthPlant: need at least 10 sub-steps per sample");
    }

    Vector TruthPlant::advance(const Vector &x, double t, double dt, const ControlSignal &u, const RngStream &rng,
                               std::uint64_t step) const
    {
        validate();
        const double h = dt / substeps, sq = std::sqrt(h);
        const bool noisy = sigma_w.size() > 0;
        Vector s = x, dx(x.size()), xi(noisy ? sigma_w.cols() : 0);
        for (int k = 0; k < substeps; ++k)
        {
            const double tk = t + k * h;
            drift(s, u(tk), tk, dx);
            s += h * dx;
            if (noisy)
            {
                const std::uint64_t i = step * static_cast<std::uint64_t>(substeps) + static_cast<std::uint64_t>(k);
                for (Index j = 0; j < xi.size(); ++j)
                    xi(j) = rng.normal(i, static_cast<std::uint64_t>(j));
                s += sq * sigma_w * xi;
            }
            if (!s.allFinite())
                throw IntegrationError("TruthPlant: non-finite state", tk + h);
        }
        return s;
    }
} // namespace smpc::bench
