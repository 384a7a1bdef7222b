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

#ifndef SMPC_BENCH_PLANT_HPP_
#define SMPC_BENCH_PLANT_HPP_

#include "smpc/rng.hpp"
#include "smpc/types.hpp"

#include <cstdint>
#include <functional>

namespace smpc::bench
{
    /// Exact drift of the simulated process, f(x, u, t) written into dx.
    using Drift = std::function<void(const Vector &x, const Vector &u, double t, Vector &dx)>;
    /// Control signal applied between samples (first-order hold of the last solution).
    using ControlSignal = std::function<Vector(double t)>;

    /**
     * Simulated "real" system: exact dynamics (including anything hidden from the
     * controller) integrated by Euler-Maruyama with `substeps` sub-steps per sample.
     */
    struct TruthPlant
    {
        Drift drift;
        Matrix sigma_w; ///< nx x nw diffusion, empty = deterministic
        int substeps = 20;

        /// Requires a drift and substeps >= 10.
        void validate() const;

        /**
         * Advance x from t to t + dt. Noise increments for sample `step` come from
         * rng.normal(step * substeps + k, j). Throws IntegrationError on non-finite states.
         */
        Vector advance(const Vector &x, double t, double dt, const ControlSignal &u, const RngStream &rng,
                       std::uint64_t step) const;
    };
} // namespace smpc::bench

#endif // SMPC_BENCH_PLANT_HPP_
