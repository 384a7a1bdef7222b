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

#ifndef SMPC_BENCH_IO_HPP_
#define SMPC_BENCH_IO_HPP_

#include "smpc/bench/scenario.hpp"

#include <json.hpp>

#include <ostream>
#include <string>

namespace smpc::bench
{
    /// %.17g formatting.
    std::string format_double(double v);

    nlohmann::json scenario_to_json(const Scenario &s);
    /// Overlay the keys present in j on top of base; unknown keys throw ParameterError.
    Scenario scenario_from_json(const nlohmann::json &j, Scenario base);

    Representation parse_repr_flag(const std::string &s);          ///< sr | mr-taylor | mr-sampling
    std::string repr_flag(Representation r);
    PropagationMethod parse_method_flag(const std::string &s);     ///< taylor | stirling1 | ... | pce
    std::string method_flag(const PropagationMethod &m);
    ConstraintApprox parse_approx_flag(const std::string &s);      ///< chebyshev | symmetric | gaussian
    std::string approx_flag(ConstraintApprox a);

    void write_trajectory_csv(std::ostream &os, const TrajectoryLog &log);
    void write_rollouts_csv(std::ostream &os, const RolloutLog &log);
    void write_timing_csv(std::ostream &os, const std::vector<std::int64_t> &wall_ns);

    /// trajectory.csv, rollouts.csv, timing.csv and meta.json under dir (created if needed).
    void write_outputs(const std::string &dir, const RunResult &r);
} // namespace smpc::bench

#endif // SMPC_BENCH_IO_HPP_
