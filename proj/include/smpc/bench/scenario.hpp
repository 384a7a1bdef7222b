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

#ifndef SMPC_BENCH_SCENARIO_HPP_
#define SMPC_BENCH_SCENARIO_HPP_

#include "smpc/reformulate.hpp"
#include "smpc/solver.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace smpc::bench
{
    enum class Benchmark
    {
        Cstr,
        Chain,
        WaterTank,
        Pendulum
    };

    std::string to_string(Benchmark b);
    Benchmark parse_benchmark(const std::string &s);
    std::vector<Benchmark> all_benchmarks();
    /// One-line description used by `smpc list`.
    std::string describe(Benchmark b);

    /**
     * A fully resolved benchmark run. noise_var is benchmark specific: measurement noise
     * variance for cstr/chain/pendulum, GP data noise variance for the water tank.
     */
    struct Scenario
    {
        Benchmark problem = Benchmark::Cstr;
        Representation repr = Representation::SR;
        PropagationMethod method = PropagationMethod::unscented();
        ConstraintApprox approx = ConstraintApprox::Gaussian;
        bool open_loop = false; ///< cstr only: one converged solve + truth rollouts

        double duration = 1.0; ///< simulated time
        double dt = 0.1;       ///< sample time
        double horizon = 1.0;  ///< T
        int grid_points = 20;  ///< N
        int outer_iterations = 2;
        int inner_iterations = 2;
        double rho0 = 1.0; ///< initial penalty parameter

        std::uint64_t seed = 1;
        int rollouts = 1;
        std::string out_dir;

        int chain_n = 2;
        int gp_points = 10;
        double noise_var = 1e-9;
        int warmup = 5; ///< timing: leading steps discarded

        /// Throws ParameterError (dt must divide duration, T > 0, ...).
        void validate() const;
        int steps() const;
    };

    /// Documented defaults per benchmark.
    Scenario default_scenario(Benchmark b);

    struct TrajectoryLog
    {
        Index nu = 0, nx = 0, nh = 0;
        std::vector<double> t;
        std::vector<Vector> u, mean, var, htilde;

        void push(double time, const Vector &uu, const Vector &m, const Vector &v, const Vector &h);
    };

    struct RolloutLog
    {
        std::vector<double> t;      ///< common time grid
        std::vector<Matrix> states; ///< per rollout: nx x t.size()
    };

    struct RunResult
    {
        Scenario scenario;
        bool skipped = false;
        TrajectoryLog trajectory;
        RolloutLog rollouts;
        std::vector<std::int64_t> wall_ns; ///< per MPC step (rollout 0) or per solve
        nlohmann::json stats = nlohmann::json::object();
        std::vector<std::string> diagnostics;

        /// Mean wall time in ms after discarding the warm-up steps (NaN if nothing is left).
        double mean_step_ms() const;
        /// Median counterpart; robust against scheduler hiccups on a shared core.
        double median_step_ms() const;
    };

    /// Point budget above which quadrature / PCE runs are skipped.
    inline constexpr double kPointBudget = 1e6;

    RunResult run_cstr(const Scenario &s);
    RunResult run_chain(const Scenario &s);
    RunResult run_watertank(const Scenario &s);
    RunResult run_pendulum(const Scenario &s);
    RunResult run_scenario(const Scenario &s);

    /// The controller's stochastic OCP at t = 0 (what the first MPC step reformulates).
    StochasticProblem benchmark_problem(const Scenario &s);

    struct TimingRow
    {
        std::string label;
        int size = 0; ///< chain elements or GP data points
        bool skipped = false;
        std::string reason;
        double mean_ms = 0.0;
        double median_ms = 0.0;
    };

    /**
     * Per-step timing of the chain controller for every (n, representation, method) pair.
     * With repeats > 1 each row keeps the smallest mean / median over the repeated runs.
     */
    std::vector<TimingRow> chain_scaling(const std::vector<int> &ns,
                                         const std::vector<std::pair<Representation, PropagationMethod>> &configs,
                                         int timed_steps = 10, std::uint64_t seed = 1, int repeats = 1);

    /// Per-step timing of the water-tank MR controller against the GP data count.
    std::vector<TimingRow> gp_timing(const std::vector<int> &sizes, int timed_steps = 5, std::uint64_t seed = 1);

    /// Label such as "SR-UT", "MR-Taylor", "SR-MC(1000)".
    std::string config_label(Representation r, const PropagationMethod &m);
} // namespace smpc::bench

#endif // SMPC_BENCH_SCENARIO_HPP_
