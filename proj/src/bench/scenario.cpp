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

#include "smpc/bench/scenario.hpp"

#include "smpc/bench/kalman.hpp"
#include "smpc/bench/models.hpp"
#include "smpc/bench/plant.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace smpc::bench
{
    std::string to_string(Benchmark b)
    {
        switch (b)
        {
        case Benchmark::Cstr: return "cstr";
        case Benchmark::Chain: return "chain";
        case Benchmark::WaterTank: return "watertank";
        case Benchmark::Pendulum: return "pendulum";
        }
        return "?";
    }

    Benchmark parse_benchmark(const std::string &s)
    {
        for (Benchmark b : all_benchmarks())
            if (to_string(b) == s)
                return b;
        throw ParameterError("unknown benchmark '" + s + "' (expected cstr, chain, watertank or pendulum)");
    }

    std::vector<Benchmark> all_benchmarks()
    {
        return {Benchmark::Cstr, Benchmark::Chain, Benchmark::WaterTank, Benchmark::Pendulum};
    }

    std::string describe(Benchmark b)
    {
        switch (b)
        {
        case Benchmark::Cstr:
            return "stirred-tank reactor, uncertain rate constants, P[c_B <= 0.14] >= 0.9 (open or closed loop)";
        case Benchmark::Chain:
            return "spring-damper chain with n elements (6n-3 states), timing study";
        case Benchmark::WaterTank:
            return "water tank with GP-learned outflow, P[h <= 1] >= 0.95";
        case Benchmark::Pendulum:
            return "cart pendulum with Kalman filter, setpoint 0 -> 0.6 m, P[x_c <= 0.65] >= 0.95";
        }
        return "";
    }

    int Scenario::steps() const
    {
        return static_cast<int>(std::lround(duration / dt));
    }

    void Scenario::validate() const
    {
        if (!(dt > 0.0) || !(duration > 0.0))
            throw ParameterError("scenario: dt and duration must be > 0");
        const double ratio = duration / dt;
        if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
            throw ParameterError("scenario: dt must divide the simulated duration");
        if (!(horizon > 0.0))
            throw ParameterError("scenario: horizon T must be > 0");
        if (grid_points < 2 || outer_iterations < 1 || inner_iterations < 1 || !(rho0 > 0.0))
            throw ParameterError("scenario: need N >= 2, at least one outer/inner iteration and rho0 > 0");
        if (rollouts < 1)
            throw ParameterError("scenario: rollouts must be >= 1");
        if (warmup < 0)
            throw ParameterError("scenario: warm-up count must be >= 0");
        if (!(noise_var >= 0.0))
            throw ParameterError("scenario: noise variance must be >= 0");
        if (problem == Benchmark::Chain && (chain_n < 2 || chain_n > 14))
            throw ParameterError("scenario: chain n must lie in [2, 14]");
        if (problem == Benchmark::WaterTank && gp_points < 1)
            throw ParameterError("scenario: need at least one GP data point");
        if (open_loop && problem != Benchmark::Cstr)
            throw ParameterError("scenario: open-loop mode exists only for cstr");
        if (repr == Representation::SR && method.kind == MethodKind::Taylor1)
            throw ParameterError("scenario: Taylor linearization needs the moment representation (mr-taylor)");
        method.validate();
    }

    Scenario default_scenario(Benchmark b)
    {
        Scenario s;
        s.problem = b;
        switch (b)
        {
        case Benchmark::Cstr:
            // hours: 1 s sample time, 36 s horizon, 72 s of closed loop
            s.dt = 1.0 / 3600.0;
            s.horizon = 0.01;
            s.duration = 72.0 / 3600.0;
            s.grid_points = 20;
            s.approx = ConstraintApprox::Chebyshev;
            s.noise_var = 1e-9;
            break;
        case Benchmark::Chain:
            // h = T/(N-1) = 0.02 keeps the explicit covariance propagation positive definite
            s.dt = 0.05;
            s.horizon = 0.5;
            s.duration = 0.75;
            s.grid_points = 26;
            s.noise_var = 1e-4;
            s.chain_n = 2;
            break;
        case Benchmark::WaterTank:
            s.repr = Representation::MRSampling;
            s.dt = 0.1;
            s.horizon = 1.5;
            s.duration = 20.0;
            s.grid_points = 20;
            s.noise_var = 1e-3;
            s.gp_points = 10;
            break;
        case Benchmark::Pendulum:
            s.dt = 1e-3;
            s.horizon = 0.7;
            s.duration = 4.0;
            s.grid_points = 20;
            s.outer_iterations = 3;
            s.inner_iterations = 5;
            s.noise_var = 1e-6;
            break;
        }
        return s;
    }

    void TrajectoryLog::push(double time, const Vector &uu, const Vector &m, const Vector &v, const Vector &h)
    {
        nu = uu.size();
        nx = m.size();
        nh = h.size();
        t.push_back(time);
        u.push_back(uu);
        mean.push_back(m);
        var.push_back(v);
        htilde.push_back(h);
    }

    double RunResult::mean_step_ms() const
    {
        const std::size_t skip = static_cast<std::size_t>(scenario.warmup);
        if (wall_ns.size() <= skip)
            return std::numeric_limits<double>::quiet_NaN();
        double sum = 0.0;
        for (std::size_t i = skip; i < wall_ns.size(); ++i)
            sum += static_cast<double>(wall_ns[i]);
        return sum / static_cast<double>(wall_ns.size() - skip) * 1e-6;
    }

    double RunResult::median_step_ms() const
    {
        const std::size_t skip = static_cast<std::size_t>(scenario.warmup);
        if (wall_ns.size() <= skip)
            return std::numeric_limits<double>::quiet_NaN();
        std::vector<std::int64_t> v(wall_ns.begin() + static_cast<std::ptrdiff_t>(skip), wall_ns.end());
        const std::size_t mid = v.size() / 2;
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
        double m = static_cast<double>(v[mid]);
        if (v.size() % 2 == 0)
            m = 0.5 * (m + static_cast<double>(*std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid))));
        return m * 1e-6;
    }

    std::string config_label(Representation r, const PropagationMethod &m)
    {
        if (r == Representation::MRTaylor)
            return "MR-Taylor";
        std::string head = r == Representation::SR ? "SR-" : "MR-";
        switch (m.kind)
        {
        case MethodKind::Taylor1: return head + "Taylor";
        case MethodKind::Stirling1: return head + "Stirling1";
        case MethodKind::Stirling2: return head + "Stirling2";
        case MethodKind::Unscented: return head + "UT";
        case MethodKind::GaussQuadrature: return head + "Quad(d=" + std::to_string(m.order) + ")";
        case MethodKind::MonteCarlo: return head + "MC(" + std::to_string(m.samples) + ")";
        case MethodKind::PCE:
            return head + "PCE(M=" + std::to_string(m.pce_order) + ",d=" + std::to_string(m.order) + ")";
        }
        return head + "?";
    }

    namespace
    {
        using Clock = std::chrono::steady_clock;

        SolverConfig solver_config(const Scenario &s)
        {
            SolverConfig c;
            c.grid_points = s.grid_points;
            c.outer_iterations = s.outer_iterations;
            c.inner_iterations = s.inner_iterations;
            c.rho0 = s.rho0;
            return c;
        }

        ReformulationConfig reform_config(const Scenario &s)
        {
            ReformulationConfig c;
            c.repr = s.repr;
            c.method = s.method;
            if (c.method.kind == MethodKind::MonteCarlo)
                c.method.seed = s.seed;
            return c;
        }

        Vector noisy(const Vector &x, double var, const RngStream &rng, std::uint64_t k)
        {
            Vector y = x;
            const double sd = std::sqrt(var);
            for (Index j = 0; j < y.size(); ++j)
                y(j) += sd * rng.normal(k, static_cast<std::uint64_t>(j));
            return y;
        }

        /// Independent measurement noise with per-component variances.
        Vector noisy(const Vector &x, const Vector &var, const RngStream &rng, std::uint64_t k)
        {
            Vector y = x;
            for (Index j = 0; j < y.size(); ++j)
                y(j) += std::sqrt(var(j)) * rng.normal(k, static_cast<std::uint64_t>(j));
            return y;
        }

        Vector draw_one(const JointDistribution &d, const RngStream &rng)
        {
            return sample(d, 1, rng).col(0);
        }

        /// Hooks describing one closed-loop experiment.
        struct LoopSpec
        {
            StochasticProblem problem;
            std::function<TruthPlant(const RngStream &)> plant;
            std::function<Vector(const RngStream &)> x0;
            std::function<void(const Vector &x0)> reset;
            /// Controller's state distribution at step k from the true state.
            std::function<JointDistribution(std::uint64_t k, const Vector &x, const Vector &u_prev,
                                            const RngStream &meas)>
                estimate;
        };

        RunResult closed_loop(const Scenario &s, const LoopSpec &spec)
        {
            RunResult res;
            res.scenario = s;
            const int steps = s.steps();
            const RngStream root(s.seed);
            MpcController ctrl(spec.problem, reform_config(s), solver_config(s), s.dt);
            const Index nx = spec.problem.model->nx(), nh = spec.problem.model->num_path();
            for (int k = 0; k <= steps; ++k)
                res.rollouts.t.push_back(k * s.dt);
            for (int r = 0; r < s.rollouts; ++r)
            {
                const RngStream rr = root.substream(static_cast<std::uint64_t>(r));
                const TruthPlant plant = spec.plant(rr.substream(3));
                Vector x = spec.x0(rr.substream(4));
                if (spec.reset)
                    spec.reset(x);
                ctrl.reset();
                Matrix traj(nx, steps + 1);
                traj.col(0) = x;
                Vector u_prev = 0.5 * (spec.problem.u_min + spec.problem.u_max);
                for (int k = 0; k < steps; ++k)
                {
                    const double t = k * s.dt;
                    const auto kk = static_cast<std::uint64_t>(k);
                    const JointDistribution est = spec.estimate(kk, x, u_prev, rr.substream(2));
                    const auto c0 = Clock::now();
                    const Vector u = ctrl.step(est, t, kk);
                    const auto c1 = Clock::now();
                    if (r == 0)
                    {
                        res.wall_ns.push_back(std::chrono::duration_cast<std::chrono::nanoseconds>(c1 - c0).count());
                        const SolveResult &sol = ctrl.last();
                        Vector h(nh);
                        ctrl.last_problem()->path_constraints(sol.x.col(0), sol.u.col(0), sol.t(0), h);
                        res.trajectory.push(t, u, est.mean(), est.covariance().diagonal(), h);
                    }
                    x = plant.advance(x, t, s.dt, [&](double tt) { return ctrl.control(tt); }, rr.substream(1), kk);
                    u_prev = u;
                    traj.col(k + 1) = x;
                }
                res.rollouts.states.push_back(std::move(traj));
            }
            res.diagnostics = ctrl.warnings();
            return res;
        }

        // ------------------------------------------------------------ reactor

        struct CstrSetup
        {
            std::shared_ptr<CstrModel> model;
            StochasticProblem problem;
            CstrSetpoint setpoint;
            Vector x0;
        };

        constexpr double kCbDes = 0.125;
        constexpr double kCbMax = 0.14;

        CstrSetup cstr_setup(const Scenario &s)
        {
            CstrSetup c;
            const JointDistribution p = cstr_parameters();
            c.setpoint = cstr_setpoint(kCbDes, p.mean());
            c.model = std::make_shared<CstrModel>(c.setpoint.x, c.setpoint.u, kCbMax);
            c.x0 = Vector(2);
            c.x0 << 0.7, 0.1;
            StochasticProblem &pr = c.problem;
            pr.model = c.model;
            pr.horizon = s.horizon;
            pr.alpha_path = Vector::Constant(1, 0.9);
            pr.u_min = Vector::Constant(1, 10.0);
            pr.u_max = Vector::Constant(1, 100.0);
            pr.x0 = JointDistribution(c.x0, s.noise_var * Matrix::Identity(2, 2));
            pr.p = p;
            pr.approx = s.approx;
            return c;
        }

        double empirical_quantile(std::vector<double> v, double q)
        {
            std::sort(v.begin(), v.end());
            const auto n = static_cast<double>(v.size());
            const auto i = static_cast<std::size_t>(std::max(0.0, std::ceil(q * n) - 1.0));
            return v[std::min(i, v.size() - 1)];
        }

        RunResult cstr_open_loop(const Scenario &s, const CstrSetup &c)
        {
            RunResult res;
            res.scenario = s;
            auto dp = reformulate(c.problem, reform_config(s));
            SolverConfig cfg = solver_config(s);
            cfg.converge = true;
            cfg.outer_iterations = std::max(cfg.outer_iterations, 50);
            cfg.inner_iterations = std::max(cfg.inner_iterations, 200);
            const auto c0 = Clock::now();
            const SolveResult sol = solve_ocp(*dp, cfg);
            res.wall_ns.push_back(std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - c0).count());
            res.diagnostics = dp->warnings();
            Vector h(1);
            for (Index k = 0; k < sol.t.size(); ++k)
            {
                const StateMoments m = dp->moments(sol.x.col(k));
                dp->path_constraints(sol.x.col(k), sol.u.col(k), sol.t(k), h);
                res.trajectory.push(sol.t(k), sol.u.col(k), m.mean, m.var, h);
            }

            // truth rollouts under the fixed control
            constexpr int kIntervals = 200;
            const double dt = s.horizon / kIntervals;
            for (int k = 0; k <= kIntervals; ++k)
                res.rollouts.t.push_back(k * dt);
            const RngStream root(s.seed);
            const ControlSignal u = [&](double t) { return interpolate(sol.t, sol.u, t); };
            std::vector<std::vector<double>> cb(kIntervals + 1);
            for (int r = 0; r < s.rollouts; ++r)
            {
                const RngStream rr = root.substream(static_cast<std::uint64_t>(r));
                const Vector p = draw_one(c.problem.p, rr.substream(3));
                TruthPlant plant;
                plant.drift = [&, p](const Vector &x, const Vector &uu, double t, Vector &dx) {
                    c.model->dynamics(x, uu, p, t, dx);
                };
                Vector x = noisy(c.x0, s.noise_var, rr.substream(4), 0);
                Matrix traj(2, kIntervals + 1);
                traj.col(0) = x;
                for (int k = 0; k < kIntervals; ++k)
                {
                    x = plant.advance(x, k * dt, dt, u, rr.substream(1), static_cast<std::uint64_t>(k));
                    traj.col(k + 1) = x;
                }
                for (int k = 0; k <= kIntervals; ++k)
                    cb[static_cast<std::size_t>(k)].push_back(traj(1, k));
                res.rollouts.states.push_back(std::move(traj));
            }
            double peak_q = -std::numeric_limits<double>::infinity(), peak_mean = peak_q;
            for (const auto &v : cb)
            {
                peak_q = std::max(peak_q, empirical_quantile(v, 0.9));
                double m = 0.0;
                for (double e : v)
                    m += e;
                peak_mean = std::max(peak_mean, m / static_cast<double>(v.size()));
            }
            double max_h = -std::numeric_limits<double>::infinity();
            for (const Vector &v : res.trajectory.htilde)
                max_h = std::max(max_h, v(0));
            res.stats["peak_quantile90_cB"] = peak_q;
            res.stats["peak_mean_cB"] = peak_mean;
            res.stats["max_tightened_constraint"] = max_h;
            res.stats["solve_cost"] = sol.cost;
            res.stats["solve_iterations"] = sol.iterations;
            res.stats["solve_stalled"] = sol.stalled;
            return res;
        }

        template <class F>
        void collect_extrema(RunResult &res, Index row, const char *max_key, F &&margin)
        {
            double mx = -std::numeric_limits<double>::infinity();
            for (const Matrix &m : res.rollouts.states)
                mx = std::max(mx, m.row(row).maxCoeff());
            res.stats[max_key] = mx;
            res.stats["min_margin"] = margin(mx);
        }
    } // namespace

    RunResult run_cstr(const Scenario &s)
    {
        s.validate();
        const CstrSetup c = cstr_setup(s);
        RunResult res;
        if (s.open_loop)
        {
            res = cstr_open_loop(s, c);
        }
        else
        {
            LoopSpec spec;
            spec.problem = c.problem;
            auto model = c.model;
            const JointDistribution pdist = c.problem.p;
            spec.plant = [model, pdist](const RngStream &rng) {
                const Vector p = draw_one(pdist, rng);
                TruthPlant plant;
                plant.drift = [model, p](const Vector &x, const Vector &u, double t, Vector &dx) {
                    model->dynamics(x, u, p, t, dx);
                };
                return plant;
            };
            const Vector x0 = c.x0;
            spec.x0 = [x0](const RngStream &) { return x0; };
            const double nv = s.noise_var;
            spec.estimate = [nv](std::uint64_t k, const Vector &x, const Vector &, const RngStream &meas) {
                return JointDistribution(noisy(x, nv, meas, k), nv * Matrix::Identity(x.size(), x.size()));
            };
            res = closed_loop(s, spec);
            collect_extrema(res, 1, "max_cB", [](double mx) { return kCbMax - mx; });
            // per-rollout margins
            double mean_margin = 0.0;
            for (const Matrix &m : res.rollouts.states)
                mean_margin += kCbMax - m.row(1).maxCoeff();
            res.stats["mean_min_margin"] = mean_margin / static_cast<double>(res.rollouts.states.size());
        }
        res.stats["x_des"] = {c.setpoint.x(0), c.setpoint.x(1)};
        res.stats["u_des"] = c.setpoint.u;
        res.stats["mean_step_ms"] = res.mean_step_ms();
        res.stats["median_step_ms"] = res.median_step_ms();
        return res;
    }

    namespace
    {
        struct ChainSetup
        {
            std::shared_ptr<ChainModel> model;
            StochasticProblem problem;
            Vector x0, var;
        };

        ChainSetup chain_setup(const Scenario &s)
        {
            constexpr double kChainVelocityNoise = 100.0;
            ChainSetup c;
            Vector end_ref(3);
            end_ref << 1.0, 0.0, 0.0;
            c.model = std::make_shared<ChainModel>(s.chain_n, ChainConstants{}, end_ref);
            const Index nx = c.model->nx();
            StochasticProblem &pr = c.problem;
            pr.model = c.model;
            pr.horizon = s.horizon;
            pr.alpha_path = Vector::Constant(c.model->num_path(), 0.9);
            pr.u_min = Vector::Constant(3, -1.0);
            pr.u_max = Vector::Constant(3, 1.0);
            c.x0 = c.model->straight_state();
            // velocities are differentiated positions: 10x the standard deviation
            c.var = Vector::Constant(nx, s.noise_var);
            c.var.segment(3 * (s.chain_n - 1), 3 * (s.chain_n - 1)).array() *= kChainVelocityNoise;
            pr.x0 = JointDistribution(c.x0, c.var.asDiagonal());
            pr.approx = s.approx;
            return c;
        }
    } // namespace

    RunResult run_chain(const Scenario &s)
    {
        s.validate();
        const ChainSetup c = chain_setup(s);
        auto model = c.model;
        const Index nx = model->nx();
        RunResult res;
        res.scenario = s;
        if (s.repr == Representation::SR &&
            (s.method.kind == MethodKind::GaussQuadrature || s.method.kind == MethodKind::PCE))
        {
            const double pts = std::pow(static_cast<double>(s.method.order), static_cast<double>(nx));
            if (pts > kPointBudget)
            {
                std::ostringstream os;
                os << "skipped: " << config_label(s.repr, s.method) << " needs " << s.method.order << "^" << nx
                   << " = " << pts << " points, above the budget of " << kPointBudget;
                res.skipped = true;
                res.diagnostics.push_back(os.str());
                res.stats["skipped"] = true;
                return res;
            }
        }
        LoopSpec spec;
        spec.problem = c.problem;
        const Vector x0 = c.x0, var = c.var;
        spec.plant = [model](const RngStream &) {
            TruthPlant plant;
            plant.drift = [model](const Vector &x, const Vector &u, double t, Vector &dx) {
                model->dynamics(x, u, Vector(), t, dx);
            };
            return plant;
        };
        spec.x0 = [x0](const RngStream &) { return x0; };
        spec.estimate = [var](std::uint64_t k, const Vector &x, const Vector &, const RngStream &meas) {
            return JointDistribution(noisy(x, var, meas, k), var.asDiagonal());
        };
        res = closed_loop(s, spec);
        res.stats["states"] = nx;
        res.stats["mean_step_ms"] = res.mean_step_ms();
        res.stats["median_step_ms"] = res.median_step_ms();
        return res;
    }

    namespace
    {
        struct TankSetup
        {
            GPData data;
            std::shared_ptr<const GPModel> gp;
            StochasticProblem problem; ///< with the GP attached
            Vector x0;
        };

        TankSetup tank_setup(const Scenario &s, const TankConstants &tc)
        {
            TankSetup c;
            c.data = tank_gp_data(s.gp_points, s.noise_var, s.seed, tc);
            c.gp = std::make_shared<const GPModel>(tank_gp(c.data, s.noise_var));
            StochasticProblem pr;
            pr.model = std::make_shared<WaterTankModel>(tc);
            pr.horizon = s.horizon;
            pr.alpha_path = Vector::Constant(1, 0.95);
            pr.u_min = Vector::Constant(1, 0.0);
            pr.u_max = Vector::Constant(1, 0.2);
            c.x0 = Vector(2);
            c.x0 << 0.0, 0.1;
            pr.x0 = dirac(c.x0);
            pr.approx = s.approx;
            c.problem = attach_gp(pr, c.gp);
            return c;
        }
    } // namespace

    RunResult run_watertank(const Scenario &s)
    {
        s.validate();
        const TankConstants tc;
        const TankSetup c = tank_setup(s, tc);
        const GPData &data = c.data;
        const auto &gp = c.gp;
        const Vector x0 = c.x0;
        LoopSpec spec;
        spec.problem = c.problem;
        spec.plant = [tc](const RngStream &) {
            TruthPlant plant;
            plant.drift = [tc](const Vector &x, const Vector &u, double, Vector &dx) {
                dx(0) = u(0);
                dx(1) = x(0) / tc.area + torricelli(x(1), tc);
            };
            return plant;
        };
        spec.x0 = [x0](const RngStream &) { return x0; };
        spec.estimate = [](std::uint64_t, const Vector &x, const Vector &, const RngStream &) { return dirac(x); };
        RunResult res = closed_loop(s, spec);
        collect_extrema(res, 1, "max_h", [&](double mx) { return tc.h_max - mx; });
        // fit quality at the training inputs
        double worst = 0.0;
        Vector m(2), v(2);
        for (Index i = 0; i < data.zin.rows(); ++i)
        {
            gp->predict(data.zin.row(i).transpose(), m, v);
            worst = std::max(worst, std::abs(m(1) - data.zout(i, 1)));
        }
        res.stats["gp_max_residual"] = worst;
        res.stats["mean_step_ms"] = res.mean_step_ms();
        res.stats["median_step_ms"] = res.median_step_ms();
        return res;
    }

    namespace
    {
        constexpr double kPendulumP0 = 1e-6, kSwitch = 0.1, kTarget = 0.6;

        StochasticProblem pendulum_problem(const Scenario &s, std::shared_ptr<const PendulumModel> model,
                                           const Matrix &p0)
        {
            StochasticProblem pr;
            pr.model = std::move(model);
            pr.horizon = s.horizon;
            pr.alpha_path = Vector::Constant(1, 0.95);
            pr.u_min = Vector::Constant(1, -5.0);
            pr.u_max = Vector::Constant(1, 5.0);
            pr.x0 = JointDistribution(Vector::Zero(4), p0);
            pr.approx = s.approx;
            return pr;
        }
    } // namespace

    RunResult run_pendulum(const Scenario &s)
    {
        s.validate();
        const PendulumConstants pc;
        constexpr double kProcessSd = 1e-3;
        auto model = std::make_shared<PendulumModel>(0.0, kTarget, kSwitch, pc);
        Matrix ac, bc;
        model->linearization(ac, bc);
        Matrix sw = Matrix::Zero(4, 2);
        sw(1, 0) = kProcessSd;
        sw(3, 1) = kProcessSd;
        const DiscreteLinearSystem sys = discretize(ac, bc, sw * sw.transpose(), s.dt);
        Matrix cm = Matrix::Zero(2, 4);
        cm(0, 0) = 1.0;
        cm(1, 2) = 1.0;
        const double nv = s.noise_var;
        const Matrix p0 = kPendulumP0 * Matrix::Identity(4, 4);
        auto kf = std::make_shared<KalmanFilter>(sys, cm, nv * Matrix::Identity(2, 2), Vector::Zero(4), p0);

        LoopSpec spec;
        spec.problem = pendulum_problem(s, model, p0);
        spec.plant = [model, sw](const RngStream &) {
            TruthPlant plant;
            plant.drift = [model](const Vector &x, const Vector &u, double t, Vector &dx) {
                model->dynamics(x, u, Vector(), t, dx);
            };
            plant.sigma_w = sw;
            return plant;
        };
        spec.x0 = [](const RngStream &) { return Vector(Vector::Zero(4)); };
        spec.reset = [kf, p0](const Vector &) { kf->reset(Vector::Zero(4), p0); };
        spec.estimate = [kf, cm, nv](std::uint64_t k, const Vector &x, const Vector &u_prev, const RngStream &meas) {
            if (k > 0)
                kf->predict(u_prev);
            kf->update(noisy(cm * x, nv, meas, k));
            return kf->estimate();
        };
        RunResult res = closed_loop(s, spec);
        collect_extrema(res, 0, "max_xc", [&](double mx) { return pc.x_max - mx; });
        const Matrix &r0 = res.rollouts.states.front();
        res.stats["final_xc"] = r0(0, r0.cols() - 1);
        res.stats["final_alpha"] = r0(2, r0.cols() - 1);
        res.stats["mean_step_ms"] = res.mean_step_ms();
        res.stats["median_step_ms"] = res.median_step_ms();
        return res;
    }

    StochasticProblem benchmark_problem(const Scenario &s)
    {
        s.validate();
        switch (s.problem)
        {
        case Benchmark::Cstr: return cstr_setup(s).problem;
        case Benchmark::Chain: return chain_setup(s).problem;
        case Benchmark::WaterTank: return tank_setup(s, TankConstants{}).problem;
        case Benchmark::Pendulum:
            return pendulum_problem(s, std::make_shared<PendulumModel>(0.0, kTarget, kSwitch),
                                    kPendulumP0 * Matrix::Identity(4, 4));
        }
        throw ParameterError("benchmark_problem: unknown benchmark");
    }

    RunResult run_scenario(const Scenario &s)
    {
        switch (s.problem)
        {
        case Benchmark::Cstr: return run_cstr(s);
        case Benchmark::Chain: return run_chain(s);
        case Benchmark::WaterTank: return run_watertank(s);
        case Benchmark::Pendulum: return run_pendulum(s);
        }
        throw ParameterError("run_scenario: unknown benchmark");
    }

    std::vector<TimingRow> chain_scaling(const std::vector<int> &ns,
                                         const std::vector<std::pair<Representation, PropagationMethod>> &configs,
                                         int timed_steps, std::uint64_t seed, int repeats)
    {
        if (repeats < 1)
            throw ParameterError("chain_scaling: repeats must be >= 1");
        std::vector<TimingRow> rows;
        for (int n : ns)
        {
            const std::size_t first = rows.size();
            // repeats are interleaved across configurations so slow drift of the machine hits all alike
            for (int rep = 0; rep < repeats; ++rep)
            {
                for (std::size_t c = 0; c < configs.size(); ++c)
                {
                    const auto &[repr, method] = configs[c];
                    Scenario s = default_scenario(Benchmark::Chain);
                    s.chain_n = n;
                    s.repr = repr;
                    s.method = method;
                    s.seed = seed;
                    s.duration = (s.warmup + timed_steps) * s.dt;
                    if (rep == 0)
                    {
                        TimingRow row;
                        row.label = config_label(repr, method);
                        row.size = n;
                        row.mean_ms = row.median_ms = std::numeric_limits<double>::infinity();
                        rows.push_back(row);
                    }
                    TimingRow &row = rows[first + c];
                    if (row.skipped)
                        continue;
                    const RunResult r = run_chain(s);
                    if (r.skipped)
                    {
                        row.skipped = true;
                        row.reason = r.diagnostics.front();
                        row.mean_ms = row.median_ms = 0.0;
                        continue;
                    }
                    row.mean_ms = std::min(row.mean_ms, r.mean_step_ms());
                    row.median_ms = std::min(row.median_ms, r.median_step_ms());
                }
            }
        }
        return rows;
    }

    std::vector<TimingRow> gp_timing(const std::vector<int> &sizes, int timed_steps, std::uint64_t seed)
    {
        std::vector<TimingRow> rows;
        for (int m : sizes)
        {
            Scenario s = default_scenario(Benchmark::WaterTank);
            s.gp_points = m;
            s.seed = seed;
            s.duration = (s.warmup + timed_steps) * s.dt;
            const RunResult r = run_watertank(s);
            TimingRow row;
            row.label = config_label(s.repr, s.method);
            row.size = m;
            row.mean_ms = r.mean_step_ms();
            row.median_ms = r.median_step_ms();
            rows.push_back(row);
        }
        return rows;
    }
} // namespace smpc::bench
