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

// Benchmark models, filter, plant, scenario plumbing and output formats.

#include "smpc/bench/io.hpp"
#include "smpc/bench/kalman.hpp"
#include "smpc/bench/models.hpp"
#include "smpc/bench/plant.hpp"
#include "smpc/bench/scenario.hpp"
#include "smpc/rng.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace smpc::bench
{
    namespace
    {
        Vector vec(std::initializer_list<double> v)
        {
            Vector out(static_cast<Index>(v.size()));
            Index i = 0;
            for (double x : v)
                out(i++) = x;
            return out;
        }

        /// Central-difference check of dynamics, cost and path-constraint Jacobians at (x, u, p).
        void check_model_jacobians(const SystemModel &m, const Vector &x, const Vector &u, const Vector &p, double t)
        {
            const Index nx = m.nx(), nu = m.nu(), np = m.np(), nh = m.num_path();
            Matrix jx(nx, nx), ju(nx, nu), jp(nx, np), hx(nh, nx), hu(nh, nu), hp(nh, np);
            Vector gx(nx), gu(nu), gp(np);
            m.dynamics_jacobians(x, u, p, t, jx, ju, jp);
            m.path_constraints_jacobians(x, u, p, t, hx, hu, hp);
            m.stage_cost_gradient(x, u, p, t, gx, gu, gp);

            auto fd = [&](int block, Index k, Vector &df, Vector &dh, double &dl) {
                Vector xp = x, up = u, pp = p, xm = x, um = u, pm = p;
                Vector &vp = block == 0 ? xp : block == 1 ? up : pp;
                Vector &vm = block == 0 ? xm : block == 1 ? um : pm;
                const double h = 1e-6 * std::max(1.0, std::abs(vp(k)));
                vp(k) += h;
                vm(k) -= h;
                Vector fp(nx), fm(nx), hpv(nh), hmv(nh);
                m.dynamics(xp, up, pp, t, fp);
                m.dynamics(xm, um, pm, t, fm);
                m.path_constraints(xp, up, pp, t, hpv);
                m.path_constraints(xm, um, pm, t, hmv);
                df = (fp - fm) / (2 * h);
                dh = (hpv - hmv) / (2 * h);
                dl = (m.stage_cost(xp, up, pp, t) - m.stage_cost(xm, um, pm, t)) / (2 * h);
            };
            auto near = [](double a, double b) { return std::abs(a - b) <= 1e-5 * (1.0 + std::abs(a)); };
            for (int block = 0; block < 3; ++block)
            {
                const Index n = block == 0 ? nx : block == 1 ? nu : np;
                const Matrix &j = block == 0 ? jx : block == 1 ? ju : jp;
                const Matrix &hj = block == 0 ? hx : block == 1 ? hu : hp;
                const Vector &g = block == 0 ? gx : block == 1 ? gu : gp;
                for (Index k = 0; k < n; ++k)
                {
                    Vector df, dh;
                    double dl = 0.0;
                    fd(block, k, df, dh, dl);
                    for (Index i = 0; i < nx; ++i)
                        EXPECT_TRUE(near(j(i, k), df(i))) << m.name() << " f block " << block << " (" << i << "," << k
                                                          << "): " << j(i, k) << " vs " << df(i);
                    for (Index i = 0; i < nh; ++i)
                        EXPECT_TRUE(near(hj(i, k), dh(i))) << m.name() << " h block " << block;
                    EXPECT_TRUE(near(g(k), dl)) << m.name() << " l block " << block << " k " << k << ": " << g(k)
                                                << " vs " << dl;
                }
            }
        }

        /// dynamics_vjp must equal lam^T [Jx Ju Jp].
        void check_vjp(const SystemModel &m, const Vector &x, const Vector &u, const Vector &p, std::uint64_t seed)
        {
            const Index nx = m.nx(), nu = m.nu(), np = m.np();
            RngStream r(seed);
            Vector lam(nx);
            for (Index i = 0; i < nx; ++i)
                lam(i) = r.normal(0, i);
            Matrix jx(nx, nx), ju(nx, nu), jp(nx, np);
            m.dynamics_jacobians(x, u, p, 0.0, jx, ju, jp);
            Vector gx(nx), gu(nu), gp(np);
            ASSERT_TRUE(m.dynamics_vjp(x, u, p, 0.0, lam, gx, gu, gp));
            EXPECT_LE((gx - jx.transpose() * lam).norm(), 1e-12 * (1.0 + gx.norm()));
            EXPECT_LE((gu - ju.transpose() * lam).norm(), 1e-12 * (1.0 + gu.norm()));
            if (np > 0)
                EXPECT_LE((gp - jp.transpose() * lam).norm(), 1e-12 * (1.0 + gp.norm()));
        }

        Vector cstr_nominal() { return vec({50.0, 100.0, 100.0}); }
    } // namespace

    // ---------------------------------------------------------------- models

    TEST(BenchModels, CstrJacobiansMatchFiniteDifferences)
    {
        const CstrModel m(vec({0.4, 0.125}), 60.0);
        check_model_jacobians(m, vec({0.55, 0.11}), vec({42.0}), vec({49.0, 103.0, 97.0}), 0.0);
    }

    TEST(BenchModels, CstrVjpMatchesJacobians)
    {
        const CstrModel m(vec({0.4, 0.125}), 60.0);
        check_vjp(m, vec({0.55, 0.11}), vec({42.0}), vec({49.0, 103.0, 97.0}), 3);
    }

    TEST(BenchModels, CstrSetpointIsSteadyState)
    {
        // c_A = 0.4, u = 60: -50*0.4 - 100*0.16 + 0.6*60 = 0 and c_B = 20 / 160
        const CstrSetpoint sp = cstr_setpoint(0.125, cstr_nominal());
        EXPECT_NEAR(sp.x(0), 0.4, 1e-10);
        EXPECT_NEAR(sp.x(1), 0.125, 1e-12);
        EXPECT_NEAR(sp.u, 60.0, 1e-8);
        const CstrModel m(sp.x, sp.u);
        Vector f(2);
        m.dynamics(sp.x, vec({sp.u}), cstr_nominal(), 0.0, f);
        EXPECT_LE(f.norm(), 1e-9);
    }

    TEST(BenchModels, CstrParametersAreUniform)
    {
        const JointDistribution d = cstr_parameters();
        ASSERT_EQ(d.dim(), 3);
        EXPECT_NEAR(d.mean()(0), 50.0, 1e-12);
        EXPECT_NEAR(d.covariance()(0, 0), 16.0 / 12.0, 1e-12);
        EXPECT_NEAR(d.covariance()(1, 1), 100.0 / 12.0, 1e-12);
    }

    TEST(BenchModels, ChainJacobiansAndVjp)
    {
        for (int n : {2, 3, 5})
        {
            const ChainModel m(n, ChainConstants{}, vec({0.1, 0.05, -0.02}));
            Vector x = m.straight_state();
            RngStream r(7 + n);
            for (Index i = 0; i < x.size(); ++i)
                x(i) += 0.01 * r.normal(0, i);
            check_model_jacobians(m, x, vec({0.1, -0.2, 0.05}), Vector(0), 0.0);
            check_vjp(m, x, vec({0.1, -0.2, 0.05}), Vector(0), 11 + n);
        }
    }

    TEST(BenchModels, ChainStraightStateIsOnTheLine)
    {
        const ChainModel m(4, ChainConstants{}, vec({0.4, 0.0, 0.0}));
        const Vector x = m.straight_state();
        EXPECT_EQ(x.size(), 21);
        EXPECT_NEAR(x(0), 0.1, 1e-15);
        EXPECT_NEAR(x(x.size() - 3), 0.4, 1e-15);
        EXPECT_THROW(ChainModel(1, ChainConstants{}, vec({0, 0, 0})), ParameterError);
    }

    TEST(BenchModels, PendulumJacobiansAndLinearization)
    {
        const PendulumModel m(0.0, 0.6, 0.1);
        check_model_jacobians(m, vec({0.1, -0.2, 0.3, 0.5}), vec({1.5}), Vector(0), 0.05);
        Matrix a, b;
        m.linearization(a, b);
        Matrix jx(4, 4), ju(4, 1), jp(4, 0);
        m.dynamics_jacobians(Vector::Zero(4), Vector::Zero(1), Vector(0), 0.0, jx, ju, jp);
        EXPECT_LE((a - jx).norm(), 1e-12);
        EXPECT_LE((b - ju).norm(), 1e-12);
        EXPECT_EQ(m.setpoint(0.05), 0.0);
        EXPECT_EQ(m.setpoint(0.2), 0.6);
    }

    TEST(BenchModels, TankJacobiansAndTorricelli)
    {
        const WaterTankModel m;
        check_model_jacobians(m, vec({0.02, 0.5}), vec({0.01}), Vector(0), 0.0);
        EXPECT_NEAR(torricelli(0.5), -(1.0 / 30.0) * std::sqrt(2 * 9.81 * 0.5), 1e-15);
        EXPECT_EQ(torricelli(-1.0), 0.0);
    }

    TEST(BenchModels, TankGpRecoversOutflow)
    {
        const double nv = 1e-3;
        const GPModel gp = tank_gp(tank_gp_data(20, nv, 4), nv);
        Vector mean(2), var(2);
        for (double h : {0.1, 0.35, 0.6, 0.85, 1.1})
        {
            gp.predict(vec({0.0, h, 0.0}), mean, var);
            EXPECT_LE(std::abs(mean(1) - torricelli(h)), 3.0 * std::sqrt(nv)) << "h = " << h;
            EXPECT_GE(var(1), 0.0);
        }
    }

    // ---------------------------------------------------------------- filter

    TEST(BenchKalman, DiscretizeScalarMatchesClosedForm)
    {
        const double a = -0.7, b = 2.0, q = 0.3, dt = 0.4;
        const DiscreteLinearSystem d = discretize(Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b),
                                                  Matrix::Constant(1, 1, q), dt);
        const double e = std::exp(a * dt);
        EXPECT_NEAR(d.a(0, 0), e, 1e-14);
        EXPECT_NEAR(d.b(0, 0), (e - 1.0) / a * b, 1e-14);
        EXPECT_NEAR(d.q(0, 0), q * (std::exp(2 * a * dt) - 1.0) / (2 * a), 1e-14);
    }

    TEST(BenchKalman, DiscretizeDoubleIntegrator)
    {
        // x'' = u with noise on the velocity: closed forms dt^3/3, dt^2/2, dt
        Matrix ac(2, 2), bc(2, 1), qc = Matrix::Zero(2, 2);
        ac << 0, 1, 0, 0;
        bc << 0, 1;
        qc(1, 1) = 2.0;
        const double dt = 0.3;
        const DiscreteLinearSystem d = discretize(ac, bc, qc, dt);
        EXPECT_NEAR(d.a(0, 1), dt, 1e-14);
        EXPECT_NEAR(d.b(0, 0), dt * dt / 2, 1e-14);
        EXPECT_NEAR(d.q(0, 0), 2.0 * dt * dt * dt / 3, 1e-14);
        EXPECT_NEAR(d.q(0, 1), 2.0 * dt * dt / 2, 1e-14);
        EXPECT_NEAR(d.q(1, 1), 2.0 * dt, 1e-14);
    }

    TEST(BenchKalman, PredictionConvergesToLyapunovSolution)
    {
        Matrix a(2, 2), q(2, 2);
        a << 0.8, 0.2, -0.1, 0.7;
        q << 0.05, 0.01, 0.01, 0.02;
        // vec P = (I - A kron A)^-1 vec Q
        Matrix kron(4, 4);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                kron.block(2 * i, 2 * j, 2, 2) = a(i, j) * a;
        const Vector vp = (Matrix::Identity(4, 4) - kron).lu().solve(Eigen::Map<const Vector>(q.data(), 4));
        const Matrix p_inf = Eigen::Map<const Matrix>(vp.data(), 2, 2);

        Matrix r(1, 1);
        r(0, 0) = std::numeric_limits<double>::infinity();
        KalmanFilter kf({a, Matrix::Zero(2, 1), q}, Matrix::Identity(1, 2), r, Vector::Zero(2),
                        Matrix::Identity(2, 2));
        for (int k = 0; k < 300; ++k)
        {
            kf.predict(Vector::Zero(1));
            kf.update(vec({123.0})); // ignored: infinite R
        }
        EXPECT_LE((kf.cov() - p_inf).norm(), 1e-12);
        EXPECT_LE(kf.mean().norm(), 1e-12);
    }

    TEST(BenchKalman, ScalarUpdateMatchesClosedForm)
    {
        KalmanFilter kf({Matrix::Identity(1, 1), Matrix::Zero(1, 1), Matrix::Zero(1, 1)}, Matrix::Identity(1, 1),
                        Matrix::Constant(1, 1, 0.5), vec({1.0}), Matrix::Constant(1, 1, 2.0));
        kf.update(vec({3.0}));
        // gain 2 / 2.5
        EXPECT_NEAR(kf.mean()(0), 1.0 + 0.8 * 2.0, 1e-14);
        EXPECT_NEAR(kf.cov()(0, 0), 0.2 * 2.0, 1e-14);
    }

    // ---------------------------------------------------------------- plant

    TEST(BenchPlant, DeterministicEulerMatchesClosedForm)
    {
        TruthPlant plant;
        plant.drift = [](const Vector &x, const Vector &, double, Vector &dx) { dx = -x; };
        plant.substeps = 20;
        const Vector x1 = plant.advance(vec({1.0}), 0.0, 0.5, [](double) { return Vector::Zero(1); }, RngStream(1), 0);
        EXPECT_NEAR(x1(0), std::pow(1.0 - 0.5 / 20, 20), 1e-14);
    }

    TEST(BenchPlant, NoiseIsReproducibleAndStepDependent)
    {
        TruthPlant plant;
        plant.drift = [](const Vector &x, const Vector &, double, Vector &dx) { dx = -x; };
        plant.sigma_w = Matrix::Constant(1, 1, 0.3);
        const auto u = [](double) { return Vector::Zero(1); };
        const Vector a = plant.advance(vec({1.0}), 0.0, 0.1, u, RngStream(5), 3);
        const Vector b = plant.advance(vec({1.0}), 0.0, 0.1, u, RngStream(5), 3);
        const Vector c = plant.advance(vec({1.0}), 0.0, 0.1, u, RngStream(5), 4);
        EXPECT_EQ(a(0), b(0));
        EXPECT_NE(a(0), c(0));
    }

    TEST(BenchPlant, Validation)
    {
        TruthPlant plant;
        EXPECT_THROW(plant.validate(), ParameterError);
        plant.drift = [](const Vector &x, const Vector &, double, Vector &dx) { dx = x; };
        plant.substeps = 9;
        EXPECT_THROW(plant.validate(), ParameterError);
        plant.substeps = 10;
        EXPECT_NO_THROW(plant.validate());
    }

    // ---------------------------------------------------------------- io / scenario

    TEST(BenchIo, FormatDoubleRoundTrips)
    {
        EXPECT_EQ(format_double(0.1), "0.10000000000000001");
        for (double v : {1.0 / 3.0, -2.5e-300, 6.02214076e23})
            EXPECT_EQ(std::stod(format_double(v)), v);
    }

    TEST(BenchIo, CsvHeaders)
    {
        TrajectoryLog log;
        log.nu = 1;
        log.nx = 2;
        log.nh = 1;
        log.push(0.0, vec({1.0}), vec({0.1, 0.2}), vec({0.01, 0.02}), vec({-0.5}));
        std::ostringstream os;
        write_trajectory_csv(os, log);
        EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "t,u_1,mu_x_1,mu_x_2,var_x_1,var_x_2,htilde_1");

        std::ostringstream ts;
        write_timing_csv(ts, {10, 20});
        EXPECT_EQ(ts.str(), "step,wall_ns\n0,10\n1,20\n");

        RolloutLog rl;
        rl.t = {0.0};
        rl.states = {Matrix::Zero(2, 1)};
        std::ostringstream rs;
        write_rollouts_csv(rs, rl);
        EXPECT_EQ(rs.str().substr(0, rs.str().find('\n')), "rollout,t,x_1,x_2");
    }

    TEST(BenchIo, ScenarioJsonRoundTrip)
    {
        Scenario s = default_scenario(Benchmark::Chain);
        s.repr = Representation::MRSampling;
        s.method = PropagationMethod::stirling2();
        s.approx = ConstraintApprox::Chebyshev;
        s.chain_n = 5;
        s.seed = 99;
        s.rho0 = 3.5;
        const Scenario back = scenario_from_json(scenario_to_json(s), default_scenario(Benchmark::Cstr));
        EXPECT_EQ(scenario_to_json(back), scenario_to_json(s));
        EXPECT_EQ(back.chain_n, 5);
        EXPECT_EQ(back.repr, Representation::MRSampling);

        nlohmann::json bad = scenario_to_json(s);
        bad["not_a_key"] = 1;
        EXPECT_THROW(scenario_from_json(bad, s), ParameterError);
    }

    TEST(BenchIo, FlagParsing)
    {
        EXPECT_EQ(parse_repr_flag("mr-taylor"), Representation::MRTaylor);
        EXPECT_EQ(parse_approx_flag("symmetric"), ConstraintApprox::Symmetric);
        EXPECT_EQ(method_flag(parse_method_flag("stirling2")), "stirling2");
        EXPECT_THROW(parse_repr_flag("xx"), ParameterError);
        EXPECT_THROW(parse_benchmark("tank"), ParameterError);
        EXPECT_EQ(parse_benchmark("watertank"), Benchmark::WaterTank);
    }

    TEST(BenchScenario, Validation)
    {
        Scenario s = default_scenario(Benchmark::Cstr);
        EXPECT_NO_THROW(s.validate());
        s.duration = 1.05 * s.dt;
        EXPECT_THROW(s.validate(), ParameterError);
        s = default_scenario(Benchmark::Cstr);
        s.grid_points = 1;
        EXPECT_THROW(s.validate(), ParameterError);
        s = default_scenario(Benchmark::Chain);
        s.open_loop = true;
        EXPECT_THROW(s.validate(), ParameterError);
        s = default_scenario(Benchmark::Cstr);
        s.repr = Representation::SR;
        s.method = PropagationMethod::taylor();
        EXPECT_THROW(s.validate(), ParameterError);
    }

    TEST(BenchScenario, MedianStepIgnoresWarmupAndOutliers)
    {
        RunResult r;
        r.scenario.warmup = 2;
        r.wall_ns = {900'000'000, 900'000'000, 1'000'000, 3'000'000, 2'000'000, 500'000'000};
        EXPECT_DOUBLE_EQ(r.median_step_ms(), 2.5);
        EXPECT_DOUBLE_EQ(r.mean_step_ms(), 126.5);
        r.wall_ns.resize(2);
        EXPECT_TRUE(std::isnan(r.median_step_ms()));
    }

    TEST(BenchScenario, BenchmarkProblemDimensions)
    {
        for (Benchmark b : all_benchmarks())
        {
            Scenario s = default_scenario(b);
            if (b == Benchmark::Chain)
                s.chain_n = 3;
            const StochasticProblem p = benchmark_problem(s);
            EXPECT_NO_THROW(p.validate()) << to_string(b);
            EXPECT_EQ(p.x0.dim(), p.model->nx()) << to_string(b);
            EXPECT_EQ(p.model->name(), to_string(b));
            EXPECT_EQ(p.gp != nullptr, b == Benchmark::WaterTank);
        }
        Scenario s = default_scenario(Benchmark::Chain);
        s.chain_n = 3;
        EXPECT_EQ(benchmark_problem(s).model->nx(), 15);
    }

    TEST(BenchScenario, RunsAreBitReproducible)
    {
        Scenario s = default_scenario(Benchmark::Cstr);
        s.duration = 10 * s.dt;
        s.rollouts = 2;
        const RunResult a = run_cstr(s), b = run_cstr(s);
        std::ostringstream ta, tb, ra, rb;
        write_trajectory_csv(ta, a.trajectory);
        write_trajectory_csv(tb, b.trajectory);
        write_rollouts_csv(ra, a.rollouts);
        write_rollouts_csv(rb, b.rollouts);
        EXPECT_EQ(ta.str(), tb.str());
        EXPECT_EQ(ra.str(), rb.str());
        EXPECT_EQ(a.rollouts.states.size(), 2u);

        s.seed = 2;
        const RunResult c = run_cstr(s);
        std::ostringstream rc;
        write_rollouts_csv(rc, c.rollouts);
        EXPECT_NE(ra.str(), rc.str());
    }

    TEST(BenchScenario, SkipsOversizedQuadrature)
    {
        Scenario s = default_scenario(Benchmark::Chain);
        s.chain_n = 4;
        s.method = PropagationMethod::quadrature(3);
        const RunResult r = run_chain(s);
        EXPECT_TRUE(r.skipped);
        ASSERT_FALSE(r.diagnostics.empty());
    }
} // namespace smpc::bench
