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

#include "smpc/bench/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace smpc::bench
{
    std::string format_double(double v)
    {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

    Representation parse_repr_flag(const std::string &s)
    {
        if (s == "sr")
            return Representation::SR;
        if (s == "mr-taylor")
            return Representation::MRTaylor;
        if (s == "mr-sampling")
            return Representation::MRSampling;
        throw ParameterError("unknown representation '" + s + "' (expected sr, mr-taylor or mr-sampling)");
    }

    std::string repr_flag(Representation r)
    {
        switch (r)
        {
        case Representation::SR: return "sr";
        case Representation::MRTaylor: return "mr-taylor";
        case Representation::MRSampling: return "mr-sampling";
        }
        return "?";
    }

    PropagationMethod parse_method_flag(const std::string &s)
    {
        if (s == "taylor")
            return PropagationMethod::taylor();
        if (s == "stirling1")
            return PropagationMethod::stirling1();
        if (s == "stirling2")
            return PropagationMethod::stirling2();
        if (s == "ut")
            return PropagationMethod::unscented();
        if (s == "quad")
            return PropagationMethod::quadrature(3);
        if (s == "mc")
            return PropagationMethod::monte_carlo(1000);
        if (s == "pce")
            return PropagationMethod::pce(2, 3);
        throw ParameterError("unknown method '" + s + "' (expected taylor, stirling1, stirling2, ut, quad, mc or pce)");
    }

    std::string method_flag(const PropagationMethod &m)
    {
        switch (m.kind)
        {
        case MethodKind::Taylor1: return "taylor";
        case MethodKind::Stirling1: return "stirling1";
        case MethodKind::Stirling2: return "stirling2";
        case MethodKind::Unscented: return "ut";
        case MethodKind::GaussQuadrature: return "quad";
        case MethodKind::MonteCarlo: return "mc";
        case MethodKind::PCE: return "pce";
        }
        return "?";
    }

    ConstraintApprox parse_approx_flag(const std::string &s)
    {
        if (s == "chebyshev")
            return ConstraintApprox::Chebyshev;
        if (s == "symmetric")
            return ConstraintApprox::Symmetric;
        if (s == "gaussian")
            return ConstraintApprox::Gaussian;
        throw ParameterError("unknown approximation '" + s + "' (expected chebyshev, symmetric or gaussian)");
    }

    std::string approx_flag(ConstraintApprox a)
    {
        switch (a)
        {
        case ConstraintApprox::Chebyshev: return "chebyshev";
        case ConstraintApprox::Symmetric: return "symmetric";
        case ConstraintApprox::Gaussian: return "gaussian";
        }
        return "?";
    }

    nlohmann::json scenario_to_json(const Scenario &s)
    {
        nlohmann::json j;
        j["problem"] = to_string(s.problem);
        j["repr"] = repr_flag(s.repr);
        j["method"] = method_flag(s.method);
        j["method_params"] = {{"alpha", s.method.alpha},
                              {"beta", s.method.beta},
                              {"h", s.method.h},
                              {"order", s.method.order},
                              {"pce_order", s.method.pce_order},
                              {"samples", s.method.samples}};
        if (s.method.kappa)
            j["method_params"]["kappa"] = *s.method.kappa;
        j["approx"] = approx_flag(s.approx);
        j["open_loop"] = s.open_loop;
        j["duration"] = s.duration;
        j["dt"] = s.dt;
        j["horizon"] = s.horizon;
        j["grid_points"] = s.grid_points;
        j["outer_iterations"] = s.outer_iterations;
        j["inner_iterations"] = s.inner_iterations;
        j["rho0"] = s.rho0;
        j["seed"] = s.seed;
        j["rollouts"] = s.rollouts;
        j["out"] = s.out_dir;
        j["chain_n"] = s.chain_n;
        j["gp_points"] = s.gp_points;
        j["noise_var"] = s.noise_var;
        j["warmup"] = s.warmup;
        return j;
    }

    Scenario scenario_from_json(const nlohmann::json &j, Scenario s)
    {
        if (!j.is_object())
            throw ParameterError("config: expected a JSON object");
        try
        {
            for (auto it = j.begin(); it != j.end(); ++it)
            {
                const std::string &k = it.key();
                const auto &v = it.value();
                if (k == "problem")
                    s.problem = parse_benchmark(v.get<std::string>());
                else if (k == "repr")
                    s.repr = parse_repr_flag(v.get<std::string>());
                else if (k == "method")
                    s.method = parse_method_flag(v.get<std::string>());
                else if (k == "approx")
                    s.approx = parse_approx_flag(v.get<std::string>());
                else if (k == "open_loop")
                    s.open_loop = v.get<bool>();
                else if (k == "duration")
                    s.duration = v.get<double>();
                else if (k == "dt")
                    s.dt = v.get<double>();
                else if (k == "horizon")
                    s.horizon = v.get<double>();
                else if (k == "grid_points")
                    s.grid_points = v.get<int>();
                else if (k == "outer_iterations")
                    s.outer_iterations = v.get<int>();
                else if (k == "inner_iterations")
                    s.inner_iterations = v.get<int>();
                else if (k == "rho0")
                    s.rho0 = v.get<double>();
                else if (k == "seed")
                    s.seed = v.get<std::uint64_t>();
                else if (k == "rollouts")
                    s.rollouts = v.get<int>();
                else if (k == "out")
                    s.out_dir = v.get<std::string>();
                else if (k == "chain_n")
                    s.chain_n = v.get<int>();
                else if (k == "gp_points")
                    s.gp_points = v.get<int>();
                else if (k == "noise_var")
                    s.noise_var = v.get<double>();
                else if (k == "warmup")
                    s.warmup = v.get<int>();
                else if (k == "method_params")
                {
                    for (auto p = v.begin(); p != v.end(); ++p)
                    {
                        const std::string &pk = p.key();
                        if (pk == "alpha")
                            s.method.alpha = p.value().get<double>();
                        else if (pk == "beta")
                            s.method.beta = p.value().get<double>();
                        else if (pk == "kappa")
                            s.method.kappa = p.value().get<double>();
                        else if (pk == "h")
                            s.method.h = p.value().get<double>();
                        else if (pk == "order")
                            s.method.order = p.value().get<int>();
                        else if (pk == "pce_order")
                            s.method.pce_order = p.value().get<int>();
                        else if (pk == "samples")
                            s.method.samples = p.value().get<long>();
                        else
                            throw ParameterError("config: unknown method parameter '" + pk + "'");
                    }
                }
                else
                    throw ParameterError("config: unknown key '" + k + "'");
            }
        }
        catch (const nlohmann::json::exception &e)
        {
            throw ParameterError(std::string("config: ") + e.what());
        }
        return s;
    }

    void write_trajectory_csv(std::ostream &os, const TrajectoryLog &log)
    {
        os << "t";
        for (Index i = 1; i <= log.nu; ++i)
            os << ",u_" << i;
        for (Index i = 1; i <= log.nx; ++i)
            os << ",mu_x_" << i;
        for (Index i = 1; i <= log.nx; ++i)
            os << ",var_x_" << i;
        for (Index i = 1; i <= log.nh; ++i)
            os << ",htilde_" << i;
        os << '\n';
        for (std::size_t k = 0; k < log.t.size(); ++k)
        {
            os << format_double(log.t[k]);
            for (const Vector *v : {&log.u[k], &log.mean[k], &log.var[k], &log.htilde[k]})
                for (Index i = 0; i < v->size(); ++i)
                    os << ',' << format_double((*v)(i));
            os << '\n';
        }
    }

    void write_rollouts_csv(std::ostream &os, const RolloutLog &log)
    {
        const Index nx = log.states.empty() ? 0 : log.states.front().rows();
        os << "rollout,t";
        for (Index i = 1; i <= nx; ++i)
            os << ",x_" << i;
        os << '\n';
        for (std::size_t r = 0; r < log.states.size(); ++r)
        {
            const Matrix &m = log.states[r];
            for (Index k = 0; k < m.cols(); ++k)
            {
                os << r << ',' << format_double(log.t[static_cast<std::size_t>(k)]);
                for (Index i = 0; i < nx; ++i)
                    os << ',' << format_double(m(i, k));
                os << '\n';
            }
        }
    }

    void write_timing_csv(std::ostream &os, const std::vector<std::int64_t> &wall_ns)
    {
        os << "step,wall_ns\n";
        for (std::size_t k = 0; k < wall_ns.size(); ++k)
            os << k << ',' << wall_ns[k] << '\n';
    }

    void write_outputs(const std::string &dir, const RunResult &r)
    {
        namespace fs = std::filesystem;
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec)
            throw ParameterError("cannot create output directory '" + dir + "': " + ec.message());
        auto open = [&](const char *name) {
            std::ofstream f(fs::path(dir) / name);
            if (!f)
                throw ParameterError("cannot write '" + (fs::path(dir) / name).string() + "'");
            return f;
        };
        {
            auto f = open("trajectory.csv");
            write_trajectory_csv(f, r.trajectory);
        }
        {
            auto f = open("rollouts.csv");
            write_rollouts_csv(f, r.rollouts);
        }
        {
            auto f = open("timing.csv");
            write_timing_csv(f, r.wall_ns);
        }
        nlohmann::json meta;
        meta["scenario"] = scenario_to_json(r.scenario);
        meta["skipped"] = r.skipped;
        meta["stats"] = r.stats;
        meta["diagnostics"] = r.diagnostics;
        auto f = open("meta.json");
        f << meta.dump(2) << '\n';
    }
} // namespace smpc::bench
