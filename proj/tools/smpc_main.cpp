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

// smpc: command-line front end for the benchmark scenarios.

#include "smpc/bench/io.hpp"
#include "smpc/bench/scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace
{
    constexpr int kConfigError = 2;
    constexpr int kSolverError = 3;

    struct RunFlags
    {
        std::string benchmark, config, repr, method, approx, out;
        std::uint64_t seed = 0;
        int rollouts = 0, chain_n = 0, gp_points = 0;
        double noise_var = 0.0;
        bool open_loop = false;
    };

    smpc::bench::Scenario resolve(const RunFlags &f, const CLI::App &run)
    {
        using namespace smpc::bench;
        nlohmann::json cfg = nlohmann::json::object();
        if (!f.config.empty())
        {
            std::ifstream in(f.config);
            if (!in)
                throw smpc::ParameterError("cannot read config file '" + f.config + "'");
            try
            {
                in >> cfg;
            }
            catch (const nlohmann::json::exception &e)
            {
                throw smpc::ParameterError(std::string("config: ") + e.what());
            }
        }
        std::string name = f.benchmark;
        if (name.empty())
        {
            if (!cfg.contains("problem"))
                throw smpc::ParameterError("no benchmark given (positional argument or \"problem\" in the config)");
            name = cfg["problem"].get<std::string>();
        }
        const Benchmark b = parse_benchmark(name);
        Scenario s = scenario_from_json(cfg, default_scenario(b));
        s.problem = b;
        auto given = [&](const char *opt) { return run.count(opt) > 0; };
        if (given("--repr"))
            s.repr = parse_repr_flag(f.repr);
        if (given("--method"))
            s.method = parse_method_flag(f.method);
        if (given("--approx"))
            s.approx = parse_approx_flag(f.approx);
        if (given("--seed"))
            s.seed = f.seed;
        if (given("--rollouts"))
            s.rollouts = f.rollouts;
        if (given("--out"))
            s.out_dir = f.out;
        if (given("--chain-n"))
            s.chain_n = f.chain_n;
        if (given("--gp-points"))
            s.gp_points = f.gp_points;
        if (given("--noise-var"))
            s.noise_var = f.noise_var;
        if (given("--open-loop"))
            s.open_loop = f.open_loop;
        if (s.repr == smpc::Representation::MRTaylor)
            s.method = smpc::PropagationMethod::taylor();
        s.validate();
        return s;
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Stochastic MPC benchmarks"};
    app.require_subcommand(1);
    RunFlags f;

    CLI::App *list = app.add_subcommand("list", "List the available scenarios");
    CLI::App *run = app.add_subcommand("run", "Run one scenario");
    run->add_option("benchmark", f.benchmark, "cstr | chain | watertank | pendulum");
    run->add_option("--config", f.config, "JSON file mirroring the flags (flags win)");
    run->add_option("--repr", f.repr, "sr | mr-taylor | mr-sampling");
    run->add_option("--method", f.method, "taylor | stirling1 | stirling2 | ut | quad | mc | pce");
    run->add_option("--approx", f.approx, "chebyshev | symmetric | gaussian");
    run->add_option("--seed", f.seed, "RNG seed");
    run->add_option("--rollouts", f.rollouts, "Monte-Carlo truth rollouts");
    run->add_option("--out", f.out, "Output directory");
    run->add_option("--chain-n", f.chain_n, "Chain elements (chain)");
    run->add_option("--gp-points", f.gp_points, "GP data points (watertank)");
    run->add_option("--noise-var", f.noise_var, "Measurement / GP data noise variance");
    run->add_flag("--open-loop", f.open_loop, "Single converged solve plus truth rollouts (cstr)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kConfigError;
    }

    if (*list)
    {
        for (auto b : smpc::bench::all_benchmarks())
            std::cout << smpc::bench::to_string(b) << "\t" << smpc::bench::describe(b) << "\n";
        return 0;
    }

    smpc::bench::Scenario s;
    try
    {
        s = resolve(f, *run);
    }
    catch (const std::exception &e)
    {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kConfigError;
    }

    try
    {
        const smpc::bench::RunResult r = smpc::bench::run_scenario(s);
        for (const auto &d : r.diagnostics)
            std::cerr << "note: " << d << "\n";
        if (!s.out_dir.empty())
            smpc::bench::write_outputs(s.out_dir, r);
        nlohmann::json summary;
        summary["scenario"] = smpc::bench::scenario_to_json(s);
        summary["skipped"] = r.skipped;
        summary["stats"] = r.stats;
        std::cout << summary.dump(2) << "\n";
        return 0;
    }
    catch (const smpc::ParameterError &e)
    {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kConfigError;
    }
    catch (const smpc::UnsupportedError &e)
    {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kConfigError;
    }
    catch (const smpc::MissingDerivativeError &e)
    {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kConfigError;
    }
    catch (const smpc::FamilyMismatchError &e)
    {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kConfigError;
    }
    catch (const std::exception &e)
    {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kSolverError;
    }
}
