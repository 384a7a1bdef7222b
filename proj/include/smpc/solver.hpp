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

#ifndef SMPC_SOLVER_HPP_
#define SMPC_SOLVER_HPP_

#include "smpc/problem.hpp"
#include "smpc/reformulate.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace smpc
{
    struct SolverConfig
    {
        int grid_points = 20;     ///< N
        int outer_iterations = 2; ///< augmented-Lagrangian updates
        int inner_iterations = 2; ///< projected-gradient steps per outer iteration
        double rho0 = 1.0;
        double rho_growth = 5.0;  ///< gamma
        double rho_max = 1e9;
        double armijo = 1e-4;
        double contraction = 0.5;
        int max_halvings = 30;
        bool converge = false;    ///< stop inner loops once the projected gradient is below tol
        double tol = 1e-6;

        void validate() const;
    };

    struct SolveResult
    {
        Vector t;            ///< absolute grid times
        Matrix u;            ///< nu x N, piecewise linear in time
        Matrix x;            ///< state_dim x N
        double cost = 0.0;   ///< V + int l (without augmented terms)
        double augmented = 0.0;
        Vector max_path;     ///< grid maximum of each tightened path constraint
        Vector terminal;     ///< terminal constraint values
        Matrix mult_path;    ///< nh x N
        Vector mult_terminal;
        Vector rho_path, rho_terminal;
        double step = 0.0;   ///< last accepted step size
        int iterations = 0;
        bool stalled = false;
        std::vector<double> history;   ///< J_A after every accepted inner step
        std::vector<double> violation; ///< max constraint value after every outer iteration
    };

    /// Heun integration of x' = f(x, u(t), t) on the N-point grid; throws IntegrationError on NaN/Inf.
    Matrix integrate_forward(DeterministicProblem &problem, const Matrix &u, const Vector &x0);

    /// Box projection of every column.
    Matrix clamp_controls(const Matrix &u, const Vector &u_min, const Vector &u_max);

    /**
     * Evaluates J_A and its exact gradient w.r.t. the control nodes (discrete adjoint of the Heun
     * scheme with trapezoidal quadrature).
     */
    class AugmentedObjective
    {
    public:
        AugmentedObjective(DeterministicProblem &problem, int grid_points);

        double value(const Matrix &u, const Matrix &mult_path, const Vector &rho_path, const Vector &mult_terminal,
                     const Vector &rho_terminal);
        /// Gradient at the controls of the last value() call.
        void gradient(const Matrix &u, const Matrix &mult_path, const Vector &rho_path, const Vector &mult_terminal,
                      const Vector &rho_terminal, Matrix &grad);

        const Vector &times() const { return t_; }
        const Matrix &states() const { return x_; }
        const Matrix &path_values() const { return h_; }
        const Vector &terminal_values() const { return ht_; }
        double plain_cost() const { return cost_; }

    private:
        DeterministicProblem &p_;
        int n_;
        double dt_;
        Vector t_, c_;
        Matrix x_, z_, h_;
        Vector ht_;
        double cost_ = 0.0;
        Vector k1_, k2_, lam_, w_, gx_, gx2_, gu_, gu2_, wh_;
    };

    SolveResult solve_ocp(DeterministicProblem &problem, const SolverConfig &config,
                          const SolveResult *warm_start = nullptr);

    /// Time-shift a solution by dt (linear interpolation, last value held); multipliers likewise.
    SolveResult shift_solution(const SolveResult &previous, double dt);

    /// Interpolate a grid signal (rows x N) at absolute time t (held beyond the ends).
    Vector interpolate(const Vector &grid_t, const Matrix &values, double t);

    /**
     * Receding-horizon controller: every step rebuilds the deterministic problem from the current
     * distribution estimate, runs one budgeted solve warm-started from the shifted previous one and
     * returns the first control.
     */
    class MpcController
    {
    public:
        MpcController(StochasticProblem base, ReformulationConfig reformulation, SolverConfig solver,
                      double sample_time);

        /// x0: current state distribution at absolute time t0. Monte-Carlo seeds are step-indexed.
        Vector step(const JointDistribution &x0, double t0, std::uint64_t step_index);

        /// First-order hold: control at absolute time t from the last solution.
        Vector control(double t) const;

        const SolveResult &last() const { return last_; }
        DeterministicProblem *last_problem() { return problem_.get(); }
        const std::vector<std::string> &warnings() const { return warnings_; }
        void reset() { has_warm_ = false; }

    private:
        StochasticProblem base_;
        ReformulationConfig reform_;
        SolverConfig solver_;
        double dt_;
        std::unique_ptr<DeterministicProblem> problem_;
        SolveResult last_;
        bool has_warm_ = false;
        std::vector<std::string> warnings_;
    };
} // namespace smpc

#endif // SMPC_SOLVER_HPP_
