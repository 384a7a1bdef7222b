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

#include "smpc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace smpc
{
    void SolverConfig::validate() const
    {
        if (grid_points < 2)
            throw ParameterError("solver: grid_points must be >= 2");
        if (outer_iterations < 1 || inner_iterations < 1)
            throw ParameterError("solver: iteration budgets must be >= 1");
        if (!(rho0 > 0.0) || !(rho_growth > 1.0))
            throw ParameterError("solver: need rho0 > 0 and growth factor > 1");
        if (!(contraction > 0.0 && contraction < 1.0) || !(armijo > 0.0 && armijo < 1.0))
            throw ParameterError("solver: line-search constants must lie in (0,1)");
    }

    Matrix clamp_controls(const Matrix &u, const Vector &u_min, const Vector &u_max)
    {
        Matrix out(u.rows(), u.cols());
        for (Index k = 0; k < u.cols(); ++k)
            out.col(k) = u.col(k).cwiseMax(u_min).cwiseMin(u_max);
        return out;
    }

    Vector interpolate(const Vector &grid_t, const Matrix &values, double t)
    {
        const Index n = grid_t.size();
        if (n == 0)
            return Vector();
        if (t <= grid_t(0))
            return values.col(0);
        if (t >= grid_t(n - 1))
            return values.col(n - 1);
        const double dt = (grid_t(n - 1) - grid_t(0)) / static_cast<double>(n - 1);
        Index k = std::min<Index>(static_cast<Index>((t - grid_t(0)) / dt), n - 2);
        while (k > 0 && grid_t(k) > t)
            --k;
        while (k < n - 2 && grid_t(k + 1) < t)
            ++k;
        const double s = (t - grid_t(k)) / (grid_t(k + 1) - grid_t(k));
        return (1.0 - s) * values.col(k) + s * values.col(k + 1);
    }

    Matrix integrate_forward(DeterministicProblem &problem, const Matrix &u, const Vector &x0)
    {
        const Index n = u.cols();
        if (n < 2)
            throw ParameterError("integrate_forward: need at least 2 grid points");
        const double dt = problem.horizon() / static_cast<double>(n - 1);
        const Index nx = x0.size();
        Matrix x(nx, n);
        x.col(0) = x0;
        Vector k1(nx), k2(nx), z(nx);
        for (Index k = 0; k + 1 < n; ++k)
        {
            const double t = problem.t0() + dt * static_cast<double>(k);
            problem.dynamics(x.col(k), u.col(k), t, k1);
            if (!k1.allFinite())
                throw IntegrationError("integrate_forward: non-finite dynamics at t = " + std::to_string(t), t);
            z = x.col(k) + dt * k1;
            problem.dynamics(z, u.col(k + 1), t + dt, k2);
            if (!k2.allFinite())
                throw IntegrationError("integrate_forward: non-finite dynamics at t = " + std::to_string(t + dt),
                                       t + dt);
            x.col(k + 1) = x.col(k) + 0.5 * dt * (k1 + k2);
        }
        return x;
    }

    namespace
    {
        inline double al_term(double h, double lam, double rho)
        {
            const double a = std::max(0.0, lam + rho * h);
            return (a * a - lam * lam) / (2.0 * rho);
        }
    } // namespace

    AugmentedObjective::AugmentedObjective(DeterministicProblem &problem, int grid_points)
        : p_(problem), n_(grid_points)
    {
        dt_ = problem.horizon() / static_cast<double>(n_ - 1);
        t_.resize(n_);
        c_.resize(n_);
        for (int k = 0; k < n_; ++k)
        {
            t_(k) = problem.t0() + dt_ * k;
            c_(k) = (k == 0 || k == n_ - 1) ? 0.5 * dt_ : dt_;
        }
        const Index nx = problem.state_dim(), nu = problem.control_dim();
        x_.resize(nx, n_);
        z_.resize(nx, n_);
        h_.resize(problem.num_path(), n_);
        ht_.resize(problem.num_terminal());
        k1_.resize(nx);
        k2_.resize(nx);
        lam_.resize(nx);
        w_.resize(nx);
        gx_.resize(nx);
        gx2_.resize(nx);
        gu_.resize(nu);
        gu2_.resize(nu);
        wh_.resize(std::max(problem.num_path(), problem.num_terminal()));
    }

    double AugmentedObjective::value(const Matrix &u, const Matrix &mult_path, const Vector &rho_path,
                                     const Vector &mult_terminal, const Vector &rho_terminal)
    {
        x_.col(0) = p_.initial_state();
        for (int k = 0; k + 1 < n_; ++k)
        {
            p_.dynamics(x_.col(k), u.col(k), t_(k), k1_);
            if (!k1_.allFinite())
                throw IntegrationError("non-finite dynamics at t = " + std::to_string(t_(k)), t_(k));
            z_.col(k) = x_.col(k) + dt_ * k1_;
            p_.dynamics(z_.col(k), u.col(k + 1), t_(k + 1), k2_);
            if (!k2_.allFinite())
                throw IntegrationError("non-finite dynamics at t = " + std::to_string(t_(k + 1)), t_(k + 1));
            x_.col(k + 1) = x_.col(k) + 0.5 * dt_ * (k1_ + k2_);
        }
        double cost = 0.0, aug = 0.0;
        const Index nh = p_.num_path(), nt = p_.num_terminal();
        for (int k = 0; k < n_; ++k)
        {
            cost += c_(k) * p_.stage_cost(x_.col(k), u.col(k), t_(k));
            if (nh > 0)
            {
                p_.path_constraints(x_.col(k), u.col(k), t_(k), h_.col(k));
                for (Index j = 0; j < nh; ++j)
                    aug += c_(k) * al_term(h_(j, k), mult_path(j, k), rho_path(j));
            }
        }
        cost += p_.terminal_cost(x_.col(n_ - 1), t_(n_ - 1));
        if (nt > 0)
        {
            p_.terminal_constraints(x_.col(n_ - 1), t_(n_ - 1), ht_);
            for (Index j = 0; j < nt; ++j)
                aug += al_term(ht_(j), mult_terminal(j), rho_terminal(j));
        }
        cost_ = cost;
        const double ja = cost + aug;
        if (!std::isfinite(ja))
            throw IntegrationError("non-finite objective", t_(n_ - 1));
        return ja;
    }

    void AugmentedObjective::gradient(const Matrix &u, const Matrix &mult_path, const Vector &rho_path,
                                      const Vector &mult_terminal, const Vector &rho_terminal, Matrix &grad)
    {
        const Index nh = p_.num_path(), nt = p_.num_terminal();
        grad.setZero(u.rows(), u.cols());
        const int last = n_ - 1;
        // terminal terms
        p_.terminal_cost_gradient(x_.col(last), t_(last), lam_);
        if (nt > 0)
        {
            for (Index j = 0; j < nt; ++j)
                wh_(j) = std::max(0.0, mult_terminal(j) + rho_terminal(j) * ht_(j));
            p_.terminal_constraints_vjp(x_.col(last), t_(last), wh_.head(nt), gx_);
            lam_ += gx_;
        }
        auto stage = [&](int k) {
            p_.stage_cost_gradient(x_.col(k), u.col(k), t_(k), gx_, gu_);
            lam_ += c_(k) * gx_;
            grad.col(k) += c_(k) * gu_;
            if (nh > 0)
            {
                bool any = false;
                for (Index j = 0; j < nh; ++j)
                {
                    wh_(j) = c_(k) * std::max(0.0, mult_path(j, k) + rho_path(j) * h_(j, k));
                    any = any || wh_(j) != 0.0;
                }
                if (any)
                {
                    p_.path_constraints_vjp(x_.col(k), u.col(k), t_(k), wh_.head(nh), gx_, gu_);
                    lam_ += gx_;
                    grad.col(k) += gu_;
                }
            }
        };
        stage(last);
        for (int k = last - 1; k >= 0; --k)
        {
            // lam_ holds dJ/dx_{k+1}
            w_ = (0.5 * dt_) * lam_;
            p_.dynamics_vjp(z_.col(k), u.col(k + 1), t_(k + 1), w_, gx2_, gu2_);
            grad.col(k + 1) += gu2_;
            w_ += dt_ * gx2_;
            p_.dynamics_vjp(x_.col(k), u.col(k), t_(k), w_, gx_, gu_);
            grad.col(k) += gu_;
            lam_ += gx2_ + gx_;
            stage(k);
        }
    }

    SolveResult solve_ocp(DeterministicProblem &problem, const SolverConfig &config, const SolveResult *warm)
    {
        config.validate();
        const int n = config.grid_points;
        const Index nu = problem.control_dim(), nh = problem.num_path(), nt = problem.num_terminal();
        const Vector &umin = problem.u_min(), &umax = problem.u_max();

        SolveResult r;
        Matrix u(nu, n);
        const bool warm_ok = warm && warm->u.rows() == nu && warm->u.cols() == n;
        if (warm_ok)
        {
            u = clamp_controls(warm->u, umin, umax);
        }
        else
        {
            Vector u0(nu);
            for (Index i = 0; i < nu; ++i)
            {
                if (std::isfinite(umin(i)) && std::isfinite(umax(i)))
                    u0(i) = 0.5 * (umin(i) + umax(i));
                else
                    u0(i) = std::clamp(0.0, umin(i), umax(i));
            }
            u = u0.replicate(1, n);
        }
        r.mult_path = Matrix::Zero(nh, n);
        r.mult_terminal = Vector::Zero(nt);
        r.rho_path = Vector::Constant(nh, config.rho0);
        r.rho_terminal = Vector::Constant(nt, config.rho0);
        double step = 0.0;
        if (warm_ok)
        {
            if (warm->mult_path.rows() == nh && warm->mult_path.cols() == n)
                r.mult_path = warm->mult_path;
            if (warm->mult_terminal.size() == nt)
                r.mult_terminal = warm->mult_terminal;
            if (warm->rho_path.size() == nh)
                r.rho_path = warm->rho_path;
            if (warm->rho_terminal.size() == nt)
                r.rho_terminal = warm->rho_terminal;
            step = warm->step;
        }
        double range = 0.0;
        for (Index i = 0; i < nu; ++i)
            if (std::isfinite(umax(i) - umin(i)))
                range = std::max(range, umax(i) - umin(i));
        if (range == 0.0)
            range = 1.0;

        AugmentedObjective obj(problem, n);
        auto grid_max = [&](Vector &pm, Vector &tm) {
            pm = nh > 0 ? Vector(obj.path_values().rowwise().maxCoeff()) : Vector();
            tm = obj.terminal_values();
        };

        double ja = obj.value(u, r.mult_path, r.rho_path, r.mult_terminal, r.rho_terminal);
        Vector prev_path, prev_term;
        grid_max(prev_path, prev_term);
        Matrix g, g_new, du, dg;
        bool have_bb = false;
        for (int outer = 0; outer < config.outer_iterations; ++outer)
        {
            if (outer > 0)
                ja = obj.value(u, r.mult_path, r.rho_path, r.mult_terminal, r.rho_terminal);
            obj.gradient(u, r.mult_path, r.rho_path, r.mult_terminal, r.rho_terminal, g);
            have_bb = false;
            for (int inner = 0; inner < config.inner_iterations; ++inner)
            {
                const Matrix pg = u - clamp_controls(u - g, umin, umax);
                const double pgn = pg.size() ? pg.cwiseAbs().maxCoeff() : 0.0;
                if (pgn == 0.0 || (config.converge && pgn <= config.tol))
                    break;
                double s = 0.0;
                if (have_bb)
                {
                    const double num = du.squaredNorm(), den = (du.array() * dg.array()).sum();
                    if (den > 0.0 && std::isfinite(num / den))
                        s = num / den;
                }
                if (!(s > 0.0))
                    s = step > 0.0 ? step : 0.1 * range / std::max(g.cwiseAbs().maxCoeff(), 1e-300);
                bool accepted = false;
                Matrix ut;
                double jt = 0.0;
                for (int h = 0; h <= config.max_halvings; ++h)
                {
                    ut = clamp_controls(u - s * g, umin, umax);
                    const double decrease = (g.array() * (ut - u).array()).sum();
                    try
                    {
                        jt = obj.value(ut, r.mult_path, r.rho_path, r.mult_terminal, r.rho_terminal);
                    }
                    catch (const IntegrationError &)
                    {
                        jt = std::numeric_limits<double>::infinity();
                    }
                    catch (const IndefiniteCovarianceError &)
                    {
                        jt = std::numeric_limits<double>::infinity();
                    }
                    catch (const PropagationError &)
                    {
                        jt = std::numeric_limits<double>::infinity();
                    }
                    if (jt <= ja + config.armijo * decrease)
                    {
                        accepted = true;
                        break;
                    }
                    s *= config.contraction;
                }
                if (!accepted)
                {
                    r.stalled = true;
                    ja = obj.value(u, r.mult_path, r.rho_path, r.mult_terminal, r.rho_terminal);
                    break;
                }
                du = ut - u;
                u = ut;
                ja = jt;
                step = s;
                obj.gradient(u, r.mult_path, r.rho_path, r.mult_terminal, r.rho_terminal, g_new);
                dg = g_new - g;
                g.swap(g_new);
                have_bb = true;
                ++r.iterations;
                r.history.push_back(ja);
            }
            // objective state corresponds to u here; update multipliers and penalties
            const Matrix &hv = obj.path_values();
            for (int k = 0; k < n; ++k)
                for (Index j = 0; j < nh; ++j)
                    r.mult_path(j, k) = std::max(0.0, r.mult_path(j, k) + r.rho_path(j) * hv(j, k));
            for (Index j = 0; j < nt; ++j)
                r.mult_terminal(j) =
                    std::max(0.0, r.mult_terminal(j) + r.rho_terminal(j) * obj.terminal_values()(j));
            Vector pm, tm;
            grid_max(pm, tm);
            double viol = -std::numeric_limits<double>::infinity();
            for (Index j = 0; j < nh; ++j)
            {
                if (pm(j) > 0.0 && pm(j) > 0.9 * std::max(prev_path(j), 0.0))
                    r.rho_path(j) = std::min(config.rho_max, r.rho_path(j) * config.rho_growth);
                viol = std::max(viol, pm(j));
            }
            for (Index j = 0; j < nt; ++j)
            {
                if (tm(j) > 0.0 && tm(j) > 0.9 * std::max(prev_term(j), 0.0))
                    r.rho_terminal(j) = std::min(config.rho_max, r.rho_terminal(j) * config.rho_growth);
                viol = std::max(viol, tm(j));
            }
            r.violation.push_back(viol);
            prev_path = pm;
            prev_term = tm;
        }
        r.t = obj.times();
        r.u = u;
        r.x = obj.states();
        r.cost = obj.plain_cost();
        r.augmented = ja;
        grid_max(r.max_path, r.terminal);
        r.step = step;
        return r;
    }

    SolveResult shift_solution(const SolveResult &prev, double dt)
    {
        SolveResult s = prev;
        const Index n = prev.t.size();
        for (Index k = 0; k < n; ++k)
        {
            const double tk = prev.t(k) + dt;
            s.u.col(k) = interpolate(prev.t, prev.u, tk);
            if (prev.mult_path.rows() > 0)
                s.mult_path.col(k) = interpolate(prev.t, prev.mult_path, tk);
        }
        s.t = prev.t.array() + dt;
        return s;
    }

    MpcController::MpcController(StochasticProblem base, ReformulationConfig reformulation, SolverConfig solver,
                                 double sample_time)
        : base_(std::move(base)), reform_(std::move(reformulation)), solver_(solver), dt_(sample_time)
    {
        base_.validate();
        solver_.validate();
        if (!(dt_ > 0.0))
            throw ParameterError("MpcController: sample time must be > 0");
    }

    Vector MpcController::step(const JointDistribution &x0, double t0, std::uint64_t step_index)
    {
        StochasticProblem prob = base_;
        prob.x0 = x0;
        prob.t0 = t0;
        ReformulationConfig rc = reform_;
        if (rc.method.kind == MethodKind::MonteCarlo)
            rc.method.seed = mix64(reform_.method.seed ^ mix64(step_index + 1));
        problem_ = reformulate(prob, rc);
        for (const auto &w : problem_->warnings())
            if (std::find(warnings_.begin(), warnings_.end(), w) == warnings_.end())
                warnings_.push_back(w);
        if (has_warm_)
        {
            const SolveResult warm = shift_solution(last_, t0 - last_.t(0));
            last_ = solve_ocp(*problem_, solver_, &warm);
        }
        else
        {
            last_ = solve_ocp(*problem_, solver_, nullptr);
        }
        has_warm_ = true;
        return last_.u.col(0);
    }

    Vector MpcController::control(double t) const
    {
        return interpolate(last_.t, last_.u, t);
    }
} // namespace smpc
