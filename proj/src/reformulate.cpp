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

#include "smpc/reformulate.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace smpc
{
    std::string to_string(Representation r)
    {
        switch (r)
        {
        case Representation::SR:
            return "sr";
        case Representation::MRTaylor:
            return "mr-taylor";
        case Representation::MRSampling:
            return "mr-sampling";
        }
        return "?";
    }

    Representation parse_representation(const std::string &s)
    {
        if (s == "sr")
            return Representation::SR;
        if (s == "mr-taylor")
            return Representation::MRTaylor;
        if (s == "mr-sampling")
            return Representation::MRSampling;
        throw ParameterError("unknown representation '" + s + "' (expected sr, mr-taylor or mr-sampling)");
    }

    Index moment_state_dim(Index nx, Index np)
    {
        return nx + nx * nx + nx * np;
    }

    Vector pack_moments(const Vector &mean, const Matrix &cov, const Matrix &cov_xp)
    {
        const Index nx = mean.size(), np = cov_xp.cols();
        Vector x(moment_state_dim(nx, np));
        x.head(nx) = mean;
        x.segment(nx, nx * nx) = Eigen::Map<const Vector>(cov.data(), nx * nx);
        if (np > 0)
            x.tail(nx * np) = Eigen::Map<const Vector>(cov_xp.data(), nx * np);
        return x;
    }

    namespace
    {
        constexpr double kSqrtEps = 1.4901161193847656e-08;

        inline double fd_step(double v)
        {
            return kSqrtEps * (1.0 + std::abs(v));
        }

        /// Model calls with Jacobian-based fallback for the vector-Jacobian product.
        class ModelOps
        {
        public:
            explicit ModelOps(std::shared_ptr<const SystemModel> m)
                : model(std::move(m)), nx(model->nx()), nu(model->nu()), np(model->np()), nh(model->num_path()),
                  nt(model->num_terminal()), jx(nx, nx), ju(nx, nu), jp(nx, np), hx(nh, nx), hu(nh, nu),
                  hp(nh, np), tx(nt, nx), tp(nt, np)
            {
            }

            void vjp(const ConstVectorRef &x, const ConstVectorRef &u, const ConstVectorRef &p, double t,
                     const ConstVectorRef &lam, VectorRef gx, VectorRef gu, VectorRef gp)
            {
                if (model->dynamics_vjp(x, u, p, t, lam, gx, gu, gp))
                    return;
                model->dynamics_jacobians(x, u, p, t, jx, ju, jp);
                gx.noalias() = jx.transpose() * lam;
                gu.noalias() = ju.transpose() * lam;
                if (np > 0)
                    gp.noalias() = jp.transpose() * lam;
            }

            std::shared_ptr<const SystemModel> model;
            Index nx, nu, np, nh, nt;
            Matrix jx, ju, jp, hx, hu, hp, tx, tp;
        };

        Vector z_vector(const Vector &alpha, ConstraintApprox approx)
        {
            Vector z(alpha.size());
            for (Index j = 0; j < alpha.size(); ++j)
                z(j) = z_coeff(approx, alpha(j));
            return z;
        }

        // ------------------------------------------------------------------ SR
        class SampledProblem final : public DeterministicProblem
        {
        public:
            SampledProblem(const StochasticProblem &prob, const PropagationMethod &method, ConstraintApprox approx,
                           ConstraintMode mode)
                : ops_(prob.model), mode_(mode)
            {
                const JointDistribution joint = stack(prob.x0, prob.p, prob.cov_x0p);
                ps_ = generate_points(method, joint);
                nx_ = ops_.nx;
                np_ = ops_.np;
                ns_ = ps_.size();
                x0_.resize(nx_ * ns_);
                Eigen::Map<Matrix>(x0_.data(), nx_, ns_) = ps_.points.topRows(nx_);
                params_ = ps_.points.bottomRows(np_);
                u_min_ = prob.u_min;
                u_max_ = prob.u_max;
                horizon_ = prob.horizon;
                t0_ = prob.t0;
                zp_ = z_vector(prob.alpha_path, approx);
                zt_ = z_vector(prob.alpha_terminal, approx);
                hvals_.resize(std::max<Index>(ops_.nh, 1), ns_);
                tvals_.resize(std::max<Index>(ops_.nt, 1), ns_);
                hbuf_.resize(ops_.nh);
                tbuf_.resize(ops_.nt);
                gx_.resize(nx_);
                gu_.resize(ops_.nu);
                gp_.resize(np_);
                coef_.resize(std::max<Index>(ops_.nh, ops_.nt), ns_);
                vgrad_.resize(ns_);
                cbuf_.resize(std::max<Index>(ops_.nh, ops_.nt));
                row_.resize(ns_);
                cvec_.resize(ns_);
            }

            Index state_dim() const override { return nx_ * ns_; }
            Index num_path() const override { return mode_ == ConstraintMode::PerSample ? ops_.nh * ns_ : ops_.nh; }
            Index num_terminal() const override
            {
                return mode_ == ConstraintMode::PerSample ? ops_.nt * ns_ : ops_.nt;
            }
            Index num_samples() const { return ns_; }
            void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

            void dynamics(const ConstVectorRef &x, const ConstVectorRef &u, double t, VectorRef out) override
            {
                for (Index i = 0; i < ns_; ++i)
                    ops_.model->dynamics(x.segment(i * nx_, nx_), u, params_.col(i), t, out.segment(i * nx_, nx_));
            }

            void dynamics_vjp(const ConstVectorRef &x, const ConstVectorRef &u, double t, const ConstVectorRef &lam,
                              VectorRef gx, VectorRef gu) override
            {
                gu.setZero();
                for (Index i = 0; i < ns_; ++i)
                {
                    ops_.vjp(x.segment(i * nx_, nx_), u, params_.col(i), t, lam.segment(i * nx_, nx_),
                             gx.segment(i * nx_, nx_), gu_, gp_);
                    gu += gu_;
                }
            }

            double stage_cost(const ConstVectorRef &x, const ConstVectorRef &u, double t) override
            {
                double c = 0.0;
                for (Index i = 0; i < ns_; ++i)
                    if (ps_.w_mean(i) != 0.0)
                        c += ps_.w_mean(i) * ops_.model->stage_cost(x.segment(i * nx_, nx_), u, params_.col(i), t);
                return c;
            }

            void stage_cost_gradient(const ConstVectorRef &x, const ConstVectorRef &u, double t, VectorRef gx,
                                     VectorRef gu) override
            {
                gu.setZero();
                for (Index i = 0; i < ns_; ++i)
                {
                    const double w = ps_.w_mean(i);
                    if (w == 0.0)
                    {
                        gx.segment(i * nx_, nx_).setZero();
                        continue;
                    }
                    ops_.model->stage_cost_gradient(x.segment(i * nx_, nx_), u, params_.col(i), t, gx_, gu_, gp_);
                    gx.segment(i * nx_, nx_) = w * gx_;
                    gu += w * gu_;
                }
            }

            double terminal_cost(const ConstVectorRef &x, double t) override
            {
                double c = 0.0;
                for (Index i = 0; i < ns_; ++i)
                    if (ps_.w_mean(i) != 0.0)
                        c += ps_.w_mean(i) * ops_.model->terminal_cost(x.segment(i * nx_, nx_), params_.col(i), t);
                return c;
            }

            void terminal_cost_gradient(const ConstVectorRef &x, double t, VectorRef gx) override
            {
                for (Index i = 0; i < ns_; ++i)
                {
                    const double w = ps_.w_mean(i);
                    if (w == 0.0)
                    {
                        gx.segment(i * nx_, nx_).setZero();
                        continue;
                    }
                    ops_.model->terminal_cost_gradient(x.segment(i * nx_, nx_), params_.col(i), t, gx_, gp_);
                    gx.segment(i * nx_, nx_) = w * gx_;
                }
            }

            void path_constraints(const ConstVectorRef &x, const ConstVectorRef &u, double t, VectorRef h) override
            {
                const Index nh = ops_.nh;
                if (nh == 0)
                    return;
                for (Index i = 0; i < ns_; ++i)
                {
                    ops_.model->path_constraints(x.segment(i * nx_, nx_), u, params_.col(i), t, hbuf_);
                    hvals_.col(i) = hbuf_;
                }
                reduce(hvals_.topRows(nh), zp_, h);
            }

            void path_constraints_vjp(const ConstVectorRef &x, const ConstVectorRef &u, double t,
                                      const ConstVectorRef &w, VectorRef gx, VectorRef gu) override
            {
                gu.setZero();
                gx.setZero();
                const Index nh = ops_.nh;
                if (nh == 0)
                    return;
                if (mode_ == ConstraintMode::MomentTightened)
                {
                    for (Index i = 0; i < ns_; ++i)
                    {
                        ops_.model->path_constraints(x.segment(i * nx_, nx_), u, params_.col(i), t, hbuf_);
                        hvals_.col(i) = hbuf_;
                    }
                    coefficients(hvals_.topRows(nh), zp_, w);
                }
                for (Index i = 0; i < ns_; ++i)
                {
                    auto c = cbuf_.head(nh);
                    if (mode_ == ConstraintMode::PerSample)
                        c = w.segment(i * nh, nh);
                    else
                        c = coef_.col(i).head(nh);
                    if (c.isZero(0.0))
                        continue;
                    ops_.model->path_constraints_jacobians(x.segment(i * nx_, nx_), u, params_.col(i), t, ops_.hx,
                                                           ops_.hu, ops_.hp);
                    gx.segment(i * nx_, nx_).noalias() = ops_.hx.transpose() * c;
                    gu.noalias() += ops_.hu.transpose() * c;
                }
            }

            void terminal_constraints(const ConstVectorRef &x, double t, VectorRef h) override
            {
                const Index nt = ops_.nt;
                if (nt == 0)
                    return;
                for (Index i = 0; i < ns_; ++i)
                {
                    ops_.model->terminal_constraints(x.segment(i * nx_, nx_), params_.col(i), t, tbuf_);
                    tvals_.col(i) = tbuf_;
                }
                reduce(tvals_.topRows(nt), zt_, h);
            }

            void terminal_constraints_vjp(const ConstVectorRef &x, double t, const ConstVectorRef &w,
                                          VectorRef gx) override
            {
                gx.setZero();
                const Index nt = ops_.nt;
                if (nt == 0)
                    return;
                if (mode_ == ConstraintMode::MomentTightened)
                {
                    for (Index i = 0; i < ns_; ++i)
                    {
                        ops_.model->terminal_constraints(x.segment(i * nx_, nx_), params_.col(i), t, tbuf_);
                        tvals_.col(i) = tbuf_;
                    }
                    coefficients(tvals_.topRows(nt), zt_, w);
                }
                for (Index i = 0; i < ns_; ++i)
                {
                    auto c = cbuf_.head(nt);
                    if (mode_ == ConstraintMode::PerSample)
                        c = w.segment(i * nt, nt);
                    else
                        c = coef_.col(i).head(nt);
                    if (c.isZero(0.0))
                        continue;
                    ops_.model->terminal_constraints_jacobians(x.segment(i * nx_, nx_), params_.col(i), t, ops_.tx,
                                                               ops_.tp);
                    gx.segment(i * nx_, nx_).noalias() = ops_.tx.transpose() * c;
                }
            }

            StateMoments moments(const ConstVectorRef &x) override
            {
                const Eigen::Map<const Matrix> xs(x.data(), nx_, ns_);
                StateMoments m;
                m.mean = estimate_mean(ps_, xs);
                m.var = estimate_cov(ps_, xs, m.mean).diagonal();
                return m;
            }

        private:
            // moment-tightened or per-sample constraint vector from the nh x Ns value matrix
            void reduce(const Eigen::Ref<const Matrix> &vals, const Vector &z, VectorRef h)
            {
                const Index nh = vals.rows();
                if (mode_ == ConstraintMode::PerSample)
                {
                    for (Index i = 0; i < ns_; ++i)
                        h.segment(i * nh, nh) = vals.col(i);
                    return;
                }
                for (Index j = 0; j < nh; ++j)
                {
                    row_ = vals.row(j).transpose();
                    const double mu = row_.dot(ps_.w_mean);
                    const double var = estimate_var1(ps_, row_, mu);
                    h(j) = tighten(mu, var, z(j));
                }
            }

            // coef_(j, i) = w_j * d htilde_j / d value_ji
            void coefficients(const Eigen::Ref<const Matrix> &vals, const Vector &z, const ConstVectorRef &w)
            {
                const Index nh = vals.rows();
                for (Index j = 0; j < nh; ++j)
                {
                    if (w(j) == 0.0)
                    {
                        coef_.row(j).setZero();
                        continue;
                    }
                    row_ = vals.row(j).transpose();
                    const double mu = row_.dot(ps_.w_mean);
                    const double var = estimate_var1(ps_, row_, mu);
                    cvec_ = ps_.w_mean;
                    if (var > 0.0 && z(j) != 0.0)
                    {
                        estimate_var1_gradient(ps_, row_, mu, vgrad_);
                        cvec_ += (z(j) / (2.0 * std::sqrt(var))) * vgrad_;
                    }
                    coef_.row(j) = w(j) * cvec_.transpose();
                }
            }

            ModelOps ops_;
            ConstraintMode mode_;
            PointSet ps_;
            Index nx_ = 0, np_ = 0, ns_ = 0;
            Matrix params_;
            Vector zp_, zt_;
            Matrix hvals_, tvals_, coef_;
            Vector hbuf_, tbuf_, gx_, gu_, gp_, vgrad_, cbuf_, row_, cvec_;
        };

        // ------------------------------------------------------------ MR base
        class MomentProblemBase : public DeterministicProblem
        {
        public:
            explicit MomentProblemBase(const StochasticProblem &prob) : ops_(prob.model)
            {
                nx_ = ops_.nx;
                np_ = ops_.np;
                nu_ = ops_.nu;
                mu_p_ = prob.p.mean();
                sigma_p_ = prob.p.covariance();
                sigma_w_ = prob.diffusion_cov();
                gp_ = prob.gp;
                const Matrix cxp = prob.cov_x0p.size() > 0 ? prob.cov_x0p : Matrix::Zero(nx_, np_);
                x0_ = pack_moments(prob.x0.mean(), prob.x0.covariance(), cxp);
                u_min_ = prob.u_min;
                u_max_ = prob.u_max;
                horizon_ = prob.horizon;
                t0_ = prob.t0;
                zp_ = z_vector(prob.alpha_path, prob.approx);
                zt_ = z_vector(prob.alpha_terminal, prob.approx);
                zbuf_.resize(nx_ + nu_);
                dmean_.resize(nx_);
                dvar_.resize(nx_);
                gjac_.resize(nx_, nx_ + nu_);
            }

            Index state_dim() const override { return moment_state_dim(nx_, np_); }
            Index num_path() const override { return ops_.nh; }
            Index num_terminal() const override { return ops_.nt; }

            StateMoments moments(const ConstVectorRef &x) override
            {
                StateMoments m;
                m.mean = x.head(nx_);
                m.var = Eigen::Map<const Matrix>(x.data() + nx_, nx_, nx_).diagonal();
                return m;
            }

        protected:
            Eigen::Map<const Matrix> sigma(const ConstVectorRef &x) const
            {
                return Eigen::Map<const Matrix>(x.data() + nx_, nx_, nx_);
            }
            Eigen::Map<const Matrix> sigma_xp(const ConstVectorRef &x) const
            {
                return Eigen::Map<const Matrix>(x.data() + nx_ + nx_ * nx_, nx_, np_);
            }

            /// GP mean and variance at z = [x; u] (zero without GP).
            void gp_eval(const ConstVectorRef &x, const ConstVectorRef &u)
            {
                if (!gp_)
                {
                    dmean_.setZero();
                    dvar_.setZero();
                    return;
                }
                zbuf_.head(nx_) = x;
                zbuf_.tail(nu_) = u;
                gp_->predict(zbuf_, dmean_, dvar_);
            }

            /// Add the GP mean Jacobian (d mu_d / d[x;u]) into jx / ju.
            void gp_jacobian(const ConstVectorRef &x, const ConstVectorRef &u, MatrixRef jx, MatrixRef ju)
            {
                if (!gp_)
                    return;
                zbuf_.head(nx_) = x;
                zbuf_.tail(nu_) = u;
                gp_->mean_jacobian(zbuf_, gjac_);
                jx += gjac_.leftCols(nx_);
                ju += gjac_.rightCols(nu_);
            }

            double gp_var_dot(const ConstVectorRef &x, const ConstVectorRef &u, const Vector &weights)
            {
                gp_eval(x, u);
                return weights.dot(dvar_);
            }

            /// Add d/d(mu,u) of sum_i weights_i * Sigma_d,i(mu,u) by central differences.
            void gp_var_fd(const ConstVectorRef &mu, const ConstVectorRef &u, const Vector &weights, VectorRef gmu,
                           VectorRef gu)
            {
                if (!gp_ || weights.cwiseAbs().maxCoeff() == 0.0)
                    return;
                Vector m = mu, uu = u;
                for (Index k = 0; k < nx_; ++k)
                {
                    const double h = fd_step(m(k)), v = m(k);
                    m(k) = v + h;
                    const double fp = gp_var_dot(m, uu, weights);
                    m(k) = v - h;
                    const double fm = gp_var_dot(m, uu, weights);
                    m(k) = v;
                    gmu(k) += (fp - fm) / (2.0 * h);
                }
                for (Index k = 0; k < nu_; ++k)
                {
                    const double h = fd_step(uu(k)), v = uu(k);
                    uu(k) = v + h;
                    const double fp = gp_var_dot(m, uu, weights);
                    uu(k) = v - h;
                    const double fm = gp_var_dot(m, uu, weights);
                    uu(k) = v;
                    gu(k) += (fp - fm) / (2.0 * h);
                }
            }

            ModelOps ops_;
            Index nx_ = 0, np_ = 0, nu_ = 0;
            Vector mu_p_;
            Matrix sigma_p_, sigma_w_;
            std::shared_ptr<const GPModel> gp_;
            Vector zp_, zt_;
            Vector zbuf_, dmean_, dvar_;
            Matrix gjac_;
        };

        // --------------------------------------------------------- MR-Taylor
        class TaylorMomentProblem final : public MomentProblemBase
        {
        public:
            explicit TaylorMomentProblem(const StochasticProblem &prob) : MomentProblemBase(prob)
            {
                if (!ops_.model->has_jacobians())
                    throw MissingDerivativeError("MR-Taylor needs the dynamics Jacobians of model '" +
                                                 ops_.model->name() + "'");
                a_.resize(nx_, nx_);
                b_.resize(nx_, np_);
                bu_.resize(nx_, nu_);
                m_.resize(nx_, nx_);
                f_.resize(nx_);
                hbuf_.resize(ops_.nh);
                tbuf_.resize(ops_.nt);
                gx_.resize(nx_);
                gu_.resize(nu_);
                gp_buf_.resize(np_);
            }

            void dynamics(const ConstVectorRef &x, const ConstVectorRef &u, double t, VectorRef out) override
            {
                const auto mu = x.head(nx_);
                const auto s = sigma(x);
                const auto sxp = sigma_xp(x);
                ops_.model->dynamics(mu, u, mu_p_, t, out.head(nx_));
                gp_eval(mu, u);
                out.head(nx_) += dmean_;
                linearize(mu, u, t);
                m_.noalias() = a_ * s;
                if (np_ > 0)
                    m_.noalias() += b_ * sxp.transpose();
                Eigen::Map<Matrix> ds(out.data() + nx_, nx_, nx_);
                ds = m_ + m_.transpose() + sigma_w_;
                ds.diagonal() += dvar_;
                if (np_ > 0)
                {
                    Eigen::Map<Matrix> dxp(out.data() + nx_ + nx_ * nx_, nx_, np_);
                    dxp.noalias() = a_ * sxp;
                    dxp.noalias() += b_ * sigma_p_;
                }
            }

            void dynamics_vjp(const ConstVectorRef &x, const ConstVectorRef &u, double t, const ConstVectorRef &lam,
                              VectorRef gx, VectorRef gu) override
            {
                const auto mu = x.head(nx_);
                const auto s = sigma(x);
                const auto sxp = sigma_xp(x);
                const auto lmu = lam.head(nx_);
                const Eigen::Map<const Matrix> ls(lam.data() + nx_, nx_, nx_);
                const Eigen::Map<const Matrix> lxp(lam.data() + nx_ + nx_ * nx_, nx_, np_);
                linearize(mu, u, t);
                gx.head(nx_).noalias() = a_.transpose() * lmu;
                gu.noalias() = bu_.transpose() * lmu;
                Eigen::Map<Matrix> gs(gx.data() + nx_, nx_, nx_);
                gs.noalias() = a_.transpose() * ls;
                gs.noalias() += ls * a_;
                if (np_ > 0)
                {
                    Eigen::Map<Matrix> gxp(gx.data() + nx_ + nx_ * nx_, nx_, np_);
                    gxp.noalias() = (ls + ls.transpose()) * b_;
                    gxp.noalias() += a_.transpose() * lxp;
                }
                // covariance channel through A(mu,u), B(mu,u): second derivatives by central differences
                pa_.noalias() = ls * s.transpose();
                pa_.noalias() += ls.transpose() * s;
                if (np_ > 0)
                {
                    pa_.noalias() += lxp * sxp.transpose();
                    pb_.noalias() = (ls + ls.transpose()) * sxp;
                    pb_.noalias() += lxp * sigma_p_.transpose();
                }
                const bool need = pa_.cwiseAbs().maxCoeff() > 0.0 || (np_ > 0 && pb_.cwiseAbs().maxCoeff() > 0.0);
                if (need)
                {
                    Vector m = mu, uu = u;
                    for (Index k = 0; k < nx_; ++k)
                    {
                        const double h = fd_step(m(k)), v = m(k);
                        m(k) = v + h;
                        const double fp = contract(m, uu, t);
                        m(k) = v - h;
                        const double fm = contract(m, uu, t);
                        m(k) = v;
                        gx(k) += (fp - fm) / (2.0 * h);
                    }
                    for (Index k = 0; k < nu_; ++k)
                    {
                        const double h = fd_step(uu(k)), v = uu(k);
                        uu(k) = v + h;
                        const double fp = contract(m, uu, t);
                        uu(k) = v - h;
                        const double fm = contract(m, uu, t);
                        uu(k) = v;
                        gu(k) += (fp - fm) / (2.0 * h);
                    }
                }
                gp_var_fd(mu, u, ls.diagonal(), gx.head(nx_), gu);
            }

            double stage_cost(const ConstVectorRef &x, const ConstVectorRef &u, double t) override
            {
                return ops_.model->stage_cost(x.head(nx_), u, mu_p_, t);
            }

            void stage_cost_gradient(const ConstVectorRef &x, const ConstVectorRef &u, double t, VectorRef gx,
                                     VectorRef gu) override
            {
                gx.setZero();
                ops_.model->stage_cost_gradient(x.head(nx_), u, mu_p_, t, gx.head(nx_), gu, gp_buf_);
            }

            double terminal_cost(const ConstVectorRef &x, double t) override
            {
                return ops_.model->terminal_cost(x.head(nx_), mu_p_, t);
            }

            void terminal_cost_gradient(const ConstVectorRef &x, double t, VectorRef gx) override
            {
                gx.setZero();
                ops_.model->terminal_cost_gradient(x.head(nx_), mu_p_, t, gx.head(nx_), gp_buf_);
            }

            void path_constraints(const ConstVectorRef &x, const ConstVectorRef &u, double t, VectorRef h) override
            {
                if (ops_.nh == 0)
                    return;
                const auto mu = x.head(nx_);
                ops_.model->path_constraints(mu, u, mu_p_, t, h);
                ops_.model->path_constraints_jacobians(mu, u, mu_p_, t, ops_.hx, ops_.hu, ops_.hp);
                for (Index j = 0; j < ops_.nh; ++j)
                    h(j) = tighten(h(j), variance(x, ops_.hx.row(j), ops_.hp.row(j)), zp_(j));
            }

            void path_constraints_vjp(const ConstVectorRef &x, const ConstVectorRef &u, double t,
                                      const ConstVectorRef &w, VectorRef gx, VectorRef gu) override
            {
                gx.setZero();
                gu.setZero();
                if (ops_.nh == 0)
                    return;
                const auto mu = x.head(nx_);
                ops_.model->path_constraints_jacobians(mu, u, mu_p_, t, ops_.hx, ops_.hu, ops_.hp);
                Vector s(ops_.nh);
                for (Index j = 0; j < ops_.nh; ++j)
                {
                    const double v = variance(x, ops_.hx.row(j), ops_.hp.row(j));
                    s(j) = v > 0.0 ? w(j) * zp_(j) / (2.0 * std::sqrt(v)) : 0.0;
                }
                gx.head(nx_).noalias() = ops_.hx.transpose() * w;
                gu.noalias() = ops_.hu.transpose() * w;
                variance_adjoint(x, ops_.hx, ops_.hp, s, gx);
                if (s.cwiseAbs().maxCoeff() == 0.0)
                    return;
                // d var / d(mu, u) at fixed covariance
                Vector m = mu, uu = u;
                auto q = [&](const Vector &mm, const Vector &uv) {
                    ops_.model->path_constraints_jacobians(mm, uv, mu_p_, t, ops_.hx, ops_.hu, ops_.hp);
                    double acc = 0.0;
                    for (Index j = 0; j < ops_.nh; ++j)
                        if (s(j) != 0.0)
                            acc += s(j) * variance(x, ops_.hx.row(j), ops_.hp.row(j));
                    return acc;
                };
                for (Index k = 0; k < nx_; ++k)
                {
                    const double h = fd_step(m(k)), v = m(k);
                    m(k) = v + h;
                    const double fp = q(m, uu);
                    m(k) = v - h;
                    const double fm = q(m, uu);
                    m(k) = v;
                    gx(k) += (fp - fm) / (2.0 * h);
                }
                for (Index k = 0; k < nu_; ++k)
                {
                    const double h = fd_step(uu(k)), v = uu(k);
                    uu(k) = v + h;
                    const double fp = q(m, uu);
                    uu(k) = v - h;
                    const double fm = q(m, uu);
                    uu(k) = v;
                    gu(k) += (fp - fm) / (2.0 * h);
                }
            }

            void terminal_constraints(const ConstVectorRef &x, double t, VectorRef h) override
            {
                if (ops_.nt == 0)
                    return;
                const auto mu = x.head(nx_);
                ops_.model->terminal_constraints(mu, mu_p_, t, h);
                ops_.model->terminal_constraints_jacobians(mu, mu_p_, t, ops_.tx, ops_.tp);
                for (Index j = 0; j < ops_.nt; ++j)
                    h(j) = tighten(h(j), variance(x, ops_.tx.row(j), ops_.tp.row(j)), zt_(j));
            }

            void terminal_constraints_vjp(const ConstVectorRef &x, double t, const ConstVectorRef &w,
                                          VectorRef gx) override
            {
                gx.setZero();
                if (ops_.nt == 0)
                    return;
                const auto mu = x.head(nx_);
                ops_.model->terminal_constraints_jacobians(mu, mu_p_, t, ops_.tx, ops_.tp);
                Vector s(ops_.nt);
                for (Index j = 0; j < ops_.nt; ++j)
                {
                    const double v = variance(x, ops_.tx.row(j), ops_.tp.row(j));
                    s(j) = v > 0.0 ? w(j) * zt_(j) / (2.0 * std::sqrt(v)) : 0.0;
                }
                gx.head(nx_).noalias() = ops_.tx.transpose() * w;
                variance_adjoint(x, ops_.tx, ops_.tp, s, gx);
                if (s.cwiseAbs().maxCoeff() == 0.0)
                    return;
                Vector m = mu;
                auto q = [&](const Vector &mm) {
                    ops_.model->terminal_constraints_jacobians(mm, mu_p_, t, ops_.tx, ops_.tp);
                    double acc = 0.0;
                    for (Index j = 0; j < ops_.nt; ++j)
                        if (s(j) != 0.0)
                            acc += s(j) * variance(x, ops_.tx.row(j), ops_.tp.row(j));
                    return acc;
                };
                for (Index k = 0; k < nx_; ++k)
                {
                    const double h = fd_step(m(k)), v = m(k);
                    m(k) = v + h;
                    const double fp = q(m);
                    m(k) = v - h;
                    const double fm = q(m);
                    m(k) = v;
                    gx(k) += (fp - fm) / (2.0 * h);
                }
            }

        private:
            void linearize(const ConstVectorRef &mu, const ConstVectorRef &u, double t)
            {
                ops_.model->dynamics_jacobians(mu, u, mu_p_, t, a_, bu_, b_);
                gp_jacobian(mu, u, a_, bu_);
            }

            // <P_A, A(mu,u)> + <P_B, B(mu,u)>
            double contract(const Vector &mu, const Vector &u, double t)
            {
                linearize(mu, u, t);
                double v = (pa_.array() * a_.array()).sum();
                if (np_ > 0)
                    v += (pb_.array() * b_.array()).sum();
                return v;
            }

            // g Sigma g^T + 2 g Sigma_xp gp^T + gp Sigma_p gp^T
            double variance(const ConstVectorRef &x, const Eigen::Ref<const Eigen::RowVectorXd> &g,
                            const Eigen::Ref<const Eigen::RowVectorXd> &gpr) const
            {
                double v = (g * sigma(x)).dot(g);
                if (np_ > 0)
                {
                    v += 2.0 * (g * sigma_xp(x)).dot(gpr);
                    v += (gpr * sigma_p_).dot(gpr);
                }
                return v;
            }

            void variance_adjoint(const ConstVectorRef &, const Matrix &hx, const Matrix &hp, const Vector &s,
                                  VectorRef gx) const
            {
                Eigen::Map<Matrix> gs(gx.data() + nx_, nx_, nx_);
                gs.noalias() += hx.transpose() * s.asDiagonal() * hx;
                if (np_ > 0)
                {
                    Eigen::Map<Matrix> gxp(gx.data() + nx_ + nx_ * nx_, nx_, np_);
                    gxp.noalias() += 2.0 * hx.transpose() * s.asDiagonal() * hp;
                }
            }

            Matrix a_, b_, bu_, m_, pa_, pb_;
            Vector f_, hbuf_, tbuf_, gx_, gu_, gp_buf_;
        };

        // ------------------------------------------------------ MR-sampling
        class SampledMomentProblem final : public MomentProblemBase
        {
        public:
            SampledMomentProblem(const StochasticProblem &prob, const PropagationMethod &method)
                : MomentProblemBase(prob)
            {
                if (method.kind != MethodKind::Unscented && method.kind != MethodKind::Stirling1 &&
                    method.kind != MethodKind::Stirling2)
                    throw ParameterError("MR-sampling supports ut, stirling1 and stirling2 (got " + method.name() + ")");
                n_ = nx_ + np_;
                ps_ = standard_sigma_points(method, n_);
                ns_ = ps_.size();
                // points are [0, r I, -r I]: products with them reduce to column scalings
                radius_ = ps_.points(0, 1);
                cj_.resize(n_, n_);
                l_.resize(n_, n_);
                lbar_.resize(n_, n_);
                abar_.resize(n_, n_);
                xi_.resize(n_, ns_);
                d_.resize(n_, ns_);
                y_.resize(nx_, ns_);
                gxi_.resize(n_, ns_);
                gd_.resize(n_, ns_);
                m_.resize(n_);
                m_.tail(np_) = mu_p_;
                g_.resize(nx_, n_);
                gl_.resize(nx_, n_);
                gdd_.resize(nx_, ns_);
                gy_.resize(nx_);
                gxbuf_.resize(nx_);
                gubuf_.resize(nu_);
                gpbuf_.resize(np_);
                hbuf_.resize(ops_.nh);
                tbuf_.resize(ops_.nt);
                hvals_.resize(std::max<Index>(ops_.nh, 1), ns_);
                tvals_.resize(std::max<Index>(ops_.nt, 1), ns_);
                vgrad_.resize(ns_);
                // force the first evaluation to build points
                cached_.resize(0);
            }

            void dynamics(const ConstVectorRef &x, const ConstVectorRef &u, double t, VectorRef out) override
            {
                points(x);
                eval_y(u, t);
                const Vector mhat = y_ * ps_.w_mean;
                out.head(nx_) = mhat;
                // (Y - mhat) diag(wc) D^T with D = [0, rL, -rL]; mhat cancels between the +/- columns
                ydiff_ = radius_ * ((y_.middleCols(1, n_) * ps_.w_cov.segment(1, n_).asDiagonal()) -
                                    (y_.rightCols(n_) * ps_.w_cov.tail(n_).asDiagonal()));
                cross_.noalias() = ydiff_ * l_.transpose();
                Eigen::Map<Matrix> ds(out.data() + nx_, nx_, nx_);
                ds = cross_.leftCols(nx_) + cross_.leftCols(nx_).transpose() + sigma_w_;
                if (gp_)
                {
                    gp_eval(x.head(nx_), u);
                    ds.diagonal() += dvar_;
                }
                if (np_ > 0)
                    Eigen::Map<Matrix>(out.data() + nx_ + nx_ * nx_, nx_, np_) = cross_.rightCols(np_);
            }

            void dynamics_vjp(const ConstVectorRef &x, const ConstVectorRef &u, double t, const ConstVectorRef &lam,
                              VectorRef gx, VectorRef gu) override
            {
                points(x);
                eval_y(u, t);
                const Vector mhat = y_ * ps_.w_mean;
                const auto lmu = lam.head(nx_);
                const Eigen::Map<const Matrix> ls(lam.data() + nx_, nx_, nx_);
                g_.leftCols(nx_) = ls + ls.transpose();
                if (np_ > 0)
                    g_.rightCols(np_) = Eigen::Map<const Matrix>(lam.data() + nx_ + nx_ * nx_, nx_, np_);
                gl_.noalias() = g_ * l_;
                gdd_.col(0).setZero();
                gdd_.middleCols(1, n_) = radius_ * gl_;
                gdd_.rightCols(n_) = -radius_ * gl_;
                const Vector r = -(gdd_ * ps_.w_cov);
                gu.setZero();
                for (Index i = 0; i < ns_; ++i)
                {
                    gy_ = ps_.w_mean(i) * (lmu + r) + ps_.w_cov(i) * gdd_.col(i);
                    point_vjp(i, u, t, gy_, gu);
                }
                // direct dependence of the cross-covariance on the point offsets
                // (offsets only depend on the factor L, so this term does not reach the mean)
                gd_ = gxi_;
                gd_.noalias() += g_.transpose() * ((y_.colwise() - mhat) * ps_.w_cov.asDiagonal());
                backprop(gd_, gx);
                gx.head(nx_) = gxi_.topRows(nx_).rowwise().sum();
                if (gp_)
                    gp_var_fd(x.head(nx_), u, ls.diagonal(), gx.head(nx_), gu);
            }

            double stage_cost(const ConstVectorRef &x, const ConstVectorRef &u, double t) override
            {
                points(x);
                double c = 0.0;
                for (Index i = 0; i < ns_; ++i)
                    if (ps_.w_mean(i) != 0.0)
                        c += ps_.w_mean(i) *
                             ops_.model->stage_cost(xi_.col(i).head(nx_), u, xi_.col(i).tail(np_), t);
                return c;
            }

            void stage_cost_gradient(const ConstVectorRef &x, const ConstVectorRef &u, double t, VectorRef gx,
                                     VectorRef gu) override
            {
                points(x);
                gu.setZero();
                for (Index i = 0; i < ns_; ++i)
                {
                    const double w = ps_.w_mean(i);
                    if (w == 0.0)
                    {
                        gxi_.col(i).setZero();
                        continue;
                    }
                    ops_.model->stage_cost_gradient(xi_.col(i).head(nx_), u, xi_.col(i).tail(np_), t, gxbuf_, gubuf_,
                                                    gpbuf_);
                    gxi_.col(i).head(nx_) = w * gxbuf_;
                    gxi_.col(i).tail(np_) = w * gpbuf_;
                    gu += w * gubuf_;
                }
                backprop(gxi_, gx);
            }

            double terminal_cost(const ConstVectorRef &x, double t) override
            {
                points(x);
                double c = 0.0;
                for (Index i = 0; i < ns_; ++i)
                    if (ps_.w_mean(i) != 0.0)
                        c += ps_.w_mean(i) * ops_.model->terminal_cost(xi_.col(i).head(nx_), xi_.col(i).tail(np_), t);
                return c;
            }

            void terminal_cost_gradient(const ConstVectorRef &x, double t, VectorRef gx) override
            {
                points(x);
                for (Index i = 0; i < ns_; ++i)
                {
                    const double w = ps_.w_mean(i);
                    if (w == 0.0)
                    {
                        gxi_.col(i).setZero();
                        continue;
                    }
                    ops_.model->terminal_cost_gradient(xi_.col(i).head(nx_), xi_.col(i).tail(np_), t, gxbuf_, gpbuf_);
                    gxi_.col(i).head(nx_) = w * gxbuf_;
                    gxi_.col(i).tail(np_) = w * gpbuf_;
                }
                backprop(gxi_, gx);
            }

            void path_constraints(const ConstVectorRef &x, const ConstVectorRef &u, double t, VectorRef h) override
            {
                if (ops_.nh == 0)
                    return;
                points(x);
                for (Index i = 0; i < ns_; ++i)
                {
                    ops_.model->path_constraints(xi_.col(i).head(nx_), u, xi_.col(i).tail(np_), t, hbuf_);
                    hvals_.col(i) = hbuf_;
                }
                for (Index j = 0; j < ops_.nh; ++j)
                {
                    const Vector row = hvals_.row(j).transpose();
                    const double mu = row.dot(ps_.w_mean);
                    h(j) = tighten(mu, estimate_var1(ps_, row, mu), zp_(j));
                }
            }

            void path_constraints_vjp(const ConstVectorRef &x, const ConstVectorRef &u, double t,
                                      const ConstVectorRef &w, VectorRef gx, VectorRef gu) override
            {
                gu.setZero();
                if (ops_.nh == 0)
                {
                    gx.setZero();
                    return;
                }
                points(x);
                for (Index i = 0; i < ns_; ++i)
                {
                    ops_.model->path_constraints(xi_.col(i).head(nx_), u, xi_.col(i).tail(np_), t, hbuf_);
                    hvals_.col(i) = hbuf_;
                }
                const Matrix coef = coefficients(hvals_.topRows(ops_.nh), zp_, w);
                for (Index i = 0; i < ns_; ++i)
                {
                    const Vector c = coef.col(i);
                    ops_.model->path_constraints_jacobians(xi_.col(i).head(nx_), u, xi_.col(i).tail(np_), t, ops_.hx,
                                                           ops_.hu, ops_.hp);
                    gxi_.col(i).head(nx_).noalias() = ops_.hx.transpose() * c;
                    if (np_ > 0)
                        gxi_.col(i).tail(np_).noalias() = ops_.hp.transpose() * c;
                    gu.noalias() += ops_.hu.transpose() * c;
                }
                backprop(gxi_, gx);
            }

            void terminal_constraints(const ConstVectorRef &x, double t, VectorRef h) override
            {
                if (ops_.nt == 0)
                    return;
                points(x);
                for (Index i = 0; i < ns_; ++i)
                {
                    ops_.model->terminal_constraints(xi_.col(i).head(nx_), xi_.col(i).tail(np_), t, tbuf_);
                    tvals_.col(i) = tbuf_;
                }
                for (Index j = 0; j < ops_.nt; ++j)
                {
                    const Vector row = tvals_.row(j).transpose();
                    const double mu = row.dot(ps_.w_mean);
                    h(j) = tighten(mu, estimate_var1(ps_, row, mu), zt_(j));
                }
            }

            void terminal_constraints_vjp(const ConstVectorRef &x, double t, const ConstVectorRef &w,
                                          VectorRef gx) override
            {
                if (ops_.nt == 0)
                {
                    gx.setZero();
                    return;
                }
                points(x);
                for (Index i = 0; i < ns_; ++i)
                {
                    ops_.model->terminal_constraints(xi_.col(i).head(nx_), xi_.col(i).tail(np_), t, tbuf_);
                    tvals_.col(i) = tbuf_;
                }
                const Matrix coef = coefficients(tvals_.topRows(ops_.nt), zt_, w);
                for (Index i = 0; i < ns_; ++i)
                {
                    const Vector c = coef.col(i);
                    ops_.model->terminal_constraints_jacobians(xi_.col(i).head(nx_), xi_.col(i).tail(np_), t, ops_.tx,
                                                               ops_.tp);
                    gxi_.col(i).head(nx_).noalias() = ops_.tx.transpose() * c;
                    if (np_ > 0)
                        gxi_.col(i).tail(np_).noalias() = ops_.tp.transpose() * c;
                }
                backprop(gxi_, gx);
            }

        private:
            // resample the joint points from the current moments (cached per state vector)
            void points(const ConstVectorRef &x)
            {
                if (cached_.size() == x.size() && cached_ == x)
                    return;
                cj_.topLeftCorner(nx_, nx_) = sigma(x);
                symmetrize(cj_.topLeftCorner(nx_, nx_));
                if (np_ > 0)
                {
                    cj_.topRightCorner(nx_, np_) = sigma_xp(x);
                    cj_.bottomLeftCorner(np_, nx_) = sigma_xp(x).transpose();
                    cj_.bottomRightCorner(np_, np_) = sigma_p_;
                }
                cholesky_psd_into(cj_, l_);
                m_.head(nx_) = x.head(nx_);
                d_.col(0).setZero();
                d_.middleCols(1, n_) = radius_ * l_;
                d_.rightCols(n_) = -radius_ * l_;
                xi_ = d_.colwise() + m_;
                cached_ = x;
            }

            void eval_y(const ConstVectorRef &u, double t)
            {
                for (Index i = 0; i < ns_; ++i)
                {
                    ops_.model->dynamics(xi_.col(i).head(nx_), u, xi_.col(i).tail(np_), t, y_.col(i));
                    if (gp_)
                    {
                        gp_eval(xi_.col(i).head(nx_), u);
                        y_.col(i) += dmean_;
                    }
                }
            }

            // adjoint of y_i = f(xi_i) (+ GP mean) into gxi_.col(i) and gu
            void point_vjp(Index i, const ConstVectorRef &u, double t, const Vector &gy, VectorRef gu)
            {
                const auto xi = xi_.col(i);
                ops_.vjp(xi.head(nx_), u, xi.tail(np_), t, gy, gxbuf_, gubuf_, gpbuf_);
                if (gp_)
                {
                    zbuf_.head(nx_) = xi.head(nx_);
                    zbuf_.tail(nu_) = u;
                    gp_->mean_jacobian(zbuf_, gjac_);
                    gxbuf_.noalias() += gjac_.leftCols(nx_).transpose() * gy;
                    gubuf_.noalias() += gjac_.rightCols(nu_).transpose() * gy;
                }
                gxi_.col(i).head(nx_) = gxbuf_;
                if (np_ > 0)
                    gxi_.col(i).tail(np_) = gpbuf_;
                gu += gubuf_;
            }

            // adjoints of the point offsets / locations -> gradient w.r.t. (mu, Sigma, Sigma_xp)
            void backprop(const Matrix &gpoints, VectorRef gx)
            {
                gx.head(nx_) = gpoints.topRows(nx_).rowwise().sum();
                lbar_ = radius_ * (gpoints.middleCols(1, n_) - gpoints.rightCols(n_));
                cholesky_reverse(l_, lbar_, abar_);
                Eigen::Map<Matrix> gs(gx.data() + nx_, nx_, nx_);
                for (Index j = 0; j < nx_; ++j)
                {
                    gs(j, j) = abar_(j, j);
                    for (Index i = j + 1; i < nx_; ++i)
                    {
                        gs(i, j) = 0.5 * abar_(i, j);
                        gs(j, i) = 0.5 * abar_(i, j);
                    }
                }
                if (np_ > 0)
                {
                    Eigen::Map<Matrix> gxp(gx.data() + nx_ + nx_ * nx_, nx_, np_);
                    gxp = abar_.bottomLeftCorner(np_, nx_).transpose();
                }
            }

            Matrix coefficients(const Eigen::Ref<const Matrix> &vals, const Vector &z, const ConstVectorRef &w)
            {
                Matrix coef = Matrix::Zero(vals.rows(), ns_);
                for (Index j = 0; j < vals.rows(); ++j)
                {
                    if (w(j) == 0.0)
                        continue;
                    const Vector row = vals.row(j).transpose();
                    const double mu = row.dot(ps_.w_mean);
                    const double var = estimate_var1(ps_, row, mu);
                    Vector c = ps_.w_mean;
                    if (var > 0.0 && z(j) != 0.0)
                    {
                        estimate_var1_gradient(ps_, row, mu, vgrad_);
                        c += (z(j) / (2.0 * std::sqrt(var))) * vgrad_;
                    }
                    coef.row(j) = w(j) * c.transpose();
                }
                return coef;
            }

            PointSet ps_;
            Index n_ = 0, ns_ = 0;
            double radius_ = 0.0;
            Matrix cj_, l_, lbar_, abar_, xi_, d_, y_, gxi_, gd_, g_, gl_, gdd_, cross_, ydiff_, hvals_, tvals_;
            Vector m_, gy_, gxbuf_, gubuf_, gpbuf_, hbuf_, tbuf_, vgrad_, cached_;
        };
    } // namespace

    std::unique_ptr<DeterministicProblem> build_sr(const StochasticProblem &problem, const PropagationMethod &method,
                                                   ConstraintApprox approx, ConstraintMode mode)
    {
        problem.validate();
        if (problem.has_diffusion())
            throw UnsupportedError("sampling-based representation does not support Wiener diffusion (unsupported "
                                   "wiener); use a moment-based representation");
        if (problem.gp)
            throw UnsupportedError("sampling-based representation does not support GP residual models (unsupported "
                                   "gp); use a moment-based representation");
        if (method.kind == MethodKind::Taylor1)
            throw ParameterError("sampling-based representation needs a point-based method, not taylor");
        auto sr = std::make_unique<SampledProblem>(problem, method, approx, mode);
        if (method.kind == MethodKind::MonteCarlo && mode == ConstraintMode::PerSample)
        {
            const long ns = static_cast<long>(sr->num_samples());
            auto check = [&](double alpha) {
                if (ns * alpha < 10.0 || ns * (1.0 - alpha) < 10.0)
                {
                    std::ostringstream os;
                    os << "Monte-Carlo per-sample constraints: Ns = " << ns << " violates the normal-approximation "
                       << "conditions for alpha = " << alpha << "; mc_confidence = " << mc_confidence(ns, alpha, false);
                    sr->add_warning(os.str());
                }
            };
            for (Index j = 0; j < problem.alpha_path.size(); ++j)
                check(problem.alpha_path(j));
            for (Index j = 0; j < problem.alpha_terminal.size(); ++j)
                check(problem.alpha_terminal(j));
        }
        return sr;
    }

    std::unique_ptr<DeterministicProblem> build_mr_taylor(const StochasticProblem &problem)
    {
        problem.validate();
        return std::make_unique<TaylorMomentProblem>(problem);
    }

    std::unique_ptr<DeterministicProblem> build_mr_sampling(const StochasticProblem &problem,
                                                            const PropagationMethod &method)
    {
        problem.validate();
        return std::make_unique<SampledMomentProblem>(problem, method);
    }

    std::unique_ptr<DeterministicProblem> reformulate(const StochasticProblem &problem, const ReformulationConfig &cfg)
    {
        switch (cfg.repr)
        {
        case Representation::SR:
            return build_sr(problem, cfg.method, problem.approx, cfg.mode);
        case Representation::MRTaylor:
            return build_mr_taylor(problem);
        case Representation::MRSampling:
            return build_mr_sampling(problem, cfg.method);
        }
        throw ParameterError("reformulate: unknown representation");
    }
} // namespace smpc
