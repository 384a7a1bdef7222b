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

#include "smpc/transform.hpp"

#include <cmath>
#include <string>

namespace smpc
{
    PropagationMethod PropagationMethod::taylor()
    {
        PropagationMethod m;
        m.kind = MethodKind::Taylor1;
        return m;
    }

    PropagationMethod PropagationMethod::stirling1(double h)
    {
        PropagationMethod m;
        m.kind = MethodKind::Stirling1;
        m.h = h;
        return m;
    }

    PropagationMethod PropagationMethod::stirling2(double h)
    {
        PropagationMethod m;
        m.kind = MethodKind::Stirling2;
        m.h = h;
        return m;
    }

    PropagationMethod PropagationMethod::unscented(double alpha, double beta, std::optional<double> kappa)
    {
        PropagationMethod m;
        m.kind = MethodKind::Unscented;
        m.alpha = alpha;
        m.beta = beta;
        m.kappa = kappa;
        return m;
    }

    PropagationMethod PropagationMethod::quadrature(int d)
    {
        PropagationMethod m;
        m.kind = MethodKind::GaussQuadrature;
        m.order = d;
        return m;
    }

    PropagationMethod PropagationMethod::monte_carlo(long np, std::uint64_t seed)
    {
        PropagationMethod m;
        m.kind = MethodKind::MonteCarlo;
        m.samples = np;
        m.seed = seed;
        return m;
    }

    PropagationMethod PropagationMethod::pce(int mm, int d)
    {
        PropagationMethod m;
        m.kind = MethodKind::PCE;
        m.pce_order = mm;
        m.order = d;
        return m;
    }

    std::string PropagationMethod::name() const
    {
        switch (kind)
        {
        case MethodKind::Taylor1:
            return "taylor";
        case MethodKind::Stirling1:
            return "stirling1";
        case MethodKind::Stirling2:
            return "stirling2";
        case MethodKind::Unscented:
            return "ut";
        case MethodKind::GaussQuadrature:
            return "quad";
        case MethodKind::MonteCarlo:
            return "mc";
        case MethodKind::PCE:
            return "pce";
        }
        return "?";
    }

    void PropagationMethod::validate() const
    {
        switch (kind)
        {
        case MethodKind::Unscented:
            if (!(alpha > 0.0))
                throw ParameterError("UT: alpha must be > 0");
            break;
        case MethodKind::Stirling1:
        case MethodKind::Stirling2:
            if (!(h > 0.0))
                throw ParameterError("Stirling: step h must be > 0");
            break;
        case MethodKind::GaussQuadrature:
            if (order < 1 || order > 64)
                throw ParameterError("quadrature: order must be in [1, 64]");
            break;
        case MethodKind::MonteCarlo:
            if (samples < 2)
                throw ParameterError("Monte-Carlo: Np must be >= 2");
            break;
        case MethodKind::PCE:
            if (pce_order < 1)
                throw ParameterError("PCE: order M must be >= 1");
            if (order < pce_order || order > 64)
                throw ParameterError("PCE: quadrature order d must satisfy M <= d <= 64");
            break;
        case MethodKind::Taylor1:
            break;
        }
    }

    PointSet standard_sigma_points(const PropagationMethod &method, Index n)
    {
        method.validate();
        PointSet ps;
        const Index ns = 2 * n + 1;
        ps.points = Matrix::Zero(n, ns);
        ps.w_mean.resize(ns);
        ps.w_cov.resize(ns);
        ps.center = Vector::Zero(n);
        const double nn = static_cast<double>(n);
        double radius;
        if (method.kind == MethodKind::Unscented)
        {
            const double kappa = method.kappa ? *method.kappa : 3.0 - nn;
            const double c = method.alpha * method.alpha * (nn + kappa);
            if (!(c > 0.0))
                throw ParameterError("UT: alpha^2 (N + kappa) must be > 0");
            const double lambda = c - nn;
            radius = std::sqrt(c);
            ps.w_mean.setConstant(0.5 / c);
            ps.w_cov.setConstant(0.5 / c);
            ps.w_mean(0) = lambda / c;
            ps.w_cov(0) = lambda / c + (1.0 - method.alpha * method.alpha + method.beta);
            ps.estimator = Estimator::WeightedScatter;
        }
        else if (method.kind == MethodKind::Stirling1 || method.kind == MethodKind::Stirling2)
        {
            const double h2 = method.h * method.h;
            radius = method.h;
            ps.h = method.h;
            ps.w_cov.setConstant(0.5 / h2);
            ps.w_cov(0) = 0.0;
            if (method.kind == MethodKind::Stirling1)
            {
                ps.w_mean.setZero();
                ps.w_mean(0) = 1.0;
                ps.estimator = Estimator::StirlingFirst;
            }
            else
            {
                ps.w_mean.setConstant(0.5 / h2);
                ps.w_mean(0) = (h2 - nn) / h2;
                ps.estimator = Estimator::StirlingSecond;
            }
        }
        else
        {
            throw ParameterError("standard_sigma_points: method " + method.name() + " has no sigma points");
        }
        for (Index i = 0; i < n; ++i)
        {
            ps.points(i, 1 + i) = radius;
            ps.points(i, 1 + n + i) = -radius;
        }
        return ps;
    }

    std::vector<PolyFamily> native_families(const JointDistribution &dist, std::optional<PolyFamily> forced)
    {
        std::vector<PolyFamily> fam(static_cast<std::size_t>(dist.dim()), PolyFamily::HermiteProbabilists);
        for (Index j = 0; j < dist.dim(); ++j)
        {
            const bool uni = dist.hasMarginals() && dist.marginals()[static_cast<std::size_t>(j)].family() == Family::Uniform;
            const PolyFamily nat = uni ? PolyFamily::Legendre : PolyFamily::HermiteProbabilists;
            if (forced && *forced != nat)
                throw FamilyMismatchError(std::string("quadrature family ") +
                                          (*forced == PolyFamily::Legendre ? "Legendre" : "Hermite") +
                                          " does not match the marginal of dimension " + std::to_string(j));
            fam[static_cast<std::size_t>(j)] = nat;
        }
        return fam;
    }

    namespace
    {
        // xi = mu + A zeta with A = chol(Sigma) on Gaussian dimensions and (b-a)/2 on uniform ones.
        Matrix standard_map(const JointDistribution &dist)
        {
            Matrix a = cholesky_psd(dist.covariance());
            if (dist.hasMarginals())
            {
                for (Index j = 0; j < dist.dim(); ++j)
                {
                    const auto &m = dist.marginals()[static_cast<std::size_t>(j)];
                    if (m.family() == Family::Uniform)
                    {
                        a.col(j).setZero();
                        a.row(j).setZero();
                        a(j, j) = 0.5 * (m.upper() - m.lower());
                    }
                }
            }
            return a;
        }
    } // namespace

    std::vector<std::vector<int>> total_degree_indices(Index n, int max_degree)
    {
        std::vector<std::vector<int>> out;
        std::vector<int> cur(static_cast<std::size_t>(n), 0);
        for (int deg = 0; deg <= max_degree; ++deg)
        {
            // enumerate compositions of deg into n parts, lexicographically descending in the first entry
            std::function<void(Index, int)> rec = [&](Index pos, int left) {
                if (pos == n - 1)
                {
                    cur[static_cast<std::size_t>(pos)] = left;
                    out.push_back(cur);
                    return;
                }
                for (int k = left; k >= 0; --k)
                {
                    cur[static_cast<std::size_t>(pos)] = k;
                    rec(pos + 1, left - k);
                }
            };
            if (n > 0)
                rec(0, deg);
        }
        return out;
    }

    PointSet generate_points(const PropagationMethod &method, const JointDistribution &dist)
    {
        method.validate();
        const Index n = dist.dim();
        if (n < 1)
            throw ParameterError("generate_points: empty distribution");
        switch (method.kind)
        {
        case MethodKind::Taylor1:
            throw ParameterError("generate_points: Taylor propagation uses no points");
        case MethodKind::Unscented:
        case MethodKind::Stirling1:
        case MethodKind::Stirling2:
        {
            PointSet ps = standard_sigma_points(method, n);
            const Matrix s = cholesky_psd(dist.covariance());
            ps.points = (s * ps.points).colwise() + dist.mean();
            ps.center = dist.mean();
            return ps;
        }
        case MethodKind::MonteCarlo:
        {
            PointSet ps;
            ps.points = sample(dist, method.samples, RngStream(method.seed));
            const double w = 1.0 / static_cast<double>(method.samples);
            ps.w_mean = Vector::Constant(method.samples, w);
            ps.w_cov = ps.w_mean;
            ps.center = dist.mean();
            return ps;
        }
        case MethodKind::GaussQuadrature:
        case MethodKind::PCE:
        {
            const auto fam = native_families(dist, method.family);
            const TensorRule t = tensor_rule(fam, std::vector<int>(static_cast<std::size_t>(n), method.order));
            PointSet ps;
            ps.points = (standard_map(dist) * t.points).colwise() + dist.mean();
            ps.w_mean = t.weights;
            ps.w_cov = t.weights;
            ps.center = dist.mean();
            if (method.kind == MethodKind::PCE)
            {
                ps.estimator = Estimator::Chaos;
                ps.multi_indices = total_degree_indices(n, method.pce_order - 1);
                const Index nb = static_cast<Index>(ps.multi_indices.size());
                const int maxdeg = method.pce_order - 1;
                ps.projection.resize(nb, t.points.cols());
                ps.basis_norms.resize(nb);
                std::vector<double> tab(static_cast<std::size_t>((maxdeg + 1) * n));
                for (Index b = 0; b < nb; ++b)
                {
                    double nrm = 1.0;
                    for (Index j = 0; j < n; ++j)
                        nrm *= norm_squared(fam[static_cast<std::size_t>(j)], ps.multi_indices[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)]);
                    ps.basis_norms(b) = nrm;
                }
                for (Index k = 0; k < t.points.cols(); ++k)
                {
                    for (Index j = 0; j < n; ++j)
                        poly_eval_all(fam[static_cast<std::size_t>(j)], maxdeg, t.points(j, k), &tab[static_cast<std::size_t>(j * (maxdeg + 1))]);
                    for (Index b = 0; b < nb; ++b)
                    {
                        double phi = 1.0;
                        for (Index j = 0; j < n; ++j)
                            phi *= tab[static_cast<std::size_t>(j * (maxdeg + 1) + ps.multi_indices[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)])];
                        ps.projection(b, k) = t.weights(k) * phi / ps.basis_norms(b);
                    }
                }
            }
            return ps;
        }
        }
        throw ParameterError("generate_points: unknown method");
    }

    Vector estimate_mean(const PointSet &ps, const ConstMatrixRef &y)
    {
        return y * ps.w_mean;
    }

    Matrix estimate_cov(const PointSet &ps, const ConstMatrixRef &y, const ConstVectorRef &mean)
    {
        const Index ny = y.rows();
        Matrix c = Matrix::Zero(ny, ny);
        switch (ps.estimator)
        {
        case Estimator::WeightedScatter:
        {
            const Matrix d = y.colwise() - mean;
            c.noalias() = d * ps.w_cov.asDiagonal() * d.transpose();
            break;
        }
        case Estimator::StirlingFirst:
        case Estimator::StirlingSecond:
        {
            const Index n = (y.cols() - 1) / 2;
            const double h2 = ps.h * ps.h;
            const Matrix d1 = y.middleCols(1, n) - y.middleCols(1 + n, n);
            c.noalias() = (0.25 / h2) * d1 * d1.transpose();
            if (ps.estimator == Estimator::StirlingSecond)
            {
                const Matrix d2 = (y.middleCols(1, n) + y.middleCols(1 + n, n)).colwise() - 2.0 * y.col(0);
                c.noalias() += ((h2 - 1.0) / (4.0 * h2 * h2)) * d2 * d2.transpose();
            }
            break;
        }
        case Estimator::Chaos:
        {
            const Matrix a = y * ps.projection.transpose();
            for (Index i = 1; i < a.cols(); ++i)
                c.noalias() += ps.basis_norms(i) * a.col(i) * a.col(i).transpose();
            break;
        }
        }
        symmetrize(c);
        return c;
    }

    Matrix estimate_cross(const PointSet &ps, const ConstMatrixRef &y, const ConstVectorRef &mean)
    {
        const Matrix dy = y.colwise() - mean;
        const Matrix dx = ps.points.colwise() - ps.center;
        return dy * ps.w_cov.asDiagonal() * dx.transpose();
    }

    double estimate_var1(const PointSet &ps, const ConstVectorRef &y, double mean)
    {
        switch (ps.estimator)
        {
        case Estimator::WeightedScatter:
        {
            double v = 0.0;
            for (Index k = 0; k < y.size(); ++k)
                v += ps.w_cov(k) * (y(k) - mean) * (y(k) - mean);
            return v;
        }
        case Estimator::StirlingFirst:
        case Estimator::StirlingSecond:
        {
            const Index n = (y.size() - 1) / 2;
            const double h2 = ps.h * ps.h;
            const double c2 = (h2 - 1.0) / (4.0 * h2 * h2);
            double v = 0.0;
            for (Index i = 0; i < n; ++i)
            {
                const double d1 = y(1 + i) - y(1 + n + i);
                v += (0.25 / h2) * d1 * d1;
                if (ps.estimator == Estimator::StirlingSecond)
                {
                    const double d2 = y(1 + i) + y(1 + n + i) - 2.0 * y(0);
                    v += c2 * d2 * d2;
                }
            }
            return v;
        }
        case Estimator::Chaos:
        {
            const Vector a = ps.projection * y;
            double v = 0.0;
            for (Index i = 1; i < a.size(); ++i)
                v += ps.basis_norms(i) * a(i) * a(i);
            return v;
        }
        }
        return 0.0;
    }

    void estimate_var1_gradient(const PointSet &ps, const ConstVectorRef &y, double mean, VectorRef g)
    {
        g.setZero();
        switch (ps.estimator)
        {
        case Estimator::WeightedScatter:
        {
            double s = 0.0;
            for (Index k = 0; k < y.size(); ++k)
            {
                g(k) = 2.0 * ps.w_cov(k) * (y(k) - mean);
                s += ps.w_cov(k) * (y(k) - mean);
            }
            g.noalias() -= (2.0 * s) * ps.w_mean;
            return;
        }
        case Estimator::StirlingFirst:
        case Estimator::StirlingSecond:
        {
            const Index n = (y.size() - 1) / 2;
            const double h2 = ps.h * ps.h;
            const double c2 = (h2 - 1.0) / (4.0 * h2 * h2);
            for (Index i = 0; i < n; ++i)
            {
                const double d1 = (0.5 / h2) * (y(1 + i) - y(1 + n + i));
                g(1 + i) += d1;
                g(1 + n + i) -= d1;
                if (ps.estimator == Estimator::StirlingSecond)
                {
                    const double d2 = 2.0 * c2 * (y(1 + i) + y(1 + n + i) - 2.0 * y(0));
                    g(1 + i) += d2;
                    g(1 + n + i) += d2;
                    g(0) -= 2.0 * d2;
                }
            }
            return;
        }
        case Estimator::Chaos:
        {
            Vector a = ps.projection * y;
            a(0) = 0.0;
            a.array() *= 2.0 * ps.basis_norms.array();
            g.noalias() = ps.projection.transpose() * a;
            return;
        }
        }
    }

    PropagationResult propagate(const PropagationMethod &method, const VectorMap &psi, Index ny,
                                const JointDistribution &dist, const JacobianMap &jac)
    {
        PropagationResult r;
        const Index n = dist.dim();
        if (method.kind == MethodKind::Taylor1)
        {
            if (!jac)
                throw MissingDerivativeError("Taylor propagation needs the Jacobian of the map");
            r.mean.resize(ny);
            psi(dist.mean(), r.mean);
            if (!r.mean.allFinite())
                throw PropagationError("propagate: non-finite output", dist.mean());
            Matrix j(ny, n);
            jac(dist.mean(), j);
            r.cross = j * dist.covariance();
            r.cov = r.cross * j.transpose();
            symmetrize(r.cov);
            return r;
        }
        const PointSet ps = generate_points(method, dist);
        Matrix y(ny, ps.size());
        for (Index k = 0; k < ps.size(); ++k)
        {
            psi(ps.points.col(k), y.col(k));
            if (!y.col(k).allFinite())
                throw PropagationError("propagate: non-finite output at point " + std::to_string(k), ps.points.col(k));
        }
        r.mean = estimate_mean(ps, y);
        r.cov = estimate_cov(ps, y, r.mean);
        r.cross = estimate_cross(ps, y, r.mean);
        return r;
    }

    Matrix pce_coefficients(const VectorMap &psi, Index ny, const JointDistribution &dist, int m, int d)
    {
        const PointSet ps = generate_points(PropagationMethod::pce(m, d), dist);
        Matrix y(ny, ps.size());
        for (Index k = 0; k < ps.size(); ++k)
        {
            psi(ps.points.col(k), y.col(k));
            if (!y.col(k).allFinite())
                throw PropagationError("pce_coefficients: non-finite output", ps.points.col(k));
        }
        return y * ps.projection.transpose();
    }
} // namespace smpc
