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

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace smpc;

namespace
{
    JointDistribution gauss2()
    {
        Vector m(2);
        m << 1.0, -0.5;
        Matrix c(2, 2);
        c << 2.0, 0.6, 0.6, 1.0;
        return JointDistribution(m, c);
    }

    std::vector<PropagationMethod> point_methods()
    {
        return {PropagationMethod::unscented(),       PropagationMethod::unscented(0.5, 2.0, 1.0),
                PropagationMethod::stirling1(),       PropagationMethod::stirling2(),
                PropagationMethod::stirling2(1.2),    PropagationMethod::quadrature(3),
                PropagationMethod::quadrature(1),     PropagationMethod::pce(2, 3)};
    }

    double scalar_var(const PropagationMethod &m, const JointDistribution &d, const std::function<double(const ConstVectorRef &)> &f)
    {
        return propagate(m, [&](const ConstVectorRef &x, VectorRef y) { y(0) = f(x); }, 1, d).cov(0, 0);
    }
} // namespace

TEST(SigmaPoints, UnscentedDefaultWeights)
{
    const auto ps = standard_sigma_points(PropagationMethod::unscented(), 1);
    ASSERT_EQ(ps.size(), 3);
    // N = 1, kappa = 2: c = 3, lambda = 2
    EXPECT_NEAR(ps.w_mean(0), 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(ps.w_mean(1), 1.0 / 6.0, 1e-15);
    EXPECT_NEAR(ps.w_cov(0), 2.0 / 3.0 + 2.0, 1e-15);
    EXPECT_NEAR(ps.points(0, 1), std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(ps.points(0, 2), -std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(ps.w_mean.sum(), 1.0, 1e-15);
}

TEST(SigmaPoints, OrderingAndMeanWeights)
{
    for (const auto &m : {PropagationMethod::unscented(0.7, 2.0, 0.5), PropagationMethod::stirling1(),
                          PropagationMethod::stirling2(2.0)})
    {
        const auto ps = standard_sigma_points(m, 4);
        ASSERT_EQ(ps.size(), 9);
        EXPECT_NEAR(ps.w_mean.sum(), 1.0, 1e-14) << m.name();
        EXPECT_NEAR(ps.points.col(0).norm(), 0.0, 0.0);
        for (Index i = 0; i < 4; ++i)
        {
            EXPECT_GT(ps.points(i, 1 + i), 0.0);
            EXPECT_NEAR(ps.points(i, 1 + i), -ps.points(i, 5 + i), 0.0);
        }
    }
    EXPECT_THROW(standard_sigma_points(PropagationMethod::quadrature(), 2), ParameterError);
}

TEST(MethodValidation, Ranges)
{
    EXPECT_THROW(PropagationMethod::unscented(0.0).validate(), ParameterError);
    EXPECT_THROW(PropagationMethod::stirling1(-1.0).validate(), ParameterError);
    EXPECT_THROW(PropagationMethod::quadrature(0).validate(), ParameterError);
    EXPECT_THROW(PropagationMethod::quadrature(65).validate(), ParameterError);
    EXPECT_THROW(PropagationMethod::monte_carlo(1).validate(), ParameterError);
    EXPECT_THROW(PropagationMethod::pce(4, 3).validate(), ParameterError);
    EXPECT_NO_THROW(PropagationMethod::pce(3, 3).validate());
    // kappa = -N makes the scaling degenerate
    EXPECT_THROW(standard_sigma_points(PropagationMethod::unscented(1.0, 2.0, -2.0), 2), ParameterError);
}

TEST(Propagate, LinearMapExactForAllPointMethods)
{
    Matrix a(3, 2);
    a << 1.0, 2.0, -0.5, 0.3, 0.0, 4.0;
    Vector b(3);
    b << 0.1, 0.2, 0.3;
    const auto d = gauss2();
    const Vector mean = a * d.mean() + b;
    const Matrix cov = a * d.covariance() * a.transpose();
    const Matrix cross = a * d.covariance();
    VectorMap psi = [&](const ConstVectorRef &x, VectorRef y) { y = a * x + b; };
    JacobianMap jac = [&](const ConstVectorRef &, MatrixRef j) { j = a; };
    auto methods = point_methods();
    methods.push_back(PropagationMethod::taylor());
    for (const auto &m : methods)
    {
        const auto r = propagate(m, psi, 3, d, jac);
        const double tol = 1e-12 * (1 + cov.norm());
        EXPECT_NEAR((r.mean - mean).norm(), 0.0, tol) << m.name();
        // first-order methods with d = 1 quadrature only get the mean
        if (m.kind == MethodKind::GaussQuadrature && m.order == 1)
            continue;
        EXPECT_NEAR((r.cov - cov).norm(), 0.0, tol) << m.name();
        EXPECT_NEAR((r.cross - cross).norm(), 0.0, tol) << m.name();
    }
}

TEST(Propagate, TaylorNeedsJacobian)
{
    EXPECT_THROW(propagate(PropagationMethod::taylor(), [](const ConstVectorRef &x, VectorRef y) { y = x; }, 2, gauss2()),
                 MissingDerivativeError);
}

TEST(Propagate, SquareOfStandardNormal)
{
    // y = x^2, x ~ N(0,1): mean 1, variance 2
    const auto d = joint_from_marginals({MarginalDistribution::gaussian(0.0, 1.0)});
    const auto sq = [](const ConstVectorRef &x) { return x(0) * x(0); };
    EXPECT_NEAR(scalar_var(PropagationMethod::quadrature(3), d, sq), 2.0, 1e-12);
    EXPECT_NEAR(scalar_var(PropagationMethod::pce(3, 3), d, sq), 2.0, 1e-12);
    EXPECT_NEAR(scalar_var(PropagationMethod::stirling2(), d, sq), 2.0, 1e-12);
    // Stirling-1 sees no curvature; UT adds (1 - alpha^2 + beta)(y0 - mean)^2 = 2 on top of 2
    EXPECT_NEAR(scalar_var(PropagationMethod::stirling1(), d, sq), 0.0, 1e-12);
    EXPECT_NEAR(scalar_var(PropagationMethod::unscented(), d, sq), 4.0, 1e-12);
    EXPECT_NEAR(scalar_var(PropagationMethod::unscented(1.0, 0.0), d, sq), 2.0, 1e-12);
    const auto r = propagate(PropagationMethod::unscented(), [&](const ConstVectorRef &x, VectorRef y) { y(0) = sq(x); }, 1, d);
    EXPECT_NEAR(r.mean(0), 1.0, 1e-12);
    const auto s1 = propagate(PropagationMethod::stirling1(), [&](const ConstVectorRef &x, VectorRef y) { y(0) = sq(x); }, 1, d);
    EXPECT_NEAR(s1.mean(0), 0.0, 1e-15);
}

TEST(Propagate, MonteCarloConverges)
{
    const auto d = joint_from_marginals({MarginalDistribution::gaussian(0.0, 1.0)});
    const auto r = propagate(PropagationMethod::monte_carlo(200000, 11),
                             [](const ConstVectorRef &x, VectorRef y) { y(0) = x(0) * x(0); }, 1, d);
    EXPECT_NEAR(r.mean(0), 1.0, 0.02);
    EXPECT_NEAR(r.cov(0, 0), 2.0, 0.05);
    // same seed, same estimate
    const auto r2 = propagate(PropagationMethod::monte_carlo(200000, 11),
                              [](const ConstVectorRef &x, VectorRef y) { y(0) = x(0) * x(0); }, 1, d);
    EXPECT_EQ(r.mean(0), r2.mean(0));
}

TEST(Propagate, MixedFamilyProduct)
{
    // y = x1 x2, x1 ~ N(1, 4), x2 ~ U(0, 2): E y = 1, Var y = E x1^2 E x2^2 - 1 = 5 * 4/3 - 1
    const auto d = joint_from_marginals({MarginalDistribution::gaussian(1, 4), MarginalDistribution::uniform(0, 2)});
    VectorMap psi = [](const ConstVectorRef &x, VectorRef y) { y(0) = x(0) * x(1); };
    for (const auto &m : {PropagationMethod::quadrature(2), PropagationMethod::pce(3, 3)})
    {
        const auto r = propagate(m, psi, 1, d);
        EXPECT_NEAR(r.mean(0), 1.0, 1e-12) << m.name();
        EXPECT_NEAR(r.cov(0, 0), 17.0 / 3.0, 1e-12) << m.name();
        // Cov[y, x1] = E[x1^2] E[x2] - E x1 E y = 5 - 1 = 4; Cov[y, x2] = E x1 Var x2 = 1/3
        EXPECT_NEAR(r.cross(0, 0), 4.0, 1e-12) << m.name();
        EXPECT_NEAR(r.cross(0, 1), 1.0 / 3.0, 1e-12) << m.name();
    }
}

TEST(Propagate, ForcedFamilyMismatchThrows)
{
    const auto d = joint_from_marginals({MarginalDistribution::uniform(0, 1)});
    auto m = PropagationMethod::quadrature(3);
    m.family = PolyFamily::HermiteProbabilists;
    EXPECT_THROW(generate_points(m, d), FamilyMismatchError);
    m.family = PolyFamily::Legendre;
    EXPECT_NO_THROW(generate_points(m, d));
}

TEST(Propagate, NonFiniteOutputRaises)
{
    const auto d = joint_from_marginals({MarginalDistribution::gaussian(0.0, 1.0)});
    VectorMap bad = [](const ConstVectorRef &x, VectorRef y) { y(0) = x(0) > 1.0 ? std::nan("") : 0.0; };
    try
    {
        propagate(PropagationMethod::unscented(), bad, 1, d);
        FAIL() << "expected PropagationError";
    }
    catch (const PropagationError &e)
    {
        EXPECT_GT(e.point()(0), 1.0);
    }
}

TEST(Pce, CoefficientsOfKnownExpansions)
{
    // x^2 = He_2(x) + 1 for x ~ N(0,1)
    const auto g = joint_from_marginals({MarginalDistribution::gaussian(0.0, 1.0)});
    Matrix a = pce_coefficients([](const ConstVectorRef &x, VectorRef y) { y(0) = x(0) * x(0); }, 1, g, 3, 3);
    ASSERT_EQ(a.cols(), 3);
    EXPECT_NEAR(a(0, 0), 1.0, 1e-13);
    EXPECT_NEAR(a(0, 1), 0.0, 1e-13);
    EXPECT_NEAR(a(0, 2), 1.0, 1e-13);
    // x ~ U(0,2) is 1 + zeta with zeta uniform on [-1,1]
    const auto u = joint_from_marginals({MarginalDistribution::uniform(0.0, 2.0)});
    a = pce_coefficients([](const ConstVectorRef &x, VectorRef y) { y(0) = x(0); }, 1, u, 2, 2);
    EXPECT_NEAR(a(0, 0), 1.0, 1e-14);
    EXPECT_NEAR(a(0, 1), 1.0, 1e-14);
}

TEST(Pce, TotalDegreeIndices)
{
    const auto idx = total_degree_indices(2, 2);
    ASSERT_EQ(idx.size(), 6u);
    EXPECT_EQ(idx[0], (std::vector<int>{0, 0}));
    std::set<std::vector<int>> seen(idx.begin(), idx.end());
    EXPECT_EQ(seen.size(), 6u);
    int prev = 0;
    for (const auto &v : idx)
    {
        const int deg = v[0] + v[1];
        EXPECT_LE(deg, 2);
        EXPECT_GE(deg, prev);
        prev = deg;
    }
    // binomial(n + p, p)
    EXPECT_EQ(total_degree_indices(3, 3).size(), 20u);
    EXPECT_EQ(total_degree_indices(4, 0).size(), 1u);
}

TEST(Estimators, ScalarVarianceMatchesMatrixEstimator)
{
    const auto d = joint_from_marginals({MarginalDistribution::gaussian(0.5, 2.0), MarginalDistribution::uniform(-1, 3)});
    auto methods = point_methods();
    methods.push_back(PropagationMethod::monte_carlo(50, 3));
    for (const auto &m : methods)
    {
        const auto ps = generate_points(m, d);
        Matrix y(1, ps.size());
        for (Index k = 0; k < ps.size(); ++k)
            y(0, k) = std::sin(ps.points(0, k)) + ps.points(1, k) * ps.points(0, k);
        const Vector mu = estimate_mean(ps, y);
        const Matrix c = estimate_cov(ps, y, mu);
        EXPECT_NEAR(estimate_var1(ps, y.row(0).transpose(), mu(0)), c(0, 0), 1e-12 * (1 + c(0, 0))) << m.name();
    }
}

TEST(Estimators, ScalarVarianceGradientMatchesFiniteDifferences)
{
    const auto d = gauss2();
    auto methods = point_methods();
    methods.push_back(PropagationMethod::monte_carlo(20, 5));
    for (const auto &m : methods)
    {
        const auto ps = generate_points(m, d);
        Vector y(ps.size());
        for (Index k = 0; k < ps.size(); ++k)
            y(k) = std::exp(0.3 * ps.points(0, k)) - ps.points(1, k) * ps.points(1, k);
        auto var = [&](const Vector &v) { return estimate_var1(ps, v, ps.w_mean.dot(v)); };
        Vector g(ps.size());
        estimate_var1_gradient(ps, y, ps.w_mean.dot(y), g);
        for (Index k = 0; k < ps.size(); ++k)
        {
            const double h = 1e-6;
            Vector yp = y, ym = y;
            yp(k) += h;
            ym(k) -= h;
            const double fd = (var(yp) - var(ym)) / (2 * h);
            EXPECT_NEAR(g(k), fd, 1e-6 * (1 + std::abs(fd))) << m.name() << " k=" << k;
        }
    }
}

TEST(Estimators, CovarianceIsSymmetricPsdOnRandomMaps)
{
    RngStream rng(17);
    const auto d = gauss2();
    for (int trial = 0; trial < 20; ++trial)
    {
        Matrix w(3, 2);
        for (Index i = 0; i < 3; ++i)
            for (Index j = 0; j < 2; ++j)
                w(i, j) = rng.normal(static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(3 * i + j));
        VectorMap psi = [&](const ConstVectorRef &x, VectorRef y) { y = (w * x).array().tanh(); };
        for (const auto &m : point_methods())
        {
            const auto r = propagate(m, psi, 3, d);
            EXPECT_EQ((r.cov - r.cov.transpose()).cwiseAbs().maxCoeff(), 0.0);
            if (m.kind == MethodKind::Unscented && m.alpha < 1.0)
                continue; // negative centre weight can make the UT estimate indefinite
            const Eigen::SelfAdjointEigenSolver<Matrix> es(r.cov);
            EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12) << m.name();
        }
    }
}
