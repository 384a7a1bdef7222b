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

#include "smpc/polyquad.hpp"
#include "smpc/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace smpc;

namespace
{
    // exact moments E[x^k] of the family density
    double moment(PolyFamily f, int k)
    {
        if (k % 2 == 1)
            return 0.0;
        if (f == PolyFamily::Legendre)
            return 1.0 / (k + 1.0);
        double m = 1.0; // (k-1)!!
        for (int j = k - 1; j > 0; j -= 2)
            m *= j;
        return m;
    }

    double apply(const QuadratureRule &r, int k)
    {
        double s = 0.0;
        for (Index i = 0; i < r.nodes.size(); ++i)
            s += r.weights(i) * std::pow(r.nodes(i), k);
        return s;
    }

    // sum |w x^k|: the scale that rounding errors in apply() are relative to
    double apply_abs(const QuadratureRule &r, int k)
    {
        double s = 0.0;
        for (Index i = 0; i < r.nodes.size(); ++i)
            s += r.weights(i) * std::pow(std::abs(r.nodes(i)), k);
        return s;
    }
} // namespace

TEST(PolyEval, Values)
{
    EXPECT_EQ(poly_eval(PolyFamily::HermiteProbabilists, 0, 3.7), 1.0);
    EXPECT_DOUBLE_EQ(poly_eval(PolyFamily::HermiteProbabilists, 2, 2.0), 3.0);
    EXPECT_DOUBLE_EQ(poly_eval(PolyFamily::Legendre, 2, 0.5), -0.125);
    EXPECT_DOUBLE_EQ(poly_eval(PolyFamily::HermiteProbabilists, 3, 2.0), 8.0 - 6.0);
    EXPECT_THROW(poly_eval(PolyFamily::Legendre, -1, 0.0), ParameterError);
}

TEST(NormSquared, Values)
{
    EXPECT_EQ(norm_squared(PolyFamily::HermiteProbabilists, 0), 1.0);
    EXPECT_EQ(norm_squared(PolyFamily::HermiteProbabilists, 2), 2.0);
    EXPECT_DOUBLE_EQ(norm_squared(PolyFamily::Legendre, 1), 1.0 / 3.0);
    // cross-check by quadrature
    for (auto f : {PolyFamily::HermiteProbabilists, PolyFamily::Legendre})
    {
        const auto r = gauss_rule(f, 20);
        for (int n = 0; n < 8; ++n)
        {
            double s = 0.0;
            for (Index i = 0; i < r.nodes.size(); ++i)
                s += r.weights(i) * std::pow(poly_eval(f, n, r.nodes(i)), 2);
            EXPECT_NEAR(s, norm_squared(f, n), 1e-10 * norm_squared(f, n));
        }
    }
}

TEST(Orthogonality, HighOrderQuadrature)
{
    for (auto f : {PolyFamily::HermiteProbabilists, PolyFamily::Legendre})
    {
        const auto r = gauss_rule(f, 30);
        for (int m = 0; m < 10; ++m)
            for (int n = 0; n < m; ++n)
            {
                double s = 0.0;
                for (Index i = 0; i < r.nodes.size(); ++i)
                    s += r.weights(i) * poly_eval(f, m, r.nodes(i)) * poly_eval(f, n, r.nodes(i));
                EXPECT_NEAR(s, 0.0, 1e-12 * std::sqrt(norm_squared(f, m) * norm_squared(f, n)));
            }
    }
}

TEST(GaussRule, SmallOrders)
{
    auto r = gauss_rule(PolyFamily::HermiteProbabilists, 1);
    EXPECT_NEAR(r.nodes(0), 0.0, 1e-15);
    EXPECT_NEAR(r.weights(0), 1.0, 1e-15);
    r = gauss_rule(PolyFamily::HermiteProbabilists, 3);
    EXPECT_NEAR(r.nodes(0), -std::sqrt(3.0), 1e-13);
    EXPECT_NEAR(r.nodes(1), 0.0, 1e-15);
    EXPECT_NEAR(r.nodes(2), std::sqrt(3.0), 1e-13);
    EXPECT_NEAR(r.weights(0), 1.0 / 6.0, 1e-13);
    EXPECT_NEAR(r.weights(1), 2.0 / 3.0, 1e-13);
    r = gauss_rule(PolyFamily::Legendre, 2);
    EXPECT_NEAR(r.nodes(1), 1.0 / std::sqrt(3.0), 1e-14);
    EXPECT_NEAR(r.weights(0), 0.5, 1e-14);
    EXPECT_THROW(gauss_rule(PolyFamily::Legendre, 0), ParameterError);
    EXPECT_THROW(gauss_rule(PolyFamily::Legendre, 65), ParameterError);
}

TEST(GaussRule, MatchesAnalyticTables)
{
    for (auto f : {PolyFamily::HermiteProbabilists, PolyFamily::Legendre})
        for (int d = 1; d <= 5; ++d)
        {
            const auto a = gauss_rule(f, d), b = gauss_rule_table(f, d);
            EXPECT_NEAR((a.nodes - b.nodes).cwiseAbs().maxCoeff(), 0.0, 1e-13) << d;
            EXPECT_NEAR((a.weights - b.weights).cwiseAbs().maxCoeff(), 0.0, 1e-13) << d;
        }
}

TEST(GaussRule, ExactnessSymmetryAllOrders)
{
    for (auto f : {PolyFamily::HermiteProbabilists, PolyFamily::Legendre})
        for (int d = 1; d <= 64; ++d)
        {
            const auto r = gauss_rule(f, d);
            EXPECT_NEAR(r.weights.sum(), 1.0, 1e-12);
            for (int i = 0; i + 1 < d; ++i)
                EXPECT_LT(r.nodes(i), r.nodes(i + 1));
            for (int i = 0; i < d; ++i)
                EXPECT_NEAR(r.nodes(i), -r.nodes(d - 1 - i), 1e-12 * (1 + std::abs(r.nodes(i))));
            // Hermite moments grow like (k-1)!!; keep them in a range where doubles can resolve 1e-10 relative
            const int kmax = f == PolyFamily::Legendre ? 2 * d - 1 : std::min(2 * d - 1, 24);
            for (int k = 0; k <= kmax; ++k)
            {
                const double exact = moment(f, k);
                EXPECT_NEAR(apply(r, k), exact, 1e-10 * std::max(1.0, apply_abs(r, k))) << "d=" << d << " k=" << k;
            }
        }
}

TEST(GaussRule, RandomPolynomialExactness)
{
    RngStream rng(77);
    for (int trial = 0; trial < 50; ++trial)
    {
        const auto f = trial % 2 ? PolyFamily::Legendre : PolyFamily::HermiteProbabilists;
        const int d = 1 + trial % 8;
        const auto r = gauss_rule(f, d);
        double exact = 0.0, quad = 0.0;
        for (int k = 0; k <= 2 * d - 1; ++k)
        {
            const double c = 2.0 * rng.uniform(static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(k)) - 1.0;
            exact += c * moment(f, k);
            quad += c * apply(r, k);
        }
        EXPECT_NEAR(quad, exact, 1e-9 * std::max(1.0, std::abs(exact)));
    }
}

TEST(TensorRule, OneDimensionEqualsGaussRule)
{
    const auto t = tensor_rule({PolyFamily::HermiteProbabilists}, {3});
    const auto r = gauss_rule(PolyFamily::HermiteProbabilists, 3);
    EXPECT_EQ(t.points.cols(), 3);
    EXPECT_NEAR((t.points.row(0).transpose() - r.nodes).norm(), 0.0, 1e-15);
    EXPECT_NEAR((t.weights - r.weights).norm(), 0.0, 1e-15);
}

TEST(TensorRule, ProductMoment)
{
    const auto t = tensor_rule({PolyFamily::HermiteProbabilists, PolyFamily::HermiteProbabilists}, {3, 3});
    EXPECT_EQ(t.points.cols(), 9);
    double m = 0.0;
    for (Index k = 0; k < 9; ++k)
        m += t.weights(k) * std::pow(t.points(0, k), 2) * std::pow(t.points(1, k), 2);
    EXPECT_NEAR(m, 1.0, 1e-12);
    // last dimension runs fastest
    EXPECT_EQ(t.points(0, 0), t.points(0, 1));
    EXPECT_NE(t.points(1, 0), t.points(1, 1));
}

TEST(TensorRule, MixedFamiliesWeights)
{
    const auto t = tensor_rule({PolyFamily::HermiteProbabilists, PolyFamily::Legendre}, {2, 2});
    EXPECT_EQ(t.points.cols(), 4);
    for (Index k = 0; k < 4; ++k)
        EXPECT_NEAR(t.weights(k), 0.25, 1e-14);
    EXPECT_THROW(tensor_rule({}, {}), ParameterError);
    EXPECT_THROW(tensor_rule({PolyFamily::Legendre}, {2, 3}), ParameterError);
}

TEST(TensorRule, WeightProductPropertyRandomGrids)
{
    RngStream rng(3);
    for (int trial = 0; trial < 100; ++trial)
    {
        const int dim = 1 + static_cast<int>(rng.uniform(trial, 0) * 3);
        std::vector<PolyFamily> fam;
        std::vector<int> ord;
        for (int j = 0; j < dim; ++j)
        {
            fam.push_back(rng.uniform(trial, 1 + j) < 0.5 ? PolyFamily::Legendre : PolyFamily::HermiteProbabilists);
            ord.push_back(1 + static_cast<int>(rng.uniform(trial, 10 + j) * 4));
        }
        const auto t = tensor_rule(fam, ord);
        EXPECT_NEAR(t.weights.sum(), 1.0, 1e-12);
        // recover the 1-D indices from the odometer order and compare weights
        for (Index p = 0; p < t.points.cols(); ++p)
        {
            Index rem = p;
            double w = 1.0;
            for (int j = dim - 1; j >= 0; --j)
            {
                const Index idx = rem % ord[static_cast<std::size_t>(j)];
                rem /= ord[static_cast<std::size_t>(j)];
                w *= t.rules[static_cast<std::size_t>(j)].weights(idx);
                EXPECT_EQ(t.points(j, p), t.rules[static_cast<std::size_t>(j)].nodes(idx));
            }
            EXPECT_NEAR(t.weights(p), w, 1e-15 * w);
        }
    }
}
