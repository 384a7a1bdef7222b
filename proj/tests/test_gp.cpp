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

#include "smpc/gp.hpp"
#include "smpc/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <limits>

using namespace smpc;

namespace
{
    Matrix random_inputs(Index m, Index nz, std::uint64_t seed)
    {
        RngStream rng(seed);
        Matrix z(m, nz);
        for (Index a = 0; a < m; ++a)
            for (Index j = 0; j < nz; ++j)
                z(a, j) = 4.0 * rng.uniform(static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(j)) - 2.0;
        return z;
    }

    void check_kernel_gradient(const Kernel &k, const Vector &z, const Vector &zp)
    {
        Vector g = Vector::Zero(z.size());
        k.add_grad_z(z, zp, 1.0, g);
        for (Index j = 0; j < z.size(); ++j)
        {
            const double h = 1e-6;
            Vector a = z, b = z;
            a(j) += h;
            b(j) -= h;
            const double fd = (k.eval(a, zp) - k.eval(b, zp)) / (2 * h);
            EXPECT_NEAR(g(j), fd, 1e-7 * (1 + std::abs(fd))) << j;
        }
    }
} // namespace

TEST(Kernel, SquaredExponentialValues)
{
    Vector ls(2);
    ls << 1.0, 2.0;
    const auto k = Kernel::squared_exponential(3.0, ls);
    Vector z(2), zp(2);
    z << 0.0, 0.0;
    zp << 1.0, 2.0;
    EXPECT_NEAR(k.eval(z, z), 3.0, 1e-15);
    EXPECT_NEAR(k.eval(z, zp), 3.0 * std::exp(-0.5 * (1.0 + 1.0)), 1e-15);
    EXPECT_NEAR(k.eval(z, zp), k.eval(zp, z), 0.0);
}

TEST(Kernel, InfiniteLengthscaleSwitchesInputOff)
{
    Vector ls(2);
    ls << 0.5, std::numeric_limits<double>::infinity();
    const auto k = Kernel::squared_exponential(1.0, ls);
    Vector z(2), zp(2);
    z << 0.3, -100.0;
    zp << 0.3, 55.0;
    EXPECT_NEAR(k.eval(z, zp), 1.0, 1e-15);
    Vector g = Vector::Zero(2);
    k.add_grad_z(z, zp, 1.0, g);
    EXPECT_EQ(g(1), 0.0);
}

TEST(Kernel, LocallyPeriodicValues)
{
    const auto k = Kernel::locally_periodic(2.0, 1.5, 0.7);
    Vector z(1), zp(1);
    z << 0.0;
    zp << 0.7;
    // r equal to the period: sin term vanishes, only the decay remains
    EXPECT_NEAR(k.eval(z, zp), 2.0 * std::exp(-0.49 / (2 * 2.25)), 1e-14);
    EXPECT_NEAR(k.eval(z, z), 2.0, 1e-15);
}

TEST(Kernel, GradientsMatchFiniteDifferences)
{
    Vector ls(3);
    ls << 0.7, 1.3, 2.0;
    const auto se = Kernel::squared_exponential(1.7, ls);
    const auto lp = Kernel::locally_periodic(0.9, 1.1, 0.8);
    const Matrix z = random_inputs(12, 3, 5);
    for (Index a = 0; a + 1 < z.rows(); a += 2)
    {
        check_kernel_gradient(se, z.row(a).transpose(), z.row(a + 1).transpose());
        check_kernel_gradient(lp, z.row(a).transpose(), z.row(a + 1).transpose());
    }
}

TEST(Kernel, InvalidHyperparameters)
{
    EXPECT_THROW(Kernel::squared_exponential(-1.0, Vector::Ones(1)), ParameterError);
    EXPECT_THROW(Kernel::squared_exponential(1.0, Vector::Zero(1)), ParameterError);
    EXPECT_THROW(Kernel::locally_periodic(1.0, 1.0, 0.0), ParameterError);
    const auto k = Kernel::squared_exponential(1.0, Vector::Ones(2));
    EXPECT_THROW(gp_fit({k}, Matrix::Zero(3, 3), Matrix::Zero(3, 1), Vector::Ones(1)), ParameterError);
}

TEST(GPModel, MatchesDirectPosteriorFormulas)
{
    const Index m = 15, nz = 2;
    const Matrix zin = random_inputs(m, nz, 1);
    Matrix zout(m, 2);
    for (Index a = 0; a < m; ++a)
    {
        zout(a, 0) = std::sin(zin(a, 0)) + 0.5 * zin(a, 1);
        zout(a, 1) = zin(a, 0) * zin(a, 1);
    }
    Vector ls(2);
    ls << 0.8, 1.4;
    const std::vector<Kernel> ks{Kernel::squared_exponential(1.2, ls), Kernel::locally_periodic(1.0, 1.5, 2.0)};
    Vector noise(2);
    noise << 1e-3, 1e-2;
    const GPModel gp = gp_fit(ks, zin, zout, noise);
    const Matrix zq = random_inputs(6, nz, 99);
    for (Index q = 0; q < zq.rows(); ++q)
    {
        Vector mean(2), var(2);
        gp.predict(zq.row(q).transpose(), mean, var);
        for (Index i = 0; i < 2; ++i)
        {
            // oracle: explicit inverse of the Gram matrix
            Matrix kk(m, m);
            Vector kstar(m);
            for (Index a = 0; a < m; ++a)
            {
                kstar(a) = ks[i].eval(zq.row(q).transpose(), zin.row(a).transpose());
                for (Index b = 0; b < m; ++b)
                    kk(a, b) = ks[i].eval(zin.row(a).transpose(), zin.row(b).transpose());
            }
            kk.diagonal().array() += noise(i);
            const Matrix kinv = kk.fullPivLu().inverse();
            EXPECT_NEAR(mean(i), kstar.dot(kinv * zout.col(i)), 1e-9);
            EXPECT_NEAR(var(i), ks[i].eval(zq.row(q).transpose(), zq.row(q).transpose()) - kstar.dot(kinv * kstar), 1e-9);
        }
    }
}

TEST(GPModel, InterpolatesWithSmallNoiseAndRevertsFarAway)
{
    Matrix zin(5, 1), zout(5, 1);
    zin << -2, -1, 0, 1, 2;
    zout << 4, 1, 0, 1, 4;
    const GPModel gp = gp_fit({Kernel::squared_exponential(2.0, Vector::Ones(1))}, zin, zout, Vector::Constant(1, 1e-9));
    Vector mean(1), var(1), z(1);
    for (Index a = 0; a < 5; ++a)
    {
        z(0) = zin(a, 0);
        gp.predict(z, mean, var);
        EXPECT_NEAR(mean(0), zout(a, 0), 1e-5);
        EXPECT_LT(var(0), 1e-6);
        EXPECT_GE(var(0), 0.0);
    }
    z(0) = 50.0;
    gp.predict(z, mean, var);
    EXPECT_NEAR(mean(0), 0.0, 1e-12);
    EXPECT_NEAR(var(0), 2.0, 1e-12);
}

TEST(GPModel, MeanJacobianMatchesFiniteDifferences)
{
    const Matrix zin = random_inputs(10, 3, 8);
    Matrix zout(10, 3);
    for (Index a = 0; a < 10; ++a)
        zout.row(a) << std::cos(zin(a, 0)), zin(a, 1) - zin(a, 2), 0.0;
    Vector ls(3);
    ls << 1.0, 0.9, std::numeric_limits<double>::infinity();
    const GPModel gp = gp_fit({Kernel::squared_exponential(1.0, ls), Kernel::locally_periodic(1.0, 1.2, 1.7), Kernel::none()},
                              zin, zout, Vector::Constant(3, 1e-4));
    Vector z(3);
    z << 0.2, -0.4, 0.9;
    Matrix jac(3, 3);
    gp.mean_jacobian(z, jac);
    for (Index j = 0; j < 3; ++j)
    {
        const double h = 1e-6;
        Vector a = z, b = z, ma(3), mb(3), v(3);
        a(j) += h;
        b(j) -= h;
        gp.predict(a, ma, v);
        gp.predict(b, mb, v);
        const Vector fd = (ma - mb) / (2 * h);
        EXPECT_NEAR((jac.col(j) - fd).norm(), 0.0, 1e-6 * (1 + fd.norm())) << j;
    }
    EXPECT_EQ(jac.row(2).norm(), 0.0);
}

TEST(GPModel, DuplicateInputsWithoutNoiseFail)
{
    Matrix zin(2, 1), zout(2, 1);
    zin << 1.0, 1.0;
    zout << 0.0, 1.0;
    EXPECT_THROW(gp_fit({Kernel::squared_exponential(1.0, Vector::Ones(1))}, zin, zout, Vector::Zero(1)),
                 IndefiniteCovarianceError);
    EXPECT_NO_THROW(gp_fit({Kernel::squared_exponential(1.0, Vector::Ones(1))}, zin, zout, Vector::Constant(1, 0.1)));
}

TEST(GPData, CsvRoundTrip)
{
    GPData d{random_inputs(7, 2, 3), random_inputs(7, 3, 4)};
    const std::string path = ::testing::TempDir() + "gp_roundtrip.csv";
    gp_save_csv(path, d);
    const GPData r = gp_load_csv(path);
    EXPECT_EQ(r.zin, d.zin);
    EXPECT_EQ(r.zout, d.zout);
    std::remove(path.c_str());
    EXPECT_THROW(gp_load_csv(path), ParameterError);
}
