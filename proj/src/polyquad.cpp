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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace smpc
{
    double poly_eval(PolyFamily family, int n, double x)
    {
        if (n < 0)
            throw ParameterError("poly_eval: degree must be >= 0");
        if (n == 0)
            return 1.0;
        double pm1 = 1.0, p = x;
        for (int k = 1; k < n; ++k)
        {
            const double kk = static_cast<double>(k);
            const double next = family == PolyFamily::HermiteProbabilists
                                    ? x * p - kk * pm1
                                    : ((2.0 * kk + 1.0) * x * p - kk * pm1) / (kk + 1.0);
            pm1 = p;
            p = next;
        }
        return p;
    }

    void poly_eval_all(PolyFamily family, int n, double x, double *out)
    {
        out[0] = 1.0;
        if (n >= 1)
            out[1] = x;
        for (int k = 1; k < n; ++k)
        {
            const double kk = static_cast<double>(k);
            out[k + 1] = family == PolyFamily::HermiteProbabilists
                             ? x * out[k] - kk * out[k - 1]
                             : ((2.0 * kk + 1.0) * x * out[k] - kk * out[k - 1]) / (kk + 1.0);
        }
    }

    double norm_squared(PolyFamily family, int n)
    {
        if (n < 0)
            throw ParameterError("norm_squared: degree must be >= 0");
        if (family == PolyFamily::Legendre)
            return 1.0 / (2.0 * n + 1.0);
        double f = 1.0;
        for (int k = 2; k <= n; ++k)
            f *= k;
        return f;
    }

    void tridiagonal_ql(Vector &d, Vector &e, Matrix &z)
    {
        const Index n = d.size();
        if (n == 0)
            return;
        if (e.size() < n)
        {
            e.conservativeResize(n);
        }
        e(n - 1) = 0.0;
        const double eps = std::numeric_limits<double>::epsilon();
        for (Index l = 0; l < n; ++l)
        {
            int iter = 0;
            Index m;
            do
            {
                for (m = l; m < n - 1; ++m)
                {
                    const double dd = std::abs(d(m)) + std::abs(d(m + 1));
                    if (std::abs(e(m)) <= eps * dd)
                        break;
                }
                if (m == l)
                    break;
                if (++iter > 60)
                    throw std::runtime_error("tridiagonal_ql: no convergence");
                // Wilkinson shift from the leading 2x2 block
                double g = (d(l + 1) - d(l)) / (2.0 * e(l));
                double r = std::hypot(g, 1.0);
                g = d(m) - d(l) + e(l) / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                Index i;
                bool deflated = false;
                for (i = m - 1; i >= l; --i)
                {
                    double f = s * e(i);
                    const double b = c * e(i);
                    r = std::hypot(f, g);
                    e(i + 1) = r;
                    if (r == 0.0)
                    {
                        d(i + 1) -= p;
                        e(m) = 0.0;
                        deflated = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d(i + 1) - p;
                    r = (d(i) - g) * s + 2.0 * c * b;
                    p = s * r;
                    d(i + 1) = g + p;
                    g = c * r - b;
                    for (Index k = 0; k < z.rows(); ++k)
                    {
                        f = z(k, i + 1);
                        z(k, i + 1) = s * z(k, i) + c * f;
                        z(k, i) = c * z(k, i) - s * f;
                    }
                }
                if (deflated)
                    continue;
                d(l) -= p;
                e(l) = g;
                e(m) = 0.0;
            } while (true);
        }
    }

    QuadratureRule gauss_rule(PolyFamily family, int d)
    {
        if (d < 1 || d > 64)
            throw ParameterError("gauss_rule: order must be in [1, 64], got " + std::to_string(d));
        Vector diag = Vector::Zero(d);
        Vector off = Vector::Zero(d);
        for (int k = 1; k < d; ++k)
        {
            const double kk = static_cast<double>(k);
            off(k - 1) = family == PolyFamily::HermiteProbabilists ? std::sqrt(kk)
                                                                   : kk / std::sqrt(4.0 * kk * kk - 1.0);
        }
        Matrix z = Matrix::Identity(d, d);
        tridiagonal_ql(diag, off, z);

        std::vector<Index> idx(static_cast<std::size_t>(d));
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](Index a, Index b) { return diag(a) < diag(b); });
        QuadratureRule rule{family, d, Vector(d), Vector(d)};
        for (int i = 0; i < d; ++i)
        {
            const Index k = idx[static_cast<std::size_t>(i)];
            rule.nodes(i) = diag(k);
            rule.weights(i) = z(0, k) * z(0, k);
        }
        // both weights are even: enforce exact mirror symmetry
        for (int i = 0; i < d / 2; ++i)
        {
            const int j = d - 1 - i;
            const double x = 0.5 * (rule.nodes(j) - rule.nodes(i));
            const double w = 0.5 * (rule.weights(i) + rule.weights(j));
            rule.nodes(i) = -x;
            rule.nodes(j) = x;
            rule.weights(i) = w;
            rule.weights(j) = w;
        }
        if (d % 2 == 1)
            rule.nodes(d / 2) = 0.0;
        rule.weights /= rule.weights.sum();
        return rule;
    }

    QuadratureRule gauss_rule_table(PolyFamily family, int d)
    {
        QuadratureRule r{family, d, Vector(d), Vector(d)};
        if (family == PolyFamily::HermiteProbabilists)
        {
            switch (d)
            {
            case 1:
                r.nodes << 0.0;
                r.weights << 1.0;
                return r;
            case 2:
                r.nodes << -1.0, 1.0;
                r.weights << 0.5, 0.5;
                return r;
            case 3:
                r.nodes << -std::sqrt(3.0), 0.0, std::sqrt(3.0);
                r.weights << 1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0;
                return r;
            case 4:
            {
                const double s6 = std::sqrt(6.0);
                const double a = std::sqrt(3.0 - s6), b = std::sqrt(3.0 + s6);
                r.nodes << -b, -a, a, b;
                const double wa = (3.0 + s6) / 12.0, wb = (3.0 - s6) / 12.0;
                r.weights << wb, wa, wa, wb;
                return r;
            }
            case 5:
            {
                const double s10 = std::sqrt(10.0);
                const double a = std::sqrt(5.0 - s10), b = std::sqrt(5.0 + s10);
                r.nodes << -b, -a, 0.0, a, b;
                const double wa = (7.0 + 2.0 * s10) / 60.0, wb = (7.0 - 2.0 * s10) / 60.0;
                r.weights << wb, wa, 8.0 / 15.0, wa, wb;
                return r;
            }
            default:
                break;
            }
        }
        else
        {
            switch (d)
            {
            case 1:
                r.nodes << 0.0;
                r.weights << 1.0;
                return r;
            case 2:
                r.nodes << -1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0);
                r.weights << 0.5, 0.5;
                return r;
            case 3:
                r.nodes << -std::sqrt(0.6), 0.0, std::sqrt(0.6);
                r.weights << 5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0;
                return r;
            case 4:
            {
                const double t = 2.0 / 7.0 * std::sqrt(6.0 / 5.0);
                const double a = std::sqrt(3.0 / 7.0 - t), b = std::sqrt(3.0 / 7.0 + t);
                const double s30 = std::sqrt(30.0);
                r.nodes << -b, -a, a, b;
                const double wa = (18.0 + s30) / 72.0, wb = (18.0 - s30) / 72.0;
                r.weights << wb, wa, wa, wb;
                return r;
            }
            case 5:
            {
                const double t = 2.0 * std::sqrt(10.0 / 7.0);
                const double a = std::sqrt(5.0 - t) / 3.0, b = std::sqrt(5.0 + t) / 3.0;
                const double s70 = std::sqrt(70.0);
                r.nodes << -b, -a, 0.0, a, b;
                const double wa = (322.0 + 13.0 * s70) / 1800.0, wb = (322.0 - 13.0 * s70) / 1800.0;
                r.weights << wb, wa, 64.0 / 225.0, wa, wb;
                return r;
            }
            default:
                break;
            }
        }
        throw ParameterError("gauss_rule_table: only orders 1..5 are tabulated");
    }

    TensorRule tensor_rule(const std::vector<PolyFamily> &families, const std::vector<int> &orders)
    {
        if (families.empty() || families.size() != orders.size())
            throw ParameterError("tensor_rule: family and order lists must be non-empty and equally long");
        TensorRule t;
        Index np = 1;
        for (std::size_t k = 0; k < families.size(); ++k)
        {
            t.rules.push_back(gauss_rule(families[k], orders[k]));
            np *= orders[k];
        }
        const Index dim = static_cast<Index>(families.size());
        t.points.resize(dim, np);
        t.weights.resize(np);
        std::vector<int> digit(families.size(), 0);
        for (Index p = 0; p < np; ++p)
        {
            double w = 1.0;
            for (Index j = 0; j < dim; ++j)
            {
                const auto &rj = t.rules[static_cast<std::size_t>(j)];
                t.points(j, p) = rj.nodes(digit[static_cast<std::size_t>(j)]);
                w *= rj.weights(digit[static_cast<std::size_t>(j)]);
            }
            t.weights(p) = w;
            // odometer increment, last dimension fastest
            for (Index j = dim - 1; j >= 0; --j)
            {
                auto &dj = digit[static_cast<std::size_t>(j)];
                if (++dj < orders[static_cast<std::size_t>(j)])
                    break;
                dj = 0;
            }
        }
        return t;
    }
} // namespace smpc
