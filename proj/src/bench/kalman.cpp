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

#include "smpc/bench/kalman.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <vector>

namespace smpc::bench
{
    DiscreteLinearSystem discretize(const Matrix &ac, const Matrix &bc, const Matrix &qc, double dt)
    {
        const Index n = ac.rows(), m = bc.cols();
        if (ac.cols() != n || bc.rows() != n || qc.rows() != n || qc.cols() != n)
            throw ParameterError("discretize: dimension mismatch");
        if (!(dt > 0.0))
            throw ParameterError("discretize: dt must be > 0");
        DiscreteLinearSystem s;
        Matrix aug = Matrix::Zero(n + m, n + m);
        aug.topLeftCorner(n, n) = ac * dt;
        aug.topRightCorner(n, m) = bc * dt;
        const Matrix e = aug.exp();
        s.a = e.topLeftCorner(n, n);
        s.b = e.topRightCorner(n, m);
        // Van Loan: exp([[-A, Q], [0, A^T]] dt) = [[., F^-1 Qd], [0, F^T]]
        Matrix vl = Matrix::Zero(2 * n, 2 * n);
        vl.topLeftCorner(n, n) = -ac * dt;
        vl.topRightCorner(n, n) = qc * dt;
        vl.bottomRightCorner(n, n) = ac.transpose() * dt;
        const Matrix ev = vl.exp();
        s.q = ev.bottomRightCorner(n, n).transpose() * ev.topRightCorner(n, n);
        symmetrize(s.q);
        return s;
    }

    KalmanFilter::KalmanFilter(DiscreteLinearSystem sys, Matrix c, Matrix r, Vector mean, Matrix cov)
        : sys_(std::move(sys)), c_(std::move(c)), r_(std::move(r))
    {
        const Index n = sys_.a.rows();
        if (sys_.a.cols() != n || sys_.b.rows() != n || sys_.q.rows() != n || sys_.q.cols() != n)
            throw ParameterError("KalmanFilter: system dimension mismatch");
        if (c_.cols() != n || r_.rows() != c_.rows() || r_.cols() != c_.rows())
            throw ParameterError("KalmanFilter: measurement dimension mismatch");
        reset(std::move(mean), std::move(cov));
    }

    void KalmanFilter::reset(Vector mean, Matrix cov)
    {
        if (mean.size() != sys_.a.rows() || cov.rows() != mean.size() || cov.cols() != mean.size())
            throw ParameterError("KalmanFilter: state dimension mismatch");
        mean_ = std::move(mean);
        cov_ = std::move(cov);
    }

    void KalmanFilter::predict(const Vector &u)
    {
        mean_ = sys_.a * mean_ + sys_.b * u;
        cov_ = sys_.a * cov_ * sys_.a.transpose() + sys_.q;
        symmetrize(cov_);
    }

    void KalmanFilter::update(const Vector &y)
    {
        if (y.size() != c_.rows())
            throw ParameterError("KalmanFilter: measurement size mismatch");
        std::vector<Index> keep;
        for (Index i = 0; i < y.size(); ++i)
            if (std::isfinite(r_(i, i)))
                keep.push_back(i);
        if (keep.empty())
            return;
        const Index k = static_cast<Index>(keep.size()), n = mean_.size();
        Matrix c(k, n), r(k, k);
        Vector innov(k);
        for (Index i = 0; i < k; ++i)
        {
            c.row(i) = c_.row(keep[i]);
            innov(i) = y(keep[i]);
            for (Index j = 0; j < k; ++j)
                r(i, j) = r_(keep[i], keep[j]);
        }
        innov -= c * mean_;
        const Matrix pct = cov_ * c.transpose();
        Matrix s = c * pct + r;
        symmetrize(s);
        Eigen::LLT<Matrix> llt(s);
        if (llt.info() != Eigen::Success || !s.allFinite())
            throw FilterError("KalmanFilter: innovation covariance is not positive definite");
        const Matrix gain = llt.solve(pct.transpose()).transpose();
        mean_ += gain * innov;
        // Joseph form keeps the covariance PSD
        const Matrix ikc = Matrix::Identity(n, n) - gain * c;
        cov_ = ikc * cov_ * ikc.transpose() + gain * r * gain.transpose();
        symmetrize(cov_);
    }
} // namespace smpc::bench
