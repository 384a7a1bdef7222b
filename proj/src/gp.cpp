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

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace smpc
{
    Kernel Kernel::none()
    {
        return Kernel{};
    }

    Kernel Kernel::squared_exponential(double sf2, Vector lengthscales)
    {
        Kernel k;
        k.kind = KernelKind::SquaredExponential;
        k.sf2 = sf2;
        k.lengthscales = std::move(lengthscales);
        k.validate(k.lengthscales.size());
        return k;
    }

    Kernel Kernel::locally_periodic(double sf2, double ell, double period)
    {
        Kernel k;
        k.kind = KernelKind::LocallyPeriodic;
        k.sf2 = sf2;
        k.ell = ell;
        k.period = period;
        k.validate(0);
        return k;
    }

    void Kernel::validate(Index nz) const
    {
        if (kind == KernelKind::None)
            return;
        if (!(sf2 > 0.0))
            throw ParameterError("kernel: signal variance must be > 0");
        if (kind == KernelKind::SquaredExponential)
        {
            if (nz > 0 && lengthscales.size() != nz)
                throw ParameterError("SE kernel: need one lengthscale per input");
            if (lengthscales.size() > 0 && !(lengthscales.array() > 0.0).all())
                throw ParameterError("SE kernel: lengthscales must be > 0");
        }
        else if (!(ell > 0.0) || !(period > 0.0))
        {
            throw ParameterError("LP kernel: lengthscale and period must be > 0");
        }
    }

    double Kernel::eval(const ConstVectorRef &z, const ConstVectorRef &zp) const
    {
        switch (kind)
        {
        case KernelKind::None:
            return 0.0;
        case KernelKind::SquaredExponential:
        {
            double s = 0.0;
            for (Index j = 0; j < z.size(); ++j)
            {
                const double d = (z(j) - zp(j)) / lengthscales(j);
                s += d * d;
            }
            return sf2 * std::exp(-0.5 * s);
        }
        case KernelKind::LocallyPeriodic:
        {
            const double r = (z - zp).norm();
            const double sn = std::sin(M_PI * r / period);
            return sf2 * std::exp(-2.0 * sn * sn / (ell * ell)) * std::exp(-r * r / (2.0 * ell * ell));
        }
        }
        return 0.0;
    }

    void Kernel::add_grad_z(const ConstVectorRef &z, const ConstVectorRef &zp, double scale, VectorRef out) const
    {
        switch (kind)
        {
        case KernelKind::None:
            return;
        case KernelKind::SquaredExponential:
        {
            const double k = eval(z, zp) * scale;
            for (Index j = 0; j < z.size(); ++j)
                out(j) -= k * (z(j) - zp(j)) / (lengthscales(j) * lengthscales(j));
            return;
        }
        case KernelKind::LocallyPeriodic:
        {
            const double r = (z - zp).norm();
            const double l2 = ell * ell;
            const double w = 2.0 * M_PI / period;
            const double sinc = r > 1e-12 ? std::sin(w * r) / r : w; // sin(w r)/r -> w
            const double f = eval(z, zp) * scale * (-(w / l2) * sinc - 1.0 / l2);
            out.noalias() += f * (z - zp);
            return;
        }
        }
    }

    GPModel gp_fit(const std::vector<Kernel> &kernels, const Matrix &zin, const Matrix &zout, const Vector &noise)
    {
        const Index m = zin.rows(), nz = zin.cols(), nx = static_cast<Index>(kernels.size());
        if (zout.rows() != m || zout.cols() != nx)
            throw ParameterError("gp_fit: output data must be M x Nx with one kernel per output");
        if (noise.size() != nx || (noise.array() < 0.0).any())
            throw ParameterError("gp_fit: need one noise variance >= 0 per output");
        GPModel g;
        g.nz_ = nz;
        g.kernels_ = kernels;
        g.z_ = zin;
        for (Index i = 0; i < nx; ++i)
        {
            const Kernel &k = kernels[static_cast<std::size_t>(i)];
            k.validate(nz);
            if (k.kind == KernelKind::None || m == 0)
            {
                g.chol_.emplace_back();
                g.alpha_.emplace_back(Vector::Zero(m));
                continue;
            }
            Matrix kk(m, m);
            for (Index a = 0; a < m; ++a)
                for (Index b = 0; b <= a; ++b)
                    kk(a, b) = kk(b, a) = k.eval(zin.row(a).transpose(), zin.row(b).transpose());
            kk.diagonal().array() += noise(i);
            Eigen::LLT<Matrix> llt(kk);
            if (llt.info() != Eigen::Success)
                throw IndefiniteCovarianceError("gp_fit: Gram matrix of output " + std::to_string(i) +
                                                    " is not positive definite (duplicate inputs?); "
                                                    "add a jitter or use a positive noise variance",
                                                0.0);
            g.alpha_.emplace_back(llt.solve(zout.col(i)));
            g.chol_.emplace_back(llt.matrixL());
        }
        return g;
    }

    void GPModel::predict(const ConstVectorRef &z, VectorRef mean, VectorRef var) const
    {
        const Index m = z_.rows();
        Vector kstar(m);
        for (Index i = 0; i < output_dim(); ++i)
        {
            const Kernel &k = kernels_[static_cast<std::size_t>(i)];
            if (k.kind == KernelKind::None)
            {
                mean(i) = 0.0;
                var(i) = 0.0;
                continue;
            }
            const double kss = k.eval(z, z);
            if (m == 0)
            {
                mean(i) = 0.0;
                var(i) = kss;
                continue;
            }
            for (Index a = 0; a < m; ++a)
                kstar(a) = k.eval(z, z_.row(a).transpose());
            mean(i) = kstar.dot(alpha_[static_cast<std::size_t>(i)]);
            chol_[static_cast<std::size_t>(i)].triangularView<Eigen::Lower>().solveInPlace(kstar);
            var(i) = std::max(0.0, kss - kstar.squaredNorm());
        }
    }

    void GPModel::mean_jacobian(const ConstVectorRef &z, MatrixRef jac) const
    {
        jac.setZero();
        Vector row(nz_);
        for (Index i = 0; i < output_dim(); ++i)
        {
            const Kernel &k = kernels_[static_cast<std::size_t>(i)];
            if (k.kind == KernelKind::None)
                continue;
            row.setZero();
            for (Index a = 0; a < z_.rows(); ++a)
                k.add_grad_z(z, z_.row(a).transpose(), alpha_[static_cast<std::size_t>(i)](a), row);
            jac.row(i) = row.transpose();
        }
    }

    GPData gp_load_csv(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw ParameterError("gp_load_csv: cannot open " + path);
        std::string line;
        if (!std::getline(in, line))
            throw ParameterError("gp_load_csv: empty file " + path);
        Index nz = 0, nx = 0;
        {
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ','))
            {
                while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' '))
                    cell.pop_back();
                if (cell.rfind("z_", 0) == 0)
                {
                    if (nx > 0)
                        throw ParameterError("gp_load_csv: z_ columns must precede out_ columns");
                    ++nz;
                }
                else if (cell.rfind("out_", 0) == 0)
                    ++nx;
                else
                    throw ParameterError("gp_load_csv: unexpected header column '" + cell + "'");
            }
        }
        std::vector<std::vector<double>> rows;
        while (std::getline(in, line))
        {
            if (line.empty() || line == "\r")
                continue;
            std::stringstream ss(line);
            std::string cell;
            std::vector<double> r;
            while (std::getline(ss, cell, ','))
                r.push_back(std::stod(cell));
            if (static_cast<Index>(r.size()) != nz + nx)
                throw ParameterError("gp_load_csv: row has wrong number of columns");
            rows.push_back(std::move(r));
        }
        GPData d{Matrix(static_cast<Index>(rows.size()), nz), Matrix(static_cast<Index>(rows.size()), nx)};
        for (std::size_t a = 0; a < rows.size(); ++a)
            for (Index j = 0; j < nz + nx; ++j)
            {
                if (j < nz)
                    d.zin(static_cast<Index>(a), j) = rows[a][static_cast<std::size_t>(j)];
                else
                    d.zout(static_cast<Index>(a), j - nz) = rows[a][static_cast<std::size_t>(j)];
            }
        return d;
    }

    void gp_save_csv(const std::string &path, const GPData &data)
    {
        std::ofstream out(path);
        if (!out)
            throw ParameterError("gp_save_csv: cannot write " + path);
        for (Index j = 0; j < data.zin.cols(); ++j)
            out << (j ? "," : "") << "z_" << j + 1;
        for (Index j = 0; j < data.zout.cols(); ++j)
            out << "," << "out_" << j + 1;
        out << "\n" << std::setprecision(17);
        for (Index a = 0; a < data.zin.rows(); ++a)
        {
            for (Index j = 0; j < data.zin.cols(); ++j)
                out << (j ? "," : "") << data.zin(a, j);
            for (Index j = 0; j < data.zout.cols(); ++j)
                out << "," << data.zout(a, j);
            out << "\n";
        }
    }
} // namespace smpc
