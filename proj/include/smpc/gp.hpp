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

#ifndef SMPC_GP_HPP_
#define SMPC_GP_HPP_

#include "smpc/types.hpp"

#include <string>
#include <vector>

namespace smpc
{
    enum class KernelKind
    {
        None, ///< output dimension not modeled: zero mean and variance
        SquaredExponential,
        LocallyPeriodic
    };

    struct Kernel
    {
        KernelKind kind = KernelKind::None;
        double sf2 = 1.0;    ///< signal variance
        Vector lengthscales; ///< SE, one per input (infinity switches an input off)
        double ell = 1.0;    ///< LP lengthscale
        double period = 1.0; ///< LP period

        static Kernel none();
        static Kernel squared_exponential(double sf2, Vector lengthscales);
        static Kernel locally_periodic(double sf2, double ell, double period);

        double eval(const ConstVectorRef &z, const ConstVectorRef &zp) const;
        /// dk(z, z')/dz added with factor `scale` into out.
        void add_grad_z(const ConstVectorRef &z, const ConstVectorRef &zp, double scale, VectorRef out) const;
        void validate(Index nz) const;
    };

    inline double kernel_eval(const Kernel &k, const ConstVectorRef &z, const ConstVectorRef &zp)
    {
        return k.eval(z, zp);
    }

    /// One GP per output dimension sharing the training inputs. Immutable after fitting.
    class GPModel
    {
    public:
        GPModel() = default;

        Index input_dim() const noexcept { return nz_; }
        Index output_dim() const noexcept { return static_cast<Index>(kernels_.size()); }
        Index size() const noexcept { return z_.rows(); }
        const std::vector<Kernel> &kernels() const noexcept { return kernels_; }

        /// Mean and diagonal variance at z; variance clamped at 0.
        void predict(const ConstVectorRef &z, VectorRef mean, VectorRef var) const;
        /// d mean / d z (Nx x Nz), analytic through the kernels.
        void mean_jacobian(const ConstVectorRef &z, MatrixRef jac) const;

        friend GPModel gp_fit(const std::vector<Kernel> &kernels, const Matrix &zin, const Matrix &zout,
                              const Vector &noise);

    private:
        Index nz_ = 0;
        std::vector<Kernel> kernels_;
        Matrix z_;                  ///< M x Nz
        std::vector<Matrix> chol_;  ///< per output: L of K + noise I
        std::vector<Vector> alpha_; ///< per output: (K + noise I)^-1 z_out
    };

    /**
     * Fit one GP per output column. zin is M x Nz, zout is M x Nx, noise holds the per-output
     * noise variances. Throws IndefiniteCovarianceError when K + noise I cannot be factorized.
     */
    GPModel gp_fit(const std::vector<Kernel> &kernels, const Matrix &zin, const Matrix &zout, const Vector &noise);

    struct GPData
    {
        Matrix zin;
        Matrix zout;
    };

    /// CSV with header z_1,...,z_Nz,out_1,...,out_Nx.
    GPData gp_load_csv(const std::string &path);
    void gp_save_csv(const std::string &path, const GPData &data);
} // namespace smpc

#endif // SMPC_GP_HPP_
