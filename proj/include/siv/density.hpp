// Copyright 2026 The sivsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>

#include <Eigen/Dense>

namespace siv {

using Complex = std::complex<double>;
using OperatorMatrix = Eigen::MatrixXcd;
using Vector3 = Eigen::Vector3d;

// Hermitian, unit trace, positive semidefinite. Construction enforces all three.
class DensityMatrix {
public:
    static constexpr double hermiticity_tolerance = 1e-10;
    static constexpr double trace_tolerance = 1e-10;
    static constexpr double positivity_tolerance = 1e-9;

    // Strict: throws DomainError unless rho already satisfies the invariants.
    explicit DensityMatrix(const OperatorMatrix& rho);

    // Hermitize and renormalize first; still throws NumericalError on negative eigenvalues.
    static DensityMatrix cleaned(const OperatorMatrix& rho);
    static DensityMatrix pure(const Eigen::VectorXcd& psi);
    static DensityMatrix from_populations(const Eigen::VectorXd& p, const OperatorMatrix& basis);
    static DensityMatrix maximally_mixed(Eigen::Index dim);

    const OperatorMatrix& matrix() const { return rho_; }
    Eigen::Index dim() const { return rho_.rows(); }
    Eigen::VectorXd populations() const { return rho_.diagonal().real(); }
    double purity() const;
    double min_eigenvalue() const;
    double trace() const { return rho_.trace().real(); }

    // Same state expressed in another basis: U^dag rho U.
    DensityMatrix in_basis(const OperatorMatrix& u) const;

private:
    struct Unchecked {};
    DensityMatrix(const OperatorMatrix& rho, Unchecked) : rho_(rho) {}
    OperatorMatrix rho_;
};

double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

}  // namespace siv
