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

#include "siv/density.hpp"

#include <cmath>
#include <string>

#include "siv/errors.hpp"

namespace siv {

namespace {

double hermitian_min_eigenvalue(const OperatorMatrix& m) {
    Eigen::SelfAdjointEigenSolver<OperatorMatrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace

DensityMatrix::DensityMatrix(const OperatorMatrix& rho) : rho_(rho) {
    if (rho.rows() != rho.cols() || rho.rows() == 0)
        throw DomainError("density matrix must be square and non-empty");
    if (!rho.allFinite()) throw DomainError("density matrix has non-finite entries");
    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (herm > hermiticity_tolerance)
        throw DomainError("density matrix not Hermitian (deviation " + std::to_string(herm) + ")");
    const Complex tr = rho.trace();
    if (std::abs(tr - Complex(1.0, 0.0)) > trace_tolerance)
        throw DomainError("density matrix trace " + std::to_string(tr.real()) + " != 1");
    const double lo = hermitian_min_eigenvalue(0.5 * (rho + rho.adjoint()));
    if (lo < -positivity_tolerance)
        throw DomainError("density matrix has negative eigenvalue " + std::to_string(lo));
}

DensityMatrix DensityMatrix::cleaned(const OperatorMatrix& rho) {
    if (!rho.allFinite()) throw NumericalError("state has non-finite entries");
    OperatorMatrix h = 0.5 * (rho + rho.adjoint());
    const double tr = h.trace().real();
    if (!(tr > 0.0)) throw NumericalError("state trace collapsed to " + std::to_string(tr));
    h /= tr;
    const double lo = hermitian_min_eigenvalue(h);
    if (lo < -positivity_tolerance)
        throw NumericalError("positivity lost: min eigenvalue " + std::to_string(lo));
    return DensityMatrix(h, Unchecked{});
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& psi) {
    const double n = psi.norm();
    if (!(n > 0.0)) throw DomainError("zero state vector");
    const Eigen::VectorXcd u = psi / n;
    return DensityMatrix(u * u.adjoint(), Unchecked{});
}

DensityMatrix DensityMatrix::from_populations(const Eigen::VectorXd& p, const OperatorMatrix& basis) {
    if (p.size() != basis.cols()) throw DomainError("population/basis size mismatch");
    if ((p.array() < 0.0).any()) throw DomainError("negative population");
    const double s = p.sum();
    if (!(s > 0.0)) throw DomainError("populations sum to zero");
    OperatorMatrix rho = basis * (p / s).cast<Complex>().asDiagonal() * basis.adjoint();
    return cleaned(rho);
}

DensityMatrix DensityMatrix::maximally_mixed(Eigen::Index dim) {
    return DensityMatrix(OperatorMatrix::Identity(dim, dim) / double(dim), Unchecked{});
}

double DensityMatrix::purity() const { return (rho_ * rho_).trace().real(); }

double DensityMatrix::min_eigenvalue() const { return hermitian_min_eigenvalue(rho_); }

DensityMatrix DensityMatrix::in_basis(const OperatorMatrix& u) const {
    return cleaned(u.adjoint() * rho_ * u);
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    Eigen::SelfAdjointEigenSolver<OperatorMatrix> es(a.matrix() - b.matrix(), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace siv
