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

#include <string>
#include <vector>

#include "siv/density.hpp"

namespace siv {

// Jump operator C with rate gamma; contributes gamma (C rho C^dag - {C^dag C, rho}/2).
struct CollapseOperator {
    OperatorMatrix op;
    double rate = 0.0;
    std::string label;
};

// Hamiltonian in Hz (cyclic). The engine multiplies by 2 pi.
struct LindbladModel {
    OperatorMatrix hamiltonian;
    std::vector<CollapseOperator> collapse;

    Eigen::Index dim() const { return hamiltonian.rows(); }
    void validate() const;
};

using Superoperator = Eigen::MatrixXcd;

// Column-stacking vectorization: vec(A X B) = (B^T kron A) vec(X).
Eigen::VectorXcd vectorize(const OperatorMatrix& m);
OperatorMatrix unvectorize(const Eigen::VectorXcd& v, Eigen::Index dim);

Superoperator liouvillian(const LindbladModel& model);

// d rho / dt evaluated directly in operator form.
OperatorMatrix lindblad_rhs(const LindbladModel& model, const OperatorMatrix& rho);

DensityMatrix evolve(const LindbladModel& model, const DensityMatrix& rho0, double duration);
DensityMatrix evolve_rk4(const LindbladModel& model, const DensityMatrix& rho0, double duration,
                         double step);

DensityMatrix steady_state(const LindbladModel& model);

// exp(L t) for a fixed generator.
Superoperator propagator(const Superoperator& generator, double duration);

}  // namespace siv
