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

#include "siv/lindblad.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "siv/constants.hpp"
#include "siv/errors.hpp"

namespace siv {

void LindbladModel::validate() const {
    const Eigen::Index n = hamiltonian.rows();
    if (n == 0 || hamiltonian.cols() != n) throw DomainError("Hamiltonian must be square and non-empty");
    if (!hamiltonian.allFinite()) throw DomainError("Hamiltonian has non-finite entries");
    const double scale = std::max(1.0, hamiltonian.cwiseAbs().maxCoeff());
    if ((hamiltonian - hamiltonian.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw DomainError("Hamiltonian is not Hermitian");
    for (const auto& c : collapse) {
        if (c.op.rows() != n || c.op.cols() != n)
            throw DomainError("collapse operator '" + c.label + "' has wrong dimension");
        if (!std::isfinite(c.rate) || c.rate < 0.0)
            throw DomainError("collapse operator '" + c.label + "' has invalid rate");
        if (!c.op.allFinite()) throw DomainError("collapse operator '" + c.label + "' not finite");
    }
}

Eigen::VectorXcd vectorize(const OperatorMatrix& m) {
    return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
}

OperatorMatrix unvectorize(const Eigen::VectorXcd& v, Eigen::Index dim) {
    if (v.size() != dim * dim) throw DomainError("vector length does not match dimension");
    return Eigen::Map<const OperatorMatrix>(v.data(), dim, dim);
}

Superoperator liouvillian(const LindbladModel& model) {
    model.validate();
    const Eigen::Index n = model.dim();
    const OperatorMatrix id = OperatorMatrix::Identity(n, n);
    const Complex minus_i_omega(0.0, -constants::two_pi);
    Superoperator l = minus_i_omega * (Eigen::kroneckerProduct(id, model.hamiltonian).eval() -
                                       Eigen::kroneckerProduct(model.hamiltonian.transpose(), id).eval());
    for (const auto& c : model.collapse) {
        if (c.rate == 0.0) continue;
        const OperatorMatrix cdc = c.op.adjoint() * c.op;
        l += c.rate * (Eigen::kroneckerProduct(c.op.conjugate(), c.op).eval() -
                       0.5 * Eigen::kroneckerProduct(id, cdc).eval() -
                       0.5 * Eigen::kroneckerProduct(cdc.transpose(), id).eval());
    }
    return l;
}

namespace {

// Jump operators with a single nonzero entry (the common case here) get a cheap path.
struct SparseJump {
    Eigen::Index row, col;
    double weight;  // rate * |c|^2
};

struct RhsPlan {
    std::vector<SparseJump> sparse;
    std::vector<std::pair<OperatorMatrix, double>> dense;  // (C, rate) plus cached C^dag C
    std::vector<OperatorMatrix> dense_cdc;
};

RhsPlan plan_for(const LindbladModel& model) {
    RhsPlan plan;
    for (const auto& c : model.collapse) {
        if (c.rate == 0.0) continue;
        Eigen::Index nz = 0, r0 = 0, c0 = 0;
        for (Eigen::Index j = 0; j < c.op.cols(); ++j)
            for (Eigen::Index i = 0; i < c.op.rows(); ++i)
                if (c.op(i, j) != Complex(0.0, 0.0)) {
                    ++nz;
                    r0 = i;
                    c0 = j;
                }
        if (nz == 0) continue;
        if (nz == 1) {
            plan.sparse.push_back({r0, c0, c.rate * std::norm(c.op(r0, c0))});
        } else {
            plan.dense.emplace_back(c.op, c.rate);
            plan.dense_cdc.push_back(c.op.adjoint() * c.op);
        }
    }
    return plan;
}

OperatorMatrix rhs_with_plan(const LindbladModel& model, const RhsPlan& plan, const OperatorMatrix& rho) {
    const Complex minus_i_omega(0.0, -constants::two_pi);
    OperatorMatrix out = minus_i_omega * (model.hamiltonian * rho - rho * model.hamiltonian);
    for (const auto& s : plan.sparse) {
        out(s.row, s.row) += s.weight * rho(s.col, s.col);
        out.row(s.col) -= 0.5 * s.weight * rho.row(s.col);
        out.col(s.col) -= 0.5 * s.weight * rho.col(s.col);
    }
    for (std::size_t k = 0; k < plan.dense.size(); ++k) {
        const auto& [c, rate] = plan.dense[k];
        const auto& cdc = plan.dense_cdc[k];
        out += rate * (c * rho * c.adjoint() - 0.5 * (cdc * rho + rho * cdc));
    }
    return out;
}

}  // namespace

OperatorMatrix lindblad_rhs(const LindbladModel& model, const OperatorMatrix& rho) {
    return rhs_with_plan(model, plan_for(model), rho);
}

Superoperator propagator(const Superoperator& generator, double duration) {
    if (!(duration >= 0.0) || !std::isfinite(duration)) throw DomainError("duration must be finite and >= 0");
    if (duration == 0.0) return Superoperator::Identity(generator.rows(), generator.cols());
    // Pade scaling-and-squaring.
    Superoperator p = (generator * duration).exp();
    if (!p.allFinite()) throw NumericalError("matrix exponential overflowed");
    return p;
}

DensityMatrix evolve(const LindbladModel& model, const DensityMatrix& rho0, double duration) {
    if (!(duration >= 0.0) || !std::isfinite(duration)) throw DomainError("duration must be finite and >= 0");
    if (rho0.dim() != model.dim()) throw DomainError("state and model dimensions differ");
    if (duration == 0.0) return DensityMatrix::cleaned(rho0.matrix());
    const Superoperator p = propagator(liouvillian(model), duration);
    return DensityMatrix::cleaned(unvectorize(p * vectorize(rho0.matrix()), model.dim()));
}

DensityMatrix evolve_rk4(const LindbladModel& model, const DensityMatrix& rho0, double duration,
                         double step) {
    if (!(duration >= 0.0) || !std::isfinite(duration)) throw DomainError("duration must be finite and >= 0");
    if (!(step > 0.0)) throw DomainError("step must be positive");
    if (rho0.dim() != model.dim()) throw DomainError("state and model dimensions differ");
    model.validate();
    if (duration == 0.0) return DensityMatrix::cleaned(rho0.matrix());

    const RhsPlan plan = plan_for(model);
    const auto n = static_cast<long long>(std::ceil(duration / step - 1e-9));
    const double h = duration / double(n);
    OperatorMatrix rho = rho0.matrix();
    for (long long k = 0; k < n; ++k) {
        const OperatorMatrix k1 = rhs_with_plan(model, plan, rho);
        const OperatorMatrix k2 = rhs_with_plan(model, plan, rho + 0.5 * h * k1);
        const OperatorMatrix k3 = rhs_with_plan(model, plan, rho + 0.5 * h * k2);
        const OperatorMatrix k4 = rhs_with_plan(model, plan, rho + h * k3);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        // A physical state has unit trace and Frobenius norm <= 1; RK4 instability breaks one of them.
        const double drift = std::abs(rho.trace() - Complex(1.0, 0.0));
        if (!rho.allFinite() || drift > 1e-6 || rho.norm() > 1.0 + 1e-6)
            throw StepSizeError("RK4 step " + std::to_string(h) + " s is unstable for this model");
    }
    return DensityMatrix::cleaned(rho);
}

DensityMatrix steady_state(const LindbladModel& model) {
    const Superoperator l = liouvillian(model);
    const Eigen::Index n = model.dim();
    const Eigen::Index nn = n * n;

    Eigen::JacobiSVD<Superoperator> svd(l);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    if (!(smax > 0.0)) throw DegenerateSteadyStateError("Liouvillian is identically zero");
    if (sv(nn - 2) <= 1e-12 * smax)
        throw DegenerateSteadyStateError("steady state is not unique (multiple zero modes)");

    // Replace one (redundant) population equation by the trace condition.
    Superoperator a = l;
    a.row(0).setZero();
    for (Eigen::Index k = 0; k < n; ++k) a(0, k * n + k) = smax;
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(nn);
    b(0) = smax;
    Eigen::PartialPivLU<Superoperator> lu(a);
    Eigen::VectorXcd x = lu.solve(b);
    x -= lu.solve(a * x - b);

    const double resid = (l * x).norm() / (l.norm() * x.norm());
    if (!(resid < 1e-10)) throw NumericalError("steady-state residual " + std::to_string(resid));
    return DensityMatrix::cleaned(unvectorize(x, n));
}

}  // namespace siv
