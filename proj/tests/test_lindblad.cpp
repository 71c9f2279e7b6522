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


#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "siv/errors.hpp"
#include "siv/experiments.hpp"
#include "siv/lindblad.hpp"
#include "siv/pulse.hpp"

using namespace siv;

namespace {

OperatorMatrix ket_bra(int dim, int i, int j) {
    OperatorMatrix m = OperatorMatrix::Zero(dim, dim);
    m(i, j) = 1.0;
    return m;
}

LindbladModel random_model(std::mt19937_64& rng, int dim) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    LindbladModel m;
    OperatorMatrix a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = Complex(g(rng), g(rng));
    m.hamiltonian = 20e6 * (a + a.adjoint());
    for (int k = 0; k < 4; ++k) {
        OperatorMatrix c(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) c(i, j) = Complex(g(rng), g(rng));
        m.collapse.push_back({c / c.norm(), 2e7 * u(rng), "random"});
    }
    m.collapse.push_back({ket_bra(dim, 0, dim - 1), 1e7 * u(rng), "decay"});
    return m;
}

DensityMatrix random_state(std::mt19937_64& rng, int dim) {
    std::normal_distribution<double> g(0.0, 1.0);
    OperatorMatrix a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = Complex(g(rng), g(rng));
    OperatorMatrix r = a * a.adjoint();
    return DensityMatrix::cleaned(r / r.trace());
}

}  // namespace

TEST_CASE("null generator") {
    LindbladModel m{OperatorMatrix::Zero(3, 3), {}};
    CHECK(liouvillian(m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("two-level decay is exponential") {
    const double gamma = 3e6;
    LindbladModel m{OperatorMatrix::Zero(2, 2), {{ket_bra(2, 0, 1), gamma, "decay"}}};
    Eigen::VectorXcd e(2);
    e << 0, 1;
    const auto rho0 = DensityMatrix::pure(e);
    for (double t : {10e-9, 100e-9, 1e-6}) {
        CHECK(evolve(m, rho0, t).matrix()(1, 1).real() == doctest::Approx(std::exp(-gamma * t)).epsilon(1e-12));
        CHECK(std::abs(evolve_rk4(m, rho0, t, 1e-10).matrix()(1, 1).real() - std::exp(-gamma * t)) < 1e-9);
    }
}

TEST_CASE("trace preservation of the superoperator") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        const auto m = random_model(rng, 4);
        const auto l = liouvillian(m);
        const double scale = l.cwiseAbs().maxCoeff();
        // trace functional: sum of diagonal rows of L vanishes column by column
        for (Eigen::Index c = 0; c < l.cols(); ++c) {
            Complex tr = 0.0;
            for (int i = 0; i < 4; ++i) tr += l(i * 4 + i, c);
            CHECK(std::abs(tr) < 1e-12 * scale);
        }
        // and the operator-form right-hand side agrees with L
        const auto rho = random_state(rng, 4);
        const Eigen::VectorXcd lv = l * vectorize(rho.matrix());
        CHECK((unvectorize(lv, 4) - lindblad_rhs(m, rho.matrix())).cwiseAbs().maxCoeff() < 1e-9 * scale);
        oracle::Mat ref = oracle::master_rhs(m.hamiltonian, {}, rho.matrix());
        for (const auto& c : m.collapse) ref += oracle::master_rhs(oracle::Mat::Zero(4, 4), {{c.op, c.rate}}, rho.matrix());
        CHECK((unvectorize(lv, 4) - ref).cwiseAbs().maxCoeff() < 1e-9 * scale);
    }
}

TEST_CASE("evolve: zero duration, Rabi oracle, semigroup") {
    std::mt19937_64 rng(3);
    const auto m = random_model(rng, 4);
    const auto rho = random_state(rng, 4);
    CHECK((evolve(m, rho, 0.0).matrix() - rho.matrix()).cwiseAbs().maxCoeff() < 1e-15);

    const double omega = 15e6;
    OperatorMatrix h(2, 2);
    h << 0, omega / 2, omega / 2, 0;
    LindbladModel rabi{h, {}};
    Eigen::VectorXcd g(2);
    g << 1, 0;
    for (double t : {5e-9, 20e-9, 33.3e-9, 100e-9}) {
        const double pe = evolve(rabi, DensityMatrix::pure(g), t).matrix()(1, 1).real();
        CHECK(std::abs(pe - oracle::rabi_excited(omega, 0.0, t)) < 1e-8);
    }

    const auto a = evolve(m, evolve(m, rho, 37e-9), 81e-9);
    const auto b = evolve(m, rho, 118e-9);
    CHECK((a.matrix() - b.matrix()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("rk4 agrees with the propagator on a random model") {
    std::mt19937_64 rng(5);
    const auto m = random_model(rng, 4);
    const auto rho = random_state(rng, 4);
    const auto exact = evolve(m, rho, 50e-9);
    CHECK(trace_distance(exact, evolve_rk4(m, rho, 50e-9, 1e-11)) < 1e-8);
    std::vector<oracle::Jump> j;
    for (const auto& c : m.collapse) j.push_back({c.op, c.rate});
    const auto ref = oracle::rk4_master(m.hamiltonian, j, rho.matrix(), 50e-9, 1e-11);
    CHECK((exact.matrix() - ref).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((evolve_rk4(m, rho, 0.0, 1e-9).matrix() - rho.matrix()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rk4 rejects an unstable step") {
    LindbladModel m{OperatorMatrix::Zero(2, 2), {{ket_bra(2, 0, 1), 1e9, "fast"}}};
    Eigen::VectorXcd e(2);
    e << 0, 1;
    CHECK_THROWS_AS(evolve_rk4(m, DensityMatrix::pure(e), 1e-6, 1e-8), StepSizeError);
    CHECK_THROWS_AS(evolve_rk4(m, DensityMatrix::pure(e), 1e-6, 0.0), DomainError);
    CHECK_THROWS_AS(evolve(m, DensityMatrix::pure(e), -1.0), DomainError);
}

TEST_CASE("steady states") {
    // pure decay to the ground state
    LindbladModel decay{OperatorMatrix::Zero(3, 3), {{ket_bra(3, 0, 1), 1e6, "a"}, {ket_bra(3, 0, 2), 2e6, "b"}}};
    const auto ss = steady_state(decay);
    CHECK(ss.matrix()(0, 0).real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((liouvillian(decay) * vectorize(ss.matrix())).norm() < 1e-10 * liouvillian(decay).norm());

    // phonons only: Gibbs populations
    const ExperimentSetup s = reference_setup();
    const SimulationContext ctx = s.context();
    const LindbladModel wait = compile_segment(Wait{1e-9}, ctx, 0.0);
    const auto th = steady_state(wait);
    const auto gibbs = thermal_state(ctx.spectrum, s.temperature).in_basis(ctx.spectrum.eigenvectors).populations();
    CHECK((th.populations() - gibbs).cwiseAbs().maxCoeff() < 1e-8);
    const auto l = liouvillian(wait);
    CHECK((l * vectorize(th.matrix())).norm() < 1e-10 * l.norm());

    // no dissipation: kernel is not one-dimensional
    LindbladModel closed{OperatorMatrix::Identity(2, 2), {}};
    CHECK_THROWS_AS(steady_state(closed), DegenerateSteadyStateError);
}

TEST_CASE("randomized evolutions keep trace, positivity, purity") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = random_model(rng, 4);
        const auto rho = evolve(m, random_state(rng, 4), 1e-5 * u(rng));
        CHECK(std::abs(rho.trace() - 1.0) < 1e-9);
        CHECK(rho.min_eigenvalue() > -1e-8);
        CHECK(rho.purity() <= 1.0 + 1e-9);
    }
}

TEST_CASE("density matrix invariants") {
    OperatorMatrix bad = OperatorMatrix::Zero(2, 2);
    bad(0, 0) = 0.7;
    CHECK_THROWS_AS(DensityMatrix{bad}, DomainError);
    bad(1, 1) = 0.3;
    bad(0, 1) = 0.1;
    CHECK_THROWS_AS(DensityMatrix{bad}, DomainError);
    OperatorMatrix neg = OperatorMatrix::Zero(2, 2);
    neg(0, 0) = 1.5;
    neg(1, 1) = -0.5;
    CHECK_THROWS_AS(DensityMatrix{neg}, DomainError);
    CHECK_THROWS_AS(DensityMatrix::cleaned(neg), NumericalError);
    CHECK(DensityMatrix::maximally_mixed(4).purity() == doctest::Approx(0.25));
}

TEST_CASE("model validation") {
    LindbladModel m{OperatorMatrix::Zero(2, 2), {{OperatorMatrix::Zero(3, 3), 1.0, "wrong size"}}};
    CHECK_THROWS_AS(liouvillian(m), DomainError);
    LindbladModel n{OperatorMatrix::Zero(2, 2), {{ket_bra(2, 0, 1), -1.0, "negative"}}};
    CHECK_THROWS_AS(liouvillian(n), DomainError);
}
