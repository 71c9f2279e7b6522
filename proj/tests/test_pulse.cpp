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

#include "oracles.hpp"
#include "siv/constants.hpp"
#include "siv/errors.hpp"
#include "siv/experiments.hpp"
#include "siv/pulse.hpp"

using namespace siv;

namespace {

DensityMatrix eigen_pure(const EnergySpectrum& sp, int k) {
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(sp.dim());
    e(k) = 1.0;
    return DensityMatrix::pure(e);
}

SimulationContext quiet_context(double theta) {
    SivParameters p = reference_setup().params;
    p.gamma0_orbital = 0.0;
    p.gamma_phi_extra = 0.0;
    return SimulationContext(p, {0.3, theta, 0.0}, 3.6);
}

PulseSequence seq(std::vector<PulseSegment> s) {
    PulseSequence q;
    q.segments = std::move(s);
    return q;
}

}  // namespace

TEST_CASE("wait: populations follow classical rate equations, coherences decay") {
    const ExperimentSetup s = reference_setup();
    const SimulationContext ctx = s.context();
    const auto& sp = ctx.spectrum;
    const LindbladModel m = compile_segment(Wait{1e-9}, ctx, 0.0);
    CHECK((m.hamiltonian - OperatorMatrix(m.hamiltonian.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);

    std::vector<oracle::Rate> rates;
    for (const auto& c : phonon_channels(sp, s.params, s.temperature)) rates.push_back({c.source, c.target, c.rate});
    const Eigen::MatrixXd g = oracle::rate_matrix(rates, 8);
    const int start = sp.find(Branch::lower, Spin::down, Spin::up);
    Eigen::VectorXd p0 = Eigen::VectorXd::Zero(8);
    p0(start) = 1.0;
    const double t = 200e-9;
    const auto want = oracle::integrate_rates(g, p0, t, 20000);
    const auto got = evolve(m, eigen_pure(sp, start), t).populations();
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-9);

    // a lower-branch spin superposition loses coherence
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(8);
    psi(start) = psi(sp.find(Branch::lower, Spin::up, Spin::up)) = std::sqrt(0.5);
    const auto r = evolve(m, DensityMatrix::pure(psi), 1e-6).matrix();
    CHECK(std::abs(r(start, sp.find(Branch::lower, Spin::up, Spin::up))) < 1e-3);
}

TEST_CASE("resonant drive without phonons is a two-level Rabi oscillation") {
    const SimulationContext ctx = quiet_context(0.0);
    const auto& sp = ctx.spectrum;
    const auto line = nuclear_preserving_lines(sp)[0];
    for (double t : {10e-9, 33.333e-9, 50e-9, 66.667e-9, 90e-9}) {
        const LindbladModel m = compile_segment(MicrowaveDrive{line.frequency, 15e6, 0.0, t}, ctx);
        const auto p = evolve(m, eigen_pure(sp, line.lower_state), t).populations();
        CHECK(std::abs(p(line.upper_state) - oracle::rabi_excited(15e6, 0.0, t)) < 1e-6);
    }
}

TEST_CASE("strong pump empties the bright states at the pump rate") {
    const SimulationContext ctx = quiet_context(109.0 * constants::pi / 180.0);
    const auto& sp = ctx.spectrum;
    const double rate = 1e9;
    const LindbladModel m = compile_segment(OpticalPump{rate, 5e-9, 1.0}, ctx);
    const auto rho0 = DensityMatrix::maximally_mixed(8);
    for (double t : {1e-9, 3e-9, 5e-9}) {
        const auto p = evolve(m, rho0, t).populations();
        for (Spin n : {Spin::up, Spin::down})
            CHECK(p(sp.find(Branch::lower, Spin::up, n)) == doctest::Approx(0.125 * std::exp(-rate * t)).epsilon(1e-9));
    }
}

TEST_CASE("run_sequence basics") {
    const ExperimentSetup s = reference_setup();
    const SimulationContext ctx = s.context();
    const auto rho0 = thermal_state(ctx.spectrum, s.temperature);

    const auto empty = run_sequence(PulseSequence{}, rho0, ctx);
    REQUIRE(empty.time.size() == 1);
    CHECK((empty.populations[0] - rho0.in_basis(ctx.spectrum.eigenvectors).populations()).cwiseAbs().maxCoeff() <
          1e-12);

    const auto pump = run_sequence(seq({s.pump(200e-9)}), rho0, ctx);
    for (std::size_t k = 1; k + 1 < pump.fluorescence.size(); ++k)
        CHECK(pump.fluorescence[k] < pump.fluorescence[k - 1]);
    for (std::size_t k = 1; k < pump.time.size(); ++k) CHECK(pump.time[k] > pump.time[k - 1]);
    for (const auto& p : pump.populations) CHECK(std::abs(p.sum() - 1.0) < 1e-9);
    CHECK_THROWS_AS(peak_ratio(pump), ProtocolError);
}

TEST_CASE("peak ratio limits") {
    SivParameters p = reference_setup().params;
    p.gamma0_orbital = 0.0;
    const SimulationContext ideal(p, reference_setup().field, 3.6);
    const auto rho0 = thermal_state(ideal.spectrum, 3.6);
    const OpticalPump pump{5e7, 1e-6, 1.0};
    const OpticalPump edge{5e7, 5e-9, 1.0};
    CHECK(peak_ratio(run_sequence(seq({pump, Wait{0.0}, edge}), rho0, ideal)) < 1e-9);

    const ExperimentSetup s = reference_setup();
    const SimulationContext ctx = s.context();
    const auto th = thermal_state(ctx.spectrum, s.temperature);
    const double r = peak_ratio(run_sequence(seq({s.pump(100e-9), Wait{10e-6}, s.pump(5e-9)}), th, ctx));
    CHECK(r == doctest::Approx(1.0).epsilon(0.02));

    const double line = line_frequency(s, 0);
    const double pi_t = 1.0 / (2.0 * s.rabi_frequency);
    const double with_pi = peak_ratio(
        run_sequence(seq({s.pump(100e-9), MicrowaveDrive{line, s.rabi_frequency, 0.0, pi_t}, Wait{10e-9}, s.pump(5e-9)}),
                     th, ctx));
    const double without =
        peak_ratio(run_sequence(seq({s.pump(100e-9), Wait{pi_t + 10e-9}, s.pump(5e-9)}), th, ctx));
    CHECK(with_pi > without);

    const OpticalPump dark{0.0, 10e-9, 1.0};
    CHECK_THROWS_AS(peak_ratio(run_sequence(seq({dark, Wait{1e-9}, dark}), th, ctx)), DegenerateSignalError);
}

TEST_CASE("sequence and segment validation") {
    const ExperimentSetup s = reference_setup();
    const SimulationContext ctx = s.context();
    const double line = line_frequency(s, 0);
    const auto th = thermal_state(ctx.spectrum, s.temperature);
    CHECK_THROWS_AS(run_sequence(seq({MicrowaveDrive{line, 1e6, 0.0, 1e-9}, MicrowaveDrive{line + 1e6, 1e6, 0.0, 1e-9}}),
                                 th, ctx),
                    ProtocolError);
    CHECK_THROWS_AS(compile_segment(MicrowaveDrive{line + 20e9, 1e6, 0.0, 1e-9}, ctx), DomainError);
    CHECK_THROWS_AS(run_sequence(seq({Wait{-1e-9}}), th, ctx), DomainError);
    CHECK_THROWS_AS(compile_segment(OpticalPump{-1.0, 1e-9, 1.0}, ctx), DomainError);
}

TEST_CASE("rotating-wave drive agrees with a lab-frame integration") {
    // two-level extraction: splitting nu, linear drive Omega cos(2 pi nu t) sigma_x
    const double nu = 2.0e9, omega = 30e6;
    OperatorMatrix hr(2, 2);
    hr << 0, omega / 2, omega / 2, 0;
    const LindbladModel rwa{hr, {}};
    Eigen::VectorXcd g(2);
    g << 0, 1;  // lower level is index 1 below
    const auto rho0 = DensityMatrix::pure(g);

    oracle::Mat rho = rho0.matrix();
    const double dt = 0.25e-12;
    double t = 0.0;
    auto h = [&](double tt) {
        oracle::Mat m(2, 2);
        const double d = omega * std::cos(2.0 * oracle::pi * nu * tt);
        m << nu / 2, d, d, -nu / 2;
        return m;
    };
    auto rhs = [&](double tt, const oracle::Mat& r) { return oracle::master_rhs(h(tt), {}, r); };
    for (double stop : {4e-9, 8e-9, 12e-9, 16.6e-9}) {
        while (t < stop - 0.5 * dt) {
            const oracle::Mat k1 = rhs(t, rho);
            const oracle::Mat k2 = rhs(t + dt / 2, rho + dt / 2 * k1);
            const oracle::Mat k3 = rhs(t + dt / 2, rho + dt / 2 * k2);
            const oracle::Mat k4 = rhs(t + dt, rho + dt * k3);
            rho += dt / 6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += dt;
        }
        const double lab = rho(0, 0).real();
        const double rot = evolve(rwa, rho0, t).matrix()(0, 0).real();
        CHECK(std::abs(lab - rot) < 0.01);
    }
}
