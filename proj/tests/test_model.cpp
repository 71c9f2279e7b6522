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

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "siv/constants.hpp"
#include "siv/errors.hpp"
#include "siv/fitting.hpp"
#include "siv/model.hpp"

using namespace siv;

namespace {

constexpr double deg = constants::pi / 180.0;

SivParameters bare() {
    SivParameters p;
    p.a_par = 0.0;
    p.a_perp = 0.0;
    return p;
}

double max_rel(const std::vector<double>& a, const Eigen::VectorXd& b) {
    double scale = 0.0, err = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        scale = std::max(scale, std::abs(a[i]));
        err = std::max(err, std::abs(a[i] - b(Eigen::Index(i))));
    }
    return err / scale;
}

}  // namespace

TEST_CASE("zero field: two fourfold levels split by lambda") {
    SivParameters p = bare();
    p.gamma_n = 0.0;
    const auto sp = diagonalize(build_ground_hamiltonian(p, {0.0, 0.0, 0.0}));
    for (int k = 0; k < 4; ++k) CHECK(sp.energies(k) == doctest::Approx(-25e9).epsilon(1e-12));
    for (int k = 4; k < 8; ++k) CHECK(sp.energies(k) == doctest::Approx(25e9).epsilon(1e-12));
    CHECK(sp.states_in(Branch::lower).size() == 4);
}

TEST_CASE("on-axis lower-branch splitting is gamma_S B without orbital Zeeman") {
    SivParameters p = bare();
    p.orbital_quench = 0.0;
    p.gamma_n = 0.0;
    const auto sp = diagonalize(build_ground_hamiltonian(p, {0.1, 0.0, 0.0}));
    const auto lower = sp.states_in(Branch::lower);
    const double e_up = sp.energies(sp.find(Branch::lower, Spin::up, Spin::up));
    const double e_dn = sp.energies(sp.find(Branch::lower, Spin::down, Spin::up));
    CHECK(std::abs(e_up - e_dn) == doctest::Approx(2.8e9).epsilon(1e-12));
}

TEST_CASE("109 degree spectrum matches the Kronecker oracle") {
    for (double strain : {0.0, 3e9, 8e9}) {
        SivParameters p;
        p.strain_alpha = strain;
        p.strain_beta = 0.4 * strain;
        p.a_perp = 35e6;
        const auto sp = diagonalize(build_ground_hamiltonian(p, {0.3, 109.0 * deg, 0.3}));
        CHECK(max_rel(oracle::eigenvalues(oracle::hamiltonian(p, 0.3, 109.0 * deg, 0.3)), sp.energies) < 1e-9);
    }
}

TEST_CASE("hamiltonian is hermitian and matches the oracle entrywise") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        SivParameters p;
        p.lambda_so = 50e9 * (1.0 + 0.5 * u(rng));
        p.a_par = 100e6 * u(rng);
        p.a_perp = 100e6 * u(rng);
        p.strain_alpha = 5e9 * u(rng);
        p.strain_beta = 5e9 * u(rng);
        const MagneticField b{0.5 * std::abs(u(rng)), constants::pi * std::abs(u(rng)), constants::pi * u(rng)};
        const auto h = build_ground_hamiltonian(p, b);
        CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * h.cwiseAbs().maxCoeff());
        const auto ref = oracle::hamiltonian(p, b.magnitude, b.polar_angle, b.azimuth);
        CHECK((h - ref).cwiseAbs().maxCoeff() <= 1e-12 * ref.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("diagonalize: reconstruction, unitarity, labels") {
    SivParameters p;
    p.strain_alpha = 8e9;
    const auto h = build_ground_hamiltonian(p, {0.3, 109.0 * deg, 0.0});
    const auto sp = diagonalize(h);
    const auto& v = sp.eigenvectors;
    CHECK((v * sp.energies.cast<Complex>().asDiagonal() * v.adjoint() - h).cwiseAbs().maxCoeff() <
          1e-10 * h.cwiseAbs().maxCoeff());
    CHECK((v.adjoint() * v - OperatorMatrix::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-10);
    for (int k = 1; k < 8; ++k) CHECK(sp.energies(k) >= sp.energies(k - 1));
    CHECK(sp.states_in(Branch::lower).size() == 4);
    CHECK(sp.states_in(Branch::upper).size() == 4);
    for (Branch b : {Branch::lower, Branch::upper})
        for (Spin e : {Spin::up, Spin::down})
            for (Spin n : {Spin::up, Spin::down}) CHECK(sp.find(b, e, n) >= 0);
}

TEST_CASE("zero operator is labeled deterministically") {
    const OperatorMatrix z = OperatorMatrix::Zero(8, 8);
    const auto a = diagonalize(z);
    const auto b = diagonalize(z);
    CHECK(a.energies.cwiseAbs().maxCoeff() == 0.0);
    for (int k = 0; k < 8; ++k) CHECK(to_string(a.labels[k]) == to_string(b.labels[k]));
}

TEST_CASE("diagonalize rejects non-hermitian input") {
    OperatorMatrix m = OperatorMatrix::Zero(8, 8);
    m(0, 1) = 1.0;
    CHECK_THROWS_AS(diagonalize(m), DomainError);
    CHECK_THROWS_AS(diagonalize(OperatorMatrix::Identity(4, 4)), DomainError);
}

TEST_CASE("non-finite parameters are domain errors") {
    SivParameters p;
    p.a_par = std::nan("");
    CHECK_THROWS_AS(build_ground_hamiltonian(p, {0.1, 0.0, 0.0}), DomainError);
    SivParameters q;
    q.lambda_so = -1.0;
    CHECK_THROWS_AS(build_ground_hamiltonian(q, {0.1, 0.0, 0.0}), DomainError);
    CHECK_THROWS_AS(build_ground_hamiltonian(SivParameters{}, {-0.1, 0.0, 0.0}), DomainError);
}

TEST_CASE("azimuthal symmetry without strain") {
    SivParameters p;
    const auto ref = diagonalize(build_ground_hamiltonian(p, {0.3, 109.0 * deg, 0.0})).energies;
    for (double phi : {0.3, 1.1, 2.5, -2.0}) {
        const auto e = diagonalize(build_ground_hamiltonian(p, {0.3, 109.0 * deg, phi})).energies;
        CHECK((e - ref).cwiseAbs().maxCoeff() <= 1e-9 * ref.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("on-axis eigenvalues equal the closed-form sums") {
    SivParameters p;
    p.a_perp = 0.0;
    const double b = 0.25;
    std::vector<double> expect;
    for (int o : {1, -1})
        for (double s : {0.5, -0.5})
            for (double n : {0.5, -0.5})
                expect.push_back(-p.lambda_so * o * s + p.orbital_quench * p.gamma_l * b * o + p.gamma_s * b * s +
                                 p.a_par * s * n + p.gamma_n * b * n);
    std::sort(expect.begin(), expect.end());
    const auto sp = diagonalize(build_ground_hamiltonian(p, {b, 0.0, 0.0}));
    CHECK(max_rel(expect, sp.energies) < 1e-12);
}

TEST_CASE("on-axis odmr lines sit at the Zeeman splitting +- A/2") {
    SivParameters p;
    p.a_perp = 0.0;
    p.orbital_quench = 0.0;
    p.strain_alpha = 8e9;  // mixes the orbitals so the lines carry strength
    const double b = 0.2;
    const auto sp = diagonalize(build_ground_hamiltonian(p, {b, 0.0, 0.0}));
    const auto lines = nuclear_preserving_lines(sp);
    CHECK(lines[1].frequency - lines[0].frequency == doctest::Approx(70e6).epsilon(1e-9));
    const double mid = 0.5 * (lines[0].frequency + lines[1].frequency);
    // strain reduces the effective orbital character but not the spin Zeeman term
    CHECK(mid == doctest::Approx(p.gamma_s * b).epsilon(1e-9));
    for (const auto& l : odmr_transitions(sp))
        if (l.kind == LineKind::both_flipped) CHECK(l.strength < 1e-20);
}

TEST_CASE("odmr lines agree with exhaustive pair enumeration") {
    SivParameters p;
    p.strain_alpha = 8e9;
    p.a_perp = 30e6;
    for (double theta : {30.0, 70.0, 109.0}) {
        const auto sp = diagonalize(build_ground_hamiltonian(p, {0.3, theta * deg, 0.0}));
        const auto& v = sp.eigenvectors;
        const oracle::Mat drive = sp.drive_axis(0) * oracle::el(oracle::sx()) +
                                  sp.drive_axis(1) * oracle::el(oracle::sy()) +
                                  sp.drive_axis(2) * oracle::el(oracle::sz());
        // oracle: all 4x4 lower-branch pairs with opposite electron labels, same nuclear label
        std::vector<std::pair<double, double>> found;  // strength, frequency
        const auto lower = sp.states_in(Branch::lower);
        for (int i : lower)
            for (int j : lower) {
                if (i >= j) continue;
                if (sp.labels[i].electron == sp.labels[j].electron) continue;
                if (sp.labels[i].nuclear != sp.labels[j].nuclear) continue;
                const Complex m = (v.col(i).adjoint() * drive * v.col(j))(0, 0);
                found.push_back({std::norm(m), std::abs(sp.energies(i) - sp.energies(j))});
            }
        std::sort(found.begin(), found.end(), [](auto a, auto b) { return a.first > b.first; });
        REQUIRE(found.size() >= 2);
        std::vector<double> want{found[0].second, found[1].second};
        std::sort(want.begin(), want.end());
        const auto lines = nuclear_preserving_lines(sp);
        CHECK(lines[0].frequency == doctest::Approx(want[0]).epsilon(1e-12));
        CHECK(lines[1].frequency == doctest::Approx(want[1]).epsilon(1e-12));
        for (const auto& l : odmr_transitions(sp)) {
            CHECK(l.strength >= 0.0);
            CHECK(l.strength <= 1.0);
            CHECK(l.frequency > 0.0);
        }
    }
}

TEST_CASE("thermal state") {
    SivParameters p;
    const auto sp = diagonalize(build_ground_hamiltonian(p, {0.3, 109.0 * deg, 0.0}));
    const auto hot = thermal_state(sp, 1e6).in_basis(sp.eigenvectors).populations();
    CHECK((hot.array() - 0.125).abs().maxCoeff() < 1e-6);

    const auto pop = thermal_state(sp, 4.0).in_basis(sp.eigenvectors).populations();
    CHECK(pop.sum() == doctest::Approx(1.0).epsilon(1e-12));
    for (int k = 1; k < 8; ++k) CHECK(pop(k) <= pop(k - 1) + 1e-15);

    // bare spin-orbit model: the upper fraction is exactly the two-level Boltzmann share
    SivParameters so = bare();
    so.gamma_n = 0.0;
    const auto sp0 = diagonalize(build_ground_hamiltonian(so, {0.0, 0.0, 0.0}));
    const auto p0 = thermal_state(sp0, 4.0).in_basis(sp0.eigenvectors).populations();
    double upper = 0.0;
    for (int k : sp0.states_in(Branch::upper)) upper += p0(k);
    const long double x = oracle::boltzmann(50e9L, 4.0L);
    CHECK(upper == doctest::Approx(double(x / (1.0L + x))).epsilon(1e-12));
    CHECK(upper == doctest::Approx(0.354).epsilon(0.005 / 0.354));

    CHECK_THROWS_AS(thermal_state(sp, 0.0), DomainError);
    CHECK_THROWS_AS(thermal_state(sp, -1.0), DomainError);
}

TEST_CASE("phonon rates: Bose factors and Boltzmann ratio") {
    SivParameters p;
    p.gamma0_orbital = 5e6;
    const auto cold = phonon_rates(p, 50e9, 1e-3);
    CHECK(cold.up < 1e-300);
    CHECK(cold.down == doctest::Approx(5e6).epsilon(1e-15));
    CHECK(bose_einstein(50e9, 4.0) == doctest::Approx(double(oracle::bose(50e9L, 4.0L))).epsilon(1e-13));
    CHECK(bose_einstein(50e9, 4.0) == doctest::Approx(1.2168).epsilon(1e-4));
    for (double nu : {1e9, 10e9, 50e9, 200e9})
        for (double t : {0.5, 3.0, 4.0, 10.0, 50.0}) {
            const auto r = phonon_rates(p, nu, t);
            CHECK(r.up / r.down == doctest::Approx(double(oracle::boltzmann(nu, t))).epsilon(1e-12));
            CHECK(r.down - r.up == doctest::Approx(p.gamma0_orbital).epsilon(1e-12));
        }
    CHECK_THROWS_AS(phonon_rates(p, 50e9, 0.0), DomainError);
    CHECK_THROWS_AS(phonon_rates(p, -1.0, 4.0), DomainError);
}

TEST_CASE("gamma_down is near-linear over 3..10 K") {
    SivParameters p;
    std::vector<double> t, g;
    for (int i = 0; i < 15; ++i) {
        t.push_back(3.0 + 0.5 * i);
        g.push_back(phonon_rates(p, 50e9, t.back()).down);
    }
    CHECK(fit_linear(t, g).value("r_squared") > 0.99);
    CHECK(oracle::r_squared(t, g) > 0.99);
}

TEST_CASE("phonon weights: normalization and aligned-field protection") {
    SivParameters p;
    p.strain_alpha = 8e9;
    for (double theta : {0.0, 40.0, 109.0}) {
        const auto sp = diagonalize(build_ground_hamiltonian(p, {0.3, theta * deg, 0.0}));
        const auto w = phonon_weights(sp);
        for (int i = 0; i < 4; ++i) {
            CHECK(w.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(w.col(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
        }
        const auto ch = phonon_channels(sp, PhononRates{1.0, 2.0});
        double flip = 0.0;
        for (const auto& c : ch)
            if (c.spin_flip) flip = std::max(flip, c.weight);
        if (theta == 0.0) CHECK(flip > 0.0);  // transverse hyperfine flip-flop survives on axis
        else CHECK(flip > 0.0);
        SivParameters q = p;
        q.a_perp = 0.0;
        double flip0 = 0.0;
        for (const auto& c : phonon_channels(diagonalize(build_ground_hamiltonian(q, {0.3, theta * deg, 0.0})),
                                             PhononRates{1.0, 2.0}))
            if (c.spin_flip) flip0 = std::max(flip0, c.weight);
        if (theta == 0.0) CHECK(flip0 < 1e-18);
        else CHECK(flip0 > 0.0);
        // departure rate from each source equals the branch rate
        std::vector<double> out(8, 0.0);
        for (const auto& c : ch) out[c.source] += c.rate;
        for (int k : sp.states_in(Branch::lower)) CHECK(out[k] == doctest::Approx(1.0).epsilon(1e-12));
        for (int k : sp.states_in(Branch::upper)) CHECK(out[k] == doctest::Approx(2.0).epsilon(1e-12));
    }
}

TEST_CASE("per-pair phonon channels obey detailed balance") {
    SivParameters p;
    p.strain_alpha = 8e9;
    const auto sp = diagonalize(build_ground_hamiltonian(p, {0.3, 109.0 * deg, 0.0}));
    const auto ch = phonon_channels(sp, p, 4.0);
    for (const auto& a : ch)
        for (const auto& b : ch)
            if (a.source == b.target && a.target == b.source && a.rate > 0.0) {
                const double nu = sp.energies(a.target) - sp.energies(a.source);
                CHECK(a.rate / b.rate == doctest::Approx(double(oracle::boltzmann(nu, 4.0L))).epsilon(1e-10));
            }
}
