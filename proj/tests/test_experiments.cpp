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

#include <algorithm>
#include <cmath>

#include "siv/errors.hpp"
#include "siv/experiments.hpp"

using namespace siv;

TEST_CASE("t1 recovery limits") {
    ExperimentSetup s = reference_setup();
    s.params.gamma0_orbital = 0.0;
    const auto flat = t1_recovery_scan(s, {"delay", 0.0, 1e-6, 11}).column("peak_ratio");
    for (double r : flat) CHECK(r == doctest::Approx(flat.front()).epsilon(1e-9));

    ExperimentSetup ref = reference_setup();
    ref.temperature = 3.5;
    const auto sat = t1_recovery_scan(ref, {"delay", 0.0, 3.5e-6, 3}).column("peak_ratio");
    CHECK(sat.back() == doctest::Approx(1.0).epsilon(0.02));
    CHECK(sat.front() < 0.5);
}

TEST_CASE("odmr without microwaves is flat") {
    ExperimentSetup s = reference_setup();
    s.rabi_frequency = 0.0;
    const auto r = odmr_scan(s, {"offset", -100e6, 100e6, 21}, 33e-9).column("peak_ratio");
    for (double v : r) CHECK(v == doctest::Approx(r.front()).epsilon(1e-9));
}

TEST_CASE("odmr lines versus field") {
    const ExperimentSetup s = reference_setup();
    const SweepResult r = odmr_vs_field(s, {"field", 0.1, 0.5, 5});
    const auto& b = r.column("field_T");
    const auto& l1 = r.column("line1_Hz");
    const auto& l2 = r.column("line2_Hz");
    for (std::size_t i = 0; i < b.size(); ++i) {
        MagneticField f = s.field;
        f.magnitude = b[i];
        const auto lines = nuclear_preserving_lines(diagonalize(build_ground_hamiltonian(s.params, f)));
        CHECK(l1[i] == doctest::Approx(lines[0].frequency).epsilon(1e-12));
        CHECK(l2[i] == doctest::Approx(lines[1].frequency).epsilon(1e-12));
        if (i > 0) {
            CHECK(l1[i] > l1[i - 1]);
            CHECK(l2[i] > l2[i - 1]);
        }
    }
    // near zero field the electron Zeeman splitting vanishes and only hyperfine-scale structure is left
    const SweepResult z = odmr_vs_field(s, {"field", 1e-4, 2e-4, 2});
    CHECK(z.column("line2_Hz")[0] < s.params.a_par);
}

TEST_CASE("detuned Rabi runs at the generalized frequency") {
    const ExperimentSetup s = reference_setup();
    const SweepResult r = rabi_duration_scan(s, {"duration", 0.0, s.rabi_gap, 106}, 20e6);
    const FitResult f = rabi_frequency_fit(r.column("duration_s"), r.column("peak_ratio"), true);
    CHECK(f.value("f") == doctest::Approx(25e6).epsilon(0.01));
}

TEST_CASE("initialisation fidelity") {
    ExperimentSetup s = reference_setup();
    const SimulationContext ctx = s.context();
    const auto& sp = ctx.spectrum;
    const Eigen::VectorXd th = thermal_state(sp, s.temperature).in_basis(sp.eigenvectors).populations();
    double down = 0.0, lower = 0.0;
    for (int k : sp.states_in(Branch::lower)) {
        lower += th(k);
        if (sp.labels[k].electron == Spin::down) down += th(k);
    }
    ExperimentSetup off = s;
    off.pump_rate = 0.0;
    const auto f0 = initialization_fidelity(off);
    CHECK(f0.absolute == doctest::Approx(down).epsilon(1e-9));
    CHECK(f0.conditional == doctest::Approx(down / lower).epsilon(1e-9));

    const SweepResult scan = fidelity_scan(s, {"pump_duration", 10e-9, 400e-9, 12});
    const auto& c = scan.column("conditional_fidelity");
    for (std::size_t i = 1; i < c.size(); ++i) CHECK(c[i] >= c[i - 1] - 1e-12);
    double prev = 0.0;
    for (double rate : {1e6, 5e6, 2e7, 1e8}) {
        ExperimentSetup e = s;
        e.pump_rate = rate;
        const double v = initialization_fidelity(e).conditional;
        CHECK(v >= prev);
        prev = v;
    }

    ExperimentSetup longp = s;
    longp.pump_duration = 20e-6;
    const auto fl = initialization_fidelity(longp);
    const auto ss = steady_state(compile_segment(s.pump(1.0), ctx)).populations();
    double ss_down = 0.0;
    for (int k : sp.states_in(Branch::lower))
        if (sp.labels[k].electron == Spin::down) ss_down += ss(k);
    CHECK(fl.absolute < 1.0);
    CHECK(fl.absolute == doctest::Approx(ss_down).epsilon(1e-6));

    CHECK_THROWS_AS(fidelity_scan(s, {"pump_duration", 0.0, 1e-7, 3}), DomainError);
}

TEST_CASE("calibration helpers reproduce the reference constants") {
    const ExperimentSetup s = reference_setup();
    CHECK(calibrate_gamma0(s.params, s.field, 66.5e-9, 3.6) == doctest::Approx(s.params.gamma0_orbital).epsilon(1e-9));
    CHECK(orbital_t1(s.params, s.context().spectrum.mean_branch_gap(), 3.6) == doctest::Approx(66.5e-9).epsilon(1e-9));
    const double strain = std::hypot(s.params.strain_alpha, s.params.strain_beta);
    CHECK(calibrate_strain_magnitude(s.params, s.field, 54e6) == doctest::Approx(strain).epsilon(1e-6));
    const auto lines = nuclear_preserving_lines(s.context().spectrum);
    CHECK(lines[1].frequency - lines[0].frequency == doctest::Approx(54e6).epsilon(1e-6));
    ExperimentSetup cold = s;
    cold.temperature = 3.5;
    CHECK(calibrate_pump_rate(cold, 0.85) == doctest::Approx(s.pump_rate).epsilon(1e-6));
    CHECK(initialization_fidelity(cold).conditional == doctest::Approx(0.85).epsilon(1e-6));
    CHECK(rate_equation_spin_t1(cold, default_t1_delays()) == doctest::Approx(350e-9).epsilon(1e-4));
    CHECK_THROWS_AS(calibrate_gamma0(s.params, s.field, -1.0, 3.6), DomainError);
}

TEST_CASE("sweeps are deterministic and validated") {
    const ExperimentSetup s = reference_setup();
    const SweepSpec d{"delay", 0.0, 1e-6, 6};
    CHECK(t1_recovery_scan(s, d).data == t1_recovery_scan(s, d).data);
    CHECK_THROWS_AS(t1_recovery_scan(s, {"delay", 0.0, 1e-6, 1}), DomainError);
    CHECK_THROWS_AS(t1_recovery_scan(s, {"delay", 1e-6, 0.0, 5}), DomainError);
    const SweepResult r = t1_recovery_scan(s, d);
    CHECK(r.rows() == 6);
    CHECK_FALSE(r.metadata.empty());
}

TEST_CASE("peak ratios of the default protocols stay within [0, 1.05]") {
    const ExperimentSetup s = reference_setup();
    std::vector<SweepResult> runs{
        t1_recovery_scan(s, default_t1_delays()),
        odmr_scan(s, {"offset", -100e6, 100e6, 201}),
        rabi_duration_scan(s, {"duration", 0.0, s.rabi_gap, 106}),
        ramsey_scan(s, default_ramsey_delays(), RamseyPlacement::symmetric),
        ramsey_scan(s, default_ramsey_delays(), RamseyPlacement::asymmetric),
    };
    for (const auto& r : runs) {
        const auto& y = r.column("peak_ratio");
        const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
        INFO(r.experiment, " range ", *lo, " .. ", *hi);
        CHECK(*lo >= 0.0);
        CHECK(*hi <= 1.05);
    }
}
