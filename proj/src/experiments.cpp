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

#include "siv/experiments.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "siv/constants.hpp"
#include "siv/errors.hpp"

namespace siv {

namespace {

DensityMatrix thermal_start(const SequenceRunner& runner) {
    return thermal_state(runner.context().spectrum, runner.context().temperature);
}

std::vector<std::pair<std::string, double>> echo(const ExperimentSetup& s) {
    const auto& p = s.params;
    return {{"lambda_so_Hz", p.lambda_so},
            {"a_par_Hz", p.a_par},
            {"a_perp_Hz", p.transverse_hyperfine()},
            {"gamma_s_Hz_per_T", p.gamma_s},
            {"gamma_l_Hz_per_T", p.gamma_l},
            {"orbital_quench", p.orbital_quench},
            {"gamma_n_Hz_per_T", p.gamma_n},
            {"strain_alpha_Hz", p.strain_alpha},
            {"strain_beta_Hz", p.strain_beta},
            {"gamma0_orbital_per_s", p.gamma0_orbital},
            {"gamma_phi_extra_per_s", p.gamma_phi_extra},
            {"field_T", s.field.magnitude},
            {"polar_angle_rad", s.field.polar_angle},
            {"azimuth_rad", s.field.azimuth},
            {"temperature_K", s.temperature},
            {"pump_rate_per_s", s.pump_rate},
            {"pump_duration_s", s.pump_duration},
            {"readout_duration_s", s.readout_duration},
            {"partner_fraction", s.partner_fraction},
            {"rabi_frequency_Hz", s.rabi_frequency},
            {"rabi_gap_s", s.rabi_gap},
            {"sample_resolution_s", s.sample_resolution},
            {"target_line", double(s.target_line)}};
}

SweepResult start_result(const std::string& name, const ExperimentSetup& s) {
    SweepResult r;
    r.experiment = name;
    r.metadata = echo(s);
    return r;
}

double measure(SequenceRunner& runner, const PulseSequence& seq) {
    return peak_ratio(runner.run(seq, thermal_start(runner), Sampling::boundaries));
}

PulseSequence sequence(const ExperimentSetup& s, std::vector<PulseSegment> segs) {
    PulseSequence q;
    q.segments = std::move(segs);
    q.sample_resolution = s.sample_resolution;
    return q;
}

double rabi_carrier(const ExperimentSetup& s, double detuning) {
    const double f = line_frequency(s, s.target_line);
    return s.target_line == 0 ? f - detuning : f + detuning;
}

// Population-only generator from the single-entry jump operators of a compiled segment.
Eigen::MatrixXd rate_matrix(const LindbladModel& m) {
    const Eigen::Index n = m.dim();
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
    for (const auto& c : m.collapse) {
        Eigen::Index nz = 0, a = 0, b = 0;
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i)
                if (c.op(i, j) != Complex(0.0, 0.0)) {
                    ++nz;
                    a = i;
                    b = j;
                }
        if (nz != 1 || a == b) continue;
        const double r = c.rate * std::norm(c.op(a, b));
        g(a, b) += r;
        g(b, b) -= r;
    }
    return g;
}

}  // namespace

SimulationContext ExperimentSetup::context() const { return SimulationContext(params, field, temperature); }

ExperimentSetup reference_setup() {
    ExperimentSetup s;
    s.params.a_perp = 0.0;
    // Strain magnitude sets the 54 MHz splitting; its angle sets the spin-flip share of phonon jumps.
    const double strain = 8046198122.290781;
    const double angle = 0.8207359055922554;
    s.params.strain_alpha = strain * std::cos(angle);
    s.params.strain_beta = strain * std::sin(angle);
    s.params.gamma0_orbital = 5108132.604724586;
    s.params.gamma_phi_extra = 3730921.4837941341;
    s.pump_rate = 16280638.806521893;
    s.temperature = 3.6;
    return s;
}

std::vector<double> SweepSpec::values() const {
    validate();
    std::vector<double> v(count);
    for (int i = 0; i < count; ++i)
        v[i] = i == count - 1 ? stop : start + (stop - start) * double(i) / double(count - 1);
    return v;
}

void SweepSpec::validate() const {
    if (count < 2) throw DomainError("sweep '" + variable + "' needs count >= 2");
    if (!std::isfinite(start) || !std::isfinite(stop) || !(start < stop))
        throw DomainError("sweep '" + variable + "' needs finite start < stop");
}

const std::vector<double>& SweepResult::column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return data[i];
    throw DomainError("result has no column '" + std::string(name) + "'");
}

std::vector<double>& SweepResult::column(std::string_view name) {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return data[i];
    throw DomainError("result has no column '" + std::string(name) + "'");
}

void SweepResult::add_column(std::string name, std::vector<double> values) {
    columns.push_back(std::move(name));
    data.push_back(std::move(values));
}

void SweepResult::validate() const {
    if (columns.size() != data.size()) throw NumericalError("column bookkeeping mismatch");
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i].size() != rows()) throw NumericalError("column '" + columns[i] + "' has wrong length");
        for (double v : data[i])
            if (!std::isfinite(v)) throw NumericalError("column '" + columns[i] + "' has a non-finite value");
    }
}

double line_frequency(const ExperimentSetup& setup, int which) {
    if (which != 0 && which != 1) throw DomainError("line index must be 0 or 1");
    const auto sp = diagonalize(build_ground_hamiltonian(setup.params, setup.field));
    return nuclear_preserving_lines(sp)[which].frequency;
}

double ramsey_carrier(const ExperimentSetup& setup, RamseyPlacement placement) {
    const double f0 = line_frequency(setup, 0), f1 = line_frequency(setup, 1);
    if (placement == RamseyPlacement::symmetric) return 0.5 * (f0 + f1);
    return f0 + (f1 - f0) / 3.0;
}

double pi_half_duration(const ExperimentSetup& setup, double carrier) {
    if (!(setup.rabi_frequency > 0.0)) throw DomainError("pi/2 pulse needs a nonzero Rabi frequency");
    const double d = std::min(std::abs(carrier - line_frequency(setup, 0)), std::abs(carrier - line_frequency(setup, 1)));
    return 1.0 / (4.0 * std::hypot(setup.rabi_frequency, d));
}

FitResult rabi_frequency_fit(const std::vector<double>& t, const std::vector<double>& y, bool drift) {
    if (drift) {
        FitResult f = fit_drifting_cosine(t, y);
        if (!f.flagged()) return f;
    }
    return fit_damped_cosine(t, y);
}

FitResult ramsey_fit(const std::vector<double>& t, const std::vector<double>& y) {
    // the post-pump baseline relaxes on the orbital timescale, so fit it out
    FitResult f = fit_drifting_cosine(t, y);
    if (f.flagged()) return fit_damped_cosine(t, y);
    for (auto& n : f.names)
        if (n == "T") n = "T2star";
    f.form = "y = c + d*(1 - exp(-t/Td)) + A*cos(2*pi*f*t + phi)*exp(-t/T2star)";
    return f;
}

SweepResult t1_recovery_scan(const ExperimentSetup& setup, const SweepSpec& delays) {
    const auto tau = delays.values();
    if (tau.front() < 0.0) throw DomainError("delays must be >= 0");
    SequenceRunner runner(setup.context());
    std::vector<double> ratio;
    for (double t : tau)
        ratio.push_back(measure(runner, sequence(setup, {setup.pump(setup.pump_duration), Wait{t},
                                                         setup.pump(setup.readout_duration)})));
    SweepResult r = start_result("t1", setup);
    r.add_column("delay_s", tau);
    r.add_column("peak_ratio", ratio);
    r.validate();
    return r;
}

SweepResult orbital_recovery_scan(const ExperimentSetup& setup, const SweepSpec& delays) {
    const auto tau = delays.values();
    if (tau.front() < 0.0) throw DomainError("delays must be >= 0");
    SequenceRunner runner(setup.context());
    const EnergySpectrum& sp = runner.context().spectrum;
    Eigen::VectorXd p = thermal_state(sp, setup.temperature).in_basis(sp.eigenvectors).populations();
    for (int k : sp.states_in(Branch::upper)) p(k) = 0.0;
    const DensityMatrix rho0 = DensityMatrix::from_populations(p, sp.eigenvectors);
    const auto upper = sp.states_in(Branch::upper);
    std::vector<double> frac;
    for (double t : tau) {
        const auto tr = runner.run(sequence(setup, {Wait{t}}), rho0, Sampling::boundaries);
        double u = 0.0;
        for (int k : upper) u += tr.populations.back()(k);
        frac.push_back(u);
    }
    SweepResult r = start_result("orbital", setup);
    r.add_column("delay_s", tau);
    r.add_column("upper_fraction", frac);
    r.validate();
    return r;
}

SweepResult odmr_scan(const ExperimentSetup& setup, const SweepSpec& offsets, std::optional<double> mw_duration) {
    const auto off = offsets.values();
    const double center = 0.5 * (line_frequency(setup, 0) + line_frequency(setup, 1));
    const double dur = mw_duration.value_or(setup.rabi_frequency > 0.0 ? 0.5 / setup.rabi_frequency : 100e-9);
    SequenceRunner runner(setup.context());
    std::vector<double> carrier, ratio;
    for (double o : off) {
        const double f = center + o;
        carrier.push_back(f);
        ratio.push_back(measure(runner, sequence(setup, {setup.pump(setup.pump_duration),
                                                         MicrowaveDrive{f, setup.rabi_frequency, 0.0, dur},
                                                         setup.pump(setup.readout_duration)})));
    }
    SweepResult r = start_result("odmr", setup);
    r.metadata.emplace_back("mw_duration_s", dur);
    r.add_column("carrier_Hz", carrier);
    r.add_column("offset_Hz", off);
    r.add_column("peak_ratio", ratio);
    r.validate();
    return r;
}

SweepResult odmr_vs_field(const ExperimentSetup& setup, const SweepSpec& fields) {
    const auto b = fields.values();
    if (b.front() < 0.0) throw DomainError("field magnitudes must be >= 0");
    std::array<std::vector<double>, 4> cols;
    for (double bi : b) {
        MagneticField f = setup.field;
        f.magnitude = bi;
        const auto lines = odmr_transitions(diagonalize(build_ground_hamiltonian(setup.params, f)));
        for (int k = 0; k < 4; ++k) cols[k].push_back(lines[k].frequency);
    }
    SweepResult r = start_result("odmr-vs-field", setup);
    r.add_column("field_T", b);
    r.add_column("line1_Hz", cols[0]);
    r.add_column("line2_Hz", cols[1]);
    r.add_column("flip1_Hz", cols[2]);
    r.add_column("flip2_Hz", cols[3]);
    r.validate();
    return r;
}

SweepResult rabi_duration_scan(const ExperimentSetup& setup, const SweepSpec& durations, double detuning) {
    const auto tau = durations.values();
    if (tau.front() < 0.0) throw DomainError("pulse durations must be >= 0");
    if (tau.back() > setup.rabi_gap * (1.0 + 1e-12))
        throw ProtocolError("microwave pulse longer than the init-to-readout gap");
    const double carrier = rabi_carrier(setup, detuning);
    SequenceRunner runner(setup.context());
    std::vector<double> ratio;
    for (double t : tau) {
        const double rest = std::max(0.0, setup.rabi_gap - t);
        ratio.push_back(measure(runner, sequence(setup, {setup.pump(setup.pump_duration),
                                                         MicrowaveDrive{carrier, setup.rabi_frequency, 0.0, t},
                                                         Wait{rest}, setup.pump(setup.readout_duration)})));
    }
    SweepResult r = start_result("rabi-duration", setup);
    r.metadata.emplace_back("carrier_Hz", carrier);
    r.metadata.emplace_back("detuning_Hz", detuning);
    r.add_column("duration_s", tau);
    r.add_column("peak_ratio", ratio);
    r.validate();
    return r;
}

namespace {

FitResult fitted_rabi(const ExperimentSetup& s, double detuning) {
    const int n = int(std::lround(s.rabi_gap / 2e-9)) + 1;
    const SweepResult tr = rabi_duration_scan(s, SweepSpec{"duration", 0.0, s.rabi_gap, n}, detuning);
    return rabi_frequency_fit(tr.column("duration_s"), tr.column("peak_ratio"), s.params.gamma0_orbital > 0.0);
}

}  // namespace

SweepResult rabi_power_scan(const ExperimentSetup& setup, const SweepSpec& powers, double kappa) {
    const auto p = powers.values();
    if (p.front() < 0.0) throw DomainError("microwave power must be >= 0");
    if (!(kappa > 0.0)) throw DomainError("kappa must be positive");
    std::vector<double> sq, f, fe;
    for (double pi : p) {
        ExperimentSetup s = setup;
        s.rabi_frequency = kappa * std::sqrt(pi);
        const FitResult fit = fitted_rabi(s, 0.0);
        sq.push_back(std::sqrt(pi));
        f.push_back(fit.value("f"));
        fe.push_back(fit.error("f"));
    }
    SweepResult r = start_result("rabi-power", setup);
    r.metadata.emplace_back("kappa_Hz_per_sqrt_power", kappa);
    r.add_column("power", p);
    r.add_column("sqrt_power", sq);
    r.add_column("rabi_frequency_Hz", f);
    r.add_column("rabi_frequency_err_Hz", fe);
    r.validate();
    return r;
}

SweepResult rabi_detuning_scan(const ExperimentSetup& setup, const SweepSpec& detunings) {
    const auto d = detunings.values();
    std::vector<double> f, fe;
    for (double di : d) {
        const FitResult fit = fitted_rabi(setup, di);
        f.push_back(fit.value("f"));
        fe.push_back(fit.error("f"));
    }
    SweepResult r = start_result("rabi-detuning", setup);
    r.add_column("detuning_Hz", d);
    r.add_column("effective_frequency_Hz", f);
    r.add_column("effective_frequency_err_Hz", fe);
    r.validate();
    return r;
}

SweepResult ramsey_scan(const ExperimentSetup& setup, const SweepSpec& delays, RamseyPlacement placement) {
    const auto tau = delays.values();
    if (tau.front() < 0.0) throw DomainError("delays must be >= 0");
    const double carrier = ramsey_carrier(setup, placement);
    const double t2 = pi_half_duration(setup, carrier);
    SequenceRunner runner(setup.context());
    std::vector<double> ratio;
    for (double t : tau) {
        const MicrowaveDrive half{carrier, setup.rabi_frequency, 0.0, t2};
        ratio.push_back(measure(runner, sequence(setup, {setup.pump(setup.pump_duration), half, Wait{t}, half,
                                                         setup.pump(setup.readout_duration)})));
    }
    SweepResult r = start_result(placement == RamseyPlacement::symmetric ? "ramsey-symmetric" : "ramsey-asymmetric",
                                 setup);
    r.metadata.emplace_back("carrier_Hz", carrier);
    r.metadata.emplace_back("pi_half_s", t2);
    r.metadata.emplace_back("detuning_low_Hz", carrier - line_frequency(setup, 0));
    r.metadata.emplace_back("detuning_high_Hz", line_frequency(setup, 1) - carrier);
    r.add_column("delay_s", tau);
    r.add_column("peak_ratio", ratio);
    r.validate();
    return r;
}

SweepResult temperature_sweep(const ExperimentSetup& setup, const SweepSpec& temperatures) {
    const auto temps = temperatures.values();
    if (!(temps.front() > 0.0)) throw DomainError("temperatures must be positive");
    const double gap = diagonalize(build_ground_hamiltonian(setup.params, setup.field)).mean_branch_gap();
    std::vector<double> r2, ro, rs;
    for (double temp : temps) {
        ExperimentSetup s = setup;
        s.temperature = temp;

        const double t2_est = 1.0 / (phonon_rates(s.params, gap, temp).up + s.params.gamma_phi_extra);
        const double window = std::clamp(5.0 * t2_est, 60e-9, 300e-9);
        const int nr = int(std::lround(window / 2e-9)) + 1;
        const SweepSpec rd{"delay", 0.0, 2e-9 * double(nr - 1), nr};
        const SweepResult ram = ramsey_scan(s, rd, RamseyPlacement::symmetric);
        r2.push_back(1.0 / ramsey_fit(ram.column("delay_s"), ram.column("peak_ratio")).value("T2star"));

        const double to_est = orbital_t1(s.params, gap, temp);
        const SweepResult orb = orbital_recovery_scan(s, SweepSpec{"delay", 0.0, 6.0 * to_est, 41});
        ro.push_back(0.5 / fit_exp_recovery(orb.column("delay_s"), orb.column("upper_fraction")).value("T"));

        const double ts_est = rate_equation_spin_t1(s, default_t1_delays());
        const SweepResult t1 = t1_recovery_scan(s, SweepSpec{"delay", 0.0, 5.0 * ts_est, 41});
        rs.push_back(0.5 / fit_exp_recovery(t1.column("delay_s"), t1.column("peak_ratio")).value("T"));
    }
    SweepResult r = start_result("tempsweep", setup);
    r.add_column("temperature_K", temps);
    r.add_column("inv_T2star_per_s", r2);
    r.add_column("inv_2T1orb_per_s", ro);
    r.add_column("inv_2T1spin_per_s", rs);
    r.validate();
    return r;
}

InitializationFidelity initialization_fidelity(const ExperimentSetup& setup) {
    SequenceRunner runner(setup.context());
    const auto tr = runner.run(sequence(setup, {setup.pump(setup.pump_duration)}), thermal_start(runner),
                               Sampling::boundaries);
    const EnergySpectrum& sp = runner.context().spectrum;
    const Eigen::VectorXd& p = tr.populations.back();
    double down = 0.0, lower = 0.0;
    for (int k : sp.states_in(Branch::lower)) {
        lower += p(k);
        if (sp.labels[k].electron == Spin::down) down += p(k);
    }
    return {down / lower, down};
}

SweepResult fidelity_scan(const ExperimentSetup& setup, const SweepSpec& durations) {
    const auto d = durations.values();
    if (!(d.front() > 0.0)) throw DomainError("pump durations must be positive");
    std::vector<double> cond, abs;
    for (double t : d) {
        ExperimentSetup s = setup;
        s.pump_duration = t;
        const InitializationFidelity f = initialization_fidelity(s);
        cond.push_back(f.conditional);
        abs.push_back(f.absolute);
    }
    SweepResult r = start_result("fidelity", setup);
    r.add_column("pump_duration_s", d);
    r.add_column("conditional_fidelity", cond);
    r.add_column("absolute_fidelity", abs);
    r.validate();
    return r;
}

std::vector<FitResult> standard_fits(const SweepResult& r, const ExperimentSetup& setup) {
    const std::string& e = r.experiment;
    if (e == "t1") return {fit_exp_recovery(r.column("delay_s"), r.column("peak_ratio"))};
    if (e == "orbital") return {fit_exp_recovery(r.column("delay_s"), r.column("upper_fraction"))};
    if (e == "odmr") return {fit_lorentzian_peaks(r.column("carrier_Hz"), r.column("peak_ratio"), 2)};
    if (e == "odmr-vs-field") {
        std::vector<double> b;
        std::vector<std::array<double, 2>> f;
        for (std::size_t i = 0; i < r.rows(); ++i) {
            if (!(r.column("field_T")[i] > 0.0)) continue;
            b.push_back(r.column("field_T")[i]);
            f.push_back({r.column("line1_Hz")[i], r.column("line2_Hz")[i]});
        }
        return {fit_a_parallel(b, f, {setup.field.polar_angle, setup.field.azimuth}, setup.params)};
    }
    if (e == "rabi-duration")
        return {rabi_frequency_fit(r.column("duration_s"), r.column("peak_ratio"), setup.params.gamma0_orbital > 0.0)};
    if (e == "rabi-power") return {fit_linear(r.column("sqrt_power"), r.column("rabi_frequency_Hz"))};
    if (e == "rabi-detuning") return {fit_generalized_rabi(r.column("detuning_Hz"), r.column("effective_frequency_Hz"))};
    if (e == "ramsey-symmetric") return {ramsey_fit(r.column("delay_s"), r.column("peak_ratio"))};
    if (e == "ramsey-asymmetric") return {fit_double_drifting_cosine(r.column("delay_s"), r.column("peak_ratio"))};
    if (e == "tempsweep") {
        const auto& t = r.column("temperature_K");
        return {fit_linear(t, r.column("inv_T2star_per_s")), fit_linear(t, r.column("inv_2T1orb_per_s")),
                fit_linear(t, r.column("inv_2T1spin_per_s"))};
    }
    return {};
}

double rate_equation_spin_t1(const ExperimentSetup& setup, const SweepSpec& delays) {
    const SimulationContext ctx = setup.context();
    const EnergySpectrum& sp = ctx.spectrum;
    const Eigen::MatrixXd gp = rate_matrix(compile_segment(setup.pump(setup.pump_duration), ctx));
    const Eigen::MatrixXd gw = rate_matrix(compile_segment(Wait{1.0}, ctx));
    const Eigen::VectorXd p0 = thermal_state(sp, setup.temperature).in_basis(sp.eigenvectors).populations();
    const Eigen::VectorXd p1 = (gp * setup.pump_duration).exp() * p0;
    const int b0 = sp.find(Branch::lower, Spin::up, Spin::up), b1 = sp.find(Branch::lower, Spin::up, Spin::down);
    const double init = p0(b0) + p0(b1);
    const auto tau = delays.values();
    std::vector<double> ratio;
    for (double t : tau) {
        const Eigen::VectorXd p = (gw * t).exp() * p1;
        ratio.push_back((p(b0) + p(b1)) / init);
    }
    return fit_exp_recovery(tau, ratio).value("T");
}

double calibrate_gamma0(const SivParameters& params, const MagneticField& field, double target_t1_orbital,
                        double temperature) {
    if (!(target_t1_orbital > 0.0)) throw DomainError("target orbital T1 must be positive");
    const double gap = diagonalize(build_ground_hamiltonian(params, field)).mean_branch_gap();
    const double n = bose_einstein(gap, temperature);
    return 1.0 / (target_t1_orbital * (2.0 * n + 1.0));
}

double calibrate_extra_dephasing(const ExperimentSetup& setup, double target, const SweepSpec& delays) {
    if (!(target > 0.0)) throw DomainError("target T2* must be positive");
    auto t2 = [&](double g) {
        ExperimentSetup e = setup;
        e.params.gamma_phi_extra = g;
        const SweepResult r = ramsey_scan(e, delays, RamseyPlacement::symmetric);
        return ramsey_fit(r.column("delay_s"), r.column("peak_ratio")).value("T2star") - target;
    };
    double lo = 0.0, hi = 1e6;
    if (t2(lo) < 0.0) throw DomainError("dephasing without extra channel is already faster than the target T2*");
    while (t2(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e10) throw DomainError("target T2* not reachable");
    }
    for (int it = 0; it < 100 && hi - lo > 1e-10 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (t2(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double calibrate_strain_magnitude(const SivParameters& params, const MagneticField& field, double target) {
    const double psi = (params.strain_alpha == 0.0 && params.strain_beta == 0.0)
                           ? 0.0
                           : std::atan2(params.strain_beta, params.strain_alpha);
    auto sep = [&](double s) {
        SivParameters p = params;
        p.strain_alpha = s * std::cos(psi);
        p.strain_beta = s * std::sin(psi);
        const auto l = nuclear_preserving_lines(diagonalize(build_ground_hamiltonian(p, field)));
        return l[1].frequency - l[0].frequency;
    };
    double lo = 0.0, hi = 1e9;
    if (sep(lo) < target) throw DomainError("target splitting exceeds the unstrained splitting");
    while (sep(hi) > target) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e13) throw DomainError("target splitting not reachable by strain");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-6; ++it) {
        const double mid = 0.5 * (lo + hi);
        (sep(mid) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double calibrate_strain_angle(const ExperimentSetup& setup, double target, const SweepSpec& delays) {
    const double s = std::hypot(setup.params.strain_alpha, setup.params.strain_beta);
    if (!(s > 0.0)) throw DomainError("strain angle calibration needs nonzero strain");
    auto t1 = [&](double psi) {
        ExperimentSetup e = setup;
        e.params.strain_alpha = s * std::cos(psi);
        e.params.strain_beta = s * std::sin(psi);
        return rate_equation_spin_t1(e, delays) - target;
    };
    double lo = 0.05, flo = t1(lo);
    double hi = lo, fhi = flo;
    for (double psi = 0.1; psi < 1.5 + 1e-9; psi += 0.05) {
        hi = psi;
        fhi = t1(psi);
        if ((flo < 0.0) != (fhi < 0.0)) break;
        lo = hi;
        flo = fhi;
    }
    if ((flo < 0.0) == (fhi < 0.0)) throw DomainError("spin T1 target not reachable by strain angle");
    for (int it = 0; it < 60 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = t1(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double calibrate_pump_rate(const ExperimentSetup& setup, double target) {
    auto fid = [&](double rate) {
        ExperimentSetup e = setup;
        e.pump_rate = rate;
        return initialization_fidelity(e).conditional - target;
    };
    double lo = 1e3, hi = 1e6;
    if (fid(lo) > 0.0) throw DomainError("target fidelity below the unpumped value");
    while (fid(hi) < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) throw DomainError("target fidelity not reachable by pumping");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-9 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (fid(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

SweepSpec default_t1_delays() { return {"delay", 0.0, 2e-6, 41}; }

SweepSpec default_ramsey_delays() { return {"delay", 0.0, 300e-9, 151}; }

}  // namespace siv
