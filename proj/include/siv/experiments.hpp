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

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "siv/fitting.hpp"
#include "siv/model.hpp"
#include "siv/pulse.hpp"

namespace siv {

// Everything a sweep holds fixed.
struct ExperimentSetup {
    SivParameters params;
    MagneticField field{0.3, 109.0 * 3.14159265358979323846 / 180.0, 0.0};
    double temperature = 3.6;         // K
    double pump_rate = 5e7;           // 1/s
    double pump_duration = 100e-9;    // s, initialisation pulse
    double readout_duration = 20e-9;  // s; only its leading edge is used
    double partner_fraction = 1.0;
    double rabi_frequency = 15e6;     // Hz
    double rabi_gap = 210e-9;         // s, init-to-readout gap of the Rabi protocol
    double sample_resolution = 1e-9;  // s
    int target_line = 0;              // 0: lower-frequency nuclear-preserving line, 1: upper

    SimulationContext context() const;
    OpticalPump pump(double duration) const { return {pump_rate, duration, partner_fraction}; }
};

// Shared calibrated configuration: 0.3 T at 109 deg, 54 MHz line splitting,
// 2 T1,orbital = 133 ns and T2* = 115 ns at 3.6 K, T1,spin = 350 ns at 3.5 K.
ExperimentSetup reference_setup();

struct SweepSpec {
    std::string variable;
    double start = 0.0;
    double stop = 0.0;
    int count = 0;

    std::vector<double> values() const;
    void validate() const;
};

struct SweepResult {
    std::string experiment;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> data;
    std::vector<std::pair<std::string, double>> metadata;

    std::size_t rows() const { return data.empty() ? 0 : data.front().size(); }
    const std::vector<double>& column(std::string_view name) const;
    std::vector<double>& column(std::string_view name);
    void add_column(std::string name, std::vector<double> values);
    void validate() const;
};

enum class RamseyPlacement { symmetric, asymmetric };

SweepResult t1_recovery_scan(const ExperimentSetup& setup, const SweepSpec& delays);
// Upper-branch population recovering after the upper branch is emptied.
SweepResult orbital_recovery_scan(const ExperimentSetup& setup, const SweepSpec& delays);
// Sweep variable: carrier offset from the midpoint of the two nuclear-preserving lines.
SweepResult odmr_scan(const ExperimentSetup& setup, const SweepSpec& offsets,
                      std::optional<double> mw_duration = std::nullopt);
SweepResult odmr_vs_field(const ExperimentSetup& setup, const SweepSpec& fields);
// Detuning is measured away from the other nuclear-preserving line.
SweepResult rabi_duration_scan(const ExperimentSetup& setup, const SweepSpec& durations, double detuning = 0.0);
// Omega = kappa * sqrt(P).
SweepResult rabi_power_scan(const ExperimentSetup& setup, const SweepSpec& powers, double kappa);
SweepResult rabi_detuning_scan(const ExperimentSetup& setup, const SweepSpec& detunings);
SweepResult ramsey_scan(const ExperimentSetup& setup, const SweepSpec& delays, RamseyPlacement placement);
SweepResult temperature_sweep(const ExperimentSetup& setup, const SweepSpec& temperatures);

struct InitializationFidelity {
    double conditional = 0.0;  // lower-branch spin-down share of the lower branch
    double absolute = 0.0;     // lower-branch spin-down population
};
InitializationFidelity initialization_fidelity(const ExperimentSetup& setup);
SweepResult fidelity_scan(const ExperimentSetup& setup, const SweepSpec& pump_durations);

// Analysis helpers.
double line_frequency(const ExperimentSetup& setup, int which);
double ramsey_carrier(const ExperimentSetup& setup, RamseyPlacement placement);
double pi_half_duration(const ExperimentSetup& setup, double carrier);
FitResult rabi_frequency_fit(const std::vector<double>& t, const std::vector<double>& y, bool drift);
FitResult ramsey_fit(const std::vector<double>& t, const std::vector<double>& y);
// The figure fit(s) appropriate to a sweep.
std::vector<FitResult> standard_fits(const SweepResult& result, const ExperimentSetup& setup);

// Rate-equation (populations only) version of the pump-wait-pump protocol, fitted like the data.
double rate_equation_spin_t1(const ExperimentSetup& setup, const SweepSpec& delays);

// Calibration helpers.
double calibrate_gamma0(const SivParameters& params, const MagneticField& field, double target_t1_orbital,
                        double temperature);
// Extra dephasing so the fitted symmetric-Ramsey T2* equals the target at setup.temperature.
double calibrate_extra_dephasing(const ExperimentSetup& setup, double target_t2star, const SweepSpec& delays);
double calibrate_strain_magnitude(const SivParameters& params, const MagneticField& field, double target_separation);
double calibrate_strain_angle(const ExperimentSetup& setup, double target_t1_spin, const SweepSpec& delays);
// Pump rate giving the target conditional initialisation fidelity.
double calibrate_pump_rate(const ExperimentSetup& setup, double target_fidelity);

SweepSpec default_t1_delays();
SweepSpec default_ramsey_delays();

}  // namespace siv
