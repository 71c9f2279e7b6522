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

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "siv/density.hpp"
#include "siv/lindblad.hpp"

namespace siv {

// Energies and couplings in Hz, gyromagnetic ratios in Hz/T, rates in 1/s.
struct SivParameters {
    double lambda_so = 50e9;
    double a_par = 70e6;
    std::optional<double> a_perp;  // unset: isotropic, equal to a_par
    double gamma_s = 28e9;
    double gamma_l = 14e9;
    double orbital_quench = 0.1;
    double gamma_n = -8.465e6;  // 29Si
    double strain_alpha = 0.0;
    double strain_beta = 0.0;
    double gamma0_orbital = 4.83e6;
    double gamma_phi_extra = 0.0;

    double transverse_hyperfine() const { return a_perp.value_or(a_par); }
    void validate() const;
};

// Spherical coordinates relative to the SiV symmetry axis (z). Angles in radians.
struct MagneticField {
    double magnitude = 0.0;
    double polar_angle = 0.0;
    double azimuth = 0.0;

    Vector3 vector() const;
    void validate() const;
};

enum class Branch { lower, upper };
enum class Spin { up, down };

struct StateLabel {
    Branch branch = Branch::lower;
    Spin electron = Spin::up;
    Spin nuclear = Spin::up;
};

std::string to_string(const StateLabel& l);

struct EnergySpectrum {
    Eigen::VectorXd energies;      // ascending, Hz
    OperatorMatrix eigenvectors;   // columns, product basis
    std::vector<StateLabel> labels;
    std::array<Vector3, 2> spin_axis;     // per branch (lower, upper)
    Vector3 nuclear_axis = Vector3::UnitZ();
    Vector3 drive_axis = Vector3::UnitX();  // transverse to the lower-branch spin axis
    std::vector<double> spin_projection;    // <S . n_branch> per eigenstate
    std::vector<double> nuclear_projection; // <I . m> per eigenstate

    Eigen::Index dim() const { return energies.size(); }
    std::vector<int> states_in(Branch b) const;
    int find(Branch b, Spin e, Spin n) const;  // -1 if absent
    double mean_branch_gap() const;
    // Matrix of an operator in the eigenbasis.
    OperatorMatrix in_eigenbasis(const OperatorMatrix& op) const;
};

enum class LineKind { nuclear_preserving, both_flipped };

struct OdmrLine {
    double frequency = 0.0;  // Hz, |E_up - E_down|
    double strength = 0.0;   // |<f| S.e |i>|^2, e transverse to the spin axis
    LineKind kind = LineKind::nuclear_preserving;
    int upper_state = -1;    // electron-up eigenstate index
    int lower_state = -1;    // electron-down eigenstate index
};

// Operators on the 8-dim orbital x electron x nuclear product space.
namespace ops {
OperatorMatrix orbital_z();
OperatorMatrix orbital_flip();        // |+><-| + |-><+|
OperatorMatrix orbital_flip_y();      // i|+><-| - i|-><+|
std::array<OperatorMatrix, 3> electron_spin();
std::array<OperatorMatrix, 3> nuclear_spin();
OperatorMatrix along(const std::array<OperatorMatrix, 3>& s, const Vector3& axis);
}  // namespace ops

OperatorMatrix build_ground_hamiltonian(const SivParameters& params, const MagneticField& field);

EnergySpectrum diagonalize(const OperatorMatrix& h);

std::vector<OdmrLine> odmr_transitions(const EnergySpectrum& spectrum);

// The two nuclear-preserving lines, ascending in frequency.
std::array<OdmrLine, 2> nuclear_preserving_lines(const EnergySpectrum& spectrum);

DensityMatrix thermal_state(const EnergySpectrum& spectrum, double temperature);

double bose_einstein(double nu, double temperature);

struct PhononRates {
    double up = 0.0;
    double down = 0.0;
};

PhononRates phonon_rates(const SivParameters& params, double nu, double temperature);

// Measured orbital relaxation time 1/(gamma_up + gamma_down).
double orbital_t1(const SivParameters& params, double nu, double temperature);

struct PhononChannel {
    int source = -1;
    int target = -1;
    double weight = 0.0;
    double rate = 0.0;
    bool spin_flip = false;
};

// Inter-branch coupling weights |<n|V|m>|^2, balanced so every row and every column sums to 1.
// Indexed [lower slot][upper slot] following states_in().
Eigen::MatrixXd phonon_weights(const EnergySpectrum& spectrum);

// Fixed upward/downward rates shared by all pairs.
std::vector<PhononChannel> phonon_channels(const EnergySpectrum& spectrum, const PhononRates& rates);
// Per-pair Bose factors at each transition energy; detailed balance holds for every pair.
std::vector<PhononChannel> phonon_channels(const EnergySpectrum& spectrum, const SivParameters& params,
                                           double temperature);

// Channels as product-basis jump operators |n><m|.
std::vector<CollapseOperator> phonon_jump_operators(const EnergySpectrum& spectrum, const PhononRates& rates);

std::vector<CollapseOperator> to_jump_operators(const std::vector<PhononChannel>& channels,
                                                const OperatorMatrix& basis);

}  // namespace siv
