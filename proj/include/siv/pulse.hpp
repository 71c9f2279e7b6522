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

#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "siv/lindblad.hpp"
#include "siv/model.hpp"

namespace siv {

// Resonant optical pumping out of the bright (electron-up) lower-branch states.
struct OpticalPump {
    double rate = 5e7;              // 1/s
    double duration = 100e-9;       // s
    double partner_fraction = 1.0;  // share landing in the same-nuclear electron-down state
};

struct MicrowaveDrive {
    double carrier = 0.0;         // Hz
    double rabi_frequency = 0.0;  // Hz, bare Rabi frequency on the strongest nuclear-preserving line
    double phase = 0.0;           // rad
    double duration = 0.0;        // s
};

struct Wait {
    double duration = 0.0;
};

using PulseSegment = std::variant<OpticalPump, MicrowaveDrive, Wait>;

double duration_of(const PulseSegment& s);
bool is_optical(const PulseSegment& s);

struct PulseSequence {
    std::vector<PulseSegment> segments;
    double sample_resolution = 1e-9;

    // Rotating-frame carrier shared by all microwave segments (0 without microwaves).
    double frame_carrier() const;
    double total_duration() const;
    void validate() const;
};

struct SimulationContext {
    SivParameters params;
    MagneticField field;
    double temperature = 3.6;
    EnergySpectrum spectrum;

    SimulationContext(const SivParameters& p, const MagneticField& b, double t);
};

// Generator for one segment, written in the Hamiltonian eigenbasis and the frame rotating at frame_carrier.
LindbladModel compile_segment(const PulseSegment& segment, const SimulationContext& ctx, double frame_carrier);
LindbladModel compile_segment(const PulseSegment& segment, const SimulationContext& ctx);

struct SimulationTrace {
    std::vector<double> time;
    std::vector<double> fluorescence;
    std::vector<Eigen::VectorXd> populations;  // eigenbasis order
    std::vector<int> segment;                  // owning segment of each sample
    std::vector<int> segment_first_sample;     // -1 for zero-length segments
    std::vector<bool> segment_optical;
    std::optional<DensityMatrix> final_state;  // product basis
};

enum class Sampling { full, boundaries };

// Caches step propagators per segment configuration; reuse across a sweep.
class SequenceRunner {
public:
    explicit SequenceRunner(SimulationContext ctx);

    SimulationTrace run(const PulseSequence& seq, const DensityMatrix& rho0, Sampling mode = Sampling::full);
    const SimulationContext& context() const { return ctx_; }
    std::size_t cached_propagators() const { return cache_.size(); }

private:
    const Superoperator& step(const PulseSegment& seg, double frame, double dt);
    const Superoperator& step_power(const PulseSegment& seg, double frame, double dt, int log2_count);
    // Advances x by duration d of seg; reuses cached powers of the resolution step.
    void advance(const PulseSegment& seg, double frame, double d, double res, Eigen::VectorXcd& x);

    SimulationContext ctx_;
    std::map<std::vector<double>, Superoperator> cache_;
};

SimulationTrace run_sequence(const PulseSequence& seq, const DensityMatrix& rho0, const SimulationContext& ctx);

// Fluorescence at the start of the last optical segment over that at the start of the first.
double peak_ratio(const SimulationTrace& trace);

}  // namespace siv
