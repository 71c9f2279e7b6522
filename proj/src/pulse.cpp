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

#include "siv/pulse.hpp"

#include <cmath>
#include <string>

#include "siv/constants.hpp"
#include "siv/errors.hpp"

namespace siv {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double spin_sign(Spin s) { return s == Spin::up ? 0.5 : -0.5; }

std::vector<int> bright_states(const EnergySpectrum& sp) {
    return {sp.find(Branch::lower, Spin::up, Spin::up), sp.find(Branch::lower, Spin::up, Spin::down)};
}

OperatorMatrix unit_jump(Eigen::Index dim, int to, int from) {
    OperatorMatrix c = OperatorMatrix::Zero(dim, dim);
    c(to, from) = 1.0;
    return c;
}

std::vector<double> cache_key(const PulseSegment& seg, double frame, double dt) {
    return std::visit(overloaded{
                          [&](const OpticalPump& p) { return std::vector<double>{0, p.rate, p.partner_fraction, 0, 0, dt}; },
                          [&](const MicrowaveDrive& m) {
                              return std::vector<double>{1, m.carrier, m.rabi_frequency, m.phase, frame, dt};
                          },
                          [&](const Wait&) { return std::vector<double>{2, 0, 0, 0, frame, dt}; }},
                      seg);
}

}  // namespace

double duration_of(const PulseSegment& s) {
    return std::visit([](const auto& x) { return x.duration; }, s);
}

bool is_optical(const PulseSegment& s) { return std::holds_alternative<OpticalPump>(s); }

double PulseSequence::frame_carrier() const {
    for (const auto& s : segments)
        if (const auto* m = std::get_if<MicrowaveDrive>(&s)) return m->carrier;
    return 0.0;
}

double PulseSequence::total_duration() const {
    double t = 0.0;
    for (const auto& s : segments) t += duration_of(s);
    return t;
}

namespace {

void check_segment(const PulseSegment& s, std::size_t i) {
    const double d = duration_of(s);
    if (!(d >= 0.0) || !std::isfinite(d)) throw DomainError("segment " + std::to_string(i) + " has invalid duration");
    if (const auto* p = std::get_if<OpticalPump>(&s)) {
        if (!(p->rate >= 0.0) || !std::isfinite(p->rate)) throw DomainError("pump rate must be >= 0");
        if (!(p->partner_fraction >= 0.0 && p->partner_fraction <= 1.0))
            throw DomainError("partner fraction must lie in [0, 1]");
    }
    if (const auto* m = std::get_if<MicrowaveDrive>(&s)) {
        if (!std::isfinite(m->carrier) || !std::isfinite(m->phase)) throw DomainError("microwave carrier/phase not finite");
        if (!(m->rabi_frequency >= 0.0) || !std::isfinite(m->rabi_frequency))
            throw DomainError("Rabi frequency must be >= 0");
    }
}

}  // namespace

void PulseSequence::validate() const {
    if (!(sample_resolution > 0.0) || !std::isfinite(sample_resolution))
        throw DomainError("sample resolution must be positive");
    std::optional<double> carrier;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        check_segment(segments[i], i);
        if (const auto* m = std::get_if<MicrowaveDrive>(&segments[i])) {
            if (carrier && *carrier != m->carrier)
                throw ProtocolError("all microwave segments in a sequence must share one carrier");
            carrier = m->carrier;
        }
    }
}

SimulationContext::SimulationContext(const SivParameters& p, const MagneticField& b, double t)
    : params(p), field(b), temperature(t), spectrum(diagonalize(build_ground_hamiltonian(p, b))) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("temperature must be positive and finite");
}

LindbladModel compile_segment(const PulseSegment& segment, const SimulationContext& ctx) {
    double frame = 0.0;
    if (const auto* m = std::get_if<MicrowaveDrive>(&segment)) frame = m->carrier;
    return compile_segment(segment, ctx, frame);
}

LindbladModel compile_segment(const PulseSegment& segment, const SimulationContext& ctx, double frame) {
    check_segment(segment, 0);
    const EnergySpectrum& sp = ctx.spectrum;
    const Eigen::Index n = sp.dim();
    const auto lower = sp.states_in(Branch::lower);
    double e_ref = 0.0;
    for (int k : lower) e_ref += sp.energies(k) / double(lower.size());

    LindbladModel model;
    model.hamiltonian = OperatorMatrix::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k)
        model.hamiltonian(k, k) = sp.energies(k) - e_ref - frame * spin_sign(sp.labels[k].electron);

    if (const auto* m = std::get_if<MicrowaveDrive>(&segment)) {
        const auto lines = odmr_transitions(sp);
        double nearest = INFINITY;
        for (const auto& l : lines) nearest = std::min(nearest, std::abs(l.frequency - m->carrier));
        if (nearest > 10e9) throw DomainError("microwave carrier is more than 10 GHz from every spin line");

        const OperatorMatrix d = sp.in_eigenbasis(ops::along(ops::electron_spin(), sp.drive_axis));
        double ref = 0.0;
        for (const auto& l : lines)
            if (l.kind == LineKind::nuclear_preserving) ref = std::max(ref, std::abs(d(l.upper_state, l.lower_state)));
        if (ref < 1e-12)
            throw DomainError("microwave drive has no transverse matrix element (spin axis decoupled)");
        const Complex phase = std::polar(1.0, -m->phase);
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index k = 0; k < n; ++k) {
                if (sp.labels[j].branch != sp.labels[k].branch) continue;
                if (sp.labels[j].electron != Spin::up || sp.labels[k].electron != Spin::down) continue;
                const Complex c = 0.5 * m->rabi_frequency * d(j, k) / ref * phase;
                model.hamiltonian(j, k) += c;
                model.hamiltonian(k, j) += std::conj(c);
            }
    }

    if (const auto* p = std::get_if<OpticalPump>(&segment); p && p->rate > 0.0) {
        for (int s : bright_states(sp)) {
            const int partner = sp.find(Branch::lower, Spin::down, sp.labels[s].nuclear);
            model.collapse.push_back({unit_jump(n, partner, s), p->rate * p->partner_fraction,
                                      "pump " + std::to_string(s) + "->" + std::to_string(partner)});
            const double rest = p->rate * (1.0 - p->partner_fraction) / double(n - 2);
            if (rest <= 0.0) continue;
            for (Eigen::Index k = 0; k < n; ++k)
                if (k != s && k != partner)
                    model.collapse.push_back({unit_jump(n, int(k), s), rest, "pump leak"});
        }
    }

    if (ctx.params.gamma0_orbital > 0.0) {
        for (const auto& c : phonon_channels(sp, ctx.params, ctx.temperature))
            if (c.rate > 0.0)
                model.collapse.push_back({unit_jump(n, c.target, c.source), c.rate,
                                          "phonon " + std::to_string(c.source) + "->" + std::to_string(c.target)});
    }

    if (ctx.params.gamma_phi_extra > 0.0) {
        OperatorMatrix z = OperatorMatrix::Zero(n, n);
        for (Eigen::Index k = 0; k < n; ++k) z(k, k) = std::sqrt(2.0) * spin_sign(sp.labels[k].electron);
        model.collapse.push_back({z, ctx.params.gamma_phi_extra, "spin dephasing"});
    }
    return model;
}

SequenceRunner::SequenceRunner(SimulationContext ctx) : ctx_(std::move(ctx)) {}

// Segments without microwaves commute with the frame rotation, so they are cached in the
// lab frame and the carrier enters only as a phase on the coherences.
const Superoperator& SequenceRunner::step(const PulseSegment& seg, double frame, double dt) {
    if (!std::holds_alternative<MicrowaveDrive>(seg)) frame = 0.0;
    auto key = cache_key(seg, frame, dt);
    key.push_back(0.0);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    if (cache_.size() >= 256) cache_.clear();
    return cache_.emplace(std::move(key), propagator(liouvillian(compile_segment(seg, ctx_, frame)), dt))
        .first->second;
}

const Superoperator& SequenceRunner::step_power(const PulseSegment& seg, double frame, double dt, int j) {
    if (j == 0) return step(seg, frame, dt);
    if (!std::holds_alternative<MicrowaveDrive>(seg)) frame = 0.0;
    auto key = cache_key(seg, frame, dt);
    key.push_back(double(j));
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const Superoperator half = step_power(seg, frame, dt, j - 1);
    if (cache_.size() >= 256) cache_.clear();
    return cache_.emplace(std::move(key), half * half).first->second;
}

void SequenceRunner::advance(const PulseSegment& seg, double frame, double d, double res, Eigen::VectorXcd& x) {
    const auto steps = static_cast<long long>(std::floor(d / res * (1.0 + 1e-12)));
    double rem = d - double(steps) * res;
    if (rem < 1e-9 * res) rem = 0.0;
    for (int j = 0; (steps >> j) > 0; ++j)
        if ((steps >> j) & 1LL) x = step_power(seg, frame, res, j) * x;
    if (rem > 0.0) x = step(seg, frame, rem) * x;
    if (!std::holds_alternative<MicrowaveDrive>(seg) && frame != 0.0) {
        const EnergySpectrum& sp = ctx_.spectrum;
        const Eigen::Index n = sp.dim();
        for (Eigen::Index k = 0; k < n; ++k)
            for (Eigen::Index j = 0; j < n; ++j) {
                const double ds = spin_sign(sp.labels[j].electron) - spin_sign(sp.labels[k].electron);
                if (ds != 0.0) x(k * n + j) *= std::polar(1.0, constants::two_pi * frame * ds * d);
            }
    }
}

SimulationTrace SequenceRunner::run(const PulseSequence& seq, const DensityMatrix& rho0, Sampling mode) {
    seq.validate();
    const EnergySpectrum& sp = ctx_.spectrum;
    const Eigen::Index n = sp.dim();
    if (rho0.dim() != n) throw DomainError("initial state has wrong dimension");
    const double frame = seq.frame_carrier();
    const auto bright = bright_states(sp);

    SimulationTrace tr;
    tr.segment_first_sample.assign(seq.segments.size(), -1);
    for (const auto& s : seq.segments) tr.segment_optical.push_back(is_optical(s));

    Eigen::VectorXcd x = vectorize(sp.eigenvectors.adjoint() * rho0.matrix() * sp.eigenvectors);
    double t = 0.0;
    auto record = [&](int seg) {
        Eigen::VectorXd p(n);
        for (Eigen::Index k = 0; k < n; ++k) p(k) = x(k * n + k).real();
        double fl = 0.0;
        if (const auto* pump = std::get_if<OpticalPump>(&seq.segments[seg]))
            for (int b : bright) fl += pump->rate * p(b);
        tr.time.push_back(t);
        tr.fluorescence.push_back(fl);
        tr.populations.push_back(std::move(p));
        tr.segment.push_back(seg);
    };

    const double res = seq.sample_resolution;
    for (std::size_t i = 0; i < seq.segments.size(); ++i) {
        const auto& seg = seq.segments[i];
        const double d = duration_of(seg);
        if (d == 0.0) continue;
        tr.segment_first_sample[i] = int(tr.time.size());
        record(int(i));
        const double t0 = t;
        if (mode == Sampling::full) {
            const auto steps = static_cast<long long>(std::floor(d / res * (1.0 + 1e-12)));
            double rem = d - double(steps) * res;
            if (rem < 1e-9 * res) rem = 0.0;
            for (long long k = 1; k <= steps; ++k) {
                advance(seg, frame, res, res, x);
                t = t0 + double(k) * res;
                if (k < steps || rem > 0.0) record(int(i));
            }
            if (rem > 0.0) advance(seg, frame, rem, res, x);
        } else {
            advance(seg, frame, d, res, x);
        }
        t = t0 + d;
    }
    if (!seq.segments.empty()) {
        record(int(seq.segments.size()) - 1);
    } else {
        Eigen::VectorXd p(n);
        for (Eigen::Index k = 0; k < n; ++k) p(k) = x(k * n + k).real();
        tr.time.push_back(0.0);
        tr.fluorescence.push_back(0.0);
        tr.populations.push_back(std::move(p));
        tr.segment.push_back(-1);
    }

    const OperatorMatrix rho_e = unvectorize(x, n);
    tr.final_state = DensityMatrix::cleaned(sp.eigenvectors * rho_e * sp.eigenvectors.adjoint());
    for (const auto& p : tr.populations)
        if (p.minCoeff() < -1e-9 || p.maxCoeff() > 1.0 + 1e-9 || std::abs(p.sum() - 1.0) > 1e-9)
            throw NumericalError("populations left [0, 1] during propagation");
    return tr;
}

SimulationTrace run_sequence(const PulseSequence& seq, const DensityMatrix& rho0, const SimulationContext& ctx) {
    SequenceRunner runner(ctx);
    return runner.run(seq, rho0);
}

double peak_ratio(const SimulationTrace& trace) {
    std::vector<int> firsts;
    for (std::size_t i = 0; i < trace.segment_optical.size(); ++i)
        if (trace.segment_optical[i] && trace.segment_first_sample[i] >= 0) firsts.push_back(trace.segment_first_sample[i]);
    if (firsts.size() < 2) throw ProtocolError("peak ratio needs at least two optical segments");
    const double init = trace.fluorescence[firsts.front()];
    if (!(init > 0.0)) throw DegenerateSignalError("initialisation fluorescence is zero");
    return trace.fluorescence[firsts.back()] / init;
}

}  // namespace siv
