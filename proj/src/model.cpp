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

#include "siv/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "siv/constants.hpp"
#include "siv/errors.hpp"

namespace siv {

namespace {

// Bit of the basis index carrying each factor: index = 4 o + 2 s + n.
constexpr int orbital_bit = 4;
constexpr int electron_bit = 2;
constexpr int nuclear_bit = 1;
constexpr int full_dim = 8;

OperatorMatrix embed(int bit, const Eigen::Matrix2cd& op) {
    OperatorMatrix out = OperatorMatrix::Zero(full_dim, full_dim);
    for (int r = 0; r < full_dim; ++r)
        for (int c = 0; c < full_dim; ++c) {
            if ((r & ~bit) != (c & ~bit)) continue;
            out(r, c) = op((r & bit) ? 1 : 0, (c & bit) ? 1 : 0);
        }
    return out;
}

std::array<Eigen::Matrix2cd, 3> half_pauli() {
    const Complex i(0.0, 1.0);
    Eigen::Matrix2cd x, y, z;
    x << 0.0, 0.5, 0.5, 0.0;
    y << 0.0, -0.5 * i, 0.5 * i, 0.0;
    z << 0.5, 0.0, 0.0, -0.5;
    return {x, y, z};
}

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) throw DomainError(std::string("parameter '") + name + "' is not finite");
}

double expectation(const Eigen::VectorXcd& v, const OperatorMatrix& op) {
    return v.dot(op * v).real();
}

Vector3 expectation3(const Eigen::VectorXcd& v, const std::array<OperatorMatrix, 3>& s) {
    return {expectation(v, s[0]), expectation(v, s[1]), expectation(v, s[2])};
}

Vector3 principal_axis(const std::vector<Vector3>& vs) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    for (const auto& v : vs) m += v * v.transpose();
    if (m.trace() < 1e-24) return Vector3::UnitZ();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
    return es.eigenvectors().col(2).normalized();
}

// Deterministic sign for an axis with no physical preference.
Vector3 canonical_sign(Vector3 a) {
    for (int k : {2, 0, 1}) {
        if (std::abs(a(k)) > 1e-12) return a(k) < 0 ? Vector3(-a) : a;
    }
    return a;
}

// Indices sorted by key descending; keys closer than tol keep index order.
std::vector<int> rank_descending(const std::vector<int>& idx, const std::vector<double>& key, double tol) {
    std::vector<int> out = idx;
    std::stable_sort(out.begin(), out.end(), [&](int a, int b) {
        const double ka = std::round(key[a] / tol), kb = std::round(key[b] / tol);
        return ka > kb;
    });
    return out;
}

}  // namespace

void SivParameters::validate() const {
    require_finite(lambda_so, "lambda_so");
    require_finite(a_par, "a_par");
    if (a_perp) require_finite(*a_perp, "a_perp");
    require_finite(gamma_s, "gamma_s");
    require_finite(gamma_l, "gamma_l");
    require_finite(orbital_quench, "orbital_quench");
    require_finite(gamma_n, "gamma_n");
    require_finite(strain_alpha, "strain_alpha");
    require_finite(strain_beta, "strain_beta");
    require_finite(gamma0_orbital, "gamma0_orbital");
    require_finite(gamma_phi_extra, "gamma_phi_extra");
    if (lambda_so < 0.0) throw DomainError("lambda_so must be >= 0");
    if (gamma0_orbital < 0.0) throw DomainError("gamma0_orbital must be >= 0");
    if (gamma_phi_extra < 0.0) throw DomainError("gamma_phi_extra must be >= 0");
}

Vector3 MagneticField::vector() const {
    return magnitude * Vector3(std::sin(polar_angle) * std::cos(azimuth),
                               std::sin(polar_angle) * std::sin(azimuth), std::cos(polar_angle));
}

void MagneticField::validate() const {
    require_finite(magnitude, "field magnitude");
    require_finite(polar_angle, "polar angle");
    require_finite(azimuth, "azimuth");
    if (magnitude < 0.0) throw DomainError("field magnitude must be >= 0");
}

std::string to_string(const StateLabel& l) {
    std::string s = l.branch == Branch::lower ? "lower" : "upper";
    s += l.electron == Spin::up ? ",e-up" : ",e-down";
    s += l.nuclear == Spin::up ? ",n-up" : ",n-down";
    return s;
}

namespace ops {

OperatorMatrix orbital_z() {
    Eigen::Matrix2cd z;
    z << 1.0, 0.0, 0.0, -1.0;
    return embed(orbital_bit, z);
}

OperatorMatrix orbital_flip() {
    Eigen::Matrix2cd x;
    x << 0.0, 1.0, 1.0, 0.0;
    return embed(orbital_bit, x);
}

OperatorMatrix orbital_flip_y() {
    const Complex i(0.0, 1.0);
    Eigen::Matrix2cd y;
    y << 0.0, i, -i, 0.0;
    return embed(orbital_bit, y);
}

std::array<OperatorMatrix, 3> electron_spin() {
    const auto p = half_pauli();
    return {embed(electron_bit, p[0]), embed(electron_bit, p[1]), embed(electron_bit, p[2])};
}

std::array<OperatorMatrix, 3> nuclear_spin() {
    const auto p = half_pauli();
    return {embed(nuclear_bit, p[0]), embed(nuclear_bit, p[1]), embed(nuclear_bit, p[2])};
}

OperatorMatrix along(const std::array<OperatorMatrix, 3>& s, const Vector3& axis) {
    return axis(0) * s[0] + axis(1) * s[1] + axis(2) * s[2];
}

}  // namespace ops

OperatorMatrix build_ground_hamiltonian(const SivParameters& params, const MagneticField& field) {
    params.validate();
    field.validate();
    const Vector3 b = field.vector();
    const auto s = ops::electron_spin();
    const auto in = ops::nuclear_spin();
    const OperatorMatrix lz = ops::orbital_z();

    OperatorMatrix h = -params.lambda_so * (lz * s[2]);
    h += params.strain_alpha * ops::orbital_flip() + params.strain_beta * ops::orbital_flip_y();
    h += params.orbital_quench * params.gamma_l * b(2) * lz;
    h += params.gamma_s * ops::along(s, b);
    h += params.a_par * (s[2] * in[2]);
    h += params.transverse_hyperfine() * (s[0] * in[0] + s[1] * in[1]);
    h += params.gamma_n * ops::along(in, b);
    return 0.5 * (h + h.adjoint());
}

std::vector<int> EnergySpectrum::states_in(Branch b) const {
    std::vector<int> out;
    for (int k = 0; k < int(labels.size()); ++k)
        if (labels[k].branch == b) out.push_back(k);
    return out;
}

int EnergySpectrum::find(Branch b, Spin e, Spin n) const {
    for (int k = 0; k < int(labels.size()); ++k)
        if (labels[k].branch == b && labels[k].electron == e && labels[k].nuclear == n) return k;
    return -1;
}

double EnergySpectrum::mean_branch_gap() const {
    double lo = 0.0, hi = 0.0;
    int nl = 0, nh = 0;
    for (int k = 0; k < dim(); ++k) {
        if (labels[k].branch == Branch::lower) {
            lo += energies(k);
            ++nl;
        } else {
            hi += energies(k);
            ++nh;
        }
    }
    if (nl == 0 || nh == 0) throw ClassificationError("spectrum has an empty orbital branch");
    return hi / nh - lo / nl;
}

OperatorMatrix EnergySpectrum::in_eigenbasis(const OperatorMatrix& op) const {
    return eigenvectors.adjoint() * op * eigenvectors;
}

EnergySpectrum diagonalize(const OperatorMatrix& h) {
    if (h.rows() != full_dim || h.cols() != full_dim)
        throw DomainError("ground Hamiltonian must be 8x8");
    if (!h.allFinite()) throw DomainError("Hamiltonian has non-finite entries");
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw DomainError("Hamiltonian is not Hermitian");

    Eigen::SelfAdjointEigenSolver<OperatorMatrix> es(0.5 * (h + h.adjoint()));
    if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed");

    EnergySpectrum sp;
    sp.energies = es.eigenvalues();
    sp.eigenvectors = es.eigenvectors();
    // Gauge: largest component of each eigenvector real and positive.
    for (int k = 0; k < full_dim; ++k) {
        auto col = sp.eigenvectors.col(k);
        Eigen::Index imax = 0;
        col.cwiseAbs().maxCoeff(&imax);
        const Complex c = col(imax);
        col *= std::conj(c) / std::abs(c);
    }

    const OperatorMatrix lzsz = ops::orbital_z() * ops::electron_spin()[2];
    const auto s = ops::electron_spin();
    const auto in = ops::nuclear_spin();

    std::vector<int> all(full_dim);
    std::iota(all.begin(), all.end(), 0);
    std::vector<double> so(full_dim);
    std::vector<Vector3> sv(full_dim), iv(full_dim);
    for (int k = 0; k < full_dim; ++k) {
        const Eigen::VectorXcd v = sp.eigenvectors.col(k);
        so[k] = expectation(v, lzsz);
        sv[k] = expectation3(v, s);
        iv[k] = expectation3(v, in);
    }

    sp.labels.assign(full_dim, StateLabel{});
    const std::vector<int> by_so = rank_descending(all, so, 1e-9);
    std::array<std::vector<int>, 2> members;
    for (int r = 0; r < full_dim; ++r) {
        const int k = by_so[r];
        sp.labels[k].branch = r < 4 ? Branch::lower : Branch::upper;
        members[r < 4 ? 0 : 1].push_back(k);
    }
    for (auto& m : members) std::sort(m.begin(), m.end());

    sp.spin_projection.assign(full_dim, 0.0);
    for (int b = 0; b < 2; ++b) {
        std::vector<Vector3> vs;
        for (int k : members[b]) vs.push_back(sv[k]);
        Vector3 n = principal_axis(vs);
        if (b == 0) {
            // Electron-up is the Zeeman-raised pair.
            std::vector<double> proj(full_dim, 0.0);
            for (int k : members[b]) proj[k] = sv[k].dot(n);
            const auto ranked = rank_descending(members[b], proj, 1e-12);
            const double e_up = sp.energies(ranked[0]) + sp.energies(ranked[1]);
            const double e_dn = sp.energies(ranked[2]) + sp.energies(ranked[3]);
            if (std::abs(e_up - e_dn) <= 1e-12 * scale)
                n = canonical_sign(n);
            else if (e_up < e_dn)
                n = -n;
        } else {
            const double d = n.dot(sp.spin_axis[0]);
            if (std::abs(d) < 1e-12)
                n = canonical_sign(n);
            else if (d < 0)
                n = -n;
        }
        sp.spin_axis[b] = n;
        for (int k : members[b]) sp.spin_projection[k] = sv[k].dot(n);
        const auto ranked = rank_descending(members[b], sp.spin_projection, 1e-12);
        for (int r = 0; r < 4; ++r) sp.labels[ranked[r]].electron = r < 2 ? Spin::up : Spin::down;
    }

    Vector3 m = principal_axis(iv);
    const double d = m.dot(sp.spin_axis[0]);
    if (std::abs(d) < 1e-12)
        m = canonical_sign(m);
    else if (d < 0)
        m = -m;
    sp.nuclear_axis = m;
    sp.nuclear_projection.assign(full_dim, 0.0);
    for (int k = 0; k < full_dim; ++k) sp.nuclear_projection[k] = iv[k].dot(m);
    for (int b = 0; b < 2; ++b)
        for (Spin e : {Spin::up, Spin::down}) {
            std::vector<int> group;
            for (int k : members[b])
                if (sp.labels[k].electron == e) group.push_back(k);
            const auto ranked = rank_descending(group, sp.nuclear_projection, 1e-12);
            sp.labels[ranked[0]].nuclear = Spin::up;
            sp.labels[ranked[1]].nuclear = Spin::down;
        }

    const Vector3 t = Vector3::UnitZ().cross(sp.spin_axis[0]);
    sp.drive_axis = t.norm() < 1e-6 ? Vector3(Vector3::UnitX()) : Vector3(t.normalized());
    return sp;
}

namespace {

void check_resolved(const EnergySpectrum& sp) {
    if (sp.dim() != full_dim || int(sp.labels.size()) != full_dim)
        throw ClassificationError("spectrum is not an 8-level ground manifold");
    auto lower = sp.states_in(Branch::lower);
    std::vector<double> p;
    for (int k : lower) p.push_back(sp.spin_projection[k]);
    const auto ranked = rank_descending(lower, sp.spin_projection, 1e-12);
    if (sp.spin_projection[ranked[1]] - sp.spin_projection[ranked[2]] < 1e-9) {
        std::ostringstream os;
        os << "cannot separate electron spin states " << ranked[1] << " (" << to_string(sp.labels[ranked[1]])
           << ") and " << ranked[2] << " (" << to_string(sp.labels[ranked[2]]) << ")";
        throw ClassificationError(os.str());
    }
    for (Spin e : {Spin::up, Spin::down}) {
        const int a = sp.find(Branch::lower, e, Spin::up);
        const int b = sp.find(Branch::lower, e, Spin::down);
        if (a < 0 || b < 0) throw ClassificationError("incomplete lower-branch labels");
        if (sp.nuclear_projection[a] - sp.nuclear_projection[b] < 1e-9) {
            std::ostringstream os;
            os << "cannot separate nuclear spin states " << a << " and " << b;
            throw ClassificationError(os.str());
        }
    }
}

}  // namespace

std::vector<OdmrLine> odmr_transitions(const EnergySpectrum& sp) {
    check_resolved(sp);
    const OperatorMatrix drive = sp.in_eigenbasis(ops::along(ops::electron_spin(), sp.drive_axis));
    auto make = [&](Spin nu, Spin nd, LineKind kind) {
        OdmrLine l;
        l.upper_state = sp.find(Branch::lower, Spin::up, nu);
        l.lower_state = sp.find(Branch::lower, Spin::down, nd);
        l.frequency = std::abs(sp.energies(l.upper_state) - sp.energies(l.lower_state));
        l.strength = std::norm(drive(l.upper_state, l.lower_state));
        l.kind = kind;
        return l;
    };
    std::vector<OdmrLine> np{make(Spin::up, Spin::up, LineKind::nuclear_preserving),
                             make(Spin::down, Spin::down, LineKind::nuclear_preserving)};
    std::vector<OdmrLine> bf{make(Spin::up, Spin::down, LineKind::both_flipped),
                             make(Spin::down, Spin::up, LineKind::both_flipped)};
    auto by_freq = [](const OdmrLine& a, const OdmrLine& b) { return a.frequency < b.frequency; };
    std::sort(np.begin(), np.end(), by_freq);
    std::sort(bf.begin(), bf.end(), by_freq);
    np.insert(np.end(), bf.begin(), bf.end());
    return np;
}

std::array<OdmrLine, 2> nuclear_preserving_lines(const EnergySpectrum& sp) {
    const auto lines = odmr_transitions(sp);
    return {lines[0], lines[1]};
}

DensityMatrix thermal_state(const EnergySpectrum& sp, double temperature) {
    if (!(temperature > 0.0) || !std::isfinite(temperature))
        throw DomainError("temperature must be positive and finite");
    const double e0 = sp.energies.minCoeff();
    Eigen::VectorXd p(sp.dim());
    for (Eigen::Index k = 0; k < sp.dim(); ++k)
        p(k) = std::exp(-constants::planck * (sp.energies(k) - e0) / (constants::boltzmann * temperature));
    return DensityMatrix::from_populations(p, sp.eigenvectors);
}

double bose_einstein(double nu, double temperature) {
    if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("phonon frequency must be positive");
    if (!(temperature > 0.0) || !std::isfinite(temperature)) throw DomainError("temperature must be positive");
    return 1.0 / std::expm1(constants::planck * nu / (constants::boltzmann * temperature));
}

PhononRates phonon_rates(const SivParameters& params, double nu, double temperature) {
    const double n = bose_einstein(nu, temperature);
    return {params.gamma0_orbital * n, params.gamma0_orbital * (n + 1.0)};
}

double orbital_t1(const SivParameters& params, double nu, double temperature) {
    const auto r = phonon_rates(params, nu, temperature);
    if (!(r.up + r.down > 0.0)) throw DomainError("orbital relaxation rate is zero");
    return 1.0 / (r.up + r.down);
}

Eigen::MatrixXd phonon_weights(const EnergySpectrum& sp) {
    if (sp.dim() != full_dim) throw ClassificationError("spectrum is not an 8-level ground manifold");
    const auto lower = sp.states_in(Branch::lower);
    const auto upper = sp.states_in(Branch::upper);
    if (lower.size() != 4 || upper.size() != 4) throw ClassificationError("branches are not resolved");
    const OperatorMatrix v = sp.in_eigenbasis(ops::orbital_flip());
    Eigen::MatrixXd w(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) w(i, j) = std::norm(v(upper[j], lower[i]));
    // round-off in symmetry-forbidden couplings would otherwise be amplified by the balancing
    w = (w.array() < 1e-12 * w.maxCoeff()).select(0.0, w);
    for (int i = 0; i < 4; ++i)
        if (!(w.row(i).sum() > 0.0))
            throw DegeneracyError("no phonon coupling out of lower state " + std::to_string(lower[i]));
    for (int j = 0; j < 4; ++j)
        if (!(w.col(j).sum() > 0.0))
            throw DegeneracyError("no phonon coupling out of upper state " + std::to_string(upper[j]));
    // Sinkhorn warm start, then Newton on the log row/column scalings. Plain Sinkhorn
    // crawls when a few off-diagonal couplings are tiny but nonzero.
    for (int it = 0; it < 200; ++it) {
        for (int j = 0; j < 4; ++j) w.col(j) /= w.col(j).sum();
        for (int i = 0; i < 4; ++i) w.row(i) /= w.row(i).sum();
    }
    const Eigen::MatrixXd w0 = w;
    Eigen::VectorXd lr = Eigen::VectorXd::Zero(4), lc = Eigen::VectorXd::Zero(4);
    for (int it = 0; it < 100; ++it) {
        w = lr.array().exp().matrix().asDiagonal() * w0 * lc.array().exp().matrix().asDiagonal();
        Eigen::VectorXd f(8);
        f << w.rowwise().sum().array() - 1.0, w.colwise().sum().transpose().array() - 1.0;
        if (f.cwiseAbs().maxCoeff() < 1e-15) break;
        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(8, 8);
        jac.topLeftCorner(4, 4) = w.rowwise().sum().asDiagonal();
        jac.topRightCorner(4, 4) = w;
        jac.bottomLeftCorner(4, 4) = w.transpose();
        jac.bottomRightCorner(4, 4) = w.colwise().sum().transpose().asDiagonal();
        const Eigen::VectorXd step = jac.completeOrthogonalDecomposition().solve(-f);
        lr += step.head(4);
        lc += step.tail(4);
    }
    for (int i = 0; i < 4; ++i) w.row(i) /= w.row(i).sum();
    return w;
}

namespace {

template <class RateFn>
std::vector<PhononChannel> build_channels(const EnergySpectrum& sp, RateFn rate_for) {
    const Eigen::MatrixXd w = phonon_weights(sp);
    const auto lower = sp.states_in(Branch::lower);
    const auto upper = sp.states_in(Branch::upper);
    std::vector<PhononChannel> out;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            if (w(i, j) == 0.0) continue;
            const int m = lower[i], n = upper[j];
            const bool flip = sp.labels[m].electron != sp.labels[n].electron;
            const PhononRates r = rate_for(m, n);
            out.push_back({m, n, w(i, j), r.up * w(i, j), flip});
            out.push_back({n, m, w(i, j), r.down * w(i, j), flip});
        }
    return out;
}

}  // namespace

std::vector<PhononChannel> phonon_channels(const EnergySpectrum& sp, const PhononRates& rates) {
    if (!(rates.up >= 0.0) || !(rates.down >= 0.0)) throw DomainError("phonon rates must be >= 0");
    return build_channels(sp, [&](int, int) { return rates; });
}

std::vector<PhononChannel> phonon_channels(const EnergySpectrum& sp, const SivParameters& params,
                                           double temperature) {
    return build_channels(sp, [&](int m, int n) {
        const double nu = sp.energies(n) - sp.energies(m);
        if (!(nu > 0.0))
            throw ClassificationError("upper-branch state " + std::to_string(n) + " lies below lower-branch state " +
                                      std::to_string(m));
        return phonon_rates(params, nu, temperature);
    });
}

std::vector<CollapseOperator> to_jump_operators(const std::vector<PhononChannel>& channels,
                                                const OperatorMatrix& basis) {
    std::vector<CollapseOperator> out;
    out.reserve(channels.size());
    for (const auto& c : channels) {
        out.push_back({basis.col(c.target) * basis.col(c.source).adjoint(), c.rate,
                       "phonon " + std::to_string(c.source) + "->" + std::to_string(c.target)});
    }
    return out;
}

std::vector<CollapseOperator> phonon_jump_operators(const EnergySpectrum& sp, const PhononRates& rates) {
    return to_jump_operators(phonon_channels(sp, rates), sp.eigenvectors);
}

}  // namespace siv
