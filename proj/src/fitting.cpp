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

#include "siv/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>

#include <unsupported/Eigen/FFT>

#include "siv/constants.hpp"
#include "siv/errors.hpp"

namespace siv {

namespace {

using constants::two_pi;
constexpr double inf = std::numeric_limits<double>::infinity();

struct Samples {
    Eigen::VectorXd x, y;
};

// Sorted by (x, y) so the result does not depend on input order.
Samples prepare(const std::vector<double>& x, const std::vector<double>& y, std::size_t min_points,
                const char* what) {
    if (x.size() != y.size()) throw FitError(std::string(what) + ": x and y lengths differ");
    if (x.size() < min_points)
        throw FitError(std::string(what) + ": needs at least " + std::to_string(min_points) + " points");
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i : idx)
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw FitError(std::string(what) + ": non-finite input");
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
    });
    Samples s{Eigen::VectorXd(x.size()), Eigen::VectorXd(x.size())};
    for (std::size_t k = 0; k < idx.size(); ++k) {
        s.x(k) = x[idx[k]];
        s.y(k) = y[idx[k]];
    }
    return s;
}

double positive_scale(double v, double fallback) {
    const double a = std::abs(v);
    if (a > 0.0 && std::isfinite(a)) return a;
    return fallback > 0.0 ? fallback : 1.0;
}

double wrap_phase(double phi) {
    phi = std::remainder(phi, two_pi);
    return phi <= -constants::pi ? phi + two_pi : phi;
}

double range_of(const Eigen::VectorXd& y) { return y.maxCoeff() - y.minCoeff(); }

Eigen::VectorXd linear_lsq(const Eigen::MatrixXd& design, const Eigen::VectorXd& y) {
    return design.completeOrthogonalDecomposition().solve(y);
}

struct Peak {
    double frequency;
    double power;
    int bin;
};

// Local maxima of the padded spectrum at or above min_bin, strongest first.
std::vector<Peak> spectral_peaks(const Spectrum1D& s, int min_bin) {
    std::vector<Peak> out;
    const int n = int(s.power.size());
    for (int k = std::max(min_bin, 1); k < n; ++k) {
        const double p = s.power[k];
        const bool left = k == min_bin || p >= s.power[k - 1];
        const bool right = k == n - 1 || p > s.power[k + 1];
        if (!(left && right)) continue;
        double f = s.frequency[k];
        if (k > min_bin && k + 1 < n) {
            const double a = std::log(s.power[k - 1] + 1e-300), b = std::log(p + 1e-300),
                         c = std::log(s.power[k + 1] + 1e-300);
            const double den = a - 2.0 * b + c;
            if (den < 0.0) f += 0.5 * (a - c) / den * (s.frequency[1] - s.frequency[0]);
        }
        out.push_back({f, p, k});
    }
    std::sort(out.begin(), out.end(), [](const Peak& a, const Peak& b) { return a.power > b.power; });
    return out;
}

double mean_power(const Spectrum1D& s) {
    double m = 0.0;
    for (std::size_t k = 1; k < s.power.size(); ++k) m += s.power[k];
    return m / double(std::max<std::size_t>(1, s.power.size() - 1));
}

constexpr int pad_factor = 8;

FitResult best_of(std::vector<FitResult> fits) {
    if (fits.empty()) throw FitError("no candidate fit");
    auto score = [](const FitResult& f) { return std::isfinite(f.rss) ? f.rss : inf; };
    std::stable_sort(fits.begin(), fits.end(), [&](const FitResult& a, const FitResult& b) {
        if (a.converged != b.converged) return a.converged;
        return score(a) < score(b);
    });
    return fits.front();
}

}  // namespace

double FitResult::value(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return values[i];
    throw FitError("fit has no parameter '" + std::string(name) + "'");
}

double FitResult::error(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return errors[i];
    throw FitError("fit has no parameter '" + std::string(name) + "'");
}

Eigen::MatrixXd numerical_jacobian(const ResidualFn& f, const Eigen::VectorXd& p, double relative_step) {
    const Eigen::VectorXd r0 = f(p);
    Eigen::MatrixXd j(r0.size(), p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double h = relative_step * std::max(std::abs(p(i)), 1.0);
        Eigen::VectorXd a = p, b = p;
        a(i) += h;
        b(i) -= h;
        j.col(i) = (f(a) - f(b)) / (2.0 * h);
    }
    return j;
}

FitResult levenberg_marquardt(const ResidualFn& residuals, const Eigen::VectorXd& p0, const Eigen::VectorXd& scale,
                              std::vector<std::string> names, const LeastSquaresOptions& opts) {
    const Eigen::Index np = p0.size();
    if (scale.size() != np || int(names.size()) != np) throw FitError("parameter bookkeeping mismatch");
    if ((scale.array() <= 0.0).any()) throw FitError("parameter scales must be positive");
    ResidualFn g = [&](const Eigen::VectorXd& q) { return residuals(q.cwiseProduct(scale)); };

    Eigen::VectorXd q = p0.cwiseQuotient(scale);
    Eigen::VectorXd r = g(q);
    if (!r.allFinite()) throw FitError("residuals are not finite at the initial guess");
    double rss = r.squaredNorm();
    double mu = 1e-3;
    FitResult out;
    out.names = std::move(names);
    bool done = false;
    int it = 0;
    for (it = 1; it <= opts.max_iterations && !done; ++it) {
        if (rss == 0.0) {
            done = true;
            break;
        }
        const Eigen::MatrixXd j = numerical_jacobian(g, q, opts.relative_step);
        const Eigen::MatrixXd a = j.transpose() * j;
        const Eigen::VectorXd grad = j.transpose() * r;
        Eigen::VectorXd d = a.diagonal();
        const double dmax = std::max(d.maxCoeff(), 1e-300);
        for (Eigen::Index i = 0; i < np; ++i) d(i) = std::max(d(i), 1e-12 * dmax);
        bool improved = false;
        while (mu < 1e16) {
            Eigen::MatrixXd damped = a;
            damped.diagonal() += mu * d;
            const Eigen::VectorXd step = damped.ldlt().solve(-grad);
            const Eigen::VectorXd qn = q + step;
            const Eigen::VectorXd rn = g(qn);
            const double rss_n = rn.allFinite() ? rn.squaredNorm() : inf;
            if (rss_n < rss) {
                const double drop = rss - rss_n;
                const bool small_step = step.norm() <= opts.parameter_tolerance * (q.norm() + opts.parameter_tolerance);
                const bool small_drop = drop <= opts.residual_tolerance * rss;
                q = qn;
                r = rn;
                rss = rss_n;
                mu = std::max(mu / 3.0, 1e-15);
                improved = true;
                if (small_step || small_drop) done = true;
                break;
            }
            mu *= 4.0;
        }
        // No downhill step at any damping: already at the minimum to working precision.
        if (!improved) done = true;
    }
    out.converged = done;
    out.iterations = std::min(it, opts.max_iterations);
    out.rss = rss;
    const Eigen::VectorXd p = q.cwiseProduct(scale);
    out.values.assign(p.data(), p.data() + np);
    if (!done) out.warnings.push_back("did not converge within " + std::to_string(opts.max_iterations) + " iterations");

    const Eigen::MatrixXd j = numerical_jacobian(g, q, opts.relative_step);
    const Eigen::MatrixXd a = j.transpose() * j;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    const double lmax = es.eigenvalues().maxCoeff();
    const double lmin = es.eigenvalues().minCoeff();
    const Eigen::Index dof = r.size() - np;
    out.errors.assign(np, inf);
    if (!(lmax > 0.0) || lmin <= 1e-14 * lmax) {
        out.warnings.push_back("parameters not identifiable (singular curvature)");
    } else if (dof <= 0) {
        out.errors.assign(np, 0.0);
    } else {
        const double s2 = rss / double(dof);
        const Eigen::MatrixXd cov = es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
                                    es.eigenvectors().transpose() * s2;
        for (Eigen::Index i = 0; i < np; ++i) out.errors[i] = std::sqrt(std::max(cov(i, i), 0.0)) * scale(i);
    }
    return out;
}

Spectrum1D padded_power_spectrum(const std::vector<double>& t, const std::vector<double>& y, int pad) {
    const Samples s = prepare(t, y, 4, "spectrum");
    const Eigen::Index n = s.x.size();
    const double span = s.x(n - 1) - s.x(0);
    if (!(span > 0.0)) throw SeedingError("spectrum: abscissa has zero span");
    const double dt = span / double(n - 1);
    std::vector<double> u(std::size_t(n) * pad, 0.0);
    Eigen::Index j = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double tk = s.x(0) + dt * double(k);
        while (j + 2 < n && s.x(j + 1) < tk) ++j;
        const double x0 = s.x(j), x1 = s.x(j + 1);
        const double w = x1 > x0 ? std::clamp((tk - x0) / (x1 - x0), 0.0, 1.0) : 0.0;
        u[k] = s.y(j) + w * (s.y(j + 1) - s.y(j));
    }
    const double mean = std::accumulate(u.begin(), u.begin() + n, 0.0) / double(n);
    for (Eigen::Index k = 0; k < n; ++k) u[k] -= mean;
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, u);
    Spectrum1D out;
    const std::size_t m = u.size();
    for (std::size_t k = 0; k <= m / 2; ++k) {
        out.frequency.push_back(double(k) / (double(m) * dt));
        out.power.push_back(std::norm(spec[k]));
    }
    return out;
}

FitResult fit_exp_recovery(const std::vector<double>& t_in, const std::vector<double>& y_in) {
    const Samples s = prepare(t_in, y_in, 4, "exponential recovery");
    if (s.x.minCoeff() < 0.0) throw FitError("exponential recovery: times must be non-negative");
    const Eigen::VectorXd& t = s.x;
    const Eigen::VectorXd& y = s.y;
    const double span = t.maxCoeff() - t.minCoeff();
    if (!(span > 0.0)) throw FitError("exponential recovery: all times equal");
    const double yr = std::max(range_of(y), 1e-12 * std::max(1.0, y.cwiseAbs().maxCoeff()));
    auto res = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
        return (p(2) - p(0) * (-t.array() / p(1)).exp()).matrix() - y;
    };
    std::vector<FitResult> fits;
    for (double tf : {0.1, 0.3, 1.0, 3.0}) {
        const double tau = tf * span;
        Eigen::MatrixXd d(t.size(), 2);
        d.col(0).setOnes();
        d.col(1) = -(-t.array() / tau).exp().matrix();
        const Eigen::VectorXd lin = linear_lsq(d, y);
        Eigen::VectorXd p0(3);
        p0 << lin(1), tau, lin(0);
        Eigen::VectorXd sc(3);
        sc << positive_scale(lin(1), yr), tau, positive_scale(lin(0), yr);
        fits.push_back(levenberg_marquardt(res, p0, sc, {"a", "T", "c"}));
    }
    FitResult f = best_of(std::move(fits));
    f.form = "y = c - a*exp(-t/T)";
    return f;
}

FitResult fit_lorentzian_peaks(const std::vector<double>& f_in, const std::vector<double>& y_in, int n_peaks) {
    if (n_peaks != 1 && n_peaks != 2) throw FitError("Lorentzian fit supports 1 or 2 peaks");
    const Samples s = prepare(f_in, y_in, std::size_t(3 * n_peaks + 2), "Lorentzian");
    const Eigen::VectorXd& f = s.x;
    const Eigen::VectorXd& y = s.y;
    const Eigen::Index n = f.size();
    const double span = f(n - 1) - f(0);
    if (!(span > 0.0)) throw FitError("Lorentzian: all frequencies equal");

    std::vector<double> sorted(y.data(), y.data() + n);
    std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
    const double base = sorted[n / 2];

    std::vector<Eigen::Index> maxima;
    for (Eigen::Index k = 0; k < n; ++k) {
        const bool left = k == 0 || y(k) > y(k - 1);
        const bool right = k == n - 1 || y(k) >= y(k + 1);
        if (left && right && y(k) > base) maxima.push_back(k);
    }
    std::stable_sort(maxima.begin(), maxima.end(), [&](Eigen::Index a, Eigen::Index b) { return y(a) > y(b); });
    if (int(maxima.size()) < n_peaks) {
        if (n_peaks == 1) {
            Eigen::Index k = 0;
            y.maxCoeff(&k);
            maxima = {k};
        } else {
            throw SeedingError("Lorentzian: fewer distinct maxima than requested peaks");
        }
    }
    maxima.resize(n_peaks);

    const double step = span / double(n - 1);
    Eigen::VectorXd p0(3 * n_peaks + 1), sc(3 * n_peaks + 1);
    std::vector<std::string> names;
    for (int i = 0; i < n_peaks; ++i) {
        const Eigen::Index k = maxima[i];
        const double amp = y(k) - base;
        const double half = base + 0.5 * amp;
        Eigen::Index lo = k, hi = k;
        while (lo > 0 && y(lo) > half) --lo;
        while (hi < n - 1 && y(hi) > half) ++hi;
        double width = std::max(f(hi) - f(lo), 2.0 * step);
        if (!(amp > 0.0)) width = 5.0 * step;
        p0.segment(3 * i, 3) << f(k), width, amp;
        sc.segment(3 * i, 3) << positive_scale(f(k), span), width, positive_scale(amp, std::max(range_of(y), 1e-12));
        const std::string id = std::to_string(i + 1);
        names.insert(names.end(), {"center" + id, "width" + id, "amplitude" + id});
    }
    p0(3 * n_peaks) = base;
    sc(3 * n_peaks) = positive_scale(base, 1.0);
    names.push_back("baseline");

    auto res = [&, n_peaks](const Eigen::VectorXd& p) -> Eigen::VectorXd {
        Eigen::ArrayXd m = Eigen::ArrayXd::Constant(f.size(), p(3 * n_peaks));
        for (int i = 0; i < n_peaks; ++i) {
            const Eigen::ArrayXd u = 2.0 * (f.array() - p(3 * i)) / p(3 * i + 1);
            m += p(3 * i + 2) / (1.0 + u.square());
        }
        return m.matrix() - y;
    };
    FitResult out = levenberg_marquardt(res, p0, sc, names);
    for (int i = 0; i < n_peaks; ++i) {
        out.values[3 * i + 1] = std::abs(out.values[3 * i + 1]);
    }
    if (n_peaks == 2 && out.values[0] > out.values[3]) {
        for (int k = 0; k < 3; ++k) {
            std::swap(out.values[k], out.values[3 + k]);
            std::swap(out.errors[k], out.errors[3 + k]);
        }
    }
    out.form = n_peaks == 1 ? "y = baseline + amplitude1/(1 + (2(f-center1)/width1)^2)"
                            : "y = baseline + sum_k amplitude_k/(1 + (2(f-center_k)/width_k)^2)";
    return out;
}

namespace {

struct CosineSeed {
    std::vector<double> frequencies;  // empty means the zero-frequency limit
    bool monotone = false;            // spectrum maximum sits on the lowest admissible bin
};

CosineSeed seed_frequencies(const Eigen::VectorXd& t, const Eigen::VectorXd& y, std::size_t wanted) {
    const std::vector<double> tv(t.data(), t.data() + t.size()), yv(y.data(), y.data() + y.size());
    const Spectrum1D spec = padded_power_spectrum(tv, yv, pad_factor);
    const auto peaks = spectral_peaks(spec, pad_factor);
    const double mp = mean_power(spec);
    if (peaks.empty() || !(peaks[0].power > 10.0 * mp))
        throw SeedingError("no dominant spectral component (data look like noise)");
    CosineSeed seed;
    seed.monotone = peaks[0].bin == pad_factor;
    seed.frequencies.push_back(peaks[0].frequency);
    for (std::size_t i = 1; i < peaks.size() && seed.frequencies.size() < wanted; ++i) {
        if (std::abs(peaks[i].bin - peaks[0].bin) < pad_factor) continue;
        if (peaks[i].bin <= pad_factor) continue;  // baseline trend, not a fringe
        if (peaks[i].power < 0.02 * peaks[0].power) break;
        seed.frequencies.push_back(peaks[i].frequency);
    }
    return seed;
}

// Linear amplitudes (c, a1, b1, a2, b2, ...) for fixed frequencies and decay.
Eigen::VectorXd cosine_amplitudes(const Eigen::VectorXd& t, const Eigen::VectorXd& y, const std::vector<double>& fs,
                                  double tau) {
    Eigen::MatrixXd d(t.size(), 1 + 2 * fs.size());
    d.col(0).setOnes();
    const Eigen::ArrayXd env = (-t.array() / tau).exp();
    for (std::size_t i = 0; i < fs.size(); ++i) {
        d.col(1 + 2 * i) = (env * (two_pi * fs[i] * t.array()).cos()).matrix();
        d.col(2 + 2 * i) = (-env * (two_pi * fs[i] * t.array()).sin()).matrix();
    }
    return linear_lsq(d, y);
}

void normalize_amplitude(double& a, double& phi) {
    if (a < 0.0) {
        a = -a;
        phi += constants::pi;
    }
    phi = wrap_phase(phi);
}

FitResult exponential_limit(const Eigen::VectorXd& t, const Eigen::VectorXd& y, double span) {
    const double yr = std::max(range_of(y), 1e-12);
    auto res = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
        return (p(2) + p(0) * (-t.array() / p(1)).exp()).matrix() - y;
    };
    std::vector<FitResult> fits;
    for (double tf : {0.1, 0.3, 1.0, 3.0}) {
        const double tau = tf * span;
        const Eigen::VectorXd lin = cosine_amplitudes(t, y, {0.0}, tau);
        Eigen::VectorXd p0(3), sc(3);
        p0 << lin(1), tau, lin(0);
        sc << positive_scale(lin(1), yr), tau, positive_scale(lin(0), yr);
        fits.push_back(levenberg_marquardt(res, p0, sc, {"A", "T2star", "c"}));
    }
    FitResult e = best_of(std::move(fits));
    FitResult out;
    out.names = {"A", "f", "phi", "T2star", "c"};
    out.values = {e.values[0], 0.0, 0.0, e.values[1], e.values[2]};
    out.errors = {e.errors[0], 0.0, 0.0, e.errors[1], e.errors[2]};
    if (out.values[0] < 0.0) {
        out.values[0] = -out.values[0];
        out.values[2] = constants::pi;
    }
    out.rss = e.rss;
    out.converged = e.converged;
    out.iterations = e.iterations;
    out.warnings = e.warnings;
    return out;
}

}  // namespace

FitResult fit_damped_cosine(const std::vector<double>& t_in, const std::vector<double>& y_in) {
    const Samples s = prepare(t_in, y_in, 6, "damped cosine");
    const Eigen::VectorXd& t = s.x;
    const Eigen::VectorXd& y = s.y;
    const double span = t.maxCoeff() - t.minCoeff();
    const double yr = std::max(range_of(y), 1e-12);
    const CosineSeed seed = seed_frequencies(t, y, 1);

    auto res = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
        return (p(4) + p(0) * (two_pi * p(1) * t.array() + p(2)).cos() * (-t.array() / p(3)).exp()).matrix() - y;
    };
    std::vector<FitResult> fits;
    const double f0 = seed.frequencies[0];
    for (double tf : {0.1, 0.3, 1.0, 3.0}) {
        const double tau = tf * span;
        const Eigen::VectorXd lin = cosine_amplitudes(t, y, {f0}, tau);
        double a = std::hypot(lin(1), lin(2));
        double phi = std::atan2(lin(2), lin(1));
        Eigen::VectorXd p0(5), sc(5);
        p0 << a, f0, phi, tau, lin(0);
        sc << positive_scale(a, yr), f0, 1.0, tau, positive_scale(lin(0), yr);
        fits.push_back(levenberg_marquardt(res, p0, sc, {"A", "f", "phi", "T2star", "c"}));
    }
    FitResult out = best_of(std::move(fits));
    normalize_amplitude(out.values[0], out.values[2]);
    out.values[3] = std::abs(out.values[3]);
    if (out.values[1] < 0.0) {
        out.values[1] = -out.values[1];
        out.values[2] = wrap_phase(-out.values[2]);
    }

    if (seed.monotone) {
        FitResult e = exponential_limit(t, y, span);
        if (e.rss <= out.rss * (1.0 + 1e-6) + 1e-30) out = e;
    }
    if (out.values[1] > 0.0 && out.values[1] * span < 2.0)
        out.warnings.push_back("fewer than two oscillation periods; frequency unreliable");
    out.form = "y = c + A*cos(2*pi*f*t + phi)*exp(-t/T2star)";
    return out;
}

FitResult fit_double_damped_cosine(const std::vector<double>& t_in, const std::vector<double>& y_in) {
    const Samples s = prepare(t_in, y_in, 10, "double damped cosine");
    const Eigen::VectorXd& t = s.x;
    const Eigen::VectorXd& y = s.y;
    const double span = t.maxCoeff() - t.minCoeff();
    const double yr = std::max(range_of(y), 1e-12);
    const std::vector<std::string> names{"A1", "f1", "A2", "f2", "phi1", "phi2", "T2star", "c"};
    const std::string form = "y = c + (A1*cos(2*pi*f1*t + phi1) + A2*cos(2*pi*f2*t + phi2))*exp(-t/T2star)";

    auto fallback = [&](const std::string& why) {
        FitResult single = fit_damped_cosine(t_in, y_in);
        FitResult out;
        out.names = names;
        const double a = single.value("A"), f = single.value("f"), phi = single.value("phi");
        out.values = {a, f, 0.0, f, phi, 0.0, single.value("T2star"), single.value("c")};
        out.errors = {single.error("A"), single.error("f"), 0.0, single.error("f"), single.error("phi"), 0.0,
                      single.error("T2star"), single.error("c")};
        out.rss = single.rss;
        out.converged = single.converged;
        out.iterations = single.iterations;
        out.warnings = single.warnings;
        out.warnings.push_back("single-component fallback: " + why);
        out.form = form;
        return out;
    };

    const CosineSeed seed = seed_frequencies(t, y, 2);
    if (seed.frequencies.size() < 2) return fallback("second spectral component not resolved");

    // Internal order: A1, f1, phi1, A2, f2, phi2, T, c.
    auto res = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
        const Eigen::ArrayXd env = (-t.array() / p(6)).exp();
        return (p(7) + env * (p(0) * (two_pi * p(1) * t.array() + p(2)).cos() +
                              p(3) * (two_pi * p(4) * t.array() + p(5)).cos()))
                   .matrix() -
               y;
    };
    std::vector<FitResult> fits;
    const double f1 = seed.frequencies[0], f2 = seed.frequencies[1];
    for (double tf : {0.1, 0.3, 1.0, 3.0}) {
        const double tau = tf * span;
        const Eigen::VectorXd lin = cosine_amplitudes(t, y, {f1, f2}, tau);
        Eigen::VectorXd p0(8), sc(8);
        const double a1 = std::hypot(lin(1), lin(2)), a2 = std::hypot(lin(3), lin(4));
        p0 << a1, f1, std::atan2(lin(2), lin(1)), a2, f2, std::atan2(lin(4), lin(3)), tau, lin(0);
        sc << positive_scale(a1, yr), f1, 1.0, positive_scale(a2, yr), f2, 1.0, tau, positive_scale(lin(0), yr);
        fits.push_back(levenberg_marquardt(res, p0, sc, {"A1", "f1", "phi1", "A2", "f2", "phi2", "T2star", "c"}));
    }
    FitResult raw = best_of(std::move(fits));
    std::vector<double> v = raw.values, e = raw.errors;
    normalize_amplitude(v[0], v[2]);
    normalize_amplitude(v[3], v[5]);
    for (int k : {1, 4})
        if (v[k] < 0.0) {
            v[k] = -v[k];
            v[k + 1] = wrap_phase(-v[k + 1]);
        }
    if (std::abs(v[1] - v[4]) < 0.5 / span || std::min(v[0], v[3]) < 1e-3 * std::max(v[0], v[3]))
        return fallback("components merged during refinement");
    if (v[1] < v[4]) {
        for (int k = 0; k < 3; ++k) {
            std::swap(v[k], v[3 + k]);
            std::swap(e[k], e[3 + k]);
        }
    }
    FitResult out;
    out.names = names;
    out.values = {v[0], v[1], v[3], v[4], v[2], v[5], std::abs(v[6]), v[7]};
    out.errors = {e[0], e[1], e[3], e[4], e[2], e[5], e[6], e[7]};
    out.rss = raw.rss;
    out.converged = raw.converged;
    out.iterations = raw.iterations;
    out.warnings = raw.warnings;
    out.form = form;
    return out;
}

FitResult fit_drifting_cosine(const std::vector<double>& t_in, const std::vector<double>& y_in) {
    const Samples s = prepare(t_in, y_in, 8, "drifting cosine");
    const Eigen::VectorXd& t = s.x;
    const Eigen::VectorXd& y = s.y;
    const double span = t.maxCoeff() - t.minCoeff();
    const double yr = std::max(range_of(y), 1e-12);
    const CosineSeed seed = seed_frequencies(t, y, 1);
    const double f0 = seed.frequencies[0];

    // A, f, phi, T, c, d, Td
    auto res = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
        return (p(4) + p(5) * (1.0 - (-t.array() / p(6)).exp()) +
                p(0) * (two_pi * p(1) * t.array() + p(2)).cos() * (-t.array() / p(3)).exp())
                   .matrix() -
               y;
    };
    std::vector<FitResult> fits;
    for (double tf : {0.3, 1.0, 3.0})
        for (double df : {0.3, 1.0}) {
            const double tau = tf * span, td = df * span;
            Eigen::MatrixXd d(t.size(), 4);
            const Eigen::ArrayXd env = (-t.array() / tau).exp();
            d.col(0).setOnes();
            d.col(1) = (1.0 - (-t.array() / td).exp()).matrix();
            d.col(2) = (env * (two_pi * f0 * t.array()).cos()).matrix();
            d.col(3) = (-env * (two_pi * f0 * t.array()).sin()).matrix();
            const Eigen::VectorXd lin = linear_lsq(d, y);
            const double a = std::hypot(lin(2), lin(3));
            Eigen::VectorXd p0(7), sc(7);
            p0 << a, f0, std::atan2(lin(3), lin(2)), tau, lin(0), lin(1), td;
            sc << positive_scale(a, yr), f0, 1.0, tau, positive_scale(lin(0), yr), positive_scale(lin(1), yr), td;
            fits.push_back(levenberg_marquardt(res, p0, sc, {"A", "f", "phi", "T", "c", "d", "Td"}));
        }
    FitResult out = best_of(std::move(fits));
    normalize_amplitude(out.values[0], out.values[2]);
    if (out.values[1] < 0.0) {
        out.values[1] = -out.values[1];
        out.values[2] = wrap_phase(-out.values[2]);
    }
    out.values[3] = std::abs(out.values[3]);
    if (out.values[1] * span < 2.0) out.warnings.push_back("fewer than two oscillation periods; frequency unreliable");
    out.form = "y = c + d*(1 - exp(-t/Td)) + A*cos(2*pi*f*t + phi)*exp(-t/T)";
    return out;
}

FitResult fit_double_drifting_cosine(const std::vector<double>& t_in, const std::vector<double>& y_in) {
    const FitResult base = fit_double_damped_cosine(t_in, y_in);
    if (base.value("A2") == 0.0) return base;  // single-component fallback already flagged
    const Samples s = prepare(t_in, y_in, 12, "double drifting cosine");
    const Eigen::VectorXd& t = s.x;
    const Eigen::VectorXd& y = s.y;
    const double span = t.maxCoeff() - t.minCoeff();
    const double yr = std::max(range_of(y), 1e-12);

    // A1, f1, phi1, A2, f2, phi2, T, c, d, Td
    auto res = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
        const Eigen::ArrayXd env = (-t.array() / p(6)).exp();
        return (p(7) + p(8) * (1.0 - (-t.array() / p(9)).exp()) +
                env * (p(0) * (two_pi * p(1) * t.array() + p(2)).cos() +
                       p(3) * (two_pi * p(4) * t.array() + p(5)).cos()))
                   .matrix() -
               y;
    };
    std::vector<FitResult> fits;
    for (double df : {0.3, 1.0, 3.0}) {
        const double td = df * span;
        Eigen::VectorXd p0(10), sc(10);
        p0 << base.value("A1"), base.value("f1"), base.value("phi1"), base.value("A2"), base.value("f2"),
            base.value("phi2"), base.value("T2star"), base.value("c"), 0.0, td;
        sc << positive_scale(p0(0), yr), p0(1), 1.0, positive_scale(p0(3), yr), p0(4), 1.0, p0(6),
            positive_scale(p0(7), yr), yr, td;
        fits.push_back(levenberg_marquardt(res, p0, sc, {"A1", "f1", "phi1", "A2", "f2", "phi2", "T2star", "c", "d", "Td"}));
    }
    FitResult raw = best_of(std::move(fits));
    if (!(raw.rss < base.rss)) return base;
    std::vector<double> v = raw.values, e = raw.errors;
    normalize_amplitude(v[0], v[2]);
    normalize_amplitude(v[3], v[5]);
    for (int k : {1, 4})
        if (v[k] < 0.0) {
            v[k] = -v[k];
            v[k + 1] = wrap_phase(-v[k + 1]);
        }
    if (v[1] < v[4])
        for (int k = 0; k < 3; ++k) {
            std::swap(v[k], v[3 + k]);
            std::swap(e[k], e[3 + k]);
        }
    FitResult out;
    out.names = {"A1", "f1", "A2", "f2", "phi1", "phi2", "T2star", "c", "d", "Td"};
    out.values = {v[0], v[1], v[3], v[4], v[2], v[5], std::abs(v[6]), v[7], v[8], std::abs(v[9])};
    out.errors = {e[0], e[1], e[3], e[4], e[2], e[5], e[6], e[7], e[8], e[9]};
    out.rss = raw.rss;
    out.converged = raw.converged;
    out.iterations = raw.iterations;
    out.warnings = raw.warnings;
    out.form = "y = c + d*(1 - exp(-t/Td)) + (A1*cos(2*pi*f1*t + phi1) + A2*cos(2*pi*f2*t + phi2))*exp(-t/T2star)";
    return out;
}

FitResult fit_generalized_rabi(const std::vector<double>& delta_in, const std::vector<double>& f_in) {
    const Samples s = prepare(delta_in, f_in, 1, "generalized Rabi");
    const Eigen::VectorXd& d = s.x;
    const Eigen::VectorXd& f = s.y;
    Eigen::Index k0 = 0;
    d.cwiseAbs().minCoeff(&k0);
    const double om2 = f(k0) * f(k0) - d(k0) * d(k0);
    const double om0 = om2 > 0.0 ? std::sqrt(om2) : std::abs(f(k0));
    auto res = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
        return (p(0) * p(0) + d.array().square()).sqrt().matrix() - f;
    };
    Eigen::VectorXd p0(1), sc(1);
    p0 << om0;
    sc << positive_scale(om0, f.cwiseAbs().maxCoeff());
    FitResult out = levenberg_marquardt(res, p0, sc, {"Omega"});
    out.values[0] = std::abs(out.values[0]);
    if (std::abs(d(k0)) >= 0.5 * out.values[0])
        out.warnings.push_back("no point with |delta| < Omega/2; ill-conditioned");
    out.form = "f_eff = sqrt(Omega^2 + delta^2)";
    return out;
}

FitResult fit_linear(const std::vector<double>& x_in, const std::vector<double>& y_in) {
    const Samples s = prepare(x_in, y_in, 2, "linear");
    const Eigen::VectorXd& x = s.x;
    const Eigen::VectorXd& y = s.y;
    const double n = double(x.size());
    const double mx = x.mean(), my = y.mean();
    const double sxx = (x.array() - mx).square().sum();
    if (!(sxx > 1e-30 * std::max(1.0, mx * mx) * n)) throw FitError("linear fit: x values are not distinct (rank deficient)");
    const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    const double rss = (y.array() - intercept - slope * x.array()).square().sum();
    const double sst = (y.array() - my).square().sum();
    const double r2 = sst > 0.0 ? 1.0 - rss / sst : (rss == 0.0 ? 1.0 : 0.0);
    FitResult out;
    out.form = "y = slope*x + intercept";
    out.names = {"slope", "intercept", "r_squared"};
    out.values = {slope, intercept, r2};
    double es = 0.0, ei = 0.0;
    if (x.size() > 2) {
        const double s2 = rss / (n - 2.0);
        es = std::sqrt(s2 / sxx);
        ei = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
    }
    out.errors = {es, ei, 0.0};
    out.rss = rss;
    out.converged = true;
    out.iterations = 1;
    return out;
}

FitResult fit_a_parallel(const std::vector<double>& b, const std::vector<std::array<double, 2>>& fr,
                         const FieldGeometry& geometry, const SivParameters& prior, bool fit_gamma_s) {
    if (b.size() != fr.size()) throw FitError("A_par fit: field and resonance counts differ");
    if (b.size() < 3) throw FitError("A_par fit: needs at least 3 field points");
    prior.validate();
    std::vector<std::size_t> idx(b.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
        if (b[i] != b[j]) return b[i] < b[j];
        return std::min(fr[i][0], fr[i][1]) < std::min(fr[j][0], fr[j][1]);
    });
    std::vector<double> bs;
    std::vector<std::array<double, 2>> meas;
    for (std::size_t i : idx) {
        if (!std::isfinite(b[i]) || !std::isfinite(fr[i][0]) || !std::isfinite(fr[i][1]))
            throw FitError("A_par fit: non-finite input");
        bs.push_back(b[i]);
        meas.push_back({std::min(fr[i][0], fr[i][1]), std::max(fr[i][0], fr[i][1])});
    }
    const std::size_t m = bs.size();
    auto res = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
        SivParameters q = prior;
        q.a_par = p(0);
        if (fit_gamma_s) q.gamma_s = p(1);
        Eigen::VectorXd r(2 * m);
        for (std::size_t i = 0; i < m; ++i) {
            try {
                const auto lines = nuclear_preserving_lines(
                    diagonalize(build_ground_hamiltonian(q, {bs[i], geometry.polar_angle, geometry.azimuth})));
                r(2 * i) = (lines[0].frequency - meas[i][0]) * 1e-6;
                r(2 * i + 1) = (lines[1].frequency - meas[i][1]) * 1e-6;
            } catch (const ClassificationError&) {
                r(2 * i) = r(2 * i + 1) = 1e6;
            }
        }
        return r;
    };
    const int np = fit_gamma_s ? 2 : 1;
    Eigen::VectorXd p0(np), sc(np);
    std::vector<std::string> names{"a_par"};
    p0(0) = prior.a_par;
    sc(0) = positive_scale(prior.a_par, 1e6);
    if (fit_gamma_s) {
        p0(1) = prior.gamma_s;
        sc(1) = positive_scale(prior.gamma_s, 1e9);
        names.push_back("gamma_s");
    }
    FitResult out = levenberg_marquardt(res, p0, sc, names);
    out.values[0] = std::abs(out.values[0]);
    out.form = "nuclear-preserving lines of the ground Hamiltonian vs field (residuals in MHz)";
    return out;
}

}  // namespace siv
