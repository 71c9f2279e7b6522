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
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "siv/model.hpp"

namespace siv {

struct FitResult {
    std::string form;  // model equation, human readable
    std::vector<std::string> names;
    std::vector<double> values;
    std::vector<double> errors;  // asymptotic standard errors
    double rss = 0.0;
    bool converged = false;
    int iterations = 0;
    std::vector<std::string> warnings;  // non-empty marks the result as unreliable

    double value(std::string_view name) const;
    double error(std::string_view name) const;
    bool flagged() const { return !converged || !warnings.empty(); }
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct LeastSquaresOptions {
    double relative_step = 1e-6;
    double parameter_tolerance = 1e-10;
    double residual_tolerance = 1e-12;
    int max_iterations = 500;
};

// Central differences with step relative_step * max(|p_i|, 1).
Eigen::MatrixXd numerical_jacobian(const ResidualFn& f, const Eigen::VectorXd& p, double relative_step);

// Damped Gauss-Newton on p / scale. scale must be strictly positive.
FitResult levenberg_marquardt(const ResidualFn& residuals, const Eigen::VectorXd& p0,
                              const Eigen::VectorXd& scale, std::vector<std::string> names,
                              const LeastSquaresOptions& opts = {});

struct Spectrum1D {
    std::vector<double> frequency;
    std::vector<double> power;
};

// Power spectrum of the mean-removed signal, resampled to a uniform grid and zero padded.
Spectrum1D padded_power_spectrum(const std::vector<double>& t, const std::vector<double>& y, int pad_factor = 8);

FitResult fit_exp_recovery(const std::vector<double>& t, const std::vector<double>& y);
FitResult fit_lorentzian_peaks(const std::vector<double>& f, const std::vector<double>& y, int n_peaks);
FitResult fit_damped_cosine(const std::vector<double>& t, const std::vector<double>& y);
FitResult fit_double_damped_cosine(const std::vector<double>& t, const std::vector<double>& y);
// Damped cosine riding on a saturating baseline: c + d(1 - e^(-t/Td)) + A cos(2 pi f t + phi) e^(-t/T).
FitResult fit_drifting_cosine(const std::vector<double>& t, const std::vector<double>& y);
FitResult fit_double_drifting_cosine(const std::vector<double>& t, const std::vector<double>& y);
FitResult fit_generalized_rabi(const std::vector<double>& delta, const std::vector<double>& f_eff);
FitResult fit_linear(const std::vector<double>& x, const std::vector<double>& y);

struct FieldGeometry {
    double polar_angle = 0.0;
    double azimuth = 0.0;
};

// Fits A_par (and optionally gamma_S) so the two nuclear-preserving lines match the data.
FitResult fit_a_parallel(const std::vector<double>& b, const std::vector<std::array<double, 2>>& f_resonances,
                         const FieldGeometry& geometry, const SivParameters& prior, bool fit_gamma_s = false);

}  // namespace siv
