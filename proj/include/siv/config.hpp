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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "siv/experiments.hpp"

namespace siv {

enum class ExperimentKind { t1, odmr, odmr_vs_field, rabi, ramsey, tempsweep, fidelity, fit };
enum class OutputFormat { csv, json };

std::string to_string(ExperimentKind k);
std::optional<ExperimentKind> experiment_from_string(std::string_view s);

struct NoiseSpec {
    bool enabled = false;
    double sigma = 0.0;  // additive, in peak-ratio units
    std::optional<std::uint64_t> seed;
};

struct OutputSpec {
    std::string path;  // empty: standard output
    OutputFormat format = OutputFormat::csv;
};

// Reanalysis of an existing table.
struct FitSpec {
    std::string form;
    std::string input;
    std::string x;  // empty: first column
    std::string y;  // empty: peak_ratio if present, else second column
    int peaks = 2;
};

struct RunConfig {
    ExperimentKind kind = ExperimentKind::t1;
    ExperimentSetup setup;
    SweepSpec sweep;
    std::string mode;    // rabi: duration | power | detuning
    std::string placement = "symmetric";
    double detuning = 0.0;                 // Hz, rabi duration scans
    double kappa = 7.5e6;                  // Hz per sqrt(power unit), rabi power scans
    std::optional<double> mw_duration;     // s, odmr; default is a pi pulse
    NoiseSpec noise;
    OutputSpec output;
    FitSpec fit;

    void validate() const;
};

// Default sweep for an experiment (and rabi mode).
SweepSpec default_sweep(ExperimentKind kind, std::string_view mode);

// Key-value text with [sections] and unit-suffixed scalars. A seed given here
// takes the place of one missing from the text.
RunConfig parse_config(std::string_view text, std::optional<std::uint64_t> seed_override = std::nullopt);

using ConfigValue = std::variant<double, std::int64_t, std::uint64_t, bool, std::string>;

struct ConfigEntry {
    std::string section;  // empty for top level
    std::string key;
    ConfigValue value;
    std::string unit;  // base SI unit of a quantity, else empty
};

// Every resolved setting, in file order.
std::vector<ConfigEntry> config_entries(const RunConfig& c);

// Fully resolved config in the same syntax, base SI units.
std::string to_config_text(const RunConfig& c);

}  // namespace siv
