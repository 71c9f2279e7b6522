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

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "siv/config.hpp"
#include "siv/experiments.hpp"
#include "siv/fitting.hpp"

namespace siv {

struct LabeledFit {
    std::string target;  // column the fit describes
    FitResult fit;
};

struct RunOutput {
    SweepResult result;
    std::vector<LabeledFit> fits;
};

// Simulation, optional noise on peak_ratio, then the figure fits.
RunOutput simulate(const RunConfig& config);
void add_noise(SweepResult& result, const NoiseSpec& noise);

std::string render_csv(const RunConfig& config, const RunOutput& out);
std::string render_json(const RunConfig& config, const RunOutput& out);

// A CSV as written by render_csv. `echo` holds the '# ' config lines with the prefix removed.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> data;
    std::string echo;

    const std::vector<double>& column(const std::string& name) const;
};
Table read_csv(std::istream& in);
Table read_csv_file(const std::filesystem::path& path);

std::vector<std::string> fit_forms();
struct TableFit {
    std::string form_name;
    std::string x, y;
    FitResult fit;
};
TableFit fit_table(const Table& table, const FitSpec& spec);
std::string render_fit_json(const FitSpec& spec, const TableFit& f);

void write_text(const std::filesystem::path& path, const std::string& text);

// Executes a parsed config and writes its output. Returns the process exit status.
int run(const RunConfig& config, std::ostream& out, std::ostream& log);

struct ReproEntry {
    std::string name;    // file stem
    std::string figure;  // e.g. "4b"
    std::string description;
    std::string config;  // config text
};
std::vector<ReproEntry> reproduction_suite();
// Writes one config per figure plus index.json.
void emit_reproduction_suite(const std::filesystem::path& dir);

}  // namespace siv
