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


#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "siv/errors.hpp"
#include "siv/runner.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw siv::Error("cannot open " + path);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sivsim: SiV- ground-state spin dynamics, pulse protocols and fits"};
    app.require_subcommand(1);

    struct ExperimentArgs {
        std::string config, out, format;
        std::uint64_t seed = 0;
        CLI::Option* seed_opt = nullptr;
    };
    const std::vector<std::string> experiments{"t1",     "odmr",      "odmr-vs-field", "rabi",
                                               "ramsey", "tempsweep", "fidelity"};
    std::map<std::string, ExperimentArgs> args;
    for (const auto& name : experiments) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        auto& a = args[name];
        sub->add_option("--config", a.config, "config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", a.out, "output file (default: standard output)");
        sub->add_option("--format", a.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        a.seed_opt = sub->add_option("--seed", a.seed, "noise seed");
    }

    std::string form, in, out, xcol, ycol;
    int peaks = 2;
    auto* fit = app.add_subcommand("fit", "fit a column of a CSV written by a previous run");
    fit->add_option("form", form, "fit form")->required()->check(CLI::IsMember(siv::fit_forms()));
    fit->add_option("--in", in, "input CSV")->required()->check(CLI::ExistingFile);
    fit->add_option("--out", out, "output JSON (default: standard output)");
    fit->add_option("--x", xcol, "abscissa column");
    fit->add_option("--y", ycol, "ordinate column");
    fit->add_option("--peaks", peaks, "number of Lorentzian peaks")->check(CLI::PositiveNumber);

    std::string emit;
    auto* repro = app.add_subcommand("repro", "write the per-figure reproduction configs");
    repro->add_option("--emit", emit, "target directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit->parsed()) {
            const siv::FitSpec spec{form, in, xcol, ycol, peaks};
            const auto result = siv::fit_table(siv::read_csv_file(in), spec);
            for (const auto& w : result.fit.warnings) std::cerr << "warning: " << w << '\n';
            const std::string text = siv::render_fit_json(spec, result);
            if (out.empty()) std::cout << text;
            else siv::write_text(out, text);
            return 0;
        }
        if (repro->parsed()) {
            siv::emit_reproduction_suite(emit);
            return 0;
        }
        for (const auto& name : experiments) {
            auto* sub = app.get_subcommand(name);
            if (!sub->parsed()) continue;
            const auto& a = args[name];
            std::optional<std::uint64_t> seed;
            if (a.seed_opt->count()) seed = a.seed;
            siv::RunConfig c = siv::parse_config(slurp(a.config), seed);
            if (siv::to_string(c.kind) != name)
                throw siv::ParseError("config is for '" + siv::to_string(c.kind) + "', not '" + name + "'", 0);
            if (!a.out.empty()) c.output.path = a.out;
            if (a.format == "csv") c.output.format = siv::OutputFormat::csv;
            if (a.format == "json") c.output.format = siv::OutputFormat::json;
            return siv::run(c, std::cout, std::cerr);
        }
    } catch (const siv::ParseError& e) {
        std::cerr << "sivsim: config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "sivsim: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
