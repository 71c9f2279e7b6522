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


#include "siv/runner.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "siv/errors.hpp"

namespace siv {

namespace {

using json = nlohmann::ordered_json;

std::string num(double x) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), ptr);
}

std::vector<std::string> fit_targets(const SweepResult& r) {
    const std::string& e = r.experiment;
    if (e == "rabi-power") return {"rabi_frequency_Hz"};
    if (e == "rabi-detuning") return {"effective_frequency_Hz"};
    if (e == "odmr-vs-field") return {"line1_Hz,line2_Hz"};
    if (e == "tempsweep") return {"inv_T2star_per_s", "inv_2T1orb_per_s", "inv_2T1spin_per_s"};
    if (e == "orbital") return {"upper_fraction"};
    return {"peak_ratio"};
}

json fit_json(const FitResult& f) {
    json j;
    j["form"] = f.form;
    json p = json::object();
    for (std::size_t i = 0; i < f.names.size(); ++i)
        p[f.names[i]] = {{"value", f.values[i]}, {"error", f.errors[i]}};
    j["parameters"] = p;
    j["rss"] = f.rss;
    j["converged"] = f.converged;
    j["iterations"] = f.iterations;
    j["warnings"] = f.warnings;
    return j;
}

json config_json(const RunConfig& c) {
    json j = json::object();
    for (const auto& e : config_entries(c)) {
        json v;
        std::visit([&](const auto& x) { v = x; }, e.value);
        if (!e.unit.empty()) v = json{{"value", v}, {"unit", e.unit}};
        if (e.section.empty()) j[e.key] = v;
        else j[e.section][e.key] = v;
    }
    return j;
}

std::string fit_line(const LabeledFit& f) {
    std::string s = "## fit " + f.target + ": " + f.fit.form;
    for (std::size_t i = 0; i < f.fit.names.size(); ++i)
        s += "; " + f.fit.names[i] + " = " + num(f.fit.values[i]) + " +- " + num(f.fit.errors[i]);
    for (const auto& w : f.fit.warnings) s += "; warning: " + w;
    return s + '\n';
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, sep)) out.push_back(item);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

}  // namespace

void add_noise(SweepResult& r, const NoiseSpec& noise) {
    if (!noise.enabled || noise.sigma == 0.0) return;
    if (!noise.seed) throw DomainError("noise is enabled but no seed was given");
    std::mt19937_64 rng(*noise.seed);
    std::normal_distribution<double> g(0.0, noise.sigma);
    for (std::size_t i = 0; i < r.columns.size(); ++i)
        if (r.columns[i] == "peak_ratio")
            for (double& y : r.data[i]) y += g(rng);
}

RunOutput simulate(const RunConfig& c) {
    c.validate();
    const ExperimentSetup& s = c.setup;
    RunOutput out;
    switch (c.kind) {
        case ExperimentKind::t1: out.result = t1_recovery_scan(s, c.sweep); break;
        case ExperimentKind::odmr: out.result = odmr_scan(s, c.sweep, c.mw_duration); break;
        case ExperimentKind::odmr_vs_field: out.result = odmr_vs_field(s, c.sweep); break;
        case ExperimentKind::rabi:
            if (c.mode == "power") out.result = rabi_power_scan(s, c.sweep, c.kappa);
            else if (c.mode == "detuning") out.result = rabi_detuning_scan(s, c.sweep);
            else out.result = rabi_duration_scan(s, c.sweep, c.detuning);
            break;
        case ExperimentKind::ramsey:
            out.result = ramsey_scan(s, c.sweep,
                                     c.placement == "asymmetric" ? RamseyPlacement::asymmetric
                                                                 : RamseyPlacement::symmetric);
            break;
        case ExperimentKind::tempsweep: out.result = temperature_sweep(s, c.sweep); break;
        case ExperimentKind::fidelity: out.result = fidelity_scan(s, c.sweep); break;
        case ExperimentKind::fit: throw DomainError("fit configs are run through the fit path");
    }
    if (c.noise.enabled) {
        add_noise(out.result, c.noise);
        out.result.metadata.emplace_back("noise_sigma", c.noise.sigma);
    }
    const auto fits = standard_fits(out.result, s);
    const auto targets = fit_targets(out.result);
    for (std::size_t i = 0; i < fits.size(); ++i)
        out.fits.push_back({i < targets.size() ? targets[i] : "", fits[i]});
    return out;
}

std::string render_csv(const RunConfig& c, const RunOutput& out) {
    std::string s = "## sivsim " + out.result.experiment + '\n';
    std::istringstream echo(to_config_text(c));
    for (std::string line; std::getline(echo, line);)
        s += line.empty() ? "#\n" : "# " + line + '\n';
    for (const auto& [k, v] : out.result.metadata) s += "## " + k + " = " + num(v) + '\n';
    for (const auto& f : out.fits) s += fit_line(f);
    const auto& cols = out.result.columns;
    for (std::size_t j = 0; j < cols.size(); ++j) s += (j ? "," : "") + cols[j];
    s += '\n';
    for (std::size_t i = 0; i < out.result.rows(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            if (j) s += ',';
            s += num(out.result.data[j][i]);
        }
        s += '\n';
    }
    return s;
}

std::string render_json(const RunConfig& c, const RunOutput& out) {
    json j;
    j["experiment"] = out.result.experiment;
    j["config"] = config_json(c);
    j["columns"] = out.result.columns;
    json data = json::object();
    for (std::size_t k = 0; k < out.result.columns.size(); ++k) data[out.result.columns[k]] = out.result.data[k];
    j["data"] = data;
    json meta = json::object();
    for (const auto& [k, v] : out.result.metadata) meta[k] = v;
    j["metadata"] = meta;
    json fits = json::array();
    for (const auto& f : out.fits) {
        json x = fit_json(f.fit);
        x["target"] = f.target;
        fits.push_back(x);
    }
    j["fits"] = fits;
    return j.dump(2) + '\n';
}

const std::vector<double>& Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return data[i];
    throw DomainError("table has no column '" + name + "'");
}

Table read_csv(std::istream& in) {
    Table t;
    int n = 0;
    bool header = false;
    for (std::string line; std::getline(in, line);) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (!header && line.rfind("##", 0) != 0) t.echo += (line.size() > 2 ? line.substr(2) : "") + '\n';
            continue;
        }
        const auto cells = split(line, ',');
        if (!header) {
            t.columns = cells;
            t.data.assign(cells.size(), {});
            header = true;
            continue;
        }
        if (cells.size() != t.columns.size())
            throw ParseError("expected " + std::to_string(t.columns.size()) + " fields, got " +
                                 std::to_string(cells.size()),
                             n);
        for (std::size_t j = 0; j < cells.size(); ++j) {
            double x = 0.0;
            const auto& c = cells[j];
            const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), x);
            if (ec != std::errc() || ptr != c.data() + c.size())
                throw ParseError("field '" + c + "' is not a number", n);
            t.data[j].push_back(x);
        }
    }
    if (!header) throw ParseError("no header row", n);
    return t;
}

Table read_csv_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string());
    return read_csv(f);
}

std::vector<std::string> fit_forms() {
    return {"exp_recovery",     "lorentzian",           "damped_cosine",    "double_damped_cosine",
            "drifting_cosine",  "double_drifting_cosine", "generalized_rabi", "linear",
            "a_parallel"};
}

TableFit fit_table(const Table& t, const FitSpec& spec) {
    TableFit out;
    out.form_name = spec.form;
    if (t.columns.empty()) throw DomainError("empty table");
    if (spec.form == "a_parallel") {
        // Field geometry and priors come from the echoed config when there is one.
        ExperimentSetup s = reference_setup();
        if (!t.echo.empty()) {
            try {
                s = parse_config(t.echo).setup;
            } catch (const ParseError&) {
            }
        }
        out.x = spec.x.empty() ? "field_T" : spec.x;
        out.y = "line1_Hz,line2_Hz";
        const auto& b = t.column(out.x);
        const auto& l1 = t.column("line1_Hz");
        const auto& l2 = t.column("line2_Hz");
        std::vector<double> bb;
        std::vector<std::array<double, 2>> f;
        for (std::size_t i = 0; i < b.size(); ++i) {
            if (!(b[i] > 0.0)) continue;
            bb.push_back(b[i]);
            f.push_back({l1[i], l2[i]});
        }
        out.fit = fit_a_parallel(bb, f, {s.field.polar_angle, s.field.azimuth}, s.params);
        return out;
    }
    out.x = spec.x.empty() ? t.columns.front() : spec.x;
    if (!spec.y.empty()) {
        out.y = spec.y;
    } else {
        out.y = t.columns.size() > 1 ? t.columns[1] : "";
        for (const auto& c : t.columns)
            if (c == "peak_ratio") out.y = c;
    }
    const auto& x = t.column(out.x);
    const auto& y = t.column(out.y);
    const std::string& f = spec.form;
    if (f == "exp_recovery") out.fit = fit_exp_recovery(x, y);
    else if (f == "lorentzian") out.fit = fit_lorentzian_peaks(x, y, spec.peaks);
    else if (f == "damped_cosine") out.fit = fit_damped_cosine(x, y);
    else if (f == "double_damped_cosine") out.fit = fit_double_damped_cosine(x, y);
    else if (f == "drifting_cosine") out.fit = fit_drifting_cosine(x, y);
    else if (f == "double_drifting_cosine") out.fit = fit_double_drifting_cosine(x, y);
    else if (f == "generalized_rabi") out.fit = fit_generalized_rabi(x, y);
    else if (f == "linear") out.fit = fit_linear(x, y);
    else throw DomainError("unknown fit form '" + f + "'");
    return out;
}

std::string render_fit_json(const FitSpec& spec, const TableFit& f) {
    json j;
    j["form_name"] = f.form_name;
    j["input"] = spec.input;
    j["x"] = f.x;
    j["y"] = f.y;
    const json fit = fit_json(f.fit);
    for (auto& [k, v] : fit.items()) j[k] = v;
    return j.dump(2) + '\n';
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + path.string());
    f << text;
    f.close();
    if (!f) throw Error("write failed for " + path.string());
}

int run(const RunConfig& c, std::ostream& out, std::ostream& log) {
    std::string text;
    if (c.kind == ExperimentKind::fit) {
        const TableFit f = fit_table(read_csv_file(c.fit.input), c.fit);
        for (const auto& w : f.fit.warnings) log << "warning: " << w << '\n';
        text = render_fit_json(c.fit, f);
    } else {
        const RunOutput r = simulate(c);
        for (const auto& f : r.fits)
            for (const auto& w : f.fit.warnings) log << "warning (" << f.target << "): " << w << '\n';
        text = c.output.format == OutputFormat::json ? render_json(c, r) : render_csv(c, r);
    }
    if (c.output.path.empty()) out << text;
    else write_text(c.output.path, text);
    return 0;
}

std::vector<ReproEntry> reproduction_suite() {
    auto noise = [](int seed) {
        return "\n[noise]\nenabled = true\nsigma = 0.005\nseed = " + std::to_string(seed) + "\n";
    };
    return {
        {"fig1c", "1c", "spin T1 from pump-wait-pump peak ratio at 3.5 K",
         "experiment = \"t1\"\n\n[environment]\ntemperature = 3.5 K\n\n[sweep]\nvariable = \"delay\"\nstart = 0 ns\n"
         "stop = 2 us\ncount = 41\n" +
             noise(11)},
        {"fig2c", "2c", "ODMR pi-pulse scan across the two hyperfine lines",
         "experiment = \"odmr\"\n\n[sweep]\nvariable = \"offset\"\nstart = -100 MHz\nstop = 100 MHz\ncount = 201\n" +
             noise(21)},
        {"fig2d", "2d", "resonance frequencies vs field and A_par fit",
         "experiment = \"odmr-vs-field\"\n\n[sweep]\nvariable = \"field\"\nstart = 0.1 T\nstop = 0.5 T\ncount = 5\n"},
        {"fig3b", "3b", "Rabi oscillation with phonon-driven baseline drift",
         "experiment = \"rabi\"\n\n[protocol]\nmode = \"duration\"\n\n[sweep]\nvariable = \"duration\"\nstart = 0 ns\n"
         "stop = 210 ns\ncount = 106\n" +
             noise(31)},
        {"fig3c", "3c", "Rabi frequency vs square root of microwave power",
         "experiment = \"rabi\"\n\n[protocol]\nmode = \"power\"\nkappa = 7.5 MHz\n\n[sweep]\nvariable = \"power\"\n"
         "start = 0.25\nstop = 4\ncount = 8\n"},
        {"fig3d", "3d", "effective Rabi frequency vs detuning",
         "experiment = \"rabi\"\n\n[protocol]\nmode = \"detuning\"\n\n[sweep]\nvariable = \"detuning\"\n"
         "start = 0 MHz\nstop = 30 MHz\ncount = 7\n"},
        {"fig4b", "4b", "Ramsey fringes, carrier 27 MHz from both lines",
         "experiment = \"ramsey\"\n\n[protocol]\nplacement = \"symmetric\"\n\n[sweep]\nvariable = \"delay\"\n"
         "start = 0 ns\nstop = 300 ns\ncount = 151\n" +
             noise(41)},
        {"fig4c", "4c", "Ramsey beating, carrier 36 and 18 MHz from the lines",
         "experiment = \"ramsey\"\n\n[protocol]\nplacement = \"asymmetric\"\n\n[sweep]\nvariable = \"delay\"\n"
         "start = 0 ns\nstop = 300 ns\ncount = 151\n" +
             noise(42)},
        {"fig5a", "5a", "1/T2* and 1/(2 T1,orbital) vs temperature",
         "experiment = \"tempsweep\"\n\n[sweep]\nvariable = \"temperature\"\nstart = 3 K\nstop = 10 K\ncount = 8\n"},
        {"fig5b", "5b", "1/(2 T1,spin) vs temperature",
         "experiment = \"tempsweep\"\n\n[sweep]\nvariable = \"temperature\"\nstart = 3 K\nstop = 10 K\ncount = 8\n"},
    };
}

void emit_reproduction_suite(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
    json index = json::array();
    for (const auto& e : reproduction_suite()) {
        const std::string file = e.name + ".conf";
        write_text(dir / file, "# figure " + e.figure + ": " + e.description + "\n" + e.config);
        const RunConfig c = parse_config(e.config);
        index.push_back({{"figure", e.figure},
                         {"config", file},
                         {"experiment", to_string(c.kind)},
                         {"description", e.description},
                         {"command", "sivsim " + to_string(c.kind) + " --config " + file + " --out " + e.name + ".csv"}});
    }
    write_text(dir / "index.json", json{{"configs", index}}.dump(2) + '\n');
}

}  // namespace siv
