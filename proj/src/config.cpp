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


#include "siv/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <type_traits>

#include "siv/constants.hpp"
#include "siv/errors.hpp"

namespace siv {

namespace {

enum class Dim { none, frequency, time, field, temperature, angle, rate, gyro, integer, text, boolean };

struct UnitEntry {
    std::string_view name;
    double factor;
};

constexpr std::array frequency_units{UnitEntry{"Hz", 1.0}, UnitEntry{"kHz", 1e3}, UnitEntry{"MHz", 1e6},
                                     UnitEntry{"GHz", 1e9}};
constexpr std::array time_units{UnitEntry{"s", 1.0}, UnitEntry{"ms", 1e-3}, UnitEntry{"us", 1e-6},
                                UnitEntry{"µs", 1e-6}, UnitEntry{"ns", 1e-9}, UnitEntry{"ps", 1e-12}};
constexpr std::array field_units{UnitEntry{"T", 1.0}, UnitEntry{"mT", 1e-3}};
constexpr std::array temperature_units{UnitEntry{"K", 1.0}, UnitEntry{"mK", 1e-3}};
constexpr std::array angle_units{UnitEntry{"rad", 1.0}, UnitEntry{"deg", constants::pi / 180.0}};
constexpr std::array rate_units{UnitEntry{"/s", 1.0}, UnitEntry{"1/s", 1.0}, UnitEntry{"/ms", 1e3},
                                UnitEntry{"/us", 1e6}, UnitEntry{"/ns", 1e9}};
constexpr std::array gyro_units{UnitEntry{"Hz/T", 1.0}, UnitEntry{"kHz/T", 1e3}, UnitEntry{"MHz/T", 1e6},
                                UnitEntry{"GHz/T", 1e9}};

std::string_view base_unit(Dim d) {
    switch (d) {
        case Dim::frequency: return "Hz";
        case Dim::time: return "s";
        case Dim::field: return "T";
        case Dim::temperature: return "K";
        case Dim::angle: return "rad";
        case Dim::rate: return "/s";
        case Dim::gyro: return "Hz/T";
        default: return "";
    }
}

template <std::size_t N>
std::optional<double> lookup(const std::array<UnitEntry, N>& table, std::string_view u) {
    for (const auto& e : table)
        if (e.name == u) return e.factor;
    return std::nullopt;
}

std::optional<double> unit_factor(Dim d, std::string_view u) {
    switch (d) {
        case Dim::frequency: return lookup(frequency_units, u);
        case Dim::time: return lookup(time_units, u);
        case Dim::field: return lookup(field_units, u);
        case Dim::temperature: return lookup(temperature_units, u);
        case Dim::angle: return lookup(angle_units, u);
        case Dim::rate: return lookup(rate_units, u);
        case Dim::gyro: return lookup(gyro_units, u);
        default: return u.empty() ? std::optional<double>(1.0) : std::nullopt;
    }
}

// section -> key -> kind of value
const std::map<std::string, std::map<std::string, Dim>>& schema() {
    static const std::map<std::string, std::map<std::string, Dim>> s{
        {"", {{"experiment", Dim::text}}},
        {"model",
         {{"lambda_so", Dim::frequency},
          {"a_par", Dim::frequency},
          {"a_perp", Dim::frequency},
          {"gamma_s", Dim::gyro},
          {"gamma_l", Dim::gyro},
          {"orbital_quench_f", Dim::none},
          {"gamma_n", Dim::gyro},
          {"strain_alpha", Dim::frequency},
          {"strain_beta", Dim::frequency},
          {"gamma0_orbital", Dim::rate},
          {"gamma_phi_extra", Dim::rate}}},
        {"field", {{"magnitude", Dim::field}, {"angle", Dim::angle}, {"azimuth", Dim::angle}}},
        {"environment", {{"temperature", Dim::temperature}}},
        {"protocol",
         {{"pump_rate", Dim::rate},
          {"pump_duration", Dim::time},
          {"readout_duration", Dim::time},
          {"partner_fraction", Dim::none},
          {"rabi_frequency", Dim::frequency},
          {"rabi_gap", Dim::time},
          {"sample_resolution", Dim::time},
          {"target_line", Dim::integer},
          {"mode", Dim::text},
          {"placement", Dim::text},
          {"detuning", Dim::frequency},
          {"kappa", Dim::frequency},
          {"mw_duration", Dim::time}}},
        {"sweep", {{"variable", Dim::text}, {"start", Dim::none}, {"stop", Dim::none}, {"count", Dim::integer}}},
        {"noise", {{"enabled", Dim::boolean}, {"sigma", Dim::none}, {"seed", Dim::integer}}},
        {"output", {{"path", Dim::text}, {"format", Dim::text}}},
        {"fit",
         {{"form", Dim::text}, {"input", Dim::text}, {"x", Dim::text}, {"y", Dim::text}, {"peaks", Dim::integer}}},
    };
    return s;
}

struct Raw {
    std::string value;
    int line = 0;
};

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Strip a trailing comment that is not inside quotes.
std::string_view strip_comment(std::string_view s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') quoted = !quoted;
        if (!quoted && s[i] == '#') return s.substr(0, i);
    }
    return s;
}

class Reader {
public:
    explicit Reader(std::map<std::string, Raw> entries, std::map<std::string, int> sections)
        : entries_(std::move(entries)), sections_(std::move(sections)) {}

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    int line(const std::string& key) const { return entries_.at(key).line; }
    bool has_section(const std::string& s) const { return sections_.count(s) != 0; }
    int section_line(const std::string& s) const { return sections_.at(s); }

    std::string text(const std::string& key) const {
        std::string_view v = trim(entries_.at(key).value);
        if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return std::string(v.substr(1, v.size() - 2));
        if (v.find('"') != std::string_view::npos) throw ParseError("unbalanced quotes in '" + key + "'", line(key));
        return std::string(v);
    }

    double quantity(const std::string& key, Dim dim) const {
        const std::string_view v = trim(entries_.at(key).value);
        double x = 0.0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
        if (ec != std::errc() || ptr == v.data()) throw ParseError("'" + key + "' expects a number", line(key));
        const std::string_view unit = trim(std::string_view(ptr, std::size_t(v.data() + v.size() - ptr)));
        if (!std::isfinite(x)) throw ParseError("'" + key + "' is not finite", line(key));
        if (unit.empty() && dim != Dim::none)
            throw ParseError("'" + key + "' needs a unit (e.g. " + std::string(base_unit(dim)) + ")", line(key));
        const auto f = unit_factor(dim, unit);
        if (!f) throw ParseError("unknown unit '" + std::string(unit) + "' for '" + key + "'", line(key));
        return x * *f;
    }

    template <class Int>
    Int integer(const std::string& key) const {
        const std::string_view v = trim(entries_.at(key).value);
        Int x{};
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
        if (ec != std::errc() || ptr != v.data() + v.size())
            throw ParseError("'" + key + "' expects an integer", line(key));
        return x;
    }

    bool boolean(const std::string& key) const {
        const std::string t = text(key);
        if (t == "true") return true;
        if (t == "false") return false;
        throw ParseError("'" + key + "' expects true or false", line(key));
    }

    void set(const std::string& key, Dim dim, double& target) const {
        if (has(key)) target = quantity(key, dim);
    }

private:
    std::map<std::string, Raw> entries_;
    std::map<std::string, int> sections_;
};

Reader tokenize(std::string_view text) {
    std::map<std::string, Raw> entries;
    std::map<std::string, int> sections;
    std::string section;
    int n = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        const std::string_view raw_line = text.substr(pos, eol == std::string_view::npos ? text.npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++n;
        const std::string_view l = trim(strip_comment(raw_line));
        if (l.empty()) continue;
        if (l.front() == '[') {
            if (l.back() != ']') throw ParseError("malformed section header", n);
            section = std::string(trim(l.substr(1, l.size() - 2)));
            if (!schema().count(section) || section.empty()) throw ParseError("unknown section [" + section + "]", n);
            if (!sections.emplace(section, n).second) throw ParseError("duplicate section [" + section + "]", n);
            continue;
        }
        const auto eq = l.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", n);
        const std::string key(trim(l.substr(0, eq)));
        const std::string_view value = trim(l.substr(eq + 1));
        const auto& keys = schema().at(section);
        if (!keys.count(key))
            throw ParseError("unknown key '" + key + "'" + (section.empty() ? "" : " in [" + section + "]"), n);
        if (value.empty()) throw ParseError("'" + key + "' has no value", n);
        const std::string full = section.empty() ? key : section + "." + key;
        if (!entries.emplace(full, Raw{std::string(value), n}).second)
            throw ParseError("duplicate key '" + key + "'", n);
    }
    return Reader(std::move(entries), std::move(sections));
}

// Expected sweep variable and its dimension.
std::pair<std::string, Dim> sweep_axis(ExperimentKind k, std::string_view mode) {
    switch (k) {
        case ExperimentKind::t1:
        case ExperimentKind::ramsey: return {"delay", Dim::time};
        case ExperimentKind::odmr: return {"offset", Dim::frequency};
        case ExperimentKind::odmr_vs_field: return {"field", Dim::field};
        case ExperimentKind::tempsweep: return {"temperature", Dim::temperature};
        case ExperimentKind::fidelity: return {"pump_duration", Dim::time};
        case ExperimentKind::rabi:
            if (mode == "power") return {"power", Dim::none};
            if (mode == "detuning") return {"detuning", Dim::frequency};
            return {"duration", Dim::time};
        case ExperimentKind::fit: break;
    }
    return {"", Dim::none};
}

std::string format_double(double x) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), ptr);
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

}  // namespace

std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::t1: return "t1";
        case ExperimentKind::odmr: return "odmr";
        case ExperimentKind::odmr_vs_field: return "odmr-vs-field";
        case ExperimentKind::rabi: return "rabi";
        case ExperimentKind::ramsey: return "ramsey";
        case ExperimentKind::tempsweep: return "tempsweep";
        case ExperimentKind::fidelity: return "fidelity";
        case ExperimentKind::fit: return "fit";
    }
    return "?";
}

std::optional<ExperimentKind> experiment_from_string(std::string_view s) {
    for (auto k : {ExperimentKind::t1, ExperimentKind::odmr, ExperimentKind::odmr_vs_field, ExperimentKind::rabi,
                   ExperimentKind::ramsey, ExperimentKind::tempsweep, ExperimentKind::fidelity, ExperimentKind::fit})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

SweepSpec default_sweep(ExperimentKind kind, std::string_view mode) {
    switch (kind) {
        case ExperimentKind::t1: return default_t1_delays();
        case ExperimentKind::ramsey: return default_ramsey_delays();
        case ExperimentKind::odmr: return {"offset", -100e6, 100e6, 201};
        case ExperimentKind::odmr_vs_field: return {"field", 0.1, 0.5, 5};
        case ExperimentKind::tempsweep: return {"temperature", 3.0, 10.0, 8};
        case ExperimentKind::fidelity: return {"pump_duration", 10e-9, 400e-9, 40};
        case ExperimentKind::rabi:
            if (mode == "power") return {"power", 0.25, 4.0, 8};
            if (mode == "detuning") return {"detuning", 0.0, 30e6, 7};
            return {"duration", 0.0, 210e-9, 106};
        case ExperimentKind::fit: break;
    }
    return {};
}

void RunConfig::validate() const {
    setup.params.validate();
    setup.field.validate();
    if (!(setup.temperature > 0.0) || !std::isfinite(setup.temperature))
        throw DomainError("temperature must be positive");
    if (kind == ExperimentKind::fit) {
        if (fit.form.empty() || fit.input.empty()) throw DomainError("fit needs a form and an input table");
    } else {
        sweep.validate();
    }
    if (kind == ExperimentKind::rabi && mode != "duration" && mode != "power" && mode != "detuning")
        throw DomainError("rabi mode must be duration, power or detuning");
    if (kind == ExperimentKind::ramsey && placement != "symmetric" && placement != "asymmetric")
        throw DomainError("ramsey placement must be symmetric or asymmetric");
    if (noise.enabled) {
        if (!(noise.sigma >= 0.0) || !std::isfinite(noise.sigma)) throw DomainError("noise sigma must be >= 0");
        if (!noise.seed) throw DomainError("noise is enabled but no seed was given");
    }
}

RunConfig parse_config(std::string_view text, std::optional<std::uint64_t> seed_override) {
    const Reader r = tokenize(text);
    RunConfig c;
    if (!r.has("experiment")) throw ParseError("missing required field 'experiment'", 0);
    const auto kind = experiment_from_string(r.text("experiment"));
    if (!kind) throw ParseError("unknown experiment '" + r.text("experiment") + "'", r.line("experiment"));
    c.kind = *kind;
    c.setup = reference_setup();
    if (c.kind == ExperimentKind::t1) c.setup.temperature = 3.5;  // the spin-T1 calibration point

    SivParameters& p = c.setup.params;
    r.set("model.lambda_so", Dim::frequency, p.lambda_so);
    r.set("model.a_par", Dim::frequency, p.a_par);
    if (r.has("model.a_perp")) p.a_perp = r.quantity("model.a_perp", Dim::frequency);
    r.set("model.gamma_s", Dim::gyro, p.gamma_s);
    r.set("model.gamma_l", Dim::gyro, p.gamma_l);
    r.set("model.orbital_quench_f", Dim::none, p.orbital_quench);
    r.set("model.gamma_n", Dim::gyro, p.gamma_n);
    r.set("model.strain_alpha", Dim::frequency, p.strain_alpha);
    r.set("model.strain_beta", Dim::frequency, p.strain_beta);
    r.set("model.gamma0_orbital", Dim::rate, p.gamma0_orbital);
    r.set("model.gamma_phi_extra", Dim::rate, p.gamma_phi_extra);

    r.set("field.magnitude", Dim::field, c.setup.field.magnitude);
    r.set("field.angle", Dim::angle, c.setup.field.polar_angle);
    r.set("field.azimuth", Dim::angle, c.setup.field.azimuth);
    r.set("environment.temperature", Dim::temperature, c.setup.temperature);

    ExperimentSetup& s = c.setup;
    r.set("protocol.pump_rate", Dim::rate, s.pump_rate);
    r.set("protocol.pump_duration", Dim::time, s.pump_duration);
    r.set("protocol.readout_duration", Dim::time, s.readout_duration);
    r.set("protocol.partner_fraction", Dim::none, s.partner_fraction);
    r.set("protocol.rabi_frequency", Dim::frequency, s.rabi_frequency);
    r.set("protocol.rabi_gap", Dim::time, s.rabi_gap);
    r.set("protocol.sample_resolution", Dim::time, s.sample_resolution);
    if (r.has("protocol.target_line")) {
        s.target_line = r.integer<int>("protocol.target_line");
        if (s.target_line != 0 && s.target_line != 1)
            throw ParseError("'target_line' must be 0 or 1", r.line("protocol.target_line"));
    }
    if (c.kind == ExperimentKind::rabi) c.mode = "duration";
    if (r.has("protocol.mode")) {
        if (c.kind != ExperimentKind::rabi) throw ParseError("'mode' only applies to rabi", r.line("protocol.mode"));
        c.mode = r.text("protocol.mode");
        if (c.mode != "duration" && c.mode != "power" && c.mode != "detuning")
            throw ParseError("rabi mode must be duration, power or detuning", r.line("protocol.mode"));
    }
    if (r.has("protocol.placement")) {
        c.placement = r.text("protocol.placement");
        if (c.placement != "symmetric" && c.placement != "asymmetric")
            throw ParseError("placement must be symmetric or asymmetric", r.line("protocol.placement"));
    }
    r.set("protocol.detuning", Dim::frequency, c.detuning);
    r.set("protocol.kappa", Dim::frequency, c.kappa);
    if (r.has("protocol.mw_duration")) c.mw_duration = r.quantity("protocol.mw_duration", Dim::time);

    const auto [var, dim] = sweep_axis(c.kind, c.mode);
    c.sweep = default_sweep(c.kind, c.mode);
    if (r.has_section("sweep")) {
        if (c.kind == ExperimentKind::fit) throw ParseError("fit takes no [sweep]", r.section_line("sweep"));
        for (const char* k : {"start", "stop", "count"})
            if (!r.has(std::string("sweep.") + k))
                throw ParseError(std::string("missing required field '") + k + "' in [sweep]",
                                 r.section_line("sweep"));
        if (r.has("sweep.variable") && r.text("sweep.variable") != var)
            throw ParseError("sweep variable for " + to_string(c.kind) + " is '" + var + "'", r.line("sweep.variable"));
        c.sweep.variable = var;
        c.sweep.start = r.quantity("sweep.start", dim);
        c.sweep.stop = r.quantity("sweep.stop", dim);
        c.sweep.count = r.integer<int>("sweep.count");
        try {
            c.sweep.validate();
        } catch (const DomainError& e) {
            throw ParseError(e.what(), r.section_line("sweep"));
        }
    }

    if (r.has("noise.enabled")) c.noise.enabled = r.boolean("noise.enabled");
    if (r.has("noise.sigma")) c.noise.sigma = r.quantity("noise.sigma", Dim::none);
    if (r.has("noise.seed")) c.noise.seed = r.integer<std::uint64_t>("noise.seed");
    if (seed_override) c.noise.seed = seed_override;
    if (c.noise.enabled && !c.noise.seed)
        throw ParseError("noise is enabled but no seed was given",
                         r.has("noise.enabled") ? r.line("noise.enabled") : 0);
    if (c.noise.sigma < 0.0) throw ParseError("noise sigma must be >= 0", r.line("noise.sigma"));

    if (r.has("output.path")) c.output.path = r.text("output.path");
    if (r.has("output.format")) {
        const std::string f = r.text("output.format");
        if (f == "csv") c.output.format = OutputFormat::csv;
        else if (f == "json") c.output.format = OutputFormat::json;
        else throw ParseError("format must be csv or json", r.line("output.format"));
    }

    if (r.has("fit.form")) c.fit.form = r.text("fit.form");
    if (r.has("fit.input")) c.fit.input = r.text("fit.input");
    if (r.has("fit.x")) c.fit.x = r.text("fit.x");
    if (r.has("fit.y")) c.fit.y = r.text("fit.y");
    if (r.has("fit.peaks")) c.fit.peaks = r.integer<int>("fit.peaks");
    if (c.kind == ExperimentKind::fit) {
        if (c.fit.form.empty()) throw ParseError("missing required field 'form' in [fit]", 0);
        if (c.fit.input.empty()) throw ParseError("missing required field 'input' in [fit]", 0);
    }

    try {
        c.validate();
    } catch (const DomainError& e) {
        throw ParseError(e.what(), 0);
    }
    return c;
}

std::vector<ConfigEntry> config_entries(const RunConfig& c) {
    std::vector<ConfigEntry> out;
    std::string sec;
    auto q = [&](std::string key, double v, Dim d) {
        out.push_back({sec, std::move(key), v, std::string(base_unit(d))});
    };
    auto put = [&](std::string key, ConfigValue v) { out.push_back({sec, std::move(key), std::move(v), ""}); };
    const SivParameters& p = c.setup.params;
    const ExperimentSetup& s = c.setup;
    put("experiment", to_string(c.kind));
    sec = "model";
    q("lambda_so", p.lambda_so, Dim::frequency);
    q("a_par", p.a_par, Dim::frequency);
    q("a_perp", p.transverse_hyperfine(), Dim::frequency);
    q("gamma_s", p.gamma_s, Dim::gyro);
    q("gamma_l", p.gamma_l, Dim::gyro);
    q("orbital_quench_f", p.orbital_quench, Dim::none);
    q("gamma_n", p.gamma_n, Dim::gyro);
    q("strain_alpha", p.strain_alpha, Dim::frequency);
    q("strain_beta", p.strain_beta, Dim::frequency);
    q("gamma0_orbital", p.gamma0_orbital, Dim::rate);
    q("gamma_phi_extra", p.gamma_phi_extra, Dim::rate);
    sec = "field";
    q("magnitude", s.field.magnitude, Dim::field);
    q("angle", s.field.polar_angle, Dim::angle);
    q("azimuth", s.field.azimuth, Dim::angle);
    sec = "environment";
    q("temperature", s.temperature, Dim::temperature);
    sec = "protocol";
    q("pump_rate", s.pump_rate, Dim::rate);
    q("pump_duration", s.pump_duration, Dim::time);
    q("readout_duration", s.readout_duration, Dim::time);
    q("partner_fraction", s.partner_fraction, Dim::none);
    q("rabi_frequency", s.rabi_frequency, Dim::frequency);
    q("rabi_gap", s.rabi_gap, Dim::time);
    q("sample_resolution", s.sample_resolution, Dim::time);
    put("target_line", std::int64_t(s.target_line));
    if (c.kind == ExperimentKind::rabi) put("mode", c.mode);
    if (c.kind == ExperimentKind::ramsey) put("placement", c.placement);
    q("detuning", c.detuning, Dim::frequency);
    q("kappa", c.kappa, Dim::frequency);
    if (c.mw_duration) q("mw_duration", *c.mw_duration, Dim::time);
    if (c.kind != ExperimentKind::fit) {
        const Dim d = sweep_axis(c.kind, c.mode).second;
        sec = "sweep";
        put("variable", c.sweep.variable);
        q("start", c.sweep.start, d);
        q("stop", c.sweep.stop, d);
        put("count", std::int64_t(c.sweep.count));
    }
    sec = "noise";
    put("enabled", c.noise.enabled);
    q("sigma", c.noise.sigma, Dim::none);
    if (c.noise.seed) put("seed", *c.noise.seed);
    sec = "output";
    if (!c.output.path.empty()) put("path", c.output.path);
    put("format", std::string(c.output.format == OutputFormat::csv ? "csv" : "json"));
    if (c.kind == ExperimentKind::fit) {
        sec = "fit";
        put("form", c.fit.form);
        put("input", c.fit.input);
        if (!c.fit.x.empty()) put("x", c.fit.x);
        if (!c.fit.y.empty()) put("y", c.fit.y);
        put("peaks", std::int64_t(c.fit.peaks));
    }
    return out;
}

std::string to_config_text(const RunConfig& c) {
    std::ostringstream o;
    std::string sec;
    for (const auto& e : config_entries(c)) {
        if (e.section != sec) {
            sec = e.section;
            o << "\n[" << sec << "]\n";
        }
        o << e.key << " = ";
        std::visit(
            [&](const auto& v) {
                using V = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<V, double>) o << format_double(v);
                else if constexpr (std::is_same_v<V, bool>) o << (v ? "true" : "false");
                else if constexpr (std::is_same_v<V, std::string>) o << quoted(v);
                else o << v;
            },
            e.value);
        if (!e.unit.empty()) o << ' ' << e.unit;
        o << '\n';
    }
    return o.str();
}

}  // namespace siv
