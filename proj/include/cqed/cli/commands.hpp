// Copyright 2026 The cqed-toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Subcommand implementations. Each reads its inputs, runs the corresponding
// module, writes its artifacts into the output directory and returns the
// report it wrote. Argument parsing lives in tools/cqed.cpp.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cqed/cli/csv.hpp"
#include "cqed/cli/io.hpp"
#include "cqed/core.hpp"
#include "cqed/detector.hpp"
#include "cqed/em.hpp"
#include "cqed/extraction.hpp"
#include "cqed/measurement.hpp"
#include "cqed/qml.hpp"

namespace cqed::cli {

namespace fs = std::filesystem;

struct Options {
    fs::path out_dir = ".";
    std::optional<std::uint64_t> seed;
    bool fixed_timestamp = false;
    std::optional<em::KappaConvention> kappa;
};

namespace detail {

inline json measured(double value, double sigma, std::string_view unit) {
    json j;
    j["value"] = value;
    j["sigma"] = sigma;
    j["unit"] = unit;
    return j;
}

inline json measured_mhz(const Uncertain<Frequency> &f) { return measured(f.value.mhz(), f.sigma.mhz(), "MHz"); }

inline fs::path resolve(const fs::path &base_dir, const std::string &p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
}

inline std::string fixed(double v, int digits) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(digits);
    os << v;
    return os.str();
}

inline std::vector<double> linspace(double a, double b, int n) {
    if (n < 1) throw Error(ErrorKind::parse, "grid: points must be >= 1");
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
    return v;
}

/// `times_<unit>` array, or `t_start_<unit>`, `t_stop_<unit>` and `points`.
inline std::vector<double> time_grid(const json &cfg, std::string_view src) {
    if (auto v = read_quantity_array(cfg, "times", Dim::time, src)) return *v;
    const double a = require_quantity(cfg, "t_start", Dim::time, src);
    const double b = require_quantity(cfg, "t_stop", Dim::time, src);
    return linspace(a, b, value_or<int>(cfg, "points", 101));
}

inline Frequency require_frequency(const json &j, std::string_view base, std::string_view src) {
    return Frequency::from_hz(require_quantity(j, base, Dim::frequency, src));
}

inline std::uint64_t pick_seed(const Options &opt, const json &cfg) {
    if (opt.seed) return *opt.seed;
    return value_or<std::uint64_t>(cfg, "seed", 0);
}

inline PeakSet load_peaks(const fs::path &path) {
    const std::string src = path.string();
    const std::string text = read_file(path);
    PeakSet ps;
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) return ps;
    std::istringstream in(text);
    const CsvTable t = parse_csv(in, src);
    const auto center = find_column(t, "center", Dim::frequency, src);
    if (center.second == nullptr) throw Error(ErrorKind::parse, src + ": missing column 'center_<unit>'");
    const auto width = find_column(t, "width", Dim::frequency, src);
    const std::size_t intensity = t.column("intensity");
    const std::size_t fock = t.column("fock_n");
    const auto power = find_column(t, "probe_power", Dim::power, src);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (fock != CsvTable::npos && parse_number(t.rows[r][fock], src, t.row_lines[r]) != static_cast<double>(r))
            throw Error(ErrorKind::parse, src + ":" + std::to_string(t.row_lines[r]) + ": fock_n must count 0, 1, 2, ...");
        Peak p;
        p.center = Frequency::from_hz(cell_si(t, r, center, src));
        p.intensity = intensity == CsvTable::npos ? 0.0 : parse_number(t.rows[r][intensity], src, t.row_lines[r]);
        if (width.second) p.width = Frequency::from_hz(cell_si(t, r, width, src));
        if (power.second && r == 0) {
            // stored back in dBm for reporting
            ps.probe_power_dbm = 10.0 * std::log10(cell_si(t, r, power, src) / 1e-3);
        }
        ps.peaks.push_back(p);
    }
    return ps;
}

inline void write_peaks(std::ostream &out, const PeakSet &ps) {
    CsvWriter w(out, {"fock_n", "center_GHz", "intensity", "width_MHz"});
    for (std::size_t n = 0; n < ps.peaks.size(); ++n)
        w.row({static_cast<double>(n), ps.peaks[n].center.ghz(), ps.peaks[n].intensity, ps.peaks[n].width.mhz()});
}

inline std::string table_summary(const SystemParams &p, const std::optional<PoissonFit> &stats) {
    std::ostringstream os;
    auto line = [&](std::string_view name, const std::string &value) {
        os << name;
        for (std::size_t i = name.size(); i < 18; ++i) os << ' ';
        os << value << "\n";
    };
    auto pm = [](double v, double s, int d) { return fixed(v, d) + " +/- " + fixed(s, d); };
    os << "Variables         Values\n";
    line("chi/2pi [MHz]", pm(p.shifts.chi().mhz(), p.shift_sigma.chi.mhz(), 2));
    line("chi01/2pi [MHz]", pm(p.shifts.chi01().mhz(), p.shift_sigma.chi01.mhz(), 2));
    line("chi12/2pi [MHz]", pm(p.shifts.chi12().mhz(), p.shift_sigma.chi12.mhz(), 2));
    line("nu01 [GHz]", pm(p.omega_01.value.ghz(), p.omega_01.sigma.ghz(), 4));
    line("Delta01/2pi [MHz]", pm(p.delta01.value.mhz(), p.delta01.sigma.mhz(), 0));
    line("Delta12/2pi [MHz]", pm(p.delta12.value.mhz(), p.delta12.sigma.mhz(), 0));
    line("alpha [MHz]", pm(p.alpha.value.mhz(), p.alpha.sigma.mhz(), 0));
    line("g01/2pi [MHz]", pm(p.g01.value.mhz(), p.g01.sigma.mhz(), 1));
    line("C [fF]", pm(p.capacitance_farad.value * 1e15, p.capacitance_farad.sigma * 1e15, 0));
    line("Ej/h [GHz]", pm(p.ej_joule.value / constants::h * 1e-9, p.ej_joule.sigma / constants::h * 1e-9, 2));
    line("L_J [nH]", pm(p.lj_henry.value * 1e9, p.lj_henry.sigma * 1e9, 1));
    line("I_C [nA]", pm(p.ic_ampere.value * 1e9, p.ic_ampere.sigma * 1e9, 1));
    if (stats) line("N_bar", pm(stats->n_bar, stats->n_bar_sigma, 2));
    return os.str();
}

}  // namespace detail

struct ExtractInputs {
    fs::path power_scan;
    fs::path peaks;
    std::optional<double> zero_photon_peak_ghz;
};

/// Writes report.json and summary.txt.
inline json cmd_extract(const ExtractInputs &in, const Options &opt) {
    using namespace detail;
    const std::string scan_text = read_file(in.power_scan);
    const std::string peaks_text = read_file(in.peaks);
    const std::string src = in.power_scan.string();
    const json scan = parse_json(scan_text, src);

    PowerScanFeatures f;
    f.nu_bare.value = require_frequency(scan, "nu_bare", src);
    f.nu_bare.sigma = Frequency::from_hz(read_quantity(scan, "nu_bare_sigma", Dim::frequency, src).value_or(0.0));
    f.nu_dressed.value = require_frequency(scan, "nu_dressed", src);
    f.nu_dressed.sigma = Frequency::from_hz(read_quantity(scan, "nu_dressed_sigma", Dim::frequency, src).value_or(0.0));
    f.gamma_cavity = require_frequency(scan, "gamma_cavity", src);
    if (scan.contains("q0")) f.q0 = value_or<double>(scan, "q0", 0.0);

    const PeakSet peaks = load_peaks(in.peaks);
    if (peaks.peaks.size() < 2) throw Error(ErrorKind::insufficient, "insufficient peaks");
    Uncertain<Frequency> zero;
    zero.value = in.zero_photon_peak_ghz ? Frequency::from_ghz(*in.zero_photon_peak_ghz) : peaks.peaks.front().center;

    const SystemParams p = full_extraction(f, peaks, zero);
    std::optional<PoissonFit> stats;
    json warnings = json::array();
    try {
        stats = poisson_fit(peaks);
    } catch (const Error &e) {
        warnings.push_back(std::string("photon statistics skipped: ") + e.what());
    }

    json report;
    report["manifest"] = make_manifest("extract", {{in.power_scan.string(), scan_text}, {in.peaks.string(), peaks_text}},
                                       std::nullopt, opt.fixed_timestamp)
                             .to_json();
    json sp;
    sp["omega_r_over_2pi"] = measured(p.omega_r.value.ghz(), p.omega_r.sigma.ghz(), "GHz");
    sp["omega_01_over_2pi"] = measured(p.omega_01.value.ghz(), p.omega_01.sigma.ghz(), "GHz");
    sp["chi_over_2pi"] = measured(p.shifts.chi().mhz(), p.shift_sigma.chi.mhz(), "MHz");
    sp["chi01_over_2pi"] = measured(p.shifts.chi01().mhz(), p.shift_sigma.chi01.mhz(), "MHz");
    sp["chi12_over_2pi"] = measured(p.shifts.chi12().mhz(), p.shift_sigma.chi12.mhz(), "MHz");
    sp["delta01_over_2pi"] = measured_mhz(p.delta01);
    sp["delta12_over_2pi"] = measured_mhz(p.delta12);
    sp["alpha"] = measured_mhz(p.alpha);
    sp["g01_over_2pi"] = measured_mhz(p.g01);
    sp["Ec_over_h"] = measured(p.ec_joule.value / constants::h * 1e-6, p.ec_joule.sigma / constants::h * 1e-6, "MHz");
    sp["Ej_over_h"] = measured(p.ej_joule.value / constants::h * 1e-9, p.ej_joule.sigma / constants::h * 1e-9, "GHz");
    sp["C"] = measured(p.capacitance_farad.value * 1e15, p.capacitance_farad.sigma * 1e15, "fF");
    sp["Ic"] = measured(p.ic_ampere.value * 1e9, p.ic_ampere.sigma * 1e9, "nA");
    sp["Lj"] = measured(p.lj_henry.value * 1e9, p.lj_henry.sigma * 1e9, "nH");
    report["system_params"] = sp;
    if (stats) {
        json ps;
        ps["n_bar"] = stats->n_bar;
        ps["n_bar_sigma"] = stats->n_bar_sigma;
        ps["scale"] = stats->scale;
        ps["residual"] = stats->residual;
        if (peaks.probe_power_dbm) ps["probe_power_dBm"] = *peaks.probe_power_dbm;
        report["photon_statistics"] = ps;
    }
    report["warnings"] = warnings;
    const std::string table = table_summary(p, stats);
    report["table"] = table;

    fs::create_directories(opt.out_dir);
    write_json(opt.out_dir / "report.json", report);
    write_text(opt.out_dir / "summary.txt", table);
    return report;
}

/// kind: rabi | chevron | t1 | ramsey | spectroscopy. Writes curves.csv and simulate_report.json.
inline json cmd_simulate(const std::string &kind, const fs::path &config_path, const Options &opt) {
    using namespace detail;
    const std::string text = read_file(config_path);
    const std::string src = config_path.string();
    const json cfg = parse_json(text, src);
    const std::uint64_t seed = pick_seed(opt, cfg);
    std::mt19937_64 rng(seed);

    json report;
    report["manifest"] = make_manifest("simulate " + kind, {{src, text}}, seed, opt.fixed_timestamp).to_json();
    json model = json::object();
    json results = json::object();
    std::ostringstream csv;

    if (kind == "t1" || kind == "ramsey") {
        const auto grid = time_grid(cfg, src);
        DecayTrace tr;
        if (kind == "t1") {
            const double t1 = require_quantity(cfg, "t1", Dim::time, src);
            tr = t1_trace(t1, grid);
            model["t1_us"] = t1 * 1e6;
            model["population"] = "excited";
        } else {
            const double t2 = require_quantity(cfg, "t2", Dim::time, src);
            const Frequency det = require_frequency(cfg, "detuning", src);
            tr = ramsey_trace(t2, det, grid);
            model["t2_us"] = t2 * 1e6;
            model["detuning_kHz"] = det.khz();
            model["population"] = "ground";
            results["fringe_period_us"] = det.hz() > 0.0 ? json(1e6 / det.hz()) : json(nullptr);
        }
        const double noise = value_or<double>(cfg, "noise_sigma", 0.0);
        const int shots = value_or<int>(cfg, "shots", 0);
        model["noise_sigma"] = noise;
        model["shots"] = shots;
        const bool noisy = noise > 0.0 || shots > 0;
        DecayTrace measured_trace = tr;
        if (shots > 0) measured_trace = with_readout_sampling(measured_trace, shots, rng);
        if (noise > 0.0) measured_trace = with_gaussian_noise(measured_trace, noise, rng);

        std::vector<std::string> header{"time_us", "population"};
        if (noisy) header.emplace_back("population_noisy");
        CsvWriter w(csv, header);
        for (std::size_t i = 0; i < tr.times_s.size(); ++i) {
            std::vector<double> row{tr.times_s[i] * 1e6, tr.population[i]};
            if (noisy) row.push_back(measured_trace.population[i]);
            w.row(row);
        }
        if (tr.times_s.size() >= 5) {
            if (kind == "t1") {
                const auto fit = fit_exponential(measured_trace);
                results["fit"] = {{"t1_us", fit.t1 * 1e6}, {"t1_sigma_us", fit.t1_sigma * 1e6}, {"residual", fit.residual}};
            } else {
                const auto fit = fit_ramsey(measured_trace);
                results["fit"] = {{"t2_us", fit.t2 * 1e6},
                                  {"t2_sigma_us", fit.t2_sigma * 1e6},
                                  {"detuning_kHz", fit.detuning.khz()},
                                  {"detuning_sigma_kHz", fit.detuning_sigma.khz()},
                                  {"residual", fit.residual}};
            }
        }
    } else if (kind == "rabi") {
        const Frequency g = require_frequency(cfg, "g01", src);
        std::vector<RabiPowerPoint> pts;
        if (auto powers = read_quantity_array(cfg, "powers", Dim::power, src)) {
            const Frequency nu = require_frequency(cfg, "nu", src);
            const Frequency gamma = require_frequency(cfg, "gamma", src);
            pts = rabi_vs_power(g, *powers, nu, gamma);
            model["nu_GHz"] = nu.ghz();
            model["gamma_kHz"] = gamma.khz();
        } else if (cfg.contains("n_bar")) {
            for (double nb : value_or<std::vector<double>>(cfg, "n_bar", {})) pts.push_back({nb, rabi_frequency(g, nb)});
        } else {
            throw Error(ErrorKind::parse, src + ": rabi needs 'powers_<unit>' or 'n_bar'");
        }
        model["g01_MHz"] = g.mhz();
        CsvWriter w(csv, {"rabi_MHz", "sqrt_n_bar", "n_bar"});
        for (const auto &p : pts) w.row({p.rabi.mhz(), std::sqrt(p.n_bar), p.n_bar});
        if (pts.size() >= 2) {
            const auto line = fit_rabi_power_law(pts);
            results["line_fit"] = {{"slope_per_MHz", line.slope_per_mhz},
                                   {"intercept", line.intercept},
                                   {"g01_MHz", line.g01.mhz()}};
        }
    } else if (kind == "chevron") {
        RabiConfig rc;
        rc.g01 = require_frequency(cfg, "g01", src);
        rc.n_bar = value_or<double>(cfg, "n_bar", 1.0);
        rc.durations_s = time_grid(cfg, src);
        rc.validate();
        const double d0 = require_quantity(cfg, "detuning_start", Dim::frequency, src);
        const double d1 = require_quantity(cfg, "detuning_stop", Dim::frequency, src);
        const auto detunings = linspace(d0, d1, value_or<int>(cfg, "detuning_points", 41));
        model["g01_MHz"] = rc.g01.mhz();
        model["n_bar"] = rc.n_bar;
        model["rabi_MHz"] = rabi_frequency(rc.g01, rc.n_bar).mhz();
        CsvWriter w(csv, {"detuning_MHz", "time_us", "population"});
        for (double d : detunings) {
            rc.drive_detuning = Frequency::from_hz(d);
            for (double t : rc.durations_s) w.row({d * 1e-6, t * 1e6, chevron_population(rc, t)});
        }
    } else if (kind == "spectroscopy") {
        const SystemParams p = params_from_design(require_frequency(cfg, "omega_r", src),
                                                  require_frequency(cfg, "omega_01", src),
                                                  require_frequency(cfg, "g01", src), require_frequency(cfg, "alpha", src));
        const double n_bar = value_or<double>(cfg, "n_bar", 1.0);
        const int n_peaks = value_or<int>(cfg, "peaks", 10);
        const Frequency width = Frequency::from_hz(read_quantity(cfg, "width", Dim::frequency, src).value_or(1e6));
        const double scale = value_or<double>(cfg, "scale", 1.0);
        const double noise = value_or<double>(cfg, "noise_sigma", 0.0);
        PeakSet ps = spectroscopy_peaks(p, n_bar, n_peaks, width, scale);
        std::normal_distribution<double> eps(0.0, 1.0);
        if (noise > 0.0)
            for (auto &pk : ps.peaks) pk.intensity = std::max(0.0, pk.intensity * (1.0 + noise * eps(rng)));
        model["n_bar"] = n_bar;
        model["chi_MHz"] = p.shifts.chi().mhz();
        model["chi01_MHz"] = p.shifts.chi01().mhz();
        model["chi12_MHz"] = p.shifts.chi12().mhz();
        model["noise_sigma"] = noise;
        write_peaks(csv, ps);
        const auto fit = poisson_fit(ps);
        results["poisson_fit"] = {{"n_bar", fit.n_bar}, {"n_bar_sigma", fit.n_bar_sigma}, {"scale", fit.scale}};
        results["chi_from_peaks_MHz"] = chi_from_peaks(ps).value.mhz();
    } else {
        throw Error(ErrorKind::usage, "unknown simulate kind '" + kind + "' (rabi|chevron|t1|ramsey|spectroscopy)");
    }

    report["kind"] = kind;
    report["model"] = model;
    report["results"] = results;
    fs::create_directories(opt.out_dir);
    write_text(opt.out_dir / "curves.csv", csv.str());
    write_json(opt.out_dir / "simulate_report.json", report);
    return report;
}

struct EmInputs {
    fs::path config;
    std::optional<fs::path> fields, maxwell, layers, volume;
};

namespace detail {

inline std::vector<em::SurfaceSampleSet> load_fields(const fs::path &path) {
    const std::string src = path.string();
    const CsvTable t = load_csv(path);
    const std::size_t iface = t.column("interface");
    if (iface == CsvTable::npos) throw Error(ErrorKind::parse, src + ": missing column 'interface'");
    auto need = [&](std::string_view base, Dim d) {
        auto c = find_column(t, base, d, src);
        if (!c.second) throw Error(ErrorKind::parse, src + ": missing column '" + std::string(base) + "_<unit>'");
        return c;
    };
    const auto x = need("x", Dim::length), y = need("y", Dim::length), z = need("z", Dim::length);
    const auto ep = need("e_perp", Dim::field), epar = need("e_par", Dim::field), area = need("area", Dim::area);
    const auto rho = find_column(t, "rho", Dim::charge_density, src);
    std::vector<em::SurfaceSampleSet> sets;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto kind = em::parse_interface(t.rows[r][iface]);
        if (!kind)
            throw Error(ErrorKind::parse, src + ":" + std::to_string(t.row_lines[r]) + ": unknown interface '" +
                                              t.rows[r][iface] + "'");
        em::SurfaceSample s;
        s.x = cell_si(t, r, x, src);
        s.y = cell_si(t, r, y, src);
        s.z = cell_si(t, r, z, src);
        s.e_perp = cell_si(t, r, ep, src);
        s.e_par = cell_si(t, r, epar, src);
        s.area = cell_si(t, r, area, src);
        if (rho.second && !t.rows[r][rho.first].empty()) s.rho = cell_si(t, r, rho, src);
        em::SurfaceSampleSet *set = nullptr;
        for (auto &existing : sets)
            if (existing.interface == *kind) set = &existing;
        if (!set) set = &sets.emplace_back(em::SurfaceSampleSet{*kind, {}});
        set->samples.push_back(s);
    }
    return sets;
}

inline std::vector<em::VolumeSample> load_volume(const fs::path &path) {
    const std::string src = path.string();
    const CsvTable t = load_csv(path);
    const std::size_t eps = t.column("epsilon_r"), e2 = t.column("e2_V2_per_m2"), vol = t.column("volume_m3");
    if (eps == CsvTable::npos || e2 == CsvTable::npos || vol == CsvTable::npos)
        throw Error(ErrorKind::parse, src + ": expected columns epsilon_r,e2_V2_per_m2,volume_m3");
    std::vector<em::VolumeSample> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        out.push_back({parse_number(t.rows[r][eps], src, t.row_lines[r]), parse_number(t.rows[r][e2], src, t.row_lines[r]),
                       parse_number(t.rows[r][vol], src, t.row_lines[r])});
    return out;
}

inline em::LayerStack load_layers(const json &j, std::string_view src) {
    em::LayerStack s;
    s.substrate_epsilon_r = value_or<double>(j, "substrate_epsilon_r", 11.8);
    if (!j.contains("layers") || !j["layers"].is_array()) throw Error(ErrorKind::parse, std::string(src) + ": missing 'layers' array");
    for (const auto &l : j["layers"]) {
        const auto iface = em::parse_interface(value_or<std::string>(l, "interface", ""));
        if (!iface) throw Error(ErrorKind::parse, std::string(src) + ": unknown layer interface");
        em::LossLayerSpec spec;
        spec.interface = *iface;
        spec.epsilon_r = value_or<double>(l, "epsilon_r", 0.0);
        spec.thickness = require_quantity(l, "thickness", Dim::length, src);
        spec.tan_delta = value_or<double>(l, "tan_delta", 0.0);
        s.layers.push_back(spec);
    }
    s.validate();
    return s;
}

inline json layers_json(const em::LayerStack &s, std::string_view source) {
    json j;
    j["source"] = source;
    j["substrate_epsilon_r"] = s.substrate_epsilon_r;
    j["layers"] = json::array();
    for (const auto &l : s.layers)
        j["layers"].push_back({{"interface", em::to_string(l.interface)},
                               {"epsilon_r", l.epsilon_r},
                               {"thickness_nm", l.thickness * 1e9},
                               {"tan_delta", l.tan_delta}});
    return j;
}

}  // namespace detail

/// Writes em_report.json. Paths in the config are relative to its directory;
/// explicit paths in `in` take precedence.
inline json cmd_em(const EmInputs &in, const Options &opt) {
    using namespace detail;
    const std::string text = read_file(in.config);
    const std::string src = in.config.string();
    const json cfg = parse_json(text, src);
    const fs::path base = in.config.parent_path();
    auto path_of = [&](const std::optional<fs::path> &given, const char *key) -> std::optional<fs::path> {
        if (given) return given;
        if (cfg.contains(key)) return resolve(base, value_or<std::string>(cfg, key, ""));
        return std::nullopt;
    };
    const auto fields_path = path_of(in.fields, "fields_csv");
    const auto maxwell_path = path_of(in.maxwell, "maxwell_json");
    const auto layers_path = path_of(in.layers, "layers_json");
    const auto volume_path = path_of(in.volume, "volume_csv");
    if (!fields_path) throw Error(ErrorKind::usage, "em: no fields file given");
    if (!maxwell_path) throw Error(ErrorKind::usage, "em: no Maxwell matrix file given");

    std::vector<std::pair<std::string, std::string>> inputs{{src, text}};
    auto track = [&](const fs::path &p) {
        std::string bytes = read_file(p);
        inputs.emplace_back(p.string(), bytes);
        return bytes;
    };

    json warnings = json::array();
    const std::string maxwell_text = track(*maxwell_path);
    const json mj = parse_json(maxwell_text, maxwell_path->string());
    if (!mj.is_array() || mj.size() != 2 || !mj[0].is_array() || !mj[1].is_array() || mj[0].size() != 2 ||
        mj[1].size() != 2)
        throw Error(ErrorKind::parse, maxwell_path->string() + ": expected a 2x2 array in farads");
    em::MaxwellMatrix raw{mj[0][0].get<double>(), mj[0][1].get<double>(), mj[1][0].get<double>(), mj[1][1].get<double>()};
    const auto norm = em::normalize_maxwell(raw);
    if (norm.flipped_off_diagonal)
        warnings.push_back("maxwell matrix had positive off-diagonal entries; negated to the Maxwell convention");
    const double c_tot = em::total_capacitance(norm.matrix);

    track(*fields_path);
    const auto surfaces = load_fields(*fields_path);
    auto find_set = [&](em::Interface i) -> const em::SurfaceSampleSet * {
        for (const auto &s : surfaces)
            if (s.interface == i) return &s;
        return nullptr;
    };

    em::LayerStack layers = em::default_layers();
    std::string layer_source = "defaults";
    if (layers_path) {
        const std::string lt = track(*layers_path);
        layers = load_layers(parse_json(lt, layers_path->string()), layers_path->string());
        layer_source = layers_path->string();
    }
    std::vector<std::string> missing;
    for (const auto &l : layers.layers)
        if (!find_set(l.interface)) missing.emplace_back(em::to_string(l.interface));
    const auto *up = find_set(em::Interface::pad_up);
    const auto *down = find_set(em::Interface::pad_down);
    if (!up) missing.emplace_back("pad-up");
    if (!down) missing.emplace_back("pad-down");
    if (!missing.empty()) {
        std::string list;
        for (const auto &m : missing) list += (list.empty() ? "" : ", ") + m;
        throw Error(ErrorKind::parse, "em: missing interface rows: " + list);
    }

    const double d_eff = em::effective_distance(*up, *down);
    double q = 0.0;
    for (const auto &s : up->samples) q += s.rho.value_or(0.0) * s.area;
    if (cfg.contains("pad_charge_C")) q = value_or<double>(cfg, "pad_charge_C", q);

    double v_mode = 0.0;
    if (volume_path) {
        track(*volume_path);
        v_mode = em::mode_volume(load_volume(*volume_path));
    } else if (auto v = read_quantity(cfg, "mode_volume", Dim::volume, src)) {
        v_mode = *v;
    } else {
        throw Error(ErrorKind::parse, src + ": need 'volume_csv' or 'mode_volume_m3'");
    }

    const Frequency omega_r = require_frequency(cfg, "omega_r", src);
    const Frequency omega_q = require_frequency(cfg, "omega_q", src);
    const double e0 = em::vacuum_field(omega_r, v_mode);
    const double ec = constants::e * constants::e / (2.0 * c_tot);
    double ej = 0.0;
    if (auto lj = read_quantity(cfg, "lj", Dim::inductance, src)) {
        ej = constants::phi0 * constants::phi0 / (4.0 * std::numbers::pi * std::numbers::pi * *lj);
    } else if (auto ic = read_quantity(cfg, "ic", Dim::current, src)) {
        ej = constants::phi0 * *ic / two_pi;
    } else {
        throw Error(ErrorKind::parse, src + ": need 'lj_<unit>' or 'ic_<unit>'");
    }
    const Frequency g01 = em::dipole_g01(d_eff, e0, ej, ec);
    const auto participation = em::participation_ratios(surfaces, layers, c_tot, q);

    const double q_cav = value_or<double>(cfg, "q_cav", 0.0);
    em::KappaConvention chosen = em::KappaConvention::half;
    if (value_or<std::string>(cfg, "kappa_convention", "half") == "full") chosen = em::KappaConvention::full;
    if (opt.kappa) chosen = *opt.kappa;
    const auto t_int_override = read_quantity(cfg, "t_int", Dim::time, src);
    const auto t_purcell_override = read_quantity(cfg, "t_purcell", Dim::time, src);
    const Frequency delta = abs(omega_r - omega_q);

    auto budget_json = [&](em::KappaConvention conv) {
        const double kappa = em::cavity_kappa(omega_r, q_cav, conv);
        const double tp_derived = em::t_purcell(delta, g01, kappa);
        const em::LossBudget b = em::q_int_and_t1(participation, layers, t_purcell_override.value_or(tp_derived), omega_q);
        json j;
        j["kappa_per_s"] = kappa;
        j["t_purcell_derived_us"] = tp_derived * 1e6;
        j["loss_sum"] = b.loss_sum;
        j["q_int"] = b.q_int ? json(*b.q_int) : json("lossless");
        j["t_int_derived_us"] = b.t_int ? json(*b.t_int * 1e6) : json("lossless");
        const double t_int_used = t_int_override.value_or(b.t_int.value_or(INFINITY));
        j["t_int_us"] = std::isfinite(t_int_used) ? json(t_int_used * 1e6) : json("lossless");
        j["t_purcell_us"] = b.t_purcell * 1e6;
        j["t1_us"] = (std::isfinite(t_int_used) ? em::combine_t1(t_int_used, b.t_purcell) : b.t_purcell) * 1e6;
        return j;
    };

    json report;
    report["manifest"] = make_manifest("em", inputs, std::nullopt, opt.fixed_timestamp).to_json();
    report["layers"] = layers_json(layers, layer_source);
    report["C_tot_fF"] = c_tot * 1e15;
    report["d_eff_um"] = d_eff * 1e6;
    report["pad_charge_C"] = q;
    report["V_mode_m3"] = v_mode;
    report["E0_V_per_m"] = e0;
    report["Ec_over_h_MHz"] = ec / constants::h * 1e-6;
    report["Ej_over_h_GHz"] = ej / constants::h * 1e-9;
    report["g01_over_2pi_MHz"] = g01.mhz();
    json pj;
    double p_tot = 0.0;
    for (const auto &[iface, p] : participation) {
        pj[std::string(em::to_string(iface))] = p;
        p_tot += p;
    }
    pj["total"] = p_tot;
    report["participation"] = pj;
    report["kappa_convention"] = chosen == em::KappaConvention::half ? "half" : "full";
    json overrides;
    overrides["t_int_us"] = t_int_override ? json(*t_int_override * 1e6) : json(nullptr);
    overrides["t_purcell_us"] = t_purcell_override ? json(*t_purcell_override * 1e6) : json(nullptr);
    report["overrides"] = overrides;
    if (q_cav > 0.0) {
        report["t1_budget"] = budget_json(chosen);
        report["t1_budget_variants"] = {{"half", budget_json(em::KappaConvention::half)},
                                        {"full", budget_json(em::KappaConvention::full)}};
    } else {
        warnings.push_back("q_cav not given: Purcell and T1 budget skipped");
    }
    report["warnings"] = warnings;
    fs::create_directories(opt.out_dir);
    write_json(opt.out_dir / "em_report.json", report);
    return report;
}

inline detector::ProtocolConfig load_protocol(const json &cfg, std::string_view src) {
    using namespace detail;
    detector::ProtocolConfig pc;
    pc.chi = Frequency::from_hz(read_quantity(cfg, "chi", Dim::frequency, src).value_or(0.0));
    if (auto c2 = read_quantity(cfg, "chi2", Dim::frequency, src)) pc.chi2 = Frequency::from_hz(*c2);
    pc.readout_error = value_or<double>(cfg, "readout_error", 0.0);
    if (cfg.contains("p_read1_given0")) pc.p_read1_given0 = value_or<double>(cfg, "p_read1_given0", 0.0);
    if (cfg.contains("p_read0_given1")) pc.p_read0_given1 = value_or<double>(cfg, "p_read0_given1", 0.0);
    pc.photon_arrival_prob = value_or<double>(cfg, "photon_arrival_prob", 1.0);
    pc.t1 = read_quantity(cfg, "t1", Dim::time, src);
    pc.t2 = read_quantity(cfg, "t2", Dim::time, src);
    pc.ramsey_window = read_quantity(cfg, "ramsey_window", Dim::time, src).value_or(0.0);
    pc.trials = value_or<std::int64_t>(cfg, "trials", 100000);
    pc.rng_seed = value_or<std::uint64_t>(cfg, "seed", 0);
    if (cfg.contains("reflection")) {
        const json &r = cfg["reflection"];
        detector::ReflectionModel m;
        m.omega_r = Frequency::from_hz(require_quantity(r, "omega_r", Dim::frequency, src));
        m.z_r = value_or<double>(r, "z_r_ohm", 0.0);
        m.z0 = value_or<double>(r, "z0_ohm", 50.0);
        pc.reflection = m;
    }
    pc.validate();
    return pc;
}

/// Writes detector_report.json.
inline json cmd_detector(const fs::path &config_path, const Options &opt) {
    using namespace detail;
    const std::string text = read_file(config_path);
    const std::string src = config_path.string();
    const json cfg = parse_json(text, src);
    detector::ProtocolConfig pc = load_protocol(cfg, src);
    if (opt.seed) pc.rng_seed = *opt.seed;

    const auto two = detector::monte_carlo_dark_counts(pc);
    const auto one = detector::monte_carlo_single_qubit(pc);

    json report;
    report["manifest"] = make_manifest("detector", {{src, text}}, pc.rng_seed, opt.fixed_timestamp).to_json();
    report["dark_rate"] = two.dark_rate;
    report["efficiency"] = two.efficiency;
    report["ci95"] = {two.dark_ci95.first, two.dark_ci95.second};
    report["efficiency_ci95"] = {two.efficiency_ci95.first, two.efficiency_ci95.second};
    report["trials"] = two.trials;
    report["seed"] = pc.rng_seed;
    report["dark_clicks"] = two.dark_clicks;
    report["photon_clicks"] = two.photon_clicks;
    json base;
    base["dark_rate"] = one.dark_rate;
    base["efficiency"] = one.efficiency;
    base["ci95"] = {one.dark_ci95.first, one.dark_ci95.second};
    report["single_qubit_baseline"] = base;
    report["suppression_ratio"] = two.dark_rate > 0.0 ? json(one.dark_rate / two.dark_rate) : json(nullptr);
    if (!pc.decoherence() && !pc.p_read1_given0 && !pc.p_read0_given1)
        report["closed_form_dark_rate"] = pc.readout_error * pc.readout_error;
    const auto phases = detector::protocol_phases(pc);
    report["phases_rad"] = {phases[0], phases[1], phases[2], phases[3]};
    report["warnings"] = two.warnings;
    fs::create_directories(opt.out_dir);
    write_json(opt.out_dir / "detector_report.json", report);
    return report;
}

/// Writes mse_history.csv, predictions.csv and qml_report.json.
inline json cmd_qml(const fs::path &config_path, const Options &opt) {
    using namespace detail;
    const std::string text = read_file(config_path);
    const std::string src = config_path.string();
    const json cfg = parse_json(text, src);
    if (!cfg.contains("target_csv")) throw Error(ErrorKind::parse, src + ": missing 'target_csv'");
    const fs::path target = resolve(config_path.parent_path(), value_or<std::string>(cfg, "target_csv", ""));
    const std::string target_text = read_file(target);
    std::istringstream tin(target_text);
    const CsvTable t = parse_csv(tin, target.string());
    if (t.header.size() != 2) throw Error(ErrorKind::parse, target.string() + ": expected 2 columns (x, y)");
    std::vector<double> xs, ys;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        xs.push_back(parse_number(t.rows[r][0], target.string(), t.row_lines[r]));
        ys.push_back(parse_number(t.rows[r][1], target.string(), t.row_lines[r]));
    }
    const auto data = qml::TrainingSet::from_raw(xs, ys);

    const int layers = value_or<int>(cfg, "layers", 7);
    const int shots = value_or<int>(cfg, "shots", 250);
    const int n_runs = value_or<int>(cfg, "n_runs", 50);
    qml::TrainOptions to;
    to.epochs = value_or<int>(cfg, "epochs", 500);
    to.lr = value_or<double>(cfg, "lr", 0.05);
    to.seed = pick_seed(opt, cfg);
    to.init = value_or<std::string>(cfg, "init", "uniform") == "zeros" ? qml::Init::zeros : qml::Init::uniform;
    to.init_range = value_or<double>(cfg, "init_range", 1.0);
    if (to.epochs < 0) throw Error(ErrorKind::parse, src + ": epochs must be >= 0");

    qml::PqcModel model = qml::initial_model(layers, shots, to);
    model.encoding.offset = value_or<double>(cfg, "encoding_offset", model.encoding.offset);
    model.encoding.scale = value_or<double>(cfg, "encoding_scale", model.encoding.scale);
    const auto result = qml::train_from(model, data, to);
    const auto bands = qml::evaluate_with_uncertainty(result.model, data.xs, n_runs, to.seed + 1);

    std::ostringstream hist, pred;
    {
        CsvWriter w(hist, {"iteration", "mse"});
        for (std::size_t i = 0; i < result.mse_history.size(); ++i)
            w.row({static_cast<double>(i), result.mse_history[i]});
    }
    {
        CsvWriter w(pred, {"x", "mean", "std"});
        for (std::size_t i = 0; i < data.xs.size(); ++i) w.row({data.xs[i], bands.means[i], bands.stds[i]});
    }

    json report;
    report["manifest"] =
        make_manifest("qml", {{src, text}, {target.string(), target_text}}, to.seed, opt.fixed_timestamp).to_json();
    report["config"] = {{"layers", layers}, {"n_params", model.n_params()}, {"shots", shots},   {"lr", to.lr},
                        {"epochs", to.epochs}, {"n_train", data.xs.size()}, {"n_runs", n_runs},
                        {"encoding_offset", model.encoding.offset}, {"encoding_scale", model.encoding.scale}};
    report["normalization"] = {{"method", "min-max"}, {"y_min", data.y_min}, {"y_max", data.y_max}};
    report["initial_mse"] = result.mse_history.front();
    report["final_mse"] = result.mse_history.back();
    report["circuits_executed"] = result.circuits;
    report["theta"] = result.model.theta;
    fs::create_directories(opt.out_dir);
    write_text(opt.out_dir / "mse_history.csv", hist.str());
    write_text(opt.out_dir / "predictions.csv", pred.str());
    write_json(opt.out_dir / "qml_report.json", report);
    return report;
}

}  // namespace cqed::cli
