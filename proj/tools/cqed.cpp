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


// cqed: batch front-end for the toolkit.
//
//   cqed extract POWER_SCAN.json PEAKS.csv [--zero-photon-peak GHz]
//   cqed simulate {rabi|chevron|t1|ramsey|spectroscopy} --config CFG.json
//   cqed em --config EM.json [--fields F.csv] [--maxwell M.json] [--layers L.json] [--volume V.csv]
//   cqed detector --config CFG.json
//   cqed qml --config CFG.json
//
// Common flags: --seed N, --fixed-timestamp, --out DIR, --kappa-convention {half|full}.
// Exit codes: 0 success, 1 runtime or numeric failure, 2 input or usage error.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "cqed/cli/commands.hpp"

namespace {

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("cqed");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("cqed: %l: %v");
    const char *env = std::getenv("CQED_LOG");
    const std::string level = env ? env : "error";
    if (level == "debug")
        spdlog::set_level(spdlog::level::debug);
    else if (level == "info")
        spdlog::set_level(spdlog::level::info);
    else
        spdlog::set_level(spdlog::level::err);
}

}  // namespace

int main(int argc, char **argv) {
    setup_logging();
    using namespace cqed::cli;

    CLI::App app{"Circuit-QED characterization toolkit"};
    app.set_version_flag("--version", std::string(tool_version));
    app.require_subcommand(1);

    Options opt;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::string kappa;
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();
    app.add_option("--seed", seed, "RNG seed (overrides the config)");
    app.add_flag("--fixed-timestamp", opt.fixed_timestamp, "Use a fixed manifest timestamp");
    app.add_option("--kappa-convention", kappa, "kappa = omega_r/(2Q) (half) or omega_r/Q (full)")
        ->check(CLI::IsMember({"half", "full"}));
    app.fallthrough();

    ExtractInputs ex;
    std::string ex_scan, ex_peaks;
    std::optional<double> zero_peak;
    auto *extract = app.add_subcommand("extract", "Extract system parameters from spectroscopy features");
    extract->add_option("power_scan", ex_scan, "power_scan.json")->required()->check(CLI::ExistingFile);
    extract->add_option("peaks", ex_peaks, "peaks.csv")->required()->check(CLI::ExistingFile);
    extract->add_option("--zero-photon-peak", zero_peak, "Zero-photon qubit peak in GHz");

    std::string sim_kind, config;
    auto *simulate = app.add_subcommand("simulate", "Forward-model measurement curves");
    simulate->add_option("kind", sim_kind, "rabi|chevron|t1|ramsey|spectroscopy")->required();
    simulate->add_option("--config", config, "Config JSON")->required()->check(CLI::ExistingFile);

    std::string em_fields, em_maxwell, em_layers, em_volume;
    auto *em = app.add_subcommand("em", "Estimate coupling, participation ratios and the T1 budget");
    em->add_option("--config", config, "Config JSON")->required()->check(CLI::ExistingFile);
    em->add_option("--fields", em_fields, "Surface field samples CSV")->check(CLI::ExistingFile);
    em->add_option("--maxwell", em_maxwell, "Maxwell capacitance matrix JSON")->check(CLI::ExistingFile);
    em->add_option("--layers", em_layers, "Loss layer JSON")->check(CLI::ExistingFile);
    em->add_option("--volume", em_volume, "Volume field samples CSV")->check(CLI::ExistingFile);

    auto *detector = app.add_subcommand("detector", "Monte-Carlo dark counts of the two-qubit photon detector");
    detector->add_option("--config", config, "Config JSON")->required()->check(CLI::ExistingFile);

    auto *qml = app.add_subcommand("qml", "Train the re-uploading regression circuit");
    qml->add_option("--config", config, "Config JSON")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    opt.out_dir = out_dir;
    opt.seed = seed;
    if (kappa == "half") opt.kappa = cqed::em::KappaConvention::half;
    if (kappa == "full") opt.kappa = cqed::em::KappaConvention::full;

    auto optional_path = [](const std::string &s) -> std::optional<fs::path> {
        if (s.empty()) return std::nullopt;
        return fs::path(s);
    };

    try {
        if (extract->parsed()) {
            ex.power_scan = ex_scan;
            ex.peaks = ex_peaks;
            ex.zero_photon_peak_ghz = zero_peak;
            spdlog::info("extract: {} + {}", ex_scan, ex_peaks);
            cmd_extract(ex, opt);
        } else if (simulate->parsed()) {
            spdlog::info("simulate {}: {}", sim_kind, config);
            cmd_simulate(sim_kind, config, opt);
        } else if (em->parsed()) {
            spdlog::info("em: {}", config);
            cmd_em({config, optional_path(em_fields), optional_path(em_maxwell), optional_path(em_layers),
                    optional_path(em_volume)},
                   opt);
        } else if (detector->parsed()) {
            spdlog::info("detector: {}", config);
            cmd_detector(config, opt);
        } else if (qml->parsed()) {
            spdlog::info("qml: {}", config);
            cmd_qml(config, opt);
        }
    } catch (const cqed::Error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return cqed::is_runtime_failure(e.kind()) ? 1 : 2;
    } catch (const std::filesystem::filesystem_error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    spdlog::info("wrote outputs to {}", out_dir);
    return 0;
}
