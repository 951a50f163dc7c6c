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

// Spectroscopic parameter extraction: power-scan split, photon-number-resolved
// peak spacing and Poisson photon statistics, chained into a full SystemParams.

#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "cqed/core.hpp"
#include "cqed/least_squares.hpp"

namespace cqed {

/// Features read off the resonator power scan. nu_bare is the high-power
/// (bare cavity) peak, nu_dressed the low-power peak with the qubit in |0>.
struct PowerScanFeatures {
    Uncertain<Frequency> nu_bare;
    Uncertain<Frequency> nu_dressed;
    Frequency gamma_cavity;  // low-power linewidth
    std::optional<double> q0;

    void validate() const {
        if (nu_bare.value == nu_dressed.value)
            throw Error(ErrorKind::degenerate, "power scan: bare and dressed peaks coincide");
        if (!(gamma_cavity.rad_per_s() > 0.0))
            throw Error(ErrorKind::domain, "power scan: cavity linewidth must be positive");
    }
};

struct Peak {
    Frequency center;
    double intensity = 0.0;
    Frequency width;
};

/// Qubit spectroscopy peaks ordered by cavity Fock number n = 0, 1, 2, ...
struct PeakSet {
    std::vector<Peak> peaks;
    std::optional<double> probe_power_dbm;

    void validate() const {
        for (const auto &p : peaks)
            if (!(p.intensity >= 0.0)) throw Error(ErrorKind::domain, "peak intensities must be non-negative");
        if (peaks.size() < 2) return;
        const bool up = peaks[1].center > peaks[0].center;
        for (std::size_t i = 1; i < peaks.size(); ++i) {
            if (up ? !(peaks[i].center > peaks[i - 1].center) : !(peaks[i].center < peaks[i - 1].center))
                throw Error(ErrorKind::domain, "peak centers must be strictly monotone in photon number");
        }
    }
};

struct DispersiveSplit {
    Uncertain<Frequency> value;
    bool degenerate = false;
};

/// chi + chi12/2, measured as nu_dressed - nu_bare (negative for this device).
inline DispersiveSplit total_dispersive_split(const PowerScanFeatures &f) {
    DispersiveSplit s;
    s.value.value = f.nu_dressed.value - f.nu_bare.value;
    s.value.sigma = Frequency::from_rad_per_s(
        std::hypot(f.nu_dressed.sigma.rad_per_s(), f.nu_bare.sigma.rad_per_s()));
    s.degenerate = f.nu_dressed.value == f.nu_bare.value;
    return s;
}

/// chi = mean(consecutive spacing)/2; sigma = sample std of spacings / (2 sqrt(k)),
/// k the number of spacings.
inline Uncertain<Frequency> chi_from_peaks(const PeakSet &p) {
    if (p.peaks.size() < 2) throw Error(ErrorKind::insufficient, "insufficient peaks");
    std::vector<double> spacing;
    for (std::size_t i = 1; i < p.peaks.size(); ++i)
        spacing.push_back((p.peaks[i].center - p.peaks[i - 1].center).rad_per_s());
    const double k = static_cast<double>(spacing.size());
    const double mean = std::accumulate(spacing.begin(), spacing.end(), 0.0) / k;
    double sigma = 0.0;
    if (spacing.size() > 1) {
        double ss = 0.0;
        for (double s : spacing) ss += (s - mean) * (s - mean);
        sigma = std::sqrt(ss / (k - 1.0)) / (2.0 * std::sqrt(k));
    }
    return {Frequency::from_rad_per_s(mean / 2.0), Frequency::from_rad_per_s(sigma)};
}

struct SolvedShifts {
    DispersiveShifts shifts;
    Frequency chi_sigma, chi01_sigma, chi12_sigma;
};

/// chi12 = 2 (split - chi); chi01 = chi + chi12/2 (== split).
/// Sigmas propagate stage by stage, each stage's inputs treated as uncorrelated.
inline SolvedShifts solve_shifts(Uncertain<Frequency> split, Uncertain<Frequency> chi) {
    const Frequency chi12 = 2.0 * (split.value - chi.value);
    const Frequency chi01 = chi.value + chi12 / 2.0;
    SolvedShifts out;
    out.shifts = DispersiveShifts(chi01, chi12);
    out.chi_sigma = chi.sigma;
    const double s12 = 2.0 * std::hypot(split.sigma.rad_per_s(), chi.sigma.rad_per_s());
    out.chi12_sigma = Frequency::from_rad_per_s(s12);
    out.chi01_sigma = Frequency::from_rad_per_s(std::hypot(chi.sigma.rad_per_s(), s12 / 2.0));
    return out;
}

/// The zero-photon peak sits at w01 + chi01.
inline Frequency bare_qubit_frequency(Frequency zero_photon_peak, Frequency chi01) {
    return zero_photon_peak - chi01;
}

/// n_bar = P / (h nu gamma), nu and gamma as linear frequencies.
inline double photons_from_power(double p_watt, Frequency nu, Frequency gamma) {
    if (!(p_watt > 0.0) || !(nu.rad_per_s() > 0.0) || !(gamma.rad_per_s() > 0.0))
        throw Error(ErrorKind::domain, "photons_from_power: power, frequency and linewidth must be positive");
    return p_watt / (constants::h * nu.hz() * gamma.hz());
}

struct PoissonFit {
    double n_bar = 0.0;
    double n_bar_sigma = 0.0;
    double scale = 0.0;
    double residual = 0.0;  // Euclidean norm of the residual vector
};

namespace detail {
inline double log_factorial(int n) { return std::lgamma(n + 1.0); }

template <class F>
decltype(auto) staged(const char *stage, F &&fn) {
    try {
        return fn();
    } catch (const Error &e) {
        throw e.with_stage(stage);
    }
}
}  // namespace detail

/// Unweighted least squares of peak intensities I_n against A N^n e^-N / n!.
inline PoissonFit poisson_fit(const PeakSet &p) {
    const auto m = static_cast<Eigen::Index>(p.peaks.size());
    if (m < 2) throw Error(ErrorKind::insufficient, "insufficient peaks");
    double total = 0.0, first_moment = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double y = p.peaks[i].intensity;
        if (!(y >= 0.0)) throw Error(ErrorKind::domain, "peak intensities must be non-negative");
        total += y;
        first_moment += static_cast<double>(i) * y;
    }
    if (total == 0.0) throw Error(ErrorKind::no_signal, "no signal");

    Eigen::VectorXd p0(2);
    p0 << std::max(first_moment / total, 1e-3), total;
    auto model = [&](const Eigen::VectorXd &x, Eigen::VectorXd &r, Eigen::MatrixXd &J) {
        const double nb = x[0], a = x[1];
        if (!(nb > 0.0)) return false;
        for (Eigen::Index i = 0; i < m; ++i) {
            const double n = static_cast<double>(i);
            const double pois = std::exp(n * std::log(nb) - nb - detail::log_factorial(static_cast<int>(i)));
            r[i] = a * pois - p.peaks[i].intensity;
            J(i, 0) = a * pois * (n / nb - 1.0);
            J(i, 1) = pois;
        }
        return true;
    };
    const LmResult fit = levenberg_marquardt(model, p0, m);
    return {fit.params[0], fit.sigma[0], fit.params[1], std::sqrt(fit.rss)};
}

/// Composes the spectroscopic chain into a SystemParams with first-order sigmas.
/// Errors from each stage are re-raised with the stage name.
inline SystemParams full_extraction(const PowerScanFeatures &f, const PeakSet &peaks,
                                    Uncertain<Frequency> zero_photon_peak) {
    using detail::staged;
    staged("power scan", [&] { f.validate(); });
    staged("peaks", [&] { peaks.validate(); });
    const DispersiveSplit split = total_dispersive_split(f);
    const Uncertain<Frequency> chi = staged("peak spacing", [&] { return chi_from_peaks(peaks); });
    const SolvedShifts solved = solve_shifts(split.value, chi);

    SystemParams p;
    p.shifts = solved.shifts;
    p.shift_sigma.chi = solved.chi_sigma;
    p.shift_sigma.chi01 = solved.chi01_sigma;
    p.shift_sigma.chi12 = solved.chi12_sigma;

    const double w_r = f.nu_bare.value.rad_per_s();
    p.omega_r = f.nu_bare;
    p.omega_01.value = bare_qubit_frequency(zero_photon_peak.value, solved.shifts.chi01());
    p.omega_01.sigma = Frequency::from_rad_per_s(
        std::hypot(zero_photon_peak.sigma.rad_per_s(), solved.chi01_sigma.rad_per_s()));
    const double w01 = p.omega_01.value.rad_per_s();
    p.delta01.value = Frequency::from_rad_per_s(w01 - w_r);
    p.delta01.sigma = Frequency::from_rad_per_s(std::hypot(p.omega_01.sigma.rad_per_s(), f.nu_bare.sigma.rad_per_s()));

    // g01 = sqrt(chi01 * Delta01), positive root.
    const double chi01 = solved.shifts.chi01().rad_per_s();
    const double d01 = p.delta01.value.rad_per_s();
    if (chi01 * d01 < 0.0)
        throw Error(ErrorKind::inconsistent, "coupling: inconsistent signs (chi01 * Delta01 < 0)");
    auto g_of = [](const std::array<double, 2> &x) { return std::sqrt(x[0] * x[1]); };
    p.g01.value = Frequency::from_rad_per_s(g_of({chi01, d01}));
    p.g01.sigma = Frequency::from_rad_per_s(
        propagate_sigma<2>(g_of, {chi01, d01}, {solved.chi01_sigma.rad_per_s(), p.delta01.sigma.rad_per_s()}));

    // Delta12 = g12^2 / chi12 with g12 = sqrt(2) g01.
    const double chi12 = solved.shifts.chi12().rad_per_s();
    if (chi12 == 0.0) throw Error(ErrorKind::degenerate, "anharmonicity: chi12 is zero, Delta12 undefined");
    auto d12_of = [](const std::array<double, 2> &x) { return 2.0 * x[0] * x[0] / x[1]; };
    const double g = p.g01.value.rad_per_s();
    p.delta12.value = Frequency::from_rad_per_s(d12_of({g, chi12}));
    p.delta12.sigma = Frequency::from_rad_per_s(
        propagate_sigma<2>(d12_of, {g, chi12}, {p.g01.sigma.rad_per_s(), solved.chi12_sigma.rad_per_s()}));

    p.alpha.value = p.delta01.value - p.delta12.value;
    p.alpha.sigma = Frequency::from_rad_per_s(std::hypot(p.delta01.sigma.rad_per_s(), p.delta12.sigma.rad_per_s()));

    const CircuitParams c = staged("circuit", [&] { return derive_circuit(p.alpha.value, p.omega_01.value); });
    const std::array<double, 2> x{p.alpha.value.rad_per_s(), w01};
    const std::array<double, 2> sx{p.alpha.sigma.rad_per_s(), p.omega_01.sigma.rad_per_s()};
    auto circuit_field = [](double CircuitParams::*field) {
        return [field](const std::array<double, 2> &v) {
            return derive_circuit(Frequency::from_rad_per_s(v[0]), Frequency::from_rad_per_s(v[1])).*field;
        };
    };
    p.ec_joule = {c.ec_joule, propagate_sigma<2>(circuit_field(&CircuitParams::ec_joule), x, sx)};
    p.ej_joule = {c.ej_joule, propagate_sigma<2>(circuit_field(&CircuitParams::ej_joule), x, sx)};
    p.capacitance_farad = {c.capacitance_farad,
                           propagate_sigma<2>(circuit_field(&CircuitParams::capacitance_farad), x, sx)};
    p.ic_ampere = {c.ic_ampere, propagate_sigma<2>(circuit_field(&CircuitParams::ic_ampere), x, sx)};
    p.lj_henry = {c.lj_henry, propagate_sigma<2>(circuit_field(&CircuitParams::lj_henry), x, sx)};
    return p;
}

}  // namespace cqed
