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

// Time-domain forward models (Rabi, chevron, T1, Ramsey) and their fitters,
// plus the spectroscopy forward model used to close loops with extraction.

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "cqed/core.hpp"
#include "cqed/extraction.hpp"
#include "cqed/least_squares.hpp"

namespace cqed {

struct RabiConfig {
    Frequency g01;
    Frequency drive_detuning;
    double n_bar = 0.0;
    std::vector<double> durations_s;

    void validate() const {
        if (!(n_bar >= 0.0)) throw Error(ErrorKind::domain, "rabi: n_bar must be non-negative");
        for (std::size_t i = 1; i < durations_s.size(); ++i)
            if (!(durations_s[i] > durations_s[i - 1]))
                throw Error(ErrorKind::domain, "rabi: duration grid must be strictly increasing");
    }
};

/// Omega_R = 2 g01 sqrt(n_bar).
inline Frequency rabi_frequency(Frequency g01, double n_bar) {
    if (!(n_bar >= 0.0)) throw Error(ErrorKind::domain, "rabi_frequency: n_bar must be non-negative");
    return 2.0 * std::sqrt(n_bar) * g01;
}

/// Generalized Rabi formula, no decoherence during the pulse.
inline double chevron_population(const RabiConfig &cfg, double t) {
    const double omega_r = rabi_frequency(cfg.g01, cfg.n_bar).rad_per_s();
    const double det = cfg.drive_detuning.rad_per_s();
    const double eff2 = omega_r * omega_r + det * det;
    if (eff2 == 0.0) return 0.0;
    const double s = std::sin(std::sqrt(eff2) * t / 2.0);
    return std::clamp(omega_r * omega_r / eff2 * s * s, 0.0, 1.0);
}

enum class TraceKind { t1, ramsey };

/// Population vs delay. For T1 traces `population` is the excited-state
/// population; for Ramsey traces it is the ground-state population.
struct DecayTrace {
    std::vector<double> times_s;
    std::vector<double> population;
    TraceKind kind = TraceKind::t1;
    Frequency detuning;  // Ramsey only

    void validate() const {
        if (times_s.size() != population.size())
            throw Error(ErrorKind::domain, "trace: times and populations differ in length");
        for (double p : population)
            if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::domain, "trace: population outside [0,1]");
    }

    std::vector<double> ground_population() const {
        if (kind == TraceKind::ramsey) return population;
        std::vector<double> g(population.size());
        std::transform(population.begin(), population.end(), g.begin(), [](double p) { return 1.0 - p; });
        return g;
    }
};

inline DecayTrace t1_trace(double t1, std::span<const double> grid) {
    if (!(t1 > 0.0)) throw Error(ErrorKind::domain, "t1_trace: T1 must be positive");
    DecayTrace tr;
    tr.kind = TraceKind::t1;
    tr.times_s.assign(grid.begin(), grid.end());
    for (double t : grid) tr.population.push_back(std::exp(-t / t1));
    return tr;
}

inline double ramsey_ground_population(double t, double t2, double detuning_hz) {
    return 0.5 * (1.0 + std::cos(two_pi * detuning_hz * t) * std::exp(-t / t2));
}

inline DecayTrace ramsey_trace(double t2, Frequency detuning, std::span<const double> grid) {
    if (!(t2 > 0.0)) throw Error(ErrorKind::domain, "ramsey_trace: T2 must be positive");
    DecayTrace tr;
    tr.kind = TraceKind::ramsey;
    tr.detuning = detuning;
    tr.times_s.assign(grid.begin(), grid.end());
    for (double t : grid) tr.population.push_back(ramsey_ground_population(t, t2, detuning.hz()));
    return tr;
}

/// Additive Gaussian noise, clipped back into [0,1].
inline DecayTrace with_gaussian_noise(DecayTrace tr, double sigma, std::mt19937_64 &rng) {
    std::normal_distribution<double> noise(0.0, sigma);
    for (double &p : tr.population) p = std::clamp(p + noise(rng), 0.0, 1.0);
    return tr;
}

/// Projection noise of a dispersive readout averaged over `shots` repetitions.
inline DecayTrace with_readout_sampling(DecayTrace tr, int shots, std::mt19937_64 &rng) {
    if (shots <= 0) return tr;
    for (double &p : tr.population) {
        std::binomial_distribution<int> draw(shots, std::clamp(p, 0.0, 1.0));
        p = static_cast<double>(draw(rng)) / shots;
    }
    return tr;
}

struct ExponentialFit {
    double t1 = 0.0;
    double t1_sigma = 0.0;
    double residual = 0.0;
    int iterations = 0;
};

struct RamseyFit {
    double t2 = 0.0;
    double t2_sigma = 0.0;
    Frequency detuning;
    Frequency detuning_sigma;
    double residual = 0.0;
    int iterations = 0;
};

namespace detail {

inline void require_fit_points(const DecayTrace &tr) {
    tr.validate();
    if (tr.times_s.size() < 5) throw Error(ErrorKind::insufficient, "fit needs at least 5 points");
}

// Discrete Fourier power of (x - mean) on a dense frequency grid up to the
// Nyquist limit of the mean sample spacing; returns the peak frequency in Hz.
inline double periodogram_peak_hz(std::span<const double> t, std::span<const double> y) {
    const std::size_t n = t.size();
    const double span = t.back() - t.front();
    if (!(span > 0.0)) return 0.0;
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n);
    const double nyquist = 0.5 * static_cast<double>(n - 1) / span;
    const double df = 1.0 / (16.0 * span);
    double best_f = 0.0, best_power = -1.0;
    for (double f = df; f <= nyquist; f += df) {
        double re = 0.0, im = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ph = two_pi * f * t[i];
            re += (y[i] - mean) * std::cos(ph);
            im += (y[i] - mean) * std::sin(ph);
        }
        const double power = re * re + im * im;
        if (power > best_power) {
            best_power = power;
            best_f = f;
        }
    }
    return best_f;
}

}  // namespace detail

/// Fits P_e(t) = exp(-t/T1). Initial guess from log-linear regression.
inline ExponentialFit fit_exponential(const DecayTrace &tr) {
    detail::require_fit_points(tr);
    double sx = 0, sy = 0, sxx = 0, sxy = 0, cnt = 0;
    for (std::size_t i = 0; i < tr.times_s.size(); ++i) {
        if (tr.population[i] <= 1e-3) continue;
        const double x = tr.times_s[i], y = std::log(tr.population[i]);
        sx += x, sy += y, sxx += x * x, sxy += x * y, cnt += 1;
    }
    const double span = tr.times_s.back() - tr.times_s.front();
    double t1_guess = span > 0.0 ? span / 3.0 : 1.0;
    if (cnt >= 2) {
        const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
        if (slope < 0.0 && std::isfinite(slope)) t1_guess = -1.0 / slope;
    }
    const auto m = static_cast<Eigen::Index>(tr.times_s.size());
    auto model = [&](const Eigen::VectorXd &x, Eigen::VectorXd &r, Eigen::MatrixXd &J) {
        const double t1 = x[0];
        if (!(t1 > 0.0)) return false;
        for (Eigen::Index i = 0; i < m; ++i) {
            const double t = tr.times_s[i];
            const double e = std::exp(-t / t1);
            r[i] = e - tr.population[i];
            J(i, 0) = e * t / (t1 * t1);
        }
        return true;
    };
    Eigen::VectorXd p0(1);
    p0 << t1_guess;
    const LmResult fit = levenberg_marquardt(model, p0, m);
    return {fit.params[0], fit.sigma[0], std::sqrt(fit.rss), fit.iterations};
}

/// Fits P_g(t) = (1 + cos(2 pi delta t) exp(-t/T2)) / 2. The detuning guess
/// comes from the periodogram peak, the T2 guess from a coarse log grid.
/// The model is even in delta; the returned detuning is non-negative.
inline RamseyFit fit_ramsey(const DecayTrace &tr) {
    detail::require_fit_points(tr);
    const auto m = static_cast<Eigen::Index>(tr.times_s.size());
    const double f_guess = detail::periodogram_peak_hz(tr.times_s, tr.population);
    const double span = tr.times_s.back() - tr.times_s.front();

    auto rss_at = [&](double t2, double f) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            const double d = ramsey_ground_population(tr.times_s[i], t2, f) - tr.population[i];
            s += d * d;
        }
        return s;
    };
    double t2_guess = span / 3.0, best = INFINITY;
    for (int k = 0; k <= 60; ++k) {
        const double t2 = span * std::pow(10.0, -2.0 + 3.0 * k / 60.0);
        const double s = rss_at(t2, f_guess);
        if (s < best) best = s, t2_guess = t2;
    }

    auto model = [&](const Eigen::VectorXd &x, Eigen::VectorXd &r, Eigen::MatrixXd &J) {
        const double t2 = x[0], f = x[1];
        if (!(t2 > 0.0)) return false;
        for (Eigen::Index i = 0; i < m; ++i) {
            const double t = tr.times_s[i];
            const double env = std::exp(-t / t2);
            const double c = std::cos(two_pi * f * t);
            r[i] = 0.5 * (1.0 + c * env) - tr.population[i];
            J(i, 0) = 0.5 * c * env * t / (t2 * t2);
            J(i, 1) = -0.5 * std::sin(two_pi * f * t) * two_pi * t * env;
        }
        return true;
    };
    Eigen::VectorXd p0(2);
    p0 << t2_guess, f_guess;
    const LmResult fit = levenberg_marquardt(model, p0, m);
    RamseyFit out;
    out.t2 = fit.params[0];
    out.t2_sigma = fit.sigma[0];
    out.detuning = Frequency::from_hz(std::abs(fit.params[1]));
    out.detuning_sigma = Frequency::from_hz(fit.sigma[1]);
    out.residual = std::sqrt(fit.rss);
    out.iterations = fit.iterations;
    return out;
}

struct RabiPowerPoint {
    double n_bar = 0.0;
    Frequency rabi;
};

/// Straight line sqrt(n_bar) = slope * (Omega_R/2pi in MHz) + intercept.
/// slope = 1 / (2 g01/2pi), so g01 follows from the slope alone.
struct RabiLineFit {
    double slope_per_mhz = 0.0;
    double intercept = 0.0;
    Frequency g01;
};

inline RabiLineFit fit_rabi_power_law(std::span<const RabiPowerPoint> pts) {
    if (pts.size() < 2) throw Error(ErrorKind::insufficient, "rabi line fit needs at least 2 points");
    double sx = 0, sy = 0;
    for (const auto &p : pts) sx += p.rabi.mhz(), sy += std::sqrt(p.n_bar);
    const double n = static_cast<double>(pts.size());
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (const auto &p : pts) {
        const double dx = p.rabi.mhz() - mx;
        sxx += dx * dx;
        sxy += dx * (std::sqrt(p.n_bar) - my);
    }
    if (sxx == 0.0) throw Error(ErrorKind::degenerate, "rabi line fit: all Rabi frequencies equal");
    RabiLineFit out;
    out.slope_per_mhz = sxy / sxx;
    out.intercept = my - out.slope_per_mhz * mx;
    out.g01 = Frequency::from_mhz(1.0 / (2.0 * out.slope_per_mhz));
    return out;
}

/// Rabi frequency vs drive power: n_bar = P/(h nu gamma), Omega_R = 2 g01 sqrt(n_bar).
inline std::vector<RabiPowerPoint> rabi_vs_power(Frequency g01, std::span<const double> powers_w, Frequency nu,
                                                 Frequency gamma) {
    std::vector<RabiPowerPoint> out;
    for (double p : powers_w) {
        const double nb = photons_from_power(p, nu, gamma);
        out.push_back({nb, rabi_frequency(g01, nb)});
    }
    return out;
}

/// Photon-number-resolved qubit spectroscopy: peak n at (w01 + chi01) + 2 chi n
/// with Poisson(n_bar) weights times `scale`.
inline PeakSet spectroscopy_peaks(const SystemParams &p, double n_bar, int n_peaks, Frequency width,
                                  double scale = 1.0) {
    if (!(n_bar > 0.0) || n_peaks < 1) throw Error(ErrorKind::domain, "spectroscopy: need n_bar > 0 and peaks >= 1");
    PeakSet out;
    const Frequency zero = p.omega_01.value + p.shifts.chi01();
    for (int n = 0; n < n_peaks; ++n) {
        const double w = scale * std::exp(n * std::log(n_bar) - n_bar - detail::log_factorial(n));
        out.peaks.push_back({zero + 2.0 * n * p.shifts.chi(), w, width});
    }
    return out;
}

/// Power-scan features in the extraction sign convention: nu_dressed - nu_bare = chi + chi12/2.
inline PowerScanFeatures power_scan_features(const SystemParams &p, Frequency gamma_cavity) {
    PowerScanFeatures f;
    f.nu_bare.value = p.omega_r.value;
    f.nu_dressed.value = p.omega_r.value + p.shifts.chi() + p.shifts.chi12() / 2.0;
    f.gamma_cavity = gamma_cavity;
    return f;
}

}  // namespace cqed
