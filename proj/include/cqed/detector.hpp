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

// Reflection of a photon off a parallel LC resonator, and the two-qubit
// Ramsey photon detector built on the resulting conditional phase.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <future>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cqed/core.hpp"

namespace cqed::detector {

using cplx = std::complex<double>;

/// Parallel LC (w_R, Z_R = sqrt(L/C)) terminating a line of impedance Z0.
struct ReflectionModel {
    Frequency omega_r;
    double z_r = 0.0;
    double z0 = 0.0;

    void validate() const {
        if (!(omega_r.rad_per_s() > 0.0) || !(z_r > 0.0) || !(z0 > 0.0))
            throw Error(ErrorKind::domain, "reflection model: frequency and impedances must be positive");
    }
    double quality_factor() const { return z0 / z_r; }
    /// Energy damping rate gamma = w_R Z_R / Z0 = w_R / Q.
    double damping_rate() const { return omega_r.rad_per_s() * z_r / z0; }
};

/// Gamma = -(w^2 - w_R^2 - i w w_R Z_R/Z0) / (w^2 - w_R^2 + i w w_R Z_R/Z0).
inline cplx reflection_gamma(const ReflectionModel &m, Frequency omega) {
    const double w = omega.rad_per_s(), wr = m.omega_r.rad_per_s();
    const double re = w * w - wr * wr;
    const double im = w * wr * m.z_r / m.z0;
    return -cplx(re, -im) / cplx(re, im);
}

/// Basis index = 2 * q1 + q2 over {|00>, |01>, |10>, |11>}.
enum class Basis : int { s00 = 0, s01 = 1, s10 = 2, s11 = 3 };

/// Phase of the reflected photon when the resonator is pulled by
/// chi1 s1 + chi2 s2, s_i = +1 for an excited qubit and -1 otherwise.
inline double conditional_phase(Basis state, Frequency chi1, Frequency chi2, const ReflectionModel &m,
                                Frequency photon_omega) {
    const int idx = static_cast<int>(state);
    const double s1 = (idx & 2) ? 1.0 : -1.0;
    const double s2 = (idx & 1) ? 1.0 : -1.0;
    ReflectionModel shifted = m;
    shifted.omega_r = m.omega_r + chi1 * s1 + chi2 * s2;
    return std::arg(reflection_gamma(shifted, photon_omega));
}

inline double conditional_phase(Basis state, Frequency chi, const ReflectionModel &m, Frequency photon_omega) {
    return conditional_phase(state, chi, chi, m, photon_omega);
}

/// The four conditional phases are only near {-pi, 0, 0, pi} when |2 chi| >> gamma.
inline bool deep_dispersive(Frequency chi, const ReflectionModel &m) {
    return std::abs(2.0 * chi.rad_per_s()) >= 10.0 * m.damping_rate();
}

class TwoQubitState {
public:
    using Amplitudes = std::array<cplx, 4>;

    TwoQubitState() : a_{cplx(1.0), 0.0, 0.0, 0.0} {}
    explicit TwoQubitState(const Amplitudes &a) : a_(a) {
        if (std::abs(norm() - 1.0) > 1e-12) throw Error(ErrorKind::domain, "two-qubit state is not normalized");
    }

    const Amplitudes &amplitudes() const { return a_; }
    cplx operator[](Basis b) const { return a_[static_cast<int>(b)]; }

    double norm() const {
        double s = 0.0;
        for (const auto &x : a_) s += std::norm(x);
        return s;
    }

    /// Applies a 2x2 unitary (row-major) to qubit 0 (first factor) or 1.
    TwoQubitState apply(int qubit, const std::array<cplx, 4> &u) const {
        TwoQubitState out = *this;
        const int stride = qubit == 0 ? 2 : 1;
        for (int other = 0; other < 2; ++other) {
            const int i0 = qubit == 0 ? other : 2 * other;
            const int i1 = i0 + stride;
            out.a_[i0] = u[0] * a_[i0] + u[1] * a_[i1];
            out.a_[i1] = u[2] * a_[i0] + u[3] * a_[i1];
        }
        return out;
    }

    TwoQubitState apply_both(const std::array<cplx, 4> &u) const { return apply(0, u).apply(1, u); }

    TwoQubitState with_phases(const std::array<double, 4> &phase) const {
        TwoQubitState out = *this;
        for (int i = 0; i < 4; ++i) out.a_[i] *= std::polar(1.0, phase[i]);
        return out;
    }

private:
    Amplitudes a_;
};

/// Y(theta) = [[cos theta/2, -sin theta/2], [sin theta/2, cos theta/2]].
inline std::array<cplx, 4> y_rotation(double theta) {
    const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
    return {cplx(c), cplx(-s), cplx(s), cplx(c)};
}

/// Photon-induced phases in the deep dispersive limit: 00 -> -pi, 01/10 -> 0, 11 -> +pi.
inline constexpr std::array<double, 4> ideal_phase_map{-std::numbers::pi, 0.0, 0.0, std::numbers::pi};

/// Y(pi/2) on both qubits, the photon phase map when a photon reflects, then
/// Y(-pi/2) on both.
inline TwoQubitState run_protocol_ideal(bool photon_present) {
    TwoQubitState s = TwoQubitState().apply_both(y_rotation(std::numbers::pi / 2.0));
    if (photon_present) s = s.with_phases(ideal_phase_map);
    return s.apply_both(y_rotation(-std::numbers::pi / 2.0));
}

struct ProtocolConfig {
    Frequency chi;
    std::optional<Frequency> chi2;        // second qubit; equal to chi when absent
    double readout_error = 0.0;            // symmetric flip probability
    std::optional<double> p_read1_given0;  // asymmetric overrides
    std::optional<double> p_read0_given1;
    double photon_arrival_prob = 1.0;
    std::optional<double> t1, t2;          // seconds; decoherence off when absent
    double ramsey_window = 0.0;            // seconds
    std::int64_t trials = 0;
    std::uint64_t rng_seed = 0;
    std::optional<ReflectionModel> reflection;  // physical phases instead of the ideal map

    double p10() const { return p_read1_given0.value_or(readout_error); }
    double p01() const { return p_read0_given1.value_or(readout_error); }
    bool decoherence() const { return t1.has_value() && t2.has_value() && ramsey_window > 0.0; }

    void validate() const {
        for (double p : {readout_error, p10(), p01(), photon_arrival_prob})
            if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::domain, "protocol: probabilities must lie in [0,1]");
        if (trials < 1) throw Error(ErrorKind::domain, "protocol: trials must be >= 1");
        if (!(ramsey_window >= 0.0)) throw Error(ErrorKind::domain, "protocol: window must be non-negative");
        if (t1.has_value() != t2.has_value()) throw Error(ErrorKind::domain, "protocol: give both t1 and t2 or neither");
        if (t1) CoherenceTimes::from_t1_t2({*t1, 0.0}, {*t2, 0.0});
        if (reflection) reflection->validate();
    }

    /// Non-fatal conditions worth reporting.
    std::vector<std::string> warnings() const {
        std::vector<std::string> w;
        if (t1 && t2 && ramsey_window > 0.1 * std::sqrt(*t1 * *t1 + *t2 * *t2) / 2.0)
            w.emplace_back("ramsey window is not much shorter than sqrt(T1^2+T2^2)/2");
        if (reflection && !deep_dispersive(chi, *reflection))
            w.emplace_back("|2 chi| < 10 gamma: conditional phases are far from the ideal map");
        return w;
    }
};

/// Wilson score interval at 95%.
inline std::pair<double, double> wilson95(std::int64_t k, std::int64_t n) {
    constexpr double z = 1.959963984540054;
    const double nn = static_cast<double>(n), p = static_cast<double>(k) / nn;
    const double den = 1.0 + z * z / nn;
    const double center = (p + z * z / (2.0 * nn)) / den;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / den;
    return {k == 0 ? 0.0 : std::max(0.0, center - half), k == n ? 1.0 : std::min(1.0, center + half)};
}

struct DarkCountResult {
    std::int64_t trials = 0;
    std::int64_t dark_clicks = 0;    // "11" read with no photon
    std::int64_t photon_clicks = 0;  // "11" read with a photon sent
    double dark_rate = 0.0;
    double efficiency = 0.0;
    std::pair<double, double> dark_ci95, efficiency_ci95;
    std::vector<std::string> warnings;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline double uniform01(std::mt19937_64 &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct Counts {
    std::int64_t dark = 0, photon = 0;
};

// Quantum-trajectory channels for one qubit over the whole window.
struct Channels {
    double p_damp = 0.0;    // 1 - exp(-T/T1)
    double p_zflip = 0.0;   // (1 - exp(-T/Tphi)) / 2
};

inline Channels channels_for(const ProtocolConfig &cfg) {
    Channels c;
    if (!cfg.decoherence()) return c;
    const auto coh = CoherenceTimes::from_t1_t2({*cfg.t1, 0.0}, {*cfg.t2, 0.0});
    c.p_damp = 1.0 - std::exp(-cfg.ramsey_window / *cfg.t1);
    c.p_zflip = std::isfinite(coh.tphi().value) ? 0.5 * (1.0 - std::exp(-cfg.ramsey_window / coh.tphi().value)) : 0.0;
    return c;
}

// One stochastic amplitude-damping + dephasing step on each of n qubits of a
// state vector of size 2^n (qubit 0 is the most significant bit).
template <std::size_t N>
void decohere(std::array<cplx, N> &a, int n_qubits, const Channels &ch, std::mt19937_64 &rng) {
    for (int q = 0; q < n_qubits; ++q) {
        const std::size_t bit = std::size_t{1} << (n_qubits - 1 - q);
        if (ch.p_damp > 0.0) {
            double p1 = 0.0;
            for (std::size_t i = 0; i < N; ++i)
                if (i & bit) p1 += std::norm(a[i]);
            const double p_jump = ch.p_damp * p1;
            if (uniform01(rng) < p_jump) {
                for (std::size_t i = 0; i < N; ++i)
                    if (!(i & bit)) a[i] = a[i | bit], a[i | bit] = 0.0;
            } else {
                const double k = std::sqrt(1.0 - ch.p_damp);
                for (std::size_t i = 0; i < N; ++i)
                    if (i & bit) a[i] *= k;
            }
            double nrm = 0.0;
            for (const auto &x : a) nrm += std::norm(x);
            nrm = std::sqrt(nrm);
            for (auto &x : a) x /= nrm;
        }
        if (ch.p_zflip > 0.0 && uniform01(rng) < ch.p_zflip)
            for (std::size_t i = 0; i < N; ++i)
                if (i & bit) a[i] = -a[i];
    }
}

template <std::size_t N>
std::size_t sample_outcome(const std::array<cplx, N> &a, std::mt19937_64 &rng) {
    const double u = uniform01(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        acc += std::norm(a[i]);
        if (u < acc) return i;
    }
    return N - 1;
}

template <std::size_t N>
std::size_t misread(std::size_t outcome, int n_qubits, double p10, double p01, std::mt19937_64 &rng) {
    for (int q = 0; q < n_qubits; ++q) {
        const std::size_t bit = std::size_t{1} << (n_qubits - 1 - q);
        const double p = (outcome & bit) ? p01 : p10;
        if (uniform01(rng) < p) outcome ^= bit;
    }
    return outcome;
}

// Runs the Ramsey detector on n qubits (1 or 2): Y(pi/2) on all, photon phase
// map (if a photon is sent and arrives), decoherence at mid-window, Y(-pi/2)
// on all, readout with bit flips. A click is the all-ones outcome.
template <std::size_t N>
Counts simulate_partition(std::int64_t trials, const std::array<double, N> &phases, const ProtocolConfig &cfg,
                          std::uint64_t seed) {
    constexpr int n_qubits = N == 4 ? 2 : 1;
    std::mt19937_64 rng(seed);
    const Channels ch = channels_for(cfg);
    const bool noisy = cfg.decoherence();
    const auto yp = y_rotation(std::numbers::pi / 2.0);
    const auto ym = y_rotation(-std::numbers::pi / 2.0);

    auto rotate_all = [&](std::array<cplx, N> &a, const std::array<cplx, 4> &u) {
        for (int q = 0; q < n_qubits; ++q) {
            const std::size_t bit = std::size_t{1} << (n_qubits - 1 - q);
            for (std::size_t i = 0; i < N; ++i) {
                if (i & bit) continue;
                const cplx x0 = a[i], x1 = a[i | bit];
                a[i] = u[0] * x0 + u[1] * x1;
                a[i | bit] = u[2] * x0 + u[3] * x1;
            }
        }
    };
    auto run = [&](bool photon) {
        std::array<cplx, N> a{};
        a[0] = 1.0;
        rotate_all(a, yp);
        const bool arrives = photon && uniform01(rng) < cfg.photon_arrival_prob;
        const bool early = noisy && uniform01(rng) < 0.5;
        auto apply_phase = [&] {
            for (std::size_t i = 0; i < N; ++i) a[i] *= std::polar(1.0, phases[i]);
        };
        if (arrives && (!noisy || early)) apply_phase();
        if (noisy) decohere(a, n_qubits, ch, rng);
        if (arrives && noisy && !early) apply_phase();
        rotate_all(a, ym);
        const std::size_t outcome = misread<N>(sample_outcome(a, rng), n_qubits, cfg.p10(), cfg.p01(), rng);
        return outcome == N - 1;
    };
    Counts c;
    for (std::int64_t t = 0; t < trials; ++t) {
        c.dark += run(false);
        c.photon += run(true);
    }
    return c;
}

inline constexpr int partitions = 16;

template <std::size_t N>
DarkCountResult monte_carlo(const ProtocolConfig &cfg, const std::array<double, N> &phases) {
    cfg.validate();
    std::vector<std::future<Counts>> jobs;
    for (int i = 0; i < partitions; ++i) {
        const std::int64_t share = cfg.trials / partitions + (i < cfg.trials % partitions ? 1 : 0);
        const std::uint64_t seed = splitmix64(cfg.rng_seed ^ splitmix64(static_cast<std::uint64_t>(i) + 1));
        jobs.push_back(std::async(std::launch::async, [share, &phases, &cfg, seed] {
            return simulate_partition<N>(share, phases, cfg, seed);
        }));
    }
    DarkCountResult r;
    for (auto &j : jobs) {
        const Counts c = j.get();
        r.dark_clicks += c.dark;
        r.photon_clicks += c.photon;
    }
    r.trials = cfg.trials;
    r.dark_rate = static_cast<double>(r.dark_clicks) / static_cast<double>(r.trials);
    r.efficiency = static_cast<double>(r.photon_clicks) / static_cast<double>(r.trials);
    r.dark_ci95 = wilson95(r.dark_clicks, r.trials);
    r.efficiency_ci95 = wilson95(r.photon_clicks, r.trials);
    r.warnings = cfg.warnings();
    return r;
}

}  // namespace detail

/// Phases used by the two-qubit detector: the ideal map, or the reflection
/// model's phases for a photon at the bare resonator frequency.
inline std::array<double, 4> protocol_phases(const ProtocolConfig &cfg) {
    if (!cfg.reflection) return ideal_phase_map;
    std::array<double, 4> ph{};
    const Frequency chi2 = cfg.chi2.value_or(cfg.chi);
    for (int i = 0; i < 4; ++i)
        ph[i] = conditional_phase(static_cast<Basis>(i), cfg.chi, chi2, *cfg.reflection, cfg.reflection->omega_r);
    return ph;
}

/// Seeded Monte Carlo of the two-qubit detector. Trials are split over a fixed
/// number of partitions with derived seeds, so results do not depend on the
/// number of hardware threads.
inline DarkCountResult monte_carlo_dark_counts(const ProtocolConfig &cfg) {
    return detail::monte_carlo<4>(cfg, protocol_phases(cfg));
}

/// Single-qubit comparator: the photon flips the Ramsey phase by pi, a click is
/// reading |1>. Its dark rate is ~p instead of ~p^2.
inline DarkCountResult monte_carlo_single_qubit(const ProtocolConfig &cfg) {
    return detail::monte_carlo<2>(cfg, std::array<double, 2>{std::numbers::pi, 0.0});
}

}  // namespace cqed::detector
