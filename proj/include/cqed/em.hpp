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

// Design-side estimators fed by exported field/charge samples: lumped
// capacitance, dipole coupling, surface participation and a T1 budget.

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cqed/core.hpp"

namespace cqed::em {

/// 2x2 Maxwell capacitance matrix in farads. Off-diagonals are <= 0.
struct MaxwellMatrix {
    double c11 = 0, c12 = 0, c21 = 0, c22 = 0;
};

struct NormalizedMaxwell {
    MaxwellMatrix matrix;
    bool flipped_off_diagonal = false;  // input used the +C_pads convention
};

/// Accepts either sign convention for the off-diagonal and returns the
/// Maxwell form (negative mutual terms).
inline NormalizedMaxwell normalize_maxwell(MaxwellMatrix m) {
    if (!(m.c11 > 0.0) || !(m.c22 > 0.0))
        throw Error(ErrorKind::domain, "maxwell matrix: diagonal entries must be positive");
    const double scale = std::max(std::abs(m.c12), std::abs(m.c21));
    if (std::abs(m.c12 - m.c21) > 1e-12 * scale)
        throw Error(ErrorKind::domain, "maxwell matrix: not symmetric");
    NormalizedMaxwell out{m, false};
    if (m.c12 > 0.0 || m.c21 > 0.0) {
        out.matrix.c12 = -std::abs(m.c12);
        out.matrix.c21 = -std::abs(m.c21);
        out.flipped_off_diagonal = true;
    }
    return out;
}

/// (C11 C22 - C12 C21) / (C11 + C12 + C21 + C22).
inline double total_capacitance(const MaxwellMatrix &m) {
    const double num = m.c11 * m.c22 - m.c12 * m.c21;
    const double den = m.c11 + m.c12 + m.c21 + m.c22;
    const double scale = std::abs(m.c11) + std::abs(m.c12) + std::abs(m.c21) + std::abs(m.c22);
    if (std::abs(den) <= 1e-14 * scale || std::abs(num) <= 1e-14 * scale * scale)
        throw Error(ErrorKind::degenerate, "degenerate capacitance network");
    return num / den;
}

enum class Interface { ma, ms, sa, pad_up, pad_down };

inline std::string_view to_string(Interface i) {
    switch (i) {
        case Interface::ma: return "MA";
        case Interface::ms: return "MS";
        case Interface::sa: return "SA";
        case Interface::pad_up: return "pad-up";
        case Interface::pad_down: return "pad-down";
    }
    return "?";
}

inline std::optional<Interface> parse_interface(std::string_view s) {
    for (Interface i : {Interface::ma, Interface::ms, Interface::sa, Interface::pad_up, Interface::pad_down})
        if (s == to_string(i)) return i;
    return std::nullopt;
}

struct SurfaceSample {
    double x = 0, y = 0, z = 0;  // m
    double e_perp = 0;           // V/m
    double e_par = 0;            // V/m
    std::optional<double> rho;   // C/m^2
    double area = 0;             // m^2
};

struct SurfaceSampleSet {
    Interface interface = Interface::ma;
    std::vector<SurfaceSample> samples;

    void validate() const {
        if (samples.empty())
            throw Error(ErrorKind::insufficient, std::string("interface ") + std::string(to_string(interface)) + " has no samples");
        for (const auto &s : samples)
            if (!(s.area > 0.0)) throw Error(ErrorKind::domain, "surface samples need positive area weights");
    }
};

struct VolumeSample {
    double epsilon_r = 1.0;
    double e_squared = 0.0;  // |E|^2 in V^2/m^2
    double volume = 0.0;     // m^3
};

/// V_mode = sum(eps_r |E|^2 dV) / max |E|^2.
inline double mode_volume(const std::vector<VolumeSample> &samples) {
    if (samples.empty()) throw Error(ErrorKind::insufficient, "mode volume: no samples");
    double num = 0.0, peak = 0.0;
    for (const auto &s : samples) {
        num += s.epsilon_r * s.e_squared * s.volume;
        peak = std::max(peak, s.e_squared);
    }
    if (!(peak > 0.0)) throw Error(ErrorKind::degenerate, "mode volume: field is zero everywhere");
    return num / peak;
}

/// Vacuum field amplitude E0 = sqrt(hbar w_r / (2 eps0 V_mode)).
inline double vacuum_field(Frequency omega_r, double v_mode) {
    if (!(omega_r.rad_per_s() > 0.0) || !(v_mode > 0.0))
        throw Error(ErrorKind::domain, "vacuum field: frequency and mode volume must be positive");
    return std::sqrt(constants::hbar * omega_r.rad_per_s() / (2.0 * constants::epsilon0 * v_mode));
}

/// d_eff = sum_up (rho/|q|) z dA + sum_down (rho/|q|) z dA, q = sum_up rho dA.
inline double effective_distance(const SurfaceSampleSet &up, const SurfaceSampleSet &down) {
    up.validate();
    down.validate();
    auto charge = [](const SurfaceSampleSet &s) {
        double q = 0.0;
        for (const auto &p : s.samples) {
            if (!p.rho) throw Error(ErrorKind::domain, "effective distance: pad samples need a charge density");
            q += *p.rho * p.area;
        }
        return q;
    };
    const double q_up = charge(up);
    const double q_down = charge(down);
    if (q_up == 0.0 || q_down == 0.0) throw Error(ErrorKind::degenerate, "effective distance: zero total pad charge");
    if ((q_up > 0.0) == (q_down > 0.0))
        throw Error(ErrorKind::inconsistent, "effective distance: pad charges must have opposite signs");
    const double q = std::abs(q_up);
    double d = 0.0;
    for (const auto *s : {&up, &down})
        for (const auto &p : s->samples) d += *p.rho / q * p.z * p.area;
    return d;
}

/// g01 = (2 e d_eff E0 / hbar) (1/sqrt 2) (Ej / 8Ec)^(1/4).
inline Frequency dipole_g01(double d_eff, double e0, double ej, double ec) {
    if (!(d_eff > 0.0) || !(e0 > 0.0) || !(ej > 0.0) || !(ec > 0.0))
        throw Error(ErrorKind::domain, "dipole coupling: all inputs must be positive");
    const double w = 2.0 * constants::e * d_eff * e0 / constants::hbar / std::sqrt(2.0) * std::pow(ej / (8.0 * ec), 0.25);
    return Frequency::from_rad_per_s(w);
}

struct LossLayerSpec {
    Interface interface = Interface::ma;
    double epsilon_r = 0.0;
    double thickness = 0.0;  // m
    double tan_delta = 0.0;
};

/// Lossy surface layers plus the substrate permittivity that enters P_MS.
struct LayerStack {
    double substrate_epsilon_r = 11.8;
    std::vector<LossLayerSpec> layers;

    void validate() const {
        if (!(substrate_epsilon_r > 0.0)) throw Error(ErrorKind::domain, "substrate permittivity must be positive");
        for (const auto &l : layers)
            if (!(l.epsilon_r > 0.0) || !(l.thickness > 0.0) || !(l.tan_delta > 0.0))
                throw Error(ErrorKind::domain, std::string("layer ") + std::string(to_string(l.interface)) +
                                                   ": permittivity, thickness and loss tangent must be positive");
    }

    const LossLayerSpec *find(Interface i) const {
        for (const auto &l : layers)
            if (l.interface == i) return &l;
        return nullptr;
    }
};

/// Aluminium oxide on MS/MA (9.8), silicon dioxide on SA (3.8), silicon
/// substrate 11.8, tan(delta) = 0.002, 5 nm layers.
inline LayerStack default_layers() {
    LayerStack s;
    s.substrate_epsilon_r = 11.8;
    s.layers = {{Interface::ms, 9.8, 5e-9, 0.002}, {Interface::ma, 9.8, 5e-9, 0.002}, {Interface::sa, 3.8, 5e-9, 0.002}};
    return s;
}

/// Fraction of the capacitor energy q^2/2C stored in each lossy layer. Every
/// interface in `layers` must have samples; MS uses the substrate-side field,
/// MA and SA the air-side field.
inline std::map<Interface, double> participation_ratios(const std::vector<SurfaceSampleSet> &surfaces,
                                                        const LayerStack &layers, double c_tot, double q) {
    layers.validate();
    if (q == 0.0) throw Error(ErrorKind::degenerate, "participation: zero pad charge");
    if (!(c_tot > 0.0)) throw Error(ErrorKind::domain, "participation: capacitance must be positive");
    const double norm = c_tot / (q * q);
    std::map<Interface, double> out;
    for (const auto &layer : layers.layers) {
        const SurfaceSampleSet *set = nullptr;
        for (const auto &s : surfaces)
            if (s.interface == layer.interface) set = &s;
        if (set == nullptr || set->samples.empty())
            throw Error(ErrorKind::insufficient,
                        std::string("participation: missing interface ") + std::string(to_string(layer.interface)));
        set->validate();
        double perp = 0.0, par = 0.0;
        for (const auto &s : set->samples) {
            perp += s.e_perp * s.e_perp * s.area;
            par += s.e_par * s.e_par * s.area;
        }
        const double t = layer.thickness, eps = layer.epsilon_r;
        double p = 0.0;
        switch (layer.interface) {
            case Interface::ms:
                p = constants::epsilon0 * layers.substrate_epsilon_r * layers.substrate_epsilon_r / eps * t * norm * perp;
                break;
            case Interface::ma:
                p = constants::epsilon0 / eps * t * norm * perp;
                break;
            case Interface::sa:
                p = constants::epsilon0 * t * norm * (eps * par + perp / eps);
                break;
            default:
                throw Error(ErrorKind::domain, "participation: pads are not a loss layer");
        }
        out[layer.interface] = p;
    }
    return out;
}

enum class KappaConvention { half, full };

/// kappa = w_r / (2 Q_cav) (half, the default) or w_r / Q_cav (full).
inline double cavity_kappa(Frequency omega_r, double q_cav, KappaConvention conv) {
    if (!(q_cav > 0.0) || !(omega_r.rad_per_s() > 0.0))
        throw Error(ErrorKind::domain, "kappa: frequency and quality factor must be positive");
    return omega_r.rad_per_s() / (conv == KappaConvention::half ? 2.0 * q_cav : q_cav);
}

/// T_purcell = Delta^2 / (g01^2 kappa), kappa in 1/s.
inline double t_purcell(Frequency delta, Frequency g01, double kappa) {
    const double g = g01.rad_per_s(), d = delta.rad_per_s();
    if (g == 0.0 || !(kappa > 0.0)) throw Error(ErrorKind::domain, "purcell: need nonzero coupling and positive kappa");
    return d * d / (g * g * kappa);
}

/// Empty q_int / t_int mean a lossless dielectric budget.
struct LossBudget {
    double loss_sum = 0.0;  // sum P_i tan(delta_i)
    std::optional<double> q_int;
    std::optional<double> t_int;
    double t_purcell = INFINITY;
    double t1 = INFINITY;

    bool lossless() const { return !q_int.has_value(); }
};

/// 1/T1 = 1/T_int + 1/T_purcell.
inline double combine_t1(double t_int, double t_purcell) {
    if (!(t_int > 0.0) || !(t_purcell > 0.0)) throw Error(ErrorKind::domain, "T1 budget: lifetimes must be positive");
    return 1.0 / (1.0 / t_int + 1.0 / t_purcell);
}

/// Q_int = 1 / sum(P_i tan delta_i), T_int = Q_int / w_q, combined with T_purcell.
inline LossBudget q_int_and_t1(const std::map<Interface, double> &participation, const LayerStack &layers,
                               double t_purcell_s, Frequency omega_q) {
    if (!(t_purcell_s > 0.0) || !(omega_q.rad_per_s() > 0.0))
        throw Error(ErrorKind::domain, "T1 budget: Purcell time and qubit frequency must be positive");
    LossBudget b;
    for (const auto &[iface, p] : participation) {
        const LossLayerSpec *l = layers.find(iface);
        if (l == nullptr)
            throw Error(ErrorKind::insufficient, std::string("T1 budget: no loss tangent for ") + std::string(to_string(iface)));
        if (p < 0.0) throw Error(ErrorKind::domain, "T1 budget: negative participation");
        b.loss_sum += p * l->tan_delta;
    }
    b.t_purcell = t_purcell_s;
    if (b.loss_sum > 0.0) {
        b.q_int = 1.0 / b.loss_sum;
        b.t_int = *b.q_int / omega_q.rad_per_s();
        b.t1 = combine_t1(*b.t_int, t_purcell_s);
    } else {
        b.t1 = t_purcell_s;
    }
    return b;
}

}  // namespace cqed::em
