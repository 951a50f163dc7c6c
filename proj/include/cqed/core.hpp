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

// Closed-form dispersive transmon/resonator relations shared by every module.

#include <cmath>
#include <optional>
#include <string>

#include "cqed/error.hpp"
#include "cqed/units.hpp"

namespace cqed {

/// chi = chi01 - chi12/2, fixed at construction.
class DispersiveShifts {
public:
    DispersiveShifts() = default;
    DispersiveShifts(Frequency chi01, Frequency chi12)
        : chi01_(chi01), chi12_(chi12), chi_(chi01 - chi12 / 2.0) {}

    Frequency chi() const { return chi_; }
    Frequency chi01() const { return chi01_; }
    Frequency chi12() const { return chi12_; }

private:
    Frequency chi01_{}, chi12_{}, chi_{};
};

/// Lumped transmon circuit quantities, SI units.
struct CircuitParams {
    double ec_joule = 0.0;
    double capacitance_farad = 0.0;
    double ej_joule = 0.0;
    double ic_ampere = 0.0;
    double lj_henry = 0.0;
};

/// Full set of extracted qubit/resonator quantities. Sigmas are 1-sigma and
/// zero when not propagated.
struct SystemParams {
    Uncertain<Frequency> omega_r;
    Uncertain<Frequency> omega_01;
    DispersiveShifts shifts;
    struct {
        Frequency chi, chi01, chi12;
    } shift_sigma;
    Uncertain<Frequency> g01;
    Uncertain<Frequency> delta01;
    Uncertain<Frequency> delta12;
    Uncertain<Frequency> alpha;  // positive; reported as alpha/2pi
    Uncertain<double> ec_joule;
    Uncertain<double> ej_joule;
    Uncertain<double> capacitance_farad;
    Uncertain<double> ic_ampere;
    Uncertain<double> lj_henry;
};

/// chi_{n,n+1} = g_{n,n+1}^2 / Delta_{n,n+1}; carries the sign of the detuning.
inline Frequency chi_n(Frequency g, Frequency delta) {
    if (delta.rad_per_s() == 0.0) throw Error(ErrorKind::degenerate, "degenerate detuning");
    const double gw = g.rad_per_s();
    return Frequency::from_rad_per_s(gw * gw / delta.rad_per_s());
}

/// Ec = h*alpha (alpha as linear frequency), C = e^2/2Ec, Ej = (hbar w01)^2 / 8Ec,
/// Ic = 2 pi Ej / Phi0, Lj = Phi0 / (2 pi Ic).
inline CircuitParams derive_circuit(Frequency alpha, Frequency omega_01) {
    if (!(alpha.rad_per_s() > 0.0) || !(omega_01.rad_per_s() > 0.0))
        throw Error(ErrorKind::domain, "derive_circuit: anharmonicity and qubit frequency must be positive");
    CircuitParams c;
    c.ec_joule = constants::h * alpha.hz();
    c.capacitance_farad = constants::e * constants::e / (2.0 * c.ec_joule);
    const double e01 = constants::hbar * omega_01.rad_per_s();
    c.ej_joule = e01 * e01 / (8.0 * c.ec_joule);
    c.ic_ampere = two_pi * c.ej_joule / constants::phi0;
    c.lj_henry = constants::phi0 / (two_pi * c.ic_ampere);
    return c;
}

enum class QubitState { ground = 0, excited = 1 };

/// Resonator frequency conditioned on the qubit state: w_r - chi12/2 + chi*sz with
/// sz = -1 (ground) or +1 (excited). Photon number does not enter in the
/// dispersive limit; the argument is kept for symmetry with the spectroscopy API.
inline Frequency dressed_resonator_frequency(const SystemParams &p, QubitState state, int n_photons = 0) {
    if (n_photons < 0) throw Error(ErrorKind::domain, "photon number must be non-negative");
    const double sz = state == QubitState::excited ? 1.0 : -1.0;
    return p.omega_r.value - p.shifts.chi12() / 2.0 + p.shifts.chi() * sz;
}

/// Builds a consistent SystemParams from design values (no uncertainties):
/// chi01 = g^2/Delta01, Delta12 = Delta01 - alpha, chi12 = 2 g^2 / Delta12.
inline SystemParams params_from_design(Frequency omega_r, Frequency omega_01, Frequency g01, Frequency alpha) {
    SystemParams p;
    p.omega_r.value = omega_r;
    p.omega_01.value = omega_01;
    p.g01.value = g01;
    p.alpha.value = alpha;
    p.delta01.value = omega_01 - omega_r;
    p.delta12.value = p.delta01.value - alpha;
    const Frequency chi01 = chi_n(g01, p.delta01.value);
    const Frequency chi12 = chi_n(g01 * std::sqrt(2.0), p.delta12.value);
    p.shifts = DispersiveShifts(chi01, chi12);
    const CircuitParams c = derive_circuit(alpha, omega_01);
    p.ec_joule.value = c.ec_joule;
    p.ej_joule.value = c.ej_joule;
    p.capacitance_farad.value = c.capacitance_farad;
    p.ic_ampere.value = c.ic_ampere;
    p.lj_henry.value = c.lj_henry;
    return p;
}

/// T1, T2 and the pure dephasing time 1/Tphi = 1/T2 - 1/(2 T1), in seconds.
class CoherenceTimes {
public:
    static CoherenceTimes from_t1_t2(Uncertain<double> t1, Uncertain<double> t2) {
        if (!(t1.value > 0.0) || !(t2.value > 0.0))
            throw Error(ErrorKind::domain, "coherence times must be positive");
        if (t2.value > 2.0 * t1.value)
            throw Error(ErrorKind::inconsistent, "unphysical coherence times: T2 > 2 T1");
        auto tphi_of = [](const std::array<double, 2> &x) { return 1.0 / (1.0 / x[1] - 0.5 / x[0]); };
        CoherenceTimes c;
        c.t1_ = t1;
        c.t2_ = t2;
        // T2 == 2 T1 means no pure dephasing at all.
        c.tphi_.value = t2.value == 2.0 * t1.value ? INFINITY : tphi_of({t1.value, t2.value});
        c.tphi_.sigma = std::isfinite(c.tphi_.value)
                            ? propagate_sigma<2>(tphi_of, {t1.value, t2.value}, {t1.sigma, t2.sigma})
                            : 0.0;
        return c;
    }

    Uncertain<double> t1() const { return t1_; }
    Uncertain<double> t2() const { return t2_; }
    Uncertain<double> tphi() const { return tphi_; }

private:
    Uncertain<double> t1_, t2_, tphi_;
};

}  // namespace cqed
