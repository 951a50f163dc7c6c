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

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <numbers>

namespace cqed {

/// CODATA 2018 (SI-exact where the SI defines them).
namespace constants {
inline constexpr double e = 1.602176634e-19;              // C
inline constexpr double h = 6.62607015e-34;               // J s
inline constexpr double hbar = h / (2.0 * std::numbers::pi);
inline constexpr double phi0 = h / (2.0 * e);             // Wb, 2.067833848...e-15
inline constexpr double epsilon0 = 8.8541878128e-12;      // F/m
}  // namespace constants

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Angular frequency, stored in rad/s. Signed: detunings and dispersive
/// shifts are negative for a qubit below its resonator.
class Frequency {
public:
    constexpr Frequency() = default;

    static constexpr Frequency from_rad_per_s(double w) { return Frequency(w); }
    static constexpr Frequency from_hz(double f) { return Frequency(two_pi * f); }
    static constexpr Frequency from_khz(double f) { return from_hz(f * 1e3); }
    static constexpr Frequency from_mhz(double f) { return from_hz(f * 1e6); }
    static constexpr Frequency from_ghz(double f) { return from_hz(f * 1e9); }

    constexpr double rad_per_s() const { return w_; }
    constexpr double hz() const { return w_ / two_pi; }
    constexpr double khz() const { return hz() * 1e-3; }
    constexpr double mhz() const { return hz() * 1e-6; }
    constexpr double ghz() const { return hz() * 1e-9; }

    bool finite() const { return std::isfinite(w_); }

    constexpr Frequency operator-() const { return Frequency(-w_); }
    constexpr Frequency &operator+=(Frequency o) { w_ += o.w_; return *this; }
    constexpr Frequency &operator-=(Frequency o) { w_ -= o.w_; return *this; }
    friend constexpr Frequency operator+(Frequency a, Frequency b) { return Frequency(a.w_ + b.w_); }
    friend constexpr Frequency operator-(Frequency a, Frequency b) { return Frequency(a.w_ - b.w_); }
    friend constexpr Frequency operator*(Frequency a, double k) { return Frequency(a.w_ * k); }
    friend constexpr Frequency operator*(double k, Frequency a) { return Frequency(a.w_ * k); }
    friend constexpr Frequency operator/(Frequency a, double k) { return Frequency(a.w_ / k); }
    friend constexpr double operator/(Frequency a, Frequency b) { return a.w_ / b.w_; }
    friend constexpr auto operator<=>(Frequency, Frequency) = default;

private:
    constexpr explicit Frequency(double w) : w_(w) {}
    double w_ = 0.0;
};

inline Frequency abs(Frequency f) { return Frequency::from_rad_per_s(std::abs(f.rad_per_s())); }

/// A value with a symmetric 1-sigma uncertainty in the same unit.
template <class T>
struct Uncertain {
    T value{};
    T sigma{};
};

/// First-order (linearized) propagation of uncorrelated input uncertainties
/// through f, using central differences on each input.
template <std::size_t N, class F>
double propagate_sigma(F &&f, const std::array<double, N> &x, const std::array<double, N> &sigma) {
    double var = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        if (sigma[i] == 0.0) continue;
        const double step = std::max(std::abs(x[i]), std::abs(sigma[i])) * 1e-6;
        auto up = x;
        auto down = x;
        up[i] += step;
        down[i] -= step;
        const double d = (f(up) - f(down)) / (2.0 * step);
        var += d * d * sigma[i] * sigma[i];
    }
    return std::sqrt(var);
}

}  // namespace cqed
