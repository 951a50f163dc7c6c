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


#include <cmath>
#include <map>
#include <random>

#include "gtest/gtest.h"

#include "cqed/em.hpp"

using namespace cqed;
using namespace cqed::em;

namespace {

constexpr double kEps0 = 8.8541878128e-12;

// Parallel plates of side L and gap d filled with substrate eps_s, carrying
// sigma(x, y) = s0 (1 + (x/L)^2)(1 + (y/L)^2). The field between the plates
// is sigma / (eps0 eps_s); the outer faces see a weak field k sigma / eps0.
struct PlateCase {
    double L = 200e-6, d = 10e-6, eps_s = 11.8, s0 = 1e-5, k_out = 0.05;

    // Continuous integrals in closed form: int (1+u^2) = 4/3, int (1+u^2)^2 = 28/15 over [0,1].
    double q() const { return s0 * L * L * (4.0 / 3.0) * (4.0 / 3.0); }
    double sigma2_integral() const { return s0 * s0 * L * L * (28.0 / 15.0) * (28.0 / 15.0); }
    double capacitance() const { return q() * q() * kEps0 * eps_s / (d * sigma2_integral()); }

    double sigma(double x, double y) const { return s0 * (1 + x * x / (L * L)) * (1 + y * y / (L * L)); }

    std::vector<SurfaceSampleSet> sample(int n) const {
        std::vector<SurfaceSampleSet> out{{Interface::pad_up, {}}, {Interface::pad_down, {}}, {Interface::ms, {}},
                                          {Interface::ma, {}},     {Interface::sa, {}}};
        const double h = L / n, area = h * h;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double x = (i + 0.5) * h, y = (j + 0.5) * h, s = sigma(x, y);
                const double e_in = s / (kEps0 * eps_s), e_out = k_out * s / kEps0;
                out[0].samples.push_back({x, y, d, e_in, 0.0, s, area});
                out[1].samples.push_back({x, y, 0.0, e_in, 0.0, -s, area});
                out[2].samples.push_back({x, y, 0.0, e_in, 0.0, std::nullopt, area});
                out[2].samples.push_back({x, y, d, e_in, 0.0, std::nullopt, area});
                out[3].samples.push_back({x, y, d, e_out, 0.0, std::nullopt, area});
                out[4].samples.push_back({x + L, y, d, 0.5 * e_out, 0.5 * e_out, std::nullopt, area});
            }
        return out;
    }

    // Hand-derived participation ratios for t = 5 nm default layers.
    double p_ms(double t, double eps_ms) const { return 2.0 * eps_s * t / (eps_ms * d); }
    double p_ma(double t, double eps_ma) const {
        const double e2 = k_out * k_out * sigma2_integral() / (kEps0 * kEps0);
        return kEps0 / eps_ma * t * capacitance() / (q() * q()) * e2;
    }
    double p_sa(double t, double eps_sa) const {
        const double e2 = 0.25 * k_out * k_out * sigma2_integral() / (kEps0 * kEps0);
        return kEps0 * t * capacitance() / (q() * q()) * (eps_sa * e2 + e2 / eps_sa);
    }
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(TotalCapacitance, DiagonalSeries) {
    EXPECT_NEAR(total_capacitance({2e-15, 0.0, 0.0, 2e-15}), 1e-15, 1e-27);
}

TEST(TotalCapacitance, PadsPlusHalfGround) {
    const double cg = 30e-15, cp = 20e-15;
    EXPECT_NEAR(total_capacitance({cg + cp, -cp, -cp, cg + cp}), cp + cg / 2.0, 1e-27);
}

TEST(TotalCapacitance, HomogeneousAndPermutationInvariant) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(1.0, 100.0);
    for (int i = 0; i < 200; ++i) {
        const double c12 = -u(rng) * 1e-15;
        const MaxwellMatrix m{u(rng) * 1e-15 - c12, c12, c12, u(rng) * 1e-15 - c12};
        const double c = total_capacitance(m);
        EXPECT_NEAR(total_capacitance({3 * m.c11, 3 * m.c12, 3 * m.c21, 3 * m.c22}) / c, 3.0, 1e-12);
        EXPECT_NEAR(total_capacitance({m.c22, m.c21, m.c12, m.c11}) / c, 1.0, 1e-12);
    }
}

TEST(TotalCapacitance, Degenerate) {
    try {
        total_capacitance({1e-15, -1e-15, -1e-15, 1e-15});
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::degenerate);
        EXPECT_STREQ(e.what(), "degenerate capacitance network");
    }
}

TEST(NormalizeMaxwell, FlipsPositiveMutualTerms) {
    const auto n = normalize_maxwell({50e-15, 20e-15, 20e-15, 50e-15});
    EXPECT_TRUE(n.flipped_off_diagonal);
    EXPECT_EQ(n.matrix.c12, -20e-15);
    EXPECT_NEAR(total_capacitance(n.matrix), 20e-15 + 15e-15, 1e-27);
    EXPECT_FALSE(normalize_maxwell({50e-15, -20e-15, -20e-15, 50e-15}).flipped_off_diagonal);
    EXPECT_THROW(normalize_maxwell({50e-15, -20e-15, -21e-15, 50e-15}), Error);
    EXPECT_THROW(normalize_maxwell({0.0, 0.0, 0.0, 1e-15}), Error);
}

TEST(ModeVolume, BoxCases) {
    const double v = 1e-6;
    std::vector<VolumeSample> uniform, half;
    for (int i = 0; i < 10; ++i) {
        uniform.push_back({1.0, 4.0, v / 10});
        half.push_back({1.0, i < 5 ? 4.0 : 0.0, v / 10});
    }
    EXPECT_NEAR(mode_volume(uniform), v, 1e-18);
    EXPECT_NEAR(mode_volume(half), v / 2, 1e-18);
    // two regions: eps_r 1/11.8 on one half, 1 on the other
    std::vector<VolumeSample> two{{1.0 / 11.8, 1.0, v / 2}, {1.0, 1.0, v / 2}};
    EXPECT_NEAR(mode_volume(two), v / 2 * (1.0 + 1.0 / 11.8), 1e-18);
    EXPECT_THROW(mode_volume({{1.0, 0.0, v}}), Error);
    EXPECT_THROW(mode_volume({}), Error);
}

TEST(ModeVolume, SineModeRefines) {
    // |E|^2 = sin^2(pi x/a) sin^2(pi z/c) in a box: V_mode -> V/4 as the peak sample approaches 1.
    const double V = 1e-6;
    std::vector<double> ratios;
    for (int n : {8, 16, 32, 64}) {
        std::vector<VolumeSample> s;
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                const double e = std::pow(std::sin(M_PI * (i + 0.5) / n) * std::sin(M_PI * (k + 0.5) / n), 2);
                s.push_back({1.0, e, V / (n * n)});
            }
        ratios.push_back(mode_volume(s) / (V / 4));
    }
    for (std::size_t i = 1; i < ratios.size(); ++i) EXPECT_LT(std::abs(ratios[i] - 1), std::abs(ratios[i - 1] - 1));
    EXPECT_NEAR(ratios.back(), 1.0, 2e-3);
}

TEST(VacuumField, HandEvaluation) {
    const double hbar = 6.62607015e-34 / (2 * M_PI);
    const Frequency w = Frequency::from_ghz(7.2686);
    EXPECT_NEAR(rel(vacuum_field(w, 2e-6), std::sqrt(hbar * w.rad_per_s() / (2 * kEps0 * 2e-6))), 0.0, 1e-14);
    EXPECT_THROW(vacuum_field(w, 0.0), Error);
}

TEST(EffectiveDistance, UniformPads) {
    SurfaceSampleSet up{Interface::pad_up, {{0, 0, 5e-6, 0, 0, 2e-5, 1e-10}}};
    SurfaceSampleSet down{Interface::pad_down, {{0, 0, -5e-6, 0, 0, -2e-5, 1e-10}}};
    EXPECT_NEAR(effective_distance(up, down), 10e-6, 1e-18);
}

TEST(EffectiveDistance, RedistributionAndTranslation) {
    SurfaceSampleSet up{Interface::pad_up, {{0, 0, 4e-6, 0, 0, 1e-5, 1e-10}, {0, 0, 6e-6, 0, 0, 1e-5, 1e-10}}};
    SurfaceSampleSet down{Interface::pad_down, {{0, 0, -5e-6, 0, 0, -2e-5, 1e-10}}};
    const double d0 = effective_distance(up, down);
    EXPECT_NEAR(d0, 10e-6, 1e-18);
    // symmetric redistribution about the centroid
    up.samples[0].rho = 1.5e-5;
    up.samples[0].z = 5e-6 - 1e-6 / 1.5;
    up.samples[1].rho = 0.5e-5;
    up.samples[1].z = 5e-6 + 2e-6;
    EXPECT_NEAR(effective_distance(up, down), d0, 1e-17);
    for (auto *s : {&up, &down})
        for (auto &p : s->samples) p.z += 3e-3;
    EXPECT_NEAR(effective_distance(up, down), d0, 1e-15);
}

TEST(EffectiveDistance, TriangularStripOracle) {
    // Strip along z in [0, h] with rho proportional to z (triangular);
    // centroid 2h/3. Opposite pad is a point charge at z = 0.
    const double h = 20e-6;
    for (int n : {10, 100, 1000}) {
        SurfaceSampleSet up{Interface::pad_up, {}};
        const double dz = h / n;
        double q = 0.0;
        for (int i = 0; i < n; ++i) {
            const double z = (i + 0.5) * dz;
            up.samples.push_back({0, 0, z, 0, 0, z, dz});
            q += z * dz;
        }
        SurfaceSampleSet down{Interface::pad_down, {{0, 0, 0.0, 0, 0, -q, 1.0}}};
        EXPECT_NEAR(effective_distance(up, down) / (2.0 * h / 3.0), 1.0, 1.0 / (n * n));
    }
}

TEST(EffectiveDistance, Errors) {
    SurfaceSampleSet up{Interface::pad_up, {{0, 0, 1e-6, 0, 0, 1e-5, 1e-10}}};
    SurfaceSampleSet zero{Interface::pad_down, {{0, 0, 0, 0, 0, 0.0, 1e-10}}};
    SurfaceSampleSet same{Interface::pad_down, {{0, 0, 0, 0, 0, 1e-5, 1e-10}}};
    SurfaceSampleSet none{Interface::pad_down, {{0, 0, 0, 0, 0, std::nullopt, 1e-10}}};
    EXPECT_THROW(effective_distance(up, zero), Error);
    EXPECT_THROW(effective_distance(up, same), Error);
    EXPECT_THROW(effective_distance(up, none), Error);
}

TEST(DipoleCoupling, Scaling) {
    const double ec = 6.62607015e-34 * 421e6, ej = 8.0 * ec;
    const Frequency g1 = dipole_g01(10e-6, 0.3, ej, ec);
    EXPECT_NEAR(dipole_g01(20e-6, 0.3, ej, ec) / g1, 2.0, 1e-14);
    const double hbar = 6.62607015e-34 / (2 * M_PI), e = 1.602176634e-19;
    EXPECT_NEAR(rel(g1.rad_per_s(), 2 * e * 10e-6 * 0.3 / hbar / std::sqrt(2.0)), 0.0, 1e-14);
    EXPECT_THROW(dipole_g01(0.0, 0.3, ej, ec), Error);
}

TEST(Participation, ParallelPlateOracle) {
    const PlateCase pc;
    const auto layers = default_layers();
    const auto p = participation_ratios(pc.sample(64), layers, pc.capacitance(), pc.q());
    EXPECT_NEAR(p.at(Interface::ms) / pc.p_ms(5e-9, 9.8), 1.0, 0.01);
    EXPECT_NEAR(p.at(Interface::ma) / pc.p_ma(5e-9, 9.8), 1.0, 0.01);
    EXPECT_NEAR(p.at(Interface::sa) / pc.p_sa(5e-9, 3.8), 1.0, 0.01);
    double total = 0.0;
    for (const auto &[k, v] : p) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        total += v;
    }
    EXPECT_LE(total, 1.0);
}

TEST(Participation, GridRefinementConverges) {
    const PlateCase pc;
    const auto layers = default_layers();
    std::vector<double> errors;
    std::vector<std::map<Interface, double>> levels;
    for (int n : {4, 8, 16, 32, 64}) {
        levels.push_back(participation_ratios(pc.sample(n), layers, pc.capacitance(), pc.q()));
        errors.push_back(std::abs(levels.back().at(Interface::ms) / pc.p_ms(5e-9, 9.8) - 1.0));
    }
    for (std::size_t i = 1; i < errors.size(); ++i) EXPECT_LT(errors[i], errors[i - 1]);
    for (Interface i : {Interface::ms, Interface::ma, Interface::sa})
        EXPECT_LT(std::abs(levels[4].at(i) / levels[3].at(i) - 1.0), 0.01);
}

TEST(Participation, LinearInThicknessAndZeroField) {
    const PlateCase pc;
    auto layers = default_layers();
    const auto surfaces = pc.sample(8);
    const auto p1 = participation_ratios(surfaces, layers, pc.capacitance(), pc.q());
    for (auto &l : layers.layers) l.thickness *= 3.0;
    const auto p3 = participation_ratios(surfaces, layers, pc.capacitance(), pc.q());
    for (const auto &[k, v] : p1) EXPECT_NEAR(p3.at(k) / v, 3.0, 1e-12);

    auto dark = surfaces;
    for (auto &s : dark[3].samples) s.e_perp = s.e_par = 0.0;
    EXPECT_EQ(participation_ratios(dark, default_layers(), pc.capacitance(), pc.q()).at(Interface::ma), 0.0);
}

TEST(Participation, MissingInterfaceNamed) {
    const PlateCase pc;
    auto surfaces = pc.sample(4);
    surfaces.erase(surfaces.begin() + 4);
    try {
        participation_ratios(surfaces, default_layers(), pc.capacitance(), pc.q());
        FAIL();
    } catch (const Error &e) {
        EXPECT_NE(std::string(e.what()).find("SA"), std::string::npos);
    }
}

TEST(Budget, CombinationLaw) {
    EXPECT_NEAR(combine_t1(57e-6, 156e-6) * 1e6, 41.75, 0.01);
    EXPECT_NEAR(combine_t1(57e-6, 1e30), 57e-6, 1e-15);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(1e-6, 1e-3);
    for (int i = 0; i < 500; ++i) {
        const double a = u(rng), b = u(rng);
        EXPECT_LE(combine_t1(a, b), std::min(a, b));
    }
}

TEST(Budget, QintFromParticipation) {
    LayerStack layers = default_layers();
    const std::map<Interface, double> p{{Interface::ms, 4.4e-4}};
    const auto b = q_int_and_t1(p, layers, 156e-6, Frequency::from_ghz(6.4296));
    ASSERT_TRUE(b.q_int.has_value());
    EXPECT_NEAR(*b.q_int / 1.136e6, 1.0, 1e-3);
    EXPECT_NEAR(*b.t_int, *b.q_int / Frequency::from_ghz(6.4296).rad_per_s(), 1e-15);
    EXPECT_LE(b.t1, std::min(*b.t_int, b.t_purcell));
}

TEST(Budget, LosslessMarker) {
    const std::map<Interface, double> p{{Interface::ms, 0.0}};
    const auto b = q_int_and_t1(p, default_layers(), 156e-6, Frequency::from_ghz(6.4296));
    EXPECT_TRUE(b.lossless());
    EXPECT_FALSE(b.t_int.has_value());
    EXPECT_EQ(b.t1, 156e-6);
}

TEST(Purcell, KappaConventions) {
    const Frequency wr = Frequency::from_ghz(7.2686);
    EXPECT_DOUBLE_EQ(cavity_kappa(wr, 1e4, KappaConvention::half) * 2.0, cavity_kappa(wr, 1e4, KappaConvention::full));
    const double kappa = cavity_kappa(wr, 1e4, KappaConvention::half);
    const Frequency delta = Frequency::from_mhz(839.0), g = Frequency::from_mhz(97.0);
    const double expected = std::pow(delta.rad_per_s() / g.rad_per_s(), 2) / kappa;
    EXPECT_NEAR(t_purcell(delta, g, kappa), expected, 1e-12 * expected);
    EXPECT_THROW(cavity_kappa(wr, 0.0, KappaConvention::half), Error);
}

TEST(Layers, DefaultsAndValidation) {
    const auto d = default_layers();
    EXPECT_EQ(d.substrate_epsilon_r, 11.8);
    ASSERT_NE(d.find(Interface::sa), nullptr);
    EXPECT_EQ(d.find(Interface::sa)->epsilon_r, 3.8);
    EXPECT_EQ(d.find(Interface::ms)->thickness, 5e-9);
    EXPECT_EQ(d.find(Interface::ma)->tan_delta, 0.002);
    LayerStack bad = d;
    bad.layers[0].tan_delta = 0.0;
    EXPECT_THROW(bad.validate(), Error);
    EXPECT_EQ(parse_interface("pad-up"), Interface::pad_up);
    EXPECT_FALSE(parse_interface("XY").has_value());
}
