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
#include <random>

#include "gtest/gtest.h"

#include "cqed/extraction.hpp"
#include "cqed/measurement.hpp"

using namespace cqed;

namespace {

PowerScanFeatures device_scan() {
    PowerScanFeatures f;
    f.nu_bare = {Frequency::from_ghz(7.2686), Frequency::from_mhz(0.1)};
    f.nu_dressed = {Frequency::from_ghz(7.2584), Frequency::from_mhz(0.1)};
    f.gamma_cavity = Frequency::from_khz(200.0);
    return f;
}

// Zero-photon peak at 6.4194 GHz, spacings averaging -6.82 MHz.
PeakSet device_peaks() {
    PeakSet ps;
    double c = 6419.4;
    const double spacings[] = {-6.47, -7.17, -6.64, -7.00};
    for (int n = 0; n < 5; ++n) {
        const double w = std::exp(-1.8) * std::pow(1.8, n) / std::tgamma(n + 1.0);
        ps.peaks.push_back({Frequency::from_mhz(c), w, Frequency::from_mhz(1.0)});
        if (n < 4) c += spacings[n];
    }
    return ps;
}

PeakSet poisson_peaks(double n_bar, double scale, int count) {
    PeakSet ps;
    for (int n = 0; n < count; ++n) {
        double w = scale * std::exp(-n_bar);
        for (int k = 1; k <= n; ++k) w *= n_bar / k;
        ps.peaks.push_back({Frequency::from_ghz(6.4194) - Frequency::from_mhz(6.82 * n), w, Frequency::from_mhz(1.0)});
    }
    return ps;
}

}  // namespace

TEST(TotalSplit, DeviceScan) {
    const DispersiveSplit s = total_dispersive_split(device_scan());
    EXPECT_NEAR(s.value.value.mhz(), -10.2, 1e-6);
    EXPECT_NEAR(s.value.sigma.mhz(), std::sqrt(0.02), 1e-12);
    EXPECT_FALSE(s.degenerate);
}

TEST(TotalSplit, EqualPeaksFlaggedDegenerate) {
    PowerScanFeatures f = device_scan();
    f.nu_dressed = f.nu_bare;
    const DispersiveSplit s = total_dispersive_split(f);
    EXPECT_EQ(s.value.value.rad_per_s(), 0.0);
    EXPECT_TRUE(s.degenerate);
    EXPECT_THROW(f.validate(), Error);
}

TEST(ChiFromPeaks, DevicePeakSet) {
    const auto chi = chi_from_peaks(device_peaks());
    EXPECT_NEAR(chi.value.mhz(), -3.41, 1e-9);
    EXPECT_NEAR(chi.sigma.mhz(), 0.08, 0.005);
}

TEST(ChiFromPeaks, EquallySpacedIsExact) {
    const auto chi = chi_from_peaks(poisson_peaks(1.0, 1.0, 6));
    EXPECT_NEAR(chi.value.mhz(), -3.41, 1e-9);
    EXPECT_NEAR(chi.sigma.mhz(), 0.0, 1e-9);
}

TEST(ChiFromPeaks, ThreePeaks) {
    PeakSet ps;
    for (double c : {6000.0, 6006.7, 6013.6}) ps.peaks.push_back({Frequency::from_mhz(c), 1.0, {}});
    const auto chi = chi_from_peaks(ps);
    EXPECT_NEAR(chi.value.mhz(), 3.4, 1e-9);
    // spacings 6.7, 6.9: sample std 0.1414, k = 2.
    EXPECT_NEAR(chi.sigma.mhz(), std::sqrt(0.02) / (2.0 * std::sqrt(2.0)), 1e-9);
}

TEST(ChiFromPeaks, InsufficientPeaks) {
    PeakSet ps;
    ps.peaks.push_back({Frequency::from_ghz(6.0), 1.0, {}});
    try {
        chi_from_peaks(ps);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::insufficient);
        EXPECT_STREQ(e.what(), "insufficient peaks");
    }
}

TEST(SolveShifts, DeviceValues) {
    const auto s = solve_shifts({Frequency::from_mhz(-10.2), {}}, {Frequency::from_mhz(-3.41), {}});
    EXPECT_NEAR(s.shifts.chi12().mhz(), -13.58, 1e-9);
    EXPECT_NEAR(s.shifts.chi01().mhz(), -10.2, 1e-9);
    EXPECT_NEAR(s.shifts.chi().mhz(), -3.41, 1e-9);
}

TEST(SolveShifts, SplitEqualsChiGivesZeroChi12) {
    const auto s = solve_shifts({Frequency::from_mhz(-3.0), {}}, {Frequency::from_mhz(-3.0), {}});
    EXPECT_EQ(s.shifts.chi12().rad_per_s(), 0.0);
}

TEST(SolveShifts, RoundTrip) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    for (int i = 0; i < 500; ++i) {
        const Frequency split = Frequency::from_mhz(u(rng)), chi = Frequency::from_mhz(u(rng));
        const auto s = solve_shifts({split, {}}, {chi, {}});
        const Frequency rebuilt = s.shifts.chi() + s.shifts.chi12() / 2.0;
        EXPECT_NEAR(rebuilt.rad_per_s(), split.rad_per_s(), 1e-12 * (1.0 + std::abs(split.rad_per_s())));
    }
}

TEST(BareQubitFrequency, DevicePeak) {
    const Frequency w = bare_qubit_frequency(Frequency::from_ghz(6.4194), Frequency::from_mhz(-10.2));
    EXPECT_NEAR(w.ghz(), 6.4296, 1e-9);
    EXPECT_NEAR((w + Frequency::from_mhz(-10.2)).ghz(), 6.4194, 1e-12);
    EXPECT_EQ(bare_qubit_frequency(Frequency::from_ghz(6.4194), {}).rad_per_s(), Frequency::from_ghz(6.4194).rad_per_s());
}

TEST(FullExtraction, DeviceInputs) {
    const SystemParams p = full_extraction(device_scan(), device_peaks(), {Frequency::from_ghz(6.4194), {}});
    EXPECT_NEAR(p.g01.value.mhz(), 92.5, 1.0);
    EXPECT_NEAR(p.delta12.value.mhz(), -1260.0, 40.0);
    EXPECT_NEAR(p.alpha.value.mhz(), 421.0, 5.0);
    EXPECT_NEAR(p.capacitance_farad.value * 1e15, 46.0, 0.5);
    EXPECT_NEAR(p.ic_ampere.value * 1e9, 24.7, 0.1);
    EXPECT_NEAR(p.lj_henry.value * 1e9, 13.3, 0.1);
    EXPECT_LE(p.g01.sigma.mhz(), 1.0);
    EXPECT_LE(p.delta12.sigma.mhz(), 40.0);
    EXPECT_LE(p.alpha.sigma.mhz(), 84.0);
}

TEST(FullExtraction, InconsistentSigns) {
    PowerScanFeatures f = device_scan();
    std::swap(f.nu_bare, f.nu_dressed);  // positive split with a qubit below the cavity
    try {
        full_extraction(f, device_peaks(), {Frequency::from_ghz(6.4194), {}});
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::inconsistent);
        EXPECT_NE(std::string(e.what()).find("inconsistent signs"), std::string::npos);
    }
}

TEST(FullExtraction, StageLabelOnSubError) {
    PeakSet one;
    one.peaks.push_back({Frequency::from_ghz(6.0), 1.0, {}});
    try {
        full_extraction(device_scan(), one, {Frequency::from_ghz(6.0), {}});
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::insufficient);
        EXPECT_STREQ(e.what(), "peak spacing: insufficient peaks");
    }
}

TEST(FullExtraction, Deterministic) {
    const auto a = full_extraction(device_scan(), device_peaks(), {Frequency::from_ghz(6.4194), {}});
    const auto b = full_extraction(device_scan(), device_peaks(), {Frequency::from_ghz(6.4194), {}});
    EXPECT_EQ(a.g01.value.rad_per_s(), b.g01.value.rad_per_s());
    EXPECT_EQ(a.lj_henry.sigma, b.lj_henry.sigma);
}

TEST(FullExtraction, ClosedLoopWithForwardModel) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> g(40.0, 120.0), a(250.0, 450.0), d(600.0, 1200.0);
    for (int i = 0; i < 50; ++i) {
        const Frequency wr = Frequency::from_ghz(7.2686);
        const SystemParams truth = params_from_design(wr, wr - Frequency::from_mhz(d(rng)), Frequency::from_mhz(g(rng)),
                                                      Frequency::from_mhz(a(rng)));
        const PowerScanFeatures f = power_scan_features(truth, Frequency::from_khz(200.0));
        const PeakSet peaks = spectroscopy_peaks(truth, 1.8, 6, Frequency::from_mhz(1.0));
        const SystemParams got = full_extraction(f, peaks, {peaks.peaks[0].center, {}});
        EXPECT_NEAR(got.g01.value / truth.g01.value, 1.0, 0.01);
        EXPECT_NEAR(got.alpha.value / truth.alpha.value, 1.0, 0.01);
        EXPECT_NEAR(got.capacitance_farad.value / truth.capacitance_farad.value, 1.0, 0.01);
    }
}

TEST(FullExtraction, UncertaintyMonotone) {
    const Uncertain<Frequency> zero{Frequency::from_ghz(6.4194), Frequency::from_mhz(0.05)};
    const SystemParams base = full_extraction(device_scan(), device_peaks(), zero);
    PowerScanFeatures wider = device_scan();
    wider.nu_dressed.sigma = Frequency::from_mhz(0.3);
    const SystemParams more = full_extraction(wider, device_peaks(), zero);
    auto ge = [](double a, double b) { return a >= b * (1.0 - 1e-12); };
    EXPECT_TRUE(ge(more.shift_sigma.chi01.rad_per_s(), base.shift_sigma.chi01.rad_per_s()));
    EXPECT_TRUE(ge(more.shift_sigma.chi12.rad_per_s(), base.shift_sigma.chi12.rad_per_s()));
    EXPECT_TRUE(ge(more.omega_01.sigma.rad_per_s(), base.omega_01.sigma.rad_per_s()));
    EXPECT_TRUE(ge(more.g01.sigma.rad_per_s(), base.g01.sigma.rad_per_s()));
    EXPECT_TRUE(ge(more.delta12.sigma.rad_per_s(), base.delta12.sigma.rad_per_s()));
    EXPECT_TRUE(ge(more.alpha.sigma.rad_per_s(), base.alpha.sigma.rad_per_s()));
    EXPECT_TRUE(ge(more.capacitance_farad.sigma, base.capacitance_farad.sigma));
    EXPECT_TRUE(ge(more.ic_ampere.sigma, base.ic_ampere.sigma));
    EXPECT_TRUE(ge(more.lj_henry.sigma, base.lj_henry.sigma));
}

TEST(PoissonFit, DeviceIntensities) {
    const auto fit = poisson_fit(device_peaks());
    EXPECT_NEAR(fit.n_bar, 1.8, 0.1);
}

TEST(PoissonFit, ExactModelData) {
    const auto fit = poisson_fit(poisson_peaks(2.0, 3.5, 10));
    EXPECT_NEAR(fit.n_bar, 2.0, 1e-9);
    EXPECT_NEAR(fit.scale, 3.5, 1e-9);
    EXPECT_NEAR(fit.residual, 0.0, 1e-9);
}

TEST(PoissonFit, ScaleInvariant) {
    PeakSet ps = poisson_peaks(4.1, 1.0, 12);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> eps(0.0, 0.05);
    for (auto &p : ps.peaks) p.intensity *= 1.0 + eps(rng);
    const auto a = poisson_fit(ps);
    for (auto &p : ps.peaks) p.intensity *= 37.0;
    const auto b = poisson_fit(ps);
    EXPECT_NEAR(b.n_bar, a.n_bar, 1e-7);  // both fits stop at the optimizer tolerance
    EXPECT_NEAR(b.scale / a.scale, 37.0, 1e-7);
}

TEST(PoissonFit, NoisyRecovery) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> eps(0.0, 0.05);
    int ok = 0;
    for (int trial = 0; trial < 100; ++trial) {
        PeakSet ps = poisson_peaks(4.1, 1.0, 12);
        for (auto &p : ps.peaks) p.intensity = std::max(0.0, p.intensity * (1.0 + eps(rng)));
        ok += std::abs(poisson_fit(ps).n_bar - 4.1) <= 0.2;
    }
    EXPECT_GE(ok, 95);
}

TEST(PoissonFit, NoSignal) {
    PeakSet ps = poisson_peaks(2.0, 0.0, 5);
    try {
        poisson_fit(ps);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::no_signal);
        EXPECT_STREQ(e.what(), "no signal");
    }
}

TEST(PhotonsFromPower, Values) {
    const Frequency nu = Frequency::from_ghz(6.42), gamma = Frequency::from_khz(200.0);
    const double h = 6.62607015e-34;
    EXPECT_NEAR(photons_from_power(h * 6.42e9 * 200e3, nu, gamma), 1.0, 1e-12);
    EXPECT_NEAR(photons_from_power(1e-18, nu, gamma), 1e-18 / (h * 6.42e9 * 200e3), 1e-12);
    EXPECT_NEAR(photons_from_power(1e-18, nu, gamma), 1.18, 0.01);
    EXPECT_DOUBLE_EQ(photons_from_power(2e-18, nu, gamma), 2.0 * photons_from_power(1e-18, nu, gamma));
    EXPECT_THROW(photons_from_power(0.0, nu, gamma), Error);
    EXPECT_THROW(photons_from_power(1e-18, nu, Frequency{}), Error);
}
