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

// Single-qubit data re-uploading regressor: shot-sampled <Z>, parameter-shift
// gradients and Adam.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <sstream>
#include <vector>

#include "cqed/error.hpp"

namespace cqed::qml {

/// Input encoding x -> offset + scale * x. A zero offset pins every circuit to
/// the identity at x = 0, so the default lifts the encoded range to [1, 3].
struct Encoding {
    double offset = 1.0;
    double scale = 2.0;
    double operator()(double x) const { return offset + scale * x; }
};

/// Layer l applies RY(theta[2l] * x_enc) then RZ(theta[2l+1]); the readout is
/// <Z> on the final state, mapped to (1 - <Z>)/2.
struct PqcModel {
    std::vector<double> theta;
    int layers = 7;
    int n_shots = 0;  // 0 = exact expectation
    Encoding encoding;

    static PqcModel zeros(int layers, int n_shots) {
        PqcModel m;
        m.layers = layers;
        m.n_shots = n_shots;
        m.theta.assign(static_cast<std::size_t>(2 * layers), 0.0);
        return m;
    }
    std::size_t n_params() const { return static_cast<std::size_t>(2 * layers); }
    void validate() const {
        if (layers < 1) throw Error(ErrorKind::domain, "pqc: need at least one layer");
        if (theta.size() != n_params()) throw Error(ErrorKind::domain, "pqc: parameter count does not match layer layout");
        if (n_shots < 0) throw Error(ErrorKind::domain, "pqc: shots must be >= 0");
    }
};

/// Rotation angles actually fed to the gates for input x.
inline std::vector<double> gate_angles(const PqcModel &m, double x) {
    std::vector<double> a(m.theta);
    const double xe = m.encoding(x);
    for (std::size_t l = 0; l < a.size(); l += 2) a[l] *= xe;
    return a;
}

/// Exact <Z> of the circuit with the given gate angles (even: RY, odd: RZ).
inline double expectation_z(std::span<const double> angles) {
    using c = std::complex<double>;
    c a0(1.0), a1(0.0);
    for (std::size_t k = 0; k < angles.size(); ++k) {
        const double h = angles[k] / 2.0;
        if (k % 2 == 0) {
            const double co = std::cos(h), si = std::sin(h);
            const c n0 = co * a0 - si * a1;
            const c n1 = si * a0 + co * a1;
            a0 = n0, a1 = n1;
        } else {
            a0 *= std::polar(1.0, -h);
            a1 *= std::polar(1.0, h);
        }
    }
    return std::norm(a0) - std::norm(a1);
}

/// Runs circuits, sampling shots when requested, and counts executions.
class Executor {
public:
    Executor(int n_shots, std::uint64_t seed) : shots_(n_shots), rng_(seed) {}

    /// Estimated <Z>: exact when shots == 0, otherwise from a binomial draw of |1> counts.
    double measure_z(std::span<const double> angles) {
        ++circuits_;
        const double z = expectation_z(angles);
        if (shots_ == 0) return z;
        const double p1 = std::clamp((1.0 - z) / 2.0, 0.0, 1.0);
        std::binomial_distribution<int> draw(shots_, p1);
        return 1.0 - 2.0 * static_cast<double>(draw(rng_)) / shots_;
    }

    std::int64_t circuits() const { return circuits_; }

private:
    int shots_;
    std::mt19937_64 rng_;
    std::int64_t circuits_ = 0;
};

inline double predict(const PqcModel &m, double x, Executor &ex) {
    const auto a = gate_angles(m, x);
    return (1.0 - ex.measure_z(a)) / 2.0;
}

inline double predict(const PqcModel &m, double x, std::uint64_t seed) {
    Executor ex(m.n_shots, seed);
    return predict(m, x, ex);
}

/// d/dtheta of (prediction - target)^2 by the parameter-shift rule on each gate
/// angle, chained through the encoding for RY parameters. `prediction` is the
/// forward-pass value; exactly 2 * n_params circuits are executed.
inline std::vector<double> parameter_shift_gradient(const PqcModel &m, double x, double target, double prediction,
                                                    Executor &ex) {
    const auto base = gate_angles(m, x);
    const double xe = m.encoding(x);
    std::vector<double> grad(m.n_params());
    auto shifted = base;
    for (std::size_t j = 0; j < base.size(); ++j) {
        shifted[j] = base[j] + std::numbers::pi / 2.0;
        const double zp = ex.measure_z(shifted);
        shifted[j] = base[j] - std::numbers::pi / 2.0;
        const double zm = ex.measure_z(shifted);
        shifted[j] = base[j];
        const double dz_dangle = (zp - zm) / 2.0;
        const double dangle_dtheta = j % 2 == 0 ? xe : 1.0;
        const double dpred = -0.5 * dz_dangle * dangle_dtheta;
        grad[j] = 2.0 * (prediction - target) * dpred;
    }
    return grad;
}

struct AdamState {
    std::vector<double> m, v;
    std::int64_t step = 0;
    double lr = 0.05, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    static AdamState for_size(std::size_t n, double lr = 0.05) {
        AdamState s;
        s.m.assign(n, 0.0);
        s.v.assign(n, 0.0);
        s.lr = lr;
        return s;
    }
};

/// Bias-corrected Adam update of theta in place.
inline void adam_step(AdamState &s, std::vector<double> &theta, std::span<const double> grad) {
    if (grad.size() != theta.size() || s.m.size() != theta.size() || s.v.size() != theta.size())
        throw Error(ErrorKind::domain, "adam: dimension mismatch");
    ++s.step;
    const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
    const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * grad[i];
        s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * grad[i] * grad[i];
        theta[i] -= s.lr * (s.m[i] / c1) / (std::sqrt(s.v[i] / c2) + s.eps);
    }
}

/// Targets min-max normalized into [0,1]; a constant target maps to 0.
struct TrainingSet {
    std::vector<double> xs;
    std::vector<double> ys_raw;
    std::vector<double> ys;
    double y_min = 0.0, y_max = 0.0;

    static TrainingSet from_raw(std::vector<double> xs, std::vector<double> ys_raw) {
        if (xs.size() != ys_raw.size() || xs.empty())
            throw Error(ErrorKind::domain, "training set: need equally many x and y values");
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (!(xs[i] >= 0.0 && xs[i] <= 1.0)) throw Error(ErrorKind::domain, "training set: x must lie in [0,1]");
            if (i > 0 && xs[i] < xs[i - 1]) throw Error(ErrorKind::domain, "training set: x must be sorted");
            if (!std::isfinite(ys_raw[i])) throw Error(ErrorKind::domain, "training set: non-finite target");
        }
        TrainingSet t;
        t.xs = std::move(xs);
        t.ys_raw = std::move(ys_raw);
        const auto [lo, hi] = std::minmax_element(t.ys_raw.begin(), t.ys_raw.end());
        t.y_min = *lo;
        t.y_max = *hi;
        const double range = t.y_max - t.y_min;
        for (double y : t.ys_raw) t.ys.push_back(range > 0.0 ? (y - t.y_min) / range : 0.0);
        return t;
    }

    double denormalize(double y) const { return y_min + y * (y_max - y_min); }
};

enum class Init { zeros, uniform };

struct TrainOptions {
    int epochs = 500;
    std::uint64_t seed = 0;
    double lr = 0.05;
    Init init = Init::uniform;
    double init_range = 1.0;  // uniform init in [-range, range]
};

struct TrainResult {
    PqcModel model;
    std::vector<double> mse_history;  // entry k: MSE at parameters after k updates
    std::int64_t circuits = 0;
};

inline double mean_squared_error(const PqcModel &m, const TrainingSet &d, Executor &ex) {
    double s = 0.0;
    for (std::size_t i = 0; i < d.xs.size(); ++i) {
        const double e = predict(m, d.xs[i], ex) - d.ys[i];
        s += e * e;
    }
    return s / static_cast<double>(d.xs.size());
}

/// Full-batch Adam on the MSE, starting from the model's current parameters.
inline TrainResult train_from(PqcModel model, const TrainingSet &data, const TrainOptions &opt) {
    model.validate();
    Executor ex(model.n_shots, opt.seed ^ 0x5bd1e995ULL);
    AdamState adam = AdamState::for_size(model.n_params(), opt.lr);
    TrainResult r;
    const auto n = static_cast<double>(data.xs.size());
    for (int it = 0; it < opt.epochs; ++it) {
        std::vector<double> grad(model.n_params(), 0.0);
        double mse = 0.0;
        for (std::size_t i = 0; i < data.xs.size(); ++i) {
            const double p = predict(model, data.xs[i], ex);
            mse += (p - data.ys[i]) * (p - data.ys[i]);
            const auto g = parameter_shift_gradient(model, data.xs[i], data.ys[i], p, ex);
            for (std::size_t j = 0; j < g.size(); ++j) grad[j] += g[j] / n;
        }
        mse /= n;
        if (!std::isfinite(mse)) {
            std::ostringstream os;
            os << "NaN loss at iteration " << it;
            throw Error(ErrorKind::numeric, os.str());
        }
        r.mse_history.push_back(mse);
        adam_step(adam, model.theta, grad);
    }
    const double final_mse = mean_squared_error(model, data, ex);
    if (!std::isfinite(final_mse)) {
        std::ostringstream os;
        os << "NaN loss at iteration " << opt.epochs;
        throw Error(ErrorKind::numeric, os.str());
    }
    r.mse_history.push_back(final_mse);
    r.circuits = ex.circuits();
    r.model = std::move(model);
    return r;
}

inline PqcModel initial_model(int layers, int n_shots, const TrainOptions &opt) {
    PqcModel m = PqcModel::zeros(layers, n_shots);
    if (opt.init == Init::uniform) {
        std::mt19937_64 rng(opt.seed);
        std::uniform_real_distribution<double> u(-opt.init_range, opt.init_range);
        for (double &t : m.theta) t = u(rng);
    }
    return m;
}

inline TrainResult train(int layers, int n_shots, const TrainingSet &data, const TrainOptions &opt) {
    return train_from(initial_model(layers, n_shots, opt), data, opt);
}

struct Bands {
    std::vector<double> means;
    std::vector<double> stds;  // sample standard deviation
};

/// Mean and sample std of n_runs independent shot-sampled predictions per x.
inline Bands evaluate_with_uncertainty(const PqcModel &m, std::span<const double> xs, int n_runs, std::uint64_t seed) {
    if (n_runs < 2) throw Error(ErrorKind::domain, "evaluate: need at least 2 runs");
    Executor ex(m.n_shots, seed);
    Bands b;
    for (double x : xs) {
        // Welford: identical draws give exactly zero spread.
        double mean = 0.0, m2 = 0.0;
        for (int k = 1; k <= n_runs; ++k) {
            const double p = predict(m, x, ex), d = p - mean;
            mean += d / k;
            m2 += d * (p - mean);
        }
        b.means.push_back(mean);
        b.stds.push_back(std::sqrt(m2 / (n_runs - 1)));
    }
    return b;
}

}  // namespace cqed::qml
