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

// Damped Gauss-Newton (Levenberg-Marquardt) for small dense problems with
// analytic Jacobians. Used by every curve fitter in the toolkit.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "cqed/error.hpp"

namespace cqed {

struct LmOptions {
    int max_iterations = 200;
    double step_tolerance = 1e-12;    // relative parameter change
    double cost_tolerance = 1e-15;    // relative cost change
    double gradient_tolerance = 1e-14;
    double initial_damping = 1e-3;
};

struct LmResult {
    Eigen::VectorXd params;
    Eigen::VectorXd sigma;       // 1-sigma from rss/(m-n) * (J^T J)^-1
    Eigen::MatrixXd covariance;
    double rss = 0.0;
    int iterations = 0;
};

/// `model(p, r, J)` fills residuals r (size m) and Jacobian J (m x n) and
/// returns false when p is outside the model's domain; such trial steps are
/// rejected and the damping increased.
template <class Model>
LmResult levenberg_marquardt(Model &&model, Eigen::VectorXd p, Eigen::Index m, const LmOptions &opt = {}) {
    const Eigen::Index n = p.size();
    Eigen::VectorXd r(m), r_trial(m);
    Eigen::MatrixXd J(m, n), J_trial(m, n);
    if (!model(p, r, J)) throw Error(ErrorKind::fit_failed, "fit failed: initial guess outside model domain");
    double cost = r.squaredNorm();
    double lambda = opt.initial_damping;

    int it = 0;
    bool converged = false;
    for (; it < opt.max_iterations && !converged; ++it) {
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * r;
        if (g.lpNorm<Eigen::Infinity>() <= opt.gradient_tolerance * (1.0 + cost)) {
            converged = true;
            break;
        }
        bool accepted = false;
        while (!accepted) {
            Eigen::MatrixXd A = JtJ;
            A.diagonal() += lambda * JtJ.diagonal().cwiseMax(1e-30);
            const Eigen::VectorXd step = A.ldlt().solve(-g);
            const Eigen::VectorXd trial = p + step;
            if (step.allFinite() && model(trial, r_trial, J_trial)) {
                const double trial_cost = r_trial.squaredNorm();
                if (std::isfinite(trial_cost) && trial_cost <= cost) {
                    const double rel_step = step.norm() / (p.norm() + opt.step_tolerance);
                    const double rel_cost = (cost - trial_cost) / std::max(cost, std::numeric_limits<double>::min());
                    p = trial;
                    r.swap(r_trial);
                    J.swap(J_trial);
                    cost = trial_cost;
                    lambda = std::max(lambda / 10.0, 1e-15);
                    accepted = true;
                    if (rel_step < opt.step_tolerance || rel_cost < opt.cost_tolerance || cost == 0.0)
                        converged = true;
                    continue;
                }
            }
            lambda *= 10.0;
            if (lambda > 1e16) {
                // No descent direction left: we are at a minimum to machine precision.
                converged = true;
                break;
            }
        }
    }
    if (!converged) {
        std::ostringstream os;
        os << "fit failed: no convergence after " << it << " iterations (residual norm " << std::sqrt(cost) << ")";
        throw Error(ErrorKind::fit_failed, os.str());
    }

    LmResult out;
    out.params = p;
    out.rss = cost;
    out.iterations = it;
    const double dof = m > n ? static_cast<double>(m - n) : 1.0;
    // Column-equilibrate before the pseudo-inverse: parameters such as a
    // microsecond lifetime and a kHz detuning differ by many decades.
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd d = JtJ.diagonal().cwiseMax(std::numeric_limits<double>::min()).cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd scaled = d.asDiagonal() * JtJ * d.asDiagonal();
    out.covariance = d.asDiagonal() * scaled.completeOrthogonalDecomposition().pseudoInverse() * d.asDiagonal() *
                     (cost / dof);
    out.sigma = out.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    return out;
}

}  // namespace cqed
