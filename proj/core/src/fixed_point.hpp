#pragma once

// Damped fixed-point driver shared by the reduced and microscopic solvers.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>
#include <vector>

#include "gjsim/solver.hpp"

namespace gjsim::detail {

struct FixedPointResult {
    Eigen::VectorXd x;
    double residual = 0.0;
    bool converged = false;
    int iterations = 0;
    std::vector<double> history;
};

using UpdateMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
/// Radius bound of each consecutive 3-vector block of the state.
using BlockBounds = std::vector<double>;

inline void project(Eigen::VectorXd& x, const BlockBounds& bounds) {
    for (std::size_t b = 0; b < bounds.size(); ++b) {
        auto v = x.segment<3>(static_cast<Eigen::Index>(3 * b));
        const double n = v.norm();
        if (n > bounds[b]) v *= bounds[b] / n;
    }
}

inline double max_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// One Newton step on R(x) = G(x) - x with a central-difference Jacobian.
// Returns true and overwrites x when the step (or a backtracked fraction of
// it), projected back into the bounds, lowers the residual.
inline bool newton_step(Eigen::VectorXd& x, double& residual, const UpdateMap& update, const BlockBounds& bounds) {
    const Eigen::Index n = x.size();
    const Eigen::VectorXd r0 = update(x) - x;
    Eigen::MatrixXd jac(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double step = 1e-6 * std::max(1.0, std::abs(x[k]));
        Eigen::VectorXd xp = x, xm = x;
        xp[k] += step;
        xm[k] -= step;
        jac.col(k) = ((update(xp) - xp) - (update(xm) - xm)) / (2.0 * step);
    }
    const Eigen::VectorXd delta = jac.colPivHouseholderQr().solve(-r0);
    if (!delta.allFinite()) return false;
    double scale = 1.0;
    for (int attempt = 0; attempt < 20; ++attempt, scale *= 0.5) {
        Eigen::VectorXd trial = x + scale * delta;
        project(trial, bounds);
        const double r = max_norm(update(trial) - trial);
        if (r < residual) {
            x = std::move(trial);
            residual = r;
            return true;
        }
    }
    return false;
}

// Iterates x <- (1 - lambda) x + lambda G(x) until max|G(x) - x| < tol.
// lambda is halved (down to min_mixing) whenever the residual fails to improve
// on its best value for stall_window consecutive iterations.
inline FixedPointResult iterate_fixed_point(Eigen::VectorXd x, const UpdateMap& update,
                                            const BlockBounds& bounds, const SolverSettings& s) {
    FixedPointResult out;
    double lambda = s.mixing;
    double best = std::numeric_limits<double>::infinity();
    int since_best = 0;
    for (int it = 0; it < s.max_iterations; ++it) {
        Eigen::VectorXd g = update(x);
        double r = max_norm(g - x);
        out.history.push_back(r);
        out.iterations = it + 1;
        if (r < s.tolerance) {
            out.x = std::move(x);
            out.residual = r;
            out.converged = true;
            return out;
        }
        if (s.newton_polish && it >= s.newton_after && it % 5 == 0) {
            Eigen::VectorXd xn = x;
            double rn = r;
            if (newton_step(xn, rn, update, bounds)) {
                x = std::move(xn);
                if (rn < best) { best = rn; since_best = 0; }
                continue;
            }
        }
        if (r < best) {
            best = r;
            since_best = 0;
        } else if (++since_best >= s.stall_window) {
            lambda = std::max(s.min_mixing, 0.5 * lambda);
            since_best = 0;
            best = r;
        }
        x = (1.0 - lambda) * x + lambda * g;
    }
    const Eigen::VectorXd g = update(x);
    out.residual = max_norm(g - x);
    out.converged = out.residual < s.tolerance;
    out.x = std::move(x);
    return out;
}

}  // namespace gjsim::detail
