#pragma once

#include "snslab/dynamics.hpp"

namespace snslab {

/// Outcome of the short-time regularity check: under the gate conditions
/// eps <= 1/(5 C* K^2) and theta_eps^2 <= K^2/4 (with |Ax0| <= K), the
/// solution must satisfy sup_[0,eps] |Au| < 2K, and |A(u-z)|^2 + theta^2 must
/// stay under the quadratic-growth envelope y0 / (1 - C* s y0) pointwise.
struct LocalBoundReport {
    double k = 0.0;
    double eps = 0.0;
    double theta_eps = 0.0;
    bool eps_hypothesis_ok = false;
    bool theta_hypothesis_ok = false;
    bool hypotheses_ok = false;
    bool sharper_hypothesis_ok = false;  // (K^2 + theta^2)(1/(2K^2) + C* eps) < 1
    bool asserted = false;               // bound actually checked (gates held)
    double sup_au = 0.0;
    bool bound_ok = false;     // sup |Au| < 2K
    bool riccati_ok = false;   // envelope holds at every grid time
    double riccati_max_ratio = 0.0;  // max over grid of lhs/rhs
    bool blown_up = false;
};

inline LocalBoundReport check_local_regularity(const BasisPtr& basis, const SpectralField& x0,
                                               const ForcingPath& w, double k, double eps, double dt,
                                               double nu, double c_star) {
    const double ax0 = norm_da(x0);
    if (ax0 > k + 1e-12) throw std::invalid_argument("check_local_regularity: |Ax0| must be <= K");
    if (!(c_star > 0.0)) throw std::invalid_argument("check_local_regularity: C* must be positive");

    LocalBoundReport rep;
    rep.k = k;
    rep.eps = eps;

    SimOptions opts;
    opts.dt = dt;
    opts.nu = nu;
    const DeterministicSolution sol = solve_deterministic(basis, x0, w, eps, opts);
    rep.theta_eps = sol.theta;
    rep.blown_up = sol.traj.blown_up;

    rep.eps_hypothesis_ok = eps <= 1.0 / (5.0 * c_star * k * k) * (1.0 + 1e-12);
    rep.theta_hypothesis_ok = sol.theta * sol.theta <= 0.25 * k * k;
    rep.hypotheses_ok = rep.eps_hypothesis_ok && rep.theta_hypothesis_ok;
    rep.sharper_hypothesis_ok =
        (k * k + sol.theta * sol.theta) * (0.5 / (k * k) + c_star * eps) < 1.0;

    rep.sup_au = sol.traj.sup_au;
    if (!rep.hypotheses_ok) return rep;  // nothing asserted outside the gates

    rep.asserted = true;
    rep.bound_ok = !sol.traj.blown_up && rep.sup_au < 2.0 * k;

    const double theta_sq = sol.theta * sol.theta;
    const double y0 = ax0 * ax0 + theta_sq;
    rep.riccati_ok = true;
    for (std::size_t j = 0; j < sol.traj.times.size(); ++j) {
        const double s = sol.traj.times[j];
        const double denom = 1.0 - c_star * s * y0;
        if (denom <= 0.0) {
            rep.riccati_ok = false;
            break;
        }
        const double lhs = sol.av_norm[j] * sol.av_norm[j] + theta_sq;
        const double rhs = y0 / denom;
        rep.riccati_max_ratio = std::max(rep.riccati_max_ratio, lhs / rhs);
        if (lhs > rhs * (1.0 + 1e-9) + 1e-12) rep.riccati_ok = false;
    }
    return rep;
}

}  // namespace snslab
