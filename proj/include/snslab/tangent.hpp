#pragma once

#include "snslab/dynamics.hpp"

namespace snslab {

/// Derivative flow along one cut-off trajectory, plus the stochastic integral
/// int <A^{3/2} D_h u, d beta> accumulated along the same driving noise (the
/// gradient-representation weight).
struct TangentTrajectory {
    std::vector<double> times;
    std::vector<double> a_dhu_norm;  // |A D_h u| at each grid time
    SpectralField h0;
    SpectralField final_tangent;
    double bel_integral = 0.0;
};

struct TangentRun {
    Trajectory base;
    TangentTrajectory tangent;
};

/// Co-integrates the cut-off dynamics and their linearization in the initial
/// condition. The tangent update is the exact differential of the discrete
/// base step, so common-noise finite differences converge to it as the
/// perturbation size goes to zero.
inline TangentRun simulate_tangent(const BasisPtr& basis, const NoiseSpec& noise,
                                   const SpectralField& x0, const SpectralField& h,
                                   const CutoffSpec& cutoff, double eps, double dt, double nu,
                                   RngStream stream) {
    require_same_basis(x0, h);
    if (x0.basis.get() != basis.get()) throw std::invalid_argument("basis mismatch");
    const std::size_t n_steps = grid_index(eps, dt);
    if (n_steps == 0) throw std::invalid_argument("horizon shorter than one step");

    detail::Stepper stepper(basis, dt, nu);
    const auto& lam = basis->eigenvalues();
    const auto& decay = stepper.decay();
    std::vector<double> lam32(basis->size());
    for (std::size_t i = 0; i < basis->size(); ++i) lam32[i] = std::pow(lam[i], 1.5);

    std::vector<double> u = x0.c;
    std::vector<double> d = h.c;
    std::vector<double> raw(basis->size());  // sqrt(dt) xi, the beta increments
    std::vector<double> dw(basis->size());
    std::vector<double> b_uu(basis->size()), bd1(basis->size()), bd2(basis->size());

    TangentRun run;
    run.base.dt = dt;
    run.tangent.h0 = h;
    const double rho = cutoff.radius();
    const double root_dt = std::sqrt(dt);

    double au_sq = stepper.au_sq(u);
    auto record = [&](std::size_t j) {
        const double t = double(j) * dt;
        const double au = std::sqrt(au_sq);
        run.base.times.push_back(t);
        run.base.au_norm.push_back(au);
        run.base.sup_au = std::max(run.base.sup_au, au);
        if (run.base.tau == kNeverStopped && au >= rho) run.base.tau = t;
        run.tangent.times.push_back(t);
        run.tangent.a_dhu_norm.push_back(std::sqrt(norm_da_sq(lam, d)));
    };
    record(0);

    for (std::size_t j = 0; j < n_steps; ++j) {
        for (std::size_t i = 0; i < raw.size(); ++i) {
            raw[i] = root_dt * stream.normal();
            dw[i] = noise.sigmas[i] * raw[i];
        }

        // Gradient-representation integrand at the left node.
        double bel = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) bel += lam32[i] * d[i] * raw[i];
        run.tangent.bel_integral += bel;

        const double chi = cutoff.chi(au_sq);
        const double chi_p = cutoff.chi_prime(au_sq);
        stepper.bilinear_into(u, u, b_uu);
        stepper.bilinear_into(d, u, bd1);
        stepper.bilinear_into(u, d, bd2);
        // <Au, A D_h u>
        double au_ad = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) au_ad += lam[i] * lam[i] * u[i] * d[i];

        for (std::size_t i = 0; i < d.size(); ++i) {
            const double drift = chi * (bd1[i] + bd2[i]) + 2.0 * chi_p * au_ad * b_uu[i];
            d[i] = decay[i] * (d[i] - dt * drift);
        }
        for (std::size_t i = 0; i < u.size(); ++i)
            u[i] = decay[i] * (u[i] - dt * chi * b_uu[i] + dw[i]);

        au_sq = stepper.au_sq(u);
        if (!std::isfinite(au_sq)) {
            run.base.blown_up = true;
            run.base.blowup_time = double(j + 1) * dt;
            break;
        }
        record(j + 1);
    }

    run.base.final_field = SpectralField(basis, u);
    run.tangent.final_tangent = SpectralField(basis, d);
    return run;
}

}  // namespace snslab
