#pragma once

#include "snslab/dynamics.hpp"
#include "snslab/events.hpp"
#include "snslab/parallel.hpp"
#include "snslab/stats.hpp"

namespace snslab {

/// Shared knobs for every Monte Carlo estimator in the lab.
struct LabContext {
    BasisPtr basis;
    NoiseSpec noise;
    double dt = 1e-3;
    double nu = 1.0;
    int jobs = 1;
};

struct FunctionalSample {
    std::vector<double> values;  // psi(u(t)) per path
    std::size_t n_flagged = 0;   // blown-up paths (scored by the functional's escape value)
};

/// psi(u(t)) over n independent paths; path i derives its stream as
/// stream.child(i), so two calls with the same stream couple pathwise.
inline FunctionalSample sample_functional(const LabContext& ctx, const SpectralField& x0, double t,
                                          const Functional& psi, std::size_t n,
                                          const std::optional<CutoffSpec>& cutoff, RngStream stream) {
    FunctionalSample out;
    out.values.assign(n, 0.0);
    std::vector<unsigned char> flagged(n, 0);
    SimOptions opts;
    opts.T = t;
    opts.dt = ctx.dt;
    opts.nu = ctx.nu;
    opts.cutoff = cutoff;
    parallel_for(n, ctx.jobs, [&](std::size_t i) {
        Trajectory traj = simulate(ctx.basis, ctx.noise, x0, opts, stream.child(i));
        if (traj.blown_up) {
            flagged[i] = 1;
            out.values[i] = psi.eval_blown_up();
        } else {
            out.values[i] = psi.eval(traj.final_field);
        }
    });
    for (unsigned char f : flagged) out.n_flagged += f;
    return out;
}

/// Transition-probability estimate P(t, x, event) with an exact binomial CI.
struct KernelEstimate {
    double t = 0.0;
    std::size_t n = 0;
    std::size_t n_in = 0;
    std::size_t n_flagged = 0;
    double p_hat = 0.0;
    BinomialCI ci;
    std::optional<double> cutoff_radius;

    double wald_se() const { return std::sqrt(std::max(p_hat * (1.0 - p_hat), 1e-12) / double(n)); }
};

inline KernelEstimate estimate_kernel(const LabContext& ctx, const SpectralField& x0, double t,
                                      const EventSpec& event, std::size_t n,
                                      const std::optional<CutoffSpec>& cutoff, RngStream stream) {
    if (n < 1) throw std::invalid_argument("estimate_kernel: need at least one path");
    const FunctionalSample s = sample_functional(ctx, x0, t, Functional::indicator(event), n, cutoff,
                                                 stream);
    KernelEstimate est;
    est.t = t;
    est.n = n;
    est.n_flagged = s.n_flagged;
    for (double v : s.values) est.n_in += (v != 0.0);
    est.p_hat = double(est.n_in) / double(n);
    est.ci = clopper_pearson(est.n_in, n);
    if (cutoff) est.cutoff_radius = cutoff->radius();
    return est;
}

}  // namespace snslab
