#pragma once

#include "snslab/dynamics.hpp"
#include "snslab/parallel.hpp"
#include "snslab/stats.hpp"

namespace snslab {

/// Checks the martingale characterization on an ensemble: the compensated
/// process M_t^phi should have zero mean, and its empirical quadratic
/// variation should match t sum_i sigma_i^2 <phi, h_i>^2.
struct MartingaleReport {
    double t = 0.0;
    std::size_t n_paths = 0;
    MeanEstimate residual;     // E[M_t^phi]
    double qv_ratio = 0.0;     // empirical QV / theoretical
    double qv_ratio_se = 0.0;  // standard error of the ratio
    double theoretical_qv = 0.0;
    std::size_t n_stopped = 0;  // paths that reached the cutoff radius (should be 0)
};

inline MartingaleReport martingale_residual(const BasisPtr& basis, const NoiseSpec& noise,
                                            const SpectralField& x0, const std::vector<double>& phi,
                                            double t, double dt, double nu, std::size_t n_paths,
                                            const std::optional<CutoffSpec>& cutoff, RngStream stream,
                                            int jobs) {
    const std::size_t t_idx = grid_index(t, dt);  // throws when t is off-grid
    if (t_idx == 0) throw std::invalid_argument("martingale_residual: t must be positive");

    MartingaleReport rep;
    rep.t = t;
    rep.n_paths = n_paths;
    for (std::size_t i = 0; i < phi.size(); ++i)
        rep.theoretical_qv += t * noise.sigmas[i] * noise.sigmas[i] * phi[i] * phi[i];

    std::vector<double> m_final(n_paths), qv(n_paths);
    std::vector<unsigned char> stopped(n_paths, 0);
    parallel_for(n_paths, jobs, [&](std::size_t p) {
        SimOptions opts;
        opts.T = t;
        opts.dt = dt;
        opts.nu = nu;
        opts.cutoff = cutoff;
        opts.probes = {phi};
        Trajectory traj = simulate(basis, noise, x0, opts, stream.child(p));
        const auto& m = traj.probe_martingale[0];
        m_final[p] = m[t_idx];
        double q = 0.0;
        for (std::size_t j = 1; j <= t_idx; ++j) q += (m[j] - m[j - 1]) * (m[j] - m[j - 1]);
        qv[p] = q;
        stopped[p] = traj.tau != kNeverStopped ? 1 : 0;
    });

    rep.residual = mean_se(m_final);
    const MeanEstimate qv_est = mean_se(qv);
    if (rep.theoretical_qv > 0.0) {
        rep.qv_ratio = qv_est.mean / rep.theoretical_qv;
        rep.qv_ratio_se = qv_est.se / rep.theoretical_qv;
    } else {
        rep.qv_ratio = qv_est.mean;  // absolute, for the zero-noise degenerate case
        rep.qv_ratio_se = qv_est.se;
    }
    for (unsigned char s : stopped) rep.n_stopped += s;
    return rep;
}

/// Reconstructed driving motion for phi = h_i: beta_i(t) = M_t^{h_i} / sigma_i.
inline std::vector<double> reconstruct_brownian(const Trajectory& traj, std::size_t probe,
                                                double sigma) {
    std::vector<double> beta(traj.probe_martingale[probe].size());
    for (std::size_t j = 0; j < beta.size(); ++j) beta[j] = traj.probe_martingale[probe][j] / sigma;
    return beta;
}

}  // namespace snslab
